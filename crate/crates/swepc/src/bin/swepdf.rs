//! Probability density reconstruction from one coefficients.dat row.
//!
//! Reads a single row on standard input (e.g. selected with
//! `sed -n <line>p coefficients.dat`) and writes a (value, density) table to
//! standard output.

use clap::Parser;
use std::io::Read;
use std::process::ExitCode;
use swepc::error::Error;
use swepc::io::{pdf_table, CoefficientsRow, PdfVariable};

#[derive(Parser, Debug)]
#[command(name = "swepdf", version, disable_help_subcommand = true)]
struct Args {
    /// Smallest realisation value evaluated.
    #[arg(long, value_name = "VALUE", allow_hyphen_values = true)]
    min: f64,

    /// Largest realisation value evaluated.
    #[arg(long, value_name = "VALUE", allow_hyphen_values = true)]
    max: f64,

    /// Number of evaluation points across [min, max].
    #[arg(long, default_value_t = 1000)]
    samples: usize,

    /// Variable to reconstruct: z (topography), water (depth),
    /// q (discharge) or derived-eta (free-surface elevation).
    variable: String,
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Parse(_) => 3,
        Error::DegenerateDistribution { .. } => 4,
        Error::Io { .. } => 5,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(table) => {
            print!("{table}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("swepdf: error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn run(args: &Args) -> Result<String, Error> {
    let variable: PdfVariable = args.variable.parse()?;
    let mut input = String::new();
    std::io::stdin()
        .read_to_string(&mut input)
        .map_err(|e| Error::Io {
            path: "<stdin>".into(),
            source: e,
        })?;
    let line = input
        .lines()
        .find(|l| !l.trim().is_empty())
        .ok_or_else(|| Error::Parse("no input row on standard input".into()))?;
    let row = CoefficientsRow::parse(line)?;
    let table = pdf_table(&row, variable, args.min, args.max, args.samples)?;
    Ok(table.render())
}
