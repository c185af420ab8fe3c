//! Shallow water solver front end: stochastic Galerkin, deterministic and
//! Monte Carlo runs of the built-in test cases, written as text tables.

use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;
use swepc::cases::{builtin_case, CaseName};
use swepc::deterministic;
use swepc::error::Error;
use swepc::galerkin::{sg_run, SgScheme, SgVariant};
use swepc::io;
use swepc::monte_carlo::{mc_run, AmplitudeSampler};

/// One-dimensional shallow water flow with quantified uncertainty.
///
/// Runs the requested test case and writes coefficients.dat,
/// statistics.dat and derived-statistics.dat (plus sample<n>.dat files for
/// Monte Carlo runs) into the output directory.
#[derive(Parser, Debug)]
#[command(name = "swepc", version, disable_help_subcommand = true)]
struct Args {
    /// Polynomial chaos basis order P; 0 runs the deterministic model.
    #[arg(long, default_value_t = 3)]
    degree: usize,

    /// Test case: lakeAtRest, criticalSteadyState or tsengSteadyState.
    test_case: String,

    /// Source discretisation: wellBalancedH or centredDifferenceH.
    discretisation: String,

    /// Directory the output tables are written to (created if missing).
    #[arg(long, value_name = "DIR")]
    output_dir: PathBuf,

    /// Run Monte Carlo iterations of the well-balanced deterministic model
    /// instead of the stochastic Galerkin solver.
    #[arg(long)]
    monte_carlo: bool,

    /// Number of Monte Carlo iterations.
    #[arg(long, default_value_t = 2000, value_name = "N")]
    mc_iterations: u64,

    /// Seed for the Monte Carlo amplitude draws.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Override the number of Gauss-Hermite nodes used for flux projections
    /// (defaults to P+1).
    #[arg(long, value_name = "N")]
    quad_nodes: Option<usize>,

    /// Re-sample the Riemann solver for every projection order instead of
    /// reusing the per-node fluxes.
    #[arg(long)]
    no_flux_cache: bool,

    /// Harten-Hyman entropy fix on sonic rarefactions.
    #[arg(long, default_value_t = true, value_name = "BOOL", action = clap::ArgAction::Set)]
    entropy_fix: bool,

    /// Allow basis orders beyond the case's known stable limit.
    #[arg(long)]
    no_degree_cap: bool,
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::UnknownCase(_) => 3,
        Error::UnknownDiscretisation(_) => 4,
        Error::Io { .. } => 5,
        Error::DepthPositivity { .. } => 6,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("swepc: error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn run(args: &Args) -> Result<(), Error> {
    let name: CaseName = args.test_case.parse()?;
    let variant: SgVariant = args.discretisation.parse()?;
    let case = builtin_case(name)?;
    if args.monte_carlo && args.mc_iterations == 0 {
        return Err(Error::InvalidInput(
            "--monte-carlo needs --mc-iterations >= 1".into(),
        ));
    }

    let mut cfg = case.simulation_config();
    cfg.entropy_fix = args.entropy_fix;

    let bundle = if args.monte_carlo {
        // reference statistics always come from the well-balanced
        // deterministic model, one iteration per draw
        let sampler = AmplitudeSampler::for_case(&case, args.seed)?;
        let acc = mc_run(&case, args.mc_iterations, &sampler, &cfg)?;
        let description = format!(
            "swepc monte-carlo case={name} iterations={} seed={} (well-balanced deterministic model)",
            args.mc_iterations, args.seed
        );
        eprintln!(
            "swepc: {} iterations, {} Riemann solves",
            acc.count(),
            acc.riemann_calls()
        );
        io::mc_output(&case, &acc, &description)
    } else if args.degree == 0 && variant == SgVariant::WellBalanced {
        let outcome = deterministic::run(&case, case.mean_amplitude(), &cfg)?;
        if outcome.max_courant > cfg.courant_warn {
            eprintln!(
                "swepc: warning: maximum Courant number {:.3} exceeds {}",
                outcome.max_courant, cfg.courant_warn
            );
        }
        let description = format!("swepc case={name} discretisation={variant} degree=0");
        eprintln!(
            "swepc: {} steps, {} Riemann solves, max Courant {:.3}",
            outcome.field.step, outcome.riemann_calls, outcome.max_courant
        );
        io::deterministic_output(&case, &outcome.field, &description)
    } else {
        if args.degree > case.max_stable_order && !args.no_degree_cap {
            return Err(Error::InvalidInput(format!(
                "degree {} exceeds the stable limit {} for {name} (flux quadrature reaches \
                 negative depths); pass --no-degree-cap to try anyway",
                args.degree, case.max_stable_order
            )));
        }
        let mut scheme = SgScheme::with_order(variant, args.degree)?;
        if let Some(nodes) = args.quad_nodes {
            scheme = scheme.with_flux_nodes(nodes)?;
        }
        if args.no_flux_cache {
            scheme = scheme.without_flux_cache();
        }
        let outcome = sg_run(&case, &mut scheme, &cfg)?;
        let description = format!(
            "swepc case={name} discretisation={variant} degree={}",
            args.degree
        );
        eprintln!(
            "swepc: {} steps, {} Riemann solves",
            outcome.field.step, outcome.riemann_calls
        );
        io::sg_output(&case, &outcome.field, scheme.basis(), &description)?
    };

    let written = bundle.write_to_dir(&args.output_dir)?;
    eprintln!(
        "swepc: wrote {} files to {}",
        written.len(),
        args.output_dir.display()
    );
    Ok(())
}
