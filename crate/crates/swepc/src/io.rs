//! Text tables written by the command-line tools.
//!
//! Every output is a whitespace-separated table with `#`-prefixed header
//! lines, one row per element. Values are printed with Rust's shortest
//! round-trip formatting, so parsing a file back reproduces the in-memory
//! doubles bit for bit.

use crate::cases::CaseSpec;
use crate::chaos::{gauss_hermite, ChaosCoefficients, HermiteBasis};
use crate::deterministic::DeterministicField;
use crate::error::{Error, Result};
use crate::galerkin::StochasticField;
use crate::monte_carlo::{McAccumulator, McVariable};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// An in-memory text table: comment lines, column names, numeric rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub comments: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: Into<String>>(comments: Vec<String>, columns: Vec<S>) -> Self {
        Self {
            comments,
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Renders the table: `#` comments, a `#` column-name line, then rows.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for comment in &self.comments {
            let _ = writeln!(out, "# {comment}");
        }
        let _ = writeln!(out, "# {}", self.columns.join(" "));
        for row in &self.rows {
            let mut first = true;
            for v in row {
                if !first {
                    out.push(' ');
                }
                let _ = write!(out, "{v}");
                first = false;
            }
            out.push('\n');
        }
        out
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render()).map_err(|e| Error::io(path, e))
    }

    /// Parses a rendered table. The last comment line is taken as the
    /// column names.
    pub fn parse(text: &str) -> Result<Self> {
        let mut comments = Vec::new();
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                comments.push(comment.trim().to_string());
                continue;
            }
            let row: std::result::Result<Vec<f64>, _> =
                line.split_whitespace().map(str::parse::<f64>).collect();
            rows.push(row.map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?);
        }
        let columns = comments
            .pop()
            .map(|c| c.split_whitespace().map(String::from).collect())
            .unwrap_or_default();
        Ok(Self {
            comments,
            columns,
            rows,
        })
    }

    /// Index of a named column.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

/// Writes one table to `path` (operation-level face of [`Table`]).
pub fn write_table(path: &Path, headers: &[String], rows: &[Vec<f64>]) -> Result<()> {
    let (comments, columns) = match headers.split_last() {
        Some((cols, rest)) => (
            rest.to_vec(),
            cols.split_whitespace().map(String::from).collect(),
        ),
        None => (Vec::new(), Vec::new()),
    };
    let table = Table {
        comments,
        columns,
        rows: rows.to_vec(),
    };
    table.write_to(path)
}

/// Below this standard deviation a distribution is treated as certain and
/// its skewness/kurtosis reported as zero.
const DEGENERATE_STD: f64 = 1e-12;

/// mean, std, skewness and kurtosis of an expansion.
pub fn expansion_summary(c: &ChaosCoefficients, basis: &HermiteBasis) -> Result<[f64; 4]> {
    let mean = c.moment(1, basis)?;
    let var = c.moment(2, basis)?.max(0.0);
    if var.sqrt() <= DEGENERATE_STD {
        // standardised moments of an (almost) certain value are rounding
        // noise; report the raw std and zero shape statistics
        return Ok([mean, var.sqrt(), 0.0, 0.0]);
    }
    let m3 = c.moment(3, basis)?;
    let m4 = c.moment(4, basis)?;
    Ok([mean, var.sqrt(), m3 / var.powf(1.5), m4 / (var * var)])
}

/// Velocity statistics by quadrature realisation of q/h at 2P+2 nodes
/// (velocity is not polynomial in the germ, so there is no exact
/// coefficient-space contraction).
pub fn velocity_summary(
    h: &ChaosCoefficients,
    q: &ChaosCoefficients,
    order: usize,
) -> Result<[f64; 4]> {
    let rule = gauss_hermite(2 * order + 2)?;
    let u = |xi: f64| q.evaluate(xi) / h.evaluate(xi);
    let mean = rule.ensemble_average(u)?;
    let var = rule.ensemble_average(|xi| (u(xi) - mean).powi(2))?.max(0.0);
    if var.sqrt() <= DEGENERATE_STD {
        return Ok([mean, var.sqrt(), 0.0, 0.0]);
    }
    let m3 = rule.ensemble_average(|xi| (u(xi) - mean).powi(3))?;
    let m4 = rule.ensemble_average(|xi| (u(xi) - mean).powi(4))?;
    Ok([mean, var.sqrt(), m3 / var.powf(1.5), m4 / (var * var)])
}

/// The files produced by one model run.
#[derive(Debug, Clone)]
pub struct OutputBundle {
    /// Expansion coefficients (absent for Monte Carlo runs).
    pub coefficients: Option<Table>,
    pub statistics: Table,
    pub derived_statistics: Table,
    /// Per-element Monte Carlo samples, indexed by element.
    pub samples: Option<Vec<Table>>,
}

impl OutputBundle {
    /// Writes every table into `dir` (created if missing) and returns the
    /// paths written.
    pub fn write_to_dir(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut written = Vec::new();
        let mut emit = |name: String, table: &Table| -> Result<()> {
            let path = dir.join(name);
            table.write_to(&path)?;
            written.push(path);
            Ok(())
        };
        if let Some(coeffs) = &self.coefficients {
            emit("coefficients.dat".into(), coeffs)?;
        }
        emit("statistics.dat".into(), &self.statistics)?;
        emit("derived-statistics.dat".into(), &self.derived_statistics)?;
        if let Some(samples) = &self.samples {
            for (i, table) in samples.iter().enumerate() {
                emit(format!("sample{i}.dat"), table)?;
            }
        }
        Ok(written)
    }
}

fn stat_columns(prefix: &str) -> [String; 4] {
    [
        format!("{prefix}_mean"),
        format!("{prefix}_std"),
        format!("{prefix}_skew"),
        format!("{prefix}_kurtosis"),
    ]
}

fn coefficient_columns(order: usize) -> Vec<String> {
    let mut cols = vec!["x".to_string()];
    for var in ["z", "h", "q"] {
        for p in 0..=order {
            cols.push(format!("{var}_{p}"));
        }
    }
    cols
}

fn statistics_columns(variables: &[&str]) -> Vec<String> {
    let mut cols = vec!["x".to_string()];
    for var in variables {
        cols.extend(stat_columns(var));
    }
    cols
}

/// Tables for a stochastic Galerkin (or order-0 deterministic-mode) run.
pub fn sg_output(
    case: &CaseSpec,
    field: &StochasticField,
    basis: &HermiteBasis,
    description: &str,
) -> Result<OutputBundle> {
    let order = field.order();
    let mut coefficients = Table::new(vec![description.to_string()], coefficient_columns(order));
    let mut statistics = Table::new(
        vec![description.to_string()],
        statistics_columns(&["z", "h", "q"]),
    );
    let mut derived = Table::new(
        vec![description.to_string()],
        statistics_columns(&["eta", "u"]),
    );

    for i in 0..field.len() {
        let x = case.mesh.centre(i);
        let mut row = vec![x];
        for c in [&field.z[i], &field.h[i], &field.q[i]] {
            row.extend_from_slice(c.as_slice());
        }
        coefficients.push_row(row);

        let mut stats_row = vec![x];
        for c in [&field.z[i], &field.h[i], &field.q[i]] {
            stats_row.extend_from_slice(&expansion_summary(c, basis)?);
        }
        statistics.push_row(stats_row);

        let eta = field.eta_coefficients(i);
        let mut derived_row = vec![x];
        derived_row.extend_from_slice(&expansion_summary(&eta, basis)?);
        derived_row.extend_from_slice(&velocity_summary(&field.h[i], &field.q[i], order)?);
        derived.push_row(derived_row);
    }

    Ok(OutputBundle {
        coefficients: Some(coefficients),
        statistics,
        derived_statistics: derived,
        samples: None,
    })
}

/// Tables for a plain deterministic run: order-0 coefficients and
/// degenerate statistics.
pub fn deterministic_output(
    case: &CaseSpec,
    field: &DeterministicField,
    description: &str,
) -> OutputBundle {
    let mut coefficients = Table::new(vec![description.to_string()], coefficient_columns(0));
    let mut statistics = Table::new(
        vec![description.to_string()],
        statistics_columns(&["z", "h", "q"]),
    );
    let mut derived = Table::new(
        vec![description.to_string()],
        statistics_columns(&["eta", "u"]),
    );
    for i in 0..field.len() {
        let x = case.mesh.centre(i);
        let (z, u) = (field.bed[i], field.flow[i]);
        coefficients.push_row(vec![x, z, u.h, u.q]);
        let degenerate = |v: f64| [v, 0.0, 0.0, 0.0];
        let mut stats_row = vec![x];
        stats_row.extend_from_slice(&degenerate(z));
        stats_row.extend_from_slice(&degenerate(u.h));
        stats_row.extend_from_slice(&degenerate(u.q));
        statistics.push_row(stats_row);
        let mut derived_row = vec![x];
        derived_row.extend_from_slice(&degenerate(u.h + z));
        derived_row.extend_from_slice(&degenerate(u.velocity()));
        derived.push_row(derived_row);
    }
    OutputBundle {
        coefficients: Some(coefficients),
        statistics,
        derived_statistics: derived,
        samples: None,
    }
}

/// Tables for a Monte Carlo run: sample statistics plus one sample file per
/// element with a row per iteration.
pub fn mc_output(case: &CaseSpec, acc: &McAccumulator, description: &str) -> OutputBundle {
    let mut statistics = Table::new(
        vec![description.to_string()],
        statistics_columns(&["z", "h", "q"]),
    );
    let mut derived = Table::new(
        vec![description.to_string()],
        statistics_columns(&["eta", "u"]),
    );
    let mut samples = Vec::with_capacity(acc.elements());
    for i in 0..acc.elements() {
        let x = case.mesh.centre(i);
        let mut stats_row = vec![x];
        for var in [McVariable::Bed, McVariable::Depth, McVariable::Discharge] {
            stats_row.extend_from_slice(&acc.moments(var, i).summary());
        }
        statistics.push_row(stats_row);

        let mut derived_row = vec![x];
        for var in [McVariable::Eta, McVariable::Velocity] {
            derived_row.extend_from_slice(&acc.moments(var, i).summary());
        }
        derived.push_row(derived_row);

        let mut sample_table = Table::new(
            vec![
                description.to_string(),
                format!("element {i} at x = {x} m, one row per Monte Carlo iteration"),
            ],
            vec!["r", "z", "h", "q", "eta", "u"],
        );
        for (row, &draw) in acc.samples(i).iter().zip(acc.draws()) {
            let [z, h, q] = *row;
            sample_table.push_row(vec![draw, z, h, q, z + h, q / h]);
        }
        samples.push(sample_table);
    }
    OutputBundle {
        coefficients: None,
        statistics,
        derived_statistics: derived,
        samples: Some(samples),
    }
}

/// The variable a density is reconstructed for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PdfVariable {
    Bed,
    Water,
    Discharge,
    DerivedEta,
}

impl std::str::FromStr for PdfVariable {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "z" => Ok(PdfVariable::Bed),
            "water" => Ok(PdfVariable::Water),
            "q" => Ok(PdfVariable::Discharge),
            "derived-eta" => Ok(PdfVariable::DerivedEta),
            other => Err(Error::Parse(format!(
                "unknown variable '{other}' (expected z, water, q or derived-eta)"
            ))),
        }
    }
}

impl std::fmt::Display for PdfVariable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PdfVariable::Bed => "z",
            PdfVariable::Water => "water",
            PdfVariable::Discharge => "q",
            PdfVariable::DerivedEta => "derived-eta",
        })
    }
}

/// One parsed `coefficients.dat` row.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientsRow {
    pub x: f64,
    pub z: ChaosCoefficients,
    pub h: ChaosCoefficients,
    pub q: ChaosCoefficients,
}

impl CoefficientsRow {
    /// Parses `x z_0..z_P h_0..h_P q_0..q_P`. The order is inferred from
    /// the token count.
    pub fn parse(line: &str) -> Result<Self> {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            return Err(Error::Parse(
                "expected a coefficients.dat data row, got a header or empty line".into(),
            ));
        }
        let values: std::result::Result<Vec<f64>, _> =
            line.split_whitespace().map(str::parse::<f64>).collect();
        let values = values.map_err(|e| Error::Parse(format!("coefficients row: {e}")))?;
        if values.len() < 4 || (values.len() - 1) % 3 != 0 {
            return Err(Error::Parse(format!(
                "coefficients row must have 1 + 3*(P+1) columns, got {}",
                values.len()
            )));
        }
        let n = (values.len() - 1) / 3;
        let group = |k: usize| values[1 + k * n..1 + (k + 1) * n].to_vec();
        Ok(Self {
            x: values[0],
            z: ChaosCoefficients::new(group(0))?,
            h: ChaosCoefficients::new(group(1))?,
            q: ChaosCoefficients::new(group(2))?,
        })
    }

    /// Coefficients of the requested variable; `derived-eta` is h + z.
    pub fn variable(&self, var: PdfVariable) -> Result<ChaosCoefficients> {
        match var {
            PdfVariable::Bed => Ok(self.z.clone()),
            PdfVariable::Water => Ok(self.h.clone()),
            PdfVariable::Discharge => Ok(self.q.clone()),
            PdfVariable::DerivedEta => self.h.add(&self.z),
        }
    }
}

/// Reconstructs the density of one variable from a coefficients row and
/// renders it as a (value, density) table.
pub fn pdf_table(
    row: &CoefficientsRow,
    var: PdfVariable,
    min: f64,
    max: f64,
    samples: usize,
) -> Result<Table> {
    let coeffs = row.variable(var)?;
    // sigma^2 = sum_{p>=1} c_p^2 p!; a (near-)certain variable has a delta
    // distribution with no density representation
    let mut factorial = 1.0;
    let mut variance = 0.0;
    for (p, &c) in coeffs.as_slice().iter().enumerate().skip(1) {
        factorial *= p as f64;
        variance += c * c * factorial;
    }
    if variance.sqrt() <= DEGENERATE_STD {
        return Err(Error::DegenerateDistribution {
            what: format!("variable '{var}' at x = {} m", row.x),
        });
    }
    let curve = crate::chaos::reconstruct_pdf(&coeffs, min, max, samples).map_err(|e| match e {
        Error::DegenerateDistribution { .. } => Error::DegenerateDistribution {
            what: format!("variable '{var}' at x = {} m", row.x),
        },
        other => other,
    })?;
    let mut table = Table::new(
        vec![format!(
            "probability density of {var} at x = {} m over [{min}, {max}]",
            row.x
        )],
        vec!["value", "density"],
    );
    for (&a, &f) in curve.abscissae.iter().zip(&curve.densities) {
        table.push_row(vec![a, f]);
    }
    Ok(table)
}
