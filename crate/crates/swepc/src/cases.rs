//! Built-in test configurations.
//!
//! Three setups exercise the solvers: a lake at rest over an uncertain hump
//! plus a rectangular obstacle, steady flow over an uncertain hump tuned to
//! sit exactly at the critical point for the mean amplitude, and slow flow
//! over a tabulated irregular bed with uniform elevation uncertainty.
//!
//! Each case describes its uncertain topography twice: as a generator
//! `z(x, r)` of smooth random bed realisations (consumed by Monte Carlo
//! iterations), and as per-element expansion coefficients (consumed by the
//! stochastic Galerkin solver). For the hump the two agree exactly because
//! the bed is linear in the random amplitude.

use crate::chaos::ChaosCoefficients;
use crate::deterministic::{BoundarySpec, Mesh, SimulationConfig};
use crate::error::{Error, Result};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

/// The uncertain smooth hump z(x, r) = r sech^2(pi x / lambda).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HumpSpec {
    /// Mean amplitude (m).
    pub mean_amplitude: f64,
    /// Amplitude standard deviation (m).
    pub std_amplitude: f64,
    /// Half-width lambda (m).
    pub half_width: f64,
}

impl HumpSpec {
    fn sech2(&self, x: f64) -> f64 {
        let s = 1.0 / (std::f64::consts::PI * x / self.half_width).cosh();
        s * s
    }
}

/// Bed elevation of the hump for amplitude draw `r`.
pub fn hump_bed(x: f64, r: f64, spec: &HumpSpec) -> f64 {
    r * spec.sech2(x)
}

/// Height of the rectangular obstacle on the interval (30, 40].
fn obstacle_height(x: f64, spec: &HumpSpec) -> f64 {
    if 30.0 < x && x <= 40.0 {
        spec.mean_amplitude
    } else {
        0.0
    }
}

/// Lake-at-rest bed: the uncertain hump plus the certain obstacle.
pub fn lake_at_rest_bed(x: f64, r: f64, spec: &HumpSpec) -> f64 {
    hump_bed(x, r, spec) + obstacle_height(x, spec)
}

/// Expansion coefficients of the hump elevation at position x.
///
/// The bed is linear in the Gaussian amplitude, so the expansion is exact:
/// order 0 carries the mean, order 1 the standard deviation
/// sigma_z(x) = sigma_r sech^2(pi x / lambda), and everything above vanishes.
pub fn hump_coefficients(x: f64, spec: &HumpSpec, order: usize) -> ChaosCoefficients {
    let s2 = spec.sech2(x);
    let mut coeffs = vec![0.0; order + 1];
    coeffs[0] = spec.mean_amplitude * s2;
    if order >= 1 {
        coeffs[1] = spec.std_amplitude * s2;
    }
    ChaosCoefficients::new(coeffs).expect("finite by construction")
}

/// Initial depth coefficients from free-surface and bed coefficients,
/// h_p = eta_p - z_p. Rejects a non-positive mean depth.
pub fn initial_coefficients(
    eta: &ChaosCoefficients,
    bed: &ChaosCoefficients,
) -> Result<ChaosCoefficients> {
    let depth = eta.sub(bed)?;
    if depth.mean() <= 0.0 {
        return Err(Error::DepthPositivity {
            depth: depth.mean(),
            context: " (initial mean depth from free surface minus bed)".into(),
        });
    }
    Ok(depth)
}

/// Tabulated bed profile: strictly increasing abscissae, linear in between.
#[derive(Debug, Clone, PartialEq)]
pub struct BedTable {
    points: Vec<(f64, f64)>,
}

impl BedTable {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidInput(
                "a bed table needs at least two points".into(),
            ));
        }
        if points.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::InvalidInput(
                "bed table abscissae must be strictly increasing".into(),
            ));
        }
        Ok(Self { points })
    }

    /// Parses the two-column text format; `#` lines are comments.
    pub fn parse(text: &str) -> Result<Self> {
        let mut points = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split_whitespace();
            let parse = |tok: Option<&str>| -> Result<f64> {
                tok.ok_or_else(|| {
                    Error::Parse(format!(
                        "bed table line {}: expected two columns",
                        lineno + 1
                    ))
                })?
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("bed table line {}: {e}", lineno + 1)))
            };
            let x = parse(cols.next())?;
            let z = parse(cols.next())?;
            points.push((x, z));
        }
        Self::new(points)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn x_range(&self) -> (f64, f64) {
        (self.points[0].0, self.points[self.points.len() - 1].0)
    }

    /// Piecewise-linear interpolation; errors outside the tabulated range.
    pub fn interpolate(&self, x: f64) -> Result<f64> {
        let (min, max) = self.x_range();
        if x < min || x > max {
            return Err(Error::BedTableRange { x, min, max });
        }
        let idx = self.points.partition_point(|&(xi, _)| xi <= x);
        if idx == 0 {
            return Ok(self.points[0].1);
        }
        if idx == self.points.len() {
            return Ok(self.points[idx - 1].1);
        }
        let (x0, z0) = self.points[idx - 1];
        let (x1, z1) = self.points[idx];
        if x == x0 {
            return Ok(z0);
        }
        Ok(z0 + (z1 - z0) * (x - x0) / (x1 - x0))
    }
}

/// Piecewise-linear bed lookup (free-function face of [`BedTable::interpolate`]).
pub fn tabulated_bed(table: &BedTable, x: f64) -> Result<f64> {
    table.interpolate(x)
}

/// How a case generates its bed, both as random realisations and as
/// expansion coefficients.
#[derive(Debug, Clone, PartialEq)]
pub enum Topography {
    /// Smooth hump, optionally with the certain rectangular obstacle.
    Hump { spec: HumpSpec, obstacle: bool },
    /// Tabulated mean profile with spatially uniform uncertainty; random
    /// realisations shift the whole profile by the draw.
    Table { table: BedTable, sigma_z: f64 },
}

/// Names of the built-in cases, spelled as the CLI expects them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseName {
    LakeAtRest,
    CriticalSteadyState,
    TsengSteadyState,
}

impl FromStr for CaseName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lakeAtRest" => Ok(CaseName::LakeAtRest),
            "criticalSteadyState" => Ok(CaseName::CriticalSteadyState),
            "tsengSteadyState" => Ok(CaseName::TsengSteadyState),
            other => Err(Error::UnknownCase(other.into())),
        }
    }
}

impl fmt::Display for CaseName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CaseName::LakeAtRest => "lakeAtRest",
            CaseName::CriticalSteadyState => "criticalSteadyState",
            CaseName::TsengSteadyState => "tsengSteadyState",
        })
    }
}

/// Full description of one named test.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseSpec {
    pub name: CaseName,
    pub mesh: Mesh,
    pub dt: f64,
    pub t_end: f64,
    pub convergence_threshold: Option<f64>,
    /// Initial spatially uniform mean free-surface elevation (m).
    pub initial_eta_mean: f64,
    /// Initial free-surface uncertainty coefficients (orders 1..); empty for
    /// all built-in cases.
    pub initial_eta_uncertainty: Vec<f64>,
    pub boundary: BoundarySpec,
    pub topography: Topography,
    /// Truncation bounds for Monte Carlo amplitude draws.
    pub amplitude_bounds: (f64, f64),
    /// Probe position for Monte Carlo convergence statistics (m).
    pub probe_x: f64,
    /// Largest basis order for which flux quadrature stays clear of negative
    /// depths on this case.
    pub max_stable_order: usize,
}

impl CaseSpec {
    /// Bed elevation at x for one random draw.
    pub fn bed_realization(&self, x: f64, amplitude: f64) -> Result<f64> {
        match &self.topography {
            Topography::Hump { spec, obstacle } => Ok(if *obstacle {
                lake_at_rest_bed(x, amplitude, spec)
            } else {
                hump_bed(x, amplitude, spec)
            }),
            Topography::Table { table, .. } => Ok(table.interpolate(x)? + amplitude),
        }
    }

    /// The draw that reproduces the mean bed.
    pub fn mean_amplitude(&self) -> f64 {
        match &self.topography {
            Topography::Hump { spec, .. } => spec.mean_amplitude,
            Topography::Table { .. } => 0.0,
        }
    }

    /// Standard deviation of the random amplitude.
    pub fn amplitude_std(&self) -> f64 {
        match &self.topography {
            Topography::Hump { spec, .. } => spec.std_amplitude,
            Topography::Table { sigma_z, .. } => *sigma_z,
        }
    }

    /// Bed expansion coefficients at x for a basis of the given order.
    pub fn bed_coefficients(&self, x: f64, order: usize) -> Result<ChaosCoefficients> {
        match &self.topography {
            Topography::Hump { spec, obstacle } => {
                let mut coeffs = hump_coefficients(x, spec, order).as_slice().to_vec();
                if *obstacle {
                    coeffs[0] += obstacle_height(x, spec);
                }
                ChaosCoefficients::new(coeffs)
            }
            Topography::Table { table, sigma_z } => {
                let mut coeffs = vec![0.0; order + 1];
                coeffs[0] = table.interpolate(x)?;
                if order >= 1 {
                    coeffs[1] = *sigma_z;
                }
                ChaosCoefficients::new(coeffs)
            }
        }
    }

    /// Initial free-surface coefficients for a basis of the given order.
    pub fn initial_eta_coefficients(&self, order: usize) -> ChaosCoefficients {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = self.initial_eta_mean;
        for (p, &c) in self.initial_eta_uncertainty.iter().enumerate() {
            if p < order {
                coeffs[p + 1] = c;
            }
        }
        ChaosCoefficients::new(coeffs).expect("finite by construction")
    }

    /// Timestep/end-time bundle for this case.
    pub fn simulation_config(&self) -> SimulationConfig {
        let mut cfg = SimulationConfig::new(self.dt, self.t_end);
        cfg.convergence_threshold = self.convergence_threshold;
        cfg
    }
}

/// The bed table shipped with the tsengSteadyState case.
pub fn goutal_maurel_table() -> BedTable {
    BedTable::parse(include_str!("../data/goutal_maurel.dat")).expect("bundled table is valid")
}

/// Constructs one of the three built-in cases.
pub fn builtin_case(name: CaseName) -> Result<CaseSpec> {
    let hump = HumpSpec {
        mean_amplitude: 0.6,
        std_amplitude: 0.3,
        half_width: 10.0,
    };
    let case = match name {
        CaseName::LakeAtRest => CaseSpec {
            name,
            mesh: Mesh::new(-50.0, 50.0, 100),
            dt: 0.15,
            t_end: 100.0,
            convergence_threshold: None,
            initial_eta_mean: 1.5,
            initial_eta_uncertainty: Vec::new(),
            boundary: BoundarySpec::transmissive(),
            topography: Topography::Hump {
                spec: hump,
                obstacle: true,
            },
            amplitude_bounds: (0.0, 1.4),
            probe_x: 0.0,
            max_stable_order: 3,
        },
        CaseName::CriticalSteadyState => CaseSpec {
            name,
            mesh: Mesh::new(-50.0, 50.0, 100),
            dt: 0.15,
            t_end: 500.0,
            convergence_threshold: Some(1e-4),
            initial_eta_mean: 1.5,
            initial_eta_uncertainty: Vec::new(),
            boundary: BoundarySpec::subcritical(1.65, 1.5),
            topography: Topography::Hump {
                spec: hump,
                obstacle: false,
            },
            amplitude_bounds: (0.0, 1.4),
            probe_x: 1.5,
            max_stable_order: 3,
        },
        CaseName::TsengSteadyState => {
            let table = goutal_maurel_table();
            let mesh = Mesh::new(0.0, 1500.0, 200);
            let (lo, hi) = table.x_range();
            if lo > mesh.x_min || hi < mesh.x_max {
                return Err(Error::InvalidInput(format!(
                    "bed table range [{lo}, {hi}] does not cover the domain"
                )));
            }
            CaseSpec {
                name,
                mesh,
                dt: 0.5,
                t_end: 100_000.0,
                convergence_threshold: Some(1e-8),
                initial_eta_mean: 15.0,
                initial_eta_uncertainty: Vec::new(),
                boundary: BoundarySpec::subcritical(0.75, 15.0),
                topography: Topography::Table {
                    table,
                    sigma_z: 0.5,
                },
                amplitude_bounds: (-2.0, 2.0),
                probe_x: 750.0,
                max_stable_order: 3,
            }
        }
    };
    Ok(case)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    fn hump() -> HumpSpec {
        HumpSpec {
            mean_amplitude: 0.6,
            std_amplitude: 0.3,
            half_width: 10.0,
        }
    }

    #[test]
    fn hump_bed_values() {
        let spec = hump();
        assert_eq!(hump_bed(0.0, 0.6, &spec), 0.6);
        assert_eq!(hump_bed(1e9, 0.6, &spec), 0.0);
        // sech^2(pi) by hand
        let expected = 0.6 * (1.0 / std::f64::consts::PI.cosh()).powi(2);
        assert_relative_eq!(hump_bed(10.0, 0.6, &spec), expected, max_relative = 1e-14);
        assert_abs_diff_eq!(hump_bed(10.0, 0.6, &spec), 0.00447, epsilon = 5e-6);
    }

    #[test]
    fn hump_coefficient_structure() {
        let spec = hump();
        let c = hump_coefficients(0.0, &spec, 3);
        assert_eq!(c.as_slice(), &[0.6, 0.3, 0.0, 0.0]);

        let certain = HumpSpec {
            std_amplitude: 0.0,
            ..spec
        };
        let c = hump_coefficients(7.3, &certain, 3);
        assert_eq!(c.as_slice()[1..], [0.0, 0.0, 0.0]);
        assert_relative_eq!(c[0], hump_bed(7.3, 0.6, &spec));

        // shared sech^2 factor cancels exactly
        for &x in &[-31.0, -2.5, 0.0, 4.0, 18.0] {
            let c = hump_coefficients(x, &spec, 1);
            assert_eq!(c[1] / c[0], 0.5);
        }
    }

    #[test]
    fn obstacle_interval_is_half_open() {
        let spec = hump();
        assert_eq!(lake_at_rest_bed(35.0, 0.0, &spec), 0.6);
        // boundary x = 30 is excluded
        assert_eq!(
            lake_at_rest_bed(30.0, 0.3, &spec),
            hump_bed(30.0, 0.3, &spec)
        );
        assert_eq!(
            lake_at_rest_bed(40.0, 0.0, &spec),
            0.6 + hump_bed(40.0, 0.0, &spec)
        );
        assert_eq!(lake_at_rest_bed(0.0, 0.6, &spec), 0.6);
    }

    #[test]
    fn initial_depth_coefficients() {
        let eta = ChaosCoefficients::new(vec![1.5, 0.0, 0.0, 0.0]).unwrap();
        let z = ChaosCoefficients::new(vec![0.6, 0.3, 0.0, 0.0]).unwrap();
        let h = initial_coefficients(&eta, &z).unwrap();
        assert_eq!(h.as_slice(), &[0.9, -0.3, 0.0, 0.0]);

        let flat = ChaosCoefficients::new(vec![0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(initial_coefficients(&eta, &flat).unwrap(), eta);

        let eta15 = ChaosCoefficients::new(vec![15.0, 0.0]).unwrap();
        let z_tab = ChaosCoefficients::new(vec![9.1, 0.5]).unwrap();
        let h = initial_coefficients(&eta15, &z_tab).unwrap();
        assert_eq!(h.as_slice(), &[15.0 - 9.1, -0.5]);

        let deep_bed = ChaosCoefficients::new(vec![2.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(initial_coefficients(&eta, &deep_bed).is_err());
    }

    #[test]
    fn builtin_case_constants() {
        let critical = builtin_case(CaseName::CriticalSteadyState).unwrap();
        assert_eq!(critical.mesh.dx, 1.0);
        assert_eq!(critical.convergence_threshold, Some(1e-4));

        let tseng = builtin_case(CaseName::TsengSteadyState).unwrap();
        assert_eq!(tseng.mesh.dx, 7.5);
        assert_eq!(tseng.convergence_threshold, Some(1e-8));
        assert_eq!(tseng.mesh.elements, 200);

        let lake = builtin_case(CaseName::LakeAtRest).unwrap();
        assert_eq!(lake.t_end, 100.0);
        assert_eq!(lake.simulation_config().step_count(), 667);
    }

    #[test]
    fn case_names_round_trip() {
        for name in [
            CaseName::LakeAtRest,
            CaseName::CriticalSteadyState,
            CaseName::TsengSteadyState,
        ] {
            assert_eq!(name.to_string().parse::<CaseName>().unwrap(), name);
        }
        assert!(matches!(
            "bogus".parse::<CaseName>(),
            Err(Error::UnknownCase(_))
        ));
    }

    #[test]
    fn table_interpolation() {
        let table = BedTable::new(vec![(0.0, 1.0), (10.0, 3.0), (20.0, 3.0)]).unwrap();
        assert_eq!(table.interpolate(0.0).unwrap(), 1.0);
        assert_eq!(table.interpolate(10.0).unwrap(), 3.0);
        assert_eq!(table.interpolate(5.0).unwrap(), 2.0);
        assert_eq!(table.interpolate(17.0).unwrap(), 3.0);
        assert!(table.interpolate(-0.1).is_err());
        assert!(table.interpolate(20.1).is_err());
    }

    #[test]
    fn table_parser_accepts_comments_and_rejects_junk() {
        let table = BedTable::parse("# header\n0 0\n5 1.5\n\n10 0\n").unwrap();
        assert_eq!(table.x_range(), (0.0, 10.0));
        assert!(BedTable::parse("0 0\nnot numbers\n").is_err());
        assert!(BedTable::parse("0 0\n0 1\n").is_err()); // non-increasing
        assert!(BedTable::parse("3 1\n").is_err()); // too short
    }

    #[test]
    fn bundled_goutal_maurel_table_is_usable() {
        let table = goutal_maurel_table();
        assert_eq!(table.x_range(), (0.0, 1500.0));
        // peak of the profile
        assert_eq!(table.interpolate(500.0).unwrap(), 9.1);
        // flat tail
        assert_eq!(table.interpolate(1200.0).unwrap(), 0.0);
    }

    /// Sampling oracle for the variance identity sigma_z(x) = sigma_r
    /// sech^2(pi x / lambda): exact because the bed is linear in the
    /// amplitude.
    #[test]
    fn hump_variance_matches_sampling() {
        let spec = hump();
        let n = 1_000_000usize;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7_777_777);
        let draws: Vec<f64> = (0..n)
            .map(|_| {
                let xi: f64 = StandardNormal.sample(&mut rng);
                spec.mean_amplitude + spec.std_amplitude * xi
            })
            .collect();
        for k in 0..10 {
            let x = -45.0 + 10.0 * k as f64;
            let (mut sum, mut sum2) = (0.0, 0.0);
            for &r in &draws {
                let z = hump_bed(x, r, &spec);
                sum += z;
                sum2 += z * z;
            }
            let mean = sum / n as f64;
            let var = sum2 / n as f64 - mean * mean;
            let sigma_z = spec.std_amplitude * spec.sech2(x);
            let expected = sigma_z * sigma_z;
            // Gaussian variance estimator: se ~ sigma^2 sqrt(2/n)
            let se = expected * (2.0 / n as f64).sqrt();
            assert!(
                (var - expected).abs() <= 3.0 * se.max(1e-12),
                "x = {x}: sampled {var} vs analytic {expected}"
            );
        }
    }

    #[test]
    fn bed_realization_and_coefficients_agree_for_the_mean() {
        for name in [
            CaseName::LakeAtRest,
            CaseName::CriticalSteadyState,
            CaseName::TsengSteadyState,
        ] {
            let case = builtin_case(name).unwrap();
            for x in case.mesh.centres() {
                let mean_bed = case.bed_realization(x, case.mean_amplitude()).unwrap();
                let coeffs = case.bed_coefficients(x, 3).unwrap();
                assert_eq!(coeffs[0], mean_bed, "case {name} at x = {x}");
            }
        }
    }
}
