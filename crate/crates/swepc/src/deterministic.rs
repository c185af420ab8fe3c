//! First-order finite volume time integrator for the deterministic shallow
//! water equations.
//!
//! Uniform mesh, fixed timestep forward-Euler updates, surface-gradient
//! interface reconstruction and the well-balanced bed-slope source term. One
//! ghost element per side implements the boundary conditions: fixed values
//! override the copied interior state, everything else is transmissive.

use crate::cases::CaseSpec;
use crate::error::{Error, Result};
use crate::physics::{
    bed_source, physical_flux, reconstruct_states, roe_flux, FlowVector, PhysicsConstants,
};

/// Uniform one-dimensional mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub x_min: f64,
    pub x_max: f64,
    pub elements: usize,
    pub dx: f64,
}

impl Mesh {
    pub fn new(x_min: f64, x_max: f64, elements: usize) -> Self {
        assert!(elements > 0 && x_max > x_min);
        Self {
            x_min,
            x_max,
            elements,
            dx: (x_max - x_min) / elements as f64,
        }
    }

    /// Midpoint of element i.
    pub fn centre(&self, i: usize) -> f64 {
        self.x_min + (i as f64 + 0.5) * self.dx
    }

    pub fn centres(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.elements).map(|i| self.centre(i))
    }

    /// Index of the element whose centre is nearest to x.
    pub fn element_at(&self, x: f64) -> usize {
        let raw = ((x - self.x_min) / self.dx - 0.5).round();
        (raw.max(0.0) as usize).min(self.elements - 1)
    }
}

/// One boundary variable: clamped to a value or copied from the interior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryValue {
    Fixed(f64),
    Transmissive,
}

impl BoundaryValue {
    fn resolve(self, interior: f64) -> f64 {
        match self {
            BoundaryValue::Fixed(v) => v,
            BoundaryValue::Transmissive => interior,
        }
    }

    pub fn is_fixed(self) -> bool {
        matches!(self, BoundaryValue::Fixed(_))
    }
}

/// Boundary treatment for both ends of the domain.
///
/// Subcritical flow admits one fixed variable per side; the constructors
/// below enforce that.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundarySpec {
    pub upstream_h: BoundaryValue,
    pub upstream_q: BoundaryValue,
    pub downstream_h: BoundaryValue,
    pub downstream_q: BoundaryValue,
}

impl BoundarySpec {
    pub fn transmissive() -> Self {
        Self {
            upstream_h: BoundaryValue::Transmissive,
            upstream_q: BoundaryValue::Transmissive,
            downstream_h: BoundaryValue::Transmissive,
            downstream_q: BoundaryValue::Transmissive,
        }
    }

    /// Fixed inflow discharge upstream, fixed depth downstream.
    pub fn subcritical(upstream_q: f64, downstream_h: f64) -> Self {
        Self {
            upstream_h: BoundaryValue::Transmissive,
            upstream_q: BoundaryValue::Fixed(upstream_q),
            downstream_h: BoundaryValue::Fixed(downstream_h),
            downstream_q: BoundaryValue::Transmissive,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let both = |a: BoundaryValue, b: BoundaryValue| a.is_fixed() && b.is_fixed();
        if both(self.upstream_h, self.upstream_q) || both(self.downstream_h, self.downstream_q) {
            return Err(Error::InvalidInput(
                "each boundary may fix at most one of depth and discharge".into(),
            ));
        }
        Ok(())
    }
}

/// Timestep, end time and diagnostics knobs shared by all solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationConfig {
    pub dt: f64,
    pub t_end: f64,
    pub constants: PhysicsConstants,
    /// L2 threshold on the step-to-step mean depth change, if convergence is
    /// monitored.
    pub convergence_threshold: Option<f64>,
    /// Courant numbers above this are reported by the CLI.
    pub courant_warn: f64,
    pub entropy_fix: bool,
    /// Stop as soon as the convergence threshold is met instead of running
    /// to the fixed end time.
    pub stop_on_convergence: bool,
}

impl SimulationConfig {
    pub fn new(dt: f64, t_end: f64) -> Self {
        assert!(dt > 0.0 && t_end >= 0.0);
        Self {
            dt,
            t_end,
            constants: PhysicsConstants::default(),
            convergence_threshold: None,
            courant_warn: 1.0,
            entropy_fix: true,
            stop_on_convergence: false,
        }
    }

    /// Number of fixed steps covering [0, t_end].
    pub fn step_count(&self) -> u64 {
        (self.t_end / self.dt).round() as u64
    }
}

/// Piecewise-constant flow state over the mesh, with its static bed.
#[derive(Debug, Clone, PartialEq)]
pub struct DeterministicField {
    pub flow: Vec<FlowVector>,
    pub bed: Vec<f64>,
    pub dx: f64,
    pub time: f64,
    pub step: u64,
}

impl DeterministicField {
    pub fn new(flow: Vec<FlowVector>, bed: Vec<f64>, dx: f64) -> Result<Self> {
        if flow.len() != bed.len() {
            return Err(Error::LengthMismatch {
                left: flow.len(),
                right: bed.len(),
                context: "flow vs bed",
            });
        }
        for (i, u) in flow.iter().enumerate() {
            if u.h <= 0.0 {
                return Err(Error::DepthPositivity {
                    depth: u.h,
                    context: format!(" (initial depth in element {i})"),
                });
            }
        }
        Ok(Self {
            flow,
            bed,
            dx,
            time: 0.0,
            step: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.flow.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flow.is_empty()
    }

    pub fn depths(&self) -> Vec<f64> {
        self.flow.iter().map(|u| u.h).collect()
    }

    /// Froude number |v|/sqrt(g h) in element i.
    pub fn froude(&self, i: usize, constants: PhysicsConstants) -> f64 {
        let u = self.flow[i];
        u.velocity().abs() / (constants.g * u.h).sqrt()
    }
}

/// Ghost states produced by the boundary treatment: flow and bed elevation
/// for the upstream and downstream ghost elements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GhostStates {
    pub upstream: (FlowVector, f64),
    pub downstream: (FlowVector, f64),
}

/// Resolves the ghost elements for the current field. Transmissive variables
/// copy the adjacent interior value; the ghost bed always copies the interior
/// bed so there is no bed gradient across the boundary.
pub fn apply_boundaries(field: &DeterministicField, spec: &BoundarySpec) -> GhostStates {
    let first = field.flow[0];
    let last = field.flow[field.len() - 1];
    GhostStates {
        upstream: (
            FlowVector::new(
                spec.upstream_h.resolve(first.h),
                spec.upstream_q.resolve(first.q),
            ),
            field.bed[0],
        ),
        downstream: (
            FlowVector::new(
                spec.downstream_h.resolve(last.h),
                spec.downstream_q.resolve(last.q),
            ),
            field.bed[field.len() - 1],
        ),
    }
}

/// Forward-Euler update of one conserved quantity. Shared with the
/// stochastic Galerkin solver so the order-0 reduction is bit-exact.
#[inline]
pub(crate) fn forward_update(
    u: f64,
    dt_over_norm: f64,
    flux_right: f64,
    flux_left: f64,
    dx: f64,
    source: f64,
) -> f64 {
    u - dt_over_norm * ((flux_right - flux_left) / dx - source)
}

/// Per-interface data retained for the source term.
struct InterfaceData {
    flux: [f64; 2],
    z_star: f64,
    /// Reconstructed depth on the upwind (left-element) side.
    h_star_left: f64,
    /// Reconstructed depth on the downwind (right-element) side.
    h_star_right: f64,
}

fn with_context(err: Error, interface: usize, time: f64) -> Error {
    match err {
        Error::DepthPositivity { depth, context } => Error::DepthPositivity {
            depth,
            context: format!("{context} at interface {interface}, t = {time} s"),
        },
        other => other,
    }
}

/// One explicit update. Returns the advanced field; the input is untouched.
pub fn step(
    field: &DeterministicField,
    spec: &BoundarySpec,
    cfg: &SimulationConfig,
) -> Result<DeterministicField> {
    let mut next = field.clone();
    let mut calls = 0u64;
    step_in_place(&mut next, spec, cfg, &mut calls)?;
    Ok(next)
}

fn step_in_place(
    field: &mut DeterministicField,
    spec: &BoundarySpec,
    cfg: &SimulationConfig,
    riemann_calls: &mut u64,
) -> Result<()> {
    let m = field.len();
    let ghosts = apply_boundaries(field, spec);
    let elem = |i: isize| -> (FlowVector, f64) {
        if i < 0 {
            ghosts.upstream
        } else if i as usize >= m {
            ghosts.downstream
        } else {
            (field.flow[i as usize], field.bed[i as usize])
        }
    };

    let mut interfaces = Vec::with_capacity(m + 1);
    for k in 0..=m {
        let (ul, zl) = elem(k as isize - 1);
        let (ur, zr) = elem(k as isize);
        let states =
            reconstruct_states(ul, zl, ur, zr).map_err(|e| with_context(e, k, field.time))?;
        *riemann_calls += 1;
        let flux = roe_flux(&states, cfg.constants, cfg.entropy_fix)
            .map_err(|e| with_context(e, k, field.time))?;
        interfaces.push(InterfaceData {
            flux,
            z_star: states.z_star,
            h_star_left: states.left.h,
            h_star_right: states.right.h,
        });
    }

    for i in 0..m {
        let left = &interfaces[i];
        let right = &interfaces[i + 1];
        let source = bed_source(
            left.h_star_right,
            right.h_star_left,
            left.z_star,
            right.z_star,
            field.dx,
            cfg.constants,
        );
        let u = field.flow[i];
        let h = forward_update(u.h, cfg.dt, right.flux[0], left.flux[0], field.dx, 0.0);
        let q = forward_update(
            u.q,
            cfg.dt,
            right.flux[1],
            left.flux[1],
            field.dx,
            source[1],
        );
        if h <= 0.0 {
            return Err(Error::DepthPositivity {
                depth: h,
                context: format!(" (updated depth in element {i}, t = {} s)", field.time),
            });
        }
        field.flow[i] = FlowVector::new(h, q);
    }
    field.time += cfg.dt;
    field.step += 1;
    Ok(())
}

/// Largest local Courant number (|v| + sqrt(g h)) dt / dx over the field.
pub fn courant_number(field: &DeterministicField, cfg: &SimulationConfig) -> f64 {
    field
        .flow
        .iter()
        .map(|u| (u.velocity().abs() + (cfg.constants.g * u.h).sqrt()) * cfg.dt / field.dx)
        .fold(0.0, f64::max)
}

/// L2 norm of the change in depth between two snapshots.
pub fn l2_mean_depth_delta(current: &[f64], previous: &[f64]) -> Result<f64> {
    if current.len() != previous.len() {
        return Err(Error::LengthMismatch {
            left: current.len(),
            right: previous.len(),
            context: "depth snapshots",
        });
    }
    Ok(current
        .iter()
        .zip(previous)
        .map(|(&a, &b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt())
}

/// Outcome of a deterministic run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub field: DeterministicField,
    /// L2 mean-depth delta recorded every step.
    pub convergence: Vec<f64>,
    /// First step index (1-based) at which the threshold was met, if any.
    pub converged_at: Option<u64>,
    pub riemann_calls: u64,
    pub max_courant: f64,
}

/// Integrates a test case with a concrete realisation of its topography.
///
/// `amplitude` is the random draw the bed generator consumes (the hump
/// amplitude, or the uniform offset for tabulated beds); use
/// [`CaseSpec::mean_amplitude`] for the nominal bed.
pub fn run(case: &CaseSpec, amplitude: f64, cfg: &SimulationConfig) -> Result<RunOutcome> {
    case.boundary.validate()?;
    let bed: Vec<f64> = case
        .mesh
        .centres()
        .map(|x| case.bed_realization(x, amplitude))
        .collect::<Result<_>>()?;
    let flow: Vec<FlowVector> = bed
        .iter()
        .map(|&z| FlowVector::new(case.initial_eta_mean - z, 0.0))
        .collect();
    let mut field = DeterministicField::new(flow, bed, case.mesh.dx)?;

    let steps = cfg.step_count();
    let mut convergence = Vec::with_capacity(steps as usize);
    let mut converged_at = None;
    let mut riemann_calls = 0;
    let mut max_courant = courant_number(&field, cfg);
    let mut previous = field.depths();

    for _ in 0..steps {
        step_in_place(&mut field, &case.boundary, cfg, &mut riemann_calls)?;
        max_courant = max_courant.max(courant_number(&field, cfg));
        let depths = field.depths();
        let delta = l2_mean_depth_delta(&depths, &previous)?;
        previous = depths;
        convergence.push(delta);
        if let Some(threshold) = cfg.convergence_threshold {
            if delta <= threshold {
                converged_at.get_or_insert(field.step);
                if cfg.stop_on_convergence {
                    break;
                }
            }
        }
    }

    Ok(RunOutcome {
        field,
        convergence,
        converged_at,
        riemann_calls,
        max_courant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cases::{builtin_case, CaseName};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn flat_case_config(dt: f64, t_end: f64) -> SimulationConfig {
        SimulationConfig::new(dt, t_end)
    }

    fn rest_field(bed: Vec<f64>, eta: f64, dx: f64) -> DeterministicField {
        let flow = bed.iter().map(|&z| FlowVector::new(eta - z, 0.0)).collect();
        DeterministicField::new(flow, bed, dx).unwrap()
    }

    #[test]
    fn mesh_centres_and_lookup() {
        let mesh = Mesh::new(-50.0, 50.0, 100);
        assert_eq!(mesh.dx, 1.0);
        assert_eq!(mesh.centre(0), -49.5);
        assert_eq!(mesh.centre(99), 49.5);
        assert_eq!(mesh.element_at(1.5), 51);
        assert_eq!(mesh.element_at(-37.5), 12);
    }

    #[test]
    fn transmissive_boundaries_copy_the_interior() {
        let field = rest_field(vec![0.0, 0.0], 1.5, 1.0);
        let ghosts = apply_boundaries(&field, &BoundarySpec::transmissive());
        assert_eq!(ghosts.upstream.0, FlowVector::new(1.5, 0.0));
        assert_eq!(ghosts.downstream.0, FlowVector::new(1.5, 0.0));
    }

    #[test]
    fn fixed_values_override_one_variable_per_side() {
        let mut field = rest_field(vec![0.0, 0.0], 1.5, 1.0);
        field.flow[1].q = 1.65;
        let spec = BoundarySpec::subcritical(1.65, 1.5);
        spec.validate().unwrap();
        let ghosts = apply_boundaries(&field, &spec);
        // upstream: h copied, q clamped
        assert_eq!(ghosts.upstream.0, FlowVector::new(1.5, 1.65));
        // downstream: h clamped, q copied
        assert_eq!(ghosts.downstream.0, FlowVector::new(1.5, 1.65));
    }

    #[test]
    fn overconstrained_boundary_is_rejected() {
        let spec = BoundarySpec {
            upstream_h: BoundaryValue::Fixed(1.0),
            upstream_q: BoundaryValue::Fixed(1.0),
            downstream_h: BoundaryValue::Transmissive,
            downstream_q: BoundaryValue::Transmissive,
        };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn lake_at_rest_is_preserved() {
        // the obstacle bed is discontinuous at x = 30 and x = 40
        let case = builtin_case(CaseName::LakeAtRest).unwrap();
        let bed: Vec<f64> = case
            .mesh
            .centres()
            .map(|x| case.bed_realization(x, 0.6).unwrap())
            .collect();
        let mut field = rest_field(bed, 1.5, case.mesh.dx);
        let cfg = flat_case_config(0.15, 1.0);
        let spec = BoundarySpec::transmissive();
        for _ in 0..1000 {
            field = step(&field, &spec, &cfg).unwrap();
        }
        let max_q = field.flow.iter().map(|u| u.q.abs()).fold(0.0, f64::max);
        assert!(max_q <= 1e-12, "spurious discharge {max_q}");
        for (u, z) in field.flow.iter().zip(&field.bed) {
            assert_abs_diff_eq!(u.h + z, 1.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn lake_at_rest_on_rough_synthetic_bed() {
        // per-element bed jumps approaching the water depth need a shorter
        // timestep: the reconstructed interface depths exceed the element
        // depths, which raises the effective Courant number.
        let bed = vec![0.0, 0.3, 0.55, 0.1, 0.6, 0.6, 0.0, 0.2];
        let mut field = rest_field(bed, 1.5, 1.0);
        let cfg = flat_case_config(0.075, 1.0);
        let spec = BoundarySpec::transmissive();
        for _ in 0..1000 {
            field = step(&field, &spec, &cfg).unwrap();
        }
        let max_q = field.flow.iter().map(|u| u.q.abs()).fold(0.0, f64::max);
        assert!(max_q <= 1e-12, "spurious discharge {max_q}");
    }

    #[test]
    fn uniform_flow_on_flat_bed_is_steady() {
        let bed = vec![0.0; 10];
        let flow = vec![FlowVector::new(1.2, 0.8); 10];
        let field = DeterministicField::new(flow, bed, 1.0).unwrap();
        let cfg = flat_case_config(0.05, 1.0);
        let next = step(&field, &BoundarySpec::transmissive(), &cfg).unwrap();
        for (a, b) in next.flow.iter().zip(&field.flow) {
            assert_abs_diff_eq!(a.h, b.h, epsilon = 1e-15);
            assert_abs_diff_eq!(a.q, b.q, epsilon = 1e-15);
        }
    }

    #[test]
    fn mass_is_conserved_away_from_boundaries() {
        let m = 100;
        let bed = vec![0.0; m];
        let mut flow = vec![FlowVector::new(1.0, 0.0); m];
        flow[m / 2].h = 1.1; // compact perturbation
        let mut field = DeterministicField::new(flow, bed, 1.0).unwrap();
        // 1000 steps cover 5 s; the wave and its diffusive tail stay well
        // clear of the boundaries, so no mass should leave.
        let cfg = flat_case_config(0.005, 1.0);
        let spec = BoundarySpec::transmissive();
        let initial_mass: f64 = field.flow.iter().map(|u| u.h * field.dx).sum();
        for _ in 0..1000 {
            field = step(&field, &spec, &cfg).unwrap();
        }
        let final_mass: f64 = field.flow.iter().map(|u| u.h * field.dx).sum();
        assert_relative_eq!(final_mass, initial_mass, max_relative = 1e-10);
    }

    #[test]
    fn courant_number_of_initial_rest_state() {
        let field = rest_field(vec![0.0; 4], 1.5, 1.0);
        let cfg = flat_case_config(0.15, 1.0);
        let expected = 0.15 * (9.80665f64 * 1.5).sqrt();
        assert_relative_eq!(courant_number(&field, &cfg), expected, max_relative = 1e-14);
        assert!(expected < 0.8);

        let tiny = flat_case_config(1e-12, 1.0);
        assert!(courant_number(&field, &tiny) < 1e-11);
    }

    #[test]
    fn l2_delta_examples() {
        assert_eq!(l2_mean_depth_delta(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        let single = l2_mean_depth_delta(&[1.0, 2.0 + 1e-4], &[1.0, 2.0]).unwrap();
        assert_relative_eq!(single, 1e-4, max_relative = 1e-10);
        let hand = l2_mean_depth_delta(&[1.0, 2.0], &[0.0, 0.0]).unwrap();
        assert_relative_eq!(hand, 5f64.sqrt());
        assert!(l2_mean_depth_delta(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn critical_case_stays_steady_after_convergence() {
        // once the mean-amplitude run meets its threshold, later deltas may
        // breathe but stay within an order of magnitude of it
        let case = builtin_case(CaseName::CriticalSteadyState).unwrap();
        let cfg = case.simulation_config();
        let out = run(&case, 0.6, &cfg).unwrap();
        let at = out.converged_at.expect("converges well before t_end") as usize;
        let worst_after = out.convergence[at..].iter().fold(0.0f64, |a, &d| a.max(d));
        let threshold = cfg.convergence_threshold.unwrap();
        assert!(
            worst_after <= 10.0 * threshold,
            "delta rebounds to {worst_after:e}"
        );
    }

    #[test]
    fn two_runs_are_bit_identical() {
        let case = builtin_case(CaseName::CriticalSteadyState).unwrap();
        let mut cfg = case.simulation_config();
        cfg.t_end = 30.0;
        let a = run(&case, 0.6, &cfg).unwrap();
        let b = run(&case, 0.6, &cfg).unwrap();
        assert_eq!(a.field, b.field);
        assert_eq!(a.convergence, b.convergence);
        assert_eq!(a.riemann_calls, b.riemann_calls);
    }

    #[test]
    fn depth_positivity_failure_reports_context() {
        // drain a shallow pool through a fixed outflow until it runs dry
        let bed = vec![0.0; 4];
        let flow = vec![FlowVector::new(1e-3, 0.0); 4];
        let field = DeterministicField::new(flow, bed, 0.1).unwrap();
        let spec = BoundarySpec {
            upstream_h: BoundaryValue::Transmissive,
            upstream_q: BoundaryValue::Transmissive,
            downstream_h: BoundaryValue::Transmissive,
            downstream_q: BoundaryValue::Fixed(0.5),
        };
        let cfg = flat_case_config(0.05, 10.0);
        let mut state = field;
        let mut saw_error = false;
        for _ in 0..2000 {
            match step(&state, &spec, &cfg) {
                Ok(next) => state = next,
                Err(err) => {
                    let text = err.to_string();
                    assert!(text.contains("depth"), "unexpected error {text}");
                    saw_error = true;
                    break;
                }
            }
        }
        assert!(saw_error, "expected the pool to run dry");
    }
}
