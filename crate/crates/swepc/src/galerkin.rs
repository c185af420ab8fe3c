//! Intrusive stochastic Galerkin time integrator.
//!
//! Depth, discharge and bed elevation are expanded in the Hermite basis and
//! the expansion coefficients are evolved directly: projecting the finite
//! volume update onto each basis function yields P+1 decoupled equations per
//! element. Numerical fluxes are nonlinear in the germ, so their projections
//! are sampled by Gauss-Hermite quadrature (the Riemann solver runs once per
//! node); the bed-slope source term is linear and contracts exactly against
//! the precomputed triple-product tensor.
//!
//! Two source discretisations are provided. The well-balanced variant
//! reconstructs interface states with the surface gradient method applied
//! nodewise, which balances the flux gradient exactly for a lake at rest
//! over an uncertain bed. The centred-difference variant flux-samples the
//! original element states and differences the bed across neighbours; it is
//! not well-balanced and exists to quantify the benefit.

use crate::cases::CaseSpec;
use crate::chaos::{build_basis, evaluate_expansion, ChaosCoefficients, HermiteBasis};
use crate::chaos::{gauss_hermite, QuadratureRule};
use crate::deterministic::{forward_update, BoundarySpec, BoundaryValue, SimulationConfig};
use crate::error::{Error, Result};
use crate::physics::{reconstruct_states, roe_flux, FlowVector, PhysicsConstants, RiemannStates};

/// Source-term discretisation of the stochastic solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SgVariant {
    WellBalanced,
    CentredDifference,
}

impl std::str::FromStr for SgVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wellBalancedH" => Ok(SgVariant::WellBalanced),
            "centredDifferenceH" => Ok(SgVariant::CentredDifference),
            other => Err(Error::UnknownDiscretisation(other.into())),
        }
    }
}

impl std::fmt::Display for SgVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SgVariant::WellBalanced => "wellBalancedH",
            SgVariant::CentredDifference => "centredDifferenceH",
        })
    }
}

/// Basis, flux quadrature and bookkeeping for one stochastic solver setup.
#[derive(Debug, Clone)]
pub struct SgScheme {
    pub variant: SgVariant,
    basis: HermiteBasis,
    flux_quad: QuadratureRule,
    /// Basis values at the flux nodes, phi[j][l] = He_l(xi_j).
    phi: Vec<Vec<f64>>,
    /// Evaluate the Riemann solver once per node and reuse the samples for
    /// every projection order. Disabling re-samples per order, which is how
    /// the projection integral reads when expanded naively.
    pub cache_fluxes: bool,
    riemann_calls: u64,
}

impl SgScheme {
    pub fn new(variant: SgVariant, basis: HermiteBasis) -> Self {
        let flux_quad = basis.quad().clone();
        let phi = phi_table(&flux_quad, basis.order());
        Self {
            variant,
            basis,
            flux_quad,
            phi,
            cache_fluxes: true,
            riemann_calls: 0,
        }
    }

    /// Convenience constructor building the basis for `order`.
    pub fn with_order(variant: SgVariant, order: usize) -> Result<Self> {
        Ok(Self::new(variant, build_basis(order)?))
    }

    /// Overrides the flux quadrature with an `n`-node rule (n >= P+1). The
    /// Roe flux is not polynomial in the germ, so extra nodes can sharpen
    /// the projection.
    pub fn with_flux_nodes(mut self, n: usize) -> Result<Self> {
        if n < self.basis.len() {
            return Err(Error::InvalidInput(format!(
                "flux quadrature needs at least P+1 = {} nodes, got {n}",
                self.basis.len()
            )));
        }
        self.flux_quad = gauss_hermite(n)?;
        self.phi = phi_table(&self.flux_quad, self.basis.order());
        Ok(self)
    }

    pub fn without_flux_cache(mut self) -> Self {
        self.cache_fluxes = false;
        self
    }

    pub fn basis(&self) -> &HermiteBasis {
        &self.basis
    }

    pub fn order(&self) -> usize {
        self.basis.order()
    }

    pub fn flux_quad(&self) -> &QuadratureRule {
        &self.flux_quad
    }

    /// Cumulative number of Riemann-solver invocations.
    pub fn riemann_calls(&self) -> u64 {
        self.riemann_calls
    }
}

fn phi_table(quad: &QuadratureRule, order: usize) -> Vec<Vec<f64>> {
    quad.nodes()
        .iter()
        .map(|&xi| {
            (0..=order)
                .map(|l| crate::chaos::hermite_eval(l, xi))
                .collect()
        })
        .collect()
}

/// Expansion coefficients of the flow over the mesh, plus the static bed.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticField {
    pub h: Vec<ChaosCoefficients>,
    pub q: Vec<ChaosCoefficients>,
    pub z: Vec<ChaosCoefficients>,
    pub dx: f64,
    pub time: f64,
    pub step: u64,
}

impl StochasticField {
    /// Builds the initial field of a case: bed coefficients sampled at the
    /// element centres, depth from the free surface, discharge at rest.
    pub fn for_case(case: &CaseSpec, order: usize) -> Result<Self> {
        let eta = case.initial_eta_coefficients(order);
        let mut h = Vec::with_capacity(case.mesh.elements);
        let mut q = Vec::with_capacity(case.mesh.elements);
        let mut z = Vec::with_capacity(case.mesh.elements);
        for x in case.mesh.centres() {
            let bed = case.bed_coefficients(x, order)?;
            h.push(crate::cases::initial_coefficients(&eta, &bed)?);
            q.push(ChaosCoefficients::deterministic(0.0, order + 1));
            z.push(bed);
        }
        Ok(Self {
            h,
            q,
            z,
            dx: case.mesh.dx,
            time: 0.0,
            step: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    pub fn order(&self) -> usize {
        self.h[0].order()
    }

    /// Mean depths h_{i,0}, the convergence-monitored quantity.
    pub fn mean_depths(&self) -> Vec<f64> {
        self.h.iter().map(|c| c.mean()).collect()
    }

    /// Free-surface coefficients of element i, eta = h + z.
    pub fn eta_coefficients(&self, i: usize) -> ChaosCoefficients {
        self.h[i].add(&self.z[i]).expect("matching orders")
    }

    /// Largest |q_{i,p}| over all elements and orders.
    pub fn max_abs_discharge_coeff(&self) -> f64 {
        self.q
            .iter()
            .flat_map(|c| c.as_slice().iter())
            .fold(0.0, |acc: f64, &v| acc.max(v.abs()))
    }
}

/// The per-side coefficient view the interface operations consume.
#[derive(Debug, Clone, Copy)]
pub struct ElementCoeffs<'a> {
    pub h: &'a [f64],
    pub q: &'a [f64],
    pub z: &'a [f64],
}

impl<'a> ElementCoeffs<'a> {
    fn of(field: &'a StochasticField, i: usize) -> Self {
        Self {
            h: field.h[i].as_slice(),
            q: field.q[i].as_slice(),
            z: field.z[i].as_slice(),
        }
    }
}

/// Nodewise surface-gradient reconstruction of interface Riemann states.
///
/// The interface bed coefficients are the coefficient-wise mean of the two
/// sides; at each quadrature node the realised depths, discharges and beds
/// feed the deterministic reconstruction, with velocity formed from the
/// original (unreconstructed) realised depth.
pub fn reconstruct_states_coeffs(
    left: ElementCoeffs,
    right: ElementCoeffs,
    quad: &QuadratureRule,
) -> Result<Vec<RiemannStates>> {
    let mut states = Vec::with_capacity(quad.len());
    for (j, &xi) in quad.nodes().iter().enumerate() {
        let ul = FlowVector::new(
            evaluate_expansion(left.h, xi),
            evaluate_expansion(left.q, xi),
        );
        let ur = FlowVector::new(
            evaluate_expansion(right.h, xi),
            evaluate_expansion(right.q, xi),
        );
        let zl = evaluate_expansion(left.z, xi);
        let zr = evaluate_expansion(right.z, xi);
        let s = reconstruct_states(ul, zl, ur, zr).map_err(|e| at_node(e, j, xi))?;
        states.push(s);
    }
    Ok(states)
}

fn at_node(err: Error, node: usize, xi: f64) -> Error {
    match err {
        Error::DepthPositivity { depth, context } => Error::DepthPositivity {
            depth,
            context: format!("{context} at quadrature node {node} (xi = {xi})"),
        },
        other => other,
    }
}

/// Projection of the interface flux onto basis function l:
/// sum_j w_j F(states_j) He_l(xi_j).
///
/// This is the uncached reading of the quadrature (the Riemann solver runs
/// once per node per call); the time integrator reuses node fluxes across
/// orders unless asked not to.
pub fn sg_flux_projection(
    states: &[RiemannStates],
    l: usize,
    scheme: &SgScheme,
    constants: PhysicsConstants,
    entropy_fix: bool,
) -> Result<[f64; 2]> {
    let mut proj = [0.0; 2];
    for (j, states_j) in states.iter().enumerate() {
        let flux = roe_flux(states_j, constants, entropy_fix)
            .map_err(|e| at_node(e, j, scheme.flux_quad.nodes()[j]))?;
        let w = scheme.flux_quad.weights()[j];
        let phi = scheme.phi[j][l];
        proj[0] += (w * flux[0]) * phi;
        proj[1] += (w * flux[1]) * phi;
    }
    Ok(proj)
}

/// Projection of the well-balanced bed-slope source onto basis function l.
///
/// Exact tensor contraction of Eq-style double sums: the source is bilinear
/// in the reconstructed depth and interface bed coefficients, so no
/// quadrature is involved. The mass component is zero.
#[allow(clippy::too_many_arguments)]
pub fn sg_source_projection(
    h_star_left_interface: &[f64],
    h_star_right_interface: &[f64],
    z_star_left: &[f64],
    z_star_right: &[f64],
    l: usize,
    basis: &HermiteBasis,
    dx: f64,
    constants: PhysicsConstants,
) -> [f64; 2] {
    let n = h_star_left_interface.len();
    let mut acc = 0.0;
    for p in 0..n {
        let mean_depth = 0.5 * (h_star_left_interface[p] + h_star_right_interface[p]);
        for s in 0..n {
            let slope = (z_star_right[s] - z_star_left[s]) / dx;
            acc += (mean_depth * slope) * basis.triple(p, s, l);
        }
    }
    [0.0, -(constants.g * acc)]
}

/// Centred-difference source projection (not well-balanced): original depth
/// coefficients against the bed difference across the two neighbours.
fn centred_source_projection(
    h: &[f64],
    z_left_neighbour: &[f64],
    z_right_neighbour: &[f64],
    l: usize,
    basis: &HermiteBasis,
    dx: f64,
    constants: PhysicsConstants,
) -> [f64; 2] {
    let n = h.len();
    let mut acc = 0.0;
    for (p, &depth) in h.iter().enumerate() {
        for s in 0..n {
            let slope = (z_right_neighbour[s] - z_left_neighbour[s]) / (2.0 * dx);
            acc += (depth * slope) * basis.triple(p, s, l);
        }
    }
    [0.0, -(constants.g * acc)]
}

/// Ghost coefficients: fixed boundary values are certain (order 0 only),
/// transmissive variables copy every coefficient of the adjacent element.
fn ghost_coeffs(value: BoundaryValue, interior: &ChaosCoefficients) -> ChaosCoefficients {
    match value {
        BoundaryValue::Fixed(v) => ChaosCoefficients::deterministic(v, interior.len()),
        BoundaryValue::Transmissive => interior.clone(),
    }
}

struct SgGhosts {
    up: (ChaosCoefficients, ChaosCoefficients, ChaosCoefficients),
    down: (ChaosCoefficients, ChaosCoefficients, ChaosCoefficients),
}

fn sg_ghosts(field: &StochasticField, spec: &BoundarySpec) -> SgGhosts {
    let last = field.len() - 1;
    SgGhosts {
        up: (
            ghost_coeffs(spec.upstream_h, &field.h[0]),
            ghost_coeffs(spec.upstream_q, &field.q[0]),
            field.z[0].clone(),
        ),
        down: (
            ghost_coeffs(spec.downstream_h, &field.h[last]),
            ghost_coeffs(spec.downstream_q, &field.q[last]),
            field.z[last].clone(),
        ),
    }
}

/// Per-interface data carried from the flux pass to the element update.
struct SgInterface {
    /// Flux projections per order, [l] -> [mass, momentum].
    flux_proj: Vec<[f64; 2]>,
    /// Interface bed coefficients z*_p (coefficient-wise mean).
    z_star: Vec<f64>,
    /// Reconstructed depth coefficients on the left (minus) side.
    h_star_left: Vec<f64>,
    /// Reconstructed depth coefficients on the right (plus) side.
    h_star_right: Vec<f64>,
}

fn with_interface_context(err: Error, interface: usize, time: f64) -> Error {
    match err {
        Error::DepthPositivity { depth, context } => Error::DepthPositivity {
            depth,
            context: format!("{context} at interface {interface}, t = {time} s"),
        },
        other => other,
    }
}

/// One projected forward-Euler update. Returns the advanced field.
pub fn sg_step(
    field: &StochasticField,
    scheme: &mut SgScheme,
    spec: &BoundarySpec,
    cfg: &SimulationConfig,
) -> Result<StochasticField> {
    let mut next = field.clone();
    sg_step_in_place(&mut next, scheme, spec, cfg)?;
    Ok(next)
}

fn sg_step_in_place(
    field: &mut StochasticField,
    scheme: &mut SgScheme,
    spec: &BoundarySpec,
    cfg: &SimulationConfig,
) -> Result<()> {
    let m = field.len();
    let n = scheme.basis.len();
    let ghosts = sg_ghosts(field, spec);
    let elem = |i: isize| -> ElementCoeffs<'_> {
        if i < 0 {
            ElementCoeffs {
                h: ghosts.up.0.as_slice(),
                q: ghosts.up.1.as_slice(),
                z: ghosts.up.2.as_slice(),
            }
        } else if i as usize >= m {
            ElementCoeffs {
                h: ghosts.down.0.as_slice(),
                q: ghosts.down.1.as_slice(),
                z: ghosts.down.2.as_slice(),
            }
        } else {
            ElementCoeffs::of(field, i as usize)
        }
    };

    let well_balanced = scheme.variant == SgVariant::WellBalanced;
    let mut interfaces = Vec::with_capacity(m + 1);
    for k in 0..=m {
        let left = elem(k as isize - 1);
        let right = elem(k as isize);

        let mut z_star = vec![0.0; n];
        let mut h_star_left = vec![0.0; n];
        let mut h_star_right = vec![0.0; n];
        for p in 0..n {
            z_star[p] = 0.5 * (left.z[p] + right.z[p]);
            h_star_left[p] = (left.h[p] + left.z[p]) - z_star[p];
            h_star_right[p] = (right.h[p] + right.z[p]) - z_star[p];
        }

        let states = if well_balanced {
            reconstruct_states_coeffs(left, right, &scheme.flux_quad)
                .map_err(|e| with_interface_context(e, k, field.time))?
        } else {
            // centred variant: flux from the original, unmodified variables
            scheme
                .flux_quad
                .nodes()
                .iter()
                .map(|&xi| RiemannStates {
                    left: FlowVector::new(
                        evaluate_expansion(left.h, xi),
                        evaluate_expansion(left.q, xi),
                    ),
                    right: FlowVector::new(
                        evaluate_expansion(right.h, xi),
                        evaluate_expansion(right.q, xi),
                    ),
                    z_star: evaluate_expansion(&z_star, xi),
                })
                .collect()
        };

        let mut flux_proj = vec![[0.0; 2]; n];
        if scheme.cache_fluxes {
            let mut node_fluxes = Vec::with_capacity(states.len());
            for (j, states_j) in states.iter().enumerate() {
                scheme.riemann_calls += 1;
                let flux = roe_flux(states_j, cfg.constants, cfg.entropy_fix)
                    .map_err(|e| at_node(e, j, scheme.flux_quad.nodes()[j]))
                    .map_err(|e| with_interface_context(e, k, field.time))?;
                node_fluxes.push(flux);
            }
            for (l, proj) in flux_proj.iter_mut().enumerate() {
                for (j, flux) in node_fluxes.iter().enumerate() {
                    let w = scheme.flux_quad.weights()[j];
                    let phi = scheme.phi[j][l];
                    proj[0] += (w * flux[0]) * phi;
                    proj[1] += (w * flux[1]) * phi;
                }
            }
        } else {
            for (l, proj) in flux_proj.iter_mut().enumerate() {
                for (j, states_j) in states.iter().enumerate() {
                    scheme.riemann_calls += 1;
                    let flux = roe_flux(states_j, cfg.constants, cfg.entropy_fix)
                        .map_err(|e| at_node(e, j, scheme.flux_quad.nodes()[j]))
                        .map_err(|e| with_interface_context(e, k, field.time))?;
                    let w = scheme.flux_quad.weights()[j];
                    let phi = scheme.phi[j][l];
                    proj[0] += (w * flux[0]) * phi;
                    proj[1] += (w * flux[1]) * phi;
                }
            }
        }

        interfaces.push(SgInterface {
            flux_proj,
            z_star,
            h_star_left,
            h_star_right,
        });
    }

    for i in 0..m {
        let (left_part, right_part) = interfaces.split_at(i + 1);
        let left = &left_part[i];
        let right = &right_part[0];
        for l in 0..n {
            let source = if well_balanced {
                sg_source_projection(
                    &left.h_star_right,
                    &right.h_star_left,
                    &left.z_star,
                    &right.z_star,
                    l,
                    &scheme.basis,
                    field.dx,
                    cfg.constants,
                )
            } else {
                centred_source_projection(
                    field.h[i].as_slice(),
                    elem_z(field, &ghosts, i as isize - 1),
                    elem_z(field, &ghosts, i as isize + 1),
                    l,
                    &scheme.basis,
                    field.dx,
                    cfg.constants,
                )
            };
            let dt_over_norm = cfg.dt / scheme.basis.norm(l);
            let h_new = forward_update(
                field.h[i][l],
                dt_over_norm,
                right.flux_proj[l][0],
                left.flux_proj[l][0],
                field.dx,
                0.0,
            );
            let q_new = forward_update(
                field.q[i][l],
                dt_over_norm,
                right.flux_proj[l][1],
                left.flux_proj[l][1],
                field.dx,
                source[1],
            );
            field.h[i].coeffs_mut()[l] = h_new;
            field.q[i].coeffs_mut()[l] = q_new;
        }
        if field.h[i].mean() <= 0.0 {
            return Err(Error::DepthPositivity {
                depth: field.h[i].mean(),
                context: format!(" (updated mean depth in element {i}, t = {} s)", field.time),
            });
        }
    }

    field.time += cfg.dt;
    field.step += 1;
    Ok(())
}

fn elem_z<'a>(field: &'a StochasticField, ghosts: &'a SgGhosts, i: isize) -> &'a [f64] {
    if i < 0 {
        ghosts.up.2.as_slice()
    } else if i as usize >= field.len() {
        ghosts.down.2.as_slice()
    } else {
        field.z[i as usize].as_slice()
    }
}

/// Outcome of a stochastic Galerkin run.
#[derive(Debug, Clone)]
pub struct SgRunOutcome {
    pub field: StochasticField,
    /// L2 delta of the mean-depth coefficients, recorded every step.
    pub convergence: Vec<f64>,
    pub converged_at: Option<u64>,
    pub riemann_calls: u64,
}

/// Integrates a case with the given scheme. Convergence is monitored on the
/// order-0 depth coefficients; the Riemann-call counter is returned for cost
/// accounting.
pub fn sg_run(
    case: &CaseSpec,
    scheme: &mut SgScheme,
    cfg: &SimulationConfig,
) -> Result<SgRunOutcome> {
    case.boundary.validate()?;
    let mut field = StochasticField::for_case(case, scheme.order())?;
    let calls_before = scheme.riemann_calls;

    let steps = cfg.step_count();
    let mut convergence = Vec::with_capacity(steps as usize);
    let mut converged_at = None;
    let mut previous = field.mean_depths();

    for _ in 0..steps {
        sg_step_in_place(&mut field, scheme, &case.boundary, cfg)?;
        let depths = field.mean_depths();
        let delta = crate::deterministic::l2_mean_depth_delta(&depths, &previous)?;
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

    Ok(SgRunOutcome {
        field,
        convergence,
        converged_at,
        riemann_calls: scheme.riemann_calls - calls_before,
    })
}
