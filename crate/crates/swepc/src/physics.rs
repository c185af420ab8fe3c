//! Deterministic shallow water kernels.
//!
//! Flow state per element is depth h and unit-width discharge q. Interface
//! fluxes come from the Roe approximate Riemann solver acting on states
//! reconstructed with the surface gradient method: bed elevation is averaged
//! at the interface and depths are rebuilt from the free-surface elevation,
//! which is what makes the scheme well-balanced over arbitrary topography.

use crate::error::{Error, Result};

/// Depths below this are treated as dry and rejected; the scheme has no
/// wetting-and-drying support, so failing loudly beats silently clamping.
pub const DRY_TOLERANCE: f64 = 1e-12;

/// Water depth (m) and unit-width discharge (m^2/s) in one element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowVector {
    pub h: f64,
    pub q: f64,
}

impl FlowVector {
    pub fn new(h: f64, q: f64) -> Self {
        Self { h, q }
    }

    /// Depth-averaged velocity q/h.
    pub fn velocity(&self) -> f64 {
        self.q / self.h
    }
}

/// Physical constants of the model. Standard gravity by default.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicsConstants {
    pub g: f64,
}

impl Default for PhysicsConstants {
    fn default() -> Self {
        Self { g: 9.80665 }
    }
}

impl PhysicsConstants {
    pub fn new(g: f64) -> Self {
        assert!(g > 0.0, "gravity must be positive");
        Self { g }
    }
}

/// Reconstructed Riemann states either side of an interface, plus the
/// averaged interface bed elevation they were built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiemannStates {
    pub left: FlowVector,
    pub right: FlowVector,
    pub z_star: f64,
}

fn check_depth(h: f64, context: &str) -> Result<()> {
    if h < DRY_TOLERANCE {
        return Err(Error::DepthPositivity {
            depth: h,
            context: format!(" ({context})"),
        });
    }
    Ok(())
}

/// Physical flux F(U) = [q, q^2/h + g h^2/2].
pub fn physical_flux(u: FlowVector, constants: PhysicsConstants) -> Result<[f64; 2]> {
    check_depth(u.h, "physical flux")?;
    Ok([u.q, u.q * u.q / u.h + constants.g * (u.h * u.h) / 2.0])
}

/// Harten-Hyman fix: at a transonic rarefaction the single linearised wave
/// is split into two, which amounts to enlarging |lambda|.
fn fixed_wave_speed(lambda: f64, lambda_left: f64, lambda_right: f64) -> f64 {
    if lambda_left < 0.0 && 0.0 < lambda_right {
        (lambda_right * (lambda - lambda_left) - lambda_left * (lambda_right - lambda))
            / (lambda_right - lambda_left)
    } else {
        lambda.abs()
    }
}

/// Roe numerical flux for the reconstructed interface states.
///
/// F = (F_L + F_R)/2 - 1/2 sum_k |lambda_k| alpha_k r_k with Roe-averaged
/// velocity and celerity; `entropy_fix` enables the Harten-Hyman treatment
/// of sonic rarefactions. Consistency F(U, U) = F(U) holds exactly.
pub fn roe_flux(
    states: &RiemannStates,
    constants: PhysicsConstants,
    entropy_fix: bool,
) -> Result<[f64; 2]> {
    let (l, r) = (states.left, states.right);
    check_depth(l.h, "Roe flux, left state")?;
    check_depth(r.h, "Roe flux, right state")?;
    let g = constants.g;

    let vl = l.velocity();
    let vr = r.velocity();
    let flux_l = physical_flux(l, constants)?;
    let flux_r = physical_flux(r, constants)?;

    let sqrt_hl = l.h.sqrt();
    let sqrt_hr = r.h.sqrt();
    let u_roe = (sqrt_hl * vl + sqrt_hr * vr) / (sqrt_hl + sqrt_hr);
    let c_roe = (g * (l.h + r.h) / 2.0).sqrt();
    let lambda = [u_roe - c_roe, u_roe + c_roe];

    let dh = r.h - l.h;
    let dq = r.q - l.q;
    let alpha = [
        ((u_roe + c_roe) * dh - dq) / (2.0 * c_roe),
        (dq - (u_roe - c_roe) * dh) / (2.0 * c_roe),
    ];
    let eigvec = [[1.0, u_roe - c_roe], [1.0, u_roe + c_roe]];

    let cl = (g * l.h).sqrt();
    let cr = (g * r.h).sqrt();
    let speeds = if entropy_fix {
        [
            fixed_wave_speed(lambda[0], vl - cl, vr - cr),
            fixed_wave_speed(lambda[1], vl + cl, vr + cr),
        ]
    } else {
        [lambda[0].abs(), lambda[1].abs()]
    };

    let mut flux = [0.0; 2];
    for m in 0..2 {
        let dissipation = speeds[0] * alpha[0] * eigvec[0][m] + speeds[1] * alpha[1] * eigvec[1][m];
        flux[m] = 0.5 * (flux_l[m] + flux_r[m]) - 0.5 * dissipation;
    }
    Ok(flux)
}

/// Averaged bed elevation shared by both sides of an interface.
pub fn interface_topography(z_left: f64, z_right: f64) -> f64 {
    0.5 * (z_left + z_right)
}

/// Surface gradient reconstruction at one interface.
///
/// Free-surface elevations eta = h + z and velocities v = q/h are taken from
/// the original element states; depths are rebuilt as eta - z_star and
/// discharges as h_star * v.
pub fn reconstruct_states(
    u_left: FlowVector,
    z_left: f64,
    u_right: FlowVector,
    z_right: f64,
) -> Result<RiemannStates> {
    check_depth(u_left.h, "reconstruction, left element")?;
    check_depth(u_right.h, "reconstruction, right element")?;
    let z_star = interface_topography(z_left, z_right);
    let eta_l = u_left.h + z_left;
    let eta_r = u_right.h + z_right;
    let h_star_l = eta_l - z_star;
    let h_star_r = eta_r - z_star;
    if h_star_l < 0.0 || h_star_r < 0.0 {
        return Err(Error::DepthPositivity {
            depth: h_star_l.min(h_star_r),
            context: " (reconstructed interface depth)".into(),
        });
    }
    let v_l = u_left.velocity();
    let v_r = u_right.velocity();
    Ok(RiemannStates {
        left: FlowVector::new(h_star_l, h_star_l * v_l),
        right: FlowVector::new(h_star_r, h_star_r * v_r),
        z_star,
    })
}

/// Well-balanced bed-slope source term for one element.
///
/// Takes the reconstructed depths facing into the element (right star depth
/// at the left interface, left star depth at the right interface) and the two
/// interface bed elevations.
pub fn bed_source(
    h_star_left_interface: f64,
    h_star_right_interface: f64,
    z_star_left: f64,
    z_star_right: f64,
    dx: f64,
    constants: PhysicsConstants,
) -> [f64; 2] {
    let mean_depth = 0.5 * (h_star_left_interface + h_star_right_interface);
    let slope = (z_star_right - z_star_left) / dx;
    // Association mirrors the order-0 stochastic Galerkin contraction so the
    // two paths agree bit for bit.
    [0.0, -(constants.g * (mean_depth * slope))]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    const G: PhysicsConstants = PhysicsConstants { g: 9.80665 };

    fn same_state(u: FlowVector, z: f64) -> RiemannStates {
        RiemannStates {
            left: u,
            right: u,
            z_star: z,
        }
    }

    #[test]
    fn physical_flux_at_rest() {
        let f = physical_flux(FlowVector::new(1.5, 0.0), G).unwrap();
        assert_abs_diff_eq!(f[0], 0.0);
        assert_relative_eq!(f[1], 11.03248125, max_relative = 1e-15);
    }

    #[test]
    fn physical_flux_moving() {
        let f = physical_flux(FlowVector::new(1.0, 1.0), G).unwrap();
        assert_relative_eq!(f[0], 1.0);
        assert_relative_eq!(f[1], 5.903325, max_relative = 1e-15);
    }

    #[test]
    fn physical_flux_hand_evaluated() {
        // 1.65^2/1.5 + g*1.5^2/2
        let f = physical_flux(FlowVector::new(1.5, 1.65), G).unwrap();
        assert_relative_eq!(f[0], 1.65);
        assert_relative_eq!(f[1], 1.65 * 1.65 / 1.5 + 9.80665 * 2.25 / 2.0);
    }

    #[test]
    fn physical_flux_rejects_dry_state() {
        assert!(physical_flux(FlowVector::new(0.0, 0.0), G).is_err());
        assert!(physical_flux(FlowVector::new(-0.1, 0.0), G).is_err());
        assert!(physical_flux(FlowVector::new(1e-13, 0.0), G).is_err());
    }

    #[test]
    fn roe_consistency_on_identical_states() {
        let u = FlowVector::new(2.0, 0.5);
        let flux = roe_flux(&same_state(u, 0.0), G, true).unwrap();
        let phys = physical_flux(u, G).unwrap();
        assert_eq!(flux, phys);
    }

    #[test]
    fn roe_rest_state_gives_hydrostatic_momentum() {
        let u = FlowVector::new(1.0, 0.0);
        let flux = roe_flux(&same_state(u, 0.0), G, true).unwrap();
        assert_eq!(flux[0], 0.0);
        assert_relative_eq!(flux[1], G.g / 2.0);
    }

    /// Self-convergence oracle for a dam break: total mass carried through
    /// the initial discontinuity agrees between a coarse and a fine run of
    /// the same first-order scheme within one percent.
    #[test]
    fn roe_dam_break_mass_transport_self_converges() {
        fn mass_through_midpoint(cells: usize, steps: usize, t_end: f64) -> f64 {
            let dt = t_end / steps as f64;
            let dx = 20.0 / cells as f64;
            let mut h: Vec<f64> = (0..cells)
                .map(|i| {
                    let x = -10.0 + (i as f64 + 0.5) * dx;
                    if x < 0.0 {
                        1.0
                    } else {
                        0.5
                    }
                })
                .collect();
            let mut q = vec![0.0; cells];
            let mid = cells / 2; // interface index of x = 0
            let mut transported = 0.0;
            for _ in 0..steps {
                let mut fluxes = Vec::with_capacity(cells + 1);
                for k in 0..=cells {
                    let li = k.saturating_sub(1).min(cells - 1);
                    let ri = k.min(cells - 1);
                    let states = reconstruct_states(
                        FlowVector::new(h[li], q[li]),
                        0.0,
                        FlowVector::new(h[ri], q[ri]),
                        0.0,
                    )
                    .unwrap();
                    fluxes.push(roe_flux(&states, G, true).unwrap());
                }
                transported += dt * fluxes[mid][0];
                for i in 0..cells {
                    h[i] -= dt / dx * (fluxes[i + 1][0] - fluxes[i][0]);
                    q[i] -= dt / dx * (fluxes[i + 1][1] - fluxes[i][1]);
                }
            }
            transported
        }

        let coarse = mass_through_midpoint(100, 200, 1.0);
        let fine = mass_through_midpoint(800, 1600, 1.0);
        assert_relative_eq!(coarse, fine, max_relative = 0.01);
    }

    #[test]
    fn interface_topography_is_the_mean() {
        assert_eq!(interface_topography(0.6, 0.4), 0.5);
        assert_eq!(interface_topography(0.0, 0.0), 0.0);
        assert_eq!(interface_topography(0.3, 0.3), 0.3);
    }

    #[test]
    fn reconstruction_flattens_a_flat_free_surface() {
        let states = reconstruct_states(
            FlowVector::new(0.9, 0.0),
            0.6,
            FlowVector::new(1.1, 0.0),
            0.4,
        )
        .unwrap();
        assert_eq!(states.z_star, 0.5);
        assert_abs_diff_eq!(states.left.h, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(states.right.h, 1.0, epsilon = 1e-15);
        assert_eq!(states.left.q, 0.0);
        assert_eq!(states.right.q, 0.0);
    }

    #[test]
    fn reconstruction_is_identity_on_equal_beds() {
        let ul = FlowVector::new(1.2, 0.3);
        let ur = FlowVector::new(0.8, -0.1);
        let states = reconstruct_states(ul, 0.2, ur, 0.2).unwrap();
        assert_eq!(states.left, ul);
        assert_eq!(states.right, ur);
    }

    #[test]
    fn reconstruction_hand_evaluated() {
        let states = reconstruct_states(
            FlowVector::new(1.0, 1.0),
            0.0,
            FlowVector::new(1.0, 1.0),
            0.2,
        )
        .unwrap();
        assert_abs_diff_eq!(states.z_star, 0.1);
        assert_abs_diff_eq!(states.left.h, 0.9, epsilon = 1e-15);
        assert_abs_diff_eq!(states.left.q, 0.9, epsilon = 1e-15);
        assert_abs_diff_eq!(states.right.h, 1.1, epsilon = 1e-15);
        assert_abs_diff_eq!(states.right.q, 1.1, epsilon = 1e-15);
    }

    #[test]
    fn bed_source_flat_bed_is_zero() {
        assert_eq!(bed_source(1.0, 1.0, 0.5, 0.5, 1.0, G), [0.0, 0.0]);
    }

    #[test]
    fn bed_source_direct_evaluation() {
        let s = bed_source(1.0, 1.0, 0.4, 0.6, 1.0, G);
        assert_eq!(s[0], 0.0);
        assert_relative_eq!(s[1], -G.g * 0.2, max_relative = 1e-14);
    }

    /// Discrete balance: for a lake at rest the momentum-flux difference over
    /// an element equals the source term.
    #[test]
    fn bed_source_balances_rest_momentum_flux() {
        let eta = 1.5;
        let (z_im, z_i, z_ip) = (0.35, 0.55, 0.15);
        let dx = 1.0;
        let u = |z: f64| FlowVector::new(eta - z, 0.0);
        let left = reconstruct_states(u(z_im), z_im, u(z_i), z_i).unwrap();
        let right = reconstruct_states(u(z_i), z_i, u(z_ip), z_ip).unwrap();
        let flux_l = roe_flux(&left, G, true).unwrap();
        let flux_r = roe_flux(&right, G, true).unwrap();
        let source = bed_source(left.right.h, right.left.h, left.z_star, right.z_star, dx, G);
        let flux_gradient = (flux_r[1] - flux_l[1]) / dx;
        assert_relative_eq!(flux_gradient, source[1], max_relative = 1e-13);
    }

    proptest! {
        /// Consistency F(U,U) = F(U) exactly, over a wide range of states.
        #[test]
        fn roe_consistency_randomised(
            h in 1e-3..30.0f64,
            v in -15.0..15.0f64,
            fix in proptest::bool::ANY,
        ) {
            let u = FlowVector::new(h, h * v);
            let flux = roe_flux(&same_state(u, 0.0), G, fix).unwrap();
            let phys = physical_flux(u, G).unwrap();
            prop_assert_eq!(flux, phys);
        }

        /// Mirroring both states negates the mass flux and keeps the
        /// momentum flux.
        #[test]
        fn roe_mirror_symmetry(
            hl in 0.1..5.0f64,
            hr in 0.1..5.0f64,
            vl in -3.0..3.0f64,
            vr in -3.0..3.0f64,
        ) {
            let states = RiemannStates {
                left: FlowVector::new(hl, hl * vl),
                right: FlowVector::new(hr, hr * vr),
                z_star: 0.0,
            };
            let mirrored = RiemannStates {
                left: FlowVector::new(hr, -hr * vr),
                right: FlowVector::new(hl, -hl * vl),
                z_star: 0.0,
            };
            let f = roe_flux(&states, G, false).unwrap();
            let m = roe_flux(&mirrored, G, false).unwrap();
            prop_assert!((f[0] + m[0]).abs() <= 1e-12 * (1.0 + f[0].abs()));
            prop_assert!((f[1] - m[1]).abs() <= 1e-12 * (1.0 + f[1].abs()));
        }

        /// Well-balancing kernel identity: constant free surface over any bed
        /// reconstructs equal states, so the Roe flux is the physical flux.
        #[test]
        fn flat_surface_reconstruction_balances(
            eta in 1.0..3.0f64,
            zl in 0.0..0.9f64,
            zr in 0.0..0.9f64,
        ) {
            let ul = FlowVector::new(eta - zl, 0.0);
            let ur = FlowVector::new(eta - zr, 0.0);
            let states = reconstruct_states(ul, zl, ur, zr).unwrap();
            prop_assert!((states.left.h - states.right.h).abs() < 1e-14);
            let flux = roe_flux(&states, G, true).unwrap();
            let phys = physical_flux(states.left, G).unwrap();
            prop_assert!((flux[0] - phys[0]).abs() < 1e-13);
            prop_assert!((flux[1] - phys[1]).abs() < 1e-12 * (1.0 + phys[1].abs()));
        }
    }
}
