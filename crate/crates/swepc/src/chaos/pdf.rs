//! Probability density reconstruction from expansion coefficients.
//!
//! For a realisation value `a`, the density is
//!
//!   f_A(a) = sum_j |A'(xi_j)|^-1 W(xi_j)
//!
//! summed over the real roots xi_j of A(xi) - a = 0. Roots are computed as
//! companion-matrix eigenvalues of the expansion written in the monomial
//! basis. Fold points of A produce integrable singularities; those are
//! reported as a large finite cap so output stays plottable.

use crate::chaos::expansion::ChaosCoefficients;
use crate::chaos::hermite::{gaussian_weight, hermite_monomial_coeffs};
use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// Roots with imaginary part below this magnitude count as real.
const REAL_ROOT_TOL: f64 = 1e-9;
/// Derivative magnitude below which the density is treated as singular.
const SINGULAR_DERIV_TOL: f64 = 1e-12;
/// Finite stand-in for a density singularity.
const DENSITY_CAP: f64 = 1e12;

/// A sampled density curve: realisation values and densities f(a).
#[derive(Debug, Clone, PartialEq)]
pub struct PdfCurve {
    pub abscissae: Vec<f64>,
    pub densities: Vec<f64>,
}

impl PdfCurve {
    /// Trapezoidal integral of the curve.
    pub fn integral(&self) -> f64 {
        self.abscissae
            .windows(2)
            .zip(self.densities.windows(2))
            .map(|(a, f)| 0.5 * (f[0] + f[1]) * (a[1] - a[0]))
            .sum()
    }
}

/// Reconstructs the density of the expansion over `samples` uniformly spaced
/// realisation values in [a_min, a_max].
///
/// Rejects deterministic expansions: their distribution is a delta with no
/// density representation.
pub fn reconstruct_pdf(
    c: &ChaosCoefficients,
    a_min: f64,
    a_max: f64,
    samples: usize,
) -> Result<PdfCurve> {
    if a_min.is_nan() || a_max.is_nan() || a_min >= a_max {
        return Err(Error::InvalidInput(format!(
            "pdf range is empty: [{a_min}, {a_max}]"
        )));
    }
    if samples < 2 {
        return Err(Error::InvalidInput(
            "pdf reconstruction needs at least 2 samples".into(),
        ));
    }
    if c.is_deterministic() {
        return Err(Error::DegenerateDistribution {
            what: "expansion".into(),
        });
    }

    // Monomial form of A(xi) = sum_p c_p He_p(xi), lowest degree first.
    let mut mono = vec![0.0; c.len()];
    for (p, &cp) in c.as_slice().iter().enumerate() {
        if cp == 0.0 {
            continue;
        }
        for (d, &hc) in hermite_monomial_coeffs(p).iter().enumerate() {
            mono[d] += cp * hc;
        }
    }
    // Leading degree is the highest order with a nonzero coefficient (the
    // basis is monic, so no cancellation can occur there).
    while mono.len() > 1 && *mono.last().unwrap() == 0.0 {
        mono.pop();
    }

    let step = (a_max - a_min) / (samples - 1) as f64;
    let mut abscissae = Vec::with_capacity(samples);
    let mut densities = Vec::with_capacity(samples);
    for k in 0..samples {
        let a = a_min + step * k as f64;
        let mut shifted = mono.clone();
        shifted[0] -= a;
        let mut density = 0.0;
        for xi in real_roots(&shifted)? {
            let deriv = c.derivative(xi).abs();
            let w = gaussian_weight(xi);
            density += if deriv < SINGULAR_DERIV_TOL {
                DENSITY_CAP
            } else {
                w / deriv
            };
        }
        abscissae.push(a);
        densities.push(density.min(DENSITY_CAP));
    }
    Ok(PdfCurve {
        abscissae,
        densities,
    })
}

/// Real roots of a polynomial given by monomial coefficients (lowest first),
/// via eigenvalues of the companion matrix.
fn real_roots(mono: &[f64]) -> Result<Vec<f64>> {
    let degree = mono.len() - 1;
    if degree == 0 {
        return if mono[0] == 0.0 {
            Err(Error::InvalidInput(
                "root finding on an identically zero polynomial".into(),
            ))
        } else {
            Ok(Vec::new())
        };
    }
    let lead = mono[degree];
    let mut companion = DMatrix::<f64>::zeros(degree, degree);
    for i in 1..degree {
        companion[(i, i - 1)] = 1.0;
    }
    for i in 0..degree {
        companion[(i, degree - 1)] = -mono[i] / lead;
    }
    let eigen = companion.complex_eigenvalues();
    Ok(eigen
        .iter()
        .filter(|z| z.im.abs() <= REAL_ROOT_TOL)
        .map(|z| z.re)
        .collect())
}
