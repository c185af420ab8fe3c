//! Precomputed ensemble averages of the Hermite basis.
//!
//! A solver of order P needs the basis norms <He_l^2> (which equal l!), the
//! triple products <He_p He_s He_l> appearing in the source-term projection,
//! and a quadrature rule for sampling nonlinear fluxes. All of these are
//! independent of the solution, so they are computed once and stored.

use crate::chaos::hermite::hermite_eval;
use crate::chaos::quadrature::{gauss_hermite, QuadratureRule};
use crate::error::{Error, Result};

/// Highest supported expansion order. The physics limits practical runs to
/// P <= 3 (the Gaussian tails reach negative depths beyond that), but the
/// basis machinery itself is exercised well past it in tests.
pub const MAX_ORDER: usize = 8;

/// Basis norms, triple-product tensor and quadrature rule for order P.
#[derive(Debug, Clone)]
pub struct HermiteBasis {
    order: usize,
    norms: Vec<f64>,
    /// Flattened (P+1)^3 tensor, index [p][s][l] -> (p*(P+1) + s)*(P+1) + l.
    triple: Vec<f64>,
    quad: QuadratureRule,
}

impl HermiteBasis {
    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of expansion coefficients, P + 1.
    pub fn len(&self) -> usize {
        self.order + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// <He_l^2>, equal to l!.
    pub fn norm(&self, l: usize) -> f64 {
        self.norms[l]
    }

    pub fn norms(&self) -> &[f64] {
        &self.norms
    }

    /// <He_p He_s He_l>, symmetric in all three indices.
    pub fn triple(&self, p: usize, s: usize, l: usize) -> f64 {
        let n = self.order + 1;
        self.triple[(p * n + s) * n + l]
    }

    /// The (P+1)-node rule used for flux sampling.
    pub fn quad(&self) -> &QuadratureRule {
        &self.quad
    }
}

/// Builds the order-P basis.
///
/// Tensor entries are integrated with a rule of ceil((3P+1)/2) nodes, enough
/// to integrate every product He_p He_s He_l (degree at most 3P) exactly.
/// Entries are evaluated once per sorted index triple and mirrored, so the
/// stored tensor is symmetric by construction.
pub fn build_basis(order: usize) -> Result<HermiteBasis> {
    if order > MAX_ORDER {
        return Err(Error::OrderTooLarge {
            order,
            max: MAX_ORDER,
        });
    }
    let n = order + 1;
    let exact = gauss_hermite((3 * order + 2).div_ceil(2).max(1))?;

    let mut norms = vec![0.0; n];
    for (l, norm) in norms.iter_mut().enumerate() {
        *norm = exact.ensemble_average(|xi| {
            let v = hermite_eval(l, xi);
            v * v
        })?;
    }

    let mut triple = vec![0.0; n * n * n];
    let idx = |p: usize, s: usize, l: usize| (p * n + s) * n + l;
    for p in 0..n {
        for s in p..n {
            for l in s..n {
                let value = exact.ensemble_average(|xi| {
                    (hermite_eval(p, xi) * hermite_eval(s, xi)) * hermite_eval(l, xi)
                })?;
                for (a, b, c) in [
                    (p, s, l),
                    (p, l, s),
                    (s, p, l),
                    (s, l, p),
                    (l, p, s),
                    (l, s, p),
                ] {
                    triple[idx(a, b, c)] = value;
                }
            }
        }
    }

    Ok(HermiteBasis {
        order,
        norms,
        triple,
        quad: gauss_hermite(n)?,
    })
}
