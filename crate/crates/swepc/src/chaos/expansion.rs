//! Expansion coefficients of a single random scalar.
//!
//! A random quantity A is represented by P+1 coefficients so that
//! A ~= sum_p A_p He_p(xi) with xi standard Gaussian. The mean is A_0, the
//! variance is sum_{p>=1} A_p^2 <He_p^2>, and higher central moments are
//! integrated with a quadrature rule of sufficient degree.

use crate::chaos::basis::HermiteBasis;
use crate::chaos::hermite::hermite_deriv;
use crate::chaos::quadrature::gauss_hermite;
use crate::error::{Error, Result};

/// Coefficients of one random scalar, lowest order first.
#[derive(Debug, Clone, PartialEq)]
pub struct ChaosCoefficients {
    coeffs: Vec<f64>,
}

impl ChaosCoefficients {
    /// Wraps a coefficient vector. Rejects empty or non-finite input.
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidInput(
                "a chaos expansion needs at least the order-0 coefficient".into(),
            ));
        }
        if let Some(bad) = coeffs.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite expansion coefficient {bad}"
            )));
        }
        Ok(Self { coeffs })
    }

    /// A certain (deterministic) value padded to `len` coefficients.
    pub fn deterministic(value: f64, len: usize) -> Self {
        let mut coeffs = vec![0.0; len.max(1)];
        coeffs[0] = value;
        Self { coeffs }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Expansion order P = len - 1.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coeffs
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    /// The mean, mu_1 = A_0.
    pub fn mean(&self) -> f64 {
        self.coeffs[0]
    }

    /// Realises the expansion at a germ value: sum_p A_p He_p(xi).
    pub fn evaluate(&self, xi: f64) -> f64 {
        evaluate_expansion(&self.coeffs, xi)
    }

    /// d/dxi of the realisation: sum_p A_p He_p'(xi).
    pub fn derivative(&self, xi: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(p, &c)| c * hermite_deriv(p, xi))
            .sum()
    }

    /// Coefficient-wise sum (e.g. free surface = depth + bed).
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    /// Coefficient-wise difference (e.g. depth = free surface - bed).
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                left: self.len(),
                right: other.len(),
                context: "chaos coefficient arithmetic",
            });
        }
        Ok(Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// The m-th moment: mean for m = 1, central moments for m >= 2.
    pub fn moment(&self, m: usize, basis: &HermiteBasis) -> Result<f64> {
        moment(&self.coeffs, m, basis)
    }

    /// True when every coefficient above order 0 is exactly zero.
    pub fn is_deterministic(&self) -> bool {
        self.coeffs[1..].iter().all(|&c| c == 0.0)
    }
}

impl std::ops::Index<usize> for ChaosCoefficients {
    type Output = f64;
    fn index(&self, p: usize) -> &f64 {
        &self.coeffs[p]
    }
}

/// Realises a coefficient slice at a germ value.
pub fn evaluate_expansion(coeffs: &[f64], xi: f64) -> f64 {
    // Single pass over the He recurrence; for a lone coefficient this is the
    // exact product c_0 * 1, which the order-0 solver reduction relies on.
    let mut sum = 0.0;
    let mut prev = 1.0;
    let mut cur = xi;
    for (p, &c) in coeffs.iter().enumerate() {
        let phi = if p == 0 {
            1.0
        } else if p == 1 {
            cur
        } else {
            let next = xi * cur - ((p - 1) as f64) * prev;
            prev = cur;
            cur = next;
            next
        };
        sum += c * phi;
    }
    sum
}

/// The m-th moment of the expansion defined by `coeffs`.
///
/// m = 1 reads off the order-0 coefficient; m = 2 contracts against the basis
/// norms; m >= 3 integrates (A - mean)^m with a rule of ceil((mP+1)/2) nodes,
/// exact because the integrand is a polynomial of degree mP.
pub fn moment(coeffs: &[f64], m: usize, basis: &HermiteBasis) -> Result<f64> {
    if m == 0 {
        return Err(Error::ZeroMomentOrder);
    }
    if coeffs.len() > basis.len() {
        return Err(Error::LengthMismatch {
            left: coeffs.len(),
            right: basis.len(),
            context: "expansion longer than basis",
        });
    }
    match m {
        1 => Ok(coeffs[0]),
        2 => Ok(coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(p, &c)| c * c * basis.norm(p))
            .sum()),
        _ => {
            let order = coeffs.len() - 1;
            let rule = gauss_hermite((m * order + 1).div_ceil(2).max(1))?;
            let mut centred = coeffs.to_vec();
            centred[0] = 0.0;
            rule.ensemble_average(|xi| evaluate_expansion(&centred, xi).powi(m as i32))
        }
    }
}
