//! Probabilists' Hermite polynomials He_p.
//!
//! The basis functions are orthogonal under the standard Gaussian weight
//! W(xi) = exp(-xi^2/2)/sqrt(2*pi):
//!
//!   He_0 = 1, He_1 = xi, He_2 = xi^2 - 1, He_3 = xi^3 - 3*xi, ...
//!
//! with the three-term recurrence He_{p+1} = xi*He_p - p*He_{p-1}.

/// Standard Gaussian probability density, the weight of the Hermite basis.
pub fn gaussian_weight(xi: f64) -> f64 {
    (-0.5 * xi * xi).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Evaluates He_p(xi) by the three-term recurrence.
///
/// Total function: every degree and argument is accepted.
pub fn hermite_eval(p: usize, xi: f64) -> f64 {
    let mut prev = 1.0; // He_0
    if p == 0 {
        return prev;
    }
    let mut cur = xi; // He_1
    for k in 1..p {
        let next = xi * cur - (k as f64) * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Evaluates the derivative He_p'(xi) = p * He_{p-1}(xi).
pub fn hermite_deriv(p: usize, xi: f64) -> f64 {
    if p == 0 {
        0.0
    } else {
        (p as f64) * hermite_eval(p - 1, xi)
    }
}

/// Monomial coefficients of He_p, lowest degree first.
///
/// The leading coefficient is 1 (the probabilists' family is monic), which
/// lets callers assemble companion matrices without rescaling.
pub fn hermite_monomial_coeffs(p: usize) -> Vec<f64> {
    let mut prev = vec![1.0]; // He_0
    if p == 0 {
        return prev;
    }
    let mut cur = vec![0.0, 1.0]; // He_1
    for k in 1..p {
        // He_{k+1} = xi*He_k - k*He_{k-1}
        let mut next = vec![0.0; k + 2];
        for (d, &c) in cur.iter().enumerate() {
            next[d + 1] += c;
        }
        for (d, &c) in prev.iter().enumerate() {
            next[d] -= (k as f64) * c;
        }
        prev = cur;
        cur = next;
    }
    cur
}
