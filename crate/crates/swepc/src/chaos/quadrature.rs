//! Gauss-Hermite quadrature in the probabilists' convention.
//!
//! The returned weights absorb the Gaussian weight function, so that
//!
//!   sum_j w_j f(xi_j)  ~=  integral f(xi) W(xi) dxi  =  <f>
//!
//! i.e. quadrature sums approximate ensemble averages directly and the
//! weights sum to one. An n-node rule is exact for polynomials of degree
//! up to 2n - 1.

use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// Nodes and ensemble-average weights of a Gauss-Hermite rule.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Weighted sum over the nodes: the ensemble average of `f`.
    ///
    /// Fails if `f` returns a non-finite value, naming the offending node.
    pub fn ensemble_average<F: FnMut(f64) -> f64>(&self, mut f: F) -> Result<f64> {
        let mut sum = 0.0;
        for (j, (&xi, &w)) in self.nodes.iter().zip(&self.weights).enumerate() {
            let value = f(xi);
            if !value.is_finite() {
                return Err(Error::NonFiniteIntegrand {
                    node_index: j,
                    node: xi,
                });
            }
            sum += w * value;
        }
        Ok(sum)
    }
}

/// Builds the n-node probabilists' Gauss-Hermite rule.
///
/// Golub-Welsch: the nodes are the eigenvalues of the symmetric tridiagonal
/// Jacobi matrix of the He recurrence (zero diagonal, off-diagonal sqrt(k)),
/// and each weight is the squared first component of the corresponding unit
/// eigenvector. Stable far beyond the orders needed here.
pub fn gauss_hermite(n: usize) -> Result<QuadratureRule> {
    if n == 0 {
        return Err(Error::EmptyQuadrature);
    }
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = (k as f64).sqrt();
        jacobi[(k - 1, k)] = b;
        jacobi[(k, k - 1)] = b;
    }
    let eigen = jacobi.symmetric_eigen();

    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|j| {
            let first = eigen.eigenvectors[(0, j)];
            (eigen.eigenvalues[j], first * first)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    // The eigenvector normalisation already gives sum(w) = 1 up to rounding;
    // rescale so the constant function integrates to exactly one.
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    let nodes = pairs.iter().map(|p| p.0).collect();
    let weights = pairs.iter().map(|p| p.1 / total).collect();
    Ok(QuadratureRule { nodes, weights })
}
