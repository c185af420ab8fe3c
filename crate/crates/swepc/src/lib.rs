//! One-dimensional shallow water flow with quantified uncertainty.
//!
//! The crate pairs a first-order finite volume Godunov-type solver with a
//! Wiener-Hermite polynomial chaos expansion of the flow variables. Evolving
//! the expansion coefficients directly (an intrusive stochastic Galerkin
//! scheme) propagates topographic uncertainty through the flow in a single
//! run, orders of magnitude cheaper than Monte Carlo sampling, while the
//! surface gradient method keeps the scheme well-balanced: a lake at rest
//! over an uncertain bed stays at rest to machine precision.
//!
//! Functionality is split into:
//!
//! - [`chaos`]: Hermite basis, Gauss-Hermite quadrature, moments and
//!   probability density reconstruction for expansion coefficients.
//! - [`physics`]: deterministic shallow water kernels (physical flux, Roe
//!   approximate Riemann solver, surface-gradient reconstruction, bed-slope
//!   source term).
//! - [`deterministic`]: the deterministic time integrator.
//! - [`galerkin`]: the stochastic Galerkin time integrator, in well-balanced
//!   and centred-difference source variants.
//! - [`cases`]: the built-in test configurations.
//! - [`monte_carlo`]: a Monte Carlo reference harness around the
//!   deterministic solver.
//! - [`io`]: the text table formats written by the `swepc` and `swepdf`
//!   command-line tools.

pub mod cases;
pub mod chaos;
pub mod deterministic;
pub mod error;
pub mod galerkin;
pub mod io;
pub mod monte_carlo;
pub mod physics;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    //! Keeps the guide's code samples compiling; `cargo test --doc` runs
    //! every fenced Rust block in the book chapters.
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/chaos.md")]
    mod chaos {}
    #[doc = include_str!("../../../book/src/shallow-water.md")]
    mod shallow_water {}
    #[doc = include_str!("../../../book/src/stochastic-galerkin.md")]
    mod stochastic_galerkin {}
    #[doc = include_str!("../../../book/src/test-cases.md")]
    mod test_cases {}
    #[doc = include_str!("../../../book/src/monte-carlo.md")]
    mod monte_carlo {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
