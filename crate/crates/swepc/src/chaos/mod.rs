//! Wiener-Hermite polynomial chaos machinery: basis evaluation, quadrature,
//! ensemble-average tensors, moments and density reconstruction.

pub mod basis;
pub mod expansion;
pub mod hermite;
pub mod pdf;
pub mod quadrature;

pub use basis::{build_basis, HermiteBasis, MAX_ORDER};
pub use expansion::{evaluate_expansion, moment, ChaosCoefficients};
pub use hermite::{gaussian_weight, hermite_deriv, hermite_eval};
pub use pdf::{reconstruct_pdf, PdfCurve};
pub use quadrature::{gauss_hermite, QuadratureRule};
