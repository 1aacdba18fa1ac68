//! Coefficient tensors, the dual metric `p*`, boundary distances by fast sweeping,
//! and the regularised weights `d_n`.

mod coeffs;
mod distance;
mod eikonal;
mod tensor;

pub use coeffs::{CoefficientField, CoefficientKind, FrozenCoefficients, Pattern, PerturbationField, Sym2Field};
pub use distance::{default_n_reg, equivalence_constants, regularize, DistanceField, Metric};
pub use eikonal::{
    discrete_hessian_norm, dual_metric, eikonal_residual, euclidean_distance, finsler_distance, fit_second_derivative, solve,
    EikonalResidual, SecondDerivativeFit, SweepOptions, DEFAULT_MAX_SWEEPS,
};
pub use tensor::{eval_quartic, operator_norm, HessianMatrix, Sym2, Tensor4};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FinslerError {
    #[error("quartic form is negative ({value}) at x = {x:?}, xi = {xi:?}")]
    NegativeQuartic { x: [f64; 2], xi: [f64; 2], value: f64 },
    #[error("fast sweeping did not converge after {sweeps} sweeps (last update {last_update})")]
    NoConvergence { sweeps: usize, last_update: f64 },
    #[error("mask node {node} lies outside the domain")]
    MaskOutsideDomain { node: usize },
}
