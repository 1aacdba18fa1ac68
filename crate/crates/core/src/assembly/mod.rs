//! Discrete quadratic forms on masked grid unknowns.
//!
//! Every form is `h^2 sum_p c_p(u)^T M_p c_p(v)` where `c_p` stacks finite
//! differences at node `p` and values outside the mask read as zero. The
//! operator form uses `(D_xx, D_xy, D_yy)` with the nodal matrix of the
//! coefficient tensor; the bilaplacian form uses the five-point Laplacian.

mod ellipticity;
mod forms;
mod nodal;

pub use ellipticity::{ellipticity_window, ellipticity_window_with, perturb_coeffs, perturb_coeffs_constant, EllipticityWindow};
pub use forms::{
    assemble_dirichlet, assemble_q, assemble_q0, assemble_weighted, hessian_form, q0_form, q_form, weighted_form, FormKind, FormMatrix, WeightOrder,
};
pub use nodal::{NodalForm, Stencil};

use thiserror::Error;

use crate::sparse::NotPositiveDefinite;

#[derive(Debug, Error, Clone)]
pub enum AssemblyError {
    #[error("coefficient symbol is not positive at node {node} in direction {xi:?}")]
    NotElliptic { node: usize, xi: [f64; 2] },
    #[error("perturbed coefficients lose positivity at node {node} in direction {xi:?}")]
    EllipticityLost { node: usize, xi: [f64; 2] },
    #[error("perturbed tensor breaks the index symmetries at node {node}")]
    SymmetryBroken { node: usize },
    #[error("form is not positive definite: {0}")]
    NotPositive(NotPositiveDefinite),
    #[error(transparent)]
    Spectral(Box<crate::spectral::SpectralError>),
}
