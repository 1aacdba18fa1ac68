use serde::Serialize;

use super::{check_alpha, VerifierError};
use crate::assembly::{weighted_form, FormMatrix, WeightOrder};
use crate::finsler::{regularize, DistanceField};
use crate::geometry::{Grid, GridMask};
use crate::spectral::{fractional_apply, Spectrum};

/// Relative growth of `lhs` between the top two `n` that counts as blow-up.
pub const BLOWUP_INCREMENT: f64 = 0.05;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DecayRow {
    pub n_reg: u32,
    pub hess: f64,
    pub grad: f64,
    pub mass: f64,
    pub lhs: f64,
    pub c_hat: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    pub alpha: f64,
    /// `alpha < 1/2`.
    pub admissible: bool,
    pub u_index: usize,
    pub lambda: f64,
    /// Weighted sum at the largest `n`.
    pub lhs: f64,
    /// `lambda^{1 + alpha/2} ||u||^2`.
    pub rhs: f64,
    /// `||H u|| ||H^{alpha/2} u||` evaluated directly.
    pub rhs_direct: f64,
    /// `rhs + ||u||^2`.
    pub rhs_with_mass: f64,
    pub c_hat: f64,
    pub n_sweep: Vec<DecayRow>,
    /// `(lhs_top - lhs_prev) / lhs_prev`.
    pub increment: f64,
    pub blowup: bool,
}

/// Weighted Hessian, gradient and mass integrals of `phi_{u_index}` at powers `2a`, `2+2a`, `4+2a`.
///
/// `q` is the operator form of `spec`; `n_sweep` is increasing.
#[allow(clippy::too_many_arguments)]
pub fn verify_decay(
    spec: &Spectrum,
    q: &FormMatrix,
    grid: &Grid,
    mask: &GridMask,
    u_index: usize,
    alpha: f64,
    dist: &DistanceField,
    n_sweep: &[u32],
    spectrum_upper: Option<f64>,
) -> Result<DecayReport, VerifierError> {
    check_alpha(alpha)?;
    let pair = spec
        .pairs
        .get(u_index)
        .ok_or_else(|| VerifierError::Input(format!("eigenpair {u_index} not computed")))?;
    if n_sweep.is_empty() {
        return Err(VerifierError::Input("empty regularization sweep".into()));
    }
    let u = &pair.vector;
    let norm2 = spec.b_dot(u, u);
    let rhs = pair.value.powf(1.0 + 0.5 * alpha) * norm2;

    // ||H u||_B with H = B^{-1} A and diagonal B
    let au = q.matrix.matvec(u);
    let bdiag = spec.mass.as_diagonal().ok_or_else(|| VerifierError::Input("mass matrix must be diagonal".into()))?;
    let hu: Vec<f64> = au.iter().zip(&bdiag).map(|(x, b)| x / b).collect();
    let frac = fractional_apply(spec, 0.5 * alpha, u, spectrum_upper)?;
    let rhs_direct = spec.b_norm(&hu) * spec.b_norm(&frac.vector);

    let mut rows = Vec::with_capacity(n_sweep.len());
    for &n in n_sweep {
        let dn = regularize(dist, n);
        let hess = weighted_form(grid, mask, &dn, WeightOrder::Hess, 2.0 * alpha).bilinear(u, u);
        let grad = weighted_form(grid, mask, &dn, WeightOrder::Grad, 2.0 + 2.0 * alpha).bilinear(u, u);
        let mass = weighted_form(grid, mask, &dn, WeightOrder::Mass, 4.0 + 2.0 * alpha).bilinear(u, u);
        let lhs = hess + grad + mass;
        rows.push(DecayRow { n_reg: n, hess, grad, mass, lhs, c_hat: lhs / rhs });
    }
    let top = rows[rows.len() - 1];
    let increment = if rows.len() >= 2 {
        let prev = rows[rows.len() - 2];
        (top.lhs - prev.lhs) / prev.lhs
    } else {
        0.0
    };
    Ok(DecayReport {
        alpha,
        admissible: alpha < 0.5,
        u_index,
        lambda: pair.value,
        lhs: top.lhs,
        rhs,
        rhs_direct,
        rhs_with_mass: rhs + norm2,
        c_hat: top.c_hat,
        n_sweep: rows,
        increment,
        blowup: increment > BLOWUP_INCREMENT,
    })
}
