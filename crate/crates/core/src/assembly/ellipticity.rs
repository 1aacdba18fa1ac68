use serde::Serialize;

use super::forms::{symbol_failure, FormMatrix};
use super::AssemblyError;
use crate::finsler::{CoefficientField, CoefficientKind, HessianMatrix, Pattern, PerturbationField};
use crate::geometry::Grid;
use crate::spectral::{lowest_eigenpairs, SolverOptions, SpectralError, Spectrum};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EllipticityWindow {
    pub lambda_ell: f64,
    #[serde(rename = "Lambda_ell")]
    pub big_lambda_ell: f64,
    /// Worst residual of the two extreme pairs.
    pub residual: f64,
    pub certified: bool,
}

/// Extreme eigenvalue of a pencil, accepting best-effort Ritz values when the target is missed.
fn extreme(a: &FormMatrix, b: &FormMatrix, opts: &SolverOptions) -> Result<(f64, f64, bool), AssemblyError> {
    let take = |s: &Spectrum| (s.pairs[0].value, s.pairs[0].residual);
    match lowest_eigenpairs(&a.matrix, &b.matrix, 1, opts) {
        Ok(s) => {
            let (v, r) = take(&s);
            Ok((v, r, true))
        }
        Err(SpectralError::NoConvergence { spectrum, .. }) => {
            let (v, r) = take(&spectrum);
            Ok((v, r, false))
        }
        Err(SpectralError::NotPositiveDefinite(e)) => Err(AssemblyError::NotPositive(e)),
        Err(e) => Err(AssemblyError::Spectral(Box::new(e))),
    }
}

/// `[min, max]` of `Q(u) / Q0(u)`.
pub fn ellipticity_window(q: &FormMatrix, q0: &FormMatrix) -> Result<EllipticityWindow, AssemblyError> {
    let opts = SolverOptions { tol: 1e-6, max_cycles: 60, ..Default::default() };
    ellipticity_window_with(q, q0, &opts)
}

pub fn ellipticity_window_with(q: &FormMatrix, q0: &FormMatrix, opts: &SolverOptions) -> Result<EllipticityWindow, AssemblyError> {
    let (lo, r1, c1) = extreme(q, q0, opts)?;
    let (inv_hi, r2, c2) = extreme(q0, q, opts)?;
    Ok(EllipticityWindow {
        lambda_ell: lo,
        big_lambda_ell: 1.0 / inv_hi,
        residual: r1.max(r2),
        certified: c1 && c2,
    })
}

fn probe(field: &CoefficientField, grid: &Grid) -> Result<(), AssemblyError> {
    let frozen = field.freeze(grid);
    for (node, t) in frozen.tensors.iter().enumerate() {
        if t.symmetry_defect() > 1e-13 {
            return Err(AssemblyError::SymmetryBroken { node });
        }
        if let Some(xi) = symbol_failure(t) {
            return Err(AssemblyError::EllipticityLost { node, xi });
        }
    }
    Ok(())
}

/// `base` plus a seeded node-wise symmetric perturbation of sup operator norm `delta_magnitude`.
pub fn perturb_coeffs(base: &CoefficientField, delta_magnitude: f64, seed: u64, grid: &Grid) -> Result<CoefficientField, AssemblyError> {
    assert!(delta_magnitude >= 0.0, "perturbation magnitude must be nonnegative");
    if delta_magnitude == 0.0 {
        return Ok(base.clone());
    }
    let delta = PerturbationField { pattern: Pattern::Random { seed }, magnitude: delta_magnitude, grid: *grid };
    let field = CoefficientField::new(CoefficientKind::Perturbed { base: Box::new(base.clone()), delta });
    probe(&field, grid)?;
    Ok(field)
}

/// `base` plus the same Hessian-form matrix at every node.
pub fn perturb_coeffs_constant(base: &CoefficientField, delta: HessianMatrix, grid: &Grid) -> Result<CoefficientField, AssemblyError> {
    let magnitude = crate::finsler::operator_norm(&delta);
    let delta = PerturbationField { pattern: Pattern::Constant(delta), magnitude, grid: *grid };
    let field = CoefficientField::new(CoefficientKind::Perturbed { base: Box::new(base.clone()), delta });
    probe(&field, grid)?;
    Ok(field)
}
