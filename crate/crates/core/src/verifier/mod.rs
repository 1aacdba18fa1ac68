//! Inequality checks on finite witness sets.
//!
//! Hardy-Rellich constants come from the lowest generalized eigenvalue of a
//! form against a weighted mass; the decay and form inequalities are
//! evaluated on eigenvectors and seeded bumps. Negative margins are reported
//! as data.

mod decay;
mod hardy;
mod palpha;
mod witness;

pub use decay::{verify_decay, DecayReport, DecayRow, BLOWUP_INCREMENT};
pub use hardy::{estimate_hardy_constant, hardy_report, HardyKind, HardyOptions, HardyReport, HardyRow, WeakPair};
pub use palpha::{
    cross_term_ratio, measure_cross_term_constant, probe_p_alpha, probe_perturbation, ChainRow, CrossTermReport, PAlphaReport,
    PAlphaRow, PerturbationReport, ProbeContext, KPRIME_LADDER,
};
pub use witness::{seeded_bumps, witness_set, Witness};

use thiserror::Error;

use crate::assembly::AssemblyError;
use crate::sparse::NotPositiveDefinite;
use crate::spectral::SpectralError;

#[derive(Debug, Error, Clone)]
pub enum VerifierError {
    #[error("alpha = {alpha} lies outside (0, 1)")]
    AlphaOutOfRange { alpha: f64 },
    #[error("perturbation {delta} is not below the admissible bound {bound}")]
    BoundViolated { delta: f64, bound: f64 },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Factor(#[from] NotPositiveDefinite),
    #[error("{0}")]
    Input(String),
}

/// `9 / ((1 - 4 alpha^2)(9 - 4 alpha^2))`.
pub fn k_alpha(alpha: f64) -> f64 {
    let a2 = alpha * alpha;
    9.0 / ((1.0 - 4.0 * a2) * (9.0 - 4.0 * a2))
}

/// `(40 alpha^2 - 16 alpha^4) / 9`.
pub fn gamma_alpha(alpha: f64) -> f64 {
    let a2 = alpha * alpha;
    (40.0 * a2 - 16.0 * a2 * a2) / 9.0
}

/// `3 (1 + c2^2 / a + (9/16) c2^4 / b)` for distance equivalence `c2` and Hardy-Rellich constants `a`, `b`.
pub fn cross_term_closed_form(c2: f64, a: f64, b: f64) -> f64 {
    3.0 * (1.0 + c2 * c2 / a + 9.0 / 16.0 * c2.powi(4) / b)
}

/// `{8, 16, 32, 64, round(1/h)}` capped at `round(1/h)`.
pub fn default_n_sweep(h: f64) -> Vec<u32> {
    let top = crate::finsler::default_n_reg(h);
    let mut v: Vec<u32> = [8, 16, 32, 64].into_iter().filter(|&n| n < top).collect();
    v.push(top);
    v
}

pub(crate) fn check_alpha(alpha: f64) -> Result<(), VerifierError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(VerifierError::AlphaOutOfRange { alpha })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spot_values() {
        assert!((gamma_alpha(0.5) - 1.0).abs() < 1e-12);
        assert!((k_alpha(0.25) - 9.0 / (0.75 * 8.75)).abs() < 1e-12);
        assert!((k_alpha(0.25) - 1.371_428_571_428_571_4).abs() < 1e-12);
        assert!((cross_term_closed_form(1.0, 0.25, 9.0 / 16.0) - 18.0).abs() < 1e-12);
    }

    #[test]
    fn sweep_defaults() {
        assert_eq!(default_n_sweep(1.0 / 64.0), vec![8, 16, 32, 64]);
        assert_eq!(default_n_sweep(1.0 / 128.0), vec![8, 16, 32, 64, 128]);
        assert_eq!(default_n_sweep(1.0 / 20.0), vec![8, 16, 20]);
    }

    #[test]
    fn alpha_window() {
        assert!(check_alpha(0.6).is_ok());
        assert!(matches!(check_alpha(1.0), Err(VerifierError::AlphaOutOfRange { .. })));
        assert!(check_alpha(0.0).is_err());
    }
}
