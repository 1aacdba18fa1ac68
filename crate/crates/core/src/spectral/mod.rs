//! Generalized symmetric eigenpairs with residual certificates and spectral fractional powers.

mod solver;

pub use solver::{lowest_eigenpairs, lowest_eigenpairs_factored, SolverOptions};

use std::io::Write;
use std::sync::Arc;

use thiserror::Error;

use crate::sparse::{CsrMatrix, NotPositiveDefinite};

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    /// B-normalised.
    pub vector: Vec<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct Spectrum {
    pub pairs: Vec<EigenPair>,
    /// Mass matrix `B` of the pencil.
    pub mass: Arc<CsrMatrix>,
    pub m: usize,
    pub converged: bool,
}

impl Spectrum {
    pub fn values(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.value).collect()
    }

    pub fn worst_residual(&self) -> f64 {
        self.pairs.iter().map(|p| p.residual).fold(0.0, f64::max)
    }

    pub fn b_dot(&self, u: &[f64], v: &[f64]) -> f64 {
        self.mass.bilinear(u, v)
    }

    pub fn b_norm(&self, u: &[f64]) -> f64 {
        self.mass.quadratic(u).max(0.0).sqrt()
    }

    /// `index,value,residual` rows, 1-based index.
    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["index", "value", "residual"])?;
        for (k, p) in self.pairs.iter().enumerate() {
            wr.write_record([(k + 1).to_string(), fmt17(p.value), fmt17(p.residual)])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{:.16e}", x)
}

#[derive(Debug, Error, Clone)]
pub enum SpectralError {
    #[error("eigensolver did not reach the residual target (achieved {achieved:e})")]
    NoConvergence { spectrum: Box<Spectrum>, achieved: f64 },
    #[error("mass matrix is not positive definite")]
    MassNotPD,
    #[error(transparent)]
    NotPositiveDefinite(#[from] NotPositiveDefinite),
    #[error("cannot compute {m} pairs of a {n}-dimensional pencil")]
    TooManyPairs { m: usize, n: usize },
    #[error("spectral truncation tail {tail:e} exceeds 10% of the partial sum norm {norm:e}")]
    InsufficientBasis { tail: f64, norm: f64 },
}

#[derive(Debug, Clone)]
pub struct FractionalApply {
    pub vector: Vec<f64>,
    /// Upper bound on the B-norm of the omitted part of the spectral sum.
    pub truncation_bound: f64,
    /// B-norm of the retained partial sum.
    pub partial_norm: f64,
}

/// `sum_k value_k^s <u, v_k>_B v_k` over the computed pairs, plus a tail bound.
///
/// The omitted part `H^s (u - P_m u)` has B-norm at most `upper^s ||u - P_m u||_B`
/// with `upper` any bound on the top of the spectrum; `spectrum_upper` supplies it
/// (see [`spectrum_upper_bound`]) and defaults to the last computed value when absent.
pub fn fractional_apply(spec: &Spectrum, s: f64, u: &[f64], spectrum_upper: Option<f64>) -> Result<FractionalApply, SpectralError> {
    assert!((0.0..1.0).contains(&s), "fractional exponent must lie in [0, 1)");
    let mut out = vec![0.0; u.len()];
    let mut rem = u.to_vec();
    for p in &spec.pairs {
        let c = spec.b_dot(&p.vector, u);
        let f = p.value.powf(s) * c;
        for ((o, r), v) in out.iter_mut().zip(rem.iter_mut()).zip(&p.vector) {
            *o += f * v;
            *r -= c * v;
        }
    }
    let tail_norm = spec.b_norm(&rem);
    let last = spec.pairs.last().map_or(1.0, |p| p.value);
    let upper = spectrum_upper.unwrap_or(last).max(last);
    let truncation_bound = upper.powf(s) * tail_norm;
    let partial_norm = spec.b_norm(&out);
    if truncation_bound > 0.1 * partial_norm {
        return Err(SpectralError::InsufficientBasis { tail: truncation_bound, norm: partial_norm });
    }
    Ok(FractionalApply { vector: out, truncation_bound, partial_norm })
}

/// Gershgorin bound on the top eigenvalue of `(A, B)` for diagonal `B`.
pub fn spectrum_upper_bound(a: &CsrMatrix, b: &CsrMatrix) -> Option<f64> {
    b.as_diagonal().map(|d| a.gershgorin_upper(&d))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_problem(n: usize) -> (CsrMatrix, CsrMatrix) {
        let d: Vec<f64> = (1..=n).map(|k| k as f64).collect();
        (CsrMatrix::diagonal(&d), CsrMatrix::identity(n, 1.0))
    }

    #[test]
    fn diagonal_pencil_values() {
        let (a, b) = diag_problem(40);
        let s = lowest_eigenpairs(&a, &b, 3, &SolverOptions::default()).unwrap();
        let v = s.values();
        for (k, x) in v.iter().enumerate() {
            assert!((x - (k + 1) as f64).abs() < 1e-10, "{v:?}");
        }
        assert!(s.worst_residual() <= 1e-8);
    }

    #[test]
    fn generalized_pencil_and_orthonormality() {
        // A = tridiag(-1, 2, -1), B = diag(1..n)
        let n = 60;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
            }
        }
        let a = CsrMatrix::from_upper_triplets(n, t);
        let b = CsrMatrix::diagonal(&(1..=n).map(|k| 1.0 + k as f64 / n as f64).collect::<Vec<_>>());
        let s = lowest_eigenpairs(&a, &b, 4, &SolverOptions::default()).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let g = b.bilinear(&s.pairs[i].vector, &s.pairs[j].vector);
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g - want).abs() < 1e-8);
            }
            let p = &s.pairs[i];
            let rq = a.quadratic(&p.vector) / b.quadratic(&p.vector);
            assert!((rq - p.value).abs() <= 2.0 * p.residual.max(1e-14) * p.value);
            let av = a.matvec(&p.vector);
            let bv = b.matvec(&p.vector);
            let r: f64 = av.iter().zip(&bv).map(|(x, y)| (x - p.value * y).powi(2)).sum::<f64>().sqrt();
            assert!(r < 1e-6 * p.value);
        }
    }

    #[test]
    fn determinism() {
        let (a, b) = diag_problem(30);
        let o = SolverOptions::default();
        let s1 = lowest_eigenpairs(&a, &b, 2, &o).unwrap();
        let s2 = lowest_eigenpairs(&a, &b, 2, &o).unwrap();
        assert_eq!(s1.values(), s2.values());
    }

    #[test]
    fn fractional_on_eigenvector() {
        let (a, b) = diag_problem(20);
        let s = lowest_eigenpairs(&a, &b, 3, &SolverOptions::default()).unwrap();
        let u = s.pairs[0].vector.clone();
        let r = fractional_apply(&s, 0.25, &u, spectrum_upper_bound(&a, &b)).unwrap();
        for (x, y) in r.vector.iter().zip(&u) {
            assert!((x - s.pairs[0].value.powf(0.25) * y).abs() < 1e-10);
        }
        assert!(r.truncation_bound < 1e-10);
    }

    #[test]
    fn fractional_zero_power_is_projection() {
        let (a, b) = diag_problem(20);
        let s = lowest_eigenpairs(&a, &b, 3, &SolverOptions::default()).unwrap();
        let mut u = s.pairs[1].vector.clone();
        u[10] += 0.01;
        let r = fractional_apply(&s, 0.0, &u, None).unwrap();
        let rem: Vec<f64> = u.iter().zip(&r.vector).map(|(x, y)| x - y).collect();
        assert!((r.truncation_bound - b.quadratic(&rem).sqrt()).abs() < 1e-14);
        let far = vec![1.0; 20];
        assert!(matches!(fractional_apply(&s, 0.0, &far, None), Err(SpectralError::InsufficientBasis { .. })));
    }

    #[test]
    fn indefinite_operator_rejected() {
        let a = CsrMatrix::diagonal(&[1.0, -1.0, 2.0, 3.0, 4.0, 5.0]);
        let b = CsrMatrix::identity(6, 1.0);
        assert!(matches!(lowest_eigenpairs(&a, &b, 1, &SolverOptions::default()), Err(SpectralError::NotPositiveDefinite(_))));
    }

    #[test]
    fn csv_header() {
        let (a, b) = diag_problem(12);
        let s = lowest_eigenpairs(&a, &b, 2, &SolverOptions::default()).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("index,value,residual\n1,"));
    }
}
