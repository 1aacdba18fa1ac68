use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::{EigenPair, SpectralError, Spectrum};
use crate::sparse::{CsrMatrix, EnvelopeCholesky};

#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Relative residual target.
    pub tol: f64,
    pub seed: u64,
    /// Block width; defaults to `m + 2` (at least 4).
    pub block: Option<usize>,
    /// Largest Krylov basis per restart cycle.
    pub basis: usize,
    pub max_cycles: usize,
    /// Starting vectors placed ahead of the random block.
    pub initial: Vec<Vec<f64>>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-8, seed: 42, block: None, basis: 96, max_cycles: 300, initial: Vec::new() }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// B-orthonormal basis kept together with its image under `B`.
struct Basis<'a> {
    b: &'a CsrMatrix,
    v: Vec<Vec<f64>>,
    bv: Vec<Vec<f64>>,
}

impl<'a> Basis<'a> {
    fn new(b: &'a CsrMatrix) -> Self {
        Self { b, v: Vec::new(), bv: Vec::new() }
    }

    /// Two passes of classical Gram-Schmidt in the B inner product; returns false when `w` is dependent.
    fn push(&mut self, mut w: Vec<f64>) -> Result<bool, SpectralError> {
        let mut bw = self.b.matvec(&w);
        let n0 = dot(&w, &bw);
        if !(n0 > 0.0) {
            if w.iter().all(|x| *x == 0.0) {
                return Ok(false);
            }
            return Err(SpectralError::MassNotPD);
        }
        for _ in 0..2 {
            let coef: Vec<f64> = self.bv.iter().map(|bvj| dot(bvj, &w)).collect();
            for (j, c) in coef.iter().enumerate() {
                axpy(&mut w, -c, &self.v[j]);
            }
        }
        bw = self.b.matvec(&w);
        let n1 = dot(&w, &bw);
        if !(n1 > 1e-20 * n0) {
            return Ok(false);
        }
        let s = 1.0 / n1.sqrt();
        w.iter_mut().for_each(|x| *x *= s);
        bw.iter_mut().for_each(|x| *x *= s);
        self.v.push(w);
        self.bv.push(bw);
        Ok(true)
    }
}

/// Factorises `A` and calls [`lowest_eigenpairs_factored`].
pub fn lowest_eigenpairs(a: &CsrMatrix, b: &CsrMatrix, m: usize, opts: &SolverOptions) -> Result<Spectrum, SpectralError> {
    let factor = EnvelopeCholesky::factor(a)?;
    lowest_eigenpairs_factored(a, &factor, b, m, opts)
}

/// `m` smallest eigenpairs of `A v = lambda B v` by restarted block Krylov iteration on `A^{-1} B`.
///
/// Each cycle builds `[X, TX, T^2 X, ...]` with `T = A^{-1} B`, B-orthonormalises it,
/// and restarts from the lowest Ritz vectors of `A` on that space. The residual
/// reported for a pair is `||x - theta T x||_B` for B-normalised `x`, i.e.
/// `||A^{-1}(A x - theta B x)||_B`, which bounds the relative eigenvalue error.
pub fn lowest_eigenpairs_factored(
    a: &CsrMatrix,
    factor: &EnvelopeCholesky,
    b: &CsrMatrix,
    m: usize,
    opts: &SolverOptions,
) -> Result<Spectrum, SpectralError> {
    let n = a.n();
    if m == 0 || m > n || b.n() != n {
        return Err(SpectralError::TooManyPairs { m, n });
    }
    let p = opts.block.unwrap_or((m + 2).max(4)).max(m).min(n);
    let steps = (opts.basis / p).max(2);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x: Vec<Vec<f64>> = opts.initial.iter().take(p).cloned().collect();
    while x.len() < p {
        x.push((0..n).map(|_| StandardNormal.sample(&mut rng)).collect());
    }
    let mut best: Option<(f64, Vec<EigenPair>)> = None;
    for _cycle in 0..opts.max_cycles.max(1) {
        let mut basis = Basis::new(b);
        let mut block = Vec::new();
        for col in x.drain(..) {
            if basis.push(col)? {
                block.push(basis.v.len() - 1);
            }
        }
        for _ in 1..steps {
            if block.is_empty() || basis.v.len() >= n {
                break;
            }
            let mut next = Vec::new();
            let ws: Vec<Vec<f64>> = block.par_iter().map(|&j| factor.solve(&basis.bv[j])).collect();
            for w in ws {
                if basis.push(w)? {
                    next.push(basis.v.len() - 1);
                }
            }
            block = next;
        }
        let k = basis.v.len();
        let av: Vec<Vec<f64>> = basis.v.par_iter().map(|v| a.matvec(v)).collect();
        let mut g = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            for j in i..k {
                let s = dot(&basis.v[i], &av[j]);
                g[(i, j)] = s;
                g[(j, i)] = s;
            }
        }
        let eig = SymmetricEigen::new(g);
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let keep = p.min(k);
        let mut ritz = Vec::with_capacity(keep);
        for &c in order.iter().take(keep) {
            let mut y = vec![0.0; n];
            for i in 0..k {
                axpy(&mut y, eig.eigenvectors[(i, c)], &basis.v[i]);
            }
            ritz.push((eig.eigenvalues[c], y));
        }
        let mut pairs = Vec::with_capacity(m);
        let mut worst = 0.0f64;
        for (theta, y) in ritz.iter().take(m.min(keep)) {
            let by = b.matvec(y);
            let ny = dot(y, &by).sqrt();
            let ty = factor.solve(&by);
            let mut r = y.clone();
            axpy(&mut r, -theta, &ty);
            let res = (b.quadratic(&r)).max(0.0).sqrt() / ny;
            worst = worst.max(res);
            let v: Vec<f64> = y.iter().map(|t| t / ny).collect();
            pairs.push(EigenPair { value: *theta, vector: v, residual: res });
        }
        // a basis spanning the whole space gives exact Ritz pairs
        let exhausted = k == n;
        if pairs.len() == m && (worst <= opts.tol || exhausted) {
            return Ok(Spectrum { pairs, mass: Arc::new(b.clone()), m, converged: true });
        }
        if best.as_ref().is_none_or(|(w, _)| *w > worst) {
            best = Some((worst, pairs));
        }
        x = ritz.into_iter().map(|(_, y)| y).collect();
        if exhausted {
            break;
        }
    }
    let (achieved, pairs) = best.expect("at least one cycle runs");
    if pairs.len() < m {
        return Err(SpectralError::TooManyPairs { m, n });
    }
    let spectrum = Spectrum { pairs, mass: Arc::new(b.clone()), m, converged: false };
    Err(SpectralError::NoConvergence { spectrum: Box::new(spectrum), achieved })
}
