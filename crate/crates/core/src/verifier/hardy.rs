use serde::Serialize;

use super::VerifierError;
use crate::assembly::{assemble_dirichlet, assemble_q0, assemble_weighted, FormMatrix, WeightOrder};
use crate::finsler::{regularize, DistanceField};
use crate::geometry::{Grid, GridMask};
use crate::sparse::EnvelopeCholesky;
use crate::spectral::{lowest_eigenpairs_factored, SolverOptions, SpectralError, Spectrum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HardyKind {
    /// `int |grad v|^2` against `int v^2 / d^2`.
    HardyGrad,
    /// `int (Delta v)^2` against `int v^2 / d^4`.
    RellichMass,
    /// `int (Delta v)^2` against `int |grad v|^2 / d^2`.
    RellichGrad,
}

impl HardyKind {
    pub const ALL: [HardyKind; 3] = [HardyKind::HardyGrad, HardyKind::RellichMass, HardyKind::RellichGrad];

    pub fn weight(self) -> (WeightOrder, f64) {
        match self {
            HardyKind::HardyGrad => (WeightOrder::Mass, 2.0),
            HardyKind::RellichMass => (WeightOrder::Mass, 4.0),
            HardyKind::RellichGrad => (WeightOrder::Grad, 2.0),
        }
    }

    /// Left-hand form.
    pub fn form(self, grid: &Grid, mask: &GridMask) -> FormMatrix {
        match self {
            HardyKind::HardyGrad => assemble_dirichlet(grid, mask),
            _ => assemble_q0(grid, mask),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            HardyKind::HardyGrad => "hardy_grad",
            HardyKind::RellichMass => "rellich_mass",
            HardyKind::RellichGrad => "rellich_grad",
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct HardyRow {
    pub n_reg: u32,
    pub constant_hat: f64,
    pub residual: f64,
    pub converged: bool,
}

/// Constant of the shifted pencil `(A + c_shift M, W_n)` at the largest `n`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WeakPair {
    pub constant: f64,
    pub c_shift: f64,
    /// Relative change between the top two `n`.
    pub increment: f64,
    pub stable: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct HardyReport {
    pub kind: HardyKind,
    pub h: f64,
    pub constant_hat: f64,
    pub n_sweep: Vec<HardyRow>,
    pub weak_pair: Option<WeakPair>,
    /// `constant_hat` nonincreasing along the sweep, up to solver slack.
    pub monotone: bool,
}

#[derive(Debug, Clone)]
pub struct HardyOptions {
    /// Shift ladder, tried in order.
    pub shifts: Vec<f64>,
    /// Relative increment accepted as stable.
    pub stability: f64,
    pub solver: SolverOptions,
    pub weak: bool,
}

impl Default for HardyOptions {
    fn default() -> Self {
        Self {
            shifts: (-2..=4).map(|k| 2f64.powi(k)).collect(),
            stability: 0.05,
            solver: SolverOptions { basis: 48, ..SolverOptions::default() },
            weak: true,
        }
    }
}

fn lowest(a: &FormMatrix, factor: &EnvelopeCholesky, w: &FormMatrix, opts: &SolverOptions) -> Result<(Spectrum, bool), VerifierError> {
    match lowest_eigenpairs_factored(&a.matrix, factor, &w.matrix, 1, opts) {
        Ok(s) => Ok((s, true)),
        Err(SpectralError::NoConvergence { spectrum, .. }) => Ok((*spectrum, false)),
        Err(e) => Err(e.into()),
    }
}

fn sweep(a: &FormMatrix, weights: &[FormMatrix], opts: &SolverOptions) -> Result<Vec<(f64, f64, bool)>, VerifierError> {
    let factor = EnvelopeCholesky::factor(&a.matrix)?;
    let mut o = opts.clone();
    let mut out = Vec::with_capacity(weights.len());
    for w in weights {
        let (s, ok) = lowest(a, &factor, w, &o)?;
        let p = &s.pairs[0];
        out.push((p.value, p.residual, ok));
        o.initial = vec![p.vector.clone()];
    }
    Ok(out)
}

/// Lowest eigenvalue of `(a, W_n)` along `weights` (ordered by increasing `n`) and the weak shift search.
pub fn estimate_hardy_constant(
    kind: HardyKind,
    a: &FormMatrix,
    weights: &[(u32, FormMatrix)],
    mass: &FormMatrix,
    opts: &HardyOptions,
) -> Result<HardyReport, VerifierError> {
    if weights.is_empty() {
        return Err(VerifierError::Input("empty regularization sweep".into()));
    }
    let ws: Vec<FormMatrix> = weights.iter().map(|(_, w)| w.clone()).collect();
    let rows: Vec<HardyRow> = sweep(a, &ws, &opts.solver)?
        .into_iter()
        .zip(weights)
        .map(|((c, r, ok), (n, _))| HardyRow { n_reg: *n, constant_hat: c, residual: r, converged: ok })
        .collect();
    let monotone = rows.windows(2).all(|w| w[1].constant_hat <= w[0].constant_hat * (1.0 + 2.0 * (w[0].residual + w[1].residual)));
    let weak_pair = if opts.weak && ws.len() >= 2 {
        let top = &ws[ws.len() - 2..];
        let mut best: Option<WeakPair> = None;
        for &c in &opts.shifts {
            let shifted = a.add_scaled(mass, c);
            let v = sweep(&shifted, top, &opts.solver)?;
            let increment = (v[0].0 - v[1].0).abs() / v[1].0;
            let cand = WeakPair { constant: v[1].0, c_shift: c, increment, stable: increment <= opts.stability };
            if cand.stable {
                best = Some(cand);
                break;
            }
            if best.is_none_or(|b| cand.increment < b.increment) {
                best = Some(cand);
            }
        }
        best
    } else {
        None
    };
    Ok(HardyReport {
        kind,
        h: a.h,
        constant_hat: rows.last().map_or(f64::NAN, |r| r.constant_hat),
        n_sweep: rows,
        weak_pair,
        monotone,
    })
}

/// Builds the forms for `kind` on the mask and runs [`estimate_hardy_constant`].
pub fn hardy_report(
    kind: HardyKind,
    grid: &Grid,
    mask: &GridMask,
    dist: &DistanceField,
    n_sweep: &[u32],
    opts: &HardyOptions,
) -> Result<HardyReport, VerifierError> {
    let a = kind.form(grid, mask);
    let (order, power) = kind.weight();
    let weights: Vec<(u32, FormMatrix)> =
        n_sweep.iter().map(|&n| (n, assemble_weighted(grid, mask, &regularize(dist, n), order, power))).collect();
    let mass = FormMatrix::l2_mass(mask, grid.h);
    estimate_hardy_constant(kind, &a, &weights, &mass, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finsler::Metric;
    use crate::geometry::{build_grid, AnalyticDomain};
    use crate::spectral::lowest_eigenpairs;

    #[test]
    fn constant_weight_scales_lowest_value() {
        let (g, m) = build_grid(&AnalyticDomain::disk(1.0), 1.0 / 16.0).unwrap();
        // d = 0 everywhere, so d_n = 1/n and W_n = n^2 h^2 I
        let dist = DistanceField::from_values(Metric::Euclidean, vec![0.0; g.len()], 1);
        let opts = HardyOptions { weak: false, ..Default::default() };
        let r = hardy_report(HardyKind::HardyGrad, &g, &m, &dist, &[2, 4], &opts).unwrap();
        let a = assemble_dirichlet(&g, &m);
        let lam = lowest_eigenpairs(&a.matrix, &FormMatrix::l2_mass(&m, g.h).matrix, 1, &SolverOptions::default()).unwrap().pairs[0].value;
        assert!((r.n_sweep[0].constant_hat - lam / 4.0).abs() < 1e-7 * lam);
        assert!((r.n_sweep[1].constant_hat - lam / 16.0).abs() < 1e-7 * lam);
        assert!(r.monotone);
    }
}
