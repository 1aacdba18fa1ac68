use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use super::{Discretization, ExperimentError, RunConfig};
use crate::assembly::FormMatrix;
use crate::finsler::discrete_hessian_norm;
use crate::geometry::{build_cutoff, CutoffField, GridMask, Shape};
use crate::spectral::{lowest_eigenpairs, SolverOptions, SpectralError, Spectrum};

#[derive(Debug, Clone, Serialize)]
pub struct StabilityRow {
    pub n: usize,
    pub eps: f64,
    pub lambda: f64,
    pub lambda_tilde: f64,
    pub drift: f64,
    pub residual: f64,
    pub residual_tilde: f64,
    /// `2 (residual + residual_tilde) lambda`.
    pub slack: f64,
    pub rayleigh_upper: f64,
    /// `|lambda~ / lambda - (1 - eps/R)^{-4}|`, disks only.
    pub ball_law_error: Option<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExponentFit {
    pub n: usize,
    /// Least-squares slope of `log drift` against `log eps`.
    pub exponent: f64,
    /// Same fit without the largest eps.
    pub exponent_without_largest: f64,
    pub eps_used: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EnvelopeRow {
    pub eps: f64,
    /// `|Q(tau phi_1) - Q(phi_1)|`.
    pub q_diff: f64,
    /// `q_diff / (eps^{2 alpha} lambda_1^{5/4})`.
    pub c_hat: f64,
}

/// Largest `|hess d|` on the transition band `eps < d < 2 eps`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BandRow {
    pub eps: f64,
    pub nodes: usize,
    pub max_hessian: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub h: f64,
    pub dofs: usize,
    pub rows: Vec<StabilityRow>,
    pub fits: Vec<ExponentFit>,
    pub envelope_alpha: f64,
    pub envelope: Vec<EnvelopeRow>,
    /// Largest eps up to which every envelope constant stays within 25% of their mean.
    pub envelope_stable_up_to: Option<f64>,
    pub band: Vec<BandRow>,
}

/// Rayleigh quotients of the transplanted eigenvectors `tau phi_j`.
#[derive(Debug, Clone, Serialize)]
pub struct RayleighBounds {
    /// `Q(tau phi_j) / ||tau phi_j||^2`.
    pub per_vector: Vec<f64>,
    /// Largest Ritz value of `(Q, mass)` on `span{tau phi_1..tau phi_n}`, `n = 1..m`.
    pub sup: Vec<f64>,
    /// `|Q(tau phi_j) - Q(phi_j)|`.
    pub q_diff: Vec<f64>,
}

/// Min-max upper bounds from `tau phi_j`, with `tau` zeroed off the dofs in `keep` when given.
///
/// `q` and `mass` live on the mask of `spec`.
pub fn cutoff_rayleigh_bound(
    spec: &Spectrum,
    cutoff: &CutoffField,
    q: &FormMatrix,
    mass: &FormMatrix,
    mask: &GridMask,
    keep: Option<&[usize]>,
) -> RayleighBounds {
    let n = mask.count();
    let mut tau: Vec<f64> = mask.nodes().iter().map(|&node| cutoff.tau[node]).collect();
    if let Some(keep) = keep {
        let mut inside = vec![false; n];
        keep.iter().for_each(|&k| inside[k] = true);
        tau.iter_mut().zip(&inside).for_each(|(t, &i)| if !i { *t = 0.0 });
    }
    let w: Vec<Vec<f64>> = spec.pairs.iter().map(|p| p.vector.iter().zip(&tau).map(|(v, t)| v * t).collect()).collect();
    let m = w.len();
    let qw: Vec<Vec<f64>> = w.iter().map(|x| q.matrix.matvec(x)).collect();
    let bw: Vec<Vec<f64>> = w.iter().map(|x| mass.matrix.matvec(x)).collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let ga = DMatrix::from_fn(m, m, |i, j| dot(&w[i], &qw[j]));
    let gb = DMatrix::from_fn(m, m, |i, j| dot(&w[i], &bw[j]));
    let per_vector = (0..m).map(|j| ga[(j, j)] / gb[(j, j)]).collect();
    let q_diff = (0..m).map(|j| (ga[(j, j)] - q.quadratic(&spec.pairs[j].vector)).abs()).collect();
    let sup = (1..=m)
        .map(|k| {
            let a = ga.view((0, 0), (k, k)).into_owned();
            let b = gb.view((0, 0), (k, k)).into_owned();
            match b.cholesky() {
                Some(ch) => {
                    let l = ch.l();
                    let li = l.clone().try_inverse().expect("triangular factor of a positive matrix");
                    let c = &li * a * li.transpose();
                    let c = (&c + c.transpose()) * 0.5;
                    c.symmetric_eigenvalues().iter().copied().fold(f64::NEG_INFINITY, f64::max)
                }
                None => f64::INFINITY,
            }
        })
        .collect();
    RayleighBounds { per_vector, sup, q_diff }
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

struct EpsOutcome {
    rows: Vec<StabilityRow>,
    envelope: EnvelopeRow,
    band: BandRow,
}

fn run_eps(cfg: &RunConfig, disc: &Discretization, base: &Spectrum, eps: f64) -> Result<EpsOutcome, ExperimentError> {
    let eroded_domain = disc.computational.erode(eps)?;
    let eroded = GridMask::from_domain(&disc.grid, &eroded_domain);
    let keep = eroded.dofs_in(&disc.mask).expect("eroded mask lies inside the computational mask");
    let m = base.pairs.len().min(keep.len());
    let qe = disc.q.restrict(&keep);
    let be = disc.mass.restrict(&keep);
    let opts = SolverOptions {
        initial: base.pairs.iter().map(|p| keep.iter().map(|&k| p.vector[k]).collect()).collect(),
        ..cfg.solver.clone()
    };
    let (tilde, converged) = match lowest_eigenpairs(&qe.matrix, &be.matrix, m, &opts) {
        Ok(s) => (s, true),
        Err(SpectralError::NoConvergence { spectrum, .. }) => (*spectrum, false),
        Err(e) => return Err(e.into()),
    };

    let dist = disc.exact_distance();
    let cutoff = build_cutoff(&disc.grid, &dist, eps)?;
    let bounds = cutoff_rayleigh_bound(base, &cutoff, &disc.q, &disc.mass, &disc.mask, Some(&keep));
    let ball = match disc.omega.base_shape() {
        Shape::Disk { radius } => Some((1.0 - eps / radius).powi(-4)),
        _ => None,
    };
    let rows = (0..m)
        .map(|k| {
            let (l, r) = (base.pairs[k].value, base.pairs[k].residual);
            let (lt, rt) = (tilde.pairs[k].value, tilde.pairs[k].residual);
            StabilityRow {
                n: k + 1,
                eps,
                lambda: l,
                lambda_tilde: lt,
                drift: lt - l,
                residual: r,
                residual_tilde: rt,
                slack: 2.0 * (r + rt) * l,
                rayleigh_upper: bounds.sup[k],
                ball_law_error: ball.map(|b| (lt / l - b).abs()),
                converged: converged && base.converged,
            }
        })
        .collect();

    let l1 = base.pairs[0].value;
    let q_diff = bounds.q_diff[0];
    let envelope = EnvelopeRow { eps, q_diff, c_hat: q_diff / (eps.powf(2.0 * cfg.envelope_alpha) * l1.powf(1.25)) };

    let mut band = BandRow { eps, nodes: 0, max_hessian: 0.0 };
    for &node in disc.mask.nodes() {
        let d = dist.d(node);
        if d > eps && d < 2.0 * eps {
            band.nodes += 1;
            band.max_hessian = band.max_hessian.max(discrete_hessian_norm(dist.values(), &disc.grid, node));
        }
    }
    Ok(EpsOutcome { rows, envelope, band })
}

fn envelope_window(rows: &[EnvelopeRow]) -> Option<f64> {
    let mut best = None;
    for k in 2..=rows.len() {
        let c: Vec<f64> = rows[..k].iter().map(|r| r.c_hat).collect();
        let mean = c.iter().sum::<f64>() / k as f64;
        if c.iter().all(|&x| (x - mean).abs() <= 0.25 * mean) {
            best = Some(rows[k - 1].eps);
        } else {
            break;
        }
    }
    best
}

/// Eigenvalue drift under erosion of the computational domain, one row per `(n, eps)`.
pub fn run_erosion_study(cfg: &RunConfig) -> Result<StabilityReport, ExperimentError> {
    let disc = Discretization::new(cfg)?;
    let base = disc.spectrum(cfg, cfg.m)?;
    let mut eps = cfg.eps.clone();
    eps.sort_by(f64::total_cmp);
    eps.dedup();
    let outcomes: Vec<EpsOutcome> = eps.par_iter().map(|&e| run_eps(cfg, &disc, &base, e)).collect::<Result<_, _>>()?;

    let mut rows: Vec<StabilityRow> = outcomes.iter().flat_map(|o| o.rows.iter().cloned()).collect();
    rows.sort_by(|a, b| a.n.cmp(&b.n).then(a.eps.total_cmp(&b.eps)));
    let m = rows.iter().map(|r| r.n).max().unwrap_or(0);
    let fits = (1..=m)
        .filter_map(|n| {
            let pts: Vec<&StabilityRow> =
                rows.iter().filter(|r| r.n == n && r.converged && r.drift > 10.0 * 0.5 * r.slack && r.drift > 0.0).collect();
            if pts.len() < 2 {
                return None;
            }
            let xs: Vec<f64> = pts.iter().map(|r| r.eps.ln()).collect();
            let ys: Vec<f64> = pts.iter().map(|r| r.drift.ln()).collect();
            let exponent = slope(&xs, &ys);
            let exponent_without_largest = if pts.len() >= 3 { slope(&xs[..xs.len() - 1], &ys[..ys.len() - 1]) } else { exponent };
            Some(ExponentFit { n, exponent, exponent_without_largest, eps_used: pts.iter().map(|r| r.eps).collect() })
        })
        .collect();
    let envelope: Vec<EnvelopeRow> = outcomes.iter().map(|o| o.envelope).collect();
    Ok(StabilityReport {
        h: cfg.h,
        dofs: disc.mask.count(),
        rows,
        fits,
        envelope_alpha: cfg.envelope_alpha,
        envelope_stable_up_to: envelope_window(&envelope),
        envelope,
        band: outcomes.iter().map(|o| o.band).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let xs: Vec<f64> = [0.1f64, 0.2, 0.4].iter().map(|x| x.ln()).collect();
        let ys: Vec<f64> = [0.1f64, 0.2, 0.4].iter().map(|x| (3.0 * x * x).ln()).collect();
        assert!((slope(&xs, &ys) - 2.0).abs() < 1e-12);
    }
}
