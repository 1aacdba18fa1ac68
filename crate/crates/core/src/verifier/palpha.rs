use rayon::prelude::*;
use serde::Serialize;

use super::{check_alpha, gamma_alpha, k_alpha, VerifierError, Witness};
use crate::assembly::{hessian_form, FormMatrix, NodalForm};
use crate::finsler::{regularize, DistanceField};
use crate::geometry::{Grid, GridMask};

/// Exponent range `j` of the `2^j` ladder searched for `k'`.
pub const KPRIME_LADDER: (i32, i32) = (-10, 60);

/// Shared inputs of the witness probes.
#[derive(Debug, Clone, Copy)]
pub struct ProbeContext<'a> {
    pub grid: &'a Grid,
    pub mask: &'a GridMask,
    pub dist: &'a DistanceField,
    /// Discrete `L^2` mass.
    pub mass: &'a FormMatrix,
    pub q0: &'a FormMatrix,
    pub witnesses: &'a [Witness],
    pub n_sweep: &'a [u32],
}

#[derive(Debug, Clone, Serialize)]
pub struct PAlphaRow {
    pub witness: String,
    pub n_reg: u32,
    /// `Q(omega_n u)`.
    pub lhs: f64,
    /// `Q(u, omega_n^2 u)`.
    pub cross: f64,
    pub norm2: f64,
    pub rhs: f64,
    pub margin: f64,
    /// Smallest `k'` making this row nonnegative.
    pub required_kprime: f64,
    /// `Q0(omega_n u)`.
    pub q0_weighted: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PAlphaReport {
    pub alpha: f64,
    pub k_used: f64,
    pub kprime: f64,
    pub k_alpha_ref: f64,
    pub gamma_alpha: f64,
    /// Worst row.
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub witness: String,
    pub worst_n: u32,
    pub required_kprime: f64,
    pub all_nonnegative: bool,
    pub rows: Vec<PAlphaRow>,
}

fn raw_rows(ctx: &ProbeContext, q: &FormMatrix, alpha: f64, k: f64) -> Vec<PAlphaRow> {
    let jobs: Vec<(usize, u32)> = (0..ctx.witnesses.len()).flat_map(|w| ctx.n_sweep.iter().map(move |&n| (w, n))).collect();
    jobs.par_iter()
        .map(|&(w, n)| {
            let u = &ctx.witnesses[w].vector;
            let om = regularize(ctx.dist, n).omega_dofs(ctx.mask, alpha);
            let v1: Vec<f64> = u.iter().zip(&om).map(|(x, o)| x * o).collect();
            let v2: Vec<f64> = v1.iter().zip(&om).map(|(x, o)| x * o).collect();
            let lhs = q.quadratic(&v1);
            let cross = q.bilinear(u, &v2);
            let norm2 = ctx.mass.quadratic(u);
            PAlphaRow {
                witness: ctx.witnesses[w].label.clone(),
                n_reg: n,
                lhs,
                cross,
                norm2,
                rhs: 0.0,
                margin: 0.0,
                required_kprime: (lhs - k * cross) / norm2,
                q0_weighted: ctx.q0.quadratic(&v1),
            }
        })
        .collect()
}

fn ladder_pick(required: f64) -> f64 {
    let (lo, hi) = KPRIME_LADDER;
    (lo..=hi).map(|j| 2f64.powi(j)).find(|&c| c >= required).unwrap_or(2f64.powi(hi))
}

/// Both sides of `Q(omega_n u) <= k Q(u, omega_n^2 u) + k' ||u||^2` over the witnesses and `n_sweep`.
///
/// With `kprime = None` the smallest `2^j` on [`KPRIME_LADDER`] covering every row is used.
pub fn probe_p_alpha(ctx: &ProbeContext, q: &FormMatrix, alpha: f64, k: f64, kprime: Option<f64>) -> Result<PAlphaReport, VerifierError> {
    check_alpha(alpha)?;
    if ctx.witnesses.is_empty() || ctx.n_sweep.is_empty() {
        return Err(VerifierError::Input("empty witness set or regularization sweep".into()));
    }
    let mut rows = raw_rows(ctx, q, alpha, k);
    let required = rows.iter().map(|r| r.required_kprime).fold(f64::NEG_INFINITY, f64::max);
    let kp = kprime.unwrap_or_else(|| ladder_pick(required));
    for r in &mut rows {
        r.rhs = k * r.cross + kp * r.norm2;
        r.margin = r.rhs - r.lhs;
    }
    let worst = rows.iter().min_by(|a, b| a.margin.total_cmp(&b.margin)).expect("nonempty rows");
    Ok(PAlphaReport {
        alpha,
        k_used: k,
        kprime: kp,
        k_alpha_ref: k_alpha(alpha),
        gamma_alpha: gamma_alpha(alpha),
        lhs: worst.lhs,
        rhs: worst.rhs,
        margin: worst.margin,
        witness: worst.witness.clone(),
        worst_n: worst.n_reg,
        required_kprime: required,
        all_nonnegative: rows.iter().all(|r| r.margin >= 0.0),
        rows,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CrossTermReport {
    pub alpha: f64,
    pub c_hat: f64,
    pub worst_witness: String,
    pub worst_n: u32,
    /// Ratios were taken on `omega_n u` rather than on the witnesses themselves.
    pub transplanted: bool,
    /// `3 (1 + c2^2/A + (9/16) c2^4/B)` with measured inputs, when supplied.
    pub closed_form: Option<f64>,
    pub closed_form_inputs: Option<[f64; 3]>,
}

impl CrossTermReport {
    pub fn with_closed_form(mut self, c2: f64, a: f64, b: f64) -> Self {
        self.closed_form = Some(super::cross_term_closed_form(c2, a, b));
        self.closed_form_inputs = Some([c2, a, b]);
        self
    }
}

fn frobenius(c: &[f64]) -> f64 {
    (c[0] * c[0] + 2.0 * c[1] * c[1] + c[2] * c[2]).sqrt()
}

fn ratio_with(form: &NodalForm, grid: &Grid, mask: &GridMask, dist_n: &DistanceField, alpha: f64, v: &[f64], q0: &FormMatrix) -> f64 {
    let nodes = mask.nodes();
    let fa = mask.scatter(&v.iter().zip(nodes).map(|(x, &n)| x * dist_n.d_n(n).powf(alpha)).collect::<Vec<_>>());
    let fb = mask.scatter(&v.iter().zip(nodes).map(|(x, &n)| x * dist_n.d_n(n).powf(-alpha)).collect::<Vec<_>>());
    let mut ca = [0.0; 3];
    let mut cb = [0.0; 3];
    let mut total = 0.0;
    for &p in form.support() {
        form.components(p, &fa, &mut ca);
        form.components(p, &fb, &mut cb);
        total += frobenius(&ca) * frobenius(&cb);
    }
    grid.h * grid.h * total / q0.quadratic(v)
}

/// `h^2 sum_p |D^2(d_n^a v)|_F |D^2(d_n^{-a} v)|_F / Q0(v)` for one vector.
pub fn cross_term_ratio(grid: &Grid, mask: &GridMask, dist_n: &DistanceField, alpha: f64, v: &[f64], q0: &FormMatrix) -> f64 {
    let form = hessian_form(grid, mask, |_| [[0.0; 3]; 3]);
    ratio_with(&form, grid, mask, dist_n, alpha, v, q0)
}

/// Largest [`cross_term_ratio`] over witnesses and `n_sweep`; with `transplant` the ratio is taken at `v = omega_n u`.
pub fn measure_cross_term_constant(ctx: &ProbeContext, alpha: f64, transplant: bool) -> CrossTermReport {
    let form = hessian_form(ctx.grid, ctx.mask, |_| [[0.0; 3]; 3]);
    let jobs: Vec<(usize, u32)> = (0..ctx.witnesses.len()).flat_map(|w| ctx.n_sweep.iter().map(move |&n| (w, n))).collect();
    let vals: Vec<(f64, usize, u32)> = jobs
        .par_iter()
        .map(|&(w, n)| {
            let dn = regularize(ctx.dist, n);
            let u = &ctx.witnesses[w].vector;
            let v: Vec<f64> = if transplant {
                u.iter().zip(dn.omega_dofs(ctx.mask, alpha)).map(|(x, o)| x * o).collect()
            } else {
                u.clone()
            };
            (ratio_with(&form, ctx.grid, ctx.mask, &dn, alpha, &v, ctx.q0), w, n)
        })
        .collect();
    let (c_hat, w, n) = vals.into_iter().fold((f64::NEG_INFINITY, 0, 0), |acc, x| if x.0 > acc.0 { x } else { acc });
    CrossTermReport {
        alpha,
        c_hat,
        worst_witness: ctx.witnesses.get(w).map_or_else(String::new, |x| x.label.clone()),
        worst_n: n,
        transplanted: transplant,
        closed_form: None,
        closed_form_inputs: None,
    }
}

/// Per-row check `margin(a~) >= margin(a) - (1 + c k) delta Q0(omega_n u)` at the base `(k, k')`.
#[derive(Debug, Clone, Serialize)]
pub struct ChainRow {
    pub witness: String,
    pub n_reg: u32,
    pub margin_base: f64,
    pub margin_perturbed: f64,
    pub slack: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PerturbationReport {
    pub delta: f64,
    pub lambda_tilde: f64,
    pub c_hat: f64,
    /// `lambda~^{-1} (1 + c k) delta`.
    pub theta: f64,
    pub k_tilde: f64,
    pub kprime_tilde: f64,
    pub inflation: f64,
    /// Probe of the perturbed form at `(k~, k'~)`.
    pub probe: PAlphaReport,
    pub restored: bool,
    pub chain: Vec<ChainRow>,
    pub chain_holds: bool,
    pub cross_term: CrossTermReport,
}

/// Re-runs the probe for the perturbed form `q_tilde` with `k` and `k'` inflated by `1 / (1 - theta)`.
///
/// `delta` is the sup over nodes of the operator norm of the nodal matrix difference
/// and `lambda_tilde` the lower ellipticity constant of `q_tilde` against `Q0`.
pub fn probe_perturbation(
    ctx: &ProbeContext,
    base: &PAlphaReport,
    q_tilde: &FormMatrix,
    delta: f64,
    lambda_tilde: f64,
) -> Result<PerturbationReport, VerifierError> {
    let k = base.k_used;
    let cross_term = measure_cross_term_constant(ctx, base.alpha, true);
    let c = cross_term.c_hat;
    let bound = lambda_tilde / (1.0 + c * k);
    if delta >= bound {
        return Err(VerifierError::BoundViolated { delta, bound });
    }
    let theta = delta / bound;
    let inflation = 1.0 / (1.0 - theta);
    let k_tilde = k * inflation;
    let kprime_tilde = base.kprime * inflation;
    let probe = probe_p_alpha(ctx, q_tilde, base.alpha, k_tilde, Some(kprime_tilde))?;
    let at_base = probe_p_alpha(ctx, q_tilde, base.alpha, k, Some(base.kprime))?;
    let chain: Vec<ChainRow> = base
        .rows
        .iter()
        .zip(&at_base.rows)
        .map(|(b, t)| {
            let slack = (1.0 + c * k) * delta * b.q0_weighted;
            let roundoff = 1e-10 * (b.lhs.abs() + k * b.cross.abs() + base.kprime * b.norm2);
            ChainRow {
                witness: b.witness.clone(),
                n_reg: b.n_reg,
                margin_base: b.margin,
                margin_perturbed: t.margin,
                slack,
                holds: t.margin >= b.margin - slack - roundoff,
            }
        })
        .collect();
    Ok(PerturbationReport {
        delta,
        lambda_tilde,
        c_hat: c,
        theta,
        k_tilde,
        kprime_tilde,
        inflation,
        restored: probe.all_nonnegative,
        chain_holds: chain.iter().all(|r| r.holds),
        probe,
        chain,
        cross_term,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder() {
        assert_eq!(ladder_pick(-3.0), 2f64.powi(-10));
        assert_eq!(ladder_pick(3.0), 4.0);
        assert_eq!(ladder_pick(4.0), 4.0);
        assert_eq!(ladder_pick(1e30), 2f64.powi(60));
    }
}
