use serde::Serialize;

use super::coeffs::CoefficientField;
use super::distance::{default_n_reg, DistanceField, Metric};
use super::tensor::{eval_quartic, Tensor4};
use super::FinslerError;
use crate::geometry::{AnalyticDomain, Grid, GridMask};

pub const DEFAULT_MAX_SWEEPS: usize = 200;
const BISECTIONS: usize = 60;

/// `(sum a_ijkl xi_i xi_j xi_k xi_l)^{1/4}`.
pub fn dual_metric(coeffs: &CoefficientField, x: [f64; 2], xi: [f64; 2]) -> Result<f64, FinslerError> {
    quartic_root(&coeffs.tensor(x), x, xi)
}

fn quartic_root(t: &Tensor4, x: [f64; 2], xi: [f64; 2]) -> Result<f64, FinslerError> {
    let q = t.quartic(xi);
    if q < 0.0 {
        return Err(FinslerError::NegativeQuartic { x, xi, value: q });
    }
    Ok(q.powf(0.25))
}

#[derive(Debug, Clone, Copy)]
pub struct SweepOptions {
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_sweeps: DEFAULT_MAX_SWEEPS }
    }
}

/// Upwind neighbour along one axis: value and the sign of the one-sided difference.
#[derive(Debug, Clone, Copy)]
struct Upwind {
    value: f64,
    sign: f64,
}

fn upwind(lo: f64, hi: f64) -> Upwind {
    // lo is the neighbour at -h, hi at +h
    if lo <= hi {
        Upwind { value: lo, sign: 1.0 }
    } else {
        Upwind { value: hi, sign: -1.0 }
    }
}

#[inline]
fn upwind_gradient(t: f64, ax: Upwind, ay: Upwind, h: f64) -> (f64, f64) {
    let gx = if ax.value.is_finite() { ax.sign * (t - ax.value).max(0.0) / h } else { 0.0 };
    let gy = if ay.value.is_finite() { ay.sign * (t - ay.value).max(0.0) / h } else { 0.0 };
    (gx, gy)
}

fn local_solve(c: &[f64; 5], ax: Upwind, ay: Upwind, h: f64) -> f64 {
    let lo = ax.value.min(ay.value);
    if !lo.is_finite() {
        return f64::INFINITY;
    }
    let f = |t: f64| {
        let (gx, gy) = upwind_gradient(t, ax, ay, h);
        eval_quartic(c, gx, gy)
    };
    let axis = if ax.value <= ay.value { c[0] } else { c[4] };
    let mut width = if axis > 0.0 { h / axis.powf(0.25) } else { h };
    let mut hi = lo + width;
    let mut guard = 0;
    while f(hi) < 1.0 && guard < 64 {
        width *= 2.0;
        hi = lo + width;
        guard += 1;
    }
    let mut a = lo;
    let mut b = hi;
    for _ in 0..BISECTIONS {
        let mid = 0.5 * (a + b);
        if f(mid) < 1.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

struct Problem<'a> {
    grid: &'a Grid,
    quartic: Vec<[f64; 5]>,
    values: Vec<f64>,
    fixed: Vec<bool>,
}

impl Problem<'_> {
    fn neighbours(&self, i: usize, j: usize) -> (Upwind, Upwind) {
        let g = self.grid;
        let v = |ii: usize, jj: usize| self.values[g.index(ii, jj)];
        let w = if i > 0 { v(i - 1, j) } else { f64::INFINITY };
        let e = if i + 1 < g.nx { v(i + 1, j) } else { f64::INFINITY };
        let s = if j > 0 { v(i, j - 1) } else { f64::INFINITY };
        let n = if j + 1 < g.ny { v(i, j + 1) } else { f64::INFINITY };
        (upwind(w, e), upwind(s, n))
    }

    fn sweep(&mut self, rev_i: bool, rev_j: bool) -> f64 {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let h = self.grid.h;
        let mut change = 0.0f64;
        for jj in 0..ny {
            let j = if rev_j { ny - 1 - jj } else { jj };
            for ii in 0..nx {
                let i = if rev_i { nx - 1 - ii } else { ii };
                let idx = self.grid.index(i, j);
                if self.fixed[idx] {
                    continue;
                }
                let (ax, ay) = self.neighbours(i, j);
                let t = local_solve(&self.quartic[idx], ax, ay, h);
                let old = self.values[idx];
                if t < old {
                    self.values[idx] = t;
                    change = change.max(if old.is_finite() { old - t } else { f64::INFINITY });
                }
            }
        }
        change
    }
}

/// Distance to the boundary of `domain` in the metric induced by `coeffs`.
pub fn finsler_distance(
    domain: &AnalyticDomain,
    grid: &Grid,
    mask: &GridMask,
    coeffs: &CoefficientField,
    tol: f64,
) -> Result<DistanceField, FinslerError> {
    let frozen = coeffs.freeze(grid);
    let tensors = frozen.tensors;
    solve(domain, grid, mask, Metric::Finsler, &tensors, SweepOptions { tol, ..Default::default() })
}

/// Same solver with `p* = |xi|`.
pub fn euclidean_distance(domain: &AnalyticDomain, grid: &Grid, mask: &GridMask, tol: f64) -> Result<DistanceField, FinslerError> {
    let tensors = vec![Tensor4::bilaplacian(); grid.len()];
    solve(domain, grid, mask, Metric::Euclidean, &tensors, SweepOptions { tol, ..Default::default() })
}

/// Fast sweeping with frozen node tensors.
pub fn solve(
    domain: &AnalyticDomain,
    grid: &Grid,
    mask: &GridMask,
    metric: Metric,
    tensors: &[Tensor4],
    opts: SweepOptions,
) -> Result<DistanceField, FinslerError> {
    assert!(opts.tol > 0.0, "tolerance must be positive");
    let h = grid.h;
    let mut values = vec![f64::INFINITY; grid.len()];
    let mut fixed = vec![false; grid.len()];
    let mut quartic = Vec::with_capacity(grid.len());
    for (idx, t) in tensors.iter().enumerate() {
        let c = t.quartic_coefficients();
        quartic.push(c);
        let p = grid.point(idx);
        let s = domain.sdf(p);
        if s >= 0.0 {
            values[idx] = 0.0;
            fixed[idx] = true;
        } else if s >= -h {
            let nrm = domain.normal(p);
            let pn = quartic_root(t, p, nrm)?;
            values[idx] = -s / pn;
            fixed[idx] = true;
        }
    }
    for &n in mask.nodes() {
        if domain.sdf(grid.point(n)) >= 0.0 {
            return Err(FinslerError::MaskOutsideDomain { node: n });
        }
        // every unknown node needs an admissible metric
        let xi = [1.0, 0.0];
        quartic_root(&tensors[n], grid.point(n), xi)?;
        quartic_root(&tensors[n], grid.point(n), [0.0, 1.0])?;
    }
    let mut prob = Problem { grid, quartic, values, fixed };
    let orders = [(false, false), (true, false), (true, true), (false, true)];
    let mut sweeps = 0;
    let mut last = f64::INFINITY;
    while sweeps < opts.max_sweeps {
        let (ri, rj) = orders[sweeps % 4];
        last = prob.sweep(ri, rj);
        sweeps += 1;
        if last < opts.tol && sweeps >= 4 {
            break;
        }
    }
    if !(last < opts.tol) {
        return Err(FinslerError::NoConvergence { sweeps, last_update: last });
    }
    let values: Vec<f64> = prob.values.into_iter().map(|v| if v.is_finite() { v } else { 0.0 }).collect();
    let mut field = DistanceField::from_values(metric, values, default_n_reg(h));
    field.sweeps = sweeps;
    Ok(field)
}

#[derive(Debug, Clone, Serialize)]
pub struct EikonalResidual {
    /// Nodes farther than `band` from the boundary.
    pub nodes: usize,
    pub fraction_within: f64,
    pub threshold: f64,
    pub max_residual: f64,
}

/// `|p*(x, grad_h d) - 1|` with the solver's upwind gradient, on mask nodes with `-sdf > band`.
pub fn eikonal_residual(
    dist: &DistanceField,
    domain: &AnalyticDomain,
    grid: &Grid,
    mask: &GridMask,
    coeffs: &CoefficientField,
    band: f64,
    threshold: f64,
) -> EikonalResidual {
    let tensors = match dist.metric {
        Metric::Euclidean => vec![Tensor4::bilaplacian(); grid.len()],
        Metric::Finsler => coeffs.freeze(grid).tensors,
    };
    let v = dist.values();
    let mut nodes = 0;
    let mut within = 0;
    let mut max_residual = 0.0f64;
    for &n in mask.nodes() {
        let p = grid.point(n);
        if -domain.sdf(p) <= band {
            continue;
        }
        let (i, j) = grid.coords(n);
        let ax = upwind(v[grid.index(i - 1, j)], v[grid.index(i + 1, j)]);
        let ay = upwind(v[grid.index(i, j - 1)], v[grid.index(i, j + 1)]);
        let (gx, gy) = upwind_gradient(v[n], ax, ay, grid.h);
        let q = eval_quartic(&tensors[n].quartic_coefficients(), gx, gy).max(0.0);
        let r = (q.powf(0.25) - 1.0).abs();
        nodes += 1;
        if r <= threshold {
            within += 1;
        }
        max_residual = max_residual.max(r);
    }
    EikonalResidual {
        nodes,
        fraction_within: if nodes > 0 { within as f64 / nodes as f64 } else { 1.0 },
        threshold,
        max_residual,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SecondDerivativeFit {
    pub theta: f64,
    pub nodes: usize,
    /// Fitted exponent in `|hess d| <= c d^{-1 + tau}`; `None` when the Hessian vanishes on the band.
    pub tau: Option<f64>,
    pub c: Option<f64>,
    pub max_hessian: f64,
}

/// Frobenius norm of the central-difference Hessian of node values.
pub fn discrete_hessian_norm(values: &[f64], grid: &Grid, node: usize) -> f64 {
    let (i, j) = grid.coords(node);
    let h2 = grid.h * grid.h;
    let v = |a: usize, b: usize| values[grid.index(a, b)];
    let c = v(i, j);
    let xx = (v(i + 1, j) - 2.0 * c + v(i - 1, j)) / h2;
    let yy = (v(i, j + 1) - 2.0 * c + v(i, j - 1)) / h2;
    let xy = (v(i + 1, j + 1) - v(i + 1, j - 1) - v(i - 1, j + 1) + v(i - 1, j - 1)) / (4.0 * h2);
    (xx * xx + 2.0 * xy * xy + yy * yy).sqrt()
}

/// Least-squares fit of `log |hess d|` against `log d` over `theta/4 < d < theta`.
pub fn fit_second_derivative(dist: &DistanceField, grid: &Grid, mask: &GridMask, theta: f64) -> SecondDerivativeFit {
    let mut pts = Vec::new();
    let mut max_hessian = 0.0f64;
    let mut nodes = 0;
    for &n in mask.nodes() {
        let d = dist.d(n);
        if !(d > 0.25 * theta && d < theta) {
            continue;
        }
        let (i, j) = grid.coords(n);
        let neighbours_inside = (-1i64..=1).all(|di| {
            (-1i64..=1).all(|dj| {
                let ii = (i as i64 + di) as usize;
                let jj = (j as i64 + dj) as usize;
                mask.contains(grid.index(ii, jj))
            })
        });
        if !neighbours_inside {
            continue;
        }
        nodes += 1;
        let hn = discrete_hessian_norm(dist.values(), grid, n);
        max_hessian = max_hessian.max(hn);
        if hn > 1e-9 {
            pts.push((d.ln(), hn.ln(), d, hn));
        }
    }
    if pts.len() < 2 {
        return SecondDerivativeFit { theta, nodes, tau: None, c: None, max_hessian };
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= 0.0 {
        return SecondDerivativeFit { theta, nodes, tau: None, c: None, max_hessian };
    }
    let slope = sxy / sxx;
    let tau = slope + 1.0;
    let c = pts.iter().map(|p| p.3 * p.2.powf(1.0 - tau)).fold(0.0f64, f64::max);
    SecondDerivativeFit { theta, nodes, tau: Some(tau), c: Some(c), max_hessian }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dual_metric_examples() {
        let b = CoefficientField::bilaplacian();
        assert!((dual_metric(&b, [0.3, 0.1], [3.0, 4.0]).unwrap() - 5.0).abs() < 1e-14);
        let p = CoefficientField::product([[4.0, 0.0], [0.0, 1.0]]);
        assert!((dual_metric(&p, [0.0, 0.0], [1.0, 0.0]).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(dual_metric(&p, [0.0, 0.0], [0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn negative_quartic_is_reported() {
        let f = CoefficientField::diagonal([[-1.0, 0.0], [0.0, 1.0]]);
        assert!(matches!(dual_metric(&f, [0.0, 0.0], [1.0, 0.0]), Err(FinslerError::NegativeQuartic { .. })));
    }

    #[test]
    fn local_solve_one_sided_is_exact() {
        let c = Tensor4::bilaplacian().quartic_coefficients();
        let h = 0.1;
        let t = local_solve(&c, Upwind { value: 0.0, sign: 1.0 }, Upwind { value: f64::INFINITY, sign: 1.0 }, h);
        assert!((t - h).abs() < 1e-14);
        // two equal neighbours: t = a + h / sqrt(2)
        let t = local_solve(&c, Upwind { value: 0.0, sign: 1.0 }, Upwind { value: 0.0, sign: -1.0 }, h);
        assert!((t - h / 2f64.sqrt()).abs() < 1e-14);
    }
}
