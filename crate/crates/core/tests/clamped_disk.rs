use platelab::assembly::{assemble_q, FormMatrix};
use platelab::finsler::CoefficientField;
use platelab::geometry::{build_grid, computational_domain, AnalyticDomain};
use platelab::spectral::{lowest_eigenpairs, SolverOptions};

/// Power series for J_n and I_n; converges fast for the arguments used here.
fn bessel(n: u32, x: f64, modified: bool) -> f64 {
    let half = 0.5 * x;
    let mut term = half.powi(n as i32) / (1..=n).map(|k| k as f64).product::<f64>();
    let mut sum = term;
    for k in 1..80 {
        let f = half * half / (k as f64 * (k + n) as f64);
        term *= if modified { f } else { -f };
        sum += term;
    }
    sum
}

/// Roots of J_n(k) I_{n+1}(k) + I_n(k) J_{n+1}(k) by scan and bisection.
fn clamped_roots(n: u32, count: usize) -> Vec<f64> {
    let f = |k: f64| bessel(n, k, false) * bessel(n + 1, k, true) + bessel(n, k, true) * bessel(n + 1, k, false);
    let mut out = Vec::new();
    let mut a = 0.5;
    while out.len() < count {
        let b = a + 0.01;
        if f(a) * f(b) < 0.0 {
            let (mut lo, mut hi) = (a, b);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if f(lo) * f(mid) <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            out.push(0.5 * (lo + hi));
        }
        a = b;
    }
    out
}

#[test]
fn first_clamped_root() {
    let k = clamped_roots(0, 1)[0];
    assert!((k - 3.196_220_616_582_541_8).abs() < 1e-10, "{k}");
    assert!((k.powi(4) - 104.363_105_558_844_4).abs() < 1e-7);
}

#[test]
fn unit_disk_first_three_values() {
    let exact0 = clamped_roots(0, 1)[0].powi(4);
    let exact1 = clamped_roots(1, 1)[0].powi(4);
    let h = 1.0 / 64.0;
    let omega = AnalyticDomain::disk(1.0);
    let comp = computational_domain(&omega, h, 0.5).unwrap();
    let (grid, mask) = build_grid(&comp, h).unwrap();
    let q = assemble_q(&grid, &mask, &CoefficientField::bilaplacian()).unwrap();
    let b = FormMatrix::l2_mass(&mask, h);
    let s = lowest_eigenpairs(&q.matrix, &b.matrix, 3, &SolverOptions::default()).unwrap();
    let v = s.values();
    eprintln!("{v:?} exact {exact0} {exact1}");
    assert!((v[0] / exact0 - 1.0).abs() < 0.02);
    assert!((v[1] / exact1 - 1.0).abs() < 0.02);
    assert!((v[2] / exact1 - 1.0).abs() < 0.02);
}
