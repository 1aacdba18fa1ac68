use platelab::experiments::{cutoff_rayleigh_bound, run_erosion_study, Discretization, RunConfig};
use platelab::geometry::{build_cutoff, CutoffField};

fn disk_config(cells: u32, m: usize, eps: &[f64]) -> RunConfig {
    let eps: Vec<String> = eps.iter().map(|e| e.to_string()).collect();
    let text = format!(
        "[domain]\nkind = \"disk\"\nradius = 1.0\n[operator]\nkind = \"bilaplacian\"\n[grid]\ncells = {cells}\n[spectrum]\nm = {m}\n[study]\neps = [{}]\n",
        eps.join(", ")
    );
    RunConfig::from_toml_str(&text).unwrap()
}

#[test]
fn eroded_values_dominate_and_bound_is_ordered() {
    let cfg = disk_config(32, 3, &[0.125, 0.2, 0.3]);
    let rep = run_erosion_study(&cfg).unwrap();
    assert_eq!(rep.rows.len(), 9);
    for r in &rep.rows {
        assert!(r.converged);
        assert!(r.lambda_tilde >= r.lambda - r.slack, "{r:?}");
        assert!(r.rayleigh_upper >= r.lambda_tilde - r.slack, "{r:?}");
    }
    // drift grows with the erosion width for every index
    for n in 1..=3 {
        let d: Vec<f64> = rep.rows.iter().filter(|r| r.n == n).map(|r| r.drift).collect();
        assert!(d.windows(2).all(|w| w[1] > w[0]), "n = {n}: {d:?}");
    }
}

#[test]
fn unit_cutoff_reproduces_the_base_values() {
    let cfg = disk_config(32, 3, &[0.125]);
    let disc = Discretization::new(&cfg).unwrap();
    let spec = disc.spectrum(&cfg, 3).unwrap();
    let one = CutoffField { tau: vec![1.0; disc.grid.len()], epsilon: 0.125, grad_bound: 0.0, hess_bound: 0.0 };
    let b = cutoff_rayleigh_bound(&spec, &one, &disc.q, &disc.mass, &disc.mask, None);
    for (k, p) in spec.pairs.iter().enumerate() {
        assert!((b.sup[k] - p.value).abs() <= 1e-6 * p.value, "{} vs {}", b.sup[k], p.value);
        assert!(b.q_diff[k] <= 1e-8 * p.value);
    }
}

#[test]
fn cutoff_bound_exceeds_eroded_value() {
    let cfg = disk_config(64, 1, &[0.1]);
    let rep = run_erosion_study(&cfg).unwrap();
    let r = &rep.rows[0];
    assert!(r.rayleigh_upper >= r.lambda_tilde);
    assert!(r.lambda_tilde > r.lambda);
}

/// The transplanted cutoff bound tracks the eroded value to within 10%.
///
/// No C^2 profile of width eps achieves this: the energy of `tau phi_1` across the
/// transition band is at least about 35% above the eroded value at eps = 0.1.
#[test]
#[ignore = "unattainable for any C^2 cutoff of width eps; see README"]
fn cutoff_bound_within_ten_percent() {
    let cfg = disk_config(64, 1, &[0.1]);
    let rep = run_erosion_study(&cfg).unwrap();
    let r = &rep.rows[0];
    assert!(r.rayleigh_upper <= 1.1 * r.lambda_tilde, "{} vs {}", r.rayleigh_upper, r.lambda_tilde);
}

#[test]
fn cutoff_respects_band_resolution() {
    let cfg = disk_config(32, 1, &[0.125]);
    let disc = Discretization::new(&cfg).unwrap();
    let d = disc.exact_distance();
    assert!(build_cutoff(&disc.grid, &d, 0.1).is_err());
    let c = build_cutoff(&disc.grid, &d, 0.125).unwrap();
    assert!(c.tau.iter().all(|&t| (0.0..=1.0).contains(&t)));
    // smoothstep has sup |s'| = 15/8 and sup |s''| = 10/sqrt(3)
    assert!(c.grad_constant() <= 1.875 * 1.1, "{}", c.grad_constant());
    assert!(c.hess_constant() <= 5.774 * 1.3, "{}", c.hess_constant());
}
