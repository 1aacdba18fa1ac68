use std::f64::consts::PI;

use platelab::assembly::{assemble_q, assemble_q0, q0_form, FormMatrix};
use platelab::finsler::CoefficientField;
use platelab::geometry::{build_grid, AnalyticDomain, Grid, GridMask, PAD};

/// Unit square `[0, 1]^2` with nodes on its edges; the mask keeps the strict interior.
fn unit_square(cells: usize) -> (Grid, GridMask) {
    let h = 1.0 / cells as f64;
    let nx = cells + 1 + 2 * PAD;
    let grid = Grid { h, origin: [-(PAD as f64) * h, -(PAD as f64) * h], nx, ny: nx };
    let mask = GridMask::from_predicate(&grid, |n| {
        let p = grid.point(n);
        p.iter().all(|&x| x > 0.5 * h && x < 1.0 - 0.5 * h)
    });
    (grid, mask)
}

#[test]
fn laplacian_of_sine_product_converges() {
    // h^2 sum (Delta_h v)^2 with v = sin(pi x) sin(pi y) tends to int (2 pi^2 v)^2 = pi^4
    let mut errs = Vec::new();
    for cells in [16, 32, 64] {
        let (grid, mask) = unit_square(cells);
        let full: Vec<f64> = (0..grid.len())
            .map(|n| {
                let p = grid.point(n);
                (PI * p[0]).sin() * (PI * p[1]).sin()
            })
            .collect();
        let form = q0_form(&grid, &mask);
        let mut c = [0.0];
        let mut s = 0.0;
        for &n in mask.nodes() {
            form.components(n, &full, &mut c);
            s += c[0] * c[0];
        }
        errs.push((grid.h * grid.h * s / PI.powi(4) - 1.0).abs());
    }
    assert!(errs[2] < 2e-3, "{errs:?}");
    assert!(errs[1] / errs[2] > 3.0, "second-order decay expected: {errs:?}");
}

#[test]
fn zero_extended_clamped_function_converges() {
    // v = sin^2(pi x) sin^2(pi y) vanishes to first order on the boundary; Q0 tends to 2 pi^4
    let mut errs = Vec::new();
    for cells in [16, 32, 64] {
        let (grid, mask) = unit_square(cells);
        let v: Vec<f64> = mask
            .nodes()
            .iter()
            .map(|&n| {
                let p = grid.point(n);
                ((PI * p[0]).sin() * (PI * p[1]).sin()).powi(2)
            })
            .collect();
        let q0 = assemble_q0(&grid, &mask);
        errs.push((q0.quadratic(&v) / (2.0 * PI.powi(4)) - 1.0).abs());
    }
    // the exterior ring contributes a layer of size O(h)
    assert!(errs[2] < 0.02, "{errs:?}");
    assert!(errs[0] / errs[1] > 1.8 && errs[1] / errs[2] > 1.8, "{errs:?}");
}

#[test]
fn assembled_matrix_matches_nodewise_evaluation() {
    let disk = AnalyticDomain::disk(1.0);
    let (grid, mask) = build_grid(&disk, 1.0 / 12.0).unwrap();
    let q0 = assemble_q0(&grid, &mask);
    let form = q0_form(&grid, &mask);
    let u: Vec<f64> = (0..mask.count()).map(|k| ((k * 37 % 11) as f64 - 5.0) / 3.0).collect();
    let w: Vec<f64> = (0..mask.count()).map(|k| ((k * 13 % 7) as f64).sin()).collect();
    let a = q0.bilinear(&u, &w);
    let b = form.bilinear(&u, &w);
    assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0), "{a} vs {b}");
    assert!(q0.matrix.is_bitwise_symmetric());
}

#[test]
fn anisotropic_form_is_symmetric_and_dominates_lowest_window() {
    let rect = AnalyticDomain::rectangle(2.0, 1.0);
    let (grid, mask) = build_grid(&rect, 1.0 / 16.0).unwrap();
    let q = assemble_q(&grid, &mask, &CoefficientField::diagonal([[4.0, 0.0], [0.0, 1.0]])).unwrap();
    let q0 = assemble_q0(&grid, &mask);
    assert!(q.matrix.is_bitwise_symmetric());
    let u: Vec<f64> = mask.nodes().iter().map(|&n| (-grid.point(n)[0].powi(2) - 3.0 * grid.point(n)[1].powi(2)).exp()).collect();
    assert!(q.quadratic(&u) > 0.0 && q0.quadratic(&u) > 0.0);
}

#[test]
fn bilaplacian_restriction_is_assembly_on_submask() {
    let disk = AnalyticDomain::disk(1.0);
    let (grid, mask) = build_grid(&disk, 1.0 / 16.0).unwrap();
    let inner = GridMask::from_domain(&grid, &disk.erode(0.3).unwrap());
    let keep = inner.dofs_in(&mask).unwrap();
    let full = assemble_q0(&grid, &mask).restrict(&keep);
    let direct = assemble_q0(&grid, &inner);
    let n = inner.count();
    for i in 0..n {
        for j in 0..n {
            assert_eq!(full.matrix.get(i, j).to_bits(), direct.matrix.get(i, j).to_bits(), "entry ({i}, {j})");
        }
    }
    let mass = FormMatrix::l2_mass(&inner, grid.h);
    assert_eq!(mass.matrix.get(0, 0), grid.h * grid.h);
}
