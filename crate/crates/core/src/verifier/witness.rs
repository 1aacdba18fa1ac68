use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{AnalyticDomain, Grid, GridMask};
use crate::spectral::Spectrum;

/// A test vector on the mask dofs.
#[derive(Debug, Clone)]
pub struct Witness {
    pub label: String,
    pub vector: Vec<f64>,
}

/// `count` bumps `(1 - |x - c|^2 / R^2)_+^4` centred where `sdf < -inradius / 2`,
/// with `R` a random fraction in `[0.6, 1]` of the distance from the centre to the boundary.
pub fn seeded_bumps(domain: &AnalyticDomain, grid: &Grid, mask: &GridMask, count: usize, seed: u64) -> Vec<Witness> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bb = domain.bbox();
    let depth = 0.5 * domain.inradius();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let c = [rng.random_range(bb.min[0]..bb.max[0]), rng.random_range(bb.min[1]..bb.max[1])];
        let s = domain.sdf(c);
        if s >= -depth {
            continue;
        }
        let r = -s * rng.random_range(0.6..1.0);
        let vector: Vec<f64> = mask
            .nodes()
            .iter()
            .map(|&n| {
                let p = grid.point(n);
                let t = ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)) / (r * r);
                if t < 1.0 { (1.0 - t).powi(4) } else { 0.0 }
            })
            .collect();
        if vector.iter().all(|&v| v == 0.0) {
            continue;
        }
        out.push(Witness { label: format!("bump{}(c=[{:.4},{:.4}],r={:.4})", out.len() + 1, c[0], c[1], r), vector });
    }
    out
}

/// `phi_1..phi_5` (or as many pairs as `spec` holds) followed by three seeded bumps.
pub fn witness_set(spec: &Spectrum, domain: &AnalyticDomain, grid: &Grid, mask: &GridMask, seed: u64) -> Vec<Witness> {
    let mut out: Vec<Witness> = spec
        .pairs
        .iter()
        .take(5)
        .enumerate()
        .map(|(k, p)| Witness { label: format!("phi{}", k + 1), vector: p.vector.clone() })
        .collect();
    out.extend(seeded_bumps(domain, grid, mask, 3, seed));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_grid;

    #[test]
    fn bumps_are_reproducible_and_interior() {
        let d = AnalyticDomain::disk(1.0);
        let (g, m) = build_grid(&d, 1.0 / 32.0).unwrap();
        let a = seeded_bumps(&d, &g, &m, 3, 7);
        let b = seeded_bumps(&d, &g, &m, 3, 7);
        assert_eq!(a.len(), 3);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.vector, y.vector);
            assert_eq!(x.label, y.label);
        }
        // vanishes on the outermost mask ring
        for (dof, &n) in m.nodes().iter().enumerate() {
            if d.sdf(g.point(n)) > -g.h {
                assert!(a.iter().all(|w| w.vector[dof] == 0.0));
            }
        }
        let c = seeded_bumps(&d, &g, &m, 3, 8);
        assert_ne!(a[0].vector, c[0].vector);
    }
}
