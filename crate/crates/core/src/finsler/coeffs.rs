use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tensor::{operator_norm, HessianMatrix, Sym2, Tensor4};
use crate::geometry::Grid;

/// Symmetric 2x2 matrix field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Sym2Field {
    Constant(Sym2),
    /// `matrix * (1 + amplitude * sin(k x) sin(k y))`, nonnegative for `|amplitude| <= 1`.
    Modulated { matrix: Sym2, amplitude: f64, wavenumber: f64 },
}

impl Sym2Field {
    pub fn eval(&self, x: [f64; 2]) -> Sym2 {
        match self {
            Sym2Field::Constant(m) => *m,
            Sym2Field::Modulated { matrix, amplitude, wavenumber } => {
                let s = 1.0 + amplitude * (wavenumber * x[0]).sin() * (wavenumber * x[1]).sin();
                [[matrix[0][0] * s, matrix[0][1] * s], [matrix[1][0] * s, matrix[1][1] * s]]
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Pattern {
    /// Independent random direction at every node, normalised to operator norm one.
    Random { seed: u64 },
    /// The same matrix everywhere, used as given.
    Constant(HessianMatrix),
}

/// Node-wise tensor perturbation on a fixed grid, in Hessian-matrix form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationField {
    pub pattern: Pattern,
    pub magnitude: f64,
    pub grid: Grid,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl PerturbationField {
    fn nearest_node(&self, x: [f64; 2]) -> usize {
        let g = &self.grid;
        let i = ((x[0] - g.origin[0]) / g.h).round().clamp(0.0, (g.nx - 1) as f64) as usize;
        let j = ((x[1] - g.origin[1]) / g.h).round().clamp(0.0, (g.ny - 1) as f64) as usize;
        g.index(i, j)
    }

    pub fn at_node(&self, node: usize) -> HessianMatrix {
        match &self.pattern {
            Pattern::Constant(m) => *m,
            Pattern::Random { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(node as u64)));
                let mut m = [[0.0; 3]; 3];
                for p in 0..3 {
                    for q in p..3 {
                        let v: f64 = rng.random_range(-1.0..1.0);
                        m[p][q] = v;
                        m[q][p] = v;
                    }
                }
                let norm = operator_norm(&m);
                let s = if norm > 0.0 { self.magnitude / norm } else { 0.0 };
                m.iter_mut().flatten().for_each(|v| *v *= s);
                m
            }
        }
    }

    pub fn eval(&self, x: [f64; 2]) -> HessianMatrix {
        self.at_node(self.nearest_node(x))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CoefficientKind {
    Bilaplacian,
    /// `a_ijkl = b_ij b_kl`.
    Product(Sym2Field),
    /// `a_ijkl = delta_ij delta_kl a_ik`.
    Diagonal(Sym2Field),
    Perturbed { base: Box<CoefficientField>, delta: PerturbationField },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientField {
    pub kind: CoefficientKind,
    /// Estimated ellipticity window `(lambda, Lambda)` once measured.
    pub window: Option<(f64, f64)>,
}

impl CoefficientField {
    pub fn new(kind: CoefficientKind) -> Self {
        Self { kind, window: None }
    }

    pub fn bilaplacian() -> Self {
        Self::new(CoefficientKind::Bilaplacian)
    }

    pub fn product(b: Sym2) -> Self {
        Self::new(CoefficientKind::Product(Sym2Field::Constant(b)))
    }

    pub fn diagonal(a: Sym2) -> Self {
        Self::new(CoefficientKind::Diagonal(Sym2Field::Constant(a)))
    }

    pub fn with_window(mut self, lambda: f64, big_lambda: f64) -> Self {
        self.window = Some((lambda, big_lambda));
        self
    }

    pub fn is_bilaplacian(&self) -> bool {
        matches!(self.kind, CoefficientKind::Bilaplacian)
    }

    /// Sup operator norm of the perturbation, zero for unperturbed kinds.
    pub fn perturbation_magnitude(&self) -> f64 {
        match &self.kind {
            CoefficientKind::Perturbed { delta, base } => match &delta.pattern {
                Pattern::Random { .. } => delta.magnitude + base.perturbation_magnitude(),
                Pattern::Constant(m) => operator_norm(m) + base.perturbation_magnitude(),
            },
            _ => 0.0,
        }
    }

    pub fn tensor(&self, x: [f64; 2]) -> Tensor4 {
        match &self.kind {
            CoefficientKind::Bilaplacian => Tensor4::bilaplacian(),
            CoefficientKind::Product(b) => Tensor4::product(&b.eval(x)),
            CoefficientKind::Diagonal(a) => Tensor4::diagonal(&a.eval(x)),
            CoefficientKind::Perturbed { base, delta } => {
                base.tensor(x).add(&Tensor4::from_hessian_matrix(&delta.eval(x)))
            }
        }
    }

    pub fn eval(&self, x: [f64; 2], i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.tensor(x).a[i][j][k][l]
    }

    /// Tensors sampled at every grid node.
    pub fn freeze(&self, grid: &Grid) -> FrozenCoefficients {
        let tensors = (0..grid.len())
            .map(|n| match &self.kind {
                CoefficientKind::Perturbed { base, delta } => base
                    .tensor(grid.point(n))
                    .add(&Tensor4::from_hessian_matrix(&delta.at_node(n))),
                _ => self.tensor(grid.point(n)),
            })
            .collect();
        FrozenCoefficients { tensors, bilaplacian: self.is_bilaplacian() }
    }
}

/// Coefficients cached on grid nodes.
#[derive(Debug, Clone)]
pub struct FrozenCoefficients {
    pub tensors: Vec<Tensor4>,
    pub bilaplacian: bool,
}

impl FrozenCoefficients {
    pub fn hessian_matrix(&self, node: usize) -> HessianMatrix {
        self.tensors[node].hessian_matrix()
    }
}
