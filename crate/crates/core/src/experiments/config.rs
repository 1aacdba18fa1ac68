use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::finsler::{CoefficientField, CoefficientKind, Sym2, Sym2Field};
use crate::geometry::{AnalyticDomain, Shape, MIN_BAND_CELLS};
use crate::spectral::SolverOptions;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("malformed config: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    domain: RawDomain,
    #[serde(default)]
    operator: RawOperator,
    grid: RawGrid,
    #[serde(default)]
    spectrum: RawSpectrum,
    #[serde(default)]
    study: RawStudy,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDomain {
    kind: String,
    radius: Option<f64>,
    width: Option<f64>,
    height: Option<f64>,
    a: Option<f64>,
    b: Option<f64>,
    p: Option<f64>,
    center: Option<[f64; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOperator {
    kind: String,
    matrix: Option<Sym2>,
    amplitude: Option<f64>,
    wavenumber: Option<f64>,
    perturbation: Option<f64>,
    perturbation_seed: Option<u64>,
}

impl Default for RawOperator {
    fn default() -> Self {
        Self { kind: "bilaplacian".into(), matrix: None, amplitude: None, wavenumber: None, perturbation: None, perturbation_seed: None }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    h: Option<f64>,
    cells: Option<u32>,
    boundary_offset: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpectrum {
    m: Option<usize>,
    tol: Option<f64>,
    basis: Option<usize>,
    max_cycles: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStudy {
    alpha: Option<Vec<f64>>,
    eps: Option<Vec<f64>>,
    n_sweep: Option<Vec<u32>>,
    envelope_alpha: Option<f64>,
    eikonal_tol: Option<f64>,
    theta: Option<f64>,
    k_factor: Option<f64>,
    seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
}

/// Validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub domain: AnalyticDomain,
    pub coefficients: CoefficientField,
    pub h: f64,
    /// Erosion of the node set in cells.
    pub boundary_offset: f64,
    pub m: usize,
    pub solver: SolverOptions,
    pub alphas: Vec<f64>,
    pub eps: Vec<f64>,
    /// Empty means the default sweep for `h`.
    pub n_sweep: Vec<u32>,
    pub envelope_alpha: f64,
    pub eikonal_tol: f64,
    /// Collar width for the second-derivative fit of `d`.
    pub theta: f64,
    pub k_factor: f64,
    pub perturbation: f64,
    pub perturbation_seed: u64,
    pub seed: u64,
    pub out_dir: PathBuf,
}

fn need(v: Option<f64>, what: &str) -> Result<f64, ConfigError> {
    v.ok_or_else(|| ConfigError::Invalid(format!("missing {what}")))
}

fn sym2_ok(m: &Sym2) -> bool {
    m[0][1] == m[1][0] && m.iter().flatten().all(|x| x.is_finite())
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io { path: path.display().to_string(), message: e.to_string() })?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        Self::from_raw(raw)
    }

    fn from_raw(raw: RawConfig) -> Result<Self, ConfigError> {
        let d = &raw.domain;
        let shape = match d.kind.as_str() {
            "disk" => Shape::Disk { radius: need(d.radius, "domain.radius")? },
            "rectangle" => Shape::Rectangle { width: need(d.width, "domain.width")?, height: need(d.height, "domain.height")? },
            "superellipse" => Shape::Superellipse { a: need(d.a, "domain.a")?, b: need(d.b, "domain.b")?, p: need(d.p, "domain.p")? },
            other => return Err(ConfigError::Invalid(format!("unknown domain kind {other:?}"))),
        };
        let domain = AnalyticDomain::new(shape).map_err(|e| ConfigError::Invalid(e.to_string()))?.with_center(d.center.unwrap_or([0.0, 0.0]));

        let o = &raw.operator;
        let field = |m: Sym2| -> Result<Sym2Field, ConfigError> {
            if !sym2_ok(&m) {
                return Err(ConfigError::Invalid("operator.matrix must be symmetric and finite".into()));
            }
            let amplitude = o.amplitude.unwrap_or(0.0);
            if amplitude.abs() > 1.0 {
                return Err(ConfigError::Invalid("operator.amplitude must lie in [-1, 1]".into()));
            }
            Ok(if amplitude == 0.0 {
                Sym2Field::Constant(m)
            } else {
                Sym2Field::Modulated { matrix: m, amplitude, wavenumber: o.wavenumber.unwrap_or(1.0) }
            })
        };
        let identity = [[1.0, 0.0], [0.0, 1.0]];
        let coefficients = match o.kind.as_str() {
            "bilaplacian" => CoefficientField::bilaplacian(),
            "product" => CoefficientField::new(CoefficientKind::Product(field(o.matrix.unwrap_or(identity))?)),
            "diagonal" => CoefficientField::new(CoefficientKind::Diagonal(field(o.matrix.unwrap_or(identity))?)),
            other => return Err(ConfigError::Invalid(format!("unknown operator kind {other:?}"))),
        };

        let h = match (raw.grid.h, raw.grid.cells) {
            (Some(h), None) => h,
            (None, Some(c)) if c > 0 => 1.0 / c as f64,
            (Some(_), Some(_)) => return Err(ConfigError::Invalid("give grid.h or grid.cells, not both".into())),
            _ => return Err(ConfigError::Invalid("missing grid.h".into())),
        };
        if !(h > 0.0 && h.is_finite()) {
            return Err(ConfigError::Invalid(format!("grid.h must be positive, got {h}")));
        }
        let boundary_offset = raw.grid.boundary_offset.unwrap_or(0.5);
        if !(0.0..1.0).contains(&boundary_offset) {
            return Err(ConfigError::Invalid("grid.boundary_offset must lie in [0, 1)".into()));
        }

        let seed = raw.study.seed.unwrap_or(42);
        let defaults = SolverOptions::default();
        let solver = SolverOptions {
            tol: raw.spectrum.tol.unwrap_or(defaults.tol),
            seed,
            basis: raw.spectrum.basis.unwrap_or(defaults.basis),
            max_cycles: raw.spectrum.max_cycles.unwrap_or(defaults.max_cycles),
            ..defaults
        };
        let cfg = RunConfig {
            domain,
            coefficients,
            h,
            boundary_offset,
            m: raw.spectrum.m.unwrap_or(3),
            solver,
            alphas: raw.study.alpha.unwrap_or_else(|| vec![0.1, 0.25, 0.4]),
            // the default widths that the grid resolves
            eps: raw.study.eps.unwrap_or_else(|| {
                [0.04, 0.06, 0.08, 0.1, 0.12, 0.14, 0.16].into_iter().filter(|&e| e >= MIN_BAND_CELLS * h && e < domain.inradius()).collect()
            }),
            n_sweep: raw.study.n_sweep.unwrap_or_default(),
            envelope_alpha: raw.study.envelope_alpha.unwrap_or(0.45),
            eikonal_tol: raw.study.eikonal_tol.unwrap_or(1e-10),
            theta: raw.study.theta.unwrap_or(0.5 * domain.inradius()),
            k_factor: raw.study.k_factor.unwrap_or(1.05),
            perturbation: o.perturbation.unwrap_or(0.01),
            perturbation_seed: o.perturbation_seed.unwrap_or(seed),
            seed,
            out_dir: raw.output.dir.unwrap_or_else(|| PathBuf::from("out")),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.m == 0 {
            return bad("spectrum.m must be at least 1".into());
        }
        if !(self.solver.tol > 0.0) || self.solver.basis < 8 || self.solver.max_cycles == 0 {
            return bad("spectrum.tol must be positive, spectrum.basis at least 8, spectrum.max_cycles positive".into());
        }
        let r = self.domain.inradius();
        for &e in &self.eps {
            if !(e >= MIN_BAND_CELLS * self.h && e < r) {
                return bad(format!("erosion width {e} must satisfy 4h = {} <= eps < inradius = {r}", MIN_BAND_CELLS * self.h));
            }
        }
        for &a in &self.alphas {
            if !(a > 0.0 && a < 1.0) {
                return bad(format!("alpha = {a} must lie in (0, 1)"));
            }
        }
        if !(self.envelope_alpha > 0.0 && self.envelope_alpha < 1.0) {
            return bad("study.envelope_alpha must lie in (0, 1)".into());
        }
        if self.n_sweep.contains(&0) || self.n_sweep.windows(2).any(|w| w[1] <= w[0]) {
            return bad("study.n_sweep must be positive and increasing".into());
        }
        if !(self.k_factor >= 1.0) {
            return bad("study.k_factor must be at least 1".into());
        }
        if !(self.theta > 0.0 && self.theta <= self.domain.inradius()) {
            return bad("study.theta must lie in (0, inradius]".into());
        }
        if !(self.eikonal_tol > 0.0) {
            return bad("study.eikonal_tol must be positive".into());
        }
        if !(self.perturbation >= 0.0 && self.perturbation.is_finite()) {
            return bad("operator.perturbation must be nonnegative".into());
        }
        Ok(())
    }

    pub fn admissible_alphas(&self) -> Vec<f64> {
        self.alphas.iter().copied().filter(|&a| a < 0.5).collect()
    }

    pub fn forbidden_alphas(&self) -> Vec<f64> {
        self.alphas.iter().copied().filter(|&a| a >= 0.5).collect()
    }

    /// Configured sweep, or `{8, 16, 32, 64, round(1/h)}` capped at `round(1/h)`.
    pub fn n_sweep(&self) -> Vec<u32> {
        if self.n_sweep.is_empty() {
            crate::verifier::default_n_sweep(self.h)
        } else {
            self.n_sweep.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DISK: &str = r#"
[domain]
kind = "disk"
radius = 1.0

[grid]
h = 0.015625
"#;

    #[test]
    fn minimal_disk() {
        let c = RunConfig::from_toml_str(DISK).unwrap();
        assert_eq!(c.h, 1.0 / 64.0);
        assert_eq!(c.m, 3);
        assert_eq!(c.boundary_offset, 0.5);
        assert!(c.coefficients.is_bilaplacian());
        assert_eq!(c.n_sweep(), vec![8, 16, 32, 64]);
        assert_eq!(c.eps, vec![0.08, 0.1, 0.12, 0.14, 0.16]);
        assert_eq!(c.theta, 0.5);
    }

    #[test]
    fn theta_window() {
        assert_eq!(RunConfig::from_toml_str(&format!("{DISK}\n[study]\ntheta = 0.2\n")).unwrap().theta, 0.2);
        assert!(RunConfig::from_toml_str(&format!("{DISK}\n[study]\ntheta = 1.5\n")).is_err());
    }

    #[test]
    fn eps_below_band_rejected() {
        let text = format!("{DISK}\n[study]\neps = [0.03]\n");
        let e = RunConfig::from_toml_str(&text).unwrap_err();
        assert!(matches!(e, ConfigError::Invalid(ref m) if m.contains("4h")), "{e}");
    }

    #[test]
    fn unknown_keys_and_kinds() {
        assert!(matches!(RunConfig::from_toml_str(&format!("{DISK}\n[study]\nfoo = 1\n")), Err(ConfigError::Parse(_))));
        let t = DISK.replace("\"disk\"", "\"torus\"");
        assert!(matches!(RunConfig::from_toml_str(&t), Err(ConfigError::Invalid(_))));
    }

    #[test]
    fn alpha_split() {
        let c = RunConfig::from_toml_str(&format!("{DISK}\n[study]\nalpha = [0.25, 0.5, 0.6]\n")).unwrap();
        assert_eq!(c.admissible_alphas(), vec![0.25]);
        assert_eq!(c.forbidden_alphas(), vec![0.5, 0.6]);
    }

    #[test]
    fn anisotropic_rectangle() {
        let text = r#"
[domain]
kind = "rectangle"
width = 2.0
height = 1.0

[operator]
kind = "diagonal"
matrix = [[4.0, 0.0], [0.0, 1.0]]

[grid]
cells = 32
"#;
        let c = RunConfig::from_toml_str(text).unwrap();
        assert!(!c.coefficients.is_bilaplacian());
        assert_eq!(c.h, 1.0 / 32.0);
        assert!(RunConfig::from_toml_str(&text.replace("0.0], [0.0", "1.0], [0.0")).is_err());
    }
}
