use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use super::report::{write_csv_file, write_decay_csv, write_hardy_csv, write_json, write_palpha_csv, write_stability_csv};
use super::{run_erosion_study, ConfigError, Discretization, ExperimentError, RunConfig};
use crate::assembly::{assemble_q, assemble_q0, ellipticity_window, perturb_coeffs};
use crate::finsler::{equivalence_constants, eikonal_residual, euclidean_distance, finsler_distance, fit_second_derivative};
use crate::spectral::{fmt17, spectrum_upper_bound};
use crate::verifier::{
    hardy_report, k_alpha, measure_cross_term_constant, probe_p_alpha, probe_perturbation, verify_decay, witness_set, HardyKind,
    HardyOptions, ProbeContext, VerifierError,
};

#[derive(Debug, Parser)]
#[command(name = "platelab", version, about = "Fourth-order Dirichlet operators on planar grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for solver starts, witness bumps and perturbations.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Let `palpha` run exponents at or above 1/2.
    #[arg(long, global = true)]
    allow_blowup: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Lowest eigenpairs of the operator.
    Spectrum {
        /// Also write the operator matrix as coordinate triplets.
        #[arg(long)]
        export_matrix: bool,
    },
    /// Finsler and Euclidean boundary distances with eikonal residuals.
    Distance,
    /// Hardy-Rellich constants and their weak versions.
    Hardy,
    /// Weighted decay integrals of the first eigenfunction.
    Decay,
    /// Witness probes of the weighted form inequality and its perturbation.
    Palpha,
    /// Eigenvalue drift under erosion.
    Erode,
}

#[derive(Serialize)]
struct ErrorRecord<'a> {
    error: &'a str,
    exit_code: i32,
    message: String,
}

fn emit_error(category: &str, code: i32, message: String) -> i32 {
    let rec = ErrorRecord { error: category, exit_code: code, message };
    eprintln!("{}", serde_json::to_string(&rec).expect("error record serializes"));
    code
}

/// Parses `args` (program name first), runs the subcommand and returns the exit code.
pub fn cli_main(args: &[String]) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            eprint!("{}", e.render());
            return emit_error("config", 2, e.kind().to_string());
        }
    };
    let Some(path) = cli.config.as_deref() else {
        return emit_error("config", 2, "--config <path> is required".into());
    };
    let mut cfg = match RunConfig::from_path(path) {
        Ok(c) => c,
        Err(e) => return emit_error("config", 2, e.to_string()),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
        cfg.solver.seed = seed;
        cfg.perturbation_seed = seed;
    }
    if let Some(out) = cli.out {
        cfg.out_dir = out;
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            return emit_error("config", 2, "--threads must be positive".into());
        }
        pool = pool.num_threads(t);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => return emit_error("config", 2, e.to_string()),
    };
    match pool.install(|| run_command(cli.command, &cfg, cli.allow_blowup)) {
        Ok(()) => 0,
        Err(e) => emit_error(e.category(), e.exit_code(), e.to_string()),
    }
}

fn io(e: std::io::Error) -> ExperimentError {
    ExperimentError::Io(e.to_string())
}

/// Runs one subcommand and writes its files into `cfg.out_dir`.
pub fn run_command(cmd: Command, cfg: &RunConfig, allow_blowup: bool) -> Result<(), ExperimentError> {
    if cmd == Command::Palpha && !allow_blowup {
        let bad = cfg.forbidden_alphas();
        if !bad.is_empty() {
            return Err(ConfigError::Invalid(format!(
                "palpha is restricted to alpha in (0, 1/2); got {bad:?} (pass --allow-blowup to run them anyway)"
            ))
            .into());
        }
    }
    std::fs::create_dir_all(&cfg.out_dir).map_err(io)?;
    let out = cfg.out_dir.as_path();
    match cmd {
        Command::Spectrum { export_matrix } => spectrum(cfg, out, export_matrix),
        Command::Distance => distance(cfg, out),
        Command::Hardy => hardy(cfg, out),
        Command::Decay => decay(cfg, out),
        Command::Palpha => palpha(cfg, out),
        Command::Erode => {
            let report = run_erosion_study(cfg)?;
            write_csv_file(&out.join("stability.csv"), |w| write_stability_csv(&report, w))?;
            write_json(&out.join("stability.json"), &report)?;
            if report.rows.iter().any(|r| !r.converged) {
                return Err(ExperimentError::Unconverged("some erosion solves missed the residual target".into()));
            }
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct SpectrumSummary {
    h: f64,
    dofs: usize,
    values: Vec<f64>,
    residuals: Vec<f64>,
    converged: bool,
}

fn spectrum(cfg: &RunConfig, out: &Path, export_matrix: bool) -> Result<(), ExperimentError> {
    let disc = Discretization::new(cfg)?;
    let spec = disc.spectrum(cfg, cfg.m)?;
    write_csv_file(&out.join("spectrum.csv"), |w| spec.write_csv(w))?;
    let summary = SpectrumSummary {
        h: cfg.h,
        dofs: disc.mask.count(),
        values: spec.values(),
        residuals: spec.pairs.iter().map(|p| p.residual).collect(),
        converged: spec.converged,
    };
    write_json(&out.join("spectrum.json"), &summary)?;
    if export_matrix {
        let f = std::fs::File::create(out.join("q_matrix.txt")).map_err(io)?;
        disc.q.matrix.write_triplets(std::io::BufWriter::new(f)).map_err(io)?;
    }
    if !spec.converged {
        return Err(ExperimentError::Unconverged(format!("eigensolver stopped at residual {:e}", spec.worst_residual())));
    }
    Ok(())
}

#[derive(Serialize)]
struct DistanceSummary {
    h: f64,
    sweeps_finsler: usize,
    sweeps_euclidean: usize,
    c1_hat: f64,
    c2_hat: f64,
    residual_finsler: crate::finsler::EikonalResidual,
    residual_euclidean: crate::finsler::EikonalResidual,
    second_derivative: crate::finsler::SecondDerivativeFit,
}

fn distance(cfg: &RunConfig, out: &Path) -> Result<(), ExperimentError> {
    let disc = Discretization::new(cfg)?;
    let (g, m, omega) = (&disc.grid, &disc.mask, &disc.omega);
    let de = euclidean_distance(omega, g, m, cfg.eikonal_tol)?;
    let df = finsler_distance(omega, g, m, &cfg.coefficients, cfg.eikonal_tol)?;
    let (c1, c2) = equivalence_constants(&df, &de, m);
    let band = 3.0 * cfg.h;
    let summary = DistanceSummary {
        h: cfg.h,
        sweeps_finsler: df.sweeps,
        sweeps_euclidean: de.sweeps,
        c1_hat: c1,
        c2_hat: c2,
        residual_finsler: eikonal_residual(&df, omega, g, m, &cfg.coefficients, band, 5.0 * cfg.h),
        residual_euclidean: eikonal_residual(&de, omega, g, m, &cfg.coefficients, band, 5.0 * cfg.h),
        second_derivative: fit_second_derivative(&df, g, m, cfg.theta),
    };
    write_json(&out.join("distance.json"), &summary)?;
    write_csv_file(&out.join("distance.csv"), |w| {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["i", "j", "x", "y", "d_finsler", "d_euclidean"])?;
        for &n in m.nodes() {
            let (i, j) = g.coords(n);
            let p = g.point(n);
            wr.write_record([i.to_string(), j.to_string(), fmt17(p[0]), fmt17(p[1]), fmt17(df.d(n)), fmt17(de.d(n))])?;
        }
        wr.flush()?;
        Ok(())
    })
}

fn hardy(cfg: &RunConfig, out: &Path) -> Result<(), ExperimentError> {
    let disc = Discretization::new(cfg)?;
    let dist = disc.exact_distance();
    let ns = cfg.n_sweep();
    let opts = HardyOptions { solver: crate::spectral::SolverOptions { seed: cfg.seed, ..HardyOptions::default().solver }, ..Default::default() };
    let reports = HardyKind::ALL
        .iter()
        .map(|&k| hardy_report(k, &disc.grid, &disc.mask, &dist, &ns, &opts))
        .collect::<Result<Vec<_>, _>>()?;
    write_csv_file(&out.join("hardy.csv"), |w| write_hardy_csv(&reports, w))?;
    write_json(&out.join("hardy.json"), &reports)
}

fn decay(cfg: &RunConfig, out: &Path) -> Result<(), ExperimentError> {
    let disc = Discretization::new(cfg)?;
    let spec = disc.spectrum(cfg, cfg.m)?;
    let dist = disc.exact_distance();
    let upper = spectrum_upper_bound(&disc.q.matrix, &disc.mass.matrix);
    let ns = cfg.n_sweep();
    let reports = cfg
        .alphas
        .iter()
        .map(|&a| verify_decay(&spec, &disc.q, &disc.grid, &disc.mask, 0, a, &dist, &ns, upper))
        .collect::<Result<Vec<_>, _>>()?;
    write_csv_file(&out.join("decay.csv"), |w| write_decay_csv(&reports, w))?;
    write_json(&out.join("decay.json"), &reports)
}

#[derive(Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
enum PerturbationOutcome {
    Probed(Box<crate::verifier::PerturbationReport>),
    BoundViolated { delta: f64, bound: f64 },
}

#[derive(Serialize)]
struct PAlphaEntry {
    alpha: f64,
    admissible: bool,
    probe: crate::verifier::PAlphaReport,
    cross_term: crate::verifier::CrossTermReport,
    perturbation: Option<PerturbationOutcome>,
    ellipticity_perturbed: Option<crate::assembly::EllipticityWindow>,
}

fn palpha(cfg: &RunConfig, out: &Path) -> Result<(), ExperimentError> {
    let disc = Discretization::new(cfg)?;
    let (g, m) = (&disc.grid, &disc.mask);
    let spec = disc.spectrum(cfg, cfg.m.max(5))?;
    let dist = finsler_distance(&disc.omega, g, m, &cfg.coefficients, cfg.eikonal_tol)?;
    let de = euclidean_distance(&disc.omega, g, m, cfg.eikonal_tol)?;
    let q0 = assemble_q0(g, m);
    let witnesses = witness_set(&spec, &disc.omega, g, m, cfg.seed);
    let ns = cfg.n_sweep();
    let ctx = ProbeContext { grid: g, mask: m, dist: &dist, mass: &disc.mass, q0: &q0, witnesses: &witnesses, n_sweep: &ns };

    // inputs of the closed-form cross-term bound
    let exact = disc.exact_distance();
    let plain = HardyOptions { weak: false, ..Default::default() };
    let a_hat = hardy_report(HardyKind::HardyGrad, g, m, &exact, &ns, &plain)?.constant_hat;
    let b_hat = hardy_report(HardyKind::RellichMass, g, m, &exact, &ns, &plain)?.constant_hat;
    let c2 = equivalence_constants(&dist, &de, m).1;

    let perturbed = if cfg.perturbation > 0.0 {
        let field = perturb_coeffs(&cfg.coefficients, cfg.perturbation, cfg.perturbation_seed, g)?;
        let qt = assemble_q(g, m, &field)?;
        let window = ellipticity_window(&qt, &q0)?;
        Some((qt, window))
    } else {
        None
    };

    let mut entries = Vec::new();
    for &alpha in &cfg.alphas {
        let ka = k_alpha(alpha);
        let k = if ka.is_finite() && ka > 0.0 { cfg.k_factor * ka } else { cfg.k_factor };
        let probe = probe_p_alpha(&ctx, &disc.q, alpha, k, None)?;
        let cross_term = measure_cross_term_constant(&ctx, alpha, true).with_closed_form(c2, a_hat, b_hat);
        let perturbation = match &perturbed {
            Some((qt, window)) => Some(match probe_perturbation(&ctx, &probe, qt, cfg.perturbation, window.lambda_ell) {
                Ok(r) => PerturbationOutcome::Probed(Box::new(r)),
                Err(VerifierError::BoundViolated { delta, bound }) => PerturbationOutcome::BoundViolated { delta, bound },
                Err(e) => return Err(e.into()),
            }),
            None => None,
        };
        entries.push(PAlphaEntry {
            alpha,
            admissible: alpha < 0.5,
            probe,
            cross_term,
            perturbation,
            ellipticity_perturbed: perturbed.as_ref().map(|p| p.1),
        });
    }
    let probes: Vec<_> = entries.iter().map(|e| e.probe.clone()).collect();
    write_csv_file(&out.join("palpha.csv"), |w| write_palpha_csv(&probes, w))?;
    write_json(&out.join("palpha.json"), &entries)
}
