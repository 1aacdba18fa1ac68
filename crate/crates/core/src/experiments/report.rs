use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use super::{ExperimentError, StabilityReport};
use crate::spectral::fmt17;
use crate::verifier::{DecayReport, HardyReport, PAlphaReport};

fn create(path: &Path) -> Result<BufWriter<File>, ExperimentError> {
    File::create(path).map(BufWriter::new).map_err(|e| ExperimentError::Io(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), ExperimentError> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| ExperimentError::Io(e.to_string()))?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| ExperimentError::Io(e.to_string()))
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt17).unwrap_or_default()
}

/// `n,eps,lambda,lambda_tilde,drift,rayleigh_upper,ball_law_error`.
pub fn write_stability_csv<W: Write>(report: &StabilityReport, w: W) -> csv::Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["n", "eps", "lambda", "lambda_tilde", "drift", "rayleigh_upper", "ball_law_error"])?;
    for r in &report.rows {
        wr.write_record([
            r.n.to_string(),
            fmt17(r.eps),
            fmt17(r.lambda),
            fmt17(r.lambda_tilde),
            fmt17(r.drift),
            fmt17(r.rayleigh_upper),
            opt(r.ball_law_error),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

/// `alpha,n_reg,lhs,rhs,c_hat,flag`.
pub fn write_decay_csv<W: Write>(reports: &[DecayReport], w: W) -> csv::Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["alpha", "n_reg", "lhs", "rhs", "c_hat", "flag"])?;
    for r in reports {
        let flag = if r.blowup { "BLOWUP" } else { "stable" };
        for row in &r.n_sweep {
            wr.write_record([fmt17(r.alpha), row.n_reg.to_string(), fmt17(row.lhs), fmt17(r.rhs), fmt17(row.c_hat), flag.to_string()])?;
        }
    }
    wr.flush()?;
    Ok(())
}

/// `alpha,witness,n_reg,lhs,rhs,margin`.
pub fn write_palpha_csv<W: Write>(reports: &[PAlphaReport], w: W) -> csv::Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["alpha", "witness", "n_reg", "lhs", "rhs", "margin"])?;
    for r in reports {
        for row in &r.rows {
            wr.write_record([fmt17(r.alpha), row.witness.clone(), row.n_reg.to_string(), fmt17(row.lhs), fmt17(row.rhs), fmt17(row.margin)])?;
        }
    }
    wr.flush()?;
    Ok(())
}

/// `kind,n_reg,constant_hat,residual`.
pub fn write_hardy_csv<W: Write>(reports: &[HardyReport], w: W) -> csv::Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["kind", "n_reg", "constant_hat", "residual"])?;
    for r in reports {
        for row in &r.n_sweep {
            wr.write_record([r.kind.name().to_string(), row.n_reg.to_string(), fmt17(row.constant_hat), fmt17(row.residual)])?;
        }
    }
    wr.flush()?;
    Ok(())
}

pub(crate) fn write_csv_file(path: &Path, f: impl FnOnce(BufWriter<File>) -> csv::Result<()>) -> Result<(), ExperimentError> {
    let w = create(path)?;
    f(w).map_err(|e| ExperimentError::Io(format!("{}: {e}", path.display())))
}
