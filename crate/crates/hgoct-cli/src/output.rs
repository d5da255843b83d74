//! Plot-ready CSV artifacts and the run summary. All writes go through a
//! temp-file-then-rename step so readers never observe partial files, and
//! numbers carry 17 significant digits so they parse back bit-exactly.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};

use hgoct::functional::projected_expectation_signal;
use hgoct::optimizer::{IterationRecord, OptimizationResult};
use hgoct::problems::ProblemSpec;
use hgoct::spectral::{frequency, CosineTransform};

pub fn write_atomic(path: &Path, content: &str) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))?;
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    std::fs::write(&tmp, content)
        .with_context(|| format!("cannot write {}", tmp.display()))?;
    std::fs::rename(&tmp, path)
        .with_context(|| format!("cannot move {} into place", path.display()))?;
    Ok(())
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn two_column(header: &str, rows: impl Iterator<Item = (f64, f64)>) -> String {
    let mut s = String::from(header);
    s.push('\n');
    for (a, b) in rows {
        let _ = writeln!(s, "{},{}", fmt(a), fmt(b));
    }
    s
}

/// Emit field_spectrum.csv, dipole_spectrum.csv, field_signal.csv,
/// convergence.csv, and summary.txt for a finished (or truncated) run.
pub fn write_run_outputs(
    dir: &Path,
    problem: &ProblemSpec<f64>,
    result: &OptimizationResult<f64>,
) -> Result<()> {
    let tgrid = &problem.tgrid;
    let ct = CosineTransform::new(tgrid);

    write_atomic(
        &dir.join("field_spectrum.csv"),
        &two_column(
            "omega,field_spectrum",
            result
                .field_spectrum
                .values
                .iter()
                .enumerate()
                .map(|(k, &v)| (frequency(tgrid, k), v)),
        ),
    )?;

    let dipole = projected_expectation_signal(&result.trajectory, &problem.weights)?;
    let dipole_spec = ct.forward(&dipole)?;
    write_atomic(
        &dir.join("dipole_spectrum.csv"),
        &two_column(
            "omega,dipole_spectrum",
            dipole_spec
                .values
                .iter()
                .enumerate()
                .map(|(k, &v)| (frequency(tgrid, k), v)),
        ),
    )?;

    write_atomic(
        &dir.join("field_signal.csv"),
        &two_column(
            "t,field",
            result
                .field_signal
                .values
                .iter()
                .enumerate()
                .map(|(j, &v)| (tgrid.node(j), v)),
        ),
    )?;

    write_atomic(&dir.join("convergence.csv"), &convergence_csv(&result.history))?;

    let mut summary = String::new();
    let _ = writeln!(summary, "problem: {}", problem.name);
    let _ = writeln!(summary, "termination: {:?}", result.termination);
    let _ = writeln!(summary, "iterations: {}", result.history.len());
    let _ = writeln!(summary, "final_K: {}", fmt(result.final_k));
    let _ = writeln!(summary, "J_max: {}", fmt(result.final_j.j_max));
    let _ = writeln!(summary, "J_penal: {}", fmt(result.final_j.j_penal));
    let _ = writeln!(summary, "J_forb: {}", fmt(result.final_j.j_forb));
    let _ = writeln!(summary, "J_bound: {}", fmt(result.final_j.j_bound));
    let _ = writeln!(summary, "J_total: {}", fmt(result.final_j.j_total));
    if let Some(last) = result.history.last() {
        let _ = writeln!(summary, "last_metric: {}", fmt(last.metric));
    }
    write_atomic(&dir.join("summary.txt"), &summary)?;
    Ok(())
}

pub fn convergence_csv(history: &[IterationRecord<f64>]) -> String {
    let mut s = String::from("iter,J_max,J_penal,J_forb,J_bound,J_total,metric,K\n");
    for r in history {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.index,
            fmt(r.j.j_max),
            fmt(r.j.j_penal),
            fmt(r.j.j_forb),
            fmt(r.j.j_bound),
            fmt(r.j.j_total),
            fmt(r.metric),
            fmt(r.k_used)
        );
    }
    s
}
