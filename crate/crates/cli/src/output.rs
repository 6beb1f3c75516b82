//! Report writers.
//!
//! A run can emit three artifacts into its output directory:
//!
//! * `report.json` — the full machine-readable report;
//! * `rows.csv`    — the sweep table alone;
//! * `summary.txt` — a human-readable digest.
//!
//! `report.json` and `rows.csv` are deterministic byte for byte for a given
//! configuration and thread-count-one run; the wall-clock timestamp lives
//! only in `summary.txt`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use adialim_core::harness::{Details, ExperimentReport, Verdict};
use anyhow::Context;

use crate::config::OutputFormat;

/// File name of the JSON report.
pub const REPORT_FILE: &str = "report.json";
/// File name of the CSV rows.
pub const ROWS_FILE: &str = "rows.csv";
/// File name of the human-readable summary.
pub const SUMMARY_FILE: &str = "summary.txt";

/// Stable lower-case label for a verdict.
pub fn verdict_label(verdict: Verdict) -> &'static str {
    match verdict {
        Verdict::Pass => "pass",
        Verdict::PassDegenerate => "pass-degenerate",
        Verdict::Fail => "fail",
    }
}

/// Writes the requested artifacts, creating the directory if needed.
///
/// Returns the paths written, in the order requested.
pub fn write_outputs(
    report: &ExperimentReport,
    dir: &Path,
    formats: &[OutputFormat],
) -> anyhow::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))?;
    let mut written = Vec::with_capacity(formats.len());
    for format in formats {
        let (name, content) = match format {
            OutputFormat::Json => {
                let mut json = report.to_json_string()?;
                json.push('\n');
                (REPORT_FILE, json)
            }
            OutputFormat::Csv => (ROWS_FILE, report.rows_to_csv()?),
            OutputFormat::Summary => (SUMMARY_FILE, render_summary(report)),
        };
        let path = dir.join(name);
        std::fs::write(&path, content)
            .with_context(|| format!("cannot write {}", path.display()))?;
        written.push(path);
    }
    Ok(written)
}

/// Renders the human-readable digest (the only artifact with a timestamp).
pub fn render_summary(report: &ExperimentReport) -> String {
    let meta = &report.metadata;
    let mut s = String::new();
    let _ = writeln!(s, "experiment : {}", meta.experiment.name());
    let _ = writeln!(s, "verdict    : {}", verdict_label(report.verdict));
    let _ = writeln!(
        s,
        "profile    : case {} {}, m(-1) = {}, m(+1) = {}",
        meta.profile.case, meta.profile.shape, meta.profile.m_minus, meta.profile.m_plus
    );
    let _ = writeln!(
        s,
        "grid       : {} base nodes on [{}, {}], measure power {}",
        meta.grid.n_nodes, meta.grid.delta, meta.grid.r, meta.grid.measure_power
    );
    let _ = writeln!(
        s,
        "integrator : rel_tol = {:e}, abs_tol = {:e}",
        meta.integrator.rel_tol, meta.integrator.abs_tol
    );
    s.push('\n');
    let _ = writeln!(s, "{:>12}  {:>14}  {:>8}", "T", "metric", "nodes");
    for row in &report.rows {
        let _ = writeln!(s, "{:>12}  {:>14.6e}  {:>8}", row.t_scale, row.metric, row.n_nodes);
    }
    s.push('\n');
    match (report.fitted_slope, report.slope_ci) {
        (Some(slope), Some(stderr)) => {
            let _ = writeln!(s, "fitted slope : {slope:.4} ± {stderr:.4} (log-log, smallest T discarded)");
        }
        _ if report.below_noise_floor => {
            let _ = writeln!(s, "fitted slope : none (metrics at the integrator noise floor)");
        }
        _ => {}
    }
    match &report.details {
        Details::Rate { max_pseudo_unitarity_residual } => {
            let _ = writeln!(s, "max pseudo-unitarity residual : {max_pseudo_unitarity_residual:.3e}");
        }
        Details::Limit { final_error, monotone } => {
            let _ = writeln!(s, "final weak-limit error : {final_error:.6e}");
            let _ = writeln!(s, "monotone above noise   : {monotone}");
        }
        Details::KmsLimit { final_error, monotone, kms_defect } => {
            let _ = writeln!(s, "final weak-limit error : {final_error:.6e}");
            let _ = writeln!(s, "monotone above noise   : {monotone}");
            let _ = writeln!(s, "effective-temperature spread : {kms_defect:.6e}");
        }
        Details::HadamardLimit { final_error, monotone, smoothing } => {
            let _ = writeln!(s, "final weak-limit error : {final_error:.6e}");
            let _ = writeln!(s, "monotone above noise   : {monotone}");
            let _ = writeln!(s, "remainder decay, sup <e>^N ||r|| for N = 0..{}:", smoothing.len().saturating_sub(1));
            for (n, v) in smoothing.iter().enumerate() {
                let _ = writeln!(s, "  N = {n:>2} : {v:.6e}");
            }
        }
        Details::EnergyBounds { bound, supremum } => {
            let _ = writeln!(s, "analytic bound    : {bound:.12}");
            let _ = writeln!(s, "observed supremum : {supremum:.12}");
        }
        Details::Intertwining { max_residual, max_pseudo_unitarity_residual } => {
            let _ = writeln!(s, "max projector-transport residual : {max_residual:.3e}");
            let _ = writeln!(s, "max pseudo-unitarity residual    : {max_pseudo_unitarity_residual:.3e}");
        }
    }
    let unix = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let _ = writeln!(s, "\ngenerated (unix seconds) : {unix}");
    s
}
