//! Deterministic emission of run artifacts: time-series CSV, summary JSON
//! and optional per-panel plot-data files.
//!
//! Floats are written with the shortest round-trip decimal (`{}`), so two
//! runs with the same configuration and seed produce byte-identical files.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::Error;
use crate::sim::{MonteCarloSummary, RunRecord};

/// Column names of the time-series CSV. Per-line columns carry a 1-based
/// line suffix only when more than one line is tracked, so the single-line
/// schema is t, h_x..h_z, hhat_x..hhat_z, chi_1, chi_2, chihat_1, chihat_2,
/// err_h_x..err_h_z, err_chi_x..err_chi_z, nu_x..nu_z, om_x..om_z,
/// sigma1_sq, sigma2_sq — 25 columns.
pub fn csv_header(num_lines: usize) -> String {
    let suffix = |i: usize| {
        if num_lines > 1 {
            format!("{}", i + 1)
        } else {
            String::new()
        }
    };
    let mut cols = vec!["t".to_string()];
    for i in 0..num_lines {
        let s = suffix(i);
        for axis in ["x", "y", "z"] {
            cols.push(format!("h{s}_{axis}"));
        }
        for axis in ["x", "y", "z"] {
            cols.push(format!("hhat{s}_{axis}"));
        }
        for k in ["1", "2"] {
            cols.push(format!("chi{s}_{k}"));
        }
        for k in ["1", "2"] {
            cols.push(format!("chihat{s}_{k}"));
        }
        for axis in ["x", "y", "z"] {
            cols.push(format!("err_h{s}_{axis}"));
        }
        for axis in ["x", "y", "z"] {
            cols.push(format!("err_chi{s}_{axis}"));
        }
    }
    for axis in ["x", "y", "z"] {
        cols.push(format!("nu_{axis}"));
    }
    for axis in ["x", "y", "z"] {
        cols.push(format!("om_{axis}"));
    }
    for i in 0..num_lines {
        let s = suffix(i);
        cols.push(format!("sigma1_sq{s}"));
        cols.push(format!("sigma2_sq{s}"));
    }
    cols.join(",")
}

/// Render the full time-series CSV (header plus one row per sample).
pub fn time_series_csv(record: &RunRecord) -> String {
    let num_lines = record
        .samples
        .first()
        .map(|s| s.lines.len())
        .unwrap_or(0);
    let mut out = csv_header(num_lines);
    out.push('\n');
    for sample in &record.samples {
        let mut row: Vec<f64> = vec![sample.t];
        for line in &sample.lines {
            row.extend(line.h.iter());
            row.extend(line.h_hat.iter());
            row.extend(line.chi_free.iter());
            row.extend(line.chi_hat.iter());
            row.extend(line.err_h.iter());
            row.extend(line.err_chi.iter());
        }
        row.extend(sample.nu.iter());
        row.extend(sample.omega.iter());
        for line in &sample.lines {
            row.extend(line.sigma_sq.iter());
        }
        let mut first = true;
        for v in row {
            if !first {
                out.push(',');
            }
            first = false;
            write!(out, "{v}").expect("string write cannot fail");
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct LineSummaryJson {
    pub axis: crate::geometry::Axis,
    pub final_error: f64,
    pub initial_error: f64,
    pub convergence_time: Option<f64>,
    pub max_h_dot: f64,
    pub max_d_norm_drift: f64,
    pub max_h_norm_drift: f64,
    pub max_orthogonality_drift: f64,
    pub axis_switched: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummaryJson {
    pub config: RunConfig,
    pub seed: u64,
    pub steps: usize,
    pub aborted: Option<String>,
    pub final_sigma_sq: [f64; 2],
    pub lines: Vec<LineSummaryJson>,
}

/// Render the summary JSON (pretty-printed, trailing newline).
pub fn summary_json(record: &RunRecord, config: &RunConfig) -> String {
    let doc = RunSummaryJson {
        config: config.clone(),
        seed: config.seed,
        steps: record.summary.steps,
        aborted: record.summary.aborted.clone(),
        final_sigma_sq: record.summary.final_sigma_sq_agg,
        lines: record
            .summary
            .lines
            .iter()
            .map(|l| LineSummaryJson {
                axis: l.axis,
                final_error: l.final_error,
                initial_error: l.initial_error,
                convergence_time: l.convergence_time,
                max_h_dot: l.max_h_dot,
                max_d_norm_drift: l.max_d_norm_drift,
                max_h_norm_drift: l.max_h_norm_drift,
                max_orthogonality_drift: l.max_orthogonality_drift,
                axis_switched: l.axis_switched,
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("summary is serializable");
    s.push('\n');
    s
}

/// Render the batch-statistics JSON for a Monte-Carlo sweep.
pub fn monte_carlo_json(summary: &MonteCarloSummary, config: &RunConfig) -> String {
    #[derive(Serialize)]
    struct Doc<'a> {
        config: &'a RunConfig,
        #[serde(flatten)]
        stats: &'a MonteCarloSummary,
    }
    let mut s = serde_json::to_string_pretty(&Doc {
        config,
        stats: summary,
    })
    .expect("summary is serializable");
    s.push('\n');
    s
}

fn two_column_csv(header: &str, ts: impl Iterator<Item = (f64, f64)>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for (t, v) in ts {
        writeln!(out, "{t},{v}").expect("string write cannot fail");
    }
    out
}

/// Write the run artifacts under `dir`: `timeseries.csv`, `summary.json` and,
/// when `plot_data` is set, one small CSV per result panel (estimation error,
/// eigenvalues of ΩΩᵀ, velocity norms, estimation energy).
pub fn write_run(
    dir: &Path,
    record: &RunRecord,
    config: &RunConfig,
    plot_data: bool,
) -> Result<(), Error> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("timeseries.csv"), time_series_csv(record))?;
    std::fs::write(dir.join("summary.json"), summary_json(record, config))?;
    if plot_data {
        let times: Vec<f64> = record.samples.iter().map(|s| s.t).collect();
        for (i, errs) in record.errors.iter().enumerate() {
            let name = if record.errors.len() > 1 {
                format!("plot_error_line{}.csv", i + 1)
            } else {
                "plot_error.csv".to_string()
            };
            std::fs::write(
                dir.join(name),
                two_column_csv("t,plucker_error", times.iter().copied().zip(errs.iter().copied())),
            )?;
        }
        for (i, trace) in record.lyapunov.iter().enumerate() {
            let name = if record.lyapunov.len() > 1 {
                format!("plot_energy_line{}.csv", i + 1)
            } else {
                "plot_energy.csv".to_string()
            };
            std::fs::write(
                dir.join(name),
                two_column_csv("t,energy", times.iter().copied().zip(trace.iter().copied())),
            )?;
        }
        let mut eig = String::from("t,sigma1_sq,sigma2_sq\n");
        let mut vel = String::from("t,nu_norm,om_norm\n");
        for s in &record.samples {
            writeln!(eig, "{},{},{}", s.t, s.sigma_sq_agg[0], s.sigma_sq_agg[1])
                .expect("string write cannot fail");
            writeln!(vel, "{},{},{}", s.t, s.nu.norm(), s.omega.norm())
                .expect("string write cannot fail");
        }
        std::fs::write(dir.join("plot_eigenvalues.csv"), eig)?;
        std::fs::write(dir.join("plot_velocity.csv"), vel)?;
    }
    Ok(())
}
