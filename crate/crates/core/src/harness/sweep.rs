//! Grid sweeps: every configuration point under every seed, aggregated into
//! one row per configuration.

use std::io::{self, Write};
use std::path::Path;

use rayon::prelude::*;

use super::config::{ConfigPoint, ExperimentSpec, Method};
use super::output::write_run_dir;
use super::{fmt_f, mean_std};
use crate::engine::run;
use crate::realism::ReferenceRegistry;

pub const SWEEP_HEADER: &str =
    "method,schedule,eps_floor,context_diameter,runs,realism_mean,realism_std,novelty_mean,novelty_std,status";
pub const RUNS_HEADER: &str = "config,method,seed,realism,novelty";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSummary {
    pub seed: u64,
    pub realism: f64,
    pub novelty: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigRow {
    pub point: ConfigPoint,
    /// Completed runs, in seed-list order.
    pub runs: Vec<RunSummary>,
    /// First failure; a failed run voids the row.
    pub error: Option<String>,
}

impl ConfigRow {
    pub fn realism(&self) -> (f64, f64) {
        mean_std(&self.runs.iter().map(|r| r.realism).collect::<Vec<_>>())
    }

    pub fn novelty(&self) -> (f64, f64) {
        mean_std(&self.runs.iter().map(|r| r.novelty).collect::<Vec<_>>())
    }

    pub fn ok(&self) -> bool {
        self.error.is_none()
    }
}

/// Runs the whole grid. With `out_dir`, each run's files go to
/// `out_dir/<config label>/seed-<seed>/`.
pub fn run_sweep(
    spec: &ExperimentSpec,
    reg: &ReferenceRegistry,
    out_dir: Option<&Path>,
) -> Vec<ConfigRow> {
    let points = spec.points();
    let seeds = spec.seeds();
    let jobs: Vec<(usize, u64)> = (0..points.len())
        .flat_map(|p| seeds.iter().map(move |&s| (p, s)))
        .collect();
    let results: Vec<Result<RunSummary, String>> = jobs
        .par_iter()
        .map(|&(p, seed)| {
            let cfg = points[p].run_config(seed);
            let outcome = run(&cfg, reg).map_err(|e| format!("seed {seed}: {e}"))?;
            if let Some(dir) = out_dir {
                let d = dir.join(points[p].label()).join(format!("seed-{seed}"));
                write_run_dir(&d, &cfg, &outcome).map_err(|e| format!("seed {seed}: {e}"))?;
            }
            Ok(RunSummary {
                seed,
                realism: outcome.realism(),
                novelty: outcome.novelty(),
            })
        })
        .collect();
    let mut rows: Vec<ConfigRow> = points
        .into_iter()
        .map(|point| ConfigRow {
            point,
            runs: Vec::new(),
            error: None,
        })
        .collect();
    for (&(p, _), r) in jobs.iter().zip(results) {
        match r {
            Ok(s) => rows[p].runs.push(s),
            Err(e) => {
                rows[p].error.get_or_insert(e);
            }
        }
    }
    for row in &mut rows {
        if row.error.is_some() {
            row.runs.clear();
        }
    }
    rows
}

pub fn write_sweep_table<W: Write>(mut w: W, rows: &[ConfigRow]) -> io::Result<()> {
    writeln!(w, "# schema=sweep/v1")?;
    writeln!(w, "{SWEEP_HEADER}")?;
    for row in rows {
        let c = &row.point.config;
        let (schedule, eps, diameter) = match row.point.method {
            Method::Baseline => ("-".to_string(), "-".to_string(), "-".to_string()),
            Method::Rl => (
                c.schedule.label(),
                c.schedule.eps_floor().to_string(),
                c.context_diameter.value().to_string(),
            ),
        };
        let schedule = format!("\"{schedule}\"");
        match &row.error {
            None => {
                let (rm, rs) = row.realism();
                let (nm, ns) = row.novelty();
                writeln!(
                    w,
                    "{},{schedule},{eps},{diameter},{},{},{},{},{},ok",
                    row.point.method.name(),
                    row.runs.len(),
                    fmt_f(rm),
                    fmt_f(rs),
                    fmt_f(nm),
                    fmt_f(ns)
                )?;
            }
            Some(e) => {
                let e = e.replace('"', "'");
                writeln!(
                    w,
                    "{},{schedule},{eps},{diameter},0,,,,,\"failed: {e}\"",
                    row.point.method.name()
                )?;
            }
        }
    }
    Ok(())
}

/// Per-run summaries, the hand-off point for external statistics.
pub fn write_runs_table<W: Write>(mut w: W, rows: &[ConfigRow]) -> io::Result<()> {
    writeln!(w, "# schema=runs/v1")?;
    writeln!(w, "{RUNS_HEADER}")?;
    for row in rows {
        for r in &row.runs {
            writeln!(
                w,
                "{},{},{},{},{}",
                row.point.label(),
                row.point.method.name(),
                r.seed,
                fmt_f(r.realism),
                fmt_f(r.novelty)
            )?;
        }
    }
    Ok(())
}
