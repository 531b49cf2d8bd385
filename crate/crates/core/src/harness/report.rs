//! Sliding-window series across runs, ready for plotting.

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use super::output::read_steps_file;
use super::{fmt_f, mean_std, HarnessError};
use crate::engine::{sliding_window, StepRecord};

pub const WINDOW_HEADER: &str =
    "window,start_step,end_step,realism_mean,realism_std,novelty_mean,novelty_std";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowPoint {
    /// 0-based window index.
    pub index: usize,
    pub start_step: u64,
    pub end_step: u64,
    pub realism_mean: f64,
    pub realism_std: f64,
    pub novelty_mean: f64,
    pub novelty_std: f64,
}

/// Per-window mean and sample standard deviation across runs. All runs must
/// have the same number of steps.
pub fn window_series(
    runs: &[Vec<StepRecord>],
    window: usize,
) -> Result<Vec<WindowPoint>, HarnessError> {
    let Some(first) = runs.first() else {
        return Err(HarnessError::Invalid("no runs to report".into()));
    };
    if window == 0 {
        return Err(HarnessError::Invalid("window must be >= 1".into()));
    }
    if let Some(r) = runs.iter().find(|r| r.len() != first.len()) {
        return Err(HarnessError::Invalid(format!(
            "mismatched step counts across runs: {} vs {}",
            first.len(),
            r.len()
        )));
    }
    if first.len() < window {
        return Err(HarnessError::Invalid(format!(
            "window {window} longer than the {} recorded steps",
            first.len()
        )));
    }
    let per_run: Vec<Vec<(f64, f64)>> = runs.iter().map(|r| sliding_window(r, window)).collect();
    Ok((0..per_run[0].len())
        .map(|i| {
            let re: Vec<f64> = per_run.iter().map(|s| s[i].0).collect();
            let no: Vec<f64> = per_run.iter().map(|s| s[i].1).collect();
            let (realism_mean, realism_std) = mean_std(&re);
            let (novelty_mean, novelty_std) = mean_std(&no);
            WindowPoint {
                index: i,
                start_step: first[i].step,
                end_step: first[i + window - 1].step,
                realism_mean,
                realism_std,
                novelty_mean,
                novelty_std,
            }
        })
        .collect())
}

pub fn write_series<W: Write>(
    mut w: W,
    points: &[WindowPoint],
    window: usize,
    runs: usize,
) -> io::Result<()> {
    writeln!(w, "# schema=window/v1 window={window} runs={runs}")?;
    writeln!(w, "{WINDOW_HEADER}")?;
    for p in points {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            p.index,
            p.start_step,
            p.end_step,
            fmt_f(p.realism_mean),
            fmt_f(p.realism_std),
            fmt_f(p.novelty_mean),
            fmt_f(p.novelty_std)
        )?;
    }
    Ok(())
}

/// Reads `steps.csv` from each run directory.
pub fn load_runs(dirs: &[PathBuf]) -> Result<Vec<Vec<StepRecord>>, HarnessError> {
    dirs.iter()
        .map(|d| read_steps_file(&steps_path(d)).map(|f| f.records))
        .collect()
}

fn steps_path(dir: &Path) -> PathBuf {
    if dir.is_file() {
        dir.to_path_buf()
    } else {
        dir.join("steps.csv")
    }
}
