//! Experiment plumbing: configuration files, per-run outputs, parameter
//! sweeps and sliding-window reports.

pub mod cli;
pub mod config;
pub mod output;
pub mod report;
pub mod sweep;

use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::engine::EngineError;
use crate::realism::RealismError;

pub use config::{
    config_digest, load_experiment, load_run_config, parse_experiment, parse_run_config,
    ExperimentSpec,
};

/// Decimal places used for every floating-point output.
pub const FLOAT_DECIMALS: usize = 6;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Realism(#[from] RealismError),
    #[error("{path}: {message}")]
    Data { path: PathBuf, message: String },
}

impl HarnessError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }
}

/// Sample mean and sample standard deviation (0 for a single value).
///
/// Values are summed in sorted order so the result does not depend on the
/// order runs finished in.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let mut dev: Vec<f64> = v.iter().map(|x| (x - mean) * (x - mean)).collect();
    dev.sort_by(f64::total_cmp);
    (mean, (dev.iter().sum::<f64>() / (n - 1.0)).sqrt())
}

pub(crate) fn fmt_f(x: f64) -> String {
    format!("{x:.prec$}", prec = FLOAT_DECIMALS)
}
