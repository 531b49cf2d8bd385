//! TOML run configurations and experiment grids.
//!
//! A run configuration is a flat table of `RunConfig` fields, every one
//! optional:
//!
//! ```toml
//! seed = 7
//! steps = 500
//! selection_mode = "policy"        # or "uniform"
//! context_diameter = 2
//! schedule = { kind = "power_law", eps_floor = 0.1, alpha = 0.35 }
//! filter_diameters = [0, 2, 4]
//! ```
//!
//! An experiment adds a grid and a seed list around a shared base config:
//!
//! ```toml
//! runs = 10
//! base_seed = 1
//! baseline_included = true
//!
//! [grid]
//! context_diameter = [0, 2]
//! eps_floor = [0.1, 0.2, 0.3]
//! schedules = [{ kind = "power_law", alpha = 0.35 }]
//!
//! [base]
//! steps = 500
//! ```

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::HarnessError;
use crate::engine::{RunConfig, SelectionMode};
use crate::fingerprint::Diameter;
use crate::policy::EpsilonSchedule;

fn from_toml<T: DeserializeOwned>(text: &str) -> Result<T, HarnessError> {
    let de = toml::Deserializer::parse(text).map_err(|e| HarnessError::Config {
        path: ".".into(),
        message: e.to_string().trim().to_string(),
    })?;
    serde_path_to_error::deserialize(de).map_err(|e| HarnessError::Config {
        path: e.path().to_string(),
        message: e.into_inner().message().trim().to_string(),
    })
}

fn read(path: &Path) -> Result<String, HarnessError> {
    fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))
}

pub fn parse_run_config(text: &str) -> Result<RunConfig, HarnessError> {
    let cfg: RunConfig = from_toml(text)?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_run_config(path: &Path) -> Result<RunConfig, HarnessError> {
    parse_run_config(&read(path)?)
}

/// The configuration as TOML, with every field spelled out.
pub fn to_toml(cfg: &RunConfig) -> String {
    toml::to_string(cfg).expect("run configs always serialize")
}

/// Short SHA-256 of the fully expanded configuration.
pub fn config_digest(cfg: &RunConfig) -> String {
    let h = Sha256::digest(to_toml(cfg).as_bytes());
    hex::encode(&h[..8])
}

/// Schedule shape in a grid; the floor comes from the `eps_floor` axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleShape {
    Constant,
    Greedy {
        lambda: f64,
        #[serde(default = "one")]
        eps0: f64,
    },
    PowerLaw {
        alpha: f64,
        #[serde(default = "one")]
        eps0: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl ScheduleShape {
    pub fn with_floor(self, eps_floor: f64) -> EpsilonSchedule {
        match self {
            ScheduleShape::Constant => EpsilonSchedule::Constant { eps_floor },
            ScheduleShape::Greedy { lambda, eps0 } => EpsilonSchedule::Greedy {
                eps_floor,
                eps0,
                lambda,
            },
            ScheduleShape::PowerLaw { alpha, eps0 } => EpsilonSchedule::PowerLaw {
                eps_floor,
                eps0,
                alpha,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grid {
    pub context_diameter: Vec<Diameter>,
    pub eps_floor: Vec<f64>,
    pub schedules: Vec<ScheduleShape>,
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            context_diameter: vec![Diameter::D0, Diameter::D2],
            eps_floor: vec![0.1, 0.2, 0.3],
            schedules: vec![ScheduleShape::PowerLaw {
                alpha: 0.35,
                eps0: 1.0,
            }],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub runs: usize,
    /// Explicit seeds; when absent, `base_seed + run_index`.
    pub seeds: Option<Vec<u64>>,
    pub base_seed: u64,
    pub baseline_included: bool,
    pub grid: Grid,
    pub base: RunConfig,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            runs: 10,
            seeds: None,
            base_seed: 1,
            baseline_included: true,
            grid: Grid::default(),
            base: RunConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Baseline,
    Rl,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Baseline => "baseline",
            Method::Rl => "rl",
        }
    }
}

/// One row of a sweep: a configuration run under every seed.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigPoint {
    pub method: Method,
    /// Seed-free configuration; `seed` is overwritten per run.
    pub config: RunConfig,
}

impl ConfigPoint {
    /// Directory-safe label, e.g. `rl_ecfp2_eps0.1_power_law_alpha0.35`.
    pub fn label(&self) -> String {
        match self.method {
            Method::Baseline => "baseline".to_string(),
            Method::Rl => {
                let c = &self.config;
                let shape = match c.schedule {
                    EpsilonSchedule::Constant { .. } => "constant".to_string(),
                    EpsilonSchedule::Greedy { lambda, .. } => format!("greedy_lambda{lambda}"),
                    EpsilonSchedule::PowerLaw { alpha, .. } => format!("power_law_alpha{alpha}"),
                };
                format!(
                    "rl_ecfp{}_eps{}_{}",
                    c.context_diameter.value(),
                    c.schedule.eps_floor(),
                    shape
                )
            }
        }
    }

    pub fn run_config(&self, seed: u64) -> RunConfig {
        RunConfig {
            seed,
            ..self.config.clone()
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Invalid(m));
        if self.runs == 0 {
            return bad("runs must be >= 1".into());
        }
        if let Some(s) = &self.seeds {
            if s.len() != self.runs {
                return bad(format!(
                    "seeds lists {} values but runs = {}",
                    s.len(),
                    self.runs
                ));
            }
        }
        if self.grid.context_diameter.is_empty()
            || self.grid.eps_floor.is_empty()
            || self.grid.schedules.is_empty()
        {
            return bad("grid axes must not be empty".into());
        }
        for p in self.points() {
            p.config.validate()?;
        }
        Ok(())
    }

    pub fn seeds(&self) -> Vec<u64> {
        match &self.seeds {
            Some(s) => s.clone(),
            None => (0..self.runs as u64).map(|i| self.base_seed + i).collect(),
        }
    }

    /// Baseline first (if included), then diameter × floor × schedule.
    pub fn points(&self) -> Vec<ConfigPoint> {
        let mut out = Vec::new();
        if self.baseline_included {
            out.push(ConfigPoint {
                method: Method::Baseline,
                config: RunConfig {
                    seed: 0,
                    selection_mode: SelectionMode::Uniform,
                    ..self.base.clone()
                },
            });
        }
        for &d in &self.grid.context_diameter {
            for &eps in &self.grid.eps_floor {
                for &shape in &self.grid.schedules {
                    out.push(ConfigPoint {
                        method: Method::Rl,
                        config: RunConfig {
                            seed: 0,
                            selection_mode: SelectionMode::Policy,
                            context_diameter: d,
                            schedule: shape.with_floor(eps),
                            ..self.base.clone()
                        },
                    });
                }
            }
        }
        out
    }
}

pub fn parse_experiment(text: &str) -> Result<ExperimentSpec, HarnessError> {
    let spec: ExperimentSpec = from_toml(text)?;
    spec.validate()?;
    Ok(spec)
}

pub fn load_experiment(path: &Path) -> Result<ExperimentSpec, HarnessError> {
    parse_experiment(&read(path)?)
}
