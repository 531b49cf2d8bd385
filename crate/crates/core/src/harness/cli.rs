//! Command-line interface.
//!
//! Exit codes: 0 on success, 1 for usage errors, 2 for data errors
//! (unreadable or malformed inputs, failed runs).

use std::ffi::OsString;
use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use super::config::{config_digest, load_experiment, load_run_config};
use super::output::write_run_dir;
use super::report::{load_runs, window_series, write_series};
use super::sweep::{run_sweep, write_runs_table, write_sweep_table};
use super::HarnessError;
use crate::engine::{self, SelectionMode};
use crate::fingerprint::Diameter;
use crate::realism::{build_registry_from_reader, ReferenceRegistry};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

/// Largest tolerated fraction of unparseable corpus lines.
const MAX_SKIPPED_FRACTION: f64 = 0.5;

#[derive(Debug, Parser)]
#[command(
    name = "molevo",
    version,
    about = "Evolutionary molecular design with bandit-guided mutations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Uniform,
    Policy,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a reference registry from a SMILES corpus (one molecule per line).
    BuildRef {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Largest fingerprint diameter stored: 0, 2 or 4.
        #[arg(long, default_value_t = 4, value_parser = parse_diameter)]
        max_diameter: u8,
        /// Also write the identifier sets as text.
        #[arg(long)]
        text: Option<PathBuf>,
    },
    /// Run one seeded search and write its metrics.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, env = "MOLEVO_REGISTRY")]
        registry: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        steps: Option<u64>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        #[arg(long, value_parser = parse_diameter)]
        context_diameter: Option<u8>,
    },
    /// Run every configuration of an experiment grid under every seed.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, env = "MOLEVO_REGISTRY")]
        registry: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Sliding-window realism and novelty across run directories.
    Report {
        #[arg(required = true)]
        runs: Vec<PathBuf>,
        #[arg(long, default_value_t = 10)]
        window: usize,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_diameter(s: &str) -> Result<u8, String> {
    let v: u8 = s.parse().map_err(|e| format!("{e}"))?;
    Diameter::try_from(v)
        .map(u8::from)
        .map_err(|e| e.to_string())
}

/// Parses `args` (program name first) and runs the command; returns the
/// process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_DATA
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), HarnessError> {
    match cmd {
        Command::BuildRef {
            input,
            output,
            max_diameter,
            text,
        } => build_ref(&input, &output, max_diameter, text.as_deref()),
        Command::Run {
            config,
            registry,
            out,
            seed,
            steps,
            mode,
            context_diameter,
        } => {
            let mut cfg = load_run_config(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(s) = steps {
                cfg.steps = s;
            }
            if let Some(m) = mode {
                cfg.selection_mode = match m {
                    Mode::Uniform => SelectionMode::Uniform,
                    Mode::Policy => SelectionMode::Policy,
                };
            }
            if let Some(d) = context_diameter {
                cfg.context_diameter =
                    Diameter::try_from(d).expect("checked by the argument parser");
            }
            cfg.validate()?;
            let reg = load_registry(&registry)?;
            let outcome = engine::run(&cfg, &reg)?;
            write_run_dir(&out, &cfg, &outcome)?;
            println!(
                "config={} seed={} steps={} realism={} novelty={}",
                config_digest(&cfg),
                cfg.seed,
                outcome.records.len(),
                super::fmt_f(outcome.realism()),
                super::fmt_f(outcome.novelty())
            );
            Ok(())
        }
        Command::Sweep {
            spec,
            registry,
            out,
            jobs,
        } => {
            let spec = load_experiment(&spec)?;
            let reg = load_registry(&registry)?;
            fs::create_dir_all(&out).map_err(|e| HarnessError::io(&out, e))?;
            let rows = match jobs {
                Some(n) => rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| HarnessError::Invalid(e.to_string()))?
                    .install(|| run_sweep(&spec, &reg, Some(&out))),
                None => run_sweep(&spec, &reg, Some(&out)),
            };
            write_to(&out.join("sweep.csv"), |w| write_sweep_table(w, &rows))?;
            write_to(&out.join("runs.csv"), |w| write_runs_table(w, &rows))?;
            let stdout = io::stdout();
            write_sweep_table(stdout.lock(), &rows).map_err(|e| HarnessError::io("<stdout>", e))?;
            let failed: Vec<_> = rows
                .iter()
                .filter_map(|r| r.error.as_ref().map(|e| (r.point.label(), e)))
                .collect();
            for (label, e) in &failed {
                eprintln!("config {label} failed: {e}");
            }
            if failed.is_empty() {
                Ok(())
            } else {
                Err(HarnessError::Invalid(format!(
                    "{} configuration(s) failed",
                    failed.len()
                )))
            }
        }
        Command::Report { runs, window, out } => {
            let series = window_series(&load_runs(&runs)?, window)?;
            match out {
                Some(p) => write_to(&p, |w| write_series(w, &series, window, runs.len())),
                None => write_series(io::stdout().lock(), &series, window, runs.len())
                    .map_err(|e| HarnessError::io("<stdout>", e)),
            }
        }
    }
}

fn write_to(
    path: &Path,
    f: impl FnOnce(&mut io::BufWriter<fs::File>) -> io::Result<()>,
) -> Result<(), HarnessError> {
    let file = fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
    let mut w = io::BufWriter::new(file);
    f(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| HarnessError::io(path, e))
}

pub fn load_registry(path: &Path) -> Result<ReferenceRegistry, HarnessError> {
    let f = fs::File::open(path).map_err(|e| HarnessError::io(path, e))?;
    ReferenceRegistry::read_binary(BufReader::new(f)).map_err(|e| HarnessError::Data {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn build_ref(
    input: &Path,
    output: &Path,
    max_diameter: u8,
    text: Option<&Path>,
) -> Result<(), HarnessError> {
    let f = fs::File::open(input).map_err(|e| HarnessError::io(input, e))?;
    let d = Diameter::try_from(max_diameter).expect("checked by the argument parser");
    let report =
        build_registry_from_reader(BufReader::new(f), d).map_err(|e| HarnessError::Data {
            path: input.to_path_buf(),
            message: e.to_string(),
        })?;
    for (line, err) in report.skipped.iter().take(10) {
        eprintln!("{}:{line}: skipped: {err}", input.display());
    }
    if report.skipped.len() > 10 {
        eprintln!("... {} more skipped", report.skipped.len() - 10);
    }
    if report.skipped_fraction() > MAX_SKIPPED_FRACTION {
        return Err(HarnessError::Data {
            path: input.to_path_buf(),
            message: format!(
                "{} of {} lines unparseable; refusing to build",
                report.skipped.len(),
                report.lines
            ),
        });
    }
    let reg = report.registry;
    write_to(output, |w| reg.write_binary(w))?;
    if let Some(t) = text {
        write_to(t, |w| reg.write_text(w))?;
    }
    println!("molecules: {}", reg.molecule_count());
    for r in 0..=d.radius() {
        println!("radius {r}: {} ids", reg.ids(r).len());
    }
    println!("digest: {}", reg.corpus_digest_hex());
    Ok(())
}
