mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn molevo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_molevo"))
        .args(args)
        .env_remove("MOLEVO_REGISTRY")
        .output()
        .unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn build_corpus_registry(dir: &Path) -> std::path::PathBuf {
    let reg = dir.join("reg.bin");
    let corpus = common::corpus_path();
    let out = molevo(&["build-ref", "--input", p(&corpus), "--output", p(&reg)]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    reg
}

#[test]
fn build_ref_single_molecule() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("one.smi");
    fs::write(&input, "C\n").unwrap();
    let a = dir.path().join("a.bin");
    let b = dir.path().join("b.bin");
    let out = molevo(&[
        "build-ref",
        "--input",
        p(&input),
        "--output",
        p(&a),
        "--max-diameter",
        "0",
    ]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("molecules: 1"));
    assert!(stdout.contains("radius 0: 1 ids"));
    molevo(&[
        "build-ref",
        "--input",
        p(&input),
        "--output",
        p(&b),
        "--max-diameter",
        "0",
    ]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn build_ref_rejects_empty_and_mostly_broken_input() {
    let dir = TempDir::new().unwrap();
    let empty = dir.path().join("empty.smi");
    fs::write(&empty, "").unwrap();
    let out_path = dir.path().join("reg.bin");
    let out = molevo(&["build-ref", "--input", p(&empty), "--output", p(&out_path)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out_path.exists());

    let broken = dir.path().join("broken.smi");
    fs::write(&broken, "C\nC1CC\nXx\n").unwrap();
    let out = molevo(&["build-ref", "--input", p(&broken), "--output", p(&out_path)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out_path.exists());
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(molevo(&[]).status.code(), Some(1));
    assert_eq!(molevo(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        molevo(&["build-ref", "--input", "x"]).status.code(),
        Some(1)
    );
    assert_eq!(
        molevo(&[
            "build-ref",
            "--input",
            "x",
            "--output",
            "y",
            "--max-diameter",
            "3"
        ])
        .status
        .code(),
        Some(1)
    );
    assert_eq!(molevo(&["--help"]).status.code(), Some(0));
}

#[test]
fn run_writes_all_outputs_reproducibly() {
    let dir = TempDir::new().unwrap();
    let reg = build_corpus_registry(dir.path());
    let cfg = dir.path().join("cfg.toml");
    fs::write(&cfg, "seed = 4\nsteps = 1\n").unwrap();
    let run = |name: &str, extra: &[&str]| {
        let out_dir = dir.path().join(name);
        let mut args = vec![
            "run",
            "--config",
            p(&cfg),
            "--registry",
            p(&reg),
            "--out",
            p(&out_dir),
        ];
        args.extend_from_slice(extra);
        let out = molevo(&args);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        out_dir
    };
    let a = run("a", &[]);
    let b = run("b", &[]);
    let steps = fs::read_to_string(a.join("steps.csv")).unwrap();
    let lines: Vec<_> = steps.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("# schema=steps/v1 config="));
    assert!(lines[0].ends_with(" seed=4"));
    assert_eq!(lines[1], "step,generated,passed_sw,novel,inserted");
    for f in [
        "steps.csv",
        "summary.csv",
        "population.smi",
        "policy.tsv",
        "config.toml",
    ] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }

    let c = run("c", &["--steps", "30", "--mode", "uniform", "--seed", "9"]);
    assert!(!c.join("policy.tsv").exists());
    let summary = fs::read_to_string(c.join("summary.csv")).unwrap();
    let row: Vec<&str> = summary.lines().nth(2).unwrap().split(',').collect();
    assert_eq!(row[0], "9");
    assert_eq!(row[1], "30");
    let realism: f64 = row[6].parse().unwrap();
    let novelty: f64 = row[7].parse().unwrap();
    assert!(realism > 0.0 && realism < 1.0);
    assert!(novelty > 0.0 && novelty < 1.0);
}

#[test]
fn registry_comes_from_the_environment() {
    let dir = TempDir::new().unwrap();
    let reg = build_corpus_registry(dir.path());
    let cfg = dir.path().join("cfg.toml");
    fs::write(&cfg, "steps = 2\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_molevo"))
        .args([
            "run",
            "--config",
            p(&cfg),
            "--out",
            p(&dir.path().join("o")),
        ])
        .env("MOLEVO_REGISTRY", &reg)
        .output()
        .unwrap();
    assert!(out.status.success());
}

#[test]
fn config_errors_name_the_field() {
    let dir = TempDir::new().unwrap();
    let reg = build_corpus_registry(dir.path());
    let cfg = dir.path().join("bad.toml");
    fs::write(
        &cfg,
        "steps = 5\nschedule = { kind = \"power_law\", eps_floor = \"low\", alpha = 0.3 }\n",
    )
    .unwrap();
    let out = molevo(&[
        "run",
        "--config",
        p(&cfg),
        "--registry",
        p(&reg),
        "--out",
        p(&dir.path().join("o")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("schedule.eps_floor"), "{err}");

    let missing = molevo(&[
        "run",
        "--config",
        p(&cfg),
        "--registry",
        "/nonexistent",
        "--out",
        "x",
    ]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn sweep_and_report() {
    let dir = TempDir::new().unwrap();
    let reg = build_corpus_registry(dir.path());
    let spec = dir.path().join("spec.toml");
    fs::write(
        &spec,
        "runs = 2\nbase_seed = 3\n[grid]\ncontext_diameter = [0, 2]\neps_floor = [0.1, 0.2, 0.3]\n[base]\nsteps = 12\n",
    )
    .unwrap();
    let out_dir = dir.path().join("sweep");
    let out = molevo(&[
        "sweep",
        "--spec",
        p(&spec),
        "--registry",
        p(&reg),
        "--out",
        p(&out_dir),
        "--jobs",
        "2",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let table = fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    let rows: Vec<_> = table.lines().skip(2).collect();
    assert_eq!(rows.len(), 7);
    assert!(rows[0].starts_with("baseline,"));
    assert_eq!(rows.iter().filter(|r| r.starts_with("rl,")).count(), 6);

    // aggregate equals a direct recomputation from the per-run files
    let runs = fs::read_to_string(out_dir.join("runs.csv")).unwrap();
    let base: Vec<f64> = runs
        .lines()
        .skip(2)
        .filter(|l| l.starts_with("baseline,"))
        .map(|l| l.split(',').nth(3).unwrap().parse().unwrap())
        .collect();
    assert_eq!(base.len(), 2);
    let mean = (base[0] + base[1]) / 2.0;
    let std = ((base[0] - mean).powi(2) + (base[1] - mean).powi(2)).sqrt();
    let fields: Vec<&str> = rows[0].split(',').collect();
    assert!((fields[5].parse::<f64>().unwrap() - mean).abs() < 2e-6);
    assert!((fields[6].parse::<f64>().unwrap() - std).abs() < 2e-6);

    let run_dirs: Vec<_> = (3..5)
        .map(|s| out_dir.join("baseline").join(format!("seed-{s}")))
        .collect();
    let series = dir.path().join("series.csv");
    let out = molevo(&[
        "report",
        "--window",
        "4",
        "--out",
        p(&series),
        p(&run_dirs[0]),
        p(&run_dirs[1]),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = fs::read_to_string(&series).unwrap();
    assert_eq!(text.lines().count(), 2 + 12 - 4 + 1);

    let short = dir.path().join("short");
    let cfg = dir.path().join("cfg.toml");
    fs::write(&cfg, "steps = 5\n").unwrap();
    molevo(&[
        "run",
        "--config",
        p(&cfg),
        "--registry",
        p(&reg),
        "--out",
        p(&short),
    ]);
    let out = molevo(&["report", p(&run_dirs[0]), p(&short), "--window", "2"]);
    assert_eq!(out.status.code(), Some(2));
}
