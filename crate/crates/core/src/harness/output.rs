//! Per-run output files.
//!
//! | file             | content                                              |
//! |------------------|------------------------------------------------------|
//! | `steps.csv`      | `step,generated,passed_sw,novel,inserted`, one row per step |
//! | `summary.csv`    | one row of run totals with realism and novelty        |
//! | `population.smi` | final population, `SMILES<TAB>of_score`               |
//! | `policy.tsv`     | context table dump (policy mode only)                 |
//! | `config.toml`    | fully expanded configuration                          |
//!
//! Every file except `config.toml` starts with a `#` line naming the schema
//! version, config digest and seed.

use std::fs;
use std::io::{self, BufRead, Write};
use std::path::Path;

use super::config::{config_digest, to_toml};
use super::{fmt_f, HarnessError};
use crate::engine::{novelty, realism, Population, RunConfig, RunOutcome, StepRecord};
use crate::policy::PolicyTable;

pub const STEPS_HEADER: &str = "step,generated,passed_sw,novel,inserted";
pub const SUMMARY_HEADER: &str = "seed,steps,generated,passed_sw,novel,inserted,realism,novelty";

/// Provenance line shared by all outputs of one run.
pub fn meta_line(schema: &str, digest: &str, seed: u64) -> String {
    format!("# schema={schema} config={digest} seed={seed}")
}

pub fn write_steps<W: Write>(
    mut w: W,
    records: &[StepRecord],
    digest: &str,
    seed: u64,
) -> io::Result<()> {
    writeln!(w, "{}", meta_line("steps/v1", digest, seed))?;
    writeln!(w, "{STEPS_HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.step, r.generated, r.passed_sw, r.novel, r.inserted
        )?;
    }
    Ok(())
}

/// Run totals: `(generated, passed_sw, novel, inserted)`.
pub fn totals(records: &[StepRecord]) -> (u64, u64, u64, u64) {
    records.iter().fold((0, 0, 0, 0), |(g, p, n, i), r| {
        (
            g + r.generated,
            p + r.passed_sw,
            n + r.novel,
            i + r.inserted,
        )
    })
}

pub fn write_summary<W: Write>(
    mut w: W,
    records: &[StepRecord],
    digest: &str,
    seed: u64,
) -> io::Result<()> {
    let (g, p, n, i) = totals(records);
    writeln!(w, "{}", meta_line("summary/v1", digest, seed))?;
    writeln!(w, "{SUMMARY_HEADER}")?;
    writeln!(
        w,
        "{seed},{},{g},{p},{n},{i},{},{}",
        records.len(),
        fmt_f(realism(records)),
        fmt_f(novelty(records))
    )
}

pub fn write_population<W: Write>(
    mut w: W,
    pop: &Population,
    digest: &str,
    seed: u64,
) -> io::Result<()> {
    writeln!(w, "{}", meta_line("population/v1", digest, seed))?;
    for m in pop.members() {
        writeln!(w, "{}\t{}", m.key, fmt_f(m.of_score))?;
    }
    Ok(())
}

pub fn write_policy<W: Write>(
    mut w: W,
    table: &PolicyTable,
    digest: &str,
    seed: u64,
) -> io::Result<()> {
    writeln!(w, "{}", meta_line("policy/v1", digest, seed))?;
    table.write_dump(w)
}

fn write_file(
    path: &Path,
    f: impl FnOnce(&mut io::BufWriter<fs::File>) -> io::Result<()>,
) -> Result<(), HarnessError> {
    let file = fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
    let mut w = io::BufWriter::new(file);
    f(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| HarnessError::io(path, e))
}

/// Writes all output files of one run into `dir`, creating it if needed.
pub fn write_run_dir(
    dir: &Path,
    cfg: &RunConfig,
    outcome: &RunOutcome,
) -> Result<(), HarnessError> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let digest = config_digest(cfg);
    let seed = cfg.seed;
    write_file(&dir.join("config.toml"), |w| {
        w.write_all(to_toml(cfg).as_bytes())
    })?;
    write_file(&dir.join("steps.csv"), |w| {
        write_steps(w, &outcome.records, &digest, seed)
    })?;
    write_file(&dir.join("summary.csv"), |w| {
        write_summary(w, &outcome.records, &digest, seed)
    })?;
    write_file(&dir.join("population.smi"), |w| {
        write_population(w, &outcome.population, &digest, seed)
    })?;
    if let Some(t) = &outcome.table {
        write_file(&dir.join("policy.tsv"), |w| {
            write_policy(w, t, &digest, seed)
        })?;
    }
    Ok(())
}

/// Parsed `steps.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepsFile {
    pub digest: String,
    pub seed: u64,
    pub records: Vec<StepRecord>,
}

pub fn read_steps<R: BufRead>(r: R) -> Result<StepsFile, String> {
    let mut lines = r.lines();
    let mut next = || lines.next().transpose().map_err(|e| e.to_string());
    let meta = next()?.ok_or("empty file")?;
    let mut digest = None;
    let mut seed = None;
    for field in meta.trim_start_matches('#').split_whitespace() {
        match field.split_once('=') {
            Some(("schema", s)) if s != "steps/v1" => {
                return Err(format!("unsupported schema {s}"))
            }
            Some(("config", d)) => digest = Some(d.to_string()),
            Some(("seed", s)) => seed = Some(s.parse::<u64>().map_err(|e| format!("seed: {e}"))?),
            _ => {}
        }
    }
    if !meta.starts_with("# schema=steps/v1") {
        return Err("missing `# schema=steps/v1` line".into());
    }
    if next()?.as_deref() != Some(STEPS_HEADER) {
        return Err(format!("expected header `{STEPS_HEADER}`"));
    }
    let mut records = Vec::new();
    let mut lineno = 2;
    while let Some(line) = next()? {
        lineno += 1;
        if line.is_empty() {
            continue;
        }
        let v: Vec<u64> = line
            .split(',')
            .map(|f| f.parse::<u64>())
            .collect::<Result<_, _>>()
            .map_err(|e| format!("line {lineno}: {e}"))?;
        let [step, generated, passed_sw, novel, inserted] = v[..] else {
            return Err(format!("line {lineno}: expected 5 fields"));
        };
        records.push(StepRecord {
            step,
            generated,
            passed_sw,
            novel,
            inserted,
        });
    }
    Ok(StepsFile {
        digest: digest.ok_or("missing config digest")?,
        seed: seed.ok_or("missing seed")?,
        records,
    })
}

pub fn read_steps_file(path: &Path) -> Result<StepsFile, HarnessError> {
    let f = fs::File::open(path).map_err(|e| HarnessError::io(path, e))?;
    read_steps(io::BufReader::new(f)).map_err(|message| HarnessError::Data {
        path: path.to_path_buf(),
        message,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn recs() -> Vec<StepRecord> {
        vec![
            StepRecord {
                step: 1,
                generated: 4,
                passed_sw: 1,
                novel: 4,
                inserted: 1,
            },
            StepRecord {
                step: 2,
                generated: 3,
                passed_sw: 2,
                novel: 2,
                inserted: 2,
            },
        ]
    }

    #[test]
    fn steps_golden() {
        let mut out = Vec::new();
        write_steps(&mut out, &recs(), "00ff", 3).unwrap();
        assert_eq!(
            String::from_utf8(out.clone()).unwrap(),
            "# schema=steps/v1 config=00ff seed=3\nstep,generated,passed_sw,novel,inserted\n1,4,1,4,1\n2,3,2,2,2\n"
        );
        let back = read_steps(&out[..]).unwrap();
        assert_eq!(back.records, recs());
        assert_eq!((back.digest.as_str(), back.seed), ("00ff", 3));
    }

    #[test]
    fn summary_golden() {
        let mut out = Vec::new();
        write_summary(&mut out, &recs(), "ab", 9).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "# schema=summary/v1 config=ab seed=9\n\
             seed,steps,generated,passed_sw,novel,inserted,realism,novelty\n\
             9,2,7,3,6,3,0.428571,0.857143\n"
        );
    }

    #[test]
    fn malformed_steps() {
        assert!(read_steps(&b""[..]).is_err());
        assert!(read_steps(&b"# schema=steps/v1 config=a seed=1\nwrong\n"[..]).is_err());
        assert!(read_steps(&b"# schema=steps/v1 config=a seed=1\nstep,generated,passed_sw,novel,inserted\n1,2\n"[..]).is_err());
        assert!(read_steps(&b"# schema=steps/v2 config=a seed=1\n"[..]).is_err());
    }
}
