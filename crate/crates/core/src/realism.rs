//! Reference environment registry and the Silly Walks realism score: the
//! fraction of a molecule's atom environments never observed in a reference
//! corpus.

use std::io::{self, BufRead, Read, Write};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::fingerprint::{ecfp, Diameter, EcfpId, FingerprintSet};
use crate::molgraph::MolecularGraph;
use crate::smiles::{self, SmilesError};

const MAGIC: &[u8; 8] = b"MOLEVREG";
pub const REGISTRY_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum RealismError {
    #[error("corpus contains no parseable molecule")]
    EmptyCorpus,
    #[error("diameter {0} is not covered by the registry")]
    DiameterNotCovered(Diameter),
    #[error("no filter diameters selected")]
    NoDiameters,
    #[error("malformed registry file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReferenceRegistry {
    max_diameter: Diameter,
    /// Sorted distinct identifiers for each radius `0..=max_diameter.radius()`.
    sets: Vec<Vec<EcfpId>>,
    molecule_count: u64,
    corpus_digest: [u8; 32],
}

/// Outcome of a registry build, including the lines that failed to parse.
#[derive(Debug)]
pub struct BuildReport {
    pub registry: ReferenceRegistry,
    pub lines: usize,
    pub skipped: Vec<(usize, SmilesError)>,
}

impl BuildReport {
    pub fn skipped_fraction(&self) -> f64 {
        if self.lines == 0 {
            0.0
        } else {
            self.skipped.len() as f64 / self.lines as f64
        }
    }
}

/// Streams SMILES entries `(line number, text)` into a registry.
pub fn build_registry<I>(corpus: I, max_diameter: Diameter) -> Result<BuildReport, RealismError>
where
    I: IntoIterator<Item = io::Result<(usize, String)>>,
{
    let mut sets: Vec<Vec<EcfpId>> = vec![Vec::new(); max_diameter.radius() + 1];
    let mut hasher = Sha256::new();
    let mut molecule_count = 0u64;
    let mut lines = 0usize;
    let mut skipped = Vec::new();
    for entry in corpus {
        let (line, text) = entry?;
        lines += 1;
        hasher.update(text.as_bytes());
        hasher.update(b"\n");
        match smiles::parse(&text) {
            Ok(g) => {
                molecule_count += 1;
                let fp = ecfp(&g, max_diameter);
                for (r, set) in sets.iter_mut().enumerate() {
                    set.extend_from_slice(fp.at_radius(r));
                }
            }
            Err(e) => skipped.push((line, e)),
        }
    }
    if molecule_count == 0 {
        return Err(RealismError::EmptyCorpus);
    }
    for set in &mut sets {
        set.sort_unstable();
        set.dedup();
    }
    Ok(BuildReport {
        registry: ReferenceRegistry {
            max_diameter,
            sets,
            molecule_count,
            corpus_digest: hasher.finalize().into(),
        },
        lines,
        skipped,
    })
}

/// Builds from a SMILES-per-line reader (`#` comments and blanks ignored).
pub fn build_registry_from_reader<R: BufRead>(
    reader: R,
    max_diameter: Diameter,
) -> Result<BuildReport, RealismError> {
    build_registry(smiles::corpus_lines(reader), max_diameter)
}

/// Builds from in-memory SMILES strings.
pub fn build_registry_from_smiles<S: AsRef<str>>(
    corpus: &[S],
    max_diameter: Diameter,
) -> Result<BuildReport, RealismError> {
    build_registry(
        corpus
            .iter()
            .enumerate()
            .map(|(i, s)| Ok((i + 1, s.as_ref().to_string()))),
        max_diameter,
    )
}

impl ReferenceRegistry {
    /// Registry over explicit identifier sets, one per radius.
    pub fn from_sets(
        mut sets: Vec<Vec<EcfpId>>,
        molecule_count: u64,
    ) -> Result<Self, RealismError> {
        let max_diameter = sets
            .len()
            .checked_sub(1)
            .and_then(Diameter::from_radius)
            .ok_or_else(|| RealismError::Format(format!("{} radius sets", sets.len())))?;
        for set in &mut sets {
            set.sort_unstable();
            set.dedup();
        }
        let mut hasher = Sha256::new();
        for set in &sets {
            for id in set {
                hasher.update(id.to_le_bytes());
            }
        }
        Ok(ReferenceRegistry {
            max_diameter,
            sets,
            molecule_count,
            corpus_digest: hasher.finalize().into(),
        })
    }

    pub fn max_diameter(&self) -> Diameter {
        self.max_diameter
    }

    pub fn molecule_count(&self) -> u64 {
        self.molecule_count
    }

    pub fn corpus_digest(&self) -> &[u8; 32] {
        &self.corpus_digest
    }

    pub fn corpus_digest_hex(&self) -> String {
        hex::encode(self.corpus_digest)
    }

    pub fn covers(&self, d: Diameter) -> bool {
        d <= self.max_diameter
    }

    /// Sorted identifiers observed at `radius`.
    pub fn ids(&self, radius: usize) -> &[EcfpId] {
        &self.sets[radius]
    }

    pub fn contains(&self, radius: usize, id: EcfpId) -> bool {
        self.sets
            .get(radius)
            .is_some_and(|s| s.binary_search(&id).is_ok())
    }

    pub fn write_binary<W: Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&REGISTRY_VERSION.to_le_bytes())?;
        w.write_all(&u32::from(self.max_diameter.value()).to_le_bytes())?;
        w.write_all(&self.molecule_count.to_le_bytes())?;
        w.write_all(&self.corpus_digest)?;
        for set in &self.sets {
            w.write_all(&(set.len() as u64).to_le_bytes())?;
            for id in set {
                w.write_all(&id.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self, RealismError> {
        fn take<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N], RealismError> {
            let mut buf = [0u8; N];
            r.read_exact(&mut buf).map_err(|e| match e.kind() {
                io::ErrorKind::UnexpectedEof => RealismError::Format("truncated file".into()),
                _ => RealismError::Io(e),
            })?;
            Ok(buf)
        }
        if &take::<8, _>(&mut r)? != MAGIC {
            return Err(RealismError::Format("bad magic".into()));
        }
        let version = u32::from_le_bytes(take(&mut r)?);
        if version != REGISTRY_VERSION {
            return Err(RealismError::Format(format!(
                "unsupported version {version}"
            )));
        }
        let d = u32::from_le_bytes(take(&mut r)?);
        let max_diameter = u8::try_from(d)
            .ok()
            .and_then(|d| Diameter::try_from(d).ok())
            .ok_or_else(|| RealismError::Format(format!("bad diameter {d}")))?;
        let molecule_count = u64::from_le_bytes(take(&mut r)?);
        let corpus_digest = take::<32, _>(&mut r)?;
        let mut sets = Vec::new();
        for _ in 0..=max_diameter.radius() {
            let len = u64::from_le_bytes(take(&mut r)?);
            let mut set = Vec::with_capacity(len.min(1 << 24) as usize);
            for _ in 0..len {
                set.push(u64::from_le_bytes(take(&mut r)?));
            }
            if set.windows(2).any(|w| w[0] >= w[1]) {
                return Err(RealismError::Format(
                    "identifier array not strictly sorted".into(),
                ));
            }
            sets.push(set);
        }
        let mut rest = Vec::new();
        r.read_to_end(&mut rest)?;
        if !rest.is_empty() {
            return Err(RealismError::Format("trailing bytes".into()));
        }
        Ok(ReferenceRegistry {
            max_diameter,
            sets,
            molecule_count,
            corpus_digest,
        })
    }

    /// Decimal export: a commented header, then `# radius r` sections with
    /// one identifier per line.
    pub fn write_text<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(
            w,
            "# registry v{REGISTRY_VERSION} max_diameter={} molecules={} digest={}",
            self.max_diameter.value(),
            self.molecule_count,
            self.corpus_digest_hex()
        )?;
        for (r, set) in self.sets.iter().enumerate() {
            writeln!(w, "# radius {r}")?;
            for id in set {
                writeln!(w, "{id}")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SillyScore {
    pub silly_count: usize,
    pub total_count: usize,
}

impl SillyScore {
    pub fn value(&self) -> f64 {
        self.silly_count as f64 / self.total_count as f64
    }

    pub fn passes(&self) -> bool {
        self.silly_count == 0
    }
}

fn check_diameters(
    reg: &ReferenceRegistry,
    diameters: &[Diameter],
) -> Result<Diameter, RealismError> {
    let max = *diameters.iter().max().ok_or(RealismError::NoDiameters)?;
    if let Some(&d) = diameters.iter().find(|&&d| !reg.covers(d)) {
        return Err(RealismError::DiameterNotCovered(d));
    }
    Ok(max)
}

/// Scores an already computed fingerprint. `fp` must reach the largest
/// selected radius.
pub fn score_fingerprint(
    fp: &FingerprintSet,
    reg: &ReferenceRegistry,
    diameters: &[Diameter],
) -> Result<SillyScore, RealismError> {
    check_diameters(reg, diameters)?;
    let mut radii: Vec<usize> = diameters.iter().map(|d| d.radius()).collect();
    radii.sort_unstable();
    radii.dedup();
    let mut silly_count = 0;
    let mut total_count = 0;
    for r in radii {
        for &id in fp.at_radius(r) {
            total_count += 1;
            if !reg.contains(r, id) {
                silly_count += 1;
            }
        }
    }
    Ok(SillyScore {
        silly_count,
        total_count,
    })
}

pub fn silly_score(
    g: &MolecularGraph,
    reg: &ReferenceRegistry,
    diameters: &[Diameter],
) -> Result<SillyScore, RealismError> {
    let max = check_diameters(reg, diameters)?;
    score_fingerprint(&ecfp(g, max), reg, diameters)
}

pub fn passes_filter(
    g: &MolecularGraph,
    reg: &ReferenceRegistry,
    diameters: &[Diameter],
) -> Result<bool, RealismError> {
    Ok(silly_score(g, reg, diameters)?.passes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smiles::parse;

    const ALL: [Diameter; 3] = Diameter::ALL;

    #[test]
    fn single_methane_registry() {
        let rep = build_registry_from_smiles(&["C"], Diameter::D0).unwrap();
        assert_eq!(rep.registry.ids(0).len(), 1);
        assert_eq!(rep.registry.molecule_count(), 1);
    }

    #[test]
    fn kekule_identity() {
        let a = build_registry_from_smiles(&["c1ccccc1"], Diameter::D4)
            .unwrap()
            .registry;
        let b = build_registry_from_smiles(&["C1=CC=CC=C1"], Diameter::D4)
            .unwrap()
            .registry;
        assert_eq!(a.sets, b.sets);
    }

    #[test]
    fn deterministic_digest() {
        let a = build_registry_from_smiles(&["CCO", "c1ccccc1"], Diameter::D4)
            .unwrap()
            .registry;
        let b = build_registry_from_smiles(&["CCO", "c1ccccc1"], Diameter::D4)
            .unwrap()
            .registry;
        assert_eq!(a, b);
        let c = build_registry_from_smiles(&["CCO", "c1ccccn1"], Diameter::D4)
            .unwrap()
            .registry;
        assert_ne!(a.corpus_digest(), c.corpus_digest());
    }

    #[test]
    fn empty_corpus_is_an_error() {
        let none: [&str; 0] = [];
        assert!(matches!(
            build_registry_from_smiles(&none, Diameter::D0),
            Err(RealismError::EmptyCorpus)
        ));
        assert!(matches!(
            build_registry_from_smiles(&["not smiles"], Diameter::D0),
            Err(RealismError::EmptyCorpus)
        ));
    }

    #[test]
    fn skipped_lines_are_reported() {
        let rep = build_registry_from_smiles(&["CCO", "C(", "CC.O"], Diameter::D2).unwrap();
        assert_eq!(rep.registry.molecule_count(), 1);
        let lines: Vec<usize> = rep.skipped.iter().map(|(l, _)| *l).collect();
        assert_eq!(lines, vec![2, 3]);
        assert!((rep.skipped_fraction() - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn self_membership_and_empty_registry() {
        let corpus = ["CC(=O)Oc1ccccc1C(=O)O", "CCN(CC)CC"];
        let reg = build_registry_from_smiles(&corpus, Diameter::D4)
            .unwrap()
            .registry;
        for s in corpus {
            let g = parse(s).unwrap();
            assert_eq!(silly_score(&g, &reg, &ALL).unwrap().value(), 0.0);
            assert!(passes_filter(&g, &reg, &ALL).unwrap());
        }
        let empty = ReferenceRegistry::from_sets(vec![vec![], vec![], vec![]], 0).unwrap();
        let g = parse("CCO").unwrap();
        let s = silly_score(&g, &empty, &ALL).unwrap();
        assert_eq!(s.value(), 1.0);
        assert_eq!(s.total_count, 9);
    }

    #[test]
    fn unseen_element_fails() {
        let reg = build_registry_from_smiles(&["CCO", "CCC"], Diameter::D4)
            .unwrap()
            .registry;
        let g = parse("CCF").unwrap();
        assert!(!passes_filter(&g, &reg, &[Diameter::D0]).unwrap());
    }

    #[test]
    fn ratio_arithmetic() {
        let s = SillyScore {
            silly_count: 3,
            total_count: 10,
        };
        assert!((s.value() - 0.3).abs() < 1e-15);
        assert!(!s.passes());
    }

    #[test]
    fn counts_per_selected_radius() {
        // methanol against a registry that knows only methanol's carbon at radius 0
        let g = parse("CO").unwrap();
        let fp = ecfp(&g, Diameter::D2);
        let reg = ReferenceRegistry::from_sets(vec![vec![fp.atom_id(0, 0)], vec![]], 1).unwrap();
        let s = score_fingerprint(&fp, &reg, &[Diameter::D0]).unwrap();
        assert_eq!((s.silly_count, s.total_count), (1, 2));
        let s = score_fingerprint(&fp, &reg, &[Diameter::D0, Diameter::D2]).unwrap();
        assert_eq!((s.silly_count, s.total_count), (3, 4));
    }

    #[test]
    fn uncovered_diameter_is_rejected() {
        let reg = build_registry_from_smiles(&["CCO"], Diameter::D2)
            .unwrap()
            .registry;
        let g = parse("CCO").unwrap();
        assert!(matches!(
            silly_score(&g, &reg, &ALL),
            Err(RealismError::DiameterNotCovered(Diameter::D4))
        ));
        assert!(matches!(
            silly_score(&g, &reg, &[]),
            Err(RealismError::NoDiameters)
        ));
    }

    #[test]
    fn binary_round_trip_and_corruption() {
        let reg = build_registry_from_smiles(&["CC(=O)Oc1ccccc1C(=O)O"], Diameter::D4)
            .unwrap()
            .registry;
        let mut bytes = Vec::new();
        reg.write_binary(&mut bytes).unwrap();
        assert_eq!(&bytes[..8], MAGIC);
        assert_eq!(ReferenceRegistry::read_binary(&bytes[..]).unwrap(), reg);
        assert!(ReferenceRegistry::read_binary(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(ReferenceRegistry::read_binary(&bad[..]).is_err());
        let mut extra = bytes;
        extra.push(0);
        assert!(ReferenceRegistry::read_binary(&extra[..]).is_err());
    }

    #[test]
    fn text_export_lists_every_id() {
        let reg = build_registry_from_smiles(&["CCO"], Diameter::D2)
            .unwrap()
            .registry;
        let mut out = Vec::new();
        reg.write_text(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let ids = text.lines().filter(|l| !l.starts_with('#')).count();
        assert_eq!(ids, reg.ids(0).len() + reg.ids(1).len());
    }
}
