//! Extended-connectivity fingerprints.
//!
//! Radius 0 identifiers hash the atom tuple (atomic number, formal charge,
//! heavy-atom degree, implicit hydrogens). Each further radius hashes the
//! radius, the atom's previous identifier and the sorted list of
//! (bond order, neighbour identifier) pairs.

use std::fmt;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::molgraph::MolecularGraph;

pub type EcfpId = u64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FingerprintError {
    #[error("unsupported folded length {0} (expected 1024 or 2048)")]
    UnsupportedLength(usize),
    #[error("unsupported diameter {0} (expected 0, 2 or 4)")]
    UnsupportedDiameter(u8),
}

/// Fingerprint diameter; radius is half of it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Diameter {
    D0,
    D2,
    D4,
}

impl Diameter {
    pub const ALL: [Diameter; 3] = [Diameter::D0, Diameter::D2, Diameter::D4];

    pub fn value(self) -> u8 {
        match self {
            Diameter::D0 => 0,
            Diameter::D2 => 2,
            Diameter::D4 => 4,
        }
    }

    pub fn radius(self) -> usize {
        usize::from(self.value() / 2)
    }

    pub fn from_radius(r: usize) -> Option<Diameter> {
        Diameter::ALL.into_iter().find(|d| d.radius() == r)
    }
}

impl TryFrom<u8> for Diameter {
    type Error = FingerprintError;
    fn try_from(v: u8) -> Result<Self, Self::Error> {
        match v {
            0 => Ok(Diameter::D0),
            2 => Ok(Diameter::D2),
            4 => Ok(Diameter::D4),
            other => Err(FingerprintError::UnsupportedDiameter(other)),
        }
    }
}

impl From<Diameter> for u8 {
    fn from(d: Diameter) -> u8 {
        d.value()
    }
}

impl fmt::Display for Diameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ECFP{}", self.value())
    }
}

/// FNV-1a over the little-endian bytes of each word.
#[derive(Debug, Clone, Copy)]
pub struct Hash64(u64);

impl Hash64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;

    pub fn new() -> Self {
        Hash64(Self::OFFSET)
    }

    pub fn word(mut self, w: i64) -> Self {
        for b in w.to_le_bytes() {
            self.0 ^= u64::from(b);
            self.0 = self.0.wrapping_mul(Self::PRIME);
        }
        self
    }

    pub fn finish(self) -> u64 {
        self.0
    }
}

impl Default for Hash64 {
    fn default() -> Self {
        Self::new()
    }
}

/// Per-atom identifiers for every radius up to the requested one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FingerprintSet {
    /// `ids[r][v]`: identifier of atom `v` at radius `r`.
    ids: Vec<Vec<EcfpId>>,
}

impl FingerprintSet {
    /// Wraps raw identifier tables, one row per radius.
    pub fn from_raw(ids: Vec<Vec<EcfpId>>) -> Self {
        FingerprintSet { ids }
    }

    pub fn max_radius(&self) -> Option<usize> {
        self.ids.len().checked_sub(1)
    }

    pub fn atom_id(&self, v: usize, radius: usize) -> EcfpId {
        self.ids[radius][v]
    }

    /// Identifiers at `radius`, one per atom in vertex order.
    pub fn at_radius(&self, radius: usize) -> &[EcfpId] {
        &self.ids[radius]
    }

    /// Sorted multiset of identifiers at `radius`.
    pub fn multiset(&self, radius: usize) -> Vec<EcfpId> {
        let mut m = self.ids[radius].clone();
        m.sort_unstable();
        m
    }

    pub fn distinct(&self, radius: usize) -> Vec<EcfpId> {
        let mut m = self.multiset(radius);
        m.dedup();
        m
    }

    pub fn all_ids(&self) -> impl Iterator<Item = EcfpId> + '_ {
        self.ids.iter().flatten().copied()
    }

    /// Writes `# radius r` headers followed by the distinct identifiers of
    /// each radius in decimal, one per line.
    pub fn write_ids<W: Write>(&self, mut w: W) -> io::Result<()> {
        for r in 0..self.ids.len() {
            writeln!(w, "# radius {r}")?;
            for id in self.distinct(r) {
                writeln!(w, "{id}")?;
            }
        }
        Ok(())
    }
}

pub fn initial_invariants(g: &MolecularGraph) -> Vec<EcfpId> {
    (0..g.atom_count())
        .map(|v| {
            let a = g.atoms()[v];
            Hash64::new()
                .word(i64::from(a.element.atomic_number()))
                .word(i64::from(a.formal_charge))
                .word(g.degree(v) as i64)
                .word(i64::from(g.hydrogens(v)))
                .finish()
        })
        .collect()
}

pub fn ecfp(g: &MolecularGraph, diameter: Diameter) -> FingerprintSet {
    let mut ids = Vec::with_capacity(diameter.radius() + 1);
    ids.push(initial_invariants(g));
    let mut pairs: Vec<(u8, EcfpId)> = Vec::with_capacity(4);
    for r in 1..=diameter.radius() {
        let prev: &Vec<EcfpId> = &ids[r - 1];
        let next: Vec<EcfpId> = (0..g.atom_count())
            .map(|v| {
                pairs.clear();
                pairs.extend(g.neighbors(v).map(|(u, order)| (order, prev[u])));
                pairs.sort_unstable();
                let mut h = Hash64::new().word(r as i64).word(prev[v] as i64);
                for &(order, id) in &pairs {
                    h = h.word(i64::from(order)).word(id as i64);
                }
                h.finish()
            })
            .collect();
        ids.push(next);
    }
    FingerprintSet { ids }
}

/// Fixed-length presence vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldedVector {
    words: Vec<u64>,
    length: usize,
}

impl FoldedVector {
    pub fn len(&self) -> usize {
        self.length
    }

    pub fn is_empty(&self) -> bool {
        self.length == 0
    }

    pub fn get(&self, bit: usize) -> bool {
        (self.words[bit / 64] >> (bit % 64)) & 1 == 1
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn set_bits(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.length).filter(|&b| self.get(b))
    }
}

pub fn fold(fp: &FingerprintSet, length: usize) -> Result<FoldedVector, FingerprintError> {
    if length != 1024 && length != 2048 {
        return Err(FingerprintError::UnsupportedLength(length));
    }
    let mut words = vec![0u64; length / 64];
    for id in fp.all_ids() {
        let bit = (id % length as u64) as usize;
        words[bit / 64] |= 1 << (bit % 64);
    }
    Ok(FoldedVector { words, length })
}
