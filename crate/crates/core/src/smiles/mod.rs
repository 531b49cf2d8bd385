//! SMILES input and canonical output for the supported subset: organic
//! atoms C N O F P S Cl Br, aromatic c n o s p, bracket atoms with hydrogen
//! count and charge, `- = # :` bonds, branches and ring closures (digits
//! and `%nn`). Stereo, isotopes and multi-fragment input are rejected.

mod canon;
mod parse;

use std::fmt;
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::molgraph::{GraphError, MolecularGraph};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SmilesError {
    #[error("empty SMILES")]
    Empty,
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unsupported feature at {pos}: {what}")]
    Unsupported { pos: usize, what: String },
    #[error("multiple fragments are not supported")]
    Disconnected,
    #[error("aromatic system cannot be kekulized")]
    Kekulization,
    #[error("bracket hydrogen count inconsistent with valence on atom {atom}")]
    HydrogenMismatch { atom: usize },
    #[error(transparent)]
    Graph(GraphError),
}

pub fn parse(text: &str) -> Result<MolecularGraph, SmilesError> {
    parse::parse(text)
}

/// Canonical identity of a molecule: its canonical SMILES.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CanonicalKey(String);

impl CanonicalKey {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Deterministic SMILES that is identical for every relabeling of `g`.
pub fn write_canonical(g: &MolecularGraph) -> String {
    canon::canonicalize(g).0
}

pub fn canonical_key(g: &MolecularGraph) -> CanonicalKey {
    CanonicalKey(write_canonical(g))
}

/// Canonical rank of each vertex (0 = first atom written).
pub fn canonical_ranks(g: &MolecularGraph) -> Vec<u32> {
    canon::canonicalize(g).1
}

/// Key and ranks in one pass.
pub fn canonical_key_and_ranks(g: &MolecularGraph) -> (CanonicalKey, Vec<u32>) {
    let (s, r) = canon::canonicalize(g);
    (CanonicalKey(s), r)
}

/// Yields the SMILES lines of a corpus stream: blank lines and lines starting
/// with `#` are skipped, and anything after the first whitespace on a line
/// (an identifier column, say) is dropped.
pub fn corpus_lines<R: BufRead>(
    reader: R,
) -> impl Iterator<Item = std::io::Result<(usize, String)>> {
    reader
        .lines()
        .enumerate()
        .filter_map(|(i, line)| match line {
            Err(e) => Some(Err(e)),
            Ok(l) => {
                let t = l.trim();
                if t.is_empty() || t.starts_with('#') {
                    None
                } else {
                    let smi = t.split_whitespace().next().unwrap_or_default();
                    Some(Ok((i + 1, smi.to_string())))
                }
            }
        })
}

/// Writes `g` by depth-first traversal from the lowest-ranked atom,
/// visiting neighbours in rank order. `ranks` must be a total order.
fn write_ranked(g: &MolecularGraph, ranks: &[u32]) -> String {
    let n = g.atom_count();
    let sorted_nb: Vec<Vec<(usize, u8)>> = (0..n)
        .map(|v| {
            let mut nb: Vec<(usize, u8)> = g.neighbors(v).collect();
            nb.sort_by_key(|&(u, _)| ranks[u]);
            nb
        })
        .collect();

    // pass 1: spanning tree and ring-closure edges
    let root = (0..n).min_by_key(|&v| ranks[v]).expect("non-empty graph");
    let mut visit = vec![usize::MAX; n];
    let mut children: Vec<Vec<(usize, u8)>> = vec![Vec::new(); n];
    let mut closures: Vec<Vec<(usize, u8)>> = vec![Vec::new(); n];
    let mut counter = 0;
    tree_pass(
        root,
        None,
        &sorted_nb,
        &mut visit,
        &mut counter,
        &mut children,
        &mut closures,
    );
    for c in &mut closures {
        c.sort_by_key(|&(u, _)| ranks[u]);
    }

    // pass 2: emit
    let mut out = String::with_capacity(n * 2);
    let mut digits: Vec<Option<(usize, usize)>> = vec![None; 100];
    emit(g, root, &visit, &children, &closures, &mut digits, &mut out);
    out
}

fn tree_pass(
    v: usize,
    parent: Option<usize>,
    nb: &[Vec<(usize, u8)>],
    visit: &mut [usize],
    counter: &mut usize,
    children: &mut [Vec<(usize, u8)>],
    closures: &mut [Vec<(usize, u8)>],
) {
    visit[v] = *counter;
    *counter += 1;
    for &(u, order) in &nb[v] {
        if Some(u) == parent {
            continue;
        }
        if visit[u] == usize::MAX {
            children[v].push((u, order));
            tree_pass(u, Some(v), nb, visit, counter, children, closures);
        } else if visit[u] < visit[v] && !closures[v].iter().any(|&(w, _)| w == u) {
            // back edge to an ancestor, seen first from the deeper end
            closures[v].push((u, order));
            closures[u].push((v, order));
        }
    }
}

fn bond_symbol(order: u8) -> &'static str {
    match order {
        2 => "=",
        3 => "#",
        _ => "",
    }
}

fn emit(
    g: &MolecularGraph,
    v: usize,
    visit: &[usize],
    children: &[Vec<(usize, u8)>],
    closures: &[Vec<(usize, u8)>],
    digits: &mut [Option<(usize, usize)>],
    out: &mut String,
) {
    write_atom(g, v, out);
    // close rings opened by earlier atoms, then open new ones
    for &(u, _) in &closures[v] {
        if visit[u] < visit[v] {
            let d = digits
                .iter()
                .position(|&slot| slot == Some((u, v)))
                .expect("ring opened before closing");
            digits[d] = None;
            push_ring_label(d, out);
        }
    }
    for &(u, order) in &closures[v] {
        if visit[u] > visit[v] {
            let d = (1..digits.len())
                .find(|&d| digits[d].is_none())
                .expect("at most 99 simultaneous ring closures");
            digits[d] = Some((v, u));
            out.push_str(bond_symbol(order));
            push_ring_label(d, out);
        }
    }
    let last = children[v].len().saturating_sub(1);
    for (i, &(u, order)) in children[v].iter().enumerate() {
        if i < last {
            out.push('(');
        }
        out.push_str(bond_symbol(order));
        emit(g, u, visit, children, closures, digits, out);
        if i < last {
            out.push(')');
        }
    }
}

fn push_ring_label(d: usize, out: &mut String) {
    if d < 10 {
        out.push(char::from(b'0' + d as u8));
    } else {
        out.push('%');
        out.push_str(&format!("{d:02}"));
    }
}

fn write_atom(g: &MolecularGraph, v: usize, out: &mut String) {
    let a = g.atoms()[v];
    if a.formal_charge == 0 {
        out.push_str(a.element.symbol());
        return;
    }
    out.push('[');
    out.push_str(a.element.symbol());
    match g.hydrogens(v) {
        0 => {}
        1 => out.push('H'),
        h => {
            out.push('H');
            out.push_str(&h.to_string());
        }
    }
    let q = a.formal_charge;
    out.push(if q > 0 { '+' } else { '-' });
    if q.abs() > 1 {
        out.push_str(&q.abs().to_string());
    }
    out.push(']');
}
