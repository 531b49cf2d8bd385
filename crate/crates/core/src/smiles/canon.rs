//! Canonical vertex ranking by iterative neighbourhood refinement with
//! individualization of tied atoms.

use crate::molgraph::MolecularGraph;

use super::write_ranked;

/// Leaves explored before settling for the best string found so far. Tied
/// atoms after refinement are almost always symmetry-equivalent, in which
/// case every branch leads to the same string and one leaf suffices.
const LEAF_BUDGET: usize = 128;

/// Canonical SMILES together with the vertex ranking that produced it.
pub(super) fn canonicalize(g: &MolecularGraph) -> (String, Vec<u32>) {
    let mut colors = initial_colors(g);
    let mut best: Option<(String, Vec<u32>)> = None;
    let mut budget = LEAF_BUDGET;
    search(g, &mut colors, &mut best, &mut budget);
    best.expect("search visits at least one leaf")
}

fn initial_colors(g: &MolecularGraph) -> Vec<u32> {
    let keys: Vec<_> = (0..g.atom_count())
        .map(|v| {
            let a = g.atoms()[v];
            (
                a.element.atomic_number(),
                a.formal_charge,
                g.degree(v),
                g.bond_order_sum(v),
            )
        })
        .collect();
    dense_ranks(&keys)
}

fn dense_ranks<K: Ord>(keys: &[K]) -> Vec<u32> {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
    let mut ranks = vec![0u32; keys.len()];
    let mut rank = 0u32;
    for (i, &v) in order.iter().enumerate() {
        if i > 0 && keys[v] != keys[order[i - 1]] {
            rank += 1;
        }
        ranks[v] = rank;
    }
    ranks
}

fn class_count(colors: &[u32]) -> usize {
    colors.iter().copied().max().map_or(0, |m| m as usize + 1)
}

/// Splits colour classes by the sorted multiset of (bond order, neighbour
/// colour) until the partition is stable. Existing class order is kept.
fn refine(g: &MolecularGraph, colors: &mut Vec<u32>) {
    let mut classes = class_count(colors);
    loop {
        let keys: Vec<(u32, Vec<(u8, u32)>)> = (0..g.atom_count())
            .map(|v| {
                let mut nb: Vec<(u8, u32)> = g.neighbors(v).map(|(u, o)| (o, colors[u])).collect();
                nb.sort_unstable();
                (colors[v], nb)
            })
            .collect();
        let next = dense_ranks(&keys);
        let n = class_count(&next);
        *colors = next;
        if n == classes {
            break;
        }
        classes = n;
    }
}

fn search(
    g: &MolecularGraph,
    colors: &mut Vec<u32>,
    best: &mut Option<(String, Vec<u32>)>,
    budget: &mut usize,
) {
    refine(g, colors);
    let n = g.atom_count();
    if class_count(colors) == n {
        let s = write_ranked(g, colors);
        *budget = budget.saturating_sub(1);
        if best.as_ref().is_none_or(|(b, _)| s < *b) {
            *best = Some((s, colors.clone()));
        }
        return;
    }
    // first colour class with more than one member
    let mut sizes = vec![0usize; class_count(colors)];
    for &c in colors.iter() {
        sizes[c as usize] += 1;
    }
    let cell = sizes
        .iter()
        .position(|&s| s > 1)
        .expect("non-discrete partition") as u32;
    let members: Vec<usize> = (0..n).filter(|&v| colors[v] == cell).collect();
    for x in members {
        if *budget == 0 && best.is_some() {
            break;
        }
        let mut split: Vec<u32> = colors
            .iter()
            .enumerate()
            .map(|(v, &c)| 2 * c + u32::from(c == cell && v != x))
            .collect();
        search(g, &mut split, best, budget);
    }
}
