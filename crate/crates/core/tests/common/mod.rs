//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::fs;
use std::path::PathBuf;

use molevo::fingerprint::Diameter;
use molevo::molgraph::{Element, MolecularGraph, MutationRules};
use molevo::realism::{build_registry_from_smiles, ReferenceRegistry};
use molevo::smiles;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn corpus_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/sample_corpus.smi")
}

pub fn corpus() -> Vec<String> {
    fs::read_to_string(corpus_path())
        .expect("sample corpus is shipped with the repository")
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

pub fn corpus_registry() -> ReferenceRegistry {
    build_registry_from_smiles(&corpus(), Diameter::D4)
        .unwrap()
        .registry
}

/// Valence table written out independently of the library.
fn allowed_valence(e: Element, charge: i8) -> Option<i32> {
    let base = match e {
        Element::C => 4,
        Element::N | Element::P => 3,
        Element::O | Element::S => 2,
        Element::F | Element::Cl | Element::Br => 1,
    };
    let q = i32::from(charge);
    let v = match e {
        Element::N | Element::P | Element::O | Element::S => base + q,
        _ => base - q.abs(),
    };
    (v >= 0).then_some(v)
}

/// Checks valence bounds, bond sanity and connectivity from the public
/// bond list alone.
pub fn check_graph(g: &MolecularGraph) -> Result<(), String> {
    let n = g.atom_count();
    if n == 0 {
        return Err("empty graph".into());
    }
    let mut used = vec![0i32; n];
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut seen = std::collections::HashSet::new();
    for b in g.bonds() {
        if b.a == b.b || b.a >= n || b.b >= n {
            return Err(format!("bad bond {b:?}"));
        }
        if !(1..=3).contains(&b.order) {
            return Err(format!("bad order {b:?}"));
        }
        if !seen.insert((b.a.min(b.b), b.a.max(b.b))) {
            return Err(format!("duplicate bond {b:?}"));
        }
        used[b.a] += i32::from(b.order);
        used[b.b] += i32::from(b.order);
        let (ra, rb) = (find(&mut parent, b.a), find(&mut parent, b.b));
        parent[ra] = rb;
    }
    for (v, a) in g.atoms().iter().enumerate() {
        let cap = allowed_valence(a.element, a.formal_charge)
            .ok_or_else(|| format!("atom {v}: impossible charge"))?;
        if used[v] > cap {
            return Err(format!("atom {v}: valence {} > {cap}", used[v]));
        }
        if i32::from(g.hydrogens(v)) != cap - used[v] {
            return Err(format!("atom {v}: hydrogen count mismatch"));
        }
    }
    let root = find(&mut parent, 0);
    if (1..n).any(|v| find(&mut parent, v) != root) {
        return Err("disconnected".into());
    }
    Ok(())
}

/// Backtracking graph isomorphism on element, charge and bond orders.
pub fn is_isomorphic(a: &MolecularGraph, b: &MolecularGraph) -> bool {
    let n = a.atom_count();
    if n != b.atom_count() || a.bond_count() != b.bond_count() {
        return false;
    }
    let label = |g: &MolecularGraph, v: usize| {
        let at = g.atoms()[v];
        let mut orders: Vec<u8> = g.neighbors(v).map(|(_, o)| o).collect();
        orders.sort_unstable();
        (at.element, at.formal_charge, orders)
    };
    let la: Vec<_> = (0..n).map(|v| label(a, v)).collect();
    let lb: Vec<_> = (0..n).map(|v| label(b, v)).collect();
    let mut sa = la.clone();
    let mut sb = lb.clone();
    sa.sort();
    sb.sort();
    if sa != sb {
        return false;
    }
    // visit `a` in BFS order so each new vertex has mapped neighbours
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        order.push(s);
        let mut i = order.len() - 1;
        while i < order.len() {
            let v = order[i];
            for (u, _) in a.neighbors(v) {
                if !seen[u] {
                    seen[u] = true;
                    order.push(u);
                }
            }
            i += 1;
        }
    }
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    #[allow(clippy::too_many_arguments)]
    fn extend(
        k: usize,
        order: &[usize],
        a: &MolecularGraph,
        b: &MolecularGraph,
        la: &[(Element, i8, Vec<u8>)],
        lb: &[(Element, i8, Vec<u8>)],
        map: &mut [usize],
        used: &mut [bool],
    ) -> bool {
        if k == order.len() {
            return true;
        }
        let v = order[k];
        for w in 0..b.atom_count() {
            if used[w] || la[v] != lb[w] {
                continue;
            }
            let consistent = a
                .neighbors(v)
                .filter(|&(u, _)| map[u] != usize::MAX)
                .all(|(u, o)| b.bond_order(map[u], w) == o)
                && a.neighbors(v)
                    .filter(|&(u, _)| map[u] != usize::MAX)
                    .count()
                    == b.neighbors(w).filter(|&(x, _)| used[x]).count();
            if !consistent {
                continue;
            }
            map[v] = w;
            used[w] = true;
            if extend(k + 1, order, a, b, la, lb, map, used) {
                return true;
            }
            map[v] = usize::MAX;
            used[w] = false;
        }
        false
    }
    extend(0, &order, a, b, &la, &lb, &mut map, &mut used)
}

pub fn random_permutation<R: Rng>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// A corpus molecule after a short random mutation walk.
pub fn random_molecule<R: Rng>(corpus: &[String], rng: &mut R) -> MolecularGraph {
    let mut g = smiles::parse(corpus.choose(rng).unwrap()).unwrap();
    let rules = MutationRules::default();
    for _ in 0..rng.gen_range(0..8) {
        let valid = g.enumerate_valid_mutations(&rules);
        if let Some(m) = valid.choose(rng) {
            g = g.apply_mutation(m).unwrap();
        }
    }
    g
}
