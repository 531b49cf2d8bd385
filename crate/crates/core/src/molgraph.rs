//! Molecular graph model: heavy atoms as vertices, kekulized bonds as edges,
//! hydrogens implicit through free valence.
//!
//! The three elementary mutations (add atom, remove atom, change bond) are
//! enumerated here together with the validity rules that keep every graph a
//! single, valence-respecting molecule.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default maximum number of heavy atoms per molecule.
pub const DEFAULT_MAX_HEAVY: usize = 38;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex index {0} out of range")]
    InvalidVertex(usize),
    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate bond between {0} and {1}")]
    DuplicateBond(usize, usize),
    #[error("bond order {0} outside 1..=3")]
    InvalidBondOrder(u8),
    #[error("valence exceeded on vertex {vertex} ({used} > {max})")]
    ValenceExceeded { vertex: usize, used: u8, max: u8 },
    #[error("graph is disconnected")]
    Disconnected,
    #[error("graph has no atoms")]
    Empty,
    #[error("mutation {0} is not valid for this graph")]
    InvalidMutation(Mutation),
    #[error("unknown element symbol {0:?}")]
    UnknownElement(String),
}

/// Closed set of heavy atoms the model works with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Element {
    C,
    N,
    O,
    F,
    P,
    S,
    Cl,
    Br,
}

impl Element {
    pub const ALL: [Element; 8] = [
        Element::C,
        Element::N,
        Element::O,
        Element::F,
        Element::P,
        Element::S,
        Element::Cl,
        Element::Br,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            Element::C => "C",
            Element::N => "N",
            Element::O => "O",
            Element::F => "F",
            Element::P => "P",
            Element::S => "S",
            Element::Cl => "Cl",
            Element::Br => "Br",
        }
    }

    pub fn atomic_number(self) -> u8 {
        match self {
            Element::C => 6,
            Element::N => 7,
            Element::O => 8,
            Element::F => 9,
            Element::P => 15,
            Element::S => 16,
            Element::Cl => 17,
            Element::Br => 35,
        }
    }

    /// Single default valence. Hypervalent states are not modelled.
    pub fn max_valence(self) -> u8 {
        match self {
            Element::C => 4,
            Element::N | Element::P => 3,
            Element::O | Element::S => 2,
            Element::F | Element::Cl | Element::Br => 1,
        }
    }

    /// Valence of the element carrying `charge`, following the isoelectronic
    /// rule: pnictogens and chalcogens gain one bond per positive charge and
    /// lose one per negative charge; carbon and halogens lose one per unit of
    /// charge of either sign.
    pub fn valence_with_charge(self, charge: i8) -> Option<u8> {
        let base = i16::from(self.max_valence());
        let q = i16::from(charge);
        let v = match self {
            Element::N | Element::P | Element::O | Element::S => base + q,
            Element::C | Element::F | Element::Cl | Element::Br => base - q.abs(),
        };
        u8::try_from(v).ok()
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for Element {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Element::ALL
            .into_iter()
            .find(|e| e.symbol() == s)
            .ok_or_else(|| GraphError::UnknownElement(s.to_string()))
    }
}

impl TryFrom<String> for Element {
    type Error = GraphError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Element> for String {
    fn from(e: Element) -> String {
        e.symbol().to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Atom {
    pub element: Element,
    pub formal_charge: i8,
}

impl Atom {
    pub fn neutral(element: Element) -> Self {
        Atom {
            element,
            formal_charge: 0,
        }
    }

    /// Maximum total bond order for this atom, accounting for its charge.
    pub fn max_valence(&self) -> u8 {
        self.element
            .valence_with_charge(self.formal_charge)
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Bond {
    /// Endpoints with `a < b`.
    pub a: usize,
    pub b: usize,
    pub order: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Edge {
    to: usize,
    order: u8,
}

/// A connected molecular graph. Vertex indices are 0-based and stable until
/// an atom is removed, at which point higher indices shift down by one.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MolecularGraph {
    atoms: Vec<Atom>,
    adjacency: Vec<Vec<Edge>>,
}

impl MolecularGraph {
    /// Builds and validates a graph from atoms and bonds.
    pub fn from_parts(atoms: Vec<Atom>, bonds: &[(usize, usize, u8)]) -> Result<Self, GraphError> {
        let mut builder = GraphBuilder::default();
        for atom in atoms {
            builder.add_atom(atom);
        }
        for &(a, b, order) in bonds {
            builder.add_bond(a, b, order)?;
        }
        builder.build()
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn bond_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn atom(&self, v: usize) -> Result<&Atom, GraphError> {
        self.atoms.get(v).ok_or(GraphError::InvalidVertex(v))
    }

    /// Neighbours of `v` with the bond order to each.
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = (usize, u8)> + '_ {
        self.adjacency[v].iter().map(|e| (e.to, e.order))
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    /// All bonds, each listed once with `a < b`, sorted.
    pub fn bonds(&self) -> Vec<Bond> {
        let mut out = Vec::with_capacity(self.bond_count());
        for (a, edges) in self.adjacency.iter().enumerate() {
            for e in edges {
                if a < e.to {
                    out.push(Bond {
                        a,
                        b: e.to,
                        order: e.order,
                    });
                }
            }
        }
        out.sort_by_key(|b| (b.a, b.b));
        out
    }

    /// Bond order between `u` and `v`, 0 when unbonded.
    pub fn bond_order(&self, u: usize, v: usize) -> u8 {
        self.adjacency[u]
            .iter()
            .find(|e| e.to == v)
            .map_or(0, |e| e.order)
    }

    pub fn bond_order_sum(&self, v: usize) -> u8 {
        self.adjacency[v].iter().map(|e| e.order).sum()
    }

    /// Implicit hydrogen count, i.e. unused valence. Panics on a bad index;
    /// see [`MolecularGraph::free_valence`] for the checked form.
    pub fn hydrogens(&self, v: usize) -> u8 {
        self.atoms[v]
            .max_valence()
            .saturating_sub(self.bond_order_sum(v))
    }

    pub fn free_valence(&self, v: usize) -> Result<u8, GraphError> {
        if v >= self.atoms.len() {
            return Err(GraphError::InvalidVertex(v));
        }
        Ok(self.hydrogens(v))
    }

    pub fn is_connected(&self) -> bool {
        !self.atoms.is_empty() && self.reachable_count(0, None, None) == self.atoms.len()
    }

    /// Whether the graph stays connected and non-empty once `v` is deleted.
    fn connected_without_atom(&self, v: usize) -> bool {
        let n = self.atoms.len();
        if n < 2 {
            return false;
        }
        let start = if v == 0 { 1 } else { 0 };
        self.reachable_count(start, Some(v), None) == n - 1
    }

    /// Whether the graph stays connected once the bond `u`–`v` is deleted.
    fn connected_without_bond(&self, u: usize, v: usize) -> bool {
        self.reachable_count(0, None, Some((u, v))) == self.atoms.len()
    }

    fn reachable_count(
        &self,
        start: usize,
        skip_atom: Option<usize>,
        skip_bond: Option<(usize, usize)>,
    ) -> usize {
        let mut seen = vec![false; self.atoms.len()];
        if let Some(s) = skip_atom {
            seen[s] = true;
        }
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        let mut count = 0;
        while let Some(a) = queue.pop_front() {
            count += 1;
            for e in &self.adjacency[a] {
                if let Some((x, y)) = skip_bond {
                    if (a == x && e.to == y) || (a == y && e.to == x) {
                        continue;
                    }
                }
                if !seen[e.to] {
                    seen[e.to] = true;
                    queue.push_back(e.to);
                }
            }
        }
        count
    }

    /// Checks every graph invariant.
    pub fn validate(&self) -> Result<(), GraphError> {
        if self.atoms.is_empty() {
            return Err(GraphError::Empty);
        }
        for v in 0..self.atoms.len() {
            let used = self.bond_order_sum(v);
            let max = self.atoms[v].max_valence();
            if used > max {
                return Err(GraphError::ValenceExceeded {
                    vertex: v,
                    used,
                    max,
                });
            }
        }
        if !self.is_connected() {
            return Err(GraphError::Disconnected);
        }
        Ok(())
    }

    /// Relabels the vertices: atom `v` of `self` becomes atom `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> MolecularGraph {
        assert_eq!(perm.len(), self.atoms.len());
        let n = self.atoms.len();
        let mut atoms = vec![Atom::neutral(Element::C); n];
        let mut adjacency = vec![Vec::new(); n];
        for v in 0..n {
            atoms[perm[v]] = self.atoms[v];
            adjacency[perm[v]] = self.adjacency[v]
                .iter()
                .map(|e| Edge {
                    to: perm[e.to],
                    order: e.order,
                })
                .collect();
        }
        for edges in &mut adjacency {
            edges.sort_by_key(|e| e.to);
        }
        MolecularGraph { atoms, adjacency }
    }

    /// Heavy-atom formula, e.g. `C9O4`, in element order.
    pub fn heavy_formula(&self) -> String {
        let mut out = String::new();
        for el in Element::ALL {
            let n = self.atoms.iter().filter(|a| a.element == el).count();
            if n > 0 {
                out.push_str(el.symbol());
                if n > 1 {
                    out.push_str(&n.to_string());
                }
            }
        }
        out
    }

    pub fn hydrogen_total(&self) -> usize {
        (0..self.atoms.len())
            .map(|v| usize::from(self.hydrogens(v)))
            .sum()
    }

    fn set_bond(&mut self, u: usize, v: usize, order: u8) {
        for (x, y) in [(u, v), (v, u)] {
            let edges = &mut self.adjacency[x];
            match edges.iter().position(|e| e.to == y) {
                Some(i) if order == 0 => {
                    edges.remove(i);
                }
                Some(i) => edges[i].order = order,
                None if order == 0 => {}
                None => {
                    edges.push(Edge { to: y, order });
                    edges.sort_by_key(|e| e.to);
                }
            }
        }
    }

    /// Enumerates every valid mutation under `rules`, ordered by kind, then
    /// position, then option.
    pub fn enumerate_valid_mutations(&self, rules: &MutationRules) -> Vec<Mutation> {
        let n = self.atoms.len();
        let mut out = Vec::new();
        if rules.allows(MutationKind::AddAtom) && n < rules.max_heavy {
            for v in 0..n {
                if self.hydrogens(v) >= 1 {
                    for (candidate, &element) in rules.candidates.iter().enumerate() {
                        out.push(Mutation::AddAtom {
                            position: v,
                            candidate,
                            element,
                        });
                    }
                }
            }
        }
        if rules.allows(MutationKind::RemoveAtom) {
            for v in 0..n {
                if self.connected_without_atom(v) {
                    out.push(Mutation::RemoveAtom { position: v });
                }
            }
        }
        if rules.allows(MutationKind::ChangeBond) {
            for u in 0..n {
                let fu = self.hydrogens(u);
                for v in (u + 1)..n {
                    let fv = self.hydrogens(v);
                    let current = self.bond_order(u, v);
                    let lowest = if rules.allow_bond_deletion && current > 0 {
                        0
                    } else {
                        1
                    };
                    for order in lowest..=3u8 {
                        if order == current {
                            continue;
                        }
                        let ok = if order > current {
                            let need = order - current;
                            fu >= need && fv >= need
                        } else if order == 0 {
                            self.connected_without_bond(u, v)
                        } else {
                            true
                        };
                        if ok {
                            out.push(Mutation::ChangeBond {
                                position: u,
                                partner: v,
                                order,
                            });
                        }
                    }
                }
            }
        }
        out
    }

    /// Structural validity of `m` on this graph, independent of rule limits
    /// such as the heavy-atom cap.
    pub fn admits(&self, m: &Mutation) -> bool {
        let n = self.atoms.len();
        match *m {
            Mutation::AddAtom { position, .. } => position < n && self.hydrogens(position) >= 1,
            Mutation::RemoveAtom { position } => {
                position < n && self.connected_without_atom(position)
            }
            Mutation::ChangeBond {
                position,
                partner,
                order,
            } => {
                if position >= n || partner >= n || position == partner || order > 3 {
                    return false;
                }
                let current = self.bond_order(position, partner);
                if order == current {
                    false
                } else if order > current {
                    let need = order - current;
                    self.hydrogens(position) >= need && self.hydrogens(partner) >= need
                } else if order == 0 {
                    self.connected_without_bond(position, partner)
                } else {
                    true
                }
            }
        }
    }

    /// Returns a new graph with `m` applied; `self` is untouched.
    pub fn apply_mutation(&self, m: &Mutation) -> Result<MolecularGraph, GraphError> {
        if !self.admits(m) {
            return Err(GraphError::InvalidMutation(*m));
        }
        let mut g = self.clone();
        match *m {
            Mutation::AddAtom {
                position, element, ..
            } => {
                let w = g.atoms.len();
                g.atoms.push(Atom::neutral(element));
                g.adjacency.push(Vec::new());
                g.set_bond(position, w, 1);
            }
            Mutation::RemoveAtom { position } => {
                g.atoms.remove(position);
                g.adjacency.remove(position);
                for edges in &mut g.adjacency {
                    edges.retain(|e| e.to != position);
                    for e in edges.iter_mut() {
                        if e.to > position {
                            e.to -= 1;
                        }
                    }
                }
            }
            Mutation::ChangeBond {
                position,
                partner,
                order,
            } => g.set_bond(position, partner, order),
        }
        Ok(g)
    }
}

/// Incremental construction for parsers; invariants are checked in `build`.
#[derive(Debug, Default, Clone)]
pub struct GraphBuilder {
    atoms: Vec<Atom>,
    adjacency: Vec<Vec<Edge>>,
}

impl GraphBuilder {
    pub fn add_atom(&mut self, atom: Atom) -> usize {
        self.atoms.push(atom);
        self.adjacency.push(Vec::new());
        self.atoms.len() - 1
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn add_bond(&mut self, a: usize, b: usize, order: u8) -> Result<(), GraphError> {
        let n = self.atoms.len();
        if a >= n {
            return Err(GraphError::InvalidVertex(a));
        }
        if b >= n {
            return Err(GraphError::InvalidVertex(b));
        }
        if a == b {
            return Err(GraphError::SelfLoop(a));
        }
        if !(1..=3).contains(&order) {
            return Err(GraphError::InvalidBondOrder(order));
        }
        if self.adjacency[a].iter().any(|e| e.to == b) {
            return Err(GraphError::DuplicateBond(a.min(b), a.max(b)));
        }
        self.adjacency[a].push(Edge { to: b, order });
        self.adjacency[b].push(Edge { to: a, order });
        Ok(())
    }

    pub fn build(mut self) -> Result<MolecularGraph, GraphError> {
        for edges in &mut self.adjacency {
            edges.sort_by_key(|e| e.to);
        }
        let g = MolecularGraph {
            atoms: self.atoms,
            adjacency: self.adjacency,
        };
        g.validate()?;
        Ok(g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MutationKind {
    #[serde(rename = "AddA")]
    AddAtom,
    #[serde(rename = "RmA")]
    RemoveAtom,
    #[serde(rename = "ChB")]
    ChangeBond,
}

impl MutationKind {
    pub fn label(self) -> &'static str {
        match self {
            MutationKind::AddAtom => "AddA",
            MutationKind::RemoveAtom => "RmA",
            MutationKind::ChangeBond => "ChB",
        }
    }
}

impl fmt::Display for MutationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// One elementary action. Derived ordering is (kind, position, option).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mutation {
    /// Bond a new `element` to `position` with a single bond. `candidate` is
    /// the index of `element` in the candidate atom list.
    AddAtom {
        position: usize,
        candidate: usize,
        element: Element,
    },
    RemoveAtom {
        position: usize,
    },
    /// Set the bond between `position` and `partner` (`position < partner`)
    /// to `order`; 0 only when bond deletion is enabled.
    ChangeBond {
        position: usize,
        partner: usize,
        order: u8,
    },
}

impl Mutation {
    pub fn kind(&self) -> MutationKind {
        match self {
            Mutation::AddAtom { .. } => MutationKind::AddAtom,
            Mutation::RemoveAtom { .. } => MutationKind::RemoveAtom,
            Mutation::ChangeBond { .. } => MutationKind::ChangeBond,
        }
    }

    pub fn position(&self) -> usize {
        match *self {
            Mutation::AddAtom { position, .. }
            | Mutation::RemoveAtom { position }
            | Mutation::ChangeBond { position, .. } => position,
        }
    }
}

impl fmt::Display for Mutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mutation::AddAtom {
                position, element, ..
            } => write!(f, "AddA({position}, {element})"),
            Mutation::RemoveAtom { position } => write!(f, "RmA({position})"),
            Mutation::ChangeBond {
                position,
                partner,
                order,
            } => write!(f, "ChB({position}, {partner}, {order})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MutationRules {
    pub actions: Vec<MutationKind>,
    pub candidates: Vec<Element>,
    pub max_heavy: usize,
    /// Permit lowering a ring bond to order 0. Bonds whose removal would
    /// split the molecule are never deletable.
    pub allow_bond_deletion: bool,
}

impl MutationRules {
    pub fn allows(&self, kind: MutationKind) -> bool {
        self.actions.contains(&kind)
    }
}

impl Default for MutationRules {
    fn default() -> Self {
        MutationRules {
            actions: vec![
                MutationKind::AddAtom,
                MutationKind::RemoveAtom,
                MutationKind::ChangeBond,
            ],
            candidates: vec![Element::C, Element::N, Element::O, Element::F],
            max_heavy: DEFAULT_MAX_HEAVY,
            allow_bond_deletion: false,
        }
    }
}
