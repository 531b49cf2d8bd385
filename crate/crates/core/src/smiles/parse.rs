use std::collections::HashMap;

use crate::molgraph::{Atom, Element, GraphBuilder, MolecularGraph};

use super::SmilesError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BondSym {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondSym {
    fn from_byte(b: u8) -> Option<BondSym> {
        match b {
            b'-' => Some(BondSym::Single),
            b'=' => Some(BondSym::Double),
            b'#' => Some(BondSym::Triple),
            b':' => Some(BondSym::Aromatic),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct ParsedAtom {
    atom: Atom,
    aromatic: bool,
    /// Hydrogen count written inside brackets; `None` for organic-subset atoms.
    bracket_h: Option<u8>,
}

struct Parser<'a> {
    text: &'a [u8],
    pos: usize,
    atoms: Vec<ParsedAtom>,
    bonds: Vec<(usize, usize, BondSym)>,
}

pub(super) fn parse(text: &str) -> Result<MolecularGraph, SmilesError> {
    let text = text.trim();
    if text.is_empty() {
        return Err(SmilesError::Empty);
    }
    let mut p = Parser {
        text: text.as_bytes(),
        pos: 0,
        atoms: Vec::new(),
        bonds: Vec::new(),
    };
    p.run()?;
    let orders = kekulize(&p.atoms, &p.bonds)?;

    let mut builder = GraphBuilder::default();
    for a in &p.atoms {
        builder.add_atom(a.atom);
    }
    for (&(a, b, _), &order) in p.bonds.iter().zip(&orders) {
        builder.add_bond(a, b, order).map_err(SmilesError::Graph)?;
    }
    let g = builder.build().map_err(|e| match e {
        crate::molgraph::GraphError::Disconnected => SmilesError::Disconnected,
        other => SmilesError::Graph(other),
    })?;
    for (v, a) in p.atoms.iter().enumerate() {
        if let Some(h) = a.bracket_h {
            if g.bond_order_sum(v) + h != a.atom.max_valence() {
                return Err(SmilesError::HydrogenMismatch { atom: v });
            }
        }
    }
    Ok(g)
}

impl Parser<'_> {
    fn syntax(&self, msg: impl Into<String>) -> SmilesError {
        SmilesError::Syntax {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn peek(&self) -> Option<u8> {
        self.text.get(self.pos).copied()
    }

    fn run(&mut self) -> Result<(), SmilesError> {
        let mut prev: Option<usize> = None;
        let mut branches: Vec<Option<usize>> = Vec::new();
        let mut pending: Option<BondSym> = None;
        let mut rings: HashMap<u32, (usize, Option<BondSym>)> = HashMap::new();

        while let Some(c) = self.peek() {
            match c {
                b'(' => {
                    if prev.is_none() {
                        return Err(self.syntax("branch before any atom"));
                    }
                    if pending.is_some() {
                        return Err(self.syntax("bond symbol before branch"));
                    }
                    branches.push(prev);
                    self.pos += 1;
                }
                b')' => {
                    if pending.is_some() {
                        return Err(self.syntax("dangling bond at branch end"));
                    }
                    prev = branches
                        .pop()
                        .ok_or_else(|| self.syntax("unbalanced ')'"))?;
                    self.pos += 1;
                }
                b'-' | b'=' | b'#' | b':' => {
                    if pending.is_some() || prev.is_none() {
                        return Err(self.syntax("unexpected bond symbol"));
                    }
                    pending = BondSym::from_byte(c);
                    self.pos += 1;
                }
                b'/' | b'\\' => {
                    return Err(SmilesError::Unsupported {
                        pos: self.pos,
                        what: "directional bonds".into(),
                    })
                }
                b'.' => return Err(SmilesError::Disconnected),
                b'0'..=b'9' | b'%' => {
                    let here = prev.ok_or_else(|| self.syntax("ring closure before any atom"))?;
                    let label = self.ring_label()?;
                    match rings.remove(&label) {
                        Some((other, sym)) => {
                            let sym = match (sym, pending) {
                                (Some(a), Some(b)) if a != b => {
                                    return Err(self.syntax("conflicting ring-closure bonds"))
                                }
                                (a, b) => a.or(b),
                            };
                            if other == here {
                                return Err(self.syntax("ring closure to itself"));
                            }
                            self.push_bond(other, here, sym)?;
                        }
                        None => {
                            rings.insert(label, (here, pending));
                        }
                    }
                    pending = None;
                }
                _ => {
                    let atom = self.atom()?;
                    let idx = self.atoms.len();
                    self.atoms.push(atom);
                    if let Some(p) = prev {
                        self.push_bond(p, idx, pending.take())?;
                    } else if pending.is_some() {
                        return Err(self.syntax("bond without a preceding atom"));
                    }
                    prev = Some(idx);
                }
            }
        }
        if pending.is_some() {
            return Err(self.syntax("dangling bond at end of input"));
        }
        if !branches.is_empty() {
            return Err(self.syntax("unclosed branch"));
        }
        if !rings.is_empty() {
            return Err(self.syntax("unclosed ring"));
        }
        Ok(())
    }

    fn push_bond(&mut self, a: usize, b: usize, sym: Option<BondSym>) -> Result<(), SmilesError> {
        if self
            .bonds
            .iter()
            .any(|&(x, y, _)| (x == a && y == b) || (x == b && y == a))
        {
            return Err(self.syntax("duplicate bond"));
        }
        let sym = sym.unwrap_or(if self.atoms[a].aromatic && self.atoms[b].aromatic {
            BondSym::Aromatic
        } else {
            BondSym::Single
        });
        self.bonds.push((a, b, sym));
        Ok(())
    }

    fn ring_label(&mut self) -> Result<u32, SmilesError> {
        let c = self.text[self.pos];
        if c == b'%' {
            let digits = self.text.get(self.pos + 1..self.pos + 3);
            match digits {
                Some(d) if d.iter().all(u8::is_ascii_digit) => {
                    self.pos += 3;
                    Ok(u32::from(d[0] - b'0') * 10 + u32::from(d[1] - b'0'))
                }
                _ => Err(self.syntax("'%' must be followed by two digits")),
            }
        } else {
            self.pos += 1;
            Ok(u32::from(c - b'0'))
        }
    }

    fn atom(&mut self) -> Result<ParsedAtom, SmilesError> {
        if self.peek() == Some(b'[') {
            return self.bracket_atom();
        }
        let rest = &self.text[self.pos..];
        let (element, aromatic, len) = match rest {
            [b'C', b'l', ..] => (Element::Cl, false, 2),
            [b'B', b'r', ..] => (Element::Br, false, 2),
            [b'C', ..] => (Element::C, false, 1),
            [b'N', ..] => (Element::N, false, 1),
            [b'O', ..] => (Element::O, false, 1),
            [b'F', ..] => (Element::F, false, 1),
            [b'P', ..] => (Element::P, false, 1),
            [b'S', ..] => (Element::S, false, 1),
            [b'c', ..] => (Element::C, true, 1),
            [b'n', ..] => (Element::N, true, 1),
            [b'o', ..] => (Element::O, true, 1),
            [b's', ..] => (Element::S, true, 1),
            [b'p', ..] => (Element::P, true, 1),
            [b'B' | b'I' | b'b' | b'*', ..] => {
                return Err(SmilesError::Unsupported {
                    pos: self.pos,
                    what: format!("atom '{}'", rest[0] as char),
                })
            }
            _ => return Err(self.syntax(format!("unexpected character '{}'", rest[0] as char))),
        };
        self.pos += len;
        Ok(ParsedAtom {
            atom: Atom::neutral(element),
            aromatic,
            bracket_h: None,
        })
    }

    fn bracket_atom(&mut self) -> Result<ParsedAtom, SmilesError> {
        let start = self.pos;
        self.pos += 1;
        if matches!(self.peek(), Some(b'0'..=b'9')) {
            return Err(SmilesError::Unsupported {
                pos: self.pos,
                what: "isotopes".into(),
            });
        }
        let rest = &self.text[self.pos..];
        let (element, aromatic, len) = match rest {
            [b'C', b'l', ..] => (Element::Cl, false, 2),
            [b'B', b'r', ..] => (Element::Br, false, 2),
            [b'C', ..] => (Element::C, false, 1),
            [b'N', ..] => (Element::N, false, 1),
            [b'O', ..] => (Element::O, false, 1),
            [b'F', ..] => (Element::F, false, 1),
            [b'P', ..] => (Element::P, false, 1),
            [b'S', ..] => (Element::S, false, 1),
            [b'c', ..] => (Element::C, true, 1),
            [b'n', ..] => (Element::N, true, 1),
            [b'o', ..] => (Element::O, true, 1),
            [b's', ..] => (Element::S, true, 1),
            [b'p', ..] => (Element::P, true, 1),
            _ => {
                return Err(SmilesError::Unsupported {
                    pos: self.pos,
                    what: "bracket element outside the supported set".into(),
                })
            }
        };
        self.pos += len;
        if self.peek() == Some(b'@') {
            return Err(SmilesError::Unsupported {
                pos: self.pos,
                what: "stereo markers".into(),
            });
        }
        let mut h = 0u8;
        if self.peek() == Some(b'H') {
            self.pos += 1;
            h = 1;
            if let Some(d @ b'0'..=b'9') = self.peek() {
                h = d - b'0';
                self.pos += 1;
            }
        }
        let mut charge: i8 = 0;
        if let Some(sign @ (b'+' | b'-')) = self.peek() {
            let unit: i8 = if sign == b'+' { 1 } else { -1 };
            self.pos += 1;
            charge = unit;
            match self.peek() {
                Some(d @ b'1'..=b'9') => {
                    charge = unit * (d - b'0') as i8;
                    self.pos += 1;
                }
                Some(s) if s == sign => {
                    while self.peek() == Some(sign) {
                        charge += unit;
                        self.pos += 1;
                    }
                }
                _ => {}
            }
        }
        if self.peek() == Some(b':') {
            return Err(SmilesError::Unsupported {
                pos: self.pos,
                what: "atom classes".into(),
            });
        }
        if self.peek() != Some(b']') {
            self.pos = start;
            return Err(self.syntax("malformed bracket atom"));
        }
        self.pos += 1;
        let atom = Atom {
            element,
            formal_charge: charge,
        };
        if element.valence_with_charge(charge).is_none() {
            return Err(SmilesError::Unsupported {
                pos: start,
                what: format!("charge {charge} on {element}"),
            });
        }
        Ok(ParsedAtom {
            atom,
            aromatic,
            bracket_h: Some(h),
        })
    }
}

/// Resolves aromatic bonds to alternating single/double orders: every
/// aromatic atom with spare valence must receive exactly one double bond,
/// which is a perfect matching on the subgraph of such atoms.
fn kekulize(
    atoms: &[ParsedAtom],
    bonds: &[(usize, usize, BondSym)],
) -> Result<Vec<u8>, SmilesError> {
    let n = atoms.len();
    let mut base = vec![0u8; n];
    for &(a, b, sym) in bonds {
        let o = match sym {
            BondSym::Single | BondSym::Aromatic => 1,
            BondSym::Double => 2,
            BondSym::Triple => 3,
        };
        base[a] += o;
        base[b] += o;
    }
    let needs: Vec<bool> = atoms
        .iter()
        .enumerate()
        .map(|(v, a)| {
            a.aromatic && {
                let used = base[v] + a.bracket_h.unwrap_or(0);
                a.atom.max_valence() > used
            }
        })
        .collect();

    // candidate aromatic bonds between two atoms that both need a double bond
    let mut options: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (i, &(a, b, sym)) in bonds.iter().enumerate() {
        if sym == BondSym::Aromatic && needs[a] && needs[b] {
            options[a].push((b, i));
            options[b].push((a, i));
        }
    }
    let mut mate: Vec<Option<usize>> = vec![None; n];
    let mut chosen = vec![false; bonds.len()];
    // independent ring systems are matched separately so a failure in one
    // does not trigger backtracking through the others
    let mut component = vec![usize::MAX; n];
    let mut count = 0;
    for start in 0..n {
        if !needs[start] || component[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        component[start] = count;
        while let Some(v) = stack.pop() {
            for &(u, _) in &options[v] {
                if component[u] == usize::MAX {
                    component[u] = count;
                    stack.push(u);
                }
            }
        }
        count += 1;
    }
    for c in 0..count {
        let part: Vec<bool> = (0..n).map(|v| needs[v] && component[v] == c).collect();
        if !match_all(&part, &options, &mut mate, &mut chosen) {
            return Err(SmilesError::Kekulization);
        }
    }
    Ok(bonds
        .iter()
        .zip(&chosen)
        .map(|(&(_, _, sym), &dbl)| match sym {
            BondSym::Single => 1,
            BondSym::Double => 2,
            BondSym::Triple => 3,
            BondSym::Aromatic => {
                if dbl {
                    2
                } else {
                    1
                }
            }
        })
        .collect())
}

fn match_all(
    needs: &[bool],
    options: &[Vec<(usize, usize)>],
    mate: &mut [Option<usize>],
    chosen: &mut [bool],
) -> bool {
    // most constrained unmatched atom first
    let mut pick: Option<(usize, usize)> = None;
    for v in 0..needs.len() {
        if needs[v] && mate[v].is_none() {
            let free = options[v]
                .iter()
                .filter(|(u, _)| mate[*u].is_none())
                .count();
            if free == 0 {
                return false;
            }
            if pick.is_none_or(|(_, f)| free < f) {
                pick = Some((v, free));
            }
        }
    }
    let Some((v, _)) = pick else {
        return true;
    };
    for &(u, bond) in &options[v] {
        if mate[u].is_some() {
            continue;
        }
        mate[v] = Some(u);
        mate[u] = Some(v);
        chosen[bond] = true;
        if match_all(needs, options, mate, chosen) {
            return true;
        }
        mate[v] = None;
        mate[u] = None;
        chosen[bond] = false;
    }
    false
}
