//! Context-aware mutation selection as a sleeping bandit with probability
//! matching.
//!
//! Each valid mutation maps to a context key (action, fingerprint identifier
//! of its focal atom, option). Contexts accumulate use and success counters;
//! at selection time the awake mutations are weighted by their floored
//! success rates and sampled roulette-wheel style, with an epsilon-scheduled
//! uniform exploration branch on top.

use std::collections::HashMap;
use std::fmt;
use std::io::{self, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fingerprint::{ecfp, Diameter, EcfpId};
use crate::molgraph::{MolecularGraph, Mutation, MutationKind};
use crate::smiles;

/// Default floor on context success rates.
pub const DEFAULT_P_MIN: f64 = 0.05;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolicyError {
    #[error("no valid mutations to choose from")]
    NoCandidates,
    #[error("reward {0} outside {{0, 1}}")]
    InvalidReward(u8),
    #[error("reward recorded for a context with no outstanding use")]
    UnmatchedReward,
    #[error("p_min must lie in (0, 1), got {0}")]
    InvalidPMin(f64),
    #[error("context diameter must be 0 or 2, got {0}")]
    InvalidContextDiameter(u8),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("position {pos} outside 1..={len}")]
    PositionOutOfRange { pos: usize, len: usize },
    #[error("keys and mutations differ in length")]
    KeyMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ContextKey {
    pub action: MutationKind,
    pub env_id: EcfpId,
    /// Candidate index for AddA, target bond order for ChB, none for RmA.
    pub option: Option<u8>,
}

impl fmt::Display for ContextKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.option {
            Some(o) => write!(f, "{}:{}:{}", self.action, self.env_id, o),
            None => write!(f, "{}:{}", self.action, self.env_id),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ContextStats {
    pub n_uses: u64,
    pub n_success: u64,
}

pub fn success_rate(s: ContextStats) -> f64 {
    if s.n_uses == 0 {
        0.0
    } else {
        s.n_success as f64 / s.n_uses as f64
    }
}

/// Normalized selection weights `max(p_min, p) / Σ max(p_min, p)`.
pub fn weights(rates: &[f64], p_min: f64) -> Result<Vec<f64>, PolicyError> {
    if rates.is_empty() {
        return Err(PolicyError::NoCandidates);
    }
    if p_min.is_nan() || p_min <= 0.0 {
        return Err(PolicyError::InvalidPMin(p_min));
    }
    let floored: Vec<f64> = rates.iter().map(|&p| p.max(p_min)).collect();
    let total: f64 = floored.iter().sum();
    Ok(floored.into_iter().map(|w| w / total).collect())
}

/// Exploration rate over steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", try_from = "ScheduleRepr")]
pub enum EpsilonSchedule {
    Constant {
        eps_floor: f64,
    },
    /// `max(eps_floor, eps0 · exp(−lambda · t))`
    Greedy {
        eps_floor: f64,
        eps0: f64,
        lambda: f64,
    },
    /// `max(eps_floor, eps0 / (1 + t)^alpha)`
    PowerLaw {
        eps_floor: f64,
        eps0: f64,
        alpha: f64,
    },
}

#[derive(Deserialize)]
#[serde(rename_all = "snake_case")]
enum ScheduleKind {
    Constant,
    Greedy,
    PowerLaw,
}

// Flat form so that type errors keep their field path (`schedule.eps_floor`),
// which an internally tagged enum would lose to content buffering.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScheduleRepr {
    kind: ScheduleKind,
    eps_floor: f64,
    eps0: Option<f64>,
    lambda: Option<f64>,
    alpha: Option<f64>,
}

impl TryFrom<ScheduleRepr> for EpsilonSchedule {
    type Error = String;

    fn try_from(r: ScheduleRepr) -> Result<Self, String> {
        let eps0 = r.eps0.unwrap_or(1.0);
        match r.kind {
            ScheduleKind::Constant => match (r.eps0, r.lambda, r.alpha) {
                (None, None, None) => Ok(EpsilonSchedule::Constant {
                    eps_floor: r.eps_floor,
                }),
                _ => Err("constant schedule takes only `eps_floor`".into()),
            },
            ScheduleKind::Greedy => match (r.lambda, r.alpha) {
                (Some(lambda), None) => Ok(EpsilonSchedule::Greedy {
                    eps_floor: r.eps_floor,
                    eps0,
                    lambda,
                }),
                (None, _) => Err("greedy schedule needs `lambda`".into()),
                _ => Err("greedy schedule does not take `alpha`".into()),
            },
            ScheduleKind::PowerLaw => match (r.alpha, r.lambda) {
                (Some(alpha), None) => Ok(EpsilonSchedule::PowerLaw {
                    eps_floor: r.eps_floor,
                    eps0,
                    alpha,
                }),
                (None, _) => Err("power_law schedule needs `alpha`".into()),
                _ => Err("power_law schedule does not take `lambda`".into()),
            },
        }
    }
}

impl EpsilonSchedule {
    pub fn power_law(eps_floor: f64, alpha: f64) -> Self {
        EpsilonSchedule::PowerLaw {
            eps_floor,
            eps0: 1.0,
            alpha,
        }
    }

    pub fn greedy(eps_floor: f64, lambda: f64) -> Self {
        EpsilonSchedule::Greedy {
            eps_floor,
            eps0: 1.0,
            lambda,
        }
    }

    pub fn eps_floor(&self) -> f64 {
        match *self {
            EpsilonSchedule::Constant { eps_floor }
            | EpsilonSchedule::Greedy { eps_floor, .. }
            | EpsilonSchedule::PowerLaw { eps_floor, .. } => eps_floor,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            EpsilonSchedule::Constant { .. } => "constant",
            EpsilonSchedule::Greedy { .. } => "greedy",
            EpsilonSchedule::PowerLaw { .. } => "power_law",
        }
    }

    /// Short label such as `power_law(alpha=0.35)`.
    pub fn label(&self) -> String {
        match *self {
            EpsilonSchedule::Constant { .. } => "constant".to_string(),
            EpsilonSchedule::Greedy { lambda, .. } => format!("greedy(lambda={lambda})"),
            EpsilonSchedule::PowerLaw { alpha, .. } => format!("power_law(alpha={alpha})"),
        }
    }

    pub fn validate(&self) -> Result<(), PolicyError> {
        let bad = |m: String| Err(PolicyError::InvalidSchedule(m));
        let check_floor = |floor: f64, eps0: f64| {
            if !(floor > 0.0 && floor <= eps0 && eps0 <= 1.0) {
                bad(format!(
                    "need 0 < eps_floor <= eps0 <= 1, got eps_floor={floor}, eps0={eps0}"
                ))
            } else {
                Ok(())
            }
        };
        match *self {
            EpsilonSchedule::Constant { eps_floor } => check_floor(eps_floor, 1.0),
            EpsilonSchedule::Greedy {
                eps_floor,
                eps0,
                lambda,
            } => {
                check_floor(eps_floor, eps0)?;
                if lambda > 0.0 {
                    Ok(())
                } else {
                    bad(format!("lambda must be > 0, got {lambda}"))
                }
            }
            EpsilonSchedule::PowerLaw {
                eps_floor,
                eps0,
                alpha,
            } => {
                check_floor(eps_floor, eps0)?;
                if alpha > 0.0 {
                    Ok(())
                } else {
                    bad(format!("alpha must be > 0, got {alpha}"))
                }
            }
        }
    }

    /// Exploration rate at step `t`. Uses a portable libm so that runs are
    /// bit-identical across platforms.
    pub fn epsilon_at(&self, t: u64) -> f64 {
        let t = t as f64;
        match *self {
            EpsilonSchedule::Constant { eps_floor } => eps_floor,
            EpsilonSchedule::Greedy {
                eps_floor,
                eps0,
                lambda,
            } => eps_floor.max(eps0 * libm::exp(-lambda * t)),
            EpsilonSchedule::PowerLaw {
                eps_floor,
                eps0,
                alpha,
            } => eps_floor.max(eps0 / libm::pow(1.0 + t, alpha)),
        }
    }
}

/// Which side of the epsilon comparison triggers uniform exploration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExploreRule {
    /// Explore when the uniform draw falls below epsilon (probability epsilon).
    #[default]
    BelowEpsilon,
    /// Explore when the draw exceeds epsilon (probability 1 − epsilon).
    AboveEpsilon,
}

impl ExploreRule {
    fn explores(self, u: f64, eps: f64) -> bool {
        match self {
            ExploreRule::BelowEpsilon => u < eps,
            ExploreRule::AboveEpsilon => u > eps,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyTable {
    stats: HashMap<ContextKey, ContextStats>,
    p_min: f64,
    context_diameter: Diameter,
}

impl PolicyTable {
    pub fn new(p_min: f64, context_diameter: Diameter) -> Result<Self, PolicyError> {
        if !(p_min > 0.0 && p_min < 1.0) {
            return Err(PolicyError::InvalidPMin(p_min));
        }
        if context_diameter == Diameter::D4 {
            return Err(PolicyError::InvalidContextDiameter(4));
        }
        Ok(PolicyTable {
            stats: HashMap::new(),
            p_min,
            context_diameter,
        })
    }

    pub fn p_min(&self) -> f64 {
        self.p_min
    }

    pub fn context_diameter(&self) -> Diameter {
        self.context_diameter
    }

    pub fn stats(&self, key: &ContextKey) -> ContextStats {
        self.stats.get(key).copied().unwrap_or_default()
    }

    pub fn rate(&self, key: &ContextKey) -> f64 {
        success_rate(self.stats(key))
    }

    pub fn len(&self) -> usize {
        self.stats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stats.is_empty()
    }

    /// Counts one selection of `key`.
    pub fn note_use(&mut self, key: ContextKey) {
        self.stats.entry(key).or_default().n_uses += 1;
    }

    /// Adds the observed reward for a context previously counted as used.
    pub fn record(&mut self, key: &ContextKey, reward: u8) -> Result<(), PolicyError> {
        if reward > 1 {
            return Err(PolicyError::InvalidReward(reward));
        }
        let s = self
            .stats
            .get_mut(key)
            .ok_or(PolicyError::UnmatchedReward)?;
        if s.n_success + u64::from(reward) > s.n_uses {
            return Err(PolicyError::UnmatchedReward);
        }
        s.n_success += u64::from(reward);
        Ok(())
    }

    /// Entries sorted by key.
    pub fn entries(&self) -> Vec<(ContextKey, ContextStats)> {
        let mut v: Vec<_> = self.stats.iter().map(|(k, s)| (*k, *s)).collect();
        v.sort_by_key(|(k, _)| *k);
        v
    }

    /// Tab-separated dump: `action env_id option n_uses n_success rate`.
    pub fn write_dump<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "action\tenv_id\toption\tn_uses\tn_success\trate")?;
        for (k, s) in self.entries() {
            let option = k.option.map_or("-".to_string(), |o| o.to_string());
            writeln!(
                w,
                "{}\t{}\t{}\t{}\t{}\t{:.6}",
                k.action,
                k.env_id,
                option,
                s.n_uses,
                s.n_success,
                success_rate(s)
            )?;
        }
        Ok(())
    }
}

/// Context key of every mutation in `valid`, enumerated on `g`.
///
/// The focal atom is the mutated position; for a bond change it is the
/// endpoint with the smaller canonical rank.
pub fn context_keys(valid: &[Mutation], g: &MolecularGraph, diameter: Diameter) -> Vec<ContextKey> {
    let fp = ecfp(g, diameter);
    let radius = diameter.radius();
    let ranks = if valid.iter().any(|m| m.kind() == MutationKind::ChangeBond) {
        smiles::canonical_ranks(g)
    } else {
        Vec::new()
    };
    valid
        .iter()
        .map(|m| match *m {
            Mutation::AddAtom {
                position,
                candidate,
                ..
            } => ContextKey {
                action: MutationKind::AddAtom,
                env_id: fp.atom_id(position, radius),
                option: Some(candidate as u8),
            },
            Mutation::RemoveAtom { position } => ContextKey {
                action: MutationKind::RemoveAtom,
                env_id: fp.atom_id(position, radius),
                option: None,
            },
            Mutation::ChangeBond {
                position,
                partner,
                order,
            } => {
                let focal = if ranks[position] <= ranks[partner] {
                    position
                } else {
                    partner
                };
                ContextKey {
                    action: MutationKind::ChangeBond,
                    env_id: fp.atom_id(focal, radius),
                    option: Some(order),
                }
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionOutcome {
    pub mutation: Mutation,
    /// Index of `mutation` in the valid list it was drawn from.
    pub index: usize,
    pub key: ContextKey,
    pub explored: bool,
    /// Normalized weight of the chosen mutation on the exploitation branch.
    pub weight_used: Option<f64>,
}

/// Picks one of `valid` (enumerated on `g`) and counts the use of its context.
pub fn select<R: Rng + ?Sized>(
    valid: &[Mutation],
    g: &MolecularGraph,
    table: &mut PolicyTable,
    schedule: &EpsilonSchedule,
    t: u64,
    rng: &mut R,
) -> Result<SelectionOutcome, PolicyError> {
    let keys = context_keys(valid, g, table.context_diameter());
    select_keyed(
        valid,
        &keys,
        table,
        schedule,
        t,
        ExploreRule::default(),
        rng,
    )
}

/// As [`select`], with the context keys already computed.
///
/// Draw order: one uniform `u` for the explore test, then either a uniform
/// index (explore) or one roulette draw (exploit).
pub fn select_keyed<R: Rng + ?Sized>(
    valid: &[Mutation],
    keys: &[ContextKey],
    table: &mut PolicyTable,
    schedule: &EpsilonSchedule,
    t: u64,
    rule: ExploreRule,
    rng: &mut R,
) -> Result<SelectionOutcome, PolicyError> {
    if valid.is_empty() {
        return Err(PolicyError::NoCandidates);
    }
    if keys.len() != valid.len() {
        return Err(PolicyError::KeyMismatch);
    }
    let u: f64 = rng.gen();
    let eps = schedule.epsilon_at(t);
    let (index, explored, weight_used) = if rule.explores(u, eps) {
        (uniform_index(valid.len(), rng), true, None)
    } else {
        let rates: Vec<f64> = keys.iter().map(|k| table.rate(k)).collect();
        let w = weights(&rates, table.p_min())?;
        let j = roulette(&w, rng);
        (j, false, Some(w[j]))
    };
    let key = keys[index];
    table.note_use(key);
    Ok(SelectionOutcome {
        mutation: valid[index],
        index,
        key,
        explored,
        weight_used,
    })
}

/// Uniform index in `0..n`, drawn through `u64` so results do not depend on
/// the platform's pointer width.
pub fn uniform_index<R: Rng + ?Sized>(n: usize, rng: &mut R) -> usize {
    rng.gen_range(0..n as u64) as usize
}

/// Fitness-proportional draw over `weights` (any positive scale).
pub fn roulette<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let target = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    for (j, &w) in weights.iter().enumerate() {
        acc += w;
        if target < acc {
            return j;
        }
    }
    weights.len() - 1
}

/// Reporting index combining a 1-based position in a listing of `len`
/// environment identifiers with a 0-based option: `pos + option·(len + 1)`.
pub fn encode_index(pos: usize, len: usize, option_idx: usize) -> Result<usize, PolicyError> {
    if pos == 0 || pos > len {
        return Err(PolicyError::PositionOutOfRange { pos, len });
    }
    Ok(pos + option_idx * (len + 1))
}

/// Inverse of [`encode_index`]: `(pos, option_idx)`.
pub fn decode_index(index: usize, len: usize) -> Result<(usize, usize), PolicyError> {
    let pos = index % (len + 1);
    if pos == 0 {
        return Err(PolicyError::PositionOutOfRange { pos, len });
    }
    Ok((pos, index / (len + 1)))
}

/// 1-based position of `id` in a sorted identifier listing.
pub fn listing_position(listing: &[EcfpId], id: EcfpId) -> Option<usize> {
    listing.binary_search(&id).ok().map(|i| i + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::MutationRules;
    use crate::smiles::parse;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn schedule_toml_forms() {
        let s: EpsilonSchedule =
            toml::from_str("kind = \"power_law\"\neps_floor = 0.2\nalpha = 0.5").unwrap();
        assert_eq!(s, EpsilonSchedule::power_law(0.2, 0.5));
        let back: EpsilonSchedule = toml::from_str(&toml::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
        let g: EpsilonSchedule =
            toml::from_str("kind = \"greedy\"\neps_floor = 0.1\nlambda = 0.01\neps0 = 0.5")
                .unwrap();
        assert_eq!(g.epsilon_at(0), 0.5);
        for bad in [
            "kind = \"power_law\"\neps_floor = 0.2",
            "kind = \"greedy\"\neps_floor = 0.2\nlambda = 1.0\nalpha = 1.0",
            "kind = \"constant\"\neps_floor = 0.2\nalpha = 1.0",
            "kind = \"constant\"\neps_floor = 0.2\nbeta = 1.0",
        ] {
            assert!(toml::from_str::<EpsilonSchedule>(bad).is_err(), "{bad}");
        }
    }

    fn key(env: u64) -> ContextKey {
        ContextKey {
            action: MutationKind::RemoveAtom,
            env_id: env,
            option: None,
        }
    }

    #[test]
    fn rates() {
        let r = |s, u| {
            success_rate(ContextStats {
                n_uses: u,
                n_success: s,
            })
        };
        assert_eq!(r(3, 4), 0.75);
        assert_eq!(r(0, 0), 0.0);
        assert_eq!(r(5, 5), 1.0);
    }

    #[test]
    fn weight_examples() {
        let w = weights(&[0.5, 0.25], 0.05).unwrap();
        assert_eq!(w, vec![2.0 / 3.0, 1.0 / 3.0]);
        let w = weights(&[0.0, 0.0, 0.0], 0.05).unwrap();
        assert!(w.iter().all(|&x| (x - 1.0 / 3.0).abs() < 1e-15));
        assert_eq!(weights(&[0.9], 0.05).unwrap(), vec![1.0]);
        assert_eq!(weights(&[], 0.05), Err(PolicyError::NoCandidates));
        assert!(weights(&[0.1], 0.0).is_err());
    }

    #[test]
    fn schedule_start_and_floor() {
        let pl = EpsilonSchedule::power_law(0.1, 0.35);
        assert_eq!(pl.epsilon_at(0), 1.0);
        let g = EpsilonSchedule::greedy(0.1, 0.1);
        assert_eq!(g.epsilon_at(0), 1.0);
        assert_eq!(
            EpsilonSchedule::Constant { eps_floor: 0.2 }.epsilon_at(1000),
            0.2
        );
        assert_eq!(g.epsilon_at(1000), 0.1);
    }

    #[test]
    fn schedule_validation() {
        assert!(EpsilonSchedule::power_law(0.1, 0.35).validate().is_ok());
        assert!(EpsilonSchedule::power_law(0.0, 0.35).validate().is_err());
        assert!(EpsilonSchedule::power_law(0.1, 0.0).validate().is_err());
        assert!(EpsilonSchedule::greedy(0.1, -1.0).validate().is_err());
        let bad = EpsilonSchedule::PowerLaw {
            eps_floor: 0.5,
            eps0: 0.4,
            alpha: 0.3,
        };
        assert!(bad.validate().is_err());
        assert!(EpsilonSchedule::Constant { eps_floor: 1.5 }
            .validate()
            .is_err());
    }

    #[test]
    fn record_after_select() {
        let mut t = PolicyTable::new(0.05, Diameter::D0).unwrap();
        let k = key(7);
        assert_eq!(t.record(&k, 1), Err(PolicyError::UnmatchedReward));
        t.note_use(k);
        t.record(&k, 1).unwrap();
        assert_eq!(
            t.stats(&k),
            ContextStats {
                n_uses: 1,
                n_success: 1
            }
        );
        assert_eq!(t.rate(&k), 1.0);
        assert_eq!(t.record(&k, 1), Err(PolicyError::UnmatchedReward));
        assert_eq!(t.record(&k, 2), Err(PolicyError::InvalidReward(2)));

        let k2 = key(8);
        for r in [1, 1, 1, 0] {
            t.note_use(k2);
            t.record(&k2, r).unwrap();
        }
        assert_eq!(t.rate(&k2), 0.75);
    }

    #[test]
    fn table_rejects_bad_parameters() {
        assert!(PolicyTable::new(0.0, Diameter::D0).is_err());
        assert!(PolicyTable::new(1.0, Diameter::D0).is_err());
        assert!(PolicyTable::new(0.05, Diameter::D4).is_err());
    }

    #[test]
    fn encoding_examples() {
        let carbon: Vec<_> = (0..4).map(|o| encode_index(24, 33, o).unwrap()).collect();
        assert_eq!(carbon, vec![24, 58, 92, 126]);
        assert_eq!(encode_index(8, 33, 3), Ok(110));
        assert_eq!(encode_index(33, 33, 3), Ok(135));
        assert!(encode_index(0, 33, 0).is_err());
        assert!(encode_index(34, 33, 0).is_err());
        assert_eq!(decode_index(135, 33), Ok((33, 3)));
        assert!(decode_index(34, 33).is_err());
        assert_eq!(listing_position(&[3, 9, 12], 9), Some(2));
    }

    #[test]
    fn select_counts_one_use() {
        let g = parse("CCO").unwrap();
        let valid = g.enumerate_valid_mutations(&MutationRules::default());
        let mut table = PolicyTable::new(0.05, Diameter::D2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let sch = EpsilonSchedule::power_law(0.1, 0.35);
        let out = select(&valid, &g, &mut table, &sch, 0, &mut rng).unwrap();
        assert_eq!(valid[out.index], out.mutation);
        assert_eq!(table.stats(&out.key).n_uses, 1);
        assert_eq!(out.weight_used.is_some(), !out.explored);
        assert_eq!(
            select(&[], &g, &mut table, &sch, 0, &mut rng),
            Err(PolicyError::NoCandidates)
        );
    }

    #[test]
    fn explore_rule_orientation() {
        assert!(ExploreRule::BelowEpsilon.explores(0.05, 0.1));
        assert!(!ExploreRule::BelowEpsilon.explores(0.5, 0.1));
        assert!(ExploreRule::AboveEpsilon.explores(0.5, 0.1));
    }

    #[test]
    fn keys_follow_focal_atoms() {
        let g = parse("CC(=O)Oc1ccccc1C(=O)O").unwrap();
        let rules = MutationRules::default();
        let valid = g.enumerate_valid_mutations(&rules);
        let keys = context_keys(&valid, &g, Diameter::D0);
        let fp = ecfp(&g, Diameter::D0);
        for (m, k) in valid.iter().zip(&keys) {
            assert_eq!(k.action, m.kind());
            match *m {
                Mutation::AddAtom {
                    position,
                    candidate,
                    ..
                } => {
                    assert_eq!(k.env_id, fp.atom_id(position, 0));
                    assert_eq!(k.option, Some(candidate as u8));
                }
                Mutation::RemoveAtom { position } => {
                    assert_eq!(k.env_id, fp.atom_id(position, 0));
                    assert_eq!(k.option, None);
                }
                Mutation::ChangeBond {
                    position,
                    partner,
                    order,
                } => {
                    assert!(
                        k.env_id == fp.atom_id(position, 0) || k.env_id == fp.atom_id(partner, 0)
                    );
                    assert_eq!(k.option, Some(order));
                }
            }
        }
    }

    #[test]
    fn dump_format() {
        let mut t = PolicyTable::new(0.05, Diameter::D0).unwrap();
        t.note_use(key(5));
        t.record(&key(5), 1).unwrap();
        let mut out = Vec::new();
        t.write_dump(&mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "action\tenv_id\toption\tn_uses\tn_success\trate\nRmA\t5\t-\t1\t1\t1.000000\n"
        );
    }
}
