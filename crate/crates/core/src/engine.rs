//! The evolutionary loop: parent selection, neighbourhood search with
//! uniform or policy-guided mutation choice, filtering, novelty and
//! insertion.

use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fingerprint::{ecfp, Diameter};
use crate::molgraph::{
    Element, GraphError, MolecularGraph, Mutation, MutationKind, MutationRules, DEFAULT_MAX_HEAVY,
};
use crate::policy::{
    self, context_keys, ContextKey, EpsilonSchedule, ExploreRule, PolicyError, PolicyTable,
    SelectionOutcome, DEFAULT_P_MIN,
};
use crate::realism::{score_fingerprint, RealismError, ReferenceRegistry};
use crate::smiles::{self, CanonicalKey, SmilesError};

pub const ASPIRIN: &str = "CC(=O)Oc1ccccc1C(=O)O";

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid run configuration: {0}")]
    Config(String),
    #[error("initial molecule: {0}")]
    InitSmiles(#[from] SmilesError),
    #[error(transparent)]
    Realism(#[from] RealismError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error("mutation failed to apply: {0}")]
    Mutation(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMode {
    /// Uniform draw over the valid mutations.
    Uniform,
    /// Context-aware probability matching.
    #[default]
    Policy,
}

/// Comparison of a mutant's objective against its parent's.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AcceptRule {
    #[default]
    AtLeastParent,
    StrictlyBetter,
}

impl AcceptRule {
    fn accepts(self, child: f64, parent: f64) -> bool {
        match self {
            AcceptRule::AtLeastParent => child >= parent,
            AcceptRule::StrictlyBetter => child > parent,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub steps: u64,
    pub selection_mode: SelectionMode,
    pub context_diameter: Diameter,
    pub schedule: EpsilonSchedule,
    pub p_min: f64,
    pub actions: Vec<MutationKind>,
    pub candidates: Vec<Element>,
    pub max_heavy: usize,
    pub parents_per_step: usize,
    pub attempts_per_parent: usize,
    pub init_smiles: String,
    pub filter_diameters: Vec<Diameter>,
    pub accept_rule: AcceptRule,
    pub explore_rule: ExploreRule,
    pub allow_bond_deletion: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let rules = MutationRules::default();
        RunConfig {
            seed: 0,
            steps: 500,
            selection_mode: SelectionMode::Policy,
            context_diameter: Diameter::D2,
            schedule: EpsilonSchedule::power_law(0.1, 0.35),
            p_min: DEFAULT_P_MIN,
            actions: rules.actions,
            candidates: rules.candidates,
            max_heavy: DEFAULT_MAX_HEAVY,
            parents_per_step: 10,
            attempts_per_parent: 50,
            init_smiles: ASPIRIN.to_string(),
            filter_diameters: Diameter::ALL.to_vec(),
            accept_rule: AcceptRule::default(),
            explore_rule: ExploreRule::default(),
            allow_bond_deletion: false,
        }
    }
}

impl RunConfig {
    pub fn baseline() -> Self {
        RunConfig {
            selection_mode: SelectionMode::Uniform,
            ..RunConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        let bad = |m: &str| Err(EngineError::Config(m.to_string()));
        if self.steps == 0 {
            return bad("steps must be > 0");
        }
        if self.parents_per_step == 0 {
            return bad("parents_per_step must be >= 1");
        }
        if self.attempts_per_parent == 0 {
            return bad("attempts_per_parent must be >= 1");
        }
        if self.actions.is_empty() {
            return bad("actions must not be empty");
        }
        if self.candidates.is_empty() {
            return bad("candidates must not be empty");
        }
        if self
            .candidates
            .iter()
            .enumerate()
            .any(|(i, c)| self.candidates[..i].contains(c))
        {
            return bad("candidates must be distinct");
        }
        if self.candidates.len() > usize::from(u8::MAX) {
            return bad("too many candidates");
        }
        if self.max_heavy == 0 {
            return bad("max_heavy must be >= 1");
        }
        if self.filter_diameters.is_empty() {
            return bad("filter_diameters must not be empty");
        }
        if self.context_diameter == Diameter::D4 {
            return bad("context_diameter must be 0 or 2");
        }
        if !(self.p_min > 0.0 && self.p_min < 1.0) {
            return bad("p_min must lie in (0, 1)");
        }
        self.schedule.validate()?;
        Ok(())
    }

    pub fn mutation_rules(&self) -> MutationRules {
        MutationRules {
            actions: self.actions.clone(),
            candidates: self.candidates.clone(),
            max_heavy: self.max_heavy,
            allow_bond_deletion: self.allow_bond_deletion,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub graph: MolecularGraph,
    pub key: CanonicalKey,
    pub of_score: f64,
    /// Population index of the parent; `None` for the initial molecule.
    pub parent: Option<usize>,
}

#[derive(Debug, Clone, Default)]
pub struct Population {
    /// Insertion order; index doubles as age.
    members: Vec<Individual>,
    archive: HashSet<CanonicalKey>,
}

impl Population {
    pub fn new(seed: Individual) -> Self {
        let mut p = Population::default();
        p.insert(seed);
        p
    }

    pub fn members(&self) -> &[Individual] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains_key(&self, key: &CanonicalKey) -> bool {
        self.archive.contains(key)
    }

    pub fn archive_len(&self) -> usize {
        self.archive.len()
    }

    fn insert(&mut self, ind: Individual) {
        self.archive.insert(ind.key.clone());
        self.members.push(ind);
    }

    /// Indices of the `k` best members by objective, oldest first on ties.
    pub fn best(&self, k: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.members.len()).collect();
        idx.sort_by(|&a, &b| {
            self.members[b]
                .of_score
                .total_cmp(&self.members[a].of_score)
                .then(a.cmp(&b))
        });
        idx.truncate(k);
        idx
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: u64,
    pub generated: u64,
    pub passed_sw: u64,
    pub novel: u64,
    pub inserted: u64,
}

/// Filter verdict and objective for one molecule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub passes: bool,
    pub of_score: f64,
}

pub trait Evaluator {
    fn evaluate(&self, g: &MolecularGraph) -> Result<Evaluation, EngineError>;
}

/// Silly Walks filter with objective `1 − silly score`.
#[derive(Debug, Clone, Copy)]
pub struct SillyWalks<'a> {
    registry: &'a ReferenceRegistry,
    diameters: &'a [Diameter],
    max: Diameter,
}

impl<'a> SillyWalks<'a> {
    pub fn new(
        registry: &'a ReferenceRegistry,
        diameters: &'a [Diameter],
    ) -> Result<Self, EngineError> {
        let max = *diameters.iter().max().ok_or(RealismError::NoDiameters)?;
        if let Some(&d) = diameters.iter().find(|&&d| !registry.covers(d)) {
            return Err(RealismError::DiameterNotCovered(d).into());
        }
        Ok(SillyWalks {
            registry,
            diameters,
            max,
        })
    }
}

impl Evaluator for SillyWalks<'_> {
    fn evaluate(&self, g: &MolecularGraph) -> Result<Evaluation, EngineError> {
        let s = score_fingerprint(&ecfp(g, self.max), self.registry, self.diameters)?;
        Ok(Evaluation {
            passes: s.passes(),
            of_score: 1.0 - s.value(),
        })
    }
}

pub fn objective(
    g: &MolecularGraph,
    reg: &ReferenceRegistry,
    diameters: &[Diameter],
) -> Result<f64, EngineError> {
    Ok(SillyWalks::new(reg, diameters)?.evaluate(g)?.of_score)
}

/// A mutant proposed for one parent.
#[derive(Debug, Clone, PartialEq)]
pub struct Neighbour {
    pub mutation: Mutation,
    /// Position of `mutation` in the parent's valid list.
    pub index: usize,
    pub graph: MolecularGraph,
    /// Present in policy mode.
    pub outcome: Option<SelectionOutcome>,
}

#[derive(Debug, Clone, PartialEq)]
struct MutantEval {
    key: CanonicalKey,
    eval: Evaluation,
}

/// Per-parent state that does not change between attempts.
#[derive(Debug, Default)]
struct ParentCache {
    valid: Vec<Mutation>,
    keys: Vec<ContextKey>,
    evals: Vec<Option<MutantEval>>,
}

pub struct Engine<E: Evaluator> {
    cfg: RunConfig,
    rules: MutationRules,
    evaluator: E,
    population: Population,
    table: Option<PolicyTable>,
    rng: ChaCha8Rng,
    step: u64,
    check_novelty: bool,
    selections: u64,
    caches: Vec<Option<ParentCache>>,
}

impl<E: Evaluator> Engine<E> {
    pub fn new(cfg: RunConfig, evaluator: E) -> Result<Self, EngineError> {
        cfg.validate()?;
        let graph = smiles::parse(&cfg.init_smiles)?;
        let of_score = evaluator.evaluate(&graph)?.of_score;
        let key = smiles::canonical_key(&graph);
        let table = match cfg.selection_mode {
            SelectionMode::Uniform => None,
            SelectionMode::Policy => Some(PolicyTable::new(cfg.p_min, cfg.context_diameter)?),
        };
        Ok(Engine {
            rules: cfg.mutation_rules(),
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            cfg,
            evaluator,
            population: Population::new(Individual {
                graph,
                key,
                of_score,
                parent: None,
            }),
            table,
            step: 0,
            check_novelty: true,
            selections: 0,
            caches: vec![None],
        })
    }

    /// Treat every mutant as novel (for degenerate test setups).
    pub fn without_novelty(mut self) -> Self {
        self.check_novelty = false;
        self
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    pub fn population(&self) -> &Population {
        &self.population
    }

    pub fn table(&self) -> Option<&PolicyTable> {
        self.table.as_ref()
    }

    pub fn table_mut(&mut self) -> Option<&mut PolicyTable> {
        self.table.as_mut()
    }

    /// Steps completed so far.
    pub fn steps_done(&self) -> u64 {
        self.step
    }

    /// Policy selections made so far.
    pub fn selections(&self) -> u64 {
        self.selections
    }

    fn cache(&mut self, parent: usize) -> &mut ParentCache {
        if self.caches[parent].is_none() {
            let g = &self.population.members[parent].graph;
            let valid = g.enumerate_valid_mutations(&self.rules);
            let keys = match &self.table {
                Some(t) => context_keys(&valid, g, t.context_diameter()),
                None => Vec::new(),
            };
            let evals = vec![None; valid.len()];
            self.caches[parent] = Some(ParentCache { valid, keys, evals });
        }
        self.caches[parent].as_mut().expect("filled above")
    }

    /// Valid mutations of population member `parent`, in enumeration order.
    pub fn valid_mutations(&mut self, parent: usize) -> &[Mutation] {
        &self.cache(parent).valid
    }

    /// Picks and applies one mutation to member `parent`; `None` when the
    /// parent admits no mutation.
    pub fn search_neighbour(&mut self, parent: usize) -> Result<Option<Neighbour>, EngineError> {
        let t = self.step;
        let schedule = self.cfg.schedule;
        let rule = self.cfg.explore_rule;
        self.cache(parent);
        let cache = self.caches[parent].as_ref().expect("filled above");
        if cache.valid.is_empty() {
            return Ok(None);
        }
        let (index, outcome) = match self.table.as_mut() {
            None => (
                policy::uniform_index(cache.valid.len(), &mut self.rng),
                None,
            ),
            Some(table) => {
                let out = policy::select_keyed(
                    &cache.valid,
                    &cache.keys,
                    table,
                    &schedule,
                    t,
                    rule,
                    &mut self.rng,
                )?;
                self.selections += 1;
                (out.index, Some(out))
            }
        };
        let mutation = cache.valid[index];
        let graph = self.population.members[parent]
            .graph
            .apply_mutation(&mutation)?;
        Ok(Some(Neighbour {
            mutation,
            index,
            graph,
            outcome,
        }))
    }

    fn evaluate_mutant(&mut self, parent: usize, n: &Neighbour) -> Result<MutantEval, EngineError> {
        if let Some(e) = &self.caches[parent]
            .as_ref()
            .expect("cached by search")
            .evals[n.index]
        {
            return Ok(e.clone());
        }
        let e = MutantEval {
            key: smiles::canonical_key(&n.graph),
            eval: self.evaluator.evaluate(&n.graph)?,
        };
        self.caches[parent]
            .as_mut()
            .expect("cached by search")
            .evals[n.index] = Some(e.clone());
        Ok(e)
    }

    pub fn step(&mut self) -> Result<StepRecord, EngineError> {
        let mut rec = StepRecord {
            step: self.step + 1,
            ..StepRecord::default()
        };
        for parent in self.population.best(self.cfg.parents_per_step) {
            let parent_score = self.population.members[parent].of_score;
            for _ in 0..self.cfg.attempts_per_parent {
                let Some(n) = self.search_neighbour(parent)? else {
                    break;
                };
                let m = self.evaluate_mutant(parent, &n)?;
                rec.generated += 1;
                rec.passed_sw += u64::from(m.eval.passes);
                let novel = !self.check_novelty || !self.population.contains_key(&m.key);
                rec.novel += u64::from(novel);
                if let (Some(table), Some(out)) = (self.table.as_mut(), n.outcome) {
                    table.record(&out.key, u8::from(m.eval.passes))?;
                }
                if m.eval.passes
                    && novel
                    && self.cfg.accept_rule.accepts(m.eval.of_score, parent_score)
                {
                    self.population.insert(Individual {
                        graph: n.graph,
                        key: m.key,
                        of_score: m.eval.of_score,
                        parent: Some(parent),
                    });
                    self.caches.push(None);
                    rec.inserted += 1;
                    break;
                }
            }
        }
        self.step += 1;
        Ok(rec)
    }

    /// Runs the remaining configured steps.
    pub fn run_to_end(&mut self) -> Result<Vec<StepRecord>, EngineError> {
        let mut out = Vec::with_capacity((self.cfg.steps - self.step.min(self.cfg.steps)) as usize);
        while self.step < self.cfg.steps {
            out.push(self.step()?);
        }
        Ok(out)
    }

    pub fn into_parts(self) -> (Population, Option<PolicyTable>) {
        (self.population, self.table)
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub records: Vec<StepRecord>,
    pub population: Population,
    pub table: Option<PolicyTable>,
}

impl RunOutcome {
    pub fn realism(&self) -> f64 {
        realism(&self.records)
    }

    pub fn novelty(&self) -> f64 {
        novelty(&self.records)
    }
}

pub fn run(cfg: &RunConfig, reg: &ReferenceRegistry) -> Result<RunOutcome, EngineError> {
    let eval = SillyWalks::new(reg, &cfg.filter_diameters)?;
    let mut engine = Engine::new(cfg.clone(), eval)?;
    let records = engine.run_to_end()?;
    let (population, table) = engine.into_parts();
    Ok(RunOutcome {
        records,
        population,
        table,
    })
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Σ passed_sw / Σ generated.
pub fn realism(records: &[StepRecord]) -> f64 {
    ratio(
        records.iter().map(|r| r.passed_sw).sum(),
        records.iter().map(|r| r.generated).sum(),
    )
}

/// Σ novel / Σ generated.
pub fn novelty(records: &[StepRecord]) -> f64 {
    ratio(
        records.iter().map(|r| r.novel).sum(),
        records.iter().map(|r| r.generated).sum(),
    )
}

/// Realism and novelty pooled over each window of `window` consecutive
/// steps; `len − window + 1` points, empty if the run is shorter.
pub fn sliding_window(records: &[StepRecord], window: usize) -> Vec<(f64, f64)> {
    if window == 0 || records.len() < window {
        return Vec::new();
    }
    records
        .windows(window)
        .map(|w| (realism(w), novelty(w)))
        .collect()
}
