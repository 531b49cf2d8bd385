use molevo::engine::{Engine, EngineError, Evaluation, Evaluator, RunConfig, SelectionMode};
use molevo::fingerprint::Diameter;
use molevo::molgraph::{MolecularGraph, MutationRules};
use molevo::policy::{context_keys, select_keyed, EpsilonSchedule, ExploreRule, PolicyTable};
use molevo::smiles;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

struct AlwaysPass;

impl Evaluator for AlwaysPass {
    fn evaluate(&self, _: &MolecularGraph) -> Result<Evaluation, EngineError> {
        Ok(Evaluation {
            passes: true,
            of_score: 1.0,
        })
    }
}

fn chi_square_uniform_p(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    let stat: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    1.0 - ChiSquared::new((counts.len() - 1) as f64)
        .unwrap()
        .cdf(stat)
}

#[test]
fn baseline_search_is_uniform_over_valid_mutations() {
    let cfg = RunConfig {
        selection_mode: SelectionMode::Uniform,
        seed: 11,
        ..RunConfig::default()
    };
    let mut e = Engine::new(cfg, AlwaysPass).unwrap();
    let n = e.valid_mutations(0).len();
    assert!(n > 20);
    let mut counts = vec![0u64; n];
    for _ in 0..40 * n {
        let nb = e.search_neighbour(0).unwrap().unwrap();
        assert!(nb.outcome.is_none());
        counts[nb.index] += 1;
    }
    let p = chi_square_uniform_p(&counts);
    assert!(p > 0.01, "p = {p}");
}

#[test]
fn trusted_context_gets_its_weight_share() {
    let g = smiles::parse(molevo::engine::ASPIRIN).unwrap();
    let valid = g.enumerate_valid_mutations(&MutationRules::default());
    let keys = context_keys(&valid, &g, Diameter::D0);
    let trusted = keys[0];
    let mut table = PolicyTable::new(0.05, Diameter::D0).unwrap();
    table.note_use(trusted);
    table.record(&trusted, 1).unwrap();

    // rate 1 for the trusted context, floor 0.05 for everything else
    let k = keys.iter().filter(|&&c| c == trusted).count() as f64;
    let n = valid.len() as f64;
    let share = k / (k + (n - k) * 0.05);

    let eps0 = EpsilonSchedule::Constant { eps_floor: 0.0 };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let draws = 10_000;
    let mut hits = 0;
    for _ in 0..draws {
        let mut t = table.clone();
        let out = select_keyed(
            &valid,
            &keys,
            &mut t,
            &eps0,
            0,
            ExploreRule::BelowEpsilon,
            &mut rng,
        )
        .unwrap();
        assert!(!out.explored);
        hits += u32::from(out.key == trusted);
    }
    let freq = f64::from(hits) / f64::from(draws);
    let sigma = (share * (1.0 - share) / f64::from(draws)).sqrt();
    assert!((freq - share).abs() < 4.0 * sigma, "freq {freq} vs {share}");
}
