//! Seeded diagnosis campaigns on a circuit under test.

use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{argmin, column_scores, empirical, plan_shots, sample_triplet, DiagnosisResult, DiagnosticTable};
use crate::circuit::{Circuit, RotationConvention};
use crate::error::{Error, Result};
use crate::helstrom::{outcome_probs, HelstromTest, OutcomeTriplet};

/// Margin in total variation beyond the best class that eliminates a class.
pub const REJECTION_MARGIN: f64 = 0.25;

/// Tests separating the survivors by less than this L1 distance are not
/// worth a fresh run while better tests have already been used.
pub const MIN_USEFUL_SEPARATION: f64 = 0.1;

/// Table probabilities at or below this are treated as impossible outcomes.
const IMPOSSIBLE: f64 = 1e-9;

/// Order in which tests are applied.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub enum TestOrder {
    /// Cycle through the listed test indices.
    Explicit(Vec<usize>),
    /// Pick the test that best separates the surviving classes.
    #[default]
    Adaptive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CampaignConfig {
    /// Shots per test application; `None` plans them from `delta` and `epsilon`.
    pub shots_per_test: Option<usize>,
    pub seed: u64,
    pub order: TestOrder,
    pub epsilon: f64,
    /// Maximum total circuit evaluations.
    pub budget: usize,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig { shots_per_test: Some(10), seed: 0, order: TestOrder::Adaptive, epsilon: 0.05, budget: 10_000 }
    }
}

/// One test application within a campaign.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CampaignStep {
    pub test: usize,
    /// Outcome counts `[n0, n1, n?]` of this application.
    pub counts: [usize; 3],
    pub survivors: Vec<usize>,
}

struct TestState {
    rng: ChaCha8Rng,
    probs: OutcomeTriplet,
    counts: [usize; 3],
}

/// Runs tests on `c_under_test` until a single class survives or the budget runs out.
///
/// Each test index draws from its own ChaCha8 stream (`seed`, stream `q`), so
/// outcomes of one test do not depend on how often others ran.
pub fn run_campaign(
    c_under_test: &Circuit,
    table: &DiagnosticTable,
    tests: &[Option<HelstromTest>],
    cfg: &CampaignConfig,
) -> Result<DiagnosisResult> {
    let s = table.gates();
    let conv: RotationConvention = table.metadata().convention;
    if tests.len() != s {
        return Err(Error::TableMismatch(format!("{} tests for a {s}-row table", tests.len())));
    }
    if c_under_test.num_qubits() != table.metadata().qubits {
        return Err(Error::TableMismatch(format!(
            "circuit has {} qubits, table was built for {}",
            c_under_test.num_qubits(),
            table.metadata().qubits
        )));
    }
    if cfg.shots_per_test == Some(0) {
        return Err(Error::InvalidArgument("shots per test must be at least 1".into()));
    }
    let detectable: Vec<usize> = (1..=s).filter(|&q| table.is_detectable(q) && tests[q - 1].is_some()).collect();
    if detectable.is_empty() {
        return Err(Error::InvalidArgument("no detectable test available".into()));
    }
    if let TestOrder::Explicit(order) = &cfg.order {
        if order.is_empty() {
            return Err(Error::InvalidArgument("explicit test order is empty".into()));
        }
        if let Some(&q) = order.iter().find(|q| !detectable.contains(q)) {
            return Err(Error::InvalidArgument(format!("test {q} is out of range or undetectable")));
        }
    }

    let mut states: BTreeMap<usize, TestState> = BTreeMap::new();
    let mut survivors: Vec<usize> = (0..=s).collect();
    let mut used: BTreeSet<usize> = BTreeSet::new();
    let mut history = Vec::new();
    let mut evaluations = 0;
    let mut step = 0;

    while survivors.len() > 1 && evaluations < cfg.budget {
        let q = match &cfg.order {
            TestOrder::Explicit(order) => order[step % order.len()],
            TestOrder::Adaptive => pick_adaptive(table, &detectable, &survivors, &mut used),
        };
        step += 1;
        used.insert(q);

        let test = tests[q - 1].as_ref().expect("detectable tests are present");
        let planned = match cfg.shots_per_test {
            Some(n) => n,
            None => plan_shots(test.delta, cfg.epsilon)? as usize,
        };
        let shots = planned.min(cfg.budget - evaluations);

        let state = match states.entry(q) {
            std::collections::btree_map::Entry::Occupied(e) => e.into_mut(),
            std::collections::btree_map::Entry::Vacant(e) => {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(q as u64);
                e.insert(TestState { rng, probs: outcome_probs(test, c_under_test, conv)?, counts: [0; 3] })
            }
        };
        let mut counts = [0usize; 3];
        for _ in 0..shots {
            counts[sample_triplet(&state.probs, &mut state.rng).index()] += 1;
        }
        for (total, n) in state.counts.iter_mut().zip(counts) {
            *total += n;
        }
        evaluations += shots;

        survivors = eliminate(table, &states, &survivors, cfg.shots_per_test.unwrap_or(planned));
        history.push(CampaignStep { test: q, counts, survivors: survivors.clone() });
    }

    if survivors.len() > 1 {
        return Err(Error::AmbiguousDiagnosis { survivors, evaluations });
    }
    let observations: BTreeMap<usize, OutcomeTriplet> =
        states.iter().map(|(&q, st)| (q, empirical(st.counts))).collect();
    let scores = if observations.is_empty() { vec![0.0; s + 1] } else { column_scores(table, &observations)? };
    Ok(DiagnosisResult {
        verdict: survivors[0],
        evaluations_used: evaluations,
        empirical: observations,
        scores,
        survivors,
        history,
    })
}

/// Greedy choice: the unused test maximizing the minimum pairwise L1 distance
/// between surviving columns. Once every useful test has run, the used set resets.
fn pick_adaptive(
    table: &DiagnosticTable,
    detectable: &[usize],
    survivors: &[usize],
    used: &mut BTreeSet<usize>,
) -> usize {
    let separation = |q: usize| -> f64 {
        let row = table.row(q).expect("detectable row");
        let mut min = f64::INFINITY;
        for (a, &ra) in survivors.iter().enumerate() {
            for &rb in &survivors[a + 1..] {
                min = min.min(row[ra].l1(&row[rb]));
            }
        }
        min
    };
    let best = |candidates: &mut dyn Iterator<Item = usize>| -> Option<(usize, f64)> {
        candidates.map(|q| (q, separation(q))).fold(None, |acc, (q, sep)| match acc {
            Some((_, best)) if best >= sep => acc,
            _ => Some((q, sep)),
        })
    };
    let overall = best(&mut detectable.iter().copied()).expect("at least one detectable test");
    let fresh = best(&mut detectable.iter().copied().filter(|q| !used.contains(q)));
    match fresh {
        Some((q, sep)) if sep >= MIN_USEFUL_SEPARATION || sep >= overall.1 => q,
        _ => {
            used.clear();
            overall.0
        }
    }
}

/// Drops classes that are impossible given the observed outcomes, or whose
/// batch-weighted total variation exceeds the best class by the margin.
fn eliminate(
    table: &DiagnosticTable,
    states: &BTreeMap<usize, TestState>,
    survivors: &[usize],
    batch: usize,
) -> Vec<usize> {
    let possible: Vec<usize> = survivors
        .iter()
        .copied()
        .filter(|&r| {
            states.iter().all(|(&q, st)| {
                let cell = table.cell(q, r).expect("detectable row").as_array();
                st.counts.iter().zip(cell).all(|(&n, p)| n == 0 || p > IMPOSSIBLE)
            })
        })
        .collect();
    let pool = if possible.is_empty() { survivors.to_vec() } else { possible };

    let mut scores = vec![0.0; table.gates() + 1];
    for (&q, st) in states {
        let emp = empirical(st.counts);
        let weight = st.counts.iter().sum::<usize>() as f64 / batch.max(1) as f64;
        for &r in &pool {
            scores[r] += weight * emp.tv(table.cell(q, r).expect("detectable row"));
        }
    }
    let best = argmin(&scores, pool.iter().copied()).expect("non-empty pool");
    pool.into_iter().filter(|&r| scores[r] <= scores[best] + REJECTION_MARGIN).collect()
}
