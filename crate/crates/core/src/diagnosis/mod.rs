//! Diagnostic tables, outcome sampling, classification and shot planning.

mod campaign;
mod io;

pub use campaign::{run_campaign, CampaignConfig, CampaignStep, TestOrder};
pub use io::TableMetadata;

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::circuit::{Circuit, RotationConvention};
use crate::error::{Error, Result};
use crate::faults::{faulty_variant, FaultSpec};
use crate::helstrom::{build_test, outcome_probs, HelstromTest, OutcomeTriplet};

/// One measurement result of a test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Outcome {
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "1")]
    One,
    #[serde(rename = "?")]
    Unknown,
}

impl Outcome {
    pub fn index(self) -> usize {
        match self {
            Outcome::Zero => 0,
            Outcome::One => 1,
            Outcome::Unknown => 2,
        }
    }
}

/// Grid `pi(q, r)` of outcome triplets for `Test(q)` applied to `C^r`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticTable {
    metadata: TableMetadata,
    deltas: Vec<Option<f64>>,
    cells: Vec<Option<Vec<OutcomeTriplet>>>,
}

impl DiagnosticTable {
    pub fn new(
        metadata: TableMetadata,
        deltas: Vec<Option<f64>>,
        cells: Vec<Option<Vec<OutcomeTriplet>>>,
    ) -> Result<Self> {
        let s = cells.len();
        if deltas.len() != s || metadata.gates != s {
            return Err(Error::TableMismatch(format!("{s} rows, {} deltas, {} gates", deltas.len(), metadata.gates)));
        }
        for (q, (row, delta)) in cells.iter().zip(&deltas).enumerate() {
            if row.is_some() != delta.is_some() {
                return Err(Error::TableMismatch(format!("row {} has inconsistent detectability", q + 1)));
            }
            if let Some(row) = row {
                if row.len() != s + 1 {
                    return Err(Error::TableMismatch(format!(
                        "row {} has {} columns, expected {}",
                        q + 1,
                        row.len(),
                        s + 1
                    )));
                }
            }
        }
        Ok(DiagnosticTable { metadata, deltas, cells })
    }

    pub fn metadata(&self) -> &TableMetadata {
        &self.metadata
    }

    /// Number of gates `s`; the table has `s` rows and `s + 1` columns.
    pub fn gates(&self) -> usize {
        self.cells.len()
    }

    pub fn is_detectable(&self, q: usize) -> bool {
        q >= 1 && q <= self.gates() && self.cells[q - 1].is_some()
    }

    /// Rows whose fault cannot be observed at the outputs.
    pub fn undetectable(&self) -> Vec<usize> {
        (1..=self.gates()).filter(|&q| !self.is_detectable(q)).collect()
    }

    /// Error probability of `Test(q)`, `None` for undetectable rows.
    pub fn delta(&self, q: usize) -> Option<f64> {
        self.deltas.get(q.checked_sub(1)?).copied().flatten()
    }

    /// Row `q` (1-based), `None` for undetectable rows.
    pub fn row(&self, q: usize) -> Option<&[OutcomeTriplet]> {
        self.cells.get(q.checked_sub(1)?)?.as_deref()
    }

    /// Cell `pi(q, r)`.
    pub fn cell(&self, q: usize, r: usize) -> Option<&OutcomeTriplet> {
        self.row(q)?.get(r)
    }

    fn check_row(&self, q: usize) -> Result<&[OutcomeTriplet]> {
        if q == 0 || q > self.gates() {
            return Err(Error::GateIndexOutOfRange { index: q, lo: 1, hi: self.gates() });
        }
        self.row(q).ok_or(Error::UndetectableFault { gate: q })
    }
}

/// Hex SHA-256 of arbitrary text.
pub fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

/// Hash of the canonical text form of a circuit.
pub fn circuit_hash(c: &Circuit) -> String {
    sha256_hex(&c.to_string())
}

/// Hash of the canonical JSON form of a fault spec.
pub fn fault_spec_hash(spec: &FaultSpec) -> String {
    sha256_hex(&spec.to_json())
}

/// `Test(q)` for every gate; `None` marks undetectable faults.
pub fn build_tests(c: &Circuit, spec: &FaultSpec, conv: RotationConvention) -> Result<Vec<Option<HelstromTest>>> {
    spec.validate(c)?;
    (1..=c.len())
        .into_par_iter()
        .map(|q| match build_test(c, spec, q, conv) {
            Ok(t) => Ok(Some(t)),
            Err(Error::UndetectableFault { .. }) => Ok(None),
            Err(e) => Err(e),
        })
        .collect()
}

/// Tabulates the given tests against every variant `C^0 .. C^s`.
pub fn table_from_tests(
    c: &Circuit,
    spec: &FaultSpec,
    conv: RotationConvention,
    tests: &[Option<HelstromTest>],
) -> Result<DiagnosticTable> {
    let s = c.len();
    if tests.len() != s {
        return Err(Error::TableMismatch(format!("{} tests for {s} gates", tests.len())));
    }
    let variants: Vec<Circuit> = (0..=s).map(|r| faulty_variant(c, spec, r)).collect::<Result<_>>()?;
    let cells = tests
        .par_iter()
        .map(|t| {
            t.as_ref()
                .map(|t| variants.iter().map(|v| outcome_probs(t, v, conv)).collect::<Result<Vec<_>>>())
                .transpose()
        })
        .collect::<Result<Vec<_>>>()?;
    let deltas = tests.iter().map(|t| t.as_ref().map(|t| t.delta)).collect();
    DiagnosticTable::new(TableMetadata::for_inputs(c, spec, conv), deltas, cells)
}

/// Diagnostic table for every gate of `c`; undetectable rows are marked, not fatal.
pub fn build_table(c: &Circuit, spec: &FaultSpec, conv: RotationConvention) -> Result<DiagnosticTable> {
    let tests = build_tests(c, spec, conv)?;
    table_from_tests(c, spec, conv, &tests)
}

/// Draws one outcome from a triplet by inverting its CDF.
pub fn sample_triplet<R: Rng + ?Sized>(p: &OutcomeTriplet, rng: &mut R) -> Outcome {
    let u: f64 = rng.random();
    if u < p.p0 {
        Outcome::Zero
    } else if u < p.p0 + p.p1 {
        Outcome::One
    } else {
        Outcome::Unknown
    }
}

/// Runs `test` once on `variant` and measures.
pub fn sample_outcome<R: Rng + ?Sized>(
    test: &HelstromTest,
    variant: &Circuit,
    rng: &mut R,
    conv: RotationConvention,
) -> Result<Outcome> {
    Ok(sample_triplet(&outcome_probs(test, variant, conv)?, rng))
}

/// Empirical triplet from outcome counts `[n0, n1, n?]`.
pub fn empirical(counts: [usize; 3]) -> OutcomeTriplet {
    let n = counts.iter().sum::<usize>().max(1) as f64;
    OutcomeTriplet::new(counts[0] as f64 / n, counts[1] as f64 / n, counts[2] as f64 / n)
}

/// Outcome of classification or of a campaign.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagnosisResult {
    /// `0` for fault-free, otherwise the faulty gate index.
    pub verdict: usize,
    pub evaluations_used: usize,
    /// Empirical triplet per observed test.
    pub empirical: BTreeMap<usize, OutcomeTriplet>,
    /// Aggregate L1 distance from the observations to each column `r`.
    pub scores: Vec<f64>,
    pub survivors: Vec<usize>,
    pub history: Vec<CampaignStep>,
}

/// `sum_q L1(observed(q), pi(q, r))` for every column `r`.
pub fn column_scores(table: &DiagnosticTable, observations: &BTreeMap<usize, OutcomeTriplet>) -> Result<Vec<f64>> {
    let mut scores = vec![0.0; table.gates() + 1];
    for (&q, obs) in observations {
        let row = table.check_row(q)?;
        for (score, cell) in scores.iter_mut().zip(row) {
            *score += obs.l1(cell);
        }
    }
    Ok(scores)
}

/// Index of the smallest score among `candidates`, ties toward the smaller index.
pub(crate) fn argmin(scores: &[f64], candidates: impl IntoIterator<Item = usize>) -> Option<usize> {
    candidates.into_iter().fold(None, |best, r| match best {
        Some(b) if scores[b] <= scores[r] => Some(b),
        _ => Some(r),
    })
}

/// Nearest column by aggregate L1 distance, ties toward fault-free.
pub fn classify(table: &DiagnosticTable, observations: &BTreeMap<usize, OutcomeTriplet>) -> Result<DiagnosisResult> {
    if observations.is_empty() {
        return Err(Error::InvalidArgument("classification needs at least one observed test".into()));
    }
    let scores = column_scores(table, observations)?;
    let verdict = argmin(&scores, 0..scores.len()).expect("table has at least one column");
    Ok(DiagnosisResult {
        verdict,
        evaluations_used: 0,
        empirical: observations.clone(),
        survivors: (0..scores.len()).collect(),
        scores,
        history: Vec::new(),
    })
}

/// Shots for a majority vote to err with probability at most `epsilon`.
pub fn plan_shots(delta: f64, epsilon: f64) -> Result<u64> {
    if !(0.0..0.5).contains(&delta) {
        if delta >= 0.5 {
            return Err(Error::UndetectableFault { gate: 0 });
        }
        return Err(Error::InvalidArgument(format!("error probability {delta} is negative")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidArgument(format!("confidence target {epsilon} outside (0, 1)")));
    }
    if delta < 1e-12 {
        return Ok(1);
    }
    let gap = 0.5 - delta;
    let n = ((1.0 / epsilon).ln() / (2.0 * gap * gap)).ceil();
    Ok((n as u64).max(1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{three_qubit_cnot, GateKind};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const FULL: RotationConvention = RotationConvention::FullAngle;

    #[test]
    fn plan_shots_examples() {
        assert_eq!(plan_shots(0.0, 0.05).unwrap(), 1);
        assert_eq!(plan_shots(0.25, 0.05).unwrap(), 24);
        assert!(matches!(plan_shots(0.5, 0.05), Err(Error::UndetectableFault { .. })));
        assert!(plan_shots(0.25, 0.0).is_err());
        assert!(plan_shots(0.25, 1.0).is_err());
        assert!(plan_shots(0.49, 0.05).unwrap() > 10_000);
    }

    #[test]
    fn one_gate_table() {
        let c0 = Circuit::new(1).unwrap().with(GateKind::Ry(0.7), &[0]);
        let t = build_table(&c0, &FaultSpec::smgf(), FULL).unwrap();
        assert_eq!(t.gates(), 1);
        let d = t.delta(1).unwrap();
        assert!(t.cell(1, 0).unwrap().max_abs_diff(&OutcomeTriplet::new(1.0 - d, d, 0.0)) < 1e-9);
        assert!(t.cell(1, 1).unwrap().max_abs_diff(&OutcomeTriplet::new(d, 1.0 - d, 0.0)) < 1e-9);
        assert!(t.cell(1, 2).is_none());
        assert!(t.cell(0, 0).is_none());
    }

    #[test]
    fn undetectable_rows_are_marked() {
        let id = crate::linalg::CMatrix::identity(2);
        let c0 = Circuit::new(1).unwrap().with(GateKind::H, &[0]).with(GateKind::custom(id).unwrap(), &[0]);
        let t = build_table(&c0, &FaultSpec::smgf(), FULL).unwrap();
        assert_eq!(t.undetectable(), vec![2]);
        assert!(t.is_detectable(1));
        assert!(t.delta(2).is_none());
    }

    #[test]
    fn sampling_edge_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            assert_eq!(sample_triplet(&OutcomeTriplet::new(1.0, 0.0, 0.0), &mut rng), Outcome::Zero);
            assert_eq!(sample_triplet(&OutcomeTriplet::new(0.0, 0.0, 1.0), &mut rng), Outcome::Unknown);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let half = OutcomeTriplet::new(0.5, 0.5, 0.0);
        let zeros = (0..100_000).filter(|_| sample_triplet(&half, &mut rng) == Outcome::Zero).count();
        let p = zeros as f64 / 100_000.0;
        assert!((0.49..=0.51).contains(&p), "{p}");
    }

    #[test]
    fn classify_columns_and_ties() {
        let c0 = three_qubit_cnot();
        let t = build_table(&c0, &FaultSpec::smgf(), FULL).unwrap();
        for r in 0..=t.gates() {
            let obs: BTreeMap<usize, OutcomeTriplet> = (1..=t.gates()).map(|q| (q, *t.cell(q, r).unwrap())).collect();
            assert_eq!(classify(&t, &obs).unwrap().verdict, r);
        }
        let d = t.delta(4).unwrap();
        let obs = BTreeMap::from([(4, OutcomeTriplet::new(1.0 - d, d, 0.0))]);
        // Columns 0 and 1 coincide on this row; the fault-free column wins.
        assert_eq!(classify(&t, &obs).unwrap().verdict, 0);
        assert!(classify(&t, &BTreeMap::new()).is_err());
        assert!(classify(&t, &BTreeMap::from([(9, OutcomeTriplet::default())])).is_err());
    }

    #[test]
    fn hashes_are_stable_hex() {
        let h = sha256_hex("abc");
        assert_eq!(h, "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
        assert_eq!(circuit_hash(&three_qubit_cnot()), circuit_hash(&three_qubit_cnot()));
        assert_ne!(fault_spec_hash(&FaultSpec::smgf()), circuit_hash(&three_qubit_cnot()));
    }
}
