//! Single-fault test generation and diagnosis for quantum circuits.
//!
//! For every gate of a circuit the library computes an input state that best
//! separates the fault-free circuit from the one with that gate faulty, the
//! matching minimum-error measurement, and a diagnostic table used to classify
//! a circuit under test from sampled outcomes.

pub mod catalog;
pub mod circuit;
pub mod diagnosis;
pub mod error;
pub mod faults;
pub mod helstrom;
pub mod linalg;
pub mod separator;

pub use circuit::{parse_circuit, Circuit, GateKind, PlacedGate, RotationConvention};
pub use diagnosis::{
    build_table, classify, plan_shots, run_campaign, CampaignConfig, DiagnosisResult, DiagnosticTable,
};
pub use error::{Error, ParseError, Result};
pub use faults::{faulty_variant, FaultModel, FaultSpec};
pub use helstrom::{build_test, outcome_probs, HelstromTest, OutcomeTriplet};
pub use linalg::{CMatrix, CVector, C64};
pub use separator::{circuit_separator, gate_separator, solve_opt, SeparatorSolution};
