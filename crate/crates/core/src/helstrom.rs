//! Minimum-error measurement separating the fault-free and faulty outputs.

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, RotationConvention};
use crate::error::{Error, Result};
use crate::faults::{faulty_variant, FaultSpec};
use crate::linalg::{self, c, CMatrix, CVector};
use crate::separator::{circuit_separator, ZERO_OVERLAP};

/// Overlaps at least this close to 1 leave nothing to measure.
pub const UNDETECTABLE_TOL: f64 = 1e-9;

const GRAM_SCHMIDT_TOL: f64 = 1e-8;

/// Probabilities of the outcomes `0`, `1` and `?`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OutcomeTriplet {
    pub p0: f64,
    pub p1: f64,
    pub p_unknown: f64,
}

impl OutcomeTriplet {
    pub fn new(p0: f64, p1: f64, p_unknown: f64) -> Self {
        OutcomeTriplet { p0, p1, p_unknown }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.p0, self.p1, self.p_unknown]
    }

    pub fn sum(&self) -> f64 {
        self.p0 + self.p1 + self.p_unknown
    }

    pub fn l1(&self, other: &OutcomeTriplet) -> f64 {
        (self.p0 - other.p0).abs() + (self.p1 - other.p1).abs() + (self.p_unknown - other.p_unknown).abs()
    }

    /// Total variation distance (half the L1 distance).
    pub fn tv(&self, other: &OutcomeTriplet) -> f64 {
        0.5 * self.l1(other)
    }

    pub fn max_abs_diff(&self, other: &OutcomeTriplet) -> f64 {
        self.as_array().iter().zip(other.as_array()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// Separator input plus the measurement `{P0, P1, P?}` for one gate.
#[derive(Clone, Debug, Serialize)]
pub struct HelstromTest {
    pub gate_index: usize,
    pub input_state: CVector,
    pub omega_plus: CVector,
    pub omega_minus: CVector,
    pub delta: f64,
    pub k: f64,
    pub kappa: f64,
    pub r1: f64,
    pub r2: f64,
}

/// Minimum error of telling apart two pure states with overlap modulus `k`.
pub fn error_probability(k: f64) -> Result<f64> {
    if !(-1e-12..=1.0 + 1e-12).contains(&k) {
        return Err(Error::InvalidArgument(format!("overlap {k} outside [0, 1]")));
    }
    let k = k.clamp(0.0, 1.0);
    Ok((1.0 - (1.0 - k * k).sqrt()) / 2.0)
}

/// Builds `Test(i)` for the circuit under the given fault model.
pub fn build_test(c: &Circuit, spec: &FaultSpec, i: usize, conv: RotationConvention) -> Result<HelstromTest> {
    let sol = circuit_separator(c, spec, i, conv)?;
    let faulty = faulty_variant(c, spec, i)?;
    let psi = c.apply(&sol.phi, conv)?;
    let psi_f = faulty.apply(&sol.phi, conv)?;
    HelstromTest::from_states(i, sol.phi, &psi, &psi_f)
}

impl HelstromTest {
    /// Measurement for the hypotheses `psi` (outcome 0) and `psi_f` (outcome 1).
    pub fn from_states(gate_index: usize, input_state: CVector, psi: &CVector, psi_f: &CVector) -> Result<Self> {
        let overlap = linalg::inner(psi, psi_f)?;
        let k = overlap.norm().min(1.0);
        if k >= 1.0 - UNDETECTABLE_TOL {
            return Err(Error::UndetectableFault { gate: gate_index });
        }
        let kappa = if k < ZERO_OVERLAP { 0.0 } else { overlap.arg() };
        let root_plus = (1.0 + k).sqrt();
        let root_minus = (1.0 - k).sqrt();
        let r1 = (root_plus + root_minus) / 2.0;
        let r2 = (root_plus - root_minus) / 2.0;

        let (plus, minus) = if k < ZERO_OVERLAP {
            (psi.clone(), psi_f.clone())
        } else {
            let denom = (1.0 - k * k).sqrt();
            let rotated = psi_f.scale(linalg::C64::from_polar(1.0, -kappa));
            let plus = psi.scale(c(r1 / denom, 0.0)).add_scaled(c(-r2 / denom, 0.0), &rotated)?;
            let minus = psi.scale(c(-r2 / denom, 0.0)).add_scaled(c(r1 / denom, 0.0), &rotated)?;
            (plus, minus)
        };

        let omega_plus = plus.normalized();
        let projection = linalg::inner(&omega_plus, &minus)?;
        let minus_orth = minus.add_scaled(-projection, &omega_plus)?;
        let omega_minus = minus_orth.normalized();
        let correction = (plus.norm() - 1.0).abs().max(projection.norm()).max((minus_orth.norm() - 1.0).abs());
        assert!(correction <= GRAM_SCHMIDT_TOL, "measurement basis drifted by {correction:e}");

        Ok(HelstromTest { gate_index, input_state, omega_plus, omega_minus, delta: r2 * r2, k, kappa, r1, r2 })
    }

    pub fn dim(&self) -> usize {
        self.input_state.dim()
    }

    pub fn p0(&self) -> CMatrix {
        CMatrix::outer(&self.omega_plus, &self.omega_plus)
    }

    pub fn p1(&self) -> CMatrix {
        CMatrix::outer(&self.omega_minus, &self.omega_minus)
    }

    pub fn p_unknown(&self) -> CMatrix {
        let n = self.dim();
        CMatrix::identity(n).sub(&self.p0()).and_then(|m| m.sub(&self.p1())).expect("projector dimensions agree")
    }

    /// Outcome probabilities for an arbitrary output state.
    pub fn probabilities(&self, sigma: &CVector) -> Result<OutcomeTriplet> {
        let p0 = linalg::inner(&self.omega_plus, sigma)?.norm_sqr();
        let p1 = linalg::inner(&self.omega_minus, sigma)?.norm_sqr();
        let p_unknown = (sigma.norm_sqr() - p0 - p1).max(0.0);
        Ok(OutcomeTriplet { p0, p1, p_unknown })
    }
}

/// Outcome probabilities of `test` applied to a circuit variant.
pub fn outcome_probs(test: &HelstromTest, variant: &Circuit, conv: RotationConvention) -> Result<OutcomeTriplet> {
    if variant.dim() != test.dim() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} qubits", test.dim().trailing_zeros()),
            got: format!("{} qubits", variant.num_qubits()),
        });
    }
    let sigma = variant.apply(&test.input_state, conv)?;
    test.probabilities(&sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{three_qubit_cnot, GateKind};
    use crate::faults::FaultModel;
    use std::f64::consts::PI;

    const HALF: RotationConvention = RotationConvention::HalfAngle;
    const FULL: RotationConvention = RotationConvention::FullAngle;

    #[test]
    fn error_probability_examples() {
        assert_eq!(error_probability(0.0).unwrap(), 0.0);
        assert_eq!(error_probability(1.0).unwrap(), 0.5);
        let d = error_probability((PI / 4.0).cos()).unwrap();
        assert!((d - 0.146_446_609_4).abs() < 1e-9);
        assert!(error_probability(1.1).is_err());
        assert!(error_probability(-0.1).is_err());
    }

    #[test]
    fn hadamard_test_is_error_free() {
        let c0 = Circuit::new(1).unwrap().with(GateKind::H, &[0]);
        let t = build_test(&c0, &FaultSpec::smgf(), 1, HALF).unwrap();
        assert!(t.delta < 1e-12);
        let psi = c0.apply(&t.input_state, HALF).unwrap();
        assert!(linalg::inner(&t.omega_plus, &psi).unwrap().norm() > 1.0 - 1e-12);
    }

    #[test]
    fn rz_delta_half_angle() {
        let c0 = Circuit::new(1).unwrap().with(GateKind::Rz(PI / 16.0), &[0]);
        let t = build_test(&c0, &FaultSpec::smgf(), 1, HALF).unwrap();
        assert!((t.delta - 0.4510).abs() < 5e-5, "{}", t.delta);
    }

    #[test]
    fn identical_fault_is_undetectable() {
        let c0 = Circuit::new(1).unwrap().with(GateKind::H, &[0]);
        let spec = FaultSpec::smgf().with_override(1, FaultModel::Replace(linalg::gates::hadamard()));
        assert!(matches!(build_test(&c0, &spec, 1, HALF), Err(Error::UndetectableFault { gate: 1 })));
    }

    #[test]
    fn basis_and_projector_invariants() {
        let c0 = three_qubit_cnot();
        let spec = FaultSpec::smgf();
        for conv in [HALF, FULL] {
            for i in 1..=c0.len() {
                let t = build_test(&c0, &spec, i, conv).unwrap();
                assert!((t.omega_plus.norm() - 1.0).abs() < 1e-9);
                assert!(linalg::inner(&t.omega_plus, &t.omega_minus).unwrap().norm() < 1e-9);
                assert!((t.r1 * t.r1 - (1.0 - t.delta)).abs() < 1e-10);
                assert!((t.delta - error_probability(t.k).unwrap()).abs() < 1e-10);
                let sum = t.p0().add(&t.p1()).unwrap().add(&t.p_unknown()).unwrap();
                assert!(sum.max_abs_diff(&CMatrix::identity(8)) < 1e-9);

                let ff = outcome_probs(&t, &c0, conv).unwrap();
                let fv = outcome_probs(&t, &faulty_variant(&c0, &spec, i).unwrap(), conv).unwrap();
                assert!(ff.max_abs_diff(&OutcomeTriplet::new(1.0 - t.delta, t.delta, 0.0)) < 1e-9);
                assert!(fv.max_abs_diff(&OutcomeTriplet::new(t.delta, 1.0 - t.delta, 0.0)) < 1e-9);
            }
        }
    }

    #[test]
    fn nonzero_kappa_still_orthonormal() {
        // Phase gate: overlap has argument pi/4, so the phase correction matters.
        let c0 = Circuit::new(1).unwrap().with(GateKind::Phase, &[0]);
        let t = build_test(&c0, &FaultSpec::smgf(), 1, HALF).unwrap();
        assert!(t.kappa.abs() > 0.1);
        assert!(linalg::inner(&t.omega_plus, &t.omega_minus).unwrap().norm() < 1e-12);
        assert!((t.delta - 0.146_446_609_4).abs() < 1e-9);
    }

    #[test]
    fn dimension_mismatch() {
        let c0 = Circuit::new(1).unwrap().with(GateKind::H, &[0]);
        let t = build_test(&c0, &FaultSpec::smgf(), 1, HALF).unwrap();
        assert!(outcome_probs(&t, &Circuit::new(2).unwrap(), HALF).is_err());
    }

    #[test]
    fn triplet_distances() {
        let a = OutcomeTriplet::new(1.0, 0.0, 0.0);
        let b = OutcomeTriplet::new(0.0, 0.5, 0.5);
        assert_eq!(a.l1(&b), 2.0);
        assert_eq!(a.tv(&b), 1.0);
        assert_eq!(a.max_abs_diff(&b), 1.0);
    }
}
