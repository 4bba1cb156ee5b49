//! Gate library, circuit representation and statevector simulation.
//!
//! Basis ordering: qubit 0 is the most significant bit of a basis index, and
//! a gate's first listed qubit is the most significant bit of its local index
//! (so CNOT and Toffoli list their controls before the target).

mod parse;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, adjoint, gates, CMatrix, CVector, C64};

pub use parse::parse_circuit;

/// Largest supported register.
pub const MAX_QUBITS: usize = 12;

/// Unitarity tolerance applied to user-supplied matrices.
pub const CUSTOM_UNITARY_TOL: f64 = 1e-8;

/// How rotation angles map onto matrices.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RotationConvention {
    /// `Ry(t)` has eigenvalues `exp(-+ i t/2)`, `Rz(t) = diag(exp(-i t/2), exp(i t/2))`.
    #[default]
    #[serde(rename = "half")]
    HalfAngle,
    /// Same matrices with `t` in place of `t/2`.
    #[serde(rename = "full")]
    FullAngle,
}

impl RotationConvention {
    fn half_angle(self, theta: f64) -> f64 {
        match self {
            RotationConvention::HalfAngle => theta / 2.0,
            RotationConvention::FullAngle => theta,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RotationConvention::HalfAngle => "half",
            RotationConvention::FullAngle => "full",
        }
    }
}

impl FromStr for RotationConvention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "half" => Ok(RotationConvention::HalfAngle),
            "full" => Ok(RotationConvention::FullAngle),
            other => Err(Error::InvalidArgument(format!("unknown rotation convention `{other}`"))),
        }
    }
}

impl fmt::Display for RotationConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum GateKind {
    H,
    X,
    Y,
    Z,
    Phase,
    Cnot,
    Toffoli,
    Ry(f64),
    Rz(f64),
    Custom(CMatrix),
}

impl GateKind {
    /// Builds a custom gate, checking that the matrix is a unitary on 1 to 3 qubits.
    pub fn custom(matrix: CMatrix) -> Result<GateKind> {
        let dim = matrix.rows();
        if !matrix.is_square() || !dim.is_power_of_two() || !(2..=8).contains(&dim) {
            return Err(Error::InvalidGate(format!(
                "custom matrix must be 2x2, 4x4 or 8x8, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let deviation = linalg::unitarity_deviation(&matrix);
        if deviation > CUSTOM_UNITARY_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(GateKind::Custom(matrix))
    }

    pub fn arity(&self) -> usize {
        match self {
            GateKind::H
            | GateKind::X
            | GateKind::Y
            | GateKind::Z
            | GateKind::Phase
            | GateKind::Ry(_)
            | GateKind::Rz(_) => 1,
            GateKind::Cnot => 2,
            GateKind::Toffoli => 3,
            GateKind::Custom(m) => m.rows().trailing_zeros() as usize,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GateKind::H => "h",
            GateKind::X => "x",
            GateKind::Y => "y",
            GateKind::Z => "z",
            GateKind::Phase => "phase",
            GateKind::Cnot => "cnot",
            GateKind::Toffoli => "toffoli",
            GateKind::Ry(_) => "ry",
            GateKind::Rz(_) => "rz",
            GateKind::Custom(_) => "custom",
        }
    }
}

/// The `2^arity x 2^arity` matrix of a gate.
pub fn gate_matrix(kind: &GateKind, conv: RotationConvention) -> CMatrix {
    match kind {
        GateKind::H => gates::hadamard(),
        GateKind::X => gates::pauli_x(),
        GateKind::Y => gates::pauli_y(),
        GateKind::Z => gates::pauli_z(),
        GateKind::Phase => gates::phase(),
        GateKind::Cnot => gates::cnot(),
        GateKind::Toffoli => gates::toffoli(),
        GateKind::Ry(theta) => gates::ry_half(conv.half_angle(*theta)),
        GateKind::Rz(theta) => gates::rz_half(conv.half_angle(*theta)),
        GateKind::Custom(m) => m.clone(),
    }
}

/// A gate together with the qubits it acts on.
#[derive(Clone, Debug, PartialEq)]
pub struct PlacedGate {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
}

impl PlacedGate {
    pub fn new(kind: GateKind, qubits: Vec<usize>) -> Result<Self> {
        if qubits.len() != kind.arity() {
            return Err(Error::InvalidGate(format!(
                "`{}` acts on {} qubit(s), got {}",
                kind.name(),
                kind.arity(),
                qubits.len()
            )));
        }
        for (i, q) in qubits.iter().enumerate() {
            if qubits[..i].contains(q) {
                return Err(Error::InvalidGate(format!("qubit q{q} repeated in `{}`", kind.name())));
            }
        }
        Ok(PlacedGate { kind, qubits })
    }

    pub fn matrix(&self, conv: RotationConvention) -> CMatrix {
        gate_matrix(&self.kind, conv)
    }
}

/// Embeds a gate into the full `2^n x 2^n` operator.
pub fn embed(g: &PlacedGate, n: usize, conv: RotationConvention) -> Result<CMatrix> {
    embed_matrix(&g.matrix(conv), &g.qubits, n)
}

/// Embeds an arbitrary `2^k x 2^k` matrix acting on `qubits` into `n` qubits.
pub fn embed_matrix(m: &CMatrix, qubits: &[usize], n: usize) -> Result<CMatrix> {
    check_register(n)?;
    if let Some(&q) = qubits.iter().find(|&&q| q >= n) {
        return Err(Error::QubitOutOfRange { index: q, qubits: n });
    }
    let dim = 1usize << n;
    let mut out = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut state = CVector::basis(dim, col);
        apply_matrix_in_place(state.as_mut_slice(), m, qubits, n);
        for (row, &amp) in state.as_slice().iter().enumerate() {
            out[(row, col)] = amp;
        }
    }
    Ok(out)
}

fn check_register(n: usize) -> Result<()> {
    if n > MAX_QUBITS {
        return Err(Error::TooManyQubits { qubits: n, max: MAX_QUBITS });
    }
    Ok(())
}

/// Applies a `2^k x 2^k` matrix to `qubits` of an `n`-qubit state.
///
/// Amplitudes are gathered in groups of `2^k` that differ only on the target
/// bits, multiplied, and scattered back.
pub(crate) fn apply_matrix_in_place(state: &mut [C64], m: &CMatrix, qubits: &[usize], n: usize) {
    let k = qubits.len();
    let local = 1usize << k;
    debug_assert_eq!(m.rows(), local);
    // Bit mask in the global index for each local bit, most significant first.
    let masks: Vec<usize> = qubits.iter().map(|&q| 1usize << (n - 1 - q)).collect();
    let target_mask: usize = masks.iter().sum();
    let offsets: Vec<usize> = (0..local)
        .map(|j| masks.iter().enumerate().filter(|(b, _)| j & (1 << (k - 1 - b)) != 0).map(|(_, &mask)| mask).sum())
        .collect();

    let mut buf = vec![C64::default(); local];
    for base in 0..state.len() {
        if base & target_mask != 0 {
            continue;
        }
        for (slot, &off) in buf.iter_mut().zip(&offsets) {
            *slot = state[base | off];
        }
        for (row, &off) in offsets.iter().enumerate() {
            let mut acc = C64::default();
            for (col, amp) in buf.iter().enumerate() {
                acc += m[(row, col)] * amp;
            }
            state[base | off] = acc;
        }
    }
}

/// An ordered list of gates on `n` qubits. Gate `i` (1-based) is applied
/// before gate `i + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    n: usize,
    gates: Vec<PlacedGate>,
}

impl Circuit {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("a circuit needs at least one qubit".into()));
        }
        check_register(n)?;
        Ok(Circuit { n, gates: Vec::new() })
    }

    pub fn from_gates(n: usize, gates: Vec<PlacedGate>) -> Result<Self> {
        let mut c = Circuit::new(n)?;
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, g: PlacedGate) -> Result<()> {
        if let Some(&q) = g.qubits.iter().find(|&&q| q >= self.n) {
            return Err(Error::QubitOutOfRange { index: q, qubits: self.n });
        }
        self.gates.push(g);
        Ok(())
    }

    /// Convenience for building circuits in code; panics on invalid input.
    pub fn with(mut self, kind: GateKind, qubits: &[usize]) -> Self {
        self.push(PlacedGate::new(kind, qubits.to_vec()).expect("invalid gate")).expect("invalid gate placement");
        self
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    /// Number of gates `s`.
    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn gates(&self) -> &[PlacedGate] {
        &self.gates
    }

    /// Gate `i`, 1-based.
    pub fn gate(&self, i: usize) -> Result<&PlacedGate> {
        self.check_index(i)?;
        Ok(&self.gates[i - 1])
    }

    pub(crate) fn check_index(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.gates.len() {
            return Err(Error::GateIndexOutOfRange { index: i, lo: 1, hi: self.gates.len() });
        }
        Ok(())
    }

    pub(crate) fn replace_gate(&mut self, i: usize, g: PlacedGate) {
        self.gates[i - 1] = g;
    }

    pub(crate) fn remove_gate(&mut self, i: usize) {
        self.gates.remove(i - 1);
    }

    fn check_state(&self, state: &CVector) -> Result<()> {
        if state.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: format!("state of dim {}", self.dim()),
                got: format!("state of dim {}", state.dim()),
            });
        }
        Ok(())
    }

    /// Runs the circuit on `state`.
    pub fn apply(&self, state: &CVector, conv: RotationConvention) -> Result<CVector> {
        self.check_state(state)?;
        let mut out = state.clone();
        for g in &self.gates {
            apply_matrix_in_place(out.as_mut_slice(), &g.matrix(conv), &g.qubits, self.n);
        }
        Ok(out)
    }

    /// Runs the inverse circuit: gates in reverse order, each adjointed.
    pub fn apply_adjoint(&self, state: &CVector, conv: RotationConvention) -> Result<CVector> {
        self.check_state(state)?;
        let mut out = state.clone();
        for g in self.gates.iter().rev() {
            apply_matrix_in_place(out.as_mut_slice(), &adjoint(&g.matrix(conv)), &g.qubits, self.n);
        }
        Ok(out)
    }

    /// The full `2^n x 2^n` unitary, built by explicit matrix products.
    pub fn unitary(&self, conv: RotationConvention) -> Result<CMatrix> {
        let mut u = CMatrix::identity(self.dim());
        for g in &self.gates {
            u = linalg::matmul(&embed(g, self.n, conv)?, &u)?;
        }
        Ok(u)
    }

    /// Splits around gate `i` (1-based): `(gates 1..i-1, gate i, gates i+1..s)`.
    pub fn split(&self, i: usize) -> Result<(Circuit, PlacedGate, Circuit)> {
        self.check_index(i)?;
        let prefix = Circuit { n: self.n, gates: self.gates[..i - 1].to_vec() };
        let suffix = Circuit { n: self.n, gates: self.gates[i..].to_vec() };
        Ok((prefix, self.gates[i - 1].clone(), suffix))
    }

    /// Appends the gates of `other` (same register size).
    pub fn concat(&self, other: &Circuit) -> Result<Circuit> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch {
                expected: format!("{} qubits", self.n),
                got: format!("{} qubits", other.n),
            });
        }
        let mut gates = self.gates.clone();
        gates.extend(other.gates.iter().cloned());
        Ok(Circuit { n: self.n, gates })
    }
}

impl fmt::Display for Circuit {
    /// Serializes to the text format accepted by [`parse_circuit`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "qubits {}", self.n)?;
        for g in &self.gates {
            write!(f, "gate {}", g.kind.name())?;
            match &g.kind {
                GateKind::Ry(t) | GateKind::Rz(t) => write!(f, "({t:?})")?,
                GateKind::Custom(m) => {
                    f.write_str("[")?;
                    for (i, row) in m.to_rows().iter().enumerate() {
                        if i > 0 {
                            f.write_str(",")?;
                        }
                        f.write_str("[")?;
                        for (j, z) in row.iter().enumerate() {
                            if j > 0 {
                                f.write_str(",")?;
                            }
                            write!(f, "{:?}:{:?}", z.re, z.im)?;
                        }
                        f.write_str("]")?;
                    }
                    f.write_str("]")?;
                }
                _ => {}
            }
            for q in &g.qubits {
                write!(f, " q{q}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// The benchmark circuit `3qubitcnot` in its reference reading:
/// Toffoli, H, H, Ry(pi/6), Rz(pi/16), CNOT.
pub fn three_qubit_cnot() -> Circuit {
    parse_circuit(THREE_QUBIT_CNOT).expect("benchmark fixture parses")
}

pub const THREE_QUBIT_CNOT: &str = "\
# 3qubitcnot benchmark
qubits 3
gate toffoli q0 q1 q2
gate h q0
gate h q2
gate ry(pi/6) q2
gate rz(pi/16) q0
gate cnot q0 q1
";

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn h_circuit() -> Circuit {
        Circuit::new(1).unwrap().with(GateKind::H, &[0])
    }

    #[test]
    fn gate_matrix_examples() {
        let conv = RotationConvention::HalfAngle;
        assert_eq!(gate_matrix(&GateKind::Phase, conv), CMatrix::diag(&[c(1.0, 0.0), c(0.0, 1.0)]));
        let ry = gate_matrix(&GateKind::Ry(PI / 6.0), conv);
        let (s, co) = (PI / 12.0).sin_cos();
        let expected = CMatrix::from_real_rows(&[&[co, -s], &[s, co]]).unwrap();
        assert!(ry.max_abs_diff(&expected) < 1e-15);
        let cnot = gate_matrix(&GateKind::Cnot, conv);
        assert_eq!(cnot.matvec(&CVector::basis(4, 2)).unwrap(), CVector::basis(4, 3));
        assert_eq!(cnot.matvec(&CVector::basis(4, 3)).unwrap(), CVector::basis(4, 2));
        assert_eq!(cnot.matvec(&CVector::basis(4, 1)).unwrap(), CVector::basis(4, 1));
    }

    #[test]
    fn full_angle_substitutes_theta() {
        let full = gate_matrix(&GateKind::Rz(0.4), RotationConvention::FullAngle);
        let half = gate_matrix(&GateKind::Rz(0.8), RotationConvention::HalfAngle);
        assert!(full.max_abs_diff(&half) < 1e-15);
    }

    #[test]
    fn library_gates_are_unitary() {
        let kinds = [
            GateKind::H,
            GateKind::X,
            GateKind::Y,
            GateKind::Z,
            GateKind::Phase,
            GateKind::Cnot,
            GateKind::Toffoli,
            GateKind::Ry(0.7),
            GateKind::Rz(-1.3),
        ];
        for k in &kinds {
            for conv in [RotationConvention::HalfAngle, RotationConvention::FullAngle] {
                let m = gate_matrix(k, conv);
                assert_eq!(m.rows(), 1 << k.arity());
                assert!(linalg::is_unitary(&m, 1e-10), "{k:?}");
            }
        }
    }

    #[test]
    fn embed_examples() {
        let conv = RotationConvention::HalfAngle;
        let x0 = PlacedGate::new(GateKind::X, vec![0]).unwrap();
        let m = embed(&x0, 2, conv).unwrap();
        assert_eq!(m.matvec(&CVector::basis(4, 0b00)).unwrap(), CVector::basis(4, 0b10));

        let cx = PlacedGate::new(GateKind::Cnot, vec![0, 1]).unwrap();
        let m = embed(&cx, 3, conv).unwrap();
        assert_eq!(m.matvec(&CVector::basis(8, 0b101)).unwrap(), CVector::basis(8, 0b111));

        let h1 = PlacedGate::new(GateKind::H, vec![1]).unwrap();
        assert!(matches!(embed(&h1, 1, conv), Err(Error::QubitOutOfRange { .. })));
        assert!(matches!(embed(&h1, 13, conv), Err(Error::TooManyQubits { .. })));
    }

    #[test]
    fn embed_respects_reversed_qubit_order() {
        // CNOT with control q1 and target q0 flips the most significant bit.
        let cx = PlacedGate::new(GateKind::Cnot, vec![1, 0]).unwrap();
        let m = embed(&cx, 2, RotationConvention::HalfAngle).unwrap();
        assert_eq!(m.matvec(&CVector::basis(4, 0b01)).unwrap(), CVector::basis(4, 0b11));
    }

    #[test]
    fn apply_examples() {
        let conv = RotationConvention::HalfAngle;
        let empty = Circuit::new(2).unwrap();
        let psi = CVector::from_real(&[0.5, 0.5, 0.5, 0.5]);
        assert_eq!(empty.apply(&psi, conv).unwrap(), psi);

        let out = h_circuit().apply(&CVector::basis(2, 0), conv).unwrap();
        assert!(out.max_abs_diff(&CVector::from_real(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2])) < 1e-15);

        let bench = three_qubit_cnot();
        let zero = CVector::basis(8, 0);
        for conv in [RotationConvention::HalfAngle, RotationConvention::FullAngle] {
            let direct = bench.apply(&zero, conv).unwrap();
            let via_matrix = bench.unitary(conv).unwrap().matvec(&zero).unwrap();
            assert!(direct.max_abs_diff(&via_matrix) < 1e-10);
        }
        assert!(h_circuit().apply(&CVector::basis(4, 0), conv).is_err());
    }

    #[test]
    fn split_examples() {
        let bench = three_qubit_cnot();
        let (pre, g, suf) = bench.split(1).unwrap();
        assert!(pre.is_empty());
        assert_eq!(g.kind, GateKind::Toffoli);
        assert_eq!(suf.len(), 5);
        let (pre, _, suf) = bench.split(6).unwrap();
        assert_eq!(pre.len(), 5);
        assert!(suf.is_empty());
        let (pre, g, suf) = bench.split(4).unwrap();
        assert_eq!((pre.len(), suf.len()), (3, 2));
        assert_eq!(g.kind, GateKind::Ry(PI / 6.0));
        assert!(bench.split(0).is_err());
        assert!(bench.split(7).is_err());
    }

    #[test]
    fn adjoint_examples() {
        let conv = RotationConvention::HalfAngle;
        let psi = CVector::from_real(&[0.6, 0.8]);
        let h = h_circuit();
        assert!(h.apply_adjoint(&psi, conv).unwrap().max_abs_diff(&h.apply(&psi, conv).unwrap()) < 1e-15);
        let cx = Circuit::new(2).unwrap().with(GateKind::Cnot, &[0, 1]);
        let psi = CVector::from_real(&[0.1, 0.3, 0.5, 0.8]).normalized();
        assert_eq!(cx.apply_adjoint(&psi, conv).unwrap(), cx.apply(&psi, conv).unwrap());
    }

    #[test]
    fn custom_gate_validation() {
        assert!(GateKind::custom(gates::hadamard()).is_ok());
        let shear = CMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap();
        assert!(matches!(GateKind::custom(shear), Err(Error::NotUnitary { .. })));
        assert!(GateKind::custom(CMatrix::identity(3)).is_err());
        assert_eq!(GateKind::custom(CMatrix::identity(8)).unwrap().arity(), 3);
    }

    #[test]
    fn placed_gate_validation() {
        assert!(PlacedGate::new(GateKind::Cnot, vec![1, 1]).is_err());
        assert!(PlacedGate::new(GateKind::H, vec![0, 1]).is_err());
        let mut c = Circuit::new(2).unwrap();
        assert!(c.push(PlacedGate::new(GateKind::H, vec![2]).unwrap()).is_err());
    }

    #[test]
    fn convention_parses() {
        assert_eq!("half".parse::<RotationConvention>().unwrap(), RotationConvention::HalfAngle);
        assert_eq!("FULL".parse::<RotationConvention>().unwrap(), RotationConvention::FullAngle);
        assert!("quarter".parse::<RotationConvention>().is_err());
    }
}
