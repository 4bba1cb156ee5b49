//! Missing-gate separators for the built-in gate library.

use std::f64::consts::PI;

use serde::Serialize;

use crate::circuit::{gate_matrix, GateKind, RotationConvention};
use crate::error::Result;
use crate::helstrom::error_probability;
use crate::linalg::{CMatrix, CVector, DEFAULT_TOL};
use crate::separator::gate_separator;

#[derive(Clone, Debug, Serialize)]
pub struct CatalogEntry {
    pub gate: String,
    pub separator: CVector,
    pub k: f64,
    pub kappa: f64,
    pub delta: f64,
}

/// The built-in gates, with the rotation angles used in the reference catalog.
pub fn library() -> Vec<(String, GateKind)> {
    vec![
        ("Hadamard".into(), GateKind::H),
        ("Phase".into(), GateKind::Phase),
        ("CNOT".into(), GateKind::Cnot),
        ("Ry(pi/6)".into(), GateKind::Ry(PI / 6.0)),
        ("Rz(pi/16)".into(), GateKind::Rz(PI / 16.0)),
        ("Toffoli".into(), GateKind::Toffoli),
        ("Pauli-X".into(), GateKind::X),
        ("Pauli-Y".into(), GateKind::Y),
        ("Pauli-Z".into(), GateKind::Z),
    ]
}

/// Separator, overlap and error probability of each library gate going missing.
pub fn smgf_catalog(conv: RotationConvention) -> Result<Vec<CatalogEntry>> {
    library()
        .into_iter()
        .map(|(name, kind)| {
            let g = gate_matrix(&kind, conv);
            let sol = gate_separator(&g, &CMatrix::identity(g.rows()), DEFAULT_TOL)?;
            Ok(CatalogEntry {
                gate: name,
                separator: sol.phi_prime,
                k: sol.k,
                kappa: sol.kappa,
                delta: error_probability(sol.k)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_angle_deltas() {
        let cat = smgf_catalog(RotationConvention::HalfAngle).unwrap();
        let rounded: Vec<(String, String)> = cat.iter().map(|e| (e.gate.clone(), format!("{:.2}", e.delta))).collect();
        let expect = ["0.00", "0.15", "0.00", "0.37", "0.45", "0.00", "0.00", "0.00", "0.00"];
        for ((gate, got), want) in rounded.iter().zip(expect) {
            assert_eq!(got, want, "{gate}");
        }
    }

    #[test]
    fn full_angle_rotations() {
        let cat = smgf_catalog(RotationConvention::FullAngle).unwrap();
        assert!((cat[3].delta - 0.25).abs() < 1e-12);
        assert!((cat[4].delta - (1.0 - (PI / 16.0).sin()) / 2.0).abs() < 1e-12);
    }
}
