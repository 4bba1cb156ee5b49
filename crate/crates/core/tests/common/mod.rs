//! Independent oracles and random instance generators shared by integration tests.
#![allow(dead_code)]

use num_complex::Complex64;
use qdiag::circuit::{Circuit, GateKind, PlacedGate};
use qdiag::linalg::{CMatrix, CVector};
use qdiag::{FaultModel, FaultSpec};
use rand::Rng;
use rayon::prelude::*;

fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller.
    let u1: f64 = rng.random::<f64>().max(1e-300);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Haar-like random unitary via Gram-Schmidt on a complex Gaussian matrix.
pub fn random_unitary<R: Rng>(dim: usize, rng: &mut R) -> CMatrix {
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v: Vec<Complex64> = (0..dim).map(|_| Complex64::new(gaussian(rng), gaussian(rng))).collect();
        for u in &cols {
            let proj: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in v.iter_mut().zip(u) {
                *x -= proj * y;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-8 {
            continue;
        }
        cols.push(v.into_iter().map(|z| z / norm).collect());
    }
    let columns: Vec<CVector> = cols.into_iter().map(CVector::new).collect();
    CMatrix::from_columns(&columns).unwrap()
}

pub fn random_state<R: Rng>(dim: usize, rng: &mut R) -> CVector {
    let v: Vec<Complex64> = (0..dim).map(|_| Complex64::new(gaussian(rng), gaussian(rng))).collect();
    CVector::new(v).normalized()
}

fn distinct_qubits<R: Rng>(n: usize, count: usize, rng: &mut R) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        out.push(pool.swap_remove(rng.random_range(0..pool.len())));
    }
    out
}

/// A random library or custom gate placed on `n` qubits.
pub fn random_gate<R: Rng>(n: usize, rng: &mut R) -> PlacedGate {
    loop {
        let kind = match rng.random_range(0..11) {
            0 => GateKind::H,
            1 => GateKind::X,
            2 => GateKind::Y,
            3 => GateKind::Z,
            4 => GateKind::Phase,
            5 => GateKind::Cnot,
            6 => GateKind::Toffoli,
            7 => GateKind::Ry(rng.random_range(-3.0..3.0)),
            8 => GateKind::Rz(rng.random_range(-3.0..3.0)),
            9 => GateKind::custom(random_unitary(2, rng)).unwrap(),
            _ => GateKind::custom(random_unitary(4, rng)).unwrap(),
        };
        if kind.arity() <= n {
            let qubits = distinct_qubits(n, kind.arity(), rng);
            return PlacedGate::new(kind, qubits).unwrap();
        }
    }
}

pub fn random_circuit<R: Rng>(n: usize, s: usize, rng: &mut R) -> Circuit {
    let gates = (0..s).map(|_| random_gate(n, rng)).collect();
    Circuit::from_gates(n, gates).unwrap()
}

/// SMGF everywhere, except gate `i` gets a random replacement half of the time.
pub fn random_fault_spec<R: Rng>(c: &Circuit, i: usize, rng: &mut R) -> FaultSpec {
    if rng.random_bool(0.5) {
        FaultSpec::smgf()
    } else {
        let arity = c.gate(i).unwrap().kind.arity();
        FaultSpec::smgf().with_override(i, FaultModel::Replace(random_unitary(1 << arity, rng)))
    }
}

fn point(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, -theta)
}

fn grid_triangle(p: [Complex64; 3], lo: [f64; 2], hi: [f64; 2], step: f64) -> (f64, [f64; 2]) {
    let mut best = (f64::INFINITY, [0.0, 0.0]);
    let na = ((hi[0] - lo[0]) / step).round() as i64;
    let nb = ((hi[1] - lo[1]) / step).round() as i64;
    for ia in 0..=na {
        let a = (lo[0] + ia as f64 * step).clamp(0.0, 1.0);
        for ib in 0..=nb {
            let b = (lo[1] + ib as f64 * step).clamp(0.0, 1.0);
            if a + b > 1.0 + 1e-12 {
                break;
            }
            let z = p[0] * a + p[1] * b + p[2] * (1.0 - a - b).max(0.0);
            let d = z.norm();
            if d < best.0 {
                best = (d, [a, b]);
            }
        }
    }
    best
}

/// Brute-force minimum of `|sum a_j exp(-i theta_j)|` over the simplex.
///
/// In the plane every hull point lies in a triangle of the input points, so
/// the search grids each face of at most three vertices at `step`, then
/// refines twice around the best grid point at a tenth of the step.
pub fn grid_opt(phases: &[f64], step: f64) -> f64 {
    let pts: Vec<Complex64> = phases.iter().map(|&t| point(t)).collect();
    let m = pts.len();
    if m == 1 {
        return 1.0;
    }
    let mut faces = Vec::new();
    for a in 0..m {
        for b in a + 1..m {
            if m == 2 {
                faces.push([a, b, b]);
            }
            for c in b + 1..m {
                faces.push([a, b, c]);
            }
        }
    }
    faces
        .par_iter()
        .map(|&[a, b, c]| {
            let p = [pts[a], pts[b], pts[c]];
            let (mut best, mut at) = grid_triangle(p, [0.0, 0.0], [1.0, 1.0], step);
            let mut s = step;
            for _ in 0..2 {
                let fine = s / 10.0;
                let (d, w) = grid_triangle(p, [at[0] - s, at[1] - s], [at[0] + s, at[1] + s], fine);
                if d < best {
                    best = d;
                    at = w;
                }
                s = fine;
            }
            best
        })
        .reduce(|| f64::INFINITY, f64::min)
}

/// Published catalog separators, for the `(G, I)` missing-gate pairs.
pub fn catalog_vectors() -> Vec<(&'static str, Vec<Complex64>)> {
    let r = |x: f64| Complex64::new(x, 0.0);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let root2 = 2f64.sqrt();
    let h0 = -((root2 - 1.0) / (2.0 * root2)).sqrt();
    let h1 = -(1.0 - 1.0 / root2).sqrt() / (2.0 - root2);
    vec![
        ("Hadamard", vec![r(h0), r(h1)]),
        ("Phase", vec![r(s), r(s)]),
        ("CNOT", vec![r(0.4082), r(0.4082), r(-0.2113), r(0.7887)]),
        ("Ry(pi/6)", vec![r(0.0), r(-1.0)]),
        ("Rz(pi/16)", vec![r(s), r(s)]),
        ("Toffoli", vec![r(0.2673), r(0.2673), r(0.2673), r(0.2673), r(0.2673), r(0.2673), r(-0.3110), r(0.6890)]),
        ("Pauli-X", vec![r(0.0), r(1.0)]),
        ("Pauli-Y", vec![Complex64::new(0.0, -1.0), r(0.0)]),
        ("Pauli-Z", vec![r(s), r(s)]),
    ]
}

/// Published benchmark table: `rows[q-1][r] = (p0, p1, p?)` for the benchmark, single missing gates.
pub const BENCHMARK_TABLE: [[[f64; 3]; 7]; 6] = [
    [
        [1.00, 0.00, 0.00],
        [0.00, 1.00, 0.00],
        [0.00, 0.56, 0.44],
        [0.07, 0.50, 0.43],
        [0.94, 0.01, 0.05],
        [0.98, 0.01, 0.01],
        [0.38, 0.13, 0.49],
    ],
    [
        [1.00, 0.00, 0.00],
        [0.73, 0.12, 0.15],
        [0.00, 1.00, 0.00],
        [0.50, 0.00, 0.50],
        [0.87, 0.00, 0.13],
        [0.99, 0.00, 0.01],
        [0.76, 0.00, 0.24],
    ],
    [
        [1.00, 0.00, 0.00],
        [1.00, 0.00, 0.00],
        [0.50, 0.00, 0.50],
        [0.00, 1.00, 0.00],
        [0.87, 0.06, 0.07],
        [0.98, 0.00, 0.02],
        [0.86, 0.00, 0.14],
    ],
    [
        [0.75, 0.25, 0.00],
        [0.75, 0.25, 0.00],
        [0.37, 0.13, 0.50],
        [0.00, 0.00, 1.00],
        [0.25, 0.75, 0.00],
        [0.74, 0.25, 0.01],
        [0.19, 0.07, 0.74],
    ],
    [
        [0.60, 0.40, 0.00],
        [0.40, 0.27, 0.33],
        [0.20, 0.30, 0.50],
        [0.55, 0.38, 0.07],
        [0.52, 0.35, 0.13],
        [0.40, 0.60, 0.00],
        [0.25, 0.25, 0.50],
    ],
    [
        [1.00, 0.00, 0.00],
        [0.56, 0.08, 0.36],
        [0.06, 0.22, 0.72],
        [0.10, 0.42, 0.48],
        [0.87, 0.02, 0.11],
        [0.99, 0.01, 0.00],
        [0.00, 1.00, 0.00],
    ],
];
