//! Optimal separator input states for a gate and its faulty counterpart.

use serde::Serialize;

use crate::circuit::{Circuit, RotationConvention};
use crate::error::{Error, Result};
use crate::faults::{fault_operator, FaultSpec};
use crate::linalg::{self, c, CMatrix, CVector, C64, DEGENERACY_THRESHOLD};

/// Below this modulus the overlap is treated as zero and its argument as 0.
pub const ZERO_OVERLAP: f64 = 1e-9;

/// Tolerance for eigendecomposition of circuit-level gate pairs.
const CIRCUIT_TOL: f64 = 1e-7;

/// Slack used when deciding whether the origin lies in the hull.
const HULL_EPS: f64 = 1e-12;

/// Eigenvalues of `S = G†G_f` sharing one phase, with their eigenspace.
#[derive(Clone, Debug, Serialize)]
pub struct PhaseClass {
    pub phase: f64,
    pub eigenvectors: Vec<CVector>,
    pub weight: f64,
}

/// Solution of the separator program for one gate.
///
/// `phi_prime` lives on the gate's qubits; `phi` is the input state for the
/// whole circuit (equal to `phi_prime` when produced by [`gate_separator`]).
#[derive(Clone, Debug, Serialize)]
pub struct SeparatorSolution {
    pub classes: Vec<PhaseClass>,
    pub k: f64,
    pub kappa: f64,
    pub phi_prime: CVector,
    pub phi: CVector,
}

/// Minimizer of `|sum_j a_j exp(-i theta_j)|` over the probability simplex.
#[derive(Clone, Debug, PartialEq)]
pub struct OptSolution {
    pub weights: Vec<f64>,
    pub k: f64,
    pub kappa: f64,
}

fn point(theta: f64) -> C64 {
    C64::from_polar(1.0, -theta)
}

/// Solves the separator program geometrically: the optimum is the distance
/// from the origin to the convex hull of the points `exp(-i theta_j)`.
pub fn solve_opt(phases: &[f64]) -> Result<OptSolution> {
    if phases.is_empty() {
        return Err(Error::InvalidArgument("solve_opt needs at least one phase".into()));
    }
    let m = phases.len();
    let pts: Vec<C64> = phases.iter().map(|&t| point(t)).collect();
    let mut weights = vec![0.0; m];

    if m == 1 {
        weights[0] = 1.0;
    } else if let Some(w) = origin_in_hull(&pts) {
        weights = w;
    } else {
        let mut best = (f64::INFINITY, 0, 0, 0.0);
        for j in 0..m {
            if pts[j].norm() < best.0 {
                best = (pts[j].norm(), j, j, 0.0);
            }
            for l in j + 1..m {
                let d = pts[l] - pts[j];
                let t = (-(d.conj() * pts[j]).re / d.norm_sqr()).clamp(0.0, 1.0);
                let dist = (pts[j] + d * t).norm();
                if dist < best.0 - HULL_EPS {
                    best = (dist, j, l, t);
                }
            }
        }
        let (_, j, l, t) = best;
        weights[j] += 1.0 - t;
        weights[l] += t;
    }

    let sum: C64 = weights.iter().zip(&pts).map(|(&w, &z)| z * w).sum();
    let k = sum.norm().min(1.0);
    let kappa = if k < ZERO_OVERLAP { 0.0 } else { sum.arg() };
    Ok(OptSolution { weights, k, kappa })
}

/// Weights placing the origin in the hull of unit-circle points, if possible.
fn origin_in_hull(pts: &[C64]) -> Option<Vec<f64>> {
    let m = pts.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| pts[a].arg().total_cmp(&pts[b].arg()));

    let mut max_gap = (0.0, 0);
    for idx in 0..m {
        let a = pts[order[idx]].arg();
        let b = pts[order[(idx + 1) % m]].arg();
        let mut gap = b - a;
        if idx + 1 == m {
            gap += 2.0 * std::f64::consts::PI;
        }
        if gap > max_gap.0 {
            max_gap = (gap, idx);
        }
    }
    let excess = max_gap.0 - std::f64::consts::PI;
    if excess > 1e-9 {
        return None;
    }
    let mut weights = vec![0.0; m];
    if excess.abs() <= 1e-9 {
        // The origin sits on the chord across the largest gap.
        weights[order[max_gap.1]] = 0.5;
        weights[order[(max_gap.1 + 1) % m]] = 0.5;
        return Some(weights);
    }
    let p0 = pts[order[0]];
    for idx in 1..m - 1 {
        let (a, b) = (pts[order[idx]], pts[order[idx + 1]]);
        if let Some([w0, wa, wb]) = barycentric(p0, a, b) {
            weights[order[0]] = w0;
            weights[order[idx]] = wa;
            weights[order[idx + 1]] = wb;
            return Some(weights);
        }
    }
    None
}

fn cross(u: C64, v: C64) -> f64 {
    u.re * v.im - u.im * v.re
}

/// Barycentric coordinates of the origin in triangle `(p, a, b)`.
fn barycentric(p: C64, a: C64, b: C64) -> Option<[f64; 3]> {
    let area = cross(a - p, b - p);
    if area.abs() < HULL_EPS {
        return None;
    }
    let wa = cross(-p, b - p) / area;
    let wb = cross(a - p, -p) / area;
    let w0 = 1.0 - wa - wb;
    if [w0, wa, wb].iter().any(|&w| w < -1e-12) {
        return None;
    }
    let (w0, wa, wb) = (w0.max(0.0), wa.max(0.0), wb.max(0.0));
    let total = w0 + wa + wb;
    Some([w0 / total, wa / total, wb / total])
}

/// Groups eigenpairs into classes of equal phase (circularly).
fn phase_classes(pairs: Vec<linalg::EigenPair>) -> Vec<PhaseClass> {
    let mut classes: Vec<PhaseClass> = Vec::new();
    for p in pairs {
        match classes.last_mut() {
            Some(last) if p.phase - last.phase <= DEGENERACY_THRESHOLD => last.eigenvectors.push(p.vector),
            _ => classes.push(PhaseClass { phase: p.phase, eigenvectors: vec![p.vector], weight: 0.0 }),
        }
    }
    if classes.len() > 1 {
        let first = classes[0].phase;
        let last = classes[classes.len() - 1].phase;
        if first + 2.0 * std::f64::consts::PI - last <= DEGENERACY_THRESHOLD {
            let tail = classes.pop().expect("more than one class");
            classes[0].phase = tail.phase;
            let mut merged = tail.eigenvectors;
            merged.append(&mut classes[0].eigenvectors);
            classes[0].eigenvectors = merged;
        }
    }
    classes
}

/// Optimal `(G, G_f)`-separator on the gate's own qubits.
pub fn gate_separator(g: &CMatrix, g_f: &CMatrix, tol: f64) -> Result<SeparatorSolution> {
    if g.rows() != g_f.rows() || g.cols() != g_f.cols() || !g.is_square() {
        return Err(Error::DimensionMismatch {
            expected: format!("{}x{}", g.rows(), g.rows()),
            got: format!("{}x{}", g_f.rows(), g_f.cols()),
        });
    }
    for m in [g, g_f] {
        let deviation = linalg::unitarity_deviation(m);
        if deviation > tol {
            return Err(Error::NotUnitary { deviation });
        }
    }
    let s = linalg::matmul(&linalg::adjoint(g), g_f)?;
    let mut classes = phase_classes(linalg::eig_unitary(&s, tol)?);
    let phases: Vec<f64> = classes.iter().map(|cl| cl.phase).collect();
    let opt = solve_opt(&phases)?;

    let mut phi_prime = CVector::zeros(g.rows());
    for (class, &w) in classes.iter_mut().zip(&opt.weights) {
        class.weight = w;
        if w == 0.0 {
            continue;
        }
        let amp = (w / class.eigenvectors.len() as f64).sqrt();
        for v in &class.eigenvectors {
            phi_prime = phi_prime.add_scaled(c(amp, 0.0), v)?;
        }
    }
    let phi_prime = phi_prime.normalized();
    Ok(SeparatorSolution { classes, k: opt.k, kappa: opt.kappa, phi: phi_prime.clone(), phi_prime })
}

/// Places a state of the listed qubits into an `n`-qubit register, `|0>` elsewhere.
pub fn lift(local: &CVector, qubits: &[usize], n: usize) -> Result<CVector> {
    if local.dim() != 1 << qubits.len() {
        return Err(Error::DimensionMismatch {
            expected: format!("state of dimension {}", 1usize << qubits.len()),
            got: local.dim().to_string(),
        });
    }
    if let Some(&q) = qubits.iter().find(|&&q| q >= n) {
        return Err(Error::QubitOutOfRange { index: q, qubits: n });
    }
    let arity = qubits.len();
    let mut out = CVector::zeros(1 << n);
    for (idx, &amp) in local.as_slice().iter().enumerate() {
        let mut x = 0usize;
        for (pos, &q) in qubits.iter().enumerate() {
            if idx >> (arity - 1 - pos) & 1 == 1 {
                x |= 1 << (n - 1 - q);
            }
        }
        out[x] = amp;
    }
    Ok(out)
}

/// Circuit-level separator for a fault at gate `i` (1-based).
pub fn circuit_separator(
    c: &Circuit,
    spec: &FaultSpec,
    i: usize,
    conv: RotationConvention,
) -> Result<SeparatorSolution> {
    let (prefix, gate, _) = c.split(i)?;
    let g = gate.matrix(conv);
    let g_f = fault_operator(&gate, spec.model(i), conv)?;
    let mut sol = gate_separator(&g, &g_f, CIRCUIT_TOL)?;
    let lifted = lift(&sol.phi_prime, &gate.qubits, c.num_qubits())?;
    sol.phi = prefix.apply_adjoint(&lifted, conv)?;
    Ok(sol)
}

/// `(v1 + v2)/sqrt(2)` from the eigenvectors of a one-qubit `G†G_f`.
pub fn single_qubit_shortcut(g: &CMatrix, g_f: &CMatrix) -> Result<CVector> {
    if g.rows() != 2 || g_f.rows() != 2 || !g.is_square() || !g_f.is_square() {
        return Err(Error::DimensionMismatch { expected: "2x2".into(), got: format!("{}x{}", g.rows(), g.cols()) });
    }
    let s = linalg::matmul(&linalg::adjoint(g), g_f)?;
    let pairs = linalg::eig_unitary(&s, CIRCUIT_TOL)?;
    Ok(pairs[0].vector.add_scaled(c(1.0, 0.0), &pairs[1].vector)?.scale(c(std::f64::consts::FRAC_1_SQRT_2, 0.0)))
}

/// `|<phi'| S |phi'>|` for `S = G†G_f`.
pub fn achieved_overlap(g: &CMatrix, g_f: &CMatrix, phi_prime: &CVector) -> Result<f64> {
    let s = linalg::matmul(&linalg::adjoint(g), g_f)?;
    Ok(s.expectation(phi_prime, phi_prime)?.norm())
}
