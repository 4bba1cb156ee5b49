//! Dense complex vectors and matrices, and the spectral decomposition of
//! unitary matrices.
//!
//! Everything here is sized for gate-level work (matrices up to a few
//! thousand rows at most) and is written for clarity over raw speed.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Largest supported matrix/vector dimension (12 qubits).
pub const MAX_DIM: usize = 1 << 12;

/// Default tolerance for unitarity checks and eigenpair residuals.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Eigenphases closer than this are treated as one phase class.
pub const DEGENERACY_THRESHOLD: f64 = 1e-8;

const MAX_SWEEPS: usize = 100;

// Eigenvalues of the Hermitian part closer than this are diagonalized
// again against the anti-Hermitian part.
const CLUSTER_TOL: f64 = 1e-9;

pub(crate) const fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// A dense complex column vector.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CVector {
    entries: Vec<C64>,
}

impl CVector {
    pub fn new(entries: Vec<C64>) -> Self {
        CVector { entries }
    }

    pub fn from_real(entries: &[f64]) -> Self {
        CVector::new(entries.iter().map(|&x| c(x, 0.0)).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        CVector::new(vec![C64::default(); dim])
    }

    /// Computational basis state `|index>` of dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = CVector::zeros(dim);
        v.entries[index] = c(1.0, 0.0);
        v
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.entries
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.entries
    }

    pub fn into_inner(self) -> Vec<C64> {
        self.entries
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, s: C64) -> CVector {
        CVector::new(self.entries.iter().map(|&z| z * s).collect())
    }

    /// Returns the vector scaled to unit norm. A zero vector is returned unchanged.
    pub fn normalized(&self) -> CVector {
        let n = self.norm();
        if n == 0.0 {
            return self.clone();
        }
        self.scale(c(1.0 / n, 0.0))
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, s: C64, other: &CVector) -> Result<CVector> {
        check_same_dim(self, other)?;
        Ok(CVector::new(self.entries.iter().zip(&other.entries).map(|(&a, &b)| a + s * b).collect()))
    }

    /// Largest componentwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &CVector) -> f64 {
        assert_eq!(self.dim(), other.dim(), "vector dimensions differ");
        self.entries.iter().zip(&other.entries).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Euclidean distance to `other`.
    pub fn distance(&self, other: &CVector) -> f64 {
        assert_eq!(self.dim(), other.dim(), "vector dimensions differ");
        self.entries.iter().zip(&other.entries).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
    }

    /// Multiplies by a global phase so that the first component of largest
    /// modulus is real and positive.
    pub fn fix_global_phase(&self) -> CVector {
        let max = self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if max == 0.0 {
            return self.clone();
        }
        let pivot = self.entries.iter().find(|z| z.norm() >= max * (1.0 - 1e-12)).copied().unwrap_or(c(1.0, 0.0));
        self.scale(pivot.conj() / pivot.norm())
    }
}

impl Index<usize> for CVector {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.entries[i]
    }
}

impl IndexMut<usize> for CVector {
    fn index_mut(&mut self, i: usize) -> &mut C64 {
        &mut self.entries[i]
    }
}

impl fmt::Debug for CVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.entries.iter()).finish()
    }
}

fn check_same_dim(u: &CVector, v: &CVector) -> Result<()> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch {
            expected: format!("vector of dim {}", u.dim()),
            got: format!("vector of dim {}", v.dim()),
        });
    }
    Ok(())
}

/// `<u|v> = sum_i conj(u_i) v_i`.
pub fn inner(u: &CVector, v: &CVector) -> Result<C64> {
    check_same_dim(u, v)?;
    Ok(u.entries.iter().zip(&v.entries).map(|(a, b)| a.conj() * b).sum())
}

/// A dense, row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 || rows * cols != data.len() {
            return Err(Error::DimensionMismatch {
                expected: format!("{rows}x{cols} = {} entries", rows * cols),
                got: format!("{} entries", data.len()),
            });
        }
        Ok(CMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, data: vec![C64::default(); rows * cols] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = CMatrix::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = c(1.0, 0.0);
        }
        m
    }

    pub fn diag(entries: &[C64]) -> Self {
        let mut m = CMatrix::zeros(entries.len(), entries.len());
        for (i, &z) in entries.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    /// Builds a matrix from rows; all rows must have the same length.
    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        let r = rows.len();
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != cols) {
            return Err(Error::DimensionMismatch {
                expected: format!("rows of length {cols}"),
                got: "ragged rows".into(),
            });
        }
        CMatrix::new(r, cols, rows.into_iter().flatten().collect())
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        CMatrix::from_rows(rows.iter().map(|row| row.iter().map(|&x| c(x, 0.0)).collect()).collect())
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[CVector]) -> Result<Self> {
        let rows = columns.first().map_or(0, CVector::dim);
        let mut m = CMatrix::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            if col.dim() != rows {
                return Err(Error::DimensionMismatch {
                    expected: format!("columns of dim {rows}"),
                    got: format!("column of dim {}", col.dim()),
                });
            }
            for i in 0..rows {
                m[(i, j)] = col[i];
            }
        }
        Ok(m)
    }

    /// `|u><v|`.
    pub fn outer(u: &CVector, v: &CVector) -> Self {
        let mut m = CMatrix::zeros(u.dim(), v.dim());
        for i in 0..u.dim() {
            for j in 0..v.dim() {
                m[(i, j)] = u[i] * v[j].conj();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> CVector {
        CVector::new((0..self.rows).map(|i| self[(i, j)]).collect())
    }

    pub fn to_rows(&self) -> Vec<Vec<C64>> {
        self.data.chunks(self.cols).map(<[C64]>::to_vec).collect()
    }

    pub fn scale(&self, s: C64) -> CMatrix {
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| z * s).collect() }
    }

    pub fn add(&self, other: &CMatrix) -> Result<CMatrix> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &CMatrix) -> Result<CMatrix> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &CMatrix, f: impl Fn(C64, C64) -> C64) -> Result<CMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: format!("{}x{}", self.rows, self.cols),
                got: format!("{}x{}", other.rows, other.cols),
            });
        }
        Ok(CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    /// Largest componentwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert!(self.rows == other.rows && self.cols == other.cols, "matrix shapes differ");
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn matvec(&self, v: &CVector) -> Result<CVector> {
        if self.cols != v.dim() {
            return Err(Error::DimensionMismatch {
                expected: format!("vector of dim {}", self.cols),
                got: format!("vector of dim {}", v.dim()),
            });
        }
        Ok(CVector::new(
            self.data.chunks(self.cols).map(|row| row.iter().zip(v.as_slice()).map(|(a, b)| a * b).sum()).collect(),
        ))
    }

    /// `<u| self |v>`.
    pub fn expectation(&self, u: &CVector, v: &CVector) -> Result<C64> {
        inner(u, &self.matvec(v)?)
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for row in self.data.chunks(self.cols) {
            writeln!(f, "  {row:?}")?;
        }
        write!(f, "]")
    }
}

pub fn matmul(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    if a.cols != b.rows {
        return Err(Error::DimensionMismatch { expected: format!("{} rows", a.cols), got: format!("{} rows", b.rows) });
    }
    let mut out = CMatrix::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        for k in 0..a.cols {
            let aik = a[(i, k)];
            if aik == C64::default() {
                continue;
            }
            let brow = &b.data[k * b.cols..(k + 1) * b.cols];
            let orow = &mut out.data[i * b.cols..(i + 1) * b.cols];
            for (o, &bkj) in orow.iter_mut().zip(brow) {
                *o += aik * bkj;
            }
        }
    }
    Ok(out)
}

/// Conjugate transpose.
pub fn adjoint(a: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(a.cols, a.rows);
    for i in 0..a.rows {
        for j in 0..a.cols {
            out[(j, i)] = a[(i, j)].conj();
        }
    }
    out
}

/// Kronecker product: `(a ⊗ b)[i*rb + k, j*cb + l] = a[i,j] * b[k,l]`.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (rb, cb) = (b.rows, b.cols);
    let mut out = CMatrix::zeros(a.rows * rb, a.cols * cb);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let aij = a[(i, j)];
            for k in 0..rb {
                for l in 0..cb {
                    out[(i * rb + k, j * cb + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// `max |a†a - I|` over all entries, or infinity for non-square input.
pub fn unitarity_deviation(a: &CMatrix) -> f64 {
    if !a.is_square() {
        return f64::INFINITY;
    }
    let mut worst = 0.0f64;
    for i in 0..a.cols {
        for j in i..a.cols {
            let mut s = C64::default();
            for k in 0..a.rows {
                s += a[(k, i)].conj() * a[(k, j)];
            }
            if i == j {
                s -= 1.0;
            }
            worst = worst.max(s.norm());
        }
    }
    worst
}

pub fn is_unitary(a: &CMatrix, tol: f64) -> bool {
    unitarity_deviation(a) <= tol
}

/// One eigenpair of a unitary matrix: eigenvalue `exp(-i * phase)`.
#[derive(Clone, Debug)]
pub struct EigenPair {
    /// Eigenphase in `(-pi, pi]`.
    pub phase: f64,
    pub value: C64,
    pub vector: CVector,
}

/// Maps an angle into `(-pi, pi]`.
pub fn wrap_phase(theta: f64) -> f64 {
    let mut t = theta % (2.0 * PI);
    if t <= -PI {
        t += 2.0 * PI;
    } else if t > PI {
        t -= 2.0 * PI;
    }
    t
}

/// Full spectral decomposition of a unitary matrix.
///
/// The Hermitian part `(S + S†)/2` is diagonalized by Jacobi rotations; inside
/// each of its degenerate eigenspaces the anti-Hermitian part
/// `(S - S†)/2i` is diagonalized as well, which separates conjugate
/// eigenvalue pairs. Both parts commute because `S` is normal.
///
/// Pairs are sorted by ascending phase; vectors are orthonormal and each has
/// its first largest-modulus component real and positive.
pub fn eig_unitary(s: &CMatrix, tol: f64) -> Result<Vec<EigenPair>> {
    if !s.is_square() {
        return Err(Error::DimensionMismatch {
            expected: "square matrix".into(),
            got: format!("{}x{}", s.rows, s.cols),
        });
    }
    if s.rows > MAX_DIM {
        return Err(Error::TooManyQubits { qubits: s.rows.trailing_zeros() as usize, max: 12 });
    }
    let deviation = unitarity_deviation(s);
    if deviation > tol {
        return Err(Error::NotUnitary { deviation });
    }

    let n = s.rows;
    let sh = adjoint(s);
    let herm = s.add(&sh)?.scale(c(0.5, 0.0));
    let anti = s.sub(&sh)?.scale(c(0.0, -0.5));

    let (alpha, v, mut sweeps) = jacobi_hermitian(&herm)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| alpha[i].total_cmp(&alpha[j]));

    let mut vectors: Vec<CVector> = Vec::with_capacity(n);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && alpha[order[end]] - alpha[order[end - 1]] <= CLUSTER_TOL {
            end += 1;
        }
        let block: Vec<CVector> = order[start..end].iter().map(|&i| v.column(i)).collect();
        if block.len() == 1 {
            vectors.extend(block);
        } else {
            let basis = CMatrix::from_columns(&block)?;
            let restricted = matmul(&adjoint(&basis), &matmul(&anti, &basis)?)?;
            let (_, w, inner_sweeps) = jacobi_hermitian(&restricted)?;
            sweeps += inner_sweeps;
            let rotated = matmul(&basis, &w)?;
            vectors.extend((0..rotated.cols).map(|j| rotated.column(j)));
        }
        start = end;
    }

    let mut pairs = Vec::with_capacity(n);
    for vec in vectors {
        let vec = vec.normalized().fix_global_phase();
        let sv = s.matvec(&vec)?;
        let rayleigh = inner(&vec, &sv)?;
        let mut phase = wrap_phase(-rayleigh.arg());
        if phase + PI <= 1e-12 {
            phase = PI;
        }
        let value = C64::from_polar(1.0, -phase);
        let residual = sv.add_scaled(-value, &vec)?.norm();
        if residual > tol {
            return Err(Error::NoConvergence { iterations: sweeps });
        }
        pairs.push(EigenPair { phase, value, vector: vec });
    }
    pairs.sort_by(|a, b| a.phase.total_cmp(&b.phase));
    Ok(pairs)
}

/// Cyclic complex Jacobi eigensolver for Hermitian matrices.
///
/// Returns the (unsorted) real eigenvalues, the unitary matrix whose columns
/// are the eigenvectors, and the number of sweeps performed.
pub(crate) fn jacobi_hermitian(a: &CMatrix) -> Result<(Vec<f64>, CMatrix, usize)> {
    let n = a.rows;
    let mut m = a.clone();
    let mut v = CMatrix::identity(n);
    let scale = m.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);

    for sweep in 0..=MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            return Ok(((0..n).map(|i| m[(i, i)].re).collect(), v, sweep));
        }
        if sweep == MAX_SWEEPS {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                let r = apq.norm();
                if r <= 1e-300 {
                    continue;
                }
                let phase = C64::from_polar(1.0, -apq.arg());
                let theta = (m[(q, q)].re - m[(p, p)].re) / (2.0 * r);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                // Rotation restricted to the (p, q) plane.
                let w_pp = c(cs, 0.0);
                let w_pq = c(sn, 0.0);
                let w_qp = phase * (-sn);
                let w_qq = phase * cs;

                for k in 0..n {
                    let (akp, akq) = (m[(k, p)], m[(k, q)]);
                    m[(k, p)] = akp * w_pp + akq * w_qp;
                    m[(k, q)] = akp * w_pq + akq * w_qq;
                }
                for k in 0..n {
                    let (apk, aqk) = (m[(p, k)], m[(q, k)]);
                    m[(p, k)] = w_pp.conj() * apk + w_qp.conj() * aqk;
                    m[(q, k)] = w_pq.conj() * apk + w_qq.conj() * aqk;
                }
                m[(p, q)] = C64::default();
                m[(q, p)] = C64::default();
                m[(p, p)] = c(m[(p, p)].re, 0.0);
                m[(q, q)] = c(m[(q, q)].re, 0.0);
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = vkp * w_pp + vkq * w_qp;
                    v[(k, q)] = vkp * w_pq + vkq * w_qq;
                }
            }
        }
    }
    Err(Error::NoConvergence { iterations: MAX_SWEEPS })
}

/// Common gate matrices used throughout the crate and its tests.
pub mod gates {
    use super::{c, CMatrix};
    use std::f64::consts::FRAC_1_SQRT_2;

    pub fn hadamard() -> CMatrix {
        let h = FRAC_1_SQRT_2;
        CMatrix::from_real_rows(&[&[h, h], &[h, -h]]).unwrap()
    }

    pub fn pauli_x() -> CMatrix {
        CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()
    }

    pub fn pauli_y() -> CMatrix {
        CMatrix::from_rows(vec![vec![c(0.0, 0.0), c(0.0, -1.0)], vec![c(0.0, 1.0), c(0.0, 0.0)]]).unwrap()
    }

    pub fn pauli_z() -> CMatrix {
        CMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]).unwrap()
    }

    pub fn phase() -> CMatrix {
        CMatrix::diag(&[c(1.0, 0.0), c(0.0, 1.0)])
    }

    /// Rotation about Y by `half` in the sense `[[cos h, -sin h], [sin h, cos h]]`.
    pub fn ry_half(half: f64) -> CMatrix {
        let (s, co) = half.sin_cos();
        CMatrix::from_real_rows(&[&[co, -s], &[s, co]]).unwrap()
    }

    /// `diag(exp(-i h), exp(i h))`.
    pub fn rz_half(half: f64) -> CMatrix {
        CMatrix::diag(&[c(0.0, -half).exp(), c(0.0, half).exp()])
    }

    pub fn cnot() -> CMatrix {
        permutation(4, &[(2, 3)])
    }

    pub fn toffoli() -> CMatrix {
        permutation(8, &[(6, 7)])
    }

    fn permutation(dim: usize, swaps: &[(usize, usize)]) -> CMatrix {
        let mut perm: Vec<usize> = (0..dim).collect();
        for &(a, b) in swaps {
            perm.swap(a, b);
        }
        let mut m = CMatrix::zeros(dim, dim);
        for (col, &row) in perm.iter().enumerate() {
            m[(row, col)] = c(1.0, 0.0);
        }
        m
    }
}
