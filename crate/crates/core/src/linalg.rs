//! Dense complex linear algebra.
//!
//! Everything downstream is built on [`ComplexMatrix`], a row-major matrix of
//! `Complex64`. Only the handful of factorizations the rest of the crate needs
//! are provided: a cyclic Jacobi eigensolver for Hermitian matrices and a
//! scaling-and-squaring Taylor matrix exponential.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

pub use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Maximum number of full Jacobi sweeps before giving up.
pub const MAX_JACOBI_SWEEPS: usize = 100;

/// Taylor order used by [`expm`].
const EXPM_TAYLOR_ORDER: usize = 18;
/// Scaling target: the scaled matrix satisfies `‖m / 2^s‖₁ ≤ EXPM_SCALED_NORM`.
const EXPM_SCALED_NORM: f64 = 0.5;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Dense complex matrix stored in row-major order.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Build from a row-major entry vector.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                left: (rows, cols),
                right: (data.len(), 1),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Build from nested rows; all rows must have the same length.
    pub fn from_rows<R: AsRef<[C64]>>(rows: &[R]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(nrows * ncols);
        for row in rows {
            let row = row.as_ref();
            if row.len() != ncols {
                return Err(Error::ShapeMismatch {
                    left: (nrows, ncols),
                    right: (1, row.len()),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self {
            rows: nrows,
            cols: ncols,
            data,
        })
    }

    /// Real matrix from nested rows. Panics on ragged input.
    pub fn from_real(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == m), "ragged rows");
        Self::from_fn(n, m, |i, j| C64::new(rows[i][j], 0.0))
    }

    pub fn diag(entries: &[C64]) -> Self {
        let n = entries.len();
        Self::from_fn(n, n, |i, j| if i == j { entries[i] } else { ZERO })
    }

    pub fn real_diag(entries: &[f64]) -> Self {
        let n = entries.len();
        Self::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(entries[i], 0.0)
            } else {
                ZERO
            }
        })
    }

    /// The matrix unit `|r⟩⟨s|` in dimension `n`.
    pub fn unit(n: usize, r: usize, s: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m[(r, s)] = ONE;
        m
    }

    /// Outer product `|u⟩⟨v|`.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn ensure_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn scale(&self, k: C64) -> Self {
        self.map(|z| z * k)
    }

    pub fn scale_real(&self, k: f64) -> Self {
        self.map(|z| z * k)
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest entry modulus, `‖m‖_max`.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Induced 1-norm: largest absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `‖m − m†‖_max`; infinite for non-square input.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut d: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                d = d.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        d
    }

    /// `(m + m†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        })
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Kronecker product; index `(a, b)` of the result is `a_self * other.rows + b`.
    pub fn kron(&self, other: &Self) -> Self {
        let (r2, c2) = other.shape();
        Self::from_fn(self.rows * r2, self.cols * c2, |i, j| {
            self[(i / r2, j / c2)] * other[(i % r2, j % c2)]
        })
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols, "matrix-vector shape mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Distance `‖self − other‖_max`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.shape(), other.shape(), "shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for z in self.row(i) {
                write!(f, "{:>+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(
            self.cols,
            rhs.rows,
            "matmul shape mismatch: {:?} * {:?}",
            self.shape(),
            rhs.shape()
        );
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let rrow = rhs.row(k);
                let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, b) in orow.iter_mut().zip(rrow) {
                    *o += a * b;
                }
            }
        }
        out
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        assert_eq!(self.shape(), rhs.shape(), "add shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl SubAssign<&ComplexMatrix> for ComplexMatrix {
    fn sub_assign(&mut self, rhs: &ComplexMatrix) {
        assert_eq!(self.shape(), rhs.shape(), "sub shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        self.map(|z| -z)
    }
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, in the order of `values`.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }

    /// `Σₖ λᵏ vᵏ vᵏ†`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.values.len();
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &lam) in self.values.iter().enumerate() {
            let v = self.vector(k);
            out += &ComplexMatrix::outer(&v, &v).scale_real(lam);
        }
        out
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
///
/// The input must satisfy `‖m − m†‖_max ≤ tol`; its Hermitian part is
/// diagonalized. Eigenvalues come back ascending. Within a degenerate cluster
/// the eigenvectors are an arbitrary orthonormal basis.
pub fn hermitian_eig(m: &ComplexMatrix, tol: f64) -> Result<HermitianEigen> {
    let n = m.ensure_square()?;
    let defect = m.hermiticity_defect();
    if !(defect <= tol) {
        return Err(Error::NotHermitian { defect });
    }
    let mut a = m.hermitian_part();
    for i in 0..n {
        a[(i, i)].im = 0.0;
    }
    let mut v = ComplexMatrix::identity(n);

    let total = a.frobenius_norm();
    let threshold = f64::EPSILON * total;
    let mut converged = false;
    for sweep in 0..MAX_JACOBI_SWEEPS {
        let off = off_diagonal_norm(&a);
        if off <= threshold || off == 0.0 {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let b = apq.norm();
                if b == 0.0 {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                // Once the element is below the resolution of both diagonal
                // entries it can be dropped outright.
                if sweep > 3
                    && app.abs() + 100.0 * b == app.abs()
                    && aqq.abs() + 100.0 * b == aqq.abs()
                {
                    a[(p, q)] = ZERO;
                    a[(q, p)] = ZERO;
                    continue;
                }
                rotate(&mut a, &mut v, p, q, apq, b);
            }
        }
    }
    if !converged {
        let off = off_diagonal_norm(&a);
        if !(off <= threshold || off == 0.0) {
            return Err(Error::NoConvergence {
                sweeps: MAX_JACOBI_SWEEPS,
            });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(x, x)].re.total_cmp(&a[(y, y)].re));
    let values = order.iter().map(|&k| a[(k, k)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(HermitianEigen { values, vectors })
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Annihilate `a[p][q]` with the unitary `R = Φ·G`, where `Φ` removes the phase
/// of `a[p][q]` and `G` is the real Jacobi rotation of the resulting real 2×2
/// block. Applies `a ← R† a R` and `v ← v R`.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize, apq: C64, b: f64) {
    let n = a.rows();
    let phase = apq / b; // e^{iφ}
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = (aqq - app) / (2.0 * b);
    let mut t = 1.0 / (theta.abs() + (theta * theta + 1.0).sqrt());
    if theta < 0.0 {
        t = -t;
    }
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let phase_conj = phase.conj();

    // a ← a R (columns p, q)
    for k in 0..n {
        let x = a[(k, p)];
        let y = a[(k, q)];
        a[(k, p)] = x * c - y * phase_conj * s;
        a[(k, q)] = x * s + y * phase_conj * c;
    }
    // a ← R† a (rows p, q)
    for k in 0..n {
        let x = a[(p, k)];
        let y = a[(q, k)];
        a[(p, k)] = x * c - y * phase * s;
        a[(q, k)] = x * s + y * phase * c;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = C64::new(app - t * b, 0.0);
    a[(q, q)] = C64::new(aqq + t * b, 0.0);

    for k in 0..n {
        let x = v[(k, p)];
        let y = v[(k, q)];
        v[(k, p)] = x * c - y * phase_conj * s;
        v[(k, q)] = x * s + y * phase_conj * c;
    }
}

/// Matrix exponential by scaling and squaring with a truncated Taylor series.
pub fn expm(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = m.ensure_square()?;
    let norm = m.norm_one();
    let mut squarings = 0u32;
    if norm > EXPM_SCALED_NORM {
        squarings = (norm / EXPM_SCALED_NORM).log2().ceil() as u32;
    }
    let x = m.scale_real(0.5f64.powi(squarings as i32));

    // Horner form of Σ_{k≤18} xᵏ/k!: I + x(I + x/2(I + x/3(… (I + x/18)))).
    let id = ComplexMatrix::identity(n);
    let mut acc = id.clone();
    for k in (1..=EXPM_TAYLOR_ORDER).rev() {
        let term = &x * &acc;
        acc = &id + &term.scale_real(1.0 / k as f64);
    }
    for _ in 0..squarings {
        acc = &acc * &acc;
    }
    Ok(acc)
}

/// Frobenius (Hilbert–Schmidt) inner product `Tr(a b†) = Σᵢⱼ aᵢⱼ conj(bᵢⱼ)`.
pub fn frobenius_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<C64> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch {
            left: a.shape(),
            right: b.shape(),
        });
    }
    Ok(a.data.iter().zip(&b.data).map(|(x, y)| x * y.conj()).sum())
}

/// Pauli matrices `σ¹, σ², σ³`, indexed 1..=3; index 0 is the identity.
pub fn pauli(k: usize) -> ComplexMatrix {
    let (o, z, i) = (ONE, ZERO, I);
    let rows: [[C64; 2]; 2] = match k {
        0 => [[o, z], [z, o]],
        1 => [[z, o], [o, z]],
        2 => [[z, -i], [i, z]],
        3 => [[o, z], [z, -o]],
        _ => panic!("pauli index {k} out of range 0..=3"),
    };
    ComplexMatrix::from_rows(&rows).expect("2x2")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    #[test]
    fn eig_identity() {
        let e = hermitian_eig(&ComplexMatrix::identity(2), 1e-12).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0]);
    }

    #[test]
    fn eig_sigma3_sorted() {
        let e = hermitian_eig(&pauli(3), 1e-12).unwrap();
        assert_eq!(e.values, vec![-1.0, 1.0]);
    }

    #[test]
    fn eig_sigma1_vectors() {
        let e = hermitian_eig(&pauli(1), 1e-12).unwrap();
        assert_abs_diff_eq!(e.values[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.values[1], 1.0, epsilon = 1e-14);
        // (1, -1)/√2 and (1, 1)/√2 up to a phase
        let v0 = e.vector(0);
        let v1 = e.vector(1);
        let overlap0 = (v0[0] * FRAC_1_SQRT_2 - v0[1] * FRAC_1_SQRT_2).norm();
        let overlap1 = (v1[0] * FRAC_1_SQRT_2 + v1[1] * FRAC_1_SQRT_2).norm();
        assert_abs_diff_eq!(overlap0, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(overlap1, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn eig_sigma2_complex_entries() {
        let e = hermitian_eig(&pauli(2), 1e-12).unwrap();
        assert_abs_diff_eq!(e.values[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.values[1], 1.0, epsilon = 1e-14);
        assert!(e.reconstruct().max_abs_diff(&pauli(2)) < 1e-14);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = ComplexMatrix::from_real(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(
            hermitian_eig(&m, 1e-10),
            Err(Error::NotHermitian { .. })
        ));
        let r = ComplexMatrix::zeros(2, 3);
        assert!(matches!(
            hermitian_eig(&r, 1e-10),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn eig_zero_matrix() {
        let e = hermitian_eig(&ComplexMatrix::zeros(3, 3), 0.0).unwrap();
        assert_eq!(e.values, vec![0.0; 3]);
    }

    #[test]
    fn expm_zero_is_identity() {
        let e = expm(&ComplexMatrix::zeros(3, 3)).unwrap();
        assert_eq!(e, ComplexMatrix::identity(3));
    }

    #[test]
    fn expm_i_pi_sigma1_is_minus_identity() {
        let m = pauli(1).scale(I * PI);
        let e = expm(&m).unwrap();
        assert!(e.max_abs_diff(&ComplexMatrix::identity(2).scale_real(-1.0)) < 1e-13);
    }

    #[test]
    fn expm_diagonal() {
        let e = expm(&ComplexMatrix::real_diag(&[1.0, -2.0])).unwrap();
        assert_abs_diff_eq!(e[(0, 0)].re, 1f64.exp(), epsilon = 1e-13);
        assert_abs_diff_eq!(e[(1, 1)].re, (-2f64).exp(), epsilon = 1e-15);
        assert_eq!(e[(0, 1)], ZERO);
    }

    #[test]
    fn frobenius_inner_examples() {
        let s1 = pauli(1).scale_real(FRAC_1_SQRT_2);
        assert_abs_diff_eq!(frobenius_inner(&s1, &s1).unwrap().re, 1.0, epsilon = 1e-15);
        assert_eq!(frobenius_inner(&pauli(1), &pauli(2)).unwrap(), ZERO);
        let id = ComplexMatrix::identity(2);
        assert_eq!(frobenius_inner(&id, &id).unwrap(), C64::new(2.0, 0.0));
        assert!(matches!(
            frobenius_inner(&id, &ComplexMatrix::identity(3)),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn kron_index_convention() {
        let a = ComplexMatrix::unit(2, 0, 1);
        let b = ComplexMatrix::unit(2, 1, 0);
        let k = a.kron(&b);
        // (0·2 + 1, 1·2 + 0)
        assert_eq!(k[(1, 2)], ONE);
        assert_abs_diff_eq!(k.frobenius_norm(), 1.0);
    }

    #[test]
    fn from_rows_rejects_ragged() {
        let rows = vec![vec![ONE, ZERO], vec![ONE]];
        assert!(ComplexMatrix::from_rows(&rows).is_err());
    }
}
