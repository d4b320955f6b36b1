//! Superoperators as Hermitian N²×N² matrices.
//!
//! A linear map on N×N matrices is stored as `A` with
//! `ρ'ᵢⱼ = Σᵣₛ A_{ir,js} ρᵣₛ`, row index `(i, r) ↦ i·N + r` and column index
//! `(j, s) ↦ j·N + s`. In this pairing a Hermiticity-preserving map gives a
//! Hermitian `A`, whose eigendecomposition is the spectral form
//! `ρ' = Σ λᵅ Eᵅ ρ Eᵅ†` with `Eᵅ` the reshaped eigenvectors.
//!
//! Note that this is *not* the usual column-stacked Liouville matrix; see
//! [`SuperoperatorMatrix::to_liouville`] for the form that composes by matrix
//! multiplication.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{frobenius_inner, hermitian_eig, pauli, ComplexMatrix, C64, ONE, ZERO};
use crate::states::basis_density_matrices;
use crate::LinearMap;

/// Hermiticity tolerance for superoperator and Choi matrices.
pub const HERMITICITY_TOLERANCE: f64 = 1e-10;
/// Default tolerance on the smallest Choi eigenvalue.
pub const CP_TOLERANCE: f64 = 1e-9;
/// Relative tolerance of the superposition probe.
pub const LINEARITY_TOLERANCE: f64 = 1e-8;
/// Tolerance on the eigenvalue-sum constraint and the region inequalities.
pub const REGION_TOLERANCE: f64 = 1e-9;

/// Matrix `A_{ir,js}` of a linear map on N×N matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperoperatorMatrix {
    dim: usize,
    a: ComplexMatrix,
}

impl SuperoperatorMatrix {
    pub fn from_matrix(dim: usize, a: ComplexMatrix) -> Result<Self> {
        if a.shape() != (dim * dim, dim * dim) {
            return Err(Error::ShapeMismatch {
                left: (dim * dim, dim * dim),
                right: a.shape(),
            });
        }
        Ok(Self { dim, a })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.a
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.a.hermiticity_defect()
    }

    /// Row-vectorized Liouville matrix `L` with `vec(ρ')= L vec(ρ)` and
    /// `vec(ρ)_{i·N+j} = ρᵢⱼ`. Composition of maps is the product of their
    /// Liouville matrices.
    pub fn to_liouville(&self) -> ComplexMatrix {
        let n = self.dim;
        ComplexMatrix::from_fn(n * n, n * n, |row, col| {
            let (i, j) = (row / n, row % n);
            let (r, s) = (col / n, col % n);
            self.a[(i * n + r, j * n + s)]
        })
    }

    pub fn from_liouville(dim: usize, l: &ComplexMatrix) -> Result<Self> {
        let n = dim;
        if l.shape() != (n * n, n * n) {
            return Err(Error::ShapeMismatch {
                left: (n * n, n * n),
                right: l.shape(),
            });
        }
        // the reshuffle is an involution
        let a = ComplexMatrix::from_fn(n * n, n * n, |row, col| {
            let (i, r) = (row / n, row % n);
            let (j, s) = (col / n, col % n);
            l[(i * n + j, r * n + s)]
        });
        Ok(Self { dim, a })
    }

    /// `maxᵣₛ |Σᵢ A_{ir,is} − δᵣₛ|`; zero for trace-preserving maps.
    pub fn trace_preservation_defect(&self) -> f64 {
        let n = self.dim;
        let mut d: f64 = 0.0;
        for r in 0..n {
            for s in 0..n {
                let t: C64 = (0..n).map(|i| self.a[(i * n + r, i * n + s)]).sum();
                let target = if r == s { ONE } else { ZERO };
                d = d.max((t - target).norm());
            }
        }
        d
    }
}

impl LinearMap for SuperoperatorMatrix {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let n = self.dim;
        ComplexMatrix::from_fn(n, n, |i, j| {
            let mut acc = ZERO;
            for r in 0..n {
                for s in 0..n {
                    acc += self.a[(i * n + r, j * n + s)] * rho[(r, s)];
                }
            }
            acc
        })
    }
}

/// Deterministic dense probe matrices used to test superposition.
fn probe_matrices(n: usize) -> (ComplexMatrix, ComplexMatrix) {
    let x = ComplexMatrix::from_fn(n, n, |i, j| {
        let k = (i * n + j) as f64;
        C64::new((1.3 * k + 0.4).sin(), (0.7 * k + 1.1).cos())
    });
    let y = ComplexMatrix::from_fn(n, n, |i, j| {
        let k = (i * n + j) as f64;
        C64::new((2.1 * k + 0.9).cos(), (1.7 * k + 0.2).sin())
    });
    (x, y)
}

/// Superposition probe `f(αX + βY) − αf(X) − βf(Y)` with `α + β ≠ 1`, so
/// affine maps are caught as well.
fn check_linearity<M: LinearMap + ?Sized>(map: &M) -> Result<()> {
    let n = map.dim();
    let (x, y) = probe_matrices(n);
    let alpha = C64::new(0.7, -0.3);
    let beta = C64::new(-1.1, 0.4);
    let combined = &x.scale(alpha) + &y.scale(beta);
    let fx = map.apply(&x);
    let fy = map.apply(&y);
    let lhs = map.apply(&combined);
    if lhs.shape() != (n, n) || fx.shape() != (n, n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: lhs.rows(),
        });
    }
    let rhs = &fx.scale(alpha) + &fy.scale(beta);
    let scale = 1f64.max(lhs.max_abs()).max(rhs.max_abs());
    let defect = lhs.max_abs_diff(&rhs) / scale;
    if !(defect <= LINEARITY_TOLERANCE) {
        return Err(Error::NotLinear { defect });
    }
    Ok(())
}

/// Build `A_{ir,js} = ⟨i| f(|r⟩⟨s|) |j⟩` by probing `f` on the matrix units.
pub fn superop_from_action<M: LinearMap + ?Sized>(map: &M) -> Result<SuperoperatorMatrix> {
    let n = map.dim();
    check_linearity(map)?;
    let mut a = ComplexMatrix::zeros(n * n, n * n);
    for r in 0..n {
        for s in 0..n {
            let image = map.apply(&ComplexMatrix::unit(n, r, s));
            for i in 0..n {
                for j in 0..n {
                    a[(i * n + r, j * n + s)] = image[(i, j)];
                }
            }
        }
    }
    let sop = SuperoperatorMatrix { dim: n, a };
    // a map that is linear on the probes but not on the units would slip
    // through the superposition check; compare the reconstruction too
    let (x, _) = probe_matrices(n);
    let direct = map.apply(&x);
    let defect = direct.max_abs_diff(&sop.apply(&x)) / 1f64.max(direct.max_abs());
    if !(defect <= LINEARITY_TOLERANCE) {
        return Err(Error::NotLinear { defect });
    }
    Ok(sop)
}

/// Spectral form `ρ' = Σ λᵅ Eᵅ ρ Eᵅ†` of a Hermiticity-preserving map.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralChannel {
    dim: usize,
    eigenvalues: Vec<f64>,
    eigenops: Vec<ComplexMatrix>,
}

impl SpectralChannel {
    pub fn new(dim: usize, eigenvalues: Vec<f64>, eigenops: Vec<ComplexMatrix>) -> Result<Self> {
        if eigenvalues.len() != eigenops.len() {
            return Err(Error::DimensionMismatch {
                expected: eigenvalues.len(),
                got: eigenops.len(),
            });
        }
        if let Some(bad) = eigenops.iter().find(|e| e.shape() != (dim, dim)) {
            return Err(Error::ShapeMismatch {
                left: (dim, dim),
                right: bad.shape(),
            });
        }
        Ok(Self {
            dim,
            eigenvalues,
            eigenops,
        })
    }

    /// The two-level map `ρ ↦ ½ Σ λᵅ σᵅ ρ σᵅ` with eigenoperators
    /// `σ¹/√2, σ²/√2, σ³/√2, 1/√2` in that order.
    pub fn pauli(lambdas: [f64; 4]) -> Self {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let eigenops = [1, 2, 3, 0].map(|k| pauli(k).scale_real(r)).to_vec();
        Self {
            dim: 2,
            eigenvalues: lambdas.to_vec(),
            eigenops,
        }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenops(&self) -> &[ComplexMatrix] {
        &self.eigenops
    }

    pub fn eigenvalue_sum(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }

    /// `max |Tr Eᵅ Eᵝ† − δᵅᵝ|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (a, ea) in self.eigenops.iter().enumerate() {
            for (b, eb) in self.eigenops.iter().enumerate() {
                let g = frobenius_inner(ea, eb).expect("shapes checked");
                let target = if a == b { ONE } else { ZERO };
                d = d.max((g - target).norm());
            }
        }
        d
    }

    /// `A = Σ λᵅ vec(Eᵅ) vec(Eᵅ)†`.
    pub fn to_superop(&self) -> SuperoperatorMatrix {
        let n = self.dim;
        let mut a = ComplexMatrix::zeros(n * n, n * n);
        for (lam, e) in self.eigenvalues.iter().zip(&self.eigenops) {
            a += &ComplexMatrix::outer(e.as_slice(), e.as_slice()).scale_real(*lam);
        }
        SuperoperatorMatrix { dim: n, a }
    }
}

impl LinearMap for SpectralChannel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        for (lam, e) in self.eigenvalues.iter().zip(&self.eigenops) {
            if *lam == 0.0 {
                continue;
            }
            out += &(&(e * rho) * &e.adjoint()).scale_real(*lam);
        }
        out
    }
}

/// Eigendecompose `A` into eigenvalues λᵅ (ascending) and eigenoperators Eᵅ.
pub fn spectral_decompose(s: &SuperoperatorMatrix) -> Result<SpectralChannel> {
    let n = s.dim;
    let tol = HERMITICITY_TOLERANCE * 1f64.max(s.a.max_abs());
    let eig = hermitian_eig(&s.a, tol)?;
    let eigenops = (0..n * n)
        .map(|k| ComplexMatrix::from_vec(n, n, eig.vector(k)).expect("N² entries"))
        .collect();
    Ok(SpectralChannel {
        dim: n,
        eigenvalues: eig.values,
        eigenops,
    })
}

/// `‖Σ λᵅ Eᵅ†Eᵅ − 1‖_max`; zero iff the spectral map preserves trace.
pub fn trace_constraint_defect(sc: &SpectralChannel) -> f64 {
    let n = sc.dim;
    let mut sum = ComplexMatrix::zeros(n, n);
    for (lam, e) in sc.eigenvalues.iter().zip(&sc.eigenops) {
        sum += &(&e.adjoint() * e).scale_real(*lam);
    }
    sum.max_abs_diff(&ComplexMatrix::identity(n))
}

/// Choi matrix `(f ⊗ 1)(|w⟩⟨w|)` with `|w⟩ = Σᵣ |φᵣ⟩|χᵣ⟩` left unnormalized.
///
/// Product-basis index of `|φₘ⟩|χₙ⟩` is `m·N + n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    dim: usize,
    c: ComplexMatrix,
}

impl ChoiMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.c
    }

    pub fn trace(&self) -> C64 {
        self.c.trace()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let tol = HERMITICITY_TOLERANCE * 1f64.max(self.c.max_abs());
        Ok(hermitian_eig(&self.c, tol)?.values)
    }
}

/// Build the Choi matrix by acting with `f ⊗ 1` on `|w⟩⟨w| = Σᵣₛ |r⟩⟨s| ⊗ |r⟩⟨s|`.
pub fn choi_matrix<M: LinearMap + ?Sized>(map: &M) -> Result<ChoiMatrix> {
    let n = map.dim();
    check_linearity(map)?;
    let mut c = ComplexMatrix::zeros(n * n, n * n);
    for r in 0..n {
        for s in 0..n {
            let unit = ComplexMatrix::unit(n, r, s);
            c += &map.apply(&unit).kron(&unit);
        }
    }
    Ok(ChoiMatrix { dim: n, c })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CpVerdict {
    CompletelyPositive { min_eigenvalue: f64 },
    NotCompletelyPositive { min_eigenvalue: f64 },
}

impl CpVerdict {
    pub fn is_cp(&self) -> bool {
        matches!(self, CpVerdict::CompletelyPositive { .. })
    }

    pub fn min_eigenvalue(&self) -> f64 {
        match *self {
            CpVerdict::CompletelyPositive { min_eigenvalue }
            | CpVerdict::NotCompletelyPositive { min_eigenvalue } => min_eigenvalue,
        }
    }
}

/// Complete positivity via the smallest Choi eigenvalue.
pub fn cp_check<M: LinearMap + ?Sized>(map: &M, tol: f64) -> Result<CpVerdict> {
    let eig = choi_matrix(map)?.eigenvalues()?;
    let min_eigenvalue = eig[0];
    Ok(if min_eigenvalue >= -tol {
        CpVerdict::CompletelyPositive { min_eigenvalue }
    } else {
        CpVerdict::NotCompletelyPositive { min_eigenvalue }
    })
}

/// Positivity of a trace-preserving map, probed on the density-matrix basis.
///
/// Returns true iff every basis state is mapped to a Hermitian matrix with
/// smallest eigenvalue `≥ −tol`. Positivity on all states is then inferred
/// from convexity.
pub fn positive_on_basis<M: LinearMap + ?Sized>(map: &M, tol: f64) -> Result<bool> {
    let n = map.dim();
    check_linearity(map)?;
    let mut tp_defect: f64 = 0.0;
    for r in 0..n {
        for s in 0..n {
            let t = map.apply(&ComplexMatrix::unit(n, r, s)).trace();
            let target = if r == s { ONE } else { ZERO };
            tp_defect = tp_defect.max((t - target).norm());
        }
    }
    if !(tp_defect <= tol) {
        return Err(Error::NotTracePreserving { defect: tp_defect });
    }
    for rho in basis_density_matrices(n)? {
        let out = map.apply(rho.matrix());
        if out.hermiticity_defect() > tol {
            return Ok(false);
        }
        let min = hermitian_eig(&out.hermitian_part(), f64::INFINITY)?.values[0];
        if min < -tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Classification of a two-level Pauli map with `λ² = λ¹`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegionClass {
    /// Fails the eigenvalue-sum constraint or maps some state to a non-positive matrix.
    Invalid,
    /// Positive but with a negative eigenvalue, hence not completely positive.
    PositiveOnly,
    CompletelyPositive,
}

impl RegionClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegionClass::Invalid => "invalid",
            RegionClass::PositiveOnly => "positive_only",
            RegionClass::CompletelyPositive => "completely_positive",
        }
    }
}

impl fmt::Display for RegionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RegionClass {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "invalid" => Ok(RegionClass::Invalid),
            "positive_only" => Ok(RegionClass::PositiveOnly),
            "completely_positive" => Ok(RegionClass::CompletelyPositive),
            other => Err(format!("unknown region class {other:?}")),
        }
    }
}

/// Classify the Pauli map with eigenvalues `(λ¹, λ¹, λ³, λ⁴)`.
pub fn region_classify(l1: f64, l3: f64, l4: f64) -> RegionClass {
    let tol = REGION_TOLERANCE;
    let l2 = l1;
    if (2.0 * l1 + l3 + l4 - 2.0).abs() > tol {
        return RegionClass::Invalid;
    }
    let within = |x: f64| x >= -tol && x <= 2.0 + tol;
    let positive = within(l1 + l2) && within(l3 + l4) && within(l1 + l4) && within(l2 + l4);
    if !positive {
        RegionClass::Invalid
    } else if [l1, l2, l3, l4].iter().all(|&l| l >= -tol) {
        RegionClass::CompletelyPositive
    } else {
        RegionClass::PositiveOnly
    }
}

/// Grid point of [`region_scan`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionPoint {
    pub l1: f64,
    pub l3: f64,
    pub l4: f64,
    pub class: RegionClass,
    /// For `PositiveOnly` points: whether the induced map was confirmed to be
    /// positive on the basis and not completely positive. `None` otherwise.
    pub cross_check: Option<bool>,
}

impl RegionPoint {
    pub fn pauli_map(&self) -> SpectralChannel {
        SpectralChannel::pauli([self.l1, self.l1, self.l3, self.l4])
    }
}

pub const REGION_L1_RANGE: (f64, f64) = (-0.5, 2.5);
pub const REGION_L3_RANGE: (f64, f64) = (-2.5, 2.5);

/// Scan the plane `2λ¹ + λ³ + λ⁴ = 2` on a `resolution × resolution` grid in
/// `(λ¹, λ³)`, ordered with `λ¹` as the slow index.
pub fn region_scan(resolution: usize) -> Result<Vec<RegionPoint>> {
    if resolution < 2 {
        return Err(Error::BadDimension(resolution));
    }
    let step = |(lo, hi): (f64, f64), k: usize| lo + (hi - lo) * k as f64 / (resolution - 1) as f64;
    (0..resolution * resolution)
        .into_par_iter()
        .map(|idx| {
            let l1 = step(REGION_L1_RANGE, idx / resolution);
            let l3 = step(REGION_L3_RANGE, idx % resolution);
            let l4 = 2.0 - 2.0 * l1 - l3;
            let class = region_classify(l1, l3, l4);
            let mut point = RegionPoint {
                l1,
                l3,
                l4,
                class,
                cross_check: None,
            };
            if class == RegionClass::PositiveOnly {
                let map = point.pauli_map();
                let positive = positive_on_basis(&map, REGION_TOLERANCE)?;
                let cp = cp_check(&map, REGION_TOLERANCE)?.is_cp();
                point.cross_check = Some(positive && !cp);
            }
            Ok(point)
        })
        .collect()
}
