//! Density matrices and the density-matrix basis.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, ComplexMatrix, C64, I, ONE, ZERO};

/// Default tolerance for the Hermitian, trace and positivity checks.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// Per-constraint tolerances used by [`validate_density_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub hermiticity: f64,
    pub trace: f64,
    /// Smallest eigenvalue allowed is `-positivity`.
    pub positivity: f64,
}

impl Tolerances {
    pub const fn uniform(tol: f64) -> Self {
        Self {
            hermiticity: tol,
            trace: tol,
            positivity: tol,
        }
    }

    /// Tolerances for states emitted along an integrated trajectory: positivity
    /// is relaxed to absorb accumulated truncation error.
    pub const TRAJECTORY: Self = Self {
        hermiticity: DEFAULT_TOLERANCE,
        trace: DEFAULT_TOLERANCE,
        positivity: 1e-8,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::uniform(DEFAULT_TOLERANCE)
    }
}

/// A single failed density-matrix constraint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Violation {
    NotHermitian { defect: f64 },
    TraceNotOne { defect: f64 },
    NotPositive { min_eigenvalue: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotHermitian { defect } => write!(f, "not Hermitian (defect {defect:e})"),
            Violation::TraceNotOne { defect } => write!(f, "trace differs from 1 by {defect:e}"),
            Violation::NotPositive { min_eigenvalue } => {
                write!(f, "not positive (min eigenvalue {min_eigenvalue:e})")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Valid,
    Invalid(Vec<Violation>),
}

/// Outcome of checking a matrix against the three density-matrix constraints.
///
/// All three defects are always computed, even when an earlier check fails.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    /// `‖m − m†‖_max`
    pub hermiticity_defect: f64,
    /// `|Tr m − 1|`
    pub trace_defect: f64,
    /// Smallest eigenvalue of the Hermitian part of `m`.
    pub min_eigenvalue: f64,
    pub verdict: Verdict,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.verdict == Verdict::Valid
    }

    pub fn violations(&self) -> &[Violation] {
        match &self.verdict {
            Verdict::Valid => &[],
            Verdict::Invalid(v) => v,
        }
    }

    /// Violations joined into one human-readable line.
    pub fn reason(&self) -> String {
        self.violations()
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join("; ")
    }
}

/// Check `m` against the density-matrix constraints with a single tolerance.
pub fn validate_density(m: &ComplexMatrix, tol: f64) -> Result<ValidationReport> {
    validate_density_with(m, &Tolerances::uniform(tol))
}

pub fn validate_density_with(m: &ComplexMatrix, tol: &Tolerances) -> Result<ValidationReport> {
    let n = m.ensure_square()?;
    if n == 0 {
        return Err(Error::BadDimension(0));
    }
    let hermiticity_defect = m.hermiticity_defect();
    let trace_defect = (m.trace() - ONE).norm();
    let min_eigenvalue = hermitian_eig(&m.hermitian_part(), f64::INFINITY)?.values[0];

    let mut violations = Vec::new();
    if !(hermiticity_defect <= tol.hermiticity) {
        violations.push(Violation::NotHermitian {
            defect: hermiticity_defect,
        });
    }
    if !(trace_defect <= tol.trace) {
        violations.push(Violation::TraceNotOne {
            defect: trace_defect,
        });
    }
    if !(min_eigenvalue >= -tol.positivity) {
        violations.push(Violation::NotPositive { min_eigenvalue });
    }
    let verdict = if violations.is_empty() {
        Verdict::Valid
    } else {
        Verdict::Invalid(violations)
    };
    Ok(ValidationReport {
        hermiticity_defect,
        trace_defect,
        min_eigenvalue,
        verdict,
    })
}

/// A validated density matrix: Hermitian, unit trace, positive.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(m: ComplexMatrix, tol: f64) -> Result<Self> {
        Self::with_tolerances(m, &Tolerances::uniform(tol))
    }

    pub fn with_tolerances(m: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let report = validate_density_with(&m, tol)?;
        if report.is_valid() {
            Ok(Self { matrix: m })
        } else {
            Err(Error::InvalidDensity(report.reason()))
        }
    }

    /// Skip validation. Only for matrices valid by construction.
    pub(crate) fn new_unchecked(matrix: ComplexMatrix) -> Self {
        Self { matrix }
    }

    /// `|ψ⟩⟨ψ|` for a unit vector ψ.
    pub fn from_pure(psi: &[C64]) -> Result<Self> {
        if psi.is_empty() {
            return Err(Error::InvalidState("empty state vector".into()));
        }
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState(format!("norm {norm} is not 1")));
        }
        Ok(Self::new_unchecked(ComplexMatrix::outer(psi, psi)))
    }

    pub fn maximally_mixed(n: usize) -> Self {
        Self::new_unchecked(ComplexMatrix::identity(n).scale_real(1.0 / n as f64))
    }

    /// The projector onto basis state `k`.
    pub fn basis_state(n: usize, k: usize) -> Self {
        Self::new_unchecked(ComplexMatrix::unit(n, k, k))
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }
}

impl AsRef<ComplexMatrix> for DensityMatrix {
    fn as_ref(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

/// The N² density matrices that span the Hermitian N×N matrices.
///
/// Ordering: the N diagonal projectors, then for each pair `k < l`
/// (lexicographic) the real-coherence states `ρₖₖ = ρₗₗ = ρₖₗ = ρₗₖ = ½`, then
/// for each pair the imaginary-coherence states `ρₖₖ = ρₗₗ = ½, ρₖₗ = −i/2,
/// ρₗₖ = i/2`.
pub fn basis_density_matrices(n: usize) -> Result<Vec<DensityMatrix>> {
    if n < 2 {
        return Err(Error::BadDimension(n));
    }
    let half = C64::new(0.5, 0.0);
    let mut out = Vec::with_capacity(n * n);
    for k in 0..n {
        out.push(DensityMatrix::basis_state(n, k));
    }
    for (k, l) in pairs(n) {
        let mut m = ComplexMatrix::zeros(n, n);
        m[(k, k)] = half;
        m[(l, l)] = half;
        m[(k, l)] = half;
        m[(l, k)] = half;
        out.push(DensityMatrix::new_unchecked(m));
    }
    for (k, l) in pairs(n) {
        let mut m = ComplexMatrix::zeros(n, n);
        m[(k, k)] = half;
        m[(l, l)] = half;
        m[(k, l)] = -I * 0.5;
        m[(l, k)] = I * 0.5;
        out.push(DensityMatrix::new_unchecked(m));
    }
    Ok(out)
}

fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |k| ((k + 1)..n).map(move |l| (k, l)))
}

/// Coefficients `cᵤ` with `Σ cᵤ ρᵤ = h` over [`basis_density_matrices`].
///
/// The coefficients are real when `h` is Hermitian and sum to `Tr h`.
pub fn basis_expansion(h: &ComplexMatrix) -> Result<Vec<C64>> {
    let n = h.ensure_square()?;
    if n < 2 {
        return Err(Error::BadDimension(n));
    }
    let npairs = n * (n - 1) / 2;
    let mut coeffs = vec![ZERO; n * n];
    let mut diag: Vec<C64> = (0..n).map(|k| h[(k, k)]).collect();
    for (idx, (k, l)) in pairs(n).enumerate() {
        let (hkl, hlk) = (h[(k, l)], h[(l, k)]);
        let real = hkl + hlk;
        let imag = I * (hkl - hlk);
        coeffs[n + idx] = real;
        coeffs[n + npairs + idx] = imag;
        // each pair state also puts ½ on both diagonal entries
        let spill = (real + imag) * 0.5;
        diag[k] -= spill;
        diag[l] -= spill;
    }
    coeffs[..n].copy_from_slice(&diag);
    Ok(coeffs)
}

/// Reconstruct `B` such that `f(ρ) = Tr(Bρ)` for a linear functional `f`.
///
/// `f` is only evaluated on the density-matrix basis. A result of zero
/// certifies that the functional vanishes on every density matrix.
pub fn functional_nullity_witness<F>(f: F, n: usize) -> Result<ComplexMatrix>
where
    F: Fn(&ComplexMatrix) -> C64,
{
    let basis = basis_density_matrices(n)?;
    let values: Vec<C64> = basis.iter().map(|rho| f(rho.matrix())).collect();
    let npairs = n * (n - 1) / 2;

    let mut b = ComplexMatrix::zeros(n, n);
    for k in 0..n {
        b[(k, k)] = values[k];
    }
    // With Tr(Bρ) = Σ B_sr ρ_rs:
    //   real pair:      f = ½(B_kk + B_ll) + ½(B_kl + B_lk)
    //   imaginary pair: f = ½(B_kk + B_ll) + (i/2)(B_kl − B_lk)
    for (idx, (k, l)) in pairs(n).enumerate() {
        let diag = values[k] + values[l];
        let sum = values[n + idx] * 2.0 - diag;
        let diff = (values[n + npairs + idx] * 2.0 - diag) * (-I);
        b[(k, l)] = (sum + diff) * 0.5;
        b[(l, k)] = (sum - diff) * 0.5;
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli;
    use approx::assert_abs_diff_eq;

    #[test]
    fn maximally_mixed_is_valid() {
        let m = ComplexMatrix::identity(2).scale_real(0.5);
        assert!(validate_density(&m, DEFAULT_TOLERANCE).unwrap().is_valid());
    }

    #[test]
    fn pure_projector_is_valid() {
        let m = ComplexMatrix::real_diag(&[1.0, 0.0]);
        assert!(validate_density(&m, DEFAULT_TOLERANCE).unwrap().is_valid());
    }

    #[test]
    fn negative_eigenvalue_reported() {
        let m = ComplexMatrix::real_diag(&[1.5, -0.5]);
        let r = validate_density(&m, DEFAULT_TOLERANCE).unwrap();
        assert!(!r.is_valid());
        assert_abs_diff_eq!(r.min_eigenvalue, -0.5, epsilon = 1e-15);
        assert_eq!(r.trace_defect, 0.0);
        assert_eq!(
            r.violations(),
            &[Violation::NotPositive {
                min_eigenvalue: r.min_eigenvalue
            }]
        );
    }

    #[test]
    fn all_defects_reported_together() {
        let m = ComplexMatrix::from_real(&[&[2.0, 1.0], &[0.0, -2.0]]);
        let r = validate_density(&m, DEFAULT_TOLERANCE).unwrap();
        assert_eq!(r.violations().len(), 3);
    }

    #[test]
    fn validate_rejects_non_square() {
        assert!(matches!(
            validate_density(&ComplexMatrix::zeros(2, 3), 1e-10),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn two_level_basis_matches_pauli_form() {
        let basis = basis_density_matrices(2).unwrap();
        let id = ComplexMatrix::identity(2);
        let expected = [
            (&id + &pauli(3)).scale_real(0.5),
            (&id - &pauli(3)).scale_real(0.5),
            (&id + &pauli(1)).scale_real(0.5),
            (&id + &pauli(2)).scale_real(0.5),
        ];
        for (b, e) in basis.iter().zip(&expected) {
            assert!(b.matrix().max_abs_diff(e) < 1e-15, "{b:?} vs {e:?}");
        }
    }

    #[test]
    fn basis_members_are_valid_and_counted() {
        for n in 2..6 {
            let basis = basis_density_matrices(n).unwrap();
            assert_eq!(basis.len(), n * n);
            for b in &basis {
                assert!(validate_density(b.matrix(), DEFAULT_TOLERANCE)
                    .unwrap()
                    .is_valid());
            }
        }
        assert!(matches!(
            basis_density_matrices(1),
            Err(Error::BadDimension(1))
        ));
    }

    /// Independent route: solve the real 4×4 system Σ cᵤ ρᵤ = σ² by Gaussian
    /// elimination over the real and imaginary parts of the entries.
    #[test]
    fn sigma2_is_real_combination_of_basis() {
        let basis = basis_density_matrices(2).unwrap();
        let target = pauli(2);
        // 8 real equations (re/im of 4 entries), 4 unknowns; take a
        // full-rank square subset: re(00), re(11), re(01), im(01).
        let pick = |m: &ComplexMatrix| [m[(0, 0)].re, m[(1, 1)].re, m[(0, 1)].re, m[(0, 1)].im];
        let mut a = [[0.0; 5]; 4];
        for (col, b) in basis.iter().enumerate() {
            for (row, v) in pick(b.matrix()).iter().enumerate() {
                a[row][col] = *v;
            }
        }
        for (row, v) in pick(&target).iter().enumerate() {
            a[row][4] = *v;
        }
        let c = gauss_solve(a);
        assert_abs_diff_eq!(c[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(c[1], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(c[2], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(c[3], 2.0, epsilon = 1e-14);
        let mut recon = ComplexMatrix::zeros(2, 2);
        for (ci, b) in c.iter().zip(&basis) {
            recon += &b.matrix().scale_real(*ci);
        }
        assert!(recon.max_abs_diff(&target) < 1e-14);
        // and the closed-form expansion agrees
        let closed = basis_expansion(&target).unwrap();
        for (x, y) in closed.iter().zip(&c) {
            assert_abs_diff_eq!(x.re, *y, epsilon = 1e-14);
            assert_abs_diff_eq!(x.im, 0.0);
        }
    }

    fn gauss_solve(mut a: [[f64; 5]; 4]) -> [f64; 4] {
        for col in 0..4 {
            let piv = (col..4)
                .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
                .unwrap();
            a.swap(col, piv);
            for row in 0..4 {
                if row != col {
                    let f = a[row][col] / a[col][col];
                    for k in col..5 {
                        a[row][k] -= f * a[col][k];
                    }
                }
            }
        }
        [0, 1, 2, 3].map(|i| a[i][4] / a[i][i])
    }

    #[test]
    fn witness_of_trace_functional_is_identity() {
        let b = functional_nullity_witness(|rho| rho.trace(), 2).unwrap();
        assert!(b.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-15);
    }

    #[test]
    fn witness_of_zero_functional_is_zero() {
        let b = functional_nullity_witness(|_| ZERO, 3).unwrap();
        assert_eq!(b.max_abs(), 0.0);
    }

    #[test]
    fn witness_of_coherence_functional() {
        let b = functional_nullity_witness(|rho| rho[(0, 1)], 2).unwrap();
        assert!(b.max_abs_diff(&ComplexMatrix::unit(2, 1, 0)) < 1e-15);
    }

    #[test]
    fn from_pure_checks_norm() {
        let psi = [C64::new(1.0, 0.0), C64::new(1.0, 0.0)];
        assert!(matches!(
            DensityMatrix::from_pure(&psi),
            Err(Error::InvalidState(_))
        ));
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let rho = DensityMatrix::from_pure(&[C64::new(s, 0.0), C64::new(0.0, s)]).unwrap();
        assert_abs_diff_eq!(rho.matrix()[(0, 1)].im, -0.5, epsilon = 1e-15);
    }
}
