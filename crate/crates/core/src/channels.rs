//! Kraus representation `ρ' = Σ Mᵅ ρ Mᵅ†`.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};
use crate::states::{DensityMatrix, Tolerances, DEFAULT_TOLERANCE};
use crate::superop::{spectral_decompose, superop_from_action, SpectralChannel};
use crate::LinearMap;

/// Largest completeness defect accepted by [`KrausChannel::apply_kraus`].
pub const COMPLETENESS_TOLERANCE: f64 = 1e-9;
/// Spectral eigenvalues at or below this are dropped by [`spectral_to_kraus`].
pub const ZERO_EIGENVALUE_CUTOFF: f64 = 1e-12;

/// A set of Kraus operators `Mᵅ`. Completeness is not enforced on
/// construction; [`KrausChannel::apply_kraus`] checks it.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    dim: usize,
    ops: Vec<ComplexMatrix>,
}

impl KrausChannel {
    pub fn new(ops: Vec<ComplexMatrix>) -> Result<Self> {
        let first = ops.first().ok_or(Error::EmptyKraus)?;
        let dim = first.ensure_square()?;
        if let Some(bad) = ops.iter().find(|m| m.shape() != (dim, dim)) {
            return Err(Error::ShapeMismatch {
                left: (dim, dim),
                right: bad.shape(),
            });
        }
        Ok(Self { dim, ops })
    }

    /// The single-operator channel `ρ ↦ UρU†`.
    pub fn unitary(u: ComplexMatrix) -> Result<Self> {
        Self::new(vec![u])
    }

    /// A random complete Kraus set with `count` operators.
    ///
    /// Stacks the operators into an `(count·N)×N` matrix with orthonormal
    /// columns, obtained by Gram–Schmidt on a complex Gaussian matrix, so
    /// `Σ Mᵅ†Mᵅ = V†V = 1`.
    pub fn random<R: Rng + ?Sized>(n: usize, count: usize, rng: &mut R) -> Result<Self> {
        if n == 0 {
            return Err(Error::BadDimension(n));
        }
        if count == 0 {
            return Err(Error::EmptyKraus);
        }
        let rows = count * n;
        let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
        while cols.len() < n {
            let mut v: Vec<C64> = (0..rows)
                .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect();
            // two passes of classical Gram–Schmidt
            for _ in 0..2 {
                for u in &cols {
                    let overlap: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                    for (x, a) in v.iter_mut().zip(u) {
                        *x -= overlap * a;
                    }
                }
            }
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-8 {
                continue;
            }
            v.iter_mut().for_each(|z| *z /= norm);
            cols.push(v);
        }
        let ops = (0..count)
            .map(|a| ComplexMatrix::from_fn(n, n, |i, j| cols[j][a * n + i]))
            .collect();
        Ok(Self { dim: n, ops })
    }

    pub fn ops(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    pub fn into_ops(self) -> Vec<ComplexMatrix> {
        self.ops
    }

    /// `‖Σ Mᵅ†Mᵅ − 1‖_max`.
    pub fn completeness_defect(&self) -> f64 {
        let mut sum = ComplexMatrix::zeros(self.dim, self.dim);
        for m in &self.ops {
            sum += &(&m.adjoint() * m);
        }
        sum.max_abs_diff(&ComplexMatrix::identity(self.dim))
    }

    /// Apply the channel to a density matrix and validate the result.
    pub fn apply_kraus(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: rho.dim(),
            });
        }
        let defect = self.completeness_defect();
        if !(defect <= COMPLETENESS_TOLERANCE) {
            return Err(Error::IncompleteKraus { defect });
        }
        let out = self.apply(rho.matrix()).hermitian_part();
        // an incomplete set within tolerance shifts the trace by up to N·defect
        let tol = DEFAULT_TOLERANCE.max(self.dim as f64 * defect);
        DensityMatrix::with_tolerances(out, &Tolerances::uniform(tol))
    }

    /// Spectral form of the map, via its superoperator matrix.
    pub fn to_spectral(&self) -> Result<SpectralChannel> {
        kraus_to_spectral(self)
    }
}

impl LinearMap for KrausChannel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        for m in &self.ops {
            out += &(&(m * rho) * &m.adjoint());
        }
        out
    }
}

/// Kraus operators `√λᵅ Eᵅ` from a spectral form.
///
/// Fails with `NotCompletelyPositive` if some `λᵅ < −tol`. Operators with
/// `λᵅ ≤ max(tol, 1e-12)` are dropped.
pub fn spectral_to_kraus(sc: &SpectralChannel, tol: f64) -> Result<KrausChannel> {
    let min = sc
        .eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if min < -tol {
        return Err(Error::NotCompletelyPositive {
            min_eigenvalue: min,
        });
    }
    let cutoff = tol.max(ZERO_EIGENVALUE_CUTOFF);
    let ops: Vec<ComplexMatrix> = sc
        .eigenvalues()
        .iter()
        .zip(sc.eigenops())
        .filter(|(lam, _)| **lam > cutoff)
        .map(|(lam, e)| e.scale_real(lam.sqrt()))
        .collect();
    KrausChannel::new(ops)
}

/// Spectral form of a Kraus map. Always yields exactly N² eigenvalues.
pub fn kraus_to_spectral(k: &KrausChannel) -> Result<SpectralChannel> {
    spectral_decompose(&superop_from_action(k)?)
}

/// Projectors `|k⟩⟨k|` as a Kraus set: the complete dephasing channel.
pub fn dephasing(n: usize) -> Result<KrausChannel> {
    KrausChannel::new((0..n).map(|k| ComplexMatrix::unit(n, k, k)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{expm, pauli, I, ZERO};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample_rho() -> DensityMatrix {
        let m = ComplexMatrix::from_rows(&[
            [C64::new(0.6, 0.0), C64::new(0.2, -0.1)],
            [C64::new(0.2, 0.1), C64::new(0.4, 0.0)],
        ])
        .unwrap();
        DensityMatrix::new(m, 1e-12).unwrap()
    }

    #[test]
    fn identity_kraus_keeps_state() {
        let k = KrausChannel::new(vec![ComplexMatrix::identity(2)]).unwrap();
        let rho = sample_rho();
        assert_eq!(k.apply_kraus(&rho).unwrap(), rho);
    }

    #[test]
    fn projector_kraus_dephases() {
        let out = dephasing(2).unwrap().apply_kraus(&sample_rho()).unwrap();
        let m = out.matrix();
        assert_eq!(m[(0, 1)], ZERO);
        assert_eq!(m[(1, 0)], ZERO);
        assert_abs_diff_eq!(m[(0, 0)].re, 0.6);
        assert_abs_diff_eq!(m[(1, 1)].re, 0.4);
    }

    #[test]
    fn sigma1_kraus_swaps_entries() {
        let out = KrausChannel::unitary(pauli(1))
            .unwrap()
            .apply_kraus(&sample_rho())
            .unwrap();
        let m = out.matrix();
        assert_abs_diff_eq!(m[(0, 0)].re, 0.4);
        assert_abs_diff_eq!(m[(1, 1)].re, 0.6);
        assert_eq!(m[(0, 1)], C64::new(0.2, 0.1));
    }

    #[test]
    fn completeness_examples() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let ok = KrausChannel::new(vec![
            ComplexMatrix::identity(2).scale_real(r),
            pauli(1).scale_real(r),
        ])
        .unwrap();
        assert!(ok.completeness_defect() < 1e-15);
        let doubled = KrausChannel::new(vec![pauli(1), pauli(1)]).unwrap();
        assert_abs_diff_eq!(doubled.completeness_defect(), 1.0);
        assert!(matches!(
            doubled.apply_kraus(&sample_rho()),
            Err(Error::IncompleteKraus { .. })
        ));
    }

    #[test]
    fn construction_errors() {
        assert_eq!(KrausChannel::new(vec![]), Err(Error::EmptyKraus));
        assert!(matches!(
            KrausChannel::new(vec![ComplexMatrix::identity(2), ComplexMatrix::identity(3)]),
            Err(Error::ShapeMismatch { .. })
        ));
        let k = KrausChannel::new(vec![ComplexMatrix::identity(3)]).unwrap();
        assert!(matches!(
            k.apply_kraus(&sample_rho()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn identity_spectrum_to_single_op() {
        let sc = kraus_to_spectral(&KrausChannel::new(vec![ComplexMatrix::identity(3)]).unwrap())
            .unwrap();
        assert_eq!(sc.eigenvalues().len(), 9);
        let k = spectral_to_kraus(&sc, 1e-9).unwrap();
        assert_eq!(k.ops().len(), 1);
        // √3 · (phase/√3)·1 is a phase times the identity
        let m = &k.ops()[0];
        assert_abs_diff_eq!(m[(0, 0)].norm(), 1.0, epsilon = 1e-12);
        let phase = m[(0, 0)];
        assert!(m.max_abs_diff(&ComplexMatrix::identity(3).scale(phase)) < 1e-12);
    }

    #[test]
    fn non_cp_spectrum_rejected() {
        let sc = SpectralChannel::pauli([1.0, 1.0, -1.0, 1.0]);
        match spectral_to_kraus(&sc, 1e-9) {
            Err(Error::NotCompletelyPositive { min_eigenvalue }) => {
                assert_eq!(min_eigenvalue, -1.0)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn depolarizing_round_trip() {
        let sc = SpectralChannel::pauli([0.5; 4]);
        let k = spectral_to_kraus(&sc, 1e-9).unwrap();
        assert_eq!(k.ops().len(), 4);
        assert!(k.completeness_defect() < 1e-15);
        // fully depolarizing: every state goes to 1/2
        let out = k.apply_kraus(&sample_rho()).unwrap();
        assert!(
            out.matrix()
                .max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5))
                < 1e-15
        );
        let back = kraus_to_spectral(&k).unwrap();
        for &l in back.eigenvalues() {
            assert_abs_diff_eq!(l, 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn many_ops_still_n_squared_eigenvalues() {
        // state-transition style operators √pₘ|m⟩⟨n|, plus one of them split in two
        let p: [f64; 3] = [0.5, 0.3, 0.2];
        let mut ops = Vec::new();
        for (m, pm) in p.iter().enumerate() {
            for n in 0..3 {
                ops.push(ComplexMatrix::unit(3, m, n).scale_real(pm.sqrt()));
            }
        }
        let last = ops.pop().unwrap();
        ops.push(last.scale_real(0.5f64.sqrt()));
        ops.push(last.scale_real(0.5f64.sqrt()));
        let k = KrausChannel::new(ops).unwrap();
        assert_eq!(k.ops().len(), 10);
        assert!(k.completeness_defect() < 1e-15);
        let sc = kraus_to_spectral(&k).unwrap();
        assert_eq!(sc.eigenvalues().len(), 9);
        assert!(sc.eigenvalues().iter().all(|&l| l > -1e-12));
        assert_abs_diff_eq!(sc.eigenvalue_sum(), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn random_sets_are_complete() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for count in 1..=6 {
            let k = KrausChannel::random(2, count, &mut rng).unwrap();
            assert_eq!(k.ops().len(), count);
            assert!(k.completeness_defect() < 1e-13);
        }
    }

    #[test]
    fn unitary_channel_preserves_spectrum() {
        let g = ComplexMatrix::from_real(&[&[0.3, 0.7], &[0.7, -0.2]]);
        let u = expm(&g.scale(-I)).unwrap();
        let k = KrausChannel::unitary(u).unwrap();
        assert!(k.completeness_defect() < 1e-14);
        let out = k.apply_kraus(&sample_rho()).unwrap();
        let before = crate::linalg::hermitian_eig(sample_rho().matrix(), 1e-12).unwrap();
        let after = crate::linalg::hermitian_eig(out.matrix(), 1e-12).unwrap();
        for (a, b) in before.values.iter().zip(&after.values) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-13);
        }
    }
}
