//! Lindblad generators
//! `dρ/dt = −i[H, ρ] − ½ Σ (Lᵅ†Lᵅρ + ρLᵅ†Lᵅ − 2LᵅρLᵅ†)`,
//! their time evolution, canonical reduction and small-step Kraus form.

use crate::channels::KrausChannel;
use crate::error::{Error, Result};
use crate::linalg::{expm, frobenius_inner, hermitian_eig, ComplexMatrix, C64, I, ZERO};
use crate::states::{validate_density_with, DensityMatrix, Tolerances};
use crate::superop::{superop_from_action, SuperoperatorMatrix};
use crate::LinearMap;

/// Tolerance on the Hermiticity of H.
pub const HAMILTONIAN_TOLERANCE: f64 = 1e-10;
/// Upper bound on `dt·(‖H‖_F + Σ‖Lᵅ‖_F²)` for fixed-step methods.
pub const STABILITY_LIMIT: f64 = 0.1;
/// Default relative cutoff on Gram eigenvalues in [`LindbladGenerator::canonicalize`].
pub const GRAM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct LindbladGenerator {
    dim: usize,
    hamiltonian: ComplexMatrix,
    lindblad_ops: Vec<ComplexMatrix>,
    /// `Σ Lᵅ†Lᵅ`, cached.
    decay: ComplexMatrix,
}

impl LindbladGenerator {
    pub fn new(hamiltonian: ComplexMatrix, lindblad_ops: Vec<ComplexMatrix>) -> Result<Self> {
        let dim = hamiltonian.ensure_square()?;
        let defect = hamiltonian.hermiticity_defect();
        if !(defect <= HAMILTONIAN_TOLERANCE) {
            return Err(Error::NotHermitian { defect });
        }
        if let Some(bad) = lindblad_ops.iter().find(|l| l.shape() != (dim, dim)) {
            return Err(Error::ShapeMismatch {
                left: (dim, dim),
                right: bad.shape(),
            });
        }
        let mut decay = ComplexMatrix::zeros(dim, dim);
        for l in &lindblad_ops {
            decay += &(&l.adjoint() * l);
        }
        Ok(Self {
            dim,
            hamiltonian,
            lindblad_ops,
            decay,
        })
    }

    /// Purely dissipative generator (`H = 0`).
    pub fn dissipative(dim: usize, lindblad_ops: Vec<ComplexMatrix>) -> Result<Self> {
        Self::new(ComplexMatrix::zeros(dim, dim), lindblad_ops)
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    pub fn lindblad_ops(&self) -> &[ComplexMatrix] {
        &self.lindblad_ops
    }

    /// `dρ/dt` for the given ρ.
    pub fn apply_generator(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.shape() != (self.dim, self.dim) {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: rho.rows(),
            });
        }
        Ok(self.rhs(rho))
    }

    fn rhs(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        // −i(Hρ − ρH) − ½(Dρ + ρD) + Σ LρL†, with D = Σ L†L
        let h_rho = &self.hamiltonian * rho;
        let rho_h = rho * &self.hamiltonian;
        let d_rho = &self.decay * rho;
        let rho_d = rho * &self.decay;
        let mut out = ComplexMatrix::from_fn(self.dim, self.dim, |i, j| {
            -I * (h_rho[(i, j)] - rho_h[(i, j)]) - 0.5 * (d_rho[(i, j)] + rho_d[(i, j)])
        });
        for l in &self.lindblad_ops {
            out += &(&(l * rho) * &l.adjoint());
        }
        out
    }

    /// `‖H‖_F + Σ‖Lᵅ‖_F²`, the rate scale used by the step-size guard.
    pub fn stability_rate(&self) -> f64 {
        self.hamiltonian.frobenius_norm()
            + self
                .lindblad_ops
                .iter()
                .map(|l| l.frobenius_norm().powi(2))
                .sum::<f64>()
    }

    fn check_step(&self, dt: f64) -> Result<()> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "time step must be positive, got {dt}"
            )));
        }
        let product = dt * self.stability_rate();
        if product > STABILITY_LIMIT {
            return Err(Error::StepTooLarge {
                product,
                limit: STABILITY_LIMIT,
            });
        }
        Ok(())
    }

    /// Classical fixed-step RK4. Returns `steps + 1` states including `rho0`.
    ///
    /// Every emitted state is validated with [`Tolerances::TRAJECTORY`].
    pub fn evolve_rk4(
        &self,
        rho0: &DensityMatrix,
        dt: f64,
        steps: usize,
    ) -> Result<Vec<DensityMatrix>> {
        self.check_dim(rho0)?;
        self.check_step(dt)?;
        let mut out = Vec::with_capacity(steps + 1);
        out.push(rho0.clone());
        let mut rho = rho0.matrix().clone();
        for step in 1..=steps {
            rho = self.rk4_step(&rho, dt);
            let report = validate_density_with(&rho, &Tolerances::TRAJECTORY)?;
            if !report.is_valid() {
                return Err(Error::ValidationFailure {
                    step,
                    reason: report.reason(),
                });
            }
            out.push(DensityMatrix::new_unchecked(rho.clone()));
        }
        Ok(out)
    }

    /// One RK4 step on an arbitrary matrix, without validation.
    pub fn rk4_step(&self, rho: &ComplexMatrix, dt: f64) -> ComplexMatrix {
        let k1 = self.rhs(rho);
        let k2 = self.rhs(&(rho + &k1.scale_real(dt / 2.0)));
        let k3 = self.rhs(&(rho + &k2.scale_real(dt / 2.0)));
        let k4 = self.rhs(&(rho + &k3.scale_real(dt)));
        let mut incr = &k1 + &k4;
        incr += &(&k2 + &k3).scale_real(2.0);
        rho + &incr.scale_real(dt / 6.0)
    }

    /// Superoperator matrix of the generator itself.
    pub fn superoperator(&self) -> Result<SuperoperatorMatrix> {
        superop_from_action(self)
    }

    /// Propagator `exp(t𝓛)` as a reusable map.
    pub fn propagator(&self, t: f64) -> Result<Propagator> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "time must be non-negative, got {t}"
            )));
        }
        let l = self.superoperator()?.to_liouville();
        let p = expm(&l.scale_real(t))?;
        Ok(Propagator {
            dim: self.dim,
            liouville: p,
        })
    }

    /// `ρ(t) = exp(t𝓛) ρ0` through the matrix exponential.
    pub fn evolve_exact(&self, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
        self.check_dim(rho0)?;
        self.propagator(t)?.evolve(rho0)
    }

    /// Kraus operators of one step: `M⁰ = 1 − dt(iH + ½ΣLᵅ†Lᵅ)`, `Mᵅ = √dt·Lᵅ`.
    ///
    /// The set is complete only to first order; its defect is `O(dt²)`.
    pub fn dt_kraus(&self, dt: f64) -> Result<KrausChannel> {
        self.check_step(dt)?;
        let n = self.dim;
        let m0 = ComplexMatrix::from_fn(n, n, |i, j| {
            let id = if i == j { 1.0 } else { 0.0 };
            id - dt * (I * self.hamiltonian[(i, j)] + 0.5 * self.decay[(i, j)])
        });
        let mut ops = Vec::with_capacity(self.lindblad_ops.len() + 1);
        ops.push(m0);
        ops.extend(self.lindblad_ops.iter().map(|l| l.scale_real(dt.sqrt())));
        KrausChannel::new(ops)
    }

    /// Reduce to at most N²−1 traceless, orthonormal operators with rates.
    ///
    /// Each `Lᵅ` is split as `L′ᵅ + kᵅ·1` with `kᵅ = Tr Lᵅ / N`; the constant
    /// part moves into H as `(i/2)(kᵅ*·L′ᵅ − kᵅ·L′ᵅ†)`. The Gram matrix
    /// `Tr L′ᵅL′ᵝ†` is then diagonalized and directions with eigenvalue at or
    /// below `tol` times the largest one are dropped.
    pub fn canonicalize(&self, tol: f64) -> Result<CanonicalGenerator> {
        let n = self.dim;
        let mut hamiltonian = self.hamiltonian.clone();
        let shifted: Vec<ComplexMatrix> = self
            .lindblad_ops
            .iter()
            .map(|l| {
                let k = l.trace() / n as f64;
                let mut lp = l.clone();
                for i in 0..n {
                    lp[(i, i)] -= k;
                }
                let shift = &lp.scale(k.conj()) - &lp.adjoint().scale(k);
                hamiltonian += &shift.scale(I * 0.5);
                lp
            })
            .collect();
        // remove rounding asymmetry so the result passes the Hermiticity check
        let hamiltonian = hamiltonian.hermitian_part();

        let m = shifted.len();
        let mut rates = Vec::new();
        let mut ops = Vec::new();
        if m > 0 {
            let gram = ComplexMatrix::from_fn(m, m, |a, b| {
                frobenius_inner(&shifted[a], &shifted[b]).expect("same shape")
            });
            let eig = hermitian_eig(&gram, f64::INFINITY)?;
            let largest = eig.values.last().copied().unwrap_or(0.0);
            let cutoff = tol * largest;
            for beta in (0..m).rev() {
                let c = eig.values[beta];
                if !(largest > 0.0) || c <= cutoff {
                    continue;
                }
                // L̃ᵝ = Σₐ conj(W_{αβ}) L′ᵅ
                let mut lt = ComplexMatrix::zeros(n, n);
                for (alpha, lp) in shifted.iter().enumerate() {
                    lt += &lp.scale(eig.vectors[(alpha, beta)].conj());
                }
                rates.push(c);
                ops.push(lt.scale_real(1.0 / c.sqrt()));
            }
        }
        Ok(CanonicalGenerator {
            dim: n,
            hamiltonian,
            rates,
            ops,
        })
    }

    fn check_dim(&self, rho: &DensityMatrix) -> Result<()> {
        if rho.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: rho.dim(),
            });
        }
        Ok(())
    }
}

impl LinearMap for LindbladGenerator {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        self.rhs(rho)
    }
}

/// `exp(t𝓛)` in row-vectorized Liouville form.
#[derive(Debug, Clone)]
pub struct Propagator {
    dim: usize,
    liouville: ComplexMatrix,
}

impl Propagator {
    pub fn liouville(&self) -> &ComplexMatrix {
        &self.liouville
    }

    /// Propagate a density matrix; the result is Hermitized and validated
    /// with [`Tolerances::TRAJECTORY`].
    pub fn evolve(&self, rho0: &DensityMatrix) -> Result<DensityMatrix> {
        let out = self.apply(rho0.matrix()).hermitian_part();
        let report = validate_density_with(&out, &Tolerances::TRAJECTORY)?;
        if !report.is_valid() {
            return Err(Error::ValidationFailure {
                step: 1,
                reason: report.reason(),
            });
        }
        Ok(DensityMatrix::new_unchecked(out))
    }
}

impl LinearMap for Propagator {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let v = self.liouville.mul_vec(rho.as_slice());
        ComplexMatrix::from_vec(self.dim, self.dim, v).expect("N² entries")
    }
}

/// Generator in canonical form: `H` plus rates `cᵅ` and orthonormal traceless `K̃ᵅ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalGenerator {
    dim: usize,
    hamiltonian: ComplexMatrix,
    rates: Vec<f64>,
    ops: Vec<ComplexMatrix>,
}

impl CanonicalGenerator {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    /// Rates in descending order.
    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn ops(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    /// Lindblad operators `√cᵅ·K̃ᵅ`.
    pub fn lindblad_ops(&self) -> Vec<ComplexMatrix> {
        self.rates
            .iter()
            .zip(&self.ops)
            .map(|(c, k)| k.scale_real(c.max(0.0).sqrt()))
            .collect()
    }

    pub fn to_generator(&self) -> Result<LindbladGenerator> {
        LindbladGenerator::new(self.hamiltonian.clone(), self.lindblad_ops())
    }

    /// `max |Tr K̃ᵅ|` and `max |Tr K̃ᵅK̃ᵝ† − δᵅᵝ|`.
    pub fn defects(&self) -> (f64, f64) {
        let trace = self
            .ops
            .iter()
            .map(|k| k.trace().norm())
            .fold(0.0, f64::max);
        let mut ortho: f64 = 0.0;
        for (a, ka) in self.ops.iter().enumerate() {
            for (b, kb) in self.ops.iter().enumerate() {
                let g = frobenius_inner(ka, kb).expect("same shape");
                let target = if a == b { C64::new(1.0, 0.0) } else { ZERO };
                ortho = ortho.max((g - target).norm());
            }
        }
        (trace, ortho)
    }
}

/// `max |A₁ − A₂|` between the superoperator matrices of two generators.
pub fn superoperator_residual(a: &LindbladGenerator, b: &LindbladGenerator) -> Result<f64> {
    Ok(a.superoperator()?
        .matrix()
        .max_abs_diff(b.superoperator()?.matrix()))
}
