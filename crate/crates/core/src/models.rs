//! Five exactly solvable dissipative models, their closed-form solutions and
//! a quantum-jump Monte Carlo sampler whose ensemble mean follows the same
//! master equation.
//!
//! Operator normalizations are chosen so that each generator reproduces the
//! model's closed-form decay rates:
//!
//! | model               | Lindblad operators          | coherence `ρᵢⱼ` decays as            |
//! |---------------------|-----------------------------|--------------------------------------|
//! | `random_phases`     | `√λᵢ·|i⟩⟨i|`                | `exp(−½(λᵢ+λⱼ)t)`                    |
//! | `unitary_jump`      | `√λ·exp(−iG)`               | `exp(−λ[1 − e^{i(gⱼ−gᵢ)}]t)`         |
//! | `random_unitary`    | `√λ·G`                      | `exp(−½λ(gᵢ−gⱼ)²t)`                  |
//! | `state_exchange`    | `√λ·σ¹`                     | `Im ρ₀₁ ∝ exp(−2λt)`, `Re ρ₀₁` fixed |
//! | `state_transitions` | `√(λpₘ)·|m⟩⟨n|`, all m, n   | `exp(−λt)`                           |

use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{expm, hermitian_eig, ComplexMatrix, C64, I, ONE, ZERO};
use crate::lindblad::LindbladGenerator;
use crate::states::{validate_density, DensityMatrix};

/// Largest `dt·λ_total` accepted by the sampler.
pub const SAMPLER_STEP_LIMIT: f64 = 1e-2;
const PROBABILITY_TOLERANCE: f64 = 1e-12;
const G_TOLERANCE: f64 = 1e-10;
/// Trajectories per parallel work unit. Fixed so the reduction order, and
/// hence the output bits, do not depend on the number of threads.
const CHUNK: usize = 1024;

#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    /// Independent phase random walks on each level, variance `λᵢt`.
    RandomPhases { rates: Vec<f64> },
    /// With probability `λdt` the state jumps to `exp(−iG)|ψ⟩`.
    UnitaryJump { rate: f64, g: ComplexMatrix },
    /// `exp(−iθG)|ψ⟩` with Gaussian θ of variance `λdt` per step.
    RandomUnitary { rate: f64, g: ComplexMatrix },
    /// Two levels whose basis states are exchanged at rate λ.
    StateExchange { rate: f64 },
    /// Jumps `|n⟩ → |m⟩` at rate `λpₘ|⟨n|ψ⟩|²`.
    StateTransitions { rate: f64, populations: Vec<f64> },
}

impl ModelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::RandomPhases { .. } => "random_phases",
            ModelSpec::UnitaryJump { .. } => "unitary_jump",
            ModelSpec::RandomUnitary { .. } => "random_unitary",
            ModelSpec::StateExchange { .. } => "state_exchange",
            ModelSpec::StateTransitions { .. } => "state_transitions",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ModelSpec::RandomPhases { rates } => rates.len(),
            ModelSpec::UnitaryJump { g, .. } | ModelSpec::RandomUnitary { g, .. } => g.rows(),
            ModelSpec::StateExchange { .. } => 2,
            ModelSpec::StateTransitions { populations, .. } => populations.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        let check_rate = |name: &str, r: f64| -> Result<()> {
            if r.is_finite() && r >= 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidSpec(format!(
                    "{name} must be finite and >= 0, got {r}"
                )))
            }
        };
        match self {
            ModelSpec::RandomPhases { rates } => {
                if rates.len() < 2 {
                    return bad(format!(
                        "random_phases needs at least 2 rates, got {}",
                        rates.len()
                    ));
                }
                for (i, &r) in rates.iter().enumerate() {
                    check_rate(&format!("rate{}", i + 1), r)?;
                }
            }
            ModelSpec::UnitaryJump { rate, g } | ModelSpec::RandomUnitary { rate, g } => {
                check_rate("rate", *rate)?;
                if !g.is_square() || g.rows() < 2 {
                    return bad(format!(
                        "G must be square with dim >= 2, got {:?}",
                        g.shape()
                    ));
                }
                if !g.is_finite() || g.hermiticity_defect() > G_TOLERANCE {
                    return bad("G must be Hermitian".into());
                }
            }
            ModelSpec::StateExchange { rate } => check_rate("rate", *rate)?,
            ModelSpec::StateTransitions { rate, populations } => {
                check_rate("rate", *rate)?;
                if populations.len() < 2 {
                    return bad("state_transitions needs at least 2 populations".into());
                }
                if populations.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
                    return bad("populations must be non-negative".into());
                }
                let sum: f64 = populations.iter().sum();
                if (sum - 1.0).abs() > PROBABILITY_TOLERANCE {
                    return bad(format!("populations must sum to 1, got {sum}"));
                }
            }
        }
        Ok(())
    }

    /// Rate scale `λ_total` bounded by the sampler step guard.
    pub fn total_rate(&self) -> f64 {
        match self {
            ModelSpec::RandomPhases { rates } => rates.iter().sum(),
            ModelSpec::UnitaryJump { rate, .. }
            | ModelSpec::StateExchange { rate }
            | ModelSpec::StateTransitions { rate, .. } => *rate,
            // the phase increment θ·(gᵢ − gⱼ) has variance λdt·(gᵢ − gⱼ)²
            ModelSpec::RandomUnitary { rate, g } => rate * g.frobenius_norm().powi(2),
        }
    }

    /// Lindblad generator with `H = 0`.
    pub fn build_generator(&self) -> Result<LindbladGenerator> {
        self.validate()?;
        let n = self.dim();
        let ops = match self {
            ModelSpec::RandomPhases { rates } => rates
                .iter()
                .enumerate()
                .map(|(i, r)| ComplexMatrix::unit(n, i, i).scale_real(r.sqrt()))
                .collect(),
            ModelSpec::UnitaryJump { rate, g } => {
                vec![expm(&g.scale(-I))?.scale_real(rate.sqrt())]
            }
            ModelSpec::RandomUnitary { rate, g } => vec![g.scale_real(rate.sqrt())],
            ModelSpec::StateExchange { rate } => {
                vec![crate::linalg::pauli(1).scale_real(rate.sqrt())]
            }
            ModelSpec::StateTransitions { rate, populations } => {
                let mut ops = Vec::with_capacity(n * n);
                for (m, p) in populations.iter().enumerate() {
                    for k in 0..n {
                        ops.push(ComplexMatrix::unit(n, m, k).scale_real((rate * p).sqrt()));
                    }
                }
                ops
            }
        };
        LindbladGenerator::dissipative(n, ops)
    }

    /// Closed-form `ρ(t)`. The G-based models need G diagonal.
    pub fn analytic_solution(&self, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
        self.validate()?;
        let n = self.dim();
        if rho0.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: rho0.dim(),
            });
        }
        if !(t >= 0.0) {
            return Err(Error::InvalidSpec(format!(
                "time must be non-negative, got {t}"
            )));
        }
        let r0 = rho0.matrix();
        let out = match self {
            ModelSpec::RandomPhases { rates } => ComplexMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    r0[(i, j)]
                } else {
                    r0[(i, j)] * (-0.5 * (rates[i] + rates[j]) * t).exp()
                }
            }),
            ModelSpec::UnitaryJump { rate, g } => {
                let gd = diagonal_of(g)?;
                ComplexMatrix::from_fn(n, n, |i, j| {
                    let phase = (I * (gd[j] - gd[i])).exp();
                    r0[(i, j)] * (-(rate * t) * (ONE - phase)).exp()
                })
            }
            ModelSpec::RandomUnitary { rate, g } => {
                let gd = diagonal_of(g)?;
                ComplexMatrix::from_fn(n, n, |i, j| {
                    r0[(i, j)] * (-0.5 * rate * (gd[i] - gd[j]).powi(2) * t).exp()
                })
            }
            ModelSpec::StateExchange { rate } => {
                let decay = (-2.0 * rate * t).exp();
                let p0 = 0.5 + (r0[(0, 0)].re - 0.5) * decay;
                let c = C64::new(r0[(0, 1)].re, r0[(0, 1)].im * decay);
                ComplexMatrix::from_rows(&[
                    [C64::new(p0, 0.0), c],
                    [c.conj(), C64::new(1.0 - p0, 0.0)],
                ])?
            }
            ModelSpec::StateTransitions { rate, populations } => {
                let decay = (-rate * t).exp();
                ComplexMatrix::from_fn(n, n, |i, j| {
                    if i == j {
                        r0[(i, i)] * decay + populations[i] * (1.0 - decay)
                    } else {
                        r0[(i, j)] * decay
                    }
                })
            }
        };
        DensityMatrix::new(out.hermitian_part(), 1e-9)
    }

    /// Specs with unit rates for each model kind.
    pub fn bundled() -> Vec<ModelSpec> {
        vec![
            ModelSpec::RandomPhases {
                rates: vec![1.0, 1.0],
            },
            ModelSpec::UnitaryJump {
                rate: 1.0,
                g: ComplexMatrix::real_diag(&[0.0, PI / 2.0]),
            },
            ModelSpec::RandomUnitary {
                rate: 1.0,
                g: ComplexMatrix::real_diag(&[0.0, 1.0]),
            },
            ModelSpec::StateExchange { rate: 1.0 },
            ModelSpec::StateTransitions {
                rate: 1.0,
                populations: vec![0.5, 0.3, 0.2],
            },
        ]
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn diagonal_of(g: &ComplexMatrix) -> Result<Vec<f64>> {
    let n = g.rows();
    let mut defect: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                defect = defect.max(g[(i, j)].norm());
            }
        }
    }
    if defect > G_TOLERANCE {
        return Err(Error::NonDiagonalG { defect });
    }
    Ok((0..n).map(|i| g[(i, i)].re).collect())
}

/// Ensemble statistics of [`sample_ensemble`].
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryEnsemble {
    pub model: ModelSpec,
    pub trajectories: usize,
    pub seed: u64,
    pub dt: f64,
    pub times: Vec<f64>,
    /// `(1/M) Σ |ψ⟩⟨ψ|` at each time.
    pub mean_density: Vec<DensityMatrix>,
    /// Standard error of each entry, row-major N×N, at each time.
    pub standard_error: Vec<Vec<f64>>,
}

/// Per-trajectory stepping rule, with whatever the model precomputes.
enum Stepper {
    Phases {
        sd: Vec<f64>,
    },
    Jump {
        prob: f64,
        u: ComplexMatrix,
    },
    /// G = V diag(g) V†; the state is kept in the eigenbasis of G.
    Rotation {
        sd: f64,
        g: Vec<f64>,
        v: ComplexMatrix,
    },
    Exchange {
        prob: f64,
    },
    Transitions {
        prob: f64,
        cumulative: Vec<f64>,
    },
}

impl Stepper {
    fn new(spec: &ModelSpec, dt: f64) -> Result<Self> {
        Ok(match spec {
            ModelSpec::RandomPhases { rates } => Stepper::Phases {
                sd: rates.iter().map(|r| (r * dt).sqrt()).collect(),
            },
            ModelSpec::UnitaryJump { rate, g } => Stepper::Jump {
                prob: rate * dt,
                u: expm(&g.scale(-I))?,
            },
            ModelSpec::RandomUnitary { rate, g } => {
                let eig = hermitian_eig(g, G_TOLERANCE)?;
                Stepper::Rotation {
                    sd: (rate * dt).sqrt(),
                    g: eig.values,
                    v: eig.vectors,
                }
            }
            ModelSpec::StateExchange { rate } => Stepper::Exchange { prob: rate * dt },
            ModelSpec::StateTransitions { rate, populations } => {
                let mut acc = 0.0;
                let cumulative = populations
                    .iter()
                    .map(|p| {
                        acc += p;
                        acc
                    })
                    .collect();
                Stepper::Transitions {
                    prob: rate * dt,
                    cumulative,
                }
            }
        })
    }

    /// Map the initial state into the stepper's working representation.
    fn prepare(&self, psi: &[C64]) -> Vec<C64> {
        match self {
            Stepper::Rotation { v, .. } => v.adjoint().mul_vec(psi),
            _ => psi.to_vec(),
        }
    }

    /// The physical state from the working representation.
    fn observe(&self, work: &[C64]) -> Vec<C64> {
        match self {
            Stepper::Rotation { v, .. } => v.mul_vec(work),
            _ => work.to_vec(),
        }
    }

    fn step<R: Rng>(&self, psi: &mut Vec<C64>, rng: &mut R) {
        match self {
            Stepper::Phases { sd } => {
                for (z, s) in psi.iter_mut().zip(sd) {
                    let theta: f64 = rng.sample::<f64, _>(StandardNormal) * s;
                    *z *= C64::from_polar(1.0, -theta);
                }
            }
            Stepper::Jump { prob, u } => {
                if rng.random::<f64>() < *prob {
                    *psi = u.mul_vec(psi);
                }
            }
            Stepper::Rotation { sd, g, .. } => {
                let theta: f64 = rng.sample::<f64, _>(StandardNormal) * sd;
                for (z, gi) in psi.iter_mut().zip(g) {
                    *z *= C64::from_polar(1.0, -theta * gi);
                }
            }
            Stepper::Exchange { prob } => {
                if rng.random::<f64>() < *prob {
                    psi.swap(0, 1);
                }
            }
            Stepper::Transitions { prob, cumulative } => {
                if rng.random::<f64>() < *prob {
                    // weight pₘ|⟨n|ψ⟩|² factorizes: draw m from p and n from |ψₙ|²
                    let m = pick(cumulative, rng.random::<f64>());
                    let mut acc = 0.0;
                    let u = rng.random::<f64>();
                    let mut n = psi.len() - 1;
                    for (k, z) in psi.iter().enumerate() {
                        acc += z.norm_sqr();
                        if u < acc {
                            n = k;
                            break;
                        }
                    }
                    let amp = psi[n];
                    let phase = if amp.norm() > 0.0 {
                        amp / amp.norm()
                    } else {
                        ONE
                    };
                    psi.iter_mut().for_each(|z| *z = ZERO);
                    psi[m] = phase;
                }
            }
        }
    }
}

fn pick(cumulative: &[f64], u: f64) -> usize {
    let total = *cumulative.last().expect("non-empty");
    cumulative
        .iter()
        .position(|&c| u * total < c)
        .unwrap_or(cumulative.len() - 1)
}

/// Running sums of `ρ − ρ_ref` entries and their squared parts, where
/// `ρ_ref` is trajectory 0. The shift keeps the variance of nearly constant
/// entries free of cancellation.
#[derive(Clone)]
struct Moments {
    sum: Vec<C64>,
    sq_re: Vec<f64>,
    sq_im: Vec<f64>,
}

impl Moments {
    fn zeros(len: usize) -> Self {
        Self {
            sum: vec![ZERO; len],
            sq_re: vec![0.0; len],
            sq_im: vec![0.0; len],
        }
    }

    fn add_state(&mut self, psi: &[C64], reference: &[C64]) {
        let n = psi.len();
        for i in 0..n {
            for j in 0..n {
                let k = i * n + j;
                let z = psi[i] * psi[j].conj() - reference[k];
                self.sum[k] += z;
                self.sq_re[k] += z.re * z.re;
                self.sq_im[k] += z.im * z.im;
            }
        }
    }

    fn merge(&mut self, other: &Moments) {
        for k in 0..self.sum.len() {
            self.sum[k] += other.sum[k];
            self.sq_re[k] += other.sq_re[k];
            self.sq_im[k] += other.sq_im[k];
        }
    }
}

/// Random stream of trajectory `index`: the ChaCha stream `index` under key `seed`.
pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Average `m` quantum-jump trajectories started from `psi0`.
///
/// Each recorded time is rounded to the nearest multiple of `dt`. Trajectory
/// `i` draws from [`trajectory_rng`]`(seed, i)`, so results do not depend on
/// `m` or on the thread count.
/// Callback receiving `(output index, state)` for one trajectory.
type Recorder<'a> = Box<dyn FnMut(usize, &[C64]) + 'a>;

pub fn sample_ensemble(
    spec: &ModelSpec,
    psi0: &[C64],
    times: &[f64],
    dt: f64,
    m: usize,
    seed: u64,
) -> Result<TrajectoryEnsemble> {
    spec.validate()?;
    let n = spec.dim();
    if psi0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: psi0.len(),
        });
    }
    // rejects non-unit norms
    DensityMatrix::from_pure(psi0)?;
    if m == 0 {
        return Err(Error::InvalidSpec("trajectory count must be >= 1".into()));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidSpec(format!(
            "time step must be positive, got {dt}"
        )));
    }
    let product = dt * spec.total_rate();
    if product > SAMPLER_STEP_LIMIT {
        return Err(Error::StepTooLarge {
            product,
            limit: SAMPLER_STEP_LIMIT,
        });
    }
    if times.iter().any(|&t| !(t >= 0.0) || !t.is_finite()) {
        return Err(Error::InvalidSpec("times must be finite and >= 0".into()));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidSpec("times must be non-decreasing".into()));
    }
    let marks: Vec<usize> = times.iter().map(|t| (t / dt).round() as usize).collect();
    let stepper = Stepper::new(spec, dt)?;

    let run = |traj: usize, mut record: Recorder<'_>| {
        let mut rng = trajectory_rng(seed, traj as u64);
        let mut work = stepper.prepare(psi0);
        let mut step = 0;
        for (slot, &mark) in marks.iter().enumerate() {
            while step < mark {
                stepper.step(&mut work, &mut rng);
                step += 1;
            }
            record(slot, &stepper.observe(&work));
        }
    };
    let mut reference: Vec<Vec<C64>> = vec![Vec::new(); marks.len()];
    run(
        0,
        Box::new(|slot, psi| {
            reference[slot] = ComplexMatrix::outer(psi, psi).into_vec();
        }),
    );
    let reference = &reference;
    let run_chunk = |chunk: usize| -> Vec<Moments> {
        let mut acc = vec![Moments::zeros(n * n); marks.len()];
        let start = chunk * CHUNK;
        for traj in start..(start + CHUNK).min(m) {
            run(
                traj,
                Box::new(|slot, psi| acc[slot].add_state(psi, &reference[slot])),
            );
        }
        acc
    };
    let partials: Vec<Vec<Moments>> = (0..m.div_ceil(CHUNK))
        .into_par_iter()
        .map(run_chunk)
        .collect();
    let mut total = vec![Moments::zeros(n * n); marks.len()];
    for part in &partials {
        for (t, p) in total.iter_mut().zip(part) {
            t.merge(p);
        }
    }

    let mf = m as f64;
    let tol = 1e-10f64.max(5.0 / mf.sqrt());
    let mut mean_density = Vec::with_capacity(times.len());
    let mut standard_error = Vec::with_capacity(times.len());
    for (slot, mom) in total.iter().enumerate() {
        let shift: Vec<C64> = mom.sum.iter().map(|z| z / mf).collect();
        let mean: Vec<C64> = reference[slot]
            .iter()
            .zip(&shift)
            .map(|(r, d)| r + d)
            .collect();
        let se = (0..n * n)
            .map(|k| {
                if m < 2 {
                    return 0.0;
                }
                let d = shift[k];
                let var_re = (mom.sq_re[k] - mf * d.re * d.re).max(0.0) / (mf - 1.0);
                let var_im = (mom.sq_im[k] - mf * d.im * d.im).max(0.0) / (mf - 1.0);
                ((var_re + var_im) / mf).sqrt()
            })
            .collect();
        let rho = ComplexMatrix::from_vec(n, n, mean)?.hermitian_part();
        let report = validate_density(&rho, tol)?;
        if !report.is_valid() {
            return Err(Error::ValidationFailure {
                step: marks[slot],
                reason: report.reason(),
            });
        }
        mean_density.push(DensityMatrix::new_unchecked(rho));
        standard_error.push(se);
    }
    Ok(TrajectoryEnsemble {
        model: spec.clone(),
        trajectories: m,
        seed,
        dt,
        times: times.to_vec(),
        mean_density,
        standard_error,
    })
}
