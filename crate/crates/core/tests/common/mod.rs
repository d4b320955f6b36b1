#![allow(dead_code)]

use lindbladkit::linalg::{ComplexMatrix, C64};
use lindbladkit::{DensityMatrix, SuperoperatorMatrix};
use rand::Rng;
use rand_distr::StandardNormal;

pub fn gaussian<R: Rng>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_matrix<R: Rng>(n: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |_, _| gaussian(rng))
}

pub fn random_hermitian<R: Rng>(n: usize, rng: &mut R) -> ComplexMatrix {
    random_matrix(n, rng).hermitian_part()
}

/// Full-rank random state `GG† / Tr GG†`.
pub fn random_state<R: Rng>(n: usize, rng: &mut R) -> DensityMatrix {
    let g = random_matrix(n, rng);
    let m = &g * &g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::new(m.scale_real(1.0 / tr).hermitian_part(), 1e-12).unwrap()
}

pub fn random_unit_vector<R: Rng>(n: usize, rng: &mut R) -> Vec<C64> {
    let v: Vec<C64> = (0..n).map(|_| gaussian(rng)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

/// Random Hermiticity- and trace-preserving map.
///
/// Starts from a random Hermitian `A` and subtracts `δᵢⱼ(Tᵣₛ − δᵣₛ)/N` where
/// `Tᵣₛ = Σᵢ A_{ir,is}`, which enforces `Σᵢ A_{ir,is} = δᵣₛ` and keeps `A`
/// Hermitian.
pub fn random_tp_map<R: Rng>(n: usize, rng: &mut R) -> SuperoperatorMatrix {
    let mut a = random_hermitian(n * n, rng);
    let t = ComplexMatrix::from_fn(n, n, |r, s| (0..n).map(|i| a[(i * n + r, i * n + s)]).sum());
    for i in 0..n {
        for r in 0..n {
            for s in 0..n {
                let delta = if r == s { 1.0 } else { 0.0 };
                a[(i * n + r, i * n + s)] -= (t[(r, s)] - delta) / n as f64;
            }
        }
    }
    SuperoperatorMatrix::from_matrix(n, a).unwrap()
}

/// Random probability vector.
pub fn random_populations<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 0.05).collect();
    let s: f64 = w.iter().sum();
    let mut p: Vec<f64> = w.iter().map(|x| x / s).collect();
    // make the sum exactly 1 in floating point
    let head: f64 = p[..n - 1].iter().sum();
    p[n - 1] = 1.0 - head;
    p
}

pub fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

pub fn max_sorted_diff(a: Vec<f64>, b: Vec<f64>) -> f64 {
    sorted(a)
        .iter()
        .zip(sorted(b).iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
