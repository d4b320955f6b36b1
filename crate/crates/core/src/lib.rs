//! Finite-dimensional open quantum system dynamics.
//!
//! The crate is organised bottom-up:
//!
//! - [`linalg`]: a small dense complex matrix type with a Jacobi Hermitian
//!   eigensolver and a scaling-and-squaring matrix exponential.
//! - [`states`]: validated density matrices and the N² "density matrix basis"
//!   used to turn statements about all states into operator identities.
//! - [`superop`]: linear maps on N×N matrices as N²×N² Hermitian matrices, their
//!   spectral form `ρ' = Σ λᵅ Eᵅ ρ Eᵅ†`, the Choi matrix and positivity tests.
//! - [`channels`]: Kraus representation and conversions to and from the
//!   spectral form.
//! - [`lindblad`]: Lindblad generators, time evolution, canonical reduction of
//!   the operator set and the small-step Kraus factorization.
//! - [`models`]: five exactly solvable channels with closed-form solutions and
//!   a quantum-jump Monte Carlo sampler.
//!
//! Index flattening is the same everywhere: the pair `(i, r)` of an N-level
//! system maps to `i * N + r`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channels;
pub mod error;
pub mod linalg;
pub mod lindblad;
pub mod models;
pub mod states;
pub mod superop;

pub use channels::KrausChannel;
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, C64};
pub use lindblad::{CanonicalGenerator, LindbladGenerator};
pub use states::{DensityMatrix, ValidationReport};
pub use superop::{ChoiMatrix, SpectralChannel, SuperoperatorMatrix};

/// A linear map acting on N×N complex matrices.
///
/// Implemented by every channel representation in the crate so that the
/// superoperator, Choi and positivity machinery can be applied uniformly.
pub trait LinearMap {
    /// Hilbert-space dimension N.
    fn dim(&self) -> usize;

    /// Apply the map to an N×N matrix. Callers guarantee the shape.
    fn apply(&self, m: &ComplexMatrix) -> ComplexMatrix;
}

/// Adapter turning a closure into a [`LinearMap`].
pub struct FnMap<F> {
    dim: usize,
    f: F,
}

impl<F> FnMap<F>
where
    F: Fn(&ComplexMatrix) -> ComplexMatrix,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> LinearMap for FnMap<F>
where
    F: Fn(&ComplexMatrix) -> ComplexMatrix,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, m: &ComplexMatrix) -> ComplexMatrix {
        (self.f)(m)
    }
}

impl<T: LinearMap + ?Sized> LinearMap for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn apply(&self, m: &ComplexMatrix) -> ComplexMatrix {
        (**self).apply(m)
    }
}
