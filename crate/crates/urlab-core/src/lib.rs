//! Finite-dimensional quantum states and observables, their statistical
//! moment matrices, and a catalog of uncertainty relations built on the
//! positivity of Gram matrices.
//!
//! The crate is generic over the real scalar type (`f32` or `f64`); all
//! shipped tools and tests use the `f64` aliases exported at the root.

pub mod error;
pub mod hilbert;
pub mod matkit;
pub mod moments;
pub mod relations;
pub mod search;
pub mod transforms;
pub mod verdict;

use nalgebra::{DMatrix, DVector, RealField};
use num_complex::Complex;
use num_traits::FromPrimitive;

pub use error::UrError;
pub use verdict::{Tols, UrVerdict};

/// Real scalar the whole crate is generic over.
pub trait Scalar: RealField + FromPrimitive + Copy {}
impl Scalar for f32 {}
impl Scalar for f64 {}

/// Complex matrix over the chosen scalar.
pub type CMat<T> = DMatrix<Complex<T>>;
/// Complex vector over the chosen scalar.
pub type CVec<T> = DVector<Complex<T>>;
/// Real matrix over the chosen scalar.
pub type RMat<T> = DMatrix<T>;
/// Real vector over the chosen scalar.
pub type RVec<T> = DVector<T>;

/// Shorthand for converting a literal tolerance or constant.
pub(crate) fn real<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("constant representable in scalar type")
}

pub type Operator64 = hilbert::Operator<f64>;
pub type QuantumState64 = hilbert::QuantumState<f64>;
pub type MomentBundle64 = moments::MomentBundle<f64>;
pub type UrVerdict64 = verdict::UrVerdict<f64>;
pub type LinearMap64 = transforms::LinearMap<f64>;
