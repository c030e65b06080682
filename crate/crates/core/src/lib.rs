//! Multi-reference alignment by synchronization followed by expectation-maximization.
//!
//! The crate covers both alignment models:
//!
//! * 2-D: images expanded in a steerable Fourier-Bessel basis, where an in-plane
//!   rotation by `phi` multiplies coefficient `(k, q)` by `exp(-i k phi)`;
//! * 1-D: real signals acted on by cyclic shifts.
//!
//! Pipeline building blocks live in their own modules: [`steerable_basis`]
//! (basis, expansion, steerable PCA), [`mra_model`] (synthetic data and error
//! metrics), [`synchronization`] (pairwise alignment, projected power method,
//! template matching, Synchronize-and-Match), [`em`] (standard and accelerated
//! MAP-EM), [`dist_learning`] (Monte-Carlo rotation-error priors) and
//! [`analysis`] (correlation diagnostics and the shift-PMF approximation).
//!
//! Numerical code is generic over [`Real`]; the aliases at the crate root fix
//! the common `f64` instantiation.

pub mod analysis;
pub mod dist_learning;
pub mod em;
mod error;
pub mod mra_model;
pub mod rng;
pub mod rotation;
mod scalar;
pub mod steerable_basis;
pub mod synchronization;

pub use error::{Error, Result};
pub use scalar::Real;

pub use num_complex::Complex;

pub type Coeffs = steerable_basis::SteerableCoeffs<f64>;
pub type Coeffs32 = steerable_basis::SteerableCoeffs<f32>;
pub type Image = steerable_basis::Image<f64>;
pub type Distribution = rotation::RotationDistribution<f64>;
pub type Dataset2D = mra_model::Dataset2D<f64>;
pub type Dataset1D = mra_model::Dataset1D<f64>;
pub type EmConfig = em::EmConfig<f64>;
pub type EmReport = em::EmReport<f64>;
pub type LearnedPrior = dist_learning::LearnedPrior<f64>;
