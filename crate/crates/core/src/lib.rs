//! High-temperature free energy of orthogonally invariant mean-field spin
//! glasses `H(σ) = σᵀ O D Oᵀ σ`.
//!
//! The crate computes the limiting free energy `I_μ(β) = ½ ∫_0^{2β} R_μ` from
//! the limiting spectral measure `μ` of the coupling matrix, solves the
//! two-replica variational problem behind the second-moment argument, and
//! checks both against exact enumeration and Monte Carlo at small `N`.
//!
//! - [`spectral`]: measures, Hilbert / R / Q / K transforms, `I_μ(β)`.
//! - [`models`]: SK, random orthogonal model, Gaussian Hopfield, custom spectra.
//! - [`variational`]: rate function `T_μ`, objective `ψ`, fixed point, `β₀`.
//! - [`montecarlo`]: Haar sampling, enumeration, quenched and annealed estimators.
//! - [`cli`]: the command-line front end.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod models;
pub mod montecarlo;
pub mod numerics;
pub mod rng;
pub mod spectral;
pub mod variational;

pub use error::{Error, Result};
