//! Finite-N ground truth: Haar sampling, exact enumeration of `Z_N`, and the
//! quenched, annealed and concentration estimators built on them.

mod annealed;
mod enumerate;
mod haar;
mod quenched;

pub use annealed::{
    annealed_moments, annealed_moments_with, tilt_point, AnnealedEstimate, Sampler, SpectrumSource,
};
pub use enumerate::{exact_log_partition, naive_log_partition, ENUMERATION_CAP};
pub use haar::{sample_haar, HaarSample};
pub use quenched::{concentration_scan, quenched_free_energy, ConcentrationRow, QuenchedEstimate};
