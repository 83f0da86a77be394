use rayon::prelude::*;
use serde::Serialize;

use super::enumerate::{exact_log_partition, ENUMERATION_CAP};
use super::haar::sample_haar;
use crate::error::{Error, Result};
use crate::models::{sample_coupling, ModelSpec};
use crate::numerics::mean_and_std;
use crate::rng::derive_seed;

/// Per-sample `Φ_N` for one `(model, n, β)`, with the spectrum drawn at random
/// (`phi_values`) and replaced by its expected profile (`expected_phi_values`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuenchedEstimate {
    pub n: usize,
    pub beta: f64,
    pub phi_values: Vec<f64>,
    pub mean: f64,
    pub std_err: f64,
    pub expected_phi_values: Vec<f64>,
    pub expected_mean: f64,
    pub expected_std_err: f64,
    pub seeds: Vec<u64>,
}

fn check_n(n: usize) -> Result<()> {
    if n > ENUMERATION_CAP {
        return Err(Error::CapExceeded {
            n,
            cap: ENUMERATION_CAP,
        });
    }
    Ok(())
}

fn summary(values: &[f64]) -> (f64, f64) {
    let (mean, std) = mean_and_std(values);
    let se = if values.len() > 1 {
        std / (values.len() as f64).sqrt()
    } else {
        f64::NAN
    };
    (mean, se)
}

/// Exact `Φ_N` over `num_samples` independent (spectrum, Haar) draws.
pub fn quenched_free_energy(
    spec: &ModelSpec,
    n: usize,
    beta: f64,
    num_samples: usize,
    seed: u64,
) -> Result<QuenchedEstimate> {
    check_n(n)?;
    if num_samples == 0 {
        return Err(Error::Dimension("num_samples must be positive".into()));
    }
    let seeds: Vec<u64> = (0..num_samples as u64)
        .map(|i| derive_seed(seed, i))
        .collect();
    let pairs: Vec<(f64, f64)> = seeds
        .par_iter()
        .map(|&s| {
            let coupling = sample_coupling(spec, n, s)?;
            let o = sample_haar(n, s)?;
            Ok((
                exact_log_partition(&coupling.d_values, &o, beta)?,
                exact_log_partition(&coupling.expected_d, &o, beta)?,
            ))
        })
        .collect::<Result<_>>()?;
    let phi_values: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let expected_phi_values: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let (mean, std_err) = summary(&phi_values);
    let (expected_mean, expected_std_err) = summary(&expected_phi_values);
    Ok(QuenchedEstimate {
        n,
        beta,
        phi_values,
        mean,
        std_err,
        expected_phi_values,
        expected_mean,
        expected_std_err,
        seeds,
    })
}

/// One line of a concentration scan: spread of `Φ_N` across Haar draws at a
/// fixed (expected) spectrum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationRow {
    pub n: usize,
    pub beta: f64,
    pub num_samples: usize,
    pub mean: f64,
    pub std: f64,
    /// Normal-theory standard error of `std`, `std / √(2(k-1))`.
    pub std_se: f64,
}

pub fn concentration_scan(
    spec: &ModelSpec,
    beta: f64,
    n_list: &[usize],
    samples_per_n: usize,
    seed: u64,
) -> Result<Vec<ConcentrationRow>> {
    if samples_per_n < 2 {
        return Err(Error::Dimension(
            "a concentration scan needs at least 2 samples per n".into(),
        ));
    }
    n_list.iter().try_for_each(|&n| check_n(n))?;
    n_list
        .iter()
        .map(|&n| {
            let expected = sample_coupling(spec, n, seed)?.expected_d;
            let phis: Vec<f64> = (0..samples_per_n as u64)
                .into_par_iter()
                .map(|i| {
                    exact_log_partition(&expected, &sample_haar(n, derive_seed(seed, i))?, beta)
                })
                .collect::<Result<_>>()?;
            let (mean, std) = mean_and_std(&phis);
            Ok(ConcentrationRow {
                n,
                beta,
                num_samples: samples_per_n,
                mean,
                std,
                std_se: std / (2.0 * (samples_per_n - 1) as f64).sqrt(),
            })
        })
        .collect()
}
