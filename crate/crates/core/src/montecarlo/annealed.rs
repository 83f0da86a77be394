use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::log_mean_exp;
use crate::rng::{stream, Purpose};
use crate::spectral::SpectralMeasure;

/// Where the diagonal `Λ` of an annealed run comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumSource {
    /// Mid-point quantiles `F⁻¹((i - ½)/N)` of a measure.
    Quantiles(SpectralMeasure),
    /// An explicit spectrum; its length fixes `N`.
    Spectrum(Vec<f64>),
}

impl SpectrumSource {
    fn lambdas(&self, n: usize) -> Result<Vec<f64>> {
        match self {
            SpectrumSource::Quantiles(m) => Ok(m.midpoint_quantiles(n)),
            SpectrumSource::Spectrum(v) if v.len() == n => Ok(v.clone()),
            SpectrumSource::Spectrum(v) => Err(Error::Dimension(format!(
                "spectrum has {} entries but n = {n}",
                v.len()
            ))),
        }
    }
}

/// How the Gaussian directions are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampler {
    /// Isotropic Gaussians, unweighted.
    Plain,
    /// Gaussians with precision `diag(K - λ_i)`, `H_{μ_N}(K) = 2β`, reweighted
    /// exactly back to the uniform law on the sphere.
    Tilted,
}

/// `(1/N) log E₀ Z` and `(1/2N) log E₀ Z²` at a deterministic spectrum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnealedEstimate {
    pub n: usize,
    pub beta: f64,
    pub log_first_moment_rate: f64,
    pub log_second_moment_rate: f64,
    pub first_std_err: f64,
    pub second_std_err: f64,
    /// Paired delta-method standard error of `second - first`; both rates
    /// are computed from the same draws, so this is much smaller than the
    /// two errors combined.
    pub difference_std_err: f64,
    pub num_samples: usize,
    pub sampler: Sampler,
    pub seed: u64,
}

impl AnnealedEstimate {
    pub fn combined_std_err(&self) -> f64 {
        self.first_std_err.hypot(self.second_std_err)
    }
}

/// Annealed moments with the tilted sampler (plain at `β = 0`).
pub fn annealed_moments(
    source: &SpectrumSource,
    n: usize,
    beta: f64,
    num_samples: usize,
    seed: u64,
) -> Result<AnnealedEstimate> {
    annealed_moments_with(source, n, beta, num_samples, seed, Sampler::Tilted)
}

/// `E₀ exp(NβV₁)` and `E₀ exp(N F(V₁,V₂))` with `V₁ = ⟨Λx, x⟩/|x|²` and
/// `V₂` the same quotient of the Gram-Schmidt residual of a second Gaussian.
///
/// Under the target both directions are uniform on the sphere (the second one
/// on the orthogonal complement of the first). For `β > 0` the events that
/// dominate `E₀ Z` have probability near `exp(-N·T(a))`, far too rare to hit
/// by plain sampling at `N` in the thousands, so the tilted sampler draws
/// angular central Gaussian directions concentrated there and carries the
/// exact likelihood ratio.
pub fn annealed_moments_with(
    source: &SpectrumSource,
    n: usize,
    beta: f64,
    num_samples: usize,
    seed: u64,
    sampler: Sampler,
) -> Result<AnnealedEstimate> {
    if n < 2 {
        return Err(Error::Dimension(format!(
            "annealed moments need n >= 2, got {n}"
        )));
    }
    if num_samples == 0 {
        return Err(Error::Dimension("num_samples must be positive".into()));
    }
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::Domain(format!(
            "beta = {beta} must be finite and nonnegative"
        )));
    }
    let lambdas = source.lambdas(n)?;
    if beta == 0.0 {
        return Ok(AnnealedEstimate {
            n,
            beta,
            log_first_moment_rate: 0.0,
            log_second_moment_rate: 0.0,
            first_std_err: 0.0,
            second_std_err: 0.0,
            difference_std_err: 0.0,
            num_samples,
            sampler,
            seed,
        });
    }
    let precision: Option<Vec<f64>> = match sampler {
        Sampler::Plain => None,
        Sampler::Tilted => {
            let k = tilt_point(&lambdas, beta);
            Some(lambdas.iter().map(|l| k - l).collect())
        }
    };
    let log_det = precision
        .as_ref()
        .map_or(0.0, |c| c.iter().map(|v| v.ln()).sum::<f64>());
    let nf = n as f64;

    let logs: Vec<(f64, f64)> = (0..num_samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, Purpose::Annealed, i);
            let mut x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            let mut y: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            if let Some(c) = &precision {
                for ((xi, yi), ci) in x.iter_mut().zip(y.iter_mut()).zip(c) {
                    let s = ci.sqrt();
                    *xi /= s;
                    *yi /= s;
                }
            }
            let xx: f64 = x.iter().map(|v| v * v).sum();
            let xy: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
            let coef = xy / xx;
            let z: Vec<f64> = y.iter().zip(&x).map(|(b, a)| b - coef * a).collect();
            let zz: f64 = z.iter().map(|v| v * v).sum();
            let v1 = lambdas.iter().zip(&x).map(|(l, a)| l * a * a).sum::<f64>() / xx;
            let v2 = lambdas.iter().zip(&z).map(|(l, a)| l * a * a).sum::<f64>() / zz;

            let (lw1, lw2) = match &precision {
                None => (0.0, 0.0),
                Some(c) => {
                    let s1 = c.iter().zip(&x).map(|(ci, a)| ci * a * a).sum::<f64>() / xx;
                    let s2 = c.iter().zip(&z).map(|(ci, a)| ci * a * a).sum::<f64>() / zz;
                    let cross = c
                        .iter()
                        .zip(x.iter().zip(&z))
                        .map(|(ci, (a, b))| ci * a * b)
                        .sum::<f64>()
                        / (xx * zz).sqrt();
                    let schur = s2 - cross * cross / s1;
                    let lw1 = -0.5 * log_det + 0.5 * nf * s1.ln();
                    let lw2 = -0.5 * log_det + 0.5 * s1.ln() + 0.5 * (nf - 1.0) * schur.ln();
                    (lw1, lw2)
                }
            };
            let f = beta * (v1 + v2) + log_cosh(beta * (v1 - v2));
            (lw1 + nf * beta * v1, lw1 + lw2 + nf * f)
        })
        .collect();

    let first: Vec<f64> = logs.iter().map(|p| p.0).collect();
    let second: Vec<f64> = logs.iter().map(|p| p.1).collect();
    let (l1, se1) = log_mean_exp(&first);
    let (l2, se2) = log_mean_exp(&second);
    let difference_std_err = paired_std_err(&first, l1, &second, l2, nf);
    Ok(AnnealedEstimate {
        n,
        beta,
        log_first_moment_rate: l1 / nf,
        log_second_moment_rate: l2 / (2.0 * nf),
        first_std_err: se1 / nf,
        second_std_err: se2 / (2.0 * nf),
        difference_std_err,
        num_samples,
        sampler,
        seed,
    })
}

/// Linearize `log mean exp` around each mean: the influence of draw `k` on
/// `second/(2N) - first/N` is `w2_k/(2N E w2) - w1_k/(N E w1)`.
fn paired_std_err(first: &[f64], l1: f64, second: &[f64], l2: f64, nf: f64) -> f64 {
    let m = first.len();
    if m < 2 {
        return f64::NAN;
    }
    let infl: Vec<f64> = first
        .iter()
        .zip(second)
        .map(|(a, b)| (b - l2).exp() / (2.0 * nf) - (a - l1).exp() / nf)
        .collect();
    let mean = infl.iter().sum::<f64>() / m as f64;
    let var = infl.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
    (var / m as f64).sqrt()
}

/// The point `K > max λ` with `(1/N) Σ 1/(K - λ_i) = 2β`.
pub fn tilt_point(lambdas: &[f64], beta: f64) -> f64 {
    let top = lambdas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let h = |k: f64| lambdas.iter().map(|l| 1.0 / (k - l)).sum::<f64>() / lambdas.len() as f64;
    let target = 2.0 * beta;
    let (mut lo, mut hi) = (top, top + 1.0 / target);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

fn log_cosh(t: f64) -> f64 {
    let a = t.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::sample_haar;

    #[test]
    fn zero_beta_is_exact() {
        let src = SpectrumSource::Quantiles(SpectralMeasure::semicircle());
        let e = annealed_moments(&src, 50, 0.0, 10, 1).unwrap();
        assert_eq!(
            (e.log_first_moment_rate, e.log_second_moment_rate),
            (0.0, 0.0)
        );
    }

    #[test]
    fn tilt_point_solves_the_hilbert_equation() {
        let l = [-1.0, 0.0, 2.0];
        let k = tilt_point(&l, 0.4);
        let h: f64 = l.iter().map(|v| 1.0 / (k - v)).sum::<f64>() / 3.0;
        assert!(k > 2.0 && (h - 0.8).abs() < 1e-12);
    }

    #[test]
    fn constant_spectrum_is_deterministic() {
        // V₁ = V₂ = c for every draw, so both rates are βc with no noise.
        let src = SpectrumSource::Spectrum(vec![0.7; 5]);
        for sampler in [Sampler::Plain, Sampler::Tilted] {
            let e = annealed_moments_with(&src, 5, 0.3, 200, 9, sampler).unwrap();
            assert!((e.log_first_moment_rate - 0.21).abs() < 1e-9);
            assert!((e.log_second_moment_rate - 0.21).abs() < 1e-9);
        }
    }

    #[test]
    fn tilted_and_plain_agree_at_small_n() {
        let src = SpectrumSource::Spectrum(vec![-1.0, -0.5, 0.1, 0.6, 1.3, 2.0]);
        let a = annealed_moments_with(&src, 6, 0.5, 40_000, 1, Sampler::Plain).unwrap();
        let b = annealed_moments_with(&src, 6, 0.5, 40_000, 2, Sampler::Tilted).unwrap();
        let tol = 4.0 * a.first_std_err.hypot(b.first_std_err);
        assert!((a.log_first_moment_rate - b.log_first_moment_rate).abs() < tol);
        let tol2 = 4.0 * a.second_std_err.hypot(b.second_std_err);
        assert!((a.log_second_moment_rate - b.log_second_moment_rate).abs() < tol2);
    }

    #[test]
    fn first_moment_matches_haar_average() {
        let lambdas = vec![-1.2, -0.4, 0.0, 0.5, 0.9, 1.6];
        let beta = 0.4;
        let draws = 10_000;
        let vals: Vec<f64> = (0..draws)
            .map(|s| {
                let o = sample_haar(6, s).unwrap().matrix;
                let q: f64 = (0..6).map(|i| lambdas[i] * o[(0, i)].powi(2)).sum();
                6.0 * beta * q
            })
            .collect();
        let (lm, se) = log_mean_exp(&vals);
        let e = annealed_moments(&SpectrumSource::Spectrum(lambdas), 6, beta, 10_000, 5).unwrap();
        let tol = 3.0 * (se / 6.0).hypot(e.first_std_err);
        assert!((lm / 6.0 - e.log_first_moment_rate).abs() < tol);
    }

    #[test]
    fn dimension_checks() {
        let src = SpectrumSource::Spectrum(vec![1.0, 2.0]);
        assert!(annealed_moments(&src, 3, 0.1, 10, 0).is_err());
        assert!(annealed_moments(&src, 1, 0.1, 10, 0).is_err());
    }
}
