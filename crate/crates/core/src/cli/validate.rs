use serde::Serialize;

use crate::models::{closed_form_limit, ModelSpec};
use crate::montecarlo::{
    annealed_moments_with, exact_log_partition, naive_log_partition, quenched_free_energy,
    sample_haar, Sampler, SpectrumSource,
};
use crate::numerics::log_mean_exp;
use crate::spectral::{Evaluation, TransformProfile};
use crate::variational::{solve_fixed_point, RateFunction};

/// Outcome of one cross-check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn below(name: &str, measured: f64, tolerance: f64) -> Self {
        Check {
            name: name.to_string(),
            measured,
            tolerance,
            passed: measured < tolerance,
        }
    }
}

fn families() -> Vec<ModelSpec> {
    vec![
        ModelSpec::sk(),
        ModelSpec::rom(0.5).expect("valid"),
        ModelSpec::hopfield(2.0).expect("valid"),
    ]
}

/// Quick closed-form vs numeric vs Monte Carlo checks (seconds).
pub fn validation_suite(seed: u64) -> Vec<Check> {
    let mut checks = Vec::new();

    let mut worst = 0.0f64;
    for m in families() {
        let numeric = TransformProfile::with_evaluation(m.limiting_measure(), Evaluation::Numeric);
        let top = 0.45 * numeric.h_max().min(2.0);
        for i in 1..=5 {
            let b = top * i as f64 / 5.0;
            let closed = closed_form_limit(&m, b).ok().flatten().unwrap_or(f64::NAN);
            let num = numeric.free_energy_limit(b).unwrap_or(f64::NAN);
            worst = worst
                .max((closed - num).abs())
                .max(if closed.is_nan() || num.is_nan() {
                    f64::INFINITY
                } else {
                    0.0
                });
        }
    }
    checks.push(Check::below("closed_form_vs_numeric_limit", worst, 1e-8));

    let sk = RateFunction::new(ModelSpec::sk().profile());
    let mut worst = 0.0f64;
    for b in [0.1, 0.2, 0.3, 0.4] {
        worst = worst.max(match solve_fixed_point(&sk, b) {
            Ok(s) => (s.x_star - 2.0 * b).abs().max((s.y_star - 2.0 * b).abs()),
            Err(_) => f64::INFINITY,
        });
    }
    checks.push(Check::below("sk_fixed_point", worst, 1e-11));

    let mut worst = 0.0f64;
    for m in families() {
        let rf = RateFunction::new(m.profile());
        let top = 0.4 * rf.profile().h_max().min(2.0);
        for i in 1..=4 {
            let b = top * i as f64 / 4.0;
            let gap = match (rf.symmetric_point(b), rf.profile().free_energy_limit(b)) {
                (Some(a), Ok(lim)) => (b * a - rf.value(a) - lim).abs(),
                _ => f64::INFINITY,
            };
            worst = worst.max(gap);
        }
    }
    checks.push(Check::below("variational_identity", worst, 1e-8));

    let mut worst = 0.0f64;
    for n in 2..=8usize {
        for s in 0..3u64 {
            let o = match sample_haar(n, seed.wrapping_add(s)) {
                Ok(o) => o,
                Err(_) => return vec![Check::below("haar_sampling", f64::INFINITY, 0.0)],
            };
            let d: Vec<f64> = (0..n)
                .map(|i| ((i + 1) as f64 * 0.71 + s as f64).cos() * 1.5)
                .collect();
            let a = exact_log_partition(&d, &o, 0.7).unwrap_or(f64::NAN);
            let b = naive_log_partition(&d, &o, 0.7).unwrap_or(f64::NAN);
            worst = worst.max(if a.is_nan() || b.is_nan() {
                f64::INFINITY
            } else {
                (a - b).abs()
            });
        }
    }
    checks.push(Check::below("gray_code_vs_naive", worst, 1e-12));

    let lambdas = vec![-1.3, -0.6, -0.1, 0.4, 0.8, 1.5];
    let beta = 0.4;
    let draws = 4000u64;
    let haar: Vec<f64> = (0..draws)
        .filter_map(|s| sample_haar(6, seed.wrapping_add(1000 + s)).ok())
        .map(|o| {
            6.0 * beta
                * (0..6)
                    .map(|i| lambdas[i] * o.matrix[(0, i)].powi(2))
                    .sum::<f64>()
        })
        .collect();
    let (lm, se) = log_mean_exp(&haar);
    let (z, tol) = match annealed_moments_with(
        &SpectrumSource::Spectrum(lambdas),
        6,
        beta,
        4000,
        seed,
        Sampler::Tilted,
    ) {
        Ok(e) => (
            ((lm / 6.0) - e.log_first_moment_rate).abs(),
            3.0 * (se / 6.0).hypot(e.first_std_err),
        ),
        Err(_) => (f64::INFINITY, 0.0),
    };
    checks.push(Check::below("annealed_vs_haar_average", z, tol));

    let q = quenched_free_energy(&ModelSpec::sk(), 12, 0.3, 20, seed);
    let dev = q.map(|e| (e.mean - 0.09).abs()).unwrap_or(f64::INFINITY);
    checks.push(Check::below("sk_quenched_n12", dev, 0.05));

    checks
}
