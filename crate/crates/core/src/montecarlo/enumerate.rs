use rayon::prelude::*;

use super::haar::HaarSample;
use crate::error::{Error, Result};
use crate::numerics::LogSumExp;

/// Largest `n` for which `Z_N` is enumerated.
pub const ENUMERATION_CAP: usize = 24;

const BLOCK_BITS: u32 = 12;

fn check(d: &[f64], o: &HaarSample) -> Result<usize> {
    let n = d.len();
    if n == 0 || o.n != n {
        return Err(Error::Dimension(format!(
            "spectrum has {} entries but O is {}x{}",
            n, o.n, o.n
        )));
    }
    if n > ENUMERATION_CAP {
        return Err(Error::CapExceeded {
            n,
            cap: ENUMERATION_CAP,
        });
    }
    Ok(n)
}

/// `Φ_N = (1/N) log[2^{-N} Σ_σ exp(β σᵀ O D Oᵀ σ)]` by exhaustive enumeration.
///
/// `σ ↦ -σ` leaves the energy unchanged, so the last spin is pinned to +1 and
/// the other `2^{N-1}` configurations are walked in Gray-code order, keeping
/// `v = Oᵀσ` up to date with one row update per flip. The walk is cut into
/// fixed blocks of `2^12` steps evaluated in parallel and merged in order, so
/// the result does not depend on the number of threads.
pub fn exact_log_partition(d: &[f64], o: &HaarSample, beta: f64) -> Result<f64> {
    let n = check(d, o)?;
    if beta == 0.0 {
        return Ok(0.0);
    }
    // rows[k*n..(k+1)*n] = row k of O, i.e. how spin k enters v.
    let rows: Vec<f64> = (0..n)
        .flat_map(|k| (0..n).map(move |j| (k, j)))
        .map(|(k, j)| o.matrix[(k, j)])
        .collect();
    let free = n - 1;
    let total: u64 = 1 << free;
    let block = 1u64 << BLOCK_BITS.min(free as u32);
    let blocks = total / block;

    let partial: Vec<LogSumExp> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let start = b * block;
            let gray = start ^ (start >> 1);
            let mut sigma: Vec<f64> = (0..n)
                .map(|k| {
                    if k < free && gray >> k & 1 == 1 {
                        -1.0
                    } else {
                        1.0
                    }
                })
                .collect();
            let mut v = vec![0.0; n];
            for (k, s) in sigma.iter().enumerate() {
                let row = &rows[k * n..(k + 1) * n];
                for (vj, r) in v.iter_mut().zip(row) {
                    *vj += s * r;
                }
            }
            let mut acc = LogSumExp::new();
            acc.push(beta * energy(d, &v));
            for i in start + 1..start + block {
                let k = i.trailing_zeros() as usize;
                let row = &rows[k * n..(k + 1) * n];
                let step = 2.0 * sigma[k];
                for (vj, r) in v.iter_mut().zip(row) {
                    *vj -= step * r;
                }
                sigma[k] = -sigma[k];
                acc.push(beta * energy(d, &v));
            }
            acc
        })
        .collect();

    let mut total_acc = LogSumExp::new();
    partial.iter().for_each(|p| total_acc.merge(p));
    Ok((total_acc.value() - free as f64 * std::f64::consts::LN_2) / n as f64)
}

#[inline]
fn energy(d: &[f64], v: &[f64]) -> f64 {
    d.iter().zip(v).map(|(di, vi)| di * vi * vi).sum()
}

/// The same quantity by direct evaluation of `σᵀJσ` for every `σ`; `O(N² 2^N)`.
pub fn naive_log_partition(d: &[f64], o: &HaarSample, beta: f64) -> Result<f64> {
    let n = check(d, o)?;
    let j = &o.matrix
        * nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(d))
        * o.matrix.transpose();
    let mut acc = LogSumExp::new();
    for mask in 0u64..1 << n {
        let s: Vec<f64> = (0..n)
            .map(|k| if mask >> k & 1 == 1 { -1.0 } else { 1.0 })
            .collect();
        let mut h = 0.0;
        for a in 0..n {
            for b in 0..n {
                h += s[a] * j[(a, b)] * s[b];
            }
        }
        acc.push(beta * h);
    }
    Ok((acc.value() - n as f64 * std::f64::consts::LN_2) / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::sample_haar;
    use nalgebra::DMatrix;

    #[test]
    fn beta_zero_is_exactly_zero() {
        let o = sample_haar(8, 3).unwrap();
        assert_eq!(exact_log_partition(&[1.0; 8], &o, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn identity_coupling() {
        let o = HaarSample::from_matrix(DMatrix::identity(2, 2)).unwrap();
        let phi = exact_log_partition(&[1.0, 1.0], &o, 0.7).unwrap();
        assert!((phi - 0.7).abs() < 1e-15);
    }

    #[test]
    fn three_spins_against_direct_sum() {
        let o = sample_haar(3, 11).unwrap();
        let d = [0.3, -1.2, 0.8];
        let beta = 0.4;
        // eight explicit terms
        let j = &o.matrix
            * DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&d))
            * o.matrix.transpose();
        let mut z = 0.0;
        for s in [
            [1., 1., 1.],
            [1., 1., -1.],
            [1., -1., 1.],
            [1., -1., -1.],
            [-1., 1., 1.],
            [-1., 1., -1.],
            [-1., -1., 1.],
            [-1., -1., -1.],
        ] {
            let mut h = 0.0;
            for a in 0..3 {
                for b in 0..3 {
                    h += s[a] * j[(a, b)] * s[b];
                }
            }
            z += (beta * h).exp() / 8.0;
        }
        let phi = exact_log_partition(&d, &o, beta).unwrap();
        assert!((phi - z.ln() / 3.0).abs() < 1e-12);
    }

    #[test]
    fn gray_code_matches_naive() {
        for n in 1..=10 {
            for seed in 0..4 {
                let o = sample_haar(n, seed).unwrap();
                let d: Vec<f64> = (0..n)
                    .map(|i| (i as f64 * 0.37 + seed as f64).sin() * 2.0)
                    .collect();
                let a = exact_log_partition(&d, &o, 0.9).unwrap();
                let b = naive_log_partition(&d, &o, 0.9).unwrap();
                assert!((a - b).abs() < 1e-12, "n = {n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn blocks_cover_large_n() {
        // 2^14 configurations, several blocks
        let o = sample_haar(15, 2).unwrap();
        let d: Vec<f64> = (0..15)
            .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        let phi = exact_log_partition(&d, &o, 0.2).unwrap();
        let naive = naive_log_partition(&d, &o, 0.2).unwrap();
        assert!((phi - naive).abs() < 1e-12);
    }

    #[test]
    fn caps_and_dimensions() {
        let o = sample_haar(3, 0).unwrap();
        assert!(matches!(
            exact_log_partition(&[1.0, 2.0], &o, 0.1),
            Err(Error::Dimension(_))
        ));
        let big = HaarSample::from_matrix(DMatrix::identity(25, 25)).unwrap();
        assert!(matches!(
            exact_log_partition(&[0.0; 25], &big, 0.1),
            Err(Error::CapExceeded { n: 25, cap: 24 })
        ));
    }
}
