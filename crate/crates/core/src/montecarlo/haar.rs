use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::{stream, Purpose};

/// A Haar-distributed orthogonal matrix and the seed that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct HaarSample {
    pub n: usize,
    pub matrix: DMatrix<f64>,
    pub seed: u64,
}

impl HaarSample {
    /// Wraps an explicit orthogonal matrix, e.g. the identity or a permutation.
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "orthogonal matrix must be square, got {:?}",
                matrix.shape()
            )));
        }
        Ok(Self {
            n: matrix.nrows(),
            matrix,
            seed: 0,
        })
    }

    /// An `n × n` matrix from `n²` entries in row-major order.
    pub fn from_row_major(n: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::Dimension(format!(
                "{} entries cannot form a {n}x{n} matrix",
                entries.len()
            )));
        }
        Self::from_matrix(DMatrix::from_row_slice(n, n, entries))
    }

    /// `max |OOᵀ - I|`.
    pub fn orthogonality_residual(&self) -> f64 {
        let g = &self.matrix * self.matrix.transpose();
        (g - DMatrix::<f64>::identity(self.n, self.n)).amax()
    }
}

/// QR of a standard Gaussian matrix with the columns of `Q` rescaled by the
/// signs of `diag(R)`, which makes the law exactly Haar on `O(n)`.
pub fn sample_haar(n: usize, seed: u64) -> Result<HaarSample> {
    if n == 0 {
        return Err(Error::Dimension("Haar sample needs n >= 1".into()));
    }
    for attempt in 0..16u64 {
        let mut rng = stream(seed, Purpose::Haar, attempt);
        let g = DMatrix::<f64>::from_fn(n, n, |_, _| StandardNormal.sample(&mut rng));
        let qr = g.qr();
        let r = qr.r();
        if (0..n).any(|i| r[(i, i)].abs() < 1e-12) {
            continue;
        }
        let mut q = qr.q();
        for j in 0..n {
            if r[(j, j)] < 0.0 {
                q.column_mut(j).neg_mut();
            }
        }
        return Ok(HaarSample { n, matrix: q, seed });
    }
    Err(Error::NoConvergence(format!(
        "rank-deficient Gaussian matrices for seed {seed}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_by_one_is_a_sign() {
        for seed in 0..10 {
            let h = sample_haar(1, seed).unwrap();
            assert_eq!(h.matrix[(0, 0)].abs(), 1.0);
        }
    }

    #[test]
    fn orthogonal_and_deterministic() {
        for n in [2, 5, 17, 40] {
            let a = sample_haar(n, 7).unwrap();
            assert!(a.orthogonality_residual() < 1e-12);
            for c in a.matrix.column_iter() {
                assert!((c.norm() - 1.0).abs() < 1e-12);
            }
            assert_eq!(a, sample_haar(n, 7).unwrap());
        }
        assert_ne!(
            sample_haar(4, 1).unwrap().matrix,
            sample_haar(4, 2).unwrap().matrix
        );
    }

    #[test]
    fn sphere_second_moment() {
        let draws = 20_000;
        let vals: Vec<f64> = (0..draws)
            .map(|s| sample_haar(5, s).unwrap().matrix[(0, 0)].powi(2))
            .collect();
        let mean = vals.iter().sum::<f64>() / draws as f64;
        let sd = (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (draws - 1) as f64).sqrt();
        assert!((mean - 0.2).abs() < 3.0 * sd / (draws as f64).sqrt());
    }

    #[test]
    fn the_sign_fix_matters_for_the_diagonal() {
        // Haar entries are symmetric; raw Householder QR output is biased in sign.
        let draws = 4000;
        let mean = (0..draws)
            .map(|s| sample_haar(3, s).unwrap().matrix[(0, 0)])
            .sum::<f64>()
            / draws as f64;
        assert!(mean.abs() < 0.05);
    }
}
