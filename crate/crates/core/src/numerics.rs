//! Scalar numerical kernels shared by the transform, variational and Monte Carlo code.

/// Adaptive Simpson quadrature with an absolute error target.
///
/// The interval is first cut into `panels` equal pieces so that integrands
/// vanishing at the three initial Simpson nodes are not accepted prematurely.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, abs_tol: f64, max_depth: u32, panels: usize) -> f64
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return 0.0;
    }
    let panels = panels.max(1);
    let width = (b - a) / panels as f64;
    let tol = abs_tol / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let lo = a + k as f64 * width;
        let hi = if k + 1 == panels { b } else { lo + width };
        let mid = 0.5 * (lo + hi);
        let (flo, fmid, fhi) = (f(lo), f(mid), f(hi));
        let whole = (hi - lo) * (flo + 4.0 * fmid + fhi) / 6.0;
        total += simpson_step(&f, lo, mid, hi, flo, fmid, fhi, whole, tol, max_depth);
    }
    total
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F>(
    f: &F,
    a: f64,
    m: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64
where
    F: Fn(f64) -> f64,
{
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) * (fa + 4.0 * flm + fm) / 6.0;
    let right = (b - m) * (fm + 4.0 * frm + fb) / 6.0;
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol || !delta.is_finite() {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Streaming log-sum-exp accumulator.
#[derive(Debug, Clone, Copy)]
pub struct LogSumExp {
    max: f64,
    scaled_sum: f64,
}

impl Default for LogSumExp {
    fn default() -> Self {
        Self::new()
    }
}

impl LogSumExp {
    pub fn new() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            scaled_sum: 0.0,
        }
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x > self.max {
            self.scaled_sum = self.scaled_sum * (self.max - x).exp() + 1.0;
            self.max = x;
        } else {
            self.scaled_sum += (x - self.max).exp();
        }
    }

    /// Merge another accumulator; merging in a fixed order gives reproducible sums.
    pub fn merge(&mut self, other: &LogSumExp) {
        if other.max == f64::NEG_INFINITY {
            return;
        }
        if other.max > self.max {
            self.scaled_sum = self.scaled_sum * (self.max - other.max).exp() + other.scaled_sum;
            self.max = other.max;
        } else {
            self.scaled_sum += other.scaled_sum * (other.max - self.max).exp();
        }
    }

    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.scaled_sum.ln()
        }
    }
}

pub fn log_sum_exp(values: &[f64]) -> f64 {
    let mut acc = LogSumExp::new();
    values.iter().for_each(|&v| acc.push(v));
    acc.value()
}

/// Log of the sample mean of `exp(values)` and the delta-method standard
/// error of that log.
pub fn log_mean_exp(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return (f64::NEG_INFINITY, f64::NAN);
    }
    let scaled: Vec<f64> = values.iter().map(|v| (v - max).exp()).collect();
    let mean = scaled.iter().sum::<f64>() / n as f64;
    let log_mean = max + mean.ln();
    if n < 2 {
        return (log_mean, f64::NAN);
    }
    let var = scaled.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (log_mean, var.sqrt() / (mean * (n as f64).sqrt()))
}

/// Bisection for an increasing function: returns `x` in `[lo, hi]` with
/// `f(x)` crossing `target`. Runs until the bracket collapses to adjacent
/// floats or `max_iter` halvings. Requires `f(lo) <= target <= f(hi)`.
pub fn bisect_increasing<F>(f: F, mut lo: f64, mut hi: f64, target: f64, max_iter: usize) -> f64
where
    F: Fn(f64) -> f64,
{
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid);
        if v == target {
            return mid;
        }
        if v < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a maximum of `f` on `[a, b]`. Returns the best
/// point seen, which for unimodal `f` is the maximizer to within `tol`.
pub fn golden_section_max<F>(f: F, mut a: f64, mut b: f64, tol: f64, max_iter: usize) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..max_iter {
        if (b - a).abs() <= tol {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Sample mean and (n - 1)-normalized standard deviation.
pub fn mean_and_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_integrates_smooth_functions() {
        let v = adaptive_simpson(f64::sin, 0.0, std::f64::consts::PI, 1e-12, 40, 4);
        assert!((v - 2.0).abs() < 1e-11);
        let g = adaptive_simpson(|x| (-x * x).exp(), -8.0, 8.0, 1e-12, 40, 8);
        assert!((g - std::f64::consts::PI.sqrt()).abs() < 1e-11);
    }

    #[test]
    fn simpson_handles_sqrt_edge() {
        // ∫_0^1 sqrt(x) dx = 2/3
        let v = adaptive_simpson(f64::sqrt, 0.0, 1.0, 1e-10, 50, 1);
        assert!((v - 2.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn log_sum_exp_survives_overflow() {
        let v = log_sum_exp(&[1000.0, 1000.0, 999.0]);
        let expected = 1000.0 + (2.0 + (-1.0f64).exp()).ln();
        assert!((v - expected).abs() < 1e-12);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
    }

    #[test]
    fn merge_matches_single_pass() {
        let xs: Vec<f64> = (0..100).map(|i| (i as f64 * 0.37).sin() * 50.0).collect();
        let whole = log_sum_exp(&xs);
        let mut a = LogSumExp::new();
        let mut b = LogSumExp::new();
        xs[..40].iter().for_each(|&x| a.push(x));
        xs[40..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        assert!((a.value() - whole).abs() < 1e-12);
    }

    #[test]
    fn log_mean_exp_of_constants() {
        let (m, se) = log_mean_exp(&[3.0; 10]);
        assert!((m - 3.0).abs() < 1e-15);
        assert_eq!(se, 0.0);
    }

    #[test]
    fn bisection_and_golden_section() {
        let r = bisect_increasing(|x| x * x * x, -2.0, 3.0, 8.0, 200);
        assert!((r - 2.0).abs() < 1e-14);
        let (x, fx) = golden_section_max(|x| -(x - 0.3f64).powi(2), -1.0, 1.0, 1e-12, 200);
        assert!((x - 0.3).abs() < 1e-6);
        assert!(fx <= 0.0);
    }
}
