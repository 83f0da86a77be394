use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::numerics::{adaptive_simpson, golden_section_max};
use crate::spectral::measure::{MeasureKind, SpectralMeasure};

/// How transforms of the analytic families are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Evaluation {
    /// Closed forms where the family has them; atomic measures always go
    /// through numerical inversion.
    ClosedForm,
    /// Ignore closed forms: invert the Hilbert transform by bisection,
    /// invert R by root finding, and integrate R by quadrature.
    Numeric,
}

const QUAD_TOL: f64 = 1e-11;
const QUAD_DEPTH: u32 = 40;
const MAX_BISECTION: usize = 200;
const WINDOW_GRID: usize = 512;

/// A spectral measure together with its cached edge data and the
/// Hilbert / R / Q / K transform evaluators.
#[derive(Debug, Clone, Serialize)]
pub struct TransformProfile {
    measure: SpectralMeasure,
    lambda_min: f64,
    lambda_max: f64,
    h_min: f64,
    h_max: f64,
    x_min: f64,
    x_max: f64,
    mean_m: f64,
    variance: f64,
    evaluation: Evaluation,
}

/// The window `[U_L, U_R]` around `2β` on which the contraction constant
/// `ζ(β) = β² sup |R'|` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BetaWindow {
    pub beta: f64,
    pub u_left: f64,
    pub u_right: f64,
    pub zeta: f64,
}

impl TransformProfile {
    pub fn new(measure: SpectralMeasure) -> Self {
        Self::build(measure, Evaluation::ClosedForm)
    }

    pub fn numeric(measure: SpectralMeasure) -> Self {
        Self::build(measure, Evaluation::Numeric)
    }

    pub fn with_evaluation(measure: SpectralMeasure, evaluation: Evaluation) -> Self {
        Self::build(measure, evaluation)
    }

    fn build(measure: SpectralMeasure, evaluation: Evaluation) -> Self {
        let (lambda_min, lambda_max) = measure.support();
        let (h_min, h_max) = measure.hilbert_edge_limits();
        // x = λ_edge - 1/H_edge, which degenerates to λ_edge when |H_edge| = ∞.
        let x_min = if h_min.is_infinite() {
            lambda_min
        } else {
            lambda_min - 1.0 / h_min
        };
        let x_max = if h_max.is_infinite() {
            lambda_max
        } else {
            lambda_max - 1.0 / h_max
        };
        Self {
            mean_m: measure.mean(),
            variance: measure.variance(),
            measure,
            lambda_min,
            lambda_max,
            h_min,
            h_max,
            x_min,
            x_max,
            evaluation,
        }
    }

    pub fn measure(&self) -> &SpectralMeasure {
        &self.measure
    }
    pub fn lambda_min(&self) -> f64 {
        self.lambda_min
    }
    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }
    pub fn h_min(&self) -> f64 {
        self.h_min
    }
    pub fn h_max(&self) -> f64 {
        self.h_max
    }
    pub fn x_min(&self) -> f64 {
        self.x_min
    }
    pub fn x_max(&self) -> f64 {
        self.x_max
    }
    pub fn mean(&self) -> f64 {
        self.mean_m
    }
    pub fn variance(&self) -> f64 {
        self.variance
    }
    pub fn evaluation(&self) -> Evaluation {
        self.evaluation
    }

    fn closed_form(&self) -> Option<&MeasureKind> {
        match (self.evaluation, self.measure.kind()) {
            (Evaluation::Numeric, _) | (_, MeasureKind::Discrete { .. }) => None,
            (Evaluation::ClosedForm, kind) => Some(kind),
        }
    }

    /// Whether `z` lies in the open domain `(H_min, H_max)` of R.
    pub fn in_r_domain(&self, z: f64) -> bool {
        z > self.h_min && z < self.h_max
    }

    pub fn hilbert(&self, z: f64) -> Result<f64> {
        self.measure.hilbert(z)
    }

    fn check_r_domain(&self, z: f64) -> Result<()> {
        if self.in_r_domain(z) {
            Ok(())
        } else {
            Err(domain(format!(
                "R-transform argument {z} outside ({}, {})",
                self.h_min, self.h_max
            )))
        }
    }

    /// `R_μ(z)`, with `R_μ(0) = m`.
    pub fn r_transform(&self, z: f64) -> Result<f64> {
        self.check_r_domain(z)?;
        if z == 0.0 {
            return Ok(self.mean_m);
        }
        match self.closed_form() {
            Some(MeasureKind::Semicircle) => Ok(z),
            Some(MeasureKind::TwoPoint { .. }) => {
                let m = self.mean_m;
                // (√(1 + 4z(m+z)) - 1)/(2z) with the cancellation removed.
                let s = (1.0 + 4.0 * z * (m + z)).sqrt();
                Ok(2.0 * (m + z) / (s + 1.0))
            }
            Some(MeasureKind::MarchenkoPastur { lambda }) => Ok(lambda / (1.0 - z)),
            _ => self.invert_hilbert(z).map(|(r, _)| r),
        }
    }

    /// `K_μ(z) = R_μ(z) + 1/z`, the functional inverse of the Hilbert transform.
    pub fn k_transform(&self, z: f64) -> Result<f64> {
        if z == 0.0 {
            return Err(domain("K-transform is undefined at z = 0"));
        }
        self.check_r_domain(z)?;
        match self.closed_form() {
            Some(_) => Ok(self.r_transform(z)? + 1.0 / z),
            None => self.invert_hilbert(z).map(|(_, k)| k),
        }
    }

    /// Solves `H(w) = z` and returns `(w - 1/z, w)`.
    fn invert_hilbert(&self, z: f64) -> Result<(f64, f64)> {
        match self.measure.atoms() {
            Some(atoms) => Ok(self.invert_atomic(&atoms, z)),
            None => self.invert_by_hilbert_bisection(z),
        }
    }

    /// For atomic measures, write `w = r + 1/z` and solve
    /// `φ(r) = Σ w_i (r - t_i) / (1 + z (r - t_i)) = 0`, which is increasing
    /// in `r` and keeps full precision as `z → 0`.
    fn invert_atomic(&self, atoms: &[(f64, f64)], z: f64) -> (f64, f64) {
        let phi = |r: f64| -> f64 {
            let mut acc = 0.0;
            for &(t, w) in atoms {
                let d = 1.0 + z * (r - t);
                if d <= 0.0 {
                    // crossed the pole at the edge atom
                    return if z > 0.0 {
                        f64::NEG_INFINITY
                    } else {
                        f64::INFINITY
                    };
                }
                acc += w * (r - t) / d;
            }
            acc
        };
        let spread = self.mean_m.abs() + (self.lambda_max - self.lambda_min) + 1.0;
        let (mut lo, mut hi) = if z > 0.0 {
            (self.lambda_max - 1.0 / z, self.lambda_max + spread)
        } else {
            (self.lambda_min - spread, self.lambda_min - 1.0 / z)
        };
        for _ in 0..MAX_BISECTION {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let v = phi(mid);
            if v == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if v < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let r = 0.5 * (lo + hi);
        (r, r + 1.0 / z)
    }

    /// Bisection on `w` outside the support using the closed-form Hilbert
    /// transform. Bracket `[λ_max + ε, λ_max + 1/z + |m| + 1]` for `z > 0`,
    /// mirrored for `z < 0`.
    fn invert_by_hilbert_bisection(&self, z: f64) -> Result<(f64, f64)> {
        let h = |w: f64| self.measure.hilbert(w);
        let m = self.mean_m.abs();
        let (mut near, mut far) = if z > 0.0 {
            let eps = 1e-12 * (1.0 + self.lambda_max.abs());
            (self.lambda_max + eps, self.lambda_max + 1.0 / z + m + 1.0)
        } else {
            let eps = 1e-12 * (1.0 + self.lambda_min.abs());
            (self.lambda_min - eps, self.lambda_min + 1.0 / z - m - 1.0)
        };
        // |H| decreases moving away from the support on either side.
        let (h_near, h_far) = (h(near)?, h(far)?);
        if (h_near - z) * (h_far - z) > 0.0 {
            return Err(Error::NoConvergence(format!(
                "cannot bracket H(w) = {z}: H ranges over [{h_far}, {h_near}] on the search interval"
            )));
        }
        for _ in 0..MAX_BISECTION {
            let mid = 0.5 * (near + far);
            if mid == near || mid == far {
                break;
            }
            let v = h(mid)?;
            if v == z {
                near = mid;
                far = mid;
                break;
            }
            // moving outward shrinks |H|
            if (v > z) == (z > 0.0) {
                near = mid;
            } else {
                far = mid;
            }
        }
        let w = 0.5 * (near + far);
        Ok((w - 1.0 / z, w))
    }

    /// `Q_μ = R_μ⁻¹` on `(x_min, x_max)`, with `Q_μ(m) = 0`.
    pub fn q_transform(&self, x: f64) -> Result<f64> {
        if !(x > self.x_min && x < self.x_max) {
            return Err(domain(format!(
                "Q-transform argument {x} outside ({}, {})",
                self.x_min, self.x_max
            )));
        }
        if x == self.mean_m {
            return Ok(0.0);
        }
        match self.closed_form() {
            Some(MeasureKind::Semicircle) => Ok(x),
            Some(MeasureKind::TwoPoint { .. }) => Ok((x - self.mean_m) / (1.0 - x * x)),
            Some(MeasureKind::MarchenkoPastur { lambda }) => Ok(1.0 - lambda / x),
            _ => self.q_numeric(x),
        }
    }

    fn q_numeric(&self, x: f64) -> Result<f64> {
        let upward = x > self.mean_m;
        // R is increasing; a failed evaluation means we are beyond what the
        // inversion can resolve, i.e. further from 0 than the root.
        let excess = |z: f64| -> f64 {
            match self.r_transform(z) {
                Ok(r) => r - x,
                Err(_) => {
                    if z > 0.0 {
                        f64::INFINITY
                    } else {
                        f64::NEG_INFINITY
                    }
                }
            }
        };
        let edge = if upward { self.h_max } else { self.h_min };
        let (mut lo, mut hi) = if edge.is_finite() {
            if upward {
                (0.0, edge)
            } else {
                (edge, 0.0)
            }
        } else {
            let mut far = if upward { 1.0 } else { -1.0 };
            let mut tries = 0;
            while (excess(far) < 0.0) == upward {
                far *= 2.0;
                tries += 1;
                if tries > 1000 {
                    return Err(Error::NoConvergence(format!("cannot bracket Q({x})")));
                }
            }
            if upward {
                (0.0, far)
            } else {
                (far, 0.0)
            }
        };
        for _ in 0..MAX_BISECTION {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let v = excess(mid);
            if v == 0.0 {
                return Ok(mid);
            }
            if v < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// `R'_μ(z)`: closed form where available, otherwise a central difference
    /// with step `1e-6·max(1, |z|)`.
    pub fn r_derivative(&self, z: f64) -> Result<f64> {
        self.check_r_domain(z)?;
        match self.closed_form() {
            Some(MeasureKind::Semicircle) => Ok(1.0),
            Some(MeasureKind::TwoPoint { .. }) => {
                let m = self.mean_m;
                let s = (1.0 + 4.0 * z * (m + z)).sqrt();
                let ds = (2.0 * m + 4.0 * z) / s;
                Ok((2.0 * (s + 1.0) - 2.0 * (m + z) * ds) / (s + 1.0).powi(2))
            }
            Some(MeasureKind::MarchenkoPastur { lambda }) => Ok(lambda / (1.0 - z).powi(2)),
            _ => {
                let mut h = 1e-6 * z.abs().max(1.0);
                while !(self.in_r_domain(z + h) && self.in_r_domain(z - h)) {
                    h *= 0.5;
                    if h < 1e-14 {
                        return Err(domain(format!("R' at {z}: too close to the domain edge")));
                    }
                }
                Ok((self.r_transform(z + h)? - self.r_transform(z - h)?) / (2.0 * h))
            }
        }
    }

    /// `I_μ(β) = ½ ∫_0^{2β} R_μ(v) dv`, defined for `0 ≤ 2β < H_max`.
    pub fn free_energy_limit(&self, beta: f64) -> Result<f64> {
        if !(beta >= 0.0) {
            return Err(domain(format!("beta = {beta} must be nonnegative")));
        }
        if 2.0 * beta >= self.h_max {
            return Err(domain(format!(
                "2β = {} is not below H_max = {}; the free-energy formula does not apply",
                2.0 * beta,
                self.h_max
            )));
        }
        if beta == 0.0 {
            return Ok(0.0);
        }
        match self.closed_form() {
            Some(MeasureKind::Semicircle) => Ok(beta * beta),
            Some(MeasureKind::TwoPoint { .. }) => Ok(two_point_free_energy(self.mean_m, beta)),
            Some(MeasureKind::MarchenkoPastur { lambda }) => {
                Ok(-0.5 * lambda * (-2.0 * beta).ln_1p())
            }
            _ => self.free_energy_by_quadrature(beta),
        }
    }

    /// The quadrature route for `I_μ(β)`, regardless of closed forms.
    pub fn free_energy_by_quadrature(&self, beta: f64) -> Result<f64> {
        if !(beta >= 0.0) || 2.0 * beta >= self.h_max {
            return Err(domain(format!("beta = {beta} outside [0, H_max/2)")));
        }
        let integral = adaptive_simpson(
            |v| self.r_transform(v).unwrap_or(f64::NAN),
            0.0,
            2.0 * beta,
            QUAD_TOL,
            QUAD_DEPTH,
            4,
        );
        if !integral.is_finite() {
            return Err(Error::NoConvergence(format!(
                "quadrature of R over [0, {}] failed",
                2.0 * beta
            )));
        }
        Ok(0.5 * integral)
    }

    /// Window `[U_L, U_R]` and `ζ(β) = β² sup |R'|` over it.
    pub fn beta_window(&self, beta: f64) -> Result<BetaWindow> {
        if !(beta > 0.0) {
            return Err(domain(format!("beta window needs beta > 0, got {beta}")));
        }
        let t = (beta * (self.x_max - self.x_min)).tanh();
        let u_left = 2.0 * beta * (1.0 - t);
        let u_right = 2.0 * beta * (1.0 + t);
        if !self.in_r_domain(u_right) || !self.in_r_domain(u_left) {
            return Err(domain(format!(
                "window [{u_left}, {u_right}] leaves the R-transform domain ({}, {})",
                self.h_min, self.h_max
            )));
        }
        let abs_rp = |z: f64| self.r_derivative(z).map(f64::abs).unwrap_or(f64::NAN);
        let step = (u_right - u_left) / (WINDOW_GRID - 1) as f64;
        let mut best = (u_left, f64::NEG_INFINITY);
        let mut best_idx = 0;
        for i in 0..WINDOW_GRID {
            let z = if i + 1 == WINDOW_GRID {
                u_right
            } else {
                u_left + i as f64 * step
            };
            let v = abs_rp(z);
            if !v.is_finite() {
                return Err(Error::NoConvergence(format!("R' not finite at {z}")));
            }
            if v > best.1 {
                best = (z, v);
                best_idx = i;
            }
        }
        let a = u_left + best_idx.saturating_sub(1) as f64 * step;
        let b = (u_left + (best_idx + 1) as f64 * step).min(u_right);
        let (_, polished) = golden_section_max(abs_rp, a, b, 1e-12 * (1.0 + b.abs()), 200);
        let sup = if polished.is_finite() {
            best.1.max(polished)
        } else {
            best.1
        };
        Ok(BetaWindow {
            beta,
            u_left,
            u_right,
            zeta: beta * beta * sup,
        })
    }

    /// Second-order expansion `mβ + σ²β²` of `I_μ(β)`.
    pub fn small_beta_series(&self, beta: f64) -> f64 {
        self.mean_m * beta + self.variance * beta * beta
    }
}

/// Closed antiderivative of `½ ∫_0^{2β} (√(1 + 4z(m+z)) - 1)/(2z) dz`.
fn two_point_free_energy(m: f64, beta: f64) -> f64 {
    let anti = |z: f64| {
        let s = (1.0 + 4.0 * z * (m + z)).sqrt();
        0.5 * (s + m * (s + 2.0 * z + m).ln() - (s + 2.0 * m * z + 1.0).ln())
    };
    0.5 * (anti(2.0 * beta) - anti(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sc() -> TransformProfile {
        TransformProfile::new(SpectralMeasure::semicircle())
    }
    fn rom_half() -> TransformProfile {
        TransformProfile::new(SpectralMeasure::two_point(0.5).unwrap())
    }
    fn mp2() -> TransformProfile {
        TransformProfile::new(SpectralMeasure::marchenko_pastur(2.0).unwrap())
    }

    #[test]
    fn edge_data() {
        let p = sc();
        assert_eq!((p.x_min(), p.x_max()), (-1.0, 1.0));
        let p = rom_half();
        assert_eq!((p.x_min(), p.x_max()), (-1.0, 1.0));
        let p = mp2();
        let s = 2f64.sqrt();
        assert!((p.x_max() - (2.0 + s)).abs() < 1e-12);
        assert!((p.x_min() - (2.0 - s)).abs() < 1e-12);
        assert!(p.x_min() < p.mean() && p.mean() < p.x_max());
    }

    #[test]
    fn r_transform_examples() {
        assert_eq!(sc().r_transform(0.3).unwrap(), 0.3);
        assert!((rom_half().r_transform(0.5).unwrap() - (2f64.sqrt() - 1.0)).abs() < 1e-15);
        assert!((mp2().r_transform(0.5).unwrap_err().to_string()).contains("outside"));
        let mp_wide = TransformProfile::new(SpectralMeasure::marchenko_pastur(2.0).unwrap());
        assert!((mp_wide.r_transform(0.2).unwrap() - 2.5).abs() < 1e-15);
        assert_eq!(mp2().r_transform(0.0).unwrap(), 2.0);
        assert!(sc().r_transform(1.0).is_err());
        assert!(sc().r_transform(f64::NAN).is_err());
    }

    #[test]
    fn k_transform_inverts_hilbert() {
        assert!((sc().k_transform(0.5).unwrap() - 2.5).abs() < 1e-15);
        assert!((sc().hilbert(2.5).unwrap() - 0.5).abs() < 1e-15);
        assert!((rom_half().k_transform(2.0 / 3.0).unwrap() - 2.0).abs() < 1e-14);
        let near_edge = sc().k_transform(1.0 - 1e-9).unwrap();
        assert!((near_edge - 2.0).abs() < 1e-8);
        assert!(sc().k_transform(0.0).is_err());
    }

    #[test]
    fn q_transform_examples() {
        assert_eq!(sc().q_transform(0.7).unwrap(), 0.7);
        assert!((rom_half().q_transform(2f64.sqrt() - 1.0).unwrap() - 0.5).abs() < 1e-14);
        for p in [sc(), rom_half(), mp2()] {
            assert_eq!(p.q_transform(p.mean()).unwrap(), 0.0);
            assert!(p.q_transform(p.x_max()).is_err());
        }
    }

    #[test]
    fn numeric_paths_agree_with_closed_forms() {
        for m in [
            SpectralMeasure::semicircle(),
            SpectralMeasure::two_point(0.3).unwrap(),
            SpectralMeasure::marchenko_pastur(2.0).unwrap(),
        ] {
            let closed = TransformProfile::new(m.clone());
            let numeric = TransformProfile::numeric(m);
            let hi = closed.h_max().min(3.0);
            let lo = closed.h_min().max(-3.0);
            for k in 1..20 {
                let z = lo + (hi - lo) * k as f64 / 20.0;
                if z == 0.0 {
                    continue;
                }
                let a = closed.r_transform(z).unwrap();
                let b = numeric.r_transform(z).unwrap();
                assert!((a - b).abs() < 1e-9, "z={z}: {a} vs {b}");
                let da = closed.r_derivative(z).unwrap();
                let db = numeric.r_derivative(z).unwrap();
                assert!((da - db).abs() < 1e-5, "R' at {z}: {da} vs {db}");
            }
        }
    }

    #[test]
    fn atomic_inversion_is_precise_near_zero() {
        let p = TransformProfile::new(
            SpectralMeasure::discrete(vec![(-1.0, 0.2), (0.0, 0.3), (0.5, 0.1), (2.0, 0.4)])
                .unwrap(),
        );
        let m = p.mean();
        let var = p.variance();
        for z in [1e-9, -1e-9, 1e-6] {
            let r = p.r_transform(z).unwrap();
            assert!((r - (m + var * z)).abs() < 1e-10, "z={z}");
        }
    }

    #[test]
    fn free_energy_examples() {
        assert!((sc().free_energy_limit(0.3).unwrap() - 0.09).abs() < 1e-15);
        for p in [sc(), rom_half(), mp2()] {
            assert_eq!(p.free_energy_limit(0.0).unwrap(), 0.0);
        }
        let expected = 0.25 * (2f64.sqrt() + ((2f64.sqrt() - 1.0) / 0.5).ln() - 1.0);
        assert!((rom_half().free_energy_limit(0.25).unwrap() - expected).abs() < 1e-14);
        // 2β = 0.5 exceeds H_max = 1/(1+√2) for λ = 2
        assert!(mp2().free_energy_limit(0.25).is_err());
        assert!(sc().free_energy_limit(0.5).is_err());
        assert!(sc().free_energy_limit(-0.1).is_err());
    }

    #[test]
    fn two_point_antiderivative_matches_quadrature() {
        for p in [0.2, 0.5, 0.9] {
            let prof = TransformProfile::new(SpectralMeasure::two_point(p).unwrap());
            for beta in [0.01, 0.3, 1.5] {
                let closed = prof.free_energy_limit(beta).unwrap();
                let quad = prof.free_energy_by_quadrature(beta).unwrap();
                assert!((closed - quad).abs() < 1e-10, "p={p} beta={beta}");
            }
        }
    }

    #[test]
    fn window_examples() {
        let w = sc().beta_window(0.2).unwrap();
        assert!((w.zeta - 0.04).abs() < 1e-15);
        assert!(w.u_left <= 0.4 && 0.4 <= w.u_right);
        let w = mp2().beta_window(0.1).unwrap();
        let expected = 0.01 * 2.0 / (1.0 - w.u_right).powi(2);
        assert!((w.zeta - expected).abs() < 1e-12);
        assert!(sc().beta_window(0.4).is_err());
        assert!(sc().beta_window(0.0).is_err());
    }

    #[test]
    fn small_beta_examples() {
        assert!((sc().small_beta_series(0.05) - 0.0025).abs() < 1e-16);
        assert!((rom_half().small_beta_series(0.05) - 0.0025).abs() < 1e-16);
        assert_eq!(mp2().small_beta_series(0.0), 0.0);
    }
}
