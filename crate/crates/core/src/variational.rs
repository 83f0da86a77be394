//! Two-replica second-moment problem: the rate function `T_μ`, the objective
//! `ψ(x,y) = F(x,y) - T_μ(x) - T_μ(y)`, the stationarity fixed point and the
//! replica-symmetry threshold `β₀`.

use nalgebra::{Matrix2, Vector2};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::numerics::golden_section_max;
use crate::spectral::TransformProfile;

const H_X_TOL: f64 = 1e-10;
const FIXED_POINT_STEP_TOL: f64 = 1e-12;
const FIXED_POINT_RESIDUAL_TOL: f64 = 1e-11;
const FIXED_POINT_MAX_ITER: usize = 10_000;
const GRID: usize = 64;
const MAX_STARTS: usize = 8;
const SYMMETRY_TOL: f64 = 1e-6;
const VALUE_TOL: f64 = 1e-8;
const BETA_ZERO_TOL: f64 = 1e-3;

/// `h_x(κ) = ∫ log((κ - λ)/(κ - x)) dμ(λ)` for `κ` outside the open support.
pub fn h_x(profile: &TransformProfile, x: f64, kappa: f64) -> Result<f64> {
    let (lo, hi) = (profile.lambda_min(), profile.lambda_max());
    if kappa > lo && kappa < hi {
        return Err(domain(format!(
            "kappa = {kappa} lies inside the support ({lo}, {hi})"
        )));
    }
    let above = kappa >= hi;
    if (above && !(x < kappa)) || (!above && !(x > kappa)) {
        return Err(domain(format!(
            "h_x: x = {x} on the wrong side of kappa = {kappa}"
        )));
    }
    let shift = (kappa - x).abs().ln();
    Ok(profile
        .measure()
        .expectation_with_tol(|l| (kappa - l).abs().ln() - shift, H_X_TOL))
}

/// The large-deviation rate function `T_μ` together with its first two derivatives.
///
/// On `(x_min, x_max)` it is `½ h_x(K(Q(x)))`; between `x_max` and `λ_max` it
/// is the edge limit `½ h_x(λ_max)` (mirrored at the lower edge); it is `+∞`
/// outside the open support.
#[derive(Debug, Clone)]
pub struct RateFunction {
    profile: TransformProfile,
    upper_potential: f64,
    lower_potential: f64,
}

impl RateFunction {
    pub fn new(profile: TransformProfile) -> Self {
        let (lo, hi) = (profile.lambda_min(), profile.lambda_max());
        let m = profile.measure();
        let upper_potential = if profile.x_max() < hi {
            m.expectation_with_tol(|l| (hi - l).ln(), H_X_TOL)
        } else {
            f64::NAN
        };
        let lower_potential = if profile.x_min() > lo {
            m.expectation_with_tol(|l| (l - lo).ln(), H_X_TOL)
        } else {
            f64::NAN
        };
        Self {
            profile,
            upper_potential,
            lower_potential,
        }
    }

    pub fn profile(&self) -> &TransformProfile {
        &self.profile
    }

    fn in_middle(&self, x: f64) -> bool {
        x > self.profile.x_min() && x < self.profile.x_max()
    }

    fn in_support(&self, x: f64) -> bool {
        x > self.profile.lambda_min() && x < self.profile.lambda_max()
    }

    /// `T_μ(x)`.
    pub fn value(&self, x: f64) -> f64 {
        let p = &self.profile;
        if !self.in_support(x) {
            return f64::INFINITY;
        }
        if x == p.mean() {
            return 0.0;
        }
        if self.in_middle(x) {
            return match p.q_transform(x) {
                Ok(q) => {
                    0.5 * p
                        .measure()
                        .expectation_with_tol(|l| (q * (x - l)).ln_1p(), H_X_TOL)
                }
                Err(_) => f64::NAN,
            };
        }
        if x >= p.x_max() {
            0.5 * (self.upper_potential - (p.lambda_max() - x).ln())
        } else {
            0.5 * (self.lower_potential - (x - p.lambda_min()).ln())
        }
    }

    /// `T'_μ(x)`: `Q(x)/2` in the middle branch, `1/(2(λ_max - x))` and
    /// `-1/(2(x - λ_min))` in the outer bands.
    pub fn derivative(&self, x: f64) -> f64 {
        let p = &self.profile;
        if !self.in_support(x) {
            return f64::NAN;
        }
        if self.in_middle(x) {
            p.q_transform(x).map(|q| 0.5 * q).unwrap_or(f64::NAN)
        } else if x >= p.x_max() {
            0.5 / (p.lambda_max() - x)
        } else {
            -0.5 / (x - p.lambda_min())
        }
    }

    /// `T''_μ(x)`: `1/(2R'(Q(x)))` in the middle branch.
    pub fn second_derivative(&self, x: f64) -> f64 {
        let p = &self.profile;
        if !self.in_support(x) {
            return f64::NAN;
        }
        if self.in_middle(x) {
            p.q_transform(x)
                .and_then(|q| p.r_derivative(q))
                .map(|rp| 0.5 / rp)
                .unwrap_or(f64::NAN)
        } else if x >= p.x_max() {
            0.5 / (p.lambda_max() - x).powi(2)
        } else {
            0.5 / (x - p.lambda_min()).powi(2)
        }
    }

    /// `ψ(x,y) = β(x+y) + log cosh β(x-y) - T(x) - T(y)`; `-∞` off the support square.
    pub fn psi(&self, beta: f64, x: f64, y: f64) -> f64 {
        let tx = self.value(x);
        let ty = self.value(y);
        if tx.is_infinite() || ty.is_infinite() {
            return f64::NEG_INFINITY;
        }
        beta * (x + y) + log_cosh(beta * (x - y)) - (tx + ty)
    }

    pub fn grad_psi(&self, beta: f64, x: f64, y: f64) -> [f64; 2] {
        let t = (beta * (x - y)).tanh();
        [
            beta + beta * t - self.derivative(x),
            beta - beta * t - self.derivative(y),
        ]
    }

    pub fn hessian_psi(&self, beta: f64, x: f64, y: f64) -> [[f64; 2]; 2] {
        let c = beta * beta * sech2(beta * (x - y));
        [
            [c - self.second_derivative(x), -c],
            [-c, c - self.second_derivative(y)],
        ]
    }

    /// `a(β) = R(2β)`, the symmetric stationary point, when `2β` is in the R-domain.
    pub fn symmetric_point(&self, beta: f64) -> Option<f64> {
        self.profile.r_transform(2.0 * beta).ok()
    }

    /// `2(β a - T(a))`, the value of `ψ` at the symmetric stationary point.
    pub fn symmetric_value(&self, beta: f64) -> Option<f64> {
        let a = self.symmetric_point(beta)?;
        Some(2.0 * (beta * a - self.value(a)))
    }

    /// Max-norm residual of `(x, y) = G(x, y)`, or `None` if `G` is undefined there.
    pub fn fixed_point_residual(&self, beta: f64, x: f64, y: f64) -> Option<f64> {
        let (gx, gy) = self.g_map(beta, x, y).ok()?;
        Some((gx - x).abs().max((gy - y).abs()))
    }

    fn g_map(&self, beta: f64, x: f64, y: f64) -> Result<(f64, f64)> {
        let t = (beta * (x - y)).tanh();
        let p = &self.profile;
        Ok((
            p.r_transform(2.0 * beta * (1.0 + t))?,
            p.r_transform(2.0 * beta * (1.0 - t))?,
        ))
    }
}

fn log_cosh(t: f64) -> f64 {
    let a = t.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

fn sech2(t: f64) -> f64 {
    let c = t.cosh();
    if c.is_finite() {
        1.0 / (c * c)
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    /// Negative definite Hessian.
    LocalMax,
    /// One eigenvalue of each sign.
    Saddle,
    /// Any other case: semidefinite, positive definite or not finite.
    Indefinite,
}

pub fn classify(h: &[[f64; 2]; 2]) -> Classification {
    let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
    if !det.is_finite() || !h[0][0].is_finite() {
        Classification::Indefinite
    } else if h[0][0] < 0.0 && det > 0.0 {
        Classification::LocalMax
    } else if det < 0.0 {
        Classification::Saddle
    } else {
        Classification::Indefinite
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariationalSolution {
    pub x_star: f64,
    pub y_star: f64,
    #[serde(rename = "psi")]
    pub psi_value: f64,
    pub hessian: [[f64; 2]; 2],
    pub hessian_eigenvalues: [f64; 2],
    pub classification: Classification,
    pub iterations: usize,
    pub converged: bool,
    /// Lipschitz bound `4ζ(β)` of the fixed-point map in the `d₁` metric,
    /// when the window around `2β` is inside the R-domain.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub contraction_factor: Option<f64>,
}

impl VariationalSolution {
    fn at(
        rf: &RateFunction,
        beta: f64,
        x: f64,
        y: f64,
        iterations: usize,
        converged: bool,
    ) -> Self {
        let hessian = rf.hessian_psi(beta, x, y);
        let eig = Matrix2::new(hessian[0][0], hessian[0][1], hessian[1][0], hessian[1][1])
            .symmetric_eigenvalues();
        let (e0, e1) = (eig[0].min(eig[1]), eig[0].max(eig[1]));
        Self {
            x_star: x,
            y_star: y,
            psi_value: rf.psi(beta, x, y),
            hessian,
            hessian_eigenvalues: [e0, e1],
            classification: classify(&hessian),
            iterations,
            converged,
            contraction_factor: contraction_factor(rf, beta),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("solution serializes")
    }
}

fn contraction_factor(rf: &RateFunction, beta: f64) -> Option<f64> {
    if beta == 0.0 {
        return Some(0.0);
    }
    rf.profile.beta_window(beta).ok().map(|w| 4.0 * w.zeta)
}

/// Iterates `G(x,y) = (R(2β(1 + tanh β(x-y))), R(2β(1 - tanh β(x-y))))`
/// from `(m + 0.01(x_max - m), m)`.
///
/// The iteration is plain until the step length grows twice in a row, after
/// which it is damped by ½. Errors if an iterate leaves the R-domain or the
/// iteration cap is reached. A contraction factor `≥ 1` is reported in the
/// solution but does not stop the iteration.
pub fn solve_fixed_point(rf: &RateFunction, beta: f64) -> Result<VariationalSolution> {
    if !(beta >= 0.0) {
        return Err(domain(format!("beta = {beta} must be nonnegative")));
    }
    let p = &rf.profile;
    let m = p.mean();
    let x_top = if p.x_max().is_finite() {
        p.x_max()
    } else {
        m + 1.0
    };
    let (x0, y0) = (m + 0.01 * (x_top - m), m);
    iterate_fixed_point(rf, beta, x0, y0)
}

/// The fixed-point iteration from an arbitrary start.
pub fn iterate_fixed_point(
    rf: &RateFunction,
    beta: f64,
    x0: f64,
    y0: f64,
) -> Result<VariationalSolution> {
    let (mut x, mut y) = (x0, y0);
    let mut damping = 1.0;
    let mut prev_step = f64::INFINITY;
    let mut growth = 0;
    for it in 1..=FIXED_POINT_MAX_ITER {
        let (gx, gy) = rf.g_map(beta, x, y)?;
        let (nx, ny) = (x + damping * (gx - x), y + damping * (gy - y));
        let step = (nx - x).abs().max((ny - y).abs());
        x = nx;
        y = ny;
        if step < FIXED_POINT_STEP_TOL {
            let residual = rf.fixed_point_residual(beta, x, y).unwrap_or(f64::INFINITY);
            return Ok(VariationalSolution::at(
                rf,
                beta,
                x,
                y,
                it,
                residual < FIXED_POINT_RESIDUAL_TOL,
            ));
        }
        if step > prev_step {
            growth += 1;
            if growth >= 2 && damping == 1.0 {
                damping = 0.5;
            }
        } else {
            growth = 0;
        }
        prev_step = step;
    }
    Err(Error::NoConvergence(format!(
        "fixed-point iteration at beta = {beta} did not settle in {FIXED_POINT_MAX_ITER} steps"
    )))
}

/// Global maximization of `ψ` over the support square.
///
/// `ψ` is tabulated on the cell centres of a 64×64 grid (the rate function is
/// separable, so this needs only 64 evaluations of `T`). The best grid local
/// maxima, plus the symmetric stationary point when it exists, seed
/// coordinate-wise golden-section ascent followed by a guarded Newton polish.
/// Ties between candidates go to the lexicographically smaller `(x, y)`.
pub fn maximize_psi(rf: &RateFunction, beta: f64) -> Result<VariationalSolution> {
    if !(beta >= 0.0) {
        return Err(domain(format!("beta = {beta} must be nonnegative")));
    }
    let p = &rf.profile;
    let (lo, hi) = (p.lambda_min(), p.lambda_max());
    let h = (hi - lo) / GRID as f64;
    let nodes: Vec<f64> = (0..GRID).map(|i| lo + (i as f64 + 0.5) * h).collect();
    let t: Vec<f64> = nodes.iter().map(|&x| rf.value(x)).collect();
    let table = |i: usize, j: usize| {
        beta * (nodes[i] + nodes[j]) + log_cosh(beta * (nodes[i] - nodes[j])) - t[i] - t[j]
    };

    let mut seeds: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..GRID {
        for j in 0..GRID {
            let v = table(i, j);
            if !v.is_finite() {
                continue;
            }
            let mut is_peak = true;
            'nb: for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    let (a, b) = (i as i64 + di, j as i64 + dj);
                    if (di, dj) == (0, 0) || a < 0 || b < 0 || a >= GRID as i64 || b >= GRID as i64
                    {
                        continue;
                    }
                    if table(a as usize, b as usize) > v {
                        is_peak = false;
                        break 'nb;
                    }
                }
            }
            if is_peak {
                seeds.push((v, i, j));
            }
        }
    }
    seeds.sort_by(|a, b| b.0.total_cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    seeds.truncate(MAX_STARTS);
    let mut starts: Vec<(f64, f64)> = seeds
        .iter()
        .map(|&(_, i, j)| (nodes[i], nodes[j]))
        .collect();
    if let Some(a) = rf.symmetric_point(beta) {
        if a > lo && a < hi {
            starts.push((a, a));
        }
    }
    if starts.is_empty() {
        starts.push((p.mean(), p.mean()));
    }

    let candidates: Vec<(f64, f64, f64, usize)> = starts
        .par_iter()
        .map(|&(x, y)| local_ascent(rf, beta, x, y, h))
        .collect();
    let best = candidates
        .into_iter()
        .filter(|c| c.2.is_finite())
        .reduce(|a, b| match b.2.total_cmp(&a.2) {
            std::cmp::Ordering::Greater => b,
            std::cmp::Ordering::Less => a,
            std::cmp::Ordering::Equal => {
                if (b.0, b.1) < (a.0, a.1) {
                    b
                } else {
                    a
                }
            }
        })
        .ok_or_else(|| {
            Error::NoConvergence(format!("no finite value of psi found at beta = {beta}"))
        })?;
    let (x, y, _, iterations) = best;
    let g = rf.grad_psi(beta, x, y);
    let converged = g[0].abs().max(g[1].abs()) < 1e-7;
    Ok(VariationalSolution::at(
        rf, beta, x, y, iterations, converged,
    ))
}

/// Coordinate golden section in a moving bracket of half-width `h`, then Newton.
fn local_ascent(rf: &RateFunction, beta: f64, x0: f64, y0: f64, h: f64) -> (f64, f64, f64, usize) {
    let p = &rf.profile;
    let (lo, hi) = (p.lambda_min(), p.lambda_max());
    let (mut x, mut y) = (x0, y0);
    let mut value = rf.psi(beta, x, y);
    let mut iterations = 0;

    let line_max = |f: &dyn Fn(f64) -> f64, c: f64| -> (f64, f64) {
        let mut centre = c;
        let mut best = (c, f(c));
        for _ in 0..64 {
            let a = (centre - h).max(lo);
            let b = (centre + h).min(hi);
            let (u, fu) = golden_section_max(f, a, b, 1e-13 * (1.0 + centre.abs()), 200);
            if fu > best.1 {
                best = (u, fu);
            }
            let edge = 1e-6 * h;
            let pinned_low = u - a < edge && a > lo;
            let pinned_high = b - u < edge && b < hi;
            if !(pinned_low || pinned_high) {
                break;
            }
            centre = u;
        }
        best
    };

    for _ in 0..200 {
        iterations += 1;
        let yy = y;
        let (nx, _) = line_max(&|s| rf.psi(beta, s, yy), x);
        let xx = nx;
        let (ny, nv) = line_max(&|s| rf.psi(beta, xx, s), y);
        let moved = (nx - x).abs().max((ny - y).abs());
        if nv >= value {
            x = nx;
            y = ny;
            value = nv;
        }
        if moved < 1e-9 {
            break;
        }
    }

    for _ in 0..50 {
        let g = rf.grad_psi(beta, x, y);
        if !(g[0].is_finite() && g[1].is_finite()) || g[0].abs().max(g[1].abs()) < 1e-13 {
            break;
        }
        let hm = rf.hessian_psi(beta, x, y);
        let hmat = Matrix2::new(hm[0][0], hm[0][1], hm[1][0], hm[1][1]);
        if classify(&hm) != Classification::LocalMax {
            break;
        }
        let Some(step) = hmat.lu().solve(&Vector2::new(-g[0], -g[1])) else {
            break;
        };
        let gnorm = g[0].abs().max(g[1].abs());
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let (nx, ny) = (x + scale * step[0], y + scale * step[1]);
            if nx > lo && nx < hi && ny > lo && ny < hi {
                let nv = rf.psi(beta, nx, ny);
                let ng = rf.grad_psi(beta, nx, ny);
                // T carries quadrature noise near 1e-11, so close to the
                // optimum a shrinking gradient is the better acceptance test.
                let flatter = ng[0].abs().max(ng[1].abs()) < gnorm && nv >= value - 1e-10;
                if nv >= value || flatter {
                    x = nx;
                    y = ny;
                    value = nv;
                    accepted = true;
                    break;
                }
            }
            scale *= 0.5;
        }
        iterations += 1;
        if !accepted {
            break;
        }
    }
    (x, y, value, iterations)
}

/// Whether the global maximizer at `β` is the symmetric point `(a, a)` with
/// `a = R(2β)`, both in position and in value. False when `a` is undefined.
pub fn replica_symmetric(rf: &RateFunction, beta: f64) -> Result<bool> {
    let Some(target) = rf.symmetric_value(beta) else {
        return Ok(false);
    };
    let sol = maximize_psi(rf, beta)?;
    Ok(
        (sol.x_star - sol.y_star).abs() < SYMMETRY_TOL
            && (sol.psi_value - target).abs() < VALUE_TOL,
    )
}

/// Bisection for the point where [`replica_symmetric`] changes value on
/// `(lo, hi)`, to within `1e-3`.
pub fn beta_zero(rf: &RateFunction, interval: (f64, f64)) -> Result<f64> {
    let (mut lo, mut hi) = interval;
    if !(lo >= 0.0 && hi > lo) {
        return Err(domain(format!(
            "search interval ({lo}, {hi}) must satisfy 0 <= lo < hi"
        )));
    }
    let at_lo = replica_symmetric(rf, lo)?;
    let at_hi = replica_symmetric(rf, hi)?;
    if at_lo == at_hi {
        return Err(Error::NoTransition {
            lo,
            hi,
            value: at_lo,
        });
    }
    while hi - lo > BETA_ZERO_TOL {
        let mid = 0.5 * (lo + hi);
        if replica_symmetric(rf, mid)? == at_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::SpectralMeasure;
    use proptest::prelude::*;

    fn sk() -> RateFunction {
        RateFunction::new(TransformProfile::new(SpectralMeasure::semicircle()))
    }
    fn rom() -> RateFunction {
        RateFunction::new(TransformProfile::new(
            SpectralMeasure::two_point(0.5).unwrap(),
        ))
    }
    fn mp() -> RateFunction {
        RateFunction::new(TransformProfile::new(
            SpectralMeasure::marchenko_pastur(2.0).unwrap(),
        ))
    }

    #[test]
    fn h_x_examples() {
        let delta = TransformProfile::new(SpectralMeasure::discrete(vec![(0.0, 1.0)]).unwrap());
        assert_eq!(h_x(&delta, 0.0, 2.0).unwrap(), 0.0);
        let rom = TransformProfile::new(SpectralMeasure::two_point(0.5).unwrap());
        let want = 0.5 * (1.0f64 / 2.0).ln() + 0.5 * (3.0f64 / 2.0).ln();
        assert!((h_x(&rom, 0.0, 2.0).unwrap() - want).abs() < 1e-15);
        let sc = TransformProfile::new(SpectralMeasure::semicircle());
        assert!(h_x(&sc, 0.0, 1e8).unwrap().abs() < 1e-8);
        assert!(h_x(&sc, 0.0, 1.0).is_err());
        assert!(h_x(&sc, 3.0, 2.5).is_err());
    }

    #[test]
    fn sk_rate_function() {
        let rf = sk();
        assert_eq!(rf.value(0.0), 0.0);
        for &x in &[-0.9, -0.3, 0.5, 1.0 - 1e-9] {
            assert!((rf.value(x) - x * x / 4.0).abs() < 1e-9, "x = {x}");
        }
        for &x in &[1.0, 1.5, 1.99] {
            assert!(
                (rf.value(x) - (0.25 - 0.5 * (2.0 - x).ln())).abs() < 1e-9,
                "x = {x}"
            );
            assert!((rf.value(-x) - rf.value(x)).abs() < 1e-9);
        }
        assert_eq!(rf.value(2.0), f64::INFINITY);
        assert_eq!(rf.value(-2.5), f64::INFINITY);
    }

    #[test]
    fn rom_rate_function() {
        let rf = rom();
        assert!((rf.value(0.6) - 0.111572).abs() < 1e-6);
        for &x in &[-0.95, -0.2, 0.3, 0.99] {
            assert!((rf.value(x) + 0.25 * (1.0 - x * x).ln()).abs() < 1e-13);
        }
    }

    #[test]
    fn seams_are_continuous() {
        for rf in [sk(), mp()] {
            let p = rf.profile().clone();
            for edge in [p.x_min(), p.x_max()] {
                let inside = if edge == p.x_max() {
                    edge - 1e-10
                } else {
                    edge + 1e-10
                };
                assert!((rf.value(inside) - rf.value(edge)).abs() < 1e-8);
                assert!((rf.derivative(inside) - rf.derivative(edge)).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn psi_examples() {
        let rf = sk();
        assert!((rf.psi(0.3, 0.6, 0.6) - 0.18).abs() < 1e-12);
        assert!((rf.psi(0.0, 0.4, -0.2) + rf.value(0.4) + rf.value(-0.2)).abs() < 1e-15);
        assert_eq!(rf.psi(0.3, 2.0, 0.0), f64::NEG_INFINITY);
        let rom = rom();
        let a = 2f64.sqrt() - 1.0;
        let i = rom.profile().free_energy_limit(0.25).unwrap();
        assert!((rom.psi(0.25, a, a) - 2.0 * i).abs() < 1e-12);
    }

    #[test]
    fn fixed_point_examples() {
        let s = solve_fixed_point(&sk(), 0.3).unwrap();
        assert!(s.converged);
        assert!((s.x_star - 0.6).abs() < 1e-11 && (s.y_star - 0.6).abs() < 1e-11);
        assert_eq!(s.classification, Classification::LocalMax);
        let z = solve_fixed_point(&rom(), 0.0).unwrap();
        assert_eq!((z.x_star, z.y_star), (0.0, 0.0));
        let r = solve_fixed_point(&rom(), 0.25).unwrap();
        let a = 2f64.sqrt() - 1.0;
        assert!((r.x_star - a).abs() < 1e-11 && (r.y_star - a).abs() < 1e-11);
        assert!(
            rom()
                .fixed_point_residual(0.25, r.x_star, r.y_star)
                .unwrap()
                < 1e-11
        );
    }

    #[test]
    fn contraction_from_two_starts() {
        let rf = mp();
        let a = iterate_fixed_point(&rf, 0.05, 1.5, 3.0).unwrap();
        let b = iterate_fixed_point(&rf, 0.05, 4.0, 2.2).unwrap();
        assert!(a.contraction_factor.unwrap() < 1.0);
        assert!((a.x_star - b.x_star).abs() < 1e-9 && (a.y_star - b.y_star).abs() < 1e-9);
    }

    #[test]
    fn maximize_examples() {
        let s = maximize_psi(&sk(), 0.3).unwrap();
        assert!((s.psi_value - 0.18).abs() < 1e-9);
        assert!((s.x_star - 0.6).abs() < 1e-6 && (s.y_star - 0.6).abs() < 1e-6);
        let z = maximize_psi(&rom(), 0.0).unwrap();
        assert!(z.psi_value.abs() < 1e-12 && z.x_star.abs() < 1e-6);
        let hot = maximize_psi(&sk(), 0.6).unwrap();
        assert!(hot.psi_value > 2.0 * 0.36 || (hot.x_star - hot.y_star).abs() > 1e-3);
    }

    #[test]
    fn json_shape() {
        let s = solve_fixed_point(&sk(), 0.2).unwrap();
        let v: serde_json::Value = serde_json::from_str(&s.to_json()).unwrap();
        for key in [
            "x_star",
            "y_star",
            "psi",
            "hessian",
            "classification",
            "iterations",
            "converged",
        ] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["classification"], "LocalMax");
    }

    #[test]
    fn no_transition_on_tiny_interval() {
        assert!(matches!(
            beta_zero(&sk(), (0.1, 0.1005)),
            Err(Error::NoTransition { value: true, .. })
        ));
    }

    #[test]
    fn classification_cases() {
        assert_eq!(
            classify(&[[-1.0, 0.0], [0.0, -2.0]]),
            Classification::LocalMax
        );
        assert_eq!(classify(&[[-1.0, 0.0], [0.0, 2.0]]), Classification::Saddle);
        assert_eq!(
            classify(&[[1.0, 0.0], [0.0, 2.0]]),
            Classification::Indefinite
        );
        assert_eq!(
            classify(&[[0.0, 0.0], [0.0, -1.0]]),
            Classification::Indefinite
        );
    }

    proptest! {
        #[test]
        fn psi_is_symmetric(x in -1.99f64..1.99, y in -1.99f64..1.99, beta in 0.0f64..1.0) {
            let rf = sk();
            prop_assert_eq!(rf.psi(beta, x, y), rf.psi(beta, y, x));
        }

        #[test]
        fn rate_is_nonnegative(x in 0.2f64..5.7) {
            let rf = mp();
            prop_assert!(rf.value(x) >= -1e-12);
        }

        #[test]
        fn rate_derivative_matches_half_q(x in -0.9f64..0.9) {
            let rf = sk();
            let h = 1e-5;
            let fd = (rf.value(x + h) - rf.value(x - h)) / (2.0 * h);
            prop_assert!((fd - 0.5 * x).abs() < 1e-6);
        }
    }
}
