use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::numerics::{adaptive_simpson, bisect_increasing};

/// Family of a compactly supported spectral measure.
#[derive(Debug, Clone, PartialEq)]
pub enum MeasureKind {
    /// Wigner semicircle law on [-2, 2].
    Semicircle,
    /// `p δ_{+1} + (1 - p) δ_{-1}`.
    TwoPoint { p: f64 },
    /// Marchenko-Pastur (free Poisson) law with rate `lambda > 1` and unit jump,
    /// supported on `[(1 - √λ)², (1 + √λ)²]`.
    MarchenkoPastur { lambda: f64 },
    /// Finitely many atoms `(location, weight)`, sorted by location.
    Discrete { atoms: Vec<(f64, f64)> },
}

/// A validated compactly supported probability measure on the real line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureRepr", into = "MeasureRepr")]
pub struct SpectralMeasure {
    kind: MeasureKind,
}

/// JSON form: `{"kind": "semicircle" | "two_point" | "marchenko_pastur" | "discrete", ...}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum MeasureRepr {
    Semicircle,
    TwoPoint { p: f64 },
    MarchenkoPastur { lambda: f64 },
    Discrete { atoms: Vec<(f64, f64)> },
}

impl TryFrom<MeasureRepr> for SpectralMeasure {
    type Error = Error;

    fn try_from(repr: MeasureRepr) -> Result<Self> {
        match repr {
            MeasureRepr::Semicircle => Ok(Self::semicircle()),
            MeasureRepr::TwoPoint { p } => Self::two_point(p),
            MeasureRepr::MarchenkoPastur { lambda } => Self::marchenko_pastur(lambda),
            MeasureRepr::Discrete { atoms } => Self::discrete(atoms),
        }
    }
}

impl From<SpectralMeasure> for MeasureRepr {
    fn from(m: SpectralMeasure) -> Self {
        match m.kind {
            MeasureKind::Semicircle => MeasureRepr::Semicircle,
            MeasureKind::TwoPoint { p } => MeasureRepr::TwoPoint { p },
            MeasureKind::MarchenkoPastur { lambda } => MeasureRepr::MarchenkoPastur { lambda },
            MeasureKind::Discrete { atoms } => MeasureRepr::Discrete { atoms },
        }
    }
}

const WEIGHT_SUM_TOL: f64 = 1e-12;
const EXPECTATION_TOL: f64 = 1e-13;

impl SpectralMeasure {
    pub fn semicircle() -> Self {
        Self {
            kind: MeasureKind::Semicircle,
        }
    }

    pub fn two_point(p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidMeasure(format!(
                "two_point: p = {p} must lie in (0, 1)"
            )));
        }
        Ok(Self {
            kind: MeasureKind::TwoPoint { p },
        })
    }

    pub fn marchenko_pastur(lambda: f64) -> Result<Self> {
        if !(lambda > 1.0 && lambda.is_finite()) {
            return Err(Error::InvalidMeasure(format!(
                "marchenko_pastur: lambda = {lambda} must be finite and > 1"
            )));
        }
        Ok(Self {
            kind: MeasureKind::MarchenkoPastur { lambda },
        })
    }

    /// Atoms are sorted by location; weights must be positive and sum to one.
    pub fn discrete(mut atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidMeasure("discrete: no atoms".into()));
        }
        for &(loc, w) in &atoms {
            if !loc.is_finite() {
                return Err(Error::InvalidMeasure(format!(
                    "discrete: non-finite location {loc}"
                )));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidMeasure(format!(
                    "discrete: weight {w} at {loc} must be positive"
                )));
            }
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidMeasure(format!(
                "discrete: weights sum to {total}, not 1"
            )));
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self {
            kind: MeasureKind::Discrete { atoms },
        })
    }

    /// Empirical measure of `values`, each with weight `1/n`.
    pub fn empirical(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidMeasure("empirical: no values".into()));
        }
        let w = 1.0 / values.len() as f64;
        let mut atoms: Vec<(f64, f64)> = values.iter().map(|&v| (v, w)).collect();
        // Repeated summation of 1/n can drift by a few ulps; absorb it in the last atom.
        let drift = 1.0 - atoms.iter().map(|a| a.1).sum::<f64>();
        if let Some(last) = atoms.last_mut() {
            last.1 += drift;
        }
        Self::discrete(atoms)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidMeasure(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("measure serializes")
    }

    pub fn kind(&self) -> &MeasureKind {
        &self.kind
    }

    /// Atoms of a purely atomic measure (two-point or discrete).
    pub fn atoms(&self) -> Option<Vec<(f64, f64)>> {
        match &self.kind {
            MeasureKind::TwoPoint { p } => Some(vec![(-1.0, 1.0 - p), (1.0, *p)]),
            MeasureKind::Discrete { atoms } => Some(atoms.clone()),
            _ => None,
        }
    }

    pub fn is_atomic(&self) -> bool {
        matches!(
            self.kind,
            MeasureKind::TwoPoint { .. } | MeasureKind::Discrete { .. }
        )
    }

    /// `(λ_min, λ_max)`.
    pub fn support(&self) -> (f64, f64) {
        match &self.kind {
            MeasureKind::Semicircle => (-2.0, 2.0),
            MeasureKind::TwoPoint { .. } => (-1.0, 1.0),
            MeasureKind::MarchenkoPastur { lambda } => {
                let s = lambda.sqrt();
                ((1.0 - s).powi(2), (1.0 + s).powi(2))
            }
            MeasureKind::Discrete { atoms } => (atoms[0].0, atoms[atoms.len() - 1].0),
        }
    }

    pub fn mean(&self) -> f64 {
        match &self.kind {
            MeasureKind::Semicircle => 0.0,
            MeasureKind::TwoPoint { p } => 2.0 * p - 1.0,
            MeasureKind::MarchenkoPastur { lambda } => *lambda,
            MeasureKind::Discrete { atoms } => atoms.iter().map(|(x, w)| x * w).sum(),
        }
    }

    pub fn variance(&self) -> f64 {
        match &self.kind {
            MeasureKind::Semicircle => 1.0,
            MeasureKind::TwoPoint { p } => 4.0 * p * (1.0 - p),
            MeasureKind::MarchenkoPastur { lambda } => *lambda,
            MeasureKind::Discrete { atoms } => {
                let m = self.mean();
                atoms.iter().map(|(x, w)| w * (x - m).powi(2)).sum()
            }
        }
    }

    /// `∫ dμ(t) / (z - t)` for `z` outside the support interval.
    pub fn hilbert(&self, z: f64) -> Result<f64> {
        let (lo, hi) = self.support();
        if z.is_nan() || (lo..=hi).contains(&z) {
            return Err(domain(format!(
                "hilbert transform at z = {z} inside support [{lo}, {hi}]"
            )));
        }
        Ok(match &self.kind {
            // Rationalized forms of ½(z - √(z²-4)) and the Marchenko-Pastur
            // analogue; the branch makes H → 0 as |z| → ∞ on both sides.
            MeasureKind::Semicircle => 2.0 / (z + z.signum() * (z * z - 4.0).sqrt()),
            MeasureKind::TwoPoint { p } => (z + 2.0 * p - 1.0) / (z * z - 1.0),
            MeasureKind::MarchenkoPastur { lambda } => {
                let shifted = z - 1.0 - lambda;
                let disc = shifted * shifted - 4.0 * lambda;
                2.0 / (z + 1.0 - lambda + shifted.signum() * disc.max(0.0).sqrt())
            }
            MeasureKind::Discrete { atoms } => atoms.iter().map(|(t, w)| w / (z - t)).sum(),
        })
    }

    /// One-sided limits `(H_min, H_max)` of the Hilbert transform at the support edges.
    pub fn hilbert_edge_limits(&self) -> (f64, f64) {
        match &self.kind {
            MeasureKind::Semicircle => (-1.0, 1.0),
            MeasureKind::MarchenkoPastur { lambda } => {
                let s = lambda.sqrt();
                (1.0 / (1.0 - s), 1.0 / (1.0 + s))
            }
            // An atom at an edge makes the limit diverge.
            MeasureKind::TwoPoint { .. } | MeasureKind::Discrete { .. } => {
                (f64::NEG_INFINITY, f64::INFINITY)
            }
        }
    }

    /// Lebesgue density of the absolutely continuous families.
    pub fn density(&self, x: f64) -> Option<f64> {
        match &self.kind {
            MeasureKind::Semicircle => Some(if x.abs() < 2.0 {
                (4.0 - x * x).sqrt() / (2.0 * PI)
            } else {
                0.0
            }),
            MeasureKind::MarchenkoPastur { lambda } => {
                let (lo, hi) = self.support();
                Some(if x > lo && x < hi {
                    (4.0 * lambda - (x - 1.0 - lambda).powi(2)).sqrt() / (2.0 * PI * x)
                } else {
                    0.0
                })
            }
            _ => None,
        }
    }

    /// `∫ g dμ`. Atomic measures sum exactly; the semicircle and
    /// Marchenko-Pastur laws are integrated in the angle `θ` with
    /// `λ = center + radius·cos θ`, which removes the square-root edges.
    /// `g` may diverge to `-∞` at an edge as long as it is integrable.
    pub fn expectation<G: Fn(f64) -> f64>(&self, g: G) -> f64 {
        self.expectation_with_tol(g, EXPECTATION_TOL)
    }

    pub fn expectation_with_tol<G: Fn(f64) -> f64>(&self, g: G, tol: f64) -> f64 {
        match &self.kind {
            MeasureKind::Semicircle => {
                adaptive_simpson(
                    |theta| {
                        let s = theta.sin();
                        let w = s * s;
                        if theta <= 0.0 || theta >= PI {
                            0.0
                        } else {
                            w * g(2.0 * theta.cos())
                        }
                    },
                    0.0,
                    PI,
                    tol * PI / 2.0,
                    50,
                    16,
                ) * (2.0 / PI)
            }
            MeasureKind::MarchenkoPastur { lambda } => {
                let c = 1.0 + lambda;
                let r = 2.0 * lambda.sqrt();
                adaptive_simpson(
                    |theta| {
                        let s = theta.sin();
                        let x = c + r * theta.cos();
                        let w = s * s / x;
                        if theta <= 0.0 || theta >= PI {
                            0.0
                        } else {
                            w * g(x)
                        }
                    },
                    0.0,
                    PI,
                    tol * PI / (2.0 * lambda),
                    50,
                    16,
                ) * (2.0 * lambda / PI)
            }
            MeasureKind::TwoPoint { p } => (1.0 - p) * g(-1.0) + p * g(1.0),
            MeasureKind::Discrete { atoms } => atoms.iter().map(|&(t, w)| w * g(t)).sum(),
        }
    }

    /// Cumulative distribution function `μ((-∞, x])`.
    pub fn cdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x < lo {
            return 0.0;
        }
        if x >= hi {
            return 1.0;
        }
        match &self.kind {
            MeasureKind::Semicircle => {
                (0.5 + x * (4.0 - x * x).sqrt() / (4.0 * PI) + (x / 2.0).asin() / PI)
                    .clamp(0.0, 1.0)
            }
            MeasureKind::MarchenkoPastur { lambda } => {
                let c = 1.0 + lambda;
                let r = 2.0 * lambda.sqrt();
                let theta = ((x - c) / r).clamp(-1.0, 1.0).acos();
                (1.0 - 2.0 * lambda / PI * mp_angle_mass(*lambda, theta)).clamp(0.0, 1.0)
            }
            MeasureKind::TwoPoint { p } => 1.0 - p,
            MeasureKind::Discrete { atoms } => {
                atoms.iter().take_while(|a| a.0 <= x).map(|a| a.1).sum()
            }
        }
    }

    /// Generalized inverse of the CDF: the smallest `x` with `cdf(x) >= q`.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&q) {
            return Err(domain(format!("quantile level {q} outside [0, 1]")));
        }
        let (lo, hi) = self.support();
        Ok(match &self.kind {
            MeasureKind::Semicircle | MeasureKind::MarchenkoPastur { .. } => {
                if q <= 0.0 {
                    lo
                } else if q >= 1.0 {
                    hi
                } else {
                    bisect_increasing(|x| self.cdf(x), lo, hi, q, 200)
                }
            }
            MeasureKind::TwoPoint { p } => {
                if q <= 1.0 - p {
                    -1.0
                } else {
                    1.0
                }
            }
            MeasureKind::Discrete { atoms } => {
                let mut acc = 0.0;
                let mut out = hi;
                for &(t, w) in atoms {
                    acc += w;
                    if acc >= q - 1e-15 {
                        out = t;
                        break;
                    }
                }
                out
            }
        })
    }

    /// The `n` mid-point quantiles at levels `(i - ½)/n`, ascending.
    pub fn midpoint_quantiles(&self, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| {
                self.quantile((i as f64 + 0.5) / n as f64)
                    .expect("level in (0, 1)")
            })
            .collect()
    }
}

/// `∫_0^θ sin²φ / (c + r cos φ) dφ` for the Marchenko-Pastur angle
/// parametrization (`c = 1 + λ`, `r = 2√λ`, `c² - r² = (λ - 1)²`).
fn mp_angle_mass(lambda: f64, theta: f64) -> f64 {
    let c = 1.0 + lambda;
    let r = 2.0 * lambda.sqrt();
    let root = lambda - 1.0;
    let k = ((c - r) / (c + r)).sqrt();
    let arc = if theta >= PI {
        PI / 2.0
    } else {
        (k * (theta / 2.0).tan()).atan()
    };
    -theta.sin() / r + c * theta / (r * r) + (1.0 - c * c / (r * r)) * 2.0 / root * arc
}
