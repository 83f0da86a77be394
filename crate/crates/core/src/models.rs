//! Model ensembles: SK, the random orthogonal model, the Gaussian Hopfield
//! model, and user-supplied spectra.

use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::rng::{stream, Purpose};
use crate::spectral::{SpectralMeasure, TransformProfile};

/// Largest `n` accepted by [`sample_coupling`].
pub const MAX_SAMPLE_DIM: usize = 4096;

/// Default cut on `√N·W₂` for [`RigidityReport::passes_hint`].
pub const DEFAULT_RIGIDITY_THRESHOLD: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelKind {
    /// `J = W/√N` with `W` drawn from the GOE.
    Sk,
    /// `J = O D Oᵀ` with a deterministic ±1 diagonal, a fraction `p` of it +1.
    Rom { p: f64 },
    /// Gaussian Hopfield model with `p/N → lambda > 1` patterns.
    Hopfield { lambda: f64 },
    /// Any spectrum given as a measure.
    Custom { measure: SpectralMeasure },
}

/// A model ensemble plus an optional known high-temperature bound on `β`.
///
/// JSON: `{"kind":"sk"}`, `{"kind":"rom","p":0.5}`, `{"kind":"hopfield","lambda":2.0}`,
/// `{"kind":"custom","measure":{...}}`, each optionally with `"beta_validity_hint"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelRepr", into = "ModelRepr")]
pub struct ModelSpec {
    kind: ModelKind,
    beta_validity_hint: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ModelRepr {
    #[serde(flatten)]
    kind: ModelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    beta_validity_hint: Option<f64>,
}

impl TryFrom<ModelRepr> for ModelSpec {
    type Error = Error;

    fn try_from(r: ModelRepr) -> Result<Self> {
        let spec = ModelSpec::new(r.kind)?;
        Ok(match r.beta_validity_hint {
            Some(h) => spec.with_beta_hint(h),
            None => spec,
        })
    }
}

impl From<ModelSpec> for ModelRepr {
    fn from(s: ModelSpec) -> Self {
        ModelRepr {
            kind: s.kind,
            beta_validity_hint: s.beta_validity_hint,
        }
    }
}

impl ModelSpec {
    pub fn new(kind: ModelKind) -> Result<Self> {
        match &kind {
            ModelKind::Rom { p } if !(*p > 0.0 && *p < 1.0) => {
                return Err(Error::InvalidModel(format!(
                    "rom: p = {p} must lie in (0, 1)"
                )));
            }
            ModelKind::Hopfield { lambda } if !(*lambda > 1.0 && lambda.is_finite()) => {
                return Err(Error::InvalidModel(format!(
                    "hopfield: lambda = {lambda} must be > 1"
                )));
            }
            _ => {}
        }
        Ok(Self {
            kind,
            beta_validity_hint: None,
        })
    }

    pub fn sk() -> Self {
        Self {
            kind: ModelKind::Sk,
            beta_validity_hint: None,
        }
    }

    pub fn rom(p: f64) -> Result<Self> {
        Self::new(ModelKind::Rom { p })
    }

    pub fn hopfield(lambda: f64) -> Result<Self> {
        Self::new(ModelKind::Hopfield { lambda })
    }

    pub fn custom(measure: SpectralMeasure) -> Self {
        Self {
            kind: ModelKind::Custom { measure },
            beta_validity_hint: None,
        }
    }

    pub fn with_beta_hint(mut self, hint: f64) -> Self {
        self.beta_validity_hint = Some(hint);
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidModel(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            ModelKind::Sk => "sk",
            ModelKind::Rom { .. } => "rom",
            ModelKind::Hopfield { .. } => "hopfield",
            ModelKind::Custom { .. } => "custom",
        }
    }

    /// Explicit hint if one was given, else the known bound for the family:
    /// `½` for SK and `H_max/2` for Hopfield. Advisory only.
    pub fn beta_validity_hint(&self) -> Option<f64> {
        self.beta_validity_hint.or(match self.kind {
            ModelKind::Sk => Some(0.5),
            ModelKind::Hopfield { lambda } => Some(0.5 / (1.0 + lambda.sqrt())),
            _ => None,
        })
    }

    pub fn limiting_measure(&self) -> SpectralMeasure {
        match &self.kind {
            ModelKind::Sk => SpectralMeasure::semicircle(),
            ModelKind::Rom { p } => SpectralMeasure::two_point(*p).expect("validated p"),
            ModelKind::Hopfield { lambda } => {
                SpectralMeasure::marchenko_pastur(*lambda).expect("validated lambda")
            }
            ModelKind::Custom { measure } => measure.clone(),
        }
    }

    pub fn profile(&self) -> TransformProfile {
        TransformProfile::new(self.limiting_measure())
    }
}

/// Closed-form limiting free energy of the named families; `None` for custom spectra.
pub fn closed_form_limit(spec: &ModelSpec, beta: f64) -> Result<Option<f64>> {
    if matches!(spec.kind, ModelKind::Custom { .. }) {
        return Ok(None);
    }
    let profile = spec.profile();
    if !(beta >= 0.0) {
        return Err(domain(format!("beta = {beta} must be nonnegative")));
    }
    if 2.0 * beta >= profile.h_max() {
        return Err(domain(format!(
            "{}: 2β = {} is outside the R-transform domain (H_max = {})",
            spec.name(),
            2.0 * beta,
            profile.h_max()
        )));
    }
    let value = match spec.kind {
        ModelKind::Sk => beta * beta,
        ModelKind::Rom { p: 0.5 } => {
            if beta == 0.0 {
                0.0
            } else {
                let s = (16.0 * beta * beta + 1.0).sqrt();
                0.25 * (s + ((s - 1.0) / (8.0 * beta * beta)).ln() - 1.0)
            }
        }
        ModelKind::Rom { .. } => profile.free_energy_limit(beta)?,
        ModelKind::Hopfield { lambda } => 0.5 * lambda * (1.0 / (1.0 - 2.0 * beta)).ln(),
        ModelKind::Custom { .. } => unreachable!(),
    };
    Ok(Some(value))
}

/// A finite-N coupling spectrum and the deterministic targets it is compared with.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingSample {
    pub n: usize,
    pub d_values: Vec<f64>,
    pub expected_d: Vec<f64>,
    pub seed: u64,
}

/// Draws the diagonal `D` of the coupling matrix.
///
/// SK and Hopfield spectra are eigenvalues of a dense random matrix (ascending);
/// their targets are mid-point quantiles of the limiting law. ROM and custom
/// spectra are deterministic and equal to their targets.
pub fn sample_coupling(spec: &ModelSpec, n: usize, seed: u64) -> Result<CouplingSample> {
    if n < 2 {
        return Err(Error::Dimension(format!(
            "coupling dimension n = {n} must be at least 2"
        )));
    }
    if n > MAX_SAMPLE_DIM {
        return Err(Error::Dimension(format!(
            "coupling dimension n = {n} exceeds {MAX_SAMPLE_DIM}"
        )));
    }
    let mut rng = stream(seed, Purpose::Coupling, 0);
    let (d_values, expected_d) = match &spec.kind {
        ModelKind::Sk => {
            let scale = 1.0 / (n as f64).sqrt();
            let mut j = DMatrix::<f64>::zeros(n, n);
            for r in 0..n {
                for c in r..n {
                    let g: f64 = StandardNormal.sample(&mut rng);
                    if r == c {
                        j[(r, r)] = g * std::f64::consts::SQRT_2 * scale;
                    } else {
                        j[(r, c)] = g * scale;
                        j[(c, r)] = g * scale;
                    }
                }
            }
            (
                sorted_eigenvalues(j),
                spec.limiting_measure().midpoint_quantiles(n),
            )
        }
        ModelKind::Hopfield { lambda } => {
            let p = (lambda * n as f64).round() as usize;
            if p < n + 1 {
                return Err(Error::Dimension(format!(
                    "hopfield: p = {p} patterns must exceed n = {n}"
                )));
            }
            let x = DMatrix::<f64>::from_fn(n, p, |_, _| StandardNormal.sample(&mut rng));
            let j = (&x * x.transpose()) / n as f64;
            (
                sorted_eigenvalues(j),
                spec.limiting_measure().midpoint_quantiles(n),
            )
        }
        ModelKind::Rom { p } => {
            let plus = (p * n as f64).floor() as usize;
            let d: Vec<f64> = (0..n).map(|i| if i < plus { 1.0 } else { -1.0 }).collect();
            (d.clone(), d)
        }
        ModelKind::Custom { measure } => {
            let d = measure.midpoint_quantiles(n);
            (d.clone(), d)
        }
    };
    Ok(CouplingSample {
        n,
        d_values,
        expected_d,
        seed,
    })
}

fn sorted_eigenvalues(j: DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = j.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Sup-norm and Wasserstein diagnostics of a coupling spectrum against its target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RigidityReport {
    pub sup_norm: f64,
    pub w2_to_target: f64,
    pub w2_scaled: f64,
    pub passes_hint: bool,
}

pub fn rigidity_report(sample: &CouplingSample) -> RigidityReport {
    rigidity_report_with_threshold(sample, DEFAULT_RIGIDITY_THRESHOLD)
}

pub fn rigidity_report_with_threshold(sample: &CouplingSample, threshold: f64) -> RigidityReport {
    let sup_norm = sample.d_values.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let w2_to_target = wasserstein2_sorted(&sample.d_values, &sample.expected_d);
    let w2_scaled = (sample.n as f64).sqrt() * w2_to_target;
    RigidityReport {
        sup_norm,
        w2_to_target,
        w2_scaled,
        passes_hint: w2_scaled <= threshold,
    }
}

/// W₂ between two equal-size empirical measures: the RMS of sorted differences.
pub fn wasserstein2_sorted(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "empirical measures must have equal size");
    if a.is_empty() {
        return 0.0;
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let ss: f64 = x.iter().zip(&y).map(|(p, q)| (p - q).powi(2)).sum();
    (ss / a.len() as f64).sqrt()
}

/// `¼ - ζ(β)` for the limiting measure; positive when the contraction
/// condition holds at this `β`.
pub fn condition_c_margin(spec: &ModelSpec, beta: f64) -> Result<f64> {
    Ok(0.25 - spec.profile().beta_window(beta)?.zeta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::MeasureKind;

    #[test]
    fn json_forms() {
        assert_eq!(
            ModelSpec::from_json(r#"{"kind":"sk"}"#).unwrap(),
            ModelSpec::sk()
        );
        assert_eq!(
            ModelSpec::from_json(r#"{"kind":"rom","p":0.5}"#).unwrap(),
            ModelSpec::rom(0.5).unwrap()
        );
        assert_eq!(
            ModelSpec::from_json(r#"{"kind":"hopfield","lambda":2.0}"#).unwrap(),
            ModelSpec::hopfield(2.0).unwrap()
        );
        let c = ModelSpec::from_json(
            r#"{"kind":"custom","measure":{"kind":"discrete","atoms":[[1.0,1.0]]}}"#,
        )
        .unwrap();
        assert_eq!(c.name(), "custom");
        let hinted =
            ModelSpec::from_json(r#"{"kind":"rom","p":0.3,"beta_validity_hint":0.2}"#).unwrap();
        assert_eq!(hinted.beta_validity_hint(), Some(0.2));
        assert_eq!(ModelSpec::from_json(&hinted.to_json()).unwrap(), hinted);
        assert!(ModelSpec::from_json(r#"{"kind":"rom","p":1.0}"#).is_err());
        assert!(ModelSpec::from_json(r#"{"kind":"hopfield","lambda":0.5}"#).is_err());
        assert!(ModelSpec::from_json(r#"{"kind":"potts"}"#).is_err());
    }

    #[test]
    fn limiting_measures() {
        assert_eq!(ModelSpec::sk().limiting_measure().support(), (-2.0, 2.0));
        assert_eq!(
            ModelSpec::rom(0.5)
                .unwrap()
                .limiting_measure()
                .atoms()
                .unwrap(),
            vec![(-1.0, 0.5), (1.0, 0.5)]
        );
        let (lo, hi) = ModelSpec::hopfield(2.0)
            .unwrap()
            .limiting_measure()
            .support();
        assert!((lo - (1.0 - 2f64.sqrt()).powi(2)).abs() < 1e-15);
        assert!((hi - (1.0 + 2f64.sqrt()).powi(2)).abs() < 1e-15);
        assert!(matches!(
            ModelSpec::hopfield(2.0).unwrap().limiting_measure().kind(),
            MeasureKind::MarchenkoPastur { .. }
        ));
    }

    #[test]
    fn closed_forms() {
        assert!((closed_form_limit(&ModelSpec::sk(), 0.3).unwrap().unwrap() - 0.09).abs() < 1e-16);
        assert_eq!(
            closed_form_limit(&ModelSpec::hopfield(2.0).unwrap(), 0.0).unwrap(),
            Some(0.0)
        );
        let rom = ModelSpec::rom(0.5).unwrap();
        let a = closed_form_limit(&rom, 0.25).unwrap().unwrap();
        let b = rom.profile().free_energy_by_quadrature(0.25).unwrap();
        assert!((a - b).abs() < 1e-10);
        assert!(closed_form_limit(&ModelSpec::sk(), 0.5).is_err());
        assert!(closed_form_limit(&ModelSpec::hopfield(2.0).unwrap(), 0.25).is_err());
        assert_eq!(
            closed_form_limit(&ModelSpec::custom(SpectralMeasure::semicircle()), 0.1).unwrap(),
            None
        );
    }

    #[test]
    fn rom_pattern_is_deterministic() {
        let s = sample_coupling(&ModelSpec::rom(0.5).unwrap(), 4, 99).unwrap();
        assert_eq!(s.d_values, vec![1.0, 1.0, -1.0, -1.0]);
        assert_eq!(s.expected_d, s.d_values);
        let s = sample_coupling(&ModelSpec::rom(0.3).unwrap(), 10, 0).unwrap();
        assert_eq!(s.d_values.iter().filter(|&&d| d > 0.0).count(), 3);
        assert_eq!(rigidity_report(&s).w2_to_target, 0.0);
    }

    #[test]
    fn sk_sample_moments() {
        let s = sample_coupling(&ModelSpec::sk(), 200, 5).unwrap();
        let n = s.n as f64;
        let mean = s.d_values.iter().sum::<f64>() / n;
        let second = s.d_values.iter().map(|d| d * d).sum::<f64>() / n;
        assert!(mean.abs() < 0.15);
        assert!((second - 1.0).abs() < 0.15);
    }

    #[test]
    fn hopfield_spectrum_is_nonnegative() {
        let s = sample_coupling(&ModelSpec::hopfield(2.0).unwrap(), 100, 1).unwrap();
        assert!(s.d_values.iter().all(|&d| d >= -1e-12));
        assert!(sample_coupling(&ModelSpec::hopfield(1.001).unwrap(), 10, 1).is_err());
    }

    #[test]
    fn dimension_errors() {
        assert!(sample_coupling(&ModelSpec::sk(), 1, 0).is_err());
        assert!(sample_coupling(&ModelSpec::sk(), MAX_SAMPLE_DIM + 1, 0).is_err());
    }

    #[test]
    fn rigidity_examples() {
        let s = CouplingSample {
            n: 2,
            d_values: vec![0.0, 1.0],
            expected_d: vec![0.0, 3.0],
            seed: 0,
        };
        let r = rigidity_report(&s);
        // optimal matching over both permutations
        let brute = [
            (0.0f64 - 0.0).powi(2) + (1.0f64 - 3.0).powi(2),
            (0.0f64 - 3.0).powi(2) + (1.0f64 - 0.0).powi(2),
        ]
        .into_iter()
        .fold(f64::INFINITY, f64::min);
        assert!((r.w2_to_target - (brute / 2.0).sqrt()).abs() < 1e-15);
        assert!((r.w2_to_target - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(r.sup_norm, 1.0);
        assert!(!r.passes_hint);
    }

    #[test]
    fn condition_c_examples() {
        assert!((condition_c_margin(&ModelSpec::sk(), 0.2).unwrap() - 0.21).abs() < 1e-15);
        let rom = ModelSpec::rom(0.5).unwrap();
        let small = condition_c_margin(&rom, 1e-3).unwrap();
        assert!((small - 0.25).abs() < 1e-5);
    }
}
