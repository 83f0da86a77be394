use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::{Format, RunConfig};
use crate::models::ModelSpec;
use crate::rng::RNG_ID;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const CSV_HEADER: &str =
    "model,model_hash,n,beta,estimator,value,std_err,num_samples,seed,rng_id,version";

/// First 16 hex digits of the SHA-256 of the model's canonical JSON.
pub fn model_hash(model: &ModelSpec) -> String {
    let digest = Sha256::digest(model.to_json().as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// One output record with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub model: String,
    pub model_hash: String,
    pub n: Option<usize>,
    pub beta: Option<f64>,
    pub estimator: String,
    pub value: f64,
    pub std_err: Option<f64>,
    pub num_samples: Option<usize>,
    pub seed: Option<u64>,
    pub rng_id: Option<&'static str>,
    pub version: &'static str,
}

impl Row {
    /// A deterministic quantity of `model`.
    pub fn exact(model: &ModelSpec, beta: Option<f64>, estimator: &str, value: f64) -> Self {
        Self {
            model: model.name().to_string(),
            model_hash: model_hash(model),
            n: None,
            beta,
            estimator: estimator.to_string(),
            value,
            std_err: None,
            num_samples: None,
            seed: None,
            rng_id: None,
            version: VERSION,
        }
    }

    /// A Monte Carlo estimate.
    #[allow(clippy::too_many_arguments)]
    pub fn sampled(
        model: &ModelSpec,
        n: usize,
        beta: f64,
        estimator: &str,
        value: f64,
        std_err: f64,
        num_samples: usize,
        seed: u64,
    ) -> Self {
        Self {
            n: Some(n),
            std_err: Some(std_err),
            num_samples: Some(num_samples),
            seed: Some(seed),
            rng_id: Some(RNG_ID),
            ..Self::exact(model, Some(beta), estimator, value)
        }
    }

    pub fn to_csv(&self) -> String {
        fn opt<T: ToString>(v: &Option<T>) -> String {
            v.as_ref().map(|x| x.to_string()).unwrap_or_default()
        }
        [
            self.model.clone(),
            self.model_hash.clone(),
            opt(&self.n),
            opt(&self.beta),
            self.estimator.clone(),
            self.value.to_string(),
            opt(&self.std_err),
            opt(&self.num_samples),
            opt(&self.seed),
            opt(&self.rng_id),
            self.version.to_string(),
        ]
        .join(",")
    }

    /// The one-line stdout summary.
    pub fn summary(&self) -> String {
        let mut s = format!("{} {}", self.model, self.estimator);
        if let Some(n) = self.n {
            s.push_str(&format!(" n={n}"));
        }
        if let Some(b) = self.beta {
            s.push_str(&format!(" beta={b}"));
        }
        s.push_str(&format!(" value={}", self.value));
        if let Some(se) = self.std_err {
            s.push_str(&format!(" std_err={se}"));
        }
        s
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelEntry {
    pub hash: String,
    pub model: ModelSpec,
}

/// Run metadata. `created_unix` is the only field that varies between
/// otherwise identical runs.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub rng_id: &'static str,
    pub command: String,
    pub config: RunConfig,
    pub models: Vec<ModelEntry>,
    pub created_unix: u64,
}

impl Manifest {
    pub fn new(config: &RunConfig, models: &[ModelSpec]) -> Self {
        let created_unix = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            tool: "orthoglass",
            version: VERSION,
            rng_id: RNG_ID,
            command: config
                .command
                .map(|c| c.name().to_string())
                .unwrap_or_default(),
            config: config.clone(),
            models: models
                .iter()
                .map(|m| ModelEntry {
                    hash: model_hash(m),
                    model: m.clone(),
                })
                .collect(),
            created_unix,
        }
    }
}

#[derive(Serialize)]
struct JsonOutput<'a> {
    manifest: &'a Manifest,
    rows: &'a [Row],
    #[serde(skip_serializing_if = "Option::is_none")]
    details: Option<&'a serde_json::Value>,
}

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn manifest_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// Writes the rows (and, for CSV, the side manifest); returns the paths written.
pub fn write_outputs(
    path: &Path,
    format: Format,
    manifest: &Manifest,
    rows: &[Row],
    details: Option<&serde_json::Value>,
) -> std::io::Result<Vec<PathBuf>> {
    match format {
        Format::Csv => {
            let mut text = String::from(CSV_HEADER);
            text.push('\n');
            for r in rows {
                text.push_str(&r.to_csv());
                text.push('\n');
            }
            write_atomic(path, text.as_bytes())?;
            let mpath = manifest_path(path);
            let mut mtext = serde_json::to_string_pretty(manifest).expect("manifest serializes");
            mtext.push('\n');
            write_atomic(&mpath, mtext.as_bytes())?;
            Ok(vec![path.to_path_buf(), mpath])
        }
        Format::Json => {
            let mut text = serde_json::to_string_pretty(&JsonOutput {
                manifest,
                rows,
                details,
            })
            .expect("output serializes");
            text.push('\n');
            write_atomic(path, text.as_bytes())?;
            Ok(vec![path.to_path_buf()])
        }
    }
}
