use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::models::ModelSpec;
use crate::montecarlo::ENUMERATION_CAP;

/// Default directory for output files when `--output` is not given.
pub const OUTPUT_DIR_ENV: &str = "ORTHOGLASS_OUTPUT_DIR";

const CSV_HELP: &str = "\
CSV columns: model,model_hash,n,beta,estimator,value,std_err,num_samples,seed,rng_id,version
  model_hash  first 16 hex digits of SHA-256 of the model JSON (see the manifest)
  n           empty for N-independent quantities
  std_err     empty for deterministic quantities
Each CSV file is accompanied by <file>.manifest.json. With --format json the
file holds {\"manifest\": ..., \"rows\": [...]}.

Exit codes: 0 ok, 1 validation failure, 2 config error, 3 numerical domain error.";

#[derive(Debug, Parser)]
#[command(
    name = "orthoglass",
    version,
    about = "High-temperature free energy of orthogonal mean-field spin glasses"
)]
#[command(after_help = CSV_HELP)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Limiting free energy I_μ(β).
    Limit(RunArgs),
    /// Two-replica variational problem: fixed point and global maximizer of ψ.
    Variational(RunArgs),
    /// Replica-symmetry threshold β₀ on --interval.
    Beta0(RunArgs),
    /// Exact-enumeration quenched free energy over Haar draws.
    Quenched(RunArgs),
    /// Annealed first and second moments at the expected spectrum.
    Annealed(RunArgs),
    /// Spread of Φ_N across Haar draws for each n in --n-list.
    Scan(RunArgs),
    /// Cross-check closed forms, numeric pipelines and Monte Carlo.
    Validate(RunArgs),
}

impl Command {
    pub fn parts(&self) -> (CommandKind, &RunArgs) {
        match self {
            Command::Limit(a) => (CommandKind::Limit, a),
            Command::Variational(a) => (CommandKind::Variational, a),
            Command::Beta0(a) => (CommandKind::Beta0, a),
            Command::Quenched(a) => (CommandKind::Quenched, a),
            Command::Annealed(a) => (CommandKind::Annealed, a),
            Command::Scan(a) => (CommandKind::Scan, a),
            Command::Validate(a) => (CommandKind::Validate, a),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommandKind {
    Limit,
    Variational,
    Beta0,
    Quenched,
    Annealed,
    Scan,
    Validate,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Limit => "limit",
            CommandKind::Variational => "variational",
            CommandKind::Beta0 => "beta0",
            CommandKind::Quenched => "quenched",
            CommandKind::Annealed => "annealed",
            CommandKind::Scan => "scan",
            CommandKind::Validate => "validate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Model JSON, e.g. '{"kind":"rom","p":0.5}'.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Comma-separated, strictly increasing.
    #[arg(long, value_delimiter = ',')]
    pub beta_grid: Option<Vec<f64>>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub n_list: Option<Vec<usize>>,
    #[arg(long)]
    pub num_samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Search interval for beta0.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
    pub interval: Option<Vec<f64>>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// JSON run config; its fields take precedence over flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long)]
    pub workers: Option<usize>,
}

/// Everything a run needs. Flags and `--config` files both deserialize into this.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<CommandKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<(f64, f64)>,
    #[serde(default, rename = "output", skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    /// Not recorded in manifests: results do not depend on it.
    #[serde(default, skip_serializing)]
    pub workers: Option<usize>,
}

/// A configuration problem, naming the field at fault.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

fn cfg_err(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

impl RunConfig {
    pub fn from_args(command: CommandKind, args: &RunArgs) -> Result<Self, ConfigError> {
        let model = match &args.model {
            Some(text) => Some(
                ModelSpec::from_json(text).map_err(|e| cfg_err(format!("field `model`: {e}")))?,
            ),
            None => None,
        };
        let interval = match &args.interval {
            Some(v) if v.len() == 2 => Some((v[0], v[1])),
            Some(_) => return Err(cfg_err("field `interval` takes exactly two values")),
            None => None,
        };
        let mut cfg = RunConfig {
            command: Some(command),
            model,
            beta: args.beta,
            beta_grid: args.beta_grid.clone(),
            n: args.n,
            n_list: args.n_list.clone(),
            num_samples: args.num_samples,
            seed: args.seed,
            interval,
            output_path: args.output.clone(),
            format: args.format,
            workers: args.workers,
        };
        if let Some(path) = &args.config {
            cfg.overlay(RunConfig::from_file(path)?);
        }
        if cfg.command != Some(command) {
            return Err(cfg_err(format!(
                "field `command`: config file says {:?} but the subcommand is {}",
                cfg.command.map(|c| c.name()),
                command.name()
            )));
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| cfg_err(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| cfg_err(format!("{}: {e}", path.display())))
    }

    /// Fields present in `other` replace those in `self`.
    pub fn overlay(&mut self, other: RunConfig) {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(
            command,
            model,
            beta,
            beta_grid,
            n,
            n_list,
            num_samples,
            seed,
            interval,
            output_path,
            format,
            workers
        );
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or_default()
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn model(&self) -> Result<&ModelSpec, ConfigError> {
        self.model
            .as_ref()
            .ok_or_else(|| cfg_err("field `model` is required for this command"))
    }

    /// `beta_grid` if given (strictly increasing, nonnegative), else `[beta]`.
    pub fn betas(&self) -> Result<Vec<f64>, ConfigError> {
        let grid = match (&self.beta_grid, self.beta) {
            (Some(g), _) => g.clone(),
            (None, Some(b)) => vec![b],
            (None, None) => return Err(cfg_err("one of `beta` or `beta_grid` is required")),
        };
        if grid.is_empty() {
            return Err(cfg_err("field `beta_grid` is empty"));
        }
        if let Some(b) = grid.iter().find(|b| !(b.is_finite() && **b >= 0.0)) {
            return Err(cfg_err(format!(
                "field `beta`: {b} must be finite and nonnegative"
            )));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(cfg_err("field `beta_grid` must be strictly increasing"));
        }
        Ok(grid)
    }

    /// `n_list` if given, else `[n]`; every entry checked against `cap` when set.
    pub fn ns(&self, cap: Option<usize>) -> Result<Vec<usize>, ConfigError> {
        let list = match (&self.n_list, self.n) {
            (Some(l), _) => l.clone(),
            (None, Some(n)) => vec![n],
            (None, None) => return Err(cfg_err("one of `n` or `n_list` is required")),
        };
        if list.is_empty() {
            return Err(cfg_err("field `n_list` is empty"));
        }
        if let Some(n) = list.iter().find(|&&n| n < 2) {
            return Err(cfg_err(format!("field `n`: {n} must be at least 2")));
        }
        if let Some(cap) = cap {
            if let Some(n) = list.iter().find(|&&n| n > cap) {
                return Err(cfg_err(format!(
                    "field `n`: {n} exceeds the enumeration cap {cap}"
                )));
            }
        }
        Ok(list)
    }

    pub fn enumeration_ns(&self) -> Result<Vec<usize>, ConfigError> {
        self.ns(Some(ENUMERATION_CAP))
    }

    pub fn num_samples(&self, default: usize) -> Result<usize, ConfigError> {
        match self.num_samples {
            Some(0) => Err(cfg_err("field `num_samples` must be positive")),
            Some(k) => Ok(k),
            None => Ok(default),
        }
    }

    pub fn interval(&self) -> Result<(f64, f64), ConfigError> {
        let (lo, hi) = self
            .interval
            .ok_or_else(|| cfg_err("field `interval` is required for beta0"))?;
        if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
            return Err(cfg_err(format!(
                "field `interval`: ({lo}, {hi}) must satisfy 0 <= lo < hi"
            )));
        }
        Ok((lo, hi))
    }

    /// `--output`, else `$ORTHOGLASS_OUTPUT_DIR/<command>.<ext>`, else `./<command>.<ext>`.
    pub fn output_path(&self) -> PathBuf {
        if let Some(p) = &self.output_path {
            return p.clone();
        }
        let ext = match self.format() {
            Format::Csv => "csv",
            Format::Json => "json",
        };
        let name = format!("{}.{ext}", self.command.map_or("run", |c| c.name()));
        match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(dir) => PathBuf::from(dir).join(name),
            None => PathBuf::from(name),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(f: impl FnOnce(&mut RunArgs)) -> RunArgs {
        let mut a = RunArgs::default();
        f(&mut a);
        a
    }

    #[test]
    fn beta_grid_must_increase() {
        let cfg = RunConfig::from_args(
            CommandKind::Limit,
            &args(|a| a.beta_grid = Some(vec![0.1, 0.1])),
        )
        .unwrap();
        assert!(cfg.betas().unwrap_err().0.contains("beta_grid"));
        let cfg = RunConfig::from_args(CommandKind::Limit, &args(|a| a.beta = Some(0.3))).unwrap();
        assert_eq!(cfg.betas().unwrap(), vec![0.3]);
    }

    #[test]
    fn bad_model_names_the_field() {
        let err = RunConfig::from_args(
            CommandKind::Limit,
            &args(|a| a.model = Some("{\"kind\":\"rom\"}".into())),
        )
        .unwrap_err();
        assert!(err.0.contains("model"));
    }

    #[test]
    fn enumeration_cap_is_checked() {
        let cfg = RunConfig::from_args(
            CommandKind::Quenched,
            &args(|a| a.n_list = Some(vec![10, 30])),
        )
        .unwrap();
        assert!(cfg.enumeration_ns().unwrap_err().0.contains("cap"));
    }

    #[test]
    fn config_file_overrides_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        std::fs::write(
            &path,
            r#"{"command":"limit","model":{"kind":"sk"},"beta":0.2}"#,
        )
        .unwrap();
        let cfg = RunConfig::from_args(
            CommandKind::Limit,
            &args(|a| {
                a.beta = Some(0.4);
                a.seed = Some(5);
                a.config = Some(path.clone());
            }),
        )
        .unwrap();
        assert_eq!(cfg.beta, Some(0.2));
        assert_eq!(cfg.seed, Some(5));
        assert_eq!(cfg.model, Some(ModelSpec::sk()));
        std::fs::write(&path, r#"{"command":"scan"}"#).unwrap();
        assert!(
            RunConfig::from_args(CommandKind::Limit, &args(|a| a.config = Some(path.clone())))
                .is_err()
        );
        std::fs::write(&path, r#"{"betta":0.1}"#).unwrap();
        assert!(
            RunConfig::from_args(CommandKind::Limit, &args(|a| a.config = Some(path.clone())))
                .is_err()
        );
    }
}
