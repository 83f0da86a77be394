//! Command-line front end: `orthoglass <command> [flags]`.
//!
//! Every command writes its rows atomically to `--output` (CSV with a side
//! manifest, or a single JSON document) and prints one summary line per row.

mod config;
mod output;
mod validate;

use std::ffi::OsString;

use clap::Parser;

pub use config::{
    Cli, Command, CommandKind, ConfigError, Format, RunArgs, RunConfig, OUTPUT_DIR_ENV,
};
pub use output::{model_hash, write_atomic, Manifest, Row, CSV_HEADER, VERSION};
pub use validate::{validation_suite, Check};

use crate::error::Error;
use crate::models::ModelSpec;
use crate::montecarlo::{
    annealed_moments, concentration_scan, quenched_free_energy, SpectrumSource,
};
use crate::variational::{beta_zero, maximize_psi, solve_fixed_point, RateFunction};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;

/// A failed run and the process exit code it maps to.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError {
            code: EXIT_CONFIG,
            message: e.to_string(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Domain(_) | Error::NoConvergence(_) | Error::NoTransition { .. } => EXIT_DOMAIN,
            Error::Dimension(_)
            | Error::CapExceeded { .. }
            | Error::InvalidMeasure(_)
            | Error::InvalidModel(_) => EXIT_CONFIG,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError {
            code: EXIT_CONFIG,
            message: format!("cannot write output: {e}"),
        }
    }
}

/// What a successful (or validation-failed) run produced.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub rows: Vec<Row>,
    pub files: Vec<std::path::PathBuf>,
    pub exit_code: i32,
}

/// Parses `args` (including the program name), runs, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let (kind, args) = cli.command.parts();
    let outcome = RunConfig::from_args(kind, args)
        .map_err(CliError::from)
        .and_then(|cfg| run(&cfg));
    match outcome {
        Ok(o) => o.exit_code,
        Err(e) => {
            eprintln!("orthoglass: {}", e.message);
            e.code
        }
    }
}

/// Runs one configured command, honouring `workers`.
pub fn run(config: &RunConfig) -> Result<RunOutcome, CliError> {
    match config.workers {
        Some(0) => Err(ConfigError("field `workers` must be positive".into()).into()),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| CliError {
                code: EXIT_CONFIG,
                message: format!("field `workers`: {e}"),
            })?
            .install(|| dispatch(config)),
        None => dispatch(config),
    }
}

fn default_models() -> Vec<ModelSpec> {
    vec![
        ModelSpec::sk(),
        ModelSpec::rom(0.5).expect("valid"),
        ModelSpec::hopfield(2.0).expect("valid"),
    ]
}

fn dispatch(config: &RunConfig) -> Result<RunOutcome, CliError> {
    let kind = config
        .command
        .ok_or_else(|| ConfigError("field `command` is missing".into()))?;
    let mut details: Option<serde_json::Value> = None;
    let mut exit_code = EXIT_OK;
    let (models, rows) = match kind {
        CommandKind::Limit => {
            let models = config
                .model
                .clone()
                .map_or_else(default_models, |m| vec![m]);
            let betas = config.betas()?;
            let mut rows = Vec::new();
            for m in &models {
                let profile = m.profile();
                for &b in &betas {
                    rows.push(Row::exact(
                        m,
                        Some(b),
                        "limit",
                        profile.free_energy_limit(b)?,
                    ));
                }
            }
            (models, rows)
        }
        CommandKind::Variational => {
            let model = config.model()?.clone();
            let rf = RateFunction::new(model.profile());
            let mut rows = Vec::new();
            let mut sols = Vec::new();
            for b in config.betas()? {
                let best = maximize_psi(&rf, b)?;
                rows.push(Row::exact(&model, Some(b), "psi_max", best.psi_value));
                rows.push(Row::exact(&model, Some(b), "x_star", best.x_star));
                rows.push(Row::exact(&model, Some(b), "y_star", best.y_star));
                let fixed = solve_fixed_point(&rf, b);
                if let Ok(fp) = &fixed {
                    rows.push(Row::exact(&model, Some(b), "fixed_point_x", fp.x_star));
                    rows.push(Row::exact(&model, Some(b), "fixed_point_y", fp.y_star));
                }
                if let Ok(i) = rf.profile().free_energy_limit(b) {
                    rows.push(Row::exact(&model, Some(b), "two_limit", 2.0 * i));
                }
                sols.push(serde_json::json!({
                    "beta": b,
                    "maximizer": best,
                    "fixed_point": match fixed {
                        Ok(fp) => serde_json::to_value(fp).expect("serializes"),
                        Err(e) => serde_json::Value::String(e.to_string()),
                    },
                }));
            }
            details = Some(serde_json::Value::Array(sols));
            (vec![model], rows)
        }
        CommandKind::Beta0 => {
            let model = config.model()?.clone();
            let rf = RateFunction::new(model.profile());
            let b0 = beta_zero(&rf, config.interval()?)?;
            let rows = vec![Row::exact(&model, None, "beta0", b0)];
            (vec![model], rows)
        }
        CommandKind::Quenched => {
            let model = config.model()?.clone();
            let samples = config.num_samples(50)?;
            let seed = config.seed();
            let mut rows = Vec::new();
            let mut ests = Vec::new();
            for n in config.enumeration_ns()? {
                for b in config.betas()? {
                    let e = quenched_free_energy(&model, n, b, samples, seed)?;
                    rows.push(Row::sampled(
                        &model, n, b, "quenched", e.mean, e.std_err, samples, seed,
                    ));
                    rows.push(Row::sampled(
                        &model,
                        n,
                        b,
                        "quenched_expected_d",
                        e.expected_mean,
                        e.expected_std_err,
                        samples,
                        seed,
                    ));
                    ests.push(e);
                }
            }
            details = Some(serde_json::to_value(ests).expect("serializes"));
            (vec![model], rows)
        }
        CommandKind::Annealed => {
            let model = config.model()?.clone();
            let samples = config.num_samples(10_000)?;
            let seed = config.seed();
            let source = SpectrumSource::Quantiles(model.limiting_measure());
            let mut rows = Vec::new();
            let mut ests = Vec::new();
            for n in config.ns(None)? {
                for b in config.betas()? {
                    let e = annealed_moments(&source, n, b, samples, seed)?;
                    rows.push(Row::sampled(
                        &model,
                        n,
                        b,
                        "annealed_first",
                        e.log_first_moment_rate,
                        e.first_std_err,
                        samples,
                        seed,
                    ));
                    rows.push(Row::sampled(
                        &model,
                        n,
                        b,
                        "annealed_second",
                        e.log_second_moment_rate,
                        e.second_std_err,
                        samples,
                        seed,
                    ));
                    ests.push(e);
                }
            }
            details = Some(serde_json::to_value(ests).expect("serializes"));
            (vec![model], rows)
        }
        CommandKind::Scan => {
            let model = config.model()?.clone();
            let samples = config.num_samples(100)?;
            let seed = config.seed();
            let ns = config.enumeration_ns()?;
            let mut rows = Vec::new();
            for b in config.betas()? {
                for r in concentration_scan(&model, b, &ns, samples, seed)? {
                    rows.push(Row::sampled(
                        &model, r.n, b, "phi_std", r.std, r.std_se, samples, seed,
                    ));
                    rows.push(Row::sampled(
                        &model,
                        r.n,
                        b,
                        "phi_mean",
                        r.mean,
                        r.std / (samples as f64).sqrt(),
                        samples,
                        seed,
                    ));
                }
            }
            (vec![model], rows)
        }
        CommandKind::Validate => {
            let checks = validation_suite(config.seed());
            let suite_model = ModelSpec::sk();
            let mut rows = Vec::new();
            for c in &checks {
                println!(
                    "{} {} measured={:e} tolerance={:e}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.measured,
                    c.tolerance
                );
                rows.push(Row {
                    std_err: Some(c.tolerance),
                    ..Row::exact(&suite_model, None, &c.name, c.measured)
                });
            }
            if checks.iter().any(|c| !c.passed) {
                exit_code = EXIT_VALIDATION;
            }
            details = Some(serde_json::to_value(&checks).expect("serializes"));
            (Vec::new(), rows)
        }
    };

    if kind != CommandKind::Validate {
        for r in &rows {
            println!("{}", r.summary());
        }
    }
    let manifest = Manifest::new(config, &models);
    let path = config.output_path();
    let files = output::write_outputs(&path, config.format(), &manifest, &rows, details.as_ref())?;
    Ok(RunOutcome {
        rows,
        files,
        exit_code,
    })
}
