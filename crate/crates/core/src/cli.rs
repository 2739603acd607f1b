//! Command-line front end: config parsing, the experiment subcommands,
//! and CSV/JSON result emission.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimation::NormMode;
use crate::experiments::{
    build_scenario, calibrate_threshold, experiment_comparison, experiment_pfa_sweep,
    experiment_spectrum, experiment_timing, reference_theta, roc_from_batch, run_trials, DdThetaSource,
    DetectorId, LabeledCurves, TrialConfig, DEFAULT_GRID,
};
use crate::quantizer::{information_report, noncentrality};

/// Resolved run settings: config-file values with CLI overrides applied.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n_sensors: usize,
    pub theta: Vec<f64>,
    pub snr_db: f64,
    pub p_fa_internal: f64,
    pub dd_theta_source: DdThetaSource,
    pub norm_mode: NormModeKind,
    pub sparsity: usize,
    pub trials: usize,
    pub seed: u64,
    pub redraw_matrix: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormModeKind {
    Unit,
    Oracle,
    Raw,
}

impl RunConfig {
    pub fn norm_mode(&self) -> NormMode<f64> {
        match self.norm_mode {
            NormModeKind::Unit => NormMode::Unit,
            NormModeKind::Oracle => {
                let norm = self.theta.iter().map(|t| t * t).sum::<f64>().sqrt();
                NormMode::Oracle(norm)
            }
            NormModeKind::Raw => NormMode::Raw,
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n_sensors: 50,
            theta: reference_theta().iter().copied().collect(),
            snr_db: 0.0,
            p_fa_internal: 0.3,
            dd_theta_source: DdThetaSource::BihtBits,
            norm_mode: NormModeKind::Unit,
            sparsity: 2,
            trials: 10_000,
            seed: 1,
            redraw_matrix: false,
        }
    }
}

fn parse_value<T: std::str::FromStr>(key: &'static str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("key `{key}`: cannot parse value `{}`", value.trim())))
}

fn parse_bool(key: &'static str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => Err(Error::Config(format!("key `{key}`: expected a boolean, got `{other}`"))),
    }
}

/// Parses a plain key-value config document (`key = value` lines,
/// `#` comments). Unknown keys are rejected by name.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected `key = value`, got `{line}`", lineno + 1))
        })?;
        let key = key.trim();
        match key {
            "n_sensors" => cfg.n_sensors = parse_value("n_sensors", value)?,
            "theta" => {
                cfg.theta = value
                    .split(',')
                    .map(|v| parse_value::<f64>("theta", v))
                    .collect::<Result<_>>()?;
            }
            "snr_db" => cfg.snr_db = parse_value("snr_db", value)?,
            "p_fa_internal" => cfg.p_fa_internal = parse_value("p_fa_internal", value)?,
            "dd_theta_source" => {
                cfg.dd_theta_source = match value.trim() {
                    "biht-bits" => DdThetaSource::BihtBits,
                    "true-theta" => DdThetaSource::TrueTheta,
                    other => {
                        return Err(Error::Config(format!(
                            "key `dd_theta_source`: expected biht-bits or true-theta, got `{other}`"
                        )))
                    }
                }
            }
            "norm_mode" => {
                cfg.norm_mode = match value.trim() {
                    "unit" => NormModeKind::Unit,
                    "oracle" => NormModeKind::Oracle,
                    "raw" => NormModeKind::Raw,
                    other => {
                        return Err(Error::Config(format!(
                            "key `norm_mode`: expected unit, oracle or raw, got `{other}`"
                        )))
                    }
                }
            }
            "sparsity" => cfg.sparsity = parse_value("sparsity", value)?,
            "trials" => cfg.trials = parse_value("trials", value)?,
            "seed" => cfg.seed = parse_value("seed", value)?,
            "redraw_matrix" => cfg.redraw_matrix = parse_bool("redraw_matrix", value)?,
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
    }
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &RunConfig) -> Result<()> {
    if cfg.n_sensors == 0 {
        return Err(Error::Config("key `n_sensors`: must be >= 1".into()));
    }
    if cfg.theta.is_empty() {
        return Err(Error::Config("key `theta`: must be nonempty".into()));
    }
    if !(cfg.p_fa_internal > 0.0 && cfg.p_fa_internal < 1.0) {
        return Err(Error::Config(format!(
            "key `p_fa_internal`: must lie in (0,1), got {}",
            cfg.p_fa_internal
        )));
    }
    if cfg.trials == 0 {
        return Err(Error::Config("key `trials`: must be >= 1".into()));
    }
    if cfg.sparsity == 0 || cfg.sparsity > cfg.theta.len() {
        return Err(Error::Config(format!(
            "key `sparsity`: must lie in 1..={}, got {}",
            cfg.theta.len(),
            cfg.sparsity
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DetectorArg {
    SignGlrt,
    Uniform,
    Double,
    Oracle,
    Clairvoyant,
    Energy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DdSourceArg {
    BihtBits,
    TrueTheta,
}

#[derive(Parser, Debug)]
#[command(name = "onebit-detect", about = "One-bit sparse-signal detection simulator")]
struct Cli {
    /// Plain key-value config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    trials: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    snr_db: Option<f64>,
    #[arg(long, global = true)]
    n_sensors: Option<usize>,
    #[arg(long, global = true)]
    p_fa_internal: Option<f64>,
    #[arg(long, global = true, value_enum)]
    dd_theta_source: Option<DdSourceArg>,
    #[arg(long, global = true, value_enum)]
    norm_mode: Option<NormModeKind>,
    #[arg(long, global = true)]
    sparsity: Option<usize>,
    #[arg(long, global = true)]
    redraw_matrix: bool,
    /// Output file; stdout when omitted.
    #[arg(long, global = true, short = 'o')]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: OutputFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// ROC curve for a single detector on the configured scenario.
    Roc {
        #[arg(long, value_enum, default_value = "sign-glrt")]
        detector: DetectorArg,
    },
    /// Double-detector internal-P_fa sweep plus the sign-GLRT baseline.
    PfaSweep,
    /// Five-way detector comparison.
    Compare,
    /// Spectrum-sensing experiment (M = 128, tones at bins 10/20/30).
    Spectrum,
    /// Fusion-center runtime comparison.
    Timing {
        #[arg(long, default_value_t = 1000)]
        runs: usize,
    },
    /// Cramér–Rao bound diagonal and noncentrality for the scenario.
    Crb,
    /// Print the resolved configuration.
    Info,
}

#[derive(Debug, Serialize)]
struct RocRow {
    detector: String,
    p_fa_internal: Option<f64>,
    p_fa: f64,
    p_d: f64,
    threshold: f64,
    trials: usize,
    seed: u64,
}

fn resolved(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => parse_config(&std::fs::read_to_string(path)?)?,
        None => RunConfig::default(),
    };
    if let Some(v) = cli.trials {
        cfg.trials = v;
    }
    if let Some(v) = cli.seed {
        cfg.seed = v;
    }
    if let Some(v) = cli.snr_db {
        cfg.snr_db = v;
    }
    if let Some(v) = cli.n_sensors {
        cfg.n_sensors = v;
    }
    if let Some(v) = cli.p_fa_internal {
        cfg.p_fa_internal = v;
    }
    if let Some(v) = cli.dd_theta_source {
        cfg.dd_theta_source = match v {
            DdSourceArg::BihtBits => DdThetaSource::BihtBits,
            DdSourceArg::TrueTheta => DdThetaSource::TrueTheta,
        };
    }
    if let Some(v) = cli.norm_mode {
        cfg.norm_mode = v;
    }
    if let Some(v) = cli.sparsity {
        cfg.sparsity = v;
    }
    if cli.redraw_matrix {
        cfg.redraw_matrix = true;
    }
    validate(&cfg)?;
    Ok(cfg)
}

fn config_header(name: &str, cfg: &RunConfig) -> String {
    let theta = cfg
        .theta
        .iter()
        .map(|t| t.to_string())
        .collect::<Vec<_>>()
        .join(",");
    format!(
        "# experiment={name} n_sensors={} theta={theta} snr_db={} p_fa_internal={} \
         dd_theta_source={:?} norm_mode={:?} sparsity={} trials={} seed={} redraw_matrix={}",
        cfg.n_sensors,
        cfg.snr_db,
        cfg.p_fa_internal,
        cfg.dd_theta_source,
        cfg.norm_mode,
        cfg.sparsity,
        cfg.trials,
        cfg.seed,
        cfg.redraw_matrix
    )
}

fn curves_to_rows(curves: &LabeledCurves, cfg: &RunConfig) -> Vec<RocRow> {
    let mut rows = Vec::new();
    for (label, curve) in curves {
        let p_fa_internal = label
            .strip_prefix("double-")
            .and_then(|s| s.parse::<f64>().ok());
        for (i, &(p_fa, p_d)) in curve.points.iter().enumerate() {
            rows.push(RocRow {
                detector: label.clone(),
                p_fa_internal,
                p_fa,
                p_d,
                threshold: curve.thresholds[i],
                trials: curve.trials,
                seed: cfg.seed,
            });
        }
    }
    rows
}

fn render_roc(rows: &[RocRow], header: &str, format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => {
            let mut out = String::new();
            let _ = writeln!(out, "{header}");
            let _ = writeln!(out, "detector,p_fa_internal,p_fa,p_d,threshold,trials,seed");
            for r in rows {
                let pfa_int = r
                    .p_fa_internal
                    .map(|v| format!("{v}"))
                    .unwrap_or_default();
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    r.detector, pfa_int, r.p_fa, r.p_d, r.threshold, r.trials, r.seed
                );
            }
            out
        }
        OutputFormat::Json => serde_json::to_string_pretty(&serde_json::json!({
            "meta": header.trim_start_matches("# "),
            "rows": rows,
        }))
        .expect("json serialization")
            + "\n",
    }
}

fn emit(cli: &Cli, text: &str) -> Result<()> {
    match &cli.output {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn scenario_from(cfg: &RunConfig) -> Result<crate::model::Scenario<f64>> {
    build_scenario(
        DVector::from_vec(cfg.theta.clone()),
        cfg.n_sensors,
        cfg.snr_db,
        cfg.seed,
    )
}

fn execute(cli: &Cli) -> Result<()> {
    let cfg = resolved(cli)?;
    match &cli.command {
        Command::Roc { detector } => {
            let id = match detector {
                DetectorArg::SignGlrt => DetectorId::SignGlrt,
                DetectorArg::Uniform => DetectorId::UniformGlrt,
                DetectorArg::Double => DetectorId::Double {
                    p_fa_internal: cfg.p_fa_internal,
                },
                DetectorArg::Oracle => DetectorId::Oracle,
                DetectorArg::Clairvoyant => DetectorId::Clairvoyant,
                DetectorArg::Energy => DetectorId::Energy,
            };
            let mut tc = TrialConfig::new(scenario_from(&cfg)?, id, cfg.trials, cfg.seed);
            tc.sparsity = cfg.sparsity;
            tc.norm_mode = cfg.norm_mode();
            tc.dd_theta_source = cfg.dd_theta_source;
            tc.redraw_matrix = cfg.redraw_matrix;
            let batch = run_trials(&tc)?;
            let curve = roc_from_batch(&batch, DEFAULT_GRID)?;
            let curves = vec![(id.label(), curve)];
            let rows = curves_to_rows(&curves, &cfg);
            emit(cli, &render_roc(&rows, &config_header("roc", &cfg), cli.format))
        }
        Command::PfaSweep => {
            let curves = experiment_pfa_sweep(cfg.snr_db, cfg.trials, cfg.seed, cfg.dd_theta_source, cfg.norm_mode())?;
            let rows = curves_to_rows(&curves, &cfg);
            emit(cli, &render_roc(&rows, &config_header("pfa-sweep", &cfg), cli.format))
        }
        Command::Compare => {
            let curves = experiment_comparison(cfg.trials, cfg.seed, cfg.dd_theta_source, cfg.norm_mode())?;
            let rows = curves_to_rows(&curves, &cfg);
            emit(cli, &render_roc(&rows, &config_header("compare", &cfg), cli.format))
        }
        Command::Spectrum => {
            let curves =
                experiment_spectrum(cfg.n_sensors, cfg.trials, cfg.seed, cfg.dd_theta_source, cfg.norm_mode())?;
            let rows = curves_to_rows(&curves, &cfg);
            emit(cli, &render_roc(&rows, &config_header("spectrum", &cfg), cli.format))
        }
        Command::Timing { runs } => {
            let reports = experiment_timing(*runs, cfg.seed)?;
            let header = config_header("timing", &cfg);
            let text = match cli.format {
                OutputFormat::Csv => {
                    let mut out = String::new();
                    let _ = writeln!(out, "{header}");
                    let _ = writeln!(out, "detector,mean_seconds,runs");
                    for r in &reports {
                        let _ = writeln!(out, "{},{:.9},{}", r.detector, r.mean_seconds, r.runs);
                    }
                    out
                }
                OutputFormat::Json => {
                    let rows: Vec<_> = reports
                        .iter()
                        .map(|r| {
                            serde_json::json!({
                                "detector": r.detector,
                                "mean_seconds": r.mean_seconds,
                                "runs": r.runs,
                            })
                        })
                        .collect();
                    serde_json::to_string_pretty(&serde_json::json!({
                        "meta": header.trim_start_matches("# "),
                        "rows": rows,
                    }))
                    .expect("json serialization")
                        + "\n"
                }
            };
            emit(cli, &text)
        }
        Command::Crb => {
            let scenario = scenario_from(&cfg)?;
            let report = information_report(&scenario, &scenario.theta)?;
            let lambda = noncentrality(&scenario, &scenario.theta);
            let header = config_header("crb", &cfg);
            let text = match cli.format {
                OutputFormat::Csv => {
                    let mut out = String::new();
                    let _ = writeln!(out, "{header}");
                    let _ = writeln!(out, "# lambda_q={lambda}");
                    let _ = writeln!(out, "index,crb");
                    for i in 0..report.crb_diag.len() {
                        let _ = writeln!(out, "{i},{}", report.crb_diag[i]);
                    }
                    out
                }
                OutputFormat::Json => serde_json::to_string_pretty(&serde_json::json!({
                    "meta": header.trim_start_matches("# "),
                    "lambda_q": lambda,
                    "crb": report.crb_diag.iter().copied().collect::<Vec<f64>>(),
                }))
                .expect("json serialization")
                    + "\n",
            };
            emit(cli, &text)
        }
        Command::Info => {
            let text = format!("{}\n{:#?}\n", config_header("info", &cfg), cfg);
            emit(cli, &text)
        }
    }
}

/// Parses argv, runs the mapped experiment, and returns the process
/// exit status.
pub fn run_command<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version through "errors" with exit 0
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

/// Calibrated statistic threshold for one detector at a target false
/// alarm rate; used by the `roc` pipeline consumers and tests.
pub fn calibrated_threshold_for(
    cfg: &RunConfig,
    detector: DetectorId,
    target_pfa: f64,
) -> Result<f64> {
    let mut tc = TrialConfig::new(scenario_from(cfg)?, detector, cfg.trials, cfg.seed);
    tc.sparsity = cfg.sparsity;
    tc.norm_mode = cfg.norm_mode();
    tc.dd_theta_source = cfg.dd_theta_source;
    let batch = run_trials(&tc)?;
    calibrate_threshold(&batch.h0_statistics, target_pfa)
}
