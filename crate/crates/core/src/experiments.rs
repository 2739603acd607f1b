//! Monte Carlo harness: trial generation, empirical threshold
//! calibration, ROC construction, and the preset experiments.
//!
//! Trials are independent; each draws its own random substream from the
//! master seed, so results do not depend on scheduling or trial count.

use nalgebra::DVector;
use rand::Rng;
use rayon::prelude::*;
use std::time::Instant;

use crate::detectors::{
    clairvoyant_statistic, double_detector_weights, double_detector_statistic,
    internal_detector, internal_thresholds, oracle_statistic, sign_glrt_statistic,
    sign_glrt_weights, uniform_glrt_statistic,
};
use crate::detectors::energy_statistic;
use crate::error::{Error, Result};
use crate::estimation::{biht, clairvoyant_mle, BihtConfig, NormMode};
use crate::model::{
    experiment_rng, generate_measurement_matrix, sample_measurements, trial_rng, Hypothesis,
    Scenario, SpectrumSpec,
};
use crate::quantizer::quantize;

/// Which detector a batch of trials runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DetectorId {
    SignGlrt,
    UniformGlrt,
    Double { p_fa_internal: f64 },
    Oracle,
    Clairvoyant,
    Energy,
}

impl DetectorId {
    pub fn label(&self) -> String {
        match self {
            DetectorId::SignGlrt => "sign-glrt".into(),
            DetectorId::UniformGlrt => "uniform".into(),
            DetectorId::Double { p_fa_internal } => format!("double-{p_fa_internal:.1}"),
            DetectorId::Oracle => "oracle".into(),
            DetectorId::Clairvoyant => "clairvoyant".into(),
            DetectorId::Energy => "energy".into(),
        }
    }
}

/// Where the double-detector weights get their signal estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DdThetaSource {
    /// BIHT at the fusion center on the received internal decisions.
    BihtBits,
    /// The true signal (idealized weights, no estimation step).
    TrueTheta,
}

/// One run_trials invocation: scenario, detector, and harness knobs.
#[derive(Debug, Clone)]
pub struct TrialConfig {
    pub scenario: Scenario<f64>,
    pub detector: DetectorId,
    pub trials: usize,
    pub seed: u64,
    /// BIHT sparsity level used by the bit-domain estimators.
    pub sparsity: usize,
    pub norm_mode: NormMode<f64>,
    pub dd_theta_source: DdThetaSource,
    /// Redraw the measurement matrix each trial instead of holding it
    /// fixed for the whole experiment.
    pub redraw_matrix: bool,
    pub biht_max_iterations: usize,
}

impl TrialConfig {
    pub fn new(scenario: Scenario<f64>, detector: DetectorId, trials: usize, seed: u64) -> Self {
        TrialConfig {
            scenario,
            detector,
            trials,
            seed,
            sparsity: 2,
            norm_mode: NormMode::Unit,
            dd_theta_source: DdThetaSource::BihtBits,
            redraw_matrix: false,
            biht_max_iterations: 100,
        }
    }

    fn biht_config(&self) -> BihtConfig<f64> {
        let mut cfg = BihtConfig::new(self.sparsity);
        cfg.max_iterations = self.biht_max_iterations;
        cfg.norm_mode = self.norm_mode;
        cfg
    }
}

/// Statistics recorded under both hypotheses, one entry per trial.
#[derive(Debug, Clone)]
pub struct TrialBatch {
    pub h0_statistics: Vec<f64>,
    pub h1_statistics: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub detector: DetectorId,
}

fn one_statistic(cfg: &TrialConfig, scenario: &Scenario<f64>, trial: u64, hyp: Hypothesis) -> Result<f64> {
    let mut rng = trial_rng(cfg.seed, trial, hyp);
    let x = sample_measurements(scenario, hyp, &mut rng).values;
    match cfg.detector {
        DetectorId::SignGlrt => {
            let bits = quantize(&x, &scenario.quant_thresholds)?;
            let est = biht(
                &bits,
                &scenario.measurement_matrix,
                &scenario.quant_thresholds,
                &cfg.biht_config(),
            )?;
            let w = sign_glrt_weights(&est.theta_hat, &scenario.measurement_matrix, &scenario.noise_std)?;
            sign_glrt_statistic(&bits, &w)
        }
        DetectorId::UniformGlrt => {
            let bits = quantize(&x, &scenario.quant_thresholds)?;
            // the bit count is integer-valued, so exact threshold
            // calibration needs randomized tie-breaking; uniform jitter
            // in [0,1) realizes it without reordering distinct counts
            let jitter: f64 = rng.random();
            Ok(uniform_glrt_statistic::<f64>(&bits) + jitter)
        }
        DetectorId::Double { p_fa_internal } => {
            let c = internal_detector(&x, p_fa_internal, &scenario.noise_std)?;
            let theta_hat = match cfg.dd_theta_source {
                DdThetaSource::TrueTheta => scenario.theta.clone(),
                DdThetaSource::BihtBits => {
                    let taus = internal_thresholds(p_fa_internal, &scenario.noise_std)?;
                    biht(&c, &scenario.measurement_matrix, &taus, &cfg.biht_config())?.theta_hat
                }
            };
            let w = double_detector_weights(
                &theta_hat,
                &scenario.measurement_matrix,
                &scenario.noise_std,
                p_fa_internal,
            )?;
            double_detector_statistic(&c, &w)
        }
        DetectorId::Oracle => {
            let bits = quantize(&x, &scenario.quant_thresholds)?;
            oracle_statistic(&bits, &scenario.theta, &scenario.measurement_matrix, &scenario.noise_std)
        }
        DetectorId::Clairvoyant => {
            let theta_hat = clairvoyant_mle(&x, &scenario.measurement_matrix, &scenario.noise_std)?;
            clairvoyant_statistic(&x, &theta_hat, &scenario.measurement_matrix, &scenario.noise_std)
        }
        DetectorId::Energy => Ok(energy_statistic(&x)),
    }
}

fn scenario_for_trial(cfg: &TrialConfig, trial: u64) -> Result<Scenario<f64>> {
    if !cfg.redraw_matrix {
        return Ok(cfg.scenario.clone());
    }
    // independent substream for the per-trial matrix draw
    let mut rng = trial_rng(cfg.seed ^ 0x6d61_7472_6978, trial, Hypothesis::H0);
    let h = generate_measurement_matrix::<f64, _>(cfg.scenario.n_sensors(), cfg.scenario.dim(), &mut rng)?;
    Scenario::new(
        cfg.scenario.theta.clone(),
        h,
        cfg.scenario.noise_std.clone(),
        cfg.scenario.quant_thresholds.clone(),
    )
}

/// Runs the detector pipeline for every trial under both hypotheses.
pub fn run_trials(cfg: &TrialConfig) -> Result<TrialBatch> {
    if cfg.trials == 0 {
        return Err(Error::invalid("trials", "must be >= 1"));
    }
    let pairs: Vec<(f64, f64)> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| {
            let scenario = scenario_for_trial(cfg, t)?;
            let s0 = one_statistic(cfg, &scenario, t, Hypothesis::H0)
                .map_err(|e| e.at_trial(t as usize))?;
            let s1 = one_statistic(cfg, &scenario, t, Hypothesis::H1)
                .map_err(|e| e.at_trial(t as usize))?;
            Ok((s0, s1))
        })
        .collect::<Result<_>>()?;
    let (h0, h1) = pairs.into_iter().unzip();
    Ok(TrialBatch {
        h0_statistics: h0,
        h1_statistics: h1,
        trials: cfg.trials,
        seed: cfg.seed,
        detector: cfg.detector,
    })
}

/// Detection-vs-false-alarm curve from a threshold sweep.
#[derive(Debug, Clone)]
pub struct RocCurve {
    /// (p_fa, p_d) pairs with p_fa strictly increasing.
    pub points: Vec<(f64, f64)>,
    /// Statistic threshold that produced each point.
    pub thresholds: Vec<f64>,
    pub trials: usize,
}

impl RocCurve {
    /// Detection probability at the given false-alarm level, by linear
    /// interpolation between bracketing points.
    pub fn pd_at(&self, p_fa: f64) -> f64 {
        let pts = &self.points;
        if pts.is_empty() {
            return 0.0;
        }
        if p_fa <= pts[0].0 {
            return pts[0].1;
        }
        for w in pts.windows(2) {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            if p_fa <= x1 {
                if x1 == x0 {
                    return y1;
                }
                return y0 + (y1 - y0) * (p_fa - x0) / (x1 - x0);
            }
        }
        pts[pts.len() - 1].1
    }
}

fn exceed_fraction(stats: &[f64], threshold: f64) -> f64 {
    stats.iter().filter(|&&s| s > threshold).count() as f64 / stats.len() as f64
}

/// Sweeps thresholds over the pooled statistic values (subsampled to
/// `grid_size`) and records (p_fa, p_d) per threshold.
pub fn roc_from_batch(batch: &TrialBatch, grid_size: usize) -> Result<RocCurve> {
    if batch.h0_statistics.is_empty() || batch.h1_statistics.is_empty() {
        return Err(Error::invalid("batch", "statistic lists must be nonempty"));
    }
    let mut pooled: Vec<f64> = batch
        .h0_statistics
        .iter()
        .chain(batch.h1_statistics.iter())
        .copied()
        .collect();
    pooled.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let grid = grid_size.max(2);
    let mut thresholds: Vec<f64> = Vec::with_capacity(grid + 1);
    // below the minimum: the (1,1) endpoint
    thresholds.push(pooled[0] - 1.0);
    for i in 0..grid {
        let idx = i * (pooled.len() - 1) / (grid - 1);
        thresholds.push(pooled[idx]);
    }
    // the largest H0 statistic gives the best operating point at p_fa = 0;
    // make sure the subsampled grid never misses it
    let h0_max = batch
        .h0_statistics
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    thresholds.push(h0_max);

    let mut points: Vec<(f64, f64, f64)> = thresholds
        .iter()
        .map(|&t| {
            (
                exceed_fraction(&batch.h0_statistics, t),
                exceed_fraction(&batch.h1_statistics, t),
                t,
            )
        })
        .collect();
    points.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // keep p_fa strictly increasing: collapse ties to the largest p_d
    let mut dedup: Vec<(f64, f64, f64)> = Vec::with_capacity(points.len());
    for (pfa, pd, t) in points {
        match dedup.last_mut() {
            Some(last) if last.0 == pfa => {
                if pd > last.1 {
                    last.1 = pd;
                    last.2 = t;
                }
            }
            _ => dedup.push((pfa, pd, t)),
        }
    }
    Ok(RocCurve {
        points: dedup.iter().map(|&(pfa, pd, _)| (pfa, pd)).collect(),
        thresholds: dedup.iter().map(|&(_, _, t)| t).collect(),
        trials: batch.trials,
    })
}

/// Empirical (1 - target_pfa) quantile of the H0 statistics, higher
/// interpolation: at most target_pfa of the sample strictly exceeds it.
///
/// Discrete statistics put ties at the quantile value, so the rate of
/// strict exceedance can fall well below the target; in that case the
/// midpoint just below the quantile value (letting the ties exceed) is
/// used when it lands closer to the target.
pub fn calibrate_threshold(h0_statistics: &[f64], target_pfa: f64) -> Result<f64> {
    if h0_statistics.is_empty() {
        return Err(Error::invalid("h0_statistics", "empty"));
    }
    if !(0.0..1.0).contains(&target_pfa) || target_pfa == 0.0 {
        return Err(Error::invalid("target_pfa", "must lie in (0,1)"));
    }
    let mut sorted = h0_statistics.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    let q = 1.0 - target_pfa;
    let idx = ((q * n as f64).ceil() as usize).clamp(1, n);
    let value = sorted[idx - 1];

    let above = sorted.iter().filter(|&&s| s > value).count() as f64 / n as f64;
    let at_or_above = sorted.iter().filter(|&&s| s >= value).count() as f64 / n as f64;
    if (above - target_pfa).abs() <= (at_or_above - target_pfa).abs() {
        return Ok(value);
    }
    // a threshold strictly between `value` and the next smaller sample
    // turns the ties at `value` into exceedances
    let below = sorted[..idx - 1]
        .iter()
        .rev()
        .find(|&&s| s < value)
        .copied();
    Ok(match below {
        Some(b) => 0.5 * (b + value),
        None => value - 1.0,
    })
}

/// The default experiment signal: M = 10 with nonzeros
/// 1 and -2 at indices 1 and 6.
pub fn reference_theta() -> DVector<f64> {
    DVector::from_vec(vec![0.0, 1.0, 0.0, 0.0, 0.0, 0.0, -2.0, 0.0, 0.0, 0.0])
}

/// Scenario with the experiment defaults: Gaussian rows drawn once from
/// the experiment stream, equal noise powers from the SNR, zero
/// quantization thresholds.
pub fn reference_scenario(n_sensors: usize, snr_db: f64, seed: u64) -> Result<Scenario<f64>> {
    let theta = reference_theta();
    build_scenario(theta, n_sensors, snr_db, seed)
}

pub fn build_scenario(
    theta: DVector<f64>,
    n_sensors: usize,
    snr_db: f64,
    seed: u64,
) -> Result<Scenario<f64>> {
    let m = theta.len();
    let mut rng = experiment_rng(seed);
    let h = generate_measurement_matrix::<f64, _>(n_sensors, m, &mut rng)?;
    let sigma2 = crate::model::noise_sigma_from_snr(&theta, snr_db)?;
    Scenario::new(
        theta,
        h,
        DVector::from_element(n_sensors, sigma2.sqrt()),
        DVector::zeros(n_sensors),
    )
}

/// A labeled family of ROC curves.
pub type LabeledCurves = Vec<(String, RocCurve)>;

pub const DEFAULT_GRID: usize = 200;

fn detector_curve(cfg: TrialConfig, grid: usize) -> Result<(String, RocCurve)> {
    let label = cfg.detector.label();
    let batch = run_trials(&cfg)?;
    let curve = roc_from_batch(&batch, grid)?;
    Ok((label, curve))
}

/// Experiment 1: double-detector across internal P_fa values, plus the
/// sign-GLRT baseline.
pub fn experiment_pfa_sweep(
    snr_db: f64,
    trials: usize,
    seed: u64,
    dd_theta_source: DdThetaSource,
    norm_mode: NormMode<f64>,
) -> Result<LabeledCurves> {
    let scenario = reference_scenario(50, snr_db, seed)?;
    let mut out = Vec::new();
    for &pfa in &[0.1, 0.2, 0.3, 0.4, 0.5] {
        let mut cfg = TrialConfig::new(
            scenario.clone(),
            DetectorId::Double { p_fa_internal: pfa },
            trials,
            seed,
        );
        cfg.dd_theta_source = dd_theta_source;
        cfg.norm_mode = norm_mode;
        out.push(detector_curve(cfg, DEFAULT_GRID)?);
    }
    let mut cfg = TrialConfig::new(scenario, DetectorId::SignGlrt, trials, seed);
    cfg.norm_mode = norm_mode;
    out.push(detector_curve(cfg, DEFAULT_GRID)?);
    Ok(out)
}

/// Experiment 2: the five-way detector comparison.
pub fn experiment_comparison(
    trials: usize,
    seed: u64,
    dd_theta_source: DdThetaSource,
    norm_mode: NormMode<f64>,
) -> Result<LabeledCurves> {
    let scenario = reference_scenario(50, 0.0, seed)?;
    let detectors = [
        DetectorId::Clairvoyant,
        DetectorId::Oracle,
        DetectorId::Double { p_fa_internal: 0.3 },
        DetectorId::SignGlrt,
        DetectorId::UniformGlrt,
    ];
    detectors
        .iter()
        .map(|&d| {
            let mut cfg = TrialConfig::new(scenario.clone(), d, trials, seed);
            cfg.dd_theta_source = dd_theta_source;
            cfg.norm_mode = norm_mode;
            detector_curve(cfg, DEFAULT_GRID)
        })
        .collect()
}

/// Experiment 3: spectrum sensing at M = 128 with tones at bins
/// {10, 20, 30}, amplitudes {1.0, 0.5, 2.0}.
pub fn experiment_spectrum(
    n_sensors: usize,
    trials: usize,
    seed: u64,
    dd_theta_source: DdThetaSource,
    norm_mode: NormMode<f64>,
) -> Result<LabeledCurves> {
    let spec = SpectrumSpec::new(128, vec![10, 20, 30], vec![1.0, 0.5, 2.0])?;
    let mut rng = experiment_rng(seed);
    let scenario = crate::model::build_spectrum_scenario(&spec, n_sensors, 0.0, &mut rng)?;
    let detectors = [
        DetectorId::Double { p_fa_internal: 0.3 },
        DetectorId::SignGlrt,
        DetectorId::Energy,
    ];
    detectors
        .iter()
        .map(|&d| {
            let mut cfg = TrialConfig::new(scenario.clone(), d, trials, seed);
            // conjugate-symmetric tones: 6 nonzero frequency coefficients
            cfg.sparsity = 6;
            cfg.dd_theta_source = dd_theta_source;
            cfg.norm_mode = norm_mode;
            detector_curve(cfg, DEFAULT_GRID)
        })
        .collect()
}

/// Mean FC-side statistic-computation time per detector.
#[derive(Debug, Clone)]
pub struct TimingReport {
    pub detector: String,
    pub runs: usize,
    pub mean_seconds: f64,
}

/// Experiment 4: wall time of the fusion-center pipeline, data
/// generation excluded. The double-detector is timed with precomputed
/// weights (no FC-side estimation), matching the true-theta source.
pub fn experiment_timing(runs: usize, seed: u64) -> Result<Vec<TimingReport>> {
    let scenario = reference_scenario(50, 0.0, seed)?;
    let n = scenario.n_sensors();

    // pregenerate per-run data under H1
    let mut xs = Vec::with_capacity(runs);
    for t in 0..runs as u64 {
        let mut rng = trial_rng(seed, t, Hypothesis::H1);
        xs.push(sample_measurements(&scenario, Hypothesis::H1, &mut rng).values);
    }
    let zero_taus = DVector::zeros(n);
    let mut biht_cfg = BihtConfig::new(2);
    biht_cfg.max_iterations = 100;

    let mut reports = Vec::new();

    // sign-GLRT: quantize -> BIHT -> weights -> statistic
    let start = Instant::now();
    for x in &xs {
        let bits = quantize(x, &zero_taus)?;
        let est = biht(&bits, &scenario.measurement_matrix, &zero_taus, &biht_cfg)?;
        let w = sign_glrt_weights(&est.theta_hat, &scenario.measurement_matrix, &scenario.noise_std)?;
        std::hint::black_box(sign_glrt_statistic(&bits, &w)?);
    }
    reports.push(TimingReport {
        detector: "sign-glrt".into(),
        runs,
        mean_seconds: start.elapsed().as_secs_f64() / runs as f64,
    });

    // double-detector: weights precomputed once, FC computes the fused sum
    let dd_weights = double_detector_weights(
        &scenario.theta,
        &scenario.measurement_matrix,
        &scenario.noise_std,
        0.3,
    )?;
    let start = Instant::now();
    for x in &xs {
        let c = internal_detector(x, 0.3, &scenario.noise_std)?;
        std::hint::black_box(double_detector_statistic(&c, &dd_weights)?);
    }
    reports.push(TimingReport {
        detector: "double-0.3".into(),
        runs,
        mean_seconds: start.elapsed().as_secs_f64() / runs as f64,
    });

    // remaining detectors, reported for context
    let start = Instant::now();
    for x in &xs {
        let est = clairvoyant_mle(x, &scenario.measurement_matrix, &scenario.noise_std)?;
        std::hint::black_box(clairvoyant_statistic(
            x,
            &est,
            &scenario.measurement_matrix,
            &scenario.noise_std,
        )?);
    }
    reports.push(TimingReport {
        detector: "clairvoyant".into(),
        runs,
        mean_seconds: start.elapsed().as_secs_f64() / runs as f64,
    });

    let start = Instant::now();
    for x in &xs {
        let bits = quantize(x, &zero_taus)?;
        std::hint::black_box(uniform_glrt_statistic::<f64>(&bits));
    }
    reports.push(TimingReport {
        detector: "uniform".into(),
        runs,
        mean_seconds: start.elapsed().as_secs_f64() / runs as f64,
    });

    let start = Instant::now();
    for x in &xs {
        std::hint::black_box(energy_statistic(x));
    }
    reports.push(TimingReport {
        detector: "energy".into(),
        runs,
        mean_seconds: start.elapsed().as_secs_f64() / runs as f64,
    });

    Ok(reports)
}
