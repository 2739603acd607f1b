//! Scenario definition and measurement sampling.
//!
//! A [`Scenario`] is the ground-truth world: the sparse signal, the
//! per-sensor measurement rows, noise levels, and quantization thresholds.
//! Sampling draws the per-sensor observations under either hypothesis.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    H0,
    H1,
}

impl Hypothesis {
    fn tag(self) -> u64 {
        match self {
            Hypothesis::H0 => 0,
            Hypothesis::H1 => 1,
        }
    }
}

/// Ground truth for one experiment: signal, measurement rows, noise,
/// and quantization thresholds. Rows of `measurement_matrix` are the
/// per-sensor measurement vectors.
#[derive(Debug, Clone)]
pub struct Scenario<T: Real> {
    pub theta: DVector<T>,
    pub measurement_matrix: DMatrix<T>,
    pub noise_std: DVector<T>,
    pub quant_thresholds: DVector<T>,
}

impl<T: Real> Scenario<T> {
    pub fn new(
        theta: DVector<T>,
        measurement_matrix: DMatrix<T>,
        noise_std: DVector<T>,
        quant_thresholds: DVector<T>,
    ) -> Result<Self> {
        let n = measurement_matrix.nrows();
        if measurement_matrix.ncols() != theta.len() {
            return Err(Error::DimensionMismatch {
                context: "scenario matrix columns vs signal length",
                expected: theta.len(),
                got: measurement_matrix.ncols(),
            });
        }
        if noise_std.len() != n {
            return Err(Error::DimensionMismatch {
                context: "scenario noise_std length vs sensor count",
                expected: n,
                got: noise_std.len(),
            });
        }
        if quant_thresholds.len() != n {
            return Err(Error::DimensionMismatch {
                context: "scenario quant_thresholds length vs sensor count",
                expected: n,
                got: quant_thresholds.len(),
            });
        }
        if noise_std.iter().any(|s| *s <= T::zero()) {
            return Err(Error::invalid("noise_std", "all entries must be > 0"));
        }
        Ok(Scenario {
            theta,
            measurement_matrix,
            noise_std,
            quant_thresholds,
        })
    }

    pub fn n_sensors(&self) -> usize {
        self.measurement_matrix.nrows()
    }

    pub fn dim(&self) -> usize {
        self.measurement_matrix.ncols()
    }

    /// Noise-free sensor responses `H θ`.
    pub fn clean_response(&self) -> DVector<T> {
        &self.measurement_matrix * &self.theta
    }
}

/// One draw of the per-sensor observations, tagged with the hypothesis
/// it was generated under.
#[derive(Debug, Clone)]
pub struct Measurement<T: Real> {
    pub values: DVector<T>,
    pub hypothesis: Hypothesis,
}

/// Tone layout for the spectrum-sensing scenario: which frequency bins
/// carry energy and how much.
#[derive(Debug, Clone)]
pub struct SpectrumSpec<T: Real> {
    length: usize,
    tone_bins: Vec<usize>,
    tone_amplitudes: Vec<T>,
}

impl<T: Real> SpectrumSpec<T> {
    pub fn new(length: usize, tone_bins: Vec<usize>, tone_amplitudes: Vec<T>) -> Result<Self> {
        if tone_bins.len() != tone_amplitudes.len() {
            return Err(Error::DimensionMismatch {
                context: "spectrum tone bins vs amplitudes",
                expected: tone_bins.len(),
                got: tone_amplitudes.len(),
            });
        }
        // Bins strictly inside (0, M/2): bin 0 and the Nyquist bin have no
        // conjugate partner.
        for &k in &tone_bins {
            if k == 0 || 2 * k >= length {
                return Err(Error::invalid(
                    "tone_bins",
                    format!("bin {k} outside (0, {}/2)", length),
                ));
            }
        }
        if tone_amplitudes.iter().any(|a| *a < T::zero()) {
            return Err(Error::invalid("tone_amplitudes", "amplitudes must be >= 0"));
        }
        Ok(SpectrumSpec {
            length,
            tone_bins,
            tone_amplitudes,
        })
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn tone_bins(&self) -> &[usize] {
        &self.tone_bins
    }

    /// Sparse frequency-domain vector with conjugate-symmetric energy:
    /// amplitude a at bin k becomes a/2 at bins k and M-k, so the
    /// time-domain signal is exactly real.
    pub fn frequency_vector(&self) -> DVector<T> {
        let mut psi = DVector::zeros(self.length);
        let half = lit::<T>(0.5);
        for (&k, &a) in self.tone_bins.iter().zip(&self.tone_amplitudes) {
            psi[k] += a * half;
            psi[self.length - k] += a * half;
        }
        psi
    }

    /// Time-domain signal: superposition of sampled cosines, one per tone.
    pub fn time_signal(&self) -> DVector<T> {
        real_inverse_dft_matrix::<T>(self.length) * self.frequency_vector()
    }
}

/// Real representation of the inverse DFT for conjugate-symmetric spectra:
/// entry (t, j) is cos(2π j t / M). Applied to a symmetric frequency
/// vector it reproduces the real time-domain signal, unnormalized.
pub fn real_inverse_dft_matrix<T: Real>(m: usize) -> DMatrix<T> {
    let two_pi = T::two_pi();
    let m_t = lit::<T>(m as f64);
    DMatrix::from_fn(m, m, |t, j| {
        (two_pi * lit::<T>(t as f64) * lit::<T>(j as f64) / m_t).cos()
    })
}

/// Draws an N x M matrix of i.i.d. standard normal entries.
pub fn generate_measurement_matrix<T, R>(
    n_sensors: usize,
    dim: usize,
    rng: &mut R,
) -> Result<DMatrix<T>>
where
    T: Real,
    R: Rng + ?Sized,
    StandardNormal: Distribution<T>,
{
    if n_sensors == 0 {
        return Err(Error::invalid("n_sensors", "must be >= 1"));
    }
    if dim == 0 {
        return Err(Error::invalid("dim", "must be >= 1"));
    }
    // Row-major fill so the draw order is stable per sensor.
    let mut mat = DMatrix::zeros(n_sensors, dim);
    for i in 0..n_sensors {
        for j in 0..dim {
            mat[(i, j)] = rng.sample(StandardNormal);
        }
    }
    Ok(mat)
}

/// Noise variance that realizes the requested SNR for unit-variance
/// Gaussian measurement rows: sigma^2 = ||theta||^2 * 10^(-snr_db/10).
pub fn noise_sigma_from_snr<T: Real>(theta: &DVector<T>, snr_db: T) -> Result<T> {
    let power = theta.norm_squared();
    if power == T::zero() {
        return Err(Error::invalid("theta", "all-zero signal: SNR undefined"));
    }
    let ten = lit::<T>(10.0);
    Ok(power * ten.powf(-snr_db / ten))
}

/// Draws one measurement vector under the given hypothesis.
pub fn sample_measurements<T, R>(
    scenario: &Scenario<T>,
    hypothesis: Hypothesis,
    rng: &mut R,
) -> Measurement<T>
where
    T: Real,
    R: Rng + ?Sized,
    StandardNormal: Distribution<T>,
{
    let n = scenario.n_sensors();
    let mut values = DVector::zeros(n);
    for i in 0..n {
        let noise: T = rng.sample(StandardNormal);
        values[i] = scenario.noise_std[i] * noise;
    }
    if hypothesis == Hypothesis::H1 {
        values += scenario.clean_response();
    }
    Measurement { values, hypothesis }
}

/// Spectrum-sensing scenario over a caller-supplied raw matrix: the
/// effective model sees the sparse frequency vector through H * F^-1.
pub fn build_spectrum_scenario_with_matrix<T: Real>(
    spec: &SpectrumSpec<T>,
    raw_matrix: &DMatrix<T>,
    snr_db: T,
) -> Result<Scenario<T>> {
    let m = spec.length();
    if raw_matrix.ncols() != m {
        return Err(Error::DimensionMismatch {
            context: "spectrum matrix columns vs signal length",
            expected: m,
            got: raw_matrix.ncols(),
        });
    }
    let n = raw_matrix.nrows();
    let psi = spec.frequency_vector();
    let theta_time = spec.time_signal();
    let effective = raw_matrix * real_inverse_dft_matrix::<T>(m);
    let sigma2 = noise_sigma_from_snr(&theta_time, snr_db)?;
    let sigma = sigma2.sqrt();
    Scenario::new(
        psi,
        effective,
        DVector::from_element(n, sigma),
        DVector::zeros(n),
    )
}

pub fn build_spectrum_scenario<T, R>(
    spec: &SpectrumSpec<T>,
    n_sensors: usize,
    snr_db: T,
    rng: &mut R,
) -> Result<Scenario<T>>
where
    T: Real,
    R: Rng + ?Sized,
    StandardNormal: Distribution<T>,
{
    let raw = generate_measurement_matrix::<T, R>(n_sensors, spec.length(), rng)?;
    build_spectrum_scenario_with_matrix(spec, &raw, snr_db)
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Independent substream for one (trial, hypothesis) cell. Derivation is
/// pure mixing, so trials can run in any order or in parallel.
pub fn trial_rng(seed: u64, trial: u64, hypothesis: Hypothesis) -> ChaCha8Rng {
    let mixed = splitmix64(seed ^ splitmix64(trial.wrapping_mul(2).wrapping_add(hypothesis.tag())));
    ChaCha8Rng::seed_from_u64(mixed)
}

/// Stream for experiment-level draws (the measurement matrix).
pub fn experiment_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ 0x5ce5_a11a_b1e5_eed5))
}
