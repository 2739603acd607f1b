//! Decision statistics: sign-GLRT, uniform GLRT, the double-detector
//! (internal threshold stage + fused statistic), oracle, clairvoyant,
//! and the energy detector.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::quantizer::{clamp_probability, gaussian_ccdf, inverse_gaussian_ccdf, BitVector};
use crate::scalar::{lit, Real};

/// A statistic compared against a threshold; H1 is declared on strict
/// exceedance.
#[derive(Debug, Clone, Copy)]
pub struct DetectorVerdict<T: Real> {
    pub statistic: T,
    pub threshold: T,
    pub decide_h1: bool,
}

impl<T: Real> DetectorVerdict<T> {
    pub fn new(statistic: T, threshold: T) -> Self {
        DetectorVerdict {
            statistic,
            threshold,
            decide_h1: statistic > threshold,
        }
    }
}

/// Per-sensor fusion weights. For the sign-GLRT these are the alphas
/// derived from beta_n = F(-h_n' theta_hat); for the double-detector the
/// rhos derived from the internal detection probabilities.
#[derive(Debug, Clone)]
pub struct FusionWeights<T: Real> {
    pub alphas: DVector<T>,
    pub betas: DVector<T>,
    pub rhos: DVector<T>,
    pub p_d: DVector<T>,
    pub p_fa_internal: T,
    /// Number of probabilities that hit the clamp while building weights.
    pub clamp_events: usize,
}

impl<T: Real> FusionWeights<T> {
    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.len() == 0
    }

    /// Offset linking the sign-GLRT statistic to the exact log-likelihood
    /// ratio: LLR(b) = sum b_n alpha_n + sum ln(1 - beta_n) + N ln 2.
    pub fn sign_glrt_llr_offset(&self) -> T {
        let n = lit::<T>(self.len() as f64);
        self.betas
            .iter()
            .map(|&b| (T::one() - b).ln())
            .fold(T::zero(), |acc, v| acc + v)
            + n * lit::<T>(2.0).ln()
    }

    /// Offset linking the double-detector statistic to the exact
    /// log-likelihood ratio of the internal decisions:
    /// LLR(c) = sum c_n rho_n + sum ln((1 - p_dn)/(1 - p_fa)).
    pub fn double_detector_llr_offset(&self) -> T {
        self.p_d
            .iter()
            .map(|&pd| ((T::one() - pd) / (T::one() - self.p_fa_internal)).ln())
            .fold(T::zero(), |acc, v| acc + v)
    }

    /// Analytic sign-GLRT threshold eta' for a likelihood-ratio threshold
    /// eta; exposed for reference, experiments calibrate empirically.
    pub fn analytic_sign_threshold(&self, eta: T) -> T {
        let n = lit::<T>(self.len() as f64);
        (lit::<T>(0.5).powf(n) * eta).ln()
            - self
                .betas
                .iter()
                .map(|&b| (T::one() - b).ln())
                .fold(T::zero(), |acc, v| acc + v)
    }

    /// Analytic double-detector threshold gamma' for a likelihood-ratio
    /// threshold gamma.
    pub fn analytic_double_threshold(&self, gamma: T) -> T {
        let n = lit::<T>(self.len() as f64);
        let prod_log = self
            .p_d
            .iter()
            .map(|&pd| (T::one() - pd).ln())
            .fold(T::zero(), |acc, v| acc + v);
        (gamma.ln() + n * (T::one() - self.p_fa_internal).ln()) - prod_log
    }
}

/// Sign-GLRT weights: beta_n = F(-h_n' theta_hat), alpha_n =
/// ln(beta_n / (1 - beta_n)).
pub fn sign_glrt_weights<T: Real>(
    theta_hat: &DVector<T>,
    h: &DMatrix<T>,
    noise_std: &DVector<T>,
) -> Result<FusionWeights<T>> {
    let n = h.nrows();
    if theta_hat.len() != h.ncols() || noise_std.len() != n {
        return Err(Error::DimensionMismatch {
            context: "sign_glrt_weights dimensions",
            expected: h.ncols(),
            got: theta_hat.len(),
        });
    }
    let proj = h * theta_hat;
    let mut betas = DVector::zeros(n);
    let mut alphas = DVector::zeros(n);
    let mut clamp_events = 0;
    for i in 0..n {
        let (beta, hit) = clamp_probability(gaussian_ccdf(-proj[i], noise_std[i]));
        clamp_events += usize::from(hit);
        betas[i] = beta;
        alphas[i] = (beta / (T::one() - beta)).ln();
    }
    Ok(FusionWeights {
        alphas,
        betas,
        rhos: DVector::zeros(n),
        p_d: DVector::zeros(n),
        p_fa_internal: lit(0.5),
        clamp_events,
    })
}

/// Weighted sum of the one-bit reports: sum b_n alpha_n.
pub fn sign_glrt_statistic<T: Real>(bits: &BitVector, weights: &FusionWeights<T>) -> Result<T> {
    if bits.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            context: "sign_glrt_statistic bits vs weights",
            expected: weights.len(),
            got: bits.len(),
        });
    }
    Ok(bits
        .iter()
        .enumerate()
        .filter(|&(_, b)| b == 1)
        .map(|(i, _)| weights.alphas[i])
        .fold(T::zero(), |acc, v| acc + v))
}

/// Unweighted count of set bits (alpha_n = 1 for all sensors).
pub fn uniform_glrt_statistic<T: Real>(bits: &BitVector) -> T {
    lit(bits.count_ones() as f64)
}

/// Oracle detector: sign-GLRT weights built from the true signal.
pub fn oracle_statistic<T: Real>(
    bits: &BitVector,
    theta_true: &DVector<T>,
    h: &DMatrix<T>,
    noise_std: &DVector<T>,
) -> Result<T> {
    let weights = sign_glrt_weights(theta_true, h, noise_std)?;
    sign_glrt_statistic(bits, &weights)
}

/// Per-sensor internal thresholds realizing the requested false-alarm
/// probability: tau_n = F^-1(p_fa) for N(0, sigma_n^2).
pub fn internal_thresholds<T: Real>(
    p_fa_internal: T,
    noise_std: &DVector<T>,
) -> Result<DVector<T>> {
    if p_fa_internal <= T::zero() || p_fa_internal >= T::one() {
        return Err(Error::invalid("p_fa_internal", "must lie in (0,1)"));
    }
    let mut taus = DVector::zeros(noise_std.len());
    for i in 0..noise_std.len() {
        taus[i] = inverse_gaussian_ccdf(p_fa_internal, noise_std[i])?;
    }
    Ok(taus)
}

/// Sensor-stage detector of the double-detector: c_n = 1 iff
/// x_n >= tau_n (inclusive boundary, unlike the plain quantizer).
pub fn internal_detector<T: Real>(
    x: &DVector<T>,
    p_fa_internal: T,
    noise_std: &DVector<T>,
) -> Result<BitVector> {
    if x.len() != noise_std.len() {
        return Err(Error::DimensionMismatch {
            context: "internal_detector input vs noise_std",
            expected: noise_std.len(),
            got: x.len(),
        });
    }
    let taus = internal_thresholds(p_fa_internal, noise_std)?;
    BitVector::new(
        (0..x.len())
            .map(|i| u8::from(x[i] >= taus[i]))
            .collect(),
    )
}

/// Double-detector fusion weights: p_dn = F(tau_n - h_n' theta_hat),
/// rho_n = ln(p_dn (1 - p_fa) / ((1 - p_dn) p_fa)).
pub fn double_detector_weights<T: Real>(
    theta_hat: &DVector<T>,
    h: &DMatrix<T>,
    noise_std: &DVector<T>,
    p_fa_internal: T,
) -> Result<FusionWeights<T>> {
    if p_fa_internal <= T::zero() || p_fa_internal >= T::one() {
        return Err(Error::invalid("p_fa_internal", "must lie in (0,1)"));
    }
    let n = h.nrows();
    if theta_hat.len() != h.ncols() || noise_std.len() != n {
        return Err(Error::DimensionMismatch {
            context: "double_detector_weights dimensions",
            expected: h.ncols(),
            got: theta_hat.len(),
        });
    }
    let taus = internal_thresholds(p_fa_internal, noise_std)?;
    let proj = h * theta_hat;
    let mut p_d = DVector::zeros(n);
    let mut rhos = DVector::zeros(n);
    let mut clamp_events = 0;
    for i in 0..n {
        let (pd, hit) = clamp_probability(gaussian_ccdf(taus[i] - proj[i], noise_std[i]));
        clamp_events += usize::from(hit);
        p_d[i] = pd;
        rhos[i] = (pd * (T::one() - p_fa_internal) / ((T::one() - pd) * p_fa_internal)).ln();
    }
    Ok(FusionWeights {
        alphas: DVector::zeros(n),
        betas: DVector::zeros(n),
        rhos,
        p_d,
        p_fa_internal,
        clamp_events,
    })
}

/// Fused double-detector statistic: sum c_n rho_n.
pub fn double_detector_statistic<T: Real>(c: &BitVector, weights: &FusionWeights<T>) -> Result<T> {
    if c.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            context: "double_detector_statistic bits vs weights",
            expected: weights.len(),
            got: c.len(),
        });
    }
    Ok(c.iter()
        .enumerate()
        .filter(|&(_, b)| b == 1)
        .map(|(i, _)| weights.rhos[i])
        .fold(T::zero(), |acc, v| acc + v))
}

/// Clairvoyant statistic over the unquantized data:
/// sum (1/sigma_n^2) [2 x_n h_n' theta_hat - (h_n' theta_hat)^2],
/// the expansion of twice the Gaussian log-likelihood ratio.
pub fn clairvoyant_statistic<T: Real>(
    x: &DVector<T>,
    theta_hat: &DVector<T>,
    h: &DMatrix<T>,
    noise_std: &DVector<T>,
) -> Result<T> {
    clairvoyant_statistic_inner(x, theta_hat, h, noise_std, false)
}

/// The sign-flipped variant with "+ (h_n' theta_hat)^2" as a diagnostic;
/// it is not a likelihood-ratio statistic.
pub fn clairvoyant_statistic_plus_form<T: Real>(
    x: &DVector<T>,
    theta_hat: &DVector<T>,
    h: &DMatrix<T>,
    noise_std: &DVector<T>,
) -> Result<T> {
    clairvoyant_statistic_inner(x, theta_hat, h, noise_std, true)
}

fn clairvoyant_statistic_inner<T: Real>(
    x: &DVector<T>,
    theta_hat: &DVector<T>,
    h: &DMatrix<T>,
    noise_std: &DVector<T>,
    plus_form: bool,
) -> Result<T> {
    let n = h.nrows();
    if x.len() != n || noise_std.len() != n || theta_hat.len() != h.ncols() {
        return Err(Error::DimensionMismatch {
            context: "clairvoyant_statistic dimensions",
            expected: n,
            got: x.len(),
        });
    }
    let proj = h * theta_hat;
    let two = lit::<T>(2.0);
    let mut sum = T::zero();
    for i in 0..n {
        let quad = if plus_form {
            proj[i] * proj[i]
        } else {
            -proj[i] * proj[i]
        };
        sum += (two * x[i] * proj[i] + quad) / (noise_std[i] * noise_std[i]);
    }
    Ok(sum)
}

/// Energy detector statistic: sum x_n^2.
pub fn energy_statistic<T: Real>(x: &DVector<T>) -> T {
    x.norm_squared()
}
