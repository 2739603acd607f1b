//! One-bit quantization and the Gaussian tail machinery behind it:
//! CCDF/pdf/inverse, the threshold-efficiency function g, the
//! noncentrality parameter, Fisher information, and the Cramér–Rao bound.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::Scenario;
use crate::scalar::{lit, Real};

/// Probabilities fed to a logarithm are clamped to [PROB_EPS, 1 - PROB_EPS].
pub const PROB_EPS: f64 = 1e-12;

/// One-bit sensor reports, every entry exactly 0 or 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitVector {
    bits: Vec<u8>,
}

impl BitVector {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::invalid("bits", "entries must be 0 or 1"));
        }
        Ok(BitVector { bits })
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, i: usize) -> u8 {
        self.bits[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = u8> + '_ {
        self.bits.iter().copied()
    }

    /// Bits remapped to {-1, +1}.
    pub fn signs<T: Real>(&self) -> DVector<T> {
        DVector::from_iterator(
            self.bits.len(),
            self.bits
                .iter()
                .map(|&b| if b == 1 { T::one() } else { -T::one() }),
        )
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    /// Builds the vector from an index-order bit pattern; used by the
    /// exhaustive enumeration oracles.
    pub fn from_pattern(pattern: u32, len: usize) -> Self {
        BitVector {
            bits: (0..len).map(|i| ((pattern >> i) & 1) as u8).collect(),
        }
    }
}

/// Gaussian density of N(0, sigma^2) at u.
pub fn gaussian_pdf<T: Real>(u: T, sigma: T) -> T {
    let z = u / sigma;
    (-z * z / lit::<T>(2.0)).exp() / (sigma * T::two_pi().sqrt())
}

/// Complementary CDF P(w > u) for w ~ N(0, sigma^2).
pub fn gaussian_ccdf<T: Real>(u: T, sigma: T) -> T {
    lit::<T>(0.5) * (u / (sigma * lit::<T>(2.0).sqrt())).erfc()
}

/// log P(w > u), stable deep into the upper tail where the CCDF
/// underflows. The lower tail goes through log1p of the CCDF of -u.
pub fn log_gaussian_ccdf<T: Real>(u: T, sigma: T) -> T {
    let z = u / (sigma * lit::<T>(2.0).sqrt());
    if z < lit::<T>(8.0) {
        (lit::<T>(0.5) * z.erfc()).ln()
    } else {
        // Asymptotic expansion of erfc(z) for large z.
        let z2 = z * z;
        let series = T::one() - lit::<T>(0.5) / z2 + lit::<T>(0.75) / (z2 * z2)
            - lit::<T>(1.875) / (z2 * z2 * z2);
        lit::<T>(0.5).ln() - z2 - (z * T::pi().sqrt()).ln() + series.ln()
    }
}

/// log P(w <= u) = log(1 - CCDF(u)).
pub fn log_gaussian_cdf<T: Real>(u: T, sigma: T) -> T {
    log_gaussian_ccdf(-u, sigma)
}

/// Inverse of the CCDF: the u with P(w > u) = p. Acklam's rational
/// approximation for the normal quantile, refined by two Newton steps.
pub fn inverse_gaussian_ccdf<T: Real>(p: T, sigma: T) -> Result<T> {
    if p <= T::zero() || p >= T::one() {
        return Err(Error::invalid("p", "must lie in (0,1)"));
    }
    let p64 = p.to_f64().unwrap_or(0.5);
    let mut u = sigma * lit::<T>(-standard_normal_quantile(p64));
    for _ in 0..2 {
        let f = gaussian_ccdf(u, sigma) - p;
        let d = gaussian_pdf(u, sigma);
        if d > T::zero() {
            u += f / d;
        }
    }
    Ok(u)
}

/// Acklam's inverse normal CDF approximation (relative error ~1e-9
/// before refinement).
fn standard_normal_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;
    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -standard_normal_quantile(1.0 - p)
    }
}

/// Clamps a probability into [eps, 1-eps]; the flag reports whether
/// clamping fired, so callers can count events.
pub fn clamp_probability<T: Real>(p: T) -> (T, bool) {
    let eps = lit::<T>(PROB_EPS);
    if p < eps {
        (eps, true)
    } else if p > T::one() - eps {
        (T::one() - eps, true)
    } else {
        (p, false)
    }
}

/// One-bit quantizer: bit is 1 iff the measurement strictly exceeds its
/// threshold (equality maps to 0).
pub fn quantize<T: Real>(x: &DVector<T>, taus: &DVector<T>) -> Result<BitVector> {
    if x.len() != taus.len() {
        return Err(Error::DimensionMismatch {
            context: "quantize input vs thresholds",
            expected: taus.len(),
            got: x.len(),
        });
    }
    Ok(BitVector {
        bits: x
            .iter()
            .zip(taus.iter())
            .map(|(&xi, &ti)| u8::from(xi - ti > T::zero()))
            .collect(),
    })
}

/// Threshold-efficiency g(tau) = p^2(tau) / [F(tau)(1 - F(tau))]:
/// symmetric, unimodal, maximized at tau = 0 where it equals 2/pi
/// (for unit sigma). Computed in the log domain so the deep tails
/// underflow to 0 instead of dividing 0 by 0.
pub fn threshold_efficiency<T: Real>(tau: T, sigma: T) -> T {
    let u = tau / sigma;
    let half = lit::<T>(0.5);
    let two_pi = lit::<T>(2.0) * T::pi();
    let log_p = -half * u * u - (sigma * sigma * two_pi).ln() * half;
    let log_g = lit::<T>(2.0) * log_p
        - log_gaussian_ccdf(tau, sigma)
        - log_gaussian_cdf(tau, sigma);
    log_g.exp()
}

/// Noncentrality parameter of the one-bit GLRT:
/// sum over sensors of g(tau_n) * (h_n' theta)^2.
pub fn noncentrality<T: Real>(scenario: &Scenario<T>, theta: &DVector<T>) -> T {
    let proj = &scenario.measurement_matrix * theta;
    (0..scenario.n_sensors())
        .map(|n| {
            threshold_efficiency(scenario.quant_thresholds[n], scenario.noise_std[n])
                * proj[n]
                * proj[n]
        })
        .fold(T::zero(), |acc, v| acc + v)
}

/// Fisher information of theta from the one-bit data:
/// sum of g(tau_n - h_n' theta) * h_n h_n'.
pub fn fisher_information<T: Real>(scenario: &Scenario<T>, theta: &DVector<T>) -> DMatrix<T> {
    let m = scenario.dim();
    let proj = &scenario.measurement_matrix * theta;
    let mut fim = DMatrix::zeros(m, m);
    for n in 0..scenario.n_sensors() {
        let w = threshold_efficiency(
            scenario.quant_thresholds[n] - proj[n],
            scenario.noise_std[n],
        );
        let row = scenario.measurement_matrix.row(n);
        for i in 0..m {
            for j in 0..m {
                fim[(i, j)] += w * row[i] * row[j];
            }
        }
    }
    fim
}

/// Diagonal of the inverse Fisher information: the Cramér–Rao lower
/// bound on per-coordinate estimator variance.
pub fn crb<T: Real>(scenario: &Scenario<T>, theta: &DVector<T>) -> Result<DVector<T>> {
    let fim = fisher_information(scenario, theta);
    invert_spd(&fim, "Cramér–Rao bound (Fisher information inverse)")
        .map(|inv| inv.diagonal())
}

/// FIM, CRB diagonal, and noncentrality for one scenario.
#[derive(Debug, Clone)]
pub struct InformationReport<T: Real> {
    pub fim: DMatrix<T>,
    pub crb_diag: DVector<T>,
    pub noncentrality: T,
}

pub fn information_report<T: Real>(
    scenario: &Scenario<T>,
    theta: &DVector<T>,
) -> Result<InformationReport<T>> {
    Ok(InformationReport {
        fim: fisher_information(scenario, theta),
        crb_diag: crb(scenario, theta)?,
        noncentrality: noncentrality(scenario, theta),
    })
}

const MAX_CONDITION: f64 = 1e12;

fn invert_spd<T: Real>(mat: &DMatrix<T>, context: &'static str) -> Result<DMatrix<T>> {
    let svd = mat.clone().svd(true, true);
    let s_max = svd.singular_values.max();
    let s_min = svd.singular_values.min();
    let condition = if s_min > T::zero() {
        (s_max / s_min).to_f64().unwrap_or(f64::INFINITY)
    } else {
        f64::INFINITY
    };
    if !condition.is_finite() || condition > MAX_CONDITION {
        return Err(Error::Singular { context, condition });
    }
    mat.clone().try_inverse().ok_or(Error::Singular {
        context,
        condition,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::generate_measurement_matrix;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_2_PI, PI};

    #[test]
    fn ccdf_basics() {
        assert_relative_eq!(gaussian_ccdf(0.0, 1.0), 0.5);
        assert_relative_eq!(gaussian_ccdf(0.0, 3.7), 0.5);
        assert_relative_eq!(gaussian_ccdf(1.959964 * 2.0, 2.0), 0.025, epsilon = 1e-6);
        // strictly decreasing
        assert!(gaussian_ccdf(0.1, 1.0) < gaussian_ccdf(0.0, 1.0));
    }

    #[test]
    fn inverse_ccdf_matches_root_find() {
        // bisection oracle against gaussian_ccdf
        let target = 0.3;
        let (mut lo, mut hi) = (-10.0f64, 10.0f64);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if gaussian_ccdf(mid, 1.0) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let oracle = 0.5 * (lo + hi);
        assert_relative_eq!(oracle, 0.524401, epsilon = 1e-5);
        let got = inverse_gaussian_ccdf(0.3, 1.0).unwrap();
        assert_relative_eq!(got, oracle, epsilon = 1e-9);
        assert!(inverse_gaussian_ccdf(0.0, 1.0).is_err());
        assert!(inverse_gaussian_ccdf(1.0, 1.0).is_err());
    }

    #[test]
    fn inverse_ccdf_round_trip() {
        for &p in &[1e-9, 1e-4, 0.2, 0.5, 0.8, 1.0 - 1e-4] {
            for &sigma in &[0.3, 1.0, 4.2] {
                let u = inverse_gaussian_ccdf(p, sigma).unwrap();
                assert_relative_eq!(gaussian_ccdf(u, sigma), p, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn log_ccdf_deep_tail() {
        // moderate range: agree with direct log
        for &u in &[-3.0f64, -1.0, 0.0, 1.0, 5.0] {
            assert_relative_eq!(
                log_gaussian_ccdf(u, 1.0),
                gaussian_ccdf(u, 1.0).ln(),
                max_relative = 1e-12
            );
        }
        // deep tail: finite and ordered, where the plain CCDF underflows
        let a: f64 = log_gaussian_ccdf(40.0, 1.0);
        let b: f64 = log_gaussian_ccdf(41.0, 1.0);
        assert!(a.is_finite() && b.is_finite() && b < a);
        // crude magnitude check: log F(u) ~ -u^2/2 for large u
        assert_relative_eq!(a, -40.0f64 * 40.0 / 2.0, max_relative = 0.01);
    }

    #[test]
    fn quantize_convention() {
        let x = DVector::from_vec(vec![0.5, -0.3]);
        let b = quantize(&x, &DVector::zeros(2)).unwrap();
        assert_eq!(b.iter().collect::<Vec<_>>(), vec![1, 0]);

        let x = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let tau = DVector::from_element(3, 2.0);
        let b = quantize(&x, &tau).unwrap();
        assert_eq!(b.iter().collect::<Vec<_>>(), vec![0, 0, 1]);

        // boundary x == tau maps to 0
        let b = quantize(&tau, &tau).unwrap();
        assert_eq!(b.count_ones(), 0);

        assert!(quantize(&x, &DVector::zeros(2)).is_err());
    }

    #[test]
    fn efficiency_at_zero_is_two_over_pi() {
        assert_relative_eq!(threshold_efficiency(0.0, 1.0), FRAC_2_PI, epsilon = 1e-12);
        assert_relative_eq!(threshold_efficiency(0.0, 2.5), 2.0 / (PI * 2.5 * 2.5));
    }

    #[test]
    fn efficiency_symmetric_and_peaked_at_zero() {
        for &tau in &[0.5, 1.3, 2.7] {
            assert_relative_eq!(
                threshold_efficiency(tau, 1.0),
                threshold_efficiency(-tau, 1.0),
                max_relative = 1e-12
            );
        }
        let sigma = 1.0;
        let mut best = (f64::NEG_INFINITY, 0.0);
        let mut tau = -5.0 * sigma;
        while tau <= 5.0 * sigma {
            let g = threshold_efficiency(tau, sigma);
            if g > best.0 {
                best = (g, tau);
            }
            tau += 1e-3 * sigma;
        }
        assert!(best.1.abs() <= 1e-3 * sigma, "argmax at {}", best.1);
    }

    fn random_scenario(seed: u64, n: usize, m: usize) -> (Scenario<f64>, DVector<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = generate_measurement_matrix::<f64, _>(n, m, &mut rng).unwrap();
        let theta = generate_measurement_matrix::<f64, _>(m, 1, &mut rng)
            .unwrap()
            .column(0)
            .into_owned();
        let sc = Scenario::new(
            theta.clone(),
            h,
            DVector::from_element(n, 1.3),
            DVector::zeros(n),
        )
        .unwrap();
        (sc, theta)
    }

    #[test]
    fn noncentrality_zero_threshold_closed_form() {
        for seed in 0..5 {
            let (sc, theta) = random_scenario(seed, 20, 4);
            let lambda = noncentrality(&sc, &theta);
            let proj = sc.clean_response();
            let closed: f64 =
                FRAC_2_PI * proj.iter().map(|v| v * v / (1.3 * 1.3)).sum::<f64>();
            assert_relative_eq!(lambda, closed, max_relative = 1e-12);
        }
    }

    #[test]
    fn noncentrality_zero_signal_and_scalar_case() {
        let (sc, _) = random_scenario(0, 20, 4);
        assert_eq!(noncentrality(&sc, &DVector::zeros(4)), 0.0);

        let sc1 = Scenario::new(
            DVector::from_vec(vec![1.0]),
            DMatrix::from_element(1, 1, 1.0),
            DVector::from_element(1, 1.0),
            DVector::from_element(1, 1.0),
        )
        .unwrap();
        let lambda = noncentrality(&sc1, &DVector::from_vec(vec![1.0]));
        assert_relative_eq!(lambda, threshold_efficiency(1.0, 1.0), max_relative = 1e-12);
    }

    #[test]
    fn noncentrality_invariant_to_row_sign_flip() {
        let (mut sc, theta) = random_scenario(3, 10, 3);
        let before = noncentrality(&sc, &theta);
        for j in 0..3 {
            sc.measurement_matrix[(4, j)] = -sc.measurement_matrix[(4, j)];
        }
        assert_relative_eq!(noncentrality(&sc, &theta), before, max_relative = 1e-12);
    }

    #[test]
    fn fim_scalar_case() {
        let sc = Scenario::new(
            DVector::from_vec(vec![0.0]),
            DMatrix::from_element(1, 1, 1.0),
            DVector::from_element(1, 1.0),
            DVector::zeros(1),
        )
        .unwrap();
        let fim = fisher_information(&sc, &DVector::zeros(1));
        assert_relative_eq!(fim[(0, 0)], FRAC_2_PI, epsilon = 1e-12);
    }

    #[test]
    fn fim_symmetric_psd_and_sigma_scaling() {
        let (sc, theta) = random_scenario(8, 30, 5);
        let fim = fisher_information(&sc, &theta);
        for i in 0..5 {
            for j in 0..5 {
                assert_relative_eq!(fim[(i, j)], fim[(j, i)], epsilon = 1e-12);
            }
        }
        let eig = fim.symmetric_eigenvalues();
        assert!(eig.min() >= -1e-10);

        // at theta = 0, tau = 0 the FIM scales as 1/sigma^2
        let zero = DVector::zeros(5);
        let mut sc2 = sc.clone();
        let f1 = fisher_information(&sc, &zero);
        sc2.noise_std *= 2.0;
        let f2 = fisher_information(&sc2, &zero);
        assert_relative_eq!(f1[(0, 0)] / f2[(0, 0)], 4.0, max_relative = 1e-10);
        // and equals (2/(pi sigma^2)) H'H
        let hth = sc.measurement_matrix.transpose() * &sc.measurement_matrix;
        let scale = FRAC_2_PI / (1.3 * 1.3);
        for i in 0..5 {
            for j in 0..5 {
                assert_relative_eq!(f1[(i, j)], scale * hth[(i, j)], max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn crb_scalar_identity_and_singular() {
        let sc = Scenario::new(
            DVector::from_vec(vec![0.3]),
            DMatrix::from_element(1, 1, 1.0),
            DVector::from_element(1, 1.0),
            DVector::zeros(1),
        )
        .unwrap();
        let theta = DVector::from_vec(vec![0.3]);
        let fim = fisher_information(&sc, &theta);
        let bound = crb(&sc, &theta).unwrap();
        assert_relative_eq!(bound[0], 1.0 / fim[(0, 0)], max_relative = 1e-12);

        // N < M: rank deficient
        let (sc, theta) = random_scenario(2, 5, 10);
        match crb(&sc, &theta) {
            Err(Error::Singular { .. }) => {}
            other => panic!("expected singularity error, got {other:?}"),
        }
    }

    #[test]
    fn crb_identity_scaled() {
        // orthogonal columns scaled so the FIM is c * I
        let m = 4;
        let h = DMatrix::<f64>::identity(m, m) * 2.0;
        let sc = Scenario::new(
            DVector::zeros(m),
            h,
            DVector::from_element(m, 1.0),
            DVector::zeros(m),
        )
        .unwrap();
        let c = threshold_efficiency(0.0, 1.0) * 4.0;
        let bound = crb(&sc, &DVector::zeros(m)).unwrap();
        for i in 0..m {
            assert_relative_eq!(bound[i], 1.0 / c, max_relative = 1e-10);
        }
    }

    #[test]
    fn crb_shrinks_with_more_sensors() {
        for seed in 0..5 {
            let (sc, theta) = random_scenario(seed + 40, 12, 3);
            let b1 = crb(&sc, &theta).unwrap();
            // add one sensor
            let mut rng = ChaCha8Rng::seed_from_u64(seed + 900);
            let extra = generate_measurement_matrix::<f64, _>(1, 3, &mut rng).unwrap();
            let mut h = sc.measurement_matrix.clone().insert_row(12, 0.0);
            for j in 0..3 {
                h[(12, j)] = extra[(0, j)];
            }
            let sc2 = Scenario::new(
                theta.clone(),
                h,
                DVector::from_element(13, 1.3),
                DVector::zeros(13),
            )
            .unwrap();
            let b2 = crb(&sc2, &theta).unwrap();
            for i in 0..3 {
                assert!(b2[i] <= b1[i] + 1e-12, "CRB grew at {i}");
            }
        }
    }

    #[test]
    fn clamping_counts() {
        assert_eq!(clamp_probability(0.5f64), (0.5, false));
        let (p, hit) = clamp_probability(1e-20f64);
        assert!(hit && p == PROB_EPS);
        let (p, hit) = clamp_probability(1.0f64);
        assert!(hit && p == 1.0 - PROB_EPS);
    }
}
