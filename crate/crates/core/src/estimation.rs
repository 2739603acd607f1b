//! Estimators of the sparse signal: BIHT (the sparsity-driven default),
//! the concave one-bit MLE, and the closed-form clairvoyant weighted
//! least squares.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::quantizer::{clamp_probability, gaussian_ccdf, gaussian_pdf, BitVector};
use crate::scalar::{lit, Real};

/// How the scale ambiguity of one-bit data is resolved at estimator exit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormMode<T: Real> {
    /// Rescale to unit L2 norm (default; bits carry no amplitude).
    Unit,
    /// Rescale to a known true norm; diagnostics only.
    Oracle(T),
    /// Leave the iterate as produced.
    Raw,
}

#[derive(Debug, Clone)]
pub struct SparseEstimate<T: Real> {
    pub theta_hat: DVector<T>,
    pub sparsity: usize,
    pub norm_mode: NormMode<T>,
    pub iterations_used: usize,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct BihtConfig<T: Real> {
    pub sparsity: usize,
    /// Step size; `None` selects 1 / lambda_max(H'H) by power iteration.
    pub step_size: Option<T>,
    pub max_iterations: usize,
    pub norm_mode: NormMode<T>,
    /// Retry an iteration with halved step (up to 5 times) if it grows
    /// the sign-consistency residual; if no retry helps, iteration stops
    /// at the current point. Off by default.
    pub monotone_guard: bool,
}

impl<T: Real> BihtConfig<T> {
    pub fn new(sparsity: usize) -> Self {
        BihtConfig {
            sparsity,
            step_size: None,
            max_iterations: 100,
            norm_mode: NormMode::Unit,
            monotone_guard: false,
        }
    }
}

/// Sign map to {-1,+1} with zero going to -1, matching the quantizer's
/// boundary rule (x = tau yields bit 0).
fn sign_pm<T: Real>(v: T) -> T {
    if v > T::zero() {
        T::one()
    } else {
        -T::one()
    }
}

fn hard_threshold<T: Real>(v: &mut DVector<T>, k: usize) {
    let m = v.len();
    if k >= m {
        return;
    }
    // keep the k largest magnitudes; ties keep the lower index
    let mut idx: Vec<usize> = (0..m).collect();
    idx.sort_by(|&a, &b| {
        v[b].abs()
            .partial_cmp(&v[a].abs())
            .unwrap()
            .then(a.cmp(&b))
    });
    for &i in &idx[k..] {
        v[i] = T::zero();
    }
}

/// Largest eigenvalue of H'H by power iteration.
pub fn spectral_step<T: Real>(h: &DMatrix<T>) -> T {
    let m = h.ncols();
    let mut v = DVector::from_element(m, T::one() / lit::<T>((m as f64).sqrt()));
    let mut lambda = T::one();
    for _ in 0..50 {
        let w = h.transpose() * (h * &v);
        let norm = w.norm();
        if norm == T::zero() {
            return T::one();
        }
        lambda = norm;
        v = w / norm;
    }
    T::one() / lambda
}

fn residual_count<T: Real>(
    s: &DVector<T>,
    h: &DMatrix<T>,
    taus: &DVector<T>,
    theta: &DVector<T>,
) -> usize {
    let r = h * theta - taus;
    (0..s.len()).filter(|&n| s[n] != sign_pm(r[n])).count()
}

fn apply_norm_mode<T: Real>(theta: &mut DVector<T>, mode: NormMode<T>) {
    let norm = theta.norm();
    if norm == T::zero() {
        return;
    }
    match mode {
        NormMode::Unit => *theta /= norm,
        NormMode::Oracle(target) => *theta *= target / norm,
        NormMode::Raw => {}
    }
}

/// Binary iterative hard thresholding over the shifted signs
/// s_n = 2 b_n - 1 of the one-bit reports.
pub fn biht<T: Real>(
    bits: &BitVector,
    h: &DMatrix<T>,
    taus: &DVector<T>,
    config: &BihtConfig<T>,
) -> Result<SparseEstimate<T>> {
    let (n, m) = (h.nrows(), h.ncols());
    if bits.is_empty() {
        return Err(Error::invalid("bits", "empty bit vector"));
    }
    if bits.len() != n {
        return Err(Error::DimensionMismatch {
            context: "biht bits vs matrix rows",
            expected: n,
            got: bits.len(),
        });
    }
    if taus.len() != n {
        return Err(Error::DimensionMismatch {
            context: "biht thresholds vs matrix rows",
            expected: n,
            got: taus.len(),
        });
    }
    if config.sparsity == 0 || config.sparsity > m {
        return Err(Error::invalid(
            "sparsity",
            format!("must lie in 1..={m}, got {}", config.sparsity),
        ));
    }

    let s = bits.signs::<T>();
    let step = config.step_size.unwrap_or_else(|| spectral_step(h));
    let half = lit::<T>(0.5);

    let mut theta = DVector::<T>::zeros(m);
    let mut residual = residual_count(&s, h, taus, &theta);
    let mut iterations = 0;
    let mut converged = residual == 0;

    while !converged && iterations < config.max_iterations {
        let r = h * &theta - taus;
        let predicted = r.map(sign_pm);
        let grad = h.transpose() * (&s - predicted);

        let mut mu = step;
        let mut accepted = false;
        for _ in 0..=5 {
            let mut candidate = &theta + &grad * (mu * half);
            hard_threshold(&mut candidate, config.sparsity);
            let cand_residual = residual_count(&s, h, taus, &candidate);
            if !config.monotone_guard || cand_residual <= residual {
                theta = candidate;
                residual = cand_residual;
                accepted = true;
                break;
            }
            mu *= half;
        }
        iterations += 1;
        converged = residual == 0;
        if !accepted {
            // guard exhausted its halvings without finding a non-worsening
            // step; keep the current iterate rather than accept a regression
            break;
        }
    }

    apply_norm_mode(&mut theta, config.norm_mode);
    Ok(SparseEstimate {
        theta_hat: theta,
        sparsity: config.sparsity,
        norm_mode: config.norm_mode,
        iterations_used: iterations,
        converged,
    })
}

#[derive(Debug, Clone)]
pub struct MleConfig<T: Real> {
    pub max_iterations: usize,
    /// Box constraint: iterates satisfy |theta_i| <= bound. The concave
    /// likelihood is unbounded on separable data, so the domain is compact.
    pub bound: T,
    pub gradient_tol: T,
}

impl<T: Real> Default for MleConfig<T> {
    fn default() -> Self {
        MleConfig {
            max_iterations: 500,
            bound: lit(1e3),
            gradient_tol: lit(1e-8),
        }
    }
}

/// One-bit log-likelihood of theta, with clamped probabilities.
pub fn one_bit_log_likelihood<T: Real>(
    bits: &BitVector,
    h: &DMatrix<T>,
    noise_std: &DVector<T>,
    taus: &DVector<T>,
    theta: &DVector<T>,
) -> T {
    let proj = h * theta;
    let mut ll = T::zero();
    for n in 0..bits.len() {
        let (f, _) = clamp_probability(gaussian_ccdf(taus[n] - proj[n], noise_std[n]));
        ll += if bits.get(n) == 1 {
            f.ln()
        } else {
            (T::one() - f).ln()
        };
    }
    ll
}

/// Gradient of the one-bit log-likelihood.
pub fn one_bit_log_likelihood_gradient<T: Real>(
    bits: &BitVector,
    h: &DMatrix<T>,
    noise_std: &DVector<T>,
    taus: &DVector<T>,
    theta: &DVector<T>,
) -> DVector<T> {
    let proj = h * theta;
    let m = h.ncols();
    let mut grad = DVector::zeros(m);
    for n in 0..bits.len() {
        let u = taus[n] - proj[n];
        let (f, _) = clamp_probability(gaussian_ccdf(u, noise_std[n]));
        let p = gaussian_pdf(u, noise_std[n]);
        let coeff = if bits.get(n) == 1 {
            p / f
        } else {
            -p / (T::one() - f)
        };
        grad += h.row(n).transpose() * coeff;
    }
    grad
}

/// Maximizes the concave one-bit log-likelihood by projected gradient
/// ascent with backtracking, inside the box |theta_i| <= bound.
pub fn one_bit_mle<T: Real>(
    bits: &BitVector,
    h: &DMatrix<T>,
    noise_std: &DVector<T>,
    taus: &DVector<T>,
    config: &MleConfig<T>,
) -> Result<SparseEstimate<T>> {
    let (n, m) = (h.nrows(), h.ncols());
    if bits.is_empty() {
        return Err(Error::invalid("bits", "empty bit vector"));
    }
    if bits.len() != n || noise_std.len() != n || taus.len() != n {
        return Err(Error::DimensionMismatch {
            context: "one_bit_mle inputs vs matrix rows",
            expected: n,
            got: bits.len(),
        });
    }

    let bound = config.bound;
    let project = |v: &mut DVector<T>| {
        for x in v.iter_mut() {
            if *x > bound {
                *x = bound;
            } else if *x < -bound {
                *x = -bound;
            }
        }
    };

    let mut theta = DVector::<T>::zeros(m);
    let mut ll = one_bit_log_likelihood(bits, h, noise_std, taus, &theta);
    let mut step = T::one();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < config.max_iterations {
        let grad = one_bit_log_likelihood_gradient(bits, h, noise_std, taus, &theta);
        if grad.norm() <= config.gradient_tol {
            converged = true;
            break;
        }
        // backtracking ascent step
        let mut accepted = false;
        for _ in 0..40 {
            let mut candidate = &theta + &grad * step;
            project(&mut candidate);
            let cand_ll = one_bit_log_likelihood(bits, h, noise_std, taus, &candidate);
            if cand_ll >= ll {
                theta = candidate;
                ll = cand_ll;
                step *= lit::<T>(1.5);
                accepted = true;
                break;
            }
            step *= lit::<T>(0.5);
        }
        iterations += 1;
        if !accepted {
            // step underflowed: we are at a (projected) stationary point
            converged = grad.norm() <= config.gradient_tol;
            break;
        }
    }

    Ok(SparseEstimate {
        theta_hat: theta,
        sparsity: m,
        norm_mode: NormMode::Raw,
        iterations_used: iterations,
        converged,
    })
}

/// Closed-form weighted least squares: (H'C^-1 H)^-1 H'C^-1 x with
/// C = diag(sigma_n^2).
pub fn clairvoyant_mle<T: Real>(
    x: &DVector<T>,
    h: &DMatrix<T>,
    noise_std: &DVector<T>,
) -> Result<DVector<T>> {
    let (n, m) = (h.nrows(), h.ncols());
    if x.len() != n || noise_std.len() != n {
        return Err(Error::DimensionMismatch {
            context: "clairvoyant_mle inputs vs matrix rows",
            expected: n,
            got: x.len(),
        });
    }
    // whitened normal equations
    let mut a = DMatrix::zeros(m, m);
    let mut b = DVector::zeros(m);
    for row in 0..n {
        let w = T::one() / (noise_std[row] * noise_std[row]);
        let hr = h.row(row);
        for i in 0..m {
            b[i] += w * hr[i] * x[row];
            for j in 0..m {
                a[(i, j)] += w * hr[i] * hr[j];
            }
        }
    }
    let svd = a.clone().svd(true, true);
    let s_max: T = svd.singular_values.max();
    let s_min: T = svd.singular_values.min();
    let condition = if s_min > T::zero() {
        (s_max / s_min).to_f64().unwrap_or(f64::INFINITY)
    } else {
        f64::INFINITY
    };
    if !condition.is_finite() || condition > 1e12 {
        return Err(Error::Singular {
            context: "clairvoyant MLE normal equations",
            condition,
        });
    }
    a.cholesky()
        .map(|chol| chol.solve(&b))
        .ok_or(Error::Singular {
            context: "clairvoyant MLE normal equations",
            condition,
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::generate_measurement_matrix;
    use crate::quantizer::quantize;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn biht_noiseless_recovery() {
        let (n, m, k) = (200, 10, 2);
        let mut hits = 0;
        let trials = 100;
        for seed in 0..trials {
            let mut r = rng(seed);
            let h = generate_measurement_matrix::<f64, _>(n, m, &mut r).unwrap();
            let mut theta = DVector::zeros(m);
            theta[1] = 1.0;
            theta[6] = -2.0;
            let bits = quantize(&(&h * &theta), &DVector::zeros(n)).unwrap();
            let mut cfg = BihtConfig::new(k);
            cfg.max_iterations = 200;
            let est = biht(&bits, &h, &DVector::zeros(n), &cfg).unwrap();
            let support: Vec<usize> = (0..m).filter(|&i| est.theta_hat[i] != 0.0).collect();
            let corr = est.theta_hat.dot(&theta) / (est.theta_hat.norm() * theta.norm());
            if support == vec![1, 6] && corr >= 0.95 {
                hits += 1;
            }
        }
        // generate-and-recover oracle: average success across seeds
        assert!(hits >= 95, "only {hits}/{trials} recoveries");
    }

    #[test]
    fn biht_sparsity_bound_respected() {
        let mut r = rng(3);
        let h = generate_measurement_matrix::<f64, _>(40, 8, &mut r).unwrap();
        let bits = quantize(
            &(&h * &DVector::from_fn(8, |i, _| (i as f64) - 3.0)),
            &DVector::zeros(40),
        )
        .unwrap();
        let est = biht(&bits, &h, &DVector::zeros(40), &BihtConfig::new(3)).unwrap();
        let nnz = (0..8).filter(|&i| est.theta_hat[i] != 0.0).count();
        assert!(nnz <= 3);
        assert_relative_eq!(est.theta_hat.norm(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn biht_full_sparsity_single_iteration() {
        // K = M disables thresholding; one step from zero follows the
        // gradient H'(s + 1) = 2 H' b (sign of zero is -1 there).
        let mut r = rng(5);
        let h = generate_measurement_matrix::<f64, _>(12, 4, &mut r).unwrap();
        let x = generate_measurement_matrix::<f64, _>(12, 1, &mut r)
            .unwrap()
            .column(0)
            .into_owned();
        let bits = quantize(&x, &DVector::zeros(12)).unwrap();
        let mut cfg = BihtConfig::new(4);
        cfg.max_iterations = 1;
        cfg.norm_mode = NormMode::Raw;
        cfg.step_size = Some(0.5);
        let est = biht(&bits, &h, &DVector::zeros(12), &cfg).unwrap();
        let b_vec = DVector::from_iterator(12, bits.iter().map(f64::from));
        let expect = h.transpose() * b_vec * 0.5; // (mu/2) * H'(2b)
        for i in 0..4 {
            assert_relative_eq!(est.theta_hat[i], expect[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn biht_all_ones_cone_feasible() {
        // H = I: the all-ones bit pattern is realized by any positive
        // theta, so the residual must hit zero.
        let h = DMatrix::<f64>::identity(3, 3);
        let bits = BitVector::new(vec![1, 1, 1]).unwrap();
        let est = biht(&bits, &h, &DVector::zeros(3), &BihtConfig::new(3)).unwrap();
        assert!(est.converged);
        let r = &h * &est.theta_hat;
        assert!(r.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn biht_rejects_bad_config() {
        let h = DMatrix::<f64>::identity(3, 3);
        let bits = BitVector::new(vec![1, 0, 1]).unwrap();
        assert!(biht(&bits, &h, &DVector::zeros(3), &BihtConfig::new(4)).is_err());
        let empty = BitVector::new(vec![]).unwrap();
        assert!(biht(&empty, &h, &DVector::zeros(3), &BihtConfig::new(2)).is_err());
    }

    #[test]
    fn biht_monotone_guard_residual_nonincreasing() {
        let mut r = rng(17);
        let h = generate_measurement_matrix::<f64, _>(60, 6, &mut r).unwrap();
        let mut theta = DVector::zeros(6);
        theta[0] = 1.0;
        theta[4] = -1.5;
        let noise = generate_measurement_matrix::<f64, _>(60, 1, &mut r)
            .unwrap()
            .column(0)
            * 0.5;
        let bits = quantize(&(&h * &theta + noise), &DVector::zeros(60)).unwrap();
        let s = bits.signs::<f64>();

        let mut cfg = BihtConfig::new(2);
        cfg.monotone_guard = true;
        cfg.norm_mode = NormMode::Raw;

        // re-run iteration by iteration and check the accepted residuals
        let mut last = residual_count(&s, &h, &DVector::zeros(60), &DVector::zeros(6));
        for iters in 1..=20 {
            let mut c = cfg.clone();
            c.max_iterations = iters;
            let est = biht(&bits, &h, &DVector::zeros(60), &c).unwrap();
            let res = residual_count(&s, &h, &DVector::zeros(60), &est.theta_hat);
            assert!(res <= last, "residual grew: {res} > {last}");
            last = res;
            if est.converged {
                break;
            }
        }
    }

    fn mirror_instance() -> (BitVector, DMatrix<f64>, DVector<f64>, DVector<f64>) {
        // every row duplicated, once with bit 1 and once with bit 0, so the
        // per-row likelihood factors balance exactly at theta = 0
        let mut r = rng(9);
        let base = generate_measurement_matrix::<f64, _>(5, 3, &mut r).unwrap();
        let mut h = DMatrix::zeros(10, 3);
        let mut bits = Vec::new();
        for i in 0..5 {
            for j in 0..3 {
                h[(2 * i, j)] = base[(i, j)];
                h[(2 * i + 1, j)] = base[(i, j)];
            }
            bits.push(1);
            bits.push(0);
        }
        (
            BitVector::new(bits).unwrap(),
            h,
            DVector::from_element(10, 1.0),
            DVector::zeros(10),
        )
    }

    #[test]
    fn mle_balanced_data_stays_at_zero() {
        let (bits, h, sigma, taus) = mirror_instance();
        let est = one_bit_mle(&bits, &h, &sigma, &taus, &MleConfig::default()).unwrap();
        // 0 is a stationary point of a concave objective
        let g = one_bit_log_likelihood_gradient(&bits, &h, &sigma, &taus, &DVector::zeros(3));
        assert!(g.norm() < 1e-10);
        assert!(est.theta_hat.norm() < 1e-8, "norm {}", est.theta_hat.norm());
    }

    #[test]
    fn mle_gradient_closed_form_at_zero() {
        let mut r = rng(23);
        let h = generate_measurement_matrix::<f64, _>(15, 4, &mut r).unwrap();
        let bits = BitVector::new((0..15).map(|i| (i % 2) as u8).collect()).unwrap();
        let sigma = DVector::from_element(15, 1.0);
        let taus = DVector::zeros(15);
        let g = one_bit_log_likelihood_gradient(&bits, &h, &sigma, &taus, &DVector::zeros(4));
        // 2 p(0) sum (2b-1) h with p(0) = 1/sqrt(2 pi)
        let p0 = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        let expect = h.transpose() * bits.signs::<f64>() * (2.0 * p0);
        for i in 0..4 {
            assert_relative_eq!(g[i], expect[i], max_relative = 1e-12);
        }
    }

    #[test]
    fn mle_gradient_matches_finite_differences() {
        let mut r = rng(31);
        let h = generate_measurement_matrix::<f64, _>(20, 3, &mut r).unwrap();
        let bits = BitVector::new((0..20).map(|i| ((i * 7) % 3 == 0) as u8).collect()).unwrap();
        let sigma = DVector::from_fn(20, |i, _| 0.8 + 0.05 * i as f64);
        let taus = DVector::from_fn(20, |i, _| 0.1 * (i as f64 - 10.0) / 10.0);
        let theta = DVector::from_vec(vec![0.3, -0.7, 0.2]);
        let g = one_bit_log_likelihood_gradient(&bits, &h, &sigma, &taus, &theta);
        let step = 1e-6;
        for i in 0..3 {
            let mut tp = theta.clone();
            let mut tm = theta.clone();
            tp[i] += step;
            tm[i] -= step;
            let fd = (one_bit_log_likelihood(&bits, &h, &sigma, &taus, &tp)
                - one_bit_log_likelihood(&bits, &h, &sigma, &taus, &tm))
                / (2.0 * step);
            assert_relative_eq!(g[i], fd, max_relative = 1e-5);
        }
    }

    #[test]
    fn mle_separable_data_hits_box_bound() {
        // all bits 1 with rows of one sign: likelihood grows without bound
        let h = DMatrix::from_row_slice(4, 1, &[1.0, 2.0, 0.5, 1.5]);
        let bits = BitVector::new(vec![1, 1, 1, 1]).unwrap();
        let sigma = DVector::from_element(4, 1.0);
        let taus = DVector::zeros(4);
        let cfg = MleConfig {
            max_iterations: 2000,
            bound: 5.0,
            gradient_tol: 1e-8,
        };
        let est = one_bit_mle(&bits, &h, &sigma, &taus, &cfg).unwrap();
        assert_relative_eq!(est.theta_hat[0], 5.0, max_relative = 1e-6);
        assert!(!est.converged);
    }

    #[test]
    fn mle_never_decreases_from_zero() {
        let (bits, h, sigma, taus) = {
            let mut r = rng(41);
            let h = generate_measurement_matrix::<f64, _>(25, 4, &mut r).unwrap();
            let theta = DVector::from_vec(vec![1.0, 0.0, -1.0, 0.5]);
            let x = &h * &theta;
            (
                quantize(&x, &DVector::zeros(25)).unwrap(),
                h,
                DVector::from_element(25, 1.0),
                DVector::zeros(25),
            )
        };
        let est = one_bit_mle(&bits, &h, &sigma, &taus, &MleConfig::default()).unwrap();
        let l0 = one_bit_log_likelihood(&bits, &h, &sigma, &taus, &DVector::zeros(4));
        let lhat = one_bit_log_likelihood(&bits, &h, &sigma, &taus, &est.theta_hat);
        assert!(lhat >= l0);
    }

    #[test]
    fn mle_concavity_along_segments() {
        let mut r = rng(47);
        let h = generate_measurement_matrix::<f64, _>(20, 3, &mut r).unwrap();
        let bits = BitVector::new((0..20).map(|i| (i % 2) as u8).collect()).unwrap();
        let sigma = DVector::from_element(20, 1.0);
        let taus = DVector::zeros(20);
        for _ in 0..100 {
            let a = generate_measurement_matrix::<f64, _>(3, 1, &mut r)
                .unwrap()
                .column(0)
                .into_owned();
            let b = generate_measurement_matrix::<f64, _>(3, 1, &mut r)
                .unwrap()
                .column(0)
                .into_owned();
            let mid = (&a + &b) * 0.5;
            let la = one_bit_log_likelihood(&bits, &h, &sigma, &taus, &a);
            let lb = one_bit_log_likelihood(&bits, &h, &sigma, &taus, &b);
            let lm = one_bit_log_likelihood(&bits, &h, &sigma, &taus, &mid);
            assert!(lm >= 0.5 * (la + lb) - 1e-10);
        }
    }

    #[test]
    fn clairvoyant_identity_and_noiseless() {
        let h = DMatrix::<f64>::identity(4, 4);
        let x = DVector::from_vec(vec![1.0, -2.0, 0.5, 3.0]);
        let est = clairvoyant_mle(&x, &h, &DVector::from_element(4, 1.0)).unwrap();
        for i in 0..4 {
            assert_relative_eq!(est[i], x[i], epsilon = 1e-12);
        }

        let mut r = rng(53);
        let h = generate_measurement_matrix::<f64, _>(20, 6, &mut r).unwrap();
        let theta = DVector::from_fn(6, |i, _| (i as f64) - 2.5);
        let est = clairvoyant_mle(&(&h * &theta), &h, &DVector::from_element(20, 2.0)).unwrap();
        for i in 0..6 {
            assert_relative_eq!(est[i], theta[i], epsilon = 1e-10);
        }
    }

    #[test]
    fn clairvoyant_matches_whitened_svd_solver() {
        for seed in 0..20 {
            let mut r = rng(100 + seed);
            let h = generate_measurement_matrix::<f64, _>(50, 10, &mut r).unwrap();
            let x = generate_measurement_matrix::<f64, _>(50, 1, &mut r)
                .unwrap()
                .column(0)
                .into_owned();
            let sigma = DVector::from_fn(50, |i, _| 0.5 + 0.03 * i as f64);
            let est = clairvoyant_mle(&x, &h, &sigma).unwrap();

            // independent oracle: whiten and solve by SVD least squares
            let mut hw = h.clone();
            let mut xw = x.clone();
            for i in 0..50 {
                let w = 1.0 / sigma[i];
                for j in 0..10 {
                    hw[(i, j)] *= w;
                }
                xw[i] *= w;
            }
            let oracle = hw.svd(true, true).solve(&xw, 1e-14).unwrap();
            let rel = (&est - &oracle).norm() / oracle.norm();
            assert!(rel < 1e-8, "seed {seed}: relative error {rel}");
        }
    }

    #[test]
    fn clairvoyant_scaling_equivariance() {
        let mut r = rng(61);
        let h = generate_measurement_matrix::<f64, _>(12, 3, &mut r).unwrap();
        let x = generate_measurement_matrix::<f64, _>(12, 1, &mut r)
            .unwrap()
            .column(0)
            .into_owned();
        let sigma = DVector::from_element(12, 1.0);
        let a = clairvoyant_mle(&x, &h, &sigma).unwrap();
        let b = clairvoyant_mle(&(&x * 3.0), &h, &sigma).unwrap();
        for i in 0..3 {
            assert_relative_eq!(b[i], 3.0 * a[i], max_relative = 1e-10);
        }
    }

    #[test]
    fn clairvoyant_singular_when_underdetermined() {
        let mut r = rng(67);
        let h = generate_measurement_matrix::<f64, _>(5, 10, &mut r).unwrap();
        let x = DVector::from_element(5, 1.0);
        match clairvoyant_mle(&x, &h, &DVector::from_element(5, 1.0)) {
            Err(Error::Singular { .. }) => {}
            other => panic!("expected singularity, got {other:?}"),
        }
    }
}
