//! Randomized invariants over the numerics layer.

use nalgebra::DVector;
use onebit_detect::quantizer::{
    gaussian_ccdf, inverse_gaussian_ccdf, quantize, threshold_efficiency,
};
use proptest::prelude::*;

proptest! {
    #[test]
    fn inverse_ccdf_round_trips(p in 1e-3f64..0.999, sigma in 0.1f64..10.0) {
        let u = inverse_gaussian_ccdf(p, sigma).unwrap();
        let back: f64 = gaussian_ccdf(u, sigma);
        prop_assert!((back - p).abs() <= 1e-9, "p {p} back {back}");
    }

    #[test]
    fn quantize_matches_strict_comparison(
        x in prop::collection::vec(-10.0f64..10.0, 1..40),
        tau in -3.0f64..3.0,
    ) {
        let n = x.len();
        let xv = DVector::from_vec(x.clone());
        let taus = DVector::from_element(n, tau);
        let bits = quantize(&xv, &taus).unwrap();
        for i in 0..n {
            prop_assert_eq!(bits.get(i), u8::from(x[i] - tau > 0.0));
        }
    }

    #[test]
    fn threshold_efficiency_bounded_by_peak(tau in -20.0f64..20.0, sigma in 0.1f64..5.0) {
        let g: f64 = threshold_efficiency(tau, sigma);
        let peak = 2.0 / (std::f64::consts::PI * sigma * sigma);
        prop_assert!(g >= 0.0);
        prop_assert!(g <= peak * (1.0 + 1e-12));
        // symmetry in tau
        let mirrored: f64 = threshold_efficiency(-tau, sigma);
        prop_assert!((g - mirrored).abs() <= 1e-12 * g.max(1e-300));
    }

    #[test]
    fn ccdf_is_monotone_decreasing(z in -6.0f64..8.0, d in 1e-3f64..2.0, sigma in 0.2f64..4.0) {
        // arguments scaled by sigma so both values stay representably
        // away from 1, where f64 spacing would swallow the decrement
        let a: f64 = gaussian_ccdf(z * sigma, sigma);
        let b: f64 = gaussian_ccdf((z + d) * sigma, sigma);
        prop_assert!(b < a);
    }
}
