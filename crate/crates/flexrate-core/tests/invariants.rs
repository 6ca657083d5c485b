//! Property-based invariants across modules.

use flexrate_core::blockage::{blockage_probability, BodyGeometry, Deployment};
use flexrate_core::channel::{snr_ccdf, CcdfSpec, FadingParams, MRounding};
use flexrate_core::rate::{interval_expected_se, per_slot_expected_se};
use flexrate_core::specfun::bessel_k_half;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn bessel_positive_and_finite_log(n in 0u32..=64, z in 1e-3f64..1e4) {
        let v = bessel_k_half(n, z).unwrap();
        prop_assert!(v.is_finite_log());
    }

    #[test]
    fn bessel_monotone_in_argument(n in 0u32..=64, z in 1e-2f64..1e3, factor in 1.01f64..4.0) {
        let a = bessel_k_half(n, z).unwrap().ln();
        let b = bessel_k_half(n, z * factor).unwrap().ln();
        prop_assert!(b < a);
    }

    #[test]
    fn blockage_probability_within_bounds(
        w in 1e-3f64..5.0,
        r in 0.0f64..2.0,
        h_b in 1e-3f64..2.0,
        h_a in 0.1f64..20.0,
        d in 0.0f64..100.0,
    ) {
        let body = BodyGeometry::new(w, r, h_b).unwrap();
        let dep = Deployment::new(h_a, d).unwrap();
        let p = blockage_probability(&body, &dep).unwrap();
        prop_assert!((0.0..=0.5).contains(&p));
    }

    #[test]
    fn interval_se_equals_slot_sum(
        p in 0.0f64..1.0,
        xi in 1u64..=80,
        k in 1u64..=16,
        e_l in 0.0f64..25.0,
        e_n in 0.0f64..25.0,
    ) {
        let closed = interval_expected_se(p, xi, k, e_l, e_n);
        let brute: f64 = (1..=xi).map(|i| per_slot_expected_se(i, p, k, e_l, e_n)).sum();
        prop_assert!((closed - brute).abs() <= 1e-12 * brute.abs().max(1e-9));
    }

    #[test]
    fn ccdf_bounded_and_monotone_on_random_pairs(
        m_raw in 0.5f64..12.0,
        alpha in 0.5f64..15.0,
        beta in 0.05f64..1.0,
        ybar_log in 0.0f64..6.0,
        u in 1e-4f64..1e3,
        step in 1.1f64..10.0,
    ) {
        let fading = FadingParams::new(m_raw, alpha, beta).unwrap();
        let ybar = 10f64.powf(ybar_log);
        let spec = CcdfSpec::build(&fading, ybar, MRounding::default()).unwrap();
        let y = u * ybar;
        let lo = snr_ccdf(y, &spec).unwrap();
        let hi = snr_ccdf(y * step, &spec).unwrap();
        prop_assert!((0.0..=1.0).contains(&lo));
        prop_assert!(hi <= lo + 1e-12);
    }
}
