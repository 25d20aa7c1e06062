use approx::assert_relative_eq;
use proptest::prelude::*;

use critex::propagator::{eigenvalues, heat_multiplier, pointwise_bound_check, propagator};

proptest! {
    #[test]
    fn semigroup(t in 0.0f64..20.0, s in 0.0f64..20.0, r in 0.0f64..50.0) {
        let joined = propagator(t + s, r).unwrap();
        let split = propagator(t, r).unwrap().compose(&propagator(s, r).unwrap());
        prop_assert!((joined.k00 - split.k00).abs() < 1e-10);
        prop_assert!((joined.k01 - split.k01).abs() < 1e-10);
        prop_assert!((joined.k10 - split.k10).abs() < 1e-10);
        prop_assert!((joined.k11 - split.k11).abs() < 1e-10);
    }

    #[test]
    fn liouville(t in 0.0f64..40.0, r in 0.0f64..100.0) {
        let m = propagator(t, r).unwrap();
        prop_assert!((m.det() - (-t).exp()).abs() < 1e-10);
    }

    #[test]
    fn envelope(t in 0.0f64..200.0, r in 0.0f64..20.0) {
        prop_assert!(pointwise_bound_check(t, r));
    }
}

#[test]
fn low_frequency_tracks_heat() {
    // both kernels ≈ e^{-r² t} once the e^{-t} part is gone
    for r in [1e-3, 1e-2, 3e-2] {
        for t in [50.0, 200.0] {
            let m = propagator(t, r).unwrap();
            let heat = heat_multiplier(t, r);
            let tol = 10.0 * (r * r + r.powi(4) * t) * heat;
            assert!((m.k00 - heat).abs() < tol, "r={r} t={t}");
            assert!((m.k01 - heat).abs() < tol, "r={r} t={t}");
        }
    }
}

#[test]
fn eigenvalue_asymptotics() {
    let small = eigenvalues(1e-3).unwrap();
    assert_relative_eq!(small.lambda1.re, -1e-6, max_relative = 1e-5);
    let large = eigenvalues(1e3).unwrap();
    assert_eq!(large.lambda1.re, -0.5);
    assert_relative_eq!(large.lambda1.im.abs(), (1e6f64 - 0.25).sqrt(), max_relative = 1e-12);
}

#[test]
fn rejects_negative_inputs() {
    assert!(propagator(-1.0, 1.0).is_err());
    assert!(eigenvalues(-0.1).is_err());
}
