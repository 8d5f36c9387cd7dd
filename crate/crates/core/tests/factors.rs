use ctbounds::factor::FactorFamily;
use proptest::prelude::*;

const H: f64 = 1e-5;

fn families() -> impl Strategy<Value = FactorFamily> {
    prop_oneof![
        (1u64..12).prop_map(|k| FactorFamily::TruncatedGeometric { k }),
        Just(FactorFamily::Geometric),
        (1u64..12, 0.05f64..0.95).prop_map(|(k, s)| FactorFamily::Binomial { k, s }),
        (0.1f64..5.0).prop_map(|s| FactorFamily::ExpPoisson { s }),
        (1u64..12).prop_map(|k| FactorFamily::VolumeFinite { k }),
        Just(FactorFamily::VolumeInfinite),
    ]
}

/// A point well inside the domain, with room for the difference stencil.
fn point(f: &FactorFamily, x: f64) -> f64 {
    if f.needs_negative() {
        -0.05 - 4.0 * x
    } else {
        8.0 * x - 4.0
    }
}

fn close(fd: f64, exact: f64) -> bool {
    (fd - exact).abs() <= 1e-5 * exact.abs().max(1e-2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(600))]

    #[test]
    fn mean_is_derivative_of_log_g(f in families(), x in 0.0f64..1.0) {
        let t = point(&f, x);
        let fd = (f.log_g(t + H) - f.log_g(t - H)) / (2.0 * H);
        prop_assert!(close(fd, f.mean(t)), "{f:?} t={t}: fd {fd} vs {}", f.mean(t));
    }

    #[test]
    fn var_is_derivative_of_mean(f in families(), x in 0.0f64..1.0) {
        let t = point(&f, x);
        let fd = (f.mean(t + H) - f.mean(t - H)) / (2.0 * H);
        prop_assert!(close(fd, f.var(t)), "{f:?} t={t}: fd {fd} vs {}", f.var(t));
    }

    #[test]
    fn log_g_is_convex(f in families(), x in 0.0f64..1.0, y in 0.0f64..1.0, w in 0.0f64..1.0) {
        let (a, b) = (point(&f, x), point(&f, y));
        let mid = w * a + (1.0 - w) * b;
        let chord = w * f.log_g(a) + (1.0 - w) * f.log_g(b);
        prop_assert!(f.log_g(mid) <= chord + 1e-9 * chord.abs().max(1.0));
        prop_assert!(f.var(a) >= 0.0);
    }

    #[test]
    fn mean_stays_below_cap(f in families(), x in 0.0f64..1.0) {
        let t = point(&f, x);
        let m = f.mean(t);
        prop_assert!(m >= 0.0);
        if let Some(k) = f.cap().finite() {
            prop_assert!(m <= k as f64 * (1.0 + 1e-12));
        }
    }
}

#[test]
fn volume_factor_is_continuous_at_zero() {
    for k in [1u64, 3, 10] {
        let f = FactorFamily::VolumeFinite { k };
        assert!((f.log_g(0.0) - (k as f64).ln()).abs() < 1e-12);
        for t in [1e-6, -1e-6, 2e-4, -2e-4] {
            let direct = ((k as f64 * t).exp_m1() / t).ln();
            assert!((f.log_g(t) - direct).abs() < 1e-10, "k={k} t={t}");
        }
    }
}

#[test]
fn outside_domain_is_infinite() {
    assert_eq!(FactorFamily::Geometric.log_g(0.0), f64::INFINITY);
    assert_eq!(FactorFamily::VolumeInfinite.log_g(0.5), f64::INFINITY);
}
