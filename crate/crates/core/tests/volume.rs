mod common;

use common::marg;
use ctbounds::volume::{
    covolume, flow_volume_lower_bound, scaling_estimate, spanning_tree_count, transportation_volume_lower_bound,
    uniform_volume_closed_form,
};
use ctbounds::{CapMatrix, Error, Marginals, SolverSettings};
use num_bigint::BigUint;

#[test]
fn full_support_covolume_is_exact() {
    for m in 1..=6u32 {
        for n in 1..=6u32 {
            let k = CapMatrix::infinite(m as usize, n as usize);
            let expected = BigUint::from(m).pow(n - 1) * BigUint::from(n).pow(m - 1);
            assert_eq!(spanning_tree_count(&k), expected, "{m}x{n}");
            let c = covolume(&k).unwrap();
            let want = 0.5 * ((n - 1) as f64 * (m as f64).ln() + (m - 1) as f64 * (n as f64).ln());
            assert!((c.ln() - want).abs() < 1e-12);
        }
    }
}

#[test]
fn uniform_closed_form_matches_solver() {
    for (m, n, s, t) in [(2u64, 2u64, 1u64, 1u64), (3, 3, 1, 1), (3, 3, 100, 100), (3, 9, 99, 33), (4, 4, 300, 300), (10, 10, 20, 20)] {
        let marginals = Marginals::uniform(m as usize, n as usize, s, t).unwrap();
        let general = transportation_volume_lower_bound(&marginals, SolverSettings::default()).unwrap();
        let closed = uniform_volume_closed_form(m, n, s, t).unwrap();
        assert!((general.value.ln() - closed.ln()).abs() < 1e-8, "{m}x{n}: {} vs {}", general.value.ln(), closed.ln());
    }
}

#[test]
fn birkhoff_bound() {
    let e = std::f64::consts::E;
    let b = transportation_volume_lower_bound(&Marginals::uniform(3, 3, 1, 1).unwrap(), SolverSettings::default()).unwrap();
    assert!((b.value.to_f64() - e.powi(4) / 3f64.powi(7)).abs() < 1e-10);
    assert_eq!(b.value.to_display(3), "2.50e-2");
}

#[test]
fn scaling_estimate_converges_to_birkhoff_volume() {
    // The Ehrhart polynomial of B_3 has leading coefficient 1/8 and the
    // covolume is 9.
    let m = Marginals::uniform(3, 3, 1, 1).unwrap();
    let est = scaling_estimate(&m, &CapMatrix::infinite(3, 3), 400, 50_000_000).unwrap();
    assert!((est.to_f64() / 1.125 - 1.0).abs() < 0.02, "{}", est.to_f64());
}

#[test]
fn bounds_stay_below_scaling_estimates() {
    let cases = [
        (marg(&[1, 1, 1], &[1, 1, 1]), CapMatrix::infinite(3, 3)),
        (marg(&[2, 1], &[1, 2]), CapMatrix::infinite(2, 2)),
        (marg(&[3, 2, 1], &[2, 4]), CapMatrix::infinite(3, 2)),
        (marg(&[2, 2], &[2, 1, 1]), CapMatrix::from_finite(&[vec![1, 1, 1], vec![2, 1, 1]]).unwrap()),
        (marg(&[3, 3], &[2, 2, 2]), CapMatrix::from_finite(&[vec![2, 2, 2], vec![2, 2, 2]]).unwrap()),
    ];
    for (m, k) in &cases {
        let bound = flow_volume_lower_bound(m, k, SolverSettings::default()).unwrap();
        let est = scaling_estimate(m, k, 300, 50_000_000).unwrap();
        assert!(bound.value.ln() <= est.ln(), "{m:?}: bound {} above estimate {}", bound.value, est);
    }
}

#[test]
fn volume_errors() {
    let k = CapMatrix::from_finite(&[vec![1, 0], vec![0, 1]]).unwrap();
    assert_eq!(flow_volume_lower_bound(&marg(&[1, 1], &[1, 1]), &k, SolverSettings::default()), Err(Error::DisconnectedSupport));
    let zero = marg(&[0, 2], &[1, 1]);
    assert!(matches!(
        transportation_volume_lower_bound(&zero, SolverSettings::default()),
        Err(Error::InvalidInput(_))
    ));
    let tight = CapMatrix::from_finite(&[vec![1, 1], vec![1, 1]]).unwrap();
    assert!(matches!(flow_volume_lower_bound(&marg(&[3, 1], &[2, 2]), &tight, SolverSettings::default()), Err(Error::Infeasible(_))));
}
