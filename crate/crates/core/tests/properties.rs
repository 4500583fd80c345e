//! Invariants of the series, modular, mahler, lattice and oracle modules.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use proptest::prelude::*;

use k3_mahler::lattice::{form_sum, kronecker_sum, sebbar_spec};
use k3_mahler::mahler::{apery_v, mahler_kseries, mahler_qseries, mahler_qseries_at_k};
use k3_mahler::modular::{
    eval_at_tau, hauptmodul_series, invert_hauptmodul, k_to_t, paper_tau_fixture, weight4_eisenstein_side,
    weight4_eta_side, FamilySpec, Family, Fixture,
};
use k3_mahler::oracle::{mahler_torus, parse_family, LaurentPoly3};
use k3_mahler::series::{sigma3, FormalSeries};

fn series_strategy() -> impl Strategy<Value = FormalSeries> {
    (1u32..=3, -3i64..=3, prop::collection::vec(-9i64..=9, 1..10), 0i64..12).prop_filter_map(
        "leading coefficient must be nonzero",
        |(grain, offset, coeffs, extra)| {
            (coeffs[0] != 0).then(|| {
                let order = offset + coeffs.len() as i64 - 1 + extra;
                FormalSeries::from_integers(grain, offset, &coeffs, order)
            })
        },
    )
}

proptest! {
    #[test]
    fn series_times_inverse_is_one(s in series_strategy()) {
        let inv = s.pow(-1).unwrap();
        let prod = s.mul(&inv).unwrap();
        let one = FormalSeries::one(s.grain(), prod.order());
        prop_assert_eq!(prod.first_mismatch(&one).unwrap(), None);
    }

    #[test]
    fn sigma3_is_multiplicative(m in 1u64..200, n in 1u64..200) {
        prop_assume!(m.gcd(&n) == 1);
        prop_assert_eq!(sigma3(m * n), sigma3(m) * sigma3(n));
    }

    #[test]
    fn k_round_trip(re in -50.0f64..50.0, im in -50.0f64..50.0, q_family in any::<bool>()) {
        let f = if q_family { FamilySpec::q() } else { FamilySpec::p() };
        let k = Complex64::new(re, im);
        prop_assume!(f.check_regular(k).is_ok());
        let t = k_to_t(&f, k).unwrap();
        prop_assert!(t.norm() <= 1.0 + 1e-12);
        let back = f.k_from_t(t);
        prop_assert!((back - k).norm() <= 1e-12 * (1.0 + k.norm()), "{} -> {}", k, back);
    }

    #[test]
    fn inversion_is_certified(r in 0.001f64..0.9, arg in -3.1f64..3.1, q_family in any::<bool>()) {
        let f = if q_family { FamilySpec::q() } else { FamilySpec::p() };
        let t = Complex64::from_polar(r, arg);
        let eps = 1e-11;
        if let Ok(at) = invert_hauptmodul(&f, t, eps) {
            prop_assert!((eval_at_tau(&f.hauptmodul, at.tau) - t).norm() <= eps);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn torus_scale_covariance(k in prop_oneof![7i64..20, -20i64..-7], c in prop::sample::select(vec![2i64, 10])) {
        let p = parse_family(Family::P, Ratio::from_integer(k));
        let base = mahler_torus(&p, 64).unwrap().value;
        let scaled = mahler_torus(&p.scale(Ratio::from_integer(c)), 64).unwrap().value;
        prop_assert!((scaled - base - (c as f64).ln()).abs() < 1e-10);
    }

    #[test]
    fn torus_inversion_invariance(k in -15i64..15, q_family in any::<bool>()) {
        let family = if q_family { Family::Q } else { Family::P };
        let p = parse_family(family, Ratio::from_integer(k));
        let a = mahler_torus(&p, 64).unwrap().value;
        let b = mahler_torus(&p.invert_x(), 64).unwrap().value;
        prop_assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn euler_product_form_of_p_hauptmodul_to_order_40() {
    let t = hauptmodul_series(&FamilySpec::p(), 40).unwrap();
    for e in (0..=40).step_by(2) {
        assert_eq!(t.coeff(e), Some(BigRational::from_integer(BigInt::from(0))), "w^{e}");
    }
}

#[test]
fn weight4_paths_agree_beyond_30() {
    for f in [FamilySpec::p(), FamilySpec::q()] {
        let eis = weight4_eisenstein_side(&f, 40);
        let eta = weight4_eta_side(&f, 40).unwrap();
        assert_eq!(eis.first_mismatch(&eta).unwrap(), None);
    }
}

#[test]
fn v_n_double_sum_big_integers() {
    // Σ_k C(n,k)² C(n+k,k)² with factorials
    let fact = |n: u64| (1..=n).fold(BigInt::from(1), |acc, i| acc * i);
    let p = FamilySpec::p();
    for n in 0..12u64 {
        let direct: BigInt = (0..=n)
            .map(|k| {
                let a = fact(n) / (fact(k) * fact(n - k));
                let b = fact(n + k) / (fact(k) * fact(n));
                &a * &a * &b * &b
            })
            .sum();
        assert_eq!(apery_v(&p, n).unwrap(), direct, "n = {n}");
    }
}

/// 8 fixtures plus 12 parameters reached by inversion.
fn tail_honesty_points() -> Vec<(FamilySpec, k3_mahler::modular::TauPoint)> {
    let mut pts: Vec<_> = Fixture::ALL
        .iter()
        .map(|&fx| (FamilySpec::of(fx.family()), paper_tau_fixture(fx)))
        .collect();
    for (family, k) in [
        (Family::P, 6.5),
        (Family::P, 8.0),
        (Family::P, 20.0),
        (Family::P, -9.0),
        (Family::P, 1.0),
        (Family::P, 4.0),
        (Family::Q, 13.0),
        (Family::Q, 30.0),
        (Family::Q, -5.0),
        (Family::Q, -20.0),
        (Family::Q, 1.0),
        (Family::Q, 6.0),
    ] {
        let f = FamilySpec::of(family);
        let t = k_to_t(&f, Complex64::new(k, 0.0)).unwrap();
        let at = invert_hauptmodul(&f, t, 1e-11).unwrap();
        pts.push((f, at));
    }
    pts
}

#[test]
fn qseries_tail_bound_is_honest() {
    let pts = tail_honesty_points();
    assert_eq!(pts.len(), 20);
    for (f, at) in pts {
        for eps in [1e-6, 1e-9, 1e-12] {
            let a = mahler_qseries(&f, &at, eps).unwrap();
            let b = mahler_qseries(&f, &at, eps / 10.0).unwrap();
            assert!(
                (a.value - b.value).abs() < a.error_estimate,
                "{} at τ = {}: moved {} with estimate {}",
                f.family,
                at.tau,
                (a.value - b.value).abs(),
                a.error_estimate
            );
        }
    }
}

#[test]
fn kseries_and_qseries_agree_within_estimates() {
    let p = FamilySpec::p();
    for k in [6.5, 7.0, 8.0, 10.0, 20.0, 100.0] {
        let (_, q) = mahler_qseries_at_k(&p, k, 1e-12).unwrap();
        let s = mahler_kseries(&p, k, 1e-12).unwrap();
        assert!(
            (q.value - s.value).abs() <= q.error_estimate + s.error_estimate,
            "k = {k}: {} vs {}",
            q.value,
            s.value
        );
    }
}

#[test]
fn kseries_is_monotone_in_k() {
    let p = FamilySpec::p();
    let vals: Vec<f64> = (13..=40).map(|i| mahler_kseries(&p, i as f64 / 2.0, 1e-12).unwrap().value).collect();
    assert!(vals.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn qseries_matches_torus_between_singular_fibers() {
    // parameters where the preimage nearest the cusp is off the real q-axis
    for (family, k) in [(Family::P, 1.0), (Family::P, 4.0), (Family::Q, 1.0), (Family::Q, 5.0), (Family::Q, -3.0)] {
        let f = FamilySpec::of(family);
        let (_, q) = mahler_qseries_at_k(&f, k, 1e-12).unwrap();
        let torus = mahler_torus(&parse_family(family, Ratio::from_integer(k as i64)), 512).unwrap();
        assert!(
            (q.value - torus.value).abs() < 1e-4,
            "{family} k = {k}: q-series {} vs torus {}",
            q.value,
            torus.value
        );
    }
}

#[test]
fn lattice_imaginary_part_vanishes_on_symmetric_fixtures() {
    for fx in [Fixture::P6, Fixture::Qm6, Fixture::Qm36] {
        let f = FamilySpec::of(fx.family());
        let k = kronecker_sum(&f, &paper_tau_fixture(fx), 200).unwrap();
        assert!(k.imag.abs() <= 1e-12, "{fx}: {}", k.imag);
    }
}

#[test]
fn kronecker_within_own_error_estimate() {
    let p = FamilySpec::p();
    let at = paper_tau_fixture(Fixture::P6);
    let lat = kronecker_sum(&p, &at, 400).unwrap().measure;
    let q = mahler_qseries(&p, &at, 1e-15).unwrap().value;
    assert!((lat.value - q).abs() <= lat.error_estimate);
}

#[test]
fn zero_sum_shrinks_with_radius() {
    let vals: Vec<f64> = [150, 300, 600]
        .iter()
        .map(|&r| form_sum(&sebbar_spec(), r).unwrap().value.abs())
        .collect();
    assert!(vals[0] > vals[1] && vals[1] > vals[2], "{vals:?}");
}

#[test]
fn torus_large_k_asymptotics() {
    let k = 100.0f64;
    let m = mahler_torus(&parse_family(Family::P, Ratio::from_integer(100)), 256).unwrap();
    assert!((m.value - (k.ln() - 6.0 / (2.0 * k * k))).abs() <= 1e-3);
}

#[test]
fn torus_grid_convergence_in_smooth_regime() {
    for (family, k) in [(Family::P, 7), (Family::P, -10), (Family::Q, 20), (Family::Q, -10)] {
        let p = parse_family(family, Ratio::from_integer(k));
        let errs: Vec<f64> = [64, 128, 256].iter().map(|&n| mahler_torus(&p, n).unwrap().error_estimate).collect();
        for w in errs.windows(2) {
            assert!(w[1] < w[0] || w[1] < 1e-13, "{family} k = {k}: {errs:?}");
        }
    }
}

#[test]
fn custom_polynomial_matches_family() {
    let text = "1 1 0 0\n1 -1 0 0\n1 0 1 0\n1 0 -1 0\n1 0 0 1\n1 0 0 -1\n-7 0 0 0\n";
    let custom = LaurentPoly3::from_text(text).unwrap();
    assert_eq!(custom, parse_family(Family::P, Ratio::from_integer(7)));
}
