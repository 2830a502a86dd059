mod common;

use common::{alpha_pp, dnl_beta, pme_bound};
use holderlab::exponents::*;
use holderlab::lab::sweep::{rng, sample_tuple, sample_tuples};
use proptest::prelude::*;

fn pp_tuple(seed: u64, p_two: bool) -> (EquationParams, SourceIntegrability) {
    let class = if p_two { EquationClass::Heat } else { EquationClass::PParabolic };
    let t = sample_tuple(class, &[1, 2, 3], &mut rng(seed));
    (t.params, t.integ)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 512, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn p_two_reduces_to_heat_exponent(seed in any::<u64>()) {
        let (hp, integ) = pp_tuple(seed, true);
        let pp = EquationParams::p_parabolic(2.0, hp.n).unwrap();
        let rep = sharp_exponents(&pp, &integ, None).unwrap();
        let n = hp.n as f64;
        let expect = 1.0 - (2.0 / integ.r + n / integ.q - 1.0);
        prop_assert!((rep.alpha_space - expect).abs() <= 1e-12);
        prop_assert_eq!(rep.theta, 2.0);
    }

    #[test]
    fn alpha_matches_rational_form(seed in any::<u64>()) {
        let (params, integ) = pp_tuple(seed, false);
        let rep = sharp_exponents(&params, &integ, None).unwrap();
        let oracle = alpha_pp(params.p, params.n as f64, integ.q, integ.r);
        prop_assert!((rep.alpha_space - oracle).abs() <= 1e-12, "{} vs {}", rep.alpha_space, oracle);
        prop_assert!(rep.alpha_space > 0.0 && rep.alpha_space < 1.0);
        prop_assert_eq!(rep.branch, Branch::SourceLimited);
        prop_assert!((rep.alpha_time - rep.alpha_space / rep.theta).abs() <= 1e-15);
    }

    #[test]
    fn r_infinite_reduction(p in 2.05f64..8.0, n in 1usize..=3, iq in 0.001f64..1.0) {
        let q = 1.0 / iq;
        let integ = SourceIntegrability { q, r: f64::INFINITY };
        let params = EquationParams::p_parabolic(p, n).unwrap();
        prop_assume!(check_admissibility(&params, &integ).admissible);
        let a = sharp_exponents(&params, &integ, None).unwrap().alpha_space;
        let nf = n as f64;
        prop_assert!((a - (p * q - nf) / (q * (p - 1.0))).abs() <= 1e-12);
        prop_assert!((a - p / (p - 1.0) * ((q - nf / p) / q)).abs() <= 1e-12);
    }

    #[test]
    fn theta_forms_and_ranges(seed in any::<u64>()) {
        let (params, integ) = pp_tuple(seed, false);
        let rep = sharp_exponents(&params, &integ, None).unwrap();
        let (p, a) = (params.p, rep.alpha_space);
        prop_assert!((rep.theta - (a * 2.0 + (1.0 - a) * p)).abs() <= 1e-12);
        prop_assert!(rep.theta > 2.0 && rep.theta < p);

        let t = sample_tuple(EquationClass::Pme, &[1], &mut rng(seed));
        let rep = sharp_exponents(&t.params, &t.integ, None).unwrap();
        let (m, a) = (t.params.m, rep.raw_alpha);
        prop_assert!((rep.theta - (a * (1.0 + 1.0 / m) + (1.0 - a) * 2.0)).abs() <= 1e-12);
        prop_assert!(rep.theta >= 1.0 + 1.0 / m - 1e-15 && rep.theta < 2.0);
        prop_assert!((rep.alpha_space - a / m).abs() <= 1e-15);
    }

    #[test]
    fn increasing_in_p(seed in any::<u64>()) {
        let (params, integ) = pp_tuple(seed, false);
        prop_assert_eq!(p_monotonicity_sign(params.n, integ.q, integ.r), Sign::Positive);
        let h = 1e-6;
        let n = params.n as f64;
        let d = (p_parabolic_alpha(params.p + h, n, integ.q, integ.r) - p_parabolic_alpha(params.p, n, integ.q, integ.r)) / h;
        prop_assert!(d > 0.0, "finite difference {d}");
    }

    #[test]
    fn pme_source_bound_rational(seed in any::<u64>()) {
        let t = sample_tuple(EquationClass::Pme, &[1, 2, 3], &mut rng(seed));
        let (m, n) = (t.params.m, t.params.n as f64);
        let b = pme_source_bound(m, n, t.integ.q, t.integ.r);
        prop_assert!((b - pme_bound(m, n, t.integ.q, t.integ.r)).abs() <= 1e-12);
    }

    #[test]
    fn dnl_lattice(seed in any::<u64>(), hom in 0.05f64..=1.0) {
        let t = sample_tuple(EquationClass::DoublyNonlinear, &[1, 2, 3], &mut rng(seed));
        let (p, m, n) = (t.params.p, t.params.m, t.params.n);
        let nf = n as f64;
        let rep = sharp_exponents(&t.params, &t.integ, Some(HomogeneousExponent::assumed(hom).unwrap())).unwrap();
        if rep.branch == Branch::SourceLimited {
            prop_assert!((rep.alpha_space - dnl_beta(p, m, nf, t.integ.q, t.integ.r)).abs() <= 1e-12);
        }
        prop_assert!((rep.theta - theta_doubly_nonlinear(p, m, rep.alpha_space)).abs() <= 1e-15);

        // m = 1 is the p-parabolic equation, p = 2 the porous medium one
        let ones = EquationParams::doubly_nonlinear(p, 1.0, n).unwrap();
        if check_admissibility(&ones, &t.integ).admissible {
            let b = sharp_exponents(&ones, &t.integ, None).unwrap();
            let a = sharp_exponents(&EquationParams::p_parabolic(p, n).unwrap(), &t.integ, None).unwrap();
            prop_assert!((b.alpha_space - a.alpha_space).abs() <= 1e-12);
            prop_assert!((b.theta - a.theta).abs() <= 1e-12);
        }
        let twos = EquationParams::doubly_nonlinear(2.0, m, 1).unwrap();
        if check_admissibility(&twos, &t.integ).admissible {
            let b = sharp_exponents(&twos, &t.integ, None).unwrap();
            let g = sharp_exponents(&EquationParams::pme(m, 1).unwrap(), &t.integ, None).unwrap();
            prop_assert!((b.alpha_space - g.alpha_space).abs() <= 1e-12);
            prop_assert!((b.theta - g.theta).abs() <= 1e-12);
            prop_assert_eq!(b.branch, g.branch);
        }
    }

    #[test]
    fn pme_with_m_one_is_heat(seed in any::<u64>()) {
        let (hp, integ) = pp_tuple(seed, true);
        let pme = EquationParams::pme(1.0, hp.n).unwrap();
        prop_assume!(check_admissibility(&pme, &integ).admissible);
        let hom = HomogeneousExponent::known(1.0).unwrap();
        let g = sharp_exponents(&pme, &integ, Some(hom)).unwrap();
        let h = sharp_exponents(&hp, &integ, None).unwrap();
        prop_assert!((g.alpha_space - h.alpha_space).abs() <= 1e-12);
        prop_assert_eq!(g.theta, 2.0);
    }
}

#[test]
fn ranges_over_ten_thousand_tuples() {
    for t in sample_tuples(EquationClass::PParabolic, &[1, 2, 3], 10_000, 2024) {
        let rep = sharp_exponents(&t.params, &t.integ, None).unwrap();
        assert!(rep.alpha_space > 0.0 && rep.alpha_space < 1.0, "{t:?}");
        assert!(rep.theta > 2.0 && rep.theta < t.params.p);
    }
    for t in sample_tuples(EquationClass::Pme, &[1], 10_000, 2025) {
        let rep = sharp_exponents(&t.params, &t.integ, None).unwrap();
        let m = t.params.m;
        assert!(rep.alpha_space > 0.0 && rep.alpha_space < 1.0, "{t:?}");
        assert!(rep.theta >= 1.0 + 1.0 / m - 1e-15 && rep.theta < 2.0);
    }
}

#[test]
fn pme_bound_tends_to_two() {
    for m in [1.5, 2.0, 4.0] {
        let mut prev = 0.0;
        for q in [1e2, 1e4, 1e6] {
            let b = pme_source_bound(m, 1.0, q, q);
            assert!(b > prev && b < 2.0);
            assert!(2.0 - b <= 10.0 / q, "m = {m}, q = {q}: {b}");
            prev = b;
        }
    }
}

#[test]
fn worked_examples() {
    let r = sharp_exponents(
        &EquationParams::pme(2.0, 1).unwrap(),
        &SourceIntegrability { q: 10.0, r: 10.0 },
        None,
    )
    .unwrap();
    assert!((pme_source_bound(2.0, 1.0, 10.0, 10.0) - 34.0 / 19.0).abs() < 1e-14);
    assert_eq!(r.branch, Branch::HomogeneousLimited);
    assert!(r.open_interval);
    assert_eq!((r.raw_alpha, r.alpha_space, r.theta), (1.0, 0.5, 1.5));

    let h = sharp_exponents(
        &EquationParams::p_parabolic(2.0, 2).unwrap(),
        &SourceIntegrability { q: 3.0, r: 4.0 },
        None,
    )
    .unwrap();
    assert!((h.alpha_space - 5.0 / 6.0).abs() < 1e-15);
}
