use holderlab::exponents::EquationParams;
use holderlab::fields::{Expr, GridSpec, Rect, SourceTerm, SpaceTimeField};
use holderlab::geometry::{apply_scaling, build_scaling, Anchor, ScalingParams};
use holderlab::pde::{solve, Barenblatt, Boundary, ReferenceSolution, SolverConfig};
use holderlab::regularity::*;
use proptest::prelude::*;

fn wavy(grid: GridSpec, a: f64, w: f64, s: f64) -> SpaceTimeField {
    SpaceTimeField::from_fn(grid, "wavy", move |x, t| {
        a * (w * x[0] + 0.3).sin() + (2.0 * t).cos() + s * x[0].abs().powf(0.6) * (1.0 + t)
    })
    .unwrap()
}

fn power_field(nx: usize, nt: usize, s: f64) -> SpaceTimeField {
    let g = GridSpec::one_d([-1.0, 1.0], nx, [-1.0, 0.0], nt).unwrap();
    SpaceTimeField::from_fn(g, "pow", move |x, _| x[0].abs().powf(s)).unwrap()
}

fn lp_dist(v: &[f64], c: f64, p: f64) -> f64 {
    (v.iter().map(|x| (x - c).abs().powf(p)).sum::<f64>() / v.len() as f64).powf(1.0 / p)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn ladders_are_monotone(a in 0.1f64..2.0, w in 0.5f64..15.0, s in 0.0f64..2.0,
                            c in -0.3f64..0.3, theta in 1.2f64..2.5, p in 1.0f64..4.0) {
        let u = wavy(GridSpec::one_d([-1.0, 1.0], 257, [-1.0, 0.0], 257).unwrap(), a, w, s);
        let spec = ProfileSpec::new(&[c], 0.0, theta, 0.5, 6).with_p(p);
        let prof = oscillation_profile(&u, &spec).unwrap();
        for pair in prof.levels.windows(2) {
            prop_assert!(pair[1].osc <= pair[0].osc + 1e-14);
            prop_assert!(pair[1].sup_abs <= pair[0].sup_abs + 1e-14);
        }
    }

    #[test]
    fn best_constant_beats_mean_and_median(a in 0.1f64..2.0, w in 0.5f64..15.0, s in 0.0f64..2.0, p in 1.0f64..4.0) {
        let u = wavy(GridSpec::one_d([-1.0, 1.0], 129, [-1.0, 0.0], 129).unwrap(), a, w, s);
        let spec = ProfileSpec::new(&[0.1], 0.0, 2.0, 0.6, 4).with_p(p);
        let prof = oscillation_profile(&u, &spec).unwrap();
        for l in &prof.levels {
            let v: Vec<f64> = u.region_samples(&spec.cylinder(l.k).unwrap()).unwrap().values().collect();
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            let mut sorted = v.clone();
            sorted.sort_by(f64::total_cmp);
            let median = sorted[sorted.len() / 2];
            prop_assert!(l.campanato <= lp_dist(&v, mean, p) * (1.0 + 1e-12));
            prop_assert!(l.campanato <= lp_dist(&v, median, p) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn fit_recovers_exact_power_laws(alpha in 0.05f64..2.0, c in 0.01f64..100.0, lambda in 0.2f64..0.5, levels in 4usize..10) {
        let ks: Vec<usize> = (0..levels).collect();
        let radii: Vec<f64> = ks.iter().map(|&k| lambda.powi(k as i32)).collect();
        let vals: Vec<f64> = radii.iter().map(|r| c * r.powf(alpha)).collect();
        let fit = fit_series(&ks, &radii, &vals, 1e-9, FitWindow::Explicit { k_lo: 0, k_hi: levels - 1 }).unwrap();
        prop_assert!((fit.exponent - alpha).abs() <= 1e-9);
        prop_assert!((fit.log_constant - c.ln()).abs() <= 1e-9);
        prop_assert!((fit.r_squared - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn profile_is_covariant_under_zoom() {
    // v(x,t) = u(λx, λ^θ t)/λ^γ on a grid whose nodes map onto nodes of u's grid,
    // so level k of v is level k + 1 of u rescaled
    let (lambda, theta, gamma) = (0.5, 2.0, 0.4);
    let f = |x: &[f64], t: f64| (3.0 * x[0] + 0.2).sin() + (2.0 * t).cos() + x[0] * t + x[0].abs().powf(0.7);
    let u = SpaceTimeField::from_fn(GridSpec::one_d([-1.0, 1.0], 401, [-1.0, 0.0], 1601).unwrap(), "u", f).unwrap();
    let sc = build_scaling(ScalingParams::PmeZoom {
        lambda,
        k: 1,
        theta,
        gamma,
        alpha: 1.0,
    })
    .unwrap();
    let target = GridSpec::one_d([-1.0, 1.0], 201, [-1.0, 0.0], 401).unwrap();
    let v = apply_scaling(&u, &sc, &Anchor::origin(1), &target).unwrap();

    let base = 0.5 + target.dx(0) / 3.0;
    let pv = oscillation_profile(&v, &ProfileSpec::new(&[0.0], 0.0, theta, base, 4)).unwrap();
    let pu = oscillation_profile(&u, &ProfileSpec::new(&[0.0], 0.0, theta, base, 5)).unwrap();
    let scale = lambda.powf(-gamma);
    for (lv, lu) in pv.levels.iter().zip(&pu.levels[1..]) {
        assert!((lv.radius - lu.radius / lambda).abs() < 1e-12);
        assert!((lv.osc - scale * lu.osc).abs() <= 1e-9 * lv.osc.max(1.0), "{lv:?} {lu:?}");
        assert!((lv.sup_abs - scale * lu.sup_abs).abs() <= 1e-9 * lv.sup_abs.max(1.0));
    }
    assert!(pv.levels.len() >= 4);
}

#[test]
fn time_exponent_of_intrinsic_power() {
    // u = (|x|^θ + |t|)^{α/θ} has u(0, t) = |t|^{α/θ}
    for (theta, alpha) in [(2.0, 0.6), (1.5, 0.9), (3.0, 0.75)] {
        let g = GridSpec::one_d([-1.0, 1.0], 33, [-1.0, 0.0], 8193).unwrap();
        let u = SpaceTimeField::from_fn(g, "u", move |x, t| {
            (x[0].abs().powf(theta) + t.abs()).powf(alpha / theta)
        })
        .unwrap();
        let spec = ProfileSpec::new(&[0.0], 0.0, theta, 0.8, 8);
        let prof = time_oscillation_profile(&u, &spec).unwrap();
        let fit = fit_exponent(&prof, FitWindow::Explicit { k_lo: 1, k_hi: prof.k_max_effective }, Quantity::Osc).unwrap();
        assert!((fit.exponent - alpha / theta).abs() <= 0.1, "θ = {theta}: {fit:?}");
    }
}

#[test]
fn campanato_rate_of_power_profile() {
    let u = power_field(2049, 4097, 0.75);
    let spec = ProfileSpec::new(&[0.0], 0.0, 2.0, 0.5, 7);
    let prof = oscillation_profile(&u, &spec).unwrap();
    let c = campanato_sequence(&u, &prof, FitWindow::default()).unwrap();
    let rate = c.decay.as_ref().unwrap().exponent;
    assert!(rate >= 0.70, "{rate}");
    assert!(c.holds && c.constant.is_finite());
}

#[test]
fn caccioppoli_is_stable_under_refinement() {
    let m = 2.0;
    let b = Barenblatt::with_constant(m, 1, 1.0 / 12.0).unwrap();
    let reference = ReferenceSolution::BarenblattPme { m, n: 1, mass: b.mass() };
    let region = Rect {
        space: vec![[-1.2, 1.2]],
        time: [1.1, 1.9],
    };
    let cutoff = Expr::Bump {
        center: vec![0.0],
        radius: 1.2,
        t_start: 1.1,
        t_end: 1.9,
    };
    let ratio = |nx: usize| {
        let g = GridSpec::one_d([-2.0, 2.0], nx, [1.0, 2.0], 41).unwrap();
        let init = reference.to_expr().unwrap().sample_slice(&g, 1.0).unwrap();
        let cfg = SolverConfig::default().with_boundary(Boundary::DirichletFromOracle(reference.clone()));
        let u = solve(&EquationParams::pme(m, 1).unwrap(), &SourceTerm::zero(), &init, &g, &cfg).unwrap();
        let rep = caccioppoli_check(&u, &cutoff, &SourceTerm::zero(), m, &region).unwrap();
        assert!(rep.lhs_grad_term > 0.0 && rep.rhs_space_term > 0.0);
        rep.ratio
    };
    let (a, b) = (ratio(129), ratio(257));
    assert!(a.is_finite() && b.is_finite() && a > 0.0);
    assert!((b / a - 1.0).abs() <= 0.2, "{a} {b}");
}
