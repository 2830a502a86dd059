mod common;

use holderlab::exponents::{sharp_exponents, Branch, EquationClass, HomogeneousExponent};
use holderlab::fields::{Expr, GridSpec, Rect, SourceTerm, SpaceTimeField};
use holderlab::geometry::*;
use holderlab::lab::sweep::sample_tuples;
use proptest::prelude::*;

/// `c0 + a sin(w x + φ) + step`, with `|f| >= c0/2` everywhere.
fn rough_source() -> impl Strategy<Value = Expr> {
    (0.5f64..2.0, 0.0f64..1.0, 1.0f64..12.0, 0.0f64..6.0, -0.9f64..0.9, -0.1f64..0.1).prop_map(
        |(c0, a, w, phase, pos, jump)| {
            let s = c0 / 2.0 / (1.0 + 1e-9);
            Expr::Sum {
                terms: vec![
                    Expr::constant(c0),
                    Expr::Sine {
                        amplitude: a.min(1.0) * s * 0.8,
                        wavenumbers: vec![w],
                        time_frequency: 0.0,
                        phase,
                    },
                    Expr::Step {
                        axis: 0,
                        position: pos,
                        left: 0.0,
                        right: jump * s,
                    },
                ],
            }
        },
    )
}

fn wavy_field(grid: GridSpec, a: f64, b: f64, w: f64) -> SpaceTimeField {
    SpaceTimeField::from_fn(grid, "wavy", move |x, t| {
        a * (w * x[0]).sin() + b * (3.0 * t + x.iter().sum::<f64>()).cos() + 0.3 * x[0] * t
    })
    .unwrap()
}

fn ball(radius: f64) -> NormRegion {
    NormRegion::BallSlab {
        center: vec![0.0],
        t0: 1.0,
        radius,
        duration: 1.0,
    }
}

fn box_grid(radius: f64, nx: usize) -> GridSpec {
    GridSpec::one_d([-radius, radius], nx, [0.0, 1.0], 3).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn norm_transport(f in rough_source(), p_hat in 1.0f64..4.0, li in 0usize..3) {
        let lambda = [0.1, 0.5, 0.9][li];
        let sc = build_scaling(ScalingParams::PoissonZoom { lambda, p_hat, n: 1 }).unwrap();
        let src = SourceTerm::closed_form(f, p_hat, p_hat);
        let unit = box_grid(1.0, 801);
        let scaled = scale_source(&src, &sc, &Anchor::origin(1), &unit).unwrap().sample(&unit).unwrap();
        let lhs = lp_norm(&scaled, &ball(1.0), p_hat).unwrap();
        let whole = lp_norm(&src.sample(&unit).unwrap(), &ball(1.0), p_hat).unwrap();
        prop_assert!(lhs <= whole + 1e-8, "{lhs} > {whole}");

        let image = box_grid(lambda, 801);
        let restricted = lp_norm(&src.sample(&image).unwrap(), &ball(lambda), p_hat).unwrap();
        let (a, b) = (lhs.powf(p_hat), restricted.powf(p_hat));
        prop_assert!((a - b).abs() <= 1e-2 * b, "{a} vs {b}");
    }

    #[test]
    fn oscillation_grows_with_tau(a in 0.1f64..2.0, b in 0.0f64..1.0, w in 0.5f64..9.0,
                                  tau in 0.05f64..0.9, grow in 1.0f64..1.5, theta in 1.0f64..2.5) {
        let grid = GridSpec::one_d([-1.5, 1.5], 121, [-1.5, 1.0], 121).unwrap();
        let u = wavy_field(grid, a, b, w);
        let small = make_cylinder(&[0.1], 0.8, tau, theta).unwrap();
        let big = make_cylinder(&[0.1], 0.8, (tau * grow).min(1.0), theta).unwrap();
        let (s, l) = (sup_oscillation(&u, &small).unwrap(), sup_oscillation(&u, &big).unwrap());
        prop_assert!(s.osc <= l.osc + 1e-14);
        prop_assert!(s.sup_abs <= l.sup_abs + 1e-14);
    }

    #[test]
    fn p_avg_routes_agree(a in 0.1f64..2.0, b in 0.0f64..1.0, w in 0.5f64..9.0, p in 1.0f64..6.0, tau in 0.3f64..0.9) {
        let grid = GridSpec::new(2, vec![[-1.0, 1.0]; 2], 41, [-1.0, 0.0], 81).unwrap();
        let u = wavy_field(grid, a, b, w);
        let region = NormRegion::Cylinder(make_cylinder(&[0.05, -0.1], 0.0, tau, 2.0).unwrap());
        let direct = p_avg_norm(&u, &region, p).unwrap().value;
        let total = p_avg_norm_from_total(&u, &region, p).unwrap();
        prop_assert!((direct - total).abs() <= 1e-10 * direct.max(1.0));
    }

    #[test]
    fn interpolation_is_monotone(a in 0.1f64..2.0, b in 0.0f64..1.0, w in 0.5f64..20.0,
                                 x in -1.0f64..1.0, t in 0.0f64..1.0) {
        let grid = GridSpec::one_d([-1.0, 1.0], 17, [0.0, 1.0], 9).unwrap();
        let u = wavy_field(grid.clone(), a, b, w);
        let v = u.interpolate(&[x], t).unwrap();
        let i = (((x + 1.0) / grid.dx(0)).floor() as usize).min(grid.nx - 2);
        let k = ((t / grid.dt()).floor() as usize).min(grid.nt - 2);
        let corners = [u.at(k, i), u.at(k, i + 1), u.at(k + 1, i), u.at(k + 1, i + 1)];
        let lo = corners.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = corners.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(v >= lo - 1e-14 && v <= hi + 1e-14);
    }

    #[test]
    fn sample_interpolate_roundtrip(a in 0.1f64..2.0, b in 0.0f64..1.0, w in 0.5f64..20.0) {
        let grid = GridSpec::new(2, vec![[-1.0, 1.0], [0.0, 2.0]], 9, [0.0, 1.0], 5).unwrap();
        let u = wavy_field(grid.clone(), a, b, w);
        for k in 0..grid.nt {
            for s in 0..grid.spatial_len() {
                let node = grid.node(s);
                prop_assert_eq!(u.interpolate(&node, grid.time_at(k)).unwrap(), u.at(k, s));
            }
        }
    }
}

#[test]
fn integrate_region_converges() {
    let exact = {
        // ∫_{-0.5}^{0.75} ∫_{0.25}^{1} sin(2x + 1) e^t dt dx
        let sx = (-(2.0f64 * 0.75 + 1.0).cos() + (2.0f64 * -0.5 + 1.0).cos()) / 2.0;
        sx * (1.0f64.exp() - 0.25f64.exp())
    };
    let rect = Rect {
        space: vec![[-0.5, 0.75]],
        time: [0.25, 1.0],
    };
    let err = |nx: usize| {
        let g = GridSpec::one_d([-1.0, 1.0], nx, [0.0, 1.0], nx).unwrap();
        let u = SpaceTimeField::from_fn(g, "s", |x, t| (2.0 * x[0] + 1.0).sin() * t.exp()).unwrap();
        (u.integrate_region(&rect, 1.0).unwrap() - exact).abs()
    };
    let errs: Vec<f64> = [17, 33, 65, 129].iter().map(|&n| err(n)).collect();
    for w in errs.windows(2) {
        assert!(w[0] / w[1] >= 1.8, "{errs:?}");
    }
}

#[test]
fn norm_chain_exponent_nonnegative_on_source_limited_tuples() {
    let mut checked = 0;
    let hom = HomogeneousExponent::assumed(1.0).unwrap();
    for t in sample_tuples(EquationClass::Pme, &[1, 2, 3], 2000, 99) {
        let rep = sharp_exponents(&t.params, &t.integ, Some(hom)).unwrap();
        if rep.branch != Branch::SourceLimited {
            continue;
        }
        let m = t.params.m;
        let sc = build_scaling(ScalingParams::PmeZoom {
            lambda: 0.5,
            k: 1,
            theta: rep.theta,
            gamma: rep.alpha_space,
            alpha: rep.raw_alpha,
        })
        .unwrap();
        let f = scaling_norm_factor(&sc, t.integ.q, t.integ.r, t.params.n).unwrap();
        assert!(f.exponent_nonnegative, "m = {m}, {t:?}: E/r = {}", f.norm_exponent);
        assert!(f.norm_exponent >= -1e-12);
        checked += 1;
        if checked == 100 {
            break;
        }
    }
    assert_eq!(checked, 100);
}

#[test]
fn smallness_search_verifies_both_bounds() {
    let grid = GridSpec::one_d([-1.5, 1.5], 121, [-1.2, 0.0], 121).unwrap();
    let u = wavy_field(grid, 3.0, 1.0, 2.0);
    let f = SourceTerm::closed_form(
        Expr::Gaussian {
            amplitude: 40.0,
            center: vec![0.2],
            width: 0.5,
        },
        4.0,
        4.0,
    );
    let anchor = Anchor {
        center: vec![0.0],
        t0: 0.0,
    };
    for kind in [SmallnessKind::PParabolic { p: 3.0 }, SmallnessKind::Pme { m: 2.0 }] {
        let out = smallness_search(&u, &f, kind, &anchor, 1e-2).unwrap();
        assert!(out.rho > 0.0 && out.rho < 1.0);
        // recheck on freshly transformed fields
        let target = GridSpec::one_d([-1.0, 1.0], 121, [-1.0, 0.0], 121).unwrap();
        let g1 = make_cylinder(&[0.0], 0.0, 1.0, 1.0).unwrap();
        let v = apply_scaling(&u, &out.scaling, &anchor, &target).unwrap();
        let sol = match kind {
            SmallnessKind::PParabolic { p } => p_avg_norm(&v, &NormRegion::Cylinder(g1.clone()), p).unwrap().value,
            SmallnessKind::Pme { .. } => sup_oscillation(&v, &g1).unwrap().sup_abs,
        };
        let ft = scale_source(&f, &out.scaling, &anchor, &target).unwrap().sample(&target).unwrap();
        let src = lqr_norm(&ft, &NormRegion::Cylinder(g1), 4.0, 4.0).unwrap().value;
        assert!(sol <= 1.0 + 1e-12, "{kind:?}: {sol}");
        assert!(src <= 1e-2 * (1.0 + 1e-12), "{kind:?}: {src}");
    }
}

#[test]
fn two_dimensional_norm_transport() {
    let f = Expr::Sum {
        terms: vec![
            Expr::constant(1.0),
            Expr::Gaussian {
                amplitude: 0.4,
                center: vec![0.3, -0.2],
                width: 0.3,
            },
        ],
    };
    let src = SourceTerm::closed_form(f, 2.0, 2.0);
    let region = |r: f64| NormRegion::BallSlab {
        center: vec![0.0, 0.0],
        t0: 1.0,
        radius: r,
        duration: 1.0,
    };
    let grid = |r: f64| GridSpec::new(2, vec![[-r, r]; 2], 161, [0.0, 1.0], 3).unwrap();
    for lambda in [0.1, 0.5, 0.9] {
        let sc = build_scaling(ScalingParams::PoissonZoom {
            lambda,
            p_hat: 2.0,
            n: 2,
        })
        .unwrap();
        let scaled = scale_source(&src, &sc, &Anchor::origin(2), &grid(1.0)).unwrap();
        let a = lp_norm(&scaled.sample(&grid(1.0)).unwrap(), &region(1.0), 2.0).unwrap();
        let b = lp_norm(&src.sample(&grid(lambda)).unwrap(), &region(lambda), 2.0).unwrap();
        assert!((a * a - b * b).abs() <= 1e-2 * b * b);
    }
}
