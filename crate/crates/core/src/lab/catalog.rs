//! Built-in experiments, selectable by name.

use super::config::{
    AnalysisParams, Assertion, ExperimentConfig, ExperimentKind, IterationParams, ScaleVerifyParams, SweepParams,
    ThetaSource,
};
use crate::exponents::{p_parabolic_alpha, EquationClass, EquationParams, SourceIntegrability};
use crate::fields::{Expr, GridSpec, SourceTerm};
use crate::geometry::{Anchor, ScalingParams};
use crate::pde::{Barenblatt, Boundary, ReferenceSolution, SolverConfig};
use crate::regularity::{FitWindow, Quantity};

const NAMES: &[&str] = &[
    "pparabolic-exponents",
    "heat-admissible",
    "pme-zoom-norm-chain",
    "heat-separable",
    "barenblatt-m2-solve",
    "barenblatt-m2-freeboundary",
    "barenblatt-m3-freeboundary",
    "heat-campanato",
    "pparabolic-sweep",
];

pub fn names() -> Vec<&'static str> {
    NAMES.to_vec()
}

/// Constant of the Barenblatt profiles used here: support `[-1, 1]` at `t = 1`.
pub const BARENBLATT_CONSTANT: f64 = 1.0 / 12.0;

fn with_name(mut c: ExperimentConfig, name: &str) -> ExperimentConfig {
    c.name = Some(name.to_string());
    c
}

/// Porous medium solve from the Barenblatt slice at `t = 1` to `t = 2` on `[-2, 2]`.
pub fn barenblatt_solve(m: f64, nx: usize, nt: usize) -> ExperimentConfig {
    let b = Barenblatt::with_constant(m, 1, BARENBLATT_CONSTANT).expect("valid profile");
    let reference = ReferenceSolution::BarenblattPme { m, n: 1, mass: b.mass() };
    let mut c = ExperimentConfig::new(ExperimentKind::Solve);
    c.equation = Some(EquationParams::pme(m, 1).expect("valid class"));
    c.integrability = Some(SourceIntegrability {
        q: f64::INFINITY,
        r: f64::INFINITY,
    });
    c.initial = Some(Expr::Barenblatt {
        m,
        constant: BARENBLATT_CONSTANT,
    });
    c.grid = Some(GridSpec::one_d([-2.0, 2.0], nx, [1.0, 2.0], nt).expect("valid grid"));
    c.solver = SolverConfig::default().with_boundary(Boundary::DirichletFromOracle(reference.clone()));
    c.reference = Some(reference);
    c
}

/// Ladder centered at the free boundary `x_f(2)`.
pub fn barenblatt_free_boundary(m: f64) -> ExperimentConfig {
    let b = Barenblatt::with_constant(m, 1, BARENBLATT_CONSTANT).expect("valid profile");
    let mut c = barenblatt_solve(m, 2049, 2049);
    c.experiment = ExperimentKind::Analyze;
    c.analysis = Some(AnalysisParams {
        center: vec![b.free_boundary(2.0)],
        t0: 2.0,
        theta: ThetaSource::FromFormula,
        lambda: 0.5,
        base_radius: 0.5,
        k_max: 6,
        p: 2.0,
        window: FitWindow::default(),
        quantity: Quantity::Osc,
        campanato: false,
        iteration: Some(IterationParams {
            gamma: None,
            margin: 0.01,
        }),
    });
    let target = (1.0 / (m - 1.0)).min(1.0);
    c.assertions = vec![
        Assertion::between("exponent", target - 0.07, target + 0.07),
        Assertion::at_most("iteration_constant", 10.0),
    ];
    c
}

pub fn heat_separable() -> ExperimentConfig {
    let mut c = ExperimentConfig::new(ExperimentKind::Solve);
    c.equation = Some(EquationParams::heat(1).expect("valid class"));
    c.initial = Some(Expr::HeatMode {
        amplitude: 1.0,
        modes: vec![1.0],
    });
    c.grid = Some(GridSpec::one_d([0.0, 1.0], 257, [0.0, 0.1], 11).expect("valid grid"));
    c.reference = Some(ReferenceSolution::HeatSeparable {
        amplitude: 1.0,
        modes: vec![1.0],
    });
    c.assertions = vec![Assertion::at_most("linf_error", 5e-4)];
    c
}

/// Smooth source declared in `L^3(L^2)`.
pub fn smooth_heat_source() -> SourceTerm {
    SourceTerm::closed_form(
        Expr::Sum {
            terms: vec![
                Expr::Gaussian {
                    amplitude: 4.0,
                    center: vec![0.5],
                    width: 0.2,
                },
                Expr::Sine {
                    amplitude: 1.5,
                    wavenumbers: vec![7.0],
                    time_frequency: 11.0,
                    phase: 0.3,
                },
            ],
        },
        2.0,
        3.0,
    )
}

pub fn heat_campanato() -> ExperimentConfig {
    let mut c = ExperimentConfig::new(ExperimentKind::Analyze);
    c.equation = Some(EquationParams::heat(1).expect("valid class"));
    c.source = Some(smooth_heat_source());
    c.initial = Some(Expr::HeatMode {
        amplitude: 1.0,
        modes: vec![1.0],
    });
    c.grid = Some(GridSpec::one_d([0.0, 1.0], 513, [0.0, 0.2], 1025).expect("valid grid"));
    c.analysis = Some(AnalysisParams {
        center: vec![0.37],
        t0: 0.2,
        theta: ThetaSource::FromFormula,
        lambda: 0.5,
        base_radius: 0.25,
        k_max: 6,
        p: 2.0,
        window: FitWindow::default(),
        quantity: Quantity::Osc,
        campanato: true,
        iteration: None,
    });
    let alpha = p_parabolic_alpha(2.0, 1.0, 2.0, 3.0);
    c.assertions = vec![
        Assertion::at_least("campanato_rate", alpha - 0.05),
        Assertion::at_least("exponent", 0.95),
    ];
    c
}

pub fn lookup(name: &str) -> Option<ExperimentConfig> {
    let c = match name {
        "pparabolic-exponents" => {
            let mut c = ExperimentConfig::new(ExperimentKind::Exponents);
            c.equation = Some(EquationParams::p_parabolic(3.0, 3).expect("valid class"));
            c.integrability = Some(SourceIntegrability {
                q: 2.0,
                r: f64::INFINITY,
            });
            c.assertions = vec![
                Assertion::between("alpha", 0.75 - 1e-12, 0.75 + 1e-12),
                Assertion::between("theta", 2.25 - 1e-12, 2.25 + 1e-12),
            ];
            c
        }
        "heat-admissible" => {
            let mut c = ExperimentConfig::new(ExperimentKind::Admissible);
            c.equation = Some(EquationParams::p_parabolic(2.0, 2).expect("valid class"));
            c.integrability = Some(SourceIntegrability { q: 3.0, r: 4.0 });
            c.assertions = vec![Assertion::at_least("admissible", 1.0)];
            c
        }
        "pme-zoom-norm-chain" => {
            let mut c = ExperimentConfig::new(ExperimentKind::ScaleVerify);
            c.source = Some(SourceTerm::closed_form(
                Expr::Sum {
                    terms: vec![
                        Expr::Gaussian {
                            amplitude: 2.0,
                            center: vec![0.1],
                            width: 0.4,
                        },
                        Expr::Affine {
                            offset: 0.5,
                            slope: vec![0.3],
                            time_slope: -0.2,
                        },
                    ],
                },
                10.0,
                10.0,
            ));
            c.scale = Some(ScaleVerifyParams {
                scaling: ScalingParams::PmeZoom {
                    lambda: 0.5,
                    k: 1,
                    theta: 1.5,
                    gamma: 0.5,
                    alpha: 1.0,
                },
                anchor: Anchor::origin(1),
                nx: 401,
                nt: 201,
            });
            c.assertions = vec![Assertion::at_most("relative_error", 0.01)];
            c
        }
        "heat-separable" => heat_separable(),
        "barenblatt-m2-solve" => {
            let mut c = barenblatt_solve(2.0, 1025, 11);
            c.assertions = vec![Assertion::at_most("linf_error", 1e-2)];
            c
        }
        "barenblatt-m2-freeboundary" => barenblatt_free_boundary(2.0),
        "barenblatt-m3-freeboundary" => barenblatt_free_boundary(3.0),
        "heat-campanato" => heat_campanato(),
        "pparabolic-sweep" => {
            let mut c = ExperimentConfig::new(ExperimentKind::Sweep);
            c.sweep = Some(SweepParams {
                class: EquationClass::PParabolic,
                count: 100,
                homogeneous: None,
            });
            c.assertions = vec![
                Assertion::between("min_alpha", 0.0, 1.0),
                Assertion::between("max_alpha", 0.0, 1.0),
                Assertion::at_most("monotonicity_violations", 0.0),
            ];
            c
        }
        _ => return None,
    };
    Some(with_name(c, name))
}
