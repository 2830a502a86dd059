use crate::error::{Error, Result};
use crate::exponents::{EquationClass, EquationParams, HomogeneousExponent, SourceIntegrability};
use crate::fields::{Expr, GridSpec, SourceTerm};
use crate::geometry::{Anchor, ScalingParams};
use crate::pde::{ReferenceSolution, SolverConfig};
use crate::regularity::{FitWindow, Quantity};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExperimentKind {
    Exponents,
    Admissible,
    ScaleVerify,
    Solve,
    Analyze,
    Reproduce { name: String },
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ThetaSource {
    FromFormula,
    Explicit { value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationParams {
    /// Decay exponent; the formula's space exponent minus `margin` when absent.
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default = "default_margin")]
    pub margin: f64,
}

fn default_margin() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisParams {
    pub center: Vec<f64>,
    pub t0: f64,
    pub theta: ThetaSource,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    pub base_radius: f64,
    pub k_max: usize,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default)]
    pub window: FitWindow,
    #[serde(default = "default_quantity")]
    pub quantity: Quantity,
    #[serde(default)]
    pub campanato: bool,
    #[serde(default)]
    pub iteration: Option<IterationParams>,
}

fn default_lambda() -> f64 {
    0.5
}

fn default_p() -> f64 {
    2.0
}

fn default_quantity() -> Quantity {
    Quantity::Osc
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleVerifyParams {
    pub scaling: ScalingParams,
    pub anchor: Anchor,
    #[serde(default = "default_scale_nx")]
    pub nx: usize,
    #[serde(default = "default_scale_nt")]
    pub nt: usize,
}

fn default_scale_nx() -> usize {
    201
}

fn default_scale_nt() -> usize {
    101
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepParams {
    pub class: EquationClass,
    #[serde(default = "default_count")]
    pub count: usize,
    /// Homogeneous exponent assumed for porous medium / doubly nonlinear tuples in `n >= 2`.
    /// Without it those classes are sampled in one dimension only.
    #[serde(default)]
    pub homogeneous: Option<f64>,
}

fn default_count() -> usize {
    100
}

/// `min <= metric <= max`, either bound optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub metric: String,
    #[serde(default)]
    pub min: Option<f64>,
    #[serde(default)]
    pub max: Option<f64>,
}

impl Assertion {
    pub fn between(metric: &str, min: f64, max: f64) -> Self {
        Assertion {
            metric: metric.into(),
            min: Some(min),
            max: Some(max),
        }
    }

    pub fn at_most(metric: &str, max: f64) -> Self {
        Assertion {
            metric: metric.into(),
            min: None,
            max: Some(max),
        }
    }

    pub fn at_least(metric: &str, min: f64) -> Self {
        Assertion {
            metric: metric.into(),
            min: Some(min),
            max: None,
        }
    }
}

/// One experiment, read from a single JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub equation: Option<EquationParams>,
    #[serde(default)]
    pub integrability: Option<SourceIntegrability>,
    /// Assumed `α₀` / `α_*`.
    #[serde(default)]
    pub homogeneous: Option<f64>,
    #[serde(default)]
    pub source: Option<SourceTerm>,
    /// Initial slice, evaluated at the first grid time.
    #[serde(default)]
    pub initial: Option<Expr>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub solver: SolverConfig,
    /// Oracle for error metrics of a solve.
    #[serde(default)]
    pub reference: Option<ReferenceSolution>,
    /// Field container to analyze instead of solving.
    #[serde(default)]
    pub field_path: Option<PathBuf>,
    #[serde(default)]
    pub analysis: Option<AnalysisParams>,
    #[serde(default)]
    pub scale: Option<ScaleVerifyParams>,
    #[serde(default)]
    pub sweep: Option<SweepParams>,
    #[serde(default)]
    pub assertions: Vec<Assertion>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind) -> Self {
        ExperimentConfig {
            experiment,
            name: None,
            equation: None,
            integrability: None,
            homogeneous: None,
            source: None,
            initial: None,
            grid: None,
            solver: SolverConfig::default(),
            reference: None,
            field_path: None,
            analysis: None,
            scale: None,
            sweep: None,
            assertions: Vec::new(),
            output_dir: None,
            seed: 0,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::ConfigInvalid(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    fn need<'a, T>(&self, v: &'a Option<T>, field: &str) -> Result<&'a T> {
        v.as_ref().ok_or_else(|| {
            Error::ConfigInvalid(format!("experiment {:?} needs the `{field}` field", self.experiment))
        })
    }

    pub fn equation(&self) -> Result<&EquationParams> {
        self.need(&self.equation, "equation")
    }

    pub fn grid(&self) -> Result<&GridSpec> {
        self.need(&self.grid, "grid")
    }

    pub fn source(&self) -> SourceTerm {
        self.source.clone().unwrap_or_else(SourceTerm::zero)
    }

    /// Explicit integrability, else the one declared by the source.
    pub fn integrability(&self) -> Result<SourceIntegrability> {
        match (&self.integrability, &self.source) {
            (Some(i), _) => Ok(*i),
            (None, Some(f)) => f.integrability(),
            (None, None) => Err(Error::ConfigInvalid(format!(
                "experiment {:?} needs `integrability` or a `source` with declared exponents",
                self.experiment
            ))),
        }
    }

    pub fn homogeneous(&self) -> Result<Option<HomogeneousExponent>> {
        self.homogeneous.map(HomogeneousExponent::assumed).transpose()
    }

    /// Field-level checks that do not need any computation.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::ConfigInvalid(msg));
        match &self.experiment {
            ExperimentKind::Exponents | ExperimentKind::Admissible => {
                self.equation()?.validate()?;
                self.integrability()?.validate()?;
            }
            ExperimentKind::ScaleVerify => {
                self.need(&self.scale, "scale")?;
                self.need(&self.source, "source")?;
            }
            ExperimentKind::Solve => {
                self.equation()?.validate()?;
                self.grid()?.validate()?;
                self.need(&self.initial, "initial")?;
                self.solver.validate()?;
            }
            ExperimentKind::Analyze => {
                self.need(&self.analysis, "analysis")?;
                if self.field_path.is_none() && self.initial.is_none() {
                    return bad("analyze needs `field_path` or the inputs of a solve (`initial`)".into());
                }
            }
            ExperimentKind::Reproduce { name } => {
                if super::catalog::lookup(name).is_none() {
                    return bad(format!(
                        "unknown experiment `{name}`; known: {}",
                        super::catalog::names().join(", ")
                    ));
                }
            }
            ExperimentKind::Sweep => {
                let s = self.need(&self.sweep, "sweep")?;
                if s.count == 0 {
                    return bad("sweep.count must be positive".into());
                }
            }
        }
        if let Some(a) = &self.analysis {
            if a.theta == ThetaSource::FromFormula && self.equation.is_none() {
                return bad("theta from the formula needs `equation`".into());
            }
            if let ThetaSource::Explicit { value } = a.theta {
                if !(value >= 1.0) {
                    return bad(format!("analysis.theta must be >= 1, got {value}"));
                }
            }
        }
        for a in &self.assertions {
            if a.min.is_none() && a.max.is_none() {
                return bad(format!("assertion on `{}` has neither min nor max", a.metric));
            }
        }
        Ok(())
    }
}
