use super::{Expr, GridSpec, SpaceTimeField};
use crate::error::{Error, Result};
use crate::exponents::SourceIntegrability;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", content = "data", rename_all = "snake_case")]
pub enum SourceForm {
    ClosedForm(Expr),
    Sampled(SpaceTimeField),
}

/// A source `f` with the integrability class `L^r(L^q)` it is declared to belong to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceTerm {
    #[serde(flatten)]
    pub form: SourceForm,
    #[serde(with = "crate::ext_real")]
    pub declared_q: f64,
    #[serde(with = "crate::ext_real")]
    pub declared_r: f64,
}

impl SourceTerm {
    pub fn zero() -> Self {
        SourceTerm {
            form: SourceForm::ClosedForm(Expr::zero()),
            declared_q: f64::INFINITY,
            declared_r: f64::INFINITY,
        }
    }

    pub fn closed_form(expr: Expr, q: f64, r: f64) -> Self {
        SourceTerm {
            form: SourceForm::ClosedForm(expr),
            declared_q: q,
            declared_r: r,
        }
    }

    pub fn sampled(field: SpaceTimeField, q: f64, r: f64) -> Self {
        SourceTerm {
            form: SourceForm::Sampled(field),
            declared_q: q,
            declared_r: r,
        }
    }

    pub fn integrability(&self) -> Result<SourceIntegrability> {
        SourceIntegrability::new(self.declared_q, self.declared_r)
    }

    pub fn is_zero(&self) -> bool {
        matches!(&self.form, SourceForm::ClosedForm(Expr::Const { value }) if *value == 0.0)
    }

    pub fn eval(&self, x: &[f64], t: f64) -> Result<f64> {
        match &self.form {
            SourceForm::ClosedForm(e) => e.try_eval(x, t),
            SourceForm::Sampled(f) => f.interpolate(x, t),
        }
    }

    /// Values at the spatial nodes of `grid` at time `t`.
    pub fn slice(&self, grid: &GridSpec, t: f64) -> Result<Vec<f64>> {
        match &self.form {
            SourceForm::ClosedForm(e) => e.sample_slice(grid, t),
            SourceForm::Sampled(f) => (0..grid.spatial_len())
                .map(|s| {
                    let node = grid.node(s);
                    f.interpolate(&node[..grid.dim], t)
                })
                .collect(),
        }
    }

    pub fn sample(&self, grid: &GridSpec) -> Result<SpaceTimeField> {
        let mut values = Vec::with_capacity(grid.len());
        for k in 0..grid.nt {
            values.extend(self.slice(grid, grid.time_at(k))?);
        }
        SpaceTimeField::new(grid.clone(), values, "source").map_err(|e| match e {
            Error::FieldData(m) => Error::FieldData(format!("source: {m}")),
            other => other,
        })
    }

    /// Cap applied to a rough closed-form source, if any.
    pub fn cap(&self) -> Option<f64> {
        fn find(e: &Expr) -> Option<f64> {
            match e {
                Expr::PowerLaw { cap, .. } | Expr::TimePower { cap, .. } => *cap,
                Expr::Sum { terms: v } | Expr::Product { factors: v } => v.iter().find_map(find),
                Expr::Scaled { inner, .. } => find(inner),
                _ => None,
            }
        }
        match &self.form {
            SourceForm::ClosedForm(e) => find(e),
            SourceForm::Sampled(_) => None,
        }
    }
}
