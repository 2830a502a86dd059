use super::catalog;
use super::config::{AnalysisParams, Assertion, ExperimentConfig, ExperimentKind, ScaleVerifyParams, ThetaSource};
use super::sweep::exponent_sweep;
use crate::error::{Error, Result};
use crate::exponents::{
    check_admissibility, p_monotonicity_sign, sharp_exponents, EquationClass, Sign, SourceIntegrability,
};
use crate::fields::{io, GridSpec, SpaceTimeField, SourceTerm};
use crate::geometry::{build_scaling, lqr_norm, scale_source, scaling_norm_factor, NormRegion};
use crate::pde::solve;
use crate::regularity::{
    campanato_sequence, fit_exponent, geometric_iteration_check, oscillation_profile, HolderFit, OscillationProfile,
    ProfileSpec, Quantity,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::time::Instant;

/// A result table. Cells are preformatted so CSV output is byte-stable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &str, columns: &[&str]) -> Self {
        Table {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

pub(crate) fn num(v: f64) -> String {
    format!("{v}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileArtifact {
    pub name: String,
    pub quantity: Quantity,
    pub profile: OscillationProfile,
    pub fit: Option<HolderFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssertionOutcome {
    pub metric: String,
    pub value: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub passed: bool,
}

fn evaluate(a: &Assertion, metrics: &BTreeMap<String, f64>) -> AssertionOutcome {
    let value = metrics.get(&a.metric).copied();
    let passed = value.is_some_and(|v| a.min.is_none_or(|lo| v >= lo) && a.max.is_none_or(|hi| v <= hi));
    AssertionOutcome {
        metric: a.metric.clone(),
        value,
        min: a.min,
        max: a.max,
        passed,
    }
}

/// Everything one run produced. Timings are kept apart from the results so the
/// results serialize identically for identical inputs.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    /// The configuration that actually ran (a catalog entry for `reproduce`).
    pub config: ExperimentConfig,
    pub metrics: BTreeMap<String, f64>,
    pub result: Value,
    pub tables: Vec<Table>,
    pub profiles: Vec<ProfileArtifact>,
    pub field: Option<SpaceTimeField>,
    pub assertions: Vec<AssertionOutcome>,
    pub timings: BTreeMap<String, f64>,
}

impl RunArtifacts {
    pub fn empty(config: ExperimentConfig) -> Self {
        RunArtifacts {
            config,
            metrics: BTreeMap::new(),
            result: Value::Null,
            tables: Vec::new(),
            profiles: Vec::new(),
            field: None,
            assertions: Vec::new(),
            timings: BTreeMap::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    pub fn is_empty(&self) -> bool {
        self.metrics.is_empty() && self.tables.is_empty() && self.profiles.is_empty() && self.result.is_null()
    }

    fn metric(&mut self, key: &str, v: f64) {
        self.metrics.insert(key.into(), v);
    }

    fn time<T>(&mut self, stage: &str, f: impl FnOnce(&mut Self) -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f(self);
        self.timings.insert(stage.into(), start.elapsed().as_secs_f64());
        out
    }
}

fn context(stage: &str, e: Error) -> Error {
    match e {
        Error::ConfigInvalid(m) => Error::ConfigInvalid(format!("{stage}: {m}")),
        other => other,
    }
}

/// Run one experiment. Assertions are evaluated but do not turn into errors.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunArtifacts> {
    config.validate()?;
    if let ExperimentKind::Reproduce { name } = &config.experiment {
        let mut inner = catalog::lookup(name).ok_or_else(|| Error::ConfigInvalid(format!("unknown experiment `{name}`")))?;
        inner.seed = config.seed;
        if config.output_dir.is_some() {
            inner.output_dir = config.output_dir.clone();
        }
        return run_experiment(&inner);
    }
    let mut art = RunArtifacts::empty(config.clone());
    let start = Instant::now();
    match &config.experiment {
        ExperimentKind::Exponents => art.time("exponents", |a| exponents(config, a))?,
        ExperimentKind::Admissible => art.time("admissible", |a| admissible(config, a))?,
        ExperimentKind::ScaleVerify => {
            let p = config.scale.as_ref().expect("validated");
            art.time("scale_verify", |a| scale_verify(config, p, a))?
        }
        ExperimentKind::Solve => {
            let field = art.time("solve", |a| run_solve(config, a))?;
            art.field = Some(field);
        }
        ExperimentKind::Analyze => {
            let field = match &config.field_path {
                Some(path) => art.time("load", |_| {
                    let file = std::fs::File::open(path)
                        .map_err(|e| Error::IoFailure(format!("{}: {e}", path.display())))?;
                    io::read_binary(std::io::BufReader::new(file))
                })?,
                None => art.time("solve", |a| run_solve(config, a))?,
            };
            let p = config.analysis.as_ref().expect("validated");
            art.time("analyze", |a| analyze(config, p, &field, a))?;
            art.field = Some(field);
        }
        ExperimentKind::Sweep => art.time("sweep", |a| sweep(config, a))?,
        ExperimentKind::Reproduce { .. } => unreachable!("resolved above"),
    }
    art.timings.insert("total".into(), start.elapsed().as_secs_f64());
    art.assertions = config.assertions.iter().map(|a| evaluate(a, &art.metrics)).collect();
    Ok(art)
}

fn exponents(config: &ExperimentConfig, art: &mut RunArtifacts) -> Result<()> {
    let params = config.equation()?;
    let integ = config.integrability()?;
    let report = sharp_exponents(params, &integ, config.homogeneous()?)?;
    art.metric("alpha", report.alpha_space);
    art.metric("alpha_time", report.alpha_time);
    art.metric("theta", report.theta);
    art.metric("raw_alpha", report.raw_alpha);
    art.metric("open_interval", report.open_interval as u8 as f64);
    art.result = json!({
        "equation": params,
        "integrability": integ,
        "alpha": report.alpha_space,
        "alpha_time": report.alpha_time,
        "theta": report.theta,
        "raw_alpha": report.raw_alpha,
        "branch": report.branch,
        "open_interval": report.open_interval,
    });
    Ok(())
}

fn admissible(config: &ExperimentConfig, art: &mut RunArtifacts) -> Result<()> {
    let params = config.equation()?;
    let integ = config.integrability()?;
    params.validate()?;
    let verdict = check_admissibility(params, &integ);
    art.metric("admissible", verdict.admissible as u8 as f64);
    let mut table = Table::new("conditions", &["name", "expression", "lhs", "relation", "threshold", "holds"]);
    for c in &verdict.evaluated {
        art.metric(&format!("{}_lhs", c.name), c.lhs);
        table.push(vec![
            c.name.clone(),
            c.expression.clone(),
            num(c.lhs),
            format!("{:?}", c.relation),
            num(c.threshold),
            c.holds.to_string(),
        ]);
    }
    art.tables.push(table);
    art.result = json!({ "equation": params, "integrability": integ, "verdict": verdict });
    Ok(())
}

/// Sample the transformed source on `G₁` and the original one on the image region
/// with the same node counts, and compare the measured mixed norm with the
/// predicted factor times the restricted norm.
fn scale_verify(config: &ExperimentConfig, p: &ScaleVerifyParams, art: &mut RunArtifacts) -> Result<()> {
    let f: SourceTerm = config.source();
    let integ = config.integrability()?;
    let (q, r) = (integ.q, integ.r);
    let n = p.anchor.center.len();
    if !(1..=2).contains(&n) {
        return Err(Error::ConfigInvalid(format!("scale.anchor must have 1 or 2 coordinates, got {n}")));
    }
    let sc = build_scaling(p.scaling)?;
    let factor = scaling_norm_factor(&sc, q, r, n)?;
    let c = &p.anchor.center;
    let t0 = p.anchor.t0;
    let box_grid = |radius: f64, duration: f64| {
        GridSpec::new(
            n,
            c.iter().map(|x| [x - radius, x + radius]).collect(),
            p.nx,
            [t0 - duration, t0],
            p.nt,
        )
    };
    let unit_grid = box_grid(1.0, 1.0)?;
    let image_grid = box_grid(sc.space_factor, sc.time_factor)?;
    let unit = NormRegion::BallSlab {
        center: c.clone(),
        t0,
        radius: 1.0,
        duration: 1.0,
    };
    let image = NormRegion::BallSlab {
        center: c.clone(),
        t0,
        radius: sc.space_factor,
        duration: sc.time_factor,
    };
    let scaled = scale_source(&f, &sc, &p.anchor, &unit_grid)?;
    let measured = lqr_norm(&scaled.sample(&unit_grid)?, &unit, q, r)?.value;
    let restricted = lqr_norm(&f.sample(&image_grid)?, &image, q, r)?.value;
    let predicted = factor.norm_factor * restricted;
    let rel = if predicted == 0.0 {
        measured.abs()
    } else {
        (measured - predicted).abs() / predicted.abs()
    };
    art.metric("measured_norm", measured);
    art.metric("restricted_norm", restricted);
    art.metric("predicted_norm", predicted);
    art.metric("relative_error", rel);
    art.metric("norm_factor", factor.norm_factor);
    art.metric("norm_exponent", factor.norm_exponent);
    art.metric("exponent_nonnegative", factor.exponent_nonnegative as u8 as f64);
    art.result = json!({
        "scaling": sc,
        "factor": factor,
        "integrability": SourceIntegrability { q, r },
        "measured_norm": measured,
        "restricted_norm": restricted,
        "predicted_norm": predicted,
        "relative_error": rel,
    });
    Ok(())
}

fn run_solve(config: &ExperimentConfig, art: &mut RunArtifacts) -> Result<SpaceTimeField> {
    let params = config.equation()?;
    let grid = config.grid()?;
    let f = config.source();
    let init = config
        .initial
        .as_ref()
        .ok_or_else(|| Error::ConfigInvalid("solve needs `initial`".into()))?
        .sample_slice(grid, grid.time[0])?;
    let field = solve(params, &f, &init, grid, &config.solver)?;
    if let Some(steps) = field.metadata.get("steps").and_then(|s| s.parse::<f64>().ok()) {
        art.metric("steps", steps);
    }
    let cell = (0..grid.dim).map(|a| grid.dx(a)).product::<f64>();
    let mass = |k: usize| field.slice(k).iter().sum::<f64>() * cell;
    art.metric("mass_initial", mass(0));
    art.metric("mass_final", mass(grid.nt - 1));
    art.metric("max_abs", field.max_abs());

    let mut table = Table::new("solution", &["t", "max", "min", "mass", "linf_error"]);
    let mut linf = 0.0f64;
    for k in 0..grid.nt {
        let slice = field.slice(k);
        let t = grid.time_at(k);
        let err = match &config.reference {
            Some(reference) => {
                let mut e = 0.0f64;
                for (s, &u) in slice.iter().enumerate() {
                    let node = grid.node(s);
                    e = e.max((u - reference.eval(&node[..grid.dim], t)?).abs());
                }
                linf = linf.max(e);
                num(e)
            }
            None => String::new(),
        };
        let (lo, hi) = slice
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        table.push(vec![num(t), num(hi), num(lo), num(mass(k)), err]);
    }
    if config.reference.is_some() {
        art.metric("linf_error", linf);
    }
    art.tables.push(table);
    art.result = json!({ "solve": { "equation": params, "grid": grid, "metadata": field.metadata } });
    Ok(field)
}

fn analyze(config: &ExperimentConfig, p: &AnalysisParams, field: &SpaceTimeField, art: &mut RunArtifacts) -> Result<()> {
    let report = match &config.equation {
        Some(eq) => match config.integrability() {
            Ok(integ) => Some(sharp_exponents(eq, &integ, config.homogeneous()?).map_err(|e| context("analysis", e))?),
            Err(_) => None,
        },
        None => None,
    };
    let theta = match p.theta {
        ThetaSource::Explicit { value } => value,
        ThetaSource::FromFormula => {
            report
                .ok_or_else(|| Error::ConfigInvalid("theta from the formula needs `equation` and integrability".into()))?
                .theta
        }
    };
    art.metric("theta", theta);
    if let Some(r) = &report {
        art.metric("formula_exponent", r.alpha_space);
    }
    let spec = ProfileSpec::new(&p.center, p.t0, theta, p.base_radius, p.k_max)
        .with_lambda(p.lambda)
        .with_p(p.p);
    let profile = oscillation_profile(field, &spec)?;
    art.metric("k_max_effective", profile.k_max_effective as f64);
    art.metric("truncated", profile.truncated as u8 as f64);
    let fit = fit_exponent(&profile, p.window, p.quantity)?;
    art.metric("exponent", fit.exponent);
    art.metric("r_squared", fit.r_squared);
    art.metric("fit_points", fit.points as f64);
    if let Some(r) = &report {
        art.metric("exponent_margin", fit.exponent - r.alpha_space);
    }
    let mut result = json!({ "theta": theta, "formula": report, "fit": fit });

    if p.campanato {
        let c = campanato_sequence(field, &profile, p.window)?;
        if let Some(d) = &c.decay {
            art.metric("campanato_rate", d.exponent);
        }
        art.metric("campanato_constant", c.constant);
        art.metric("campanato_holds", c.holds as u8 as f64);
        let mut table = Table::new("campanato", &["k", "radius", "diff", "distance_to_limit", "bound", "holds"]);
        for l in &c.levels {
            let diff = c.diffs.get(l.k).map(|d| num(*d)).unwrap_or_default();
            table.push(vec![
                l.k.to_string(),
                num(l.radius),
                diff,
                num(l.distance_to_limit),
                num(l.bound),
                l.holds.to_string(),
            ]);
        }
        art.tables.push(table);
        result["campanato"] = serde_json::to_value(&c).map_err(|e| Error::IoFailure(e.to_string()))?;
    }

    if let Some(it) = &p.iteration {
        let gamma = match (it.gamma, &report) {
            (Some(g), _) => g,
            (None, Some(r)) => r.realized_space(it.margin),
            (None, None) => {
                return Err(Error::ConfigInvalid(
                    "analysis.iteration needs `gamma` or exponent inputs".into(),
                ))
            }
        };
        let rep = geometric_iteration_check(field, &spec, gamma)?;
        art.metric("iteration_gamma", rep.gamma);
        art.metric("iteration_constant", rep.constant);
        let mut table = Table::new("iteration", &["k", "radius", "precondition", "sup_abs", "ratio"]);
        for l in &rep.levels {
            table.push(vec![
                l.k.to_string(),
                num(l.radius),
                l.precondition.to_string(),
                num(l.sup_abs),
                num(l.ratio),
            ]);
        }
        art.tables.push(table);
        result["iteration"] = serde_json::to_value(&rep).map_err(|e| Error::IoFailure(e.to_string()))?;
    }

    if let Some(prev) = art.result.get("solve").cloned() {
        result["solve"] = prev;
    }
    art.result = result;
    art.profiles.push(ProfileArtifact {
        name: "profile".into(),
        quantity: p.quantity,
        profile,
        fit: Some(fit),
    });
    Ok(())
}

fn sweep(config: &ExperimentConfig, art: &mut RunArtifacts) -> Result<()> {
    let s = config.sweep.as_ref().expect("validated");
    let rows = exponent_sweep(s.class, s.count, config.seed, s.homogeneous)?;
    let mut table = Table::new("sweep", &["p", "m", "n", "q", "r", "alpha", "theta", "branch"]);
    let mut violations = 0usize;
    let (mut amin, mut amax) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut tmin, mut tmax) = (f64::INFINITY, f64::NEG_INFINITY);
    for row in &rows {
        let (pr, ig, rep) = (&row.tuple.params, &row.tuple.integ, &row.report);
        table.push(vec![
            num(pr.p),
            num(pr.m),
            pr.n.to_string(),
            num(ig.q),
            num(ig.r),
            num(rep.alpha_space),
            num(rep.theta),
            rep.branch.to_string(),
        ]);
        amin = amin.min(rep.alpha_space);
        amax = amax.max(rep.alpha_space);
        tmin = tmin.min(rep.theta);
        tmax = tmax.max(rep.theta);
        if matches!(s.class, EquationClass::Heat | EquationClass::PParabolic)
            && p_monotonicity_sign(pr.n, ig.q, ig.r) != Sign::Positive
        {
            violations += 1;
        }
    }
    art.metric("rows", rows.len() as f64);
    art.metric("min_alpha", amin);
    art.metric("max_alpha", amax);
    art.metric("min_theta", tmin);
    art.metric("max_theta", tmax);
    art.metric("monotonicity_violations", violations as f64);
    art.tables.push(table);
    art.result = json!({ "class": s.class, "count": s.count, "seed": config.seed });
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponents_example() {
        let art = run_experiment(&catalog::lookup("pparabolic-exponents").unwrap()).unwrap();
        assert!((art.metrics["alpha"] - 0.75).abs() < 1e-12);
        assert!((art.metrics["theta"] - 2.25).abs() < 1e-12);
        assert!((art.metrics["alpha_time"] - 1.0 / 3.0).abs() < 1e-12);
        assert!(art.passed());
    }

    #[test]
    fn admissible_example() {
        let art = run_experiment(&catalog::lookup("heat-admissible").unwrap()).unwrap();
        assert_eq!(art.metrics["admissible"], 1.0);
        assert!((art.metrics["minimal_integrability_lhs"] - (0.25 + 2.0 / 6.0)).abs() < 1e-15);
        assert!((art.metrics["borderline_lhs"] - (0.5 + 2.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn norm_chain_matches() {
        let art = run_experiment(&catalog::lookup("pme-zoom-norm-chain").unwrap()).unwrap();
        assert!(art.metrics["relative_error"] < 1e-2, "{:?}", art.metrics);
        assert_eq!(art.metrics["exponent_nonnegative"], 1.0);
    }

    #[test]
    fn sweep_table_shape() {
        let mut c = catalog::lookup("pparabolic-sweep").unwrap();
        c.seed = 11;
        let a = run_experiment(&c).unwrap();
        let b = run_experiment(&c).unwrap();
        assert_eq!(a.tables, b.tables);
        assert_eq!(a.tables[0].rows.len(), 100);
        assert_eq!(a.tables[0].columns, ["p", "m", "n", "q", "r", "alpha", "theta", "branch"]);
        assert!(a.passed());
    }

    #[test]
    fn missing_metric_fails_assertion() {
        let mut c = catalog::lookup("pparabolic-exponents").unwrap();
        c.assertions.push(Assertion::at_most("nonexistent", 1.0));
        let art = run_experiment(&c).unwrap();
        assert!(!art.passed());
        assert_eq!(art.assertions.last().unwrap().value, None);
    }

    #[test]
    fn heat_separable_within_tolerance() {
        let art = run_experiment(&catalog::lookup("heat-separable").unwrap()).unwrap();
        assert!(art.metrics["linf_error"] <= 5e-4, "{}", art.metrics["linf_error"]);
    }
}
