//! Closed-form sharp Hölder exponents for the parabolic p-Poisson, porous medium
//! and doubly nonlinear equations with sources in `L^r(0,T; L^q)`.
//!
//! All formulas are written in terms of the reciprocals `1/q` and `1/r`, so an
//! infinite exponent is handled exactly (`1/∞ = 0`) rather than approximated by a
//! large number.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquationClass {
    Heat,
    PParabolic,
    Pme,
    DoublyNonlinear,
}

impl fmt::Display for EquationClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            EquationClass::Heat => "heat",
            EquationClass::PParabolic => "p_parabolic",
            EquationClass::Pme => "pme",
            EquationClass::DoublyNonlinear => "doubly_nonlinear",
        };
        f.write_str(s)
    }
}

fn default_p() -> f64 {
    2.0
}
fn default_m() -> f64 {
    1.0
}

/// Equation class together with its structural exponents.
///
/// `p` is the gradient exponent (2 for linear diffusion), `m` the porous medium
/// exponent (1 for no density dependence), `n` the spatial dimension. Each class
/// admits its closure: `PParabolic` accepts `p = 2` and `Pme` accepts `m = 1`,
/// which is how the reduction identities are exercised.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquationParams {
    pub class: EquationClass,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default = "default_m")]
    pub m: f64,
    pub n: usize,
}

impl EquationParams {
    pub fn heat(n: usize) -> Result<Self> {
        Self::new(EquationClass::Heat, 2.0, 1.0, n)
    }

    pub fn p_parabolic(p: f64, n: usize) -> Result<Self> {
        Self::new(EquationClass::PParabolic, p, 1.0, n)
    }

    pub fn pme(m: f64, n: usize) -> Result<Self> {
        Self::new(EquationClass::Pme, 2.0, m, n)
    }

    pub fn doubly_nonlinear(p: f64, m: f64, n: usize) -> Result<Self> {
        Self::new(EquationClass::DoublyNonlinear, p, m, n)
    }

    pub fn new(class: EquationClass, p: f64, m: f64, n: usize) -> Result<Self> {
        let params = EquationParams { class, p, m, n };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameters(msg));
        if self.n == 0 {
            return bad("dimension n must be >= 1".into());
        }
        if !self.p.is_finite() || !self.m.is_finite() {
            return bad(format!("p = {}, m = {} must be finite", self.p, self.m));
        }
        match self.class {
            EquationClass::Heat if self.p != 2.0 || self.m != 1.0 => {
                bad(format!("heat requires p = 2, m = 1 (got p = {}, m = {})", self.p, self.m))
            }
            EquationClass::PParabolic if self.p < 2.0 || self.m != 1.0 => {
                bad(format!("p-parabolic requires p >= 2, m = 1 (got p = {}, m = {})", self.p, self.m))
            }
            EquationClass::Pme if self.m < 1.0 || self.p != 2.0 => {
                bad(format!("porous medium requires m >= 1, p = 2 (got p = {}, m = {})", self.p, self.m))
            }
            EquationClass::DoublyNonlinear if self.p < 2.0 || self.m < 1.0 => {
                bad(format!("doubly nonlinear requires p >= 2, m >= 1 (got p = {}, m = {})", self.p, self.m))
            }
            _ => Ok(()),
        }
    }
}

/// Lebesgue exponents of a source `f ∈ L^r(0,T; L^q)`. Either may be `f64::INFINITY`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceIntegrability {
    #[serde(with = "crate::ext_real")]
    pub q: f64,
    #[serde(with = "crate::ext_real")]
    pub r: f64,
}

impl SourceIntegrability {
    pub fn new(q: f64, r: f64) -> Result<Self> {
        let s = SourceIntegrability { q, r };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.q > 1.0) || !(self.r > 1.0) {
            return Err(Error::InvalidParameters(format!(
                "integrability exponents must satisfy q > 1, r > 1 (got q = {}, r = {})",
                self.q, self.r
            )));
        }
        Ok(())
    }

    pub fn inv_q(&self) -> f64 {
        1.0 / self.q
    }

    pub fn inv_r(&self) -> f64 {
        1.0 / self.r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExponentProvenance {
    Known,
    Assumed,
}

/// Optimal Hölder exponent of the homogeneous problem (`α₀` for the porous medium
/// equation, `α_*` for the doubly nonlinear one).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomogeneousExponent {
    pub value: f64,
    pub provenance: ExponentProvenance,
}

impl HomogeneousExponent {
    pub fn assumed(value: f64) -> Result<Self> {
        Self::checked(value, ExponentProvenance::Assumed)
    }

    pub fn known(value: f64) -> Result<Self> {
        Self::checked(value, ExponentProvenance::Known)
    }

    fn checked(value: f64, provenance: ExponentProvenance) -> Result<Self> {
        if !(value > 0.0 && value <= 1.0) {
            return Err(Error::InvalidParameters(format!(
                "homogeneous exponent must lie in (0, 1], got {value}"
            )));
        }
        Ok(HomogeneousExponent { value, provenance })
    }

    /// One-dimensional porous medium value `min{1, 1/(m-1)}` (Aronson–Caffarelli).
    pub fn pme_one_dimensional(m: f64) -> Self {
        HomogeneousExponent {
            value: (1.0 / (m - 1.0)).min(1.0),
            provenance: ExponentProvenance::Known,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    SourceLimited,
    HomogeneousLimited,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::SourceLimited => "source_limited",
            Branch::HomogeneousLimited => "homogeneous_limited",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    /// Hölder exponent in space (α, γ or β depending on the class).
    pub alpha_space: f64,
    /// Hölder exponent in time, `alpha_space / theta`.
    pub alpha_time: f64,
    pub theta: f64,
    pub branch: Branch,
    /// The exponent is an open supremum: every smaller value is attained, this one is not.
    pub open_interval: bool,
    /// The exponent before division by `m` (PME) or scaling by `(p-1)/(m+p-2)` (DNL).
    pub raw_alpha: f64,
}

impl RegularityReport {
    /// A realizable space exponent: the supremum minus `margin` on the open branch.
    pub fn realized_space(&self, margin: f64) -> f64 {
        if self.open_interval {
            self.alpha_space - margin
        } else {
            self.alpha_space
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    LessThan,
    GreaterThan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub name: String,
    pub expression: String,
    pub lhs: f64,
    pub relation: Relation,
    pub threshold: f64,
    pub holds: bool,
}

impl ConditionCheck {
    fn new(name: &str, expression: &str, lhs: f64, relation: Relation, threshold: f64) -> Self {
        let holds = match relation {
            Relation::LessThan => lhs < threshold,
            Relation::GreaterThan => lhs > threshold,
        };
        ConditionCheck {
            name: name.to_string(),
            expression: expression.to_string(),
            lhs,
            relation,
            threshold,
            holds,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityVerdict {
    pub admissible: bool,
    pub failed_conditions: Vec<ConditionCheck>,
    /// Every condition that was evaluated, passing or not.
    pub evaluated: Vec<ConditionCheck>,
}

fn minimal_integrability(p: f64, n: f64, integ: &SourceIntegrability) -> ConditionCheck {
    ConditionCheck::new(
        "minimal_integrability",
        "1/r + n/(pq) < 1",
        integ.inv_r() + n * integ.inv_q() / p,
        Relation::LessThan,
        1.0,
    )
}

fn borderline(n: f64, integ: &SourceIntegrability) -> ConditionCheck {
    ConditionCheck::new(
        "borderline",
        "2/r + n/q > 1",
        2.0 * integ.inv_r() + n * integ.inv_q(),
        Relation::GreaterThan,
        1.0,
    )
}

fn pme_integrability(n: f64, integ: &SourceIntegrability) -> ConditionCheck {
    ConditionCheck::new(
        "pme_integrability",
        "1/r + n/(2q) < 1",
        integ.inv_r() + n * integ.inv_q() / 2.0,
        Relation::LessThan,
        1.0,
    )
}

fn dnl_borderline(n: f64, integ: &SourceIntegrability) -> ConditionCheck {
    ConditionCheck::new(
        "dnl_borderline",
        "3/r + n/q > 2",
        3.0 * integ.inv_r() + n * integ.inv_q(),
        Relation::GreaterThan,
        2.0,
    )
}

/// Evaluate the integrability window for the equation class.
///
/// A doubly nonlinear equation with `m = 1` is the p-parabolic one and with `p = 2`
/// the porous medium one; those reductions use their parent's window.
pub fn check_admissibility(params: &EquationParams, integ: &SourceIntegrability) -> AdmissibilityVerdict {
    let n = params.n as f64;
    let evaluated = match params.class {
        EquationClass::Heat => vec![minimal_integrability(2.0, n, integ), borderline(n, integ)],
        EquationClass::PParabolic => vec![minimal_integrability(params.p, n, integ), borderline(n, integ)],
        EquationClass::Pme => vec![pme_integrability(n, integ)],
        EquationClass::DoublyNonlinear => {
            if params.m == 1.0 {
                vec![minimal_integrability(params.p, n, integ), borderline(n, integ)]
            } else if params.p == 2.0 {
                vec![pme_integrability(n, integ)]
            } else {
                vec![minimal_integrability(params.p, n, integ), dnl_borderline(n, integ)]
            }
        }
    };
    let failed_conditions: Vec<_> = evaluated.iter().filter(|c| !c.holds).cloned().collect();
    AdmissibilityVerdict {
        admissible: failed_conditions.is_empty(),
        failed_conditions,
        evaluated,
    }
}

/// `α = ((pq−n)r − pq) / (q[(p−1)r − (p−2)])`, evaluated through reciprocals.
pub fn p_parabolic_alpha(p: f64, n: f64, q: f64, r: f64) -> f64 {
    let (iq, ir) = (1.0 / q, 1.0 / r);
    let a = 1.0 - ir - n * iq / p;
    let b = 2.0 * ir + n * iq - 1.0;
    p * a / (b + p * a)
}

/// Linear (p = 2) exponent `1 − (2/r + n/q − 1)`.
pub fn heat_alpha(n: f64, q: f64, r: f64) -> f64 {
    1.0 - (2.0 / r + n / q - 1.0)
}

/// Source-limited porous medium bound `m[(2q−n)r − 2q] / (q[mr − (m−1)])`.
pub fn pme_source_bound(m: f64, n: f64, q: f64, r: f64) -> f64 {
    let (iq, ir) = (1.0 / q, 1.0 / r);
    2.0 * m * (1.0 - ir - n * iq / 2.0) / (m * (1.0 - ir) + ir)
}

/// Source-limited doubly nonlinear bound
/// `(m+p−2)[(pq−n)r − pq] / (q(p−1)[(r−1)(m+p−2) + 1])`.
pub fn dnl_source_bound(p: f64, m: f64, n: f64, q: f64, r: f64) -> f64 {
    let (iq, ir) = (1.0 / q, 1.0 / r);
    let s = m + p - 2.0;
    s * p * (1.0 - ir - n * iq / p) / ((p - 1.0) * (s * (1.0 - ir) + ir))
}

pub fn theta_p_parabolic(p: f64, alpha: f64) -> f64 {
    p - (p - 2.0) * alpha
}

pub fn theta_pme(m: f64, alpha: f64) -> f64 {
    2.0 - (1.0 - 1.0 / m) * alpha
}

/// Intrinsic time exponent of the doubly nonlinear equation for space exponent `beta`.
///
/// Balancing `u_t` against `div(|u|^{m-1}|∇u|^{p-2}∇u)` under
/// `x ↦ ρx, t ↦ ρ^θ t, u ↦ ρ^β u` gives `θ = p − (m+p−3)β`; it reduces to
/// `p − (p−2)α` for `m = 1` and to `2 − (1−1/m)α` for `p = 2`.
pub fn theta_doubly_nonlinear(p: f64, m: f64, beta: f64) -> f64 {
    p - (m + p - 3.0) * beta
}

fn homogeneous_or_default(
    params: &EquationParams,
    hom: Option<HomogeneousExponent>,
) -> Result<HomogeneousExponent> {
    if let Some(h) = hom {
        return Ok(h);
    }
    let missing = || Error::MissingHomogeneousExponent {
        class: params.class.to_string(),
        n: params.n,
    };
    match params.class {
        EquationClass::Pme if params.n == 1 => Ok(HomogeneousExponent::pme_one_dimensional(params.m)),
        EquationClass::DoublyNonlinear if params.m == 1.0 => HomogeneousExponent::known(1.0),
        EquationClass::DoublyNonlinear if params.p == 2.0 && params.n == 1 => {
            Ok(HomogeneousExponent::pme_one_dimensional(params.m))
        }
        _ => Err(missing()),
    }
}

/// Pick between the source bound and the homogeneous exponent. A tie resolves to the
/// closed, source-limited value.
fn select_branch(source_bound: f64, hom: f64) -> (f64, Branch, bool) {
    if source_bound <= hom {
        (source_bound, Branch::SourceLimited, false)
    } else {
        (hom, Branch::HomogeneousLimited, true)
    }
}

pub fn sharp_exponents(
    params: &EquationParams,
    integ: &SourceIntegrability,
    hom: Option<HomogeneousExponent>,
) -> Result<RegularityReport> {
    params.validate()?;
    integ.validate()?;
    let verdict = check_admissibility(params, integ);
    if !verdict.admissible {
        let failed = verdict
            .failed_conditions
            .iter()
            .map(|c| format!("{} (lhs = {})", c.expression, c.lhs))
            .collect::<Vec<_>>()
            .join("; ");
        return Err(Error::InadmissibleParameters { failed });
    }
    let n = params.n as f64;
    let (q, r) = (integ.q, integ.r);

    let report = match params.class {
        EquationClass::Heat | EquationClass::PParabolic => {
            let alpha = p_parabolic_alpha(params.p, n, q, r);
            let theta = theta_p_parabolic(params.p, alpha);
            RegularityReport {
                alpha_space: alpha,
                alpha_time: alpha / theta,
                theta,
                branch: Branch::SourceLimited,
                open_interval: false,
                raw_alpha: alpha,
            }
        }
        EquationClass::Pme => {
            let hom = homogeneous_or_default(params, hom)?;
            let bound = pme_source_bound(params.m, n, q, r);
            let (alpha, branch, open) = select_branch(bound, hom.value);
            let gamma = alpha / params.m;
            let theta = theta_pme(params.m, alpha);
            RegularityReport {
                alpha_space: gamma,
                alpha_time: gamma / theta,
                theta,
                branch,
                open_interval: open,
                raw_alpha: alpha,
            }
        }
        EquationClass::DoublyNonlinear => {
            let hom = homogeneous_or_default(params, hom)?;
            let (p, m) = (params.p, params.m);
            let bound = dnl_source_bound(p, m, n, q, r);
            let (alpha, branch, open) = select_branch(bound, hom.value);
            let beta = alpha * (p - 1.0) / (m + p - 2.0);
            let theta = theta_doubly_nonlinear(p, m, beta);
            RegularityReport {
                alpha_space: beta,
                alpha_time: beta / theta,
                theta,
                branch,
                open_interval: open,
                raw_alpha: alpha,
            }
        }
    };
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    fn of(v: f64) -> Sign {
        if v > 0.0 {
            Sign::Positive
        } else if v < 0.0 {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Negative => -1,
            Sign::Zero => 0,
            Sign::Positive => 1,
        }
    }
}

/// Sign of `∂α/∂p` for the p-parabolic exponent, which equals `sign(q(2−r) + nr)`.
///
/// For `r = ∞` the expression divided by `r` tends to `n − q`.
pub fn p_monotonicity_sign(n: usize, q: f64, r: f64) -> Sign {
    let n = n as f64;
    match (q.is_infinite(), r.is_infinite()) {
        (_, true) => Sign::of(n - q),
        (true, false) => {
            if r == 2.0 {
                Sign::Positive
            } else {
                Sign::of(2.0 - r)
            }
        }
        (false, false) => Sign::of(q * (2.0 - r) + n * r),
    }
}
