//! Intrinsic θ-parabolic cylinders, the norms measured on them, and the anisotropic
//! rescalings that move a problem between scales.

use crate::error::{Error, Result};
use crate::fields::{pow_abs, Expr, GridSpec, Rect, Region, SourceForm, SourceTerm, SpaceTimeField};
use serde::{Deserialize, Serialize};

/// `G_τ(x₀, t₀) = (t₀ − τ^θ, t₀) × B_τ(x₀)`, closed for membership tests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntrinsicCylinder {
    pub center: Vec<f64>,
    pub t0: f64,
    pub radius: f64,
    pub theta: f64,
}

pub fn make_cylinder(center: &[f64], t0: f64, tau: f64, theta: f64) -> Result<IntrinsicCylinder> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::NonPositiveRadius(tau));
    }
    if !(theta >= 1.0) || !theta.is_finite() {
        return Err(Error::InvalidTheta(theta));
    }
    Ok(IntrinsicCylinder {
        center: center.to_vec(),
        t0,
        radius: tau,
        theta,
    })
}

impl IntrinsicCylinder {
    pub fn time_extent(&self) -> f64 {
        self.radius.powf(self.theta)
    }

    pub fn time_interval(&self) -> [f64; 2] {
        [self.t0 - self.time_extent(), self.t0]
    }

    /// Same center and θ, different radius.
    pub fn with_radius(&self, radius: f64) -> Result<Self> {
        make_cylinder(&self.center, self.t0, radius, self.theta)
    }

    pub fn is_inside(&self, grid: &GridSpec) -> bool {
        if self.center.len() != grid.dim {
            return false;
        }
        let [t_lo, t_hi] = self.time_interval();
        let mut corner = self.center.clone();
        for a in 0..grid.dim {
            for sign in [-1.0, 1.0] {
                corner.clone_from(&self.center);
                corner[a] += sign * self.radius;
                if !grid.contains(&corner, t_lo) || !grid.contains(&corner, t_hi) {
                    return false;
                }
            }
        }
        true
    }

    fn ensure_inside(&self, grid: &GridSpec) -> Result<()> {
        if self.is_inside(grid) {
            Ok(())
        } else {
            Err(Error::CylinderOutsideDomain(format!(
                "center {:?}, t0 = {}, radius {}, theta {}",
                self.center, self.t0, self.radius, self.theta
            )))
        }
    }
}

impl Region for IntrinsicCylinder {
    fn contains(&self, x: &[f64], t: f64) -> bool {
        let [t_lo, t_hi] = self.time_interval();
        if t < t_lo || t > t_hi {
            return false;
        }
        let d2: f64 = x.iter().zip(&self.center).map(|(a, b)| (a - b) * (a - b)).sum();
        d2 <= self.radius * self.radius
    }

    fn bounding_box(&self) -> (Vec<[f64; 2]>, [f64; 2]) {
        (
            self.center.iter().map(|c| [c - self.radius, c + self.radius]).collect(),
            self.time_interval(),
        )
    }
}

/// Regions norms can be measured on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum NormRegion {
    Cylinder(IntrinsicCylinder),
    Rect(Rect),
    /// `(t₀ − duration, t₀) × B_radius(center)` with an arbitrary duration.
    BallSlab {
        center: Vec<f64>,
        t0: f64,
        radius: f64,
        duration: f64,
    },
}

impl Region for NormRegion {
    fn contains(&self, x: &[f64], t: f64) -> bool {
        match self {
            NormRegion::Cylinder(c) => c.contains(x, t),
            NormRegion::Rect(r) => r.contains(x, t),
            NormRegion::BallSlab {
                center,
                t0,
                radius,
                duration,
            } => {
                let d2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                t >= t0 - duration && t <= *t0 && d2 <= radius * radius
            }
        }
    }

    fn bounding_box(&self) -> (Vec<[f64; 2]>, [f64; 2]) {
        match self {
            NormRegion::Cylinder(c) => c.bounding_box(),
            NormRegion::Rect(r) => r.bounding_box(),
            NormRegion::BallSlab {
                center,
                t0,
                radius,
                duration,
            } => (
                center.iter().map(|c| [c - radius, c + radius]).collect(),
                [t0 - duration, *t0],
            ),
        }
    }
}

impl From<IntrinsicCylinder> for NormRegion {
    fn from(c: IntrinsicCylinder) -> Self {
        NormRegion::Cylinder(c)
    }
}

impl From<Rect> for NormRegion {
    fn from(r: Rect) -> Self {
        NormRegion::Rect(r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormKind {
    Sup,
    PAvg {
        p: f64,
    },
    LqrMixed {
        #[serde(with = "crate::ext_real")]
        q: f64,
        #[serde(with = "crate::ext_real")]
        r: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormValue {
    pub value: f64,
    pub norm_kind: NormKind,
    pub region: NormRegion,
}

fn region_in_domain(field: &SpaceTimeField, region: &NormRegion) -> Result<()> {
    let (space, time) = region.bounding_box();
    let g = &field.grid;
    let ok = space.len() == g.dim && {
        let lo: Vec<f64> = space.iter().map(|iv| iv[0]).collect();
        let hi: Vec<f64> = space.iter().map(|iv| iv[1]).collect();
        g.contains(&lo, time[0]) && g.contains(&hi, time[1])
    };
    if ok {
        Ok(())
    } else {
        Err(Error::RegionOutsideDomain(format!("{region:?}")))
    }
}

/// Sup-norm statistics of the interpolant over a closed cylinder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Oscillation {
    pub osc: f64,
    pub sup_abs: f64,
    pub max: f64,
    pub min: f64,
}

fn axis_candidates(lo: f64, hi: f64, grid_lo: f64, dx: f64, n: usize) -> Vec<f64> {
    let mut v = vec![lo];
    let i0 = ((lo - grid_lo) / dx).floor().max(0.0) as usize;
    let i1 = (((hi - grid_lo) / dx).ceil().max(0.0) as usize).min(n - 1);
    for i in i0..=i1 {
        let x = grid_lo + i as f64 * dx;
        if x > lo && x < hi {
            v.push(x);
        }
    }
    v.push(hi);
    v
}

/// Oscillation and sup of the field over the cylinder.
///
/// The multilinear interpolant attains its extremes over a box at the grid lines
/// crossing it and at the box faces, so in 1D the candidates below give the exact
/// sup over the closed cylinder. In 2D the ball boundary is sampled where grid
/// lines cross it.
pub fn sup_oscillation(field: &SpaceTimeField, cyl: &IntrinsicCylinder) -> Result<Oscillation> {
    let g = &field.grid;
    cyl.ensure_inside(g)?;
    let [t_lo, t_hi] = cyl.time_interval();
    let ts = axis_candidates(t_lo, t_hi, g.time[0], g.dt(), g.nt);
    let mut points: Vec<[f64; 2]> = Vec::new();
    let r = cyl.radius;
    if g.dim == 1 {
        let c = cyl.center[0];
        for x in axis_candidates(c - r, c + r, g.space[0][0], g.dx(0), g.nx) {
            points.push([x, 0.0]);
        }
    } else {
        let (cx, cy) = (cyl.center[0], cyl.center[1]);
        let xs = axis_candidates(cx - r, cx + r, g.space[0][0], g.dx(0), g.nx);
        let ys = axis_candidates(cy - r, cy + r, g.space[1][0], g.dx(1), g.nx);
        for &x in &xs {
            for &y in &ys {
                if (x - cx).powi(2) + (y - cy).powi(2) <= r * r {
                    points.push([x, y]);
                }
            }
            let h = (r * r - (x - cx).powi(2)).max(0.0).sqrt();
            points.push([x, cy - h]);
            points.push([x, cy + h]);
        }
        for &y in &ys {
            let h = (r * r - (y - cy).powi(2)).max(0.0).sqrt();
            points.push([cx - h, y]);
            points.push([cx + h, y]);
        }
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &t in &ts {
        for p in &points {
            let v = field.interpolate_unchecked(&p[..g.dim], t);
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    Ok(Oscillation {
        osc: hi - lo,
        sup_abs: hi.abs().max(lo.abs()),
        max: hi,
        min: lo,
    })
}

/// `(⨍_Q |v|^p)^{1/p}` by the midpoint rule.
pub fn p_avg_norm(field: &SpaceTimeField, region: &NormRegion, p: f64) -> Result<NormValue> {
    if !(p >= 1.0) {
        return Err(Error::InvalidParameters(format!("p-average needs p >= 1, got {p}")));
    }
    region_in_domain(field, region)?;
    let samples = field.region_samples(region)?;
    if samples.cell_count() == 0 {
        return Err(Error::EmptyIntersection);
    }
    let value = (samples.integral(p) / samples.measure()).powf(1.0 / p);
    Ok(NormValue {
        value,
        norm_kind: NormKind::PAvg { p },
        region: region.clone(),
    })
}

/// `|Q|^{-1/p} ‖v‖_{p,Q}`: the second route to the averaged norm.
pub fn p_avg_norm_from_total(field: &SpaceTimeField, region: &NormRegion, p: f64) -> Result<f64> {
    region_in_domain(field, region)?;
    let measure = field.integrate_region(region, 0.0)?;
    let total = field.integrate_region(region, p)?.powf(1.0 / p);
    Ok(measure.powf(-1.0 / p) * total)
}

/// Plain space-time `L^p` norm.
pub fn lp_norm(field: &SpaceTimeField, region: &NormRegion, p: f64) -> Result<f64> {
    region_in_domain(field, region)?;
    Ok(field.integrate_region(region, p)?.powf(1.0 / p))
}

/// Maximum of `|v|` over the cell centers in the region.
pub fn sup_norm(field: &SpaceTimeField, region: &NormRegion) -> Result<NormValue> {
    region_in_domain(field, region)?;
    let samples = field.region_samples(region)?;
    if samples.cell_count() == 0 {
        return Err(Error::EmptyIntersection);
    }
    let value = samples.values().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(NormValue {
        value,
        norm_kind: NormKind::Sup,
        region: region.clone(),
    })
}

/// `‖f‖_{L^r(L^q)}`: spatial `L^q` per time cell, then temporal `L^r`.
pub fn lqr_norm(field: &SpaceTimeField, region: &NormRegion, q: f64, r: f64) -> Result<NormValue> {
    if !(q >= 1.0) || !(r >= 1.0) {
        return Err(Error::InvalidParameters(format!("mixed norm needs q, r >= 1 (got {q}, {r})")));
    }
    region_in_domain(field, region)?;
    let samples = field.region_samples(region)?;
    if samples.cell_count() == 0 {
        return Err(Error::EmptyIntersection);
    }
    let slab_norms = samples.slabs.iter().map(|slab| {
        if q.is_infinite() {
            slab.iter().fold(0.0f64, |m, v| m.max(v.abs()))
        } else {
            (slab.iter().map(|v| pow_abs(*v, q)).sum::<f64>() * samples.space_volume).powf(1.0 / q)
        }
    });
    let value = if r.is_infinite() {
        slab_norms.fold(0.0, f64::max)
    } else {
        (slab_norms.map(|s| pow_abs(s, r)).sum::<f64>() * samples.dt).powf(1.0 / r)
    };
    Ok(NormValue {
        value,
        norm_kind: NormKind::LqrMixed { q, r },
        region: region.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingKind {
    PoissonZoom,
    PPoissonNormalize,
    PmeZoom,
    PmeNormalize,
}

/// Kind-specific parameters for [`build_scaling`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalingParams {
    /// `u_λ(x) = u(λx)/λ^{2−n/p̂}`, `f_λ(x) = λ^{n/p̂} f(λx)`.
    PoissonZoom { lambda: f64, p_hat: f64, n: usize },
    /// `v(x,t) = ρ u(x, ρ^{p−2} t)`, `f̃ = ρ^{p−1} f(x, ρ^{p−2} t)`.
    PPoissonNormalize { rho: f64, p: f64 },
    /// `v(x,t) = u(λ^k x, λ^{kθ} t)/λ^{γk}`, `f̃ = λ^{k(2−α)} f(λ^k x, λ^{kθ} t)`.
    PmeZoom {
        lambda: f64,
        k: u32,
        theta: f64,
        gamma: f64,
        alpha: f64,
    },
    /// `v(x,t) = ρ u(ρ^a x, ρ^{(m−1)+2a} t)`, `f̃ = ρ^{m+2a} f(ρ^a x, ρ^{(m−1)+2a} t)`.
    PmeNormalize { rho: f64, a: f64, m: f64 },
}

/// `x ↦ s·x, t ↦ τ·t, u ↦ A·u, f ↦ σ·f`, each factor a power of `base`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnisotropicScaling {
    pub kind: ScalingKind,
    pub space_factor: f64,
    pub time_factor: f64,
    pub amplitude_factor: f64,
    pub source_factor: f64,
    /// λ or ρ.
    pub base: f64,
    pub space_exponent: f64,
    pub time_exponent: f64,
    pub amplitude_exponent: f64,
    pub source_exponent: f64,
}

impl AnisotropicScaling {
    fn from_exponents(kind: ScalingKind, base: f64, space: f64, time: f64, amp: f64, source: f64) -> Self {
        AnisotropicScaling {
            kind,
            space_factor: base.powf(space),
            time_factor: base.powf(time),
            amplitude_factor: base.powf(amp),
            source_factor: base.powf(source),
            base,
            space_exponent: space,
            time_exponent: time,
            amplitude_exponent: amp,
            source_exponent: source,
        }
    }
}

pub fn build_scaling(params: ScalingParams) -> Result<AnisotropicScaling> {
    let unit = |name: &str, v: f64| {
        if v > 0.0 && v <= 1.0 {
            Ok(())
        } else {
            Err(Error::InvalidScaleParameter(format!("{name} must lie in (0, 1], got {v}")))
        }
    };
    let sc = match params {
        ScalingParams::PoissonZoom { lambda, p_hat, n } => {
            unit("lambda", lambda)?;
            if !(p_hat >= 1.0) || n == 0 {
                return Err(Error::InvalidScaleParameter(format!("need p_hat >= 1, n >= 1 (got {p_hat}, {n})")));
            }
            let s = n as f64 / p_hat;
            AnisotropicScaling::from_exponents(ScalingKind::PoissonZoom, lambda, 1.0, 0.0, -(2.0 - s), s)
        }
        ScalingParams::PPoissonNormalize { rho, p } => {
            unit("rho", rho)?;
            if !(p >= 2.0) {
                return Err(Error::InvalidScaleParameter(format!("need p >= 2, got {p}")));
            }
            AnisotropicScaling::from_exponents(ScalingKind::PPoissonNormalize, rho, 0.0, p - 2.0, 1.0, p - 1.0)
        }
        ScalingParams::PmeZoom {
            lambda,
            k,
            theta,
            gamma,
            alpha,
        } => {
            unit("lambda", lambda)?;
            if !(theta >= 1.0) || !(gamma >= 0.0) || !(alpha > 0.0 && alpha <= 2.0) {
                return Err(Error::InvalidScaleParameter(format!(
                    "need theta >= 1, gamma >= 0, alpha in (0, 2] (got {theta}, {gamma}, {alpha})"
                )));
            }
            let k = k as f64;
            AnisotropicScaling::from_exponents(
                ScalingKind::PmeZoom,
                lambda,
                k,
                k * theta,
                -k * gamma,
                k * (2.0 - alpha),
            )
        }
        ScalingParams::PmeNormalize { rho, a, m } => {
            unit("rho", rho)?;
            if !(a > 0.0) || !(m >= 1.0) {
                return Err(Error::InvalidScaleParameter(format!("need a > 0, m >= 1 (got {a}, {m})")));
            }
            AnisotropicScaling::from_exponents(
                ScalingKind::PmeNormalize,
                rho,
                a,
                (m - 1.0) + 2.0 * a,
                1.0,
                m + 2.0 * a,
            )
        }
    };
    Ok(sc)
}

/// Prefactor relating the mixed norm of the transformed source on `G₁` to the
/// norm of the original source on the image region `(−τ, 0) × B_s`:
/// `‖f̃‖ = base^{E/r} ‖f‖`, with
/// `E = r·σ_exp − (nr/q)·s_exp − τ_exp` the exponent of the `r`-th powers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormFactor {
    pub norm_factor: f64,
    /// `E/r`, exact also for `r = ∞`.
    pub norm_exponent: f64,
    /// `E`; infinite (with the sign of `E/r`) when `r = ∞`.
    pub power_exponent: f64,
    /// `base^E`, the factor between the `r`-th powers; 0 when `r = ∞` and `E > 0`.
    pub power_factor: f64,
    /// `E ≥ 0`, i.e. the transformation does not enlarge the source norm for base ≤ 1.
    pub exponent_nonnegative: bool,
}

pub fn scaling_norm_factor(sc: &AnisotropicScaling, q: f64, r: f64, n: usize) -> Result<NormFactor> {
    if sc.kind == ScalingKind::PoissonZoom && q != r {
        return Err(Error::UnsupportedKind(format!(
            "poisson_zoom is a single-exponent scaling; got q = {q}, r = {r}"
        )));
    }
    let n = n as f64;
    let norm_exponent = sc.source_exponent - n / q * sc.space_exponent - sc.time_exponent / r;
    let power_exponent = if r.is_infinite() {
        if norm_exponent == 0.0 {
            0.0
        } else {
            norm_exponent.signum() * f64::INFINITY
        }
    } else {
        r * sc.source_exponent - n * r / q * sc.space_exponent - sc.time_exponent
    };
    let power_factor = if sc.base == 1.0 { 1.0 } else { sc.base.powf(power_exponent) };
    Ok(NormFactor {
        norm_factor: sc.base.powf(norm_exponent),
        norm_exponent,
        power_exponent,
        power_factor,
        exponent_nonnegative: norm_exponent >= -1e-12,
    })
}

/// Space-time point the scaling is anchored at: `x ↦ c + s(x − c)`, `t ↦ t₀ + τ(t − t₀)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub center: Vec<f64>,
    pub t0: f64,
}

impl Anchor {
    pub fn origin(dim: usize) -> Self {
        Anchor {
            center: vec![0.0; dim],
            t0: 0.0,
        }
    }
}

fn resample(
    field: &SpaceTimeField,
    sc: &AnisotropicScaling,
    anchor: &Anchor,
    target: &GridSpec,
    amplitude: f64,
    name: String,
) -> Result<SpaceTimeField> {
    if target.dim != field.grid.dim || anchor.center.len() != target.dim {
        return Err(Error::InvalidGrid("target grid, anchor and field dimensions differ".into()));
    }
    SpaceTimeField::from_fn(target.clone(), name.clone(), |_, _| 0.0)?;
    let mut values = Vec::with_capacity(target.len());
    let mut y = [0.0; 2];
    for k in 0..target.nt {
        let t = anchor.t0 + sc.time_factor * (target.time_at(k) - anchor.t0);
        for s in 0..target.spatial_len() {
            let node = target.node(s);
            for a in 0..target.dim {
                y[a] = anchor.center[a] + sc.space_factor * (node[a] - anchor.center[a]);
            }
            let yp = &y[..target.dim];
            if !field.grid.contains(yp, t) {
                return Err(Error::ScaledDomainEscapes(format!(
                    "target node {:?} at t = {} maps to {:?} at t = {}",
                    &node[..target.dim],
                    target.time_at(k),
                    yp,
                    t
                )));
            }
            values.push(amplitude * field.interpolate_unchecked(yp, t));
        }
    }
    let mut out = SpaceTimeField::new(target.clone(), values, name)?;
    out.metadata = field.metadata.clone();
    out.metadata.insert("scaling".into(), format!("{:?}", sc.kind));
    Ok(out)
}

/// `v(x,t) = A·u(c + s(x − c), t₀ + τ(t − t₀))` sampled on `target`.
pub fn apply_scaling(
    field: &SpaceTimeField,
    sc: &AnisotropicScaling,
    anchor: &Anchor,
    target: &GridSpec,
) -> Result<SpaceTimeField> {
    resample(field, sc, anchor, target, sc.amplitude_factor, format!("{}_scaled", field.name))
}

/// The transformed source `σ·f(c + s(x − c), t₀ + τ(t − t₀))`. Closed forms stay closed;
/// sampled sources are resampled on `target`.
pub fn scale_source(
    f: &SourceTerm,
    sc: &AnisotropicScaling,
    anchor: &Anchor,
    target: &GridSpec,
) -> Result<SourceTerm> {
    let form = match &f.form {
        SourceForm::ClosedForm(e) => SourceForm::ClosedForm(Expr::Scaled {
            inner: Box::new(e.clone()),
            amplitude: sc.source_factor,
            space_factor: sc.space_factor,
            time_factor: sc.time_factor,
            anchor: anchor.center.clone(),
            anchor_time: anchor.t0,
        }),
        SourceForm::Sampled(field) => SourceForm::Sampled(resample(
            field,
            sc,
            anchor,
            target,
            sc.source_factor,
            format!("{}_scaled", field.name),
        )?),
    };
    Ok(SourceTerm {
        form,
        declared_q: f.declared_q,
        declared_r: f.declared_r,
    })
}

/// Which smallness transformation to search over.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SmallnessKind {
    /// Target `‖v‖_{p,avg,G₁} ≤ 1`.
    PParabolic { p: f64 },
    /// Target `‖v‖_{∞,G₁} ≤ 1`.
    Pme { m: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallnessOutcome {
    pub rho: f64,
    /// Space exponent `a` of the porous medium normalization (absent for p-parabolic).
    pub a: Option<f64>,
    pub scaling: AnisotropicScaling,
    pub solution_norm: f64,
    pub source_norm: f64,
    pub iterations: usize,
}

/// Smallest positive integer `a` with `(m+2a)r − a(nr/q + 2) − (m−1) > 0`
/// (evaluated divided by `r`, so `r = ∞` is exact).
pub fn pme_normalization_exponent(m: f64, n: usize, q: f64, r: f64) -> Result<f64> {
    let n = n as f64;
    for a in 1..=10_000u32 {
        let a = a as f64;
        let e = m + 2.0 * a - a * (n / q + 2.0 / r) - (m - 1.0) / r;
        if e > 0.0 {
            return Ok(a);
        }
    }
    Err(Error::InvalidScaleParameter(format!(
        "no positive integer a makes the normalization exponent positive (m = {m}, n = {n}, q = {q}, r = {r})"
    )))
}

const SMALLNESS_ITERATIONS: usize = 60;

/// Bisection on `ρ ∈ (0, 1)` for a transformation that puts the solution and source
/// into the smallness regime on `G₁(center)`: solution bound ≤ 1 and
/// `‖f̃‖_{L^{q,r}(G₁)} ≤ eps`. The returned norms are measured on the transformed fields.
pub fn smallness_search(
    u: &SpaceTimeField,
    f: &SourceTerm,
    kind: SmallnessKind,
    anchor: &Anchor,
    eps: f64,
) -> Result<SmallnessOutcome> {
    let g = &u.grid;
    let unit = make_cylinder(&anchor.center, anchor.t0, 1.0, 1.0)?;
    unit.ensure_inside(g)?;
    let (q, r) = (f.declared_q, f.declared_r);
    let n = g.dim;
    let target = GridSpec::new(
        g.dim,
        anchor.center.iter().map(|c| [c - 1.0, c + 1.0]).collect(),
        g.nx,
        [anchor.t0 - 1.0, anchor.t0],
        g.nt,
    )?;
    let region = NormRegion::Cylinder(unit.clone());
    let a = match kind {
        SmallnessKind::Pme { m } => Some(pme_normalization_exponent(m, n, q, r)?),
        SmallnessKind::PParabolic { .. } => None,
    };
    let scaling_for = |rho: f64| match kind {
        SmallnessKind::PParabolic { p } => build_scaling(ScalingParams::PPoissonNormalize { rho, p }),
        SmallnessKind::Pme { m } => build_scaling(ScalingParams::PmeNormalize {
            rho,
            a: a.expect("set for pme"),
            m,
        }),
    };
    let evaluate = |rho: f64| -> Result<(AnisotropicScaling, f64, f64)> {
        let sc = scaling_for(rho)?;
        let v = apply_scaling(u, &sc, anchor, &target)?;
        let solution_norm = match kind {
            SmallnessKind::PParabolic { p } => p_avg_norm(&v, &region, p)?.value,
            SmallnessKind::Pme { .. } => sup_oscillation(&v, &unit)?.sup_abs,
        };
        let ft = scale_source(f, &sc, anchor, &target)?.sample(&target)?;
        let source_norm = lqr_norm(&ft, &region, q, r)?.value;
        Ok((sc, solution_norm, source_norm))
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut best: Option<(f64, AnisotropicScaling, f64, f64)> = None;
    for it in 0..SMALLNESS_ITERATIONS {
        let rho = 0.5 * (lo + hi);
        let (sc, sn, fnorm) = evaluate(rho)?;
        if sn <= 1.0 && fnorm <= eps {
            lo = rho;
            best = Some((rho, sc, sn, fnorm));
        } else {
            hi = rho;
        }
        if best.is_some() && hi - lo < 1e-6 * lo {
            let (rho, scaling, solution_norm, source_norm) = best.expect("checked");
            return Ok(SmallnessOutcome {
                rho,
                a,
                scaling,
                solution_norm,
                source_norm,
                iterations: it + 1,
            });
        }
    }
    match best {
        Some((rho, scaling, solution_norm, source_norm)) => Ok(SmallnessOutcome {
            rho,
            a,
            scaling,
            solution_norm,
            source_norm,
            iterations: SMALLNESS_ITERATIONS,
        }),
        None => Err(Error::SmallnessSearchFailed {
            iterations: SMALLNESS_ITERATIONS,
        }),
    }
}
