//! Oscillation ladders on nested intrinsic cylinders, power-law fits of their decay,
//! Campanato sequences, the geometric-iteration check and the Caccioppoli check.

use crate::error::{Error, Result};
use crate::fields::{pow_abs, Expr, Rect, Region, SourceTerm, SpaceTimeField};
use crate::geometry::{lqr_norm, make_cylinder, sup_oscillation, IntrinsicCylinder, NormRegion};
use serde::{Deserialize, Serialize};

/// Values below this are treated as zero in log fits.
pub const ZERO_FLOOR: f64 = 1e-14;
const GOLDEN_ITERATIONS: usize = 80;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSpec {
    pub center: Vec<f64>,
    pub t0: f64,
    pub theta: f64,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    pub base_radius: f64,
    pub k_max: usize,
    #[serde(default = "default_p")]
    pub p: f64,
}

fn default_lambda() -> f64 {
    0.5
}

fn default_p() -> f64 {
    2.0
}

impl ProfileSpec {
    pub fn new(center: &[f64], t0: f64, theta: f64, base_radius: f64, k_max: usize) -> Self {
        ProfileSpec {
            center: center.to_vec(),
            t0,
            theta,
            lambda: default_lambda(),
            base_radius,
            k_max,
            p: default_p(),
        }
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p = p;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda <= 0.5) {
            return Err(Error::InvalidParameters(format!(
                "lambda must lie in (0, 1/2], got {}",
                self.lambda
            )));
        }
        if !(self.p >= 1.0) {
            return Err(Error::InvalidParameters(format!("p must be >= 1, got {}", self.p)));
        }
        Ok(())
    }

    pub fn radius(&self, k: usize) -> f64 {
        self.base_radius * self.lambda.powi(k as i32)
    }

    pub fn cylinder(&self, k: usize) -> Result<IntrinsicCylinder> {
        make_cylinder(&self.center, self.t0, self.radius(k), self.theta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileLevel {
    pub k: usize,
    pub radius: f64,
    pub osc: f64,
    pub sup_abs: f64,
    /// `min_c ‖u − c‖_{p,avg}` on the level's cylinder.
    pub campanato: f64,
    pub best_constant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillationProfile {
    pub spec: ProfileSpec,
    /// Spatial grid spacing of the field the profile was measured on.
    pub dx: f64,
    pub levels: Vec<ProfileLevel>,
    pub k_max_effective: usize,
    pub truncated: bool,
}

impl OscillationProfile {
    pub fn radii(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.radius).collect()
    }

    pub fn values(&self, quantity: Quantity) -> Vec<f64> {
        self.levels.iter().map(|l| quantity.of(l)).collect()
    }
}

/// Whether a cylinder contains at least one full cell in every direction.
fn resolvable(field: &SpaceTimeField, cyl: &IntrinsicCylinder) -> bool {
    cyl.radius >= field.grid.min_dx() && cyl.time_extent() >= field.grid.dt()
}

/// `argmin_c (⨍ |v − c|^p)^{1/p}` and its value. Golden section on `[min, max]`,
/// compared against the mean and the median.
pub fn best_constant(values: &[f64], p: f64) -> (f64, f64) {
    let n = values.len() as f64;
    let dist = |c: f64| (values.iter().map(|v| pow_abs(v - c, p)).sum::<f64>() / n).powf(1.0 / p);
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let mean = values.iter().sum::<f64>() / n;
    if hi - lo == 0.0 {
        return (lo, 0.0);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];

    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (dist(c), dist(d));
    for _ in 0..GOLDEN_ITERATIONS {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = dist(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = dist(d);
        }
    }
    let golden = 0.5 * (a + b);
    // ties go to the mean, the exact minimizer for p = 2
    [mean, median, golden]
        .into_iter()
        .map(|c| (c, dist(c)))
        .fold((mean, f64::INFINITY), |best, cand| if cand.1 < best.1 { cand } else { best })
}

/// Ladder of `osc`, `sup |u|` and the Campanato distance on `G_{R λᵏ}`, `k = 0..=k_max`.
/// Levels smaller than a grid cell end the ladder early.
pub fn oscillation_profile(field: &SpaceTimeField, spec: &ProfileSpec) -> Result<OscillationProfile> {
    ladder(field, spec, true)
}

fn ladder(field: &SpaceTimeField, spec: &ProfileSpec, with_campanato: bool) -> Result<OscillationProfile> {
    spec.validate()?;
    let base = spec.cylinder(0)?;
    if !base.is_inside(&field.grid) {
        // surfaces the diagnostic from the norm layer
        sup_oscillation(field, &base)?;
    }
    let mut levels = Vec::new();
    let mut truncated = false;
    for k in 0..=spec.k_max {
        let cyl = spec.cylinder(k)?;
        if !resolvable(field, &cyl) {
            if k == 0 {
                return Err(Error::DegenerateLevel { level: 0 });
            }
            truncated = true;
            break;
        }
        let o = sup_oscillation(field, &cyl)?;
        let (best, campanato) = if with_campanato {
            let samples = field.region_samples(&cyl)?;
            if samples.cell_count() == 0 {
                if k == 0 {
                    return Err(Error::DegenerateLevel { level: 0 });
                }
                truncated = true;
                break;
            }
            let values: Vec<f64> = samples.values().collect();
            best_constant(&values, spec.p)
        } else {
            (f64::NAN, f64::NAN)
        };
        levels.push(ProfileLevel {
            k,
            radius: cyl.radius,
            osc: o.osc,
            sup_abs: o.sup_abs,
            campanato,
            best_constant: best,
        });
    }
    Ok(OscillationProfile {
        spec: spec.clone(),
        dx: field.grid.min_dx(),
        k_max_effective: levels.len() - 1,
        levels,
        truncated,
    })
}

/// Oscillation of `u(x₀, ·)` on `(t₀ − τ^θ, t₀)` for `τ = R λᵏ`. The level radius is
/// the time distance `τ^θ`.
pub fn time_oscillation_profile(field: &SpaceTimeField, spec: &ProfileSpec) -> Result<OscillationProfile> {
    spec.validate()?;
    let g = &field.grid;
    let mut levels = Vec::new();
    let mut truncated = false;
    for k in 0..=spec.k_max {
        let cyl = spec.cylinder(k)?;
        let [t_lo, t_hi] = cyl.time_interval();
        if !g.contains(&spec.center, t_lo) || !g.contains(&spec.center, t_hi) {
            return Err(Error::CylinderOutsideDomain(format!(
                "time segment ({t_lo}, {t_hi}) at {:?}",
                spec.center
            )));
        }
        if cyl.time_extent() < g.dt() {
            if k == 0 {
                return Err(Error::DegenerateLevel { level: 0 });
            }
            truncated = true;
            break;
        }
        let mut ts = vec![t_lo, t_hi];
        let k0 = ((t_lo - g.time[0]) / g.dt()).floor().max(0.0) as usize;
        let k1 = (((t_hi - g.time[0]) / g.dt()).ceil() as usize).min(g.nt - 1);
        ts.extend((k0..=k1).map(|i| g.time_at(i)).filter(|t| *t > t_lo && *t < t_hi));
        let (lo, hi) = ts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &t| {
            let v = field.interpolate_unchecked(&spec.center, t);
            (a.min(v), b.max(v))
        });
        levels.push(ProfileLevel {
            k,
            radius: cyl.time_extent(),
            osc: hi - lo,
            sup_abs: hi.abs().max(lo.abs()),
            campanato: f64::NAN,
            best_constant: f64::NAN,
        });
    }
    Ok(OscillationProfile {
        spec: spec.clone(),
        dx: g.dt(),
        k_max_effective: levels.len().saturating_sub(1),
        levels,
        truncated,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Osc,
    SupAbs,
    CampanatoPAvg,
}

impl Quantity {
    pub fn of(self, level: &ProfileLevel) -> f64 {
        match self {
            Quantity::Osc => level.osc,
            Quantity::SupAbs => level.sup_abs,
            Quantity::CampanatoPAvg => level.campanato,
        }
    }
}

/// Which levels enter a fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FitWindow {
    /// Drop the base level (when asked) and every level with radius below `min_cells·Δx`.
    Policy { min_cells: f64, drop_base: bool },
    Explicit { k_lo: usize, k_hi: usize },
}

impl Default for FitWindow {
    fn default() -> Self {
        FitWindow::Policy {
            min_cells: 8.0,
            drop_base: true,
        }
    }
}

impl FitWindow {
    fn admits(&self, k: usize, radius: f64, dx: f64) -> bool {
        match *self {
            FitWindow::Policy { min_cells, drop_base } => !(drop_base && k == 0) && radius >= min_cells * dx * (1.0 - 1e-12),
            FitWindow::Explicit { k_lo, k_hi } => k >= k_lo && k <= k_hi,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderFit {
    pub exponent: f64,
    pub log_constant: f64,
    pub r_squared: f64,
    pub window: (usize, usize),
    pub points: usize,
    pub excluded_zero: usize,
}

/// Least-squares fit of `log y = c + s log x`; returns `(s, c, R²)`.
pub fn log_log_regression(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = ly.iter().map(|b| (b - my) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    (slope, intercept, r2)
}

/// Fit `(k, radius, value)` triples: window selection, zero exclusion, regression.
pub fn fit_series(ks: &[usize], radii: &[f64], values: &[f64], dx: f64, window: FitWindow) -> Result<HolderFit> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut used = Vec::new();
    let mut in_window = 0;
    for ((&k, &r), &v) in ks.iter().zip(radii).zip(values) {
        if !window.admits(k, r, dx) {
            continue;
        }
        in_window += 1;
        if v >= ZERO_FLOOR {
            xs.push(r);
            ys.push(v);
            used.push(k);
        }
    }
    let excluded_zero = in_window - xs.len();
    if in_window >= 3 && xs.is_empty() {
        return Err(Error::AllZeroLevels);
    }
    if xs.len() < 3 {
        return Err(Error::InsufficientLevels { have: xs.len(), need: 3 });
    }
    let (exponent, log_constant, r_squared) = log_log_regression(&xs, &ys);
    Ok(HolderFit {
        exponent,
        log_constant,
        r_squared,
        window: (used[0], *used.last().expect("non-empty")),
        points: xs.len(),
        excluded_zero,
    })
}

pub fn fit_exponent(profile: &OscillationProfile, window: FitWindow, quantity: Quantity) -> Result<HolderFit> {
    let ks: Vec<usize> = profile.levels.iter().map(|l| l.k).collect();
    fit_series(&ks, &profile.radii(), &profile.values(quantity), profile.dx, window)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampanatoLevel {
    pub k: usize,
    pub radius: f64,
    /// `‖u − c̄‖_{p,avg}` on the level's cylinder.
    pub distance_to_limit: f64,
    pub bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampanatoReport {
    /// `|c_k − c_{k+1}|`, indexed by `k`.
    pub diffs: Vec<f64>,
    /// Fit of the differences against `λᵏ R`; absent when they all vanish.
    pub decay: Option<HolderFit>,
    pub degenerate: bool,
    pub limit: f64,
    /// `C` in `‖u − c̄‖ ≤ C (λᵏ R)^ᾱ`.
    pub constant: f64,
    pub levels: Vec<CampanatoLevel>,
    pub holds: bool,
}

/// Differences of the best constants, their geometric decay rate ᾱ, and the check
/// `‖u − c̄‖_{p,avg,G_k} ≤ C r_k^ᾱ` with `C = sup_k campanato_k/r_k^ᾱ + C_d/(1 − λ^ᾱ)`,
/// `C_d` the fitted constant of the differences (triangle inequality plus geometric sum).
pub fn campanato_sequence(
    field: &SpaceTimeField,
    profile: &OscillationProfile,
    window: FitWindow,
) -> Result<CampanatoReport> {
    let lv = &profile.levels;
    if lv.len() < 4 {
        return Err(Error::InsufficientLevels { have: lv.len(), need: 4 });
    }
    let diffs: Vec<f64> = lv.windows(2).map(|w| (w[0].best_constant - w[1].best_constant).abs()).collect();
    let limit = lv.last().expect("non-empty").best_constant;
    let p = profile.spec.p;
    let distances = lv
        .iter()
        .map(|l| {
            let cyl = profile.spec.cylinder(l.k)?;
            let samples = field.region_samples(&cyl)?;
            let n = samples.cell_count() as f64;
            Ok((samples.values().map(|v| pow_abs(v - limit, p)).sum::<f64>() / n).powf(1.0 / p))
        })
        .collect::<Result<Vec<f64>>>()?;

    if diffs.iter().all(|d| *d < ZERO_FLOOR) {
        let levels = lv
            .iter()
            .zip(&distances)
            .map(|(l, &d)| CampanatoLevel {
                k: l.k,
                radius: l.radius,
                distance_to_limit: d,
                bound: 0.0,
                holds: d < ZERO_FLOOR,
            })
            .collect::<Vec<_>>();
        return Ok(CampanatoReport {
            holds: levels.iter().all(|l| l.holds),
            diffs,
            decay: None,
            degenerate: true,
            limit,
            constant: 0.0,
            levels,
        });
    }
    let ks: Vec<usize> = lv[..lv.len() - 1].iter().map(|l| l.k).collect();
    let radii: Vec<f64> = lv[..lv.len() - 1].iter().map(|l| l.radius).collect();
    let decay = fit_series(&ks, &radii, &diffs, profile.dx, window)?;
    let rate = decay.exponent;
    let geometric = decay.log_constant.exp() / (1.0 - profile.spec.lambda.powf(rate)).max(ZERO_FLOOR);
    let local = lv
        .iter()
        .map(|l| l.campanato / l.radius.powf(rate))
        .fold(0.0f64, f64::max);
    let constant = local + geometric;
    let levels: Vec<CampanatoLevel> = lv
        .iter()
        .zip(&distances)
        .map(|(l, &d)| {
            let bound = constant * l.radius.powf(rate);
            CampanatoLevel {
                k: l.k,
                radius: l.radius,
                distance_to_limit: d,
                bound,
                holds: d <= bound * (1.0 + 1e-9),
            }
        })
        .collect();
    Ok(CampanatoReport {
        holds: levels.iter().all(|l| l.holds),
        diffs,
        decay: Some(decay),
        degenerate: false,
        limit,
        constant,
        levels,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationLevel {
    pub k: usize,
    pub radius: f64,
    /// `|u(center)| ≤ ¼ r^γ`.
    pub precondition: bool,
    pub sup_abs: f64,
    /// `sup |u| / r^γ`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationReport {
    pub gamma: f64,
    pub levels: Vec<IterationLevel>,
    /// Smallest `C` with `sup_{G_k} |u| ≤ C r_k^γ` on every level whose precondition holds.
    pub constant: f64,
    /// First such level failing with `C = 1`.
    pub first_failure_unit_constant: Option<usize>,
    pub truncated: bool,
}

pub fn geometric_iteration_check(field: &SpaceTimeField, spec: &ProfileSpec, gamma: f64) -> Result<IterationReport> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::InvalidParameters(format!("gamma must lie in (0, 1], got {gamma}")));
    }
    let profile = ladder(field, spec, false)?;
    let u0 = field.interpolate(&spec.center, spec.t0)?.abs();
    let levels: Vec<IterationLevel> = profile
        .levels
        .iter()
        .map(|l| {
            let scale = l.radius.powf(gamma);
            IterationLevel {
                k: l.k,
                radius: l.radius,
                precondition: u0 <= 0.25 * scale,
                sup_abs: l.sup_abs,
                ratio: l.sup_abs / scale,
            }
        })
        .collect();
    if !levels.iter().any(|l| l.precondition) {
        return Err(Error::PreconditionNeverHolds);
    }
    let active = levels.iter().filter(|l| l.precondition);
    let constant = active.clone().map(|l| l.ratio).fold(0.0f64, f64::max);
    let first_failure_unit_constant = active.clone().find(|l| l.ratio > 1.0 + 1e-12).map(|l| l.k);
    Ok(IterationReport {
        gamma,
        levels,
        constant,
        first_failure_unit_constant,
        truncated: profile.truncated,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaccioppoliReport {
    /// `sup_t ∫ u² ξ²`
    pub lhs_sup_term: f64,
    /// `∬ |u|^{m−1} |∇u|² ξ²`
    pub lhs_grad_term: f64,
    /// `∬ u² ξ |ξ_t|`
    pub rhs_time_term: f64,
    /// `∬ |u|^{m+1} (|∇ξ|² + ξ²)`
    pub rhs_space_term: f64,
    /// `‖f‖²_{L^{q,r}}` over the region.
    pub rhs_source_term: f64,
    /// Left total over right total (constant 1 on the right); 0 when both vanish.
    pub ratio: f64,
}

const COMPACT_TOL: f64 = 1e-12;

/// Both sides of the energy inequality for `u`, evaluated by nodal quadrature over the
/// region with centered differences for `∇u` and for the derivatives of `ξ`.
pub fn caccioppoli_check(
    field: &SpaceTimeField,
    cutoff: &Expr,
    f: &SourceTerm,
    m: f64,
    region: &Rect,
) -> Result<CaccioppoliReport> {
    let g = &field.grid;
    if g.nx < 3 || g.nt < 3 {
        return Err(Error::GridTooCoarse(format!("need >= 3 nodes per axis (nx = {}, nt = {})", g.nx, g.nt)));
    }
    if !(m >= 1.0) {
        return Err(Error::InvalidParameters(format!("m must be >= 1, got {m}")));
    }
    let (space, time) = region.bounding_box();
    let lo: Vec<f64> = space.iter().map(|iv| iv[0]).collect();
    let hi: Vec<f64> = space.iter().map(|iv| iv[1]).collect();
    if space.len() != g.dim || !g.contains(&lo, time[0]) || !g.contains(&hi, time[1]) {
        return Err(Error::RegionOutsideDomain(format!("{region:?}")));
    }

    // ξ must vanish on the region boundary
    let samples_per_edge = 64;
    let mut boundary_max: f64 = 0.0;
    for i in 0..=samples_per_edge {
        let s = i as f64 / samples_per_edge as f64;
        let t = time[0] + s * (time[1] - time[0]);
        for j in 0..=samples_per_edge {
            let w = j as f64 / samples_per_edge as f64;
            for a in 0..g.dim {
                for side in [lo[a], hi[a]] {
                    let mut x = lo.clone();
                    x[a] = side;
                    if g.dim == 2 {
                        let b = 1 - a;
                        x[b] = lo[b] + w * (hi[b] - lo[b]);
                    }
                    boundary_max = boundary_max.max(cutoff.eval(&x, t).abs());
                }
            }
            let mut x = lo.clone();
            x[0] = lo[0] + s * (hi[0] - lo[0]);
            if g.dim == 2 {
                x[1] = lo[1] + w * (hi[1] - lo[1]);
            }
            boundary_max = boundary_max.max(cutoff.eval(&x, time[0]).abs());
            boundary_max = boundary_max.max(cutoff.eval(&x, time[1]).abs());
        }
    }
    if !(boundary_max <= COMPACT_TOL) {
        return Err(Error::CutoffNotCompact(boundary_max));
    }

    let dx: Vec<f64> = (0..g.dim).map(|a| g.dx(a)).collect();
    let dt = g.dt();
    let cell = dx.iter().product::<f64>();
    let h_t = 1e-3 * dt.max(1e-12);
    let mut lhs_sup: f64 = 0.0;
    let (mut lhs_grad, mut rhs_time, mut rhs_space) = (0.0, 0.0, 0.0);
    let nx = g.nx;
    for k in 0..g.nt {
        let t = g.time_at(k);
        if !region.contains(&lo, t) {
            continue;
        }
        let mut level_integral = 0.0;
        for s in 0..g.spatial_len() {
            let node = g.node(s);
            let x = &node[..g.dim];
            if !region.contains(x, t) {
                continue;
            }
            let xi = cutoff.eval(x, t);
            if !(-COMPACT_TOL..=1.0 + COMPACT_TOL).contains(&xi) {
                return Err(Error::InvalidParameters(format!("cutoff takes the value {xi} outside [0, 1]")));
            }
            let u = field.at(k, s);
            let idx = g.unravel(s);
            let mut grad_u2 = 0.0;
            let mut grad_xi2 = 0.0;
            for a in 0..g.dim {
                let (i, step) = (idx[a], dx[a]);
                let shift = |d: isize| {
                    let mut j = idx;
                    j[a] = (i as isize + d) as usize;
                    field.at(k, g.ravel(j[0], j[1]))
                };
                let du = if i == 0 {
                    (shift(1) - u) / step
                } else if i == nx - 1 {
                    (u - shift(-1)) / step
                } else {
                    (shift(1) - shift(-1)) / (2.0 * step)
                };
                grad_u2 += du * du;
                let h = 1e-3 * step;
                let mut xp = x.to_vec();
                let mut xm = x.to_vec();
                xp[a] += h;
                xm[a] -= h;
                let dxi = (cutoff.eval(&xp, t) - cutoff.eval(&xm, t)) / (2.0 * h);
                grad_xi2 += dxi * dxi;
            }
            let xi_t = (cutoff.eval(x, t + h_t) - cutoff.eval(x, t - h_t)) / (2.0 * h_t);
            let w = cell * dt;
            level_integral += u * u * xi * xi * cell;
            lhs_grad += pow_abs(u, m - 1.0) * grad_u2 * xi * xi * w;
            rhs_time += u * u * xi * xi_t.abs() * w;
            rhs_space += pow_abs(u, m + 1.0) * (grad_xi2 + xi * xi) * w;
        }
        lhs_sup = lhs_sup.max(level_integral);
    }
    let rhs_source = if f.is_zero() {
        0.0
    } else {
        let sampled = f.sample(g)?;
        let norm = lqr_norm(&sampled, &NormRegion::Rect(region.clone()), f.declared_q, f.declared_r)?.value;
        norm * norm
    };
    let lhs = lhs_sup + lhs_grad;
    let rhs = rhs_time + rhs_space + rhs_source;
    let ratio = if lhs == 0.0 {
        0.0
    } else if rhs == 0.0 {
        f64::INFINITY
    } else {
        lhs / rhs
    };
    Ok(CaccioppoliReport {
        lhs_sup_term: lhs_sup,
        lhs_grad_term: lhs_grad,
        rhs_time_term: rhs_time,
        rhs_space_term: rhs_space,
        rhs_source_term: rhs_source,
        ratio,
    })
}
