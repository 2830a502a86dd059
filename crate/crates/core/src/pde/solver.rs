//! Explicit conservative finite-difference scheme for
//! `u_t = div(D(u, ∇u) ∇u) + f` in one and two space dimensions.

use super::reference::ReferenceSolution;
use crate::error::{Error, Result};
use crate::exponents::{EquationClass, EquationParams};
use crate::fields::{Expr, GridSpec, SourceTerm, SpaceTimeField};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "reference", rename_all = "snake_case")]
pub enum Boundary {
    DirichletFromOracle(ReferenceSolution),
    DirichletZero,
    /// The last node on each axis is identified with the first.
    Periodic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Replaces `|∇u|^{p−2}` by `(|∇u|² + ε²)^{(p−2)/2}`.
    pub flux_regularization_eps: f64,
    pub cfl_safety: f64,
    pub boundary: Boundary,
    pub max_steps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            flux_regularization_eps: 1e-6,
            cfl_safety: 0.4,
            boundary: Boundary::DirichletZero,
            max_steps: 50_000_000,
        }
    }
}

impl SolverConfig {
    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.flux_regularization_eps = eps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(Error::InvalidParameters(format!(
                "cfl_safety must lie in (0, 1], got {}",
                self.cfl_safety
            )));
        }
        if !(self.flux_regularization_eps >= 0.0) || !self.flux_regularization_eps.is_finite() {
            return Err(Error::InvalidParameters(format!(
                "flux_regularization_eps must be finite and >= 0, got {}",
                self.flux_regularization_eps
            )));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidParameters("max_steps must be positive".into()));
        }
        Ok(())
    }
}

/// `x^e` with the small cases spelled out, so that reduced classes evaluate
/// to the same bits as their parents.
#[inline]
pub(crate) fn pow_fast(x: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else if e == 1.0 {
        x
    } else if e == 2.0 {
        x * x
    } else if e == e.trunc() && e.abs() <= 8.0 {
        x.powi(e as i32)
    } else {
        x.powf(e)
    }
}

#[derive(Debug, Clone, Copy)]
struct Diffusivity {
    class: EquationClass,
    m: f64,
    half_p_minus_2: f64,
    eps2: f64,
}

impl Diffusivity {
    fn new(params: &EquationParams, eps: f64) -> Self {
        Diffusivity {
            class: params.class,
            m: params.m,
            half_p_minus_2: (params.p - 2.0) / 2.0,
            eps2: eps * eps,
        }
    }

    #[inline]
    fn eval(&self, u_face: f64, g2: f64) -> f64 {
        match self.class {
            EquationClass::Heat => 1.0,
            EquationClass::PParabolic => pow_fast(g2 + self.eps2, self.half_p_minus_2),
            EquationClass::Pme => self.m * pow_fast(u_face.abs(), self.m - 1.0),
            EquationClass::DoublyNonlinear => {
                self.m * pow_fast(u_face.abs(), self.m - 1.0) * pow_fast(g2 + self.eps2, self.half_p_minus_2)
            }
        }
    }

    /// Whether `D` depends on the gradient (and the p-flux derivative exceeds `D`).
    fn gradient_dependent(&self) -> bool {
        matches!(self.class, EquationClass::PParabolic | EquationClass::DoublyNonlinear)
    }
}

/// `Δt = cfl·Δx²/(2n·D_max)`, with `D_max` the class diffusivity at the bounds.
/// A vanishing `D_max` falls back to `cfl·Δx²`.
pub fn stable_dt(
    grid: &GridSpec,
    field_bound: f64,
    grad_bound: f64,
    params: &EquationParams,
    cfg: &SolverConfig,
) -> Result<f64> {
    if !(field_bound >= 0.0) || !(grad_bound >= 0.0) {
        return Err(Error::InvalidParameters(format!(
            "bounds must be >= 0 (got {field_bound}, {grad_bound})"
        )));
    }
    let d = Diffusivity::new(params, cfg.flux_regularization_eps);
    Ok(dt_from_dmax(grid, d.eval(field_bound, grad_bound * grad_bound), cfg))
}

fn dt_from_dmax(grid: &GridSpec, d_max: f64, cfg: &SolverConfig) -> f64 {
    let dx2 = grid.min_dx() * grid.min_dx();
    if d_max > 0.0 {
        cfg.cfl_safety * dx2 / (2.0 * grid.dim as f64 * d_max)
    } else {
        cfg.cfl_safety * dx2
    }
}

pub fn reference_eval(reference: &ReferenceSolution, x: &[f64], t: f64) -> Result<f64> {
    reference.eval(x, t)
}

struct Stepper<'a> {
    grid: &'a GridSpec,
    d: Diffusivity,
    periodic: bool,
    /// p-flux slope `(p−1)` relative to `D` in the time-step bound.
    flux_slope: f64,
    cfg: &'a SolverConfig,
    faces: Vec<f64>,
    faces_y: Vec<f64>,
    next: Vec<f64>,
}

impl<'a> Stepper<'a> {
    fn new(grid: &'a GridSpec, params: &EquationParams, cfg: &'a SolverConfig) -> Self {
        let d = Diffusivity::new(params, cfg.flux_regularization_eps);
        let flux_slope = if d.gradient_dependent() { (params.p - 1.0).max(1.0) } else { 1.0 };
        Stepper {
            grid,
            d,
            periodic: matches!(cfg.boundary, Boundary::Periodic),
            flux_slope,
            cfg,
            faces: Vec::new(),
            faces_y: Vec::new(),
            next: vec![0.0; grid.spatial_len()],
        }
    }

    /// Fill the face fluxes; returns the largest face diffusivity.
    fn fluxes(&mut self, u: &[f64]) -> f64 {
        let g = self.grid;
        let nx = g.nx;
        let dx = g.dx(0);
        let mut d_max: f64 = 0.0;
        if g.dim == 1 {
            let nf = nx - 1;
            self.faces.resize(nf, 0.0);
            for j in 0..nf {
                let gr = (u[j + 1] - u[j]) / dx;
                let dd = self.d.eval(0.5 * (u[j] + u[j + 1]), gr * gr);
                d_max = d_max.max(dd);
                self.faces[j] = dd * gr;
            }
            return d_max;
        }
        let dy = g.dx(1);
        // centered transverse derivatives at nodes
        let cy = |ix: usize, iy: usize| -> f64 {
            if self.periodic {
                let up = if iy + 1 == nx - 1 { 0 } else { iy + 1 };
                let dn = if iy == 0 { nx - 2 } else { iy - 1 };
                (u[g.ravel(ix, up)] - u[g.ravel(ix, dn)]) / (2.0 * dy)
            } else if iy == 0 {
                (u[g.ravel(ix, 1)] - u[g.ravel(ix, 0)]) / dy
            } else if iy == nx - 1 {
                (u[g.ravel(ix, nx - 1)] - u[g.ravel(ix, nx - 2)]) / dy
            } else {
                (u[g.ravel(ix, iy + 1)] - u[g.ravel(ix, iy - 1)]) / (2.0 * dy)
            }
        };
        let cx = |ix: usize, iy: usize| -> f64 {
            if self.periodic {
                let up = if ix + 1 == nx - 1 { 0 } else { ix + 1 };
                let dn = if ix == 0 { nx - 2 } else { ix - 1 };
                (u[g.ravel(up, iy)] - u[g.ravel(dn, iy)]) / (2.0 * dx)
            } else if ix == 0 {
                (u[g.ravel(1, iy)] - u[g.ravel(0, iy)]) / dx
            } else if ix == nx - 1 {
                (u[g.ravel(nx - 1, iy)] - u[g.ravel(nx - 2, iy)]) / dx
            } else {
                (u[g.ravel(ix + 1, iy)] - u[g.ravel(ix - 1, iy)]) / (2.0 * dx)
            }
        };
        let needs_grad = self.d.gradient_dependent();
        // x-faces: (ix + 1/2, iy), stored at ix + (nx−1)·iy
        let nf = nx - 1;
        let mut fx = std::mem::take(&mut self.faces);
        let mut fy = std::mem::take(&mut self.faces_y);
        fx.resize(nf * nx, 0.0);
        fy.resize(nf * nx, 0.0);
        for iy in 0..nx {
            for ix in 0..nf {
                let a = u[g.ravel(ix, iy)];
                let b = u[g.ravel(ix + 1, iy)];
                let gr = (b - a) / dx;
                let g2 = if needs_grad {
                    let t = 0.5 * (cy(ix, iy) + cy(ix + 1, iy));
                    gr * gr + t * t
                } else {
                    gr * gr
                };
                let dd = self.d.eval(0.5 * (a + b), g2);
                d_max = d_max.max(dd);
                fx[ix + nf * iy] = dd * gr;
            }
        }
        // y-faces: (ix, iy + 1/2), stored at iy + (nx−1)·ix
        for ix in 0..nx {
            for iy in 0..nf {
                let a = u[g.ravel(ix, iy)];
                let b = u[g.ravel(ix, iy + 1)];
                let gr = (b - a) / dy;
                let g2 = if needs_grad {
                    let t = 0.5 * (cx(ix, iy) + cx(ix, iy + 1));
                    gr * gr + t * t
                } else {
                    gr * gr
                };
                let dd = self.d.eval(0.5 * (a + b), g2);
                d_max = d_max.max(dd);
                fy[iy + nf * ix] = dd * gr;
            }
        }
        self.faces = fx;
        self.faces_y = fy;
        d_max
    }

    fn stable(&self, d_max: f64) -> f64 {
        dt_from_dmax(self.grid, d_max * self.flux_slope, self.cfg)
    }

    /// One forward-Euler step from the fluxes already in place.
    fn advance(&mut self, u: &mut Vec<f64>, dt: f64, f: Option<&[f64]>) {
        let g = self.grid;
        let nx = g.nx;
        let src = |s: usize| f.map_or(0.0, |f| f[s]);
        let interior = |i: usize| i > 0 && i < nx - 1;
        if g.dim == 1 {
            let r = dt / g.dx(0);
            let fl = &self.faces;
            for j in 0..nx {
                self.next[j] = if interior(j) {
                    u[j] + r * (fl[j] - fl[j - 1]) + dt * src(j)
                } else if self.periodic && j == 0 {
                    u[0] + r * (fl[0] - fl[nx - 2]) + dt * src(0)
                } else {
                    u[j]
                };
            }
            if self.periodic {
                self.next[nx - 1] = self.next[0];
            }
        } else {
            let (rx, ry) = (dt / g.dx(0), dt / g.dx(1));
            let nf = nx - 1;
            let (fx, fy) = (&self.faces, &self.faces_y);
            for iy in 0..nx {
                for ix in 0..nx {
                    let s = g.ravel(ix, iy);
                    let active = if self.periodic {
                        ix < nx - 1 && iy < nx - 1
                    } else {
                        interior(ix) && interior(iy)
                    };
                    if !active {
                        self.next[s] = u[s];
                        continue;
                    }
                    let xm = if ix == 0 { nf - 1 } else { ix - 1 };
                    let ym = if iy == 0 { nf - 1 } else { iy - 1 };
                    let div_x = fx[ix + nf * iy] - fx[xm + nf * iy];
                    let div_y = fy[iy + nf * ix] - fy[ym + nf * ix];
                    self.next[s] = u[s] + rx * div_x + ry * div_y + dt * src(s);
                }
            }
            if self.periodic {
                for k in 0..nx {
                    self.next[g.ravel(nx - 1, k)] = self.next[g.ravel(0, k)];
                    self.next[g.ravel(k, nx - 1)] = self.next[g.ravel(k, 0)];
                }
            }
        }
        std::mem::swap(u, &mut self.next);
    }
}

fn is_boundary(grid: &GridSpec, s: usize) -> bool {
    let [ix, iy] = grid.unravel(s);
    let edge = |i: usize| i == 0 || i == grid.nx - 1;
    edge(ix) || (grid.dim == 2 && edge(iy))
}

fn apply_boundary(grid: &GridSpec, boundary: &Boundary, oracle: Option<&Expr>, u: &mut [f64], t: f64) -> Result<()> {
    match boundary {
        Boundary::Periodic => Ok(()),
        Boundary::DirichletZero => {
            for s in 0..grid.spatial_len() {
                if is_boundary(grid, s) {
                    u[s] = 0.0;
                }
            }
            Ok(())
        }
        Boundary::DirichletFromOracle(_) => {
            let e = oracle.expect("oracle expression prepared");
            for s in 0..grid.spatial_len() {
                if is_boundary(grid, s) {
                    let node = grid.node(s);
                    u[s] = e.try_eval(&node[..grid.dim], t)?;
                }
            }
            Ok(())
        }
    }
}

/// Evolve `init` (the spatial slice at `grid.time[0]`) and return the solution at every
/// grid time level. Each output interval is sub-stepped at the stable step of the current state.
pub fn solve(
    params: &EquationParams,
    f: &SourceTerm,
    init: &[f64],
    grid: &GridSpec,
    cfg: &SolverConfig,
) -> Result<SpaceTimeField> {
    params.validate()?;
    grid.validate()?;
    cfg.validate()?;
    if params.n != grid.dim {
        return Err(Error::InvalidParameters(format!(
            "equation dimension {} does not match grid dimension {}",
            params.n, grid.dim
        )));
    }
    if init.len() != grid.spatial_len() {
        return Err(Error::FieldData(format!(
            "initial slice has {} values, grid needs {}",
            init.len(),
            grid.spatial_len()
        )));
    }
    if let Some(i) = init.iter().position(|v| !v.is_finite()) {
        return Err(Error::FieldData(format!("initial slice is non-finite at node {i}")));
    }
    let oracle = match &cfg.boundary {
        Boundary::DirichletFromOracle(r) => Some(r.to_expr()?),
        _ => None,
    };
    let mut u = init.to_vec();
    apply_boundary(grid, &cfg.boundary, oracle.as_ref(), &mut u, grid.time[0])?;
    let mut out = Vec::with_capacity(grid.len());
    out.extend_from_slice(&u);

    let mut stepper = Stepper::new(grid, params, cfg);
    let zero_source = f.is_zero();
    let mut steps = 0usize;
    for k in 1..grid.nt {
        let t_end = grid.time_at(k);
        let mut remaining = t_end - grid.time_at(k - 1);
        loop {
            let d_max = stepper.fluxes(&u);
            let dt_s = stepper.stable(d_max);
            let sub = (remaining / dt_s).ceil().max(1.0);
            let dt = remaining / sub;
            let t_now = t_end - remaining;
            let src = if zero_source { None } else { Some(f.slice(grid, t_now)?) };
            stepper.advance(&mut u, dt, src.as_deref());
            steps += 1;
            let last = sub <= 1.0;
            remaining = if last { 0.0 } else { remaining - dt };
            let t_new = if last { t_end } else { t_end - remaining };
            apply_boundary(grid, &cfg.boundary, oracle.as_ref(), &mut u, t_new)?;
            if u.iter().any(|v| !v.is_finite()) {
                return Err(Error::BlowUp { step: steps, t: t_new });
            }
            if steps > cfg.max_steps {
                return Err(Error::UnstableConfig {
                    max_steps: cfg.max_steps,
                });
            }
            if last {
                break;
            }
        }
        out.extend_from_slice(&u);
    }
    let mut field = SpaceTimeField::new(grid.clone(), out, format!("{}_solution", params.class))?
        .with_metadata("class", params.class.to_string())
        .with_metadata("p", params.p.to_string())
        .with_metadata("m", params.m.to_string())
        .with_metadata("steps", steps.to_string())
        .with_metadata("flux_regularization_eps", cfg.flux_regularization_eps.to_string());
    if let Some(cap) = f.cap() {
        field = field.with_metadata("source_cap", cap.to_string());
    }
    Ok(field)
}

/// Largest pointwise PDE residual over interior nodes and interior time levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub max: f64,
    pub dx: f64,
    pub dt: f64,
}

/// `max |u_t − div(D∇u) − f|` with centered differences in time and the scheme's
/// face fluxes in space.
pub fn residual(field: &SpaceTimeField, params: &EquationParams, f: &SourceTerm, eps: f64) -> Result<Residual> {
    let g = &field.grid;
    if g.nx < 3 || g.nt < 3 {
        return Err(Error::GridTooCoarse(format!(
            "residual needs >= 3 nodes per axis (nx = {}, nt = {})",
            g.nx, g.nt
        )));
    }
    params.validate()?;
    let cfg = SolverConfig::default().with_eps(eps);
    let mut stepper = Stepper::new(g, params, &cfg);
    let dt = g.dt();
    let mut max: f64 = 0.0;
    for k in 1..g.nt - 1 {
        let u = field.slice(k).to_vec();
        stepper.fluxes(&u);
        // div(D∇u) is what one unit step would add, without the source
        let mut probe = u.clone();
        stepper.advance(&mut probe, 1.0, None);
        let src = f.slice(g, g.time_at(k))?;
        for s in 0..g.spatial_len() {
            if is_boundary(g, s) {
                continue;
            }
            let ut = (field.at(k + 1, s) - field.at(k - 1, s)) / (2.0 * dt);
            let div = probe[s] - u[s];
            max = max.max((ut - div - src[s]).abs());
        }
    }
    Ok(Residual {
        max,
        dx: g.min_dx(),
        dt,
    })
}
