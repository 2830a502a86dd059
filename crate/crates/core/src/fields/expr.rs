//! Fixed catalog of closed-form space-time expressions.

use crate::error::{Error, Result};
use crate::fields::{GridSpec, SpaceTimeField};
use crate::pde::reference::Barenblatt;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Expr {
    Const {
        value: f64,
    },
    /// `offset + Σ slope_i x_i + time_slope · t`
    Affine {
        offset: f64,
        slope: Vec<f64>,
        time_slope: f64,
    },
    /// `A Π sin(k_i π x_i) exp(−π² Σ k_i² t)`
    HeatMode {
        amplitude: f64,
        modes: Vec<f64>,
    },
    /// `M (4πt)^{-n/2} exp(−|x|²/(4t))`
    HeatKernel {
        mass: f64,
    },
    /// `A sin(Σ w_i x_i + ω t + φ)`
    Sine {
        amplitude: f64,
        wavenumbers: Vec<f64>,
        time_frequency: f64,
        phase: f64,
    },
    /// `A exp(−|x − c|²/w²)`
    Gaussian {
        amplitude: f64,
        center: Vec<f64>,
        width: f64,
    },
    /// `coefficient · |x − c|^exponent`, optionally capped from above.
    PowerLaw {
        center: Vec<f64>,
        exponent: f64,
        #[serde(default = "one")]
        coefficient: f64,
        #[serde(default)]
        cap: Option<f64>,
    },
    /// `|t − t0|^exponent`, optionally capped.
    TimePower {
        t0: f64,
        exponent: f64,
        #[serde(default)]
        cap: Option<f64>,
    },
    /// `left` for `x_axis < position`, `right` otherwise.
    Step {
        axis: usize,
        position: f64,
        left: f64,
        right: f64,
    },
    Barenblatt {
        m: f64,
        constant: f64,
    },
    /// Smooth cutoff `φ(|x−c|/R) φ((2t − t_start − t_end)/(t_end − t_start))`,
    /// `φ(s) = exp(1 − 1/(1 − s²))` on `|s| < 1`; values in `[0, 1]`.
    Bump {
        center: Vec<f64>,
        radius: f64,
        t_start: f64,
        t_end: f64,
    },
    Sum {
        terms: Vec<Expr>,
    },
    Product {
        factors: Vec<Expr>,
    },
    /// `amplitude · inner(c + s(x − c), t0 + τ(t − t0))`
    Scaled {
        inner: Box<Expr>,
        amplitude: f64,
        space_factor: f64,
        time_factor: f64,
        anchor: Vec<f64>,
        anchor_time: f64,
    },
}

fn one() -> f64 {
    1.0
}

fn bump_profile(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    }
}

fn dist2(x: &[f64], c: &[f64]) -> f64 {
    x.iter()
        .enumerate()
        .map(|(i, v)| {
            let d = v - c.get(i).copied().unwrap_or(0.0);
            d * d
        })
        .sum()
}

fn capped(v: f64, cap: Option<f64>) -> f64 {
    match cap {
        Some(c) if !(v <= c) => c,
        _ => v,
    }
}

impl Expr {
    pub fn constant(value: f64) -> Self {
        Expr::Const { value }
    }

    pub fn zero() -> Self {
        Expr::Const { value: 0.0 }
    }

    /// Raw evaluation; may return a non-finite value at singular points.
    pub fn eval(&self, x: &[f64], t: f64) -> f64 {
        match self {
            Expr::Const { value } => *value,
            Expr::Affine {
                offset,
                slope,
                time_slope,
            } => offset + x.iter().zip(slope).map(|(a, b)| a * b).sum::<f64>() + time_slope * t,
            Expr::HeatMode { amplitude, modes } => {
                let mut v = *amplitude;
                let mut k2 = 0.0;
                for (xi, k) in x.iter().zip(modes) {
                    v *= (k * PI * xi).sin();
                    k2 += k * k;
                }
                v * (-PI * PI * k2 * t).exp()
            }
            Expr::HeatKernel { mass } => {
                let n = x.len() as f64;
                let r2: f64 = x.iter().map(|v| v * v).sum();
                mass * (4.0 * PI * t).powf(-n / 2.0) * (-r2 / (4.0 * t)).exp()
            }
            Expr::Sine {
                amplitude,
                wavenumbers,
                time_frequency,
                phase,
            } => {
                let arg: f64 = x.iter().zip(wavenumbers).map(|(a, b)| a * b).sum::<f64>() + time_frequency * t + phase;
                amplitude * arg.sin()
            }
            Expr::Gaussian {
                amplitude,
                center,
                width,
            } => amplitude * (-dist2(x, center) / (width * width)).exp(),
            Expr::PowerLaw {
                center,
                exponent,
                coefficient,
                cap,
            } => {
                let d = dist2(x, center).sqrt();
                capped(coefficient * d.powf(*exponent), *cap)
            }
            Expr::TimePower { t0, exponent, cap } => capped((t - t0).abs().powf(*exponent), *cap),
            Expr::Step {
                axis,
                position,
                left,
                right,
            } => {
                if x.get(*axis).copied().unwrap_or(0.0) < *position {
                    *left
                } else {
                    *right
                }
            }
            Expr::Barenblatt { m, constant } => {
                match Barenblatt::with_constant(*m, x.len().max(1), *constant) {
                    Ok(b) if t > 0.0 => b.eval_unchecked(x, t),
                    _ => f64::NAN,
                }
            }
            Expr::Bump {
                center,
                radius,
                t_start,
                t_end,
            } => {
                let s = dist2(x, center).sqrt() / radius;
                let tau = (2.0 * t - t_start - t_end) / (t_end - t_start);
                bump_profile(s) * bump_profile(tau)
            }
            Expr::Sum { terms } => terms.iter().map(|e| e.eval(x, t)).sum(),
            Expr::Product { factors } => factors.iter().map(|e| e.eval(x, t)).product(),
            Expr::Scaled {
                inner,
                amplitude,
                space_factor,
                time_factor,
                anchor,
                anchor_time,
            } => {
                let mut y = [0.0; 2];
                for (i, xi) in x.iter().enumerate().take(2) {
                    let c = anchor.get(i).copied().unwrap_or(0.0);
                    y[i] = c + space_factor * (xi - c);
                }
                let s = anchor_time + time_factor * (t - anchor_time);
                amplitude * inner.eval(&y[..x.len().min(2)], s)
            }
        }
    }

    /// Evaluation that rejects non-finite values.
    pub fn try_eval(&self, x: &[f64], t: f64) -> Result<f64> {
        let v = self.eval(x, t);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::EvaluationFailure { x: x.to_vec(), t })
        }
    }

    /// Node-exact sampling on the grid.
    pub fn sample(&self, grid: &GridSpec) -> Result<SpaceTimeField> {
        SpaceTimeField::from_fn(grid.clone(), self.label(), |x, t| self.eval(x, t))
    }

    /// Spatial nodes at time `t`.
    pub fn sample_slice(&self, grid: &GridSpec, t: f64) -> Result<Vec<f64>> {
        (0..grid.spatial_len())
            .map(|s| {
                let node = grid.node(s);
                self.try_eval(&node[..grid.dim], t)
            })
            .collect()
    }

    pub fn label(&self) -> String {
        match self {
            Expr::Const { .. } => "const",
            Expr::Affine { .. } => "affine",
            Expr::HeatMode { .. } => "heat_mode",
            Expr::HeatKernel { .. } => "heat_kernel",
            Expr::Sine { .. } => "sine",
            Expr::Gaussian { .. } => "gaussian",
            Expr::PowerLaw { .. } => "power_law",
            Expr::TimePower { .. } => "time_power",
            Expr::Step { .. } => "step",
            Expr::Barenblatt { .. } => "barenblatt",
            Expr::Bump { .. } => "bump",
            Expr::Sum { .. } => "sum",
            Expr::Product { .. } => "product",
            Expr::Scaled { .. } => "scaled",
        }
        .to_string()
    }
}
