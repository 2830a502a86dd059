//! Closed-form solutions used as oracles for the solvers and the regularity analysis.

use crate::error::{Error, Result};
use crate::fields::Expr;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

/// Self-similar source solution of `u_t = Δ(u^m)`:
/// `U(x,t) = t^{-a} (C − b|x|² t^{-2a/n})₊^{1/(m−1)}`, `a = n/(n(m−1)+2)`,
/// `b = a(m−1)/(2mn)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Barenblatt {
    pub m: f64,
    pub n: usize,
    pub constant: f64,
}

impl Barenblatt {
    pub fn with_constant(m: f64, n: usize, constant: f64) -> Result<Self> {
        if !(m > 1.0) || n == 0 || !(constant > 0.0) {
            return Err(Error::InvalidParameters(format!(
                "Barenblatt needs m > 1, n >= 1, C > 0 (got m = {m}, n = {n}, C = {constant})"
            )));
        }
        Ok(Barenblatt { m, n, constant })
    }

    /// Fix `C` from the conserved mass `M = C^{s+n/2} b^{-n/2} π^{n/2} Γ(s+1)/Γ(s+1+n/2)`, `s = 1/(m−1)`.
    pub fn with_mass(m: f64, n: usize, mass: f64) -> Result<Self> {
        if !(mass > 0.0) {
            return Err(Error::InvalidParameters(format!("mass must be positive, got {mass}")));
        }
        let probe = Self::with_constant(m, n, 1.0)?;
        let unit_mass = probe.mass();
        let s = 1.0 / (m - 1.0);
        let constant = (mass / unit_mass).powf(1.0 / (s + n as f64 / 2.0));
        Self::with_constant(m, n, constant)
    }

    pub fn a(&self) -> f64 {
        let n = self.n as f64;
        n / (n * (self.m - 1.0) + 2.0)
    }

    pub fn b(&self) -> f64 {
        self.a() * (self.m - 1.0) / (2.0 * self.m * self.n as f64)
    }

    pub fn mass(&self) -> f64 {
        let n = self.n as f64;
        let s = 1.0 / (self.m - 1.0);
        self.constant.powf(s + n / 2.0) * self.b().powf(-n / 2.0) * PI.powf(n / 2.0) * gamma(s + 1.0)
            / gamma(s + 1.0 + n / 2.0)
    }

    /// Radius of the support at time `t`.
    pub fn free_boundary(&self, t: f64) -> f64 {
        (self.constant / self.b()).sqrt() * t.powf(self.a() / self.n as f64)
    }

    pub fn eval(&self, x: &[f64], t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::OutsideValidity(format!("Barenblatt needs t > 0, got {t}")));
        }
        Ok(self.eval_unchecked(x, t))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64], t: f64) -> f64 {
        let a = self.a();
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let inner = self.constant - self.b() * r2 * t.powf(-2.0 * a / self.n as f64);
        if inner <= 0.0 {
            0.0
        } else {
            t.powf(-a) * inner.powf(1.0 / (self.m - 1.0))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReferenceSolution {
    /// `A Π sin(k_i π x_i) exp(−π² Σ k_i² t)` on the unit cube.
    HeatSeparable { amplitude: f64, modes: Vec<f64> },
    /// `M (4πt)^{-n/2} exp(−|x|²/(4t))`.
    HeatKernel { mass: f64, n: usize },
    BarenblattPme { m: f64, n: usize, mass: f64 },
    /// Time-independent `|x − c|^s`.
    PowerProfile { s: f64, center: Vec<f64> },
}

impl ReferenceSolution {
    pub fn barenblatt(&self) -> Option<Result<Barenblatt>> {
        match self {
            ReferenceSolution::BarenblattPme { m, n, mass } => Some(Barenblatt::with_mass(*m, *n, *mass)),
            _ => None,
        }
    }

    pub fn to_expr(&self) -> Result<Expr> {
        Ok(match self {
            ReferenceSolution::HeatSeparable { amplitude, modes } => Expr::HeatMode {
                amplitude: *amplitude,
                modes: modes.clone(),
            },
            ReferenceSolution::HeatKernel { mass, .. } => Expr::HeatKernel { mass: *mass },
            ReferenceSolution::BarenblattPme { m, n, mass } => {
                let b = Barenblatt::with_mass(*m, *n, *mass)?;
                Expr::Barenblatt {
                    m: *m,
                    constant: b.constant,
                }
            }
            ReferenceSolution::PowerProfile { s, center } => Expr::PowerLaw {
                center: center.clone(),
                exponent: *s,
                coefficient: 1.0,
                cap: None,
            },
        })
    }

    pub fn eval(&self, x: &[f64], t: f64) -> Result<f64> {
        match self {
            ReferenceSolution::HeatKernel { .. } | ReferenceSolution::BarenblattPme { .. } if !(t > 0.0) => {
                Err(Error::OutsideValidity(format!("reference needs t > 0, got {t}")))
            }
            _ => {
                let v = self.to_expr()?.eval(x, t);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::EvaluationFailure { x: x.to_vec(), t })
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Composite Simpson on the support, independent of the Gamma-function route.
    fn quad_mass_1d(b: &Barenblatt, t: f64) -> f64 {
        let r = b.free_boundary(t);
        let n = 200_000;
        let h = 2.0 * r / n as f64;
        let mut acc = 0.0;
        for i in 0..=n {
            let x = -r + i as f64 * h;
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc += w * b.eval_unchecked(&[x], t);
        }
        acc * h / 3.0
    }

    #[test]
    fn mass_is_conserved_and_matches_closed_form() {
        let b = Barenblatt::with_mass(2.0, 1, 0.5).unwrap();
        let m1 = quad_mass_1d(&b, 1.0);
        let m2 = quad_mass_1d(&b, 2.0);
        assert!((m1 - m2).abs() < 1e-6, "{m1} vs {m2}");
        assert!((m1 - 0.5).abs() < 1e-6);
    }

    #[test]
    fn compact_support() {
        let b = Barenblatt::with_constant(2.0, 1, 1.0 / 12.0).unwrap();
        let xf = b.free_boundary(1.0);
        assert!((xf - 1.0).abs() < 1e-14);
        assert_eq!(b.eval(&[1.01], 1.0).unwrap(), 0.0);
        assert!(b.eval(&[0.99], 1.0).unwrap() > 0.0);
        assert!(matches!(b.eval(&[0.0], 0.0), Err(Error::OutsideValidity(_))));
    }

    #[test]
    fn free_boundary_slope() {
        // value ~ dist^{1/(m-1)} near the front
        for &m in &[2.0, 3.0, 4.0] {
            let b = Barenblatt::with_constant(m, 1, 0.1).unwrap();
            let t = 1.5;
            let xf = b.free_boundary(t);
            let d1 = 1e-5;
            let d2 = 1e-4;
            let v1 = b.eval(&[xf - d1], t).unwrap();
            let v2 = b.eval(&[xf - d2], t).unwrap();
            let slope = (v2 / v1).ln() / (d2 / d1).ln();
            assert!((slope - 1.0 / (m - 1.0)).abs() < 0.02, "m = {m}: slope {slope}");
        }
    }

    #[test]
    fn two_dimensional_mass() {
        let b = Barenblatt::with_mass(2.0, 2, 1.0).unwrap();
        // polar quadrature
        let r = b.free_boundary(1.0);
        let n = 100_000;
        let h = r / n as f64;
        let mass: f64 = (0..n)
            .map(|i| {
                let rr = (i as f64 + 0.5) * h;
                2.0 * PI * rr * b.eval_unchecked(&[rr, 0.0], 1.0) * h
            })
            .sum();
        assert!((mass - 1.0).abs() < 1e-6);
    }
}
