use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Uniform space-time grid. Spatial nodes are indexed `s = ix + nx * iy`; the time
/// index is outermost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dim: usize,
    /// Closed interval per spatial axis.
    pub space: Vec<[f64; 2]>,
    /// Points per spatial axis.
    pub nx: usize,
    pub time: [f64; 2],
    /// Number of time levels.
    pub nt: usize,
}

impl GridSpec {
    pub fn new(dim: usize, space: Vec<[f64; 2]>, nx: usize, time: [f64; 2], nt: usize) -> Result<Self> {
        let g = GridSpec { dim, space, nx, time, nt };
        g.validate()?;
        Ok(g)
    }

    pub fn one_d(x: [f64; 2], nx: usize, time: [f64; 2], nt: usize) -> Result<Self> {
        Self::new(1, vec![x], nx, time, nt)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidGrid(m));
        if self.dim != 1 && self.dim != 2 {
            return bad(format!("dimension must be 1 or 2, got {}", self.dim));
        }
        if self.space.len() != self.dim {
            return bad(format!("{} spatial extents for dimension {}", self.space.len(), self.dim));
        }
        if self.nx < 3 {
            return bad(format!("need at least 3 points per axis, got {}", self.nx));
        }
        if self.nt < 2 {
            return bad(format!("need at least 2 time levels, got {}", self.nt));
        }
        for (a, iv) in self.space.iter().enumerate() {
            if !(iv[1] > iv[0]) || !iv[0].is_finite() || !iv[1].is_finite() {
                return bad(format!("axis {a} extent {:?} is empty or not finite", iv));
            }
        }
        if !(self.time[1] > self.time[0]) || !self.time[0].is_finite() || !self.time[1].is_finite() {
            return bad(format!("time extent {:?} is empty or not finite", self.time));
        }
        Ok(())
    }

    pub fn dx(&self, axis: usize) -> f64 {
        let [lo, hi] = self.space[axis];
        (hi - lo) / (self.nx - 1) as f64
    }

    pub fn min_dx(&self) -> f64 {
        (0..self.dim).map(|a| self.dx(a)).fold(f64::INFINITY, f64::min)
    }

    pub fn dt(&self) -> f64 {
        (self.time[1] - self.time[0]) / (self.nt - 1) as f64
    }

    pub fn spatial_len(&self) -> usize {
        self.nx.pow(self.dim as u32)
    }

    pub fn len(&self) -> usize {
        self.spatial_len() * self.nt
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        let [lo, hi] = self.space[axis];
        if i == self.nx - 1 {
            hi
        } else {
            lo + i as f64 * self.dx(axis)
        }
    }

    pub fn time_at(&self, k: usize) -> f64 {
        if k == self.nt - 1 {
            self.time[1]
        } else {
            self.time[0] + k as f64 * self.dt()
        }
    }

    /// Multi-index of a spatial node.
    pub fn unravel(&self, s: usize) -> [usize; 2] {
        if self.dim == 1 {
            [s, 0]
        } else {
            [s % self.nx, s / self.nx]
        }
    }

    pub fn ravel(&self, ix: usize, iy: usize) -> usize {
        ix + self.nx * iy
    }

    /// Coordinates of spatial node `s` (only the first `dim` entries are meaningful).
    pub fn node(&self, s: usize) -> [f64; 2] {
        let [ix, iy] = self.unravel(s);
        let x = self.coord(0, ix);
        let y = if self.dim == 2 { self.coord(1, iy) } else { 0.0 };
        [x, y]
    }

    /// Whether the point lies in the closed domain, with a relative tolerance.
    pub fn contains(&self, x: &[f64], t: f64) -> bool {
        if x.len() != self.dim {
            return false;
        }
        let tol = |lo: f64, hi: f64| 1e-12 * (hi - lo).abs().max(1.0);
        x.iter().zip(&self.space).all(|(&xi, iv)| {
            let e = tol(iv[0], iv[1]);
            xi >= iv[0] - e && xi <= iv[1] + e
        }) && t >= self.time[0] - tol(self.time[0], self.time[1])
            && t <= self.time[1] + tol(self.time[0], self.time[1])
    }

    /// Same spatial layout with a different time axis.
    pub fn with_time(&self, time: [f64; 2], nt: usize) -> Result<Self> {
        Self::new(self.dim, self.space.clone(), self.nx, time, nt)
    }
}
