use super::grid::GridSpec;
use super::region::Region;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Scalar function sampled on a uniform space-time grid, dense row-major with time outermost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeField {
    pub grid: GridSpec,
    pub name: String,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
    values: Vec<f64>,
}

/// Cell-center values of a field inside a region, grouped by time cell.
#[derive(Debug, Clone)]
pub struct RegionSamples {
    /// Volume of one spatial cell.
    pub space_volume: f64,
    pub dt: f64,
    /// One entry per time cell that meets the region; empty slabs are dropped.
    pub slabs: Vec<Vec<f64>>,
}

impl RegionSamples {
    pub fn cell_count(&self) -> usize {
        self.slabs.iter().map(Vec::len).sum()
    }

    pub fn measure(&self) -> f64 {
        self.cell_count() as f64 * self.space_volume * self.dt
    }

    /// Midpoint-rule `∫ |v|^power`; `power = 0` yields the measure.
    pub fn integral(&self, power: f64) -> f64 {
        let w = self.space_volume * self.dt;
        self.slabs
            .iter()
            .flat_map(|s| s.iter())
            .map(|v| pow_abs(*v, power))
            .sum::<f64>()
            * w
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.slabs.iter().flat_map(|s| s.iter().copied())
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }
}

pub(crate) fn pow_abs(v: f64, power: f64) -> f64 {
    if power == 0.0 {
        1.0
    } else if power == 1.0 {
        v.abs()
    } else if power == 2.0 {
        v * v
    } else {
        v.abs().powf(power)
    }
}

/// Index range of cells whose centers may lie in `[lo, hi]`.
fn cell_range(grid_lo: f64, dx: f64, ncells: usize, lo: f64, hi: f64) -> Option<(usize, usize)> {
    let a = ((lo - grid_lo) / dx - 0.5 - 1e-9).ceil().max(0.0);
    let b = ((hi - grid_lo) / dx - 0.5 + 1e-9).floor();
    if b < 0.0 || a > (ncells - 1) as f64 || a > b {
        return None;
    }
    Some((a as usize, (b as usize).min(ncells - 1)))
}

impl SpaceTimeField {
    pub fn new(grid: GridSpec, values: Vec<f64>, name: impl Into<String>) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.len() {
            return Err(Error::FieldData(format!(
                "expected {} values for the grid, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::FieldData(format!("non-finite value at flat index {i}")));
        }
        Ok(SpaceTimeField {
            grid,
            name: name.into(),
            metadata: BTreeMap::new(),
            values,
        })
    }

    /// Build from a node function `f(x, t)`; fails on the first non-finite value.
    pub fn from_fn(grid: GridSpec, name: impl Into<String>, f: impl Fn(&[f64], f64) -> f64) -> Result<Self> {
        grid.validate()?;
        let ns = grid.spatial_len();
        let mut values = Vec::with_capacity(grid.len());
        for k in 0..grid.nt {
            let t = grid.time_at(k);
            for s in 0..ns {
                let node = grid.node(s);
                let x = &node[..grid.dim];
                let v = f(x, t);
                if !v.is_finite() {
                    return Err(Error::EvaluationFailure { x: x.to_vec(), t });
                }
                values.push(v);
            }
        }
        Ok(SpaceTimeField {
            grid,
            name: name.into(),
            metadata: BTreeMap::new(),
            values,
        })
    }

    pub fn with_metadata(mut self, key: &str, value: impl Into<String>) -> Self {
        self.metadata.insert(key.to_string(), value.into());
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, k: usize, s: usize) -> f64 {
        self.values[k * self.grid.spatial_len() + s]
    }

    pub fn slice(&self, k: usize) -> &[f64] {
        let ns = self.grid.spatial_len();
        &self.values[k * ns..(k + 1) * ns]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Multilinear interpolation in space-time; exact at nodes and on affine fields.
    pub fn interpolate(&self, x: &[f64], t: f64) -> Result<f64> {
        if !self.grid.contains(x, t) {
            return Err(Error::OutOfDomain { x: x.to_vec(), t });
        }
        Ok(self.interpolate_unchecked(x, t))
    }

    fn locate(lo: f64, h: f64, n: usize, v: f64) -> (usize, f64) {
        let s = (v - lo) / h;
        let i = (s.floor().max(0.0) as usize).min(n - 2);
        let frac = (s - i as f64).clamp(0.0, 1.0);
        (i, frac)
    }

    pub(crate) fn interpolate_unchecked(&self, x: &[f64], t: f64) -> f64 {
        let g = &self.grid;
        let (k, ft) = Self::locate(g.time[0], g.dt(), g.nt, t);
        let (ix, fx) = Self::locate(g.space[0][0], g.dx(0), g.nx, x[0]);
        if g.dim == 1 {
            let v = |kk: usize, i: usize| self.at(kk, i);
            let a = v(k, ix) * (1.0 - fx) + v(k, ix + 1) * fx;
            let b = v(k + 1, ix) * (1.0 - fx) + v(k + 1, ix + 1) * fx;
            a * (1.0 - ft) + b * ft
        } else {
            let (iy, fy) = Self::locate(g.space[1][0], g.dx(1), g.nx, x[1]);
            let level = |kk: usize| {
                let v = |i: usize, j: usize| self.at(kk, g.ravel(i, j));
                let a = v(ix, iy) * (1.0 - fx) + v(ix + 1, iy) * fx;
                let b = v(ix, iy + 1) * (1.0 - fx) + v(ix + 1, iy + 1) * fx;
                a * (1.0 - fy) + b * fy
            };
            level(k) * (1.0 - ft) + level(k + 1) * ft
        }
    }

    /// Average of the corner values of cell `(kt, ix, iy)`, i.e. the multilinear
    /// interpolant at the cell center.
    pub fn cell_value(&self, kt: usize, ix: usize, iy: usize) -> f64 {
        let g = &self.grid;
        if g.dim == 1 {
            0.25 * (self.at(kt, ix) + self.at(kt, ix + 1) + self.at(kt + 1, ix) + self.at(kt + 1, ix + 1))
        } else {
            let mut acc = 0.0;
            for kk in [kt, kt + 1] {
                for j in [iy, iy + 1] {
                    for i in [ix, ix + 1] {
                        acc += self.at(kk, g.ravel(i, j));
                    }
                }
            }
            acc * 0.125
        }
    }

    /// Cell-center values of the field inside `region`.
    pub fn region_samples(&self, region: &dyn Region) -> Result<RegionSamples> {
        let g = &self.grid;
        let (space_box, time_box) = region.bounding_box();
        if space_box.len() != g.dim {
            return Err(Error::RegionOutsideDomain(format!(
                "region has {} axes, grid has {}",
                space_box.len(),
                g.dim
            )));
        }
        let dt = g.dt();
        let space_volume: f64 = (0..g.dim).map(|a| g.dx(a)).product();
        let mut slabs = Vec::new();
        let Some((k0, k1)) = cell_range(g.time[0], dt, g.nt - 1, time_box[0], time_box[1]) else {
            return Ok(RegionSamples { space_volume, dt, slabs });
        };
        let xr = cell_range(g.space[0][0], g.dx(0), g.nx - 1, space_box[0][0], space_box[0][1]);
        let yr = if g.dim == 2 {
            cell_range(g.space[1][0], g.dx(1), g.nx - 1, space_box[1][0], space_box[1][1])
        } else {
            Some((0, 0))
        };
        let (Some((x0, x1)), Some((y0, y1))) = (xr, yr) else {
            return Ok(RegionSamples { space_volume, dt, slabs });
        };
        for kt in k0..=k1 {
            let tc = g.time[0] + (kt as f64 + 0.5) * dt;
            let mut slab = Vec::new();
            for iy in y0..=y1 {
                for ix in x0..=x1 {
                    let xc = g.space[0][0] + (ix as f64 + 0.5) * g.dx(0);
                    let inside = if g.dim == 1 {
                        region.contains(&[xc], tc)
                    } else {
                        let yc = g.space[1][0] + (iy as f64 + 0.5) * g.dx(1);
                        region.contains(&[xc, yc], tc)
                    };
                    if inside {
                        slab.push(self.cell_value(kt, ix, iy));
                    }
                }
            }
            if !slab.is_empty() {
                slabs.push(slab);
            }
        }
        Ok(RegionSamples { space_volume, dt, slabs })
    }

    /// `∫_region |field|^power` by the midpoint rule over cells whose centers lie in the region.
    pub fn integrate_region(&self, region: &dyn Region, power: f64) -> Result<f64> {
        let samples = self.region_samples(region)?;
        if samples.cell_count() == 0 {
            return Err(Error::EmptyIntersection);
        }
        Ok(samples.integral(power))
    }

    /// Pointwise map of the values onto a new field on the same grid.
    pub fn map(&self, name: impl Into<String>, f: impl Fn(f64) -> f64) -> Result<Self> {
        SpaceTimeField::new(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect(), name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::region::Rect;

    fn grid1(nx: usize) -> GridSpec {
        GridSpec::one_d([0.0, 1.0], nx, [0.0, 1.0], 3).unwrap()
    }

    #[test]
    fn interpolation_exact_on_affine() {
        let g = GridSpec::new(2, vec![[0.0, 1.0], [0.0, 2.0]], 7, [0.0, 1.0], 4).unwrap();
        let f = SpaceTimeField::from_fn(g, "affine", |x, t| 2.0 * x[0] - x[1] + 3.0 * t).unwrap();
        for &(x, y, t) in &[(0.13, 1.7, 0.42), (0.99, 0.01, 0.9), (0.5, 1.0, 0.0)] {
            let v = f.interpolate(&[x, y], t).unwrap();
            assert!((v - (2.0 * x - y + 3.0 * t)).abs() < 1e-12);
        }
    }

    #[test]
    fn interpolation_remainder_for_square() {
        let g = grid1(11);
        let dx = g.dx(0);
        let f = SpaceTimeField::from_fn(g, "sq", |x, _| x[0] * x[0]).unwrap();
        let xm = 0.3 + dx / 2.0;
        let err = f.interpolate(&[xm], 0.5).unwrap() - xm * xm;
        assert!((err - dx * dx / 4.0).abs() < 1e-14);
    }

    #[test]
    fn out_of_domain() {
        let f = SpaceTimeField::from_fn(grid1(5), "z", |_, _| 0.0).unwrap();
        assert!(matches!(f.interpolate(&[1.5], 0.0), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn integrate_examples() {
        let g = GridSpec::one_d([0.0, 1.0], 101, [0.0, 1.0], 11).unwrap();
        let ones = SpaceTimeField::from_fn(g.clone(), "one", |_, _| 1.0).unwrap();
        let full = Rect { space: vec![[0.0, 1.0]], time: [0.0, 1.0] };
        assert!((ones.integrate_region(&full, 1.0).unwrap() - 1.0).abs() < 1e-12);

        let lin = SpaceTimeField::from_fn(g.clone(), "x", |x, _| x[0]).unwrap();
        let i = lin.integrate_region(&full, 2.0).unwrap();
        assert!((i - 1.0 / 3.0).abs() < 1e-4);

        // single cell [0.3, 0.31] × [0.5, 0.6]
        let one = Rect { space: vec![[0.301, 0.309]], time: [0.51, 0.59] };
        let v = lin.integrate_region(&one, 2.0).unwrap();
        assert!((v - 0.305f64.powi(2) * 0.01 * 0.1).abs() < 1e-15);

        let outside = Rect { space: vec![[2.0, 3.0]], time: [0.0, 1.0] };
        assert_eq!(lin.integrate_region(&outside, 1.0), Err(Error::EmptyIntersection));
    }

    #[test]
    fn midpoint_rule_refines() {
        let exact = 1.0 - (1.0f64).cos();
        let err = |nx: usize| {
            let g = GridSpec::one_d([0.0, 1.0], nx, [0.0, 1.0], 2).unwrap();
            let f = SpaceTimeField::from_fn(g, "sin", |x, _| x[0].sin()).unwrap();
            let full = Rect { space: vec![[0.0, 1.0]], time: [0.0, 1.0] };
            (f.integrate_region(&full, 1.0).unwrap() - exact).abs()
        };
        let (e1, e2) = (err(21), err(41));
        assert!(e1 / e2 >= 1.8, "refinement ratio {}", e1 / e2);
    }

    #[test]
    fn rejects_non_finite() {
        let g = grid1(5);
        assert!(SpaceTimeField::new(g.clone(), vec![f64::NAN; g.len()], "nan").is_err());
        assert!(SpaceTimeField::new(g, vec![0.0; 3], "short").is_err());
    }
}
