use serde::{Deserialize, Serialize};

/// A measurable subset of space-time, tested by cell-center inclusion.
pub trait Region {
    fn contains(&self, x: &[f64], t: f64) -> bool;
    /// Per-axis spatial bounds and the time interval enclosing the region.
    fn bounding_box(&self) -> (Vec<[f64; 2]>, [f64; 2]);
}

/// Axis-aligned box `Π space[a] × time`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub space: Vec<[f64; 2]>,
    pub time: [f64; 2],
}

impl Region for Rect {
    fn contains(&self, x: &[f64], t: f64) -> bool {
        t >= self.time[0]
            && t <= self.time[1]
            && x.iter().zip(&self.space).all(|(&xi, iv)| xi >= iv[0] && xi <= iv[1])
    }

    fn bounding_box(&self) -> (Vec<[f64; 2]>, [f64; 2]) {
        (self.space.clone(), self.time)
    }
}
