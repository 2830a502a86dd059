//! Uniform space-time grids, sampled fields, closed-form expressions and sources.

mod expr;
mod field;
mod grid;
pub mod io;
mod region;
mod source;

pub use expr::Expr;
pub use field::{RegionSamples, SpaceTimeField};
pub use grid::GridSpec;
pub use region::{Rect, Region};
pub use source::{SourceForm, SourceTerm};

pub(crate) use field::pow_abs;
