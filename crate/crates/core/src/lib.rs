//! Sharp Hölder exponents for degenerate parabolic equations with `L^{q,r}` sources,
//! and a numerical laboratory that measures them.

pub mod error;
pub mod exponents;
pub mod ext_real;
pub mod fields;
pub mod geometry;
pub mod lab;
pub mod pde;
pub mod regularity;

pub use error::{Error, Result};
