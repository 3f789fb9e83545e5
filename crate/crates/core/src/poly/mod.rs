//! Sparse multivariate polynomials.

mod mono;
mod rational;
mod sparse;
mod text;

pub use mono::{Mono, VarId};
pub use sparse::{PolyError, SparsePoly};
pub use text::{parse_poly, ParseError};
