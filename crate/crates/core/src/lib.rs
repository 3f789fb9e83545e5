//! Exact polynomial algebra and a case-tree solver for heavily
//! underdetermined polynomial systems.
//!
//! The crate is organised bottom-up:
//!
//! - [`poly`]: sparse multivariate polynomials generic over a [`Scalar`]
//!   coefficient, with exact-rational extras (content, text form).
//! - [`factor`]: rational roots, multivariate gcd and best-effort
//!   factorization over the rationals.
//! - [`case`]: equations with cached properties, nonzero facts, bindings and
//!   case nodes.
//! - [`solver`]: the step modules, the proc-list scheduler and solving sessions.

pub mod case;
pub mod factor;
pub mod poly;
pub mod scalar;
pub mod solver;

pub use poly::{Mono, SparsePoly, VarId};
pub use scalar::{Rat, Scalar};

/// Polynomial with exact rational coefficients; the solver's working type.
pub type Poly = SparsePoly<Rat>;

/// Polynomial over `f64`, handy for fast numeric spot checks.
pub type FloatPoly = SparsePoly<f64>;
