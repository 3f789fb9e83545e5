//! Coefficient scalars.
//!
//! The polynomial kernel is written against [`Scalar`] so the same arithmetic
//! runs over exact rationals (the solver's only production scalar) and over
//! machine types such as `f64` or `Ratio<i64>` for quick numeric probes.

use std::fmt;
use std::ops::Neg;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{NumAssignRef, NumRef, One, Signed, Zero};

/// A field-like coefficient type.
pub trait Scalar:
    NumRef + NumAssignRef + Clone + PartialOrd + Neg<Output = Self> + fmt::Debug + fmt::Display + Send + Sync + 'static
{
}

impl<T> Scalar for T where
    T: NumRef
        + NumAssignRef
        + Clone
        + PartialOrd
        + Neg<Output = T>
        + fmt::Debug
        + fmt::Display
        + Send
        + Sync
        + 'static
{
}

/// Exact rational number.
pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// `Some(r)` with `r*r == x` when `x` is the square of a rational.
pub fn rat_sqrt(x: &Rat) -> Option<Rat> {
    if x.is_negative() {
        return None;
    }
    let n = int_sqrt_exact(x.numer())?;
    let d = int_sqrt_exact(x.denom())?;
    Some(Rat::new(n, d))
}

pub fn int_sqrt_exact(x: &BigInt) -> Option<BigInt> {
    if x.is_negative() {
        return None;
    }
    let r = x.sqrt();
    (&r * &r == *x).then_some(r)
}

/// gcd of the numerators over the lcm of the denominators, always positive.
pub fn rat_gcd(a: &Rat, b: &Rat) -> Rat {
    if a.is_zero() {
        return b.abs();
    }
    if b.is_zero() {
        return a.abs();
    }
    let n = a.numer().gcd(b.numer());
    let d = a.denom().lcm(b.denom());
    Rat::new(n, d)
}

pub fn is_integer(x: &Rat) -> bool {
    x.denom().is_one()
}
