//! Operations that only make sense over exact rationals.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::mono::Mono;
use super::sparse::PolyError;
use crate::scalar::{rat_gcd, Rat};
use crate::Poly;

impl Poly {
    pub fn from_i64(c: i64) -> Poly {
        Poly::constant(Rat::from_integer(BigInt::from(c)))
    }

    /// Positive rational content: gcd of numerators over lcm of denominators.
    pub fn rational_content(&self) -> Rat {
        let all_int = self.has_integer_coeffs();
        let mut g = Rat::zero();
        for (_, c) in self.terms() {
            g = rat_gcd(&g, c);
            if all_int && g.is_one() {
                break;
            }
        }
        g
    }

    /// Splits `p = content * monomial_content * primitive` where the primitive
    /// part has coprime integer coefficients, no monomial factor, and a
    /// positive leading coefficient. The sign travels with `content`.
    pub fn content_primitive(&self) -> Result<(Rat, Mono, Poly), PolyError> {
        if self.is_zero() {
            return Err(PolyError::ZeroInput);
        }
        let mut c = self.rational_content();
        if self.leading().map(|t| t.1.is_negative()).unwrap_or(false) {
            c = -c;
        }
        let m = self.monomial_content();
        let inv = Rat::one() / &c;
        let prim = Poly::from_terms_sorted_unchecked(
            self.terms().iter().map(|(x, k)| (x.div(&m).expect("monomial content divides"), k * &inv)).collect(),
        );
        Ok((c, m, prim))
    }

    /// Removes the signed rational content: integer coprime coefficients with a
    /// positive leading coefficient. Zero stays zero.
    pub fn primitive_normalized(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut c = self.rational_content();
        if self.leading().map(|t| t.1.is_negative()).unwrap_or(false) {
            c = -c;
        }
        if c.is_one() {
            return self.clone();
        }
        self.scale(&(Rat::one() / c))
    }

    /// Integer coefficients after [`Poly::primitive_normalized`].
    pub fn has_integer_coeffs(&self) -> bool {
        self.terms().iter().all(|t| t.1.denom().is_one())
    }

    /// Divides out the monomial content too.
    pub fn strip_monomial(&self) -> (Mono, Poly) {
        let m = self.monomial_content();
        if m.is_one() {
            return (m, self.clone());
        }
        let p = Poly::from_terms_sorted_unchecked(
            self.terms().iter().map(|(x, k)| (x.div(&m).expect("divides"), k.clone())).collect(),
        );
        (m, p)
    }

    pub(crate) fn from_terms_sorted_unchecked(terms: Vec<(Mono, Rat)>) -> Poly {
        Poly::from_sorted(terms)
    }
}
