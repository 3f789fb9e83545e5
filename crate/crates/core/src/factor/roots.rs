//! Rational roots of univariate polynomials.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::univar::{self, ZPoly};
use super::FactorError;
use crate::poly::VarId;
use crate::scalar::{rat_sqrt, Rat};
use crate::Poly;

/// Primitive integer coefficients of a polynomial univariate in `v`, ascending.
pub(crate) fn to_zpoly(p: &Poly, v: VarId) -> ZPoly {
    let prim = p.primitive_normalized();
    let d = prim.degree_in(v) as usize;
    let mut out = vec![BigInt::zero(); d + 1];
    for (m, c) in prim.terms() {
        out[m.exp(v) as usize] = c.numer().clone();
    }
    univar::trim(&mut out);
    out
}

pub(crate) fn from_zpoly(z: &[BigInt], v: VarId) -> Poly {
    Poly::from_terms(
        z.iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (crate::Mono::var_pow(v, i as u32), Rat::from_integer(c.clone()))),
    )
}

/// The single variable of `p`, or an error.
pub(crate) fn sole_var(p: &Poly) -> Result<VarId, FactorError> {
    let vars = p.vars();
    if vars.len() != 1 {
        return Err(FactorError::NotUnivariate(vars.len()));
    }
    Ok(*vars.iter().next().unwrap())
}

/// Divisors above this magnitude are not enumerated by trial division; the
/// root search falls back to linear factors from the full factorizer.
const TRIAL_DIVISION_LIMIT: u64 = 1_000_000_000_000;

fn positive_divisors(n: &BigInt) -> Option<Vec<BigInt>> {
    let n = n.abs().to_u64()?;
    if n > TRIAL_DIVISION_LIMIT {
        return None;
    }
    let mut primes = Vec::new();
    let mut m = n;
    let mut k = 2u64;
    while k * k <= m {
        let mut e = 0;
        while m % k == 0 {
            m /= k;
            e += 1;
        }
        if e > 0 {
            primes.push((k, e));
        }
        k += if k == 2 { 1 } else { 2 };
    }
    if m > 1 {
        primes.push((m, 1));
    }
    let mut divs = vec![1u64];
    for (q, e) in primes {
        let mut next = Vec::with_capacity(divs.len() * (e + 1));
        for d in &divs {
            let mut x = *d;
            for _ in 0..=e {
                next.push(x);
                x *= q;
            }
        }
        divs = next;
    }
    divs.sort_unstable();
    Some(divs.into_iter().map(BigInt::from).collect())
}

/// `q^n * f(s/q)` as an integer; zero iff `s/q` is a root.
fn homogeneous_eval(f: &[BigInt], s: &BigInt, q: &BigInt) -> BigInt {
    let mut acc = BigInt::zero();
    let mut qpow = BigInt::one();
    // Horner on s with increasing powers of q
    for c in f.iter().rev() {
        acc = acc * s + c * &qpow;
        qpow *= q;
    }
    acc
}

/// Every rational root of a univariate polynomial, ascending.
///
/// Candidates `±a/b` with `a | a_0` and `b | a_n` are checked by exact
/// evaluation, so the result is complete.
pub fn univ_rational_roots(p: &Poly) -> Result<Vec<Rat>, FactorError> {
    if p.is_zero() {
        return Err(FactorError::ZeroInput);
    }
    let v = sole_var(p)?;
    let mut f = to_zpoly(p, v);
    let mut roots = Vec::new();
    if f[0].is_zero() {
        roots.push(Rat::zero());
        let shift = f.iter().position(|c| !c.is_zero()).unwrap();
        f.drain(..shift);
    }
    if univar::degree(&f) == 0 {
        return Ok(roots);
    }
    let lead = f.last().unwrap().clone();
    match (positive_divisors(&f[0]), positive_divisors(&lead)) {
        (Some(num_divs), Some(den_divs)) => {
            for a in &num_divs {
                for b in &den_divs {
                    if !a.gcd(b).is_one() {
                        continue;
                    }
                    for s in [a.clone(), -a.clone()] {
                        if homogeneous_eval(&f, &s, b).is_zero() {
                            roots.push(Rat::new(s, b.clone()));
                        }
                    }
                }
            }
        }
        _ => {
            let factors = univar::factor(&f).ok_or(FactorError::TooExpensive)?;
            for (g, _) in factors {
                if univar::degree(&g) == 1 {
                    roots.push(Rat::new(-g[0].clone(), g[1].clone()));
                }
            }
        }
    }
    roots.sort();
    roots.dedup();
    Ok(roots)
}

/// Both roots of `a x^2 + b x + c` when its discriminant is a rational square.
pub fn discriminant_square_root(a: &Rat, b: &Rat, c: &Rat) -> Result<Option<(Rat, Rat)>, FactorError> {
    if a.is_zero() {
        return Err(FactorError::NotQuadratic);
    }
    let disc = b * b - Rat::from_integer(BigInt::from(4)) * a * c;
    let Some(s) = rat_sqrt(&disc) else { return Ok(None) };
    let two_a = Rat::from_integer(BigInt::from(2)) * a;
    Ok(Some(((-b + &s) / &two_a, (-b - &s) / &two_a)))
}

/// Whether `r` is a root, by direct evaluation.
pub fn is_root(p: &Poly, v: VarId, r: &Rat) -> bool {
    let pt = [(v, r.clone())].into_iter().collect();
    p.eval(&pt).map(|x| x.is_zero()).unwrap_or(false)
}
