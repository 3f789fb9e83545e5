//! Best-effort factorization over the rationals.
//!
//! Univariate polynomials are factored completely (Zassenhaus), and their
//! rational roots are found by the rational-root theorem. Multivariate
//! polynomials go through a sequence of cheap tests: content extraction,
//! grouping on a variable of degree one, squarefree splitting, difference of
//! squares and, for small inputs, Kronecker substitution. The result carries a
//! status flag saying how much of it is certified.

mod gcd;
mod roots;
pub(crate) mod univar;

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::{Mono, VarId};
use crate::scalar::{rat_sqrt, Rat};
use crate::Poly;

pub use gcd::multivar_gcd;
pub use roots::{discriminant_square_root, is_root, univ_rational_roots};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FactorError {
    #[error("expected a univariate polynomial, found {0} variables")]
    NotUnivariate(usize),
    #[error("zero polynomial")]
    ZeroInput,
    #[error("constant polynomial")]
    ConstantInput,
    #[error("leading coefficient is zero")]
    NotQuadratic,
    #[error("factorization too expensive")]
    TooExpensive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FactorStatus {
    /// Every listed factor is irreducible.
    Complete,
    /// A nontrivial split was found but some factor was not fully tested.
    Partial,
    /// No split was found.
    IrreducibleByOurTests,
    /// Skipped by the size guard.
    Untested,
}

impl FactorStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            FactorStatus::Complete => "complete",
            FactorStatus::Partial => "partial",
            FactorStatus::IrreducibleByOurTests => "irreducible-by-our-tests",
            FactorStatus::Untested => "untested",
        }
    }

    pub fn parse(s: &str) -> Option<FactorStatus> {
        Some(match s {
            "complete" => FactorStatus::Complete,
            "partial" => FactorStatus::Partial,
            "irreducible-by-our-tests" => FactorStatus::IrreducibleByOurTests,
            "untested" => FactorStatus::Untested,
            _ => return None,
        })
    }
}

impl fmt::Display for FactorStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `content * prod(factor^mult)` equals the input exactly. Factors are
/// primitive with positive leading coefficient, pairwise distinct.
#[derive(Debug, Clone, PartialEq)]
pub struct Factorization {
    pub content: Rat,
    pub factors: Vec<(Poly, u32)>,
    pub status: FactorStatus,
}

impl Factorization {
    pub fn expand(&self) -> Poly {
        let mut acc = Poly::constant(self.content.clone());
        for (f, m) in &self.factors {
            acc = acc.mul(&f.pow(*m));
        }
        acc
    }

    /// More than one distinct factor, or a repeated one.
    pub fn is_nontrivial(&self) -> bool {
        self.factors.len() > 1 || self.factors.iter().any(|(_, m)| *m > 1)
    }

    pub fn distinct_factors(&self) -> impl Iterator<Item = &Poly> {
        self.factors.iter().map(|(f, _)| f)
    }
}

/// Inputs above this many terms are not examined beyond content extraction.
pub const FACTOR_TERM_LIMIT: usize = 5000;
/// gcd-based steps (squarefree split, grouping) are skipped above this size.
const GCD_TERM_LIMIT: usize = 1500;
const KRONECKER_MAX_VARS: usize = 3;
const KRONECKER_MAX_DEGREE: u32 = 4;
const KRONECKER_MAX_PIECES: usize = 16;
const UNIVARIATE_MAX_DEGREE: usize = 400;

struct Piece {
    poly: Poly,
    certified: bool,
}

/// Factors `p` as far as the available tests allow.
pub fn try_factor(p: &Poly) -> Result<Factorization, FactorError> {
    if p.is_constant() {
        return Err(FactorError::ConstantInput);
    }
    let (content, mono, prim) = p.content_primitive().map_err(|_| FactorError::ZeroInput)?;
    let mut pieces: Vec<(Piece, u32)> = mono
        .pairs()
        .iter()
        .map(|&(v, e)| (Piece { poly: Poly::var(v), certified: true }, e))
        .collect();
    let mut untested = false;
    if !prim.is_constant() {
        if prim.term_count() > FACTOR_TERM_LIMIT {
            untested = true;
            pieces.push((Piece { poly: prim, certified: false }, 1));
        } else {
            for piece in split(prim) {
                pieces.push((piece, 1));
            }
        }
    }
    let mut factors: Vec<(Poly, u32)> = Vec::new();
    let mut all_certified = true;
    for (piece, m) in pieces {
        all_certified &= piece.certified;
        match factors.iter_mut().find(|(f, _)| *f == piece.poly) {
            Some(slot) => slot.1 += m,
            None => factors.push((piece.poly, m)),
        }
    }
    factors.sort_by(|a, b| a.0.total_degree().cmp(&b.0.total_degree()).then_with(|| b.0.terms().cmp(a.0.terms())));
    let trivial = factors.len() == 1 && factors[0].1 == 1;
    let status = if untested && trivial {
        FactorStatus::Untested
    } else if trivial {
        FactorStatus::IrreducibleByOurTests
    } else if all_certified {
        FactorStatus::Complete
    } else {
        FactorStatus::Partial
    };
    Ok(Factorization { content, factors, status })
}

fn normalized(p: Poly) -> Poly {
    p.primitive_normalized()
}

/// Splits a primitive polynomial without monomial content into pieces whose
/// product is the input up to a positive constant.
fn split(q: Poly) -> Vec<Piece> {
    if q.is_constant() {
        return Vec::new();
    }
    let q = normalized(q);
    if q.total_degree() == 1 {
        return vec![Piece { poly: q, certified: true }];
    }
    let vars = q.vars();
    if vars.len() == 1 {
        return split_univariate(q, *vars.iter().next().unwrap());
    }
    if q.term_count() <= GCD_TERM_LIMIT {
        if let Some(pieces) = split_linear_var(&q) {
            return pieces;
        }
        if let Some((a, b)) = split_squarefree(&q) {
            let mut out = split(a);
            // the cofactor still contains every repeated piece once more
            let mut rest = b;
            let known: Vec<Poly> = out.iter().map(|p| p.poly.clone()).collect();
            let mut extra = Vec::new();
            for k in &known {
                while let Some(next) = rest.div_exact(k) {
                    extra.push(Piece { poly: k.clone(), certified: true });
                    rest = next;
                }
            }
            for e in &mut extra {
                e.certified = out.iter().any(|p| p.poly == e.poly && p.certified);
            }
            out.extend(extra);
            out.extend(split(rest));
            return out;
        }
    }
    if let Some((a, b)) = difference_of_squares(&q) {
        let mut out = split(a);
        out.extend(split(b));
        return out;
    }
    if vars.len() <= KRONECKER_MAX_VARS && q.total_degree() <= KRONECKER_MAX_DEGREE {
        if let Some(pieces) = kronecker(&q) {
            return pieces;
        }
    }
    vec![Piece { poly: q, certified: false }]
}

fn split_univariate(q: Poly, v: VarId) -> Vec<Piece> {
    let z = roots::to_zpoly(&q, v);
    if univar::degree(&z) <= UNIVARIATE_MAX_DEGREE {
        if let Some(fs) = univar::factor(&z) {
            let mut out = Vec::new();
            for (f, m) in fs {
                let f = normalized(roots::from_zpoly(&f, v));
                for _ in 0..m {
                    out.push(Piece { poly: f.clone(), certified: true });
                }
            }
            return out;
        }
    }
    // fall back to the linear factors, which are always found
    let mut out = Vec::new();
    let mut rest = q.clone();
    if let Ok(rs) = univ_rational_roots(&q) {
        for r in rs {
            let lin = normalized(Poly::from_terms([
                (Mono::var(v), Rat::from_integer(r.denom().clone())),
                (Mono::one(), Rat::from_integer(-r.numer().clone())),
            ]));
            while let Some(next) = rest.div_exact(&lin) {
                out.push(Piece { poly: lin.clone(), certified: true });
                rest = next;
            }
        }
    }
    if !rest.is_constant() {
        out.push(Piece { poly: normalized(rest), certified: false });
    }
    out
}

/// `q = A*v + B` with `A`, `B` free of `v`: the factors free of `v` are exactly
/// the common factors of `A` and `B`, and what remains is irreducible.
fn split_linear_var(q: &Poly) -> Option<Vec<Piece>> {
    let v = q.linear_vars().into_iter().next()?;
    let a = q.coeff_wrt(v, 1);
    let b = q.coeff_wrt(v, 0);
    let g = multivar_gcd(&a, &b);
    if g.is_constant() {
        return Some(vec![Piece { poly: q.clone(), certified: true }]);
    }
    let rest = q.div_exact(&g)?;
    let mut out = split(g);
    out.push(Piece { poly: normalized(rest), certified: true });
    Some(out)
}

/// Splits off `gcd(q, dq/dv)` when it is nontrivial.
fn split_squarefree(q: &Poly) -> Option<(Poly, Poly)> {
    for v in q.vars() {
        let g = multivar_gcd(q, &q.derivative(v));
        if !g.is_constant() {
            let rest = q.div_exact(&g)?;
            return Some((g, rest));
        }
    }
    None
}

/// `P - N` with `P` and `N` both squares, after splitting terms by sign.
fn difference_of_squares(q: &Poly) -> Option<(Poly, Poly)> {
    let pos = Poly::from_terms(q.terms().iter().filter(|(_, c)| c.is_positive()).cloned());
    let neg = Poly::from_terms(q.terms().iter().filter(|(_, c)| c.is_negative()).map(|(m, c)| (m.clone(), -c)));
    if pos.is_zero() || neg.is_zero() {
        return None;
    }
    let s = poly_sqrt(&pos)?;
    let t = poly_sqrt(&neg)?;
    Some((s.sub(&t), s.add(&t)))
}

fn mono_sqrt(m: &Mono) -> Option<Mono> {
    if m.pairs().iter().any(|&(_, e)| e % 2 != 0) {
        return None;
    }
    Some(Mono::from_pairs(m.pairs().iter().map(|&(v, e)| (v, e / 2))))
}

/// Exact square root with positive leading coefficient, if one exists.
pub fn poly_sqrt(p: &Poly) -> Option<Poly> {
    let (lm, lc) = p.leading()?;
    let root_m = mono_sqrt(lm)?;
    let root_c = rat_sqrt(lc)?;
    let head = (root_m, root_c);
    let mut s = Poly::monomial(head.0.clone(), head.1.clone());
    let two_head_c = &head.1 * Rat::from_integer(BigInt::from(2));
    let mut last = head.0.clone();
    for _ in 0..=p.term_count() {
        let rem = p.sub(&s.mul(&s));
        let Some((rm, rc)) = rem.leading() else { return Some(s) };
        let m = rm.div(&head.0)?;
        if m >= last {
            return None;
        }
        let c = rc / &two_head_c;
        s = s.add(&Poly::monomial(m.clone(), c));
        last = m;
    }
    None
}

/// Kronecker substitution: factor the univariate image and recombine subsets
/// of its irreducible factors. The degree bound makes the map injective on all
/// candidate divisors, so a failed search certifies irreducibility.
fn kronecker(q: &Poly) -> Option<Vec<Piece>> {
    let degs = q.degrees();
    let vars: Vec<VarId> = q.vars().into_iter().collect();
    let mut weights = Vec::with_capacity(vars.len());
    let mut w: u64 = 1;
    for v in &vars {
        weights.push(w);
        w *= degs[v] as u64 + 1;
    }
    let image_deg = q
        .terms()
        .iter()
        .map(|(m, _)| vars.iter().zip(&weights).map(|(v, w)| m.exp(*v) as u64 * w).sum::<u64>())
        .max()?;
    let mut z = vec![BigInt::zero(); image_deg as usize + 1];
    for (m, c) in q.terms() {
        let e: u64 = vars.iter().zip(&weights).map(|(v, w)| m.exp(*v) as u64 * w).sum();
        z[e as usize] += c.numer();
    }
    univar::trim(&mut z);
    let ufs = univar::factor(&z)?;
    let mut images: Vec<Vec<BigInt>> = Vec::new();
    for (f, m) in ufs {
        for _ in 0..m {
            images.push(f.clone());
        }
    }
    if images.len() > KRONECKER_MAX_PIECES {
        return None;
    }
    let unmap = |f: &[BigInt]| -> Option<Poly> {
        let mut terms = Vec::new();
        for (e, c) in f.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mut e = e as u64;
            let mut pairs = Vec::new();
            for (i, v) in vars.iter().enumerate().rev() {
                let d = e / weights[i];
                e %= weights[i];
                if d > degs[v] as u64 {
                    return None;
                }
                pairs.push((*v, d as u32));
            }
            terms.push((Mono::from_pairs(pairs), Rat::from_integer(c.clone())));
        }
        Some(Poly::from_terms(terms))
    };

    let mut rest = q.clone();
    let mut out = Vec::new();
    let mut size = 1;
    while 2 * size <= images.len() {
        let mut hit: Option<(Vec<usize>, Poly, Poly)> = None;
        univar::for_each_subset(images.len(), size, |idx| {
            let mut g: Vec<BigInt> = vec![BigInt::one()];
            for &i in idx {
                g = univar::mul(&g, &images[i]);
            }
            let Some(cand) = unmap(&g) else { return false };
            if cand.is_constant() {
                return false;
            }
            let cand = normalized(cand);
            if let Some(qq) = rest.div_exact(&cand) {
                hit = Some((idx.to_vec(), cand, qq));
                return true;
            }
            false
        });
        match hit {
            Some((idx, g, qq)) => {
                out.push(Piece { poly: g, certified: true });
                rest = qq;
                for i in idx.into_iter().rev() {
                    images.remove(i);
                }
            }
            None => size += 1,
        }
    }
    if !rest.is_constant() {
        out.push(Piece { poly: normalized(rest), certified: true });
    }
    Some(out)
}
