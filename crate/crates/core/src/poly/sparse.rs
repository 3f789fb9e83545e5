use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rustc_hash::FxHashMap;
use thiserror::Error;

use super::mono::{Mono, VarId};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("no value bound for {0}")]
    MissingBinding(VarId),
    #[error("substituted expression for {0} still contains {0}")]
    SelfReference(VarId),
    #[error("zero denominator in substitution")]
    ZeroDenominator,
    #[error("zero polynomial has no content")]
    ZeroInput,
}

/// Sparse multivariate polynomial in canonical form.
///
/// Terms are stored in strictly descending graded-lex order with no zero
/// coefficients, so structural equality is mathematical equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SparsePoly<C> {
    terms: Vec<(Mono, C)>,
}

impl<C> Default for SparsePoly<C> {
    fn default() -> Self {
        SparsePoly { terms: Vec::new() }
    }
}

impl<C: Scalar> SparsePoly<C> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(C::one())
    }

    pub fn constant(c: C) -> Self {
        if c.is_zero() {
            Self::zero()
        } else {
            SparsePoly { terms: vec![(Mono::one(), c)] }
        }
    }

    pub fn var(v: VarId) -> Self {
        SparsePoly { terms: vec![(Mono::var(v), C::one())] }
    }

    pub fn monomial(m: Mono, c: C) -> Self {
        if c.is_zero() {
            Self::zero()
        } else {
            SparsePoly { terms: vec![(m, c)] }
        }
    }

    /// Builds a canonical polynomial from unordered, possibly repeated terms.
    pub fn from_terms(terms: impl IntoIterator<Item = (Mono, C)>) -> Self {
        let mut acc: FxHashMap<Mono, C> = FxHashMap::default();
        for (m, c) in terms {
            match acc.get_mut(&m) {
                Some(x) => *x += &c,
                None => {
                    acc.insert(m, c);
                }
            }
        }
        Self::from_map(acc)
    }

    fn from_map(acc: FxHashMap<Mono, C>) -> Self {
        let mut terms: Vec<(Mono, C)> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_unstable_by(|a, b| b.0.cmp(&a.0));
        SparsePoly { terms }
    }

    /// Wraps terms already sorted descending with no zero coefficients.
    pub(crate) fn from_sorted(terms: Vec<(Mono, C)>) -> Self {
        debug_assert!(terms.windows(2).all(|w| w[0].0 > w[1].0));
        debug_assert!(terms.iter().all(|t| !t.1.is_zero()));
        SparsePoly { terms }
    }

    pub fn terms(&self) -> &[(Mono, C)] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<(Mono, C)> {
        self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|t| t.0.is_one())
    }

    /// Value of the constant term (zero when absent).
    pub fn constant_term(&self) -> C {
        match self.terms.last() {
            Some((m, c)) if m.is_one() => c.clone(),
            _ => C::zero(),
        }
    }

    pub fn as_constant(&self) -> Option<C> {
        if self.is_zero() {
            Some(C::zero())
        } else if self.is_constant() {
            Some(self.terms[0].1.clone())
        } else {
            None
        }
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn leading(&self) -> Option<&(Mono, C)> {
        self.terms.first()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.first().map(|t| t.0.total_degree()).unwrap_or(0)
    }

    pub fn vars(&self) -> BTreeSet<VarId> {
        let mut s = BTreeSet::new();
        for (m, _) in &self.terms {
            s.extend(m.vars());
        }
        s
    }

    pub fn contains_var(&self, v: VarId) -> bool {
        self.terms.iter().any(|(m, _)| m.exp(v) > 0)
    }

    /// Largest exponent of `v`; zero for polynomials free of `v` (including 0).
    pub fn degree_in(&self, v: VarId) -> u32 {
        self.terms.iter().map(|(m, _)| m.exp(v)).max().unwrap_or(0)
    }

    /// All per-variable degrees in one pass.
    pub fn degrees(&self) -> HashMap<VarId, u32> {
        let mut out = HashMap::new();
        for (m, _) in &self.terms {
            for &(v, e) in m.pairs() {
                let d = out.entry(v).or_insert(0);
                if e > *d {
                    *d = e;
                }
            }
        }
        out
    }

    /// Coefficients with respect to `v`: entry `n` is the coefficient of `v^n`.
    pub fn coefficients_in(&self, v: VarId) -> Vec<Self> {
        let d = self.degree_in(v) as usize;
        let mut buckets: Vec<Vec<(Mono, C)>> = vec![Vec::new(); d + 1];
        for (m, c) in &self.terms {
            let (e, rest) = m.split_var(v);
            buckets[e as usize].push((rest, c.clone()));
        }
        // removing a variable keeps relative order within a bucket
        buckets.into_iter().map(Self::from_sorted).collect()
    }

    pub fn coeff_wrt(&self, v: VarId, n: u32) -> Self {
        let terms: Vec<(Mono, C)> = self
            .terms
            .iter()
            .filter_map(|(m, c)| {
                let (e, rest) = m.split_var(v);
                (e == n).then(|| (rest, c.clone()))
            })
            .collect();
        Self::from_sorted(terms)
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self::from_sorted(self.terms.iter().map(|(m, x)| (m.clone(), x.clone() * c)).collect())
    }

    pub fn mul_mono(&self, m: &Mono, c: &C) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self::from_sorted(self.terms.iter().map(|(x, k)| (x.mul(m), k.clone() * c)).collect())
    }

    fn merge(a: &[(Mono, C)], b: &[(Mono, C)], negate_b: bool) -> Vec<(Mono, C)> {
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Greater => {
                    out.push(a[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Less => {
                    let c = if negate_b { -b[j].1.clone() } else { b[j].1.clone() };
                    out.push((b[j].0.clone(), c));
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let c = if negate_b { a[i].1.clone() - &b[j].1 } else { a[i].1.clone() + &b[j].1 };
                    if !c.is_zero() {
                        out.push((a[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend(a[i..].iter().cloned());
        out.extend(b[j..].iter().map(|(m, c)| (m.clone(), if negate_b { -c.clone() } else { c.clone() })));
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_sorted(Self::merge(&self.terms, &other.terms, false))
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::from_sorted(Self::merge(&self.terms, &other.terms, true))
    }

    pub fn neg(&self) -> Self {
        Self::from_sorted(self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let (small, big) = if self.terms.len() <= other.terms.len() { (self, other) } else { (other, self) };
        if small.terms.len() == 1 {
            let (m, c) = &small.terms[0];
            return big.mul_mono(m, c);
        }
        if small.terms.len() <= 4 {
            let mut acc = big.mul_mono(&small.terms[0].0, &small.terms[0].1);
            for (m, c) in &small.terms[1..] {
                let part = big.mul_mono(m, c);
                acc = Self::from_sorted(Self::merge(&acc.terms, &part.terms, false));
            }
            return acc;
        }
        let mut acc: FxHashMap<Mono, C> =
            FxHashMap::with_capacity_and_hasher(big.terms.len() * 2, Default::default());
        for (ma, ca) in &small.terms {
            for (mb, cb) in &big.terms {
                let m = ma.mul(mb);
                let c = ca.clone() * cb;
                match acc.get_mut(&m) {
                    Some(x) => *x += &c,
                    None => {
                        acc.insert(m, c);
                    }
                }
            }
        }
        Self::from_map(acc)
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut result = Self::one();
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Fraction-free substitution `v := num/den`.
    ///
    /// Returns `den^d * p(v = num/den)` with `d = degree_in(p, v)`; the result
    /// is free of `v`.
    pub fn substitute_ratfun(&self, v: VarId, num: &Self, den: &Self) -> Result<Self, PolyError> {
        if num.contains_var(v) || den.contains_var(v) {
            return Err(PolyError::SelfReference(v));
        }
        if den.is_zero() {
            return Err(PolyError::ZeroDenominator);
        }
        let coeffs = self.coefficients_in(v);
        let d = coeffs.len() - 1;
        if d == 0 {
            return Ok(self.clone());
        }
        // Horner in fraction-free form: R <- R*num + A_n * den^(d-n)
        let mut den_pows = Vec::with_capacity(d + 1);
        den_pows.push(Self::one());
        for k in 1..=d {
            let next = den_pows[k - 1].mul(den);
            den_pows.push(next);
        }
        let mut r = coeffs[d].clone();
        for n in (0..d).rev() {
            r = r.mul(num);
            if !coeffs[n].is_zero() {
                r = r.add(&coeffs[n].mul(&den_pows[d - n]));
            }
        }
        Ok(r)
    }

    /// Substitutes a polynomial for `v`.
    pub fn substitute(&self, v: VarId, value: &Self) -> Result<Self, PolyError> {
        self.substitute_ratfun(v, value, &Self::one())
    }

    /// Replaces every variable in `point` by its value.
    pub fn partial_eval(&self, point: &HashMap<VarId, C>) -> Self {
        let terms = self.terms.iter().map(|(m, c)| {
            let mut coef = c.clone();
            let mut rest = Vec::new();
            for &(v, e) in m.pairs() {
                match point.get(&v) {
                    Some(x) => coef *= num_traits::pow(x.clone(), e as usize),
                    None => rest.push((v, e)),
                }
            }
            (Mono::from_pairs(rest), coef)
        });
        Self::from_terms(terms)
    }

    pub fn eval(&self, point: &HashMap<VarId, C>) -> Result<C, PolyError> {
        let mut total = C::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for &(v, e) in m.pairs() {
                let x = point.get(&v).ok_or(PolyError::MissingBinding(v))?;
                t *= num_traits::pow(x.clone(), e as usize);
            }
            total += t;
        }
        Ok(total)
    }

    /// Exact quotient `self / divisor`, or `None` when the division leaves a remainder.
    pub fn div_exact(&self, divisor: &Self) -> Option<Self> {
        if divisor.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Self::zero());
        }
        let (lm, lc) = divisor.leading().cloned()?;
        if divisor.terms.len() == 1 {
            let inv = C::one() / lc;
            let mut terms = Vec::with_capacity(self.terms.len());
            for (m, c) in &self.terms {
                terms.push((m.div(&lm)?, c.clone() * &inv));
            }
            return Some(Self::from_sorted(terms));
        }
        let mut rem = self.clone();
        let mut quot: Vec<(Mono, C)> = Vec::new();
        while let Some((rm, rc)) = rem.leading().cloned() {
            let qm = rm.div(&lm)?;
            let qc = rc / lc.clone();
            rem = rem.sub(&divisor.mul_mono(&qm, &qc));
            quot.push((qm, qc));
        }
        // quotient terms come out in descending order
        Some(Self::from_sorted(quot))
    }

    pub fn derivative(&self, v: VarId) -> Self {
        Self::from_terms(self.terms.iter().filter_map(|(m, c)| {
            let (e, rest) = m.split_var(v);
            (e > 0).then(|| {
                let mut k = C::zero();
                for _ in 0..e {
                    k += C::one();
                }
                (rest.mul(&Mono::var_pow(v, e - 1)), c.clone() * k)
            })
        }))
    }

    /// Variables occurring with exponent exactly one everywhere they occur.
    pub fn linear_vars(&self) -> BTreeSet<VarId> {
        self.degrees().into_iter().filter(|&(_, d)| d == 1).map(|(v, _)| v).collect()
    }

    /// gcd of all monomials (largest monomial dividing every term).
    pub fn monomial_content(&self) -> Mono {
        let mut it = self.terms.iter();
        let Some(first) = it.next() else { return Mono::one() };
        let mut g = first.0.clone();
        for (m, _) in it {
            if g.is_one() {
                break;
            }
            g = g.gcd(m);
        }
        g
    }

    pub fn map_coeffs<D: Scalar>(&self, f: impl Fn(&C) -> D) -> SparsePoly<D> {
        SparsePoly::from_terms(self.terms.iter().map(|(m, c)| (m.clone(), f(c))))
    }
}

impl<C: Scalar> Add for &SparsePoly<C> {
    type Output = SparsePoly<C>;
    fn add(self, rhs: Self) -> SparsePoly<C> {
        SparsePoly::add(self, rhs)
    }
}

impl<C: Scalar> Sub for &SparsePoly<C> {
    type Output = SparsePoly<C>;
    fn sub(self, rhs: Self) -> SparsePoly<C> {
        SparsePoly::sub(self, rhs)
    }
}

impl<C: Scalar> Mul for &SparsePoly<C> {
    type Output = SparsePoly<C>;
    fn mul(self, rhs: Self) -> SparsePoly<C> {
        SparsePoly::mul(self, rhs)
    }
}

impl<C: Scalar> Neg for &SparsePoly<C> {
    type Output = SparsePoly<C>;
    fn neg(self) -> SparsePoly<C> {
        SparsePoly::neg(self)
    }
}

impl<C: Scalar> fmt::Display for SparsePoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let neg = *c < C::zero();
            let abs = if neg { -c.clone() } else { c.clone() };
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if m.is_one() {
                write!(f, "{abs}")?;
            } else if abs.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{abs}*{m}")?;
            }
        }
        Ok(())
    }
}

impl<C: Scalar> fmt::Debug for SparsePoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly({self})")
    }
}
