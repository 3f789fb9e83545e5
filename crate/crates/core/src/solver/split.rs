//! Partial splitting of an equation `P = sum A_n u^n` with respect to one
//! variable `u`, and the ranking of `(equation, variable)` pairs.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::case::{CaseNode, InequalitySet};
use crate::factor::try_factor;
use crate::poly::VarId;
use crate::Poly;

/// Coefficients larger than this are not factored by the module 90 filter.
const FILTER_FACTOR_LIMIT: usize = 300;

/// Full split: every coefficient `A_n` vanishes, `u` becomes free.
pub fn method1_system(p: &Poly, v: VarId) -> Vec<Poly> {
    p.coefficients_in(v).into_iter().filter(|c| !c.is_zero()).collect()
}

/// `A_n = 0` for `n >= 2` together with `A_0 + A_1 u = 0`.
pub fn method2_system(p: &Poly, v: VarId) -> Vec<Poly> {
    let coeffs = p.coefficients_in(v);
    let mut out: Vec<Poly> = coeffs.iter().skip(2).filter(|c| !c.is_zero()).cloned().collect();
    let low = low_part(&coeffs, v);
    if !low.is_zero() {
        out.push(low);
    }
    out
}

/// `sum_{n >= 2} A_n u^(n-2) = 0` together with `A_0 + A_1 u = 0`.
pub fn method3_system(p: &Poly, v: VarId) -> Vec<Poly> {
    let coeffs = p.coefficients_in(v);
    let mut out = Vec::new();
    let quotient = quotient_part(&coeffs, v);
    if !quotient.is_zero() {
        out.push(quotient);
    }
    let low = low_part(&coeffs, v);
    if !low.is_zero() {
        out.push(low);
    }
    out
}

/// `A_0 + A_1 u`.
pub fn low_part(coeffs: &[Poly], v: VarId) -> Poly {
    let a0 = coeffs.first().cloned().unwrap_or_else(Poly::zero);
    let a1 = coeffs.get(1).cloned().unwrap_or_else(Poly::zero);
    a0.add(&a1.mul(&Poly::var(v)))
}

/// `sum_{n >= 2} A_n u^(n-2)`.
pub fn quotient_part(coeffs: &[Poly], v: VarId) -> Poly {
    let mut q = Poly::zero();
    for (n, c) in coeffs.iter().enumerate().skip(2) {
        if !c.is_zero() {
            q = q.add(&c.mul(&Poly::var(v).pow(n as u32 - 2)));
        }
    }
    q
}

/// Lexicographic ranking key; smaller is better.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SplitScore {
    pub eq_vars: usize,
    pub eq_terms: usize,
    pub d: u32,
    pub a1_terms: usize,
    pub a0_terms: usize,
    pub a01_vars: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitCandidate {
    pub eq_index: usize,
    pub var: VarId,
    pub d: u32,
    pub score: SplitScore,
}

/// All pairs `(P, u)` with `deg_u P >= 2`, best first. Ties go to the lower
/// variable index, then the earlier equation.
pub fn rank_split_candidates(node: &CaseNode) -> Vec<SplitCandidate> {
    let mut out = Vec::new();
    for (i, eq) in node.equations.iter().enumerate() {
        for (&v, &d) in &eq.props().degrees {
            if d < 2 {
                continue;
            }
            let a0 = eq.poly().coeff_wrt(v, 0);
            let a1 = eq.poly().coeff_wrt(v, 1);
            let mut vars: BTreeSet<VarId> = a0.vars();
            vars.extend(a1.vars());
            out.push(SplitCandidate {
                eq_index: i,
                var: v,
                d,
                score: SplitScore {
                    eq_vars: eq.var_count(),
                    eq_terms: eq.term_count(),
                    d,
                    a1_terms: a1.term_count(),
                    a0_terms: a0.term_count(),
                    a01_vars: vars.len(),
                },
            });
        }
    }
    out.sort_by(|a, b| a.score.cmp(&b.score).then(a.var.cmp(&b.var)).then(a.eq_index.cmp(&b.eq_index)));
    out
}

/// First equation (with the linear variable) on which a substitution is
/// possible, if any.
pub fn linear_hint(node: &CaseNode) -> Option<(usize, VarId)> {
    node.equations
        .iter()
        .enumerate()
        .find_map(|(i, e)| e.props().linear_vars.iter().next().map(|v| (i, *v)))
}

fn linear_in_some_var(p: &Poly) -> bool {
    p.degrees().values().any(|&d| d == 1)
}

/// Module 90's filter: `Err` with the reason a pair is discarded.
pub fn filter_coeff_split(node: &CaseNode, cand: &SplitCandidate) -> Result<(), String> {
    let p = node.equations[cand.eq_index].poly();
    let ineq: &InequalitySet = &node.inequalities;
    for (n, a) in p.coefficients_in(cand.var).iter().enumerate().skip(2) {
        if a.is_zero() {
            continue;
        }
        if ineq.is_known_nonzero(a) {
            return Err(format!("coefficient of {}^{} is known nonzero", cand.var, n));
        }
        if linear_in_some_var(a) {
            continue;
        }
        let factor_ok = a.term_count() <= FILTER_FACTOR_LIMIT
            && try_factor(a)
                .map(|f| f.is_nontrivial() && f.factors.iter().any(|(g, _)| linear_in_some_var(g)))
                .unwrap_or(false);
        if !factor_ok {
            return Err(format!("coefficient of {}^{} and its factors are nonlinear in every variable", cand.var, n));
        }
    }
    Ok(())
}

/// Survivors of module 90's filter, in rank order.
pub fn coeff_split_candidates(node: &CaseNode) -> Vec<SplitCandidate> {
    rank_split_candidates(node).into_iter().filter(|c| filter_coeff_split(node, c).is_ok()).collect()
}

/// Candidates usable by module 91 (`A_1` not identically zero), in rank order.
pub fn split_once_candidates(node: &CaseNode) -> Vec<SplitCandidate> {
    rank_split_candidates(node).into_iter().filter(|c| c.score.a1_terms > 0).collect()
}

/// Module 90's automatic choice: the shortest equation with a surviving pair,
/// then the best pair on it.
pub fn auto_coeff_split(cands: &[SplitCandidate]) -> Option<&SplitCandidate> {
    let best_eq = cands.iter().min_by_key(|c| (c.score.eq_terms, c.score.eq_vars, c.eq_index))?.eq_index;
    cands.iter().find(|c| c.eq_index == best_eq)
}
