use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use super::node::{Binding, CaseId, CaseNode, CaseStatus};
use crate::factor::multivar_gcd;
use crate::poly::VarId;
use crate::scalar::Rat;
use crate::Poly;

/// gcd cancellation in back-substituted bindings is skipped above this size.
const CANCEL_TERM_LIMIT: usize = 3000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtractError {
    #[error("case {0} is not solved")]
    NotSolved(CaseId),
    #[error("original equation {index} does not vanish: residual has {terms} terms")]
    Verification { index: usize, terms: usize },
}

/// A parametric rational solution: every bound variable as a rational
/// function of the free parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionFamily {
    pub case: CaseId,
    /// Back-substituted bindings in the free parameters, ordered by variable.
    pub bindings: Vec<Binding>,
    pub free_params: Vec<VarId>,
    /// Residual nonzero conditions on the free parameters.
    pub nonzero: Vec<Poly>,
    pub or_groups: Vec<Vec<Poly>>,
    /// The case's triangular bindings in elimination order.
    pub triangular: Vec<Binding>,
}

impl SolutionFamily {
    /// Terms in all numerators and denominators.
    pub fn total_terms(&self) -> usize {
        self.bindings.iter().map(|b| b.terms()).sum()
    }

    pub fn binding(&self, v: VarId) -> Option<&Binding> {
        self.bindings.iter().find(|b| b.var == v)
    }

    /// Deduplication key: free parameters plus canonical bindings.
    pub fn key(&self) -> String {
        let mut s = String::new();
        for v in &self.free_params {
            s.push_str(&format!("{v},"));
        }
        s.push('|');
        for b in &self.bindings {
            s.push_str(&format!("{b};"));
        }
        s
    }

    /// Evaluates every bound variable at the given free-parameter values.
    /// `None` if a denominator or residual condition vanishes.
    pub fn evaluate(&self, params: &HashMap<VarId, Rat>) -> Option<BTreeMap<VarId, Rat>> {
        for p in &self.nonzero {
            if num_traits::Zero::is_zero(&p.eval(params).ok()?) {
                return None;
            }
        }
        for g in &self.or_groups {
            let mut any = false;
            for p in g {
                if !num_traits::Zero::is_zero(&p.eval(params).ok()?) {
                    any = true;
                }
            }
            if !any {
                return None;
            }
        }
        let mut out: BTreeMap<VarId, Rat> = params.iter().map(|(v, r)| (*v, r.clone())).collect();
        for b in &self.bindings {
            let d = b.den.eval(params).ok()?;
            if num_traits::Zero::is_zero(&d) {
                return None;
            }
            out.insert(b.var, b.num.eval(params).ok()? / d);
        }
        Some(out)
    }
}

impl fmt::Display for SolutionFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "family from case {} with {} free parameters", self.case, self.free_params.len())?;
        let free: Vec<String> = self.free_params.iter().map(|v| v.to_string()).collect();
        writeln!(f, "  free: {}", free.join(" "))?;
        for b in &self.bindings {
            writeln!(f, "  {b}")?;
        }
        for p in &self.nonzero {
            writeln!(f, "  {p} != 0")?;
        }
        for g in &self.or_groups {
            let parts: Vec<String> = g.iter().map(|p| p.to_string()).collect();
            writeln!(f, "  at least one nonzero: {}", parts.join(" | "))?;
        }
        Ok(())
    }
}

/// Substitutes `v := num/den` into the rational function `n/d`.
fn substitute_ratfun_pair(n: &Poly, d: &Poly, v: VarId, num: &Poly, den: &Poly) -> (Poly, Poly) {
    let dn = n.degree_in(v);
    let dd = d.degree_in(v);
    let mut n2 = n.substitute_ratfun(v, num, den).expect("triangular");
    let mut d2 = d.substitute_ratfun(v, num, den).expect("triangular");
    // n2/d2 = den^(dn - dd) * n/d
    if dn > dd {
        d2 = d2.mul(&den.pow(dn - dd));
    } else if dd > dn {
        n2 = n2.mul(&den.pow(dd - dn));
    }
    (n2, d2)
}

fn cancel(n: Poly, d: Poly) -> (Poly, Poly) {
    if n.is_zero() {
        return (n, Poly::one());
    }
    if n.term_count() > CANCEL_TERM_LIMIT || d.term_count() > CANCEL_TERM_LIMIT || d.is_constant() {
        return (n, d);
    }
    let g = multivar_gcd(&n, &d);
    if g.is_constant() {
        return (n, d);
    }
    (n.div_exact(&g).expect("gcd divides"), d.div_exact(&g).expect("gcd divides"))
}

/// Verifies a solved case against the original system and expresses its
/// bindings in the free parameters.
pub fn extract_solution(
    case: &CaseNode,
    originals: &[Poly],
    universe: &BTreeSet<VarId>,
) -> Result<SolutionFamily, ExtractError> {
    if case.status != CaseStatus::Solved {
        return Err(ExtractError::NotSolved(case.id.clone()));
    }
    // Binding k mentions only variables bound after it, so substituting in
    // elimination order clears every bound variable.
    for (index, eq) in originals.iter().enumerate() {
        let mut r = eq.clone();
        for b in &case.bindings {
            if r.contains_var(b.var) {
                r = r.substitute_ratfun(b.var, &b.num, &b.den).expect("triangular");
            }
        }
        if !r.is_zero() {
            return Err(ExtractError::Verification { index, terms: r.term_count() });
        }
    }
    let mut resolved: Vec<Binding> = Vec::with_capacity(case.bindings.len());
    for b in case.bindings.iter().rev() {
        let (mut n, mut d) = (b.num.clone(), b.den.clone());
        for later in &resolved {
            if n.contains_var(later.var) || d.contains_var(later.var) {
                (n, d) = substitute_ratfun_pair(&n, &d, later.var, &later.num, &later.den);
            }
        }
        let (n, d) = cancel(n, d);
        resolved.push(Binding::normalized(b.var, &n, &d));
    }
    resolved.sort_by_key(|b| b.var);
    let bound: BTreeSet<VarId> = resolved.iter().map(|b| b.var).collect();
    let mut all: BTreeSet<VarId> = universe.clone();
    for eq in originals {
        all.extend(eq.vars());
    }
    let free_params: Vec<VarId> = all.difference(&bound).copied().collect();
    Ok(SolutionFamily {
        case: case.id.clone(),
        bindings: resolved,
        free_params,
        nonzero: case.inequalities.nonzero().to_vec(),
        or_groups: case.inequalities.or_groups().to_vec(),
        triangular: case.bindings.clone(),
    })
}
