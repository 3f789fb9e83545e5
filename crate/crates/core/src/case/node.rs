use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::equation::Equation;
use super::ineq::InequalitySet;
use crate::factor::Factorization;
use crate::poly::VarId;
use crate::Poly;

/// Path label of a case: empty for the root, `1.2.2` for a grandchild.
/// The derived order is depth-first preorder.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct CaseId(pub Vec<u32>);

impl CaseId {
    pub fn root() -> CaseId {
        CaseId(Vec::new())
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, k: u32) -> CaseId {
        let mut v = self.0.clone();
        v.push(k);
        CaseId(v)
    }

    pub fn parent(&self) -> Option<CaseId> {
        if self.0.is_empty() {
            None
        } else {
            Some(CaseId(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn is_ancestor_of(&self, other: &CaseId) -> bool {
        other.0.len() > self.0.len() && other.0.starts_with(&self.0)
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("root");
        }
        for (i, k) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{k}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid case id {0:?}")]
pub struct CaseIdError(pub String);

impl FromStr for CaseId {
    type Err = CaseIdError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "root" {
            return Ok(CaseId::root());
        }
        s.split('.')
            .map(|part| part.parse::<u32>().ok().filter(|&k| k > 0))
            .collect::<Option<Vec<_>>>()
            .map(CaseId)
            .ok_or_else(|| CaseIdError(s.to_string()))
    }
}

impl Serialize for CaseId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for CaseId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseStatus {
    Open,
    /// A nonzero branch left unexplored by scheduler policy.
    Deferred,
    /// Split into children.
    Branched,
    AwaitingInteraction,
    Solved,
    NoRationalSolution,
    Contradictory,
    ResourceLimit,
}

impl CaseStatus {
    pub const ALL: [CaseStatus; 8] = [
        CaseStatus::Open,
        CaseStatus::Deferred,
        CaseStatus::Branched,
        CaseStatus::AwaitingInteraction,
        CaseStatus::Solved,
        CaseStatus::NoRationalSolution,
        CaseStatus::Contradictory,
        CaseStatus::ResourceLimit,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CaseStatus::Open => "open",
            CaseStatus::Deferred => "deferred",
            CaseStatus::Branched => "branched",
            CaseStatus::AwaitingInteraction => "awaiting-interaction",
            CaseStatus::Solved => "solved",
            CaseStatus::NoRationalSolution => "no-rational-solution",
            CaseStatus::Contradictory => "contradictory",
            CaseStatus::ResourceLimit => "resource-limit",
        }
    }

    pub fn parse(s: &str) -> Option<CaseStatus> {
        CaseStatus::ALL.into_iter().find(|st| st.as_str() == s)
    }

    /// Leaves that no module will touch again.
    pub fn is_closed(self) -> bool {
        matches!(
            self,
            CaseStatus::Solved | CaseStatus::NoRationalSolution | CaseStatus::Contradictory | CaseStatus::ResourceLimit
        )
    }
}

impl fmt::Display for CaseStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AssumptionKind {
    Zero,
    Nonzero,
}

/// A fact introduced when the case was created.
#[derive(Debug, Clone, PartialEq)]
pub struct Assumption {
    pub poly: Poly,
    pub kind: AssumptionKind,
}

impl fmt::Display for Assumption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            AssumptionKind::Zero => write!(f, "{} = 0", self.poly),
            AssumptionKind::Nonzero => write!(f, "{} != 0", self.poly),
        }
    }
}

/// `var = num / den`, with `den` recorded as nonzero in the owning case.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Binding {
    pub var: VarId,
    pub num: Poly,
    pub den: Poly,
}

impl Binding {
    /// Scales so that `den` has coprime integer coefficients and a positive
    /// leading coefficient.
    pub fn normalized(var: VarId, num: &Poly, den: &Poly) -> Binding {
        let mut c = den.rational_content();
        if den.leading().map(|t| t.1.is_negative()).unwrap_or(false) {
            c = -c;
        }
        if c.is_one() {
            return Binding { var, num: num.clone(), den: den.clone() };
        }
        let inv = crate::Rat::one() / c;
        Binding { var, num: num.scale(&inv), den: den.scale(&inv) }
    }

    pub fn terms(&self) -> usize {
        self.num.term_count() + self.den.term_count()
    }
}

impl fmt::Display for Binding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.as_constant().map(|c| c.is_one()).unwrap_or(false) {
            write!(f, "{} = {}", self.var, self.num)
        } else {
            write!(f, "{} = ({}) / ({})", self.var, self.num, self.den)
        }
    }
}

/// Urgent work queued for module 1.
#[derive(Debug, Clone, PartialEq)]
pub enum TodoEntry {
    /// Run the factor test on this equation.
    FactorTest(Poly),
    /// Start the factor case distinction on this equation.
    FactorCase(Poly),
    /// Re-run the rationality test on this equation.
    Rationality(Poly),
    /// Split into `p = 0` and `p != 0`.
    Branch(Poly),
}

impl TodoEntry {
    pub fn target(&self) -> &Poly {
        match self {
            TodoEntry::FactorTest(p) | TodoEntry::FactorCase(p) | TodoEntry::Rationality(p) | TodoEntry::Branch(p) => p,
        }
    }

    pub fn keyword(&self) -> &'static str {
        match self {
            TodoEntry::FactorTest(_) => "77",
            TodoEntry::FactorCase(_) => "47",
            TodoEntry::Rationality(_) => "89",
            TodoEntry::Branch(_) => "branch",
        }
    }

    pub fn from_parts(keyword: &str, p: Poly) -> Option<TodoEntry> {
        Some(match keyword {
            "77" => TodoEntry::FactorTest(p),
            "47" => TodoEntry::FactorCase(p),
            "89" => TodoEntry::Rationality(p),
            "branch" => TodoEntry::Branch(p),
            _ => return None,
        })
    }
}

impl fmt::Display for TodoEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.keyword(), self.target())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CaseError {
    #[error("denominator {0} is not known to be nonzero")]
    DenominatorNotNonzero(String),
    #[error("variable {0} is already bound")]
    AlreadyBound(VarId),
    #[error("binding for {0} refers to itself")]
    SelfReference(VarId),
    #[error("cannot branch on a constant")]
    ConstantBranch,
    #[error("{0} is already decided in this case")]
    AlreadyDecided(String),
}

/// One node of the case tree. Operations return new nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseNode {
    pub id: CaseId,
    pub parent: Option<CaseId>,
    pub assumptions: Vec<Assumption>,
    pub equations: Vec<Equation>,
    pub inequalities: InequalitySet,
    pub bindings: Vec<Binding>,
    pub status: CaseStatus,
    pub todo: VecDeque<TodoEntry>,
    pub children: Vec<CaseId>,
    /// Why the case is closed, when it is.
    pub reason: String,
}

impl CaseNode {
    /// Root case of a new session.
    pub fn root(equations: &[Poly], inequalities: &[Poly], or_groups: &[Vec<Poly>]) -> CaseNode {
        let mut node = CaseNode {
            id: CaseId::root(),
            parent: None,
            assumptions: Vec::new(),
            equations: Vec::new(),
            inequalities: InequalitySet::new(),
            bindings: Vec::new(),
            status: CaseStatus::Open,
            todo: VecDeque::new(),
            children: Vec::new(),
            reason: String::new(),
        };
        for p in inequalities {
            node.add_nonzero(p);
        }
        for g in or_groups {
            if node.inequalities.insert_or_group(g).is_err() {
                node.close(CaseStatus::Contradictory, "empty OR-group");
            }
        }
        for p in equations {
            node.add_equation(p);
        }
        node.simplify_in_place();
        node
    }

    /// A fresh open child `k` carrying this node's state.
    pub fn child(&self, k: u32) -> CaseNode {
        CaseNode {
            id: self.id.child(k),
            parent: Some(self.id.clone()),
            assumptions: Vec::new(),
            equations: self.equations.clone(),
            inequalities: self.inequalities.clone(),
            bindings: self.bindings.clone(),
            status: CaseStatus::Open,
            todo: self.todo.clone(),
            children: Vec::new(),
            reason: String::new(),
        }
    }

    pub fn is_open(&self) -> bool {
        self.status == CaseStatus::Open
    }

    pub fn close(&mut self, status: CaseStatus, reason: impl Into<String>) {
        if !self.status.is_closed() {
            self.status = status;
            self.reason = reason.into();
        }
    }

    pub fn bound_vars(&self) -> BTreeSet<VarId> {
        self.bindings.iter().map(|b| b.var).collect()
    }

    pub fn vars(&self) -> BTreeSet<VarId> {
        let mut out = BTreeSet::new();
        for e in &self.equations {
            out.extend(e.props().vars.iter().copied());
        }
        out
    }

    pub fn total_terms(&self) -> usize {
        self.equations.iter().map(|e| e.term_count()).sum()
    }

    pub fn max_terms(&self) -> usize {
        self.equations.iter().map(|e| e.term_count()).max().unwrap_or(0)
    }

    /// Index of the equation equal to `p` after normalization.
    pub fn find_equation(&self, p: &Poly) -> Option<usize> {
        let q = p.primitive_normalized();
        self.equations.iter().position(|e| *e.poly() == q)
    }

    /// Adds `p = 0`; zero is dropped, nonzero constants close the case.
    pub fn add_equation(&mut self, p: &Poly) {
        let Some(eq) = Equation::new(p) else { return };
        if eq.is_constant() {
            self.close(CaseStatus::Contradictory, "nonzero constant equation");
            return;
        }
        if self.equations.iter().any(|e| e.poly() == eq.poly()) {
            return;
        }
        if self.inequalities.decide_zero(eq.poly()).is_err() {
            self.close(CaseStatus::Contradictory, format!("{} is known nonzero", eq.poly()));
        }
        self.equations.push(eq);
    }

    pub fn add_nonzero(&mut self, p: &Poly) {
        if self.inequalities.insert_nonzero(p).is_err() {
            self.close(CaseStatus::Contradictory, "zero asserted nonzero");
        }
    }

    pub fn remove_equation(&mut self, idx: usize) -> Equation {
        self.equations.remove(idx)
    }

    pub fn set_factors(&mut self, idx: usize, f: Factorization) {
        self.equations[idx].set_factors(f);
    }

    /// Eliminates `v := num/den` everywhere.
    pub fn bind(&self, v: VarId, num: &Poly, den: &Poly) -> Result<CaseNode, CaseError> {
        let mut out = self.clone();
        out.bind_in_place(v, num, den)?;
        Ok(out)
    }

    pub fn bind_in_place(&mut self, v: VarId, num: &Poly, den: &Poly) -> Result<(), CaseError> {
        if self.bindings.iter().any(|b| b.var == v) {
            return Err(CaseError::AlreadyBound(v));
        }
        if num.contains_var(v) || den.contains_var(v) {
            return Err(CaseError::SelfReference(v));
        }
        if !self.inequalities.is_known_nonzero(den) {
            return Err(CaseError::DenominatorNotNonzero(den.to_string()));
        }
        let binding = Binding::normalized(v, num, den);
        let old = std::mem::take(&mut self.equations);
        for eq in old {
            if eq.props().vars.contains(&v) {
                let q = eq.poly().substitute_ratfun(v, &binding.num, &binding.den).expect("checked self reference");
                self.add_equation(&q);
            } else if !self.equations.iter().any(|e| e.poly() == eq.poly()) {
                self.equations.push(eq);
            }
        }
        match self.inequalities.substitute(v, &binding.num, &binding.den) {
            Ok(s) => self.inequalities = s,
            Err(_) => self.close(CaseStatus::Contradictory, format!("a nonzero fact vanishes under {binding}")),
        }
        self.add_nonzero(&binding.den);
        // equations already present may have decided OR-group members
        for i in 0..self.equations.len() {
            let p = self.equations[i].poly().clone();
            if self.inequalities.decide_zero(&p).is_err() {
                self.close(CaseStatus::Contradictory, format!("{p} is known nonzero"));
            }
        }
        self.bindings.push(binding);
        self.simplify_in_place();
        Ok(())
    }

    /// Children `p = 0` (suffix 1) and `p != 0` (suffix 2).
    pub fn branch(&self, p: &Poly) -> Result<(CaseNode, CaseNode), CaseError> {
        if p.is_constant() {
            return Err(CaseError::ConstantBranch);
        }
        let q = p.primitive_normalized();
        if self.inequalities.is_known_nonzero(&q) || self.find_equation(&q).is_some() {
            return Err(CaseError::AlreadyDecided(q.to_string()));
        }
        let mut zero = self.child(1);
        zero.assumptions.push(Assumption { poly: q.clone(), kind: AssumptionKind::Zero });
        zero.add_equation(&q);
        zero.simplify_in_place();
        let mut nonzero = self.child(2);
        nonzero.assumptions.push(Assumption { poly: q.clone(), kind: AssumptionKind::Nonzero });
        nonzero.add_nonzero(&q);
        nonzero.simplify_in_place();
        Ok((zero, nonzero))
    }

    pub fn simplify_with_inequalities(&self) -> CaseNode {
        let mut out = self.clone();
        out.simplify_in_place();
        out
    }

    /// Divides known-nonzero factors out of equations, drops duplicates,
    /// collapses decided OR-groups, and updates the status; to a fixpoint.
    pub fn simplify_in_place(&mut self) {
        loop {
            if self.status.is_closed() {
                return;
            }
            let mut changed = false;
            let mut i = 0;
            while i < self.equations.len() {
                match self.reduce_equation(i) {
                    Reduced::Same => i += 1,
                    Reduced::Contradiction(why) => {
                        self.close(CaseStatus::Contradictory, why);
                        return;
                    }
                    Reduced::Replaced(new_eq) => {
                        changed = true;
                        self.equations.remove(i);
                        if new_eq.is_constant() {
                            self.close(CaseStatus::Contradictory, "equation reduced to a nonzero constant");
                            return;
                        }
                        if !self.equations.iter().any(|e| e.poly() == new_eq.poly()) {
                            if self.inequalities.decide_zero(new_eq.poly()).is_err() {
                                self.close(CaseStatus::Contradictory, format!("{} is known nonzero", new_eq.poly()));
                                return;
                            }
                            self.equations.insert(i, new_eq);
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        if self.equations.is_empty() && self.status == CaseStatus::Open {
            self.status = CaseStatus::Solved;
        }
    }

    fn reduce_equation(&self, i: usize) -> Reduced {
        let eq = &self.equations[i];
        let ineq = &self.inequalities;
        if ineq.nonzero().contains(eq.poly()) {
            return Reduced::Contradiction(format!("{} is known nonzero", eq.poly()));
        }
        // monomial factors known nonzero
        let (mono, rest) = eq.poly().strip_monomial();
        if !mono.is_one() {
            let keep: Vec<(VarId, u32)> = mono
                .pairs()
                .iter()
                .copied()
                .filter(|&(v, _)| !ineq.nonzero().contains(&Poly::var(v)))
                .collect();
            let squarefree: Vec<(VarId, u32)> = keep.iter().map(|&(v, _)| (v, 1)).collect();
            if squarefree.as_slice() != mono.pairs() {
                let m = crate::Mono::from_pairs(squarefree);
                let new_poly = rest.mul_mono(&m, &crate::Rat::one());
                return Reduced::Replaced(Equation::new(&new_poly).expect("nonzero"));
            }
        }
        if let Some(f) = eq.factors() {
            if f.is_nontrivial() {
                let kept: Vec<&(Poly, u32)> = f.factors.iter().filter(|(g, _)| !ineq.nonzero().contains(g)).collect();
                let reducible = kept.len() < f.factors.len() || kept.iter().any(|(_, m)| *m > 1);
                if reducible {
                    let mut prod = Poly::one();
                    for (g, _) in &kept {
                        prod = prod.mul(g);
                    }
                    let mut new_eq = Equation::new(&prod).expect("nonzero");
                    if kept.len() > 1 {
                        new_eq.set_factors(Factorization {
                            content: crate::Rat::one(),
                            factors: kept.iter().map(|(g, _)| (g.clone(), 1)).collect(),
                            status: f.status,
                        });
                    }
                    return Reduced::Replaced(new_eq);
                }
            }
        }
        Reduced::Same
    }
}

enum Reduced {
    Same,
    Replaced(Equation),
    Contradiction(String),
}
