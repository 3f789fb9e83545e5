//! The step modules. Each takes a case snapshot and reports whether it
//! applied, together with the resulting case or children.

use super::module::ModuleId;
use super::split::{
    auto_coeff_split, coeff_split_candidates, linear_hint, method1_system, method2_system, rank_split_candidates,
    split_once_candidates, SplitCandidate,
};
use crate::case::{Assumption, AssumptionKind, CaseNode, CaseStatus, TodoEntry};
use crate::factor::{discriminant_square_root, try_factor, univ_rational_roots};
use crate::poly::VarId;
use crate::scalar::Rat;
use crate::{Mono, Poly};

/// Options that influence a single module application.
#[derive(Debug, Clone, Copy, Default)]
pub struct StepCtx {
    /// Explore nonzero branches induced by module 91.
    pub explore_nonzero: bool,
    /// Index into the module's candidate list (interactive choice).
    pub candidate: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Effect {
    /// The case continues with new contents (same id).
    Update(CaseNode),
    /// The case is replaced by these children.
    Children(Vec<CaseNode>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub applied: bool,
    pub note: String,
    /// Present whenever the case changed, even if the module did not apply
    /// (module 77 caches negative results).
    pub effect: Option<Effect>,
}

impl StepResult {
    fn applied(note: impl Into<String>, effect: Effect) -> StepResult {
        StepResult { applied: true, note: note.into(), effect: Some(effect) }
    }

    fn not_applicable(reason: impl Into<String>) -> StepResult {
        StepResult { applied: false, note: reason.into(), effect: None }
    }
}

pub fn run_module(m: ModuleId, node: &CaseNode, ctx: &StepCtx) -> StepResult {
    if !node.is_open() && node.status != CaseStatus::AwaitingInteraction {
        return StepResult::not_applicable(format!("case is {}", node.status));
    }
    match m {
        ModuleId::Todo => step_todo(node, ctx),
        ModuleId::Rationality => step_rationality(node),
        ModuleId::SubstSafe => step_subst_safe(node),
        ModuleId::FactorTest => step_factor_test(node),
        ModuleId::FactorCase => step_factor_case(node),
        ModuleId::SubstCase => step_subst_case(node),
        ModuleId::Yield => step_yield(node),
        ModuleId::SplitCoeff => step_partial_split_coeff(node, ctx.candidate),
        ModuleId::SplitOnce => step_partial_split_once(node, ctx.candidate),
        ModuleId::FullSplit => step_full_split(node, ctx.candidate),
    }
}

fn constant_poly(r: &Rat) -> Poly {
    Poly::constant(r.clone())
}

/// Module 1.
pub fn step_todo(node: &CaseNode, ctx: &StepCtx) -> StepResult {
    let mut next = node.clone();
    let Some(entry) = next.todo.pop_front() else {
        return StepResult::not_applicable("to-do list is empty");
    };
    let idx = next.find_equation(entry.target());
    match (&entry, idx) {
        (TodoEntry::FactorTest(_), Some(i)) => {
            let f = factor_equation(&mut next, i);
            next.simplify_in_place();
            StepResult::applied(format!("factor test: {f}"), Effect::Update(next))
        }
        (TodoEntry::FactorCase(_), Some(i)) => match factor_case_children(&next, i) {
            Some(children) => StepResult::applied(format!("factor case split into {}", children.len()), Effect::Children(children)),
            None => StepResult::applied("stale factor case entry dropped", Effect::Update(next)),
        },
        (TodoEntry::Rationality(_), Some(i)) if next.equations[i].is_univariate() => rationality_on(&next, i, false),
        (TodoEntry::Branch(q), _) => match next.branch(q) {
            Ok((zero, mut nonzero)) => {
                if !ctx.explore_nonzero && nonzero.is_open() {
                    nonzero.status = CaseStatus::Deferred;
                    nonzero.reason = "nonzero branch of an induced split".into();
                }
                StepResult::applied(format!("branch on {q}"), Effect::Children(vec![zero, nonzero]))
            }
            Err(e) => StepResult::applied(format!("branch entry dropped: {e}"), Effect::Update(next)),
        },
        _ => StepResult::applied(format!("stale entry dropped: {entry}"), Effect::Update(next)),
    }
}

/// Runs the factor test on equation `i` and caches the result.
fn factor_equation(node: &mut CaseNode, i: usize) -> String {
    match try_factor(node.equations[i].poly()) {
        Ok(f) => {
            let s = format!("{} factors, {}", f.factors.len(), f.status);
            node.set_factors(i, f);
            s
        }
        Err(e) => e.to_string(),
    }
}

/// Module 89.
pub fn step_rationality(node: &CaseNode) -> StepResult {
    let pick = node
        .equations
        .iter()
        .enumerate()
        .filter(|(_, e)| e.is_univariate())
        .min_by_key(|(i, e)| (e.props().degrees.values().next().copied().unwrap_or(0), e.term_count(), *i))
        .map(|(i, _)| i);
    match pick {
        Some(i) => rationality_on(node, i, true),
        None => StepResult::not_applicable("no equation in a single variable"),
    }
}

fn root_binding_child(node: &CaseNode, k: u32, v: VarId, r: &Rat) -> CaseNode {
    let mut child = node.child(k);
    let lin = Poly::var(v).sub(&constant_poly(r));
    child.assumptions.push(Assumption { poly: lin.primitive_normalized(), kind: AssumptionKind::Zero });
    child.bind_in_place(v, &constant_poly(r), &Poly::one()).expect("constant binding");
    child
}

fn rationality_on(node: &CaseNode, i: usize, queue_factor_test: bool) -> StepResult {
    let eq = &node.equations[i];
    let v = *eq.props().vars.iter().next().expect("univariate");
    let d = eq.degree_in(v);
    let p = eq.poly().clone();
    let coeff = |n: u32| p.coeff_wrt(v, n).as_constant().expect("univariate");
    match d {
        1 => {
            let next = node.bind(v, &constant_poly(&-coeff(0)), &constant_poly(&coeff(1))).expect("constant denominator");
            StepResult::applied(format!("linear in {v}: {}", next.bindings.last().unwrap()), Effect::Update(next))
        }
        2 => match discriminant_square_root(&coeff(2), &coeff(1), &coeff(0)).expect("quadratic") {
            None => {
                let mut next = node.clone();
                next.close(CaseStatus::NoRationalSolution, format!("{p} has no rational root"));
                StepResult::applied("irrational roots", Effect::Update(next))
            }
            Some((r1, r2)) if r1 == r2 => {
                let next = node.bind(v, &constant_poly(&r1), &Poly::one()).expect("constant binding");
                StepResult::applied(format!("double root {v} = {r1}"), Effect::Update(next))
            }
            Some((r1, r2)) => {
                let (lo, hi) = if r1 < r2 { (r1, r2) } else { (r2, r1) };
                let children = vec![root_binding_child(node, 1, v, &lo), root_binding_child(node, 2, v, &hi)];
                StepResult::applied(format!("{v} in {{{lo}, {hi}}}"), Effect::Children(children))
            }
        },
        _ => {
            if eq.factors().is_none() && queue_factor_test {
                let mut next = node.clone();
                next.todo.push_back(TodoEntry::FactorTest(p.clone()));
                next.todo.push_back(TodoEntry::Rationality(p.clone()));
                return StepResult::applied("factor test queued", Effect::Update(next));
            }
            let roots = univ_rational_roots(&p).expect("univariate");
            let mut leftover = p.clone();
            let mut linear = Vec::new();
            for r in &roots {
                let lin = Poly::from_terms([
                    (Mono::var(v), Rat::from_integer(r.denom().clone())),
                    (Mono::one(), Rat::from_integer(-r.numer().clone())),
                ]);
                while let Some(q) = leftover.div_exact(&lin) {
                    leftover = q;
                }
                linear.push(lin);
            }
            if roots.is_empty() {
                let mut next = node.clone();
                next.close(CaseStatus::NoRationalSolution, format!("{p} has no rational root"));
                return StepResult::applied("no rational roots", Effect::Update(next));
            }
            if roots.len() == 1 && leftover.is_constant() {
                let next = node.bind(v, &constant_poly(&roots[0]), &Poly::one()).expect("constant binding");
                return StepResult::applied(format!("single root {v} = {}", roots[0]), Effect::Update(next));
            }
            let mut children: Vec<CaseNode> =
                roots.iter().enumerate().map(|(k, r)| root_binding_child(node, k as u32 + 1, v, r)).collect();
            if !leftover.is_constant() {
                let mut rest = node.child(roots.len() as u32 + 1);
                rest.remove_equation(i);
                for lin in &linear {
                    rest.assumptions.push(Assumption { poly: lin.primitive_normalized(), kind: AssumptionKind::Nonzero });
                    rest.add_nonzero(lin);
                }
                rest.add_equation(&leftover);
                rest.simplify_in_place();
                children.push(rest);
            }
            let list: Vec<String> = roots.iter().map(|r| r.to_string()).collect();
            StepResult::applied(format!("{v} in {{{}}}", list.join(", ")), Effect::Children(children))
        }
    }
}

/// Rough size of the system after substituting `v` by an expression of
/// `k` terms.
fn substitution_cost(node: &CaseNode, v: VarId, k: usize) -> f64 {
    node.equations
        .iter()
        .filter(|e| e.props().vars.contains(&v))
        .map(|e| e.term_count() as f64 * (k as f64).powi(e.degree_in(v) as i32))
        .sum()
}

struct LinearPick {
    eq: usize,
    var: VarId,
    a: Poly,
    b: Poly,
}

fn linear_pairs(node: &CaseNode) -> impl Iterator<Item = LinearPick> + '_ {
    node.equations.iter().enumerate().flat_map(|(i, e)| {
        e.props().linear_vars.iter().map(move |&v| LinearPick {
            eq: i,
            var: v,
            a: e.poly().coeff_wrt(v, 1),
            b: e.poly().coeff_wrt(v, 0),
        })
    })
}

/// Module 20.
pub fn step_subst_safe(node: &CaseNode) -> StepResult {
    let best = linear_pairs(node)
        .filter(|lp| node.inequalities.is_known_nonzero(&lp.a))
        .map(|lp| {
            let cost = substitution_cost(node, lp.var, lp.a.term_count() + lp.b.term_count());
            let key = (cost, node.equations[lp.eq].term_count(), lp.var, lp.eq);
            (key, lp)
        })
        .min_by(|x, y| x.0.partial_cmp(&y.0).expect("finite"));
    let Some((_, lp)) = best else {
        return StepResult::not_applicable("no linear variable with a known nonzero coefficient");
    };
    let next = node.bind(lp.var, &lp.b.neg(), &lp.a).expect("known nonzero denominator");
    StepResult::applied(format!("{}", next.bindings.last().unwrap()), Effect::Update(next))
}

/// Module 21.
pub fn step_subst_case(node: &CaseNode) -> StepResult {
    let best = linear_pairs(node)
        .filter(|lp| !lp.a.is_constant() && !node.inequalities.is_known_nonzero(&lp.a))
        .map(|lp| {
            let cost = substitution_cost(node, lp.var, lp.a.term_count() + lp.b.term_count());
            let key = (lp.a.term_count(), cost, node.equations[lp.eq].term_count(), lp.var, lp.eq);
            (key, lp)
        })
        .min_by(|x, y| x.0.partial_cmp(&y.0).expect("finite"));
    let Some((_, lp)) = best else {
        return StepResult::not_applicable("no linear variable with an undetermined coefficient");
    };
    let a_norm = lp.a.primitive_normalized();
    let mut zero = node.child(1);
    zero.assumptions.push(Assumption { poly: a_norm.clone(), kind: AssumptionKind::Zero });
    zero.remove_equation(lp.eq);
    zero.add_equation(&lp.a);
    zero.add_equation(&lp.b);
    zero.simplify_in_place();

    let mut nonzero = node.child(2);
    nonzero.assumptions.push(Assumption { poly: a_norm.clone(), kind: AssumptionKind::Nonzero });
    nonzero.add_nonzero(&lp.a);
    if nonzero.is_open() {
        nonzero.bind_in_place(lp.var, &lp.b.neg(), &lp.a).expect("denominator recorded");
    }
    StepResult::applied(format!("{} = 0 or {} = -({})/({})", a_norm, lp.var, lp.b, lp.a), Effect::Children(vec![zero, nonzero]))
}

/// Module 77.
pub fn step_factor_test(node: &CaseNode) -> StepResult {
    let mut order: Vec<usize> = (0..node.equations.len()).filter(|&i| node.equations[i].factors().is_none()).collect();
    if order.is_empty() {
        return StepResult::not_applicable("every equation has been tested");
    }
    order.sort_by_key(|&i| (node.equations[i].term_count(), i));
    let mut next = node.clone();
    let mut tested = 0;
    for i in order {
        tested += 1;
        let Ok(f) = try_factor(next.equations[i].poly()) else { continue };
        let nontrivial = f.is_nontrivial();
        let summary = format!("{} factors, {}", f.factors.len(), f.status);
        next.set_factors(i, f);
        if nontrivial {
            let eq_text = next.equations[i].poly().to_string();
            next.simplify_in_place();
            return StepResult::applied(format!("{eq_text}: {summary}"), Effect::Update(next));
        }
    }
    StepResult {
        applied: false,
        note: format!("{tested} equations tested, none factorizable"),
        effect: Some(Effect::Update(next)),
    }
}

/// Children for the factor case distinction on equation `i`.
fn factor_case_children(node: &CaseNode, i: usize) -> Option<Vec<CaseNode>> {
    let f = node.equations[i].factors()?;
    if f.factors.len() < 2 {
        return None;
    }
    let mut factors: Vec<Poly> = f.factors.iter().map(|(g, _)| g.clone()).collect();
    factors.sort_by(|a, b| (a.total_degree(), a.term_count(), a.terms()).cmp(&(b.total_degree(), b.term_count(), b.terms())));
    let mut children = Vec::with_capacity(factors.len());
    for (j, fj) in factors.iter().enumerate() {
        let mut child = node.child(j as u32 + 1);
        child.remove_equation(i);
        for earlier in &factors[..j] {
            child.assumptions.push(Assumption { poly: earlier.clone(), kind: AssumptionKind::Nonzero });
            child.add_nonzero(earlier);
        }
        child.assumptions.push(Assumption { poly: fj.clone(), kind: AssumptionKind::Zero });
        child.add_equation(fj);
        child.simplify_in_place();
        children.push(child);
    }
    Some(children)
}

/// Module 47.
pub fn step_factor_case(node: &CaseNode) -> StepResult {
    let pick = node
        .equations
        .iter()
        .enumerate()
        .filter(|(_, e)| e.factors().map(|f| f.factors.len() >= 2).unwrap_or(false))
        .min_by_key(|(i, e)| (e.term_count(), *i))
        .map(|(i, _)| i);
    let Some(i) = pick else {
        return StepResult::not_applicable("no equation with two or more known factors");
    };
    let children = factor_case_children(node, i).expect("factored");
    StepResult::applied(
        format!("{} factors of {}", children.len(), node.equations[i].poly()),
        Effect::Children(children),
    )
}

/// Module 38.
pub fn step_yield(node: &CaseNode) -> StepResult {
    let mut next = node.clone();
    let cands = rank_split_candidates(node).len();
    next.status = CaseStatus::AwaitingInteraction;
    next.reason = format!("stopped for interaction; {cands} split candidates");
    StepResult::applied(next.reason.clone(), Effect::Update(next))
}

fn linear_gate(node: &CaseNode) -> Option<String> {
    linear_hint(node).map(|(i, v)| {
        format!("equation {} is linear in {v}; a substitution is possible", i + 1)
    })
}

fn choose(cands: &[SplitCandidate], index: Option<usize>) -> Result<&SplitCandidate, String> {
    match index {
        Some(k) => cands.get(k).ok_or_else(|| format!("candidate {k} out of range ({} available)", cands.len())),
        None => cands.first().ok_or_else(|| "no candidates".to_string()),
    }
}

/// Replaces equation `i` by `system`, caching nothing.
fn replace_equation(node: &CaseNode, i: usize, system: &[Poly]) -> CaseNode {
    let mut next = node.clone();
    next.remove_equation(i);
    for p in system {
        next.add_equation(p);
    }
    next.simplify_in_place();
    next
}

/// Module 90 (method 2).
pub fn step_partial_split_coeff(node: &CaseNode, index: Option<usize>) -> StepResult {
    if let Some(reason) = linear_gate(node) {
        return StepResult::not_applicable(reason);
    }
    let cands = coeff_split_candidates(node);
    let pick = match index {
        Some(_) => choose(&cands, index),
        None => auto_coeff_split(&cands).ok_or_else(|| "no pair survives the coefficient filter".to_string()),
    };
    let cand = match pick {
        Ok(c) => c.clone(),
        Err(e) => return StepResult::not_applicable(e),
    };
    let p = node.equations[cand.eq_index].poly().clone();
    let system = method2_system(&p, cand.var);
    let next = replace_equation(node, cand.eq_index, &system);
    let sizes: Vec<String> = system.iter().map(|q| q.term_count().to_string()).collect();
    StepResult::applied(
        format!("split {}-term equation w.r.t. {} into terms [{}]", p.term_count(), cand.var, sizes.join(", ")),
        Effect::Update(next),
    )
}

/// Module 91 (method 3): queues the induced branch on `A_0 + A_1 u`.
pub fn step_partial_split_once(node: &CaseNode, index: Option<usize>) -> StepResult {
    if let Some(reason) = linear_gate(node) {
        return StepResult::not_applicable(reason);
    }
    let cands = split_once_candidates(node);
    let cand = match choose(&cands, index) {
        Ok(c) => c.clone(),
        Err(e) => return StepResult::not_applicable(e),
    };
    let p = node.equations[cand.eq_index].poly();
    let coeffs = p.coefficients_in(cand.var);
    let q = super::split::low_part(&coeffs, cand.var);
    let mut next = node.clone();
    next.todo.push_front(TodoEntry::Branch(q.clone()));
    StepResult::applied(format!("branch on {q} queued"), Effect::Update(next))
}

/// Method 1, interactive only.
pub fn step_full_split(node: &CaseNode, index: Option<usize>) -> StepResult {
    let cands = rank_split_candidates(node);
    let cand = match choose(&cands, index) {
        Ok(c) => c.clone(),
        Err(e) => return StepResult::not_applicable(e),
    };
    let p = node.equations[cand.eq_index].poly().clone();
    let system = method1_system(&p, cand.var);
    let next = replace_equation(node, cand.eq_index, &system);
    StepResult::applied(format!("full split w.r.t. {} into {} equations", cand.var, system.len()), Effect::Update(next))
}

/// Full split of equation `i` w.r.t. `v`, without the candidate machinery.
pub fn full_split_at(node: &CaseNode, i: usize, v: VarId) -> CaseNode {
    let p = node.equations[i].poly().clone();
    replace_equation(node, i, &method1_system(&p, v))
}
