use std::collections::{BTreeSet, HashMap};

use proptest::prelude::*;

use super::*;
use crate::case::{CaseId, CaseNode, CaseStatus, TodoEntry};
use crate::poly::tests::{arb_point, arb_poly};
use crate::poly::{parse_poly, VarId};
use crate::scalar::{rat, Rat};
use crate::{Mono, Poly};

fn p(s: &str) -> Poly {
    parse_poly(s).unwrap()
}

fn u(k: u32) -> VarId {
    VarId(k)
}

fn eq_set(node: &CaseNode) -> BTreeSet<String> {
    node.equations.iter().map(|e| e.poly().to_string()).collect()
}

fn norm_set(ps: &[Poly]) -> BTreeSet<String> {
    ps.iter().filter(|q| !q.is_zero()).map(|q| q.primitive_normalized().to_string()).collect()
}

fn set(xs: &[&str]) -> BTreeSet<String> {
    xs.iter().map(|s| p(s).primitive_normalized().to_string()).collect()
}

fn root(eqs: &[&str], ineqs: &[&str]) -> CaseNode {
    let e: Vec<Poly> = eqs.iter().map(|s| p(s)).collect();
    let i: Vec<Poly> = ineqs.iter().map(|s| p(s)).collect();
    CaseNode::root(&e, &i, &[])
}

fn run(m: ModuleId, node: &CaseNode) -> StepResult {
    run_module(m, node, &StepCtx::default())
}

fn updated(r: &StepResult) -> &CaseNode {
    match &r.effect {
        Some(Effect::Update(n)) => n,
        other => panic!("expected an update, got {other:?}"),
    }
}

fn children(r: &StepResult) -> &[CaseNode] {
    match &r.effect {
        Some(Effect::Children(c)) => c,
        other => panic!("expected children, got {other:?}"),
    }
}

fn session(eqs: &[&str], plist: ProcList) -> Session {
    let e: Vec<Poly> = eqs.iter().map(|s| p(s)).collect();
    Session::new(SolverConfig { plist, ..SolverConfig::default() }, &e, &[], &[])
}

fn plist(s: &str) -> ProcList {
    s.parse().unwrap()
}

#[test]
fn scheduler_examples() {
    let mut s = session(&["u1 + u2"], plist("(1 89 20 77 47 21)"));
    assert_eq!(s.run().unwrap(), RunOutcome::Finished);
    assert_eq!(s.solutions().len(), 1);
    let fam = &s.solutions()[0];
    assert_eq!(fam.binding(u(1)).unwrap().to_string(), "u1 = -u2");
    assert_eq!(fam.free_params, vec![u(2)]);

    let mut s = session(&["u1^2 - 2"], ProcList::batch());
    s.run().unwrap();
    assert!(s.solutions().is_empty());
    assert_eq!(s.node(&CaseId::root()).unwrap().status, CaseStatus::NoRationalSolution);
}

#[test]
fn todo_examples() {
    let n = root(&["u1*u2 + u3"], &[]);
    let r = run(ModuleId::Todo, &n);
    assert!(!r.applied);

    let mut n = root(&["u1*u2 + u3"], &[]);
    n.todo.push_back(TodoEntry::Branch(p("u2")));
    let r = run(ModuleId::Todo, &n);
    assert!(r.applied);
    let c = children(&r);
    assert_eq!(c.len(), 2);
    assert_eq!(eq_set(&c[0]), set(&["u1*u2 + u3", "u2"]));
    assert_eq!(c[1].status, CaseStatus::Deferred);
    let r = run_module(ModuleId::Todo, &n, &StepCtx { explore_nonzero: true, candidate: None });
    assert_eq!(children(&r)[1].status, CaseStatus::Open);

    let mut n = root(&["u1^3 - u1", "u1*u2 + u3"], &[]);
    n.todo.push_back(TodoEntry::Rationality(p("u1^3 - u1")));
    let r = run(ModuleId::Todo, &n);
    assert_eq!(children(&r).len(), 3);
}

#[test]
fn rationality_examples() {
    let r = run(ModuleId::Rationality, &root(&["u1^2 - 2"], &[]));
    assert_eq!(updated(&r).status, CaseStatus::NoRationalSolution);

    let r = run(ModuleId::Rationality, &root(&["u1^2 - 9/4", "u1 - u2"], &[]));
    let c = children(&r);
    assert_eq!(c.len(), 2);
    let roots: Vec<String> = c.iter().map(|n| n.bindings[0].to_string()).collect();
    assert_eq!(roots, vec!["u1 = -3/2", "u1 = 3/2"]);
    for child in c {
        let r = run(ModuleId::Rationality, child);
        let n = updated(&r);
        assert_eq!(n.status, CaseStatus::Solved);
        assert_eq!(n.bindings[1].var, u(2));
    }

    // degree 3: the first pass queues the factor test, the to-do list then
    // produces the root cases
    let mut s = session(&["2*u1^3 - 3*u1^2 - 3*u1 + 2"], ProcList::batch());
    s.run().unwrap();
    let mut found: Vec<Rat> = s
        .solutions()
        .iter()
        .map(|f| f.binding(u(1)).unwrap().num.as_constant().unwrap())
        .collect();
    found.sort();
    let mut oracle: Vec<Rat> = Vec::new();
    for num in [-2i64, -1, 1, 2] {
        for den in [1i64, 2] {
            let r = rat(num, den);
            let v = rat(2, 1) * &r * &r * &r - rat(3, 1) * &r * &r - rat(3, 1) * &r + rat(2, 1);
            if num_traits::Zero::is_zero(&v) && !oracle.contains(&r) {
                oracle.push(r);
            }
        }
    }
    oracle.sort();
    assert_eq!(found, oracle);
    assert_eq!(found.len(), 3);
}

#[test]
fn rationality_with_leftover_factor() {
    // (u1 - 1)(u1^2 + 1): one root case and one case for the quadratic factor
    let mut n = root(&["u1^3 - u1^2 + u1 - 1"], &[]);
    let f = crate::factor::try_factor(n.equations[0].poly()).unwrap();
    n.set_factors(0, f);
    let r = run(ModuleId::Rationality, &n);
    let c = children(&r);
    assert_eq!(c.len(), 2);
    assert_eq!(c[0].status, CaseStatus::Solved);
    assert_eq!(eq_set(&c[1]), set(&["u1^2 + 1"]));
}

#[test]
fn subst_safe_examples() {
    let r = run(ModuleId::SubstSafe, &root(&["2*u1 + u2"], &[]));
    assert_eq!(updated(&r).bindings[0].to_string(), "u1 = -1/2*u2");

    // u2 has a constant coefficient here, so use a variant without one
    let r = run(ModuleId::SubstSafe, &root(&["u3*u1 + u2*u4"], &[]));
    assert!(!r.applied);

    let r = run(ModuleId::SubstSafe, &root(&["u3*u1 + u2"], &["u3"]));
    let n = updated(&r);
    assert_eq!(n.bindings[0].var, u(1));
    assert_eq!(n.bindings[0].num, p("-u2"));
    assert_eq!(n.bindings[0].den, p("u3"));
}

#[test]
fn subst_case_examples() {
    let r = run(ModuleId::SubstCase, &root(&["u3*u1 + u2"], &[]));
    let c = children(&r);
    assert_eq!(eq_set(&c[0]), set(&["u3", "u2"]));
    assert!(c[1].inequalities.is_known_nonzero(&p("u3")));
    assert_eq!(c[1].bindings[0].to_string(), "u1 = (-u2) / (u3)");

    let r = run(ModuleId::SubstCase, &root(&["u1^2 + u2^2 - 1"], &[]));
    assert!(!r.applied);

    let mut s = session(&["u3*u1 + u2", "u3 - 1"], plist("(1 21 20)"));
    s.step().unwrap();
    let first = s.trace().iter().find(|e| matches!(e, TraceEvent::Attempt { applied: true, .. })).unwrap();
    assert!(matches!(first, TraceEvent::Attempt { module: ModuleId::SubstCase, .. }));
}

#[test]
fn factor_test_examples() {
    let r = run(ModuleId::FactorTest, &root(&["u1^2 - u2^2"], &[]));
    assert!(r.applied);
    let n = updated(&r);
    let f = n.equations[0].factors().unwrap();
    assert_eq!(norm_set(&f.distinct_factors().cloned().collect::<Vec<_>>()), set(&["u1 - u2", "u1 + u2"]));

    let r = run(ModuleId::FactorTest, &root(&["u1*u2 + u3"], &[]));
    assert!(!r.applied);
    let n = updated(&r);
    assert_eq!(n.equations[0].factor_status(), Some(crate::factor::FactorStatus::IrreducibleByOurTests));
    let r = run(ModuleId::FactorTest, n);
    assert!(!r.applied);
    assert!(r.effect.is_none());
}

#[test]
fn factor_case_examples() {
    let r = run(ModuleId::FactorTest, &root(&["u1^2 - u2^2"], &[]));
    let r = run(ModuleId::FactorCase, updated(&r));
    let c = children(&r);
    assert_eq!(c.len(), 2);
    assert_eq!(eq_set(&c[0]), set(&["u1 - u2"]));
    assert_eq!(eq_set(&c[1]), set(&["u1 + u2"]));
    assert!(c[1].inequalities.is_known_nonzero(&p("u1 - u2")));

    let r = run(ModuleId::FactorTest, &root(&["u2*u1 - u2"], &[]));
    let c0 = updated(&r).clone();
    let r = run(ModuleId::FactorCase, &c0);
    let c = children(&r);
    assert_eq!(eq_set(&c[0]), set(&["u2"]));
    assert_eq!(eq_set(&c[1]), set(&["u1 - 1"]));
    assert!(c[1].inequalities.is_known_nonzero(&p("u2")));

    assert!(!run(ModuleId::FactorCase, &root(&["u1 + u2"], &[])).applied);
}

#[test]
fn ranking_examples() {
    let n = root(&["u1^2*u2*u3 + u4*u5 + u1", "u6^2 + u6*u7 + u8"], &[]);
    let c = rank_split_candidates(&n);
    assert_eq!(c[0].eq_index, 1);

    let n = root(&["u1^2 + u2^3 + u1*u2 + 1"], &[]);
    let c = rank_split_candidates(&n);
    assert_eq!((c[0].var, c[0].d), (u(1), 2));

    let n = root(&["u1^2*u3 + u2^2*u3 + u1 + u2*u3 + u2*u4 + u2*u5 + u2*u6 + u2*u7"], &[]);
    let c = rank_split_candidates(&n);
    assert_eq!(c[0].var, u(1));
    assert_eq!(c[0].score.a1_terms, 1);
    assert_eq!(c[1].score.a1_terms, 5);
}

#[test]
fn partial_split_coeff_examples() {
    assert_eq!(norm_set(&method2_system(&p("u3*u1^2 + u2*u1 + 5"), u(1))), set(&["u3", "u2*u1 + 5"]));
    // the step itself waits while u2, u3 occur linearly
    let n = root(&["u3*u1^2 + u2*u1 + 5"], &[]);
    assert!(!run(ModuleId::SplitCoeff, &n).applied);

    // u2 wins the ranking here since its A1 vanishes
    let n = root(&["u3^2*u1^2 + u2^2*u1 + 5"], &[]);
    let cands = coeff_split_candidates(&n);
    assert_eq!(cands[0].var, u(2));
    let r = run(ModuleId::SplitCoeff, &n);
    assert_eq!(eq_set(updated(&r)), set(&["u1", "u3^2*u1^2 + 5"]));

    let n = root(&["u3^2*u1^2 + u2^2*u1 + u2*u3 + 5"], &[]);
    assert_eq!(coeff_split_candidates(&n)[0].var, u(1));
    let r = run(ModuleId::SplitCoeff, &n);
    let next = updated(&r);
    assert_eq!(next.equations.len(), 2);
    assert!(eq_set(next).contains(&p("u2^2*u1 + u2*u3 + 5").to_string()));

    let n = root(&["u3*u1^2 + u2*u1 + 5"], &["u3"]);
    let c = rank_split_candidates(&n);
    let pick = c.iter().find(|c| c.var == u(1)).unwrap();
    assert!(filter_coeff_split(&n, pick).is_err());
}

#[test]
fn partial_split_once_examples() {
    let c = p("u3*u1^2 + u2*u1 + 5").coefficients_in(u(1));
    assert_eq!(low_part(&c, u(1)), p("u2*u1 + 5"));
    let n = root(&["u3^2*u1^2 + u2^2*u1 + 5"], &[]);
    let r = run(ModuleId::SplitOnce, &n);
    let next = updated(&r);
    assert_eq!(next.todo.front(), Some(&TodoEntry::Branch(p("u2^2*u1 + 5"))));

    // zero child after u1 = -5/u2: u2^2 * P(-5/u2) = 25*u3
    let z = p("u3*u1^2 + u2*u1 + 5").substitute_ratfun(u(1), &p("-5"), &p("u2")).unwrap();
    assert_eq!(z, p("25*u3"));
    let mut pt = HashMap::new();
    for (a, b, c) in [(2i64, 3i64, 7i64), (-1, 4, 1), (5, -2, 3)] {
        pt.insert(u(2), rat(a, 1));
        pt.insert(u(3), rat(b, c));
        pt.insert(u(1), rat(-5, a));
        let lhs = p("u3*u1^2 + u2*u1 + 5").eval(&pt).unwrap() * rat(a * a, 1);
        assert_eq!(lhs, z.eval(&pt).unwrap());
    }

    let n = root(&["u1^2*u3 + u2 + 1"], &[]);
    let r = run_module(ModuleId::SplitOnce, &n, &StepCtx { candidate: Some(0), ..StepCtx::default() });
    // u1 has A1 = 0 and is not offered; u3 is linear so the module is gated
    assert!(!r.applied);
    let n = root(&["u1^2*u3^2 + u2^2 + 1"], &[]);
    assert!(split_once_candidates(&n).is_empty());
    assert!(!run(ModuleId::SplitOnce, &n).applied);
}

#[test]
fn full_split_examples() {
    let r = run(ModuleId::FullSplit, &root(&["u3*u1^2 + u2*u1 + 5"], &[]));
    assert_eq!(updated(&r).status, CaseStatus::Contradictory);

    let n = root(&["u3*u1^2 + u2*u1 + u4"], &[]);
    let next = super::steps::full_split_at(&n, 0, u(1));
    assert_eq!(eq_set(&next), set(&["u3", "u2", "u4"]));

    let n = root(&["u2*u1 + u4*u5"], &[]);
    let next = super::steps::full_split_at(&n, 0, u(1));
    assert_eq!(eq_set(&next), set(&["u2", "u4*u5"]));

    // the split variable stays free
    let mut s = session(&["u3*u1^2 + u2*u1 + u4"], ProcList::batch());
    s.full_split(&CaseId::root(), 0, u(1)).unwrap();
    s.run().unwrap();
    assert_eq!(s.solutions().len(), 1);
    assert_eq!(s.solutions()[0].free_params, vec![u(1)]);
}

#[test]
fn yield_examples() {
    let mut s = session(&["u1 + u2", "u3 + 1"], ProcList::interactive());
    assert_eq!(s.run().unwrap(), RunOutcome::Finished);
    assert!(!s.trace().iter().any(|e| matches!(e, TraceEvent::Attempt { module: ModuleId::Yield, .. })));

    let mut s = session(&["u1^2*u2^2 + u3^2*u4^2 + u1^2 + 1"], ProcList::interactive());
    let out = s.run().unwrap();
    let RunOutcome::Yielded(id) = out else { panic!("expected a yield, got {out:?}") };
    let n = s.node(&id).unwrap();
    assert_eq!(n.status, CaseStatus::AwaitingInteraction);
    assert!(n.reason.contains("split candidates"));
    assert!(!s.candidates(&id).unwrap().is_empty());

    let r = s.apply_module(&id, ModuleId::FullSplit, Some(0)).unwrap();
    assert!(r.applied);
}

#[test]
fn restart_discipline() {
    let mut s = session(&["u1^2 - u2^2", "u3*u4 + u5", "u1*u5 - 2"], ProcList::batch());
    s.run().unwrap();
    let attempts: Vec<(CaseId, ModuleId, bool)> = s
        .trace()
        .iter()
        .filter_map(|e| match e {
            TraceEvent::Attempt { case, module, applied, .. } => Some((case.clone(), *module, *applied)),
            _ => None,
        })
        .collect();
    assert!(attempts.len() > 3);
    for w in attempts.windows(2) {
        let (prev_case, prev_m, prev_applied) = &w[0];
        let (case, m, _) = &w[1];
        if *prev_applied || case != prev_case {
            assert_eq!(*m, ModuleId::Todo, "after {prev_m} in {prev_case}");
        } else {
            let list = s.config.plist.modules();
            let i = list.iter().position(|x| x == prev_m).unwrap();
            assert_eq!(list[i + 1], *m);
        }
    }
    for fam in s.solutions() {
        let mut pt = HashMap::new();
        for (k, v) in fam.free_params.iter().enumerate() {
            pt.insert(*v, rat(k as i64 + 3, 2));
        }
        if let Some(vals) = fam.evaluate(&pt) {
            for e in s.originals() {
                let vals: HashMap<VarId, Rat> = vals.clone().into_iter().collect();
                assert!(num_traits::Zero::is_zero(&e.eval(&vals).unwrap()));
            }
        }
    }
}

#[test]
fn splitting_is_gated_by_linear_equations() {
    let mut s = session(&["u1^2*u2 + u2^2*u1 + 1", "u3^2*u4 + u4^2 + u3 + u1"], ProcList::batch());
    let mut splits = 0;
    loop {
        let Some(id) = s.next_open() else { break };
        let before = s.node(&id).unwrap().clone();
        let Some((_, m)) = s.step().unwrap() else { break };
        if matches!(m, Some(ModuleId::SplitCoeff | ModuleId::SplitOnce)) {
            splits += 1;
            assert_eq!(linear_hint(&before), None);
        }
    }
    assert!(splits > 0);
    let n = root(&["u1^2*u2 + u2^2*u1 + 1", "u3*u4 + u5"], &[]);
    let r = run(ModuleId::SplitCoeff, &n);
    assert!(!r.applied);
    assert!(r.note.contains("linear"));
    let r = run(ModuleId::SplitOnce, &n);
    assert!(!r.applied);
}

#[test]
fn session_round_trip() {
    let mut s = session(&["u1^2 - u2^2", "u3*u4 + u5", "u1*u5 - 2"], ProcList::batch());
    for _ in 0..6 {
        s.step().unwrap();
    }
    let text = save_session(&s);
    let t = load_session(&text).unwrap();
    assert_eq!(save_session(&t), text);
    assert_eq!(t.case_count(), s.case_count());
    let mut s2 = t.clone();
    s.run().unwrap();
    s2.run().unwrap();
    let k1: Vec<String> = s.solutions().iter().map(|f| f.key()).collect();
    let k2: Vec<String> = s2.solutions().iter().map(|f| f.key()).collect();
    assert_eq!(k1, k2);

    assert!(load_session("nonsense").is_err());
    let bad = text.replacen("status=", "status=bogus-", 1);
    assert!(load_session(&bad).is_err());
}

#[test]
fn limits_flip_statuses() {
    let mut s = session(&["u1^2 - u2^2", "u3^2 - u4^2", "u5^2 - u6^2"], ProcList::batch());
    s.config.limits.max_cases = 3;
    let out = s.run().unwrap();
    assert_eq!(out, RunOutcome::LimitReached("max-cases".into()));
    assert!(s.nodes().any(|n| n.status == CaseStatus::ResourceLimit));
    assert!(s.next_open().is_none());

    let mut s = session(&["u1^3*u2^3 + u3 + u1", "u3 - u2"], ProcList::batch());
    s.config.limits.max_terms = 2;
    s.run().unwrap();
    assert!(s.nodes().any(|n| n.status == CaseStatus::ResourceLimit));
}

/// Builds `P = sum A_n u^n` in variable `u1` from coefficients in `u2, u3`.
fn assemble(coeffs: &[Poly]) -> Poly {
    let mut out = Poly::zero();
    for (n, c) in coeffs.iter().enumerate() {
        out = out.add(&c.mul(&Poly::monomial(Mono::var_pow(u(1), n as u32), Rat::from_integer(1.into()))));
    }
    out
}

fn shift_coeffs(polys: Vec<Poly>) -> Vec<Poly> {
    polys.into_iter().map(|q| q.substitute(u(1), &p("u4")).unwrap()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn containment_chain(raw in proptest::collection::vec(arb_poly(3, 3), 3..=5), pt in arb_point(4)) {
        // coefficients in u2, u3, u4 (u1 is the split variable)
        let coeffs = shift_coeffs(raw);
        let at_pt: Vec<Poly> = coeffs.iter().map(|c| c.sub(&Poly::constant(c.eval(&pt).unwrap()))).collect();
        for coeffs in [coeffs, at_pt] {
            let poly = assemble(&coeffs);
            prop_assume!(poly.degree_in(u(1)) >= 2);
            let m1 = method1_system(&poly, u(1));
            let m2 = method2_system(&poly, u(1));
            let m3 = method3_system(&poly, u(1));
            let c = poly.coefficients_in(u(1));
            let q = quotient_part(&c, u(1));
            let l = low_part(&c, u(1));
            let x = Poly::var(u(1));
            // P lies in the ideal of Method 3, which lies in that of Method 2, ...
            prop_assert_eq!(poly.clone(), q.mul(&x.pow(2)).add(&l));
            let mut q2 = Poly::zero();
            for (n, a) in c.iter().enumerate().skip(2) {
                prop_assert!(a.is_zero() || m2.contains(a));
                q2 = q2.add(&a.mul(&x.pow(n as u32 - 2)));
            }
            prop_assert_eq!(&q2, &q);
            prop_assert!(l.is_zero() || m2.contains(&l));
            prop_assert!(q.is_zero() || m3.contains(&q));
            let a0 = c[0].clone();
            let a1 = c.get(1).cloned().unwrap_or_else(Poly::zero);
            prop_assert_eq!(l.clone(), a0.add(&a1.mul(&x)));
            prop_assert!(a0.is_zero() || m1.contains(&a0));
            prop_assert!(a1.is_zero() || m1.contains(&a1));
        }
    }

    #[test]
    fn containment_by_substitution(raw in proptest::collection::vec(arb_poly(3, 3), 3..=5), pt in arb_point(4)) {
        let coeffs: Vec<Poly> = shift_coeffs(raw)
            .into_iter()
            .map(|c| c.sub(&Poly::constant(c.eval(&pt).unwrap())))
            .collect();
        let poly = assemble(&coeffs);
        prop_assume!(poly.degree_in(u(1)) >= 2);
        let m1 = method1_system(&poly, u(1));
        let m2 = method2_system(&poly, u(1));
        let m3 = method3_system(&poly, u(1));
        // pt annihilates every A_n (u1 is free), so it solves Method 1
        for e in &m1 {
            prop_assert!(num_traits::Zero::is_zero(&e.eval(&pt).unwrap()));
        }
        for e in m2.iter().chain(&m3).chain(std::iter::once(&poly)) {
            prop_assert!(num_traits::Zero::is_zero(&e.eval(&pt).unwrap()));
        }
    }

    #[test]
    fn degree_two_methods_coincide(raw in proptest::collection::vec(arb_poly(3, 3), 3..=3)) {
        let poly = assemble(&shift_coeffs(raw));
        prop_assume!(poly.degree_in(u(1)) == 2);
        prop_assert_eq!(norm_set(&method2_system(&poly, u(1))), norm_set(&method3_system(&poly, u(1))));
        // the induced elimination u1 = -A0/A1 turns P into A2 * A0^2
        let c = poly.coefficients_in(u(1));
        prop_assume!(!c[1].is_zero());
        let reduced = poly.substitute_ratfun(u(1), &c[0].neg(), &c[1]).unwrap();
        prop_assert_eq!(reduced, c[2].mul(&c[0].pow(2)));
    }

    #[test]
    fn full_splits_commute(poly in arb_poly(4, 6)) {
        let poly = poly.add(&p("u1^2*u2*u3^2*u4"));
        let vars: Vec<VarId> = poly.vars().into_iter().collect();
        prop_assume!(vars.len() >= 2);
        let (a, b) = (vars[0], vars[vars.len() - 1]);
        let split_all = |eqs: Vec<Poly>, v: VarId| -> Vec<Poly> {
            eqs.iter().flat_map(|e| method1_system(e, v)).collect()
        };
        let ab = split_all(split_all(vec![poly.clone()], a), b);
        let ba = split_all(split_all(vec![poly.clone()], b), a);
        prop_assert_eq!(norm_set(&ab), norm_set(&ba));
    }
}
