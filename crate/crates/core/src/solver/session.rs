use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use thiserror::Error;

use super::module::{ModuleId, ProcList};
use super::split::{rank_split_candidates, SplitCandidate};
use super::steps::{full_split_at, run_module, Effect, StepCtx, StepResult};
use super::trace::TraceEvent;
use crate::case::{extract_solution, CaseId, CaseNode, CaseStatus, ExtractError, SolutionFamily};
use crate::poly::VarId;
use crate::Poly;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Limits {
    /// Largest equation (in terms) a case may hold.
    pub max_terms: usize,
    /// Total number of case nodes.
    pub max_cases: usize,
    pub wall: Duration,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_terms: 200_000, max_cases: 10_000, wall: Duration::from_secs(1800) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverConfig {
    pub plist: ProcList,
    pub limits: Limits,
    pub explore_nonzero: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { plist: ProcList::batch(), limits: Limits::default(), explore_nonzero: false }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunOutcome {
    /// No open case is left.
    Finished,
    /// Module 38 stopped at this case.
    Yielded(CaseId),
    /// A global limit was hit; open cases were closed.
    LimitReached(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SessionError {
    #[error("no case {0}")]
    UnknownCase(CaseId),
    #[error("case {0} is {1}")]
    NotWorkable(CaseId, CaseStatus),
    #[error("equation index {0} out of range")]
    BadEquation(usize),
    #[error("{0} does not occur in the equation")]
    BadVariable(VarId),
    #[error("solution check failed in case {0}: {1}")]
    Extraction(CaseId, ExtractError),
}

/// Counts of cases by status.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Summary {
    pub by_status: BTreeMap<CaseStatus, usize>,
    pub solutions: usize,
}

impl Summary {
    pub fn count(&self, s: CaseStatus) -> usize {
        self.by_status.get(&s).copied().unwrap_or(0)
    }
}

/// A case tree together with the original system and the step trace.
#[derive(Debug, Clone)]
pub struct Session {
    pub config: SolverConfig,
    pub(crate) originals: Vec<Poly>,
    pub(crate) orig_ineqs: Vec<Poly>,
    pub(crate) or_groups: Vec<Vec<Poly>>,
    pub(crate) universe: BTreeSet<VarId>,
    pub(crate) nodes: BTreeMap<CaseId, CaseNode>,
    pub(crate) solutions: Vec<SolutionFamily>,
    pub(crate) trace: Vec<TraceEvent>,
    seq: u64,
}

impl Session {
    pub fn new(config: SolverConfig, equations: &[Poly], inequalities: &[Poly], or_groups: &[Vec<Poly>]) -> Session {
        let mut universe = BTreeSet::new();
        for p in equations.iter().chain(inequalities).chain(or_groups.iter().flatten()) {
            universe.extend(p.vars());
        }
        Session::with_universe(config, equations, inequalities, or_groups, universe)
    }

    /// Like [`Session::new`], with extra variables that count as free
    /// parameters even if no equation mentions them.
    pub fn with_universe(
        config: SolverConfig,
        equations: &[Poly],
        inequalities: &[Poly],
        or_groups: &[Vec<Poly>],
        mut universe: BTreeSet<VarId>,
    ) -> Session {
        for p in equations {
            universe.extend(p.vars());
        }
        let mut s = Session {
            config,
            originals: equations.to_vec(),
            orig_ineqs: inequalities.to_vec(),
            or_groups: or_groups.to_vec(),
            universe,
            nodes: BTreeMap::new(),
            solutions: Vec::new(),
            trace: Vec::new(),
            seq: 0,
        };
        let root = CaseNode::root(equations, inequalities, or_groups);
        s.install(root).expect("root installs");
        s
    }

    pub(crate) fn from_parts(
        config: SolverConfig,
        originals: Vec<Poly>,
        orig_ineqs: Vec<Poly>,
        or_groups: Vec<Vec<Poly>>,
        universe: BTreeSet<VarId>,
        nodes: Vec<CaseNode>,
        family_order: &[CaseId],
    ) -> Result<Session, SessionError> {
        let mut s = Session {
            config,
            originals,
            orig_ineqs,
            or_groups,
            universe,
            nodes: BTreeMap::new(),
            solutions: Vec::new(),
            trace: Vec::new(),
            seq: 0,
        };
        for n in nodes {
            s.nodes.insert(n.id.clone(), n);
        }
        let mut solved: Vec<CaseId> =
            s.nodes.values().filter(|n| n.status == CaseStatus::Solved).map(|n| n.id.clone()).collect();
        // discovery order first, so family numbers survive a round trip
        solved.sort_by_key(|id| family_order.iter().position(|f| f == id).unwrap_or(usize::MAX));
        for id in solved {
            s.record_solution(&id)?;
        }
        Ok(s)
    }

    pub fn originals(&self) -> &[Poly] {
        &self.originals
    }

    pub fn original_inequalities(&self) -> &[Poly] {
        &self.orig_ineqs
    }

    pub fn original_or_groups(&self) -> &[Vec<Poly>] {
        &self.or_groups
    }

    pub fn universe(&self) -> &BTreeSet<VarId> {
        &self.universe
    }

    pub fn nodes(&self) -> impl Iterator<Item = &CaseNode> {
        self.nodes.values()
    }

    pub fn node(&self, id: &CaseId) -> Option<&CaseNode> {
        self.nodes.get(id)
    }

    pub fn case_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn solutions(&self) -> &[SolutionFamily] {
        &self.solutions
    }

    pub fn trace(&self) -> &[TraceEvent] {
        &self.trace
    }

    /// Leaves of the case tree.
    pub fn leaves(&self) -> impl Iterator<Item = &CaseNode> {
        self.nodes.values().filter(|n| n.children.is_empty())
    }

    /// First open case in depth-first order.
    pub fn next_open(&self) -> Option<CaseId> {
        self.nodes.values().find(|n| n.is_open()).map(|n| n.id.clone())
    }

    pub fn summary(&self) -> Summary {
        let mut by_status = BTreeMap::new();
        for n in self.leaves() {
            *by_status.entry(n.status).or_insert(0) += 1;
        }
        Summary { by_status, solutions: self.solutions.len() }
    }

    fn next_seq(&mut self) -> u64 {
        self.seq += 1;
        self.seq
    }

    fn record_solution(&mut self, id: &CaseId) -> Result<(), SessionError> {
        let node = &self.nodes[id];
        let fam = extract_solution(node, &self.originals, &self.universe)
            .map_err(|e| SessionError::Extraction(id.clone(), e))?;
        let seq = self.next_seq();
        let key = fam.key();
        let index = match self.solutions.iter().position(|f| f.key() == key) {
            Some(i) => i,
            None => {
                self.solutions.push(fam);
                self.solutions.len() - 1
            }
        };
        let fam = &self.solutions[index];
        self.trace.push(TraceEvent::Solution {
            seq,
            case: id.clone(),
            family: index + 1,
            free_params: fam.free_params.len(),
            terms: fam.total_terms(),
        });
        Ok(())
    }

    /// Inserts or replaces a node, applying the term limit and recording
    /// closed statuses and solutions.
    fn install(&mut self, mut node: CaseNode) -> Result<(), SessionError> {
        let before = self.nodes.get(&node.id).map(|n| n.status);
        if node.is_open() && node.max_terms() > self.config.limits.max_terms {
            node.close(CaseStatus::ResourceLimit, format!("an equation exceeds {} terms", self.config.limits.max_terms));
            let seq = self.next_seq();
            self.trace.push(TraceEvent::Limit { seq, case: node.id.clone(), limit: "max-terms".into() });
        }
        let id = node.id.clone();
        let status = node.status;
        let reason = node.reason.clone();
        self.nodes.insert(id.clone(), node);
        if before != Some(status) && status != CaseStatus::Open {
            let seq = self.next_seq();
            self.trace.push(TraceEvent::Status { seq, case: id.clone(), status, reason });
        }
        if status == CaseStatus::Solved && before != Some(CaseStatus::Solved) {
            self.record_solution(&id)?;
        }
        Ok(())
    }

    fn apply_effect(&mut self, id: &CaseId, effect: Effect) -> Result<(), SessionError> {
        match effect {
            Effect::Update(node) => self.install(node),
            Effect::Children(children) => {
                let ids: Vec<CaseId> = children.iter().map(|c| c.id.clone()).collect();
                if let Some(parent) = self.nodes.get_mut(id) {
                    parent.status = CaseStatus::Branched;
                    parent.children = ids;
                }
                for c in children {
                    let seq = self.next_seq();
                    let assumption: Vec<String> = c.assumptions.iter().map(|a| a.to_string()).collect();
                    self.trace.push(TraceEvent::Created {
                        seq,
                        case: c.id.clone(),
                        parent: id.clone(),
                        assumption: assumption.join(", "),
                    });
                    self.install(c)?;
                }
                Ok(())
            }
        }
    }

    fn size_after(&self, effect: &Option<Effect>, fallback: &CaseNode) -> (usize, usize) {
        match effect {
            Some(Effect::Update(n)) => (n.equations.len(), n.total_terms()),
            Some(Effect::Children(cs)) => (
                cs.iter().map(|c| c.equations.len()).sum(),
                cs.iter().map(|c| c.total_terms()).sum(),
            ),
            None => (fallback.equations.len(), fallback.total_terms()),
        }
    }

    fn attempt(&mut self, id: &CaseId, module: ModuleId, candidate: Option<usize>) -> Result<StepResult, SessionError> {
        let node = self.nodes.get(id).ok_or_else(|| SessionError::UnknownCase(id.clone()))?.clone();
        let ctx = StepCtx { explore_nonzero: self.config.explore_nonzero, candidate };
        let mut result = run_module(module, &node, &ctx);
        let (eqs_after, terms_after) = self.size_after(&result.effect, &node);
        let seq = self.next_seq();
        self.trace.push(TraceEvent::Attempt {
            seq,
            case: id.clone(),
            module,
            applied: result.applied,
            eqs_before: node.equations.len(),
            terms_before: node.total_terms(),
            eqs_after,
            terms_after,
            note: result.note.clone(),
        });
        if let Some(effect) = result.effect.take() {
            let keep = match &effect {
                Effect::Update(n) => Some(Effect::Update(n.clone())),
                Effect::Children(c) => Some(Effect::Children(c.clone())),
            };
            self.apply_effect(id, effect)?;
            result.effect = keep;
        }
        Ok(result)
    }

    fn close_all_open(&mut self, status: CaseStatus, reason: &str, limit: &str) {
        let open: Vec<CaseId> = self.nodes.values().filter(|n| n.is_open()).map(|n| n.id.clone()).collect();
        for id in open {
            let seq = self.next_seq();
            self.trace.push(TraceEvent::Limit { seq, case: id.clone(), limit: limit.into() });
            let mut n = self.nodes[&id].clone();
            n.close(status, reason);
            self.install(n).expect("closing never extracts");
        }
    }

    /// One scheduler round on the first open case: modules are tried in
    /// list order and the round ends at the first one that applies.
    /// `None` when no case is open.
    pub fn step(&mut self) -> Result<Option<(CaseId, Option<ModuleId>)>, SessionError> {
        let Some(id) = self.next_open() else { return Ok(None) };
        let modules: Vec<ModuleId> = self.config.plist.modules().to_vec();
        for m in modules {
            let r = self.attempt(&id, m, None)?;
            if r.applied {
                return Ok(Some((id, Some(m))));
            }
        }
        let mut n = self.nodes[&id].clone();
        if n.is_open() {
            n.status = CaseStatus::AwaitingInteraction;
            n.reason = "no listed module applies".into();
            self.install(n)?;
        }
        Ok(Some((id, None)))
    }

    /// Runs the scheduler until no case is open, module 38 yields, or a
    /// limit is reached.
    pub fn run(&mut self) -> Result<RunOutcome, SessionError> {
        let start = Instant::now();
        loop {
            if let Some(out) = self.run_bounded(usize::MAX, start)? {
                return Ok(out);
            }
        }
    }

    /// As [`Session::run`] but returns `None` after `max_steps` scheduler
    /// rounds without an outcome. The wall-clock limit counts from `start`.
    pub fn run_bounded(&mut self, max_steps: usize, start: Instant) -> Result<Option<RunOutcome>, SessionError> {
        for _ in 0..max_steps {
            if start.elapsed() > self.config.limits.wall {
                self.close_all_open(CaseStatus::ResourceLimit, "wall-clock limit", "wall-clock");
                return Ok(Some(RunOutcome::LimitReached("wall-clock".into())));
            }
            if self.nodes.len() > self.config.limits.max_cases {
                self.close_all_open(CaseStatus::ResourceLimit, "case limit", "max-cases");
                return Ok(Some(RunOutcome::LimitReached("max-cases".into())));
            }
            match self.step()? {
                None => return Ok(Some(RunOutcome::Finished)),
                Some((id, Some(ModuleId::Yield))) => return Ok(Some(RunOutcome::Yielded(id))),
                Some(_) => {}
            }
        }
        Ok(None)
    }

    fn workable(&self, id: &CaseId) -> Result<&CaseNode, SessionError> {
        let n = self.nodes.get(id).ok_or_else(|| SessionError::UnknownCase(id.clone()))?;
        match n.status {
            CaseStatus::Open | CaseStatus::AwaitingInteraction | CaseStatus::Deferred => Ok(n),
            s => Err(SessionError::NotWorkable(id.clone(), s)),
        }
    }

    /// Reopens a case that stopped for interaction or was deferred.
    fn reopen(&mut self, id: &CaseId) -> Result<(), SessionError> {
        self.workable(id)?;
        let n = self.nodes.get_mut(id).expect("checked");
        n.status = CaseStatus::Open;
        n.reason.clear();
        Ok(())
    }

    /// Makes a deferred or waiting case schedulable again.
    pub fn resume(&mut self, id: &CaseId) -> Result<(), SessionError> {
        self.reopen(id)
    }

    /// Applies one module to one case, as chosen by a user. A module that
    /// does not apply leaves the case unchanged.
    pub fn apply_module(
        &mut self,
        id: &CaseId,
        module: ModuleId,
        candidate: Option<usize>,
    ) -> Result<StepResult, SessionError> {
        let prior = self.workable(id)?.clone();
        self.reopen(id)?;
        let r = self.attempt(id, module, candidate)?;
        if !r.applied {
            let current = self.nodes.get_mut(id).expect("case exists");
            if current.is_open() {
                current.status = prior.status;
                current.reason = prior.reason;
            }
        }
        Ok(r)
    }

    /// Full split of equation `eq` with respect to `var`.
    pub fn full_split(&mut self, id: &CaseId, eq: usize, var: VarId) -> Result<(), SessionError> {
        let node = self.workable(id)?.clone();
        let e = node.equations.get(eq).ok_or(SessionError::BadEquation(eq))?;
        if !e.props().vars.contains(&var) {
            return Err(SessionError::BadVariable(var));
        }
        let mut open = node.clone();
        open.status = CaseStatus::Open;
        let next = full_split_at(&open, eq, var);
        let seq = self.next_seq();
        self.trace.push(TraceEvent::Attempt {
            seq,
            case: id.clone(),
            module: ModuleId::FullSplit,
            applied: true,
            eqs_before: node.equations.len(),
            terms_before: node.total_terms(),
            eqs_after: next.equations.len(),
            terms_after: next.total_terms(),
            note: format!("full split of equation {} w.r.t. {var}", eq + 1),
        });
        self.install(next)
    }

    /// Ranked `(equation, variable)` pairs of a case.
    pub fn candidates(&self, id: &CaseId) -> Result<Vec<SplitCandidate>, SessionError> {
        let n = self.nodes.get(id).ok_or_else(|| SessionError::UnknownCase(id.clone()))?;
        Ok(rank_split_candidates(n))
    }

    /// Trace lines, one per event.
    pub fn trace_text(&self) -> String {
        let mut s = String::new();
        for e in &self.trace {
            s.push_str(&e.to_string());
            s.push('\n');
        }
        s
    }
}
