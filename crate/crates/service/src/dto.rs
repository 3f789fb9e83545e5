//! JSON bodies. Polynomials and rationals travel as their exact text forms.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use xforge_core::case::{CaseNode, CaseStatus, SolutionFamily};
use xforge_core::solver::{coeff_split_candidates, rank_split_candidates, split_once_candidates, SplitCandidate, Summary};
use xforge_core::VarId;
use xforge_puzzle::{LineCheck, Provenance, PuzzleJson};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ConfigBody {
    /// `batch`, `interactive` or an explicit list such as `(1 89 20 38)`.
    pub plist: Option<String>,
    pub max_terms: Option<usize>,
    pub max_cases: Option<usize>,
    pub wall_secs: Option<u64>,
    pub explore_nonzero: bool,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct SystemBody {
    pub equations: Vec<String>,
    pub inequalities: Vec<String>,
    pub or_groups: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridBody {
    pub size: usize,
    /// Interleaved rows, `c` at cell positions.
    pub rows: Vec<String>,
    #[serde(default)]
    pub diagonals: Option<String>,
}

/// Exactly one of the sources must be present.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct CreateSession {
    pub system: Option<SystemBody>,
    pub system_text: Option<String>,
    pub grid: Option<GridBody>,
    pub session_text: Option<String>,
    pub config: ConfigBody,
    pub auto_run: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConfigView {
    pub plist: String,
    pub max_terms: usize,
    pub max_cases: usize,
    pub wall_secs: u64,
    pub explore_nonzero: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionHandle {
    pub id: u64,
    pub created_at: u64,
    pub config: ConfigView,
    pub version: u64,
    pub running: bool,
    pub last_outcome: Option<String>,
    pub events: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseSummary {
    pub id: String,
    pub parent: Option<String>,
    pub status: CaseStatus,
    pub reason: String,
    pub equations: usize,
    pub terms: usize,
    pub max_terms: usize,
    pub vars: usize,
    pub children: Vec<String>,
    pub assumptions: Vec<String>,
}

impl CaseSummary {
    pub fn of(n: &CaseNode) -> CaseSummary {
        CaseSummary {
            id: n.id.to_string(),
            parent: n.parent.as_ref().map(|p| p.to_string()),
            status: n.status,
            reason: n.reason.clone(),
            equations: n.equations.len(),
            terms: n.total_terms(),
            max_terms: n.max_terms(),
            vars: n.vars().len(),
            children: n.children.iter().map(|c| c.to_string()).collect(),
            assumptions: n.assumptions.iter().map(|a| a.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BindingView {
    pub var: VarId,
    pub num: String,
    pub den: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyView {
    pub case: String,
    pub free_params: Vec<VarId>,
    pub bindings: Vec<BindingView>,
    pub nonzero: Vec<String>,
    pub terms: usize,
}

impl FamilyView {
    pub fn of(f: &SolutionFamily) -> FamilyView {
        FamilyView {
            case: f.case.to_string(),
            free_params: f.free_params.clone(),
            bindings: f
                .bindings
                .iter()
                .map(|b| BindingView { var: b.var, num: b.num.to_string(), den: b.den.to_string() })
                .collect(),
            nonzero: f.nonzero.iter().map(|p| p.to_string()).collect(),
            terms: f.total_terms(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeSnapshot {
    pub version: u64,
    pub running: bool,
    pub by_status: BTreeMap<String, usize>,
    pub cases: Vec<CaseSummary>,
    pub solutions: Vec<FamilyView>,
}

pub fn status_counts(s: &Summary) -> BTreeMap<String, usize> {
    s.by_status.iter().map(|(k, v)| (k.as_str().to_string(), *v)).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquationView {
    pub index: usize,
    pub poly: String,
    pub terms: usize,
    pub total_degree: u32,
    pub vars: Vec<VarId>,
    pub degrees: BTreeMap<VarId, u32>,
    pub linear_vars: Vec<VarId>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CandidateView {
    pub index: usize,
    pub eq_index: usize,
    pub var: VarId,
    pub d: u32,
    pub score: xforge_core::solver::SplitScore,
}

fn candidate_views(c: &[SplitCandidate]) -> Vec<CandidateView> {
    c.iter()
        .enumerate()
        .map(|(index, c)| CandidateView { index, eq_index: c.eq_index, var: c.var, d: c.d, score: c.score.clone() })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CaseDetail {
    pub version: u64,
    #[serde(flatten)]
    pub summary: CaseSummary,
    pub equation_list: Vec<EquationView>,
    pub nonzero: Vec<String>,
    pub or_groups: Vec<Vec<String>>,
    pub bindings: Vec<BindingView>,
    pub todo: Vec<String>,
    /// All `(equation, variable)` pairs, best first.
    pub candidates: Vec<CandidateView>,
    /// Indices accepted by module 90 and module 91.
    pub module_candidates: BTreeMap<String, Vec<CandidateView>>,
}

impl CaseDetail {
    pub fn of(n: &CaseNode, version: u64) -> CaseDetail {
        let equation_list = n
            .equations
            .iter()
            .enumerate()
            .map(|(index, e)| EquationView {
                index,
                poly: e.poly().to_string(),
                terms: e.props().term_count,
                total_degree: e.poly().total_degree(),
                vars: e.props().vars.iter().copied().collect(),
                degrees: e.props().degrees.clone(),
                linear_vars: e.props().linear_vars.iter().copied().collect(),
            })
            .collect();
        let mut module_candidates = BTreeMap::new();
        module_candidates.insert("90".to_string(), candidate_views(&coeff_split_candidates(n)));
        module_candidates.insert("91".to_string(), candidate_views(&split_once_candidates(n)));
        CaseDetail {
            version,
            summary: CaseSummary::of(n),
            equation_list,
            nonzero: n.inequalities.nonzero().iter().map(|p| p.to_string()).collect(),
            or_groups: n.inequalities.or_groups().iter().map(|g| g.iter().map(|p| p.to_string()).collect()).collect(),
            bindings: n
                .bindings
                .iter()
                .map(|b| BindingView { var: b.var, num: b.num.to_string(), den: b.den.to_string() })
                .collect(),
            todo: n.todo.iter().map(|t| t.to_string()).collect(),
            candidates: candidate_views(&rank_split_candidates(n)),
            module_candidates,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ApplyBody {
    /// Module code such as `"90"`.
    pub module: String,
    pub candidate: Option<usize>,
    /// Rejected with 409 when the session has moved past this version.
    pub expected_version: Option<u64>,
    /// Start the auto-run afterwards, as typing a module id in the REPL does.
    pub resume: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FullSplitBody {
    pub eq: usize,
    pub var: VarId,
    #[serde(default)]
    pub expected_version: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepOutcome {
    pub applied: bool,
    pub note: String,
    pub version: u64,
    pub status: CaseStatus,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EventsPage {
    pub version: u64,
    pub running: bool,
    pub events: Vec<xforge_core::solver::TraceEvent>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct RandomPuzzleBody {
    pub size: Option<usize>,
    pub times: Option<usize>,
    pub div: Option<usize>,
    pub seed: Option<u64>,
    pub attempts: Option<usize>,
    pub param_bound: Option<i64>,
    pub diagonals: Option<String>,
    pub leading_zero: Option<bool>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct PuzzleBody {
    pub text: Option<String>,
    pub json: Option<PuzzleJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PuzzleView {
    pub id: u64,
    pub puzzle: PuzzleJson,
    pub text: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckBody {
    pub assignment: BTreeMap<char, u8>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckReport {
    pub complete: bool,
    pub all_zero: bool,
    pub lines: Vec<LineCheck>,
}
