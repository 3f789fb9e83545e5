//! The generation loop: random operators, the polynomial system, rational
//! solution families, instantiation, letter encoding and the uniqueness gate.

use std::collections::{BTreeMap, HashMap};

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use xforge_core::case::SolutionFamily;
use xforge_core::poly::parse_poly;
use xforge_core::solver::{Limits, ProcList, RunOutcome, Session, SolverConfig};
use xforge_core::{Poly, Rat, VarId};

use crate::grid::{operator_rows, parse_operator_rows, random_grid, DiagMode, GridError, OperatorGrid};
use crate::puzzle::{encode_letters, parse_puzzle, Convention, LetterMap, Puzzle, PuzzleError};
use crate::system::{eval_line, grid_to_system};
use crate::unique::count_assignments;

/// Draws of free parameters tried per family before giving up.
const PARAM_DRAWS: usize = 200;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenConfig {
    pub size: usize,
    pub n_times: usize,
    pub n_div: usize,
    pub seed: u64,
    /// Free parameters are drawn from `[-param_bound, param_bound]`.
    pub param_bound: i64,
    pub attempts: usize,
    pub diag_mode: DiagMode,
    pub plist: ProcList,
    pub limits: Limits,
    pub leading_zero: bool,
}

impl GenConfig {
    pub fn new(size: usize, n_times: usize, n_div: usize, seed: u64) -> GenConfig {
        GenConfig {
            size,
            n_times,
            n_div,
            seed,
            param_bound: 9,
            attempts: 10,
            diag_mode: DiagMode::default_for(size),
            plist: ProcList::batch(),
            limits: Limits::default(),
            leading_zero: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstantiateError {
    #[error("a parameter for {0} is missing")]
    MissingParameter(VarId),
    #[error("a denominator or nonzero condition vanishes")]
    Vanishes,
}

/// Values of all variables of a family at integer parameter values.
pub fn instantiate(fam: &SolutionFamily, params: &BTreeMap<VarId, i64>) -> Result<BTreeMap<VarId, Rat>, InstantiateError> {
    let mut pt = HashMap::new();
    for v in &fam.free_params {
        let k = params.get(v).ok_or(InstantiateError::MissingParameter(*v))?;
        pt.insert(*v, Rat::from_integer((*k).into()));
    }
    fam.evaluate(&pt).ok_or(InstantiateError::Vanishes)
}

/// Everything needed to rebuild a generated puzzle without re-solving.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub attempt: usize,
    pub grid_seed: u64,
    pub letter_seed: u64,
    pub size: usize,
    pub n_times: usize,
    pub n_div: usize,
    pub diag_mode: DiagMode,
    pub leading_zero: bool,
    /// Operator grid, interleaved rows with `c` for cells.
    pub grid: Vec<String>,
    /// Solver case the family came from.
    pub family_case: String,
    pub free_params: Vec<VarId>,
    /// `u<k> = num / den` per bound variable.
    pub bindings: Vec<String>,
    pub params: BTreeMap<VarId, i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttemptStat {
    pub attempt: usize,
    pub families: usize,
    pub outcome: String,
}

#[derive(Debug, Clone)]
pub struct Generated {
    pub puzzle: Puzzle,
    pub provenance: Provenance,
    pub solution: BTreeMap<char, u8>,
    pub stats: Vec<AttemptStat>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("no unique puzzle within {attempts} attempts")]
    BudgetExhausted { attempts: usize, stats: Vec<AttemptStat> },
    #[error("provenance does not replay: {0}")]
    Replay(String),
    #[error(transparent)]
    Puzzle(#[from] PuzzleError),
}

/// Families ordered for generation: fewest binding terms, then most free
/// parameters.
fn rank_families(fams: &[SolutionFamily]) -> Vec<&SolutionFamily> {
    let mut v: Vec<&SolutionFamily> = fams.iter().collect();
    v.sort_by_key(|f| (f.total_terms(), std::cmp::Reverse(f.free_params.len())));
    v
}

fn value_grid(grid: &OperatorGrid<VarId>, values: &BTreeMap<VarId, Rat>) -> OperatorGrid<Rat> {
    grid.map_cells(|v| values.get(v).cloned().unwrap_or_else(Rat::zero))
}

fn lines_vanish(grid: &OperatorGrid<Rat>, mode: DiagMode) -> bool {
    grid.lines(mode).iter().all(|l| matches!(eval_line(l, grid, |x| x.clone()), Ok(v) if v.is_zero()))
}

pub fn generate(cfg: &GenConfig) -> Result<Generated, GenError> {
    let mut master = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut stats = Vec::new();
    let convention = Convention { leading_zero: cfg.leading_zero, diagonals: cfg.diag_mode };
    for attempt in 1..=cfg.attempts {
        let grid_seed: u64 = master.gen();
        let param_seed: u64 = master.gen();
        let letter_seed: u64 = master.gen();
        let grid = random_grid(cfg.size, cfg.n_times, cfg.n_div, cfg.diag_mode, grid_seed)?;
        let sys = grid_to_system(&grid, cfg.diag_mode);
        let config = SolverConfig { plist: cfg.plist.clone(), limits: cfg.limits.clone(), explore_nonzero: false };
        let mut session = Session::with_universe(
            config,
            &sys.equations,
            &sys.inequalities,
            &[],
            sys.vars.iter().copied().collect(),
        );
        let outcome = match session.run() {
            Ok(o) => o,
            Err(e) => {
                stats.push(AttemptStat { attempt, families: 0, outcome: format!("solver error: {e}") });
                continue;
            }
        };
        let fams = session.solutions();
        if fams.is_empty() {
            let why = match outcome {
                RunOutcome::LimitReached(l) => format!("no family ({l} limit)"),
                _ => "no rational solution family".to_string(),
            };
            stats.push(AttemptStat { attempt, families: 0, outcome: why });
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(param_seed);
        let mut last = String::from("no parameter draw avoided zero denominators");
        'families: for fam in rank_families(fams) {
            for _ in 0..PARAM_DRAWS {
                let params: BTreeMap<VarId, i64> =
                    fam.free_params.iter().map(|&v| (v, rng.gen_range(-cfg.param_bound..=cfg.param_bound))).collect();
                let Ok(values) = instantiate(fam, &params) else { continue };
                let pt: HashMap<VarId, Rat> = values.iter().map(|(k, v)| (*k, v.clone())).collect();
                if sys.inequalities.iter().any(|d| d.eval(&pt).map(|x| x.is_zero()).unwrap_or(true)) {
                    continue;
                }
                let vgrid = value_grid(&grid, &values);
                assert!(lines_vanish(&vgrid, cfg.diag_mode), "instantiated family violates a line");
                let map = LetterMap::seeded(letter_seed);
                let puzzle = encode_letters(&vgrid, &map, convention)?;
                let report = count_assignments(&puzzle, 2);
                if report.count != 1 {
                    last = format!("encoded puzzle has {}{} solutions", report.count, if report.capped { "+" } else { "" });
                    break 'families;
                }
                let provenance = Provenance {
                    seed: cfg.seed,
                    attempt,
                    grid_seed,
                    letter_seed,
                    size: cfg.size,
                    n_times: cfg.n_times,
                    n_div: cfg.n_div,
                    diag_mode: cfg.diag_mode,
                    leading_zero: cfg.leading_zero,
                    grid: operator_rows(&grid),
                    family_case: fam.case.to_string(),
                    free_params: fam.free_params.clone(),
                    bindings: fam.bindings.iter().map(|b| format!("{} = {} / {}", b.var, b.num, b.den)).collect(),
                    params,
                };
                stats.push(AttemptStat { attempt, families: fams.len(), outcome: "unique".into() });
                let solution = report.assignments[0].clone();
                return Ok(Generated { puzzle, provenance, solution, stats });
            }
        }
        stats.push(AttemptStat { attempt, families: fams.len(), outcome: last });
    }
    Err(GenError::BudgetExhausted { attempts: cfg.attempts, stats })
}

/// Rebuilds the puzzle from a provenance report alone.
pub fn replay(p: &Provenance) -> Result<Puzzle, GenError> {
    let grid = parse_operator_rows(p.size, &p.grid)?;
    let regrown = random_grid(p.size, p.n_times, p.n_div, p.diag_mode, p.grid_seed)?;
    if regrown != grid {
        return Err(GenError::Replay("grid does not match its seed".into()));
    }
    let bad = |why: String| GenError::Replay(why);
    let mut values: BTreeMap<VarId, Rat> = BTreeMap::new();
    let pt: HashMap<VarId, Rat> = p.params.iter().map(|(v, k)| (*v, Rat::from_integer((*k).into()))).collect();
    for (v, r) in &pt {
        values.insert(*v, r.clone());
    }
    for b in &p.bindings {
        let (lhs, rhs) = b.split_once(" = ").ok_or_else(|| bad(format!("binding '{b}'")))?;
        let (num, den) = rhs.rsplit_once(" / ").ok_or_else(|| bad(format!("binding '{b}'")))?;
        let var = lhs
            .strip_prefix('u')
            .and_then(|k| k.parse().ok())
            .map(VarId)
            .ok_or_else(|| bad(format!("variable '{lhs}'")))?;
        let num: Poly = parse_poly(num).map_err(|e| bad(e.to_string()))?;
        let den: Poly = parse_poly(den).map_err(|e| bad(e.to_string()))?;
        let d = den.eval(&pt).map_err(|e| bad(e.to_string()))?;
        if d.is_zero() {
            return Err(bad(format!("denominator of {lhs} vanishes")));
        }
        values.insert(var, num.eval(&pt).map_err(|e| bad(e.to_string()))? / d);
    }
    let vgrid = value_grid(&grid, &values);
    if !lines_vanish(&vgrid, p.diag_mode) {
        return Err(bad("replayed values violate a line".into()));
    }
    let convention = Convention { leading_zero: p.leading_zero, diagonals: p.diag_mode };
    let puzzle = encode_letters(&vgrid, &LetterMap::seeded(p.letter_seed), convention)?;
    // normalize through the text form so replays compare equal to parsed files
    Ok(parse_puzzle(&puzzle.render_text())?)
}
