//! Module-driven case solver: step modules, the scheduler and its trace.

mod module;
mod persist;
mod session;
mod split;
mod steps;
mod trace;
#[cfg(test)]
mod tests;

pub use module::{ModuleId, ProcList, ProcListError, UnknownModule};
pub use persist::{load_session, save_session, PersistError};
pub use session::{Limits, RunOutcome, Session, SessionError, SolverConfig, Summary};
pub use split::{
    auto_coeff_split, coeff_split_candidates, filter_coeff_split, linear_hint, low_part, method1_system,
    method2_system, method3_system, quotient_part, rank_split_candidates, split_once_candidates, SplitCandidate,
    SplitScore,
};
pub use steps::{run_module, Effect, StepCtx, StepResult};
pub use trace::{parse_trace_line, TraceEvent};
