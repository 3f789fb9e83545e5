//! Solving state: equations with cached properties, nonzero knowledge,
//! triangular bindings and the nodes of the case tree.

mod equation;
mod ineq;
mod node;
mod solution;

pub use equation::{EqProps, Equation};
pub use ineq::{Contradiction, InequalitySet};
pub use node::{
    Assumption, AssumptionKind, Binding, CaseError, CaseId, CaseIdError, CaseNode, CaseStatus, TodoEntry,
};
pub use solution::{extract_solution, ExtractError, SolutionFamily};

use crate::Poly;

/// Root case for a system `equations = 0` with `inequalities != 0`.
pub fn new_session(equations: &[Poly], inequalities: &[Poly]) -> CaseNode {
    CaseNode::root(equations, inequalities, &[])
}
