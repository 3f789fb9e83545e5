//! Operator grids and the cross-number puzzles built on them.
//!
//! A grid of cells joined by `+ - * /` operators turns into one polynomial
//! equation per line ([`system`]). Solving that system with `xforge-core`
//! gives rational solution families, which [`generate`] instantiates,
//! encodes as letters ([`puzzle`]) and keeps only when [`unique`] finds
//! exactly one digit assignment.

pub mod generate;
pub mod grid;
pub mod puzzle;
pub mod system;
pub mod unique;

pub use generate::{generate, instantiate, replay, GenConfig, GenError, Generated, Provenance};
pub use grid::{line_count, operator_rows, parse_operator_rows, random_grid, reference_grid, DiagMode, Line, LineKind, Op, OperatorGrid};
pub use puzzle::{encode_letters, parse_puzzle, CellExpr, Convention, LetterMap, Puzzle, PuzzleError, PuzzleJson};
pub use system::{eval_line, eval_ops, grid_to_system, System};
pub use unique::{check_assignment, count_assignments, Assignment, CountReport, LineCheck, LineStatus};
