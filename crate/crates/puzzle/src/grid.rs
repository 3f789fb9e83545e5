use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use xforge_core::VarId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Op {
    Plus,
    Minus,
    Times,
    Divide,
}

impl Op {
    pub fn symbol(self) -> char {
        match self {
            Op::Plus => '+',
            Op::Minus => '-',
            Op::Times => '*',
            Op::Divide => '/',
        }
    }

    pub fn from_symbol(c: char) -> Option<Op> {
        Some(match c {
            '+' => Op::Plus,
            '-' | '−' => Op::Minus,
            '*' | '×' => Op::Times,
            '/' | '÷' => Op::Divide,
            _ => return None,
        })
    }

    pub fn is_multiplicative(self) -> bool {
        matches!(self, Op::Times | Op::Divide)
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Which diagonals carry a line condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiagMode {
    /// Only the two diagonals of length n.
    MainOnly,
    /// Every diagonal with at least two cells.
    All,
}

impl DiagMode {
    /// The conventional choice for a size: two diagonals for 5×5, all
    /// diagonals otherwise.
    pub fn default_for(n: usize) -> DiagMode {
        if n == 5 {
            DiagMode::MainOnly
        } else {
            DiagMode::All
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DiagMode::MainOnly => "main",
            DiagMode::All => "all",
        }
    }
}

impl FromStr for DiagMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "main" | "main-only" => Ok(DiagMode::MainOnly),
            "all" => Ok(DiagMode::All),
            _ => Err(format!("unknown diagonal mode '{s}' (expected main or all)")),
        }
    }
}

impl fmt::Display for DiagMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LineKind {
    Row,
    Col,
    /// Top left to bottom right.
    DiagDr,
    /// Top right to bottom left.
    DiagDl,
}

/// One zero-sum condition: cells in reading order and the operators
/// between them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Line {
    pub kind: LineKind,
    /// Row or column number, diagonal offset `c - r`, or anti-diagonal
    /// sum `r + c` (all 0-based).
    pub index: i32,
    pub cells: Vec<(usize, usize)>,
    pub ops: Vec<Op>,
}

impl Line {
    pub fn label(&self) -> String {
        match self.kind {
            LineKind::Row => format!("row {}", self.index + 1),
            LineKind::Col => format!("col {}", self.index + 1),
            LineKind::DiagDr => format!("diag-dr {:+}", self.index),
            LineKind::DiagDl => format!("diag-dl {}", self.index),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GridError {
    #[error("grid size must be at least 1")]
    EmptyGrid,
    #[error("expected {expected} {what}, found {found}")]
    Shape { what: &'static str, expected: usize, found: usize },
    #[error("{requested} multiplicative operators requested but only {slots} slots are available")]
    BudgetExceedsSlots { requested: usize, slots: usize },
    #[error("operator row {row}: {message}")]
    BadRow { row: usize, message: String },
}

/// An n×n grid of cells with all row, column and diagonal operators.
///
/// In the interleaved (2n−1)×(2n−1) layout (0-based) cells sit at
/// (even, even), row operators at (even, odd), column operators at
/// (odd, even) and diagonal operators at (odd, odd). A diagonal operator is
/// shared by the two diagonal steps that cross at its position.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OperatorGrid<C> {
    n: usize,
    cells: Vec<C>,
    row_ops: Vec<Op>,
    col_ops: Vec<Op>,
    diag_ops: Vec<Op>,
}

impl<C> OperatorGrid<C> {
    /// `cells` row-major; `row_ops` n×(n−1); `col_ops` (n−1)×n;
    /// `diag_ops` (n−1)×(n−1), all row-major.
    pub fn new(n: usize, cells: Vec<C>, row_ops: Vec<Op>, col_ops: Vec<Op>, diag_ops: Vec<Op>) -> Result<Self, GridError> {
        if n == 0 {
            return Err(GridError::EmptyGrid);
        }
        let check = |what, expected: usize, found: usize| {
            if expected == found {
                Ok(())
            } else {
                Err(GridError::Shape { what, expected, found })
            }
        };
        check("cells", n * n, cells.len())?;
        check("row operators", n * (n - 1), row_ops.len())?;
        check("column operators", (n - 1) * n, col_ops.len())?;
        check("diagonal operators", (n - 1) * (n - 1), diag_ops.len())?;
        Ok(OperatorGrid { n, cells, row_ops, col_ops, diag_ops })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn cell(&self, r: usize, c: usize) -> &C {
        &self.cells[r * self.n + c]
    }

    pub fn cells(&self) -> &[C] {
        &self.cells
    }

    /// Operator between (r, c) and (r, c+1).
    pub fn row_op(&self, r: usize, c: usize) -> Op {
        self.row_ops[r * (self.n - 1) + c]
    }

    /// Operator between (r, c) and (r+1, c).
    pub fn col_op(&self, r: usize, c: usize) -> Op {
        self.col_ops[r * self.n + c]
    }

    /// Operator at interleaved position (2r+1, 2c+1).
    pub fn diag_op(&self, r: usize, c: usize) -> Op {
        self.diag_ops[r * (self.n - 1) + c]
    }

    pub fn row_ops(&self) -> &[Op] {
        &self.row_ops
    }

    pub fn col_ops(&self) -> &[Op] {
        &self.col_ops
    }

    pub fn diag_ops(&self) -> &[Op] {
        &self.diag_ops
    }

    pub fn map_cells<D>(&self, f: impl FnMut(&C) -> D) -> OperatorGrid<D> {
        OperatorGrid {
            n: self.n,
            cells: self.cells.iter().map(f).collect(),
            row_ops: self.row_ops.clone(),
            col_ops: self.col_ops.clone(),
            diag_ops: self.diag_ops.clone(),
        }
    }

    /// Number of `(times, divide)` operators on the given lines.
    pub fn nonlinear_counts(&self, mode: DiagMode) -> (usize, usize) {
        let mut slots = std::collections::BTreeSet::new();
        for line in self.lines(mode) {
            for w in 0..line.ops.len() {
                slots.insert(op_slot(&line, w));
            }
        }
        let mut t = 0;
        let mut d = 0;
        for (r, c) in slots {
            match self.interleaved_op(r, c) {
                Op::Times => t += 1,
                Op::Divide => d += 1,
                _ => {}
            }
        }
        (t, d)
    }

    /// Operator at an interleaved position that holds one.
    pub fn interleaved_op(&self, r: usize, c: usize) -> Op {
        match (r % 2, c % 2) {
            (0, 1) => self.row_op(r / 2, c / 2),
            (1, 0) => self.col_op(r / 2, c / 2),
            (1, 1) => self.diag_op(r / 2, c / 2),
            _ => panic!("interleaved position ({r}, {c}) holds a cell"),
        }
    }

    /// All line conditions: rows, columns, then down-right and down-left
    /// diagonals.
    pub fn lines(&self, mode: DiagMode) -> Vec<Line> {
        let n = self.n;
        let mut out = Vec::new();
        for r in 0..n {
            out.push(Line {
                kind: LineKind::Row,
                index: r as i32,
                cells: (0..n).map(|c| (r, c)).collect(),
                ops: (0..n - 1).map(|c| self.row_op(r, c)).collect(),
            });
        }
        for c in 0..n {
            out.push(Line {
                kind: LineKind::Col,
                index: c as i32,
                cells: (0..n).map(|r| (r, c)).collect(),
                ops: (0..n - 1).map(|r| self.col_op(r, c)).collect(),
            });
        }
        if n < 2 {
            return out;
        }
        let k = n as i32 - 2;
        let dr: Vec<i32> = match mode {
            DiagMode::All => (-k..=k).collect(),
            DiagMode::MainOnly => vec![0],
        };
        for off in dr {
            let cells: Vec<(usize, usize)> = (0..n as i32)
                .filter(|&r| (0..n as i32).contains(&(r + off)))
                .map(|r| (r as usize, (r + off) as usize))
                .collect();
            let ops = cells.windows(2).map(|w| self.diag_op(w[0].0, w[0].1)).collect();
            out.push(Line { kind: LineKind::DiagDr, index: off, cells, ops });
        }
        let dl: Vec<i32> = match mode {
            DiagMode::All => (1..=2 * n as i32 - 3).collect(),
            DiagMode::MainOnly => vec![n as i32 - 1],
        };
        for sum in dl {
            let cells: Vec<(usize, usize)> = (0..n as i32)
                .filter(|&r| (0..n as i32).contains(&(sum - r)))
                .map(|r| (r as usize, (sum - r) as usize))
                .collect();
            let ops = cells.windows(2).map(|w| self.diag_op(w[0].0, w[1].1)).collect();
            out.push(Line { kind: LineKind::DiagDl, index: sum, cells, ops });
        }
        out
    }
}

/// Interleaved position of the operator between cells `w` and `w+1`.
fn op_slot(line: &Line, w: usize) -> (usize, usize) {
    let (a, b) = (line.cells[w], line.cells[w + 1]);
    (a.0 + b.0, a.1 + b.1)
}

/// Number of lines for a size and diagonal mode.
pub fn line_count(n: usize, mode: DiagMode) -> usize {
    match (mode, n) {
        (_, 0 | 1) => 2 * n,
        (DiagMode::MainOnly, _) => 2 * n + 2,
        (DiagMode::All, _) => 2 * n + 2 * (2 * n - 3),
    }
}

impl OperatorGrid<VarId> {
    /// Cell (r, c) holds `u(r*n + c + 1)`.
    pub fn with_variables(n: usize, row_ops: Vec<Op>, col_ops: Vec<Op>, diag_ops: Vec<Op>) -> Result<Self, GridError> {
        let cells = (0..n * n).map(|i| VarId(i as u32 + 1)).collect();
        OperatorGrid::new(n, cells, row_ops, col_ops, diag_ops)
    }
}

/// A seeded random operator grid with exactly `n_times` multiplications and
/// `n_div` divisions, placed uniformly among the operator slots that the
/// lines of `mode` use. Other slots get `+` or `-` with equal odds.
pub fn random_grid(n: usize, n_times: usize, n_div: usize, mode: DiagMode, seed: u64) -> Result<OperatorGrid<VarId>, GridError> {
    if n == 0 {
        return Err(GridError::EmptyGrid);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut grid = OperatorGrid::with_variables(
        n,
        vec![Op::Plus; n * (n - 1)],
        vec![Op::Plus; (n - 1) * n],
        vec![Op::Plus; (n - 1) * (n - 1)],
    )?;
    let mut used = std::collections::BTreeSet::new();
    for line in grid.lines(mode) {
        for w in 0..line.ops.len() {
            used.insert(op_slot(&line, w));
        }
    }
    let mut slots: Vec<(usize, usize)> = used.into_iter().collect();
    let requested = n_times + n_div;
    if requested > slots.len() {
        return Err(GridError::BudgetExceedsSlots { requested, slots: slots.len() });
    }
    for r in 0..2 * n - 1 {
        for c in 0..2 * n - 1 {
            if (r + c) % 2 == 1 || r % 2 == 1 {
                let op = if rng.gen_bool(0.5) { Op::Plus } else { Op::Minus };
                grid.set_interleaved_op(r, c, op);
            }
        }
    }
    slots.shuffle(&mut rng);
    for (i, &(r, c)) in slots.iter().take(requested).enumerate() {
        grid.set_interleaved_op(r, c, if i < n_times { Op::Times } else { Op::Divide });
    }
    Ok(grid)
}

impl<C> OperatorGrid<C> {
    pub(crate) fn set_interleaved_op(&mut self, r: usize, c: usize, op: Op) {
        let n = self.n;
        match (r % 2, c % 2) {
            (0, 1) => self.row_ops[(r / 2) * (n - 1) + c / 2] = op,
            (1, 0) => self.col_ops[(r / 2) * n + c / 2] = op,
            (1, 1) => self.diag_ops[(r / 2) * (n - 1) + c / 2] = op,
            _ => panic!("interleaved position ({r}, {c}) holds a cell"),
        }
    }
}

/// The 7×7 operator setting with three multiplications and two divisions
/// used as the main worked example.
pub fn reference_grid() -> OperatorGrid<VarId> {
    const ROWS: [&str; 13] = [
        "c + c + c - c - c * c - c",
        "- - / - - - - - + + - + +",
        "c - c + c + c - c - c - c",
        "- + - - - + - - - + - - +",
        "c + c + c - c - c - c + c",
        "+ + - - - + * + + - + - +",
        "c + c - c + c + c - c - c",
        "- - - - + + - + + - - + +",
        "c - c - c + c + c - c * c",
        "+ + + - - + + - / - + + -",
        "c + c - c - c - c + c + c",
        "+ - + - - - - - - + - - +",
        "c + c + c - c - c - c + c",
    ];
    let n = 7;
    let mut grid = OperatorGrid::with_variables(
        n,
        vec![Op::Plus; n * (n - 1)],
        vec![Op::Plus; (n - 1) * n],
        vec![Op::Plus; (n - 1) * (n - 1)],
    )
    .expect("shape");
    for (r, row) in ROWS.iter().enumerate() {
        for (c, tok) in row.split(' ').enumerate() {
            if tok != "c" {
                grid.set_interleaved_op(r, c, Op::from_symbol(tok.chars().next().unwrap()).unwrap());
            }
        }
    }
    grid
}

/// Interleaved operator rows with `c` (or any token) at cell positions, as
/// written by [`operator_rows`].
pub fn parse_operator_rows<S: AsRef<str>>(n: usize, rows: &[S]) -> Result<OperatorGrid<VarId>, GridError> {
    if n == 0 {
        return Err(GridError::EmptyGrid);
    }
    let m = 2 * n - 1;
    if rows.len() != m {
        return Err(GridError::Shape { what: "operator rows", expected: m, found: rows.len() });
    }
    let mut row_ops = vec![Op::Plus; n * (n - 1)];
    let mut col_ops = vec![Op::Plus; (n - 1) * n];
    let mut diag_ops = vec![Op::Plus; (n - 1) * (n - 1)];
    for (r, row) in rows.iter().enumerate() {
        let bad = |message: String| GridError::BadRow { row: r + 1, message };
        let toks: Vec<&str> = row.as_ref().split_whitespace().collect();
        if toks.len() != m {
            return Err(bad(format!("expected {m} entries, found {}", toks.len())));
        }
        for (c, t) in toks.iter().enumerate() {
            if r % 2 == 0 && c % 2 == 0 {
                continue;
            }
            let mut chars = t.chars();
            let op = match (chars.next().and_then(Op::from_symbol), chars.next()) {
                (Some(op), None) => op,
                _ => return Err(bad(format!("unknown operator '{t}' in entry {}", c + 1))),
            };
            match (r % 2, c % 2) {
                (0, 1) => row_ops[(r / 2) * (n - 1) + c / 2] = op,
                (1, 0) => col_ops[(r / 2) * n + c / 2] = op,
                _ => diag_ops[(r / 2) * (n - 1) + c / 2] = op,
            }
        }
    }
    OperatorGrid::with_variables(n, row_ops, col_ops, diag_ops)
}

/// Interleaved rows with `c` at cell positions.
pub fn operator_rows<C>(g: &OperatorGrid<C>) -> Vec<String> {
    let m = 2 * g.size() - 1;
    (0..m)
        .map(|r| {
            (0..m)
                .map(|c| if r % 2 == 0 && c % 2 == 0 { "c".to_string() } else { g.interleaved_op(r, c).to_string() })
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect()
}
