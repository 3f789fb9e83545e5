//! Counting the letter-to-digit assignments that solve a puzzle.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use xforge_core::Rat;

use crate::grid::{Line, Op};
use crate::puzzle::Puzzle;
use crate::system::{eval_ops, DivisionByZero};

pub type Assignment = BTreeMap<char, u8>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountReport {
    /// Exact count, or `cap + 1` when the search stopped early.
    pub count: usize,
    pub capped: bool,
    /// The first `cap` solutions found.
    pub assignments: Vec<Assignment>,
    pub nodes: u64,
    pub elapsed: Duration,
}

struct Compiled {
    /// Per cell: sign, numerator positions, denominator positions.
    cells: Vec<(bool, Vec<usize>, Option<Vec<usize>>)>,
    /// Per line: cell indices and operators.
    lines: Vec<(Vec<usize>, Vec<Op>)>,
    /// Lines whose last letter is the one at each order position.
    ready: Vec<Vec<usize>>,
    must_nonzero: Vec<bool>,
}

/// Letters by descending number of lines they occur in; ties alphabetical.
pub fn letter_order(p: &Puzzle) -> Vec<char> {
    let lines = p.lines();
    let mut counts: Vec<(usize, char)> = p
        .letters
        .iter()
        .map(|&l| {
            let k = lines
                .iter()
                .filter(|line| line.cells.iter().any(|&(r, c)| p.grid.cell(r, c).letters().any(|x| x == l)))
                .count();
            (k, l)
        })
        .collect();
    counts.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    counts.into_iter().map(|(_, l)| l).collect()
}

fn compile(p: &Puzzle, order: &[char]) -> Compiled {
    let pos = |ch: char| order.iter().position(|&x| x == ch).expect("every letter is ordered");
    let n = p.size();
    let mut must_nonzero = vec![false; order.len()];
    let mut cells = Vec::with_capacity(n * n);
    for cell in p.grid.cells() {
        let num: Vec<usize> = cell.num.chars().map(pos).collect();
        let den: Option<Vec<usize>> = cell.den.as_ref().map(|d| d.chars().map(pos).collect());
        if p.convention.leading_zero {
            for part in std::iter::once(&num).chain(den.iter()) {
                if part.len() > 1 {
                    must_nonzero[part[0]] = true;
                }
            }
        }
        cells.push((cell.negative, num, den));
    }
    let mut ready = vec![Vec::new(); order.len()];
    let mut lines = Vec::new();
    for (i, line) in p.lines().iter().enumerate() {
        let idx: Vec<usize> = line.cells.iter().map(|&(r, c)| r * n + c).collect();
        let last = idx
            .iter()
            .flat_map(|&k| {
                let (_, num, den) = &cells[k];
                num.iter().chain(den.iter().flatten()).copied().collect::<Vec<_>>()
            })
            .max()
            .expect("cells have letters");
        ready[last].push(i);
        lines.push((idx, line.ops.clone()));
    }
    Compiled { cells, lines, ready, must_nonzero }
}

fn numeral(positions: &[usize], digits: &[u8]) -> BigInt {
    let mut v = BigInt::zero();
    for &p in positions {
        v = v * 10u32 + digits[p];
    }
    v
}

fn cell_value(cell: &(bool, Vec<usize>, Option<Vec<usize>>), digits: &[u8]) -> Option<Rat> {
    let num = numeral(&cell.1, digits);
    let v = match &cell.2 {
        Some(d) => {
            let den = numeral(d, digits);
            if den.is_zero() {
                return None;
            }
            Rat::new(num, den)
        }
        None => Rat::from_integer(num),
    };
    Some(if cell.0 { -v } else { v })
}

fn line_is_zero(c: &Compiled, line: usize, digits: &[u8]) -> bool {
    let (cells, ops) = &c.lines[line];
    let mut values = Vec::with_capacity(cells.len());
    for &k in cells {
        match cell_value(&c.cells[k], digits) {
            Some(v) => values.push(v),
            None => return false,
        }
    }
    matches!(eval_ops(ops, &values), Ok(v) if v.is_zero())
}

struct Search<'a> {
    c: &'a Compiled,
    order: &'a [char],
    cap: usize,
    digits: Vec<u8>,
    used: u16,
    count: usize,
    nodes: u64,
    found: Vec<Assignment>,
}

impl Search<'_> {
    /// Returns false once the count exceeds the cap.
    fn go(&mut self, depth: usize) -> bool {
        if depth == self.order.len() {
            self.count += 1;
            if self.found.len() < self.cap {
                self.found.push(self.order.iter().copied().zip(self.digits.iter().copied()).collect());
            }
            return self.count <= self.cap;
        }
        for d in 0..10u8 {
            if self.used & (1 << d) != 0 || (d == 0 && self.c.must_nonzero[depth]) {
                continue;
            }
            self.nodes += 1;
            self.digits[depth] = d;
            if self.c.ready[depth].iter().all(|&l| line_is_zero(self.c, l, &self.digits)) {
                self.used |= 1 << d;
                let go_on = self.go(depth + 1);
                self.used &= !(1 << d);
                if !go_on {
                    return false;
                }
            }
        }
        true
    }
}

/// Counts solving assignments, stopping once more than `cap` are found.
pub fn count_assignments(p: &Puzzle, cap: usize) -> CountReport {
    count_with_order(p, cap, &letter_order(p))
}

/// As [`count_assignments`] with an explicit letter order.
pub fn count_with_order(p: &Puzzle, cap: usize, order: &[char]) -> CountReport {
    assert!(cap >= 1, "cap must be at least 1");
    let start = Instant::now();
    let c = compile(p, order);
    let mut s = Search {
        c: &c,
        order,
        cap,
        digits: vec![0; order.len()],
        used: 0,
        count: 0,
        nodes: 0,
        found: Vec::new(),
    };
    let finished = s.go(0);
    CountReport { count: s.count, capped: !finished, assignments: s.found, nodes: s.nodes, elapsed: start.elapsed() }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", content = "value", rename_all = "kebab-case")]
pub enum LineStatus {
    Zero,
    /// The exact nonzero value as `num/den` text.
    Nonzero(String),
    /// Some letter of the line is unassigned.
    Pending,
    DivisionByZero,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineCheck {
    pub label: String,
    pub line: Line,
    pub status: LineStatus,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AssignmentError {
    #[error("letters '{1}' and '{2}' both map to digit {0}")]
    NonInjective(u8, char, char),
    #[error("letter '{0}' maps to {1}, which is not a digit")]
    NotADigit(char, u8),
    #[error("letter '{0}' does not occur in the puzzle")]
    UnknownLetter(char),
}

/// Residual of every line under a possibly partial assignment.
pub fn check_assignment(p: &Puzzle, a: &Assignment) -> Result<Vec<LineCheck>, AssignmentError> {
    let mut by_digit: BTreeMap<u8, char> = BTreeMap::new();
    for (&l, &d) in a {
        if !p.letters.contains(&l) {
            return Err(AssignmentError::UnknownLetter(l));
        }
        if d > 9 {
            return Err(AssignmentError::NotADigit(l, d));
        }
        if let Some(&other) = by_digit.get(&d) {
            return Err(AssignmentError::NonInjective(d, other, l));
        }
        by_digit.insert(d, l);
    }
    let mut out = Vec::new();
    for line in p.lines() {
        let complete = line.cells.iter().all(|&(r, c)| p.grid.cell(r, c).letters().all(|l| a.contains_key(&l)));
        let status = if !complete {
            LineStatus::Pending
        } else {
            let values: Option<Vec<Rat>> =
                line.cells.iter().map(|&(r, c)| p.grid.cell(r, c).value(|l| a.get(&l).copied())).collect();
            match values.map(|v| eval_ops(&line.ops, &v)) {
                None | Some(Err(DivisionByZero)) => LineStatus::DivisionByZero,
                Some(Ok(v)) if v.is_zero() => LineStatus::Zero,
                Some(Ok(v)) => LineStatus::Nonzero(v.to_string()),
            }
        };
        out.push(LineCheck { label: line.label(), line, status });
    }
    Ok(out)
}

/// True if every multi-letter numeral starts with a nonzero digit (when the
/// convention asks for it).
pub fn respects_convention(p: &Puzzle, a: &Assignment) -> bool {
    if !p.convention.leading_zero {
        return true;
    }
    p.grid.cells().iter().all(|cell| {
        std::iter::once(&cell.num).chain(cell.den.iter()).all(|part| {
            part.chars().count() < 2 || part.chars().next().and_then(|l| a.get(&l)).map(|&d| d != 0).unwrap_or(true)
        })
    })
}
