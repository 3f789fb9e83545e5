use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use xforge_core::Rat;

use crate::grid::{DiagMode, GridError, Line, Op, OperatorGrid};

/// A cell `[-]LETTERS[/LETTERS]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CellExpr {
    pub negative: bool,
    pub num: String,
    pub den: Option<String>,
}

impl CellExpr {
    pub fn letters(&self) -> impl Iterator<Item = char> + '_ {
        self.num.chars().chain(self.den.iter().flat_map(|d| d.chars()))
    }

    /// Value under a digit per letter; `None` if a letter is unassigned or
    /// the denominator is zero.
    pub fn value(&self, digit: impl Fn(char) -> Option<u8>) -> Option<Rat> {
        let numeral = |s: &str| -> Option<BigInt> {
            let mut v = BigInt::zero();
            for ch in s.chars() {
                v = v * 10u32 + digit(ch)?;
            }
            Some(v)
        };
        let num = numeral(&self.num)?;
        let den = match &self.den {
            Some(d) => numeral(d)?,
            None => BigInt::from(1),
        };
        if den.is_zero() {
            return None;
        }
        let v = Rat::new(num, den);
        Some(if self.negative { -v } else { v })
    }
}

impl fmt::Display for CellExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negative {
            f.write_str("-")?;
        }
        f.write_str(&self.num)?;
        if let Some(d) = &self.den {
            write!(f, "/{d}")?;
        }
        Ok(())
    }
}

impl FromStr for CellExpr {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (negative, body) = match s.strip_prefix('-').or_else(|| s.strip_prefix('−')) {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let (num, den) = match body.split_once('/') {
            Some((n, d)) => (n, Some(d)),
            None => (body, None),
        };
        let check = |part: &str, what: &str| -> Result<String, String> {
            if part.is_empty() {
                return Err(format!("empty {what}"));
            }
            if let Some(bad) = part.chars().find(|c| !c.is_ascii_lowercase()) {
                return Err(format!("unexpected symbol '{bad}' in {what}"));
            }
            Ok(part.to_string())
        };
        Ok(CellExpr {
            negative,
            num: check(num, "numerator")?,
            den: den.map(|d| check(d, "denominator")).transpose()?,
        })
    }
}

/// How numerals are read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Convention {
    /// Multi-letter numerals may not start with the digit 0.
    pub leading_zero: bool,
    pub diagonals: DiagMode,
}

impl Convention {
    pub fn for_size(n: usize) -> Convention {
        Convention { leading_zero: true, diagonals: DiagMode::default_for(n) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Puzzle {
    pub grid: OperatorGrid<CellExpr>,
    /// Distinct letters in alphabetical order.
    pub letters: Vec<char>,
    pub convention: Convention,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PuzzleError {
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("{0}")]
    Grid(#[from] GridError),
    #[error("{0} distinct letters; at most 10 are allowed")]
    TooManyLetters(usize),
    #[error("invalid JSON: {0}")]
    Json(String),
}

impl Puzzle {
    pub fn new(grid: OperatorGrid<CellExpr>, convention: Convention) -> Result<Puzzle, PuzzleError> {
        let letters: BTreeSet<char> = grid.cells().iter().flat_map(|c| c.letters()).collect();
        if letters.len() > 10 {
            return Err(PuzzleError::TooManyLetters(letters.len()));
        }
        Ok(Puzzle { grid, letters: letters.into_iter().collect(), convention })
    }

    pub fn size(&self) -> usize {
        self.grid.size()
    }

    pub fn lines(&self) -> Vec<Line> {
        self.grid.lines(self.convention.diagonals)
    }

    /// Cell values under a complete assignment.
    pub fn decode(&self, assignment: &BTreeMap<char, u8>) -> Option<OperatorGrid<Rat>> {
        let mut cells = Vec::with_capacity(self.grid.cells().len());
        for c in self.grid.cells() {
            cells.push(c.value(|ch| assignment.get(&ch).copied())?);
        }
        let n = self.size();
        OperatorGrid::new(n, cells, self.grid.row_ops().to_vec(), self.grid.col_ops().to_vec(), self.grid.diag_ops().to_vec())
            .ok()
    }

    /// The interleaved rows as tokens.
    pub fn interleaved_rows(&self) -> Vec<Vec<String>> {
        let n = self.size();
        (0..2 * n - 1)
            .map(|r| {
                (0..2 * n - 1)
                    .map(|c| {
                        if r % 2 == 0 && c % 2 == 0 {
                            self.grid.cell(r / 2, c / 2).to_string()
                        } else {
                            self.grid.interleaved_op(r, c).symbol().to_string()
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// The puzzle file text.
    pub fn render_text(&self) -> String {
        let mut out = format!(
            "size {}\nconvention leading-zero={} diagonals={}\n",
            self.size(),
            if self.convention.leading_zero { "on" } else { "off" },
            self.convention.diagonals
        );
        for row in self.interleaved_rows() {
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    /// The interleaved layout with aligned columns.
    pub fn render_pretty(&self) -> String {
        let rows = self.interleaved_rows();
        let width = rows.iter().flatten().map(|t| t.chars().count()).max().unwrap_or(1);
        let mut out = String::new();
        for row in rows {
            let cells: Vec<String> = row.iter().map(|t| format!("{t:>width$}")).collect();
            out.push_str(cells.join("  ").trim_end());
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> PuzzleJson {
        PuzzleJson {
            size: self.size(),
            convention: self.convention,
            letters: self.letters.iter().collect(),
            rows: self.interleaved_rows(),
        }
    }

    pub fn from_json(j: &PuzzleJson) -> Result<Puzzle, PuzzleError> {
        let mut text = format!(
            "size {}\nconvention leading-zero={} diagonals={}\n",
            j.size,
            if j.convention.leading_zero { "on" } else { "off" },
            j.convention.diagonals
        );
        for row in &j.rows {
            text.push_str(&row.join(" "));
            text.push('\n');
        }
        parse_puzzle(&text)
    }
}

impl fmt::Display for Puzzle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_text())
    }
}

/// JSON mirror of the puzzle file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PuzzleJson {
    pub size: usize,
    pub convention: Convention,
    pub letters: String,
    pub rows: Vec<Vec<String>>,
}

pub fn parse_puzzle(text: &str) -> Result<Puzzle, PuzzleError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim_end()))
        .filter(|(_, l)| !l.trim().is_empty());
    let perr = |line: usize, column: usize, message: String| PuzzleError::Parse { line, column, message };

    let (ln, first) = lines.next().ok_or_else(|| perr(1, 1, "empty puzzle file".into()))?;
    let n: usize = first
        .trim()
        .strip_prefix("size ")
        .and_then(|s| s.trim().parse().ok())
        .filter(|&n| n >= 1)
        .ok_or_else(|| perr(ln, 1, "expected 'size <n>'".into()))?;

    let (ln, second) = lines.next().ok_or_else(|| perr(ln + 1, 1, "missing convention line".into()))?;
    let mut convention = Convention::for_size(n);
    let mut toks = second.split_whitespace();
    if toks.next() != Some("convention") {
        return Err(perr(ln, 1, "expected 'convention leading-zero=<on|off>'".into()));
    }
    let mut seen_lz = false;
    for tok in toks {
        let col = second.find(tok).unwrap_or(0) + 1;
        match tok.split_once('=') {
            Some(("leading-zero", "on")) => {
                convention.leading_zero = true;
                seen_lz = true;
            }
            Some(("leading-zero", "off")) => {
                convention.leading_zero = false;
                seen_lz = true;
            }
            Some(("diagonals", v)) => convention.diagonals = v.parse().map_err(|e| perr(ln, col, e))?,
            _ => return Err(perr(ln, col, format!("unknown convention setting '{tok}'"))),
        }
    }
    if !seen_lz {
        return Err(perr(ln, 1, "missing leading-zero setting".into()));
    }

    let m = 2 * n - 1;
    let mut cells = Vec::with_capacity(n * n);
    let mut row_ops = vec![Op::Plus; n * (n - 1)];
    let mut col_ops = vec![Op::Plus; (n - 1) * n];
    let mut diag_ops = vec![Op::Plus; (n - 1) * (n - 1)];
    let mut last = ln;
    for r in 0..m {
        let (ln, row) = lines.next().ok_or_else(|| perr(last + 1, 1, format!("expected {m} grid rows, found {r}")))?;
        last = ln;
        let mut col = 0;
        let mut tokens = Vec::new();
        for part in row.split(' ') {
            if part.is_empty() {
                return Err(perr(ln, col + 1, "entries must be separated by single spaces".into()));
            }
            tokens.push((col + 1, part));
            col += part.chars().count() + 1;
        }
        if tokens.len() != m {
            return Err(perr(ln, 1, format!("expected {m} entries, found {}", tokens.len())));
        }
        for (c, (column, tok)) in tokens.into_iter().enumerate() {
            if r % 2 == 0 && c % 2 == 0 {
                let cell: CellExpr = tok.parse().map_err(|e| perr(ln, column, e))?;
                cells.push(cell);
                continue;
            }
            let mut chars = tok.chars();
            let op = match (chars.next().and_then(Op::from_symbol), chars.next()) {
                (Some(op), None) => op,
                _ => return Err(perr(ln, column, format!("unknown operator '{tok}'"))),
            };
            match (r % 2, c % 2) {
                (0, 1) => row_ops[(r / 2) * (n - 1) + c / 2] = op,
                (1, 0) => col_ops[(r / 2) * n + c / 2] = op,
                _ => diag_ops[(r / 2) * (n - 1) + c / 2] = op,
            }
        }
    }
    if let Some((ln, _)) = lines.next() {
        return Err(perr(ln, 1, "unexpected content after the grid".into()));
    }
    let grid = OperatorGrid::new(n, cells, row_ops, col_ops, diag_ops)?;
    Puzzle::new(grid, convention)
}

impl FromStr for Puzzle {
    type Err = PuzzleError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_puzzle(s)
    }
}

/// A digit to letter bijection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LetterMap(pub [char; 10]);

impl LetterMap {
    pub fn seeded(seed: u64) -> LetterMap {
        let mut letters: Vec<char> = ('a'..='j').collect();
        letters.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut out = ['a'; 10];
        out.copy_from_slice(&letters);
        LetterMap(out)
    }

    pub fn letter(&self, digit: u8) -> char {
        self.0[digit as usize]
    }

    pub fn encode(&self, digits: &str) -> String {
        digits.bytes().map(|b| self.letter(b - b'0')).collect()
    }

    /// The inverse map, restricted to `letters`.
    pub fn assignment(&self, letters: &[char]) -> BTreeMap<char, u8> {
        letters
            .iter()
            .filter_map(|&l| self.0.iter().position(|&x| x == l).map(|d| (l, d as u8)))
            .collect()
    }
}

/// Renders every cell value in lowest terms and replaces digits by letters.
pub fn encode_letters(values: &OperatorGrid<Rat>, map: &LetterMap, convention: Convention) -> Result<Puzzle, PuzzleError> {
    let grid = values.map_cells(|v| CellExpr {
        negative: v.is_negative(),
        num: map.encode(&v.numer().abs().to_string()),
        den: if v.is_integer() { None } else { Some(map.encode(&v.denom().to_string())) },
    });
    Puzzle::new(grid, convention)
}
