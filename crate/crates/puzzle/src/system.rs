//! Line evaluation, the polynomial system of a grid, and the system file
//! format.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use xforge_core::poly::parse_poly;
use xforge_core::{Mono, Poly, Rat, VarId};

use crate::grid::{DiagMode, Line, Op, OperatorGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("division by zero")]
pub struct DivisionByZero;

/// Value of `v0 op0 v1 op1 ...` with `*` and `/` binding tighter than `+`
/// and `-`, equal precedence associating to the left.
pub fn eval_ops(ops: &[Op], values: &[Rat]) -> Result<Rat, DivisionByZero> {
    assert_eq!(ops.len() + 1, values.len(), "one operator between each pair of values");
    let mut total = Rat::zero();
    let mut term = values[0].clone();
    let mut sign_negative = false;
    for (op, v) in ops.iter().zip(&values[1..]) {
        match op {
            Op::Times => term *= v,
            Op::Divide => {
                if v.is_zero() {
                    return Err(DivisionByZero);
                }
                term /= v;
            }
            Op::Plus | Op::Minus => {
                if sign_negative {
                    total -= &term;
                } else {
                    total += &term;
                }
                sign_negative = *op == Op::Minus;
                term = v.clone();
            }
        }
    }
    if sign_negative {
        total -= &term;
    } else {
        total += &term;
    }
    Ok(total)
}

/// Value of a line given a value per cell.
pub fn eval_line<C>(line: &Line, grid: &OperatorGrid<C>, value: impl Fn(&C) -> Rat) -> Result<Rat, DivisionByZero> {
    let values: Vec<Rat> = line.cells.iter().map(|&(r, c)| value(grid.cell(r, c))).collect();
    eval_ops(&line.ops, &values)
}

/// A polynomial system `equations = 0`, `inequalities != 0`, plus groups
/// of which at least one member is nonzero.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct System {
    pub vars: Vec<VarId>,
    #[serde(with = "poly_list")]
    pub equations: Vec<Poly>,
    #[serde(with = "poly_list")]
    pub inequalities: Vec<Poly>,
    #[serde(default, with = "poly_groups")]
    pub or_groups: Vec<Vec<Poly>>,
}

mod poly_list {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use xforge_core::Poly;

    pub fn serialize<S: Serializer>(v: &[Poly], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|p| p.to_string()).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Poly>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter().map(|s| s.parse().map_err(serde::de::Error::custom)).collect()
    }
}

mod poly_groups {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use xforge_core::Poly;

    pub fn serialize<S: Serializer>(v: &[Vec<Poly>], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(|g| g.iter().map(|p| p.to_string()).collect::<Vec<_>>())
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Poly>>, D::Error> {
        let v = Vec::<Vec<String>>::deserialize(d)?;
        v.iter()
            .map(|g| g.iter().map(|s| s.parse().map_err(serde::de::Error::custom)).collect())
            .collect()
    }
}

/// One equation per line: the line value with all divisions cleared by the
/// least common multiple of the divisor products. Every divisor cell becomes
/// an inequality.
pub fn grid_to_system(grid: &OperatorGrid<VarId>, mode: DiagMode) -> System {
    let mut equations = Vec::new();
    let mut divisors: BTreeSet<VarId> = BTreeSet::new();
    for line in grid.lines(mode) {
        // terms as (negative, numerator, divisor) monomials
        let mut terms: Vec<(bool, Mono, Mono)> = Vec::new();
        let (r0, c0) = line.cells[0];
        let mut cur = (false, Mono::var(*grid.cell(r0, c0)), Mono::one());
        for (op, &(r, c)) in line.ops.iter().zip(&line.cells[1..]) {
            let v = *grid.cell(r, c);
            match op {
                Op::Times => cur.1 = cur.1.mul(&Mono::var(v)),
                Op::Divide => {
                    divisors.insert(v);
                    cur.2 = cur.2.mul(&Mono::var(v));
                }
                Op::Plus | Op::Minus => {
                    terms.push(cur);
                    cur = (*op == Op::Minus, Mono::var(v), Mono::one());
                }
            }
        }
        terms.push(cur);
        let mut lcm = Mono::one();
        for (_, _, d) in &terms {
            let g = lcm.gcd(d);
            lcm = lcm.mul(d).div(&g).expect("gcd divides");
        }
        let mut eq = Poly::zero();
        for (neg, num, den) in terms {
            let m = num.mul(&lcm.div(&den).expect("lcm is a multiple"));
            let c = if neg { -Rat::one() } else { Rat::one() };
            eq = eq.add(&Poly::monomial(m, c));
        }
        equations.push(eq);
    }
    let n = grid.size();
    System {
        vars: (1..=(n * n) as u32).map(VarId).collect(),
        equations,
        inequalities: divisors.into_iter().map(Poly::var).collect(),
        or_groups: Vec::new(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct SystemParseError {
    pub line: usize,
    pub message: String,
}

impl System {
    /// Text form: `var u<k> ...`, `eq <poly>`, `ineq <poly>` and
    /// `or <poly> | <poly> ...` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if !self.vars.is_empty() {
            let vars: Vec<String> = self.vars.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "var {}", vars.join(" "));
        }
        for p in &self.equations {
            let _ = writeln!(out, "eq {p}");
        }
        for p in &self.inequalities {
            let _ = writeln!(out, "ineq {p}");
        }
        for g in &self.or_groups {
            let parts: Vec<String> = g.iter().map(|p| p.to_string()).collect();
            let _ = writeln!(out, "or {}", parts.join(" | "));
        }
        out
    }

    pub fn parse(text: &str) -> Result<System, SystemParseError> {
        let mut sys = System::default();
        let mut declared = BTreeSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |message: String| SystemParseError { line, message };
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, rest) = content.split_once(char::is_whitespace).unwrap_or((content, ""));
            let poly = |s: &str| parse_poly(s.trim()).map_err(|e| err(format!("{e}")));
            match key {
                "var" => {
                    for tok in rest.split_whitespace() {
                        let k = tok
                            .strip_prefix('u')
                            .and_then(|k| k.parse::<u32>().ok())
                            .ok_or_else(|| err(format!("bad variable '{tok}'")))?;
                        if declared.insert(VarId(k)) {
                            sys.vars.push(VarId(k));
                        }
                    }
                }
                "eq" => sys.equations.push(poly(rest)?),
                "ineq" => sys.inequalities.push(poly(rest)?),
                "or" => {
                    let g = rest.split('|').map(poly).collect::<Result<Vec<_>, _>>()?;
                    sys.or_groups.push(g);
                }
                _ => return Err(err(format!("unknown keyword '{key}'"))),
            }
        }
        let mut seen: BTreeSet<VarId> = declared;
        for p in sys.equations.iter().chain(&sys.inequalities).chain(sys.or_groups.iter().flatten()) {
            for v in p.vars() {
                if seen.insert(v) {
                    sys.vars.push(v);
                }
            }
        }
        sys.vars.sort();
        Ok(sys)
    }
}
