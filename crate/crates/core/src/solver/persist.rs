//! Line-oriented text form of a session. Solutions are not stored; they are
//! re-extracted (and re-verified) on load.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;
use std::time::Duration;

use thiserror::Error;

use super::module::ProcList;
use super::session::{Limits, Session, SessionError, SolverConfig};
use crate::case::{
    Assumption, AssumptionKind, Binding, CaseId, CaseNode, CaseStatus, Equation, InequalitySet, TodoEntry,
};
use crate::factor::{FactorStatus, Factorization};
use crate::poly::{parse_poly, VarId};
use crate::scalar::Rat;
use crate::Poly;

const HEADER: &str = "xforge-session 1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PersistError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error(transparent)]
    Session(#[from] SessionError),
}

fn or_text(g: &[Poly]) -> String {
    g.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(" | ")
}

pub fn save_session(s: &Session) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{HEADER}");
    let _ = writeln!(out, "plist {}", s.config.plist);
    let l = &s.config.limits;
    let _ = writeln!(out, "limits max-terms={} max-cases={} wall-secs={}", l.max_terms, l.max_cases, l.wall.as_secs());
    let _ = writeln!(out, "option explore-nonzero={}", if s.config.explore_nonzero { "yes" } else { "no" });
    let vars: Vec<String> = s.universe.iter().map(|v| v.to_string()).collect();
    let _ = writeln!(out, "universe {}", vars.join(" "));
    for p in &s.originals {
        let _ = writeln!(out, "orig-eq {p}");
    }
    for p in &s.orig_ineqs {
        let _ = writeln!(out, "orig-ineq {p}");
    }
    for g in &s.or_groups {
        let _ = writeln!(out, "orig-or {}", or_text(g));
    }
    if !s.solutions.is_empty() {
        let ids: Vec<String> = s.solutions.iter().map(|f| f.case.to_string()).collect();
        let _ = writeln!(out, "families {}", ids.join(" "));
    }
    for n in s.nodes.values() {
        let parent = n.parent.as_ref().map(|p| p.to_string()).unwrap_or_else(|| "-".into());
        let _ = writeln!(out, "case {} status={} parent={}", n.id, n.status, parent);
        if !n.reason.is_empty() {
            let _ = writeln!(out, "  reason {}", n.reason.replace('\n', " "));
        }
        for a in &n.assumptions {
            let kind = match a.kind {
                AssumptionKind::Zero => "zero",
                AssumptionKind::Nonzero => "nonzero",
            };
            let _ = writeln!(out, "  assume {kind} {}", a.poly);
        }
        for e in &n.equations {
            let _ = writeln!(out, "  eq {}", e.poly());
            if let Some(f) = e.factors() {
                let mut line = format!("  factors {} {}", f.status, f.content);
                for (g, m) in &f.factors {
                    let _ = write!(line, " ; {m} {g}");
                }
                let _ = writeln!(out, "{line}");
            }
        }
        for p in n.inequalities.nonzero() {
            let _ = writeln!(out, "  ineq {p}");
        }
        for g in n.inequalities.or_groups() {
            let _ = writeln!(out, "  or {}", or_text(g));
        }
        for b in &n.bindings {
            let _ = writeln!(out, "  bind {} {} / {}", b.var, b.num, b.den);
        }
        for t in &n.todo {
            let _ = writeln!(out, "  todo {t}");
        }
        for c in &n.children {
            let _ = writeln!(out, "  child {c}");
        }
        let _ = writeln!(out, "end");
    }
    out
}

struct Reader {
    line: usize,
}

impl Reader {
    fn err<T>(&self, message: impl Into<String>) -> Result<T, PersistError> {
        Err(PersistError::Syntax { line: self.line, message: message.into() })
    }

    fn poly(&self, s: &str) -> Result<Poly, PersistError> {
        parse_poly(s.trim()).or_else(|e| self.err(e.to_string()))
    }

    fn var(&self, s: &str) -> Result<VarId, PersistError> {
        match s.strip_prefix('u').and_then(|k| k.parse().ok()) {
            Some(k) => Ok(VarId(k)),
            None => self.err(format!("bad variable '{s}'")),
        }
    }

    fn case_id(&self, s: &str) -> Result<CaseId, PersistError> {
        s.parse().or_else(|_| self.err(format!("bad case id '{s}'")))
    }

    fn or_group(&self, s: &str) -> Result<Vec<Poly>, PersistError> {
        s.split('|').map(|p| self.poly(p)).collect()
    }

    fn kv<'a>(&self, token: &'a str, key: &str) -> Result<&'a str, PersistError> {
        match token.split_once('=') {
            Some((k, v)) if k == key => Ok(v),
            _ => self.err(format!("expected {key}=...")),
        }
    }
}

fn empty_node(id: CaseId, status: CaseStatus, parent: Option<CaseId>) -> CaseNode {
    CaseNode {
        id,
        parent,
        assumptions: Vec::new(),
        equations: Vec::new(),
        inequalities: InequalitySet::new(),
        bindings: Vec::new(),
        status,
        todo: VecDeque::new(),
        children: Vec::new(),
        reason: String::new(),
    }
}

pub fn load_session(text: &str) -> Result<Session, PersistError> {
    let mut r = Reader { line: 0 };
    let mut config = SolverConfig::default();
    let mut originals = Vec::new();
    let mut orig_ineqs = Vec::new();
    let mut or_groups = Vec::new();
    let mut universe = BTreeSet::new();
    let mut nodes = Vec::new();
    let mut family_order = Vec::new();
    let mut current: Option<CaseNode> = None;
    let mut seen_header = false;
    for raw in text.lines() {
        r.line += 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !seen_header {
            if line != HEADER {
                return r.err(format!("expected '{HEADER}'"));
            }
            seen_header = true;
            continue;
        }
        let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
        if let Some(node) = current.as_mut() {
            match key {
                "reason" => node.reason = rest.to_string(),
                "assume" => {
                    let (kind, p) = rest.split_once(' ').unwrap_or((rest, ""));
                    let kind = match kind {
                        "zero" => AssumptionKind::Zero,
                        "nonzero" => AssumptionKind::Nonzero,
                        _ => return r.err("assumption kind must be zero or nonzero"),
                    };
                    node.assumptions.push(Assumption { poly: r.poly(p)?, kind });
                }
                "eq" => match Equation::new(&r.poly(rest)?) {
                    Some(e) => node.equations.push(e),
                    None => return r.err("zero equation"),
                },
                "factors" => {
                    let Some(last) = node.equations.last_mut() else {
                        return r.err("factors line without an equation");
                    };
                    let mut parts = rest.split(" ; ");
                    let head = parts.next().unwrap_or("");
                    let (status, content) = head.split_once(' ').unwrap_or((head, ""));
                    let Some(status) = FactorStatus::parse(status) else {
                        return r.err(format!("unknown factor status '{status}'"));
                    };
                    let content: Rat = match content.trim().parse() {
                        Ok(c) => c,
                        Err(_) => return r.err("bad factor content"),
                    };
                    let mut factors = Vec::new();
                    for part in parts {
                        let (m, g) = part.split_once(' ').unwrap_or((part, ""));
                        let Ok(m) = m.parse::<u32>() else { return r.err("bad multiplicity") };
                        factors.push((r.poly(g)?, m));
                    }
                    let f = Factorization { content, factors, status };
                    if f.expand() != *last.poly() {
                        return r.err("cached factors do not multiply to the equation");
                    }
                    last.set_factors(f);
                }
                "ineq" => {
                    let p = r.poly(rest)?;
                    if node.inequalities.insert_nonzero(&p).is_err() {
                        return r.err("zero recorded as nonzero");
                    }
                }
                "or" => {
                    let g = r.or_group(rest)?;
                    if node.inequalities.insert_or_group(&g).is_err() {
                        return r.err("empty OR-group");
                    }
                }
                "bind" => {
                    let (v, expr) = rest.split_once(' ').unwrap_or((rest, ""));
                    let Some((num, den)) = expr.rsplit_once(" / ") else {
                        return r.err("binding needs 'num / den'");
                    };
                    node.bindings.push(Binding { var: r.var(v)?, num: r.poly(num)?, den: r.poly(den)? });
                }
                "todo" => {
                    let (kw, p) = rest.split_once(' ').unwrap_or((rest, ""));
                    match TodoEntry::from_parts(kw, r.poly(p)?) {
                        Some(t) => node.todo.push_back(t),
                        None => return r.err(format!("unknown to-do keyword '{kw}'")),
                    }
                }
                "child" => node.children.push(r.case_id(rest)?),
                "end" => nodes.push(current.take().expect("inside a case")),
                _ => return r.err(format!("unexpected '{key}' inside a case")),
            }
            continue;
        }
        match key {
            "plist" => {
                config.plist = rest.parse::<ProcList>().or_else(|e| r.err(e.to_string()))?;
            }
            "limits" => {
                let toks: Vec<&str> = rest.split_whitespace().collect();
                if toks.len() != 3 {
                    return r.err("limits needs three values");
                }
                let num = |t: &str, k: &str| -> Result<u64, PersistError> {
                    r.kv(t, k)?.parse().or_else(|_| r.err(format!("bad {k}")))
                };
                config.limits = Limits {
                    max_terms: num(toks[0], "max-terms")? as usize,
                    max_cases: num(toks[1], "max-cases")? as usize,
                    wall: Duration::from_secs(num(toks[2], "wall-secs")?),
                };
            }
            "option" => match rest {
                "explore-nonzero=yes" => config.explore_nonzero = true,
                "explore-nonzero=no" => config.explore_nonzero = false,
                _ => return r.err(format!("unknown option '{rest}'")),
            },
            "universe" => {
                for t in rest.split_whitespace() {
                    universe.insert(r.var(t)?);
                }
            }
            "orig-eq" => originals.push(r.poly(rest)?),
            "orig-ineq" => orig_ineqs.push(r.poly(rest)?),
            "orig-or" => or_groups.push(r.or_group(rest)?),
            "families" => {
                for t in rest.split_whitespace() {
                    family_order.push(r.case_id(t)?);
                }
            }
            "case" => {
                let toks: Vec<&str> = rest.split_whitespace().collect();
                if toks.len() != 3 {
                    return r.err("case needs an id, status and parent");
                }
                let id = r.case_id(toks[0])?;
                let status = r.kv(toks[1], "status")?;
                let Some(status) = CaseStatus::parse(status) else {
                    return r.err(format!("unknown status '{status}'"));
                };
                let parent = match r.kv(toks[2], "parent")? {
                    "-" => None,
                    p => Some(r.case_id(p)?),
                };
                current = Some(empty_node(id, status, parent));
            }
            _ => return r.err(format!("unexpected '{key}'")),
        }
    }
    if !seen_header {
        return r.err("empty session file");
    }
    if current.is_some() {
        return r.err("unterminated case block");
    }
    Ok(Session::from_parts(config, originals, orig_ineqs, or_groups, universe, nodes, &family_order)?)
}
