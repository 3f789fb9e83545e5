use std::fmt::Write as _;

use xforge_core::case::{CaseNode, CaseStatus};
use xforge_core::solver::Session;

pub fn case_table(s: &Session) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<14} {:<22} {:>5} {:>9} {:>9} {:>5}", "case", "status", "eqs", "terms", "max", "vars");
    for n in s.nodes() {
        let _ = writeln!(
            out,
            "{:<14} {:<22} {:>5} {:>9} {:>9} {:>5}",
            n.id.to_string(),
            n.status.as_str(),
            n.equations.len(),
            n.total_terms(),
            n.max_terms(),
            n.vars().len()
        );
    }
    out.trim_end().to_string()
}

pub fn case_detail(n: &CaseNode) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "case {} [{}]{}", n.id, n.status.as_str(), if n.reason.is_empty() { String::new() } else { format!(": {}", n.reason) });
    for a in &n.assumptions {
        let _ = writeln!(out, "  assumes {a}");
    }
    let _ = writeln!(out, "  {} equations, {} terms, {} variables, {} bindings", n.equations.len(), n.total_terms(), n.vars().len(), n.bindings.len());
    for (i, e) in n.equations.iter().enumerate() {
        let vars: Vec<String> = e.props().vars.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(
            out,
            "  eq {}: {} terms, degree {}, {} vars: {}",
            i + 1,
            e.props().term_count,
            e.poly().total_degree(),
            vars.len(),
            vars.join(" ")
        );
        if e.props().term_count <= 12 {
            let _ = writeln!(out, "      {} = 0", e.poly());
        }
    }
    for p in n.inequalities.nonzero() {
        let _ = writeln!(out, "  {p} != 0");
    }
    for t in &n.todo {
        let _ = writeln!(out, "  to do: {t}");
    }
    if !n.children.is_empty() {
        let kids: Vec<String> = n.children.iter().map(|c| c.to_string()).collect();
        let _ = writeln!(out, "  children: {}", kids.join(" "));
    }
    out.trim_end().to_string()
}

pub fn families(s: &Session) -> String {
    if s.solutions().is_empty() {
        return "no solution families".into();
    }
    let mut out = String::new();
    for (k, f) in s.solutions().iter().enumerate() {
        let _ = write!(out, "family {} ({} terms): {f}", k + 1, f.total_terms());
    }
    out.trim_end().to_string()
}

/// One line naming the result of a batch run.
pub fn verdict(s: &Session) -> String {
    let sum = s.summary();
    if sum.solutions > 0 {
        let best = s.solutions().iter().map(|f| f.free_params.len()).max().unwrap_or(0);
        return format!("{} solution families; at most {best} free parameters", sum.solutions);
    }
    let limited = sum.count(CaseStatus::ResourceLimit) + sum.count(CaseStatus::AwaitingInteraction) + sum.count(CaseStatus::Deferred);
    if limited == 0 {
        "no rational solutions".into()
    } else {
        format!("no solution family found; {limited} cases left unfinished")
    }
}

pub fn status_counts(s: &Session) -> String {
    let sum = s.summary();
    let parts: Vec<String> = sum.by_status.iter().map(|(k, v)| format!("{} {v}", k.as_str())).collect();
    format!("{} cases ({})", s.case_count(), parts.join(", "))
}
