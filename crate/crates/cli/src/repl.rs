//! The steering loop: inspect cases, pick split candidates, apply modules
//! and resume automatic solving.

use std::fmt::Write as _;

use xforge_core::case::{CaseId, CaseStatus};
use xforge_core::solver::{
    coeff_split_candidates, load_session, save_session, split_once_candidates, ModuleId, RunOutcome, Session,
    SplitCandidate,
};
use xforge_core::VarId;

use crate::report;

pub struct Repl {
    pub session: Session,
    /// Case the next bare module id applies to.
    pub current: Option<CaseId>,
}

/// What the caller should do after a command.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Reply {
    Text(String),
    Quit,
}

const HELP: &str = "\
commands:
  cases                      list all cases with status and size
  inspect <case>             equations, term counts and variables of a case
  candidates [case]          ranked split candidates (default: current case)
  <module> [candidate]       apply a module to the current case, then resume auto
  apply <case> <module> [k]  apply one module without resuming
  split <case> <eq> <var>    full split of equation <eq> (1-based) w.r.t. <var>
  resume [case]              reopen a case and run automatically
  run                        run automatically
  solutions                  list solution families
  trace                      print the step trace
  save <path> | load <path>  write or read the session file
  help | quit";

fn parse_case(s: &str) -> Result<CaseId, String> {
    s.parse().map_err(|_| format!("bad case id '{s}'"))
}

fn outcome_line(o: &RunOutcome) -> String {
    match o {
        RunOutcome::Finished => "auto run finished".into(),
        RunOutcome::Yielded(id) => format!("stopped for interaction at case {id}"),
        RunOutcome::LimitReached(l) => format!("stopped: {l} limit reached"),
    }
}

fn candidate_lines(out: &mut String, title: &str, cands: &[SplitCandidate]) {
    let _ = writeln!(out, "{title}:");
    if cands.is_empty() {
        let _ = writeln!(out, "  none");
    }
    for (k, c) in cands.iter().enumerate() {
        let s = &c.score;
        let _ = writeln!(
            out,
            "  [{k}] eq {} var {} degree {}  (eq vars {}, eq terms {}, A1 terms {}, A0 terms {}, A0/A1 vars {})",
            c.eq_index + 1,
            c.var,
            c.d,
            s.eq_vars,
            s.eq_terms,
            s.a1_terms,
            s.a0_terms,
            s.a01_vars
        );
    }
}

impl Repl {
    pub fn new(session: Session) -> Repl {
        let mut r = Repl { session, current: None };
        r.refresh_current();
        r
    }

    fn refresh_current(&mut self) {
        let keep = self
            .current
            .as_ref()
            .and_then(|id| self.session.node(id))
            .map(|n| n.status == CaseStatus::AwaitingInteraction)
            .unwrap_or(false);
        if !keep {
            self.current =
                self.session.nodes().find(|n| n.status == CaseStatus::AwaitingInteraction).map(|n| n.id.clone());
        }
    }

    /// Runs automatically and reports where it stopped.
    pub fn run(&mut self) -> String {
        match self.session.run() {
            Ok(o) => {
                if let RunOutcome::Yielded(id) = &o {
                    self.current = Some(id.clone());
                } else {
                    self.refresh_current();
                }
                let s = self.session.summary();
                format!("{}; {} cases, {} solutions", outcome_line(&o), self.session.case_count(), s.solutions)
            }
            Err(e) => format!("error: {e}"),
        }
    }

    fn apply(&mut self, id: &CaseId, module: ModuleId, candidate: Option<usize>) -> Result<String, String> {
        let r = self.session.apply_module(id, module, candidate).map_err(|e| e.to_string())?;
        if r.applied {
            Ok(format!("module {module} applied to case {id}: {}", r.note))
        } else {
            Err(format!("module {module} not applicable to case {id}: {}", r.note))
        }
    }

    pub fn execute(&mut self, line: &str) -> Result<Reply, String> {
        let toks: Vec<&str> = line.split_whitespace().collect();
        let Some(&cmd) = toks.first() else { return Ok(Reply::Text(String::new())) };
        let text = match cmd {
            "help" | "?" => HELP.to_string(),
            "quit" | "exit" | "q" => return Ok(Reply::Quit),
            "cases" | "ls" => report::case_table(&self.session),
            "inspect" => {
                let id = match toks.get(1) {
                    Some(s) => parse_case(s)?,
                    None => self.current.clone().ok_or("no current case; give a case id")?,
                };
                let n = self.session.node(&id).ok_or_else(|| format!("no case {id}"))?;
                report::case_detail(n)
            }
            "candidates" => {
                let id = match toks.get(1) {
                    Some(s) => parse_case(s)?,
                    None => self.current.clone().ok_or("no current case; give a case id")?,
                };
                let n = self.session.node(&id).ok_or_else(|| format!("no case {id}"))?;
                let mut out = String::new();
                let ranked = self.session.candidates(&id).map_err(|e| e.to_string())?;
                candidate_lines(&mut out, "ranked pairs", &ranked);
                candidate_lines(&mut out, "module 90 choices", &coeff_split_candidates(n));
                candidate_lines(&mut out, "module 91 choices", &split_once_candidates(n));
                out.trim_end().to_string()
            }
            "apply" => {
                let id = parse_case(toks.get(1).ok_or("usage: apply <case> <module> [candidate]")?)?;
                let module: ModuleId =
                    toks.get(2).ok_or("usage: apply <case> <module> [candidate]")?.parse().map_err(|e| format!("{e}"))?;
                let cand = toks.get(3).map(|k| k.parse::<usize>().map_err(|_| format!("bad candidate '{k}'"))).transpose()?;
                let msg = self.apply(&id, module, cand)?;
                self.refresh_current();
                msg
            }
            "split" => {
                let usage = "usage: split <case> <eq> <var>";
                let id = parse_case(toks.get(1).ok_or(usage)?)?;
                let eq: usize = toks.get(2).and_then(|s| s.parse().ok()).filter(|&k| k >= 1).ok_or(usage)?;
                let var = toks
                    .get(3)
                    .and_then(|s| s.strip_prefix('u'))
                    .and_then(|k| k.parse().ok())
                    .map(VarId)
                    .ok_or(usage)?;
                self.session.full_split(&id, eq - 1, var).map_err(|e| e.to_string())?;
                self.refresh_current();
                format!("case {id}: equation {eq} split w.r.t. {var}")
            }
            "resume" => {
                if let Some(s) = toks.get(1) {
                    let id = parse_case(s)?;
                    self.session.resume(&id).map_err(|e| e.to_string())?;
                } else if let Some(id) = self.current.clone() {
                    self.session.resume(&id).map_err(|e| e.to_string())?;
                }
                self.run()
            }
            "run" => self.run(),
            "solutions" => report::families(&self.session),
            "trace" => self.session.trace_text().trim_end().to_string(),
            "save" => {
                let path = toks.get(1).ok_or("usage: save <path>")?;
                std::fs::write(path, save_session(&self.session)).map_err(|e| format!("{path}: {e}"))?;
                format!("saved to {path}")
            }
            "load" => {
                let path = toks.get(1).ok_or("usage: load <path>")?;
                let text = std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?;
                self.session = load_session(&text).map_err(|e| format!("{path}: {e}"))?;
                self.current = None;
                self.refresh_current();
                format!("loaded {path}: {} cases", self.session.case_count())
            }
            other => {
                let module: ModuleId = other.parse().map_err(|_| format!("unknown command '{other}'; try help"))?;
                let id = self.current.clone().ok_or("no case is waiting for interaction")?;
                let cand = toks.get(1).map(|k| k.parse::<usize>().map_err(|_| format!("bad candidate '{k}'"))).transpose()?;
                let msg = self.apply(&id, module, cand)?;
                format!("{msg}\n{}", self.run())
            }
        };
        Ok(Reply::Text(text))
    }
}
