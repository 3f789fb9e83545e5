use std::fmt;

use serde::{Deserialize, Serialize};

use super::module::ModuleId;
use crate::case::{CaseId, CaseStatus};

/// One line of the step trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "kebab-case")]
pub enum TraceEvent {
    Attempt {
        seq: u64,
        case: CaseId,
        module: ModuleId,
        applied: bool,
        eqs_before: usize,
        terms_before: usize,
        eqs_after: usize,
        terms_after: usize,
        note: String,
    },
    Created {
        seq: u64,
        case: CaseId,
        parent: CaseId,
        assumption: String,
    },
    Status {
        seq: u64,
        case: CaseId,
        status: CaseStatus,
        reason: String,
    },
    Solution {
        seq: u64,
        case: CaseId,
        family: usize,
        free_params: usize,
        terms: usize,
    },
    Limit {
        seq: u64,
        case: CaseId,
        limit: String,
    },
}

impl TraceEvent {
    pub fn seq(&self) -> u64 {
        match self {
            TraceEvent::Attempt { seq, .. }
            | TraceEvent::Created { seq, .. }
            | TraceEvent::Status { seq, .. }
            | TraceEvent::Solution { seq, .. }
            | TraceEvent::Limit { seq, .. } => *seq,
        }
    }

    pub fn case(&self) -> &CaseId {
        match self {
            TraceEvent::Attempt { case, .. }
            | TraceEvent::Created { case, .. }
            | TraceEvent::Status { case, .. }
            | TraceEvent::Solution { case, .. }
            | TraceEvent::Limit { case, .. } => case,
        }
    }
}

fn quoted(s: &str) -> String {
    format!("{:?}", s)
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceEvent::Attempt {
                seq,
                case,
                module,
                applied,
                eqs_before,
                terms_before,
                eqs_after,
                terms_after,
                note,
            } => write!(
                f,
                "seq={seq} event=attempt case={case} module={module} applied={} eqs={eqs_before}->{eqs_after} terms={terms_before}->{terms_after} note={}",
                if *applied { "yes" } else { "no" },
                quoted(note)
            ),
            TraceEvent::Created { seq, case, parent, assumption } => {
                write!(f, "seq={seq} event=created case={case} parent={parent} assumption={}", quoted(assumption))
            }
            TraceEvent::Status { seq, case, status, reason } => {
                write!(f, "seq={seq} event=status case={case} status={status} reason={}", quoted(reason))
            }
            TraceEvent::Solution { seq, case, family, free_params, terms } => {
                write!(f, "seq={seq} event=solution case={case} family={family} free={free_params} terms={terms}")
            }
            TraceEvent::Limit { seq, case, limit } => write!(f, "seq={seq} event=limit case={case} limit={limit}"),
        }
    }
}

/// Splits a trace line into `key=value` pairs, unquoting quoted values.
pub fn parse_trace_line(line: &str) -> Vec<(String, String)> {
    let mut out = Vec::new();
    let mut rest = line.trim();
    while !rest.is_empty() {
        let Some(eq) = rest.find('=') else { break };
        let key = rest[..eq].trim().to_string();
        let after = &rest[eq + 1..];
        if let Some(stripped) = after.strip_prefix('"') {
            let mut value = String::new();
            let mut chars = stripped.char_indices();
            let mut end = stripped.len();
            while let Some((i, c)) = chars.next() {
                match c {
                    '\\' => {
                        if let Some((_, n)) = chars.next() {
                            value.push(match n {
                                'n' => '\n',
                                't' => '\t',
                                other => other,
                            });
                        }
                    }
                    '"' => {
                        end = i + 1;
                        break;
                    }
                    other => value.push(other),
                }
            }
            out.push((key, value));
            rest = stripped[end..].trim_start();
        } else {
            let end = after.find(' ').unwrap_or(after.len());
            out.push((key, after[..end].to_string()));
            rest = after[end..].trim_start();
        }
    }
    out
}
