use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Step modules, numbered as in the reference solver where a number exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModuleId {
    /// 1: execute the first to-do entry.
    Todo,
    /// 20: substitution without case distinction.
    SubstSafe,
    /// 21: case-generating substitution.
    SubstCase,
    /// 38: leave automatic mode.
    Yield,
    /// 47: case distinction over the factors of an equation.
    FactorCase,
    /// 77: factor test.
    FactorTest,
    /// 89: rationality test.
    Rationality,
    /// 90: partial splitting, all coefficients of powers above one.
    SplitCoeff,
    /// 91: partial splitting once, via an induced case distinction.
    SplitOnce,
    /// Complete splitting with respect to one variable (interactive only).
    FullSplit,
}

impl ModuleId {
    pub const ALL: [ModuleId; 10] = [
        ModuleId::Todo,
        ModuleId::Rationality,
        ModuleId::SubstSafe,
        ModuleId::FactorTest,
        ModuleId::FactorCase,
        ModuleId::SubstCase,
        ModuleId::Yield,
        ModuleId::SplitCoeff,
        ModuleId::SplitOnce,
        ModuleId::FullSplit,
    ];

    pub fn code(self) -> &'static str {
        match self {
            ModuleId::Todo => "1",
            ModuleId::SubstSafe => "20",
            ModuleId::SubstCase => "21",
            ModuleId::Yield => "38",
            ModuleId::FactorCase => "47",
            ModuleId::FactorTest => "77",
            ModuleId::Rationality => "89",
            ModuleId::SplitCoeff => "90",
            ModuleId::SplitOnce => "91",
            ModuleId::FullSplit => "full",
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            ModuleId::Todo => "to-do list",
            ModuleId::SubstSafe => "substitution without case distinction",
            ModuleId::SubstCase => "case-generating substitution",
            ModuleId::Yield => "yield to interactive mode",
            ModuleId::FactorCase => "factor case distinction",
            ModuleId::FactorTest => "factor test",
            ModuleId::Rationality => "rationality test",
            ModuleId::SplitCoeff => "partial split of coefficients",
            ModuleId::SplitOnce => "partial split once",
            ModuleId::FullSplit => "full split",
        }
    }
}

impl fmt::Display for ModuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown module {0:?}")]
pub struct UnknownModule(pub String);

impl FromStr for ModuleId {
    type Err = UnknownModule;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "full-split" {
            return Ok(ModuleId::FullSplit);
        }
        ModuleId::ALL.into_iter().find(|m| m.code() == s).ok_or_else(|| UnknownModule(s.to_string()))
    }
}

/// Ordered list of modules tried by the scheduler.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProcList(Vec<ModuleId>);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProcListError {
    #[error("empty proc list")]
    Empty,
    #[error(transparent)]
    Unknown(#[from] UnknownModule),
}

impl ProcList {
    pub fn new(modules: Vec<ModuleId>) -> Result<ProcList, ProcListError> {
        if modules.is_empty() {
            return Err(ProcListError::Empty);
        }
        Ok(ProcList(modules))
    }

    /// `(1 89 20 77 47 21 90)`: runs without interaction.
    pub fn batch() -> ProcList {
        "(1 89 20 77 47 21 90)".parse().expect("valid")
    }

    /// `(1 89 20 77 47 21 38)`: stops for the user when stuck.
    pub fn interactive() -> ProcList {
        "(1 89 20 77 47 21 38)".parse().expect("valid")
    }

    /// Accepts `batch`, `interactive`, or an explicit list.
    pub fn from_profile(s: &str) -> Result<ProcList, ProcListError> {
        match s.trim() {
            "batch" => Ok(ProcList::batch()),
            "interactive" => Ok(ProcList::interactive()),
            other => other.parse(),
        }
    }

    pub fn modules(&self) -> &[ModuleId] {
        &self.0
    }

    pub fn contains(&self, m: ModuleId) -> bool {
        self.0.contains(&m)
    }
}

impl fmt::Display for ProcList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<&str> = self.0.iter().map(|m| m.code()).collect();
        write!(f, "({})", parts.join(" "))
    }
}

impl FromStr for ProcList {
    type Err = ProcListError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
        let modules = inner
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| t.parse())
            .collect::<Result<Vec<ModuleId>, _>>()?;
        ProcList::new(modules)
    }
}
