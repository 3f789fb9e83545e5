//! The `xforge` command line.
//!
//! Exit codes: 0 success, 1 usage (including missing files), 2 unparsable
//! input, 3 attempt budget or solver limit exhausted without a result.

pub mod repl;
pub mod report;

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use xforge_core::solver::{load_session, save_session, Limits, ProcList, RunOutcome, Session, SolverConfig};
use xforge_puzzle::generate::GenError;
use xforge_puzzle::{
    check_assignment, count_assignments, generate, grid_to_system, parse_puzzle, random_grid, reference_grid, replay,
    DiagMode, GenConfig, LineStatus, Provenance, Puzzle, System,
};

use crate::repl::{Repl, Reply};

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(m: impl Into<String>) -> CliError {
        CliError { code: EXIT_USAGE, message: m.into() }
    }
    fn parse(m: impl Into<String>) -> CliError {
        CliError { code: EXIT_PARSE, message: m.into() }
    }
    fn budget(m: impl Into<String>) -> CliError {
        CliError { code: EXIT_BUDGET, message: m.into() }
    }
}

#[derive(Debug, Parser)]
#[command(name = "xforge", version, about = "Cross-number puzzle workbench")]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Debug, Clone, Args)]
pub struct LimitArgs {
    /// Largest equation (in terms) a case may hold before it is closed.
    #[arg(long, env = "XFORGE_MAX_TERMS", default_value_t = 200_000)]
    pub max_terms: usize,
    #[arg(long, env = "XFORGE_MAX_CASES", default_value_t = 10_000)]
    pub max_cases: usize,
    #[arg(long, env = "XFORGE_WALL_SECS", default_value_t = 1800)]
    pub wall_secs: u64,
}

impl LimitArgs {
    fn limits(&self) -> Limits {
        Limits { max_terms: self.max_terms, max_cases: self.max_cases, wall: Duration::from_secs(self.wall_secs) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OnOff {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RenderFormat {
    Text,
    Pretty,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Generate a puzzle with exactly one solution.
    Generate {
        #[arg(long, default_value_t = 5)]
        size: usize,
        #[arg(long, default_value_t = 1)]
        times: usize,
        #[arg(long, default_value_t = 1)]
        div: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        attempts: usize,
        #[arg(long, default_value_t = 9)]
        param_bound: i64,
        /// `main` or `all`; default main for size 5, all otherwise.
        #[arg(long)]
        diag_mode: Option<DiagMode>,
        #[arg(long, default_value = "batch")]
        plist: String,
        #[arg(long, value_enum, default_value_t = OnOff::On)]
        leading_zero: OnOff,
        #[command(flatten)]
        limits: LimitArgs,
        /// Write the puzzle here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the provenance report (JSON) here.
        #[arg(long)]
        provenance: Option<PathBuf>,
        #[arg(long)]
        show_solution: bool,
    },
    /// Rebuild a generated puzzle from its provenance report.
    Replay { provenance: PathBuf },
    /// Print the polynomial system of an operator grid.
    System {
        /// The 7x7 reference grid with 3 multiplications and 2 divisions.
        #[arg(long)]
        reference: bool,
        #[arg(long, default_value_t = 5)]
        size: usize,
        #[arg(long, default_value_t = 1)]
        times: usize,
        #[arg(long, default_value_t = 1)]
        div: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        diag_mode: Option<DiagMode>,
    },
    /// Solve a polynomial system file in batch mode.
    Solve {
        system: Option<PathBuf>,
        /// Solve the reference grid's system instead of a file.
        #[arg(long, conflicts_with = "system")]
        reference: bool,
        #[arg(long, default_value = "batch")]
        plist: String,
        #[arg(long)]
        explore_nonzero: bool,
        #[command(flatten)]
        limits: LimitArgs,
        /// Write the final session here.
        #[arg(long)]
        save: Option<PathBuf>,
        /// Print the step trace.
        #[arg(long)]
        trace: bool,
    },
    /// Count the digit assignments solving a puzzle.
    Unique {
        puzzle: PathBuf,
        #[arg(long, default_value_t = 2)]
        cap: usize,
        /// Override the file's leading-zero convention.
        #[arg(long, value_enum)]
        leading_zero: Option<OnOff>,
        #[arg(long)]
        json: bool,
    },
    /// Residual of every line under an assignment such as `a=1,b=7`.
    Check { puzzle: PathBuf, assignment: String },
    /// Print a puzzle file.
    Render {
        puzzle: PathBuf,
        #[arg(long, value_enum, default_value_t = RenderFormat::Pretty)]
        format: RenderFormat,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
    },
    /// Steer a solving session from standard input.
    Repl {
        system: Option<PathBuf>,
        #[arg(long, conflicts_with = "system")]
        session: Option<PathBuf>,
        #[arg(long, conflicts_with_all = ["system", "session"])]
        reference: bool,
        #[arg(long, default_value = "interactive")]
        plist: String,
        #[command(flatten)]
        limits: LimitArgs,
    },
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn plist(s: &str) -> Result<ProcList, CliError> {
    ProcList::from_profile(s).map_err(|e| CliError::usage(format!("--plist: {e}")))
}

fn load_puzzle(path: &Path) -> Result<Puzzle, CliError> {
    parse_puzzle(&read(path)?).map_err(|e| CliError::parse(format!("{}: {e}", path.display())))
}

fn load_system(path: &Path) -> Result<System, CliError> {
    System::parse(&read(path)?).map_err(|e| CliError::parse(format!("{}: {e}", path.display())))
}

fn reference_system() -> System {
    grid_to_system(&reference_grid(), DiagMode::All)
}

fn session_for(sys: &System, config: SolverConfig) -> Session {
    let mut universe: std::collections::BTreeSet<_> = sys.vars.iter().copied().collect();
    for p in sys.equations.iter().chain(&sys.inequalities).chain(sys.or_groups.iter().flatten()) {
        universe.extend(p.vars());
    }
    Session::with_universe(config, &sys.equations, &sys.inequalities, &sys.or_groups, universe)
}

fn assignment_text(a: &BTreeMap<char, u8>) -> String {
    a.iter().map(|(l, d)| format!("{l}={d}")).collect::<Vec<_>>().join(",")
}

fn parse_assignment(s: &str) -> Result<BTreeMap<char, u8>, CliError> {
    let mut a = BTreeMap::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (l, d) = part.split_once('=').ok_or_else(|| CliError::usage(format!("expected letter=digit, got '{part}'")))?;
        let mut chars = l.trim().chars();
        let letter = match (chars.next(), chars.next()) {
            (Some(c), None) => c,
            _ => return Err(CliError::usage(format!("bad letter '{l}'"))),
        };
        let digit: u8 = d.trim().parse().map_err(|_| CliError::usage(format!("bad digit '{d}'")))?;
        a.insert(letter, digit);
    }
    Ok(a)
}

pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write, input: &mut dyn BufRead) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::usage(e.to_string());
    match cli.cmd {
        Cmd::Generate {
            size,
            times,
            div,
            seed,
            attempts,
            param_bound,
            diag_mode,
            plist: pl,
            leading_zero,
            limits,
            out: out_path,
            provenance,
            show_solution,
        } => {
            let mut cfg = GenConfig::new(size, times, div, seed);
            cfg.attempts = attempts;
            cfg.param_bound = param_bound;
            if let Some(m) = diag_mode {
                cfg.diag_mode = m;
            }
            cfg.plist = plist(&pl)?;
            cfg.limits = limits.limits();
            cfg.leading_zero = leading_zero == OnOff::On;
            let start = Instant::now();
            let g = generate(&cfg).map_err(|e| match e {
                GenError::BudgetExhausted { attempts, stats } => {
                    let mut m = format!("no unique puzzle within {attempts} attempts");
                    for s in stats {
                        m.push_str(&format!("\n  attempt {}: {} families, {}", s.attempt, s.families, s.outcome));
                    }
                    CliError::budget(m)
                }
                other => CliError::usage(other.to_string()),
            })?;
            for s in &g.stats {
                writeln!(err, "attempt {}: {} families, {}", s.attempt, s.families, s.outcome).map_err(io)?;
            }
            writeln!(err, "generated in {:.2?}", start.elapsed()).map_err(io)?;
            let text = g.puzzle.render_text();
            match out_path {
                Some(p) => write_file(&p, &text)?,
                None => write!(out, "{text}").map_err(io)?,
            }
            let prov = serde_json::to_string_pretty(&g.provenance).expect("provenance serializes");
            match provenance {
                Some(p) => write_file(&p, &format!("{prov}\n"))?,
                None => writeln!(err, "{prov}").map_err(io)?,
            }
            if show_solution {
                writeln!(err, "solution: {}", assignment_text(&g.solution)).map_err(io)?;
            }
        }
        Cmd::Replay { provenance } => {
            let p: Provenance = serde_json::from_str(&read(&provenance)?)
                .map_err(|e| CliError::parse(format!("{}: {e}", provenance.display())))?;
            let puzzle = replay(&p).map_err(|e| CliError::parse(e.to_string()))?;
            write!(out, "{}", puzzle.render_text()).map_err(io)?;
        }
        Cmd::System { reference, size, times, div, seed, diag_mode } => {
            let sys = if reference {
                reference_system()
            } else {
                let mode = diag_mode.unwrap_or(DiagMode::default_for(size));
                let g = random_grid(size, times, div, mode, seed).map_err(|e| CliError::usage(e.to_string()))?;
                grid_to_system(&g, mode)
            };
            write!(out, "{}", sys.to_text()).map_err(io)?;
        }
        Cmd::Solve { system, reference, plist: pl, explore_nonzero, limits, save, trace } => {
            let sys = match (system, reference) {
                (Some(p), false) => load_system(&p)?,
                (None, true) => reference_system(),
                _ => return Err(CliError::usage("give a system file or --reference")),
            };
            let config = SolverConfig { plist: plist(&pl)?, limits: limits.limits(), explore_nonzero };
            let mut s = session_for(&sys, config);
            let start = Instant::now();
            let outcome = s.run().map_err(|e| CliError::usage(e.to_string()))?;
            let elapsed = start.elapsed();
            if trace {
                write!(out, "{}", s.trace_text()).map_err(io)?;
            }
            writeln!(out, "system: {} equations in {} variables", sys.equations.len(), s.universe().len()).map_err(io)?;
            let o = match &outcome {
                RunOutcome::Finished => "finished".to_string(),
                RunOutcome::Yielded(id) => format!("stopped for interaction at case {id}"),
                RunOutcome::LimitReached(l) => format!("{l} limit reached"),
            };
            writeln!(out, "run: {o} in {elapsed:.2?}; {}", report::status_counts(&s)).map_err(io)?;
            writeln!(out, "{}", report::case_table(&s)).map_err(io)?;
            writeln!(out, "{}", report::families(&s)).map_err(io)?;
            writeln!(out, "verdict: {}", report::verdict(&s)).map_err(io)?;
            if let Some(p) = save {
                write_file(&p, &save_session(&s))?;
            }
            if s.solutions().is_empty() && matches!(outcome, RunOutcome::LimitReached(_)) {
                return Err(CliError::budget(format!("no solution family before the {o}")));
            }
        }
        Cmd::Unique { puzzle, cap, leading_zero, json } => {
            let mut p = load_puzzle(&puzzle)?;
            if let Some(lz) = leading_zero {
                p.convention.leading_zero = lz == OnOff::On;
            }
            let r = count_assignments(&p, cap.max(1));
            if json {
                let v = serde_json::json!({
                    "count": r.count,
                    "capped": r.capped,
                    "assignments": r.assignments,
                    "nodes": r.nodes,
                    "millis": r.elapsed.as_millis() as u64,
                });
                writeln!(out, "{v}").map_err(io)?;
            } else {
                let more = if r.capped { "more than " } else { "" };
                let shown = if r.capped { cap } else { r.count };
                writeln!(out, "solutions: {more}{shown}").map_err(io)?;
                for a in &r.assignments {
                    writeln!(out, "  {}", assignment_text(a)).map_err(io)?;
                }
                writeln!(out, "search nodes: {}, time {:.2?}", r.nodes, r.elapsed).map_err(io)?;
            }
        }
        Cmd::Check { puzzle, assignment } => {
            let p = load_puzzle(&puzzle)?;
            let a = parse_assignment(&assignment)?;
            let lines = check_assignment(&p, &a).map_err(|e| CliError::usage(e.to_string()))?;
            for l in &lines {
                let s = match &l.status {
                    LineStatus::Zero => "zero".to_string(),
                    LineStatus::Nonzero(v) => format!("nonzero {v}"),
                    LineStatus::Pending => "pending".to_string(),
                    LineStatus::DivisionByZero => "division by zero".to_string(),
                };
                writeln!(out, "{:<12} {s}", l.label).map_err(io)?;
            }
            let zero = lines.iter().filter(|l| l.status == LineStatus::Zero).count();
            writeln!(out, "{zero} of {} lines are zero", lines.len()).map_err(io)?;
        }
        Cmd::Render { puzzle, format } => {
            let p = load_puzzle(&puzzle)?;
            let text = match format {
                RenderFormat::Text => p.render_text(),
                RenderFormat::Pretty => p.render_pretty(),
                RenderFormat::Json => {
                    format!("{}\n", serde_json::to_string_pretty(&p.to_json()).expect("puzzle serializes"))
                }
            };
            write!(out, "{text}").map_err(io)?;
        }
        Cmd::Serve { addr } => {
            writeln!(err, "listening on http://{addr}").map_err(io)?;
            let rt = tokio::runtime::Runtime::new().map_err(io)?;
            rt.block_on(xforge_service::serve(addr)).map_err(io)?;
        }
        Cmd::Repl { system, session, reference, plist: pl, limits } => {
            let s = if let Some(p) = session {
                load_session(&read(&p)?).map_err(|e| CliError::parse(format!("{}: {e}", p.display())))?
            } else {
                let sys = match (system, reference) {
                    (Some(p), _) => load_system(&p)?,
                    (None, true) => reference_system(),
                    (None, false) => return Err(CliError::usage("give a system file, --session or --reference")),
                };
                session_for(&sys, SolverConfig { plist: plist(&pl)?, limits: limits.limits(), explore_nonzero: false })
            };
            let mut r = Repl::new(s);
            writeln!(out, "{}", r.run()).map_err(io)?;
            repl_loop(&mut r, out, input)?;
        }
    }
    Ok(())
}

/// Reads commands until end of input or `quit`.
pub fn repl_loop(r: &mut Repl, out: &mut dyn Write, input: &mut dyn BufRead) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::usage(e.to_string());
    let mut line = String::new();
    loop {
        write!(out, "xforge> ").map_err(io)?;
        out.flush().map_err(io)?;
        line.clear();
        if input.read_line(&mut line).map_err(io)? == 0 {
            writeln!(out).map_err(io)?;
            return Ok(());
        }
        match r.execute(line.trim()) {
            Ok(Reply::Quit) => return Ok(()),
            Ok(Reply::Text(t)) if t.is_empty() => {}
            Ok(Reply::Text(t)) => writeln!(out, "{t}").map_err(io)?,
            Err(e) => writeln!(out, "error: {e}").map_err(io)?,
        }
    }
}

/// Entry point shared by the binary and the tests; returns the exit code.
pub fn main_with(args: &[String], out: &mut dyn Write, err: &mut dyn Write, input: &mut dyn BufRead) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    match run(cli, out, err, input) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}
