//! HTTP surface for steering solver sessions and checking puzzles.
//!
//! Mutations of one session are serialized: a step is refused with 409 when
//! another step or an auto-run holds the session, or when the caller's
//! `expected_version` is stale. Every mutation publishes a new version with
//! an immutable tree snapshot, and appends the solver's trace events to an
//! ordered log that `/events` streams (resumable by event sequence number).

mod dto;
mod error;
mod state;

use std::collections::{BTreeSet, VecDeque};
use std::convert::Infallible;
use std::net::SocketAddr;
use std::sync::atomic::Ordering;
use std::sync::Arc;
use std::time::Duration;

use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::IntoResponse;
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::stream::{self, Stream};
use serde::Deserialize;
use xforge_core::case::CaseId;
use xforge_core::poly::parse_poly;
use xforge_core::solver::{
    load_session, save_session, Limits, ModuleId, PersistError, ProcList, Session, SessionError, SolverConfig, TraceEvent,
};
use xforge_core::{Poly, VarId};
use xforge_puzzle::generate::GenError;
use xforge_puzzle::{
    check_assignment, generate, grid_to_system, parse_operator_rows, parse_puzzle, DiagMode, GenConfig, Puzzle,
    PuzzleError, System,
};

pub use dto::*;
pub use error::{ApiError, ApiResult, ErrorBody};
pub use state::{AppState, SessionEntry, SNAPSHOT_HISTORY};

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/sessions", post(create_session).get(list_sessions))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/tree", get(get_tree))
        .route("/sessions/{id}/cases/{case}", get(get_case))
        .route("/sessions/{id}/cases/{case}/apply", post(apply_step))
        .route("/sessions/{id}/cases/{case}/resume", post(resume_case))
        .route("/sessions/{id}/cases/{case}/full-split", post(full_split))
        .route("/sessions/{id}/run", post(run_session))
        .route("/sessions/{id}/pause", post(pause_session))
        .route("/sessions/{id}/events", get(event_stream))
        .route("/sessions/{id}/trace", get(get_trace))
        .route("/sessions/{id}/trace.txt", get(get_trace_text))
        .route("/sessions/{id}/export", get(export_session))
        .route("/puzzles", post(add_puzzle))
        .route("/puzzles/random", post(random_puzzle))
        .route("/puzzles/{id}", get(get_puzzle))
        .route("/puzzles/{id}/check", post(check_puzzle))
        .with_state(state)
}

pub async fn serve(addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(Arc::new(AppState::default()))).await
}

fn session_error(e: SessionError) -> ApiError {
    match e {
        SessionError::UnknownCase(id) => ApiError::not_found(format!("no case {id}")),
        SessionError::NotWorkable(..) => ApiError::conflict(e.to_string()),
        SessionError::BadEquation(_) | SessionError::BadVariable(_) => ApiError::bad_request(e.to_string()),
        SessionError::Extraction(..) => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "solver", e.to_string()),
    }
}

fn find_session(st: &AppState, id: u64) -> ApiResult<Arc<SessionEntry>> {
    st.session(id).ok_or_else(|| ApiError::not_found(format!("no session {id}")))
}

fn parse_case(s: &str) -> ApiResult<CaseId> {
    s.parse().map_err(|_| ApiError::bad_request(format!("bad case id '{s}'")))
}

fn solver_config(c: &ConfigBody) -> ApiResult<SolverConfig> {
    let plist = match &c.plist {
        Some(p) => ProcList::from_profile(p)
            .map_err(|e| ApiError::bad_request(e.to_string()).at(Some("config.plist".into()), None, None))?,
        None => ProcList::batch(),
    };
    let d = Limits::default();
    Ok(SolverConfig {
        plist,
        limits: Limits {
            max_terms: c.max_terms.unwrap_or(d.max_terms),
            max_cases: c.max_cases.unwrap_or(d.max_cases),
            wall: c.wall_secs.map(Duration::from_secs).unwrap_or(d.wall),
        },
        explore_nonzero: c.explore_nonzero,
    })
}

fn parse_field(s: &str, field: String) -> ApiResult<Poly> {
    parse_poly(s).map_err(|e| ApiError::bad_request(e.message.clone()).at(Some(field), None, Some(e.column)))
}

fn session_from_system(config: SolverConfig, sys: &System) -> Session {
    let mut universe: BTreeSet<VarId> = sys.vars.iter().copied().collect();
    for p in sys.equations.iter().chain(&sys.inequalities).chain(sys.or_groups.iter().flatten()) {
        universe.extend(p.vars());
    }
    Session::with_universe(config, &sys.equations, &sys.inequalities, &sys.or_groups, universe)
}

fn build_session(req: &CreateSession) -> ApiResult<Session> {
    let sources =
        [req.system.is_some(), req.system_text.is_some(), req.grid.is_some(), req.session_text.is_some()];
    if sources.iter().filter(|&&b| b).count() != 1 {
        return Err(ApiError::bad_request("give exactly one of system, system_text, grid, session_text"));
    }
    if let Some(text) = &req.session_text {
        return load_session(text).map_err(|e| match e {
            PersistError::Syntax { line, message } => ApiError::bad_request(message).at(None, Some(line), None),
            other => ApiError::bad_request(other.to_string()),
        });
    }
    let config = solver_config(&req.config)?;
    let sys = if let Some(body) = &req.system {
        let mut sys = System::default();
        for (i, s) in body.equations.iter().enumerate() {
            sys.equations.push(parse_field(s, format!("system.equations[{i}]"))?);
        }
        for (i, s) in body.inequalities.iter().enumerate() {
            sys.inequalities.push(parse_field(s, format!("system.inequalities[{i}]"))?);
        }
        for (i, g) in body.or_groups.iter().enumerate() {
            let mut group = Vec::new();
            for (j, s) in g.iter().enumerate() {
                group.push(parse_field(s, format!("system.or_groups[{i}][{j}]"))?);
            }
            sys.or_groups.push(group);
        }
        sys
    } else if let Some(text) = &req.system_text {
        System::parse(text).map_err(|e| ApiError::bad_request(e.message.clone()).at(None, Some(e.line), None))?
    } else {
        let g = req.grid.as_ref().expect("one source");
        let mode = match &g.diagonals {
            Some(d) => d.parse::<DiagMode>().map_err(|e| ApiError::bad_request(e).at(Some("grid.diagonals".into()), None, None))?,
            None => DiagMode::default_for(g.size),
        };
        let grid = parse_operator_rows(g.size, &g.rows).map_err(|e| {
            let line = match &e {
                xforge_puzzle::grid::GridError::BadRow { row, .. } => Some(*row),
                _ => None,
            };
            ApiError::bad_request(e.to_string()).at(Some("grid.rows".into()), line, None)
        })?;
        grid_to_system(&grid, mode)
    };
    Ok(session_from_system(config, &sys))
}

async fn create_session(
    State(st): State<Arc<AppState>>,
    Json(req): Json<CreateSession>,
) -> ApiResult<(StatusCode, Json<SessionHandle>)> {
    let session = build_session(&req)?;
    let entry = st.add_session(session);
    if req.auto_run {
        state::start_run(entry.clone());
    }
    Ok((StatusCode::CREATED, Json(entry.handle())))
}

async fn list_sessions(State(st): State<Arc<AppState>>) -> Json<Vec<SessionHandle>> {
    let mut v: Vec<SessionHandle> = st.sessions.read().expect("lock").values().map(|e| e.handle()).collect();
    v.sort_by_key(|h| h.id);
    Json(v)
}

async fn get_session(State(st): State<Arc<AppState>>, Path(id): Path<u64>) -> ApiResult<Json<SessionHandle>> {
    Ok(Json(find_session(&st, id)?.handle()))
}

#[derive(Debug, Deserialize)]
struct VersionQuery {
    version: Option<u64>,
}

async fn get_tree(
    State(st): State<Arc<AppState>>,
    Path(id): Path<u64>,
    Query(q): Query<VersionQuery>,
) -> ApiResult<Json<TreeSnapshot>> {
    let entry = find_session(&st, id)?;
    let p = entry.published.read().expect("lock");
    let v = q.version.unwrap_or(p.version);
    match p.snapshots.get(&v) {
        Some(s) => Ok(Json((**s).clone())),
        None if v <= p.version => Err(ApiError::new(StatusCode::GONE, "gone", format!("version {v} is no longer kept"))),
        None => Err(ApiError::not_found(format!("no version {v}"))),
    }
}

async fn get_case(
    State(st): State<Arc<AppState>>,
    Path((id, case)): Path<(u64, String)>,
) -> ApiResult<Json<CaseDetail>> {
    let entry = find_session(&st, id)?;
    let case = parse_case(&case)?;
    let s = entry.solver.lock().await;
    let version = entry.version();
    let node = s.node(&case).ok_or_else(|| ApiError::not_found(format!("no case {case}")))?;
    Ok(Json(CaseDetail::of(node, version)))
}

/// Runs one mutation with the session lock, refusing instead of waiting.
/// The session is republished even when `f` fails, since a refused step
/// still leaves a trace line.
async fn mutate<T: Send + 'static>(
    entry: Arc<SessionEntry>,
    expected: Option<u64>,
    f: impl FnOnce(&mut Session) -> ApiResult<T> + Send + 'static,
) -> ApiResult<(T, u64)> {
    tokio::task::spawn_blocking(move || {
        if entry.running.load(Ordering::SeqCst) {
            return Err(ApiError::conflict("an auto-run is in progress"));
        }
        let mut s = entry.solver.try_lock().map_err(|_| ApiError::conflict("another step is in progress"))?;
        if entry.running.load(Ordering::SeqCst) {
            return Err(ApiError::conflict("an auto-run is in progress"));
        }
        let current = entry.version();
        if let Some(v) = expected {
            if v != current {
                return Err(ApiError::conflict(format!("session is at version {current}, not {v}")));
            }
        }
        let events_before = s.trace().len();
        let r = f(&mut s);
        let version = if r.is_ok() || s.trace().len() != events_before { entry.publish(&s, None) } else { current };
        r.map(|t| (t, version))
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?
}

async fn apply_step(
    State(st): State<Arc<AppState>>,
    Path((id, case)): Path<(u64, String)>,
    Json(body): Json<ApplyBody>,
) -> ApiResult<Json<StepOutcome>> {
    let entry = find_session(&st, id)?;
    let case = parse_case(&case)?;
    let module: ModuleId = body
        .module
        .parse()
        .map_err(|e: xforge_core::solver::UnknownModule| ApiError::bad_request(e.to_string()).at(Some("module".into()), None, None))?;
    let candidate = body.candidate;
    let c = case.clone();
    let ((applied, note, status), version) = mutate(entry.clone(), body.expected_version, move |s| {
        let r = s.apply_module(&c, module, candidate).map_err(session_error)?;
        let status = s.node(&c).map(|n| n.status).expect("case exists");
        Ok((r.applied, r.note, status))
    })
    .await?;
    if !applied {
        let mut e = ApiError::unprocessable("inapplicable", note);
        e.body.field = Some(format!("version {version}"));
        return Err(e);
    }
    if body.resume {
        state::start_run(entry);
    }
    Ok(Json(StepOutcome { applied, note, version, status }))
}

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
struct ExpectBody {
    expected_version: Option<u64>,
}

async fn resume_case(
    State(st): State<Arc<AppState>>,
    Path((id, case)): Path<(u64, String)>,
    body: Option<Json<ExpectBody>>,
) -> ApiResult<Json<StepOutcome>> {
    let entry = find_session(&st, id)?;
    let case = parse_case(&case)?;
    let expected = body.and_then(|b| b.0.expected_version);
    let c = case.clone();
    let (status, version) = mutate(entry, expected, move |s| {
        s.resume(&c).map_err(session_error)?;
        Ok(s.node(&c).map(|n| n.status).expect("case exists"))
    })
    .await?;
    Ok(Json(StepOutcome { applied: true, note: format!("case {case} reopened"), version, status }))
}

async fn full_split(
    State(st): State<Arc<AppState>>,
    Path((id, case)): Path<(u64, String)>,
    Json(body): Json<FullSplitBody>,
) -> ApiResult<Json<StepOutcome>> {
    let entry = find_session(&st, id)?;
    let case = parse_case(&case)?;
    let c = case.clone();
    let (status, version) = mutate(entry, body.expected_version, move |s| {
        s.full_split(&c, body.eq, body.var).map_err(session_error)?;
        Ok(s.node(&c).map(|n| n.status).expect("case exists"))
    })
    .await?;
    let note = format!("full split of equation {} w.r.t. {}", body.eq + 1, body.var);
    Ok(Json(StepOutcome { applied: true, note, version, status }))
}

async fn run_session(State(st): State<Arc<AppState>>, Path(id): Path<u64>) -> ApiResult<(StatusCode, Json<SessionHandle>)> {
    let entry = find_session(&st, id)?;
    if !state::start_run(entry.clone()) {
        return Err(ApiError::conflict("an auto-run is already in progress"));
    }
    Ok((StatusCode::ACCEPTED, Json(entry.handle())))
}

async fn pause_session(State(st): State<Arc<AppState>>, Path(id): Path<u64>) -> ApiResult<Json<SessionHandle>> {
    let entry = find_session(&st, id)?;
    entry.pause.store(true, Ordering::SeqCst);
    Ok(Json(entry.handle()))
}

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
struct EventsQuery {
    /// First event sequence number to return.
    from: Option<u64>,
    /// Keep the stream open for new events (default true).
    follow: Option<bool>,
}

fn event_kind(e: &TraceEvent) -> &'static str {
    match e {
        TraceEvent::Attempt { .. } => "attempt",
        TraceEvent::Created { .. } => "created",
        TraceEvent::Status { .. } => "status",
        TraceEvent::Solution { .. } => "solution",
        TraceEvent::Limit { .. } => "limit",
    }
}

async fn event_stream(
    State(st): State<Arc<AppState>>,
    Path(id): Path<u64>,
    Query(q): Query<EventsQuery>,
    headers: HeaderMap,
) -> ApiResult<Sse<impl Stream<Item = Result<Event, Infallible>>>> {
    let entry = find_session(&st, id)?;
    let after_header = headers
        .get("last-event-id")
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.parse::<u64>().ok())
        .map(|v| v + 1);
    let from = q.from.or(after_header).unwrap_or(0);
    let follow = q.follow.unwrap_or(true);
    let rx = entry.changed.subscribe();
    let init = (entry, from, rx, VecDeque::<TraceEvent>::new());
    let s = stream::unfold(init, move |(entry, mut next, mut rx, mut buf)| async move {
        loop {
            if let Some(ev) = buf.pop_front() {
                let sse = Event::default()
                    .id(ev.seq().to_string())
                    .event(event_kind(&ev))
                    .json_data(&ev)
                    .expect("events serialize");
                return Some((Ok(sse), (entry, next, rx, buf)));
            }
            rx.borrow_and_update();
            {
                let p = entry.published.read().expect("lock");
                buf.extend(p.events.iter().filter(|e| e.seq() >= next).cloned());
            }
            if let Some(last) = buf.back() {
                next = last.seq() + 1;
                continue;
            }
            if !follow || rx.changed().await.is_err() {
                return None;
            }
        }
    });
    Ok(Sse::new(s).keep_alive(KeepAlive::default()))
}

async fn get_trace(
    State(st): State<Arc<AppState>>,
    Path(id): Path<u64>,
    Query(q): Query<EventsQuery>,
) -> ApiResult<Json<EventsPage>> {
    let entry = find_session(&st, id)?;
    let from = q.from.unwrap_or(0);
    let p = entry.published.read().expect("lock");
    Ok(Json(EventsPage {
        version: p.version,
        running: entry.running.load(Ordering::SeqCst),
        events: p.events.iter().filter(|e| e.seq() >= from).cloned().collect(),
    }))
}

async fn get_trace_text(State(st): State<Arc<AppState>>, Path(id): Path<u64>) -> ApiResult<impl IntoResponse> {
    let entry = find_session(&st, id)?;
    let p = entry.published.read().expect("lock");
    let mut text = String::new();
    for e in &p.events {
        text.push_str(&e.to_string());
        text.push('\n');
    }
    Ok(([(header::CONTENT_TYPE, "text/plain; charset=utf-8")], text))
}

async fn export_session(State(st): State<Arc<AppState>>, Path(id): Path<u64>) -> ApiResult<impl IntoResponse> {
    let entry = find_session(&st, id)?;
    let s = entry.solver.lock().await;
    Ok(([(header::CONTENT_TYPE, "text/plain; charset=utf-8")], save_session(&s)))
}

fn puzzle_error(e: PuzzleError) -> ApiError {
    match e {
        PuzzleError::Parse { line, column, message } => ApiError::bad_request(message).at(None, Some(line), Some(column)),
        other => ApiError::bad_request(other.to_string()),
    }
}

fn puzzle_view(id: u64, p: &Puzzle, provenance: Option<xforge_puzzle::Provenance>) -> PuzzleView {
    PuzzleView { id, puzzle: p.to_json(), text: p.render_text(), provenance }
}

async fn add_puzzle(State(st): State<Arc<AppState>>, Json(body): Json<PuzzleBody>) -> ApiResult<(StatusCode, Json<PuzzleView>)> {
    let p = match (&body.text, &body.json) {
        (Some(t), None) => parse_puzzle(t).map_err(puzzle_error)?,
        (None, Some(j)) => Puzzle::from_json(j).map_err(puzzle_error)?,
        _ => return Err(ApiError::bad_request("give exactly one of text, json")),
    };
    let id = st.add_puzzle(p.clone());
    Ok((StatusCode::CREATED, Json(puzzle_view(id, &p, None))))
}

async fn random_puzzle(
    State(st): State<Arc<AppState>>,
    Json(body): Json<RandomPuzzleBody>,
) -> ApiResult<(StatusCode, Json<PuzzleView>)> {
    let size = body.size.unwrap_or(5);
    let mut cfg = GenConfig::new(size, body.times.unwrap_or(1), body.div.unwrap_or(1), body.seed.unwrap_or(0));
    if let Some(a) = body.attempts {
        cfg.attempts = a;
    }
    if let Some(b) = body.param_bound {
        cfg.param_bound = b;
    }
    if let Some(d) = &body.diagonals {
        cfg.diag_mode = d.parse().map_err(|e: String| ApiError::bad_request(e).at(Some("diagonals".into()), None, None))?;
    }
    if let Some(lz) = body.leading_zero {
        cfg.leading_zero = lz;
    }
    let g = tokio::task::spawn_blocking(move || generate(&cfg))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?
        .map_err(|e| match e {
            GenError::BudgetExhausted { .. } => ApiError::unprocessable("budget-exhausted", format!("{e}: {e:?}")),
            other => ApiError::bad_request(other.to_string()),
        })?;
    let id = st.add_puzzle(g.puzzle.clone());
    Ok((StatusCode::CREATED, Json(puzzle_view(id, &g.puzzle, Some(g.provenance)))))
}

async fn get_puzzle(State(st): State<Arc<AppState>>, Path(id): Path<u64>) -> ApiResult<Json<PuzzleView>> {
    let p = st.puzzle(id).ok_or_else(|| ApiError::not_found(format!("no puzzle {id}")))?;
    Ok(Json(puzzle_view(id, &p, None)))
}

async fn check_puzzle(
    State(st): State<Arc<AppState>>,
    Path(id): Path<u64>,
    Json(body): Json<CheckBody>,
) -> ApiResult<Json<CheckReport>> {
    let p = st.puzzle(id).ok_or_else(|| ApiError::not_found(format!("no puzzle {id}")))?;
    let lines = check_assignment(&p, &body.assignment)
        .map_err(|e| ApiError::unprocessable("invalid-assignment", e.to_string()))?;
    let complete = p.letters.iter().all(|l| body.assignment.contains_key(l));
    let all_zero = lines.iter().all(|l| l.status == xforge_puzzle::LineStatus::Zero);
    Ok(Json(CheckReport { complete, all_zero, lines }))
}
