use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, RwLock};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use tokio::sync::{watch, Mutex};
use xforge_core::solver::{RunOutcome, Session, TraceEvent};
use xforge_puzzle::Puzzle;

use crate::dto::{status_counts, CaseSummary, ConfigView, FamilyView, SessionHandle, TreeSnapshot};

/// Scheduler rounds per published auto-run chunk.
const CHUNK_STEPS: usize = 8;
/// Tree snapshots kept per session; older versions answer 410.
pub const SNAPSHOT_HISTORY: usize = 256;

/// What readers see without touching the solver.
#[derive(Default)]
pub struct Published {
    pub version: u64,
    pub snapshots: BTreeMap<u64, Arc<TreeSnapshot>>,
    pub events: Vec<TraceEvent>,
    pub last_outcome: Option<String>,
}

pub struct SessionEntry {
    pub id: u64,
    pub created_at: u64,
    pub config: ConfigView,
    pub solver: Mutex<Session>,
    pub published: RwLock<Published>,
    pub running: AtomicBool,
    pub pause: AtomicBool,
    pub changed: watch::Sender<u64>,
}

impl SessionEntry {
    fn new(id: u64, session: Session) -> SessionEntry {
        let created_at = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let (changed, _) = watch::channel(0);
        let config = ConfigView {
            plist: session.config.plist.to_string(),
            max_terms: session.config.limits.max_terms,
            max_cases: session.config.limits.max_cases,
            wall_secs: session.config.limits.wall.as_secs(),
            explore_nonzero: session.config.explore_nonzero,
        };
        let entry = SessionEntry {
            id,
            created_at,
            config,
            solver: Mutex::new(session),
            published: RwLock::new(Published::default()),
            running: AtomicBool::new(false),
            pause: AtomicBool::new(false),
            changed,
        };
        {
            let s = entry.solver.try_lock().expect("fresh lock");
            entry.publish(&s, None);
        }
        entry
    }

    pub fn version(&self) -> u64 {
        self.published.read().expect("lock").version
    }

    /// Records a new version after a mutation of `s`.
    pub fn publish(&self, s: &Session, outcome: Option<String>) -> u64 {
        let mut p = self.published.write().expect("lock");
        p.version += 1;
        let version = p.version;
        let known = p.events.len();
        p.events.extend(s.trace()[known..].iter().cloned());
        if outcome.is_some() {
            p.last_outcome = outcome;
        }
        let snap = TreeSnapshot {
            version,
            running: self.running.load(Ordering::SeqCst),
            by_status: status_counts(&s.summary()),
            cases: s.nodes().map(CaseSummary::of).collect(),
            solutions: s.solutions().iter().map(FamilyView::of).collect(),
        };
        p.snapshots.insert(version, Arc::new(snap));
        while p.snapshots.len() > SNAPSHOT_HISTORY {
            p.snapshots.pop_first();
        }
        drop(p);
        self.changed.send_replace(version);
        version
    }

    pub fn handle(&self) -> SessionHandle {
        let p = self.published.read().expect("lock");
        SessionHandle {
            id: self.id,
            created_at: self.created_at,
            config: self.config.clone(),
            version: p.version,
            running: self.running.load(Ordering::SeqCst),
            last_outcome: p.last_outcome.clone(),
            events: p.events.len() as u64,
        }
    }
}

fn outcome_text(o: &RunOutcome) -> String {
    match o {
        RunOutcome::Finished => "finished".into(),
        RunOutcome::Yielded(id) => format!("yielded at {id}"),
        RunOutcome::LimitReached(l) => format!("limit reached: {l}"),
    }
}

/// Starts the auto-run. Returns false if one is already in progress.
pub fn start_run(entry: Arc<SessionEntry>) -> bool {
    if entry.running.swap(true, Ordering::SeqCst) {
        return false;
    }
    entry.pause.store(false, Ordering::SeqCst);
    tokio::task::spawn_blocking(move || {
        let start = Instant::now();
        loop {
            let mut s = entry.solver.blocking_lock();
            if entry.pause.load(Ordering::SeqCst) {
                entry.running.store(false, Ordering::SeqCst);
                entry.publish(&s, Some("paused".into()));
                return;
            }
            let r = s.run_bounded(CHUNK_STEPS, start);
            let done = match &r {
                Ok(Some(o)) => Some(outcome_text(o)),
                Ok(None) => None,
                Err(e) => Some(format!("error: {e}")),
            };
            if done.is_some() {
                entry.running.store(false, Ordering::SeqCst);
            }
            entry.publish(&s, done.clone());
            drop(s);
            if done.is_some() {
                return;
            }
        }
    });
    true
}

#[derive(Default)]
pub struct AppState {
    next_id: AtomicU64,
    pub sessions: RwLock<HashMap<u64, Arc<SessionEntry>>>,
    pub puzzles: RwLock<HashMap<u64, Arc<Puzzle>>>,
}

impl AppState {
    fn fresh_id(&self) -> u64 {
        self.next_id.fetch_add(1, Ordering::SeqCst) + 1
    }

    pub fn add_session(&self, s: Session) -> Arc<SessionEntry> {
        let id = self.fresh_id();
        let entry = Arc::new(SessionEntry::new(id, s));
        self.sessions.write().expect("lock").insert(id, entry.clone());
        entry
    }

    pub fn session(&self, id: u64) -> Option<Arc<SessionEntry>> {
        self.sessions.read().expect("lock").get(&id).cloned()
    }

    pub fn add_puzzle(&self, p: Puzzle) -> u64 {
        let id = self.fresh_id();
        self.puzzles.write().expect("lock").insert(id, Arc::new(p));
        id
    }

    pub fn puzzle(&self, id: u64) -> Option<Arc<Puzzle>> {
        self.puzzles.read().expect("lock").get(&id).cloned()
    }
}
