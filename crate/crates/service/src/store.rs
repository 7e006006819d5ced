use gavf_core::elicitation::{Session, SessionSnapshot};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

pub struct ApiSession {
    /// Seconds since the Unix epoch.
    pub created_at: u64,
    pub session: Session,
}

/// On-disk and `GET` form of a session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredSession {
    pub created_at: u64,
    #[serde(flatten)]
    pub snapshot: SessionSnapshot,
}

impl ApiSession {
    pub fn stored(&self) -> StoredSession {
        StoredSession {
            created_at: self.created_at,
            snapshot: self.session.snapshot(),
        }
    }
}

pub type SessionHandle = Arc<Mutex<ApiSession>>;

/// Sessions by id. Lookups share a read lock; each session has its own
/// mutex so requests to one session run one at a time.
pub struct SessionStore {
    sessions: RwLock<HashMap<String, SessionHandle>>,
    next_id: AtomicU64,
    snapshot_dir: Option<PathBuf>,
}

fn session_number(id: &str) -> Option<u64> {
    id.strip_prefix('s')?.parse().ok()
}

impl SessionStore {
    pub fn new(snapshot_dir: Option<PathBuf>) -> Self {
        Self {
            sessions: RwLock::new(HashMap::new()),
            next_id: AtomicU64::new(1),
            snapshot_dir,
        }
    }

    /// Reloads every `*.json` snapshot in the snapshot directory.
    pub fn load(snapshot_dir: PathBuf) -> std::io::Result<Self> {
        std::fs::create_dir_all(&snapshot_dir)?;
        let store = Self::new(Some(snapshot_dir.clone()));
        let mut highest = 0;
        for entry in std::fs::read_dir(&snapshot_dir)? {
            let path = entry?.path();
            if path.extension().is_none_or(|e| e != "json") {
                continue;
            }
            match read_snapshot(&path) {
                Ok(api) => {
                    highest = highest.max(session_number(&api.session.id).unwrap_or(0));
                    store.insert(api);
                }
                Err(e) => tracing::warn!("skipping {}: {e}", path.display()),
            }
        }
        store.next_id.store(highest + 1, Ordering::SeqCst);
        Ok(store)
    }

    pub fn fresh_id(&self) -> String {
        format!("s{}", self.next_id.fetch_add(1, Ordering::SeqCst))
    }

    pub fn now() -> u64 {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0)
    }

    pub fn insert(&self, api: ApiSession) -> SessionHandle {
        let id = api.session.id.clone();
        let handle = Arc::new(Mutex::new(api));
        self.sessions
            .write()
            .expect("store lock")
            .insert(id, handle.clone());
        handle
    }

    pub fn get(&self, id: &str) -> Option<SessionHandle> {
        self.sessions.read().expect("store lock").get(id).cloned()
    }

    pub fn len(&self) -> usize {
        self.sessions.read().expect("store lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Writes the session's snapshot when persistence is on.
    pub fn persist(&self, api: &ApiSession) -> std::io::Result<()> {
        let Some(dir) = &self.snapshot_dir else {
            return Ok(());
        };
        let path = dir.join(format!("{}.json", api.session.id));
        let tmp = path.with_extension("json.tmp");
        let text = serde_json::to_string_pretty(&api.stored()).map_err(std::io::Error::other)?;
        std::fs::write(&tmp, text)?;
        std::fs::rename(tmp, path)
    }
}

fn read_snapshot(path: &Path) -> Result<ApiSession, String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    let stored: StoredSession = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let session = Session::restore(&stored.snapshot).map_err(|e| e.to_string())?;
    Ok(ApiSession {
        created_at: stored.created_at,
        session,
    })
}
