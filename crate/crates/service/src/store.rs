//! Session storage: in-memory sessions backed by their log files.
//!
//! Each session lives in `<id>.jsonl` (the session log) next to
//! `<id>.version`, a counter bumped by every mutation. The counter is kept
//! apart from the log because undo shortens the log, and a stale client must
//! never see its old version number come back.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use sens_core::session::{SessionConfig, TestSession};

use crate::error::ApiError;

pub struct Entry {
    pub session: TestSession,
    pub version: u64,
}

pub struct Store {
    dir: Option<PathBuf>,
    sessions: RwLock<BTreeMap<String, Arc<Mutex<Entry>>>>,
}

impl Store {
    /// A store without persistence, for tests and throwaway servers.
    pub fn in_memory() -> Self {
        Store {
            dir: None,
            sessions: RwLock::new(BTreeMap::new()),
        }
    }

    /// Opens (creating if needed) a data directory and replays every session
    /// log found there.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, ApiError> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        let mut sessions = BTreeMap::new();
        for ent in fs::read_dir(&dir)? {
            let path = ent?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("jsonl") {
                continue;
            }
            let Some(id) = path.file_stem().and_then(|s| s.to_str()).map(String::from) else { continue };
            let session = TestSession::from_log(&fs::read_to_string(&path)?)?;
            let version = match fs::read_to_string(path.with_extension("version")) {
                Ok(v) => v.trim().parse().map_err(|_| ApiError::Internal(format!("bad version file for {id}")))?,
                Err(_) => session.events().len() as u64,
            };
            sessions.insert(id, Arc::new(Mutex::new(Entry { session, version })));
        }
        Ok(Store {
            dir: Some(dir),
            sessions: RwLock::new(sessions),
        })
    }

    pub fn create(&self, cfg: SessionConfig) -> Result<(String, Arc<Mutex<Entry>>), ApiError> {
        let session = TestSession::new(cfg)?;
        let id = uuid::Uuid::new_v4().simple().to_string();
        let entry = Entry { session, version: 0 };
        self.persist(&id, &entry)?;
        let entry = Arc::new(Mutex::new(entry));
        self.sessions.write().unwrap().insert(id.clone(), entry.clone());
        Ok((id, entry))
    }

    pub fn get(&self, id: &str) -> Result<Arc<Mutex<Entry>>, ApiError> {
        self.sessions.read().unwrap().get(id).cloned().ok_or(ApiError::NotFound)
    }

    pub fn ids(&self) -> Vec<(String, Arc<Mutex<Entry>>)> {
        self.sessions.read().unwrap().iter().map(|(k, v)| (k.clone(), v.clone())).collect()
    }

    /// Applies `f` to a copy of the session when `version` is current, then
    /// persists and commits the result under the next version.
    pub fn mutate(
        &self,
        id: &str,
        version: u64,
        f: impl FnOnce(&TestSession) -> Result<TestSession, ApiError>,
    ) -> Result<Arc<Mutex<Entry>>, ApiError> {
        let entry = self.get(id)?;
        {
            let mut e = entry.lock().unwrap();
            if e.version != version {
                return Err(ApiError::VersionConflict { current: e.version });
            }
            let next = Entry {
                session: f(&e.session)?,
                version: version + 1,
            };
            self.persist(id, &next)?;
            *e = next;
        }
        Ok(entry)
    }

    fn persist(&self, id: &str, e: &Entry) -> Result<(), ApiError> {
        let Some(dir) = &self.dir else { return Ok(()) };
        write_atomic(&dir.join(format!("{id}.jsonl")), &e.session.to_log())?;
        write_atomic(&dir.join(format!("{id}.version")), &e.version.to_string())?;
        Ok(())
    }
}

fn write_atomic(path: &Path, text: &str) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, text)?;
    fs::rename(tmp, path)
}
