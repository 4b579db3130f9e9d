//! Server-side session store. Everything here blocks; handlers call it from
//! the blocking thread pool.

use std::collections::HashMap;
use std::fs::File;
use std::io::BufReader;
use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use ldx_core::explore::{ChartSource, Session};
use ldx_core::rdf::{DatasetStats, Graph};
use ldx_query::{DatasetHandle, EndpointClient, PlanSource, QueryManager};
use parking_lot::{Mutex, RwLock};

use crate::config::ServerConfig;
use crate::dto::{ChartParams, CreateSession, Mode, PaneJson, SessionJson};
use crate::error::ApiError;

pub struct SessionRecord {
    pub id: String,
    pub dataset: Arc<DatasetHandle>,
    pub source: Arc<PlanSource>,
    pub session: RwLock<Session>,
    pub stats: DatasetStats,
    pub created_at: SystemTime,
    last_used: Mutex<Instant>,
}

impl SessionRecord {
    fn touch(&self) {
        *self.last_used.lock() = Instant::now();
    }

    pub fn idle(&self, now: Instant) -> Duration {
        now.saturating_duration_since(*self.last_used.lock())
    }

    pub fn to_json(&self) -> SessionJson {
        let session = self.session.read();
        SessionJson {
            session_id: self.id.clone(),
            dataset: self.dataset.id().to_string(),
            stats: self.stats,
            created_at: self.created_at.duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            panes: session
                .panes()
                .iter()
                .map(|p| PaneJson::render(p, &ChartParams::default()))
                .collect(),
        }
    }
}

pub struct AppState {
    config: ServerConfig,
    manager: Arc<QueryManager>,
    /// Loaded datasets by source key, shared by sessions on the same source.
    datasets: Mutex<HashMap<String, Arc<DatasetHandle>>>,
    sessions: RwLock<HashMap<String, Arc<SessionRecord>>>,
}

impl AppState {
    pub fn new(config: ServerConfig) -> Result<Self, ApiError> {
        let manager = QueryManager::new(config.manager.clone()).map_err(|e| ApiError::Internal(e.to_string()))?;
        Ok(AppState {
            config,
            manager: Arc::new(manager),
            datasets: Mutex::new(HashMap::new()),
            sessions: RwLock::new(HashMap::new()),
        })
    }

    pub fn config(&self) -> &ServerConfig {
        &self.config
    }

    pub fn manager(&self) -> &Arc<QueryManager> {
        &self.manager
    }

    /// Loads the configured data files and probes the configured endpoint,
    /// returning each source with its statistics. Failures carry the mode
    /// of the source that failed.
    pub fn preload(&self) -> Result<Vec<(String, DatasetStats)>, (Mode, ApiError)> {
        let mut sources: Vec<(Mode, String)> = self
            .config
            .data
            .iter()
            .map(|p| (Mode::Embedded, p.display().to_string()))
            .collect();
        sources.extend(self.config.endpoint.iter().map(|u| (Mode::Remote, u.clone())));
        sources
            .into_iter()
            .map(|(mode, source)| {
                let stats = self.dataset(mode, &source).and_then(|d| self.dataset_stats(&d));
                stats.map(|s| (source, s)).map_err(|e| (mode, e))
            })
            .collect()
    }

    fn dataset_stats(&self, dataset: &Arc<DatasetHandle>) -> Result<DatasetStats, ApiError> {
        dataset.stats().map_err(|e| ApiError::Unprocessable(e.to_string()))
    }

    fn dataset(&self, mode: Mode, source: &str) -> Result<Arc<DatasetHandle>, ApiError> {
        let key = match mode {
            Mode::Embedded => {
                let path = Path::new(source)
                    .canonicalize()
                    .map_err(|e| ApiError::Unprocessable(format!("{source}: {e}")))?;
                format!("file:{}", path.display())
            }
            Mode::Remote => source.to_string(),
        };
        if let Some(d) = self.datasets.lock().get(&key) {
            return Ok(d.clone());
        }
        let dataset = match mode {
            Mode::Embedded => {
                let file = File::open(source).map_err(|e| ApiError::Unprocessable(format!("{source}: {e}")))?;
                let graph = Graph::from_ntriples_with(BufReader::new(file), self.config.label_preference())
                    .map_err(|e| ApiError::Unprocessable(format!("{source}: {e}")))?;
                DatasetHandle::embedded(graph)
            }
            Mode::Remote => {
                let client = EndpointClient::new(self.config.endpoint_config(source))
                    .map_err(|e| ApiError::Unprocessable(e.to_string()))?;
                client
                    .probe()
                    .map_err(|e| ApiError::Unprocessable(format!("{source}: {e}")))?;
                DatasetHandle::remote(client)
            }
        };
        // A concurrent loader may have won; keep the first.
        Ok(self.datasets.lock().entry(key).or_insert_with(|| Arc::new(dataset)).clone())
    }

    pub fn create_session(&self, request: &CreateSession) -> Result<Arc<SessionRecord>, ApiError> {
        if request.source.trim().is_empty() {
            return Err(ApiError::BadRequest("source must not be empty".into()));
        }
        let dataset = self.dataset(request.mode, &request.source)?;
        let stats = self.dataset_stats(&dataset)?;
        let source = Arc::new(
            PlanSource::new(
                self.manager.clone(),
                dataset.clone(),
                self.config.engine_config(request.root_class.as_deref()),
            )
            .with_label_preference(self.config.label_preference()),
        );
        let session = Session::new(source.clone() as Arc<dyn ChartSource>)?;
        let record = Arc::new(SessionRecord {
            id: uuid::Uuid::new_v4().simple().to_string(),
            dataset,
            source,
            session: RwLock::new(session),
            stats,
            created_at: SystemTime::now(),
            last_used: Mutex::new(Instant::now()),
        });
        self.sessions.write().insert(record.id.clone(), record.clone());
        log::info!("session {} opened on {}", record.id, record.dataset.id());
        Ok(record)
    }

    pub fn session(&self, id: &str) -> Result<Arc<SessionRecord>, ApiError> {
        let record = self
            .sessions
            .read()
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::UnknownSession(id.to_string()))?;
        record.touch();
        Ok(record)
    }

    pub fn remove_session(&self, id: &str) -> Result<(), ApiError> {
        self.sessions
            .write()
            .remove(id)
            .map(|_| ())
            .ok_or_else(|| ApiError::UnknownSession(id.to_string()))
    }

    pub fn session_count(&self) -> usize {
        self.sessions.read().len()
    }

    /// Drops sessions idle for longer than the configured TTL as of `now`.
    pub fn sweep(&self, now: Instant) -> usize {
        let ttl = self.config.session_ttl;
        let mut sessions = self.sessions.write();
        let before = sessions.len();
        sessions.retain(|_, r| r.idle(now) <= ttl);
        let removed = before - sessions.len();
        if removed > 0 {
            log::info!("evicted {removed} idle sessions");
        }
        removed
    }
}
