//! Routes plans to the heavy query store, the fast path or the backend, and
//! coalesces identical concurrent plans into one execution.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use ldx_core::sparql::QueryPlan;
use ldx_core::{Origin, QueryResult};
use parking_lot::{Condvar, Mutex};
use serde::Serialize;

use crate::dataset::DatasetHandle;
use crate::error::QueryError;
use crate::fastpath::FastPathIndex;
use crate::hvs::{HeavyQueryStore, HvsKey};
use crate::incremental::{chart_spec, execute_incremental, IncrementalOptions, Progress};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManagerConfig {
    /// Results of executions slower than this are kept in the heavy query store.
    pub heavy_threshold: Duration,
    /// Triples (embedded) or members (remote) per incremental chunk.
    pub chunk_size: usize,
    /// Chunks evaluated before incremental evaluation stops.
    pub max_chunks: usize,
    pub query_timeout: Option<Duration>,
    /// Extra attempts after an embedded timeout. Remote retries are left to
    /// the endpoint client.
    pub max_resubmissions: u32,
    pub hvs_max_bytes: Option<usize>,
    pub hvs_path: Option<PathBuf>,
    pub fast_path: bool,
}

impl Default for ManagerConfig {
    fn default() -> Self {
        ManagerConfig {
            heavy_threshold: Duration::from_secs(1),
            chunk_size: 100_000,
            max_chunks: 10,
            query_timeout: None,
            max_resubmissions: 2,
            hvs_max_bytes: None,
            hvs_path: None,
            fast_path: true,
        }
    }
}

impl ManagerConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.heavy_threshold.is_zero() {
            return Err("heavy_threshold must be positive".into());
        }
        if self.chunk_size == 0 || self.max_chunks == 0 {
            return Err("chunk_size and max_chunks must be positive".into());
        }
        if self.query_timeout.is_some_and(|t| t.is_zero()) {
            return Err("query_timeout must be positive".into());
        }
        Ok(())
    }
}

/// Upper bounds, in milliseconds, of the backend latency histogram buckets.
pub const LATENCY_BUCKETS_MS: [u64; 12] = [1, 2, 5, 10, 20, 50, 100, 200, 500, 1000, 5000, 30000];

#[derive(Debug, Default)]
struct Metrics {
    cache_hits: AtomicU64,
    cache_misses: AtomicU64,
    heavy_insertions: AtomicU64,
    dedup_coalesced: AtomicU64,
    fast_path_hits: AtomicU64,
    backend_executions: AtomicU64,
    backend_errors: AtomicU64,
    incremental_runs: AtomicU64,
    /// One slot per bucket plus the overflow bucket.
    backend_ms: [AtomicU64; LATENCY_BUCKETS_MS.len() + 1],
    backend_ms_sum: AtomicU64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Histogram {
    /// Bucket upper bounds in milliseconds; the last bucket is unbounded.
    pub bounds_ms: Vec<u64>,
    pub counts: Vec<u64>,
    pub sum_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MetricsSnapshot {
    pub cache_hits: u64,
    pub cache_misses: u64,
    pub heavy_insertions: u64,
    pub dedup_coalesced: u64,
    pub fast_path_hits: u64,
    pub backend_executions: u64,
    pub backend_errors: u64,
    pub incremental_runs: u64,
    pub hvs_entries: u64,
    pub hvs_bytes: u64,
    pub backend_ms: Histogram,
}

type Outcome = Result<QueryResult, QueryError>;

#[derive(Default)]
struct Pending {
    outcome: Mutex<Option<Outcome>>,
    done: Condvar,
}

impl Pending {
    fn wait(&self) -> Outcome {
        let mut slot = self.outcome.lock();
        while slot.is_none() {
            self.done.wait(&mut slot);
        }
        slot.clone().expect("filled")
    }
}

/// Removes the in-flight entry and wakes the waiters even if the leader
/// unwinds.
struct Leader<'a> {
    manager: &'a QueryManager,
    key: HvsKey,
    pending: Arc<Pending>,
}

impl Leader<'_> {
    fn finish(self, outcome: Outcome) -> Outcome {
        *self.pending.outcome.lock() = Some(outcome.clone());
        outcome
    }
}

impl Drop for Leader<'_> {
    fn drop(&mut self) {
        self.manager.inflight.lock().remove(&self.key);
        let mut slot = self.pending.outcome.lock();
        if slot.is_none() {
            *slot = Some(Err(QueryError::CancelledByShutdown));
        }
        self.pending.done.notify_all();
    }
}

pub struct QueryManager {
    config: ManagerConfig,
    hvs: Mutex<HeavyQueryStore>,
    inflight: Mutex<HashMap<HvsKey, Arc<Pending>>>,
    fast: Mutex<HashMap<(String, Option<String>), Arc<FastPathIndex>>>,
    metrics: Metrics,
    shutdown: AtomicBool,
}

impl std::fmt::Debug for QueryManager {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("QueryManager").field("config", &self.config).finish_non_exhaustive()
    }
}

impl QueryManager {
    pub fn new(config: ManagerConfig) -> std::io::Result<Self> {
        let mut hvs = match &config.hvs_path {
            Some(path) => HeavyQueryStore::open(path, config.heavy_threshold)?,
            None => HeavyQueryStore::new(config.heavy_threshold),
        };
        if let Some(max) = config.hvs_max_bytes {
            hvs = hvs.with_max_bytes(max);
        }
        Ok(QueryManager {
            config,
            hvs: Mutex::new(hvs),
            inflight: Mutex::new(HashMap::new()),
            fast: Mutex::new(HashMap::new()),
            metrics: Metrics::default(),
            shutdown: AtomicBool::new(false),
        })
    }

    pub fn config(&self) -> &ManagerConfig {
        &self.config
    }

    /// Runs a plan: heavy query store first, then the fast path, then the
    /// backend.
    pub fn execute(&self, plan: &QueryPlan, dataset: &DatasetHandle) -> Outcome {
        self.check_running()?;
        let key = HvsKey::new(dataset.id(), dataset.version(), plan.canonical_key.as_str());
        if let Some(hit) = self.cached(&key) {
            return Ok(hit);
        }
        self.metrics.cache_misses.fetch_add(1, Ordering::Relaxed);

        if self.config.fast_path {
            if let (Some(chart), Some(graph)) = (plan.level_zero(), dataset.graph()) {
                let index = self.fast_path(dataset.id(), &graph, chart.root.as_deref());
                self.metrics.fast_path_hits.fetch_add(1, Ordering::Relaxed);
                return Ok(index.answer(&chart));
            }
        }

        let pending = {
            let mut inflight = self.inflight.lock();
            match inflight.get(&key) {
                Some(p) => Err(p.clone()),
                None => {
                    let p = Arc::new(Pending::default());
                    inflight.insert(key.clone(), p.clone());
                    Ok(p)
                }
            }
        };
        let pending = match pending {
            Ok(p) => p,
            Err(shared) => {
                self.metrics.dedup_coalesced.fetch_add(1, Ordering::Relaxed);
                return shared.wait();
            }
        };
        let leader = Leader {
            manager: self,
            key: key.clone(),
            pending,
        };
        let outcome = self.run_backend(&plan.text, dataset).map(|(result, runtime)| {
            if self.hvs.lock().offer(key, &result, runtime) {
                self.metrics.heavy_insertions.fetch_add(1, Ordering::Relaxed);
            }
            result
        });
        leader.finish(outcome)
    }

    fn check_running(&self) -> Result<(), QueryError> {
        if self.shutdown.load(Ordering::SeqCst) {
            Err(QueryError::CancelledByShutdown)
        } else {
            Ok(())
        }
    }

    fn cached(&self, key: &HvsKey) -> Option<QueryResult> {
        let mut hvs = self.hvs.lock();
        let entry = hvs.get(key)?;
        self.metrics.cache_hits.fetch_add(1, Ordering::Relaxed);
        let mut result = entry.result.clone();
        result.origin = Origin::Cache;
        Some(result)
    }

    /// The fast-path index for `root`, rebuilt when the graph version moved.
    pub fn fast_path(&self, source: &str, graph: &ldx_core::rdf::Graph, root: Option<&str>) -> Arc<FastPathIndex> {
        let mut fast = self.fast.lock();
        let key = (source.to_string(), root.map(str::to_string));
        match fast.get(&key) {
            Some(index) if index.version() == graph.version() => index.clone(),
            _ => {
                let index = Arc::new(FastPathIndex::build(graph, root));
                fast.insert(key, index.clone());
                index
            }
        }
    }

    /// Executes on the backend with resubmission after embedded timeouts,
    /// returning the result and the wall-clock time of the successful attempt.
    fn run_backend(&self, text: &str, dataset: &DatasetHandle) -> Result<(QueryResult, Duration), QueryError> {
        let attempts = if dataset.is_remote() {
            1
        } else {
            self.config.max_resubmissions + 1
        };
        let mut attempt = 0;
        loop {
            attempt += 1;
            self.check_running()?;
            let start = Instant::now();
            let outcome = dataset.run(text, self.config.query_timeout);
            let runtime = start.elapsed();
            self.metrics.backend_executions.fetch_add(1, Ordering::Relaxed);
            self.record_latency(runtime);
            match outcome {
                Ok(r) => return Ok((r, runtime)),
                Err(e) if e.is_timeout() && attempt < attempts => {
                    log::warn!("resubmitting after timeout ({attempt}/{attempts})");
                }
                Err(e) => {
                    self.metrics.backend_errors.fetch_add(1, Ordering::Relaxed);
                    return Err(e);
                }
            }
        }
    }

    fn record_latency(&self, runtime: Duration) {
        let ms = runtime.as_millis() as u64;
        let bucket = LATENCY_BUCKETS_MS
            .iter()
            .position(|b| ms <= *b)
            .unwrap_or(LATENCY_BUCKETS_MS.len());
        self.metrics.backend_ms[bucket].fetch_add(1, Ordering::Relaxed);
        self.metrics.backend_ms_sum.fetch_add(ms, Ordering::Relaxed);
    }

    /// Chunked evaluation of a chart plan with the configured chunk size and
    /// chunk limit.
    pub fn execute_incremental(
        &self,
        plan: &QueryPlan,
        dataset: &DatasetHandle,
        on_partial: &mut dyn FnMut(&Progress),
    ) -> Result<Progress, QueryError> {
        let options = IncrementalOptions {
            chunk_size: self.config.chunk_size,
            max_chunks: Some(self.config.max_chunks),
            timeout: self.config.query_timeout,
        };
        self.execute_incremental_with(plan, dataset, &options, on_partial)
    }

    pub fn execute_incremental_with(
        &self,
        plan: &QueryPlan,
        dataset: &DatasetHandle,
        options: &IncrementalOptions,
        on_partial: &mut dyn FnMut(&Progress),
    ) -> Result<Progress, QueryError> {
        self.check_running()?;
        chart_spec(plan)?;
        let key = HvsKey::new(dataset.id(), dataset.version(), plan.canonical_key.as_str());
        if let Some(result) = self.cached(&key) {
            let progress = Progress {
                chunks_done: 1,
                chunks_total: 1,
                fraction: 1.0,
                complete: true,
                result,
            };
            on_partial(&progress);
            return Ok(progress);
        }
        self.metrics.cache_misses.fetch_add(1, Ordering::Relaxed);
        self.metrics.incremental_runs.fetch_add(1, Ordering::Relaxed);
        let start = Instant::now();
        let mut forward = |p: &Progress| {
            if !self.shutdown.load(Ordering::SeqCst) {
                on_partial(p);
            }
        };
        let progress = execute_incremental(dataset, plan, options, &mut forward)?;
        self.check_running()?;
        if progress.complete && self.hvs.lock().offer(key, &progress.result, start.elapsed()) {
            self.metrics.heavy_insertions.fetch_add(1, Ordering::Relaxed);
        }
        Ok(progress)
    }

    /// Drops cached results of `dataset` that belong to older versions.
    pub fn dataset_updated(&self, dataset: &DatasetHandle) -> usize {
        self.hvs.lock().retain_version(dataset.id(), dataset.version())
    }

    pub fn clear_cache(&self) {
        self.hvs.lock().clear();
    }

    /// Read access to the heavy query store, for inspection.
    pub fn with_hvs<R>(&self, f: impl FnOnce(&HeavyQueryStore) -> R) -> R {
        f(&self.hvs.lock())
    }

    /// Makes pending and future calls fail with `CancelledByShutdown`.
    pub fn shutdown(&self) {
        self.shutdown.store(true, Ordering::SeqCst);
    }

    pub fn is_shut_down(&self) -> bool {
        self.shutdown.load(Ordering::SeqCst)
    }

    pub fn metrics(&self) -> MetricsSnapshot {
        let m = &self.metrics;
        let load = |a: &AtomicU64| a.load(Ordering::Relaxed);
        let (entries, bytes) = self.with_hvs(|h| (h.len() as u64, h.bytes() as u64));
        MetricsSnapshot {
            cache_hits: load(&m.cache_hits),
            cache_misses: load(&m.cache_misses),
            heavy_insertions: load(&m.heavy_insertions),
            dedup_coalesced: load(&m.dedup_coalesced),
            fast_path_hits: load(&m.fast_path_hits),
            backend_executions: load(&m.backend_executions),
            backend_errors: load(&m.backend_errors),
            incremental_runs: load(&m.incremental_runs),
            hvs_entries: entries,
            hvs_bytes: bytes,
            backend_ms: Histogram {
                bounds_ms: LATENCY_BUCKETS_MS.to_vec(),
                counts: m.backend_ms.iter().map(load).collect(),
                sum_ms: load(&m.backend_ms_sum),
            },
        }
    }
}
