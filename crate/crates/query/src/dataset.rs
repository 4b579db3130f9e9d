//! The dataset a query manager runs against: an in-memory graph evaluated by
//! the embedded engine, or a remote SPARQL endpoint.

use std::ops::Range;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use ldx_core::rdf::{DatasetStats, Graph, RdfTriple};
use ldx_core::sparql::{evaluate_with, EvalOptions, Memo, PreparedQuery};
use ldx_core::QueryResult;
use parking_lot::RwLock;

use crate::client::EndpointClient;
use crate::error::QueryError;

/// Called with the query text before every backend execution. Tests use it
/// to count executions and inject latency.
pub type ExecutionHook = Arc<dyn Fn(&str) + Send + Sync>;

enum Backend {
    Embedded(RwLock<Arc<Graph>>),
    Remote { client: EndpointClient, version: AtomicU64 },
}

pub struct DatasetHandle {
    id: String,
    backend: Backend,
    hook: RwLock<Option<ExecutionHook>>,
}

impl std::fmt::Debug for DatasetHandle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DatasetHandle")
            .field("id", &self.id)
            .field("version", &self.version())
            .finish_non_exhaustive()
    }
}

static NEXT_EMBEDDED: AtomicU64 = AtomicU64::new(1);

impl DatasetHandle {
    pub fn embedded(graph: impl Into<Arc<Graph>>) -> Self {
        let n = NEXT_EMBEDDED.fetch_add(1, Ordering::Relaxed);
        DatasetHandle {
            id: format!("embedded:{n}"),
            backend: Backend::Embedded(RwLock::new(graph.into())),
            hook: RwLock::new(None),
        }
    }

    /// A remote dataset, identified by its endpoint URL.
    pub fn remote(client: EndpointClient) -> Self {
        DatasetHandle {
            id: client.config().url.clone(),
            backend: Backend::Remote {
                client,
                version: AtomicU64::new(1),
            },
            hook: RwLock::new(None),
        }
    }

    /// Identifier used to partition cached results between datasets.
    pub fn id(&self) -> &str {
        &self.id
    }

    /// Changes whenever the data may have changed.
    pub fn version(&self) -> u64 {
        match &self.backend {
            Backend::Embedded(g) => g.read().version(),
            Backend::Remote { version, .. } => version.load(Ordering::SeqCst),
        }
    }

    pub fn is_remote(&self) -> bool {
        matches!(self.backend, Backend::Remote { .. })
    }

    /// The current graph of an embedded dataset.
    pub fn graph(&self) -> Option<Arc<Graph>> {
        match &self.backend {
            Backend::Embedded(g) => Some(g.read().clone()),
            Backend::Remote { .. } => None,
        }
    }

    pub fn client(&self) -> Option<&EndpointClient> {
        match &self.backend {
            Backend::Remote { client, .. } => Some(client),
            Backend::Embedded(_) => None,
        }
    }

    /// Adds triples to an embedded dataset. Returns the new version, or
    /// `None` for remote datasets, which change outside our control.
    pub fn append(&self, triples: impl IntoIterator<Item = RdfTriple>) -> Option<u64> {
        match &self.backend {
            Backend::Embedded(g) => {
                let mut g = g.write();
                *g = Arc::new(g.appended(triples));
                Some(g.version())
            }
            Backend::Remote { .. } => None,
        }
    }

    /// Records that the data changed and returns the new version.
    pub fn bump_version(&self) -> u64 {
        match &self.backend {
            Backend::Embedded(_) => self.append(std::iter::empty()).expect("embedded"),
            Backend::Remote { version, .. } => version.fetch_add(1, Ordering::SeqCst) + 1,
        }
    }

    pub fn set_hook(&self, hook: Option<ExecutionHook>) {
        *self.hook.write() = hook;
    }

    fn before(&self, text: &str) {
        let hook = self.hook.read().clone();
        if let Some(h) = hook {
            h(text);
        }
    }

    /// One execution on the backend, without caching.
    pub fn run(&self, text: &str, timeout: Option<Duration>) -> Result<QueryResult, QueryError> {
        self.before(text);
        match &self.backend {
            Backend::Embedded(g) => {
                let graph = g.read().clone();
                let mut options = EvalOptions::default();
                if let Some(t) = timeout {
                    options = options.with_timeout(t);
                }
                Ok(evaluate_with(text, &graph, &options)?)
            }
            Backend::Remote { client, .. } => Ok(client.execute(text)?),
        }
    }

    /// Runs a chunk query over triple positions `range` of `graph`. `memo`
    /// carries chunk-independent subresults from one chunk to the next.
    pub(crate) fn run_chunk(
        &self,
        text: &str,
        query: &PreparedQuery,
        memo: &mut Memo,
        graph: &Graph,
        range: Range<usize>,
        deadline: Option<Instant>,
    ) -> Result<QueryResult, QueryError> {
        self.before(text);
        let options = EvalOptions {
            chunk: Some(range),
            deadline,
            ..EvalOptions::default()
        };
        Ok(query.evaluate(graph, &options, memo)?)
    }

    pub fn stats(&self) -> Result<DatasetStats, QueryError> {
        match &self.backend {
            Backend::Embedded(g) => Ok(g.read().stats()),
            Backend::Remote { client, .. } => Ok(client.probe()?),
        }
    }
}
