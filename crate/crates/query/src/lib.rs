//! Query execution for the explorer: a SPARQL endpoint client, the heavy
//! query store, the level-zero fast path, incremental chart evaluation and
//! the query manager that ties them together.

pub mod client;
pub mod dataset;
pub mod error;
pub mod fastpath;
pub mod hvs;
pub mod incremental;
pub mod manager;
pub mod source;

pub use client::{EndpointClient, EndpointConfig};
pub use dataset::{DatasetHandle, ExecutionHook};
pub use error::{ClientError, QueryError};
pub use fastpath::{FastPathIndex, PredicateCount};
pub use hvs::{HeavyQueryStore, HvsEntry, HvsKey};
pub use incremental::{execute_incremental, IncrementalOptions, Progress};
pub use manager::{ManagerConfig, MetricsSnapshot, QueryManager};
pub use source::PlanSource;
