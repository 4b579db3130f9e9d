//! Bar charts over an in-memory graph: bars, expansions, filters and
//! instance tables.

mod bar;
mod engine;
mod error;
mod filter;
mod lineage;
mod session;
mod table;

pub use bar::{
    threshold_view, Bar, BarLabel, BarMetrics, BarType, Chart, ChartBar, ChartKind, Direction, Members,
    ThresholdView, LITERAL_LABEL, UNTYPED_LABEL,
};
pub use engine::{filter_chart, root_chart, Engine, EngineConfig, ExpansionKind};
pub use error::{BackendFailure, ExploreError};
pub use filter::{validate_all, Comparator, FilterCondition, FilterValue};
pub use lineage::{Lineage, MAX_DEPTH};
pub use session::{ChartSource, ClassInfo, GraphSource, Pane, ParentRef, Session, Step, View, DEFAULT_THRESHOLD};
pub use table::{fold_rows, sort_cell, Table, TableRequest, TableRow, DEFAULT_LIMIT};
