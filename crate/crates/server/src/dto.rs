//! Request and response bodies. Field names are snake_case, URIs are full
//! strings and coverage is a fraction.

use ldx_core::explore::{
    threshold_view, BarType, Chart, ChartBar, ChartKind, ClassInfo, ExpansionKind, FilterCondition, Pane, ParentRef,
    Table,
};
use ldx_core::rdf::{DatasetStats, Term};
use serde::{Deserialize, Serialize};

use crate::error::ApiError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Embedded,
    Remote,
}

#[derive(Debug, Clone, Deserialize)]
pub struct CreateSession {
    pub mode: Mode,
    /// N-Triples file path (embedded) or endpoint URL (remote).
    pub source: String,
    pub root_class: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SessionCreated {
    pub session_id: String,
    pub dataset: String,
    pub stats: DatasetStats,
    pub pane: PaneJson,
}

#[derive(Debug, Clone, Serialize)]
pub struct SessionJson {
    pub session_id: String,
    pub dataset: String,
    pub stats: DatasetStats,
    pub created_at: u64,
    pub panes: Vec<PaneJson>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct ExpandRequest {
    pub parent_pane: usize,
    pub label: String,
    pub expansion: String,
    #[serde(default)]
    pub filters: Vec<FilterCondition>,
}

impl ExpandRequest {
    pub fn kind(&self) -> Result<ExpansionKind, ApiError> {
        let kind = ExpansionKind::parse(&self.expansion)
            .ok_or_else(|| ApiError::BadRequest(format!("unknown expansion {:?}", self.expansion)))?;
        match kind {
            ExpansionKind::Filter(_) => Ok(ExpansionKind::Filter(self.filters.clone())),
            _ if !self.filters.is_empty() => Err(ApiError::BadRequest(format!(
                "filters only apply to filter expansions, not {}",
                self.expansion
            ))),
            kind => Ok(kind),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct JumpRequest {
    pub class: String,
}

/// Display parameters shared by every chart-returning route.
#[derive(Debug, Clone, Default, Deserialize)]
pub struct ChartParams {
    /// `pane` (the pane's own chart, the default), `subclass`, `prop_out`,
    /// `prop_in` or `connections`.
    pub view: Option<String>,
    /// Property bar whose objects a `connections` view shows.
    pub property: Option<String>,
    /// `out` (default) or `in`, for `connections`.
    pub direction: Option<String>,
    pub threshold: Option<f64>,
    #[serde(default)]
    pub window_start: usize,
    pub window_len: Option<usize>,
}

impl ChartParams {
    pub fn validate(&self) -> Result<(), ApiError> {
        match self.threshold {
            Some(t) if !(0.0..=1.0).contains(&t) => {
                Err(ApiError::BadRequest(format!("threshold {t} is outside [0, 1]")))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct BarSparqlParams {
    pub pane: usize,
    /// A bar of the pane's chart; the pane's own bar when absent.
    pub label: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct SearchParams {
    #[serde(default)]
    pub q: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct BarJson {
    pub label: String,
    pub bar_type: BarType,
    pub instance_count: u64,
    pub occurrence_count: u64,
    pub coverage: f64,
    pub average_per_instance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direct_subclass_count: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub total_subclass_count: Option<u64>,
    /// Expansions the bar can be selected for.
    pub expansions: Vec<&'static str>,
}

fn expansions(bar: &ChartBar) -> Vec<&'static str> {
    if bar.bar.label.is_pseudo() {
        return Vec::new();
    }
    match bar.bar.bar_type {
        BarType::Class => vec!["subclass", "prop_out", "prop_in", "filter"],
        BarType::Property => vec!["obj_out", "obj_in"],
    }
}

impl From<&ChartBar> for BarJson {
    fn from(b: &ChartBar) -> Self {
        BarJson {
            label: b.bar.label.to_string(),
            bar_type: b.bar.bar_type,
            instance_count: b.metrics.instance_count,
            occurrence_count: b.metrics.occurrence_count,
            coverage: b.metrics.coverage,
            average_per_instance: b.metrics.average_per_instance,
            direct_subclass_count: b.metrics.direct_subclass_count,
            total_subclass_count: b.metrics.total_subclass_count,
            expansions: expansions(b),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ChartJson {
    pub kind: ChartKind,
    pub parent_size: u64,
    /// Bars before the threshold is applied.
    pub total_bars: usize,
    /// Bars at or above the threshold.
    pub visible_bars: usize,
    pub hidden_count: usize,
    pub threshold: f64,
    pub window_start: usize,
    /// The requested window of the visible bars.
    pub bars: Vec<BarJson>,
}

fn is_property_chart(kind: ChartKind) -> bool {
    matches!(kind, ChartKind::PropertyOut | ChartKind::PropertyIn)
}

impl ChartJson {
    /// Serializes a window of `chart`. Property charts hide bars below the
    /// threshold (`pane_threshold` unless the request overrides it); other
    /// charts only when a threshold is requested.
    pub fn render(chart: &Chart, params: &ChartParams, pane_threshold: f64) -> Self {
        let threshold = match params.threshold {
            Some(t) => t,
            None if is_property_chart(chart.kind()) => pane_threshold,
            None => 0.0,
        };
        let view = threshold_view(chart, threshold);
        let len = params.window_len.unwrap_or(usize::MAX);
        ChartJson {
            kind: chart.kind(),
            parent_size: chart.parent_size(),
            total_bars: chart.len(),
            visible_bars: view.visible.len(),
            hidden_count: view.hidden_count,
            threshold,
            window_start: params.window_start,
            bars: view.visible.slice(params.window_start, len).iter().map(BarJson::from).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PaneJson {
    pub id: usize,
    pub parent: ParentRef,
    pub label: String,
    pub expansion: &'static str,
    pub filters: Vec<FilterCondition>,
    pub breadcrumb: Vec<String>,
    pub coverage_threshold: f64,
    /// Member count of the bar the pane's chart was computed from.
    pub focus_size: u64,
    pub chart: ChartJson,
}

impl PaneJson {
    pub fn render(pane: &Pane, params: &ChartParams) -> Self {
        PaneJson {
            id: pane.id,
            parent: pane.step.parent,
            label: pane.step.label.to_string(),
            expansion: pane.step.expansion.name(),
            filters: pane.active_filters.clone(),
            breadcrumb: pane.breadcrumb.iter().map(|l| l.to_string()).collect(),
            coverage_threshold: pane.coverage_threshold,
            focus_size: pane.focus.len(),
            chart: ChartJson::render(&pane.chart, params, pane.coverage_threshold),
        }
    }
}

/// A table cell value, shaped like a SPARQL JSON results binding.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TermJson {
    Uri {
        value: String,
    },
    Literal {
        value: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        language: Option<String>,
        #[serde(skip_serializing_if = "Option::is_none")]
        datatype: Option<String>,
    },
}

impl From<&Term> for TermJson {
    fn from(t: &Term) -> Self {
        match t {
            Term::Uri(u) => TermJson::Uri { value: u.clone() },
            Term::Literal(l) => TermJson::Literal {
                value: l.lexical.clone(),
                language: l.language.clone(),
                datatype: l.datatype.clone(),
            },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RowJson {
    pub subject: String,
    pub cells: Vec<Vec<TermJson>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TableJson {
    pub columns: Vec<String>,
    pub rows: Vec<RowJson>,
    pub total: u64,
    pub sparql: String,
}

impl From<Table> for TableJson {
    fn from(t: Table) -> Self {
        TableJson {
            columns: t.columns,
            rows: t
                .rows
                .iter()
                .map(|r| RowJson {
                    subject: r.subject.clone(),
                    cells: r.cells.iter().map(|c| c.iter().map(TermJson::from).collect()).collect(),
                })
                .collect(),
            total: t.total,
            sparql: t.sparql,
        }
    }
}

pub const SEARCH_LIMIT: usize = 20;

/// Classes whose label starts with `prefix`, ignoring case, most populated
/// first, at most [`SEARCH_LIMIT`].
pub fn search_classes(mut classes: Vec<ClassInfo>, prefix: &str) -> Vec<ClassInfo> {
    let prefix = prefix.to_lowercase();
    classes.retain(|c| c.label.to_lowercase().starts_with(&prefix));
    classes.sort_by(|a, b| {
        b.instance_count
            .cmp(&a.instance_count)
            .then_with(|| a.label.cmp(&b.label))
            .then_with(|| a.uri.cmp(&b.uri))
    });
    classes.truncate(SEARCH_LIMIT);
    classes
}

#[derive(Debug, Clone, Serialize)]
pub struct Closed {
    pub closed: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SparqlJson {
    pub label: String,
    pub sparql: String,
}

/// One line of a streamed expansion.
#[derive(Debug, Clone, Serialize)]
pub struct Snapshot {
    pub complete: bool,
    /// Share of the data the chart covers so far.
    pub fraction: f64,
    pub chunks_done: usize,
    pub chunks_total: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chart: Option<ChartJson>,
    /// Present on the final line only: the stored pane.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pane: Option<PaneJson>,
}
