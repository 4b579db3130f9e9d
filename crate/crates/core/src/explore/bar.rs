use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::lineage::Lineage;
use crate::rdf::TermId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BarType {
    Class,
    Property,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Outgoing,
    Incoming,
}

pub const LITERAL_LABEL: &str = "«literal»";
pub const UNTYPED_LABEL: &str = "«untyped»";

/// A bar label. Object charts add two reserved labels for reached terms that
/// belong to no class; those bars cannot be expanded further.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", from = "String")]
pub enum BarLabel {
    Uri(String),
    Literals,
    Untyped,
}

impl BarLabel {
    pub fn as_str(&self) -> &str {
        match self {
            BarLabel::Uri(uri) => uri,
            BarLabel::Literals => LITERAL_LABEL,
            BarLabel::Untyped => UNTYPED_LABEL,
        }
    }

    pub fn is_pseudo(&self) -> bool {
        !matches!(self, BarLabel::Uri(_))
    }

    pub fn uri(&self) -> Option<&str> {
        match self {
            BarLabel::Uri(uri) => Some(uri),
            _ => None,
        }
    }

    pub fn parse(s: &str) -> Self {
        match s {
            LITERAL_LABEL => BarLabel::Literals,
            UNTYPED_LABEL => BarLabel::Untyped,
            uri => BarLabel::Uri(uri.to_string()),
        }
    }
}

impl From<String> for BarLabel {
    fn from(s: String) -> Self {
        match s.as_str() {
            LITERAL_LABEL => BarLabel::Literals,
            UNTYPED_LABEL => BarLabel::Untyped,
            _ => BarLabel::Uri(s),
        }
    }
}

impl From<BarLabel> for String {
    fn from(l: BarLabel) -> Self {
        match l {
            BarLabel::Uri(uri) => uri,
            other => other.as_str().to_string(),
        }
    }
}

impl From<&str> for BarLabel {
    fn from(s: &str) -> Self {
        BarLabel::parse(s)
    }
}

/// Labels order by their string form, so pseudo labels sort after `http` IRIs.
impl Ord for BarLabel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.as_str().cmp(other.as_str())
    }
}

impl PartialOrd for BarLabel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for BarLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The set S of a bar. Embedded charts carry the set itself; charts computed
/// through SPARQL aggregates only know its size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Members {
    Set(Arc<BTreeSet<TermId>>),
    Count(u64),
}

impl Members {
    pub fn set(ids: BTreeSet<TermId>) -> Self {
        Members::Set(Arc::new(ids))
    }

    pub fn len(&self) -> u64 {
        match self {
            Members::Set(s) => s.len() as u64,
            Members::Count(n) => *n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_set(&self) -> Option<&BTreeSet<TermId>> {
        match self {
            Members::Set(s) => Some(s),
            Members::Count(_) => None,
        }
    }
}

/// A bar: its members, label and type, plus the path that produced the members.
#[derive(Debug, Clone, PartialEq)]
pub struct Bar {
    pub label: BarLabel,
    pub bar_type: BarType,
    pub members: Members,
    pub lineage: Arc<Lineage>,
}

impl Bar {
    pub fn len(&self) -> u64 {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarMetrics {
    pub instance_count: u64,
    pub occurrence_count: u64,
    pub coverage: f64,
    pub average_per_instance: f64,
    pub direct_subclass_count: Option<u64>,
    pub total_subclass_count: Option<u64>,
}

impl BarMetrics {
    /// `instances / parent` (0 for an empty parent) with the given occurrence count.
    pub fn new(instances: u64, occurrences: u64, parent: u64) -> Self {
        BarMetrics {
            instance_count: instances,
            occurrence_count: occurrences,
            coverage: ratio(instances, parent),
            average_per_instance: ratio(occurrences, instances),
            direct_subclass_count: None,
            total_subclass_count: None,
        }
    }

    pub fn with_subclasses(mut self, direct: u64, total: u64) -> Self {
        self.direct_subclass_count = Some(direct);
        self.total_subclass_count = Some(total);
        self
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartKind {
    /// The virtual chart holding only the root bar.
    Root,
    Subclass,
    PropertyOut,
    PropertyIn,
    ObjectOut,
    ObjectIn,
    Filter,
    /// Top-level classes, used when the root class is missing from the data.
    TopLevel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChartBar {
    pub bar: Bar,
    pub metrics: BarMetrics,
}

/// Bars keyed by label, ordered by decreasing size then label.
#[derive(Debug, Clone)]
pub struct Chart {
    kind: ChartKind,
    parent_size: u64,
    bars: Vec<ChartBar>,
    index: HashMap<BarLabel, usize>,
}

impl PartialEq for Chart {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.parent_size == other.parent_size && self.bars == other.bars
    }
}

impl Chart {
    /// Sorts `bars` into display order. Duplicate labels keep the first.
    pub fn new(kind: ChartKind, parent_size: u64, mut bars: Vec<ChartBar>) -> Self {
        bars.sort_by(|a, b| {
            b.bar
                .len()
                .cmp(&a.bar.len())
                .then_with(|| a.bar.label.cmp(&b.bar.label))
        });
        bars.dedup_by(|a, b| a.bar.label == b.bar.label);
        let index = bars
            .iter()
            .enumerate()
            .map(|(i, b)| (b.bar.label.clone(), i))
            .collect();
        Chart {
            kind,
            parent_size,
            bars,
            index,
        }
    }

    pub fn empty(kind: ChartKind) -> Self {
        Chart::new(kind, 0, Vec::new())
    }

    pub fn kind(&self) -> ChartKind {
        self.kind
    }

    /// Size of the set the chart was computed from (the coverage denominator).
    pub fn parent_size(&self) -> u64 {
        self.parent_size
    }

    pub fn bars(&self) -> &[ChartBar] {
        &self.bars
    }

    pub fn len(&self) -> usize {
        self.bars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bars.is_empty()
    }

    pub fn get(&self, label: &BarLabel) -> Option<&ChartBar> {
        self.index.get(label).map(|i| &self.bars[*i])
    }

    pub fn get_str(&self, label: &str) -> Option<&ChartBar> {
        self.get(&BarLabel::parse(label))
    }

    pub fn labels(&self) -> impl Iterator<Item = &BarLabel> {
        self.bars.iter().map(|b| &b.bar.label)
    }

    /// Keeps the bars satisfying `keep`, preserving order.
    pub fn retain(&self, mut keep: impl FnMut(&ChartBar) -> bool) -> Chart {
        let bars = self.bars.iter().filter(|b| keep(b)).cloned().collect();
        Chart::new(self.kind, self.parent_size, bars)
    }

    pub fn slice(&self, start: usize, len: usize) -> &[ChartBar] {
        let start = start.min(self.bars.len());
        let end = start.saturating_add(len).min(self.bars.len());
        &self.bars[start..end]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdView {
    pub visible: Chart,
    pub hidden_count: usize,
}

/// Bars with coverage at or above `threshold`, in their original order.
pub fn threshold_view(chart: &Chart, threshold: f64) -> ThresholdView {
    let visible = chart.retain(|b| b.metrics.coverage >= threshold);
    let hidden_count = chart.len() - visible.len();
    ThresholdView {
        visible,
        hidden_count,
    }
}
