//! Exploration sessions: a list of panes, each produced by applying an
//! expansion to a bar selected from its parent's chart.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use super::bar::{Bar, BarLabel, Chart, Direction};
use super::engine::{root_chart, Engine, EngineConfig, ExpansionKind};
use super::error::ExploreError;
use super::filter::FilterCondition;
use super::table::{Table, TableRequest};
use crate::rdf::{DatasetStats, Graph};

pub const DEFAULT_THRESHOLD: f64 = 0.2;

/// A class offered by the autocomplete search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassInfo {
    pub uri: String,
    pub label: String,
    /// Direct instances.
    pub instance_count: u64,
}

/// Computes bars and charts for a session, either straight from an in-memory
/// graph or through generated SPARQL.
pub trait ChartSource: Send + Sync {
    fn root_bar(&self) -> Result<Bar, ExploreError>;
    fn initial_chart(&self) -> Result<Chart, ExploreError>;
    fn class_bar(&self, class: &str) -> Result<Bar, ExploreError>;
    fn expand(&self, bar: &Bar, kind: &ExpansionKind) -> Result<Chart, ExploreError>;
    fn table(&self, bar: &Bar, request: &TableRequest) -> Result<Table, ExploreError>;
    /// Declared classes sorted by label.
    fn classes(&self) -> Result<Vec<ClassInfo>, ExploreError>;
    fn stats(&self) -> Result<DatasetStats, ExploreError>;
}

/// Expansions evaluated directly over an in-memory graph.
#[derive(Debug, Clone)]
pub struct GraphSource {
    graph: Arc<Graph>,
    config: EngineConfig,
}

impl GraphSource {
    pub fn new(graph: Arc<Graph>, config: EngineConfig) -> Self {
        GraphSource { graph, config }
    }

    pub fn graph(&self) -> &Arc<Graph> {
        &self.graph
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn engine(&self) -> Engine<'_> {
        Engine::new(&self.graph, &self.config)
    }
}

impl ChartSource for GraphSource {
    fn root_bar(&self) -> Result<Bar, ExploreError> {
        Ok(self.engine().root_bar())
    }

    fn initial_chart(&self) -> Result<Chart, ExploreError> {
        Ok(self.engine().initial_chart())
    }

    fn class_bar(&self, class: &str) -> Result<Bar, ExploreError> {
        self.engine().class_bar(class)
    }

    fn expand(&self, bar: &Bar, kind: &ExpansionKind) -> Result<Chart, ExploreError> {
        self.engine().expand(bar, kind)
    }

    fn table(&self, bar: &Bar, request: &TableRequest) -> Result<Table, ExploreError> {
        self.engine().instance_table(bar, request)
    }

    fn classes(&self) -> Result<Vec<ClassInfo>, ExploreError> {
        let g = &self.graph;
        Ok(g.list_classes()
            .into_iter()
            .map(|c| {
                let instance_count = g.lookup_uri(&c.uri).map_or(0, |id| g.direct_instance_count(id)) as u64;
                ClassInfo {
                    uri: c.uri,
                    label: c.label,
                    instance_count,
                }
            })
            .collect())
    }

    fn stats(&self) -> Result<DatasetStats, ExploreError> {
        Ok(self.graph.stats())
    }
}

/// Where a pane's selected bar comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "pane", rename_all = "snake_case")]
pub enum ParentRef {
    /// The virtual chart holding only the root bar.
    Root,
    Pane(usize),
    /// A class picked from the search box, outside any chart.
    Jump,
}

/// One exploration step: the bar `label` of the parent chart, expanded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub parent: ParentRef,
    pub label: BarLabel,
    pub expansion: ExpansionKind,
}

#[derive(Debug, Clone)]
pub struct Pane {
    pub id: usize,
    pub step: Step,
    /// The selected bar, or the filtered bar for filter steps. Tables and
    /// the pane's other chart views are computed from it.
    pub focus: Bar,
    pub chart: Chart,
    pub breadcrumb: Vec<BarLabel>,
    pub coverage_threshold: f64,
    pub active_filters: Vec<FilterCondition>,
}

/// Alternative charts of a pane, computed from its focus bar on request.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum View {
    Subclass,
    PropertyOut,
    PropertyIn,
    /// Object expansion of one bar of the pane's property chart.
    Connections { property: String, direction: Direction },
}

pub struct Session {
    source: Arc<dyn ChartSource>,
    root_chart: Chart,
    panes: Vec<Pane>,
    next_id: usize,
    views: Mutex<HashMap<(usize, View), Chart>>,
}

impl std::fmt::Debug for Session {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Session").field("panes", &self.panes).finish_non_exhaustive()
    }
}

impl Session {
    /// Starts a session whose pane 0 holds the initial chart.
    pub fn new(source: Arc<dyn ChartSource>) -> Result<Self, ExploreError> {
        let root = source.root_bar()?;
        let chart = source.initial_chart()?;
        let label = root.label.clone();
        let pane = Pane {
            id: 0,
            step: Step {
                parent: ParentRef::Root,
                label: label.clone(),
                expansion: ExpansionKind::Subclass,
            },
            focus: root.clone(),
            chart,
            breadcrumb: vec![label],
            coverage_threshold: DEFAULT_THRESHOLD,
            active_filters: Vec::new(),
        };
        Ok(Session {
            source,
            root_chart: root_chart(root),
            panes: vec![pane],
            next_id: 1,
            views: Mutex::new(HashMap::new()),
        })
    }

    pub fn source(&self) -> &Arc<dyn ChartSource> {
        &self.source
    }

    pub fn root_chart(&self) -> &Chart {
        &self.root_chart
    }

    /// Open panes in creation order.
    pub fn panes(&self) -> &[Pane] {
        &self.panes
    }

    pub fn pane(&self, id: usize) -> Result<&Pane, ExploreError> {
        self.panes
            .iter()
            .find(|p| p.id == id)
            .ok_or(ExploreError::UnknownPane(id))
    }

    fn pane_mut(&mut self, id: usize) -> Result<&mut Pane, ExploreError> {
        self.panes
            .iter_mut()
            .find(|p| p.id == id)
            .ok_or(ExploreError::UnknownPane(id))
    }

    fn parent_breadcrumb(&self, parent: ParentRef) -> Result<Vec<BarLabel>, ExploreError> {
        match parent {
            ParentRef::Root | ParentRef::Jump => Ok(Vec::new()),
            ParentRef::Pane(id) => Ok(self.pane(id)?.breadcrumb.clone()),
        }
    }

    fn parent_threshold(&self, parent: ParentRef) -> f64 {
        match parent {
            ParentRef::Pane(id) => self.pane(id).map_or(DEFAULT_THRESHOLD, |p| p.coverage_threshold),
            _ => DEFAULT_THRESHOLD,
        }
    }

    /// The bar `label` of the parent's chart; steps may only select bars that are shown.
    fn resolve(&self, parent: ParentRef, label: &str) -> Result<Bar, ExploreError> {
        let chart = match parent {
            ParentRef::Root => &self.root_chart,
            ParentRef::Pane(id) => &self.pane(id)?.chart,
            ParentRef::Jump => return self.source.class_bar(label),
        };
        chart
            .get_str(label)
            .map(|b| b.bar.clone())
            .ok_or_else(|| ExploreError::UnknownLabel(label.to_string()))
    }

    /// Applies `expansion` to the bar `label` of pane `parent`'s chart and
    /// appends the resulting pane.
    pub fn expand(&mut self, parent: usize, label: &str, expansion: ExpansionKind) -> Result<&Pane, ExploreError> {
        self.pane(parent)?;
        self.push_step(ParentRef::Pane(parent), label, expansion)
    }

    /// Opens a pane for a class found by search, bypassing the hierarchy.
    pub fn open_class(&mut self, class: &str) -> Result<&Pane, ExploreError> {
        self.push_step(ParentRef::Jump, class, ExpansionKind::Subclass)
    }

    /// Opens a pane on the members of pane `id`'s bar that satisfy its
    /// active filters plus `conditions`.
    pub fn filter_pane(&mut self, id: usize, conditions: Vec<FilterCondition>) -> Result<&Pane, ExploreError> {
        let pane = self.pane(id)?;
        let mut all = pane.active_filters.clone();
        all.extend(conditions);
        let (parent, label) = (pane.step.parent, pane.step.label.to_string());
        self.push_step(parent, &label, ExpansionKind::Filter(all))
    }

    /// Like [`Session::expand`], with the chart computed by `compute` instead
    /// of the session's source. `compute` only runs once the step is valid.
    pub fn expand_with(
        &mut self,
        parent: usize,
        label: &str,
        expansion: ExpansionKind,
        compute: impl FnOnce(&Bar, &ExpansionKind) -> Result<Chart, ExploreError>,
    ) -> Result<&Pane, ExploreError> {
        self.pane(parent)?;
        self.push_step_with(ParentRef::Pane(parent), label, expansion, compute)
    }

    fn push_step(&mut self, parent: ParentRef, label: &str, expansion: ExpansionKind) -> Result<&Pane, ExploreError> {
        let source = self.source.clone();
        self.push_step_with(parent, label, expansion, |bar, kind| source.expand(bar, kind))
    }

    fn push_step_with(
        &mut self,
        parent: ParentRef,
        label: &str,
        expansion: ExpansionKind,
        compute: impl FnOnce(&Bar, &ExpansionKind) -> Result<Chart, ExploreError>,
    ) -> Result<&Pane, ExploreError> {
        let bar = self.resolve(parent, label)?;
        expansion.check(&bar)?;
        let chart = compute(&bar, &expansion)?;
        let (focus, active_filters) = match &expansion {
            ExpansionKind::Filter(conditions) => (
                chart.bars().first().map_or_else(|| bar.clone(), |b| b.bar.clone()),
                conditions.clone(),
            ),
            _ => (bar.clone(), Vec::new()),
        };
        let mut breadcrumb = self.parent_breadcrumb(parent)?;
        breadcrumb.push(bar.label.clone());
        let pane = Pane {
            id: self.next_id,
            step: Step {
                parent,
                label: bar.label.clone(),
                expansion,
            },
            focus,
            chart,
            breadcrumb,
            coverage_threshold: self.parent_threshold(parent),
            active_filters,
        };
        self.next_id += 1;
        self.panes.push(pane);
        Ok(self.panes.last().expect("just pushed"))
    }

    pub fn set_threshold(&mut self, id: usize, threshold: f64) -> Result<(), ExploreError> {
        self.pane_mut(id)?.coverage_threshold = threshold.clamp(0.0, 1.0);
        Ok(())
    }

    /// Closes pane `id` and every pane derived from it. Returns the closed ids.
    pub fn close_pane(&mut self, id: usize) -> Result<Vec<usize>, ExploreError> {
        if id == 0 {
            return Err(ExploreError::RootPane);
        }
        self.pane(id)?;
        let mut closed = BTreeSet::from([id]);
        for p in &self.panes {
            if let ParentRef::Pane(parent) = p.step.parent {
                if closed.contains(&parent) {
                    closed.insert(p.id);
                }
            }
        }
        self.panes.retain(|p| !closed.contains(&p.id));
        self.views
            .lock()
            .expect("view lock")
            .retain(|(pane, _), _| !closed.contains(pane));
        Ok(closed.into_iter().collect())
    }

    pub fn table(&self, id: usize, request: &TableRequest) -> Result<Table, ExploreError> {
        self.source.table(&self.pane(id)?.focus, request)
    }

    /// A chart view of pane `id`'s focus bar, computed once per pane.
    pub fn view(&self, id: usize, view: &View) -> Result<Chart, ExploreError> {
        let pane = self.pane(id)?;
        let key = (id, view.clone());
        if let Some(hit) = self.views.lock().expect("view lock").get(&key) {
            return Ok(hit.clone());
        }
        let chart = match view {
            View::Subclass => self.source.expand(&pane.focus, &ExpansionKind::Subclass)?,
            View::PropertyOut => self.source.expand(&pane.focus, &ExpansionKind::PropertyOut)?,
            View::PropertyIn => self.source.expand(&pane.focus, &ExpansionKind::PropertyIn)?,
            View::Connections { property, direction } => {
                let (props, kind) = match direction {
                    Direction::Outgoing => (View::PropertyOut, ExpansionKind::ObjectOut),
                    Direction::Incoming => (View::PropertyIn, ExpansionKind::ObjectIn),
                };
                let props = self.view(id, &props)?;
                let bar = props
                    .get_str(property)
                    .ok_or_else(|| ExploreError::UnknownLabel(property.clone()))?;
                self.source.expand(&bar.bar, &kind)?
            }
        };
        self.views.lock().expect("view lock").insert(key, chart.clone());
        Ok(chart)
    }

    /// Re-checks every stored pane: the parent precedes it, the selected
    /// label is in the parent chart, the expansion suits the bar's type, and
    /// the stored chart equals the expansion recomputed now.
    pub fn validate(&self) -> Result<(), (usize, ExploreError)> {
        for (pos, pane) in self.panes.iter().enumerate() {
            let fail = |e| Err((pane.id, e));
            if let ParentRef::Pane(parent) = pane.step.parent {
                if !self.panes[..pos].iter().any(|p| p.id == parent) {
                    return fail(ExploreError::UnknownPane(parent));
                }
            }
            if pane.step.parent == ParentRef::Root && pane.id == 0 {
                match self.source.initial_chart() {
                    Ok(chart) if chart == pane.chart => continue,
                    Ok(_) => return fail(ExploreError::UnknownLabel(pane.step.label.to_string())),
                    Err(e) => return fail(e),
                }
            }
            let bar = match self.resolve(pane.step.parent, pane.step.label.as_str()) {
                Ok(bar) => bar,
                Err(e) => return fail(e),
            };
            if let Err(e) = pane.step.expansion.check(&bar) {
                return fail(e);
            }
            match self.source.expand(&bar, &pane.step.expansion) {
                Ok(chart) if chart == pane.chart => {}
                Ok(_) => {
                    return fail(ExploreError::UnsupportedPath(format!(
                        "pane {} no longer matches its expansion",
                        pane.id
                    )))
                }
                Err(e) => return fail(e),
            }
        }
        Ok(())
    }

    /// The steps of every open pane after pane 0, with their pane ids.
    pub fn steps(&self) -> Vec<(usize, Step)> {
        self.panes[1..].iter().map(|p| (p.id, p.step.clone())).collect()
    }

    /// Rebuilds a session from recorded steps. Pane ids in `steps` are
    /// mapped to the ids of the replayed panes.
    pub fn replay(source: Arc<dyn ChartSource>, steps: &[(usize, Step)]) -> Result<Session, ExploreError> {
        let mut session = Session::new(source)?;
        let mut ids = HashMap::from([(0usize, 0usize)]);
        for (old, step) in steps {
            let parent = match step.parent {
                ParentRef::Pane(p) => ParentRef::Pane(*ids.get(&p).ok_or(ExploreError::UnknownPane(p))?),
                other => other,
            };
            let id = session
                .push_step(parent, step.label.as_str(), step.expansion.clone())?
                .id;
            ids.insert(*old, id);
        }
        Ok(session)
    }
}
