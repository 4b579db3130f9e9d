//! Expansions computed directly over the graph indexes.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::bar::{Bar, BarLabel, BarMetrics, BarType, Chart, ChartBar, ChartKind, Direction, Members};
use super::error::ExploreError;
use super::filter::{validate_all, FilterCondition};
use super::lineage::Lineage;
use super::table::{sort_cell, Table, TableRequest, TableRow};
use crate::rdf::{Graph, Term, TermId};

/// The expansion applied to a selected bar.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpansionKind {
    Subclass,
    PropertyOut,
    PropertyIn,
    ObjectOut,
    ObjectIn,
    Filter(Vec<FilterCondition>),
}

impl ExpansionKind {
    /// Parses the short names used by scripts and the HTTP API. Filter
    /// conditions are supplied separately.
    pub fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "subclass" => ExpansionKind::Subclass,
            "prop_out" | "property_out" => ExpansionKind::PropertyOut,
            "prop_in" | "property_in" => ExpansionKind::PropertyIn,
            "obj_out" | "object_out" => ExpansionKind::ObjectOut,
            "obj_in" | "object_in" => ExpansionKind::ObjectIn,
            "filter" => ExpansionKind::Filter(Vec::new()),
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            ExpansionKind::Subclass => "subclass",
            ExpansionKind::PropertyOut => "prop_out",
            ExpansionKind::PropertyIn => "prop_in",
            ExpansionKind::ObjectOut => "obj_out",
            ExpansionKind::ObjectIn => "obj_in",
            ExpansionKind::Filter(_) => "filter",
        }
    }

    /// The bar type this expansion is enabled for.
    pub fn required_type(&self) -> BarType {
        match self {
            ExpansionKind::ObjectOut | ExpansionKind::ObjectIn => BarType::Property,
            _ => BarType::Class,
        }
    }

    pub fn chart_kind(&self) -> ChartKind {
        match self {
            ExpansionKind::Subclass => ChartKind::Subclass,
            ExpansionKind::PropertyOut => ChartKind::PropertyOut,
            ExpansionKind::PropertyIn => ChartKind::PropertyIn,
            ExpansionKind::ObjectOut => ChartKind::ObjectOut,
            ExpansionKind::ObjectIn => ChartKind::ObjectIn,
            ExpansionKind::Filter(_) => ChartKind::Filter,
        }
    }

    /// Checks that the expansion is applicable to `bar`.
    pub fn check(&self, bar: &Bar) -> Result<(), ExploreError> {
        if bar.label.is_pseudo() {
            return Err(ExploreError::NotExpandable(bar.label.to_string()));
        }
        let expected = self.required_type();
        if bar.bar_type != expected {
            return Err(ExploreError::TypeMismatch {
                label: bar.label.to_string(),
                expected,
                actual: bar.bar_type,
            });
        }
        if let ExpansionKind::Filter(conditions) = self {
            validate_all(conditions)?;
        }
        Ok(())
    }
}

/// Settings shared by every expansion over one dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EngineConfig {
    /// Root class of the initial chart.
    pub root: String,
    /// Predicates hidden from property charts.
    pub excluded_predicates: BTreeSet<String>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            root: crate::rdf::vocab::OWL_THING.to_string(),
            excluded_predicates: BTreeSet::new(),
        }
    }
}

impl EngineConfig {
    pub fn with_root(root: impl Into<String>) -> Self {
        EngineConfig {
            root: root.into(),
            ..EngineConfig::default()
        }
    }
}

/// Stateless expansion functions bound to one graph.
#[derive(Debug, Clone, Copy)]
pub struct Engine<'g> {
    graph: &'g Graph,
    config: &'g EngineConfig,
}

fn member_set(bar: &Bar) -> Result<&BTreeSet<TermId>, ExploreError> {
    bar.members.as_set().ok_or_else(|| {
        ExploreError::UnsupportedPath(format!("bar {} carries only a member count", bar.label))
    })
}

impl<'g> Engine<'g> {
    pub fn new(graph: &'g Graph, config: &'g EngineConfig) -> Self {
        Engine { graph, config }
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn config(&self) -> &'g EngineConfig {
        self.config
    }

    /// True when the root class has neither instances nor subclasses and the
    /// initial chart falls back to the top-level classes.
    pub fn uses_fallback(&self) -> bool {
        match self.graph.lookup_uri(&self.config.root) {
            None => true,
            Some(root) => {
                self.graph.direct_subclasses(root).is_none_or(BTreeSet::is_empty)
                    && self.graph.direct_instance_count(root) == 0
            }
        }
    }

    /// The bar whose expansion is the initial chart.
    pub fn root_bar(&self) -> Bar {
        let label = BarLabel::Uri(self.config.root.clone());
        if self.uses_fallback() {
            return Bar {
                label,
                bar_type: BarType::Class,
                members: Members::set(self.graph.all_instances()),
                lineage: Arc::new(Lineage::AllInstances),
            };
        }
        let root = self.graph.lookup_uri(&self.config.root).expect("root present");
        Bar {
            label,
            bar_type: BarType::Class,
            members: Members::set(self.graph.transitive_instances(root)),
            lineage: Arc::new(Lineage::ClassTree {
                class: self.config.root.clone(),
            }),
        }
    }

    /// Chart holding only the root bar. Pane 0 selects from it.
    pub fn root_chart(&self) -> Chart {
        root_chart(self.root_bar())
    }

    /// The chart shown when exploration starts.
    pub fn initial_chart(&self) -> Chart {
        if self.uses_fallback() {
            return self.top_level_chart();
        }
        self.subclass_expansion(&self.root_bar())
            .expect("root bar is a class bar")
    }

    /// One bar per declared class without a superclass, holding its direct
    /// instances.
    pub fn top_level_chart(&self) -> Chart {
        let g = self.graph;
        let parent = g.all_instances().len() as u64;
        let bars = g
            .top_level_classes()
            .into_iter()
            .map(|c| {
                let members = g.instances_of(c).cloned().unwrap_or_default();
                let n = members.len() as u64;
                ChartBar {
                    bar: Bar {
                        label: BarLabel::Uri(g.uri(c).to_string()),
                        bar_type: BarType::Class,
                        members: Members::set(members),
                        lineage: Arc::new(Lineage::DirectClass {
                            class: g.uri(c).to_string(),
                        }),
                    },
                    metrics: self.subclass_metrics(c, n, parent),
                }
            })
            .collect();
        Chart::new(ChartKind::TopLevel, parent, bars)
    }

    fn subclass_metrics(&self, class: TermId, n: u64, parent: u64) -> BarMetrics {
        let direct = self.graph.direct_subclasses(class).map_or(0, BTreeSet::len) as u64;
        let total = self.graph.total_subclass_count(class) as u64;
        BarMetrics::new(n, n, parent).with_subclasses(direct, total)
    }

    /// Bar for the autocomplete jump: all direct and transitive instances.
    pub fn class_bar(&self, class: &str) -> Result<Bar, ExploreError> {
        let id = self
            .graph
            .lookup_uri(class)
            .filter(|id| self.graph.is_declared_class(*id))
            .ok_or_else(|| ExploreError::UnknownClass(class.to_string()))?;
        Ok(Bar {
            label: BarLabel::Uri(class.to_string()),
            bar_type: BarType::Class,
            members: Members::set(self.graph.transitive_instances(id)),
            lineage: Arc::new(Lineage::ClassTree {
                class: class.to_string(),
            }),
        })
    }

    pub fn expand(&self, bar: &Bar, kind: &ExpansionKind) -> Result<Chart, ExploreError> {
        match kind {
            ExpansionKind::Subclass => self.subclass_expansion(bar),
            ExpansionKind::PropertyOut => self.property_expansion(bar, Direction::Outgoing),
            ExpansionKind::PropertyIn => self.property_expansion(bar, Direction::Incoming),
            ExpansionKind::ObjectOut => self.object_expansion(bar, Direction::Outgoing),
            ExpansionKind::ObjectIn => self.object_expansion(bar, Direction::Incoming),
            ExpansionKind::Filter(conditions) => self.filter_chart(bar, conditions),
        }
    }

    pub fn subclass_expansion(&self, bar: &Bar) -> Result<Chart, ExploreError> {
        ExpansionKind::Subclass.check(bar)?;
        let g = self.graph;
        let s = member_set(bar)?;
        let parent = s.len() as u64;
        let Some(class) = bar.label.uri().and_then(|u| g.lookup_uri(u)) else {
            return Ok(Chart::new(ChartKind::Subclass, parent, Vec::new()));
        };
        let bars = g
            .direct_subclasses(class)
            .into_iter()
            .flatten()
            .map(|tau| {
                let t: BTreeSet<TermId> = match g.instances_of(*tau) {
                    Some(inst) if inst.len() < s.len() => {
                        inst.iter().filter(|x| s.contains(x)).copied().collect()
                    }
                    Some(inst) => s.iter().filter(|x| inst.contains(x)).copied().collect(),
                    None => BTreeSet::new(),
                };
                let n = t.len() as u64;
                let uri = g.uri(*tau).to_string();
                ChartBar {
                    bar: Bar {
                        label: BarLabel::Uri(uri.clone()),
                        bar_type: BarType::Class,
                        members: Members::set(t),
                        lineage: Arc::new(Lineage::Subclass {
                            parent: bar.lineage.clone(),
                            class: uri,
                        }),
                    },
                    metrics: self.subclass_metrics(*tau, n, parent),
                }
            })
            .collect();
        Ok(Chart::new(ChartKind::Subclass, parent, bars))
    }

    pub fn property_expansion(&self, bar: &Bar, direction: Direction) -> Result<Chart, ExploreError> {
        let kind = match direction {
            Direction::Outgoing => ExpansionKind::PropertyOut,
            Direction::Incoming => ExpansionKind::PropertyIn,
        };
        kind.check(bar)?;
        let g = self.graph;
        let s = member_set(bar)?;
        let mut groups: BTreeMap<TermId, (BTreeSet<TermId>, u64)> = BTreeMap::new();
        for &x in s {
            let positions = match direction {
                Direction::Outgoing => g.positions_with_subject(x),
                Direction::Incoming => g.positions_with_object(x),
            };
            for pos in positions {
                let p = g.triples()[*pos as usize].predicate;
                let entry = groups.entry(p).or_default();
                entry.0.insert(x);
                entry.1 += 1;
            }
        }
        let parent = s.len() as u64;
        let bars = groups
            .into_iter()
            .filter(|(p, _)| !self.config.excluded_predicates.contains(g.uri(*p)))
            .map(|(p, (members, occ))| {
                let uri = g.uri(p).to_string();
                let n = members.len() as u64;
                ChartBar {
                    bar: Bar {
                        label: BarLabel::Uri(uri.clone()),
                        bar_type: BarType::Property,
                        members: Members::set(members),
                        lineage: Arc::new(Lineage::Property {
                            parent: bar.lineage.clone(),
                            predicate: uri,
                            direction,
                        }),
                    },
                    metrics: BarMetrics::new(n, occ, parent),
                }
            })
            .collect();
        Ok(Chart::new(kind.chart_kind(), parent, bars))
    }

    /// Distributes the terms reached through a property bar by their classes.
    /// Coverage is relative to the number of distinct reached terms.
    pub fn object_expansion(&self, bar: &Bar, direction: Direction) -> Result<Chart, ExploreError> {
        let kind = match direction {
            Direction::Outgoing => ExpansionKind::ObjectOut,
            Direction::Incoming => ExpansionKind::ObjectIn,
        };
        kind.check(bar)?;
        let g = self.graph;
        let s = member_set(bar)?;
        let mut groups: BTreeMap<BarLabel, (BTreeSet<TermId>, u64)> = BTreeMap::new();
        let mut reached = BTreeSet::new();
        if let Some(p) = bar.label.uri().and_then(|u| g.lookup_uri(u)) {
            for &x in s {
                let targets = match direction {
                    Direction::Outgoing => g.objects(x, p),
                    Direction::Incoming => g.subjects(p, x),
                };
                for &o in targets {
                    reached.insert(o);
                    for label in self.object_labels(o) {
                        let entry = groups.entry(label).or_default();
                        entry.0.insert(o);
                        entry.1 += 1;
                    }
                }
            }
        }
        let parent = reached.len() as u64;
        let bars = groups
            .into_iter()
            .map(|(label, (members, occ))| {
                let n = members.len() as u64;
                ChartBar {
                    bar: Bar {
                        label: label.clone(),
                        bar_type: BarType::Class,
                        members: Members::set(members),
                        lineage: Arc::new(Lineage::Object {
                            parent: bar.lineage.clone(),
                            class: label,
                            direction,
                        }),
                    },
                    metrics: BarMetrics::new(n, occ, parent),
                }
            })
            .collect();
        Ok(Chart::new(kind.chart_kind(), parent, bars))
    }

    /// Classes of a reached term, or the pseudo label it falls under.
    fn object_labels(&self, o: TermId) -> Vec<BarLabel> {
        let g = self.graph;
        if g.term(o).is_literal() {
            return vec![BarLabel::Literals];
        }
        let classes: Vec<BarLabel> = g
            .types_of(o)
            .iter()
            .filter(|c| g.term(**c).is_uri())
            .map(|c| BarLabel::Uri(g.uri(*c).to_string()))
            .collect();
        if classes.is_empty() {
            vec![BarLabel::Untyped]
        } else {
            classes
        }
    }

    /// Members with a value satisfying every condition, as a class bar.
    pub fn apply_filter(&self, bar: &Bar, conditions: &[FilterCondition]) -> Result<Bar, ExploreError> {
        ExpansionKind::Filter(conditions.to_vec()).check(bar)?;
        if conditions.is_empty() {
            return Ok(bar.clone());
        }
        let g = self.graph;
        let s = member_set(bar)?;
        let predicates: Vec<Option<TermId>> = conditions
            .iter()
            .map(|c| g.lookup_uri(&c.property))
            .collect();
        let kept = s
            .iter()
            .copied()
            .filter(|x| {
                conditions.iter().zip(&predicates).all(|(c, p)| {
                    p.is_some_and(|p| g.objects(*x, p).iter().any(|o| c.accepts(g.term(*o))))
                })
            })
            .collect();
        Ok(Bar {
            label: bar.label.clone(),
            bar_type: BarType::Class,
            members: Members::set(kept),
            lineage: Arc::new(Lineage::Filter {
                parent: bar.lineage.clone(),
                conditions: conditions.to_vec(),
            }),
        })
    }

    /// Instance table of a bar: members ordered like the generated query
    /// (`ORDER BY ?s`), paged with `limit`/`offset`, one cell per column.
    pub fn instance_table(&self, bar: &Bar, request: &TableRequest) -> Result<Table, ExploreError> {
        validate_all(&request.filters)?;
        let g = self.graph;
        let plan = crate::sparql::table_query(&bar.lineage, request)?;
        let members = member_set(bar)?;
        let predicates: Vec<Option<TermId>> = request.filters.iter().map(|c| g.lookup_uri(&c.property)).collect();
        let mut kept: Vec<TermId> = members
            .iter()
            .copied()
            .filter(|x| {
                request.filters.iter().zip(&predicates).all(|(c, p)| {
                    p.is_some_and(|p| g.objects(*x, p).iter().any(|o| c.accepts(g.term(*o))))
                })
            })
            .collect();
        kept.sort_by(|a, b| crate::sparql::term_order(Some(g.term(*a)), Some(g.term(*b))));
        let columns: Vec<Option<TermId>> = request.columns.iter().map(|c| g.lookup_uri(c)).collect();
        let rows = kept
            .iter()
            .skip(request.offset)
            .take(request.limit)
            .map(|s| TableRow {
                subject: g.term(*s).lexical().to_string(),
                cells: columns
                    .iter()
                    .map(|p| {
                        let mut values: Vec<Term> = p
                            .map(|p| g.objects(*s, p).iter().map(|o| g.term(*o).clone()).collect())
                            .unwrap_or_default();
                        sort_cell(&mut values);
                        values
                    })
                    .collect(),
            })
            .collect();
        Ok(Table {
            columns: request.columns.clone(),
            rows,
            total: kept.len() as u64,
            sparql: plan.text,
        })
    }

    /// Single-bar chart holding the filtered bar.
    pub fn filter_chart(&self, bar: &Bar, conditions: &[FilterCondition]) -> Result<Chart, ExploreError> {
        let filtered = self.apply_filter(bar, conditions)?;
        Ok(filter_chart(bar.len(), filtered))
    }
}

pub fn root_chart(root: Bar) -> Chart {
    let n = root.len();
    Chart::new(
        ChartKind::Root,
        n,
        vec![ChartBar {
            bar: root,
            metrics: BarMetrics::new(n, n, n),
        }],
    )
}

pub fn filter_chart(parent_size: u64, filtered: Bar) -> Chart {
    let n = filtered.len();
    Chart::new(
        ChartKind::Filter,
        parent_size,
        vec![ChartBar {
            bar: filtered,
            metrics: BarMetrics::new(n, n, parent_size),
        }],
    )
}
