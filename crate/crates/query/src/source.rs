//! Charts computed through generated SPARQL and the query manager. Bars carry
//! member counts only; their lineage regenerates the member set on demand.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use ldx_core::explore::{
    filter_chart, fold_rows, validate_all, Bar, BarLabel, BarMetrics, BarType, ChartBar, ChartKind, ChartSource,
    ClassInfo, Direction, EngineConfig, ExpansionKind, ExploreError, Lineage, Members, Table, TableRequest,
};
use ldx_core::explore::Chart;
use ldx_core::rdf::{local_name, DatasetStats, LabelPreference, Literal, Term};
use ldx_core::sparql::{
    chart_query, class_labels_query, classes_query, count_query, declared_class_query, direct_instance_count_query,
    hierarchy_query, reached_query, subclass_count_query, table_query, top_level_hierarchy_query, top_level_query,
    ChartSpec, QueryPlan,
};
use ldx_core::QueryResult;

use crate::dataset::DatasetHandle;
use crate::error::{ClientError, QueryError};
use crate::incremental::Progress;
use crate::manager::QueryManager;

fn malformed(what: impl Into<String>) -> ExploreError {
    QueryError::Endpoint(ClientError::MalformedResponse(what.into())).into()
}

fn column(result: &QueryResult, name: &str) -> Result<usize, ExploreError> {
    result
        .column(name)
        .ok_or_else(|| malformed(format!("result lacks ?{name}")))
}

fn number(cell: &Option<Term>) -> u64 {
    cell.as_ref().and_then(Term::numeric_value).map_or(0, |v| v as u64)
}

/// `(label, members, occurrences)` rows of a chart aggregate.
fn aggregate_rows(result: &QueryResult) -> Result<Vec<(BarLabel, u64, u64)>, ExploreError> {
    let (l, m, o) = (
        column(result, "label")?,
        column(result, "members")?,
        column(result, "occurrences")?,
    );
    Ok(result
        .rows
        .iter()
        .filter_map(|row| {
            let label = row[l].as_ref()?;
            Some((BarLabel::parse(label.lexical()), number(&row[m]), number(&row[o])))
        })
        .collect())
}

/// Direct and total subclass counts per class, from a hierarchy query.
fn hierarchy(result: &QueryResult) -> Result<HashMap<String, (u64, u64)>, ExploreError> {
    let (l, d, t) = (
        column(result, "label")?,
        column(result, "direct")?,
        column(result, "total")?,
    );
    Ok(result
        .rows
        .iter()
        .filter_map(|row| Some((row[l].as_ref()?.lexical().to_string(), (number(&row[d]), number(&row[t])))))
        .collect())
}

/// Everything needed to turn aggregate rows into a chart.
struct ChartContext {
    plan: QueryPlan,
    parent: Arc<Lineage>,
    kind: ChartKind,
    parent_size: u64,
    subclasses: Option<HashMap<String, (u64, u64)>>,
}

impl ChartContext {
    fn chart(&self, result: &QueryResult) -> Result<Chart, ExploreError> {
        let bars = aggregate_rows(result)?
            .into_iter()
            .map(|(label, n, occ)| {
                let (bar_type, lineage) = match self.kind {
                    ChartKind::Subclass => (
                        BarType::Class,
                        Lineage::Subclass {
                            parent: self.parent.clone(),
                            class: label.as_str().to_string(),
                        },
                    ),
                    ChartKind::PropertyOut | ChartKind::PropertyIn => (
                        BarType::Property,
                        Lineage::Property {
                            parent: self.parent.clone(),
                            predicate: label.as_str().to_string(),
                            direction: direction(self.kind),
                        },
                    ),
                    _ => (
                        BarType::Class,
                        Lineage::Object {
                            parent: self.parent.clone(),
                            class: label.clone(),
                            direction: direction(self.kind),
                        },
                    ),
                };
                let mut metrics = BarMetrics::new(n, occ, self.parent_size);
                if let Some(h) = &self.subclasses {
                    let (direct, total) = h.get(label.as_str()).copied().unwrap_or_default();
                    metrics = metrics.with_subclasses(direct, total);
                }
                ChartBar {
                    bar: Bar {
                        label,
                        bar_type,
                        members: Members::Count(n),
                        lineage: Arc::new(lineage),
                    },
                    metrics,
                }
            })
            .collect();
        Ok(Chart::new(self.kind, self.parent_size, bars))
    }
}

fn direction(kind: ChartKind) -> Direction {
    match kind {
        ChartKind::PropertyIn | ChartKind::ObjectIn => Direction::Incoming,
        _ => Direction::Outgoing,
    }
}

#[derive(Debug)]
pub struct PlanSource {
    manager: Arc<QueryManager>,
    dataset: Arc<DatasetHandle>,
    config: EngineConfig,
    labels: LabelPreference,
}

impl PlanSource {
    pub fn new(manager: Arc<QueryManager>, dataset: Arc<DatasetHandle>, config: EngineConfig) -> Self {
        PlanSource {
            manager,
            dataset,
            config,
            labels: LabelPreference::default(),
        }
    }

    pub fn with_label_preference(mut self, labels: LabelPreference) -> Self {
        self.labels = labels;
        self
    }

    pub fn manager(&self) -> &Arc<QueryManager> {
        &self.manager
    }

    pub fn dataset(&self) -> &Arc<DatasetHandle> {
        &self.dataset
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    fn run(&self, plan: &QueryPlan) -> Result<QueryResult, ExploreError> {
        Ok(self.manager.execute(plan, &self.dataset)?)
    }

    fn scalar(&self, plan: &QueryPlan) -> Result<u64, ExploreError> {
        self.run(plan)?
            .scalar_count()
            .ok_or_else(|| malformed("count query returned no number"))
    }

    fn count(&self, lineage: &Arc<Lineage>) -> Result<u64, ExploreError> {
        self.scalar(&count_query(lineage)?)
    }

    /// True when the root class has neither instances nor subclasses.
    pub fn uses_fallback(&self) -> Result<bool, ExploreError> {
        let root = &self.config.root;
        Ok(self.scalar(&direct_instance_count_query(root))? == 0 && self.scalar(&subclass_count_query(root))? == 0)
    }

    fn excluded(&self) -> Vec<String> {
        self.config.excluded_predicates.iter().cloned().collect()
    }

    fn context(&self, bar: &Bar, kind: &ExpansionKind) -> Result<ChartContext, ExploreError> {
        let chart_kind = kind.chart_kind();
        let plan = chart_query(ChartSpec {
            label: bar.label.clone(),
            lineage: bar.lineage.clone(),
            kind: chart_kind,
            excluded: self.excluded(),
        })?;
        let (parent_size, subclasses) = match chart_kind {
            ChartKind::Subclass => {
                let class = bar.label.as_str();
                (bar.len(), Some(hierarchy(&self.run(&hierarchy_query(class))?)?))
            }
            ChartKind::ObjectOut | ChartKind::ObjectIn => {
                let predicate = bar.label.as_str();
                let reached = reached_query(&bar.lineage, predicate, direction(chart_kind))?;
                (self.scalar(&reached)?, None)
            }
            _ => (bar.len(), None),
        };
        Ok(ChartContext {
            plan,
            parent: bar.lineage.clone(),
            kind: chart_kind,
            parent_size,
            subclasses,
        })
    }

    fn top_level_chart(&self) -> Result<Chart, ExploreError> {
        let parent = self.count(&Arc::new(Lineage::AllInstances))?;
        let h = hierarchy(&self.run(&top_level_hierarchy_query())?)?;
        let bars = aggregate_rows(&self.run(&top_level_query())?)?
            .into_iter()
            .map(|(label, n, _)| {
                let (direct, total) = h.get(label.as_str()).copied().unwrap_or_default();
                let class = label.as_str().to_string();
                ChartBar {
                    bar: Bar {
                        label,
                        bar_type: BarType::Class,
                        members: Members::Count(n),
                        lineage: Arc::new(Lineage::DirectClass { class }),
                    },
                    metrics: BarMetrics::new(n, n, parent).with_subclasses(direct, total),
                }
            })
            .collect();
        Ok(Chart::new(ChartKind::TopLevel, parent, bars))
    }

    fn filtered(&self, bar: &Bar, conditions: &[ldx_core::explore::FilterCondition]) -> Result<Chart, ExploreError> {
        if conditions.is_empty() {
            return Ok(filter_chart(bar.len(), bar.clone()));
        }
        let lineage = Arc::new(Lineage::Filter {
            parent: bar.lineage.clone(),
            conditions: conditions.to_vec(),
        });
        let n = self.count(&lineage)?;
        let filtered = Bar {
            label: bar.label.clone(),
            bar_type: BarType::Class,
            members: Members::Count(n),
            lineage,
        };
        Ok(filter_chart(bar.len(), filtered))
    }

    /// Like [`ChartSource::expand`], reporting partial charts while the
    /// aggregate is evaluated chunk by chunk. When the chunk limit stops
    /// evaluation early the full chart is computed in one go at the end.
    pub fn expand_streaming(
        &self,
        bar: &Bar,
        kind: &ExpansionKind,
        on_partial: &mut dyn FnMut(&Chart, &Progress),
    ) -> Result<Chart, ExploreError> {
        kind.check(bar)?;
        if matches!(kind, ExpansionKind::Filter(_)) {
            return self.expand(bar, kind);
        }
        let ctx = self.context(bar, kind)?;
        let mut failed = None;
        let mut forward = |p: &Progress| match ctx.chart(&p.result) {
            Ok(chart) => on_partial(&chart, p),
            Err(e) => failed = Some(e),
        };
        let progress = self.manager.execute_incremental(&ctx.plan, &self.dataset, &mut forward)?;
        if let Some(e) = failed {
            return Err(e);
        }
        if progress.complete {
            ctx.chart(&progress.result)
        } else {
            ctx.chart(&self.run(&ctx.plan)?)
        }
    }
}

impl ChartSource for PlanSource {
    fn root_bar(&self) -> Result<Bar, ExploreError> {
        let lineage = if self.uses_fallback()? {
            Lineage::AllInstances
        } else {
            Lineage::ClassTree {
                class: self.config.root.clone(),
            }
        };
        let lineage = Arc::new(lineage);
        Ok(Bar {
            label: BarLabel::Uri(self.config.root.clone()),
            bar_type: BarType::Class,
            members: Members::Count(self.count(&lineage)?),
            lineage,
        })
    }

    fn initial_chart(&self) -> Result<Chart, ExploreError> {
        if self.uses_fallback()? {
            return self.top_level_chart();
        }
        let root = self.root_bar()?;
        self.expand(&root, &ExpansionKind::Subclass)
    }

    fn class_bar(&self, class: &str) -> Result<Bar, ExploreError> {
        if self.scalar(&declared_class_query(class))? == 0 {
            return Err(ExploreError::UnknownClass(class.to_string()));
        }
        let lineage = Arc::new(Lineage::ClassTree {
            class: class.to_string(),
        });
        Ok(Bar {
            label: BarLabel::Uri(class.to_string()),
            bar_type: BarType::Class,
            members: Members::Count(self.count(&lineage)?),
            lineage,
        })
    }

    fn expand(&self, bar: &Bar, kind: &ExpansionKind) -> Result<Chart, ExploreError> {
        kind.check(bar)?;
        if let ExpansionKind::Filter(conditions) = kind {
            return self.filtered(bar, conditions);
        }
        let ctx = self.context(bar, kind)?;
        ctx.chart(&self.run(&ctx.plan)?)
    }

    fn table(&self, bar: &Bar, request: &TableRequest) -> Result<Table, ExploreError> {
        validate_all(&request.filters)?;
        let plan = table_query(&bar.lineage, request)?;
        let result = self.run(&plan)?;
        let s = column(&result, "s")?;
        let ncols = request.columns.len();
        let rows = result.rows.iter().filter_map(|row| {
            let subject = row[s].as_ref()?.lexical().to_string();
            let cells = (1..=ncols).map(|i| row.get(i).cloned().flatten()).collect();
            Some((subject, cells))
        });
        let rows = fold_rows(ncols, rows);
        let filtered = if request.filters.is_empty() {
            bar.lineage.clone()
        } else {
            Arc::new(Lineage::Filter {
                parent: bar.lineage.clone(),
                conditions: request.filters.clone(),
            })
        };
        Ok(Table {
            columns: request.columns.clone(),
            rows,
            total: self.count(&filtered)?,
            sparql: plan.text,
        })
    }

    fn classes(&self) -> Result<Vec<ClassInfo>, ExploreError> {
        let classes = self.run(&classes_query())?;
        let labels = self.run(&class_labels_query())?;
        let (lc, tc) = (column(&labels, "label")?, column(&labels, "text")?);
        let mut candidates: HashMap<String, Vec<Literal>> = HashMap::new();
        for row in &labels.rows {
            if let (Some(Term::Uri(class)), Some(Term::Literal(text))) = (&row[lc], &row[tc]) {
                candidates.entry(class.clone()).or_default().push(text.clone());
            }
        }
        let (cc, mc) = (column(&classes, "label")?, column(&classes, "members")?);
        let mut seen = BTreeSet::new();
        let mut out: Vec<ClassInfo> = classes
            .rows
            .iter()
            .filter_map(|row| match &row[cc] {
                Some(Term::Uri(uri)) if seen.insert(uri.clone()) => {
                    let label = candidates
                        .get(uri)
                        .and_then(|c| self.labels.choose(c.iter()))
                        .map_or_else(|| local_name(uri).to_string(), |l| l.lexical.clone());
                    Some(ClassInfo {
                        uri: uri.clone(),
                        label,
                        instance_count: number(&row[mc]),
                    })
                }
                _ => None,
            })
            .collect();
        out.sort_by(|a, b| a.label.cmp(&b.label).then_with(|| a.uri.cmp(&b.uri)));
        Ok(out)
    }

    fn stats(&self) -> Result<DatasetStats, ExploreError> {
        Ok(self.dataset.stats()?)
    }
}
