//! SPARQL text for bars, charts and instance tables.
//!
//! Queries use a PREFIX header for the RDF/RDFS/OWL/XSD vocabularies and full
//! IRIs for everything taken from the data.

use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::canonical_key;
use crate::explore::{
    BarLabel, ChartKind, Comparator, Direction, ExploreError, FilterCondition, FilterValue, Lineage,
    TableRequest, LITERAL_LABEL, MAX_DEPTH, UNTYPED_LABEL,
};
use crate::rdf::Term;

/// Named graph that scopes a pattern to the current chunk of triples during
/// incremental evaluation.
pub const CHUNK_GRAPH: &str = "urn:x-ldx:chunk";

const PREFIXES: &str = "PREFIX rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#>\n\
PREFIX rdfs: <http://www.w3.org/2000/01/rdf-schema#>\n\
PREFIX owl: <http://www.w3.org/2002/07/owl#>\n\
PREFIX xsd: <http://www.w3.org/2001/XMLSchema#>\n";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanShape {
    /// `?label ?members ?occurrences`, one row per prospective bar.
    ChartAggregate,
    /// A single `?s` column.
    BarMembers,
    /// `?s` followed by one column per table column.
    TableRows,
    /// Any other aggregate (counts, class lists, hierarchy statistics).
    Aggregate,
}

/// The chart a [`PlanShape::ChartAggregate`] plan computes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ChartSpec {
    /// Label of the expanded bar.
    pub label: BarLabel,
    /// Lineage of the expanded bar.
    pub lineage: Arc<Lineage>,
    pub kind: ChartKind,
    /// Predicates omitted from property charts.
    pub excluded: Vec<String>,
}

/// What a plan computes, in structured form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PlanSpec {
    Members(Arc<Lineage>),
    Count(Arc<Lineage>),
    Chart(ChartSpec),
    /// Distinct terms reached from a property bar.
    Reached(Arc<Lineage>, String, Direction),
    /// Direct and total subclass counts of each direct subclass of a class.
    Hierarchy(String),
    Table(Arc<Lineage>, TableRequest),
    TopLevel,
    TopLevelHierarchy,
    DeclaredClass(String),
    Classes,
    ClassLabels,
    TripleCount,
    ClassCount,
    DirectInstanceCount(String),
    SubclassCount(String),
}

/// A level-zero property chart: the property expansion of a root set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LevelZero {
    pub direction: Direction,
    /// Root class whose subtree bounds the set, or `None` for all instances.
    pub root: Option<String>,
    pub excluded: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryPlan {
    pub text: String,
    pub shape: PlanShape,
    pub canonical_key: String,
    pub spec: PlanSpec,
}

impl QueryPlan {
    fn new(text: String, shape: PlanShape, spec: PlanSpec) -> Self {
        let canonical_key = canonical_key(&text);
        QueryPlan {
            text,
            shape,
            canonical_key,
            spec,
        }
    }

    pub fn level_zero(&self) -> Option<LevelZero> {
        let PlanSpec::Chart(spec) = &self.spec else {
            return None;
        };
        let direction = match spec.kind {
            ChartKind::PropertyOut => Direction::Outgoing,
            ChartKind::PropertyIn => Direction::Incoming,
            _ => return None,
        };
        let root = match spec.lineage.as_ref() {
            Lineage::ClassTree { class } => Some(class.clone()),
            Lineage::AllInstances => None,
            _ => return None,
        };
        Some(LevelZero {
            direction,
            root,
            excluded: spec.excluded.clone(),
        })
    }
}

/// How a chunk query limits its input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChunkScope {
    /// The driving triple pattern only matches triples of the current chunk
    /// (embedded evaluation).
    Triples,
    /// The member subquery is paged with LIMIT/OFFSET (remote endpoints).
    Members { limit: usize, offset: usize },
}

pub fn iri(uri: &str) -> String {
    Term::uri(uri).to_string()
}

fn literal(text: &str) -> String {
    Term::literal(text).to_string()
}

/// Builds the conjunctive pattern for a lineage.
struct PatternBuilder {
    out: String,
    next: usize,
}

impl PatternBuilder {
    fn new() -> Self {
        PatternBuilder {
            out: String::new(),
            next: 0,
        }
    }

    fn fresh(&mut self, stem: &str) -> String {
        self.next += 1;
        format!("?{stem}{}", self.next)
    }

    fn line(&mut self, text: &str) {
        self.out.push_str("  ");
        self.out.push_str(text);
        self.out.push('\n');
    }

    fn members(&mut self, lineage: &Lineage, var: &str) -> Result<(), ExploreError> {
        match lineage {
            Lineage::ClassTree { class } => {
                self.line(&format!("{var} rdf:type/rdfs:subClassOf* {} .", iri(class)))
            }
            Lineage::DirectClass { class } => self.line(&format!("{var} rdf:type {} .", iri(class))),
            Lineage::AllInstances => {
                let t = self.fresh("t");
                self.line(&format!("{var} rdf:type {t} ."));
                self.line(&format!("FILTER({t} NOT IN (owl:Class, rdfs:Class))"));
            }
            Lineage::Subclass { parent, class } => {
                // A direct subclass of a tree root lies inside the tree.
                if !matches!(parent.as_ref(), Lineage::ClassTree { .. }) {
                    self.members(parent, var)?;
                }
                self.line(&format!("{var} rdf:type {} .", iri(class)));
            }
            Lineage::Property {
                parent,
                predicate,
                direction,
            } => {
                self.members(parent, var)?;
                let o = self.fresh("o");
                match direction {
                    Direction::Outgoing => self.line(&format!("{var} {} {o} .", iri(predicate))),
                    Direction::Incoming => self.line(&format!("{o} {} {var} .", iri(predicate))),
                }
            }
            Lineage::Object {
                parent,
                class,
                direction,
            } => {
                let BarLabel::Uri(class) = class else {
                    return Err(ExploreError::UnsupportedPath(format!(
                        "{class} bars have no SPARQL pattern"
                    )));
                };
                let Lineage::Property {
                    parent: grand,
                    predicate,
                    direction: prop_direction,
                } = parent.as_ref()
                else {
                    return Err(ExploreError::UnsupportedPath(
                        "object step without a property bar".into(),
                    ));
                };
                let x = self.fresh("x");
                // Reaching objects along the same direction already implies the
                // property bar's own constraint.
                if prop_direction == direction {
                    self.members(grand, &x)?;
                } else {
                    self.members(parent, &x)?;
                }
                self.reach(&x, predicate, *direction, var);
                self.line(&format!("{var} rdf:type {} .", iri(class)));
            }
            Lineage::Filter { parent, conditions } => {
                self.members(parent, var)?;
                for c in conditions {
                    self.condition(var, c)?;
                }
            }
        }
        Ok(())
    }

    fn reach(&mut self, from: &str, predicate: &str, direction: Direction, to: &str) {
        match direction {
            Direction::Outgoing => self.line(&format!("{from} {} {to} .", iri(predicate))),
            Direction::Incoming => self.line(&format!("{to} {} {from} .", iri(predicate))),
        }
    }

    fn condition(&mut self, var: &str, c: &FilterCondition) -> Result<(), ExploreError> {
        c.validate()?;
        let p = iri(&c.property);
        match (c.comparator, &c.value) {
            (Comparator::Equals, FilterValue::Uri { uri }) => {
                self.line(&format!("{var} {p} {} .", iri(uri)));
            }
            (Comparator::Equals, FilterValue::Literal { literal: text, .. }) => {
                let f = self.fresh("f");
                self.line(&format!("{var} {p} {f} ."));
                self.line(&format!(
                    "FILTER(isLiteral({f}) && STR({f}) = {})",
                    literal(text)
                ));
            }
            (Comparator::Contains, v) => {
                let f = self.fresh("f");
                self.line(&format!("{var} {p} {f} ."));
                self.line(&format!(
                    "FILTER(isLiteral({f}) && CONTAINS(STR({f}), {}))",
                    literal(v.text())
                ));
            }
            (Comparator::Lt | Comparator::Gt, v) => {
                let n = v.numeric().expect("validated");
                let op = if c.comparator == Comparator::Lt { "<" } else { ">" };
                let f = self.fresh("f");
                self.line(&format!("{var} {p} {f} ."));
                self.line(&format!(
                    "FILTER(isNumeric({f}) && {f} {op} \"{n:?}\"^^xsd:double)"
                ));
            }
        }
        Ok(())
    }
}

fn check_lineage(lineage: &Lineage) -> Result<(), ExploreError> {
    if lineage.depth() > MAX_DEPTH {
        return Err(ExploreError::UnsupportedPath(format!(
            "lineage depth {} exceeds {MAX_DEPTH}",
            lineage.depth()
        )));
    }
    if lineage.contains_pseudo() {
        return Err(ExploreError::UnsupportedPath(
            "path passes through a literal or untyped bar".into(),
        ));
    }
    Ok(())
}

/// Graph pattern binding `var` to every member of the lineage's set.
pub fn member_pattern(lineage: &Lineage, var: &str) -> Result<String, ExploreError> {
    check_lineage(lineage)?;
    let mut b = PatternBuilder::new();
    b.members(lineage, var)?;
    Ok(b.out)
}

/// Indents every line of `pattern` by `spaces`.
fn indent(pattern: &str, spaces: usize) -> String {
    let pad = " ".repeat(spaces);
    pattern
        .lines()
        .map(|l| format!("{pad}{l}\n"))
        .collect()
}

fn distinct_subquery(lineage: &Lineage, var: &str, page: Option<(usize, usize)>) -> Result<String, ExploreError> {
    let pattern = member_pattern(lineage, var)?;
    let mut q = format!("{{ SELECT DISTINCT {var} WHERE {{\n{}  }}", indent(&pattern, 2));
    if let Some((limit, offset)) = page {
        write!(q, " ORDER BY {var} LIMIT {limit} OFFSET {offset}").unwrap();
    }
    q.push_str(" }\n");
    Ok(q)
}

/// `SELECT DISTINCT ?s` returning exactly the bar's members.
pub fn bar_query(lineage: &Arc<Lineage>) -> Result<QueryPlan, ExploreError> {
    let pattern = member_pattern(lineage, "?s")?;
    let text = format!("{PREFIXES}SELECT DISTINCT ?s WHERE {{\n{pattern}}}\nORDER BY ?s\n");
    Ok(QueryPlan::new(
        text,
        PlanShape::BarMembers,
        PlanSpec::Members(lineage.clone()),
    ))
}

/// `?n`: number of members.
pub fn count_query(lineage: &Arc<Lineage>) -> Result<QueryPlan, ExploreError> {
    let pattern = member_pattern(lineage, "?s")?;
    let text = format!("{PREFIXES}SELECT (COUNT(DISTINCT ?s) AS ?n) WHERE {{\n{pattern}}}\n");
    Ok(QueryPlan::new(
        text,
        PlanShape::Aggregate,
        PlanSpec::Count(lineage.clone()),
    ))
}

const CHART_TAIL: &str = "GROUP BY ?label\nORDER BY DESC(?members) ?label\n";

fn excluded_filter(excluded: &[String]) -> String {
    if excluded.is_empty() {
        return String::new();
    }
    let list: Vec<String> = excluded.iter().map(|p| iri(p)).collect();
    format!("FILTER(?label NOT IN ({}))\n", list.join(", "))
}

fn predicate_of(spec: &ChartSpec) -> Result<&str, ExploreError> {
    spec.label
        .uri()
        .ok_or_else(|| ExploreError::NotExpandable(spec.label.to_string()))
}

fn class_of(spec: &ChartSpec) -> Result<&str, ExploreError> {
    predicate_of(spec)
}

/// `?label ?members ?occurrences` aggregate for one expansion of a bar.
pub fn chart_query(spec: ChartSpec) -> Result<QueryPlan, ExploreError> {
    check_lineage(&spec.lineage)?;
    let body = match spec.kind {
        ChartKind::Subclass => {
            let class = class_of(&spec)?;
            // Members of a direct subclass of a tree root are inside the tree.
            let s_pattern = match spec.lineage.as_ref() {
                Lineage::ClassTree { class: root } if root == class => String::new(),
                other => member_pattern(other, "?s")?,
            };
            format!(
                "SELECT ?label (COUNT(DISTINCT ?s) AS ?members) (COUNT(DISTINCT ?s) AS ?occurrences) WHERE {{\n  \
                 ?label rdfs:subClassOf {} .\n  \
                 OPTIONAL {{\n    ?s rdf:type ?label .\n{}  }}\n}}\n{CHART_TAIL}",
                iri(class),
                indent(&s_pattern, 2)
            )
        }
        ChartKind::PropertyOut | ChartKind::PropertyIn => {
            let triple = if spec.kind == ChartKind::PropertyOut {
                "?s ?label ?o ."
            } else {
                "?o ?label ?s ."
            };
            let source = match spec.lineage.as_ref() {
                Lineage::DirectClass { .. } => member_pattern(&spec.lineage, "?s")?,
                other => distinct_subquery(other, "?s", None)?,
            };
            format!(
                "SELECT ?label (COUNT(?s) AS ?members) (SUM(?sp) AS ?occurrences) WHERE {{\n  \
                 {{ SELECT ?s ?label (COUNT(*) AS ?sp) WHERE {{\n{}      {triple}\n{}    }}\n    \
                 GROUP BY ?s ?label\n  }}\n}}\n{CHART_TAIL}",
                indent(&source, 4),
                indent(&excluded_filter(&spec.excluded), 6)
            )
        }
        ChartKind::ObjectOut | ChartKind::ObjectIn => {
            let predicate = predicate_of(&spec)?;
            let direction = if spec.kind == ChartKind::ObjectOut {
                Direction::Outgoing
            } else {
                Direction::Incoming
            };
            format!(
                "SELECT ?label (COUNT(DISTINCT ?s) AS ?members) (COUNT(*) AS ?occurrences) WHERE {{\n{}{}}}\n{CHART_TAIL}",
                indent(&distinct_subquery(&spec.lineage, "?x", None)?, 2),
                object_tail(predicate, direction, None)
            )
        }
        other => {
            return Err(ExploreError::UnsupportedPath(format!(
                "no aggregate query for {other:?} charts"
            )))
        }
    };
    Ok(QueryPlan::new(
        format!("{PREFIXES}{body}"),
        PlanShape::ChartAggregate,
        PlanSpec::Chart(spec),
    ))
}

/// Reach step plus the class/pseudo label binding shared by object charts.
fn object_tail(predicate: &str, direction: Direction, chunk: Option<&str>) -> String {
    let triple = match direction {
        Direction::Outgoing => format!("?x {} ?s .", iri(predicate)),
        Direction::Incoming => format!("?s {} ?x .", iri(predicate)),
    };
    let reach = match chunk {
        Some(graph) => format!("GRAPH {graph} {{ {triple} }}"),
        None => triple,
    };
    format!(
        "  {reach}\n  \
         OPTIONAL {{ ?s rdf:type ?c . FILTER(isIRI(?c)) }}\n  \
         BIND(IF(BOUND(?c), ?c, IF(isLiteral(?s), {}, {})) AS ?label)\n",
        literal(LITERAL_LABEL),
        literal(UNTYPED_LABEL)
    )
}

/// Per-chunk rows `?label ?s ?occurrences` grouped by label and member. Merging
/// chunks by member-set union and occurrence sum yields the full chart.
pub fn chart_chunk_query(spec: &ChartSpec, scope: ChunkScope) -> Result<String, ExploreError> {
    check_lineage(&spec.lineage)?;
    let chunk = iri(CHUNK_GRAPH);
    let (in_chunk, page) = match scope {
        ChunkScope::Triples => (true, None),
        ChunkScope::Members { limit, offset } => (false, Some((limit, offset))),
    };
    let wrap = |triple: &str| {
        if in_chunk {
            format!("GRAPH {chunk} {{ {triple} }}")
        } else {
            triple.to_string()
        }
    };
    let body = match spec.kind {
        ChartKind::Subclass => {
            let class = class_of(spec)?;
            let source = distinct_subquery(&spec.lineage, "?s", page)?;
            format!(
                "  ?label rdfs:subClassOf {} .\n  OPTIONAL {{\n    {}\n{}  }}\n",
                iri(class),
                wrap("?s rdf:type ?label ."),
                indent(&source, 4)
            )
        }
        ChartKind::PropertyOut | ChartKind::PropertyIn => {
            let triple = if spec.kind == ChartKind::PropertyOut {
                "?s ?label ?o ."
            } else {
                "?o ?label ?s ."
            };
            let source = distinct_subquery(&spec.lineage, "?s", page)?;
            format!(
                "  {}\n{}{}",
                wrap(triple),
                indent(&source, 2),
                indent(&excluded_filter(&spec.excluded), 2)
            )
        }
        ChartKind::ObjectOut | ChartKind::ObjectIn => {
            let predicate = predicate_of(spec)?;
            let direction = if spec.kind == ChartKind::ObjectOut {
                Direction::Outgoing
            } else {
                Direction::Incoming
            };
            let source = distinct_subquery(&spec.lineage, "?x", page)?;
            let tail = object_tail(predicate, direction, in_chunk.then_some(chunk.as_str()));
            // The chunk-scoped reach step drives evaluation, so it goes first.
            let (reach, rest) = tail.split_once('\n').expect("multi-line tail");
            format!("{reach}\n{}{rest}", indent(&source, 2))
        }
        other => {
            return Err(ExploreError::UnsupportedPath(format!(
                "{other:?} charts are not distributive"
            )))
        }
    };
    Ok(format!(
        "{PREFIXES}SELECT ?label ?s (COUNT(*) AS ?occurrences) WHERE {{\n{body}}}\nGROUP BY ?label ?s\n"
    ))
}

/// `?n`: distinct terms reached from a property bar, the coverage denominator
/// of object charts.
pub fn reached_query(lineage: &Arc<Lineage>, predicate: &str, direction: Direction) -> Result<QueryPlan, ExploreError> {
    let source = distinct_subquery(lineage, "?x", None)?;
    let triple = match direction {
        Direction::Outgoing => format!("?x {} ?s .", iri(predicate)),
        Direction::Incoming => format!("?s {} ?x .", iri(predicate)),
    };
    let text = format!(
        "{PREFIXES}SELECT (COUNT(DISTINCT ?s) AS ?n) WHERE {{\n{}  {triple}\n}}\n",
        indent(&source, 2)
    );
    Ok(QueryPlan::new(
        text,
        PlanShape::Aggregate,
        PlanSpec::Reached(lineage.clone(), predicate.to_string(), direction),
    ))
}

/// `?label ?direct ?total` subclass counts for each direct subclass of `class`.
pub fn hierarchy_query(class: &str) -> QueryPlan {
    let text = format!(
        "{PREFIXES}SELECT ?label (COUNT(DISTINCT ?d) AS ?direct) (COUNT(DISTINCT ?t) AS ?total) WHERE {{\n  \
         ?label rdfs:subClassOf {} .\n  \
         OPTIONAL {{ ?d rdfs:subClassOf ?label }}\n  \
         OPTIONAL {{ ?t rdfs:subClassOf+ ?label . FILTER(?t != ?label) }}\n}}\nGROUP BY ?label\n",
        iri(class)
    );
    QueryPlan::new(text, PlanShape::Aggregate, PlanSpec::Hierarchy(class.to_string()))
}

const DECLARED: &str = "?label rdf:type ?k .\n  FILTER(?k IN (owl:Class, rdfs:Class))\n";

/// Top-level declared classes with their direct instance counts.
pub fn top_level_query() -> QueryPlan {
    let text = format!(
        "{PREFIXES}SELECT ?label (COUNT(DISTINCT ?s) AS ?members) (COUNT(DISTINCT ?s) AS ?occurrences) WHERE {{\n  \
         {DECLARED}  \
         FILTER NOT EXISTS {{ ?label rdfs:subClassOf ?sup . FILTER(isIRI(?sup)) }}\n  \
         OPTIONAL {{ ?s rdf:type ?label }}\n}}\n{CHART_TAIL}"
    );
    QueryPlan::new(text, PlanShape::Aggregate, PlanSpec::TopLevel)
}

/// `?label ?direct ?total` subclass counts for each top-level class.
pub fn top_level_hierarchy_query() -> QueryPlan {
    let text = format!(
        "{PREFIXES}SELECT ?label (COUNT(DISTINCT ?d) AS ?direct) (COUNT(DISTINCT ?t) AS ?total) WHERE {{\n  \
         {DECLARED}  \
         FILTER NOT EXISTS {{ ?label rdfs:subClassOf ?sup . FILTER(isIRI(?sup)) }}\n  \
         OPTIONAL {{ ?d rdfs:subClassOf ?label }}\n  \
         OPTIONAL {{ ?t rdfs:subClassOf+ ?label . FILTER(?t != ?label) }}\n}}\nGROUP BY ?label\n"
    );
    QueryPlan::new(text, PlanShape::Aggregate, PlanSpec::TopLevelHierarchy)
}

/// `?n`: number of metaclasses (owl:Class, rdfs:Class) `class` is declared with.
pub fn declared_class_query(class: &str) -> QueryPlan {
    let text = format!(
        "{PREFIXES}SELECT (COUNT(DISTINCT ?k) AS ?n) WHERE {{\n  {} rdf:type ?k .\n  FILTER(?k IN (owl:Class, rdfs:Class))\n}}\n",
        iri(class)
    );
    QueryPlan::new(text, PlanShape::Aggregate, PlanSpec::DeclaredClass(class.to_string()))
}

/// Declared classes with their direct instance counts.
pub fn classes_query() -> QueryPlan {
    let text = format!(
        "{PREFIXES}SELECT ?label (COUNT(DISTINCT ?s) AS ?members) WHERE {{\n  \
         {DECLARED}  OPTIONAL {{ ?s rdf:type ?label }}\n}}\nGROUP BY ?label\nORDER BY ?label\n"
    );
    QueryPlan::new(text, PlanShape::Aggregate, PlanSpec::Classes)
}

/// Every rdfs:label of every declared class.
pub fn class_labels_query() -> QueryPlan {
    let text = format!(
        "{PREFIXES}SELECT DISTINCT ?label ?text WHERE {{\n  {DECLARED}  ?label rdfs:label ?text .\n}}\nORDER BY ?label ?text\n"
    );
    QueryPlan::new(text, PlanShape::Aggregate, PlanSpec::ClassLabels)
}

pub fn triple_count_query() -> QueryPlan {
    QueryPlan::new(
        "SELECT (COUNT(*) AS ?n) WHERE { ?s ?p ?o }\n".to_string(),
        PlanShape::Aggregate,
        PlanSpec::TripleCount,
    )
}

pub fn class_count_query() -> QueryPlan {
    let text = format!(
        "{PREFIXES}SELECT (COUNT(DISTINCT ?c) AS ?n) WHERE {{\n  ?c rdf:type ?k .\n  FILTER(?k IN (owl:Class, rdfs:Class))\n}}\n"
    );
    QueryPlan::new(text, PlanShape::Aggregate, PlanSpec::ClassCount)
}

pub fn direct_instance_count_query(class: &str) -> QueryPlan {
    let text = format!(
        "{PREFIXES}SELECT (COUNT(DISTINCT ?s) AS ?n) WHERE {{ ?s rdf:type {} }}\n",
        iri(class)
    );
    QueryPlan::new(
        text,
        PlanShape::Aggregate,
        PlanSpec::DirectInstanceCount(class.to_string()),
    )
}

pub fn subclass_count_query(class: &str) -> QueryPlan {
    let text = format!(
        "{PREFIXES}SELECT (COUNT(DISTINCT ?c) AS ?n) WHERE {{ ?c rdfs:subClassOf {} }}\n",
        iri(class)
    );
    QueryPlan::new(
        text,
        PlanShape::Aggregate,
        PlanSpec::SubclassCount(class.to_string()),
    )
}

/// Instance table: one row per member and combination of column values.
/// Pagination applies to members inside the subquery, so a page always holds
/// whole members.
pub fn table_query(lineage: &Arc<Lineage>, request: &TableRequest) -> Result<QueryPlan, ExploreError> {
    let filtered = if request.filters.is_empty() {
        lineage.clone()
    } else {
        Arc::new(Lineage::Filter {
            parent: lineage.clone(),
            conditions: request.filters.clone(),
        })
    };
    let source = distinct_subquery(&filtered, "?s", Some((request.limit, request.offset)))?;
    let vars: Vec<String> = (1..=request.columns.len()).map(|i| format!("?c{i}")).collect();
    let mut text = format!("{PREFIXES}SELECT ?s");
    for v in &vars {
        write!(text, " {v}").unwrap();
    }
    write!(text, " WHERE {{\n{}", indent(&source, 2)).unwrap();
    for (column, v) in request.columns.iter().zip(&vars) {
        writeln!(text, "  OPTIONAL {{ ?s {} {v} }}", iri(column)).unwrap();
    }
    text.push_str("}\nORDER BY ?s");
    for v in &vars {
        write!(text, " {v}").unwrap();
    }
    text.push('\n');
    Ok(QueryPlan::new(
        text,
        PlanShape::TableRows,
        PlanSpec::Table(lineage.clone(), request.clone()),
    ))
}
