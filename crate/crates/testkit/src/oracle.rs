//! Brute-force reference implementations. Every answer is computed by
//! scanning the raw triple list; nothing here touches the graph indexes.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use ldx_core::explore::{Chart, Comparator, Direction, FilterCondition, FilterValue, Members};
use ldx_core::rdf::{Graph, RdfTriple, Term};

const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
const SUBCLASS_OF: &str = "http://www.w3.org/2000/01/rdf-schema#subClassOf";
const LABEL: &str = "http://www.w3.org/2000/01/rdf-schema#label";
const OWL_CLASS: &str = "http://www.w3.org/2002/07/owl#Class";
const RDFS_CLASS: &str = "http://www.w3.org/2000/01/rdf-schema#Class";
const XSD: &str = "http://www.w3.org/2001/XMLSchema#";
pub const LITERALS: &str = "«literal»";
pub const UNTYPED: &str = "«untyped»";

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OracleBar {
    pub members: BTreeSet<Term>,
    pub occurrences: u64,
}

/// A chart as plain data: bar label to members and occurrence count.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OracleChart {
    pub parent_size: u64,
    pub bars: BTreeMap<String, OracleBar>,
}

impl OracleChart {
    pub fn counts(&self) -> Vec<(String, usize)> {
        self.bars.iter().map(|(l, b)| (l.clone(), b.members.len())).collect()
    }
}

/// Converts an engine chart into the oracle's shape. Count-only bars
/// become empty member sets.
pub fn observe(graph: &Graph, chart: &Chart) -> OracleChart {
    let bars = chart
        .bars()
        .iter()
        .map(|b| {
            let members = match &b.bar.members {
                Members::Set(ids) => ids.iter().map(|id| graph.term(*id).clone()).collect(),
                Members::Count(_) => BTreeSet::new(),
            };
            (
                b.bar.label.to_string(),
                OracleBar {
                    members,
                    occurrences: b.metrics.occurrence_count,
                },
            )
        })
        .collect();
    OracleChart {
        parent_size: chart.parent_size(),
        bars,
    }
}

fn is_uri(t: &Term, iri: &str) -> bool {
    matches!(t, Term::Uri(u) if u == iri)
}

fn numeric(t: &Term) -> Option<f64> {
    let Term::Literal(l) = t else { return None };
    let local = l.datatype.as_deref()?.strip_prefix(XSD)?;
    const NUMERIC: [&str; 16] = [
        "integer", "decimal", "double", "float", "int", "long", "short", "byte",
        "nonNegativeInteger", "nonPositiveInteger", "positiveInteger", "negativeInteger",
        "unsignedLong", "unsignedInt", "unsignedShort", "unsignedByte",
    ];
    if !NUMERIC.contains(&local) {
        return None;
    }
    match l.lexical.trim() {
        "INF" | "+INF" => Some(f64::INFINITY),
        "-INF" => Some(f64::NEG_INFINITY),
        x => x.parse().ok(),
    }
}

pub struct Oracle {
    triples: Vec<RdfTriple>,
}

impl Oracle {
    /// Keeps the first occurrence of each distinct triple.
    pub fn new(triples: &[RdfTriple]) -> Self {
        let mut seen = HashSet::new();
        let triples = triples.iter().filter(|t| seen.insert((*t).clone())).cloned().collect();
        Oracle { triples }
    }

    pub fn triples(&self) -> &[RdfTriple] {
        &self.triples
    }

    fn with_predicate<'a>(&'a self, p: &'a str) -> impl Iterator<Item = &'a RdfTriple> + 'a {
        self.triples.iter().filter(move |t| is_uri(&t.predicate, p))
    }

    pub fn declared_classes(&self) -> BTreeSet<String> {
        self.with_predicate(RDF_TYPE)
            .filter(|t| is_uri(&t.object, OWL_CLASS) || is_uri(&t.object, RDFS_CLASS))
            .map(|t| t.subject.lexical().to_string())
            .collect()
    }

    /// (triple count, declared class count).
    pub fn stats(&self) -> (u64, u64) {
        (self.triples.len() as u64, self.declared_classes().len() as u64)
    }

    /// Preferred label: English, then untagged, then any; smallest text wins
    /// a tie; the local name when there is no label.
    pub fn label(&self, uri: &str) -> String {
        let labels: Vec<&ldx_core::rdf::Literal> = self
            .with_predicate(LABEL)
            .filter(|t| is_uri(&t.subject, uri))
            .filter_map(|t| t.object.as_literal())
            .collect();
        let tiers: [&dyn Fn(&ldx_core::rdf::Literal) -> bool; 3] = [
            &|l| l.language.as_deref().is_some_and(|x| x.eq_ignore_ascii_case("en")),
            &|l| l.language.is_none(),
            &|_| true,
        ];
        for tier in tiers {
            if let Some(best) = labels.iter().filter(|l| tier(l)).map(|l| l.lexical.clone()).min() {
                return best;
            }
        }
        let trimmed = uri.trim_end_matches(['/', '#']);
        match trimmed.rfind(['/', '#']) {
            Some(i) if i + 1 < trimmed.len() => trimmed[i + 1..].to_string(),
            _ => uri.to_string(),
        }
    }

    /// Declared classes as (uri, label), sorted by label then uri.
    pub fn list_classes(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = self
            .declared_classes()
            .into_iter()
            .map(|c| {
                let l = self.label(&c);
                (c, l)
            })
            .collect();
        out.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
        out
    }

    pub fn direct_instances(&self, class: &str) -> BTreeSet<Term> {
        self.with_predicate(RDF_TYPE)
            .filter(|t| is_uri(&t.object, class))
            .map(|t| t.subject.clone())
            .collect()
    }

    pub fn direct_subclasses(&self, class: &str) -> BTreeSet<String> {
        self.with_predicate(SUBCLASS_OF)
            .filter(|t| is_uri(&t.object, class))
            .map(|t| t.subject.lexical().to_string())
            .collect()
    }

    fn superclasses(&self, class: &str) -> BTreeSet<String> {
        self.with_predicate(SUBCLASS_OF)
            .filter(|t| is_uri(&t.subject, class) && t.object.is_uri())
            .map(|t| t.object.lexical().to_string())
            .collect()
    }

    /// `class` and everything below it, by repeated scans until nothing new appears.
    pub fn subclass_closure(&self, class: &str) -> BTreeSet<String> {
        let mut closure = BTreeSet::from([class.to_string()]);
        loop {
            let before = closure.len();
            for t in self.with_predicate(SUBCLASS_OF) {
                if closure.contains(t.object.lexical()) && t.object.is_uri() {
                    closure.insert(t.subject.lexical().to_string());
                }
            }
            if closure.len() == before {
                return closure;
            }
        }
    }

    pub fn transitive_instances(&self, class: &str) -> BTreeSet<Term> {
        let closure = self.subclass_closure(class);
        self.with_predicate(RDF_TYPE)
            .filter(|t| t.object.is_uri() && closure.contains(t.object.lexical()))
            .map(|t| t.subject.clone())
            .collect()
    }

    pub fn all_instances(&self) -> BTreeSet<Term> {
        self.with_predicate(RDF_TYPE)
            .filter(|t| !is_uri(&t.object, OWL_CLASS) && !is_uri(&t.object, RDFS_CLASS))
            .map(|t| t.subject.clone())
            .collect()
    }

    pub fn top_level_classes(&self) -> BTreeSet<String> {
        self.declared_classes()
            .into_iter()
            .filter(|c| self.superclasses(c).is_empty())
            .collect()
    }

    fn uses_fallback(&self, root: &str) -> bool {
        self.direct_subclasses(root).is_empty() && self.direct_instances(root).is_empty()
    }

    /// Members of the root bar.
    pub fn root_members(&self, root: &str) -> BTreeSet<Term> {
        if self.uses_fallback(root) {
            self.all_instances()
        } else {
            self.transitive_instances(root)
        }
    }

    pub fn initial_chart(&self, root: &str) -> OracleChart {
        if !self.uses_fallback(root) {
            return self.subclass_chart(&self.transitive_instances(root), root);
        }
        let bars = self
            .top_level_classes()
            .into_iter()
            .map(|c| {
                let members = self.direct_instances(&c);
                let n = members.len() as u64;
                (c, OracleBar { members, occurrences: n })
            })
            .collect();
        OracleChart {
            parent_size: self.all_instances().len() as u64,
            bars,
        }
    }

    pub fn subclass_chart(&self, s: &BTreeSet<Term>, class: &str) -> OracleChart {
        let bars = self
            .direct_subclasses(class)
            .into_iter()
            .map(|tau| {
                let members: BTreeSet<Term> =
                    self.direct_instances(&tau).into_iter().filter(|x| s.contains(x)).collect();
                let n = members.len() as u64;
                (tau, OracleBar { members, occurrences: n })
            })
            .collect();
        OracleChart {
            parent_size: s.len() as u64,
            bars,
        }
    }

    pub fn property_chart(&self, s: &BTreeSet<Term>, direction: Direction, excluded: &[String]) -> OracleChart {
        let mut bars: BTreeMap<String, OracleBar> = BTreeMap::new();
        for t in &self.triples {
            let anchor = match direction {
                Direction::Outgoing => &t.subject,
                Direction::Incoming => &t.object,
            };
            if !s.contains(anchor) || excluded.iter().any(|e| e == t.predicate.lexical()) {
                continue;
            }
            let bar = bars.entry(t.predicate.lexical().to_string()).or_default();
            bar.members.insert(anchor.clone());
            bar.occurrences += 1;
        }
        OracleChart {
            parent_size: s.len() as u64,
            bars,
        }
    }

    /// Terms reached from `s` along `predicate`, grouped by their IRI types.
    pub fn object_chart(&self, s: &BTreeSet<Term>, predicate: &str, direction: Direction) -> OracleChart {
        let mut bars: BTreeMap<String, OracleBar> = BTreeMap::new();
        let mut reached = BTreeSet::new();
        for t in self.with_predicate(predicate) {
            let (from, to) = match direction {
                Direction::Outgoing => (&t.subject, &t.object),
                Direction::Incoming => (&t.object, &t.subject),
            };
            if !s.contains(from) {
                continue;
            }
            reached.insert(to.clone());
            let labels: Vec<String> = if to.is_literal() {
                vec![LITERALS.to_string()]
            } else {
                let types: BTreeSet<String> = self
                    .with_predicate(RDF_TYPE)
                    .filter(|x| &x.subject == to && x.object.is_uri())
                    .map(|x| x.object.lexical().to_string())
                    .collect();
                if types.is_empty() {
                    vec![UNTYPED.to_string()]
                } else {
                    types.into_iter().collect()
                }
            };
            for l in labels {
                let bar = bars.entry(l).or_default();
                bar.members.insert(to.clone());
                bar.occurrences += 1;
            }
        }
        OracleChart {
            parent_size: reached.len() as u64,
            bars,
        }
    }

    fn satisfies(&self, c: &FilterCondition, o: &Term) -> bool {
        match (c.comparator, &c.value) {
            (Comparator::Equals, FilterValue::Uri { uri }) => is_uri(o, uri),
            (Comparator::Equals, FilterValue::Literal { literal, .. }) => {
                o.as_literal().is_some_and(|l| &l.lexical == literal)
            }
            (Comparator::Contains, v) => {
                let needle = match v {
                    FilterValue::Uri { uri } => uri,
                    FilterValue::Literal { literal, .. } => literal,
                };
                o.as_literal().is_some_and(|l| l.lexical.contains(needle.as_str()))
            }
            (cmp, v) => {
                let bound = match v {
                    FilterValue::Literal { literal, .. } => literal.trim().parse::<f64>().ok(),
                    FilterValue::Uri { .. } => None,
                };
                match (numeric(o), bound) {
                    (Some(x), Some(b)) if cmp == Comparator::Lt => x < b,
                    (Some(x), Some(b)) => x > b,
                    _ => false,
                }
            }
        }
    }

    /// Members of `s` with, for every condition, some value of its property
    /// satisfying it.
    pub fn filter(&self, s: &BTreeSet<Term>, conditions: &[FilterCondition]) -> BTreeSet<Term> {
        s.iter()
            .filter(|x| {
                conditions.iter().all(|c| {
                    self.triples.iter().any(|t| {
                        &t.subject == *x && is_uri(&t.predicate, &c.property) && self.satisfies(c, &t.object)
                    })
                })
            })
            .cloned()
            .collect()
    }

    /// Instance table: (subject text, one sorted value list per column) for
    /// the filtered members in subject order, paged; plus the total.
    pub fn table(
        &self,
        s: &BTreeSet<Term>,
        columns: &[String],
        filters: &[FilterCondition],
        limit: usize,
        offset: usize,
    ) -> (Vec<(String, Vec<Vec<Term>>)>, u64) {
        let kept = self.filter(s, filters);
        let total = kept.len() as u64;
        let rows = kept
            .into_iter()
            .skip(offset)
            .take(limit)
            .map(|x| {
                let cells = columns
                    .iter()
                    .map(|c| {
                        let mut values: Vec<Term> = self
                            .triples
                            .iter()
                            .filter(|t| t.subject == x && is_uri(&t.predicate, c))
                            .map(|t| t.object.clone())
                            .collect();
                        values.sort_by(|a, b| a.lexical().cmp(b.lexical()).then_with(|| a.cmp(b)));
                        values.dedup();
                        values
                    })
                    .collect();
                (x.lexical().to_string(), cells)
            })
            .collect();
        (rows, total)
    }
}
