//! Precomputed property statistics of a root set, answering level-zero
//! property charts without running the aggregate query.

use std::collections::{BTreeMap, HashMap};
use std::time::Instant;

use ldx_core::explore::Direction;
use ldx_core::rdf::{Literal, Term, TermId};
use ldx_core::rdf::Graph;
use ldx_core::sparql::LevelZero;
use ldx_core::{Origin, QueryResult};

/// Distinct members and total occurrences of one predicate.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PredicateCount {
    pub members: u64,
    pub occurrences: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FastPathIndex {
    version: u64,
    root: Option<String>,
    outgoing: BTreeMap<String, PredicateCount>,
    incoming: BTreeMap<String, PredicateCount>,
}

fn tally(graph: &Graph, positions: &[u32], local: &mut HashMap<TermId, u64>, into: &mut HashMap<TermId, PredicateCount>) {
    local.clear();
    for pos in positions {
        *local.entry(graph.triples()[*pos as usize].predicate).or_default() += 1;
    }
    for (p, n) in local.drain() {
        let c = into.entry(p).or_default();
        c.members += 1;
        c.occurrences += n;
    }
}

impl FastPathIndex {
    /// Statistics of the instances of `root` and its subclasses, or of all
    /// typed instances when `root` is `None`.
    pub fn build(graph: &Graph, root: Option<&str>) -> Self {
        let members = match root {
            Some(class) => graph
                .lookup_uri(class)
                .map(|c| graph.transitive_instances(c))
                .unwrap_or_default(),
            None => graph.all_instances(),
        };
        let mut out = HashMap::new();
        let mut inc = HashMap::new();
        let mut local = HashMap::new();
        for s in members {
            tally(graph, graph.positions_with_subject(s), &mut local, &mut out);
            tally(graph, graph.positions_with_object(s), &mut local, &mut inc);
        }
        let named = |m: HashMap<TermId, PredicateCount>| m.into_iter().map(|(p, c)| (graph.uri(p).to_string(), c)).collect();
        FastPathIndex {
            version: graph.version(),
            root: root.map(str::to_string),
            outgoing: named(out),
            incoming: named(inc),
        }
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn root(&self) -> Option<&str> {
        self.root.as_deref()
    }

    pub fn counts(&self, direction: Direction) -> &BTreeMap<String, PredicateCount> {
        match direction {
            Direction::Outgoing => &self.outgoing,
            Direction::Incoming => &self.incoming,
        }
    }

    /// The `?label ?members ?occurrences` rows the chart query would return,
    /// in the same order.
    pub fn answer(&self, chart: &LevelZero) -> QueryResult {
        let start = Instant::now();
        let mut bars: Vec<(&String, &PredicateCount)> = self
            .counts(chart.direction)
            .iter()
            .filter(|(p, _)| !chart.excluded.contains(p))
            .collect();
        // Labels are IRIs, so string order is the query's secondary order.
        bars.sort_by(|a, b| b.1.members.cmp(&a.1.members).then_with(|| a.0.cmp(b.0)));
        let rows = bars
            .into_iter()
            .map(|(p, c)| {
                vec![
                    Some(Term::uri(p.as_str())),
                    Some(Term::Literal(Literal::integer(c.members))),
                    Some(Term::Literal(Literal::integer(c.occurrences))),
                ]
            })
            .collect();
        QueryResult {
            columns: vec!["label".into(), "members".into(), "occurrences".into()],
            rows,
            origin: Origin::FastPath,
            elapsed: start.elapsed(),
        }
    }
}
