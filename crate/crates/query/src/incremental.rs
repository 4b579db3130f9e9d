//! Chunked evaluation of chart aggregates. Each chunk yields
//! `?label ?s ?occurrences` rows; member sets are unioned and occurrences
//! summed, so the merged chart after the last chunk equals the batch result.
//!
//! Embedded datasets are chunked by triple position and the merge is exact.
//! Remote datasets are chunked by paging the member subquery, which is only
//! as stable as the endpoint's ordering.

use std::collections::{HashMap, HashSet};
use std::time::{Duration, Instant};

use ldx_core::rdf::{Literal, Term};
use ldx_core::sparql::{chart_chunk_query, count_query, term_order, ChartSpec, ChunkScope, Memo, PlanSpec, PreparedQuery, QueryPlan};
use ldx_core::{Origin, QueryResult};

use crate::dataset::DatasetHandle;
use crate::error::{ClientError, QueryError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncrementalOptions {
    /// Triples per chunk (embedded) or members per page (remote).
    pub chunk_size: usize,
    /// Stop after this many chunks. `None` runs to completion.
    pub max_chunks: Option<usize>,
    /// Per-chunk timeout.
    pub timeout: Option<Duration>,
}

/// The merged chart after some chunks.
#[derive(Debug, Clone, PartialEq)]
pub struct Progress {
    pub chunks_done: usize,
    pub chunks_total: usize,
    /// Share of the input covered so far, in `[0, 1]`.
    pub fraction: f64,
    pub complete: bool,
    pub result: QueryResult,
}

#[derive(Debug, Default)]
struct Merge {
    groups: HashMap<Term, (HashSet<Term>, u64)>,
}

fn malformed(what: &str) -> QueryError {
    QueryError::Endpoint(ClientError::MalformedResponse(what.to_string()))
}

impl Merge {
    fn add(&mut self, chunk: &QueryResult) -> Result<(), QueryError> {
        let col = |name: &str| chunk.column(name).ok_or_else(|| malformed(&format!("chunk result lacks ?{name}")));
        let (label, s, occ) = (col("label")?, col("s")?, col("occurrences")?);
        for row in &chunk.rows {
            let Some(l) = &row[label] else { continue };
            let entry = self.groups.entry(l.clone()).or_default();
            // An unbound member is a label without members in this chunk.
            if let Some(s) = &row[s] {
                entry.0.insert(s.clone());
                entry.1 += row[occ]
                    .as_ref()
                    .and_then(Term::numeric_value)
                    .ok_or_else(|| malformed("non-numeric ?occurrences"))? as u64;
            }
        }
        Ok(())
    }

    fn result(&self, origin: Origin, elapsed: Duration) -> QueryResult {
        let mut bars: Vec<(&Term, u64, u64)> = self
            .groups
            .iter()
            .map(|(l, (s, occ))| (l, s.len() as u64, *occ))
            .collect();
        bars.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| term_order(Some(a.0), Some(b.0))));
        QueryResult {
            columns: vec!["label".into(), "members".into(), "occurrences".into()],
            rows: bars
                .into_iter()
                .map(|(l, m, o)| {
                    vec![
                        Some(l.clone()),
                        Some(Term::Literal(Literal::integer(m))),
                        Some(Term::Literal(Literal::integer(o))),
                    ]
                })
                .collect(),
            origin,
            elapsed,
        }
    }
}

pub fn chart_spec(plan: &QueryPlan) -> Result<&ChartSpec, QueryError> {
    match &plan.spec {
        PlanSpec::Chart(spec) => Ok(spec),
        _ => Err(QueryError::NotDistributive(plan.shape)),
    }
}

fn fraction(done: usize, total: usize) -> f64 {
    if total == 0 {
        1.0
    } else {
        (done as f64 / total as f64).min(1.0)
    }
}

/// Runs `plan` chunk by chunk, calling `on_partial` with the merged chart
/// after every chunk. Returns the last progress report.
pub fn execute_incremental(
    dataset: &DatasetHandle,
    plan: &QueryPlan,
    options: &IncrementalOptions,
    on_partial: &mut dyn FnMut(&Progress),
) -> Result<Progress, QueryError> {
    let spec = chart_spec(plan)?;
    let n = options.chunk_size.max(1);
    let limit = options.max_chunks.unwrap_or(usize::MAX).max(1);
    let start = Instant::now();
    let mut merge = Merge::default();

    let mut step = |merge: &Merge, done: usize, total: usize, covered: usize, size: usize, origin| {
        let progress = Progress {
            chunks_done: done,
            chunks_total: total,
            fraction: fraction(covered, size),
            complete: done == total,
            result: merge.result(origin, start.elapsed()),
        };
        on_partial(&progress);
        progress
    };

    if let Some(graph) = dataset.graph() {
        let text = chart_chunk_query(spec, ChunkScope::Triples)?;
        let query = PreparedQuery::parse(&text)?;
        let mut memo = Memo::default();
        let size = graph.len();
        let total = size.div_ceil(n).max(1);
        let mut last = None;
        for i in 0..total.min(limit) {
            let range = i * n..((i + 1) * n).min(size);
            let covered = range.end;
            let deadline = options.timeout.map(|t| Instant::now() + t);
            let chunk = dataset.run_chunk(&text, &query, &mut memo, &graph, range, deadline)?;
            merge.add(&chunk)?;
            last = Some(step(&merge, i + 1, total, covered, size, Origin::Embedded));
        }
        return Ok(last.expect("at least one chunk"));
    }

    let members = dataset
        .run(&count_query(&spec.lineage)?.text, options.timeout)?
        .scalar_count()
        .ok_or_else(|| malformed("member count query returned no number"))? as usize;
    let total = members.div_ceil(n).max(1);
    let mut last = None;
    for i in 0..total.min(limit) {
        let text = chart_chunk_query(spec, ChunkScope::Members { limit: n, offset: i * n })?;
        let chunk = dataset.run(&text, options.timeout)?;
        merge.add(&chunk)?;
        let covered = ((i + 1) * n).min(members);
        last = Some(step(&merge, i + 1, total, covered, members, Origin::Remote));
    }
    Ok(last.expect("at least one chunk"))
}
