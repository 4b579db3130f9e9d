use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::filter::FilterCondition;
use crate::rdf::Term;

pub const DEFAULT_LIMIT: usize = 50;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TableRequest {
    #[serde(default)]
    pub columns: Vec<String>,
    #[serde(default)]
    pub filters: Vec<FilterCondition>,
    #[serde(default = "default_limit")]
    pub limit: usize,
    #[serde(default)]
    pub offset: usize,
}

fn default_limit() -> usize {
    DEFAULT_LIMIT
}

impl Default for TableRequest {
    fn default() -> Self {
        TableRequest {
            columns: Vec::new(),
            filters: Vec::new(),
            limit: DEFAULT_LIMIT,
            offset: 0,
        }
    }
}

impl TableRequest {
    pub fn columns(columns: &[&str]) -> Self {
        TableRequest {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..TableRequest::default()
        }
    }
}

/// One table row: a member and, per column, its values in display order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRow {
    pub subject: String,
    pub cells: Vec<Vec<Term>>,
}

impl TableRow {
    /// Cell text: values joined with `"; "`, URIs in full, literals by lexical form.
    pub fn display_cell(&self, column: usize) -> String {
        let parts: Vec<&str> = self.cells[column].iter().map(Term::lexical).collect();
        parts.join("; ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<TableRow>,
    pub total: u64,
    pub sparql: String,
}

/// Sorts cell values by display text, then by term.
pub fn sort_cell(values: &mut Vec<Term>) {
    values.sort_by(|a, b| a.lexical().cmp(b.lexical()).then_with(|| a.cmp(b)));
    values.dedup();
}

/// Folds raw SPARQL rows (`?s` then one cell per column, one row per value
/// combination) into table rows. Rows keep their first-seen subject order.
pub fn fold_rows(columns: usize, rows: impl IntoIterator<Item = (String, Vec<Option<Term>>)>) -> Vec<TableRow> {
    let mut order = Vec::new();
    let mut cells: BTreeMap<String, Vec<BTreeSet<Term>>> = BTreeMap::new();
    for (subject, values) in rows {
        let entry = cells.entry(subject.clone()).or_insert_with(|| {
            order.push(subject);
            vec![BTreeSet::new(); columns]
        });
        for (i, v) in values.into_iter().enumerate().take(columns) {
            if let Some(v) = v {
                entry[i].insert(v);
            }
        }
    }
    order
        .into_iter()
        .map(|subject| {
            let sets = cells.remove(&subject).unwrap_or_default();
            TableRow {
                subject,
                cells: sets
                    .into_iter()
                    .map(|s| {
                        let mut v: Vec<Term> = s.into_iter().collect();
                        sort_cell(&mut v);
                        v
                    })
                    .collect(),
            }
        })
        .collect()
}
