use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::rdf::{Literal, Term};

/// Where a result came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Embedded,
    Remote,
    Cache,
    /// Answered from precomputed level-zero statistics.
    FastPath,
}

/// A SELECT result table. Unbound cells are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryResult {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<Term>>>,
    pub origin: Origin,
    #[serde(with = "millis")]
    pub elapsed: Duration,
}

impl QueryResult {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Integer value of a single-cell count result.
    pub fn scalar_count(&self) -> Option<u64> {
        let cell = self.rows.first()?.first()?.as_ref()?;
        cell.numeric_value().map(|v| v as u64)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed SPARQL results document: {0}")]
pub struct MalformedResults(pub String);

fn term_json(t: &Term) -> Value {
    match t {
        Term::Uri(iri) => json!({"type": "uri", "value": iri}),
        Term::Literal(l) => {
            let mut m = Map::new();
            m.insert("type".into(), "literal".into());
            m.insert("value".into(), l.lexical.clone().into());
            if let Some(lang) = &l.language {
                m.insert("xml:lang".into(), lang.clone().into());
            }
            if let Some(dt) = &l.datatype {
                m.insert("datatype".into(), dt.clone().into());
            }
            Value::Object(m)
        }
    }
}

fn json_term(v: &Value) -> Result<Term, MalformedResults> {
    let bad = |what: &str| MalformedResults(what.to_string());
    let kind = v.get("type").and_then(Value::as_str).ok_or_else(|| bad("binding without type"))?;
    let value = v.get("value").and_then(Value::as_str).ok_or_else(|| bad("binding without value"))?;
    match kind {
        "uri" => Ok(Term::uri(value)),
        // Blank nodes keep their label so they stay distinct; the data model
        // has no other way to carry them.
        "bnode" => Ok(Term::uri(format!("_:{value}"))),
        "literal" | "typed-literal" => {
            let lang = v.get("xml:lang").and_then(Value::as_str);
            let datatype = v.get("datatype").and_then(Value::as_str);
            Ok(Term::Literal(match (lang, datatype) {
                (Some(lang), _) => Literal::with_language(value, lang),
                (None, Some(dt)) => Literal::typed(value, dt),
                (None, None) => Literal::simple(value),
            }))
        }
        other => Err(bad(&format!("unknown term type {other}"))),
    }
}

impl QueryResult {
    /// `application/sparql-results+json` document.
    pub fn to_sparql_json(&self) -> Value {
        let bindings: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut m = Map::new();
                for (name, cell) in self.columns.iter().zip(row) {
                    if let Some(t) = cell {
                        m.insert(name.clone(), term_json(t));
                    }
                }
                Value::Object(m)
            })
            .collect();
        json!({"head": {"vars": self.columns}, "results": {"bindings": bindings}})
    }

    pub fn from_sparql_json(body: &[u8], origin: Origin, elapsed: Duration) -> Result<Self, MalformedResults> {
        let doc: Value = serde_json::from_slice(body).map_err(|e| MalformedResults(e.to_string()))?;
        let columns: Vec<String> = doc
            .pointer("/head/vars")
            .and_then(Value::as_array)
            .ok_or_else(|| MalformedResults("missing head.vars".into()))?
            .iter()
            .map(|v| v.as_str().map(str::to_string))
            .collect::<Option<_>>()
            .ok_or_else(|| MalformedResults("non-string variable name".into()))?;
        let bindings = doc
            .pointer("/results/bindings")
            .and_then(Value::as_array)
            .ok_or_else(|| MalformedResults("missing results.bindings".into()))?;
        let mut rows = Vec::with_capacity(bindings.len());
        for b in bindings {
            let b = b.as_object().ok_or_else(|| MalformedResults("binding is not an object".into()))?;
            let row = columns
                .iter()
                .map(|c| b.get(c).map(json_term).transpose())
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        Ok(QueryResult {
            columns,
            rows,
            origin,
            elapsed,
        })
    }
}

mod millis {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_millis() as u64)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        u64::deserialize(d).map(Duration::from_millis)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sparql_json_round_trip() {
        let r = QueryResult {
            columns: vec!["s".into(), "n".into()],
            rows: vec![
                vec![Some(Term::uri("http://x/a1")), Some(Term::Literal(Literal::integer(2)))],
                vec![Some(Term::Literal(Literal::with_language("A", "en"))), None],
            ],
            origin: Origin::Remote,
            elapsed: Duration::ZERO,
        };
        let body = serde_json::to_vec(&r.to_sparql_json()).unwrap();
        let back = QueryResult::from_sparql_json(&body, Origin::Remote, Duration::ZERO).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn rejects_documents_without_bindings() {
        let err = QueryResult::from_sparql_json(br#"{"head":{"vars":[]}}"#, Origin::Remote, Duration::ZERO);
        assert!(err.is_err());
    }
}
