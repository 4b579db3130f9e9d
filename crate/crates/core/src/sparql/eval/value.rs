use std::cmp::Ordering;
use std::sync::Arc;

use crate::rdf::vocab::xsd;
use crate::rdf::{Graph, Literal, Term, TermId};

/// A bound value: an interned graph term or a term computed by the query.
/// Computed terms that also occur in the graph are always stored as `Id`, so
/// value equality is term equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Value {
    Id(TermId),
    Owned(Arc<Term>),
}

impl Value {
    pub fn from_term(graph: &Graph, term: Term) -> Value {
        match graph.lookup(&term) {
            Some(id) => Value::Id(id),
            None => Value::Owned(Arc::new(term)),
        }
    }

    pub fn term<'a>(&'a self, graph: &'a Graph) -> &'a Term {
        match self {
            Value::Id(id) => graph.term(*id),
            Value::Owned(t) => t,
        }
    }

    pub fn id(&self) -> Option<TermId> {
        match self {
            Value::Id(id) => Some(*id),
            Value::Owned(_) => None,
        }
    }
}

pub type Solution = Box<[Option<Value>]>;

pub fn boolean(b: bool) -> Term {
    Term::Literal(Literal::typed(if b { "true" } else { "false" }, xsd("boolean")))
}

pub fn integer(n: i64) -> Term {
    Term::Literal(Literal::typed(n.to_string(), xsd("integer")))
}

pub fn double(v: f64) -> Term {
    let lexical = if v.is_nan() {
        "NaN".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "INF" } else { "-INF" }.to_string()
    } else {
        format!("{v:?}")
    };
    Term::Literal(Literal::typed(lexical, xsd("double")))
}

/// Effective boolean value; `None` is a type error.
pub fn ebv(t: &Term) -> Option<bool> {
    let lit = t.as_literal()?;
    match lit.datatype.as_deref() {
        Some(dt) if dt == xsd("boolean") => match lit.lexical.as_str() {
            "true" | "1" => Some(true),
            "false" | "0" => Some(false),
            _ => Some(false),
        },
        Some(dt) if crate::rdf::is_numeric_datatype(dt) => {
            Some(lit.numeric_value().is_some_and(|v| v != 0.0 && !v.is_nan()))
        }
        None if lit.language.is_none() => Some(!lit.lexical.is_empty()),
        _ => None,
    }
}

/// Total order used by ORDER BY and MIN/MAX: unbound, then IRIs, then
/// literals. Numeric literals compare by value; other literals by lexical
/// form, language and datatype.
pub fn term_order(a: Option<&Term>, b: Option<&Term>) -> Ordering {
    match (a, b) {
        (None, None) => Ordering::Equal,
        (None, Some(_)) => Ordering::Less,
        (Some(_), None) => Ordering::Greater,
        (Some(Term::Uri(x)), Some(Term::Uri(y))) => x.cmp(y),
        (Some(Term::Uri(_)), Some(Term::Literal(_))) => Ordering::Less,
        (Some(Term::Literal(_)), Some(Term::Uri(_))) => Ordering::Greater,
        // Numeric literals come first, by value; the rest by lexical form.
        (Some(Term::Literal(x)), Some(Term::Literal(y))) => match (x.numeric_value(), y.numeric_value()) {
            (Some(p), Some(q)) => p.total_cmp(&q).then_with(|| literal_order(x, y)),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => literal_order(x, y),
        },
    }
}

fn literal_order(x: &Literal, y: &Literal) -> Ordering {
    x.lexical
        .cmp(&y.lexical)
        .then_with(|| x.language.cmp(&y.language))
        .then_with(|| x.datatype.cmp(&y.datatype))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_puts_unbound_then_iris_then_literals() {
        let iri = Term::uri("http://x/a");
        let lit = Term::literal("a");
        assert_eq!(term_order(None, Some(&iri)), Ordering::Less);
        assert_eq!(term_order(Some(&iri), Some(&lit)), Ordering::Less);
        assert_eq!(term_order(Some(&integer(10)), Some(&integer(9))), Ordering::Greater);
        assert_eq!(term_order(Some(&double(2.5)), Some(&integer(3))), Ordering::Less);
    }

    #[test]
    fn effective_boolean_values() {
        assert_eq!(ebv(&boolean(true)), Some(true));
        assert_eq!(ebv(&integer(0)), Some(false));
        assert_eq!(ebv(&Term::literal("")), Some(false));
        assert_eq!(ebv(&Term::literal("x")), Some(true));
        assert_eq!(ebv(&Term::uri("http://x")), None);
    }
}
