//! Query generation and the embedded evaluator.

pub mod eval;
mod gen;

pub use eval::{
    check, evaluate, evaluate_with, term_order, EvalError, EvalOptions, Memo, PreparedQuery,
};
pub use gen::*;

/// Normalized query text used for cache keys: the parser's serialization when
/// the text parses, otherwise the text with whitespace runs collapsed.
pub fn canonical_key(text: &str) -> String {
    match spargebra::SparqlParser::new().parse_query(text) {
        Ok(query) => query.to_string(),
        Err(_) => text.split_whitespace().collect::<Vec<_>>().join(" "),
    }
}
