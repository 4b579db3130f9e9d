//! RDF terms, N-Triples ingestion and the indexed in-memory graph.

mod graph;
mod label;
pub mod ntriples;
mod term;
pub mod vocab;

pub use graph::{ClassEntry, DatasetStats, Graph, Triple, Vocab};
pub use label::{LabelPreference, LangChoice};
pub use ntriples::{parse_ntriples, parse_ntriples_str, write_ntriples, ParseError, RdfTriple};
pub use term::{is_numeric_datatype, local_name, Literal, Term, TermId};
