//! Core of the linked-data explorer: the RDF graph, the bar-chart
//! exploration engine, SPARQL generation and an embedded SPARQL evaluator.

pub mod explore;
pub mod rdf;
pub mod results;
pub mod sparql;

pub use results::{MalformedResults, Origin, QueryResult};
