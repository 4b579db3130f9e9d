//! Shared test support: the music fixture, seeded random graphs, a
//! brute-force oracle over raw triple lists and a mock SPARQL endpoint.

pub mod fixture;
pub mod fuzz;
pub mod mock;
pub mod oracle;
pub mod random;
pub mod walk;

pub use fixture::{ex, g_music, g_music_triples, G_MUSIC_NT};
pub use mock::MockEndpoint;
pub use oracle::{observe, Oracle, OracleBar, OracleChart};
pub use random::{random_triples, synthetic_triples, RandomGraphSpec};
pub use walk::{embedded_runner, oracle_walk, source_walk, sparql_walk, summary, Case, ChartSummary, WalkReport};
pub use fuzz::{session_fuzz, FuzzReport};
