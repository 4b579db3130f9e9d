//! Engine charts on random graphs against the brute-force oracle, and
//! generated SPARQL on the embedded evaluator against the engine.

use ldx_testkit::walk::{embedded_runner, oracle_walk, sparql_walk, Case, WalkReport};

#[test]
fn random_graphs_match_the_oracle() {
    let mut total = WalkReport::default();
    for seed in 0..200 {
        let case = Case::random(seed);
        match oracle_walk(&case, 4, 4) {
            Ok(r) => total.add(r),
            Err(e) => panic!("{e}"),
        }
    }
    println!("{total:?}");
    assert!(total.charts > 1000, "{total:?}");
    assert!(total.tables > 50, "{total:?}");
}

#[test]
fn generated_queries_reproduce_engine_results() {
    let mut total = WalkReport::default();
    for seed in 0..50 {
        let case = Case::random(1000 + seed);
        let run = embedded_runner(&case.graph);
        match sparql_walk(&case, 4, 5, &run) {
            Ok(r) => total.add(r),
            Err(e) => panic!("{e}"),
        }
    }
    println!("{total:?}");
    assert!(total.queries > 500, "{total:?}");
}
