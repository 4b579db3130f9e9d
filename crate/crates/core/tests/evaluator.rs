use std::time::Duration;

use ldx_core::rdf::{Graph, Term};
use ldx_core::sparql::{check, evaluate, evaluate_with, EvalError, EvalOptions, CHUNK_GRAPH};
use ldx_core::Origin;
use ldx_testkit::walk::{sparql_walk, Case};
use ldx_testkit::{ex, g_music, synthetic_triples};

const P: &str = "PREFIX x: <http://x/>\nPREFIX rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#>\nPREFIX rdfs: <http://www.w3.org/2000/01/rdf-schema#>\n";

fn rows(query: &str) -> Vec<Vec<Option<String>>> {
    let g = g_music();
    let r = evaluate(&format!("{P}{query}"), &g).unwrap_or_else(|e| panic!("{e}: {query}"));
    assert_eq!(r.origin, Origin::Embedded);
    r.rows
        .into_iter()
        .map(|row| row.into_iter().map(|c| c.map(|t| t.lexical().to_string())).collect())
        .collect()
}

fn one(s: &str) -> Vec<Option<String>> {
    vec![Some(s.to_string())]
}

#[test]
fn basic_patterns_and_order() {
    assert_eq!(
        rows("SELECT ?s WHERE { ?s rdf:type x:Album } ORDER BY DESC(?s)"),
        vec![one(&ex("a2")), one(&ex("a1"))]
    );
    assert_eq!(rows("SELECT ?s WHERE { ?s x:artist x:bob . ?s x:name ?n }"), vec![one(&ex("a1"))]);
    assert_eq!(rows("SELECT * WHERE { x:a1 x:name \"A1\" }").len(), 1);
    assert_eq!(rows("SELECT ?s WHERE { ?s rdf:type x:Album } LIMIT 1 OFFSET 1"), vec![one(&ex("a2"))]);
}

#[test]
fn optional_and_bound() {
    let r = rows("SELECT ?s ?n WHERE { ?s rdf:type x:Album OPTIONAL { ?s x:name ?n } } ORDER BY ?s");
    assert_eq!(
        r,
        vec![
            vec![Some(ex("a1")), Some("A1".into())],
            vec![Some(ex("a2")), None],
        ]
    );
    let r = rows("SELECT ?s WHERE { ?s rdf:type x:Album OPTIONAL { ?s x:name ?n } FILTER(!BOUND(?n)) }");
    assert_eq!(r, vec![one(&ex("a2"))]);
}

#[test]
fn property_paths() {
    let r = rows("SELECT ?s WHERE { ?s rdf:type/rdfs:subClassOf* x:Work } ORDER BY ?s");
    assert_eq!(r, vec![one(&ex("a1")), one(&ex("a2")), one(&ex("s1"))]);
    let r = rows("SELECT ?c WHERE { ?c rdfs:subClassOf+ x:Work } ORDER BY ?c");
    assert_eq!(r, vec![one(&ex("Album")), one(&ex("Single"))]);
    let r = rows("SELECT ?a WHERE { x:bob ^x:artist ?a } ORDER BY ?a");
    assert_eq!(r, vec![one(&ex("a1")), one(&ex("a2"))]);
}

#[test]
fn aggregates() {
    let r = rows(
        "SELECT ?c (COUNT(DISTINCT ?s) AS ?n) WHERE { ?c rdfs:subClassOf x:Work OPTIONAL { ?s rdf:type ?c } } GROUP BY ?c ORDER BY DESC(?n)",
    );
    assert_eq!(
        r,
        vec![
            vec![Some(ex("Album")), Some("2".into())],
            vec![Some(ex("Single")), Some("1".into())],
        ]
    );
    assert_eq!(rows("SELECT (COUNT(*) AS ?n) WHERE { ?s ?p ?o }"), vec![one("10")]);
    let r = rows("SELECT ?o (SUM(?one) AS ?t) WHERE { ?s x:artist ?o BIND(1 AS ?one) } GROUP BY ?o");
    assert_eq!(r, vec![vec![Some(ex("bob")), Some("2".into())]]);
}

#[test]
fn filters_and_functions() {
    let r = rows("SELECT ?s WHERE { ?s x:name ?n FILTER(isLiteral(?n) && CONTAINS(STR(?n), \"A\")) }");
    assert_eq!(r, vec![one(&ex("a1"))]);
    let r = rows("SELECT ?s WHERE { ?s rdf:type ?c FILTER(?c NOT IN (x:Album, x:Person)) } ORDER BY ?s");
    assert_eq!(r, vec![one(&ex("Work")), one(&ex("s1"))]);
    let r = rows(
        "SELECT ?c WHERE { ?c rdfs:subClassOf ?k FILTER NOT EXISTS { ?k rdfs:subClassOf ?sup } }",
    );
    assert_eq!(r.len(), 2);
    let r = rows("SELECT ?s WHERE { ?s rdf:type ?c FILTER EXISTS { ?c rdfs:subClassOf x:Work } } ORDER BY ?s");
    assert_eq!(r, vec![one(&ex("a1")), one(&ex("a2")), one(&ex("s1"))]);
    let r = rows("SELECT ?v WHERE { BIND(IF(1 < 2, \"yes\", \"no\") AS ?v) }");
    assert_eq!(r, vec![one("yes")]);
}

#[test]
fn subqueries() {
    let r = rows(
        "SELECT ?s ?n WHERE { { SELECT DISTINCT ?s WHERE { ?s rdf:type x:Album } ORDER BY ?s LIMIT 1 } OPTIONAL { ?s x:name ?n } }",
    );
    assert_eq!(r, vec![vec![Some(ex("a1")), Some("A1".into())]]);
}

#[test]
fn unsupported_and_malformed_queries() {
    let union = format!("{P}SELECT ?s WHERE {{ {{ ?s rdf:type x:Album }} UNION {{ ?s rdf:type x:Single }} }}");
    assert!(matches!(check(&union), Err(EvalError::UnsupportedQuery(_))));
    assert!(matches!(evaluate(&union, &g_music()), Err(EvalError::UnsupportedQuery(_))));
    let ask = format!("{P}ASK {{ ?s ?p ?o }}");
    assert!(matches!(check(&ask), Err(EvalError::UnsupportedQuery(_))));
    assert!(matches!(check("SELECT ?s WHERE { ?s"), Err(EvalError::Syntax(_))));
}

#[test]
fn deadline_is_enforced() {
    let g = Graph::build(synthetic_triples(3, 60_000));
    let q = "SELECT (COUNT(*) AS ?n) WHERE { ?a ?p ?b . ?b ?q ?c . ?c ?r ?d }";
    let opts = EvalOptions::default().with_timeout(Duration::from_millis(20));
    assert_eq!(evaluate_with(q, &g, &opts).unwrap_err(), EvalError::Timeout);
}

#[test]
fn chunk_graph_limits_matching_triples() {
    let g = g_music();
    let q = format!("SELECT (COUNT(*) AS ?n) WHERE {{ GRAPH <{CHUNK_GRAPH}> {{ ?s ?p ?o }} }}");
    let mut total = 0;
    for start in (0..g.len()).step_by(3) {
        let opts = EvalOptions {
            chunk: Some(start..(start + 3).min(g.len())),
            ..EvalOptions::default()
        };
        let n = evaluate_with(&q, &g, &opts).unwrap().scalar_count().unwrap();
        assert_eq!(n as usize, (start + 3).min(g.len()) - start);
        total += n;
    }
    assert_eq!(total, 10);
    assert_eq!(evaluate(&q, &g).unwrap().scalar_count(), Some(10));
}

#[test]
fn scan_only_evaluation_matches_indexed_evaluation() {
    for seed in 0..10 {
        let case = Case::random(500 + seed);
        let g = case.graph.clone();
        let run = move |text: &str| {
            let indexed = evaluate(text, &g).map_err(|e| e.to_string())?;
            let scanned = evaluate_with(text, &g, &EvalOptions::scan_only()).map_err(|e| e.to_string())?;
            if indexed.rows != scanned.rows {
                return Err(format!("scan-only result differs for\n{text}"));
            }
            Ok(indexed)
        };
        sparql_walk(&case, 2, 4, &run).unwrap_or_else(|e| panic!("{e}"));
    }
}

#[test]
fn bnode_free_terms_round_trip_through_json() {
    let g = g_music();
    let r = evaluate(&format!("{P}SELECT ?s ?n WHERE {{ ?s x:name ?n }}"), &g).unwrap();
    let json = serde_json::to_vec(&r.to_sparql_json()).unwrap();
    let back = ldx_core::QueryResult::from_sparql_json(&json, Origin::Remote, Duration::ZERO).unwrap();
    assert_eq!(back.rows, r.rows);
    assert_eq!(back.rows[0][1], Some(Term::literal("A1")));
}
