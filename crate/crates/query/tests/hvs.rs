use std::io::Write;
use std::time::Duration;

use ldx_core::rdf::{Literal, Term};
use ldx_core::{Origin, QueryResult};
use ldx_query::{HeavyQueryStore, HvsKey};

const SECOND: Duration = Duration::from_secs(1);

fn result(n: usize) -> QueryResult {
    QueryResult {
        columns: vec!["label".into(), "members".into(), "note".into()],
        rows: (0..n)
            .map(|i| {
                vec![
                    Some(Term::uri(format!("http://x/c{i}"))),
                    Some(Term::Literal(Literal::integer(i as u64))),
                    match i % 3 {
                        0 => None,
                        1 => Some(Term::Literal(Literal::with_language(format!("n{i}"), "en"))),
                        _ => Some(Term::literal(format!("plain {i}"))),
                    },
                ]
            })
            .collect(),
        origin: Origin::Embedded,
        elapsed: Duration::from_millis(1500),
    }
}

#[test]
fn only_heavy_results_are_stored() {
    let mut hvs = HeavyQueryStore::new(SECOND);
    assert!(!hvs.offer(HvsKey::new("d", 1, "q1"), &result(2), Duration::from_millis(999)));
    assert!(!hvs.offer(HvsKey::new("d", 1, "q2"), &result(2), SECOND));
    assert!(hvs.offer(HvsKey::new("d", 1, "q3"), &result(2), Duration::from_millis(1001)));
    assert_eq!(hvs.len(), 1);
    assert!(hvs.entries().all(|(_, e)| e.measured_runtime > SECOND));
    assert_eq!(hvs.get(&HvsKey::new("d", 1, "q3")).unwrap().result.rows, result(2).rows);
}

#[test]
fn newer_versions_evict_older_entries_of_the_same_dataset() {
    let mut hvs = HeavyQueryStore::new(SECOND);
    let slow = 2 * SECOND;
    hvs.offer(HvsKey::new("d", 1, "q"), &result(1), slow);
    hvs.offer(HvsKey::new("e", 1, "q"), &result(1), slow);
    hvs.offer(HvsKey::new("d", 2, "r"), &result(1), slow);
    assert!(!hvs.contains(&HvsKey::new("d", 1, "q")));
    assert!(hvs.contains(&HvsKey::new("e", 1, "q")));
    assert_eq!(hvs.retain_version("e", 7), 1);
    assert_eq!(hvs.len(), 1);
    hvs.clear();
    assert!(hvs.is_empty());
    assert_eq!(hvs.bytes(), 0);
}

#[test]
fn byte_cap_evicts_least_recently_used() {
    let mut hvs = HeavyQueryStore::new(SECOND);
    hvs.offer(HvsKey::new("d", 1, "probe"), &result(10), 2 * SECOND);
    let one = hvs.bytes();
    let mut hvs = HeavyQueryStore::new(SECOND).with_max_bytes(one * 2 + one / 2);
    for q in ["a", "b"] {
        hvs.offer(HvsKey::new("d", 1, q), &result(10), 2 * SECOND);
    }
    hvs.get(&HvsKey::new("d", 1, "a"));
    hvs.offer(HvsKey::new("d", 1, "c"), &result(10), 2 * SECOND);
    assert!(hvs.contains(&HvsKey::new("d", 1, "a")));
    assert!(!hvs.contains(&HvsKey::new("d", 1, "b")));
    assert!(hvs.contains(&HvsKey::new("d", 1, "c")));
    assert!(hvs.bytes() <= one * 2 + one / 2);
}

#[test]
fn log_survives_reopening_and_ignores_a_torn_tail() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("hvs.log");
    {
        let mut hvs = HeavyQueryStore::open(&path, SECOND).unwrap();
        hvs.offer(HvsKey::new("d", 3, "q1"), &result(5), 2 * SECOND);
        hvs.offer(HvsKey::new("d", 3, "q2"), &result(0), 3 * SECOND);
        hvs.offer(HvsKey::new("d", 3, "light"), &result(5), SECOND / 2);
    }
    // A record cut short by a crash.
    let mut f = std::fs::OpenOptions::new().append(true).open(&path).unwrap();
    f.write_all(&[200, 0, 0, 0, 1, 2, 3]).unwrap();
    drop(f);

    let mut hvs = HeavyQueryStore::open(&path, SECOND).unwrap();
    assert_eq!(hvs.len(), 2);
    let e = hvs.get(&HvsKey::new("d", 3, "q1")).unwrap().clone();
    assert_eq!(e.result.columns, result(5).columns);
    assert_eq!(e.result.rows, result(5).rows);
    assert_eq!(e.measured_runtime, 2 * SECOND);
    assert!(hvs.get(&HvsKey::new("d", 3, "q2")).unwrap().result.rows.is_empty());

    // Clearing compacts the log.
    hvs.clear();
    drop(hvs);
    assert_eq!(std::fs::metadata(&path).unwrap().len(), 0);
    assert!(HeavyQueryStore::open(&path, SECOND).unwrap().is_empty());
}
