use std::sync::Arc;

use ldx_core::explore::{Bar, BarType, ChartKind, ExpansionKind, Lineage, TableRequest};
use ldx_core::sparql::{chart_query, evaluate, table_query, ChartSpec, QueryPlan};
use ldx_query::{
    execute_incremental, DatasetHandle, EndpointClient, EndpointConfig, IncrementalOptions, ManagerConfig, Progress,
    QueryError, QueryManager,
};
use ldx_testkit::walk::Case;
use ldx_testkit::{ex, g_music, MockEndpoint};

fn plan(bar: &Bar, kind: ChartKind, excluded: &[String]) -> QueryPlan {
    chart_query(ChartSpec {
        label: bar.label.clone(),
        lineage: bar.lineage.clone(),
        kind,
        excluded: excluded.to_vec(),
    })
    .unwrap()
}

/// Chart plans for the root bar, the initial chart's bars and one level of
/// property and object charts below them.
fn chart_plans(case: &Case) -> Vec<QueryPlan> {
    let engine = case.engine();
    let excluded: Vec<String> = case.config.excluded_predicates.iter().cloned().collect();
    let mut class_bars = vec![engine.root_bar()];
    class_bars.extend(engine.initial_chart().bars().iter().take(3).map(|b| b.bar.clone()));
    let mut plans = Vec::new();
    for bar in &class_bars {
        for kind in [ChartKind::Subclass, ChartKind::PropertyOut, ChartKind::PropertyIn] {
            plans.push(plan(bar, kind, &excluded));
        }
        for expansion in [ExpansionKind::PropertyOut, ExpansionKind::PropertyIn] {
            let chart = engine.expand(bar, &expansion).unwrap();
            for p in chart.bars().iter().take(2) {
                assert_eq!(p.bar.bar_type, BarType::Property);
                plans.push(plan(&p.bar, ChartKind::ObjectOut, &excluded));
                plans.push(plan(&p.bar, ChartKind::ObjectIn, &excluded));
            }
        }
    }
    plans
}

fn unbounded(chunk_size: usize) -> IncrementalOptions {
    IncrementalOptions {
        chunk_size,
        max_chunks: None,
        timeout: None,
    }
}

#[test]
fn merged_chunks_equal_batch_results() {
    let mut compared = 0;
    for seed in 0..50 {
        let case = Case::random(500 + seed);
        let dataset = DatasetHandle::embedded(case.graph.clone());
        for p in chart_plans(&case) {
            let batch = evaluate(&p.text, &case.graph).unwrap();
            for n in [1, 7, 1000] {
                let mut calls = 0;
                let progress = execute_incremental(&dataset, &p, &unbounded(n), &mut |_| calls += 1).unwrap();
                assert!(progress.complete);
                assert_eq!(progress.fraction, 1.0);
                assert_eq!(calls, progress.chunks_total);
                assert_eq!(progress.result.columns, batch.columns);
                assert_eq!(progress.result.rows, batch.rows, "seed {seed}, N = {n}\n{}", p.text);
                compared += 1;
            }
        }
    }
    assert!(compared > 1000, "{compared}");
}

fn work_property_plan() -> QueryPlan {
    let engine_bar = Bar {
        label: ldx_core::explore::BarLabel::Uri(ex("Work")),
        bar_type: BarType::Class,
        members: ldx_core::explore::Members::Count(3),
        lineage: Arc::new(Lineage::ClassTree { class: ex("Work") }),
    };
    plan(&engine_bar, ChartKind::PropertyOut, &[])
}

#[test]
fn early_stop_reports_the_covered_fraction() {
    let dataset = DatasetHandle::embedded(g_music());
    let p = work_property_plan();
    let options = IncrementalOptions {
        chunk_size: 3,
        max_chunks: Some(1),
        timeout: None,
    };
    let progress = execute_incremental(&dataset, &p, &options, &mut |_| {}).unwrap();
    assert!(!progress.complete);
    assert_eq!(progress.chunks_done, 1);
    assert_eq!(progress.chunks_total, 4);
    assert!((progress.fraction - 0.3).abs() < 1e-12);

    // Fraction after k chunks is min(1, kN/|G|).
    for (n, k) in [(1, 4), (3, 3), (4, 2), (4, 3), (7, 1), (20, 1)] {
        let options = IncrementalOptions {
            chunk_size: n,
            max_chunks: Some(k),
            timeout: None,
        };
        let progress = execute_incremental(&dataset, &p, &options, &mut |_| {}).unwrap();
        let want = ((k * n) as f64 / 10.0).min(1.0);
        assert_eq!(progress.fraction, want, "N = {n}, k = {k}");
        assert_eq!(progress.complete, want == 1.0);
    }
}

#[test]
fn single_chunk_reports_once() {
    let dataset = DatasetHandle::embedded(g_music());
    let p = work_property_plan();
    let mut seen: Vec<Progress> = Vec::new();
    let last = execute_incremental(&dataset, &p, &unbounded(10), &mut |p| seen.push(p.clone())).unwrap();
    assert_eq!(seen.len(), 1);
    assert_eq!(seen[0], last);
    assert_eq!(last.result.rows, evaluate(&p.text, &dataset.graph().unwrap()).unwrap().rows);
}

#[test]
fn partial_charts_grow_monotonically() {
    let dataset = DatasetHandle::embedded(g_music());
    let p = work_property_plan();
    let mut sizes = Vec::new();
    execute_incremental(&dataset, &p, &unbounded(2), &mut |p| {
        let total: u64 = p.result.rows.iter().map(|r| r[2].as_ref().unwrap().numeric_value().unwrap() as u64).sum();
        sizes.push((p.fraction, total));
    })
    .unwrap();
    assert_eq!(sizes.len(), 5);
    assert!(sizes.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 <= w[1].1), "{sizes:?}");
}

#[test]
fn only_chart_aggregates_are_distributive() {
    let dataset = DatasetHandle::embedded(g_music());
    let table = table_query(
        &Arc::new(Lineage::ClassTree { class: ex("Work") }),
        &TableRequest::columns(&[&ex("name")]),
    )
    .unwrap();
    let err = execute_incremental(&dataset, &table, &unbounded(3), &mut |_| {}).unwrap_err();
    assert!(matches!(err, QueryError::NotDistributive(_)), "{err}");
}

#[test]
fn remote_paging_merges_to_the_batch_result() {
    for seed in 0..10 {
        let case = Case::random(700 + seed);
        let mock = MockEndpoint::start(case.graph.clone());
        let dataset = DatasetHandle::remote(EndpointClient::new(EndpointConfig::new(mock.url())).unwrap());
        for p in chart_plans(&case).into_iter().take(6) {
            let batch = evaluate(&p.text, &case.graph).unwrap();
            for n in [1, 7] {
                let progress = execute_incremental(&dataset, &p, &unbounded(n), &mut |_| {}).unwrap();
                assert!(progress.complete);
                assert_eq!(progress.result.rows, batch.rows, "seed {seed}, N = {n}\n{}", p.text);
            }
        }
    }
}

#[test]
fn manager_caches_complete_heavy_incremental_results() {
    let dataset = DatasetHandle::embedded(g_music());
    dataset.set_hook(Some(Arc::new(|_| std::thread::sleep(std::time::Duration::from_millis(20)))));
    let manager = QueryManager::new(ManagerConfig {
        heavy_threshold: std::time::Duration::from_millis(50),
        chunk_size: 3,
        max_chunks: 10,
        ..ManagerConfig::default()
    })
    .unwrap();
    let p = work_property_plan();
    let first = manager.execute_incremental(&p, &dataset, &mut |_| {}).unwrap();
    assert!(first.complete);
    let mut calls = 0;
    let second = manager.execute_incremental(&p, &dataset, &mut |_| calls += 1).unwrap();
    assert_eq!(calls, 1);
    assert_eq!(second.result.origin, ldx_core::Origin::Cache);
    assert_eq!(second.result.rows, first.result.rows);
}
