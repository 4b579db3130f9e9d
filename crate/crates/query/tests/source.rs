use std::sync::Arc;

use ldx_core::explore::{BackendFailure, ChartSource, EngineConfig, ExpansionKind, ExploreError, GraphSource, Session};
use ldx_query::{DatasetHandle, EndpointClient, EndpointConfig, ManagerConfig, PlanSource, QueryManager};
use ldx_testkit::mock::Scripted;
use ldx_testkit::walk::{source_walk, sparql_walk, summary, Case, WalkReport};
use ldx_testkit::{ex, g_music, MockEndpoint};

fn manager() -> Arc<QueryManager> {
    Arc::new(QueryManager::new(ManagerConfig::default()).unwrap())
}

fn remote(mock: &MockEndpoint) -> Arc<DatasetHandle> {
    Arc::new(DatasetHandle::remote(EndpointClient::new(EndpointConfig::new(mock.url())).unwrap()))
}

#[test]
fn embedded_plan_source_matches_the_engine() {
    let mut total = WalkReport::default();
    for seed in 0..60 {
        let case = Case::random(2000 + seed);
        let dataset = Arc::new(DatasetHandle::embedded(case.graph.clone()));
        let source = PlanSource::new(manager(), dataset, case.config.clone());
        total.add(source_walk(&case, &source, 4, 4).unwrap_or_else(|e| panic!("{e}")));
    }
    println!("{total:?}");
    assert!(total.charts > 500 && total.tables > 50, "{total:?}");
}

#[test]
fn remote_plan_source_matches_the_engine() {
    let mut total = WalkReport::default();
    for seed in 0..15 {
        let case = Case::random(3000 + seed);
        let mock = MockEndpoint::start(case.graph.clone());
        let source = PlanSource::new(manager(), remote(&mock), case.config.clone());
        total.add(source_walk(&case, &source, 3, 4).unwrap_or_else(|e| panic!("{e}")));
    }
    println!("{total:?}");
    assert!(total.charts > 100, "{total:?}");
}

#[test]
fn generated_queries_agree_over_http() {
    let mut total = WalkReport::default();
    for seed in 0..10 {
        let case = Case::random(4000 + seed);
        let mock = MockEndpoint::start(case.graph.clone());
        let client = EndpointClient::new(EndpointConfig::new(mock.url())).unwrap();
        let run = |text: &str| client.execute(text).map_err(|e| format!("{e}\n{text}"));
        total.add(sparql_walk(&case, 3, 4, &run).unwrap_or_else(|e| panic!("{e}")));
    }
    println!("{total:?}");
    assert!(total.queries > 200, "{total:?}");
}

#[test]
fn remote_sessions_replay_like_local_ones() {
    let g = Arc::new(g_music());
    let mock = MockEndpoint::start(g.clone());
    let config = EngineConfig::with_root(ex("Work"));
    let plans: Arc<dyn ChartSource> = Arc::new(PlanSource::new(manager(), remote(&mock), config.clone()));
    let local: Arc<dyn ChartSource> = Arc::new(GraphSource::new(g, config));

    let mut s = Session::new(plans).unwrap();
    let out = s.expand(0, &ex("Album"), ExpansionKind::PropertyOut).unwrap().id;
    let obj = s.expand(out, &ex("artist"), ExpansionKind::ObjectOut).unwrap().id;
    s.expand(obj, &ex("Person"), ExpansionKind::PropertyIn).unwrap();
    let jump = s.open_class(&ex("Work")).unwrap().id;
    s.expand(jump, &ex("Album"), ExpansionKind::PropertyOut).unwrap();

    let replayed = Session::replay(local, &s.steps()).unwrap();
    let charts = |s: &Session| s.panes().iter().map(|p| summary(&p.chart)).collect::<Vec<_>>();
    assert_eq!(charts(&s), charts(&replayed));
}

#[test]
fn endpoint_failures_surface_as_backend_errors() {
    let mock = MockEndpoint::start(Arc::new(g_music()));
    let source = PlanSource::new(manager(), remote(&mock), EngineConfig::with_root(ex("Work")));
    let root = source.root_bar().unwrap();
    mock.script(&[Scripted::Status(500); 3]);
    let err = source.expand(&root, &ExpansionKind::PropertyOut).unwrap_err();
    assert!(matches!(err, ExploreError::Backend { failure: BackendFailure::Other, .. }), "{err}");
    mock.script(&[Scripted::Status(403)]);
    let err = source.expand(&root, &ExpansionKind::PropertyIn).unwrap_err();
    assert!(matches!(err, ExploreError::Backend { failure: BackendFailure::Http(403), .. }), "{err}");
    // Type errors are caught before any query is sent.
    let before = mock.requests();
    let err = source.expand(&root, &ExpansionKind::ObjectOut).unwrap_err();
    assert!(matches!(err, ExploreError::TypeMismatch { .. }));
    assert_eq!(mock.requests(), before);
}

#[test]
fn streaming_expansion_ends_with_the_full_chart() {
    let g = Arc::new(g_music());
    let config = EngineConfig::with_root(ex("Work"));
    let dataset = Arc::new(DatasetHandle::embedded(g.clone()));
    let local = GraphSource::new(g.clone(), config.clone());
    let want = local.expand(&local.root_bar().unwrap(), &ExpansionKind::PropertyOut).unwrap();
    for (chunk_size, max_chunks, calls) in [(3, 10, 4), (3, 1, 1), (100, 10, 1)] {
        let manager = Arc::new(
            QueryManager::new(ManagerConfig {
                chunk_size,
                max_chunks,
                ..ManagerConfig::default()
            })
            .unwrap(),
        );
        let source = PlanSource::new(manager, dataset.clone(), config.clone());
        let root = source.root_bar().unwrap();
        let mut partials = Vec::new();
        let chart = source
            .expand_streaming(&root, &ExpansionKind::PropertyOut, &mut |c, p| partials.push((c.clone(), p.complete)))
            .unwrap();
        assert_eq!(summary(&chart), summary(&want));
        assert_eq!(partials.len(), calls);
        let (last, complete) = partials.last().unwrap();
        if *complete {
            assert_eq!(summary(last), summary(&want));
        }
    }
}
