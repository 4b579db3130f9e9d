//! The music fixture: every expected value is recomputed by the oracle and
//! also pinned by hand.

use std::collections::BTreeSet;
use std::sync::Arc;

use ldx_core::explore::{
    threshold_view, Bar, BarLabel, BarType, Comparator, Direction, Engine, EngineConfig, ExpansionKind,
    ExploreError, FilterCondition, FilterValue, GraphSource, Lineage, Members, ParentRef, Session, TableRequest,
};
use ldx_core::rdf::vocab::{OWL_THING, RDFS_CLASS, RDF_TYPE};
use ldx_core::rdf::{Graph, RdfTriple, Term};
use ldx_core::sparql::{self, evaluate, ChartSpec};
use ldx_testkit::{ex, g_music, g_music_triples, observe, Oracle, OracleChart};

fn uris(locals: &[&str]) -> BTreeSet<Term> {
    locals.iter().map(|l| Term::uri(ex(l))).collect()
}

fn counts(chart: &OracleChart) -> Vec<(String, usize)> {
    chart.counts()
}

fn work_config() -> EngineConfig {
    EngineConfig::with_root(ex("Work"))
}

fn bar_of(graph: &Graph, label: &str, bar_type: BarType, locals: &[&str], lineage: Lineage) -> Bar {
    let ids = locals
        .iter()
        .map(|l| graph.lookup_uri(&ex(l)).expect("fixture term"))
        .collect();
    Bar {
        label: BarLabel::Uri(label.to_string()),
        bar_type,
        members: Members::set(ids),
        lineage: Arc::new(lineage),
    }
}

fn album_bar(graph: &Graph) -> Bar {
    bar_of(
        graph,
        &ex("Album"),
        BarType::Class,
        &["a1", "a2"],
        Lineage::Subclass {
            parent: Arc::new(Lineage::ClassTree { class: ex("Work") }),
            class: ex("Album"),
        },
    )
}

#[test]
fn graph_counts_and_stats() {
    let g = g_music();
    assert_eq!(g.len(), 10);
    assert_eq!(g.len(), g_music_triples().len());
    let stats = g.stats();
    assert_eq!((stats.triple_count, stats.class_count), (10, 1));
    assert_eq!(Oracle::new(&g_music_triples()).stats(), (10, 1));

    let more = g.appended([RdfTriple::new(
        Term::uri(ex("Person")),
        Term::uri(RDF_TYPE),
        Term::uri(RDFS_CLASS),
    )]);
    assert_eq!((more.stats().triple_count, more.stats().class_count), (11, 2));
    assert_eq!(more.version(), g.version() + 1);
}

#[test]
fn class_list() {
    let g = g_music();
    let list: Vec<(String, String)> = g.list_classes().into_iter().map(|c| (c.uri, c.label)).collect();
    assert_eq!(list, vec![(ex("Work"), "Work".to_string())]);
    assert_eq!(list, Oracle::new(&g_music_triples()).list_classes());
}

#[test]
fn initial_chart_under_work() {
    let g = g_music();
    let config = work_config();
    let chart = Engine::new(&g, &config).initial_chart();
    let observed = observe(&g, &chart);
    assert_eq!(observed, Oracle::new(&g_music_triples()).initial_chart(&ex("Work")));
    assert_eq!(observed.bars[&ex("Album")].members, uris(&["a1", "a2"]));
    assert_eq!(observed.bars[&ex("Single")].members, uris(&["s1"]));
    assert_eq!(observed.bars.len(), 2);
}

#[test]
fn fallback_chart_without_root() {
    let g = g_music();
    let config = EngineConfig::with_root(OWL_THING);
    let engine = Engine::new(&g, &config);
    assert!(engine.uses_fallback());
    let chart = engine.initial_chart();
    let observed = observe(&g, &chart);
    assert_eq!(observed, Oracle::new(&g_music_triples()).initial_chart(OWL_THING));
    assert_eq!(counts(&observed), vec![(ex("Work"), 0)]);

    // The Work subtree is still reachable from the fallback bar.
    let work = &chart.get_str(&ex("Work")).unwrap().bar;
    let sub = engine.subclass_expansion(work).unwrap();
    assert_eq!(sub.len(), 2);
    let jumped = engine.class_bar(&ex("Work")).unwrap();
    let sub = engine.subclass_expansion(&jumped).unwrap();
    assert_eq!(
        counts(&observe(&g, &sub)),
        vec![(ex("Album"), 2), (ex("Single"), 1)]
    );
}

#[test]
fn subclass_expansion_intersects_with_members() {
    let g = g_music();
    let config = work_config();
    let engine = Engine::new(&g, &config);
    let oracle = Oracle::new(&g_music_triples());
    let tree = Lineage::ClassTree { class: ex("Work") };

    let full = bar_of(&g, &ex("Work"), BarType::Class, &["a1", "a2", "s1"], tree.clone());
    let chart = observe(&g, &engine.subclass_expansion(&full).unwrap());
    assert_eq!(chart, oracle.subclass_chart(&uris(&["a1", "a2", "s1"]), &ex("Work")));
    assert_eq!(counts(&chart), vec![(ex("Album"), 2), (ex("Single"), 1)]);

    let narrow = bar_of(&g, &ex("Work"), BarType::Class, &["a1"], tree);
    let chart = observe(&g, &engine.subclass_expansion(&narrow).unwrap());
    assert_eq!(chart, oracle.subclass_chart(&uris(&["a1"]), &ex("Work")));
    assert_eq!(chart.bars[&ex("Album")].members, uris(&["a1"]));
    assert!(chart.bars[&ex("Single")].members.is_empty());
}

#[test]
fn outgoing_properties_of_albums() {
    let g = g_music();
    let config = work_config();
    let chart = Engine::new(&g, &config)
        .property_expansion(&album_bar(&g), Direction::Outgoing)
        .unwrap();
    let oracle = Oracle::new(&g_music_triples()).property_chart(&uris(&["a1", "a2"]), Direction::Outgoing, &[]);
    assert_eq!(observe(&g, &chart), oracle);

    let metrics = |p: &str| {
        let m = &chart.get_str(p).unwrap().metrics;
        (m.coverage, m.average_per_instance)
    };
    assert_eq!(chart.len(), 3);
    assert_eq!(metrics(RDF_TYPE), (1.0, 1.0));
    assert_eq!(metrics(&ex("artist")), (1.0, 1.0));
    assert_eq!(metrics(&ex("name")), (0.5, 1.0));
}

#[test]
fn incoming_properties_of_person() {
    let g = g_music();
    let config = work_config();
    let person = bar_of(&g, &ex("Person"), BarType::Class, &["bob"], Lineage::DirectClass { class: ex("Person") });
    let chart = Engine::new(&g, &config)
        .property_expansion(&person, Direction::Incoming)
        .unwrap();
    let oracle = Oracle::new(&g_music_triples()).property_chart(&uris(&["bob"]), Direction::Incoming, &[]);
    assert_eq!(observe(&g, &chart), oracle);
    assert_eq!(chart.len(), 1);
    let m = &chart.get_str(&ex("artist")).unwrap().metrics;
    assert_eq!((m.coverage, m.average_per_instance), (1.0, 2.0));
}

fn property_bar(g: &Graph, predicate: &str, locals: &[&str]) -> Bar {
    bar_of(
        g,
        &ex(predicate),
        BarType::Property,
        locals,
        Lineage::Property {
            parent: album_bar(g).lineage,
            predicate: ex(predicate),
            direction: Direction::Outgoing,
        },
    )
}

#[test]
fn object_expansions() {
    let g = g_music();
    let config = work_config();
    let engine = Engine::new(&g, &config);
    let oracle = Oracle::new(&g_music_triples());

    let artist = property_bar(&g, "artist", &["a1", "a2"]);
    let chart = observe(&g, &engine.object_expansion(&artist, Direction::Outgoing).unwrap());
    assert_eq!(chart, oracle.object_chart(&uris(&["a1", "a2"]), &ex("artist"), Direction::Outgoing));
    assert_eq!(counts(&chart), vec![(ex("Person"), 1)]);
    assert_eq!(chart.bars[&ex("Person")].members, uris(&["bob"]));

    let name = property_bar(&g, "name", &["a1"]);
    let chart = observe(&g, &engine.object_expansion(&name, Direction::Outgoing).unwrap());
    assert_eq!(chart, oracle.object_chart(&uris(&["a1"]), &ex("name"), Direction::Outgoing));
    assert_eq!(counts(&chart), vec![("«literal»".to_string(), 1)]);
}

#[test]
fn filter_on_artist() {
    let g = g_music();
    let config = work_config();
    let engine = Engine::new(&g, &config);
    let work = engine.root_bar();
    let cond = FilterCondition::new(ex("artist"), Comparator::Equals, FilterValue::uri(ex("bob")));
    let filtered = engine.apply_filter(&work, std::slice::from_ref(&cond)).unwrap();
    let got: BTreeSet<Term> = filtered.members.as_set().unwrap().iter().map(|id| g.term(*id).clone()).collect();
    assert_eq!(got, uris(&["a1", "a2"]));
    assert_eq!(got, Oracle::new(&g_music_triples()).filter(&uris(&["a1", "a2", "s1"]), &[cond]));
    assert_eq!(filtered.label, work.label);
    assert_eq!(filtered.bar_type, BarType::Class);
}

#[test]
fn album_table() {
    let g = g_music();
    let config = work_config();
    let request = TableRequest::columns(&[&ex("name"), &ex("artist")]);
    let table = Engine::new(&g, &config).instance_table(&album_bar(&g), &request).unwrap();
    let rows: Vec<(String, Vec<Vec<Term>>)> = table.rows.iter().map(|r| (r.subject.clone(), r.cells.clone())).collect();
    let (expected, total) =
        Oracle::new(&g_music_triples()).table(&uris(&["a1", "a2"]), &request.columns, &[], request.limit, 0);
    assert_eq!(rows, expected);
    assert_eq!(table.total, total);
    assert_eq!(
        rows,
        vec![
            (ex("a1"), vec![vec![Term::literal("A1")], vec![Term::uri(ex("bob"))]]),
            (ex("a2"), vec![vec![], vec![Term::uri(ex("bob"))]]),
        ]
    );
    assert_eq!(table.rows[1].display_cell(0), "");
}

#[test]
fn threshold_on_album_properties() {
    let g = g_music();
    let config = work_config();
    let chart = Engine::new(&g, &config)
        .property_expansion(&album_bar(&g), Direction::Outgoing)
        .unwrap();
    let low = threshold_view(&chart, 0.2);
    assert_eq!((low.visible.len(), low.hidden_count), (3, 0));
    let high = threshold_view(&chart, 0.6);
    assert_eq!((high.visible.len(), high.hidden_count), (2, 1));
    let shown: BTreeSet<String> = high.visible.labels().map(|l| l.to_string()).collect();
    assert_eq!(shown, BTreeSet::from([RDF_TYPE.to_string(), ex("artist")]));
}

fn session() -> Session {
    let source = GraphSource::new(Arc::new(g_music()), work_config());
    Session::new(Arc::new(source)).unwrap()
}

#[test]
fn session_panes() {
    let mut s = session();
    let empty = s.expand(0, &ex("Album"), ExpansionKind::Subclass).unwrap();
    assert!(empty.chart.is_empty());
    assert_eq!(empty.breadcrumb.len(), 2);

    let props = s.expand(0, &ex("Album"), ExpansionKind::PropertyOut).unwrap().chart.clone();
    let g = g_music();
    let config = work_config();
    let direct = Engine::new(&g, &config)
        .property_expansion(&album_bar(&g), Direction::Outgoing)
        .unwrap();
    assert_eq!(observe(&g, &props), observe(&g, &direct));
    assert!(s.validate().is_ok());
}

#[test]
fn open_class_jumps() {
    let mut s = session();
    let g = g_music();
    let pane = s.open_class(&ex("Work")).unwrap();
    assert_eq!(pane.step.parent, ParentRef::Jump);
    let members: BTreeSet<Term> = pane.focus.members.as_set().unwrap().iter().map(|id| g.term(*id).clone()).collect();
    assert_eq!(members, uris(&["a1", "a2", "s1"]));
    assert_eq!(members, Oracle::new(&g_music_triples()).transitive_instances(&ex("Work")));

    let album = s.open_class(&ex("Album"));
    assert!(matches!(album, Err(ExploreError::UnknownClass(_))), "Album is not declared");
    let engine_config = work_config();
    let engine = Engine::new(&g, &engine_config);
    let via_tree = engine.initial_chart();
    assert_eq!(via_tree.get_str(&ex("Album")).unwrap().bar.len(), 2);
}

#[test]
fn generated_queries_run_on_the_fixture() {
    let g = g_music();
    let album = album_bar(&g);

    let plan = sparql::bar_query(&album.lineage).unwrap();
    assert!(plan.text.contains(&format!("?s rdf:type <{}> .", ex("Album"))));
    let rows = evaluate(&plan.text, &g).unwrap();
    let got: BTreeSet<Term> = rows.rows.iter().filter_map(|r| r[0].clone()).collect();
    assert_eq!(got, uris(&["a1", "a2"]));

    // Scientists-influencing-philosophers shape: Album --artist--> Person.
    let person = Lineage::Object {
        parent: Arc::new(Lineage::Property {
            parent: album.lineage.clone(),
            predicate: ex("artist"),
            direction: Direction::Outgoing,
        }),
        class: BarLabel::Uri(ex("Person")),
        direction: Direction::Outgoing,
    };
    let plan = sparql::bar_query(&Arc::new(person)).unwrap();
    let rows = evaluate(&plan.text, &g).unwrap();
    assert_eq!(rows.rows, vec![vec![Some(Term::uri(ex("bob")))]]);

    let work = Arc::new(Lineage::ClassTree { class: ex("Work") });
    let plan = sparql::chart_query(ChartSpec {
        label: BarLabel::Uri(ex("Work")),
        lineage: work,
        kind: ldx_core::explore::ChartKind::Subclass,
        excluded: Vec::new(),
    })
    .unwrap();
    let rows = evaluate(&plan.text, &g).unwrap();
    let pairs: Vec<(String, u64)> = rows
        .rows
        .iter()
        .map(|r| (r[0].as_ref().unwrap().lexical().to_string(), r[1].as_ref().unwrap().numeric_value().unwrap() as u64))
        .collect();
    assert_eq!(pairs, vec![(ex("Album"), 2), (ex("Single"), 1)]);

    let plan = sparql::chart_query(ChartSpec {
        label: BarLabel::Uri(ex("artist")),
        lineage: Arc::new(Lineage::Property {
            parent: album.lineage.clone(),
            predicate: ex("artist"),
            direction: Direction::Outgoing,
        }),
        kind: ldx_core::explore::ChartKind::ObjectOut,
        excluded: Vec::new(),
    })
    .unwrap();
    let rows = evaluate(&plan.text, &g).unwrap();
    assert_eq!(rows.rows.len(), 1);
    assert_eq!(rows.rows[0][0], Some(Term::uri(ex("Person"))));
    assert_eq!(rows.rows[0][1].as_ref().unwrap().numeric_value(), Some(1.0));
}

#[test]
fn filtered_table_query_matches_instance_table() {
    let g = g_music();
    let config = work_config();
    let engine = Engine::new(&g, &config);
    let mut request = TableRequest::columns(&[&ex("name"), &ex("artist")]);
    request.filters = vec![FilterCondition::new(ex("artist"), Comparator::Equals, FilterValue::uri(ex("bob")))];
    let run = ldx_testkit::embedded_runner(&g);
    assert_eq!(
        ldx_testkit::walk::check_table_query(&engine, &album_bar(&g), &request, &run),
        Ok(1)
    );
    assert_eq!(engine.instance_table(&album_bar(&g), &request).unwrap().rows.len(), 2);
}

#[test]
fn pseudo_bars_do_not_expand() {
    let g = g_music();
    let config = work_config();
    let engine = Engine::new(&g, &config);
    let name = property_bar(&g, "name", &["a1"]);
    let chart = engine.object_expansion(&name, Direction::Outgoing).unwrap();
    let literal = &chart.bars()[0].bar;
    assert!(literal.label.is_pseudo());
    assert!(matches!(
        engine.property_expansion(literal, Direction::Outgoing),
        Err(ExploreError::NotExpandable(_))
    ));
    assert!(sparql::bar_query(&literal.lineage).is_err());
}
