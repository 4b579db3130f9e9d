//! Random exploration paths. Each visited chart is checked against the
//! oracle, and each generated query is run through a caller-supplied
//! backend and compared with the engine.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use ldx_core::explore::{
    Bar, BarMetrics, BarType, Chart, ChartKind, ChartSource, Comparator, Direction, Engine, EngineConfig,
    ExpansionKind, ExploreError, FilterCondition, FilterValue, GraphSource, Lineage, Members, TableRequest,
};
use ldx_core::rdf::vocab::OWL_THING;
use ldx_core::rdf::{Graph, RdfTriple, Term};
use ldx_core::sparql::{self, ChartSpec};
use ldx_core::QueryResult;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::oracle::{observe, Oracle, OracleBar, OracleChart};
use crate::random::{self, random_triples, RandomGraphSpec};

/// Runs one query text and returns its result table.
pub type Runner<'a> = &'a dyn Fn(&str) -> Result<QueryResult, String>;

/// A seeded random dataset with its engine configuration.
pub struct Case {
    pub seed: u64,
    pub triples: Vec<RdfTriple>,
    pub graph: Arc<Graph>,
    pub oracle: Oracle,
    pub config: EngineConfig,
}

impl Case {
    /// Random graph, root (a class or the absent owl:Thing) and, sometimes,
    /// an excluded predicate.
    pub fn random(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
        let spec = RandomGraphSpec::sample(&mut rng);
        let triples = random_triples(seed, &spec);
        let root = if rng.gen_bool(0.6) {
            random::class(rng.gen_range(0..spec.classes))
        } else {
            OWL_THING.to_string()
        };
        let mut config = EngineConfig::with_root(root);
        if rng.gen_bool(0.2) {
            config.excluded_predicates.insert(random::predicate(0));
        }
        Case::new(seed, triples, config)
    }

    pub fn new(seed: u64, triples: Vec<RdfTriple>, config: EngineConfig) -> Self {
        let graph = Arc::new(Graph::build(triples.clone()));
        let oracle = Oracle::new(&triples);
        Case {
            seed,
            triples,
            graph,
            oracle,
            config,
        }
    }

    pub fn engine(&self) -> Engine<'_> {
        Engine::new(&self.graph, &self.config)
    }

    fn excluded(&self) -> Vec<String> {
        self.config.excluded_predicates.iter().cloned().collect()
    }
}

/// Tally of the comparisons made by a walk.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct WalkReport {
    pub charts: usize,
    pub tables: usize,
    pub queries: usize,
}

impl WalkReport {
    pub fn add(&mut self, other: WalkReport) {
        self.charts += other.charts;
        self.tables += other.tables;
        self.queries += other.queries;
    }
}

fn members(graph: &Graph, bar: &Bar) -> BTreeSet<Term> {
    bar.members
        .as_set()
        .map(|s| s.iter().map(|id| graph.term(*id).clone()).collect())
        .unwrap_or_default()
}

fn diff(what: &str, engine: &OracleChart, oracle: &OracleChart) -> Result<(), String> {
    if engine == oracle {
        return Ok(());
    }
    if engine.parent_size != oracle.parent_size {
        return Err(format!(
            "{what}: parent size {} vs oracle {}",
            engine.parent_size, oracle.parent_size
        ));
    }
    let labels: BTreeSet<&String> = engine.bars.keys().chain(oracle.bars.keys()).collect();
    for l in labels {
        let (e, o) = (engine.bars.get(l), oracle.bars.get(l));
        if e != o {
            return Err(format!("{what}: bar {l} is {e:?}, oracle says {o:?}"));
        }
    }
    Err(format!("{what}: charts differ"))
}

/// Metrics must be consistent with the bar's own members.
fn check_metrics(what: &str, chart: &Chart) -> Result<(), String> {
    let parent = chart.parent_size();
    for b in chart.bars() {
        let n = b.bar.len();
        let m = &b.metrics;
        let coverage = if parent == 0 { 0.0 } else { n as f64 / parent as f64 };
        let average = if n == 0 { 0.0 } else { m.occurrence_count as f64 / n as f64 };
        if m.instance_count != n || m.coverage != coverage || m.average_per_instance != average {
            return Err(format!("{what}: inconsistent metrics on {}: {m:?}", b.bar.label));
        }
    }
    Ok(())
}

fn oracle_expansion(case: &Case, label: &str, s: &BTreeSet<Term>, kind: &ExpansionKind) -> OracleChart {
    let o = &case.oracle;
    match kind {
        ExpansionKind::Subclass => o.subclass_chart(s, label),
        ExpansionKind::PropertyOut => o.property_chart(s, Direction::Outgoing, &case.excluded()),
        ExpansionKind::PropertyIn => o.property_chart(s, Direction::Incoming, &case.excluded()),
        ExpansionKind::ObjectOut => o.object_chart(s, label, Direction::Outgoing),
        ExpansionKind::ObjectIn => o.object_chart(s, label, Direction::Incoming),
        ExpansionKind::Filter(conds) => {
            let kept = o.filter(s, conds);
            let n = kept.len() as u64;
            OracleChart {
                parent_size: s.len() as u64,
                bars: BTreeMap::from([(label.to_string(), OracleBar { members: kept, occurrences: n })]),
            }
        }
    }
}

/// A condition drawn from the data so that it matches some members.
pub fn random_condition(rng: &mut impl Rng, triples: &[RdfTriple], s: &BTreeSet<Term>) -> FilterCondition {
    let candidates: Vec<&RdfTriple> = triples.iter().filter(|t| s.contains(&t.subject)).collect();
    let Some(t) = candidates.choose(rng) else {
        return FilterCondition::new(random::predicate(0), Comparator::Equals, FilterValue::uri(random::instance(0)));
    };
    let property = t.predicate.lexical().to_string();
    let (comparator, value) = match &t.object {
        Term::Uri(u) => (Comparator::Equals, FilterValue::uri(u.clone())),
        Term::Literal(l) => match (l.numeric_value(), rng.gen_range(0..4)) {
            (Some(v), 0) => (Comparator::Lt, FilterValue::literal(format!("{}", v + 1.0))),
            (Some(v), 1) => (Comparator::Gt, FilterValue::literal(format!("{}", v - 0.5))),
            (_, 2) => {
                let cut = l.lexical.char_indices().nth(1).map_or(l.lexical.len(), |(i, _)| i);
                (Comparator::Contains, FilterValue::literal(&l.lexical[..cut]))
            }
            _ => (Comparator::Equals, FilterValue::literal(l.lexical.clone())),
        },
    };
    FilterCondition::new(property, comparator, value)
}

fn random_expansion(rng: &mut impl Rng, case: &Case, bar: &Bar, s: &BTreeSet<Term>) -> ExpansionKind {
    match bar.bar_type {
        BarType::Property => {
            if rng.gen_bool(0.5) {
                ExpansionKind::ObjectOut
            } else {
                ExpansionKind::ObjectIn
            }
        }
        BarType::Class => match rng.gen_range(0..8) {
            0 | 1 => ExpansionKind::Subclass,
            2 | 3 | 4 => ExpansionKind::PropertyOut,
            5 | 6 => ExpansionKind::PropertyIn,
            _ => {
                let n = rng.gen_range(1..=2);
                ExpansionKind::Filter((0..n).map(|_| random_condition(rng, &case.triples, s)).collect())
            }
        },
    }
}

/// Picks a bar of `chart`, preferring non-empty ones.
fn pick<'c>(rng: &mut impl Rng, chart: &'c Chart) -> Option<&'c Bar> {
    let nonempty: Vec<&Bar> = chart.bars().iter().map(|b| &b.bar).filter(|b| !b.is_empty()).collect();
    if !nonempty.is_empty() && rng.gen_bool(0.9) {
        return nonempty.choose(rng).copied();
    }
    chart.bars().choose(rng).map(|b| &b.bar)
}

fn random_table(rng: &mut impl Rng, case: &Case, s: &BTreeSet<Term>) -> TableRequest {
    let mut predicates: Vec<String> = case
        .triples
        .iter()
        .filter(|t| s.contains(&t.subject))
        .map(|t| t.predicate.lexical().to_string())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    predicates.shuffle(rng);
    predicates.truncate(rng.gen_range(0..=3));
    let filters = if rng.gen_bool(0.3) {
        vec![random_condition(rng, &case.triples, s)]
    } else {
        Vec::new()
    };
    TableRequest {
        columns: predicates,
        filters,
        limit: rng.gen_range(1..=20),
        offset: if rng.gen_bool(0.5) { 0 } else { rng.gen_range(0..10) },
    }
}

/// Initial chart and `paths` random paths of up to `depth` expansions, each
/// chart compared with the oracle. Tables are compared on bars whose
/// members are all URIs.
pub fn oracle_walk(case: &Case, paths: usize, depth: usize) -> Result<WalkReport, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(case.seed);
    let engine = case.engine();
    let g = &case.graph;
    let root = &case.config.root;
    let tag = |what: &str| format!("seed {} root {root}: {what}", case.seed);
    let mut report = WalkReport::default();

    let root_bar = engine.root_bar();
    if members(g, &root_bar) != case.oracle.root_members(root) {
        return Err(tag("root members differ"));
    }
    let initial = engine.initial_chart();
    check_metrics(&tag("initial chart"), &initial)?;
    let oracle_initial = case.oracle.initial_chart(root);
    diff(&tag("initial chart"), &observe(g, &initial), &oracle_initial)?;
    report.charts += 1;

    for _ in 0..paths {
        let mut bar = match pick(&mut rng, &initial) {
            Some(b) if rng.gen_bool(0.7) => b.clone(),
            _ => root_bar.clone(),
        };
        let mut s = if bar == root_bar {
            case.oracle.root_members(root)
        } else {
            oracle_initial.bars.get(bar.label.as_str()).map(|b| b.members.clone()).unwrap_or_default()
        };
        let mut chart: Option<(Chart, OracleChart)> = None;
        for step in 0..depth {
            if let Some((c, expected)) = chart.take() {
                let Some(next) = pick(&mut rng, &c) else { break };
                // Follow the oracle's set, not the engine's.
                s = expected
                    .bars
                    .get(next.label.as_str())
                    .map(|b| b.members.clone())
                    .ok_or_else(|| tag("picked bar missing from oracle chart"))?;
                bar = next.clone();
            }
            if bar.label.is_pseudo() {
                if engine.expand(&bar, &ExpansionKind::PropertyOut).is_ok() {
                    return Err(tag("pseudo bar expanded"));
                }
                break;
            }
            if rng.gen_bool(0.25) && s.iter().all(Term::is_uri) {
                let request = random_table(&mut rng, case, &s);
                let table = engine.instance_table(&bar, &request).map_err(|e| tag(&e.to_string()))?;
                let (rows, total) =
                    case.oracle
                        .table(&s, &request.columns, &request.filters, request.limit, request.offset);
                let got: Vec<(String, Vec<Vec<Term>>)> =
                    table.rows.into_iter().map(|r| (r.subject, r.cells)).collect();
                if got != rows || table.total != total {
                    return Err(tag(&format!("table on {} differs at step {step}", bar.label)));
                }
                report.tables += 1;
            }
            let kind = random_expansion(&mut rng, case, &bar, &s);
            let what = tag(&format!("{} of {} at step {step}", kind.name(), bar.label));
            let c = engine.expand(&bar, &kind).map_err(|e| format!("{what}: {e}"))?;
            check_metrics(&what, &c)?;
            let expected = oracle_expansion(case, bar.label.as_str(), &s, &kind);
            diff(&what, &observe(g, &c), &expected)?;
            report.charts += 1;
            chart = Some((c, expected));
        }
    }
    Ok(report)
}

fn column(result: &QueryResult, name: &str) -> Result<usize, String> {
    result.column(name).ok_or_else(|| format!("result has no ?{name} column"))
}

fn number(cell: Option<&Term>) -> u64 {
    cell.and_then(Term::numeric_value).map_or(0, |v| v as u64)
}

/// Runs the member and count queries of `bar` and compares them with its set.
pub fn check_bar_queries(graph: &Graph, bar: &Bar, run: Runner<'_>) -> Result<usize, String> {
    let plan = match sparql::bar_query(&bar.lineage) {
        Ok(plan) => plan,
        Err(_) if bar.lineage.contains_pseudo() => return Ok(0),
        Err(e) => return Err(format!("bar query for {}: {e}", bar.label)),
    };
    let result = run(&plan.text)?;
    let s = column(&result, "s")?;
    let got: BTreeSet<Term> = result.rows.iter().filter_map(|r| r[s].clone()).collect();
    if got != members(graph, bar) {
        return Err(format!(
            "bar query for {} returned {} members, engine has {}\n{}",
            bar.label,
            got.len(),
            bar.len(),
            plan.text
        ));
    }
    let plan = sparql::count_query(&bar.lineage).map_err(|e| e.to_string())?;
    let n = run(&plan.text)?.scalar_count().unwrap_or(0);
    if n != bar.len() {
        return Err(format!("count query for {} gave {n}, engine has {}", bar.label, bar.len()));
    }
    Ok(2)
}

/// Runs the aggregate query of a chart produced by expanding `bar` and
/// compares labels, member counts, occurrence counts and the parent size.
pub fn check_chart_query(bar: &Bar, chart: &Chart, excluded: &[String], run: Runner<'_>) -> Result<usize, String> {
    if bar.lineage.contains_pseudo() {
        return Ok(0);
    }
    let plan = match chart.kind() {
        ChartKind::Filter | ChartKind::Root => return Ok(0),
        ChartKind::TopLevel => sparql::top_level_query(),
        kind => sparql::chart_query(ChartSpec {
            label: bar.label.clone(),
            lineage: bar.lineage.clone(),
            kind,
            excluded: excluded.to_vec(),
        })
        .map_err(|e| e.to_string())?,
    };
    let result = run(&plan.text)?;
    let (l, m, o) = (column(&result, "label")?, column(&result, "members")?, column(&result, "occurrences")?);
    let got: BTreeMap<String, (u64, u64)> = result
        .rows
        .iter()
        .filter_map(|r| {
            let label = r[l].as_ref()?.lexical().to_string();
            Some((label, (number(r[m].as_ref()), number(r[o].as_ref()))))
        })
        .collect();
    let want: BTreeMap<String, (u64, u64)> = chart
        .bars()
        .iter()
        .map(|b| (b.bar.label.to_string(), (b.bar.len(), b.metrics.occurrence_count)))
        .collect();
    if got != want {
        return Err(format!(
            "{:?} chart query on {} gave {got:?}, engine has {want:?}\n{}",
            chart.kind(),
            bar.label,
            plan.text
        ));
    }
    let mut queries = 1;
    let object = match chart.kind() {
        ChartKind::ObjectOut => Some(Direction::Outgoing),
        ChartKind::ObjectIn => Some(Direction::Incoming),
        _ => None,
    };
    if let (Some(direction), Some(predicate)) = (object, bar.label.uri()) {
        let plan = sparql::reached_query(&bar.lineage, predicate, direction).map_err(|e| e.to_string())?;
        let n = run(&plan.text)?.scalar_count().unwrap_or(0);
        if n != chart.parent_size() {
            return Err(format!("reached query on {} gave {n}, engine has {}", bar.label, chart.parent_size()));
        }
        queries += 1;
    }
    if chart.kind() == ChartKind::Subclass {
        if let Some(class) = bar.label.uri() {
            let plan = sparql::hierarchy_query(class);
            let result = run(&plan.text)?;
            let (l, d, t) = (column(&result, "label")?, column(&result, "direct")?, column(&result, "total")?);
            for r in &result.rows {
                let Some(label) = r[l].as_ref() else { continue };
                let Some(b) = chart.get_str(label.lexical()) else {
                    return Err(format!("hierarchy query names unknown bar {}", label.lexical()));
                };
                let want = (b.metrics.direct_subclass_count, b.metrics.total_subclass_count);
                let got = (Some(number(r[d].as_ref())), Some(number(r[t].as_ref())));
                if got != want {
                    return Err(format!("hierarchy of {} gave {got:?}, engine has {want:?}", label.lexical()));
                }
            }
            queries += 1;
        }
    }
    Ok(queries)
}

/// Runs the table query of `bar` and compares the folded rows with the
/// engine's table.
pub fn check_table_query(engine: &Engine<'_>, bar: &Bar, request: &TableRequest, run: Runner<'_>) -> Result<usize, String> {
    if bar.lineage.contains_pseudo() {
        return Ok(0);
    }
    let table = engine.instance_table(bar, request).map_err(|e| e.to_string())?;
    let result = run(&table.sparql)?;
    let s = column(&result, "s")?;
    let rows = result.rows.iter().filter_map(|r| {
        let subject = r[s].as_ref()?.lexical().to_string();
        let cells = r.iter().enumerate().filter(|(i, _)| *i != s).map(|(_, c)| c.clone()).collect();
        Some((subject, cells))
    });
    let folded = ldx_core::explore::fold_rows(request.columns.len(), rows);
    if folded != table.rows {
        return Err(format!(
            "table query on {} gave {} rows, engine has {}\n{}",
            bar.label,
            folded.len(),
            table.rows.len(),
            table.sparql
        ));
    }
    Ok(1)
}

/// Random paths of up to `depth` expansions from the root; every bar, chart
/// and table query along the way is run through `run` and compared with the
/// engine.
pub fn sparql_walk(case: &Case, paths: usize, depth: usize, run: Runner<'_>) -> Result<WalkReport, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(case.seed.wrapping_add(17));
    let engine = case.engine();
    let g = &case.graph;
    let excluded = case.excluded();
    let tag = |e: String| format!("seed {} root {}: {e}", case.seed, case.config.root);
    let mut report = WalkReport::default();

    let root = engine.root_bar();
    let initial = engine.initial_chart();
    report.queries += check_bar_queries(g, &root, run).map_err(tag)?;
    report.queries += check_chart_query(&root, &initial, &excluded, run).map_err(tag)?;
    report.charts += 1;

    for _ in 0..paths {
        let mut bar = match pick(&mut rng, &initial) {
            Some(b) if rng.gen_bool(0.7) => b.clone(),
            _ => root.clone(),
        };
        for _ in 0..depth {
            if bar.label.is_pseudo() {
                break;
            }
            report.queries += check_bar_queries(g, &bar, run).map_err(tag)?;
            if rng.gen_bool(0.3) && bar.lineage.depth() < ldx_core::explore::MAX_DEPTH {
                let s = members(g, &bar);
                let request = random_table(&mut rng, case, &s);
                report.queries += check_table_query(&engine, &bar, &request, run).map_err(tag)?;
                report.tables += 1;
            }
            let s = members(g, &bar);
            let kind = random_expansion(&mut rng, case, &bar, &s);
            let chart = engine.expand(&bar, &kind).map_err(|e| tag(e.to_string()))?;
            report.queries += check_chart_query(&bar, &chart, &excluded, run).map_err(tag)?;
            report.charts += 1;
            match pick(&mut rng, &chart) {
                Some(next) => bar = next.clone(),
                None => break,
            }
        }
        report.queries += check_bar_queries(g, &bar, run).map_err(tag)?;
    }
    Ok(report)
}

/// Runs queries on the embedded evaluator.
pub fn embedded_runner(graph: &Graph) -> impl Fn(&str) -> Result<QueryResult, String> + '_ {
    move |text| sparql::evaluate(text, graph).map_err(|e| format!("{e}\n{text}"))
}

/// A chart without member sets: kind, parent size and, per bar, everything
/// but the members themselves.
pub type ChartSummary = (ChartKind, u64, Vec<(String, BarType, u64, BarMetrics, Arc<Lineage>)>);

pub fn summary(chart: &Chart) -> ChartSummary {
    let bars = chart
        .bars()
        .iter()
        .map(|b| {
            (
                b.bar.label.to_string(),
                b.bar.bar_type,
                b.bar.len(),
                b.metrics.clone(),
                b.bar.lineage.clone(),
            )
        })
        .collect();
    (chart.kind(), chart.parent_size(), bars)
}

fn same_bar(a: &Bar, b: &Bar) -> bool {
    a.label == b.label && a.bar_type == b.bar_type && a.len() == b.len() && a.lineage == b.lineage
}

/// Walks random paths through the engine and `source` side by side,
/// requiring equal charts (up to member sets), bars, tables, class lists and
/// statistics.
pub fn source_walk(case: &Case, source: &dyn ChartSource, paths: usize, depth: usize) -> Result<WalkReport, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(case.seed.wrapping_add(29));
    let engine = case.engine();
    let local = GraphSource::new(case.graph.clone(), case.config.clone());
    let g = &case.graph;
    let tag = |e: String| format!("seed {} root {}: {e}", case.seed, case.config.root);
    let err = |e: ExploreError| tag(e.to_string());
    let mut report = WalkReport::default();

    if source.stats().map_err(err)? != g.stats() {
        return Err(tag("stats differ".into()));
    }
    if source.classes().map_err(err)? != local.classes().map_err(err)? {
        return Err(tag("class lists differ".into()));
    }
    let root = engine.root_bar();
    if !same_bar(&source.root_bar().map_err(err)?, &root) {
        return Err(tag("root bars differ".into()));
    }
    let initial = engine.initial_chart();
    if summary(&source.initial_chart().map_err(err)?) != summary(&initial) {
        return Err(tag("initial charts differ".into()));
    }
    report.charts += 1;
    let declared: Vec<String> = case.oracle.declared_classes().into_iter().collect();

    for _ in 0..paths {
        let mut bar = match pick(&mut rng, &initial) {
            Some(b) if rng.gen_bool(0.6) => b.clone(),
            _ if rng.gen_bool(0.5) && !declared.is_empty() => {
                let class = declared.choose(&mut rng).expect("non-empty");
                let local_bar = engine.class_bar(class).map_err(err)?;
                if !same_bar(&source.class_bar(class).map_err(err)?, &local_bar) {
                    return Err(tag(format!("class bars of {class} differ")));
                }
                local_bar
            }
            _ => root.clone(),
        };
        let mut remote = match source.class_bar(&random::instance(0)) {
            Err(ExploreError::UnknownClass(_)) => bar.clone(),
            other => return Err(tag(format!("undeclared class accepted: {other:?}"))),
        };
        remote.members = Members::Count(bar.len());
        for step in 0..depth {
            if bar.label.is_pseudo() {
                break;
            }
            let s = members(g, &bar);
            if rng.gen_bool(0.3) && bar.lineage.depth() < ldx_core::explore::MAX_DEPTH {
                let request = random_table(&mut rng, case, &s);
                let want = engine.instance_table(&bar, &request).map_err(err)?;
                let got = source.table(&remote, &request).map_err(err)?;
                if got != want {
                    return Err(tag(format!("tables of {} differ at step {step}", bar.label)));
                }
                report.tables += 1;
            }
            let kind = random_expansion(&mut rng, case, &bar, &s);
            let want = engine.expand(&bar, &kind).map_err(err)?;
            let got = source.expand(&remote, &kind).map_err(err)?;
            if summary(&got) != summary(&want) {
                return Err(tag(format!("{} of {} differs at step {step}", kind.name(), bar.label)));
            }
            report.charts += 1;
            let Some(next) = pick(&mut rng, &want) else { break };
            remote = got.get(&next.label).expect("same labels").bar.clone();
            bar = next.clone();
        }
    }
    Ok(report)
}
