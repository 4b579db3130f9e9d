//! Random session step sequences. Every step is either accepted, leaving a
//! valid session, or rejected with the error predicted independently here.

use std::sync::Arc;

use ldx_core::explore::{
    BarLabel, BarType, Chart, Comparator, ExpansionKind, ExploreError, FilterCondition, FilterValue, GraphSource,
    ParentRef, Session,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::random;
use crate::walk::{random_condition, Case};

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct FuzzReport {
    pub accepted: usize,
    pub rejected: usize,
}

fn any_expansion(rng: &mut impl Rng) -> ExpansionKind {
    match rng.gen_range(0..6) {
        0 => ExpansionKind::Subclass,
        1 => ExpansionKind::PropertyOut,
        2 => ExpansionKind::PropertyIn,
        3 => ExpansionKind::ObjectOut,
        4 => ExpansionKind::ObjectIn,
        _ => ExpansionKind::Filter(Vec::new()),
    }
}

/// What the session must answer for expanding `label` of `chart`.
fn predict(chart: &Chart, label: &str, expansion: &ExpansionKind) -> Result<(), ExploreError> {
    let Some(b) = chart.get_str(label) else {
        return Err(ExploreError::UnknownLabel(label.to_string()));
    };
    if b.bar.label.is_pseudo() {
        return Err(ExploreError::NotExpandable(label.to_string()));
    }
    let expected = match expansion {
        ExpansionKind::ObjectOut | ExpansionKind::ObjectIn => BarType::Property,
        _ => BarType::Class,
    };
    if b.bar.bar_type != expected {
        return Err(ExploreError::TypeMismatch {
            label: label.to_string(),
            expected,
            actual: b.bar.bar_type,
        });
    }
    if let ExpansionKind::Filter(conds) = expansion {
        for c in conds {
            if matches!(c.comparator, Comparator::Lt | Comparator::Gt) && c.value.numeric().is_none() {
                return Err(ExploreError::InvalidComparator {
                    comparator: c.comparator,
                    value: c.value.text().to_string(),
                });
            }
        }
    }
    Ok(())
}

/// Independent check of every stored pane: its parent precedes it, the
/// selected label is in the parent chart, the expansion suits the bar's type
/// and the chart equals a fresh expansion.
fn check_panes(case: &Case, session: &Session) -> Result<(), String> {
    let engine = case.engine();
    for (pos, pane) in session.panes().iter().enumerate() {
        if pos == 0 {
            if pane.chart != engine.initial_chart() {
                return Err("pane 0 differs from the initial chart".into());
            }
            continue;
        }
        let bar = match pane.step.parent {
            ParentRef::Root => engine.root_chart().get(&pane.step.label).map(|b| b.bar.clone()),
            ParentRef::Jump => engine.class_bar(pane.step.label.as_str()).ok(),
            ParentRef::Pane(p) => {
                let Some(parent) = session.panes()[..pos].iter().find(|x| x.id == p) else {
                    return Err(format!("pane {} has no earlier parent {p}", pane.id));
                };
                parent.chart.get(&pane.step.label).map(|b| b.bar.clone())
            }
        };
        let Some(bar) = bar else {
            return Err(format!("pane {}: label {} not in parent chart", pane.id, pane.step.label));
        };
        if bar.label.is_pseudo() || bar.bar_type != pane.step.expansion.required_type() {
            return Err(format!("pane {}: expansion does not suit bar {}", pane.id, bar.label));
        }
        match engine.expand(&bar, &pane.step.expansion) {
            Ok(chart) if chart == pane.chart => {}
            _ => return Err(format!("pane {}: chart differs from a fresh expansion", pane.id)),
        }
    }
    session.validate().map_err(|(id, e)| format!("validate rejects pane {id}: {e}"))
}

/// Random labels: mostly from the chart, sometimes unknown.
fn pick_label(rng: &mut impl Rng, chart: &Chart) -> String {
    let labels: Vec<&BarLabel> = chart.labels().collect();
    match labels.choose(rng) {
        Some(l) if rng.gen_bool(0.9) => l.to_string(),
        _ => format!("{}nowhere", random::NS),
    }
}

fn check_outcome<T>(what: &str, got: Result<T, ExploreError>, want: Result<(), ExploreError>) -> Result<bool, String> {
    match (got, want) {
        (Ok(_), Ok(())) => Ok(true),
        (Err(e), Err(w)) if e == w => Ok(false),
        (Err(ExploreError::UnsupportedPath(_)), Ok(())) => Ok(false),
        (Ok(_), Err(w)) => Err(format!("{what}: accepted, expected {w}")),
        (Err(e), Ok(())) => Err(format!("{what}: rejected with {e}, expected success")),
        (Err(e), Err(w)) => Err(format!("{what}: rejected with {e}, expected {w}")),
    }
}

/// `steps` random actions on a fresh session over `case`.
pub fn session_fuzz(case: &Case, steps: usize) -> Result<FuzzReport, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(case.seed.wrapping_mul(31).wrapping_add(7));
    let source = Arc::new(GraphSource::new(case.graph.clone(), case.config.clone()));
    let mut session = Session::new(source.clone()).map_err(|e| e.to_string())?;
    let mut report = FuzzReport::default();
    let declared: Vec<String> = case.oracle.declared_classes().into_iter().collect();

    for step in 0..steps {
        let ids: Vec<usize> = session.panes().iter().map(|p| p.id).collect();
        let tag = |what: &str| format!("seed {} step {step}: {what}", case.seed);
        let accepted = match rng.gen_range(0..10) {
            0..=5 => {
                let id = *ids.choose(&mut rng).expect("pane 0 stays open");
                let chart = session.pane(id).expect("open pane").chart.clone();
                let label = pick_label(&mut rng, &chart);
                let mut expansion = any_expansion(&mut rng);
                if let ExpansionKind::Filter(conds) = &mut expansion {
                    let s = chart
                        .get_str(&label)
                        .and_then(|b| b.bar.members.as_set().cloned())
                        .map(|ids| ids.iter().map(|x| case.graph.term(*x).clone()).collect())
                        .unwrap_or_default();
                    conds.push(random_condition(&mut rng, &case.triples, &s));
                    if rng.gen_bool(0.2) {
                        conds.push(FilterCondition::new(
                            random::predicate(0),
                            Comparator::Lt,
                            FilterValue::literal("not a number"),
                        ));
                    }
                }
                let want = predict(&chart, &label, &expansion);
                let got = session.expand(id, &label, expansion).map(|_| ());
                check_outcome(&tag(&format!("expand {label} of pane {id}")), got, want)?
            }
            6 => {
                let id = if rng.gen_bool(0.8) {
                    *ids.choose(&mut rng).expect("pane 0 stays open")
                } else {
                    ids.iter().max().copied().unwrap_or(0) + 100
                };
                let want = if id == 0 {
                    Err(ExploreError::RootPane)
                } else if !ids.contains(&id) {
                    Err(ExploreError::UnknownPane(id))
                } else {
                    Ok(())
                };
                let got = session.close_pane(id);
                if let Ok(closed) = &got {
                    if closed.iter().any(|c| session.pane(*c).is_ok()) {
                        return Err(tag("closed pane still open"));
                    }
                }
                check_outcome(&tag(&format!("close {id}")), got, want)?
            }
            7 => {
                let class = match declared.choose(&mut rng) {
                    Some(c) if rng.gen_bool(0.8) => c.clone(),
                    _ => random::instance(0),
                };
                let want = if declared.contains(&class) {
                    Ok(())
                } else {
                    Err(ExploreError::UnknownClass(class.clone()))
                };
                let got = session.open_class(&class).map(|_| ());
                check_outcome(&tag(&format!("open {class}")), got, want)?
            }
            8 => {
                let id = *ids.choose(&mut rng).expect("pane 0 stays open");
                let pane = session.pane(id).expect("open pane");
                let s = pane
                    .focus
                    .members
                    .as_set()
                    .map(|ids| ids.iter().map(|x| case.graph.term(*x).clone()).collect())
                    .unwrap_or_default();
                let cond = random_condition(&mut rng, &case.triples, &s);
                let parent_chart = match pane.step.parent {
                    ParentRef::Root => session.root_chart().clone(),
                    ParentRef::Pane(p) => session.pane(p).expect("parent open").chart.clone(),
                    ParentRef::Jump => {
                        let bar = case.engine().class_bar(pane.step.label.as_str()).map_err(|e| e.to_string())?;
                        ldx_core::explore::root_chart(bar)
                    }
                };
                let mut all = pane.active_filters.clone();
                all.push(cond.clone());
                let want = predict(&parent_chart, pane.step.label.as_str(), &ExpansionKind::Filter(all));
                let got = session.filter_pane(id, vec![cond]).map(|_| ());
                check_outcome(&tag(&format!("filter pane {id}")), got, want)?
            }
            _ => {
                let id = ids.iter().max().copied().unwrap_or(0) + 1;
                let got = session.expand(id, "x", ExpansionKind::Subclass).map(|_| ());
                check_outcome(&tag("expand unknown pane"), got, Err(ExploreError::UnknownPane(id)))?
            }
        };
        if accepted {
            report.accepted += 1;
        } else {
            report.rejected += 1;
        }
        if ids.len() > 40 {
            let last = *ids.last().expect("panes");
            if last != 0 {
                session.close_pane(last).map_err(|e| e.to_string())?;
            }
        }
        check_panes(case, &session).map_err(|e| tag(&e))?;
    }

    let replayed = Session::replay(source, &session.steps()).map_err(|e| format!("replay failed: {e}"))?;
    let charts = |s: &Session| s.panes().iter().map(|p| p.chart.clone()).collect::<Vec<_>>();
    if charts(&replayed) != charts(&session) {
        return Err(format!("seed {}: replayed session differs", case.seed));
    }
    Ok(report)
}
