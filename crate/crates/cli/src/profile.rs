//! Dataset profile: the class distribution below the root and the
//! best-covered outgoing properties of each class, read off engine charts.

use std::io::{self, Write};

use ldx_core::explore::{threshold_view, Bar, Engine, EngineConfig, ExpansionKind};
use ldx_core::rdf::Graph;
use serde_json::{json, Map, Value};

#[derive(Debug, Clone, PartialEq)]
pub struct ClassNode {
    pub label: String,
    pub instances: u64,
    /// `None` when the node was not expanded (depth reached or no subclasses).
    pub subclasses: Option<Vec<ClassNode>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyLine {
    pub property: String,
    pub instances: u64,
    pub occurrences: u64,
    pub coverage: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub root: String,
    /// Children of the root; empty when the initial chart is.
    pub classes: Vec<ClassNode>,
    /// Per class, in visiting order: properties at or above the threshold.
    pub properties: Vec<(String, Vec<PropertyLine>)>,
}

struct Profiler<'g> {
    engine: Engine<'g>,
    threshold: f64,
    top: usize,
    properties: Vec<(String, Vec<PropertyLine>)>,
}

impl Profiler<'_> {
    fn properties_of(&mut self, bar: &Bar) {
        if bar.is_empty() {
            return;
        }
        let chart = self
            .engine
            .expand(bar, &ExpansionKind::PropertyOut)
            .expect("class bars admit property expansion");
        let lines = threshold_view(&chart, self.threshold)
            .visible
            .bars()
            .iter()
            .take(self.top)
            .map(|b| PropertyLine {
                property: b.bar.label.to_string(),
                instances: b.metrics.instance_count,
                occurrences: b.metrics.occurrence_count,
                coverage: b.metrics.coverage,
            })
            .collect();
        self.properties.push((bar.label.to_string(), lines));
    }

    fn nodes(&mut self, bars: Vec<Bar>, depth: usize) -> Vec<ClassNode> {
        bars.into_iter()
            .map(|bar| {
                self.properties_of(&bar);
                let subclasses = if depth > 1 {
                    let chart = self
                        .engine
                        .expand(&bar, &ExpansionKind::Subclass)
                        .expect("class bars admit subclass expansion");
                    let children: Vec<Bar> = chart.bars().iter().map(|b| b.bar.clone()).collect();
                    (!children.is_empty()).then(|| self.nodes(children, depth - 1))
                } else {
                    None
                };
                ClassNode {
                    label: bar.label.to_string(),
                    instances: bar.len(),
                    subclasses,
                }
            })
            .collect()
    }
}

pub fn profile(graph: &Graph, root: &str, depth: usize, threshold: f64, top: usize) -> Report {
    let config = EngineConfig::with_root(root);
    let engine = Engine::new(graph, &config);
    let mut p = Profiler {
        engine,
        threshold,
        top,
        properties: Vec::new(),
    };
    let initial: Vec<Bar> = engine.initial_chart().bars().iter().map(|b| b.bar.clone()).collect();
    let classes = if initial.is_empty() {
        Vec::new()
    } else {
        p.properties_of(&engine.root_bar());
        p.nodes(initial, depth)
    };
    Report {
        root: root.to_string(),
        classes,
        properties: p.properties,
    }
}

fn node_value(nodes: &[ClassNode]) -> Value {
    let map: Map<String, Value> = nodes
        .iter()
        .map(|n| {
            let v = match &n.subclasses {
                None => json!(n.instances),
                Some(children) => json!({"instances": n.instances, "subclasses": node_value(children)}),
            };
            (n.label.clone(), v)
        })
        .collect();
    Value::Object(map)
}

/// `{"root", "classes": {root: {class: count | {"instances", "subclasses"}}},
/// "properties": {class: [...]}}`.
pub fn to_json(report: &Report) -> Value {
    let mut classes = Map::new();
    if !report.classes.is_empty() {
        classes.insert(report.root.clone(), node_value(&report.classes));
    }
    let properties: Map<String, Value> = report
        .properties
        .iter()
        .map(|(class, lines)| {
            let lines: Vec<Value> = lines
                .iter()
                .map(|l| {
                    json!({
                        "property": l.property,
                        "instances": l.instances,
                        "occurrences": l.occurrences,
                        "coverage": l.coverage,
                    })
                })
                .collect();
            (class.clone(), Value::Array(lines))
        })
        .collect();
    json!({"root": report.root, "classes": classes, "properties": properties})
}

pub fn write_json(report: &Report, mut out: impl Write) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut out, &to_json(report))?;
    writeln!(out)
}

/// One row per class (`class,<parent>,<class>,<instances>,,`) and per
/// reported property (`property,<class>,<property>,<instances>,<occurrences>,<coverage>`).
pub fn write_csv(report: &Report, out: impl Write) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["section", "class", "label", "instances", "occurrences", "coverage"])?;
    fn classes<W: Write>(w: &mut csv::Writer<W>, parent: &str, nodes: &[ClassNode]) -> io::Result<()> {
        for n in nodes {
            w.write_record(["class", parent, &n.label, &n.instances.to_string(), "", ""])?;
            if let Some(children) = &n.subclasses {
                classes(w, &n.label, children)?;
            }
        }
        Ok(())
    }
    classes(&mut w, &report.root, &report.classes)?;
    for (class, lines) in &report.properties {
        for l in lines {
            w.write_record([
                "property",
                class,
                &l.property,
                &l.instances.to_string(),
                &l.occurrences.to_string(),
                &l.coverage.to_string(),
            ])?;
        }
    }
    w.flush()
}
