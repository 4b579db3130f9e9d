//! Line-oriented exploration scripts.
//!
//! ```text
//! # comment
//! select Work expand subclass
//! select Album expand prop_out
//! from 1 select Album expand filter filter artist equals <http://x/bob>
//! ```
//!
//! A step applies to the pane opened by the previous step unless `from`
//! names another pane. Filter clauses on a non-filter expansion first open
//! a filter pane, then expand the filtered bar.

use std::io::Write;
use std::sync::Arc;

use ldx_core::explore::{
    Chart, ChartSource, Comparator, EngineConfig, ExpansionKind, FilterCondition, FilterValue, GraphSource, Pane,
    Session,
};
use ldx_core::rdf::{local_name, Graph};

use crate::Failure;

#[derive(Debug, Clone, PartialEq)]
pub struct RawFilter {
    pub property: String,
    pub comparator: Comparator,
    pub value: FilterValue,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScriptStep {
    pub line: usize,
    pub from: Option<usize>,
    pub label: String,
    pub expansion: ExpansionKind,
    pub filters: Vec<RawFilter>,
}

/// Splits on whitespace; double quotes group words, `\"` escapes a quote
/// and a word starting with `#` begins a comment.
fn tokens(line: &str) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    let mut chars = line.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if c == '#' {
            break;
        } else if c == '"' {
            chars.next();
            let mut t = String::new();
            loop {
                match chars.next() {
                    Some('\\') if chars.peek() == Some(&'"') => t.push(chars.next().expect("peeked")),
                    Some('"') => break,
                    Some(c) => t.push(c),
                    None => return Err("unterminated quote".into()),
                }
            }
            // Keep quoting visible so `"<x>"` stays a literal.
            out.push(format!("\"{t}\""));
        } else {
            let mut t = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_whitespace() {
                    break;
                }
                t.push(c);
                chars.next();
            }
            out.push(t);
        }
    }
    Ok(out)
}

fn parse_line(line: &str) -> Result<Option<(Option<usize>, String, ExpansionKind, Vec<RawFilter>)>, String> {
    let words = tokens(line)?;
    if words.is_empty() {
        return Ok(None);
    }
    let mut it = words.iter().map(String::as_str);
    let mut next = |what: &str| it.next().ok_or_else(|| format!("expected {what}"));
    let mut word = next("`select`")?;
    let mut from = None;
    if word == "from" {
        let pane = next("a pane id")?;
        from = Some(pane.parse().map_err(|_| format!("bad pane id {pane:?}"))?);
        word = next("`select`")?;
    }
    if word != "select" {
        return Err(format!("expected `select`, found {word:?}"));
    }
    let label = next("a label")?.to_string();
    let word = next("`expand`")?;
    if word != "expand" {
        return Err(format!("expected `expand`, found {word:?}"));
    }
    let kind = next("an expansion")?;
    let expansion = ExpansionKind::parse(kind).ok_or_else(|| format!("unknown expansion {kind:?}"))?;
    let mut filters = Vec::new();
    while let Ok(word) = next("") {
        if word != "filter" {
            return Err(format!("expected `filter`, found {word:?}"));
        }
        let property = next("a property")?.to_string();
        let op = next("a comparator")?;
        let comparator = Comparator::parse(op).ok_or_else(|| format!("unknown comparator {op:?}"))?;
        let value = FilterValue::parse(next("a value")?);
        filters.push(RawFilter {
            property,
            comparator,
            value,
        });
    }
    if matches!(expansion, ExpansionKind::Filter(_)) && filters.is_empty() {
        return Err("a filter expansion needs at least one filter clause".into());
    }
    Ok(Some((from, label, expansion, filters)))
}

pub fn parse(text: &str) -> Result<Vec<ScriptStep>, Failure> {
    let mut steps = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let parsed = parse_line(line).map_err(|e| Failure::Parse(format!("script line {}: {e}", i + 1)))?;
        if let Some((from, label, expansion, filters)) = parsed {
            steps.push(ScriptStep {
                line: i + 1,
                from,
                label,
                expansion,
                filters,
            });
        }
    }
    Ok(steps)
}

/// The chart label `token` refers to: the label itself, a `<uri>`, or the
/// one bar whose local name is `token`.
fn resolve(chart: &Chart, token: &str) -> Result<String, String> {
    let token = token.strip_prefix('<').and_then(|t| t.strip_suffix('>')).unwrap_or(token);
    if chart.get_str(token).is_some() {
        return Ok(token.to_string());
    }
    let matches: Vec<&str> = chart
        .labels()
        .map(|l| l.as_str())
        .filter(|l| local_name(l) == token)
        .collect();
    match matches.as_slice() {
        [one] => Ok(one.to_string()),
        [] => Ok(token.to_string()),
        many => Err(format!("label {token:?} is ambiguous: {}", many.join(", "))),
    }
}

pub fn print_pane(pane: &Pane, out: &mut dyn Write) -> std::io::Result<()> {
    let crumbs: Vec<&str> = pane.breadcrumb.iter().map(|l| l.as_str()).collect();
    writeln!(
        out,
        "pane {} [{}] {} ({} bars over {})",
        pane.id,
        pane.step.expansion.name(),
        crumbs.join(" > "),
        pane.chart.len(),
        pane.chart.parent_size()
    )?;
    for b in pane.chart.bars() {
        writeln!(out, "  {:>8}  {:.3}  {}", b.metrics.instance_count, b.metrics.coverage, b.bar.label)?;
    }
    Ok(())
}

fn apply(session: &mut Session, current: usize, step: &ScriptStep, out: &mut dyn Write) -> Result<usize, String> {
    let parent = step.from.unwrap_or(current);
    let chart = &session.pane(parent).map_err(|e| e.to_string())?.chart;
    let label = resolve(chart, &step.label)?;
    let mut conditions = Vec::new();
    if !step.filters.is_empty() {
        let bar = chart
            .get_str(&label)
            .ok_or_else(|| format!("label {label} is not in the parent chart"))?;
        let props = session
            .source()
            .expand(&bar.bar, &ExpansionKind::PropertyOut)
            .map_err(|e| e.to_string())?;
        for f in &step.filters {
            conditions.push(FilterCondition::new(resolve(&props, &f.property)?, f.comparator, f.value.clone()));
        }
    }
    let print = |pane: &Pane, out: &mut dyn Write| print_pane(pane, out).map_err(|e| e.to_string());
    let pane = match (&step.expansion, conditions.is_empty()) {
        (ExpansionKind::Filter(_), _) | (_, true) => {
            let kind = match step.expansion {
                ExpansionKind::Filter(_) => ExpansionKind::Filter(conditions),
                ref k => k.clone(),
            };
            let pane = session.expand(parent, &label, kind).map_err(|e| e.to_string())?;
            print(pane, out)?;
            pane.id
        }
        (kind, false) => {
            let filtered = session
                .expand(parent, &label, ExpansionKind::Filter(conditions))
                .map_err(|e| e.to_string())?;
            print(filtered, out)?;
            let filtered = filtered.id;
            let pane = session.expand(filtered, &label, kind.clone()).map_err(|e| e.to_string())?;
            print(pane, out)?;
            pane.id
        }
    };
    Ok(pane)
}

/// Replays `steps` over `graph`, printing the initial pane and every pane
/// opened. Stops at the first rejected step.
pub fn replay(graph: Graph, root: &str, steps: &[ScriptStep], out: &mut dyn Write) -> Result<(), Failure> {
    let source = Arc::new(GraphSource::new(Arc::new(graph), EngineConfig::with_root(root)));
    let mut session = Session::new(source as Arc<dyn ChartSource>).map_err(|e| Failure::Exploration(e.to_string()))?;
    let io = |e: std::io::Error| Failure::Config(format!("cannot write transcript: {e}"));
    print_pane(&session.panes()[0], out).map_err(io)?;
    let mut current = 0;
    for step in steps {
        current = apply(&mut session, current, step, out)
            .map_err(|e| Failure::Exploration(format!("script line {}: {e}", step.line)))?;
    }
    session
        .validate()
        .map_err(|(id, e)| Failure::Exploration(format!("pane {id} is not valid: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_steps() {
        let steps = parse("# demo\n\nselect Album expand prop_out\nfrom 2 select A expand subclass filter name contains \"a b\" # trailing\nselect <http://x/#A> expand subclass\n").unwrap();
        assert_eq!(steps.len(), 3);
        assert_eq!(steps[2].label, "<http://x/#A>");
        assert_eq!(steps[0].line, 3);
        assert_eq!(steps[1].from, Some(2));
        assert_eq!(steps[1].filters[0].value, FilterValue::literal("a b"));
        assert_eq!(steps[1].filters[0].comparator, Comparator::Contains);
    }

    #[test]
    fn rejects_malformed_lines() {
        for bad in [
            "select",
            "pick Album expand subclass",
            "select Album expand sideways",
            "select Album expand subclass filter name",
            "select Album expand subclass filter name near x",
            "select Album expand filter",
            "from x select A expand subclass",
            "select \"Album expand subclass",
        ] {
            assert!(matches!(parse(bad), Err(Failure::Parse(_))), "{bad}");
        }
    }
}
