//! Embedded evaluation of the SPARQL fragment produced by the generator:
//! basic graph patterns, property paths, OPTIONAL, FILTER, BIND, VALUES,
//! subqueries, GROUP BY with aggregates, ORDER BY, DISTINCT and LIMIT/OFFSET.
//!
//! Queries are parsed with `spargebra`; evaluation walks its algebra.

mod expr;
mod path;
mod value;

use std::cell::{Cell, RefCell};
use std::collections::{HashMap, HashSet};
use std::ops::Range;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use indexmap::IndexMap;
use spargebra::algebra::{
    AggregateExpression, AggregateFunction, Expression, GraphPattern, OrderExpression,
    PropertyPathExpression,
};
use spargebra::term::{GroundTerm, NamedNodePattern, TermPattern};
use spargebra::{Query, SparqlParser};
use thiserror::Error;

use super::gen::CHUNK_GRAPH;
use crate::rdf::{Graph, Literal, Term, TermId, Triple};
use crate::results::{Origin, QueryResult};

pub use value::{term_order, Solution, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("SPARQL syntax error: {0}")]
    Syntax(String),
    #[error("unsupported query: {0}")]
    UnsupportedQuery(String),
    #[error("query deadline exceeded")]
    Timeout,
}

type R<T> = Result<T, EvalError>;

#[derive(Debug, Clone)]
pub struct EvalOptions {
    pub deadline: Option<Instant>,
    /// Triple positions visible inside `GRAPH <urn:x-ldx:chunk>`. `None`
    /// exposes the whole graph.
    pub chunk: Option<Range<usize>>,
    /// When false, every triple pattern is answered by scanning the full
    /// triple list instead of consulting the indexes.
    pub use_indexes: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            deadline: None,
            chunk: None,
            use_indexes: true,
        }
    }
}

impl EvalOptions {
    pub fn scan_only() -> Self {
        EvalOptions {
            use_indexes: false,
            ..EvalOptions::default()
        }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.deadline = Some(Instant::now() + timeout);
        self
    }
}

type Scope = Option<(u32, u32)>;
type MemoKey = (usize, Scope, Scope);

/// Results of subpatterns evaluated on their own. Entries for subpatterns
/// without a GRAPH clause stay valid across chunks of one prepared query.
#[derive(Debug, Default)]
pub struct Memo {
    entries: HashMap<MemoKey, Arc<Evaluated>>,
}

type JoinIndex = HashMap<Vec<Value>, Vec<u32>>;

/// Solutions of an independently evaluated subpattern, with hash indexes
/// built on demand for each set of join slots.
#[derive(Debug)]
struct Evaluated {
    sols: Vec<Solution>,
    /// Slots bound in every solution.
    always: Vec<usize>,
    indexes: Mutex<HashMap<Vec<usize>, Arc<JoinIndex>>>,
}

impl Evaluated {
    fn new(sols: Vec<Solution>, slots: usize) -> Self {
        let always = (0..slots)
            .filter(|i| sols.iter().all(|s| s[*i].is_some()))
            .collect();
        Evaluated {
            sols,
            always,
            indexes: Mutex::new(HashMap::new()),
        }
    }

    fn index(&self, keys: &[usize]) -> Arc<JoinIndex> {
        if let Some(hit) = self.indexes.lock().expect("index lock").get(keys) {
            return hit.clone();
        }
        let mut index = JoinIndex::new();
        for (i, s) in self.sols.iter().enumerate() {
            let key = keys.iter().map(|k| s[*k].clone().expect("always bound")).collect();
            index.entry(key).or_default().push(i as u32);
        }
        let index = Arc::new(index);
        self.indexes
            .lock()
            .expect("index lock")
            .insert(keys.to_vec(), index.clone());
        index
    }
}

/// A parsed and validated SELECT query.
#[derive(Debug, Clone)]
pub struct PreparedQuery {
    pattern: GraphPattern,
    vars: HashMap<String, usize>,
    columns: Vec<(String, usize)>,
}

impl PreparedQuery {
    pub fn parse(text: &str) -> R<Self> {
        let query = SparqlParser::new()
            .parse_query(text)
            .map_err(|e| EvalError::Syntax(e.to_string()))?;
        let Query::Select {
            pattern, dataset, ..
        } = query
        else {
            return Err(EvalError::UnsupportedQuery("only SELECT queries".into()));
        };
        if dataset.is_some() {
            return Err(EvalError::UnsupportedQuery("FROM clauses".into()));
        }
        let mut vars = HashMap::new();
        collect_pattern(&pattern, &mut vars)?;
        let columns = top_projection(&pattern)
            .iter()
            .map(|v| (v.to_string(), vars[*v]))
            .collect();
        Ok(PreparedQuery {
            pattern,
            vars,
            columns,
        })
    }

    pub fn columns(&self) -> Vec<String> {
        self.columns.iter().map(|(n, _)| n.clone()).collect()
    }

    pub fn evaluate(&self, graph: &Graph, options: &EvalOptions, memo: &mut Memo) -> R<QueryResult> {
        let started = Instant::now();
        let chunk = options.chunk.as_ref().map(|r| {
            let end = r.end.min(graph.len());
            (r.start.min(end) as u32, end as u32)
        });
        let ctx = Ctx {
            graph,
            options,
            slots: self.vars.len(),
            vars: &self.vars,
            memo: RefCell::new(memo),
            ticks: Cell::new(0),
            chunk,
        };
        let solutions = ctx.eval(&self.pattern, vec![ctx.unit()], None)?;
        let rows = solutions
            .into_iter()
            .map(|sol| {
                self.columns
                    .iter()
                    .map(|(_, slot)| sol[*slot].as_ref().map(|v| v.term(graph).clone()))
                    .collect()
            })
            .collect();
        Ok(QueryResult {
            columns: self.columns(),
            rows,
            origin: Origin::Embedded,
            elapsed: started.elapsed(),
        })
    }
}

/// Parses and evaluates `text` against `graph` with default options.
pub fn evaluate(text: &str, graph: &Graph) -> R<QueryResult> {
    evaluate_with(text, graph, &EvalOptions::default())
}

pub fn evaluate_with(text: &str, graph: &Graph, options: &EvalOptions) -> R<QueryResult> {
    PreparedQuery::parse(text)?.evaluate(graph, options, &mut Memo::default())
}

/// Checks that `text` parses as SPARQL 1.1 and stays inside the supported fragment.
pub fn check(text: &str) -> R<()> {
    PreparedQuery::parse(text).map(|_| ())
}

fn top_projection(p: &GraphPattern) -> Vec<&str> {
    match p {
        GraphPattern::Project { variables, .. } => variables.iter().map(|v| v.as_str()).collect(),
        GraphPattern::Slice { inner, .. }
        | GraphPattern::Distinct { inner }
        | GraphPattern::Reduced { inner }
        | GraphPattern::OrderBy { inner, .. } => top_projection(inner),
        _ => Vec::new(),
    }
}

fn unsupported<T>(what: &str) -> R<T> {
    Err(EvalError::UnsupportedQuery(what.to_string()))
}

fn var_slot(vars: &mut HashMap<String, usize>, name: &str) {
    let next = vars.len();
    vars.entry(name.to_string()).or_insert(next);
}

fn collect_term(t: &TermPattern, vars: &mut HashMap<String, usize>) -> R<()> {
    match t {
        TermPattern::Variable(v) => var_slot(vars, v.as_str()),
        TermPattern::BlankNode(b) => var_slot(vars, &format!("_:{}", b.as_str())),
        TermPattern::NamedNode(_) | TermPattern::Literal(_) => {}
        #[allow(unreachable_patterns)]
        _ => return unsupported("quoted triples"),
    }
    Ok(())
}

fn collect_path(p: &PropertyPathExpression) -> R<()> {
    match p {
        PropertyPathExpression::NamedNode(_) | PropertyPathExpression::NegatedPropertySet(_) => Ok(()),
        PropertyPathExpression::Reverse(a)
        | PropertyPathExpression::ZeroOrMore(a)
        | PropertyPathExpression::OneOrMore(a)
        | PropertyPathExpression::ZeroOrOne(a) => collect_path(a),
        PropertyPathExpression::Sequence(a, b) | PropertyPathExpression::Alternative(a, b) => {
            collect_path(a)?;
            collect_path(b)
        }
    }
}

fn collect_pattern(p: &GraphPattern, vars: &mut HashMap<String, usize>) -> R<()> {
    match p {
        GraphPattern::Bgp { patterns } => {
            for tp in patterns {
                collect_term(&tp.subject, vars)?;
                if let NamedNodePattern::Variable(v) = &tp.predicate {
                    var_slot(vars, v.as_str());
                }
                collect_term(&tp.object, vars)?;
            }
        }
        GraphPattern::Path {
            subject,
            path,
            object,
        } => {
            collect_term(subject, vars)?;
            collect_path(path)?;
            collect_term(object, vars)?;
        }
        GraphPattern::Join { left, right } => {
            collect_pattern(left, vars)?;
            collect_pattern(right, vars)?;
        }
        GraphPattern::LeftJoin {
            left,
            right,
            expression,
        } => {
            collect_pattern(left, vars)?;
            collect_pattern(right, vars)?;
            if let Some(e) = expression {
                collect_expr(e, vars)?;
            }
        }
        GraphPattern::Filter { expr, inner } => {
            collect_expr(expr, vars)?;
            collect_pattern(inner, vars)?;
        }
        GraphPattern::Graph { name, inner } => {
            match name {
                NamedNodePattern::NamedNode(n) if n.as_str() == CHUNK_GRAPH => {}
                _ => return unsupported("named graphs other than the chunk graph"),
            }
            collect_pattern(inner, vars)?;
        }
        GraphPattern::Extend {
            inner,
            variable,
            expression,
        } => {
            collect_pattern(inner, vars)?;
            collect_expr(expression, vars)?;
            var_slot(vars, variable.as_str());
        }
        GraphPattern::Values {
            variables,
            bindings,
        } => {
            for v in variables {
                var_slot(vars, v.as_str());
            }
            for row in bindings {
                for cell in row.iter().flatten() {
                    match cell {
                        GroundTerm::NamedNode(_) | GroundTerm::Literal(_) => {}
                        #[allow(unreachable_patterns)]
                        _ => return unsupported("quoted triples"),
                    }
                }
            }
        }
        GraphPattern::OrderBy { inner, expression } => {
            collect_pattern(inner, vars)?;
            for o in expression {
                match o {
                    OrderExpression::Asc(e) | OrderExpression::Desc(e) => collect_expr(e, vars)?,
                }
            }
        }
        GraphPattern::Project { inner, variables } => {
            collect_pattern(inner, vars)?;
            for v in variables {
                var_slot(vars, v.as_str());
            }
        }
        GraphPattern::Distinct { inner }
        | GraphPattern::Reduced { inner }
        | GraphPattern::Slice { inner, .. } => collect_pattern(inner, vars)?,
        GraphPattern::Group {
            inner,
            variables,
            aggregates,
        } => {
            collect_pattern(inner, vars)?;
            for v in variables {
                var_slot(vars, v.as_str());
            }
            for (v, agg) in aggregates {
                var_slot(vars, v.as_str());
                match agg {
                    AggregateExpression::CountSolutions { .. } => {}
                    AggregateExpression::FunctionCall { name, expr, .. } => {
                        if let AggregateFunction::Custom(n) = name {
                            return unsupported(&format!("custom aggregate {n}"));
                        }
                        collect_expr(expr, vars)?;
                    }
                }
            }
        }
        GraphPattern::Union { .. } => return unsupported("UNION"),
        GraphPattern::Minus { .. } => return unsupported("MINUS"),
        GraphPattern::Service { .. } => return unsupported("SERVICE"),
        #[allow(unreachable_patterns)]
        _ => return unsupported("LATERAL"),
    }
    Ok(())
}

fn collect_expr(e: &Expression, vars: &mut HashMap<String, usize>) -> R<()> {
    match e {
        Expression::NamedNode(_) | Expression::Literal(_) => {}
        Expression::Variable(v) | Expression::Bound(v) => var_slot(vars, v.as_str()),
        Expression::Or(a, b)
        | Expression::And(a, b)
        | Expression::Equal(a, b)
        | Expression::SameTerm(a, b)
        | Expression::Greater(a, b)
        | Expression::GreaterOrEqual(a, b)
        | Expression::Less(a, b)
        | Expression::LessOrEqual(a, b)
        | Expression::Add(a, b)
        | Expression::Subtract(a, b)
        | Expression::Multiply(a, b)
        | Expression::Divide(a, b) => {
            collect_expr(a, vars)?;
            collect_expr(b, vars)?;
        }
        Expression::In(a, list) => {
            collect_expr(a, vars)?;
            for x in list {
                collect_expr(x, vars)?;
            }
        }
        Expression::UnaryPlus(a) | Expression::UnaryMinus(a) | Expression::Not(a) => {
            collect_expr(a, vars)?
        }
        Expression::Exists(p) => collect_pattern(p, vars)?,
        Expression::If(a, b, c) => {
            collect_expr(a, vars)?;
            collect_expr(b, vars)?;
            collect_expr(c, vars)?;
        }
        Expression::Coalesce(list) => {
            for x in list {
                collect_expr(x, vars)?;
            }
        }
        Expression::FunctionCall(f, args) => {
            if !expr::supported_function(f) {
                return unsupported(&format!("function {f}"));
            }
            for x in args {
                collect_expr(x, vars)?;
            }
        }
    }
    Ok(())
}

fn contains_graph(p: &GraphPattern) -> bool {
    match p {
        GraphPattern::Graph { .. } => true,
        GraphPattern::Bgp { .. } | GraphPattern::Path { .. } | GraphPattern::Values { .. } => false,
        GraphPattern::Join { left, right }
        | GraphPattern::LeftJoin { left, right, .. }
        | GraphPattern::Union { left, right }
        | GraphPattern::Minus { left, right } => contains_graph(left) || contains_graph(right),
        GraphPattern::Filter { inner, .. }
        | GraphPattern::Extend { inner, .. }
        | GraphPattern::OrderBy { inner, .. }
        | GraphPattern::Project { inner, .. }
        | GraphPattern::Distinct { inner }
        | GraphPattern::Reduced { inner }
        | GraphPattern::Slice { inner, .. }
        | GraphPattern::Group { inner, .. }
        | GraphPattern::Service { inner, .. } => contains_graph(inner),
        #[allow(unreachable_patterns)]
        _ => true,
    }
}

/// Patterns that can be evaluated once per incoming solution with that
/// solution's bindings in place. Others are evaluated on their own and joined.
fn seedable(p: &GraphPattern) -> bool {
    match p {
        GraphPattern::Bgp { .. } | GraphPattern::Path { .. } | GraphPattern::Join { .. } => true,
        GraphPattern::Graph { inner, .. } => seedable(inner),
        _ => false,
    }
}

/// A triple pattern position after applying the current bindings.
#[derive(Debug, Clone, Copy)]
enum Pos {
    Bound(TermId),
    Free(usize),
    /// A constant or binding that occurs in no triple.
    Impossible,
}

struct Ctx<'a> {
    graph: &'a Graph,
    options: &'a EvalOptions,
    slots: usize,
    vars: &'a HashMap<String, usize>,
    memo: RefCell<&'a mut Memo>,
    ticks: Cell<u32>,
    chunk: Scope,
}

impl<'a> Ctx<'a> {
    fn unit(&self) -> Solution {
        vec![None; self.slots].into_boxed_slice()
    }

    fn slot(&self, name: &str) -> usize {
        self.vars[name]
    }

    fn tick(&self) -> R<()> {
        let t = self.ticks.get().wrapping_add(1);
        self.ticks.set(t);
        if t % 4096 == 0 {
            if let Some(deadline) = self.options.deadline {
                if Instant::now() >= deadline {
                    return Err(EvalError::Timeout);
                }
            }
        }
        Ok(())
    }

    fn value(&self, term: Term) -> Value {
        Value::from_term(self.graph, term)
    }

    fn const_term(&self, t: &TermPattern) -> Option<Term> {
        match t {
            TermPattern::NamedNode(n) => Some(Term::uri(n.as_str())),
            TermPattern::Literal(l) => Some(Term::Literal(convert_literal(l))),
            _ => None,
        }
    }

    fn pos(&self, t: &TermPattern, sol: &Solution) -> Pos {
        let slot = match t {
            TermPattern::Variable(v) => self.slot(v.as_str()),
            TermPattern::BlankNode(b) => self.slot(&format!("_:{}", b.as_str())),
            other => {
                return match self.const_term(other).and_then(|t| self.graph.lookup(&t)) {
                    Some(id) => Pos::Bound(id),
                    None => Pos::Impossible,
                }
            }
        };
        bound_pos(&sol[slot], slot)
    }

    fn named_pos(&self, n: &NamedNodePattern, sol: &Solution) -> Pos {
        match n {
            NamedNodePattern::NamedNode(n) => match self.graph.lookup_uri(n.as_str()) {
                Some(id) => Pos::Bound(id),
                None => Pos::Impossible,
            },
            NamedNodePattern::Variable(v) => {
                let slot = self.slot(v.as_str());
                bound_pos(&sol[slot], slot)
            }
        }
    }

    fn eval(&self, p: &GraphPattern, seeds: Vec<Solution>, scope: Scope) -> R<Vec<Solution>> {
        if seeds.is_empty() {
            return Ok(seeds);
        }
        let unit = seeds.len() == 1 && seeds[0].iter().all(Option::is_none);
        if unit || seedable(p) {
            return self.eval_direct(p, seeds, scope);
        }
        let inner = self.eval_alone(p, scope)?;
        self.join(seeds, &inner)
    }

    /// Evaluates `p` without outside bindings, reusing earlier results.
    fn eval_alone(&self, p: &GraphPattern, scope: Scope) -> R<Arc<Evaluated>> {
        let chunk = if contains_graph(p) { self.chunk } else { None };
        let key = (p as *const GraphPattern as usize, chunk, scope);
        if let Some(hit) = self.memo.borrow().entries.get(&key) {
            return Ok(hit.clone());
        }
        let result = Arc::new(Evaluated::new(
            self.eval_direct(p, vec![self.unit()], scope)?,
            self.slots,
        ));
        self.memo.borrow_mut().entries.insert(key, result.clone());
        Ok(result)
    }

    fn join(&self, left: Vec<Solution>, right: &Evaluated) -> R<Vec<Solution>> {
        let mut out = Vec::new();
        for l in &left {
            self.matches(l, right, &mut |m| {
                out.push(m);
                true
            })?;
        }
        Ok(out)
    }

    /// Feeds every compatible merge of `l` with a row of `right` to `f`
    /// until it returns false.
    fn matches(&self, l: &Solution, right: &Evaluated, f: &mut dyn FnMut(Solution) -> bool) -> R<()> {
        let keys: Vec<usize> = right.always.iter().copied().filter(|k| l[*k].is_some()).collect();
        let mut visit = |i: usize| -> R<bool> {
            self.tick()?;
            Ok(match merge(l, &right.sols[i]) {
                Some(m) => f(m),
                None => true,
            })
        };
        if keys.is_empty() {
            for i in 0..right.sols.len() {
                if !visit(i)? {
                    break;
                }
            }
            return Ok(());
        }
        let index = right.index(&keys);
        let key: Vec<Value> = keys.iter().map(|k| l[*k].clone().expect("bound")).collect();
        for i in index.get(&key).map(Vec::as_slice).unwrap_or_default() {
            if !visit(*i as usize)? {
                break;
            }
        }
        Ok(())
    }

    fn eval_direct(&self, p: &GraphPattern, seeds: Vec<Solution>, scope: Scope) -> R<Vec<Solution>> {
        match p {
            GraphPattern::Bgp { patterns } => {
                let mut current = seeds;
                for tp in patterns {
                    let mut next = Vec::new();
                    for sol in &current {
                        let s = self.pos(&tp.subject, sol);
                        let pr = self.named_pos(&tp.predicate, sol);
                        let o = self.pos(&tp.object, sol);
                        self.match_triple(s, pr, o, sol, scope, &mut next)?;
                    }
                    current = next;
                    if current.is_empty() {
                        break;
                    }
                }
                Ok(current)
            }
            GraphPattern::Path {
                subject,
                path,
                object,
            } => {
                let mut out = Vec::new();
                for sol in &seeds {
                    let s = self.pos(subject, sol);
                    let o = self.pos(object, sol);
                    self.match_path(s, path, o, sol, scope, &mut out)?;
                }
                Ok(out)
            }
            GraphPattern::Join { left, right } => {
                let l = self.eval(left, seeds, scope)?;
                self.eval(right, l, scope)
            }
            GraphPattern::LeftJoin {
                left,
                right,
                expression,
            } => {
                let lefts = self.eval(left, seeds, scope)?;
                let alone = if seedable(right) {
                    None
                } else {
                    Some(self.eval_alone(right, scope)?)
                };
                let mut out = Vec::with_capacity(lefts.len());
                for l in lefts {
                    let mut matched = match &alone {
                        None => self.eval(right, vec![l.clone()], scope)?,
                        Some(r) => {
                            let mut m = Vec::new();
                            self.matches(&l, r, &mut |x| {
                                m.push(x);
                                true
                            })?;
                            m
                        }
                    };
                    if let Some(e) = expression {
                        let mut kept = Vec::with_capacity(matched.len());
                        for m in matched {
                            if self.truthy(e, &m, scope)? {
                                kept.push(m);
                            }
                        }
                        matched = kept;
                    }
                    if matched.is_empty() {
                        out.push(l);
                    } else {
                        out.extend(matched);
                    }
                }
                Ok(out)
            }
            GraphPattern::Filter { expr, inner } => {
                let sols = self.eval(inner, seeds, scope)?;
                let mut out = Vec::with_capacity(sols.len());
                for s in sols {
                    if self.truthy(expr, &s, scope)? {
                        out.push(s);
                    }
                }
                Ok(out)
            }
            GraphPattern::Graph { inner, .. } => {
                let range = self
                    .chunk
                    .unwrap_or((0, u32::try_from(self.graph.len()).unwrap_or(u32::MAX)));
                self.eval(inner, seeds, Some(range))
            }
            GraphPattern::Extend {
                inner,
                variable,
                expression,
            } => {
                let slot = self.slot(variable.as_str());
                let mut sols = self.eval(inner, seeds, scope)?;
                for s in &mut sols {
                    if s[slot].is_none() {
                        s[slot] = self.eval_expr(expression, s, scope)?;
                    }
                }
                Ok(sols)
            }
            GraphPattern::Values {
                variables,
                bindings,
            } => {
                let slots: Vec<usize> = variables.iter().map(|v| self.slot(v.as_str())).collect();
                let rows: Vec<Solution> = bindings
                    .iter()
                    .map(|row| {
                        let mut sol = self.unit();
                        for (slot, cell) in slots.iter().zip(row) {
                            sol[*slot] = cell.as_ref().and_then(|c| match c {
                                GroundTerm::NamedNode(n) => Some(self.value(Term::uri(n.as_str()))),
                                GroundTerm::Literal(l) => Some(self.value(Term::Literal(convert_literal(l)))),
                                #[allow(unreachable_patterns)]
                                _ => None,
                            });
                        }
                        sol
                    })
                    .collect();
                self.join(seeds, &Evaluated::new(rows, self.slots))
            }
            GraphPattern::OrderBy { inner, expression } => {
                let sols = self.eval(inner, seeds, scope)?;
                let mut keyed = Vec::with_capacity(sols.len());
                for s in sols {
                    let mut key = Vec::with_capacity(expression.len());
                    for o in expression {
                        let (OrderExpression::Asc(e) | OrderExpression::Desc(e)) = o;
                        key.push(self.eval_expr(e, &s, scope)?);
                    }
                    keyed.push((key, s));
                }
                keyed.sort_by(|(a, _), (b, _)| {
                    for (i, o) in expression.iter().enumerate() {
                        let ord = term_order(
                            a[i].as_ref().map(|v| v.term(self.graph)),
                            b[i].as_ref().map(|v| v.term(self.graph)),
                        );
                        let ord = match o {
                            OrderExpression::Asc(_) => ord,
                            OrderExpression::Desc(_) => ord.reverse(),
                        };
                        if ord != std::cmp::Ordering::Equal {
                            return ord;
                        }
                    }
                    std::cmp::Ordering::Equal
                });
                Ok(keyed.into_iter().map(|(_, s)| s).collect())
            }
            GraphPattern::Project { inner, variables } => {
                let keep: Vec<usize> = variables.iter().map(|v| self.slot(v.as_str())).collect();
                let sols = self.eval(inner, seeds, scope)?;
                Ok(sols
                    .into_iter()
                    .map(|s| {
                        let mut out = self.unit();
                        for k in &keep {
                            out[*k] = s[*k].clone();
                        }
                        out
                    })
                    .collect())
            }
            GraphPattern::Distinct { inner } | GraphPattern::Reduced { inner } => {
                let sols = self.eval(inner, seeds, scope)?;
                let mut seen = HashSet::with_capacity(sols.len());
                Ok(sols.into_iter().filter(|s| seen.insert(s.clone())).collect())
            }
            GraphPattern::Slice {
                inner,
                start,
                length,
            } => {
                let sols = self.eval(inner, seeds, scope)?;
                let it = sols.into_iter().skip(*start);
                Ok(match length {
                    Some(n) => it.take(*n).collect(),
                    None => it.collect(),
                })
            }
            GraphPattern::Group {
                inner,
                variables,
                aggregates,
            } => {
                let sols = self.eval(inner, seeds, scope)?;
                let keys: Vec<usize> = variables.iter().map(|v| self.slot(v.as_str())).collect();
                let mut groups: IndexMap<Vec<Option<Value>>, Vec<Solution>> = IndexMap::new();
                for s in sols {
                    let key = keys.iter().map(|k| s[*k].clone()).collect();
                    groups.entry(key).or_default().push(s);
                }
                if groups.is_empty() && keys.is_empty() {
                    groups.insert(Vec::new(), Vec::new());
                }
                let mut out = Vec::with_capacity(groups.len());
                for (key, members) in groups {
                    let mut sol = self.unit();
                    for (slot, v) in keys.iter().zip(key) {
                        sol[*slot] = v;
                    }
                    for (var, agg) in aggregates {
                        sol[self.slot(var.as_str())] = self.aggregate(agg, &members, scope)?;
                    }
                    out.push(sol);
                }
                Ok(out)
            }
            GraphPattern::Union { .. } => unsupported("UNION"),
            GraphPattern::Minus { .. } => unsupported("MINUS"),
            GraphPattern::Service { .. } => unsupported("SERVICE"),
            #[allow(unreachable_patterns)]
            _ => unsupported("LATERAL"),
        }
    }

    fn match_triple(&self, s: Pos, p: Pos, o: Pos, sol: &Solution, scope: Scope, out: &mut Vec<Solution>) -> R<()> {
        let bound = |x: Pos| match x {
            Pos::Bound(id) => Some(id),
            _ => None,
        };
        if matches!(s, Pos::Impossible) || matches!(p, Pos::Impossible) || matches!(o, Pos::Impossible) {
            return Ok(());
        }
        let (bs, bp, bo) = (bound(s), bound(p), bound(o));
        let mut emit = |t: &Triple| -> R<()> {
            self.tick()?;
            if bs.is_some_and(|x| x != t.subject)
                || bp.is_some_and(|x| x != t.predicate)
                || bo.is_some_and(|x| x != t.object)
            {
                return Ok(());
            }
            let mut next = sol.clone();
            for (pos, id) in [(s, t.subject), (p, t.predicate), (o, t.object)] {
                if let Pos::Free(slot) = pos {
                    match &next[slot] {
                        Some(v) if v.id() != Some(id) => return Ok(()),
                        Some(_) => {}
                        None => next[slot] = Some(Value::Id(id)),
                    }
                }
            }
            out.push(next);
            Ok(())
        };
        self.scan(bs, bp, bo, scope, &mut emit)
    }

    /// Calls `f` for candidate triples; the caller rechecks bound positions.
    fn scan(
        &self,
        s: Option<TermId>,
        p: Option<TermId>,
        o: Option<TermId>,
        scope: Scope,
        f: &mut dyn FnMut(&Triple) -> R<()>,
    ) -> R<()> {
        let g = self.graph;
        let triples = g.triples();
        if !self.options.use_indexes {
            let (a, b) = scope.unwrap_or((0, triples.len() as u32));
            for t in &triples[a as usize..b as usize] {
                f(t)?;
            }
            return Ok(());
        }
        if scope.is_none() {
            if let (Some(s), Some(p)) = (s, p) {
                for &o in g.objects(s, p) {
                    f(&Triple {
                        subject: s,
                        predicate: p,
                        object: o,
                    })?;
                }
                return Ok(());
            }
            if let (Some(p), Some(o)) = (p, o) {
                for &s in g.subjects(p, o) {
                    f(&Triple {
                        subject: s,
                        predicate: p,
                        object: o,
                    })?;
                }
                return Ok(());
            }
        }
        let positions = if let Some(s) = s {
            g.positions_with_subject(s)
        } else if let Some(o) = o {
            g.positions_with_object(o)
        } else if let Some(p) = p {
            g.positions_with_predicate(p)
        } else {
            let (a, b) = scope.unwrap_or((0, triples.len() as u32));
            for t in &triples[a as usize..b as usize] {
                f(t)?;
            }
            return Ok(());
        };
        for pos in restrict(positions, scope) {
            f(&triples[*pos as usize])?;
        }
        Ok(())
    }
}

fn bound_pos(v: &Option<Value>, slot: usize) -> Pos {
    match v {
        None => Pos::Free(slot),
        Some(Value::Id(id)) => Pos::Bound(*id),
        Some(Value::Owned(_)) => Pos::Impossible,
    }
}

/// Narrows an ascending position list to the scope's range.
fn restrict(positions: &[u32], scope: Scope) -> &[u32] {
    match scope {
        None => positions,
        Some((a, b)) => {
            let start = positions.partition_point(|p| *p < a);
            let end = positions.partition_point(|p| *p < b);
            &positions[start..end]
        }
    }
}

fn merge(a: &Solution, b: &Solution) -> Option<Solution> {
    let mut out = a.clone();
    for (i, v) in b.iter().enumerate() {
        match (&out[i], v) {
            (_, None) => {}
            (None, Some(v)) => out[i] = Some(v.clone()),
            (Some(x), Some(y)) if x == y => {}
            _ => return None,
        }
    }
    Some(out)
}

fn convert_literal(l: &spargebra::term::Literal) -> Literal {
    match l.language() {
        Some(lang) => Literal::with_language(l.value(), lang),
        None => Literal::typed(l.value(), l.datatype().as_str()),
    }
}
