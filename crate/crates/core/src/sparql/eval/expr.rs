//! Expressions and aggregates. Errors are `None` and follow the SPARQL rules
//! for `&&`, `||`, `IN`, `IF` and `COALESCE`.

use std::cmp::Ordering;
use std::collections::HashSet;

use spargebra::algebra::{AggregateExpression, AggregateFunction, Expression, Function};

use super::value::{boolean, double, ebv, integer, term_order};
use super::{convert_literal, Ctx, Scope, Solution, Value, R};
use crate::rdf::vocab::{xsd, RDF_NS, XSD_STRING};
use crate::rdf::{Literal, Term, TermId};

/// An intermediate value: a graph term by reference or a computed term.
pub(super) enum Ev<'a> {
    Id(TermId, &'a Term),
    Owned(Term),
}

impl Ev<'_> {
    fn term(&self) -> &Term {
        match self {
            Ev::Id(_, t) => t,
            Ev::Owned(t) => t,
        }
    }
}

pub(super) fn supported_function(f: &Function) -> bool {
    match f {
        Function::Str
        | Function::Lang
        | Function::LangMatches
        | Function::Datatype
        | Function::Abs
        | Function::Ceil
        | Function::Floor
        | Function::Round
        | Function::Concat
        | Function::StrLen
        | Function::UCase
        | Function::LCase
        | Function::Contains
        | Function::StrStarts
        | Function::StrEnds
        | Function::IsIri
        | Function::IsBlank
        | Function::IsLiteral
        | Function::IsNumeric => true,
        Function::Custom(name) => cast_target(name.as_str()).is_some(),
        _ => false,
    }
}

#[derive(Clone, Copy)]
enum Cast {
    Integer,
    Double,
    Decimal,
    String,
}

fn cast_target(iri: &str) -> Option<Cast> {
    let local = iri.strip_prefix(crate::rdf::vocab::XSD_NS)?;
    Some(match local {
        "integer" => Cast::Integer,
        "double" | "float" => Cast::Double,
        "decimal" => Cast::Decimal,
        "string" => Cast::String,
        _ => return None,
    })
}

/// Literals usable as string arguments: simple and language-tagged.
fn string_arg(t: &Term) -> Option<&Literal> {
    t.as_literal().filter(|l| l.datatype.is_none())
}

fn simple(s: impl Into<String>) -> Term {
    Term::literal(s)
}

fn same_lang(l: &Literal, s: String) -> Term {
    Term::Literal(Literal {
        lexical: s,
        language: l.language.clone(),
        datatype: None,
    })
}

/// `=` on two terms. `None` when the comparison is a type error.
fn rdf_equal(a: &Term, b: &Term) -> Option<bool> {
    if let (Some(x), Some(y)) = (a.numeric_value(), b.numeric_value()) {
        return Some(x == y);
    }
    if a == b {
        return Some(true);
    }
    match (a, b) {
        (Term::Literal(x), Term::Literal(y)) => {
            let known = |l: &Literal| {
                l.datatype.is_none()
                    || l.datatype.as_deref().is_some_and(|d| {
                        crate::rdf::is_numeric_datatype(d) || d == xsd("boolean")
                    })
            };
            if known(x) && known(y) {
                Some(false)
            } else {
                None
            }
        }
        _ => Some(false),
    }
}

/// `<` and friends: numbers by value, plain strings lexically.
fn compare(a: &Term, b: &Term) -> Option<Ordering> {
    if let (Some(x), Some(y)) = (a.numeric_value(), b.numeric_value()) {
        return x.partial_cmp(&y);
    }
    match (a, b) {
        (Term::Literal(x), Term::Literal(y))
            if x.datatype == y.datatype
                && x.language == y.language
                && (x.datatype.is_none() || x.datatype.as_deref() == Some(&xsd("boolean"))) =>
        {
            Some(x.lexical.cmp(&y.lexical))
        }
        _ => None,
    }
}

#[derive(Clone, Copy)]
enum Op {
    Add,
    Sub,
    Mul,
    Div,
}

fn arithmetic(op: Op, a: &Term, b: &Term) -> Option<Term> {
    let (la, lb) = (a.as_literal()?, b.as_literal()?);
    let (x, y) = (la.numeric_value()?, lb.numeric_value()?);
    if la.is_integer_typed() && lb.is_integer_typed() && !matches!(op, Op::Div) {
        let (i, j) = (la.lexical.trim().parse::<i64>().ok()?, lb.lexical.trim().parse::<i64>().ok()?);
        let r = match op {
            Op::Add => i.checked_add(j),
            Op::Sub => i.checked_sub(j),
            Op::Mul => i.checked_mul(j),
            Op::Div => None,
        }?;
        return Some(integer(r));
    }
    if matches!(op, Op::Div) && y == 0.0 && la.is_integer_typed() && lb.is_integer_typed() {
        return None;
    }
    Some(double(match op {
        Op::Add => x + y,
        Op::Sub => x - y,
        Op::Mul => x * y,
        Op::Div => x / y,
    }))
}

fn numeric_unary(t: &Term, f: impl Fn(f64) -> f64) -> Option<Term> {
    let lit = t.as_literal()?;
    let v = lit.numeric_value()?;
    let r = f(v);
    if lit.is_integer_typed() && r.fract() == 0.0 && r.abs() < i64::MAX as f64 {
        return Some(integer(r as i64));
    }
    Some(double(r))
}

fn cast(target: Cast, t: &Term) -> Option<Term> {
    match target {
        Cast::String => Some(simple(t.lexical())),
        Cast::Double | Cast::Decimal => {
            let lit = t.as_literal()?;
            let v = lit
                .numeric_value()
                .or_else(|| lit.datatype.is_none().then(|| lit.lexical.trim().parse().ok()).flatten())?;
            Some(match target {
                Cast::Decimal => Term::Literal(Literal::typed(format!("{v}"), xsd("decimal"))),
                _ => double(v),
            })
        }
        Cast::Integer => {
            let lit = t.as_literal()?;
            if let Ok(i) = lit.lexical.trim().parse::<i64>() {
                return Some(integer(i));
            }
            let v = lit.numeric_value()?;
            v.is_finite().then(|| integer(v.trunc() as i64))
        }
    }
}

impl<'a> Ctx<'a> {
    fn ev_of(&self, v: &Value) -> Ev<'a> {
        match v {
            Value::Id(id) => Ev::Id(*id, self.graph.term(*id)),
            Value::Owned(t) => Ev::Owned((**t).clone()),
        }
    }

    fn computed(&self, term: Term) -> Ev<'a> {
        match self.graph.lookup(&term) {
            Some(id) => Ev::Id(id, self.graph.term(id)),
            None => Ev::Owned(term),
        }
    }

    pub(super) fn eval_expr(&self, e: &Expression, sol: &Solution, scope: Scope) -> R<Option<Value>> {
        Ok(self.expr(e, sol, scope)?.map(|v| match v {
            Ev::Id(id, _) => Value::Id(id),
            Ev::Owned(t) => Value::from_term(self.graph, t),
        }))
    }

    pub(super) fn truthy(&self, e: &Expression, sol: &Solution, scope: Scope) -> R<bool> {
        Ok(self.ebv_of(e, sol, scope)? == Some(true))
    }

    fn ebv_of(&self, e: &Expression, sol: &Solution, scope: Scope) -> R<Option<bool>> {
        Ok(self.expr(e, sol, scope)?.and_then(|v| ebv(v.term())))
    }

    fn bool_ev(&self, b: Option<bool>) -> Option<Ev<'a>> {
        b.map(|b| Ev::Owned(boolean(b)))
    }

    fn expr(&self, e: &Expression, sol: &Solution, scope: Scope) -> R<Option<Ev<'a>>> {
        let v = match e {
            Expression::NamedNode(n) => Some(self.computed(Term::uri(n.as_str()))),
            Expression::Literal(l) => Some(self.computed(Term::Literal(convert_literal(l)))),
            Expression::Variable(v) => sol[self.slot(v.as_str())].as_ref().map(|v| self.ev_of(v)),
            Expression::Bound(v) => Some(Ev::Owned(boolean(sol[self.slot(v.as_str())].is_some()))),
            Expression::Or(a, b) => {
                let x = self.ebv_of(a, sol, scope)?;
                if x == Some(true) {
                    return Ok(self.bool_ev(Some(true)));
                }
                let y = self.ebv_of(b, sol, scope)?;
                self.bool_ev(match (x, y) {
                    (_, Some(true)) => Some(true),
                    (Some(false), Some(false)) => Some(false),
                    _ => None,
                })
            }
            Expression::And(a, b) => {
                let x = self.ebv_of(a, sol, scope)?;
                if x == Some(false) {
                    return Ok(self.bool_ev(Some(false)));
                }
                let y = self.ebv_of(b, sol, scope)?;
                self.bool_ev(match (x, y) {
                    (_, Some(false)) => Some(false),
                    (Some(true), Some(true)) => Some(true),
                    _ => None,
                })
            }
            Expression::Not(a) => self.bool_ev(self.ebv_of(a, sol, scope)?.map(|b| !b)),
            Expression::Equal(a, b) => {
                let (x, y) = (self.expr(a, sol, scope)?, self.expr(b, sol, scope)?);
                self.bool_ev(match (x, y) {
                    (Some(Ev::Id(i, _)), Some(Ev::Id(j, _))) if i == j => Some(true),
                    (Some(x), Some(y)) => rdf_equal(x.term(), y.term()),
                    _ => None,
                })
            }
            Expression::SameTerm(a, b) => {
                let (x, y) = (self.expr(a, sol, scope)?, self.expr(b, sol, scope)?);
                self.bool_ev(match (x, y) {
                    (Some(x), Some(y)) => Some(x.term() == y.term()),
                    _ => None,
                })
            }
            Expression::Greater(a, b) => self.ordered(a, b, sol, scope, |o| o == Ordering::Greater)?,
            Expression::GreaterOrEqual(a, b) => self.ordered(a, b, sol, scope, |o| o != Ordering::Less)?,
            Expression::Less(a, b) => self.ordered(a, b, sol, scope, |o| o == Ordering::Less)?,
            Expression::LessOrEqual(a, b) => self.ordered(a, b, sol, scope, |o| o != Ordering::Greater)?,
            Expression::In(a, list) => {
                let Some(x) = self.expr(a, sol, scope)? else {
                    return Ok(None);
                };
                let mut errored = false;
                for item in list {
                    let eq = match (&x, self.expr(item, sol, scope)?) {
                        (Ev::Id(i, _), Some(Ev::Id(j, _))) if *i == j => Some(true),
                        (x, Some(y)) => rdf_equal(x.term(), y.term()),
                        (_, None) => None,
                    };
                    match eq {
                        Some(true) => return Ok(self.bool_ev(Some(true))),
                        Some(false) => {}
                        None => errored = true,
                    }
                }
                self.bool_ev((!errored).then_some(false))
            }
            Expression::Add(a, b) => self.arith(Op::Add, a, b, sol, scope)?,
            Expression::Subtract(a, b) => self.arith(Op::Sub, a, b, sol, scope)?,
            Expression::Multiply(a, b) => self.arith(Op::Mul, a, b, sol, scope)?,
            Expression::Divide(a, b) => self.arith(Op::Div, a, b, sol, scope)?,
            Expression::UnaryPlus(a) => self
                .expr(a, sol, scope)?
                .and_then(|x| numeric_unary(x.term(), |v| v))
                .map(Ev::Owned),
            Expression::UnaryMinus(a) => self
                .expr(a, sol, scope)?
                .and_then(|x| numeric_unary(x.term(), |v| -v))
                .map(Ev::Owned),
            Expression::Exists(p) => Some(Ev::Owned(boolean(self.exists(p, sol, scope)?))),
            Expression::If(c, a, b) => match self.ebv_of(c, sol, scope)? {
                Some(true) => self.expr(a, sol, scope)?,
                Some(false) => self.expr(b, sol, scope)?,
                None => None,
            },
            Expression::Coalesce(list) => {
                for item in list {
                    if let Some(v) = self.expr(item, sol, scope)? {
                        return Ok(Some(v));
                    }
                }
                None
            }
            Expression::FunctionCall(f, args) => {
                let mut values = Vec::with_capacity(args.len());
                for a in args {
                    match self.expr(a, sol, scope)? {
                        Some(v) => values.push(v),
                        None => return Ok(None),
                    }
                }
                self.call(f, &values)
            }
        };
        Ok(v)
    }

    fn ordered(
        &self,
        a: &Expression,
        b: &Expression,
        sol: &Solution,
        scope: Scope,
        test: impl Fn(Ordering) -> bool,
    ) -> R<Option<Ev<'a>>> {
        let (x, y) = (self.expr(a, sol, scope)?, self.expr(b, sol, scope)?);
        Ok(match (x, y) {
            (Some(x), Some(y)) => self.bool_ev(compare(x.term(), y.term()).map(test)),
            _ => None,
        })
    }

    fn arith(&self, op: Op, a: &Expression, b: &Expression, sol: &Solution, scope: Scope) -> R<Option<Ev<'a>>> {
        let (x, y) = (self.expr(a, sol, scope)?, self.expr(b, sol, scope)?);
        Ok(match (x, y) {
            (Some(x), Some(y)) => arithmetic(op, x.term(), y.term()).map(Ev::Owned),
            _ => None,
        })
    }

    fn call(&self, f: &Function, args: &[Ev<'a>]) -> Option<Ev<'a>> {
        let arg = |i: usize| args.get(i).map(Ev::term);
        let term = match f {
            Function::Str => match arg(0)? {
                Term::Uri(iri) => simple(iri.clone()),
                Term::Literal(l) => simple(l.lexical.clone()),
            },
            Function::Lang => simple(arg(0)?.as_literal()?.language.clone().unwrap_or_default()),
            Function::LangMatches => {
                let tag = string_arg(arg(0)?)?.lexical.to_ascii_lowercase();
                let range = string_arg(arg(1)?)?.lexical.to_ascii_lowercase();
                let ok = if range == "*" {
                    !tag.is_empty()
                } else {
                    tag == range || tag.starts_with(&format!("{range}-"))
                };
                boolean(ok)
            }
            Function::Datatype => {
                let lit = arg(0)?.as_literal()?;
                Term::uri(match (&lit.datatype, &lit.language) {
                    (Some(dt), _) => dt.clone(),
                    (None, Some(_)) => format!("{RDF_NS}langString"),
                    (None, None) => XSD_STRING.to_string(),
                })
            }
            Function::IsIri => boolean(arg(0)?.is_uri()),
            Function::IsBlank => boolean(false),
            Function::IsLiteral => boolean(arg(0)?.is_literal()),
            Function::IsNumeric => boolean(arg(0)?.numeric_value().is_some()),
            Function::Abs => numeric_unary(arg(0)?, f64::abs)?,
            Function::Ceil => numeric_unary(arg(0)?, f64::ceil)?,
            Function::Floor => numeric_unary(arg(0)?, f64::floor)?,
            Function::Round => numeric_unary(arg(0)?, |v| (v + 0.5).floor())?,
            Function::StrLen => integer(string_arg(arg(0)?)?.lexical.chars().count() as i64),
            Function::UCase => {
                let l = string_arg(arg(0)?)?;
                same_lang(l, l.lexical.to_uppercase())
            }
            Function::LCase => {
                let l = string_arg(arg(0)?)?;
                same_lang(l, l.lexical.to_lowercase())
            }
            Function::Concat => {
                let mut out = String::new();
                for a in args {
                    out.push_str(&string_arg(a.term())?.lexical);
                }
                simple(out)
            }
            Function::Contains | Function::StrStarts | Function::StrEnds => {
                let (x, y) = (string_arg(arg(0)?)?, string_arg(arg(1)?)?);
                if y.language.is_some() && x.language != y.language {
                    return None;
                }
                boolean(match f {
                    Function::Contains => x.lexical.contains(&y.lexical),
                    Function::StrStarts => x.lexical.starts_with(&y.lexical),
                    _ => x.lexical.ends_with(&y.lexical),
                })
            }
            Function::Custom(name) => cast(cast_target(name.as_str())?, arg(0)?)?,
            _ => return None,
        };
        Some(self.computed(term))
    }

    fn exists(&self, p: &spargebra::algebra::GraphPattern, sol: &Solution, scope: Scope) -> R<bool> {
        if super::seedable(p) {
            return Ok(!self.eval_direct(p, vec![sol.clone()], scope)?.is_empty());
        }
        let inner = self.eval_alone(p, scope)?;
        let mut found = false;
        self.matches(sol, &inner, &mut |_| {
            found = true;
            false
        })?;
        Ok(found)
    }

    pub(super) fn aggregate(&self, agg: &AggregateExpression, group: &[Solution], scope: Scope) -> R<Option<Value>> {
        let (name, expr, distinct) = match agg {
            AggregateExpression::CountSolutions { distinct } => {
                let n = if *distinct {
                    group.iter().collect::<HashSet<_>>().len()
                } else {
                    group.len()
                };
                return Ok(Some(Value::from_term(self.graph, integer(n as i64))));
            }
            AggregateExpression::FunctionCall { name, expr, distinct } => (name, expr, *distinct),
        };
        let mut values: Vec<Ev<'a>> = Vec::with_capacity(group.len());
        let mut seen: HashSet<Value> = HashSet::new();
        let mut errors = false;
        for s in group {
            match self.eval_expr(expr, s, scope)? {
                Some(v) => {
                    if !distinct || seen.insert(v.clone()) {
                        values.push(self.ev_of(&v));
                    }
                }
                None => errors = true,
            }
        }
        let term = match name {
            AggregateFunction::Count => Some(integer(values.len() as i64)),
            AggregateFunction::Sum | AggregateFunction::Avg => {
                let all_integers = values
                    .iter()
                    .all(|v| v.term().as_literal().is_some_and(Literal::is_integer_typed));
                let mut int_sum: Option<i64> = Some(0);
                let mut sum = 0.0;
                let mut ok = !errors;
                for v in &values {
                    match v.term().numeric_value() {
                        Some(x) => {
                            sum += x;
                            int_sum = int_sum.and_then(|acc| {
                                v.term().lexical().trim().parse::<i64>().ok().and_then(|i| acc.checked_add(i))
                            });
                        }
                        None => ok = false,
                    }
                }
                match (ok, name) {
                    (false, _) => None,
                    (true, AggregateFunction::Sum) => Some(match int_sum {
                        Some(i) if all_integers => integer(i),
                        _ => double(sum),
                    }),
                    (true, _) if values.is_empty() => Some(integer(0)),
                    (true, _) => Some(double(sum / values.len() as f64)),
                }
            }
            AggregateFunction::Min | AggregateFunction::Max => {
                let pick = values.iter().map(Ev::term).reduce(|a, b| {
                    let o = term_order(Some(a), Some(b));
                    let keep_a = match name {
                        AggregateFunction::Min => o != Ordering::Greater,
                        _ => o != Ordering::Less,
                    };
                    if keep_a {
                        a
                    } else {
                        b
                    }
                });
                pick.cloned()
            }
            AggregateFunction::Sample => values.first().map(|v| v.term().clone()),
            AggregateFunction::GroupConcat { separator } => {
                let sep = separator.as_deref().unwrap_or(" ");
                let mut parts = Vec::with_capacity(values.len());
                for v in &values {
                    match string_arg(v.term()) {
                        Some(l) => parts.push(l.lexical.as_str()),
                        None => return Ok(None),
                    }
                }
                Some(simple(parts.join(sep)))
            }
            AggregateFunction::Custom(_) => None,
        };
        Ok(term.map(|t| Value::from_term(self.graph, t)))
    }
}
