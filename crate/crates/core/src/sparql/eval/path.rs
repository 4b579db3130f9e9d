//! Property paths, evaluated with set semantics.

use std::collections::HashSet;

use spargebra::algebra::PropertyPathExpression as Path;

use super::{bound_pos, Ctx, Pos, Scope, Solution, Value, R};
use crate::rdf::TermId;

/// Insertion-ordered set of node ids.
#[derive(Default)]
struct Nodes {
    order: Vec<TermId>,
    seen: HashSet<TermId>,
}

impl Nodes {
    fn push(&mut self, id: TermId) -> bool {
        let fresh = self.seen.insert(id);
        if fresh {
            self.order.push(id);
        }
        fresh
    }
}

impl Ctx<'_> {
    pub(super) fn match_path(
        &self,
        s: Pos,
        path: &Path,
        o: Pos,
        sol: &Solution,
        scope: Scope,
        out: &mut Vec<Solution>,
    ) -> R<()> {
        match (s, o) {
            (Pos::Impossible, _) | (_, Pos::Impossible) => {}
            (Pos::Bound(a), o) => {
                for x in self.reach(a, path, true, scope)? {
                    bind(sol, o, x, out);
                }
            }
            (Pos::Free(slot), Pos::Bound(b)) => {
                for x in self.reach(b, path, false, scope)? {
                    bind(sol, Pos::Free(slot), x, out);
                }
            }
            (Pos::Free(ss), Pos::Free(os)) => {
                for start in self.nodes_in_scope(scope)? {
                    let mut seeded = sol.clone();
                    seeded[ss] = Some(Value::Id(start));
                    let o = bound_pos(&seeded[os], os);
                    for x in self.reach(start, path, true, scope)? {
                        bind(&seeded, o, x, out);
                    }
                }
            }
        }
        Ok(())
    }

    fn nodes_in_scope(&self, scope: Scope) -> R<Vec<TermId>> {
        let mut nodes = Nodes::default();
        self.scan(None, None, None, scope, &mut |t| {
            nodes.push(t.subject);
            nodes.push(t.object);
            Ok(())
        })?;
        Ok(nodes.order)
    }

    /// Nodes reachable from `start` along `path`, or against it when
    /// `forward` is false.
    fn reach(&self, start: TermId, path: &Path, forward: bool, scope: Scope) -> R<Vec<TermId>> {
        let mut out = Nodes::default();
        match path {
            Path::NamedNode(p) => {
                let Some(p) = self.graph.lookup_uri(p.as_str()) else {
                    return Ok(Vec::new());
                };
                self.edges(start, Some(p), forward, scope, &mut |_, x| {
                    out.push(x);
                })?;
            }
            Path::NegatedPropertySet(excluded) => {
                let excluded: HashSet<TermId> = excluded
                    .iter()
                    .filter_map(|p| self.graph.lookup_uri(p.as_str()))
                    .collect();
                self.edges(start, None, forward, scope, &mut |p, x| {
                    if !excluded.contains(&p) {
                        out.push(x);
                    }
                })?;
            }
            Path::Reverse(inner) => return self.reach(start, inner, !forward, scope),
            Path::Sequence(a, b) => {
                let (first, second) = if forward { (a, b) } else { (b, a) };
                for mid in self.reach(start, first, forward, scope)? {
                    for x in self.reach(mid, second, forward, scope)? {
                        out.push(x);
                    }
                }
            }
            Path::Alternative(a, b) => {
                for x in self.reach(start, a, forward, scope)? {
                    out.push(x);
                }
                for x in self.reach(start, b, forward, scope)? {
                    out.push(x);
                }
            }
            Path::ZeroOrOne(inner) => {
                out.push(start);
                for x in self.reach(start, inner, forward, scope)? {
                    out.push(x);
                }
            }
            Path::ZeroOrMore(inner) => {
                out.push(start);
                self.closure(inner, forward, scope, &mut out)?;
            }
            Path::OneOrMore(inner) => {
                let mut frontier = Nodes::default();
                for x in self.reach(start, inner, forward, scope)? {
                    frontier.push(x);
                }
                self.closure(inner, forward, scope, &mut frontier)?;
                return Ok(frontier.order);
            }
        }
        Ok(out.order)
    }

    /// Extends `nodes` with everything reachable from it by repeating `step`.
    fn closure(&self, step: &Path, forward: bool, scope: Scope, nodes: &mut Nodes) -> R<()> {
        let mut next = 0;
        while next < nodes.order.len() {
            let current = nodes.order[next];
            next += 1;
            for x in self.reach(current, step, forward, scope)? {
                nodes.push(x);
            }
        }
        Ok(())
    }

    fn edges(
        &self,
        node: TermId,
        predicate: Option<TermId>,
        forward: bool,
        scope: Scope,
        f: &mut dyn FnMut(TermId, TermId),
    ) -> R<()> {
        if forward {
            self.scan(Some(node), predicate, None, scope, &mut |t| {
                self.tick()?;
                if t.subject == node && predicate.is_none_or(|p| p == t.predicate) {
                    f(t.predicate, t.object);
                }
                Ok(())
            })
        } else {
            self.scan(None, predicate, Some(node), scope, &mut |t| {
                self.tick()?;
                if t.object == node && predicate.is_none_or(|p| p == t.predicate) {
                    f(t.predicate, t.subject);
                }
                Ok(())
            })
        }
    }
}

fn bind(sol: &Solution, target: Pos, id: TermId, out: &mut Vec<Solution>) {
    match target {
        Pos::Bound(b) if b == id => out.push(sol.clone()),
        Pos::Free(slot) => {
            let mut next = sol.clone();
            next[slot] = Some(Value::Id(id));
            out.push(next);
        }
        _ => {}
    }
}
