use ldx_core::rdf::vocab::{xsd, OWL_CLASS, RDFS_CLASS, RDFS_LABEL, RDFS_SUBCLASS_OF, RDF_TYPE};
use ldx_core::rdf::{Literal, RdfTriple, Term};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const NS: &str = "http://r/";

/// Size bounds for [`random_triples`].
#[derive(Debug, Clone, Copy)]
pub struct RandomGraphSpec {
    pub triples: usize,
    pub classes: usize,
    pub predicates: usize,
    pub instances: usize,
}

impl RandomGraphSpec {
    /// Bounds drawn from `rng`: up to 2,000 triples, 40 classes, 30 predicates.
    pub fn sample(rng: &mut impl Rng) -> Self {
        RandomGraphSpec {
            triples: rng.gen_range(0..=2000),
            classes: rng.gen_range(1..=40),
            predicates: rng.gen_range(1..=30),
            instances: rng.gen_range(1..=200),
        }
    }
}

pub fn class(i: usize) -> String {
    format!("{NS}C{i}")
}

pub fn predicate(i: usize) -> String {
    format!("{NS}p{i}")
}

pub fn instance(i: usize) -> String {
    format!("{NS}i{i}")
}

fn uri(s: String) -> Term {
    Term::Uri(s)
}

fn random_literal(rng: &mut impl Rng) -> Term {
    let n: i64 = rng.gen_range(-5..50);
    Term::Literal(match rng.gen_range(0..5) {
        0 => Literal::simple(format!("v{n}")),
        1 => Literal::with_language(format!("w{n}"), if rng.gen_bool(0.5) { "en" } else { "de" }),
        2 => Literal::typed(n.to_string(), xsd("integer")),
        3 => Literal::typed(format!("{}.5", n), xsd("double")),
        _ => Literal::simple(format!("{n}")),
    })
}

/// A seeded random graph: a class hierarchy (with an occasional cycle and
/// undeclared classes), multi-typed instances, labels, and property values
/// that are instances, untyped URIs or literals. At most `spec.triples`
/// triples; duplicates are possible.
pub fn random_triples(seed: u64, spec: &RandomGraphSpec) -> Vec<RdfTriple> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(spec.triples);
    let t = |s: String, p: &str, o: Term| RdfTriple::new(uri(s), uri(p.to_string()), o);
    for c in 0..spec.classes {
        match rng.gen_range(0..10) {
            0 => {}
            1 | 2 => out.push(t(class(c), RDF_TYPE, uri(RDFS_CLASS.into()))),
            _ => out.push(t(class(c), RDF_TYPE, uri(OWL_CLASS.into()))),
        }
        if c > 0 && rng.gen_bool(0.7) {
            out.push(t(class(c), RDFS_SUBCLASS_OF, uri(class(rng.gen_range(0..c)))));
            if rng.gen_bool(0.1) {
                out.push(t(class(c), RDFS_SUBCLASS_OF, uri(class(rng.gen_range(0..c)))));
            }
        }
        if rng.gen_bool(0.3) {
            out.push(t(class(c), RDFS_LABEL, Term::Literal(Literal::with_language(format!("Class {c}"), "en"))));
        }
    }
    if spec.classes > 2 && rng.gen_bool(0.05) {
        out.push(t(class(0), RDFS_SUBCLASS_OF, uri(class(spec.classes - 1))));
    }
    while out.len() < spec.triples {
        let s = instance(rng.gen_range(0..spec.instances));
        if rng.gen_bool(0.3) {
            out.push(t(s, RDF_TYPE, uri(class(rng.gen_range(0..spec.classes)))));
            continue;
        }
        let p = predicate(rng.gen_range(0..spec.predicates));
        let o = match rng.gen_range(0..10) {
            0..=5 => uri(instance(rng.gen_range(0..spec.instances))),
            6 => uri(format!("{NS}u{}", rng.gen_range(0..spec.instances))),
            _ => random_literal(&mut rng),
        };
        out.push(RdfTriple::new(uri(s), uri(p), o));
    }
    out.truncate(spec.triples);
    out.shuffle(&mut rng);
    out
}

/// A large graph for throughput checks: `n` triples before deduplication,
/// over 50 classes and 40 predicates, one type triple per instance.
pub fn synthetic_triples(seed: u64, n: usize) -> Vec<RdfTriple> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let instances = (n / 8).max(1);
    let mut out = Vec::with_capacity(n);
    for c in 0..50 {
        out.push(RdfTriple::new(uri(class(c)), uri(RDF_TYPE.into()), uri(OWL_CLASS.into())));
        if c > 0 {
            out.push(RdfTriple::new(uri(class(c)), uri(RDFS_SUBCLASS_OF.into()), uri(class(c / 3))));
        }
    }
    let mut i = 0usize;
    while out.len() < n {
        let s = instance(i % instances);
        let k = i / instances;
        i += 1;
        let triple = if k == 0 {
            RdfTriple::new(uri(s), uri(RDF_TYPE.into()), uri(class(rng.gen_range(0..50))))
        } else {
            let p = predicate((k * 7 + rng.gen_range(0..7)) % 40);
            let o = if rng.gen_bool(0.6) {
                uri(instance(rng.gen_range(0..instances)))
            } else {
                Term::Literal(Literal::typed(i.to_string(), xsd("integer")))
            };
            RdfTriple::new(uri(s), uri(p), o)
        };
        out.push(triple);
    }
    out
}
