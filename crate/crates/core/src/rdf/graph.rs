//! Immutable, fully indexed in-memory RDF graph.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::io::BufRead;

use super::label::LabelPreference;
use super::ntriples::{NTriplesReader, ParseError, RdfTriple};
use super::term::{local_name, Term, TermId};
use super::vocab;

/// An interned triple. Subject and predicate always resolve to URIs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub subject: TermId,
    pub predicate: TermId,
    pub object: TermId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Vocab {
    pub rdf_type: TermId,
    pub subclass_of: TermId,
    pub label: TermId,
    pub owl_class: TermId,
    pub rdfs_class: TermId,
    pub owl_thing: TermId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct DatasetStats {
    pub triple_count: u64,
    pub class_count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassEntry {
    pub uri: String,
    pub label: String,
}

static EMPTY_IDS: &[TermId] = &[];
static EMPTY_POS: &[u32] = &[];

/// Set of distinct triples plus every index the exploration engine needs.
///
/// A graph never changes once built. [`Graph::appended`] produces a new graph
/// with the version bumped by one.
#[derive(Debug, Clone)]
pub struct Graph {
    terms: Vec<Term>,
    ids: HashMap<Term, TermId>,
    triples: Vec<Triple>,
    seen: HashSet<Triple>,
    by_subject: HashMap<TermId, Vec<u32>>,
    by_predicate: HashMap<TermId, Vec<u32>>,
    by_object: HashMap<TermId, Vec<u32>>,
    sp_objects: HashMap<(TermId, TermId), Vec<TermId>>,
    po_subjects: HashMap<(TermId, TermId), Vec<TermId>>,
    class_index: HashMap<TermId, BTreeSet<TermId>>,
    subclass_index: HashMap<TermId, BTreeSet<TermId>>,
    superclass_index: HashMap<TermId, BTreeSet<TermId>>,
    label_index: HashMap<TermId, String>,
    label_preference: LabelPreference,
    vocab: Vocab,
    version: u64,
}

impl Default for Graph {
    fn default() -> Self {
        Graph::new(LabelPreference::default())
    }
}

impl Graph {
    fn new(label_preference: LabelPreference) -> Self {
        let mut g = Graph {
            terms: Vec::new(),
            ids: HashMap::new(),
            triples: Vec::new(),
            seen: HashSet::new(),
            by_subject: HashMap::new(),
            by_predicate: HashMap::new(),
            by_object: HashMap::new(),
            sp_objects: HashMap::new(),
            po_subjects: HashMap::new(),
            class_index: HashMap::new(),
            subclass_index: HashMap::new(),
            superclass_index: HashMap::new(),
            label_index: HashMap::new(),
            label_preference,
            vocab: Vocab {
                rdf_type: TermId(0),
                subclass_of: TermId(0),
                label: TermId(0),
                owl_class: TermId(0),
                rdfs_class: TermId(0),
                owl_thing: TermId(0),
            },
            version: 1,
        };
        g.vocab = Vocab {
            rdf_type: g.intern(Term::uri(vocab::RDF_TYPE)),
            subclass_of: g.intern(Term::uri(vocab::RDFS_SUBCLASS_OF)),
            label: g.intern(Term::uri(vocab::RDFS_LABEL)),
            owl_class: g.intern(Term::uri(vocab::OWL_CLASS)),
            rdfs_class: g.intern(Term::uri(vocab::RDFS_CLASS)),
            owl_thing: g.intern(Term::uri(vocab::OWL_THING)),
        };
        g
    }

    /// Builds a graph at version 1. Duplicate triples are stored once.
    pub fn build(triples: impl IntoIterator<Item = RdfTriple>) -> Self {
        Graph::build_with(triples, LabelPreference::default())
    }

    pub fn build_with(
        triples: impl IntoIterator<Item = RdfTriple>,
        label_preference: LabelPreference,
    ) -> Self {
        let mut g = Graph::new(label_preference);
        g.extend(triples);
        g
    }

    pub fn from_ntriples<R: BufRead>(input: R) -> Result<Self, ParseError> {
        Graph::from_ntriples_with(input, LabelPreference::default())
    }

    pub fn from_ntriples_with<R: BufRead>(
        input: R,
        label_preference: LabelPreference,
    ) -> Result<Self, ParseError> {
        let mut g = Graph::new(label_preference);
        let mut batch = Vec::with_capacity(4096);
        for triple in NTriplesReader::new(input) {
            batch.push(triple?);
            if batch.len() == batch.capacity() {
                g.insert_all(batch.drain(..));
            }
        }
        g.insert_all(batch);
        g.refresh_labels();
        Ok(g)
    }

    /// A new graph holding these triples plus `more`, one version later.
    pub fn appended(&self, more: impl IntoIterator<Item = RdfTriple>) -> Graph {
        let mut g = self.clone();
        g.extend(more);
        g.version = self.version + 1;
        g
    }

    fn extend(&mut self, triples: impl IntoIterator<Item = RdfTriple>) {
        self.insert_all(triples);
        self.refresh_labels();
    }

    fn intern(&mut self, term: Term) -> TermId {
        if let Some(id) = self.ids.get(&term) {
            return *id;
        }
        let id = TermId(u32::try_from(self.terms.len()).expect("term table overflow"));
        self.terms.push(term.clone());
        self.ids.insert(term, id);
        id
    }

    fn insert_all(&mut self, triples: impl IntoIterator<Item = RdfTriple>) {
        for t in triples {
            debug_assert!(t.subject.is_uri() && t.predicate.is_uri());
            let triple = Triple {
                subject: self.intern(t.subject),
                predicate: self.intern(t.predicate),
                object: self.intern(t.object),
            };
            self.insert(triple);
        }
    }

    fn insert(&mut self, t: Triple) {
        if !self.seen.insert(t) {
            return;
        }
        let pos = u32::try_from(self.triples.len()).expect("triple table overflow");
        self.triples.push(t);
        self.by_subject.entry(t.subject).or_default().push(pos);
        self.by_predicate.entry(t.predicate).or_default().push(pos);
        self.by_object.entry(t.object).or_default().push(pos);
        self.sp_objects
            .entry((t.subject, t.predicate))
            .or_default()
            .push(t.object);
        self.po_subjects
            .entry((t.predicate, t.object))
            .or_default()
            .push(t.subject);
        if t.predicate == self.vocab.rdf_type {
            self.class_index
                .entry(t.object)
                .or_default()
                .insert(t.subject);
        } else if t.predicate == self.vocab.subclass_of && self.terms[t.object.index()].is_uri() {
            self.subclass_index
                .entry(t.object)
                .or_default()
                .insert(t.subject);
            self.superclass_index
                .entry(t.subject)
                .or_default()
                .insert(t.object);
        }
    }

    fn refresh_labels(&mut self) {
        let label = self.vocab.label;
        let mut labels = HashMap::new();
        if let Some(positions) = self.by_predicate.get(&label) {
            let subjects: BTreeSet<TermId> = positions
                .iter()
                .map(|p| self.triples[*p as usize].subject)
                .collect();
            for s in subjects {
                if let Some(l) = self.preferred_label(s, &self.label_preference) {
                    labels.insert(s, l);
                }
            }
        }
        self.label_index = labels;
    }

    fn preferred_label(&self, id: TermId, preference: &LabelPreference) -> Option<String> {
        let candidates = self
            .objects(id, self.vocab.label)
            .iter()
            .filter_map(|o| self.terms[o.index()].as_literal());
        preference.choose(candidates).map(|l| l.lexical.clone())
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    pub fn label_preference(&self) -> &LabelPreference {
        &self.label_preference
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn term(&self, id: TermId) -> &Term {
        &self.terms[id.index()]
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn lookup(&self, term: &Term) -> Option<TermId> {
        self.ids.get(term).copied()
    }

    pub fn lookup_uri(&self, iri: &str) -> Option<TermId> {
        self.ids.get(&Term::uri(iri)).copied()
    }

    pub fn uri(&self, id: TermId) -> &str {
        self.terms[id.index()].lexical()
    }

    pub fn contains(&self, t: &Triple) -> bool {
        self.seen.contains(t)
    }

    pub fn to_rdf_triple(&self, t: &Triple) -> RdfTriple {
        RdfTriple::new(
            self.term(t.subject).clone(),
            self.term(t.predicate).clone(),
            self.term(t.object).clone(),
        )
    }

    /// Triple positions (indexes into [`Graph::triples`]) with this subject.
    pub fn positions_with_subject(&self, s: TermId) -> &[u32] {
        self.by_subject.get(&s).map_or(EMPTY_POS, Vec::as_slice)
    }

    pub fn positions_with_predicate(&self, p: TermId) -> &[u32] {
        self.by_predicate.get(&p).map_or(EMPTY_POS, Vec::as_slice)
    }

    pub fn positions_with_object(&self, o: TermId) -> &[u32] {
        self.by_object.get(&o).map_or(EMPTY_POS, Vec::as_slice)
    }

    pub fn with_subject(&self, s: TermId) -> impl Iterator<Item = &Triple> + '_ {
        self.positions_with_subject(s)
            .iter()
            .map(move |p| &self.triples[*p as usize])
    }

    pub fn with_predicate(&self, p: TermId) -> impl Iterator<Item = &Triple> + '_ {
        self.positions_with_predicate(p)
            .iter()
            .map(move |i| &self.triples[*i as usize])
    }

    pub fn with_object(&self, o: TermId) -> impl Iterator<Item = &Triple> + '_ {
        self.positions_with_object(o)
            .iter()
            .map(move |p| &self.triples[*p as usize])
    }

    pub fn objects(&self, s: TermId, p: TermId) -> &[TermId] {
        self.sp_objects.get(&(s, p)).map_or(EMPTY_IDS, Vec::as_slice)
    }

    pub fn subjects(&self, p: TermId, o: TermId) -> &[TermId] {
        self.po_subjects.get(&(p, o)).map_or(EMPTY_IDS, Vec::as_slice)
    }

    /// Direct classes of `s`.
    pub fn types_of(&self, s: TermId) -> &[TermId] {
        self.objects(s, self.vocab.rdf_type)
    }

    /// Direct instances: `{ s : (s, rdf:type, c) }`.
    pub fn instances_of(&self, c: TermId) -> Option<&BTreeSet<TermId>> {
        self.class_index.get(&c)
    }

    pub fn direct_instance_count(&self, c: TermId) -> usize {
        self.class_index.get(&c).map_or(0, BTreeSet::len)
    }

    pub fn class_index(&self) -> &HashMap<TermId, BTreeSet<TermId>> {
        &self.class_index
    }

    pub fn subclass_index(&self) -> &HashMap<TermId, BTreeSet<TermId>> {
        &self.subclass_index
    }

    /// `{ τ : (τ, rdfs:subClassOf, c) }`.
    pub fn direct_subclasses(&self, c: TermId) -> Option<&BTreeSet<TermId>> {
        self.subclass_index.get(&c)
    }

    pub fn direct_superclasses(&self, c: TermId) -> Option<&BTreeSet<TermId>> {
        self.superclass_index.get(&c)
    }

    /// `c` plus every class reachable below it through rdfs:subClassOf.
    /// Cycles are tolerated.
    pub fn subclass_closure(&self, c: TermId) -> BTreeSet<TermId> {
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::from([c]);
        seen.insert(c);
        while let Some(next) = queue.pop_front() {
            for sub in self.direct_subclasses(next).into_iter().flatten() {
                if seen.insert(*sub) {
                    queue.push_back(*sub);
                }
            }
        }
        seen
    }

    /// Number of classes strictly below `c` in the subclass closure.
    pub fn total_subclass_count(&self, c: TermId) -> usize {
        self.subclass_closure(c).iter().filter(|x| **x != c).count()
    }

    /// Instances of `c` or of any class beneath it.
    pub fn transitive_instances(&self, c: TermId) -> BTreeSet<TermId> {
        let mut out = BTreeSet::new();
        for class in self.subclass_closure(c) {
            if let Some(members) = self.instances_of(class) {
                out.extend(members.iter().copied());
            }
        }
        out
    }

    /// Subjects typed with at least one class other than the metaclasses
    /// owl:Class and rdfs:Class.
    pub fn all_instances(&self) -> BTreeSet<TermId> {
        let mut out = BTreeSet::new();
        for (class, members) in &self.class_index {
            if *class != self.vocab.owl_class && *class != self.vocab.rdfs_class {
                out.extend(members.iter().copied());
            }
        }
        out
    }

    /// Subjects declared `owl:Class` or `rdfs:Class`.
    pub fn declared_classes(&self) -> BTreeSet<TermId> {
        let mut out = BTreeSet::new();
        for meta in [self.vocab.owl_class, self.vocab.rdfs_class] {
            if let Some(members) = self.instances_of(meta) {
                out.extend(members.iter().copied());
            }
        }
        out
    }

    pub fn is_declared_class(&self, c: TermId) -> bool {
        let typed = self.types_of(c);
        typed.contains(&self.vocab.owl_class) || typed.contains(&self.vocab.rdfs_class)
    }

    /// Declared classes without any rdfs:subClassOf parent.
    pub fn top_level_classes(&self) -> BTreeSet<TermId> {
        self.declared_classes()
            .into_iter()
            .filter(|c| self.direct_superclasses(*c).is_none_or(BTreeSet::is_empty))
            .collect()
    }

    pub fn stats(&self) -> DatasetStats {
        DatasetStats {
            triple_count: self.triples.len() as u64,
            class_count: self.declared_classes().len() as u64,
        }
    }

    /// Declared classes sorted by label, then URI.
    pub fn list_classes(&self) -> Vec<ClassEntry> {
        let mut out: Vec<ClassEntry> = self
            .declared_classes()
            .into_iter()
            .map(|c| ClassEntry {
                uri: self.uri(c).to_string(),
                label: self.label_of_id(c),
            })
            .collect();
        out.sort_by(|a, b| a.label.cmp(&b.label).then_with(|| a.uri.cmp(&b.uri)));
        out
    }

    /// Preferred rdfs:label, falling back to the URI's local name.
    pub fn label_of_id(&self, id: TermId) -> String {
        match self.label_index.get(&id) {
            Some(label) => label.clone(),
            None => local_name(self.term(id).lexical()).to_string(),
        }
    }

    pub fn label_of(&self, iri: &str) -> String {
        match self.lookup_uri(iri) {
            Some(id) => self.label_of_id(id),
            None => local_name(iri).to_string(),
        }
    }

    /// Like [`Graph::label_of`] with an explicit language preference.
    pub fn label_with(&self, iri: &str, preference: &LabelPreference) -> String {
        self.lookup_uri(iri)
            .and_then(|id| self.preferred_label(id, preference))
            .unwrap_or_else(|| local_name(iri).to_string())
    }
}
