//! In-memory knowledge graph.
//!
//! Triples are entity-valued only and are kept in three sorted permutation
//! indexes (SPO, POS, OSP) so every lookup with a bound prefix is a
//! binary-searched slice. Labels for entities and properties share one map;
//! the class map is derived from the `P31` triples at build time. The graph
//! is immutable once built.

mod ingest;
mod turtle;

pub use ingest::{ingest, read_dump_dir, Diagnostic, IngestReport, Located, SourceRecord};
pub use turtle::{export_turtle, load_turtle, TURTLE_PREFIXES};

use std::borrow::Cow;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ids::{EntityId, PropertyId, Symbol, TypeId, P31};
use crate::text::normalize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub subject: EntityId,
    pub predicate: PropertyId,
    pub object: EntityId,
}

impl Triple {
    pub fn new(subject: EntityId, predicate: PropertyId, object: EntityId) -> Self {
        Triple {
            subject,
            predicate,
            object,
        }
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.subject, self.predicate, self.object)
    }
}

/// Collects triples and labels; duplicates collapse.
#[derive(Debug, Default, Clone)]
pub struct KgBuilder {
    triples: BTreeSet<Triple>,
    labels: HashMap<Symbol, String>,
}

impl KgBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns false when the triple was already present.
    pub fn add_triple(&mut self, triple: Triple) -> bool {
        self.triples.insert(triple)
    }

    pub fn add(&mut self, subject: EntityId, predicate: PropertyId, object: EntityId) -> &mut Self {
        self.triples.insert(Triple::new(subject, predicate, object));
        self
    }

    pub fn label(&mut self, symbol: impl Into<Symbol>, label: impl Into<String>) -> &mut Self {
        self.labels.insert(symbol.into(), label.into());
        self
    }

    pub fn has_class_assertion(&self, entity: EntityId) -> bool {
        self.triples
            .range(Triple::new(entity, P31, EntityId(0))..=Triple::new(entity, P31, EntityId(u64::MAX)))
            .next()
            .is_some()
    }

    pub fn build(self) -> KnowledgeGraph {
        let spo: Vec<Triple> = self.triples.into_iter().collect();
        let mut pos = spo.clone();
        pos.sort_by_key(|t| (t.predicate, t.object, t.subject));
        let mut osp = spo.clone();
        osp.sort_by_key(|t| (t.object, t.subject, t.predicate));

        let mut types: HashMap<EntityId, BTreeSet<TypeId>> = HashMap::new();
        for t in spo.iter().filter(|t| t.predicate == P31) {
            types.entry(t.subject).or_default().insert(t.object);
        }

        let mut by_label: HashMap<String, BTreeSet<EntityId>> = HashMap::new();
        for (symbol, label) in &self.labels {
            if let Symbol::Entity(e) = symbol {
                by_label.entry(normalize(label)).or_default().insert(*e);
            }
        }

        KnowledgeGraph {
            spo,
            pos,
            osp,
            labels: self.labels,
            types,
            by_label,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct KnowledgeGraph {
    spo: Vec<Triple>,
    pos: Vec<Triple>,
    osp: Vec<Triple>,
    labels: HashMap<Symbol, String>,
    types: HashMap<EntityId, BTreeSet<TypeId>>,
    by_label: HashMap<String, BTreeSet<EntityId>>,
}

fn range_by<K: Ord + Copy>(index: &[Triple], key: impl Fn(&Triple) -> K, probe: K) -> &[Triple] {
    let lo = index.partition_point(|t| key(t) < probe);
    let hi = index.partition_point(|t| key(t) <= probe);
    &index[lo..hi]
}

impl KnowledgeGraph {
    pub fn builder() -> KgBuilder {
        KgBuilder::new()
    }

    pub fn len(&self) -> usize {
        self.spo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spo.is_empty()
    }

    /// All triples in subject, predicate, object order.
    pub fn triples(&self) -> &[Triple] {
        &self.spo
    }

    pub fn index_spo(&self) -> &[Triple] {
        &self.spo
    }

    pub fn index_pos(&self) -> &[Triple] {
        &self.pos
    }

    pub fn index_osp(&self) -> &[Triple] {
        &self.osp
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.spo.binary_search(triple).is_ok()
    }

    pub fn by_subject(&self, s: EntityId) -> &[Triple] {
        range_by(&self.spo, |t| t.subject, s)
    }

    pub fn by_subject_predicate(&self, s: EntityId, p: PropertyId) -> &[Triple] {
        range_by(&self.spo, |t| (t.subject, t.predicate), (s, p))
    }

    pub fn by_predicate(&self, p: PropertyId) -> &[Triple] {
        range_by(&self.pos, |t| t.predicate, p)
    }

    pub fn by_predicate_object(&self, p: PropertyId, o: EntityId) -> &[Triple] {
        range_by(&self.pos, |t| (t.predicate, t.object), (p, o))
    }

    pub fn by_object(&self, o: EntityId) -> &[Triple] {
        range_by(&self.osp, |t| t.object, o)
    }

    /// Every triple with `e` as subject or object.
    pub fn neighborhood(&self, e: EntityId) -> BTreeSet<Triple> {
        self.by_subject(e).iter().chain(self.by_object(e)).copied().collect()
    }

    pub fn types_of(&self, e: EntityId) -> BTreeSet<TypeId> {
        self.types.get(&e).cloned().unwrap_or_default()
    }

    pub fn has_type(&self, e: EntityId, ty: TypeId) -> bool {
        self.types.get(&e).is_some_and(|ts| ts.contains(&ty))
    }

    /// True when `e` is the object of some `P31` triple.
    pub fn is_type(&self, e: EntityId) -> bool {
        !self.by_predicate_object(P31, e).is_empty()
    }

    pub fn instances_of(&self, ty: TypeId) -> impl Iterator<Item = EntityId> + '_ {
        self.by_predicate_object(P31, ty).iter().map(|t| t.subject)
    }

    /// All classes in the graph.
    pub fn type_ids(&self) -> BTreeSet<TypeId> {
        self.by_predicate(P31).iter().map(|t| t.object).collect()
    }

    /// Every entity occurring in subject or object position.
    pub fn entities(&self) -> BTreeSet<EntityId> {
        self.spo.iter().flat_map(|t| [t.subject, t.object]).collect()
    }

    pub fn properties(&self) -> BTreeSet<PropertyId> {
        self.pos.iter().map(|t| t.predicate).collect()
    }

    pub fn label_opt(&self, symbol: impl Into<Symbol>) -> Option<&str> {
        self.labels.get(&symbol.into()).map(String::as_str)
    }

    /// Display label, falling back to the raw id.
    pub fn label(&self, symbol: impl Into<Symbol>) -> Cow<'_, str> {
        let symbol = symbol.into();
        match self.labels.get(&symbol) {
            Some(l) => Cow::Borrowed(l.as_str()),
            None => Cow::Owned(symbol.to_string()),
        }
    }

    /// Labels sorted by symbol.
    pub fn labels(&self) -> BTreeMap<Symbol, &str> {
        self.labels.iter().map(|(k, v)| (*k, v.as_str())).collect()
    }

    pub fn label_count(&self) -> usize {
        self.labels.len()
    }

    /// Entities whose normalized label equals `normalized_label`.
    pub fn entities_by_label(&self, normalized_label: &str) -> BTreeSet<EntityId> {
        self.by_label.get(normalized_label).cloned().unwrap_or_default()
    }

    /// Entities that have at least one class.
    pub fn typed_entity_count(&self) -> usize {
        self.types.len()
    }
}
