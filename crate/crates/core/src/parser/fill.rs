//! Beam slot filling.

use std::collections::BTreeMap;
use std::fmt;

use crate::context::DynamicVocabulary;
use crate::ids::{EntityId, PropertyId, TypeId, P31};
use crate::sparql::{Slot, SlotKind, SparqlQuery};
use crate::templates::{instantiate, QuestionAnnotation, Template};

/// A value for one slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Filler {
    Entity(EntityId),
    Relation(PropertyId),
    Type(TypeId),
    Value(u64),
}

impl Filler {
    pub fn kind(self) -> SlotKind {
        match self {
            Filler::Entity(_) => SlotKind::Entity,
            Filler::Relation(_) => SlotKind::Relation,
            Filler::Type(_) => SlotKind::Type,
            Filler::Value(_) => SlotKind::Value,
        }
    }

    fn admitted(self, v: &DynamicVocabulary) -> bool {
        match self {
            Filler::Entity(e) => v.entities.contains(&e),
            Filler::Type(t) => v.types.contains(&t),
            Filler::Relation(r) => r == P31 || v.relations.contains(&r),
            Filler::Value(_) => true,
        }
    }
}

impl fmt::Display for Filler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Filler::Entity(e) | Filler::Type(e) => e.fmt(f),
            Filler::Relation(r) => r.fmt(f),
            Filler::Value(n) => n.fmt(f),
        }
    }
}

/// Ranked candidates per slot, each with a score in `[0, 1]`.
pub type SlotCandidates = BTreeMap<Slot, Vec<(Filler, f64)>>;

#[derive(Debug, Clone, PartialEq)]
pub struct FilledQuery {
    pub query: SparqlQuery,
    /// One filler per signature slot, in signature order.
    pub assignment: Vec<(Slot, Filler)>,
    /// Product of the fillers' scores.
    pub score: f64,
}

impl FilledQuery {
    /// The fillers as annotation fields, ordered by slot ordinal.
    pub fn symbols(&self, t: &Template) -> QuestionAnnotation {
        let mut sorted = self.assignment.clone();
        sorted.sort();
        let mut ann = QuestionAnnotation {
            sub_type: t.sub_type.to_string(),
            operator: t.operator,
            ..Default::default()
        };
        for (_, f) in sorted {
            match f {
                Filler::Entity(e) => ann.entities.push(e),
                Filler::Relation(r) => ann.relations.push(r),
                Filler::Type(ty) => ann.types.push(ty),
                Filler::Value(n) => ann.values.push(n),
            }
        }
        ann
    }
}

/// Fill every slot of `t`, keeping the `beam` best partial assignments by
/// score product (ties by filler order). Candidates of the wrong kind or
/// outside `v` are dropped; a slot left without candidates yields nothing.
/// One filler may serve several slots.
pub fn fill_slots(t: &Template, linked: &SlotCandidates, v: &DynamicVocabulary, beam: usize) -> Vec<FilledQuery> {
    let beam = beam.max(1);
    let mut partial: Vec<(Vec<(Slot, Filler)>, f64)> = vec![(Vec::new(), 1.0)];
    for slot in &t.signature {
        let options: Vec<(Filler, f64)> = linked
            .get(slot)
            .into_iter()
            .flatten()
            .filter(|(f, _)| f.kind() == slot.kind && f.admitted(v))
            .copied()
            .collect();
        if options.is_empty() {
            return Vec::new();
        }
        let mut next = Vec::with_capacity(partial.len() * options.len());
        for (assigned, score) in &partial {
            for (f, s) in &options {
                let mut a = assigned.clone();
                a.push((*slot, *f));
                next.push((a, score * s));
            }
        }
        next.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        next.truncate(beam);
        partial = next;
    }
    partial
        .into_iter()
        .filter_map(|(assignment, score)| {
            let mut filled = FilledQuery {
                query: t.skeleton.clone(),
                assignment,
                score,
            };
            filled.query = instantiate(t, &filled.symbols(t)).ok()?;
            Some(filled)
        })
        .collect()
}
