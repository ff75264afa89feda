//! Template catalog, slot instantiation and dataset records.
//!
//! Every question sub-type maps to a [`Shape`]; a shape renders a skeleton
//! per [`Direction`] (which side of the relation the first entity sits on)
//! and, for aggregate shapes, per [`Operator`]. Slots are filled by
//! position: `ENTITY1` takes the first annotated entity, `RELATION2` the
//! second relation, and so on. A symbol kind with no slot in the skeleton is
//! ignored, so descriptive annotations such as the type of a verified
//! entity do not block instantiation.
//!
//! Catalog rows flagged `attested: false` use a name or skeleton that is
//! our reconstruction rather than a printed example.
//!
//! ```
//! use convkgqa::templates::template_for;
//!
//! let t = template_for("Verification|2 entities, subject is indirect").unwrap();
//! assert_eq!(t.default_template().skeleton.to_string(), "ASK { ENTITY1 RELATION1 ENTITY2 . }");
//! ```

mod catalog;
mod dataset;
mod stats;
mod validate;

pub use catalog::{
    catalog, template_for, CatalogError, Direction, Metric, Operator, OperatorError, Phenomenon, QuestionType, SetOp,
    Shape, SubType, Template,
};
pub use dataset::{
    read_dataset, verbalize, write_dataset, Conversation, DatasetError, Speaker, StructureError, Turn,
};
pub use stats::{dataset_stats, StatsReport};
pub use validate::{validate_conversation, RepairPolicy, TurnReport, TurnStatus, ValidationReport};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ids::{EntityId, PropertyId, TypeId};
use crate::sparql::{GroupConstraint, QueryForm, Slot, SlotKind, SparqlQuery, Term, Threshold};

/// A `(subject, relation, object)` hint; endpoints may be classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TripleHint(pub EntityId, pub PropertyId, pub EntityId);

/// The symbols annotated on a user turn, in slot order.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct QuestionAnnotation {
    pub intent_type: String,
    pub sub_type: String,
    #[serde(default)]
    pub entities: Vec<EntityId>,
    #[serde(default)]
    pub relations: Vec<PropertyId>,
    #[serde(default)]
    pub types: Vec<TypeId>,
    #[serde(default)]
    pub triple_hints: Vec<TripleHint>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<Operator>,
}

impl QuestionAnnotation {
    /// The catalog row, looked up by sub-type and then by `type|sub-type`.
    pub fn sub_type_entry(&self) -> Result<&'static SubType, CatalogError> {
        template_for(&self.sub_type).or_else(|e| template_for(&format!("{}|{}", self.intent_type, self.sub_type)).map_err(|_| e))
    }

    /// Forward when the first entity is the subject of the first hint that
    /// mentions it, reverse when it is the object; forward without hints.
    /// Annotations without entities anchor on their first type.
    pub fn direction(&self) -> Direction {
        let Some(first) = self.entities.first().or(self.types.first()) else {
            return Direction::Forward;
        };
        for TripleHint(s, _, o) in &self.triple_hints {
            if s == first {
                return Direction::Forward;
            }
            if o == first {
                return Direction::Reverse;
            }
        }
        Direction::Forward
    }

    pub fn template(&self) -> Result<Template, CatalogError> {
        self.sub_type_entry()?.template(self.direction(), self.operator)
    }

    /// Every entity, relation and type named by the annotation.
    pub fn symbol_count(&self) -> usize {
        self.entities.len() + self.relations.len() + self.types.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot instantiate `{sub_type}`: missing {missing:?}, excess {excess:?}")]
pub struct InstantiateError {
    pub sub_type: String,
    /// Slots with no annotated symbol.
    pub missing: Vec<String>,
    /// Annotated symbols with no slot.
    pub excess: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TemplateError {
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Instantiate(#[from] InstantiateError),
}

fn check_kind<T: ToString>(
    kind: SlotKind,
    signature: &[Slot],
    symbols: &[T],
    missing: &mut Vec<String>,
    excess: &mut Vec<String>,
) {
    let slots: Vec<&Slot> = signature.iter().filter(|s| s.kind == kind).collect();
    if slots.is_empty() {
        return;
    }
    for s in slots.iter().skip(symbols.len()) {
        missing.push(s.to_string());
    }
    for sym in symbols.iter().skip(slots.len()) {
        excess.push(sym.to_string());
    }
}

/// Replace every slot by the annotated symbol at its ordinal.
pub fn instantiate(t: &Template, ann: &QuestionAnnotation) -> Result<SparqlQuery, InstantiateError> {
    let (mut missing, mut excess) = (Vec::new(), Vec::new());
    check_kind(SlotKind::Entity, &t.signature, &ann.entities, &mut missing, &mut excess);
    check_kind(SlotKind::Relation, &t.signature, &ann.relations, &mut missing, &mut excess);
    check_kind(SlotKind::Type, &t.signature, &ann.types, &mut missing, &mut excess);
    check_kind(SlotKind::Value, &t.signature, &ann.values, &mut missing, &mut excess);
    if !missing.is_empty() || !excess.is_empty() {
        return Err(InstantiateError {
            sub_type: t.sub_type.to_string(),
            missing,
            excess,
        });
    }
    let nth = |ordinal: u32| ordinal as usize - 1;
    let mut q = t.skeleton.clone();
    q.map_terms(&mut |term| {
        if let Term::Slot(s) = *term {
            *term = match s.kind {
                SlotKind::Entity => Term::Entity(ann.entities[nth(s.ordinal)]),
                SlotKind::Relation => Term::Property(ann.relations[nth(s.ordinal)]),
                SlotKind::Type => Term::Entity(ann.types[nth(s.ordinal)]),
                SlotKind::Value => unreachable!("value slots only occur as thresholds"),
            };
        }
    });
    if let QueryForm::SelectGrouped {
        constraint: GroupConstraint::Compare { threshold, .. },
        ..
    } = &mut q.form
    {
        if let Threshold::Slot(s) = *threshold {
            *threshold = Threshold::Literal(ann.values[nth(s.ordinal)]);
        }
    }
    Ok(q)
}

/// Look up the template for an annotation and fill it.
pub fn instantiate_annotation(ann: &QuestionAnnotation) -> Result<SparqlQuery, TemplateError> {
    Ok(instantiate(&ann.template()?, ann)?)
}

#[cfg(test)]
mod tests;
