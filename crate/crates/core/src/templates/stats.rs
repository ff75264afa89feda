//! Dataset-level counts.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::dataset::Conversation;
use crate::ids::{EntityId, PropertyId};
use crate::kg::{KnowledgeGraph, Triple};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StatsReport {
    pub instances: usize,
    pub turns: usize,
    pub distinct_entities: usize,
    pub distinct_relations: usize,
    pub distinct_types: usize,
    /// Turns (user and system) per conversation.
    pub avg_turn_length: f64,
    pub avg_entities_per_conversation: f64,
    pub avg_types_per_conversation: f64,
    /// Mean size of the union of one-hop neighbourhoods of a user turn's
    /// annotated entities; needs the graph.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub avg_neighbourhood_per_turn: Option<f64>,
}

fn mean(total: usize, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        total as f64 / n as f64
    }
}

/// Single pass over a conversation stream.
pub fn dataset_stats<'a>(
    dataset: impl IntoIterator<Item = &'a Conversation>,
    kg: Option<&KnowledgeGraph>,
) -> StatsReport {
    let mut entities: BTreeSet<EntityId> = BTreeSet::new();
    let mut relations: BTreeSet<PropertyId> = BTreeSet::new();
    let mut types: BTreeSet<EntityId> = BTreeSet::new();
    let (mut instances, mut turns, mut conv_entities, mut conv_types) = (0, 0, 0, 0);
    let (mut hood_total, mut hood_turns) = (0, 0);
    for c in dataset {
        instances += 1;
        turns += c.turns.len();
        let mut ce = BTreeSet::new();
        let mut ct = BTreeSet::new();
        for ann in c.turns.iter().filter_map(|t| t.annotation.as_ref()) {
            ce.extend(ann.entities.iter().copied());
            ct.extend(ann.types.iter().copied());
            relations.extend(ann.relations.iter().copied());
            if let Some(kg) = kg {
                let hood: BTreeSet<Triple> = ann.entities.iter().flat_map(|e| kg.neighborhood(*e)).collect();
                hood_total += hood.len();
                hood_turns += 1;
            }
        }
        conv_entities += ce.len();
        conv_types += ct.len();
        entities.extend(ce);
        types.extend(ct);
    }
    StatsReport {
        instances,
        turns,
        distinct_entities: entities.len(),
        distinct_relations: relations.len(),
        distinct_types: types.len(),
        avg_turn_length: mean(turns, instances),
        avg_entities_per_conversation: mean(conv_entities, instances),
        avg_types_per_conversation: mean(conv_types, instances),
        avg_neighbourhood_per_turn: kg.map(|_| mean(hood_total, hood_turns)),
    }
}
