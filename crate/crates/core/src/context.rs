//! Conversation windows, per-turn KG vocabulary and linearized inputs.
//!
//! The vocabulary of a turn is grown from seed symbols. A named seed `e`
//! contributes `(e, r, τ)` for each outgoing `(e, r, o)` with `τ` a class
//! of `o`, `(τ, r, e)` for each incoming `(s, r, e)` with `τ` a class of
//! `s`, and `e`'s own classes. A class seed `τ` contributes every relation
//! leaving (`(τ, r, _)`) or entering (`(_, r, τ)`) one of its instances.
//! A neighbour without a class shows up as a blank endpoint.
//!
//! Linearized text is `[CLS] q1 [CTX] a1 [CTX] q [SEP]` followed by one
//! block per seed (label, class labels, relation labels; items separated by
//! `,`, blocks by `[SEP]`). Lengths are counted in whitespace tokens. When
//! everything does not fit, each seed gets its own chunk behind the same
//! prefix, cut at item boundaries.

use std::collections::BTreeSet;
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ids::{EntityId, PropertyId, TypeId, P31};
use crate::kg::KnowledgeGraph;
use crate::templates::{Conversation, Turn};

pub const CLS: &str = "[CLS]";
pub const CTX: &str = "[CTX]";
pub const SEP: &str = "[SEP]";
pub const DEFAULT_WINDOW: usize = 1;
pub const DEFAULT_MAX_LEN: usize = 512;

/// A user question and the system turn that answered it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interaction {
    pub question: Turn,
    pub answer: Turn,
    /// Index of the question in its conversation.
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextWindow {
    /// Oldest first.
    pub turns: Vec<Interaction>,
    pub window_size: usize,
}

impl ContextWindow {
    pub fn empty(window_size: usize) -> Self {
        ContextWindow {
            turns: Vec::new(),
            window_size,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.turns.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContextError {
    #[error("turn {index} is out of range for a conversation of {len} turns")]
    OutOfRange { index: usize, len: usize },
    #[error("turn {0} is not a user turn")]
    NotUser(usize),
    #[error("max length {max_len} cannot hold the {prefix}-token prefix plus one symbol")]
    TooShort { max_len: usize, prefix: usize },
}

/// The last `window_size` interactions before user turn `t`.
pub fn context_of(c: &Conversation, t: usize, window_size: usize) -> Result<ContextWindow, ContextError> {
    let turn = c.turns.get(t).ok_or(ContextError::OutOfRange {
        index: t,
        len: c.turns.len(),
    })?;
    if !turn.is_user() {
        return Err(ContextError::NotUser(t));
    }
    let mut all: Vec<Interaction> = (0..t)
        .filter(|i| c.turns[*i].is_user() && i + 1 < t)
        .map(|i| Interaction {
            question: c.turns[i].clone(),
            answer: c.turns[i + 1].clone(),
            index: i,
        })
        .collect();
    let keep = window_size.min(all.len());
    let turns = all.split_off(all.len() - keep);
    Ok(ContextWindow { turns, window_size })
}

/// An endpoint in the vocabulary subgraph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Node {
    Entity(EntityId),
    Type(TypeId),
    /// A neighbour without a class, or the open side of a class seed edge.
    Blank,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TypedTriple(pub Node, pub PropertyId, pub Node);

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DynamicVocabulary {
    /// The seed symbols the vocabulary was grown from.
    pub seeds: BTreeSet<EntityId>,
    pub entities: BTreeSet<EntityId>,
    pub relations: BTreeSet<PropertyId>,
    pub types: BTreeSet<TypeId>,
    pub subgraph: BTreeSet<TypedTriple>,
}

impl DynamicVocabulary {
    pub fn is_empty(&self) -> bool {
        self.seeds.is_empty() && self.subgraph.is_empty()
    }

    /// Entity-valued symbols (entities and classes) the vocabulary admits.
    pub fn admits_entity(&self, e: EntityId) -> bool {
        self.entities.contains(&e) || self.types.contains(&e)
    }

    fn add(&mut self, t: TypedTriple) {
        self.relations.insert(t.1);
        for n in [t.0, t.2] {
            match n {
                Node::Entity(e) => {
                    self.entities.insert(e);
                }
                Node::Type(ty) => {
                    self.types.insert(ty);
                }
                Node::Blank => {}
            }
        }
        self.subgraph.insert(t);
    }

    /// Class and relation labels attached to one seed, in id order.
    fn block_items(&self, seed: EntityId) -> (Vec<TypeId>, Vec<PropertyId>) {
        let mut types = BTreeSet::new();
        let mut rels = BTreeSet::new();
        for TypedTriple(s, r, o) in &self.subgraph {
            let here = |n: &Node| matches!(n, Node::Entity(e) | Node::Type(e) if *e == seed);
            if here(s) || here(o) {
                if *r == P31 && here(s) {
                    if let Node::Type(t) = o {
                        types.insert(*t);
                    }
                }
                rels.insert(*r);
            }
        }
        (types.into_iter().collect(), rels.into_iter().collect())
    }
}

fn class_nodes(kg: &KnowledgeGraph, e: EntityId) -> Vec<Node> {
    let types = kg.types_of(e);
    if types.is_empty() {
        vec![Node::Blank]
    } else {
        types.into_iter().map(Node::Type).collect()
    }
}

/// One-hop vocabulary around the seeds. A seed that is the class of some
/// entity is treated as a general (class) seed, anything else as named.
pub fn dynamic_vocabulary(kg: &KnowledgeGraph, seeds: &BTreeSet<EntityId>) -> DynamicVocabulary {
    let mut v = DynamicVocabulary {
        seeds: seeds.clone(),
        ..Default::default()
    };
    for &seed in seeds {
        if kg.is_type(seed) {
            v.types.insert(seed);
            let instances: Vec<EntityId> = kg.instances_of(seed).collect();
            for i in instances {
                for t in kg.by_subject(i) {
                    v.add(TypedTriple(Node::Type(seed), t.predicate, Node::Blank));
                }
                for t in kg.by_object(i) {
                    v.add(TypedTriple(Node::Blank, t.predicate, Node::Type(seed)));
                }
            }
        } else {
            v.entities.insert(seed);
            for t in kg.by_subject(seed) {
                if t.predicate == P31 {
                    v.add(TypedTriple(Node::Entity(seed), P31, Node::Type(t.object)));
                } else {
                    for n in class_nodes(kg, t.object) {
                        v.add(TypedTriple(Node::Entity(seed), t.predicate, n));
                    }
                }
            }
            for t in kg.by_object(seed) {
                for n in class_nodes(kg, t.subject) {
                    v.add(TypedTriple(n, t.predicate, Node::Entity(seed)));
                }
            }
        }
    }
    v
}

/// Token chunks sharing one text prefix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearizedInput {
    pub chunks: Vec<Vec<String>>,
    pub prefix_len: usize,
    pub max_len: usize,
}

impl LinearizedInput {
    pub fn prefix(&self) -> &[String] {
        &self.chunks[0][..self.prefix_len]
    }
}

impl fmt::Display for LinearizedInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, chunk) in self.chunks.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            f.write_str(&chunk.join(" "))?;
        }
        Ok(())
    }
}

fn words(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split_whitespace().map(str::to_string)
}

/// `[CLS] q1 [CTX] a1 [CTX] ... q [SEP]`.
pub fn text_prefix(question: &str, ctx: &ContextWindow) -> Vec<String> {
    let mut out = vec![CLS.to_string()];
    for i in &ctx.turns {
        out.extend(words(&i.question.utterance));
        out.push(CTX.to_string());
        out.extend(words(&i.answer.utterance));
        out.push(CTX.to_string());
    }
    out.extend(words(question));
    out.push(SEP.to_string());
    out
}

fn block(kg: &KnowledgeGraph, v: &DynamicVocabulary, seed: EntityId) -> Vec<Vec<String>> {
    let (types, rels) = v.block_items(seed);
    let mut items: Vec<Vec<String>> = vec![words(&kg.label(seed)).collect()];
    items.extend(types.into_iter().map(|t| words(&kg.label(t)).collect()));
    items.extend(rels.into_iter().map(|r| words(&kg.label(r)).collect()));
    items
}

fn flatten(items: &[Vec<String>]) -> Vec<String> {
    let mut out = Vec::new();
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            out.push(",".to_string());
        }
        out.extend(item.iter().cloned());
    }
    out
}

/// Render the question, its context and the vocabulary as token chunks.
pub fn linearize(
    kg: &KnowledgeGraph,
    v: &DynamicVocabulary,
    question: &str,
    ctx: &ContextWindow,
    max_len: usize,
    seed: u64,
) -> Result<LinearizedInput, ContextError> {
    let prefix = text_prefix(question, ctx);
    let too_short = || ContextError::TooShort {
        max_len,
        prefix: prefix.len(),
    };
    if prefix.len() >= max_len {
        return Err(too_short());
    }
    let mut seeds: Vec<EntityId> = v.seeds.iter().copied().collect();
    seeds.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let blocks: Vec<Vec<Vec<String>>> = seeds.iter().map(|s| block(kg, v, *s)).collect();

    let mut whole = prefix.clone();
    for (i, b) in blocks.iter().enumerate() {
        if i > 0 {
            whole.push(SEP.to_string());
        }
        whole.extend(flatten(b));
    }
    let chunks = if whole.len() <= max_len {
        vec![whole]
    } else {
        blocks
            .iter()
            .map(|b| cut(&prefix, b, max_len).ok_or_else(too_short))
            .collect::<Result<_, _>>()?
    };
    Ok(LinearizedInput {
        chunks,
        prefix_len: prefix.len(),
        max_len,
    })
}

/// Prefix plus as many whole items of the block as fit.
fn cut(prefix: &[String], block: &[Vec<String>], max_len: usize) -> Option<Vec<String>> {
    let mut out = prefix.to_vec();
    for (i, item) in block.iter().enumerate() {
        let extra = item.len() + usize::from(i > 0);
        if out.len() + extra > max_len {
            break;
        }
        if i > 0 {
            out.push(",".to_string());
        }
        out.extend(item.iter().cloned());
    }
    (out.len() > prefix.len()).then_some(out)
}
