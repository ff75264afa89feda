//! Mention detection, label linking and coreference over a conversation
//! window.
//!
//! Labels are normalized with [`crate::text::normalize`]. Linking tries an
//! exact label match, then labels that start with the mention at a word
//! boundary, then fuzzy matches scored by the Dice coefficient of character
//! trigram sets, `2|A∩B| / (|A|+|B|)`, kept when at least
//! [`FUZZY_THRESHOLD`]. Ties go to the smaller numeric id.
//!
//! Anaphora inventory: a demonstrative (`that`, `this`, `those`, `these`)
//! followed by a class label, the pronouns in [`PRONOUNS`], and `the former`
//! / `the latter`. Offsets are byte offsets into the utterance.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{self, Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::context::ContextWindow;
use crate::ids::{EntityId, Symbol};
use crate::kg::KnowledgeGraph;
use crate::sparql::Answer;
use crate::text::{dice, normalize, singular_phrase, trigrams};

pub const FUZZY_THRESHOLD: f64 = 0.6;
pub const PRONOUNS: [&str; 10] = ["it", "its", "they", "them", "their", "he", "him", "his", "she", "her"];
const DEMONSTRATIVES: [&str; 4] = ["that", "this", "those", "these"];
const PLURAL_DEMONSTRATIVES: [&str; 2] = ["those", "these"];
/// Longest label, in words, tried during detection.
const MAX_MENTION_WORDS: usize = 8;
/// Capitalized words that start a question rather than a name.
const NOT_NAMES: [&str; 24] = [
    "which", "what", "who", "whom", "whose", "where", "when", "how", "does", "do", "did", "is", "are", "was", "were",
    "and", "or", "the", "a", "an", "yes", "no", "i", "mean",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MentionKind {
    Named,
    General,
    Anaphoric,
}

/// `the former` / `the latter`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pick {
    Former,
    Latter,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MentionSpan {
    pub start: usize,
    pub end: usize,
    pub surface: String,
    pub kind: MentionKind,
    /// Head noun of a demonstrative anaphor.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub head: Option<String>,
    #[serde(default)]
    pub plural: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pick: Option<Pick>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchKind {
    Exact,
    Prefix,
    Fuzzy,
    /// Found in the conversation window.
    Context,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkCandidate {
    pub id: EntityId,
    pub score: f64,
    pub match_kind: MatchKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Posting {
    pub id: EntityId,
    pub label: String,
}

/// Label index over every labelled entity and class.
#[derive(Debug, Clone, Default)]
pub struct InvertedIndex {
    entries: Vec<Posting>,
    /// Entry positions are sorted by id inside every list.
    exact: HashMap<String, Vec<usize>>,
    words: BTreeMap<String, Vec<usize>>,
    grams: BTreeMap<String, Vec<usize>>,
    classes: BTreeSet<EntityId>,
}

pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct Snapshot {
    version: u32,
    entries: Vec<Posting>,
    classes: BTreeSet<EntityId>,
}

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("snapshot version {found}, expected {SNAPSHOT_VERSION}")]
    Version { found: u32 },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl InvertedIndex {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_class(&self, id: EntityId) -> bool {
        self.classes.contains(&id)
    }

    /// Ids whose normalized label equals `normalized`, ascending.
    pub fn lookup(&self, normalized: &str) -> Vec<EntityId> {
        self.exact
            .get(normalized)
            .map(|v| v.iter().map(|i| self.entries[*i].id).collect())
            .unwrap_or_default()
    }

    pub fn postings_for_word(&self, word: &str) -> Vec<&Posting> {
        self.words
            .get(word)
            .map(|v| v.iter().map(|i| &self.entries[*i]).collect())
            .unwrap_or_default()
    }

    fn from_entries(mut entries: Vec<Posting>, classes: BTreeSet<EntityId>) -> Self {
        entries.sort_by(|a, b| a.id.cmp(&b.id).then_with(|| a.label.cmp(&b.label)));
        let mut idx = InvertedIndex {
            classes,
            ..Default::default()
        };
        for (i, e) in entries.iter().enumerate() {
            idx.exact.entry(e.label.clone()).or_default().push(i);
            for w in e.label.split(' ') {
                let list = idx.words.entry(w.to_string()).or_default();
                if list.last() != Some(&i) {
                    list.push(i);
                }
            }
            for g in trigrams(&e.label) {
                idx.grams.entry(g).or_default().push(i);
            }
        }
        idx.entries = entries;
        idx
    }

    pub fn write_snapshot<W: Write>(&self, sink: W) -> Result<(), SnapshotError> {
        let snap = Snapshot {
            version: SNAPSHOT_VERSION,
            entries: self.entries.clone(),
            classes: self.classes.clone(),
        };
        serde_json::to_writer(sink, &snap)?;
        Ok(())
    }

    pub fn read_snapshot<R: Read>(source: R) -> Result<Self, SnapshotError> {
        let snap: Snapshot = serde_json::from_reader(source)?;
        if snap.version != SNAPSHOT_VERSION {
            return Err(SnapshotError::Version { found: snap.version });
        }
        Ok(Self::from_entries(snap.entries, snap.classes))
    }
}

/// Index every entity and class label; property labels are left out.
pub fn build_index(kg: &KnowledgeGraph) -> InvertedIndex {
    let entries = kg
        .labels()
        .into_iter()
        .filter_map(|(sym, label)| match sym {
            Symbol::Entity(id) => Some(Posting {
                id,
                label: normalize(label),
            }),
            Symbol::Property(_) => None,
        })
        .filter(|p| !p.label.is_empty())
        .collect();
    InvertedIndex::from_entries(entries, kg.type_ids())
}

/// A word of the utterance with its byte range.
#[derive(Debug, Clone)]
struct Word {
    start: usize,
    end: usize,
    norm: String,
    capitalized: bool,
}

fn split_words(utterance: &str) -> Vec<Word> {
    let mut out = Vec::new();
    let mut start = None;
    let bytes: Vec<(usize, char)> = utterance.char_indices().collect();
    for (k, &(i, ch)) in bytes.iter().enumerate() {
        let inside = ch.is_alphanumeric() || (ch == '\'' && start.is_some());
        match (inside, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push(word(utterance, s, i));
                start = None;
            }
            _ => {}
        }
        if k + 1 == bytes.len() {
            if let Some(s) = start {
                out.push(word(utterance, s, utterance.len()));
            }
        }
    }
    out.retain(|w| !w.norm.is_empty());
    out
}

fn word(utterance: &str, start: usize, end: usize) -> Word {
    let text = &utterance[start..end];
    let text = text.trim_end_matches('\'');
    let end = start + text.len();
    Word {
        start,
        end,
        norm: normalize(text),
        capitalized: text.chars().next().is_some_and(|c| c.is_uppercase() || c.is_ascii_digit()),
    }
}

fn phrase(words: &[Word]) -> String {
    words.iter().map(|w| w.norm.as_str()).collect::<Vec<_>>().join(" ")
}

/// Longest class label starting at `words[0]`, singular or plural.
fn class_at(index: &InvertedIndex, words: &[Word]) -> Option<usize> {
    (1..=words.len().min(MAX_MENTION_WORDS)).rev().find(|&n| {
        let p = phrase(&words[..n]);
        let hits = |s: &str| index.lookup(s).iter().any(|id| index.is_class(*id));
        hits(&p) || hits(&singular_phrase(&p))
    })
}

/// Longest label of any kind starting at `words[0]`.
fn label_at(index: &InvertedIndex, words: &[Word]) -> Option<(usize, MentionKind)> {
    (1..=words.len().min(MAX_MENTION_WORDS)).rev().find_map(|n| {
        let p = phrase(&words[..n]);
        let ids = index.lookup(&p);
        if !ids.is_empty() {
            let all_classes = ids.iter().all(|id| index.is_class(*id));
            return Some((n, if all_classes { MentionKind::General } else { MentionKind::Named }));
        }
        let singular = singular_phrase(&p);
        (singular != p && index.lookup(&singular).iter().any(|id| index.is_class(*id))).then_some((n, MentionKind::General))
    })
}

fn span(utterance: &str, words: &[Word], kind: MentionKind) -> MentionSpan {
    let (start, end) = (words[0].start, words[words.len() - 1].end);
    MentionSpan {
        start,
        end,
        surface: utterance[start..end].to_string(),
        kind,
        head: None,
        plural: false,
        pick: None,
    }
}

/// Greedy left-to-right scan: anaphora first at each position, then the
/// longest exact label, then a run of capitalized words as a named mention
/// for fuzzy linking.
pub fn detect_mentions(utterance: &str, index: &InvertedIndex) -> Vec<MentionSpan> {
    let words = split_words(utterance);
    let mut out = Vec::new();
    let mut i = 0;
    while i < words.len() {
        let w = &words[i];
        if DEMONSTRATIVES.contains(&w.norm.as_str()) {
            if let Some(n) = class_at(index, &words[i + 1..]) {
                let mut s = span(utterance, &words[i..i + 1 + n], MentionKind::Anaphoric);
                s.head = Some(phrase(&words[i + 1..i + 1 + n]));
                s.plural = PLURAL_DEMONSTRATIVES.contains(&w.norm.as_str());
                out.push(s);
                i += 1 + n;
                continue;
            }
        }
        if w.norm == "the" {
            if let Some(next) = words.get(i + 1) {
                let pick = match next.norm.as_str() {
                    "former" => Some(Pick::Former),
                    "latter" => Some(Pick::Latter),
                    _ => None,
                };
                if pick.is_some() {
                    let mut s = span(utterance, &words[i..i + 2], MentionKind::Anaphoric);
                    s.pick = pick;
                    out.push(s);
                    i += 2;
                    continue;
                }
            }
        }
        if PRONOUNS.contains(&w.norm.as_str()) {
            out.push(span(utterance, &words[i..i + 1], MentionKind::Anaphoric));
            i += 1;
            continue;
        }
        if let Some((n, kind)) = label_at(index, &words[i..]) {
            out.push(span(utterance, &words[i..i + n], kind));
            i += n;
            continue;
        }
        if w.capitalized && !NOT_NAMES.contains(&w.norm.as_str()) {
            let mut n = 1;
            while i + n < words.len() && words[i + n].capitalized && !NOT_NAMES.contains(&words[i + n].norm.as_str()) {
                n += 1;
            }
            let s = span(utterance, &words[i..i + n], MentionKind::Named);
            if !link_mention(index, &s).is_empty() {
                out.push(s);
                i += n;
                continue;
            }
        }
        i += 1;
    }
    out
}

fn ranked(mut found: Vec<LinkCandidate>) -> Vec<LinkCandidate> {
    found.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.id.cmp(&b.id)));
    found
}

/// Ranked candidates for a named or general mention; anaphoric spans
/// return nothing here (see [`resolve_coreference`]).
pub fn link_mention(index: &InvertedIndex, span: &MentionSpan) -> Vec<LinkCandidate> {
    if span.kind == MentionKind::Anaphoric {
        return Vec::new();
    }
    let norm = normalize(&span.surface);
    if norm.is_empty() {
        return Vec::new();
    }
    let allowed = |id: EntityId| span.kind != MentionKind::General || index.is_class(id);
    let mut seen: BTreeSet<EntityId> = BTreeSet::new();
    let mut out = Vec::new();

    let mut exact: Vec<EntityId> = index.lookup(&norm);
    if span.kind == MentionKind::General {
        let singular = singular_phrase(&norm);
        if singular != norm {
            exact.extend(index.lookup(&singular));
        }
    }
    exact.sort();
    exact.dedup();
    for id in exact.into_iter().filter(|id| allowed(*id)) {
        seen.insert(id);
        out.push(LinkCandidate {
            id,
            score: 1.0,
            match_kind: MatchKind::Exact,
        });
    }

    // every label word must match, the last one as a prefix
    let first = norm.split(' ').next().unwrap_or_default();
    let mut prefix = Vec::new();
    for p in index.postings_for_word(first) {
        if !seen.contains(&p.id) && allowed(p.id) && p.label.len() > norm.len() && p.label.starts_with(&norm) {
            if p.label.as_bytes()[norm.len()] == b' ' {
                seen.insert(p.id);
                prefix.push(LinkCandidate {
                    id: p.id,
                    score: norm.len() as f64 / p.label.len() as f64,
                    match_kind: MatchKind::Prefix,
                });
            }
        }
    }
    out.extend(ranked(prefix));

    let grams = trigrams(&norm);
    let mut pool: BTreeSet<usize> = BTreeSet::new();
    for g in &grams {
        if let Some(list) = index.grams.get(g) {
            pool.extend(list.iter().copied());
        }
    }
    let mut fuzzy = Vec::new();
    let mut best: BTreeMap<EntityId, f64> = BTreeMap::new();
    for i in pool {
        let p = &index.entries[i];
        if seen.contains(&p.id) || !allowed(p.id) {
            continue;
        }
        let score = dice(&grams, &trigrams(&p.label));
        if score >= FUZZY_THRESHOLD {
            let slot = best.entry(p.id).or_insert(0.0);
            *slot = slot.max(score);
        }
    }
    for (id, score) in best {
        fuzzy.push(LinkCandidate {
            id,
            score,
            match_kind: MatchKind::Fuzzy,
        });
    }
    out.extend(ranked(fuzzy));
    out
}

/// Entities a window turn makes available: the answer's entities, then
/// the question's annotated (or exactly labelled) entities.
fn turn_entities(index: &InvertedIndex, i: &crate::context::Interaction) -> (Vec<EntityId>, Vec<EntityId>) {
    let answer = match i.question.gold_answer.as_ref().and_then(Answer::as_set) {
        Some(set) => set.iter().copied().collect(),
        None => i
            .answer
            .utterance
            .split(", ")
            .flat_map(|part| index.lookup(&normalize(part)))
            .filter(|id| !index.is_class(*id))
            .collect(),
    };
    let question = match &i.question.annotation {
        Some(a) => a.entities.clone(),
        None => detect_mentions(&i.question.utterance, index)
            .iter()
            .filter(|s| s.kind == MentionKind::Named)
            .flat_map(|s| index.lookup(&normalize(&s.surface)))
            .collect(),
    };
    (answer, question)
}

fn has_class_labelled(kg: &KnowledgeGraph, e: EntityId, head: &str) -> bool {
    let want = singular_phrase(&normalize(head));
    kg.types_of(e)
        .into_iter()
        .any(|t| kg.label_opt(t).is_some_and(|l| singular_phrase(&normalize(l)) == want))
}

/// Context entities an anaphor may refer to, most recent interaction
/// first; within an interaction answer entities precede question entities.
/// A head noun keeps only entities with a class of that label.
pub fn resolve_coreference(
    index: &InvertedIndex,
    span: &MentionSpan,
    ctx: &ContextWindow,
    kg: &KnowledgeGraph,
) -> Vec<LinkCandidate> {
    if span.kind != MentionKind::Anaphoric {
        return Vec::new();
    }
    if let Some(pick) = span.pick {
        let Some(last) = ctx.turns.last() else {
            return Vec::new();
        };
        let (_, question) = turn_entities(index, last);
        let chosen = match pick {
            Pick::Former => question.first(),
            Pick::Latter => question.last(),
        };
        return chosen
            .map(|id| LinkCandidate {
                id: *id,
                score: 1.0,
                match_kind: MatchKind::Context,
            })
            .into_iter()
            .collect();
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (back, inter) in ctx.turns.iter().rev().enumerate() {
        let decay = 0.5f64.powi(back as i32);
        let (answer, question) = turn_entities(index, inter);
        let tagged = answer.into_iter().map(|e| (e, 1.0)).chain(question.into_iter().map(|e| (e, 0.8)));
        for (e, weight) in tagged {
            if let Some(head) = &span.head {
                if !has_class_labelled(kg, e, head) {
                    continue;
                }
            }
            if seen.insert(e) {
                out.push(LinkCandidate {
                    id: e,
                    score: weight * decay,
                    match_kind: MatchKind::Context,
                });
            }
        }
    }
    out
}
