//! Sketch-then-fill parsing of one conversation turn.
//!
//! Pipeline: detect mentions, link them (coreference through the context
//! window), grow the turn vocabulary from the linked symbols, rank sketches,
//! fill each sketch's slots with a beam, execute every filled query, and
//! return the best by
//!
//! `confidence × slot score product × (0.5 + 0.5 × coherence) × executability`
//!
//! where coherence is the share of relation endpoints whose classes occur
//! on that side of the relation somewhere in the graph, and executability
//! is 1 for a nonempty set, a nonzero count or any boolean, 0.2 for an
//! empty set or a zero count, and 0.01 when execution fails.
//!
//! Context turns are read as they are stored: their annotations stand for
//! what was understood earlier in the conversation. The evaluator writes
//! its own predictions there in predicted mode.
//!
//! ```
//! use convkgqa::fixtures::{baseball_conversation, mini_kg};
//! use convkgqa::parser::{Parser, ParserConfig};
//!
//! let kg = mini_kg();
//! let parser = Parser::new(&kg);
//! let r = parser.parse_turn(&baseball_conversation(), 0, &ParserConfig::default()).unwrap();
//! assert_eq!(r.sparql.to_string(), "SELECT ?x WHERE { ?x wdt:P1923 wd:Q650855 . ?x wdt:P31 wd:Q500834 . }");
//! ```

mod fill;
mod selector;
mod vocab;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::context::{
    context_of, dynamic_vocabulary, linearize, ContextError, ContextWindow, DynamicVocabulary, Node, TypedTriple,
    DEFAULT_MAX_LEN, DEFAULT_WINDOW,
};
use crate::ids::{EntityId, PropertyId, Symbol, TypeId, P31};
use crate::kg::KnowledgeGraph;
use crate::linking::{build_index, detect_mentions, link_mention, resolve_coreference, InvertedIndex, MentionKind};
use crate::sparql::{canonicalize, evaluate, Answer, SlotKind, SparqlQuery, Term};
use crate::templates::{instantiate_annotation, Conversation, Direction, Operator, Phenomenon, QuestionAnnotation};
use crate::text::{normalize, tokens};

pub use fill::{fill_slots, FilledQuery, Filler, SlotCandidates};
pub use selector::{numbers_in, select_sketch, OracleSelector, RuleSelector, Selector, Sketch, SketchSelector};
pub use vocab::{assemble_output_vocabulary, out_of_vocabulary, OutputToken, OutputVocabulary, FIXED_VOCABULARY};

pub const DEFAULT_BEAM: usize = 8;
/// Candidates kept per named mention.
const LINKS_PER_MENTION: usize = 3;
/// Weight of a candidate offered to a slot other than its own.
const OFF_ORDER: f64 = 0.3;
/// Relation triples scanned when collecting endpoint classes.
const ROLE_SCAN: usize = 20_000;

#[derive(Debug, Clone)]
pub struct ParserConfig {
    pub selector: Selector,
    pub window: usize,
    pub beam: usize,
    /// Seeds the block shuffle of the linearized input.
    pub seed: u64,
    pub max_len: usize,
}

impl Default for ParserConfig {
    fn default() -> Self {
        ParserConfig {
            selector: Selector::Rules,
            window: DEFAULT_WINDOW,
            beam: DEFAULT_BEAM,
            seed: 0,
            max_len: DEFAULT_MAX_LEN,
        }
    }
}

impl ParserConfig {
    pub fn oracle() -> Self {
        ParserConfig {
            selector: Selector::Oracle,
            ..Default::default()
        }
    }
}

/// Error categories for predicted queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorTag {
    WrongEntity,
    WrongRelation,
    MissingEntity,
    ArgumentOrder,
    WrongIntent,
    IllFormed,
}

impl fmt::Display for ErrorTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErrorTag::WrongEntity => "wrong-entity",
            ErrorTag::WrongRelation => "wrong-relation",
            ErrorTag::MissingEntity => "missing-entity",
            ErrorTag::ArgumentOrder => "argument-order",
            ErrorTag::WrongIntent => "wrong-intent",
            ErrorTag::IllFormed => "ill-formed",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Mentions,
    Linking,
    Vocabulary,
    Input,
    Sketch,
    Fill,
    Rank,
    Diagnosis,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub stage: Stage,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tag: Option<ErrorTag>,
}

/// Append-only record of one parse.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Trace(Vec<TraceStep>);

impl Trace {
    fn push(&mut self, stage: Stage, message: impl Into<String>) {
        self.0.push(TraceStep {
            stage,
            message: message.into(),
            tag: None,
        });
    }

    fn tag(&mut self, tag: ErrorTag, message: impl Into<String>) {
        self.0.push(TraceStep {
            stage: Stage::Diagnosis,
            message: message.into(),
            tag: Some(tag),
        });
    }

    pub fn steps(&self) -> &[TraceStep] {
        &self.0
    }

    pub fn tags(&self) -> BTreeSet<ErrorTag> {
        self.0.iter().filter_map(|s| s.tag).collect()
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            write!(f, "{:?}: {}", s.stage, s.message)?;
            if let Some(tag) = s.tag {
                write!(f, " [{tag}]")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ParseResult {
    #[serde(serialize_with = "ser_query")]
    pub sparql: SparqlQuery,
    pub sub_type: String,
    pub direction: Direction,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub operator: Option<Operator>,
    /// The KG symbols and values the query was filled with.
    pub symbols: QuestionAnnotation,
    pub score: f64,
    /// Execution result; absent when execution failed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub answer: Option<Answer>,
    pub trace: Trace,
}

fn ser_query<S: Serializer>(q: &SparqlQuery, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(q)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error(transparent)]
    Context(#[from] ContextError),
    #[error("no executable candidate")]
    NoCandidate { trace: Trace },
}

impl ParseError {
    pub fn trace(&self) -> Option<&Trace> {
        match self {
            ParseError::NoCandidate { trace } => Some(trace),
            ParseError::Context(_) => None,
        }
    }
}

/// Linked material for slot filling, in order of appearance.
#[derive(Debug, Default)]
struct Linked {
    entities: Vec<Vec<(EntityId, f64)>>,
    types: Vec<Vec<(TypeId, f64)>>,
    values: Vec<u64>,
    prev_entities: Vec<EntityId>,
    prev_relations: Vec<PropertyId>,
    prev_types: Vec<TypeId>,
    /// Gold relations in oracle mode.
    relations: Vec<PropertyId>,
    /// Gold symbols placed by ordinal; no cross-slot offers.
    oracle: bool,
}

impl Linked {
    fn seeds(&self) -> BTreeSet<EntityId> {
        let mut s: BTreeSet<EntityId> = self.entities.iter().flatten().map(|(e, _)| *e).collect();
        s.extend(self.types.iter().flatten().map(|(t, _)| *t));
        if !self.oracle {
            s.extend(&self.prev_types);
        }
        s
    }
}

/// A parser over one graph. Immutable after construction, so turns can be
/// parsed from several threads.
pub struct Parser<'k> {
    kg: &'k KnowledgeGraph,
    index: InvertedIndex,
}

impl<'k> Parser<'k> {
    pub fn new(kg: &'k KnowledgeGraph) -> Self {
        Parser {
            kg,
            index: build_index(kg),
        }
    }

    pub fn with_index(kg: &'k KnowledgeGraph, index: InvertedIndex) -> Self {
        Parser { kg, index }
    }

    pub fn kg(&self) -> &'k KnowledgeGraph {
        self.kg
    }

    pub fn index(&self) -> &InvertedIndex {
        &self.index
    }

    /// Parse user turn `t` of `c`.
    pub fn parse_turn(&self, c: &Conversation, t: usize, cfg: &ParserConfig) -> Result<ParseResult, ParseError> {
        let ctx = context_of(c, t, cfg.window)?;
        let turn = &c.turns[t];
        let question = turn.utterance.as_str();
        let mut trace = Trace::default();

        let (linked, sketches) = match &cfg.selector {
            Selector::Oracle => {
                let Some(ann) = &turn.annotation else {
                    trace.push(Stage::Linking, "oracle mode needs an annotated turn");
                    return Err(ParseError::NoCandidate { trace });
                };
                let linked = Linked {
                    entities: ann.entities.iter().map(|e| vec![(*e, 1.0)]).collect(),
                    types: ann.types.iter().map(|t| vec![(*t, 1.0)]).collect(),
                    values: ann.values.clone(),
                    relations: ann.relations.clone(),
                    oracle: true,
                    ..Default::default()
                };
                trace.push(Stage::Linking, format!("gold symbols: {}", symbol_list(ann)));
                let sketches = select_sketch(&OracleSelector::for_annotation(ann), question, &ctx);
                (linked, sketches)
            }
            Selector::Rules => (self.link(question, &ctx, &mut trace), select_sketch(&RuleSelector, question, &ctx)),
            Selector::Custom(s) => (self.link(question, &ctx, &mut trace), select_sketch(s.as_ref(), question, &ctx)),
        };

        let v = dynamic_vocabulary(self.kg, &linked.seeds());
        trace.push(
            Stage::Vocabulary,
            format!(
                "{} seeds, {} entities, {} relations, {} types",
                v.seeds.len(),
                v.entities.len(),
                v.relations.len(),
                v.types.len()
            ),
        );
        match linearize(self.kg, &v, question, &ctx, cfg.max_len, cfg.seed) {
            Ok(input) => trace.push(
                Stage::Input,
                format!("{} chunk(s), prefix of {} tokens", input.chunks.len(), input.prefix_len),
            ),
            Err(e) => trace.push(Stage::Input, e.to_string()),
        }

        let relation_scores = [false, true].map(|ellipsis| self.relation_scores(question, &v, &linked, ellipsis));
        let mut roles = RoleCache::default();
        let mut best: Option<(f64, String, ParseResult)> = None;
        for sketch in &sketches {
            let template = match sketch.sub_type.template(sketch.direction, sketch.operator) {
                Ok(t) => t,
                Err(e) => {
                    trace.push(Stage::Sketch, format!("{sketch}: {e}"));
                    continue;
                }
            };
            let ellipsis = sketch.sub_type.has(Phenomenon::Ellipsis);
            let relations = &relation_scores[usize::from(ellipsis)];
            let candidates = slot_candidates(&template.signature, &linked, relations, &v, ellipsis);
            let filled = fill_slots(&template, &candidates, &v, cfg.beam);
            trace.push(Stage::Sketch, format!("{sketch}: {} filling(s)", filled.len()));
            for f in filled {
                let answer = evaluate(self.kg, &f.query).ok();
                let exec = match &answer {
                    None => 0.01,
                    Some(Answer::EntitySet(s)) if s.is_empty() => 0.2,
                    Some(Answer::Count(0)) => 0.2,
                    Some(_) => 1.0,
                };
                let coherence = roles.coherence(self.kg, &f.query);
                let score = sketch.confidence * f.score * (0.5 + 0.5 * coherence) * exec;
                let text = f.query.to_string();
                trace.push(
                    Stage::Fill,
                    format!("{text} fill={:.3} coherence={coherence:.2} exec={exec} score={score:.4}", f.score),
                );
                let better = match &best {
                    None => true,
                    Some((s, t, _)) => score > *s || (score == *s && text < *t),
                };
                if better {
                    let mut symbols = f.symbols(&template);
                    symbols.intent_type = sketch.sub_type.question_type.name().to_string();
                    symbols.triple_hints = Vec::new();
                    let result = ParseResult {
                        sparql: f.query,
                        sub_type: sketch.sub_type.name.to_string(),
                        direction: sketch.direction,
                        operator: template.operator,
                        symbols,
                        score,
                        answer,
                        trace: Trace::default(),
                    };
                    best = Some((score, text, result));
                }
            }
        }

        let Some((score, text, mut result)) = best else {
            trace.push(Stage::Rank, "no sketch could be filled");
            return Err(ParseError::NoCandidate { trace });
        };
        trace.push(Stage::Rank, format!("chose {} ({}): {text} score={score:.4}", result.sub_type, dir_name(result.direction)));
        if let Some(gold) = turn.gold_sparql.clone().or_else(|| turn.annotation.as_ref().and_then(|a| instantiate_annotation(a).ok())) {
            diagnose(&result, &gold, turn.annotation.as_ref(), &mut trace);
        }
        result.trace = trace;
        Ok(result)
    }

    fn link(&self, question: &str, ctx: &ContextWindow, trace: &mut Trace) -> Linked {
        let mentions = detect_mentions(question, &self.index);
        trace.push(
            Stage::Mentions,
            mentions
                .iter()
                .map(|m| format!("{:?} `{}`", m.kind, m.surface))
                .collect::<Vec<_>>()
                .join(", "),
        );
        let mut linked = Linked {
            values: numbers_in(question),
            ..Default::default()
        };
        for m in &mentions {
            match m.kind {
                MentionKind::Named => {
                    let found = link_mention(&self.index, m);
                    let keep: Vec<(EntityId, f64)> = found
                        .iter()
                        .filter(|c| !self.index.is_class(c.id))
                        .take(LINKS_PER_MENTION)
                        .map(|c| (c.id, c.score))
                        .collect();
                    trace.push(Stage::Linking, format!("`{}` -> {}", m.surface, scored(&keep)));
                    if !keep.is_empty() {
                        linked.entities.push(keep);
                    }
                }
                MentionKind::General => {
                    let keep: Vec<(TypeId, f64)> = link_mention(&self.index, m)
                        .iter()
                        .take(LINKS_PER_MENTION)
                        .map(|c| (c.id, c.score))
                        .collect();
                    trace.push(Stage::Linking, format!("`{}` -> class {}", m.surface, scored(&keep)));
                    if !keep.is_empty() {
                        linked.types.push(keep);
                    }
                }
                MentionKind::Anaphoric => {
                    let found = resolve_coreference(&self.index, m, ctx, self.kg);
                    let keep: Vec<(EntityId, f64)> = found.iter().map(|c| (c.id, c.score)).collect();
                    trace.push(Stage::Linking, format!("`{}` refers to {}", m.surface, scored(&keep)));
                    if m.plural {
                        linked.entities.extend(keep.into_iter().map(|(e, s)| vec![(e, s)]));
                    } else if !keep.is_empty() {
                        linked.entities.push(keep.into_iter().take(LINKS_PER_MENTION).collect());
                    }
                }
            }
        }
        if let Some(last) = ctx.turns.last() {
            if let Some(a) = &last.question.annotation {
                linked.prev_entities = a.entities.clone();
                linked.prev_relations = a.relations.clone();
                linked.prev_types = a.types.clone();
            }
        }
        linked
    }

    /// Prior for every relation of the vocabulary: word overlap with the
    /// question, adjacency to a linked entity, and a triple joining a linked
    /// entity to a linked class. Ellipsis readings also favour the previous
    /// turn's relations.
    fn relation_scores(
        &self,
        question: &str,
        v: &DynamicVocabulary,
        linked: &Linked,
        ellipsis: bool,
    ) -> Vec<(PropertyId, f64)> {
        if linked.oracle {
            return Vec::new();
        }
        let words = tokens(question);
        let entities: BTreeSet<EntityId> = linked.entities.iter().flatten().map(|(e, _)| *e).collect();
        let types: BTreeSet<TypeId> = linked.types.iter().flatten().map(|(t, _)| *t).collect();
        let is_entity = |n: &Node| matches!(n, Node::Entity(e) if entities.contains(e));
        let is_type = |n: &Node| matches!(n, Node::Type(t) if types.contains(t));
        v.relations
            .iter()
            .filter(|r| **r != P31)
            .map(|&r| {
                let label = normalize(&self.kg.label(r));
                let label_words: Vec<&str> = label.split(' ').filter(|w| !w.is_empty()).collect();
                let hits = label_words.iter().filter(|l| words.iter().any(|w| related(l, w))).count();
                let lexical = if label_words.is_empty() { 0.0 } else { hits as f64 / label_words.len() as f64 };
                let on_r = || v.subgraph.iter().filter(|TypedTriple(_, p, _)| *p == r);
                let touch = on_r().any(|TypedTriple(s, _, o)| is_entity(s) || is_entity(o));
                let bridge = on_r().any(|TypedTriple(s, _, o)| (is_entity(s) && is_type(o)) || (is_type(s) && is_entity(o)));
                let prior = if ellipsis && linked.prev_relations.contains(&r) { 0.3 } else { 0.0 };
                let score = 0.1 + 0.3 * lexical + 0.3 * f64::from(u8::from(touch)) + 0.3 * f64::from(u8::from(bridge)) + prior;
                (r, score.min(1.0))
            })
            .collect()
    }
}

fn dir_name(d: Direction) -> &'static str {
    match d {
        Direction::Forward => "forward",
        Direction::Reverse => "reverse",
    }
}

fn scored<T: fmt::Display>(xs: &[(T, f64)]) -> String {
    if xs.is_empty() {
        return "nothing".to_string();
    }
    xs.iter().map(|(x, s)| format!("{x}:{s:.2}")).collect::<Vec<_>>().join(" ")
}

fn symbol_list(a: &QuestionAnnotation) -> String {
    let mut parts: Vec<String> = a.entities.iter().map(ToString::to_string).collect();
    parts.extend(a.relations.iter().map(ToString::to_string));
    parts.extend(a.types.iter().map(ToString::to_string));
    parts.join(" ")
}

/// Same word, or a shared stem of at least five letters.
fn related(a: &str, b: &str) -> bool {
    if a == b {
        return true;
    }
    let common = a.chars().zip(b.chars()).take_while(|(x, y)| x == y).count();
    common >= 5
}

fn offer<T: Copy + Ord>(groups: &[Vec<(T, f64)>], k: usize, oracle: bool) -> Vec<(T, f64)> {
    let mut out: Vec<(T, f64)> = Vec::new();
    let mut add = |x: T, s: f64| match out.iter_mut().find(|(y, _)| *y == x) {
        Some(slot) => slot.1 = slot.1.max(s),
        None => out.push((x, s)),
    };
    if let Some(own) = groups.get(k) {
        for &(x, s) in own {
            add(x, s);
        }
    }
    if !oracle {
        for (i, g) in groups.iter().enumerate() {
            if i != k {
                for &(x, s) in g {
                    add(x, s * OFF_ORDER);
                }
            }
        }
    }
    out
}

fn slot_candidates(
    signature: &[crate::sparql::Slot],
    linked: &Linked,
    relations: &[(PropertyId, f64)],
    v: &DynamicVocabulary,
    ellipsis: bool,
) -> SlotCandidates {
    let mut out = SlotCandidates::new();
    for slot in signature {
        let k = slot.ordinal as usize - 1;
        let list: Vec<(Filler, f64)> = match slot.kind {
            SlotKind::Entity => {
                let mut c = offer(&linked.entities, k, linked.oracle);
                if ellipsis && !linked.oracle {
                    for e in &linked.prev_entities {
                        if !c.iter().any(|(x, _)| x == e) {
                            c.push((*e, 0.25));
                        }
                    }
                }
                c.into_iter().map(|(e, s)| (Filler::Entity(e), s)).collect()
            }
            SlotKind::Type => {
                let mut c = offer(&linked.types, k, linked.oracle);
                if !linked.oracle {
                    for t in &linked.prev_types {
                        if !c.iter().any(|(x, _)| x == t) {
                            c.push((*t, if ellipsis { 0.8 } else { 0.1 }));
                        }
                    }
                    for t in v.types.iter().take(50) {
                        if !c.iter().any(|(x, _)| x == t) {
                            c.push((*t, 0.05));
                        }
                    }
                }
                c.into_iter().map(|(t, s)| (Filler::Type(t), s)).collect()
            }
            SlotKind::Relation => {
                if linked.oracle {
                    linked.relations.get(k).map(|r| vec![(Filler::Relation(*r), 1.0)]).unwrap_or_default()
                } else {
                    relations.iter().map(|(r, s)| (Filler::Relation(*r), *s)).collect()
                }
            }
            SlotKind::Value => {
                let groups: Vec<Vec<(u64, f64)>> = linked.values.iter().map(|n| vec![(*n, 1.0)]).collect();
                offer(&groups, k, linked.oracle).into_iter().map(|(n, s)| (Filler::Value(n), s)).collect()
            }
        };
        out.insert(*slot, list);
    }
    out
}

/// Classes seen on either side of each relation, memoized per parse.
#[derive(Default)]
struct RoleCache(HashMap<PropertyId, (BTreeSet<TypeId>, BTreeSet<TypeId>)>);

impl RoleCache {
    fn roles(&mut self, kg: &KnowledgeGraph, r: PropertyId) -> &(BTreeSet<TypeId>, BTreeSet<TypeId>) {
        self.0.entry(r).or_insert_with(|| {
            let (mut subj, mut obj) = (BTreeSet::new(), BTreeSet::new());
            for t in kg.by_predicate(r).iter().take(ROLE_SCAN) {
                subj.extend(kg.types_of(t.subject));
                obj.extend(kg.types_of(t.object));
            }
            (subj, obj)
        })
    }

    /// Share of relation endpoints whose known classes meet the classes
    /// the relation takes on that side; 1 when nothing can be checked.
    fn coherence(&mut self, kg: &KnowledgeGraph, q: &SparqlQuery) -> f64 {
        let mut var_types: HashMap<String, BTreeSet<TypeId>> = HashMap::new();
        let mut edges = Vec::new();
        q.visit_patterns(&mut |p| match (&p.predicate, &p.object) {
            (Term::Property(P31), Term::Entity(t)) => {
                if let Term::Var(v) = &p.subject {
                    var_types.entry(v.name().to_string()).or_default().insert(*t);
                }
            }
            (Term::Property(r), _) => edges.push((p.subject.clone(), *r, p.object.clone())),
            _ => {}
        });
        let classes = |t: &Term| -> Option<BTreeSet<TypeId>> {
            match t {
                Term::Entity(e) => Some(kg.types_of(*e)).filter(|s| !s.is_empty()),
                Term::Var(v) => var_types.get(v.name()).cloned(),
                _ => None,
            }
        };
        let (mut checked, mut ok) = (0usize, 0usize);
        for (s, r, o) in edges {
            let (sc, oc) = (classes(&s), classes(&o));
            let (subj, obj) = self.roles(kg, r);
            for (side, allowed) in [(sc, subj), (oc, obj)] {
                if let Some(cls) = side {
                    checked += 1;
                    if !cls.is_disjoint(allowed) {
                        ok += 1;
                    }
                }
            }
        }
        if checked == 0 {
            1.0
        } else {
            ok as f64 / checked as f64
        }
    }
}

/// Tag how a prediction differs from the gold query.
fn diagnose(pred: &ParseResult, gold: &SparqlQuery, gold_ann: Option<&QuestionAnnotation>, trace: &mut Trace) {
    if canonicalize(&pred.sparql) == canonicalize(gold) {
        trace.push(Stage::Diagnosis, "matches the gold query");
        return;
    }
    if pred.answer.is_none() {
        trace.tag(ErrorTag::IllFormed, "prediction does not execute");
    }
    if let Some(gold_shape) = gold_ann.and_then(|a| a.sub_type_entry().ok()).map(|s| s.shape) {
        let pred_shape = crate::templates::template_for(&pred.sub_type).ok().map(|s| s.shape);
        if pred_shape != Some(gold_shape) {
            trace.tag(ErrorTag::WrongIntent, format!("predicted {}", pred.sub_type));
        }
    }
    let (pe, ge) = (pred.sparql.entities(), gold.entities());
    if pe != ge {
        let missing: Vec<String> = ge.difference(&pe).map(ToString::to_string).collect();
        if pe.len() < ge.len() && pe.is_subset(&ge) {
            trace.tag(ErrorTag::MissingEntity, format!("missing {}", missing.join(" ")));
        } else {
            trace.tag(ErrorTag::WrongEntity, format!("gold has {}", missing.join(" ")));
        }
    }
    let strip = |s: BTreeSet<PropertyId>| s.into_iter().filter(|p| *p != P31).collect::<BTreeSet<_>>();
    let (pr, gr) = (strip(pred.sparql.properties()), strip(gold.properties()));
    if pr != gr {
        let names: Vec<String> = gr.iter().map(ToString::to_string).collect();
        trace.tag(ErrorTag::WrongRelation, format!("gold uses {}", names.join(" ")));
    }
    if pe == ge && pr == gr && trace.tags().is_empty() {
        trace.tag(ErrorTag::ArgumentOrder, "same symbols, different arrangement");
    }
}

/// Whether every KG symbol of `q` is among `symbols` (or is `P31`).
pub fn within_symbols(q: &SparqlQuery, symbols: &QuestionAnnotation) -> bool {
    let allowed: BTreeSet<Symbol> = symbols
        .entities
        .iter()
        .chain(&symbols.types)
        .map(|e| Symbol::Entity(*e))
        .chain(symbols.relations.iter().map(|r| Symbol::Property(*r)))
        .collect();
    out_of_vocabulary(q, &allowed).is_empty()
}

#[cfg(test)]
mod tests;
