//! Execution-based scoring, stratified reports and held-out splits.
//!
//! Set-valued questions are scored with micro F1 over summed true
//! positives, false positives and false negatives. Boolean and count
//! questions are scored by accuracy. Exact match compares canonical
//! queries with pattern order kept; an order-insensitive variant is
//! reported next to it.

mod splits;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::ids::EntityId;
use crate::kg::KnowledgeGraph;
use crate::parser::{ParseResult, Parser, ParserConfig, Selector};
use crate::sparql::{canonicalize, evaluate, Answer, GroupPattern, SparqlQuery};
use crate::templates::{instantiate_annotation, Conversation, Metric, Phenomenon, QuestionType};
use crate::text::normalize;

pub use splits::{make_splits, Ratios, SplitError, SplitManifest, SplitSpec, Splits};

/// Canonical equality; variable names and whitespace do not matter,
/// pattern order does.
pub fn exact_match(pred: &SparqlQuery, gold: &SparqlQuery) -> bool {
    canonicalize(pred) == canonicalize(gold)
}

/// Exact match that also ignores the order of patterns inside a group and
/// of the two sides of a union.
pub fn exact_match_unordered(pred: &SparqlQuery, gold: &SparqlQuery) -> bool {
    unordered(pred) == unordered(gold)
}

fn sort_pattern(p: &mut GroupPattern) {
    match p {
        GroupPattern::Bgp(ps) => ps.sort(),
        GroupPattern::Union(a, b) => {
            sort_pattern(a);
            sort_pattern(b);
            if format!("{b:?}") < format!("{a:?}") {
                std::mem::swap(a, b);
            }
        }
        GroupPattern::Minus(a, b) => {
            sort_pattern(a);
            sort_pattern(b);
        }
    }
}

/// Alternate renaming and sorting until neither changes the query.
fn unordered(q: &SparqlQuery) -> SparqlQuery {
    let mut cur = canonicalize(q);
    for _ in 0..8 {
        let mut next = cur.clone();
        sort_pattern(&mut next.pattern);
        let next = canonicalize(&next);
        if next == cur {
            break;
        }
        cur = next;
    }
    cur
}

/// Score of one answer; set questions carry counts, the rest a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Score {
    Set {
        tp: u64,
        fp: u64,
        #[serde(rename = "fn")]
        fn_: u64,
    },
    Exact {
        correct: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricContribution {
    #[serde(flatten)]
    pub score: Score,
    pub em: bool,
}

impl MetricContribution {
    /// F1 of this question alone; an empty prediction for an empty gold
    /// set counts as perfect.
    pub fn f1(&self) -> Option<f64> {
        match self.score {
            Score::Set { tp, fp, fn_ } => Some(f1(tp, fp, fn_)),
            Score::Exact { .. } => None,
        }
    }

    pub fn is_perfect(&self) -> bool {
        match self.score {
            Score::Set { fp, fn_, .. } => fp == 0 && fn_ == 0,
            Score::Exact { correct } => correct,
        }
    }
}

fn f1(tp: u64, fp: u64, fn_: u64) -> f64 {
    if tp + fp + fn_ == 0 {
        return 1.0;
    }
    2.0 * tp as f64 / (2 * tp + fp + fn_) as f64
}

/// Compare a prediction with the gold answer. A missing prediction or one
/// of another kind is fully wrong: for a set gold it adds one false
/// positive and every gold entity as a false negative.
pub fn score_answer(pred: Option<&Answer>, gold: &Answer) -> Score {
    match (pred, gold) {
        (Some(Answer::EntitySet(p)), Answer::EntitySet(g)) => Score::Set {
            tp: p.intersection(g).count() as u64,
            fp: p.difference(g).count() as u64,
            fn_: g.difference(p).count() as u64,
        },
        (_, Answer::EntitySet(g)) => Score::Set {
            tp: 0,
            fp: 1,
            fn_: g.len() as u64,
        },
        (p, g) => Score::Exact { correct: p == Some(g) },
    }
}

/// Mean of per-question F1 scores; kept only to contrast with micro F1.
pub fn macro_f1(contributions: &[MetricContribution]) -> Option<f64> {
    let scores: Vec<f64> = contributions.iter().filter_map(MetricContribution::f1).collect();
    (!scores.is_empty()).then(|| scores.iter().sum::<f64>() / scores.len() as f64)
}

/// One report row.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Row {
    pub name: String,
    /// Micro F1 over set questions.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f1: Option<f64>,
    /// Accuracy over boolean and count questions.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
    pub em: f64,
    pub em_unordered: f64,
    pub support: usize,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub correct: usize,
    pub judged: usize,
}

#[derive(Default)]
struct Acc {
    tp: u64,
    fp: u64,
    fn_: u64,
    sets: usize,
    correct: usize,
    judged: usize,
    em: usize,
    em_unordered: usize,
    support: usize,
}

impl Acc {
    fn add(&mut self, o: &TurnOutcome) {
        match o.contribution.score {
            Score::Set { tp, fp, fn_ } => {
                self.tp += tp;
                self.fp += fp;
                self.fn_ += fn_;
                self.sets += 1;
            }
            Score::Exact { correct } => {
                self.judged += 1;
                self.correct += usize::from(correct);
            }
        }
        self.em += usize::from(o.contribution.em);
        self.em_unordered += usize::from(o.em_unordered);
        self.support += 1;
    }

    fn row(&self, name: &str) -> Row {
        let frac = |n: usize| if self.support == 0 { 0.0 } else { n as f64 / self.support as f64 };
        Row {
            name: name.to_string(),
            f1: (self.sets > 0).then(|| f1(self.tp, self.fp, self.fn_)),
            accuracy: (self.judged > 0).then(|| self.correct as f64 / self.judged as f64),
            em: frac(self.em),
            em_unordered: frac(self.em_unordered),
            support: self.support,
            tp: self.tp,
            fp: self.fp,
            fn_: self.fn_,
            correct: self.correct,
            judged: self.judged,
        }
    }
}

impl Row {
    /// The row's headline figure under `metric`.
    pub fn value(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::F1 => self.f1,
            Metric::Accuracy => self.accuracy,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TurnOutcome {
    pub conversation: String,
    pub turn: usize,
    pub sub_type: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predicted: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predicted_sub_type: Option<String>,
    pub contribution: MetricContribution,
    pub em_unordered: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub tags: Vec<String>,
    /// Parse or execution failure.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Which row groups to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Strata {
    pub by_type: bool,
    pub by_phenomenon: bool,
}

impl Default for Strata {
    fn default() -> Self {
        Strata {
            by_type: true,
            by_phenomenon: true,
        }
    }
}

impl std::str::FromStr for Strata {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut out = Strata {
            by_type: false,
            by_phenomenon: false,
        };
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "type" | "byType" => out.by_type = true,
                "phenomenon" | "byPhenomenon" => out.by_phenomenon = true,
                "all" => out = Strata::default(),
                other => return Err(format!("unknown stratum `{other}`: expected type, phenomenon or all")),
            }
        }
        Ok(out)
    }
}

pub const COREFERENCE_PREVIOUS: &str = "Coreference=-1";
pub const COREFERENCE_EARLIER: &str = "Coreference<-1";
pub const ELLIPSIS: &str = "Ellipsis";
pub const MULTIPLE_ENTITIES: &str = "Multiple Entities";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EvalReport {
    pub selector: String,
    pub by_type: Vec<Row>,
    pub by_phenomenon: Vec<Row>,
    pub overall: Row,
    /// Annotated turns that had no gold answer to compare with.
    pub skipped: usize,
    pub failures: usize,
    pub turns: Vec<TurnOutcome>,
}

impl EvalReport {
    pub fn row(&self, name: &str) -> Option<&Row> {
        self.by_type.iter().chain(&self.by_phenomenon).find(|r| r.name == name)
    }

    /// Aligned plain-text table.
    pub fn table(&self) -> String {
        let mut out = String::new();
        let width = self
            .by_type
            .iter()
            .chain(&self.by_phenomenon)
            .map(|r| r.name.len())
            .max()
            .unwrap_or(0)
            .max("Overall".len());
        let fmt_opt = |v: Option<f64>| v.map(|x| format!("{:.4}", x)).unwrap_or_else(|| "-".to_string());
        let _ = writeln!(
            out,
            "{:<width$}  {:>7}  {:>7}  {:>6}  {:>6}  {:>7}",
            "Category", "F1", "AC", "EM", "EM*", "Support"
        );
        let line = |r: &Row, out: &mut String| {
            let _ = writeln!(
                out,
                "{:<width$}  {:>7}  {:>7}  {:>6.4}  {:>6.4}  {:>7}",
                r.name,
                fmt_opt(r.f1),
                fmt_opt(r.accuracy),
                r.em,
                r.em_unordered,
                r.support
            );
        };
        for r in &self.by_type {
            line(r, &mut out);
        }
        if !self.by_phenomenon.is_empty() {
            out.push('\n');
            for r in &self.by_phenomenon {
                line(r, &mut out);
            }
        }
        out.push('\n');
        line(&self.overall, &mut out);
        out
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.table())
    }
}

/// Entities of a turn's gold annotation not written out in its question.
fn unmentioned(kg: &KnowledgeGraph, question: &str, entities: &[EntityId]) -> Vec<EntityId> {
    let q = format!(" {} ", normalize(question));
    entities
        .iter()
        .copied()
        .filter(|e| {
            let label = normalize(&kg.label(*e));
            label.is_empty() || !q.contains(&format!(" {label} "))
        })
        .collect()
}

fn mentioned_in(c: &Conversation, user_turn: usize, e: EntityId) -> bool {
    let q = &c.turns[user_turn];
    let in_question = q.annotation.as_ref().is_some_and(|a| a.entities.contains(&e));
    let in_answer = q.gold_answer.as_ref().and_then(Answer::as_set).is_some_and(|s| s.contains(&e));
    in_question || in_answer
}

/// `Some(true)` when a referent occurs only further back than the previous
/// interaction, `Some(false)` when the previous one has it.
fn coreference_is_distant(kg: &KnowledgeGraph, c: &Conversation, t: usize) -> bool {
    let Some(ann) = &c.turns[t].annotation else {
        return false;
    };
    let referents = unmentioned(kg, &c.turns[t].utterance, &ann.entities);
    if referents.is_empty() || t < 2 {
        return false;
    }
    let previous = t - 2;
    let near = referents.iter().any(|e| mentioned_in(c, previous, *e));
    let far = referents
        .iter()
        .any(|e| (0..previous).step_by(2).any(|i| c.turns[i].is_user() && mentioned_in(c, i, *e)));
    !near && far
}

/// Parse every annotated user turn, execute the predictions and aggregate
/// the scores. Failures count as wrong and never stop the run.
///
/// With a predicted selector each parsed turn's symbols replace its gold
/// annotation for the turns after it, so later turns see what the parser
/// understood rather than the annotation.
pub fn evaluate_dataset(parser: &Parser<'_>, cfg: &ParserConfig, dataset: &[Conversation], strata: Strata) -> EvalReport {
    let kg = parser.kg();
    let mut report = EvalReport {
        selector: cfg.selector.name().to_string(),
        ..Default::default()
    };
    let feedback = !matches!(cfg.selector, Selector::Oracle);
    for c in dataset {
        let mut working = c.clone();
        for t in c.annotated_user_turns() {
            let turn = &c.turns[t];
            let ann = turn.annotation.as_ref().expect("annotated turn");
            let gold_query = turn.gold_sparql.clone().or_else(|| instantiate_annotation(ann).ok());
            let gold_answer = turn
                .gold_answer
                .clone()
                .or_else(|| gold_query.as_ref().and_then(|q| evaluate(kg, q).ok()));
            let parsed = parser.parse_turn(&working, t, cfg);
            if feedback {
                working.turns[t].annotation = parsed.as_ref().ok().map(|r| r.symbols.clone());
            }
            let Some(gold_answer) = gold_answer else {
                report.skipped += 1;
                continue;
            };
            report.turns.push(outcome(c, t, &ann.sub_type, parsed, gold_query.as_ref(), &gold_answer));
        }
    }
    report.failures = report.turns.iter().filter(|o| o.error.is_some()).count();
    aggregate(kg, dataset, &mut report, strata);
    report
}

fn outcome(
    c: &Conversation,
    t: usize,
    sub_type: &str,
    parsed: Result<ParseResult, crate::parser::ParseError>,
    gold_query: Option<&SparqlQuery>,
    gold_answer: &Answer,
) -> TurnOutcome {
    let mut o = TurnOutcome {
        conversation: c.id.clone(),
        turn: t,
        sub_type: sub_type.to_string(),
        predicted: None,
        predicted_sub_type: None,
        contribution: MetricContribution {
            score: score_answer(None, gold_answer),
            em: false,
        },
        em_unordered: false,
        tags: Vec::new(),
        error: None,
    };
    match parsed {
        Ok(r) => {
            o.contribution = MetricContribution {
                score: score_answer(r.answer.as_ref(), gold_answer),
                em: gold_query.is_some_and(|g| exact_match(&r.sparql, g)),
            };
            o.em_unordered = gold_query.is_some_and(|g| exact_match_unordered(&r.sparql, g));
            o.tags = r.trace.tags().into_iter().map(|t| t.to_string()).collect();
            if r.answer.is_none() {
                o.error = Some("prediction does not execute".to_string());
            }
            o.predicted = Some(r.sparql.to_string());
            o.predicted_sub_type = Some(r.sub_type);
        }
        Err(e) => o.error = Some(e.to_string()),
    }
    o
}

fn aggregate(kg: &KnowledgeGraph, dataset: &[Conversation], report: &mut EvalReport, strata: Strata) {
    let by_id: BTreeMap<&str, &Conversation> = dataset.iter().map(|c| (c.id.as_str(), c)).collect();
    let mut types: BTreeMap<QuestionType, Acc> = BTreeMap::new();
    let mut phen: BTreeMap<&'static str, Acc> = BTreeMap::new();
    let mut overall = Acc::default();
    for o in &report.turns {
        overall.add(o);
        let c = by_id[o.conversation.as_str()];
        let ann = c.turns[o.turn].annotation.as_ref().expect("scored turns are annotated");
        let entry = ann.sub_type_entry().ok();
        let qtype = entry
            .map(|s| s.question_type)
            .or_else(|| QuestionType::from_name(&ann.intent_type));
        if let Some(q) = qtype {
            types.entry(q).or_default().add(o);
        }
        if let Some(s) = entry {
            if s.has(Phenomenon::Coreference) {
                let name = if coreference_is_distant(kg, c, o.turn) {
                    COREFERENCE_EARLIER
                } else {
                    COREFERENCE_PREVIOUS
                };
                phen.entry(name).or_default().add(o);
            }
            if s.has(Phenomenon::Ellipsis) {
                phen.entry(ELLIPSIS).or_default().add(o);
            }
            if s.has(Phenomenon::MultipleEntities) {
                phen.entry(MULTIPLE_ENTITIES).or_default().add(o);
            }
        }
    }
    if strata.by_type {
        report.by_type = QuestionType::ALL
            .iter()
            .map(|q| types.get(q).map(|a| a.row(q.name())).unwrap_or_else(|| Acc::default().row(q.name())))
            .collect();
    }
    if strata.by_phenomenon {
        report.by_phenomenon = [COREFERENCE_PREVIOUS, COREFERENCE_EARLIER, ELLIPSIS, MULTIPLE_ENTITIES]
            .iter()
            .map(|n| phen.get(n).map(|a| a.row(n)).unwrap_or_else(|| Acc::default().row(n)))
            .collect();
    }
    report.overall = overall.row("Overall");
}

/// The question types a dataset's annotated turns fall into.
pub fn question_types(dataset: &[Conversation]) -> BTreeSet<QuestionType> {
    dataset
        .iter()
        .flat_map(|c| c.turns.iter())
        .filter_map(|t| t.annotation.as_ref())
        .filter_map(|a| a.sub_type_entry().ok().map(|s| s.question_type))
        .collect()
}
