//! Sketch selection: which sub-type, direction and operator a question
//! asks for.
//!
//! The rule selector reads cue words. Cues are tried in this order and the
//! first family that fires wins:
//!
//! | cue | family |
//! |---|---|
//! | first word is an auxiliary (`is`, `does`, `did`, ...) | Verification |
//! | `how many` | Count: over More/Less when a `... than` has no number, over Atleast when a threshold phrase or a `than` with a number appears, Logical operators on `or`, Mult. entity type on `and`, else Single entity type |
//! | `more`/`less`/`fewer`/`greater` ... `than` | More/Less without a number, Atleast/Atmost with one |
//! | `at least`, `at most`, `approximately`, `around`, `exactly` | Atleast/Atmost |
//! | `max`, `maximum`, `most`, `min`, `minimum`, `least`, `fewest` | Min/Max |
//! | `or` | Union |
//! | `not`, `except` | Difference |
//! | `and` | Intersection, then Mult. Entity |
//! | otherwise | Simple |
//!
//! Inside a family a demonstrative or pronoun selects the coreference
//! variant and an opening `and`, `what about` or `how about` selects the
//! ellipsis variant. A non-initial `do`/`does`/`did` makes reverse the
//! preferred direction; the other direction is always offered at a lower
//! confidence.

use std::fmt;
use std::sync::Arc;

use crate::context::ContextWindow;
use crate::sparql::{Comparator, Extremum};
use crate::templates::{catalog, template_for, Direction, Operator, QuestionAnnotation, SubType};
use crate::text::tokens;

/// One ranked reading of a question.
#[derive(Debug, Clone, PartialEq)]
pub struct Sketch {
    pub sub_type: &'static SubType,
    pub direction: Direction,
    pub operator: Option<Operator>,
    /// In `[0, 1]`.
    pub confidence: f64,
}

impl fmt::Display for Sketch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({:?}", self.sub_type.name, self.direction)?;
        if let Some(op) = self.operator {
            write!(f, ", {op}")?;
        }
        write!(f, ") {:.3}", self.confidence)
    }
}

/// Scores readings of a question in its context. A learned model would
/// plug in here.
pub trait SketchSelector: Send + Sync {
    fn name(&self) -> &str;
    fn rank(&self, question: &str, ctx: &ContextWindow) -> Vec<Sketch>;
}

/// Ranked readings, best first, confidences clamped to `[0, 1]`, never
/// empty: the Simple family is the fallback.
pub fn select_sketch(selector: &dyn SketchSelector, question: &str, ctx: &ContextWindow) -> Vec<Sketch> {
    let mut out = selector.rank(question, ctx);
    for s in &mut out {
        s.confidence = if s.confidence.is_nan() { 0.0 } else { s.confidence.clamp(0.0, 1.0) };
    }
    if out.is_empty() {
        let simple = template_for("Single Entity").expect("catalog has the simple row");
        out = both_directions(simple, Direction::Forward, None, 0.1);
    }
    out.sort_by(|a, b| b.confidence.total_cmp(&a.confidence));
    out
}

fn both_directions(sub_type: &'static SubType, first: Direction, operator: Option<Operator>, confidence: f64) -> Vec<Sketch> {
    let other = match first {
        Direction::Forward => Direction::Reverse,
        Direction::Reverse => Direction::Forward,
    };
    vec![
        Sketch {
            sub_type,
            direction: first,
            operator,
            confidence,
        },
        Sketch {
            sub_type,
            direction: other,
            operator,
            confidence: confidence * 0.9,
        },
    ]
}

const AUXILIARIES: [&str; 12] = ["is", "are", "was", "were", "does", "do", "did", "has", "have", "had", "can", "will"];
const ANAPHORA: [&str; 13] = [
    "that", "those", "this", "these", "it", "its", "they", "them", "their", "he", "him", "she", "her",
];
const NUMBER_WORDS: [&str; 10] = ["one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten"];

/// Integers in a question: digits and the words one to ten.
pub fn numbers_in(question: &str) -> Vec<u64> {
    tokens(question)
        .iter()
        .filter_map(|w| {
            w.parse::<u64>()
                .ok()
                .or_else(|| NUMBER_WORDS.iter().position(|n| n == w).map(|i| i as u64 + 1))
        })
        .collect()
}

struct Cues {
    words: Vec<String>,
}

impl Cues {
    fn new(question: &str) -> Self {
        Cues { words: tokens(question) }
    }

    fn has(&self, w: &str) -> bool {
        self.words.iter().any(|x| x == w)
    }

    fn has_any(&self, ws: &[&str]) -> bool {
        ws.iter().any(|w| self.has(w))
    }

    fn phrase(&self, p: &str) -> bool {
        let want: Vec<&str> = p.split(' ').collect();
        self.words.windows(want.len()).any(|w| w.iter().zip(&want).all(|(a, b)| a == b))
    }

    fn first(&self) -> &str {
        self.words.first().map(String::as_str).unwrap_or("")
    }

    fn coreference(&self) -> bool {
        // "that" after a noun is usually a relative pronoun
        self.words.iter().enumerate().any(|(i, w)| {
            let relative = w == "that"
                && i > 0
                && !AUXILIARIES.contains(&self.words[i - 1].as_str())
                && !is_preposition(&self.words[i - 1]);
            ANAPHORA.contains(&w.as_str()) && !relative
        })
    }

    fn ellipsis(&self) -> bool {
        self.first() == "and" || self.phrase("what about") || self.phrase("how about")
    }

    /// The comparison word closest before `than`.
    fn than(&self) -> Option<Comparator> {
        let than = self.words.iter().position(|w| w == "than")?;
        self.words[..than].iter().rev().find_map(|w| match w.as_str() {
            "more" | "greater" | "larger" | "higher" => Some(Comparator::Gt),
            "less" | "fewer" | "smaller" | "lower" => Some(Comparator::Lt),
            _ => None,
        })
    }

    fn threshold(&self) -> Option<Comparator> {
        if self.phrase("at least") || self.has("atleast") {
            Some(Comparator::Ge)
        } else if self.phrase("at most") || self.has("atmost") {
            Some(Comparator::Le)
        } else if self.has_any(&["approximately", "around", "approx", "roughly"]) {
            Some(Comparator::Approx)
        } else if self.has("exactly") || self.phrase("equal to") {
            Some(Comparator::Eq)
        } else {
            None
        }
    }

    fn extremum(&self) -> Option<Extremum> {
        let at = |w: &str| self.words.iter().position(|x| x == w).is_some_and(|i| i > 0 && self.words[i - 1] == "at");
        if self.has_any(&["max", "maximum", "most"]) && !at("most") {
            Some(Extremum::Max)
        } else if self.has_any(&["min", "minimum", "fewest"]) || (self.has("least") && !at("least")) {
            Some(Extremum::Min)
        } else {
            None
        }
    }

    fn reverse_preferred(&self) -> bool {
        self.words.iter().skip(1).any(|w| matches!(w.as_str(), "do" | "does" | "did"))
    }
}

fn is_preposition(w: &str) -> bool {
    matches!(w, "of" | "to" | "in" | "for" | "by" | "with" | "from" | "on" | "about" | "at" | "than")
}

/// The cue-table selector.
#[derive(Debug, Clone, Copy, Default)]
pub struct RuleSelector;

fn named(name: &str) -> &'static SubType {
    template_for(name).unwrap_or_else(|_| panic!("catalog row `{name}`"))
}

/// The coreference or ellipsis variant of a row, when the catalog has it.
fn variant(base: &str, coref: bool, ellipsis: bool) -> &'static SubType {
    let with = |suffix: &str| {
        let wanted = format!("{base} ({suffix})");
        catalog().iter().find(|s| s.name == wanted)
    };
    let pick = if ellipsis {
        with("Ellipsis")
    } else if coref {
        with("Coreference")
    } else {
        None
    };
    pick.unwrap_or_else(|| named(base))
}

impl SketchSelector for RuleSelector {
    fn name(&self) -> &str {
        "rules"
    }

    fn rank(&self, question: &str, _ctx: &ContextWindow) -> Vec<Sketch> {
        let c = Cues::new(question);
        let coref = c.coreference();
        let ellipsis = c.ellipsis();
        let dir = if c.reverse_preferred() { Direction::Reverse } else { Direction::Forward };
        let has_number = !numbers_in(question).is_empty();
        let mut rows: Vec<(&'static SubType, Option<Operator>, f64)> = Vec::new();
        let mut push = |s: &'static SubType, op: Option<Operator>, conf: f64| rows.push((s, op, conf));
        let cmp = Operator::Compare;
        let joined = c.has("and") || c.has("or");

        if AUXILIARIES.contains(&c.first()) {
            let (two, three) = if coref {
                (
                    "2 entities, one direct and one indirect, subject is indirect",
                    "3 entities, 2 direct, 2(direct) are query entities, subject is indirect",
                )
            } else {
                ("2 entities, both direct", "3 entities, all direct, 2 are query entities")
            };
            push(named(two), None, 0.9);
            push(named(three), None, if joined { 0.95 } else { 0.5 });
        } else if c.phrase("how many") {
            let multi = if c.has("or") { 0.8 } else { 0.6 };
            if let (Some(op), false) = (c.than(), has_number) {
                push(variant("Count over More/Less | Single entity type", coref, ellipsis), Some(cmp(op)), 0.9);
                push(variant("Count over More/Less | Mult. entity type", coref, ellipsis), Some(cmp(op)), multi);
            } else if let Some(op) = c.threshold().or(c.than()) {
                let base = "Count over Atleast/ Atmost/ Approx. the same/Equal";
                push(named(&format!("{base} | Single entity type")), Some(cmp(op)), 0.9);
                push(named(&format!("{base} | Mult. entity type")), Some(cmp(op)), multi);
            } else if ellipsis {
                push(named("Incomplete count-based ques"), None, 0.9);
            } else if c.has("or") {
                push(variant("Count | Logical operators", coref, false), None, 0.9);
                push(named("Count | Mult. entity type"), None, 0.5);
            } else if c.has("and") {
                push(named("Count | Mult. entity type"), None, 0.9);
                push(variant("Count | Logical operators", coref, false), None, 0.5);
            } else {
                push(variant("Count | Single entity type", coref, false), None, 0.9);
            }
        } else if let (Some(op), false) = (c.than(), has_number) {
            let multi = if c.has("or") { 0.8 } else { 0.6 };
            push(variant("More/Less | Single entity type", coref, ellipsis), Some(cmp(op)), 0.9);
            push(variant("More/Less | Mult. entity type", coref, ellipsis), Some(cmp(op)), multi);
        } else if let Some(op) = c.threshold().or(c.than()) {
            let multi = if c.has("or") { 0.8 } else { 0.6 };
            let base = "Atleast/ Atmost/ Approx. the same/Equal";
            push(named(&format!("{base} | Single entity type")), Some(cmp(op)), 0.9);
            push(named(&format!("{base} | Mult. entity type")), Some(cmp(op)), multi);
        } else if let Some(ext) = c.extremum() {
            let multi = if c.has("or") { 0.8 } else { 0.6 };
            push(named("Min/Max | Single entity type"), Some(Operator::Extremum(ext)), 0.9);
            push(named("Min/Max | Mult. entity type"), Some(Operator::Extremum(ext)), multi);
        } else if c.has("or") {
            push(variant("Union | Single Relation", false, ellipsis), None, 0.9);
            push(named("Union | Multiple Relation"), None, 0.7);
            push(variant("Mult. Entity (Simple Question Direct and Coreference)", false, false), None, 0.3);
        } else if c.has_any(&["not", "except"]) {
            push(variant("Difference | Single Relation", false, ellipsis), None, 0.9);
            push(named("Difference | Multiple Relation"), None, 0.7);
        } else if c.words.iter().skip(usize::from(c.first() == "and")).any(|w| w == "and") {
            push(variant("Intersection | Single Relation", false, ellipsis), None, 0.9);
            push(named("Intersection | Multiple Relation"), None, 0.7);
            let mult = if coref {
                "one entity, multiple entities (as object) corefered"
            } else {
                "Mult. Entity (Simple Question Direct and Coreference)"
            };
            push(named(mult), None, 0.5);
        } else if ellipsis {
            push(named("object parent is changed, subject and predicate remain same"), None, 0.9);
        } else if coref {
            push(named("Single Entity (Coreference)"), None, 0.9);
            push(named("one entity, multiple entities (as object) corefered"), None, 0.5);
        } else {
            push(named("Single Entity"), None, 0.9);
            push(named("Mult. Entity (Simple Question Direct and Coreference)"), None, 0.5);
        }
        if !rows.iter().any(|(s, _, _)| s.name == "Single Entity") {
            rows.push((named("Single Entity"), None, 0.1));
        }
        rows.into_iter()
            .flat_map(|(s, op, conf)| both_directions(s, dir, op, conf))
            .collect()
    }
}

/// Always answers with the gold reading of one annotated turn.
#[derive(Debug, Clone)]
pub struct OracleSelector {
    sketch: Option<Sketch>,
}

impl OracleSelector {
    pub fn for_annotation(ann: &QuestionAnnotation) -> Self {
        let sketch = ann.sub_type_entry().ok().map(|sub_type| Sketch {
            sub_type,
            direction: ann.direction(),
            operator: ann.operator,
            confidence: 1.0,
        });
        OracleSelector { sketch }
    }
}

impl SketchSelector for OracleSelector {
    fn name(&self) -> &str {
        "oracle"
    }

    fn rank(&self, _question: &str, _ctx: &ContextWindow) -> Vec<Sketch> {
        self.sketch.iter().cloned().collect()
    }
}

/// How `parse_turn` reads questions.
#[derive(Clone, Default)]
pub enum Selector {
    #[default]
    Rules,
    /// Gold sub-type and gold symbols in place of selection and linking.
    Oracle,
    Custom(Arc<dyn SketchSelector>),
}

impl Selector {
    pub fn name(&self) -> &str {
        match self {
            Selector::Rules => "rules",
            Selector::Oracle => "oracle",
            Selector::Custom(s) => s.name(),
        }
    }
}

impl fmt::Debug for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Selector({})", self.name())
    }
}

impl std::str::FromStr for Selector {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rules" => Ok(Selector::Rules),
            "oracle" => Ok(Selector::Oracle),
            other => Err(format!("unknown selector `{other}`: expected rules or oracle")),
        }
    }
}
