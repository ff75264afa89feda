//! Small sample data used by tests, examples and the README.
//!
//! The mini graph covers the three-turn baseball conversation: Detroit
//! Tigers took part in the 1909 World Series, won by the Pittsburgh Pirates,
//! and Sacile is in Italy, not the United States.

use crate::ids::{EntityId, PropertyId, P31};
use crate::kg::KnowledgeGraph;
use crate::sparql::{parse_query, Answer};
use crate::templates::{Conversation, QuestionAnnotation, TripleHint, Turn};

pub fn q(n: u64) -> EntityId {
    EntityId(n)
}

pub fn p(n: u64) -> PropertyId {
    PropertyId(n)
}

/// Small graph around the Detroit Tigers / 1909 World Series example.
pub fn mini_kg() -> KnowledgeGraph {
    let mut b = KnowledgeGraph::builder();
    b.add(q(846847), p(1923), q(650855))
        .add(q(846847), P31, q(500834))
        .add(q(846847), p(1346), q(7199360))
        .add(q(650855), P31, q(13027888))
        .add(q(7199360), P31, q(12973014))
        .add(q(653772), P31, q(12973014))
        .add(q(653772), p(17), q(30))
        .add(q(53190), P31, q(15617994))
        .add(q(53190), p(17), q(38))
        .add(q(30), P31, q(6256))
        .add(q(38), P31, q(6256));
    for (id, label) in [
        (846847, "1909 World Series"),
        (650855, "Detroit Tigers"),
        (7199360, "Pittsburgh Pirates"),
        (653772, "Pittsburgh Pirates"),
        (53190, "Sacile"),
        (500834, "tournament"),
        (12973014, "sports team"),
        (13027888, "baseball team"),
        (15617994, "designation admin. territorial entity"),
        (30, "United States of America"),
        (38, "Italy"),
        (6256, "country"),
    ] {
        b.label(q(id), label);
    }
    for (id, label) in [(1923, "participating team"), (1346, "winner"), (17, "country"), (31, "instance of")] {
        b.label(p(id), label);
    }
    b.build()
}

fn hint(s: u64, r: u64, o: u64) -> TripleHint {
    TripleHint(q(s), p(r), q(o))
}

fn ann(intent: &str, sub_type: &str, entities: &[u64], relations: &[u64], types: &[u64], hints: &[TripleHint]) -> QuestionAnnotation {
    QuestionAnnotation {
        intent_type: intent.to_string(),
        sub_type: sub_type.to_string(),
        entities: entities.iter().map(|n| q(*n)).collect(),
        relations: relations.iter().map(|n| p(*n)).collect(),
        types: types.iter().map(|n| q(*n)).collect(),
        triple_hints: hints.to_vec(),
        ..Default::default()
    }
}

/// Gold parses of the three baseball turns, as printed (multi-line).
pub const BASEBALL_GOLD: [&str; 3] = [
    "SELECT ?x WHERE {\n    ?x wdt:P1923 wd:Q650855.\n    ?x wdt:P31 wd:Q500834.}",
    "SELECT ?x WHERE {\n    wd:Q846847 wdt:P1346 ?x.\n    ?x wdt:P31 wd:Q12973014.}",
    "ASK {wd:Q653772\n     wdt:P17 wd:Q53190.}",
];

/// The three-turn baseball conversation over [`mini_kg`], annotated as in
/// the source dialogue (note T3 names Q653772, not the T2 answer).
pub fn baseball_conversation() -> Conversation {
    let gold = |i: usize| Some(parse_query(BASEBALL_GOLD[i]).expect("fixture gold parses"));
    Conversation {
        id: "baseball".to_string(),
        turns: vec![
            Turn::user(
                "Which tournament did Detroit Tigers participate in?",
                ann(
                    "Simple Question (Direct)",
                    "Single Entity",
                    &[650855],
                    &[1923],
                    &[500834],
                    &[hint(500834, 1923, 650855)],
                ),
            )
            .with_gold(gold(0), Answer::entities([q(846847)])),
            Turn::system("1909 World Series"),
            Turn::user(
                "Which sports team was the champion of that tournament?",
                ann(
                    "Simple Question (Coreferenced)",
                    "Single Entity|Indirect",
                    &[846847],
                    &[1346],
                    &[12973014],
                    &[hint(846847, 1346, 12973014)],
                ),
            )
            .with_gold(gold(1), Answer::entities([q(7199360)])),
            Turn::system("Pittsburgh Pirates"),
            Turn::user(
                "Does that sports team belong to Sacile?",
                ann(
                    "Verification (Boolean)",
                    "2 entities, subject is indirect",
                    &[653772, 53190],
                    &[17],
                    &[15617994],
                    &[hint(653772, 17, 53190)],
                ),
            )
            .with_gold(gold(2), Answer::Boolean(false)),
            Turn::system("No"),
        ],
    }
}

/// Printed gold queries for held-out and seen sub-types, with the
/// annotation that instantiates each one.
pub fn split_examples() -> Vec<(QuestionAnnotation, &'static str)> {
    let lr = "Logical Reasoning (All)";
    let qc = "Quantitative Reasoning (Count)";
    let vb = "Verification (Boolean)";
    vec![
        (
            ann(lr, "Union | Single Relation", &[15079318, 7699260], &[162], &[502895], &[hint(15079318, 162, 502895)]),
            "SELECT ?x WHERE {\n  {wd:Q15079318 wdt:P162 ?x. ?x wdt:P31 wd:Q502895.}\n  UNION\n  {wd:Q7699260 wdt:P162 ?x. ?x wdt:P31 wd:Q502895.} }",
        ),
        (
            ann(qc, "Count | Single entity type", &[18407657], &[161], &[502895], &[hint(18407657, 161, 502895)]),
            "SELECT (COUNT(*) AS ?count) WHERE {\n  wd:Q18407657 wdt:P161 ?x. ?x wdt:P31 wd:Q502895.}",
        ),
        (
            ann(qc, "Count | Logical operators", &[215], &[1532], &[6979593, 1194951], &[hint(6979593, 1532, 215)]),
            "SELECT (COUNT (DISTINCT ?x) AS ?count) WHERE {\n{?x wdt:P1532 wd:Q215. ?x wdt:P31 wd:Q6979593.}\nUNION\n{?x wdt:P1532 wd:Q215. ?x wdt:P31 wd:Q1194951.} }",
        ),
        (
            ann("Simple Question (Direct)", "Single Entity", &[1247373], &[915], &[838948], &[hint(838948, 915, 1247373)]),
            "SELECT ?x WHERE {\n  ?x wdt:P915 wd:Q1247373. ?x wdt:P31 wd:Q838948.}",
        ),
        (
            ann(qc, "Count | Mult. entity type", &[1261875, 7490688], &[161], &[502895], &[hint(1261875, 161, 502895)]),
            "SELECT (COUNT(DISTINCT ?x) AS ?count) WHERE {\n  {wd:Q1261875 wdt:P161 ?x. ?x wdt:P31 wd:Q502895.}\n  UNION\n  {wd:Q7490688 wdt:P161 ?x. ?x wdt:P31 wd:Q502895.} }",
        ),
        (
            ann(lr, "Union | Multiple Relation", &[3231475, 9310937], &[495, 27], &[15617994], &[hint(3231475, 495, 15617994), hint(9310937, 27, 15617994)]),
            "SELECT ?x WHERE {\n  {wd:Q3231475 wdt:P495 ?x. ?x wdt:P31 wd:Q15617994.}\n  UNION\n  {wd:Q9310937 wdt:P27 ?x. ?x wdt:P31 wd:Q15617994.} }",
        ),
        (
            ann(vb, "2 entities, both direct", &[3375, 183], &[17], &[], &[hint(3375, 17, 183)]),
            "ASK {wd:Q3375 wdt:P17 wd:Q183.}",
        ),
        (
            ann(vb, "3 entities, all direct, 2 are query entities", &[1226556, 30, 557427], &[27], &[], &[hint(30, 27, 1226556), hint(557427, 27, 1226556)]),
            "ASK {wd:Q30 wdt:P27 wd:Q1226556.\n  wd:Q557427 wdt:P27 wd:Q1226556.}",
        ),
    ]
}
