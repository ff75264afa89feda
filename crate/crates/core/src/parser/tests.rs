use std::collections::BTreeSet;

use super::*;
use crate::context::{dynamic_vocabulary, ContextWindow};
use crate::fixtures::{baseball_conversation, mini_kg, p, q, split_examples, BASEBALL_GOLD};
use crate::sparql::{canonicalize, parse_query, Slot};
use crate::templates::{template_for, QuestionType};

fn gold(i: usize) -> SparqlQuery {
    parse_query(BASEBALL_GOLD[i]).unwrap()
}

#[test]
fn output_vocabulary_sizes() {
    let empty = assemble_output_vocabulary(&DynamicVocabulary::default());
    assert_eq!(empty.len(), FIXED_VOCABULARY.len());
    assert_eq!(empty.dynamic_len, 0);

    let kg = mini_kg();
    let v = dynamic_vocabulary(&kg, &BTreeSet::from([q(650855), q(500834)]));
    let out = assemble_output_vocabulary(&v);
    for s in [Symbol::Entity(q(650855)), Symbol::Property(p(1923)), Symbol::Entity(q(500834))] {
        assert!(out.contains(s), "{s}");
    }
    let relations = v.relations.iter().filter(|r| **r != P31).count();
    assert!(v.entities.is_disjoint(&v.types));
    assert_eq!(out.len(), FIXED_VOCABULARY.len() + v.entities.len() + v.types.len() + relations);
    assert_eq!(out.fixed_len + out.dynamic_len, out.len());
}

#[test]
fn rule_selector_cues() {
    let ctx = ContextWindow::empty(1);
    let top = |question: &str| select_sketch(&RuleSelector, question, &ctx)[0].clone();
    let t1 = top("Which tournament did Detroit Tigers participate in?");
    assert_eq!((t1.sub_type.name, t1.direction), ("Single Entity", Direction::Reverse));
    let t3 = top("Does that sports team belong to Sacile?");
    assert_eq!(t3.sub_type.question_type, QuestionType::Verification);
    let count = top("How many national association football teams or national sports teams represent Slovenia?");
    assert_eq!(count.sub_type.name, "Count | Logical operators");
    assert_eq!(top("Which country has the most sports teams?").sub_type.name, "Min/Max | Single entity type");
    let all = select_sketch(&RuleSelector, "Which sports team was the champion of that tournament?", &ctx);
    assert_eq!(all[0].sub_type.name, "Single Entity (Coreference)");
    assert!(all.windows(2).all(|w| w[0].confidence >= w[1].confidence));
    assert!(all.iter().all(|s| (0.0..=1.0).contains(&s.confidence)));
}

#[test]
fn fill_slots_reproduces_the_first_gold() {
    let kg = mini_kg();
    let t = template_for("Single Entity").unwrap().template(Direction::Reverse, None).unwrap();
    let v = dynamic_vocabulary(&kg, &BTreeSet::from([q(650855), q(500834)]));
    let mut c = SlotCandidates::new();
    c.insert(Slot::new(SlotKind::Entity, 1), vec![(Filler::Entity(q(650855)), 1.0)]);
    c.insert(Slot::new(SlotKind::Relation, 1), vec![(Filler::Relation(p(1923)), 1.0), (Filler::Relation(p(1346)), 0.5)]);
    c.insert(Slot::new(SlotKind::Type, 1), vec![(Filler::Type(q(500834)), 1.0)]);
    let out = fill_slots(&t, &c, &v, 1);
    assert_eq!(out.len(), 1);
    assert_eq!(canonicalize(&out[0].query), canonicalize(&gold(0)));
    assert_eq!(fill_slots(&t, &c, &v, 8).len(), 2);

    c.remove(&Slot::new(SlotKind::Type, 1));
    assert!(fill_slots(&t, &c, &v, 8).is_empty());
}

#[test]
fn fill_slots_rejects_symbols_outside_the_vocabulary() {
    let kg = mini_kg();
    let t = template_for("Single Entity").unwrap().template(Direction::Reverse, None).unwrap();
    let v = dynamic_vocabulary(&kg, &BTreeSet::from([q(500834)]));
    let mut c = SlotCandidates::new();
    c.insert(Slot::new(SlotKind::Entity, 1), vec![(Filler::Entity(q(650855)), 1.0)]);
    c.insert(Slot::new(SlotKind::Relation, 1), vec![(Filler::Relation(p(1923)), 1.0)]);
    c.insert(Slot::new(SlotKind::Type, 1), vec![(Filler::Type(q(500834)), 1.0)]);
    assert!(fill_slots(&t, &c, &v, 8).is_empty());
}

#[test]
fn fill_slots_repeats_an_entity() {
    let mut b = KnowledgeGraph::builder();
    b.add(q(30), p(27), q(1226556)).add(q(557427), p(27), q(1226556));
    let kg = b.build();
    let (ann, text) = split_examples().pop().unwrap();
    let t = ann.template().unwrap();
    let v = dynamic_vocabulary(&kg, &ann.entities.iter().copied().collect());
    let mut c = SlotCandidates::new();
    for (i, e) in ann.entities.iter().enumerate() {
        c.insert(Slot::new(SlotKind::Entity, i as u32 + 1), vec![(Filler::Entity(*e), 1.0)]);
    }
    c.insert(Slot::new(SlotKind::Relation, 1), vec![(Filler::Relation(p(27)), 1.0)]);
    let out = fill_slots(&t, &c, &v, 1);
    let query = &out[0].query;
    assert_eq!(canonicalize(query), canonicalize(&parse_query(text).unwrap()));
    let mut repeats = 0;
    query.visit_terms(&mut |term| repeats += usize::from(*term == Term::Entity(q(1226556))));
    assert_eq!(repeats, 2);
}

#[test]
fn rule_pipeline_on_the_baseball_conversation() {
    let kg = mini_kg();
    let parser = Parser::new(&kg);
    let c = baseball_conversation();
    let cfg = ParserConfig::default();

    let t1 = parser.parse_turn(&c, 0, &cfg).unwrap();
    assert_eq!(canonicalize(&t1.sparql), canonicalize(&gold(0)));
    assert_eq!(t1.answer, Some(Answer::entities([q(846847)])));
    assert!(t1.trace.tags().is_empty());

    let t2 = parser.parse_turn(&c, 2, &cfg).unwrap();
    assert_eq!(canonicalize(&t2.sparql), canonicalize(&gold(1)));
    assert_eq!(t2.sub_type, "Single Entity (Coreference)");

    // the window's answer is Q7199360, while the annotators wrote Q653772
    let t3 = parser.parse_turn(&c, 4, &cfg).unwrap();
    assert_eq!(t3.sparql.to_string(), "ASK { wd:Q7199360 wdt:P17 wd:Q53190 . }");
    assert_eq!(t3.answer, Some(Answer::Boolean(false)));
    assert_eq!(t3.trace.tags(), BTreeSet::from([ErrorTag::WrongEntity]));

    for r in [&t1, &t2, &t3] {
        assert!(within_symbols(&r.sparql, &r.symbols), "{}", r.sparql);
    }
    assert_eq!(parser.parse_turn(&c, 4, &cfg).unwrap(), t3);
}

#[test]
fn oracle_pipeline_matches_every_gold() {
    let kg = mini_kg();
    let parser = Parser::new(&kg);
    let c = baseball_conversation();
    for (k, t) in c.annotated_user_turns().enumerate() {
        let r = parser.parse_turn(&c, t, &ParserConfig::oracle()).unwrap();
        assert_eq!(canonicalize(&r.sparql), canonicalize(&gold(k)));
        assert_eq!(r.answer.as_ref(), c.turns[t].gold_answer.as_ref());
    }
}

#[test]
fn unlinkable_question_fails_with_a_trace() {
    let kg = mini_kg();
    let parser = Parser::new(&kg);
    let mut c = baseball_conversation();
    c.turns[0].utterance = "Which river flows through Atlantis?".into();
    let err = parser.parse_turn(&c, 0, &ParserConfig::default()).unwrap_err();
    assert!(err.trace().unwrap().steps().iter().any(|s| s.stage == Stage::Rank));
    assert!(matches!(parser.parse_turn(&c, 1, &ParserConfig::default()), Err(ParseError::Context(_))));
}

#[test]
fn parse_result_serializes_strict_text() {
    let kg = mini_kg();
    let r = Parser::new(&kg).parse_turn(&baseball_conversation(), 0, &ParserConfig::oracle()).unwrap();
    let json = serde_json::to_value(&r).unwrap();
    assert_eq!(json["sparql"], "SELECT ?x WHERE { ?x wdt:P1923 wd:Q650855 . ?x wdt:P31 wd:Q500834 . }");
    assert_eq!(json["subType"], "Single Entity");
    assert_eq!(json["symbols"]["entities"][0], "Q650855");
    assert!(json["trace"].as_array().is_some_and(|a| !a.is_empty()));
}
