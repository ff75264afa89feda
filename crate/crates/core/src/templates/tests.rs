use super::*;
use crate::fixtures::{baseball_conversation, mini_kg, q, split_examples, BASEBALL_GOLD};
use crate::sparql::{canonicalize, evaluate, parse_query, Answer};

#[test]
fn catalog_names_resolve_uniquely() {
    let all = catalog();
    assert_eq!(all.len(), 46);
    for s in all {
        assert!(std::ptr::eq(template_for(s.name).unwrap(), s), "{}", s.name);
        for a in s.aliases {
            assert_eq!(template_for(a).unwrap().name, s.name);
        }
        // every variant renders and parses
        for dir in [Direction::Forward, Direction::Reverse] {
            let t = s.template(dir, None).unwrap();
            assert!(t.skeleton.validate().is_ok(), "{}", s.name);
            assert_eq!(t.signature, t.skeleton.slots().into_iter().collect::<Vec<_>>());
        }
    }
    let with = |p: Phenomenon| all.iter().filter(|s| s.has(p)).count();
    assert_eq!(with(Phenomenon::Coreference), 11);
    assert_eq!(with(Phenomenon::Ellipsis), 9);
    assert_eq!(with(Phenomenon::MultipleEntities), 15);
    for t in QuestionType::ALL {
        assert!(all.iter().any(|s| s.question_type == t), "{t}");
    }
}

#[test]
fn slot_ordinals_are_contiguous() {
    for s in catalog() {
        let t = s.default_template();
        for kind in [SlotKind::Entity, SlotKind::Relation, SlotKind::Type, SlotKind::Value] {
            let ords: Vec<u32> = t.signature.iter().filter(|x| x.kind == kind).map(|x| x.ordinal).collect();
            assert_eq!(ords, (1..=ords.len() as u32).collect::<Vec<_>>(), "{}", s.name);
        }
    }
}

#[test]
fn lookup_accepts_prefixed_and_spaced_names() {
    let t = template_for("Simple Question|Single Entity").unwrap();
    assert_eq!(t.name, "Single Entity");
    let rev = t.template(Direction::Reverse, None).unwrap();
    assert_eq!(rev.skeleton.to_string(), "SELECT ?x WHERE { ?x RELATION1 ENTITY1 . ?x wdt:P31 TYPE1 . }");
    assert_eq!(template_for("Simple Question|Single Entity|Indirect").unwrap().name, "Single Entity (Coreference)");
    assert_eq!(
        template_for("Count over Atleast/ Atmost/ Approx. the same / Equal | Mult. entity type").unwrap().name,
        "Count over Atleast/ Atmost/ Approx. the same/Equal | Mult. entity type"
    );
    let union = template_for("Union | Multiple Relation").unwrap().default_template();
    assert!(union.signature.contains(&Slot::new(SlotKind::Relation, 2)));
}

#[test]
fn unknown_names_list_neighbours() {
    match template_for("Union | Multiple Relations") {
        Err(CatalogError::Miss { nearest, .. }) => {
            assert_eq!(nearest.len(), 3);
            assert_eq!(nearest[0], "Union | Multiple Relation");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn operators_pick_the_variant() {
    let s = template_for("Min/Max | Single entity type").unwrap();
    let min = s.template(Direction::Forward, Some("min".parse().unwrap())).unwrap();
    assert!(min.skeleton.to_string().contains("ORDER BY ASC(COUNT(DISTINCT ?y)) LIMIT 1"));
    assert!(matches!(s.template(Direction::Forward, Some(">".parse().unwrap())), Err(CatalogError::Operator { .. })));
    let cmp = template_for("More/Less | Single entity type").unwrap();
    assert!(cmp.template(Direction::Forward, Some(">=".parse().unwrap())).is_err());
    let lt = cmp.template(Direction::Reverse, Some("<".parse().unwrap())).unwrap();
    assert!(lt.skeleton.to_string().contains("?z RELATION1 ENTITY1"));
}

#[test]
fn baseball_turns_instantiate_to_gold() {
    let c = baseball_conversation();
    let kg = mini_kg();
    let users: Vec<_> = c.annotated_user_turns().collect();
    assert_eq!(users, [0, 2, 4]);
    let expected = [Answer::entities([q(846847)]), Answer::entities([q(7199360)]), Answer::Boolean(false)];
    for (k, i) in users.into_iter().enumerate() {
        let ann = c.turns[i].annotation.as_ref().unwrap();
        let got = instantiate_annotation(ann).unwrap();
        assert_eq!(canonicalize(&got), canonicalize(&parse_query(BASEBALL_GOLD[k]).unwrap()));
        assert_eq!(evaluate(&kg, &got).unwrap(), expected[k]);
    }
}

#[test]
fn empty_annotation_names_missing_slots() {
    let t = template_for("Single Entity").unwrap().default_template();
    let err = instantiate(&t, &QuestionAnnotation::default()).unwrap_err();
    assert_eq!(err.missing, ["ENTITY1", "RELATION1", "TYPE1"]);
    let mut ann = QuestionAnnotation {
        entities: vec![q(1), q(2)],
        relations: vec![crate::fixtures::p(3)],
        types: vec![q(4)],
        ..Default::default()
    };
    assert_eq!(instantiate(&t, &ann).unwrap_err().excess, ["Q2"]);
    ann.entities.pop();
    assert!(instantiate(&t, &ann).is_ok());
}

#[test]
fn threshold_values_fill_value_slots() {
    let ann = QuestionAnnotation {
        sub_type: "Atleast/ Atmost/ Approx. the same/Equal | Single entity type".into(),
        relations: vec![crate::fixtures::p(17)],
        types: vec![q(12973014), q(6256)],
        values: vec![1],
        operator: Some("~".parse().unwrap()),
        ..Default::default()
    };
    let got = instantiate_annotation(&ann).unwrap();
    assert_eq!(
        got.to_string(),
        "SELECT ?x WHERE { ?x wdt:P17 ?y . ?x wdt:P31 wd:Q12973014 . ?y wdt:P31 wd:Q6256 . } GROUP BY ?x HAVING (COUNT(DISTINCT ?y) ~ 1)"
    );
    assert_eq!(evaluate(&mini_kg(), &got).unwrap(), Answer::entities([q(653772)]));
}

#[test]
fn printed_split_examples_instantiate() {
    for (ann, gold) in split_examples() {
        let gold = parse_query(gold).unwrap();
        let got = instantiate_annotation(&ann).unwrap();
        assert_eq!(canonicalize(&got), canonicalize(&gold), "{}", ann.sub_type);
    }
}

#[test]
fn baseball_conversation_validates_unchanged() {
    let c = baseball_conversation();
    c.check().unwrap();
    let (out, report) = validate_conversation(&mini_kg(), &c, RepairPolicy::Repair).unwrap();
    assert_eq!(out, c);
    assert!(report.all_ok());
    assert_eq!((report.ok, report.redefined, report.truncated), (3, 0, 0));
    assert!(report.turns.iter().all(|t| t.gold_parse_agrees == Some(true)));
}

#[test]
fn wrong_answer_is_redefined_when_nothing_depends_on_it() {
    let kg = mini_kg();
    let mut c = baseball_conversation();
    c.turns[2].gold_answer = Some(Answer::entities([q(30)]));
    let (out, report) = validate_conversation(&kg, &c, RepairPolicy::Repair).unwrap();
    assert_eq!(report.turns[1].status, TurnStatus::Redefined);
    assert_eq!(out.turns.len(), 6);
    assert_eq!(out.turns[2].gold_answer, Some(Answer::entities([q(7199360)])));
    assert_eq!(out.turns[3].utterance, "Pittsburgh Pirates");
    // the repaired turn now validates
    let (again, second) = validate_conversation(&kg, &out, RepairPolicy::Repair).unwrap();
    assert!(second.all_ok());
    assert_eq!(again, out);
}

#[test]
fn wrong_answer_truncates_when_a_later_turn_uses_it() {
    let kg = mini_kg();
    let mut c = baseball_conversation();
    // T3 names Q653772, so discarding it would break the flow
    c.turns[2].gold_answer = Some(Answer::entities([q(653772)]));
    let (out, report) = validate_conversation(&kg, &c, RepairPolicy::Repair).unwrap();
    assert_eq!(report.turns.last().unwrap().status, TurnStatus::Truncated);
    assert_eq!(out.turns.len(), 2);
    let (_, report) = validate_conversation(&kg, &c, RepairPolicy::Report).unwrap();
    assert_eq!(report.mismatched, 1);
    assert_eq!(report.turns.len(), 3);
}

#[test]
fn uninstantiable_turn_is_an_error_and_truncates() {
    let mut c = baseball_conversation();
    c.turns[4].annotation.as_mut().unwrap().relations.clear();
    let (out, report) = validate_conversation(&mini_kg(), &c, RepairPolicy::Repair).unwrap();
    assert_eq!(report.errors, 1);
    assert_eq!(out.turns.len(), 4);
}

#[test]
fn structure_is_checked() {
    let empty = Conversation {
        id: "e".into(),
        turns: vec![],
    };
    assert_eq!(validate_conversation(&mini_kg(), &empty, RepairPolicy::Repair).unwrap_err(), StructureError::Empty);
    let mut c = baseball_conversation();
    c.turns.swap(0, 1);
    assert!(matches!(c.check(), Err(StructureError::NotAlternating { index: 0, .. })));
}

#[test]
fn dataset_round_trips_through_jsonl() {
    let c = baseball_conversation();
    let mut buf = Vec::new();
    write_dataset(&mut buf, std::slice::from_ref(&c)).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.contains(r#""goldAnswer":["Q846847"]"#));
    assert!(text.contains(r#""tripleHints":[["Q500834","P1923","Q650855"]]"#));
    assert_eq!(read_dataset(&buf[..]).unwrap(), vec![c]);
    let bad = b"\n{\"id\": 3}\n";
    match read_dataset(&bad[..]) {
        Err(DatasetError::Line { line, .. }) => assert_eq!(line, 2),
        other => panic!("{other:?}"),
    }
}

#[test]
fn stats_over_one_conversation() {
    let c = baseball_conversation();
    let kg = mini_kg();
    let s = dataset_stats([&c], Some(&kg));
    assert_eq!((s.instances, s.turns), (1, 6));
    assert_eq!(s.avg_turn_length, 6.0);
    assert_eq!((s.distinct_entities, s.distinct_relations, s.distinct_types), (4, 3, 3));
    // Q650855: 2 triples; Q846847: 3; Q653772 and Q53190: 2 + 2
    assert_eq!(s.avg_neighbourhood_per_turn, Some(3.0));
    let empty = dataset_stats([], None);
    assert_eq!(empty, StatsReport::default());
}

#[test]
fn verbalizes_answers() {
    let kg = mini_kg();
    assert_eq!(verbalize(&kg, &Answer::entities([q(846847)])), "1909 World Series");
    assert_eq!(verbalize(&kg, &Answer::Boolean(false)), "No");
    assert_eq!(verbalize(&kg, &Answer::Count(3)), "3");
    assert_eq!(verbalize(&kg, &Answer::entities([q(30), q(38)])), "United States of America, Italy");
}
