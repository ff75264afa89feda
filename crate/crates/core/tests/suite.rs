//! The curated suite: every turn validates and the oracle parser
//! reproduces every gold query.

mod common;

use std::collections::BTreeSet;

use convkgqa::eval::{evaluate_dataset, Strata, COREFERENCE_EARLIER, COREFERENCE_PREVIOUS, ELLIPSIS, MULTIPLE_ENTITIES};
use convkgqa::parser::{Parser, ParserConfig};
use convkgqa::templates::{validate_conversation, QuestionType, RepairPolicy};

#[test]
fn suite_validates() {
    let (kg, data) = common::suite();
    assert!(data.len() >= 20);
    for c in &data {
        let (_, report) = validate_conversation(&kg, c, RepairPolicy::Report).unwrap();
        assert!(report.all_ok(), "{}: {:?}", c.id, report.turns);
        assert!(report.turns.iter().all(|t| t.gold_parse_agrees != Some(false)), "{}: {:?}", c.id, report.turns);
    }
}

#[test]
fn oracle_reproduces_every_gold() {
    let (kg, data) = common::suite();
    let parser = Parser::new(&kg);
    let r = evaluate_dataset(&parser, &ParserConfig::oracle(), &data, Strata::default());
    let misses: Vec<_> = r.turns.iter().filter(|o| !o.contribution.em).collect();
    assert!(misses.is_empty(), "{misses:#?}");
    assert_eq!(r.overall.em, 1.0);
    assert_eq!(r.overall.f1, Some(1.0));
    assert_eq!(r.overall.accuracy, Some(1.0));
    assert_eq!(r.skipped, 0);

    let types: BTreeSet<QuestionType> = convkgqa::eval::question_types(&data);
    assert_eq!(types.len(), QuestionType::ALL.len());
    for name in [COREFERENCE_PREVIOUS, COREFERENCE_EARLIER, ELLIPSIS, MULTIPLE_ENTITIES] {
        assert!(r.row(name).unwrap().support > 0, "{name}");
    }
}

#[test]
fn rule_selector_runs_the_whole_suite() {
    let (kg, data) = common::suite();
    let parser = Parser::new(&kg);
    let r = evaluate_dataset(&parser, &ParserConfig::default(), &data, Strata::default());
    assert_eq!(r.overall.support, r.turns.len());
    println!("{}", r.table());
}
