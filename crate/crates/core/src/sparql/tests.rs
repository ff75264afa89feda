use super::*;
use crate::fixtures::{mini_kg, p, q};
use crate::ids::P31;

const T1: &str = "SELECT ?x WHERE { \n    ?x wdt:P1923 wd:Q650855.\n    ?x wdt:P31 wd:Q500834.}";
const T3: &str = "ASK {wd:Q653772 \n     wdt:P17 wd:Q53190.}";
const COUNT_LOGIC: &str = "SELECT (COUNT (DISTINCT ?x) AS ?count) WHERE { \n{?x wdt:P1532 wd:Q215. ?x wdt:P31 wd:Q6979593.} \nUNION \n{?x wdt:P1532 wd:Q215. ?x wdt:P31 wd:Q1194951.} }";

#[test]
fn parses_select() {
    let parsed = parse_query(T1).unwrap();
    let expected = SparqlQuery::select(
        var("x"),
        vec![
            TriplePattern::new(var("x"), p(1923), q(650855)),
            TriplePattern::new(var("x"), P31, q(500834)),
        ],
    );
    assert_eq!(parsed, expected);
}

#[test]
fn parses_ask() {
    let parsed = parse_query(T3).unwrap();
    assert_eq!(parsed, SparqlQuery::ask(vec![TriplePattern::new(q(653772), p(17), q(53190))]));
    assert!(serialize(&parsed, SerializeMode::Strict).starts_with("ASK {"));
}

#[test]
fn parses_count_over_union() {
    let parsed = parse_query(COUNT_LOGIC).unwrap();
    let branch = |t: u64| {
        GroupPattern::Bgp(vec![
            TriplePattern::new(var("x"), p(1532), q(215)),
            TriplePattern::new(var("x"), P31, q(t)),
        ])
    };
    assert_eq!(
        parsed.form,
        QueryForm::SelectCount {
            target: CountTarget::Var(var("x")),
            distinct: true,
            alias: var("count"),
        }
    );
    assert_eq!(parsed.pattern, GroupPattern::union(branch(6979593), branch(1194951)));
}

#[test]
fn prefix_header_is_optional() {
    let with = format!("PREFIX wd: <{WD_NS}>\nPREFIX wdt: <{WDT_NS}>\n{T1}");
    assert_eq!(parse_query(&with).unwrap(), parse_query(T1).unwrap());
    let full = "SELECT ?x WHERE { ?x <http://www.wikidata.org/prop/direct/P31> <http://www.wikidata.org/entity/Q5> . }";
    assert_eq!(
        parse_query(full).unwrap(),
        SparqlQuery::select(var("x"), vec![TriplePattern::new(var("x"), P31, q(5))])
    );
}

#[test]
fn round_trips_through_strict_text() {
    for text in [T1, T3, COUNT_LOGIC] {
        let q = parse_query(text).unwrap();
        let s = serialize(&q, SerializeMode::Strict);
        assert_eq!(parse_query(&s).unwrap(), q, "{s}");
        assert_eq!(parse_query(&serialize_with_prefixes(&q)).unwrap(), q);
    }
}

#[test]
fn strict_text_of_t1() {
    let q = parse_query(T1).unwrap();
    assert_eq!(
        serialize(&q, SerializeMode::Strict),
        "SELECT ?x WHERE { ?x wdt:P1923 wd:Q650855 . ?x wdt:P31 wd:Q500834 . }"
    );
}

#[test]
fn canonical_form_ignores_variable_names() {
    let a = parse_query(T1).unwrap();
    let b = parse_query(&T1.replace("?x", "?y")).unwrap();
    assert_ne!(serialize(&a, SerializeMode::Strict), serialize(&b, SerializeMode::Strict));
    assert_eq!(serialize(&a, SerializeMode::Canonical), serialize(&b, SerializeMode::Canonical));
    assert!(serialize(&a, SerializeMode::Canonical).starts_with("SELECT ?v0 WHERE"));
}

#[test]
fn grouped_forms_round_trip() {
    for text in [
        "SELECT ?x WHERE { ?x wdt:P17 ?y . } GROUP BY ?x HAVING (COUNT(DISTINCT ?y) >= 2)",
        "SELECT ?x WHERE { ?x wdt:P17 ?y . } GROUP BY ?x HAVING (COUNT(?y) ~ 10)",
        "SELECT ?x WHERE { ?x wdt:P17 ?y . } GROUP BY ?x ORDER BY DESC(COUNT(DISTINCT ?y)) LIMIT 1",
        "SELECT ?x WHERE { ?x wdt:P17 ?y . } GROUP BY ?x ORDER BY ASC(COUNT(DISTINCT ?y)) LIMIT 1",
        "SELECT (COUNT(DISTINCT ?x) AS ?count) WHERE { ?x wdt:P17 ?y . } GROUP BY ?x HAVING (COUNT(DISTINCT ?y) < 3)",
        "SELECT ?x WHERE { ?x wdt:P17 ?y . ?x wdt:P31 wd:Q5 . } GROUP BY ?x HAVING (COUNT(DISTINCT ?y) > (SELECT (COUNT(DISTINCT ?z) AS ?count) WHERE { wd:Q1 wdt:P17 ?z . }))",
        "SELECT ?x WHERE { { wd:Q1 wdt:P2 ?x . } UNION { wd:Q3 wdt:P2 ?x . } MINUS { wd:Q4 wdt:P2 ?x . } }",
        "SELECT ?x WHERE { wd:Q1 wdt:P2 ?x . MINUS { wd:Q4 wdt:P2 ?x . } MINUS { ?x wdt:P31 wd:Q5 . } }",
        "SELECT ?x WHERE { { wd:Q1 wdt:P2 ?x . } UNION { { wd:Q3 wdt:P2 ?x . } UNION { wd:Q5 wdt:P2 ?x . } } }",
    ] {
        let q = parse_query(text).unwrap_or_else(|e| panic!("{text}: {e}"));
        assert_eq!(serialize(&q, SerializeMode::Strict), text);
    }
}

#[test]
fn templates_accept_slots_queries_do_not() {
    let text = "SELECT ?x WHERE { ?x RELATION1 ENTITY1 . ?x wdt:P31 TYPE1 . }";
    let t = parse_template(text).unwrap();
    assert_eq!(t.slots().len(), 3);
    assert_eq!(serialize(&t, SerializeMode::Strict), text);
    assert!(parse_query(text).is_err());
    assert!(matches!(evaluate(&mini_kg(), &t), Err(EvalError::UnfilledSlot(_))));
}

#[test]
fn diagnostics_carry_position_and_expectations() {
    let err = parse_query("SELECT ?x WHERE {\n  ?x wdt:P31 }").unwrap_err();
    match &err {
        ParseError::Unexpected { position, expected, .. } => {
            assert_eq!((position.line, position.column), (2, 14));
            assert!(expected.iter().any(|e| e.contains("variable")));
        }
        other => panic!("unexpected error {other:?}"),
    }
    let err = parse_query("SELECT ?x WHERE { ?x wdt:P31 wd:Q5 . FILTER(?x) }").unwrap_err();
    assert!(matches!(&err, ParseError::Unsupported { construct, .. } if construct == "FILTER"), "{err}");
    let err = parse_query("SELECT ?x WHERE { ?x wdt:P31 wd:Q5 . OPTIONAL { ?x wdt:P17 ?y . } }").unwrap_err();
    assert!(err.to_string().contains("unsupported construct: OPTIONAL"));
    let err = parse_query("SELECT ?x WHERE { ?x wdt:P31* wd:Q5 . }").unwrap_err();
    assert!(err.to_string().contains("property path"));
    assert!(parse_query("SELECT ?x WHERE { ?x ?p wd:Q5 . }").is_err());
    assert!(parse_query("SELECT ?y WHERE { ?x wdt:P31 wd:Q5 . }").is_err());
    assert!(parse_query("SELECT ?x WHERE { }").is_err());
    assert!(parse_query("SELECT ?x WHERE { ?x wdt:P31 wd:Q05 . }").is_err());
    assert!(parse_query("SELECT ?x WHERE { ?x ex:p wd:Q5 . }").is_err());
}

#[test]
fn evaluates_the_three_turns() {
    let kg = mini_kg();
    assert_eq!(evaluate(&kg, &parse_query(T1).unwrap()).unwrap(), Answer::entities([q(846847)]));
    let t2 = "SELECT ?x WHERE { wd:Q846847 wdt:P1346 ?x. ?x wdt:P31 wd:Q12973014.}";
    assert_eq!(evaluate(&kg, &parse_query(t2).unwrap()).unwrap(), Answer::entities([q(7199360)]));
    assert_eq!(evaluate(&kg, &parse_query(T3).unwrap()).unwrap(), Answer::Boolean(false));
}

#[test]
fn count_star_on_fixture() {
    // Q846847 P1923 has one object, Q650855, typed baseball team not sports team
    let kg = mini_kg();
    let q0 = parse_query("SELECT (COUNT(*) AS ?count) WHERE { wd:Q846847 wdt:P1923 ?x . ?x wdt:P31 wd:Q12973014 . }").unwrap();
    assert_eq!(evaluate(&kg, &q0).unwrap(), Answer::Count(0));
    let q1 = parse_query("SELECT (COUNT(*) AS ?count) WHERE { wd:Q846847 wdt:P1346 ?x . ?x wdt:P31 wd:Q12973014 . }").unwrap();
    assert_eq!(evaluate(&kg, &q1).unwrap(), Answer::Count(1));
}

#[test]
fn grouped_evaluation() {
    let kg = mini_kg();
    let run = |text: &str| evaluate(&kg, &parse_query(text).unwrap()).unwrap();
    // instances per class: Q12973014 has 2, Q6256 has 2, three others have 1
    assert_eq!(
        run("SELECT ?t WHERE { ?x wdt:P31 ?t . } GROUP BY ?t HAVING (COUNT(DISTINCT ?x) >= 2)"),
        Answer::entities([q(6256), q(12973014)])
    );
    assert_eq!(
        run("SELECT (COUNT(DISTINCT ?t) AS ?count) WHERE { ?x wdt:P31 ?t . } GROUP BY ?t HAVING (COUNT(DISTINCT ?x) = 1)"),
        Answer::Count(3)
    );
    assert_eq!(
        run("SELECT ?t WHERE { ?x wdt:P31 ?t . } GROUP BY ?t ORDER BY DESC(COUNT(DISTINCT ?x)) LIMIT 1"),
        Answer::entities([q(6256)])
    );
    assert_eq!(
        run("SELECT ?t WHERE { ?x wdt:P31 ?t . } GROUP BY ?t ORDER BY ASC(COUNT(DISTINCT ?x)) LIMIT 1"),
        Answer::entities([q(500834)])
    );
    assert_eq!(
        run("SELECT ?t WHERE { ?x wdt:P31 ?t . } GROUP BY ?t HAVING (COUNT(DISTINCT ?x) > (SELECT (COUNT(DISTINCT ?z) AS ?count) WHERE { wd:Q846847 wdt:P1346 ?z . }))"),
        Answer::entities([q(6256), q(12973014)])
    );
}

#[test]
fn approx_tolerance() {
    let opts = EvalOptions::default();
    assert_eq!(opts.tolerance(0), 1);
    assert_eq!(opts.tolerance(4), 1);
    assert_eq!(opts.tolerance(25), 3);
    assert_eq!(opts.tolerance(100), 10);
    assert!(Comparator::Approx.holds(9, 10, 1));
    assert!(!Comparator::Approx.holds(8, 10, 1));
}

#[test]
fn minus_removes_compatible_solutions() {
    let kg = mini_kg();
    let text = "SELECT ?x WHERE { ?x wdt:P31 wd:Q12973014 . MINUS { ?x wdt:P17 wd:Q30 . } }";
    assert_eq!(evaluate(&kg, &parse_query(text).unwrap()).unwrap(), Answer::entities([q(7199360)]));
    // variable-free removed pattern that matches removes everything
    let text = "SELECT ?x WHERE { ?x wdt:P31 wd:Q12973014 . MINUS { wd:Q653772 wdt:P17 wd:Q30 . } }";
    assert_eq!(evaluate(&kg, &parse_query(text).unwrap()).unwrap(), Answer::entities([]));
}

#[test]
fn answers_serialize_as_plain_json() {
    assert_eq!(serde_json::to_string(&Answer::Boolean(false)).unwrap(), "false");
    assert_eq!(serde_json::to_string(&Answer::Count(3)).unwrap(), "3");
    assert_eq!(serde_json::to_string(&Answer::entities([q(2), q(10)])).unwrap(), "[\"Q2\",\"Q10\"]");
    let back: Answer = serde_json::from_str("[\"Q846847\"]").unwrap();
    assert_eq!(back, Answer::entities([q(846847)]));
    assert_eq!(serde_json::from_str::<Answer>("true").unwrap(), Answer::Boolean(true));
    assert_eq!(serde_json::from_str::<Answer>("7").unwrap(), Answer::Count(7));
}

#[test]
fn oracle_agrees_on_fixture() {
    let kg = mini_kg();
    for text in [T1, T3, "SELECT ?t WHERE { ?x wdt:P31 ?t . } GROUP BY ?t ORDER BY DESC(COUNT(DISTINCT ?x)) LIMIT 1"] {
        let q = parse_query(text).unwrap();
        assert_eq!(evaluate(&kg, &q).unwrap(), brute_force_evaluate(&kg, &q), "{text}");
    }
    let empty = crate::kg::KnowledgeGraph::default();
    let q = parse_query(T1).unwrap();
    assert_eq!(brute_force_evaluate(&empty, &q), Answer::entities([]));
}
