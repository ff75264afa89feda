//! Properties of linking, context, vocabulary, metrics and splits.

mod common;

use std::collections::BTreeSet;

use convkgqa::context::{context_of, dynamic_vocabulary};
use convkgqa::eval::{
    exact_match, macro_f1, make_splits, score_answer, MetricContribution, Ratios, Score, SplitSpec,
};
use convkgqa::ids::EntityId;
use convkgqa::linking::{build_index, detect_mentions, link_mention};
use convkgqa::parser::{Parser, ParserConfig};
use convkgqa::sparql::{canonicalize, evaluate, parse_query, Answer};
use convkgqa::templates::{instantiate_annotation, Conversation};
use proptest::prelude::*;

use common::{query, suite};

/// Rename `?v<n>` to `?<prefix><perm[n]>`.
fn permute_vars(text: &str, prefix: &str, perm: &[usize]) -> String {
    let mut out = String::new();
    let mut rest = text;
    while let Some(i) = rest.find("?v") {
        out.push_str(&rest[..i]);
        let digits: String = rest[i + 2..].chars().take_while(char::is_ascii_digit).collect();
        let n: usize = digits.parse().expect("canonical variable");
        out.push_str(&format!("?{prefix}{}", perm[n]));
        rest = &rest[i + 2 + digits.len()..];
    }
    out.push_str(rest);
    out
}

fn words() -> impl Strategy<Value = String> {
    let pool = prop::sample::select(vec![
        "Which", "films", "were", "directed", "by", "Ingrid", "Holm", "Norway", "that", "city", "Porto", "Mariners",
        "Bergen", "Athletic", "and", "or", "the", "former", "latter", "it", "Sigrid", "Lunde", "Andes", "Drift", "how",
        "many", "band", "Fjord", "Echo", "Trondheim", "?", ",", "Azulejo", "those", "countries",
    ]);
    prop::collection::vec(pool, 0..14).prop_map(|ws| ws.join(" "))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn em_ignores_variable_names(q in query(), prefix in "[a-z]{1,4}", seed in any::<u64>()) {
        let canonical = canonicalize(&q).to_string();
        let n = canonical.matches("?v").count();
        let mut perm: Vec<usize> = (0..=n).collect();
        // any rotation is a bijection
        let k = perm.len();
        perm.rotate_left((seed as usize) % k);
        let renamed = parse_query(&permute_vars(&canonical, &prefix, &perm)).unwrap();
        prop_assert!(exact_match(&renamed, &q));
    }

    #[test]
    fn mentions_are_deterministic_and_disjoint(text in words()) {
        let (kg, _) = suite();
        let index = build_index(&kg);
        let a = detect_mentions(&text, &index);
        prop_assert_eq!(&a, &detect_mentions(&text, &index));
        for w in a.windows(2) {
            prop_assert!(w[0].end <= w[1].start, "{:?}", w);
        }
        for m in &a {
            prop_assert_eq!(&text[m.start..m.end], m.surface.as_str());
            prop_assert_eq!(link_mention(&index, m), link_mention(&index, m));
        }
    }

    #[test]
    fn vocabulary_grows_with_its_seeds(picks in prop::collection::vec(0usize..64, 0..6), extra in 0usize..64) {
        let (kg, _) = suite();
        let pool: Vec<EntityId> = kg.entities().into_iter().collect();
        let small: BTreeSet<EntityId> = picks.iter().map(|i| pool[i % pool.len()]).collect();
        let mut large = small.clone();
        large.insert(pool[extra % pool.len()]);
        let (a, b) = (dynamic_vocabulary(&kg, &small), dynamic_vocabulary(&kg, &large));
        prop_assert!(a.entities.is_subset(&b.entities));
        prop_assert!(a.relations.is_subset(&b.relations));
        prop_assert!(a.types.is_subset(&b.types));
        prop_assert!(a.subgraph.is_subset(&b.subgraph));
    }

    #[test]
    fn wider_windows_extend_narrower_ones(conv in 0usize..22, turn in 0usize..8, w in 0usize..4) {
        let (_, data) = suite();
        let c = &data[conv % data.len()];
        let t = (turn * 2) % c.turns.len();
        let narrow = context_of(c, t, w).unwrap();
        let wide = context_of(c, t, w + 1).unwrap();
        prop_assert!(narrow.turns.len() <= w);
        prop_assert!(wide.turns.len() <= w + 1);
        prop_assert!(wide.turns.ends_with(&narrow.turns));
    }

    #[test]
    fn splits_never_leak(n in 2usize..60, held in prop::collection::vec(any::<bool>(), 60), seed in any::<u64>(), which in 0usize..3) {
        let spec = &SplitSpec::builtins()[which];
        let names: Vec<&str> = spec.held_out.iter().map(String::as_str).collect();
        let data = synthetic(n, |i| (held[i] || i < names.len()).then(|| names[i % names.len()]));
        let s = make_splits(&data, spec, Ratios::default(), seed).unwrap();
        prop_assert_eq!(s.train.len() + s.valid.len() + s.test.len(), n);
        prop_assert!(s.train.iter().chain(&s.valid).all(|c| !spec.touches(c)));
        let ids: BTreeSet<&str> = s.train.iter().chain(&s.valid).chain(&s.test).map(|c| c.id.as_str()).collect();
        prop_assert_eq!(ids.len(), n);
    }

    #[test]
    fn micro_equals_macro_for_one_question(tp in 0u64..20, fp in 0u64..20, fn_ in 0u64..20) {
        let c = MetricContribution { score: Score::Set { tp, fp, fn_ }, em: false };
        prop_assert_eq!(macro_f1(&[c]), c.f1());
        let f = c.f1().unwrap();
        prop_assert!((0.0..=1.0).contains(&f));
    }

    #[test]
    fn set_scores_partition_both_sides(p in prop::collection::btree_set(1u64..30, 0..10), g in prop::collection::btree_set(1u64..30, 0..10)) {
        let pred = Answer::entities(p.iter().map(|n| EntityId(*n)));
        let gold = Answer::entities(g.iter().map(|n| EntityId(*n)));
        let Score::Set { tp, fp, fn_ } = score_answer(Some(&pred), &gold) else { panic!("set gold") };
        prop_assert_eq!(tp + fp, p.len() as u64);
        prop_assert_eq!(tp + fn_, g.len() as u64);
    }
}

/// `n` one-turn conversations; `held` may swap in another sub-type.
pub fn synthetic<'a>(n: usize, held: impl Fn(usize) -> Option<&'a str>) -> Vec<Conversation> {
    let (_, data) = suite();
    let base = &data[0];
    (0..n)
        .map(|i| {
            let mut c = base.clone();
            c.id = format!("syn-{i}");
            c.turns.truncate(2);
            if let Some(sub_type) = held(i) {
                c.turns[0].annotation.as_mut().unwrap().sub_type = sub_type.to_string();
            }
            c
        })
        .collect()
}

#[test]
fn exact_match_implies_the_same_answer() {
    let (kg, data) = suite();
    let parser = Parser::new(&kg);
    let mut checked = 0;
    for cfg in [ParserConfig::oracle(), ParserConfig::default()] {
        for c in &data {
            for t in c.annotated_user_turns() {
                let Ok(r) = parser.parse_turn(c, t, &cfg) else { continue };
                let gold = c.turns[t].gold_sparql.clone().unwrap();
                if exact_match(&r.sparql, &gold) {
                    let want = c.turns[t].gold_answer.clone().unwrap();
                    let s = MetricContribution { score: score_answer(evaluate(&kg, &r.sparql).ok().as_ref(), &want), em: true };
                    assert!(s.is_perfect(), "{}#{t}", c.id);
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 58, "{checked}");
    assert!(data.iter().flat_map(|c| c.turns.iter()).filter_map(|t| t.annotation.as_ref()).all(|a| instantiate_annotation(a).is_ok()));
}
