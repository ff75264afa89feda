mod common;

use std::collections::BTreeSet;

use common::programs::action;
use common::*;
use convkgqa::actions::*;
use convkgqa::ids::{EntityId, PropertyId, TypeId};
use convkgqa::kg::KnowledgeGraph;
use convkgqa::sparql::{evaluate, Answer, Comparator, Extremum};
use proptest::prelude::*;

/// Every set expression of exactly `size` tokens, without any pruning.
fn all_sets(size: usize, es: &[EntityId], rs: &[PropertyId], ts: &[TypeId]) -> Vec<SetExpr> {
    let mut out = Vec::new();
    if size == 3 {
        for &e in es {
            for &r in rs {
                out.push(SetExpr::Find(e, r));
                out.push(SetExpr::FindRev(e, r));
            }
        }
    }
    if size >= 5 {
        for s in all_sets(size - 2, es, rs, ts) {
            for &t in ts {
                out.push(SetExpr::FilterType(Box::new(s.clone()), t));
            }
        }
    }
    if size >= 7 {
        for left in 3..=size - 4 {
            for a in all_sets(left, es, rs, ts) {
                for b in all_sets(size - 1 - left, es, rs, ts) {
                    out.push(SetExpr::Union(Box::new(a.clone()), Box::new(b.clone())));
                    out.push(SetExpr::Intersection(Box::new(a.clone()), Box::new(b.clone())));
                    out.push(SetExpr::Difference(Box::new(a.clone()), Box::new(b)));
                }
            }
        }
    }
    out
}

fn all_selections(size: usize, rs: &[PropertyId], ts: &[TypeId], vs: &[u64], es: &[EntityId]) -> Vec<Selection> {
    let mut maps = Vec::new();
    for reverse in [false, true] {
        for &relation in rs {
            for &key_type in ts {
                for &member_type in ts {
                    maps.push(CountMap { reverse, relation, key_type, member_type });
                }
            }
        }
    }
    let mut out = Vec::new();
    if size == 5 {
        for m in &maps {
            out.push(Selection::Extremum { ext: Extremum::Max, map: *m });
            out.push(Selection::Extremum { ext: Extremum::Min, map: *m });
        }
    }
    let mut numbers: Vec<Number> = Vec::new();
    if size == 6 {
        numbers.extend(vs.iter().map(|v| Number::Literal(*v)));
    }
    if size >= 9 {
        numbers.extend(all_sets(size - 6, es, rs, ts).into_iter().map(Number::Count));
    }
    for n in numbers {
        for m in &maps {
            for op in [Comparator::Gt, Comparator::Lt, Comparator::Eq, Comparator::Ge, Comparator::Le, Comparator::Approx] {
                out.push(Selection::Compare { op, map: *m, n: n.clone() });
            }
        }
    }
    out
}

/// Every program of exactly `size` tokens.
fn all_programs(size: usize, sym: &SearchSymbols) -> Vec<Action> {
    let (es, rs, ts, vs) = (&sym.entities, &sym.relations, &sym.types, &sym.values);
    let mut out: Vec<Action> = all_sets(size, es, rs, ts).into_iter().map(Action::Set).collect();
    out.extend(all_selections(size, rs, ts, vs, es).into_iter().map(Action::Select));
    if size >= 2 {
        out.extend(all_sets(size - 1, es, rs, ts).into_iter().map(Action::Count));
        out.extend(all_selections(size - 1, rs, ts, vs, es).into_iter().map(Action::CountSelected));
    }
    if size >= 3 {
        for s in all_sets(size - 2, es, rs, ts) {
            for &e in es {
                out.push(Action::IsIn(e, s.clone()));
            }
        }
    }
    out
}

/// Smallest, then token-least, gold-reproducing program by exhaustive scan.
fn exhaustive(kg: &KnowledgeGraph, sym: &SearchSymbols, gold: &Answer, max: usize) -> Option<Action> {
    (1..=max).find_map(|size| {
        all_programs(size, sym)
            .into_iter()
            .filter(|a| interpret(kg, a) == *gold)
            .min_by_key(|a| a.tokens())
    })
}

fn symbols() -> impl Strategy<Value = SearchSymbols> {
    (
        prop::collection::btree_set(entity(), 1..3),
        prop::collection::btree_set(relation(), 1..3),
        prop::collection::btree_set(type_id(), 0..2),
        prop::collection::btree_set(0u64..3, 0..2),
    )
        .prop_map(|(e, r, t, v)| SearchSymbols {
            entities: e.into_iter().collect(),
            relations: r.into_iter().collect(),
            types: t.into_iter().collect(),
            values: v.into_iter().collect(),
        })
}

fn gold() -> impl Strategy<Value = Answer> {
    prop_oneof![
        prop::collection::btree_set(entity(), 0..3).prop_map(|s: BTreeSet<EntityId>| Answer::EntitySet(s)),
        (0u64..4).prop_map(Answer::Count),
        any::<bool>().prop_map(Answer::Boolean),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn compiled_queries_agree_with_the_interpreter(kg in kg_sized(50, 120), a in action(50)) {
        let q = compile_to_sparql(&a);
        prop_assert!(q.validate().is_ok(), "{}", q);
        prop_assert_eq!(evaluate(&kg, &q).unwrap(), interpret(&kg, &a), "{} => {}", a, q);
    }

    #[test]
    fn programs_round_trip_through_tokens(a in action(50)) {
        prop_assert_eq!(parse_actions(&a.tokens()).unwrap(), a.clone());
        prop_assert_eq!(a.to_string().parse::<Action>().unwrap(), a);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn search_is_sound_and_minimal(kg in kg(), sym in symbols(), gold in gold()) {
        let found = search_annotation(&kg, &sym, &gold, 9);
        if let Some(a) = &found {
            prop_assert_eq!(&interpret(&kg, a), &gold);
        }
        let reference = exhaustive(&kg, &sym, &gold, 9);
        prop_assert_eq!(found.map(|a| a.tokens()), reference.map(|a| a.tokens()));
    }

    // programs sampled from the grammar are always recoverable
    #[test]
    fn search_recovers_reachable_answers(kg in kg(), sym in symbols(), pick in 0usize..1000) {
        let mut pool: Vec<Action> = (1..=5).flat_map(|n| all_programs(n, &sym)).collect();
        pool.sort();
        let target = &pool[pick % pool.len()];
        let gold = interpret(&kg, target);
        let found = search_annotation(&kg, &sym, &gold, 5).expect("a program of size <= 5 exists");
        prop_assert_eq!(interpret(&kg, &found), gold);
        prop_assert!(found.size() <= target.size());
    }
}

#[test]
fn sampled_programs_are_not_vacuous() {
    use proptest::strategy::ValueTree;
    use proptest::test_runner::TestRunner;
    let mut runner = TestRunner::deterministic();
    let strategy = (kg_sized(50, 120), action(50));
    let informative = (0..500)
        .filter(|_| {
            let (kg, a) = strategy.new_tree(&mut runner).unwrap().current();
            match interpret(&kg, &a) {
                Answer::EntitySet(s) => !s.is_empty(),
                Answer::Count(n) => n > 0,
                Answer::Boolean(b) => b,
            }
        })
        .count();
    assert!(informative >= 50, "only {informative}/500 informative answers");
}
