//! Random small graphs and queries for property tests.
#![allow(dead_code)]

use convkgqa::ids::{EntityId, PropertyId, P31};
use convkgqa::kg::{KnowledgeGraph, Triple};
use convkgqa::sparql::*;
use proptest::prelude::*;

pub const ENTITIES: u64 = 5;
pub const TYPES: [u64; 2] = [101, 102];
pub const RELATIONS: [u64; 2] = [1, 2];

pub fn entity() -> impl Strategy<Value = EntityId> {
    entity_in(ENTITIES)
}

pub fn entity_in(n: u64) -> impl Strategy<Value = EntityId> {
    (1..=n).prop_map(EntityId)
}

pub fn relation() -> impl Strategy<Value = PropertyId> {
    prop::sample::select(RELATIONS.to_vec()).prop_map(PropertyId)
}

pub fn type_id() -> impl Strategy<Value = EntityId> {
    prop::sample::select(TYPES.to_vec()).prop_map(EntityId)
}

fn triple(n: u64) -> impl Strategy<Value = Triple> {
    prop_oneof![
        3 => (entity_in(n), relation(), entity_in(n)).prop_map(|(s, p, o)| Triple::new(s, p, o)),
        1 => (entity_in(n), type_id()).prop_map(|(s, t)| Triple::new(s, P31, t)),
    ]
}

pub fn triples() -> impl Strategy<Value = Vec<Triple>> {
    prop::collection::vec(triple(ENTITIES), 0..32)
}

/// A graph over `n` entities with up to `max_triples` triples.
pub fn kg_sized(n: u64, max_triples: usize) -> impl Strategy<Value = KnowledgeGraph> {
    prop::collection::vec(triple(n), 0..max_triples).prop_map(|ts| graph_of(&ts))
}

pub fn graph_of(triples: &[Triple]) -> KnowledgeGraph {
    let mut b = KnowledgeGraph::builder();
    for t in triples {
        b.add_triple(*t);
    }
    b.build()
}

pub fn kg() -> impl Strategy<Value = KnowledgeGraph> {
    triples().prop_map(|ts| graph_of(&ts))
}

fn node() -> impl Strategy<Value = Term> {
    prop_oneof![
        5 => prop::sample::select(vec!["x", "y", "z"]).prop_map(|v| Term::Var(var(v))),
        2 => entity().prop_map(Term::Entity),
        1 => type_id().prop_map(Term::Entity),
    ]
}

fn pattern_triple() -> impl Strategy<Value = TriplePattern> {
    let pred = prop_oneof![3 => relation(), 1 => Just(P31)];
    (node(), pred, node()).prop_map(|(s, p, o)| TriplePattern::new(s, p, o))
}

pub fn group_pattern() -> impl Strategy<Value = GroupPattern> {
    let leaf = prop::collection::vec(pattern_triple(), 1..4).prop_map(GroupPattern::Bgp);
    leaf.prop_recursive(2, 8, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| GroupPattern::union(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| GroupPattern::minus(a, b)),
        ]
    })
}

pub fn pure_bgp() -> impl Strategy<Value = Vec<TriplePattern>> {
    prop::collection::vec(pattern_triple(), 1..4)
}

fn comparator() -> impl Strategy<Value = Comparator> {
    prop::sample::select(vec![
        Comparator::Gt,
        Comparator::Lt,
        Comparator::Ge,
        Comparator::Le,
        Comparator::Eq,
        Comparator::Approx,
    ])
}

/// Pick a form that fits the variables of `pattern`.
fn form_for(pattern: &GroupPattern, pick: usize, distinct: bool, op: Comparator, n: u64, sub: Option<SparqlQuery>) -> QueryForm {
    let vars: Vec<Var> = pattern.vars().into_iter().collect();
    if vars.is_empty() {
        return if pick % 2 == 0 {
            QueryForm::Ask
        } else {
            QueryForm::SelectCount {
                target: CountTarget::Star,
                distinct,
                alias: var("count"),
            }
        };
    }
    let v = vars[pick % vars.len()].clone();
    let w = vars[(pick / 7) % vars.len()].clone();
    match pick % 8 {
        0 => QueryForm::Ask,
        1 | 2 => QueryForm::SelectEntities { var: v, distinct },
        3 => QueryForm::SelectCount {
            target: CountTarget::Var(v),
            distinct,
            alias: var("count"),
        },
        4 => QueryForm::SelectCount {
            target: CountTarget::Star,
            distinct,
            alias: var("count"),
        },
        5 => QueryForm::SelectGrouped {
            var: v,
            output: GroupOutput::Entities,
            counted: w,
            distinct,
            constraint: GroupConstraint::Compare {
                op,
                threshold: match sub {
                    Some(q) => Threshold::Count(Box::new(q)),
                    None => Threshold::Literal(n),
                },
            },
        },
        6 => QueryForm::SelectGrouped {
            var: v.clone(),
            output: GroupOutput::Count { alias: var("count") },
            counted: w,
            distinct,
            constraint: GroupConstraint::Compare {
                op,
                threshold: Threshold::Literal(n),
            },
        },
        _ => QueryForm::SelectGrouped {
            var: v,
            output: GroupOutput::Entities,
            counted: w,
            distinct,
            constraint: GroupConstraint::Extremum(if pick % 3 == 0 { Extremum::Min } else { Extremum::Max }),
        },
    }
}

fn count_subquery() -> impl Strategy<Value = Option<SparqlQuery>> {
    prop_oneof![
        2 => Just(None),
        1 => pure_bgp().prop_map(|ps| {
            let pattern = GroupPattern::Bgp(ps);
            let target = pattern.vars().into_iter().next().map_or(CountTarget::Star, CountTarget::Var);
            Some(SparqlQuery::new(
                QueryForm::SelectCount { target, distinct: true, alias: var("count") },
                pattern,
            ))
        }),
    ]
}

pub fn query() -> impl Strategy<Value = SparqlQuery> {
    (group_pattern(), 0usize..64, any::<bool>(), comparator(), 0u64..4, count_subquery()).prop_map(
        |(pattern, pick, distinct, op, n, sub)| {
            let form = form_for(&pattern, pick, distinct, op, n, sub);
            SparqlQuery::new(form, pattern)
        },
    )
}

pub mod programs {
    use super::*;
    use convkgqa::actions::*;

    fn comparator() -> impl Strategy<Value = Comparator> {
        super::comparator()
    }

    pub fn set_expr(n: u64) -> impl Strategy<Value = SetExpr> {
        let leaf = prop_oneof![
            (entity_in(n), relation()).prop_map(|(e, r)| SetExpr::Find(e, r)),
            (entity_in(n), relation()).prop_map(|(e, r)| SetExpr::FindRev(e, r)),
        ];
        leaf.prop_recursive(3, 12, 2, |inner| {
            prop_oneof![
                (inner.clone(), type_id()).prop_map(|(s, t)| SetExpr::FilterType(Box::new(s), t)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| SetExpr::Union(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| SetExpr::Intersection(Box::new(a), Box::new(b))),
                (inner.clone(), inner).prop_map(|(a, b)| SetExpr::Difference(Box::new(a), Box::new(b))),
            ]
        })
    }

    fn count_map() -> impl Strategy<Value = CountMap> {
        (any::<bool>(), relation(), type_id(), type_id()).prop_map(|(reverse, relation, key_type, member_type)| CountMap {
            reverse,
            relation,
            key_type,
            member_type,
        })
    }

    fn selection(n: u64) -> impl Strategy<Value = Selection> {
        let number = prop_oneof![(0u64..4).prop_map(Number::Literal), set_expr(n).prop_map(Number::Count)];
        prop_oneof![
            (comparator(), count_map(), number).prop_map(|(op, map, n)| Selection::Compare { op, map, n }),
            (any::<bool>(), count_map()).prop_map(|(max, map)| Selection::Extremum {
                ext: if max { Extremum::Max } else { Extremum::Min },
                map,
            }),
        ]
    }

    pub fn action(n: u64) -> impl Strategy<Value = Action> {
        prop_oneof![
            3 => set_expr(n).prop_map(Action::Set),
            2 => set_expr(n).prop_map(Action::Count),
            2 => (entity_in(n), set_expr(n)).prop_map(|(e, s)| Action::IsIn(e, s)),
            1 => selection(n).prop_map(Action::Select),
            1 => selection(n).prop_map(Action::CountSelected),
        ]
    }
}

/// The curated conversation suite and its graph.
pub fn suite() -> (KnowledgeGraph, Vec<convkgqa::templates::Conversation>) {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data");
    let ttl = std::fs::File::open(dir.join("suite.ttl")).expect("suite graph");
    let (kg, report) = convkgqa::kg::load_turtle(std::io::BufReader::new(ttl));
    assert_eq!(report.rejected, 0, "{:?}", report.diagnostics);
    let jsonl = std::fs::File::open(dir.join("suite.jsonl")).expect("suite dataset");
    let data = convkgqa::templates::read_dataset(std::io::BufReader::new(jsonl)).expect("suite parses");
    (kg, data)
}
