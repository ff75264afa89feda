//! Breadth-first annotation search.
//!
//! Programs are enumerated by token count. At each size, set expressions are
//! generated in token order and only the first expression for each new
//! denotation is kept; a denotation already produced at a smaller size is
//! never rebuilt. Any program using a pruned subexpression has a twin of no
//! greater size (and no greater token order) using the kept one, so the first
//! gold-reproducing program found is still minimal.

use std::collections::{BTreeSet, HashSet};

use super::interpret::{denote, select};
use super::{Action, CountMap, Number, Selection, SetExpr};
use crate::ids::{EntityId, PropertyId, TypeId};
use crate::kg::KnowledgeGraph;
use crate::sparql::{Answer, Comparator, EvalOptions, Extremum};

/// The annotated symbols a search may use.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SearchSymbols {
    pub entities: Vec<EntityId>,
    pub relations: Vec<PropertyId>,
    pub types: Vec<TypeId>,
    /// Integer literals for comparison thresholds.
    pub values: Vec<u64>,
}

const COMPARATORS: [Comparator; 6] = [
    Comparator::Gt,
    Comparator::Lt,
    Comparator::Eq,
    Comparator::Ge,
    Comparator::Le,
    Comparator::Approx,
];

struct Levels {
    /// Kept set expressions by size, with their denotations.
    sets: Vec<Vec<(SetExpr, BTreeSet<EntityId>)>>,
    seen: HashSet<BTreeSet<EntityId>>,
    selections: Vec<Vec<Selection>>,
    seen_selections: HashSet<BTreeSet<EntityId>>,
}

fn sorted_by_tokens<T>(items: Vec<T>, tokens: impl Fn(&T) -> Vec<String>) -> Vec<T> {
    let mut keyed: Vec<(Vec<String>, T)> = items.into_iter().map(|i| (tokens(&i), i)).collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    keyed.into_iter().map(|(_, i)| i).collect()
}

fn set_tokens(s: &SetExpr) -> Vec<String> {
    let mut out = Vec::new();
    s.write_tokens(&mut out);
    out
}

/// Search for the smallest program over `symbols` whose interpretation is
/// `gold`, with at most `max_size` tokens. Ties go to the
/// lexicographically smallest token list.
pub fn search_annotation(kg: &KnowledgeGraph, symbols: &SearchSymbols, gold: &Answer, max_size: usize) -> Option<Action> {
    let opts = EvalOptions::default();
    let mut lv = Levels {
        sets: vec![Vec::new(); max_size + 1],
        seen: HashSet::new(),
        selections: vec![Vec::new(); max_size + 1],
        seen_selections: HashSet::new(),
    };
    let mut entities = symbols.entities.clone();
    entities.sort();
    entities.dedup();
    let mut relations = symbols.relations.clone();
    relations.sort();
    relations.dedup();
    let mut types = symbols.types.clone();
    types.sort();
    types.dedup();
    let mut values = symbols.values.clone();
    values.sort();
    values.dedup();

    let mut maps: Vec<CountMap> = Vec::new();
    for reverse in [false, true] {
        for &relation in &relations {
            for &key_type in &types {
                for &member_type in &types {
                    maps.push(CountMap {
                        reverse,
                        relation,
                        key_type,
                        member_type,
                    });
                }
            }
        }
    }

    for size in 1..=max_size {
        grow_sets(kg, &mut lv, size, &entities, &relations, &types);
        grow_selections(kg, &mut lv, size, &maps, &values, &opts);

        let mut hits: Vec<Action> = Vec::new();
        match gold {
            Answer::EntitySet(g) => {
                hits.extend(lv.sets[size].iter().filter(|(_, d)| d == g).map(|(s, _)| Action::Set(s.clone())));
                hits.extend(
                    lv.selections[size]
                        .iter()
                        .filter(|sel| select(kg, sel, &opts) == *g)
                        .map(|sel| Action::Select(sel.clone())),
                );
            }
            Answer::Count(n) => {
                if size >= 2 {
                    hits.extend(
                        lv.sets[size - 1]
                            .iter()
                            .filter(|(_, d)| d.len() as u64 == *n)
                            .map(|(s, _)| Action::Count(s.clone())),
                    );
                    hits.extend(
                        lv.selections[size - 1]
                            .iter()
                            .filter(|sel| select(kg, sel, &opts).len() as u64 == *n)
                            .map(|sel| Action::CountSelected(sel.clone())),
                    );
                }
            }
            Answer::Boolean(b) => {
                if size >= 3 {
                    for (s, d) in &lv.sets[size - 2] {
                        for &e in &entities {
                            if d.contains(&e) == *b {
                                hits.push(Action::IsIn(e, s.clone()));
                            }
                        }
                    }
                }
            }
        }
        if let Some(best) = hits.into_iter().min_by_key(|a| a.tokens()) {
            return Some(best);
        }
    }
    None
}

fn grow_sets(
    kg: &KnowledgeGraph,
    lv: &mut Levels,
    size: usize,
    entities: &[EntityId],
    relations: &[PropertyId],
    types: &[TypeId],
) {
    let mut cands: Vec<SetExpr> = Vec::new();
    if size == 3 {
        for &e in entities {
            for &r in relations {
                cands.push(SetExpr::Find(e, r));
                cands.push(SetExpr::FindRev(e, r));
            }
        }
    }
    if size >= 5 {
        for (s, _) in &lv.sets[size - 2] {
            for &t in types {
                cands.push(SetExpr::FilterType(Box::new(s.clone()), t));
            }
        }
    }
    if size >= 7 {
        for left in 3..=size - 4 {
            let right = size - 1 - left;
            for (a, _) in &lv.sets[left] {
                for (b, _) in &lv.sets[right] {
                    let (a, b) = (Box::new(a.clone()), Box::new(b.clone()));
                    cands.push(SetExpr::Union(a.clone(), b.clone()));
                    cands.push(SetExpr::Intersection(a.clone(), b.clone()));
                    cands.push(SetExpr::Difference(a, b));
                }
            }
        }
    }
    for s in sorted_by_tokens(cands, set_tokens) {
        let d = denote(kg, &s);
        if lv.seen.insert(d.clone()) {
            lv.sets[size].push((s, d));
        }
    }
}

fn grow_selections(
    kg: &KnowledgeGraph,
    lv: &mut Levels,
    size: usize,
    maps: &[CountMap],
    values: &[u64],
    opts: &EvalOptions,
) {
    let mut cands: Vec<Selection> = Vec::new();
    if size == 5 {
        for m in maps {
            for ext in [Extremum::Max, Extremum::Min] {
                cands.push(Selection::Extremum { ext, map: *m });
            }
        }
    }
    let mut numbers: Vec<Number> = Vec::new();
    if size == 6 {
        numbers.extend(values.iter().map(|v| Number::Literal(*v)));
    }
    if size >= 9 {
        numbers.extend(lv.sets[size - 6].iter().map(|(s, _)| Number::Count(s.clone())));
    }
    for n in &numbers {
        for m in maps {
            for op in COMPARATORS {
                cands.push(Selection::Compare {
                    op,
                    map: *m,
                    n: n.clone(),
                });
            }
        }
    }
    let tokens = |s: &Selection| Action::Select(s.clone()).tokens();
    for sel in sorted_by_tokens(cands, tokens) {
        let d = select(kg, &sel, opts);
        if lv.seen_selections.insert(d) {
            lv.selections[size].push(sel);
        }
    }
}
