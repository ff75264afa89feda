//! Brute-force reference evaluator used as a test oracle.
//!
//! Each basic graph pattern is solved by trying every assignment of its
//! variables over the entity universe and checking every pattern against a
//! plain triple list. No indexes, no join order. Only for small graphs.

use std::collections::{BTreeMap, BTreeSet};

use super::ast::*;
use super::eval::{Answer, EvalOptions};
use crate::ids::EntityId;
use crate::kg::{KnowledgeGraph, Triple};

type Assignment = Vec<(Var, EntityId)>;

pub fn brute_force_evaluate(kg: &KnowledgeGraph, q: &SparqlQuery) -> Answer {
    brute_force_evaluate_with(kg, q, &EvalOptions::default())
}

/// Panics on slots or malformed predicates; the oracle only sees valid,
/// fully instantiated queries.
pub fn brute_force_evaluate_with(kg: &KnowledgeGraph, q: &SparqlQuery, opts: &EvalOptions) -> Answer {
    let universe: Vec<EntityId> = kg.entities().into_iter().collect();
    let triples: Vec<Triple> = kg.triples().to_vec();
    let sols = solutions(&universe, &triples, &q.pattern);
    let lookup = |s: &Assignment, v: &Var| s.iter().find(|(k, _)| k == v).map(|(_, e)| *e);

    match &q.form {
        QueryForm::Ask => Answer::Boolean(!sols.is_empty()),
        QueryForm::SelectEntities { var, .. } => {
            let mut out = BTreeSet::new();
            for s in &sols {
                if let Some(e) = lookup(s, var) {
                    out.insert(e);
                }
            }
            Answer::EntitySet(out)
        }
        QueryForm::SelectCount { target, distinct, .. } => {
            let n = match target {
                CountTarget::Star => {
                    if *distinct {
                        let mut seen: Vec<Assignment> = Vec::new();
                        for s in &sols {
                            let mut sorted = s.clone();
                            sorted.sort();
                            if !seen.contains(&sorted) {
                                seen.push(sorted);
                            }
                        }
                        seen.len()
                    } else {
                        sols.len()
                    }
                }
                CountTarget::Var(v) => {
                    let vals: Vec<EntityId> = sols.iter().filter_map(|s| lookup(s, v)).collect();
                    if *distinct {
                        vals.iter().collect::<BTreeSet<_>>().len()
                    } else {
                        vals.len()
                    }
                }
            };
            Answer::Count(n as u64)
        }
        QueryForm::SelectGrouped {
            var,
            output,
            counted,
            distinct,
            constraint,
        } => {
            let keys: BTreeSet<EntityId> = sols.iter().filter_map(|s| lookup(s, var)).collect();
            let size = |k: EntityId| -> u64 {
                let members: Vec<EntityId> = sols
                    .iter()
                    .filter(|s| lookup(s, var) == Some(k))
                    .filter_map(|s| lookup(s, counted))
                    .collect();
                if *distinct {
                    members.iter().collect::<BTreeSet<_>>().len() as u64
                } else {
                    members.len() as u64
                }
            };
            let sized: Vec<(EntityId, u64)> = keys.iter().map(|k| (*k, size(*k))).filter(|(_, n)| *n > 0).collect();
            let kept: BTreeSet<EntityId> = match constraint {
                GroupConstraint::Compare { op, threshold } => {
                    let t = match threshold {
                        Threshold::Literal(n) => *n,
                        Threshold::Count(sub) => match brute_force_evaluate_with(kg, sub, opts) {
                            Answer::Count(n) => n,
                            other => panic!("threshold sub-query produced {other:?}"),
                        },
                        Threshold::Slot(s) => panic!("unfilled slot {s}"),
                    };
                    let tol = ((opts.approx_ratio * t as f64).round() as u64).max(1);
                    sized
                        .iter()
                        .filter(|(_, n)| {
                            let n = *n as i128;
                            let t = t as i128;
                            match op {
                                Comparator::Gt => n > t,
                                Comparator::Lt => n < t,
                                Comparator::Ge => n >= t,
                                Comparator::Le => n <= t,
                                Comparator::Eq => n == t,
                                Comparator::Approx => (n - t).abs() <= tol as i128,
                            }
                        })
                        .map(|(k, _)| *k)
                        .collect()
                }
                GroupConstraint::Extremum(ext) => {
                    let mut best: Option<(EntityId, u64)> = None;
                    for (k, n) in &sized {
                        let better = match (best, ext) {
                            (None, _) => true,
                            (Some((_, b)), Extremum::Max) => *n > b,
                            (Some((_, b)), Extremum::Min) => *n < b,
                        };
                        if better {
                            best = Some((*k, *n));
                        }
                    }
                    best.map(|(k, _)| k).into_iter().collect()
                }
            };
            match output {
                GroupOutput::Entities => Answer::EntitySet(kept),
                GroupOutput::Count { .. } => Answer::Count(kept.len() as u64),
            }
        }
    }
}

fn solutions(universe: &[EntityId], triples: &[Triple], p: &GroupPattern) -> Vec<Assignment> {
    match p {
        GroupPattern::Bgp(ps) => {
            let vars: Vec<Var> = p.vars().into_iter().collect();
            let mut out = Vec::new();
            let mut current: Vec<EntityId> = Vec::with_capacity(vars.len());
            enumerate(universe, triples, ps, &vars, &mut current, &mut out);
            out
        }
        GroupPattern::Union(a, b) => {
            let mut out = solutions(universe, triples, a);
            out.extend(solutions(universe, triples, b));
            out
        }
        GroupPattern::Minus(base, removed) => {
            let removed = solutions(universe, triples, removed);
            solutions(universe, triples, base)
                .into_iter()
                .filter(|mu| {
                    !removed.iter().any(|nu| {
                        let shared: BTreeMap<&Var, EntityId> = mu.iter().map(|(k, v)| (k, *v)).collect();
                        nu.iter().all(|(k, v)| shared.get(k).is_none_or(|w| w == v))
                    })
                })
                .collect()
        }
    }
}

fn enumerate(
    universe: &[EntityId],
    triples: &[Triple],
    patterns: &[TriplePattern],
    vars: &[Var],
    current: &mut Vec<EntityId>,
    out: &mut Vec<Assignment>,
) {
    if current.len() == vars.len() {
        let value = |t: &Term| match t {
            Term::Entity(e) => *e,
            Term::Var(v) => current[vars.iter().position(|w| w == v).expect("collected var")],
            other => panic!("oracle cannot evaluate term {other:?}"),
        };
        let all_hold = patterns.iter().all(|tp| {
            let Term::Property(p) = tp.predicate else {
                panic!("oracle needs a property predicate")
            };
            let want = Triple::new(value(&tp.subject), p, value(&tp.object));
            triples.iter().any(|t| *t == want)
        });
        if all_hold {
            out.push(vars.iter().cloned().zip(current.iter().copied()).collect());
        }
        return;
    }
    for e in universe {
        current.push(*e);
        enumerate(universe, triples, patterns, vars, current, out);
        current.pop();
    }
}
