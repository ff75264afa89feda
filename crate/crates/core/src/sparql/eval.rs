//! Index-backed evaluation.
//!
//! Basic graph patterns are joined left to right; each pattern picks the
//! narrowest index range given the variables already bound. Solutions are
//! bags until projection, where they collapse to sets.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ast::*;
use crate::ids::EntityId;
use crate::kg::{KnowledgeGraph, Triple};

/// A denotation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Answer {
    Boolean(bool),
    Count(u64),
    EntitySet(BTreeSet<EntityId>),
}

impl Answer {
    pub fn entities(ids: impl IntoIterator<Item = EntityId>) -> Self {
        Answer::EntitySet(ids.into_iter().collect())
    }

    pub fn as_set(&self) -> Option<&BTreeSet<EntityId>> {
        match self {
            Answer::EntitySet(s) => Some(s),
            _ => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Answer::Boolean(_) => "boolean",
            Answer::Count(_) => "count",
            Answer::EntitySet(_) => "entity set",
        }
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Answer::Boolean(b) => write!(f, "{b}"),
            Answer::Count(n) => write!(f, "{n}"),
            Answer::EntitySet(s) => {
                f.write_str("[")?;
                for (i, e) in s.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{e}")?;
                }
                f.write_str("]")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    /// Relative tolerance for the `~` comparator; the absolute tolerance is
    /// `max(1, round(ratio * threshold))`.
    pub approx_ratio: f64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { approx_ratio: 0.1 }
    }
}

impl EvalOptions {
    pub fn tolerance(&self, threshold: u64) -> u64 {
        ((self.approx_ratio * threshold as f64).round() as u64).max(1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("query still contains slot {0}")]
    UnfilledSlot(Slot),
    #[error("predicate position holds a non-property term")]
    BadPredicate,
    #[error("threshold sub-query did not produce a count")]
    ThresholdNotCount,
}

/// One solution: variable name to entity. Kept sorted by name.
pub type Solution = BTreeMap<Var, EntityId>;

pub fn evaluate(kg: &KnowledgeGraph, q: &SparqlQuery) -> Result<Answer, EvalError> {
    evaluate_with(kg, q, &EvalOptions::default())
}

pub fn evaluate_with(kg: &KnowledgeGraph, q: &SparqlQuery, opts: &EvalOptions) -> Result<Answer, EvalError> {
    if let Some(s) = q.slots().into_iter().next() {
        return Err(EvalError::UnfilledSlot(s));
    }
    let sols = solve(kg, &q.pattern)?;
    project(kg, q, sols, opts, &|kg, sub| evaluate_with(kg, sub, opts))
}

/// Shared form logic, parameterized over how a threshold sub-query is run.
pub(crate) fn project(
    kg: &KnowledgeGraph,
    q: &SparqlQuery,
    sols: Vec<Solution>,
    opts: &EvalOptions,
    run_sub: &dyn Fn(&KnowledgeGraph, &SparqlQuery) -> Result<Answer, EvalError>,
) -> Result<Answer, EvalError> {
    Ok(match &q.form {
        QueryForm::SelectEntities { var, .. } => Answer::EntitySet(sols.iter().filter_map(|s| s.get(var).copied()).collect()),
        QueryForm::Ask => Answer::Boolean(!sols.is_empty()),
        QueryForm::SelectCount { target, distinct, .. } => Answer::Count(match (target, distinct) {
            (CountTarget::Star, false) => sols.len(),
            (CountTarget::Star, true) => sols.iter().collect::<BTreeSet<_>>().len(),
            (CountTarget::Var(v), false) => sols.iter().filter(|s| s.contains_key(v)).count(),
            (CountTarget::Var(v), true) => sols.iter().filter_map(|s| s.get(v)).collect::<BTreeSet<_>>().len(),
        } as u64),
        QueryForm::SelectGrouped {
            var,
            output,
            counted,
            distinct,
            constraint,
        } => {
            let mut groups: BTreeMap<EntityId, Vec<EntityId>> = BTreeMap::new();
            for s in &sols {
                if let (Some(k), Some(c)) = (s.get(var), s.get(counted)) {
                    groups.entry(*k).or_default().push(*c);
                }
            }
            let sizes: BTreeMap<EntityId, u64> = groups
                .into_iter()
                .map(|(k, mut members)| {
                    if *distinct {
                        members.sort();
                        members.dedup();
                    }
                    (k, members.len() as u64)
                })
                .collect();
            let kept: BTreeSet<EntityId> = match constraint {
                GroupConstraint::Compare { op, threshold } => {
                    let t = match threshold {
                        Threshold::Literal(n) => *n,
                        Threshold::Slot(s) => return Err(EvalError::UnfilledSlot(*s)),
                        Threshold::Count(sub) => match run_sub(kg, sub)? {
                            Answer::Count(n) => n,
                            _ => return Err(EvalError::ThresholdNotCount),
                        },
                    };
                    let tol = opts.tolerance(t);
                    sizes.iter().filter(|(_, n)| op.holds(**n, t, tol)).map(|(k, _)| *k).collect()
                }
                GroupConstraint::Extremum(ext) => {
                    let best = match ext {
                        Extremum::Max => sizes.values().max(),
                        Extremum::Min => sizes.values().min(),
                    };
                    // ties go to the smallest id, which BTreeMap order yields first
                    best.and_then(|b| sizes.iter().find(|(_, n)| *n == b).map(|(k, _)| *k))
                        .into_iter()
                        .collect()
                }
            };
            match output {
                GroupOutput::Entities => Answer::EntitySet(kept),
                GroupOutput::Count { .. } => Answer::Count(kept.len() as u64),
            }
        }
    })
}

/// Bag of solutions for a group pattern.
pub fn solve(kg: &KnowledgeGraph, p: &GroupPattern) -> Result<Vec<Solution>, EvalError> {
    match p {
        GroupPattern::Bgp(ps) => {
            let mut sols = vec![Solution::new()];
            for tp in ps {
                let mut next = Vec::new();
                for s in &sols {
                    extend(kg, tp, s, &mut next)?;
                }
                sols = next;
                if sols.is_empty() {
                    break;
                }
            }
            Ok(sols)
        }
        GroupPattern::Union(a, b) => {
            let mut sols = solve(kg, a)?;
            sols.extend(solve(kg, b)?);
            Ok(sols)
        }
        GroupPattern::Minus(base, removed) => {
            let base = solve(kg, base)?;
            let removed = solve(kg, removed)?;
            Ok(base.into_iter().filter(|mu| !removed.iter().any(|nu| compatible(mu, nu))).collect())
        }
    }
}

/// Solutions agree on every shared variable. Disjoint solutions are
/// compatible, so a variable-free removed pattern with a match removes all.
pub fn compatible(a: &Solution, b: &Solution) -> bool {
    a.iter().all(|(k, v)| b.get(k).is_none_or(|w| w == v))
}

enum Slotted {
    Bound(EntityId),
    Free(Var),
}

fn resolve(t: &Term, s: &Solution) -> Result<Slotted, EvalError> {
    match t {
        Term::Entity(e) => Ok(Slotted::Bound(*e)),
        Term::Var(v) => Ok(match s.get(v) {
            Some(e) => Slotted::Bound(*e),
            None => Slotted::Free(v.clone()),
        }),
        Term::Slot(sl) => Err(EvalError::UnfilledSlot(*sl)),
        Term::Property(_) => Err(EvalError::BadPredicate),
    }
}

fn extend(kg: &KnowledgeGraph, tp: &TriplePattern, s: &Solution, out: &mut Vec<Solution>) -> Result<(), EvalError> {
    let p = match &tp.predicate {
        Term::Property(p) => *p,
        Term::Slot(sl) => return Err(EvalError::UnfilledSlot(*sl)),
        _ => return Err(EvalError::BadPredicate),
    };
    let subj = resolve(&tp.subject, s)?;
    let obj = resolve(&tp.object, s)?;
    let candidates: &[Triple] = match (&subj, &obj) {
        (Slotted::Bound(a), Slotted::Bound(b)) => {
            if kg.contains(&Triple::new(*a, p, *b)) {
                out.push(s.clone());
            }
            return Ok(());
        }
        (Slotted::Bound(a), Slotted::Free(_)) => kg.by_subject_predicate(*a, p),
        (Slotted::Free(_), Slotted::Bound(b)) => kg.by_predicate_object(p, *b),
        (Slotted::Free(_), Slotted::Free(_)) => kg.by_predicate(p),
    };
    for t in candidates {
        let mut next = s.clone();
        match (&subj, &obj) {
            (Slotted::Free(a), Slotted::Free(b)) if a == b => {
                if t.subject != t.object {
                    continue;
                }
                next.insert(a.clone(), t.subject);
            }
            _ => {
                if let Slotted::Free(a) = &subj {
                    next.insert(a.clone(), t.subject);
                }
                if let Slotted::Free(b) = &obj {
                    next.insert(b.clone(), t.object);
                }
            }
        }
        out.push(next);
    }
    Ok(())
}
