use std::collections::{BTreeMap, BTreeSet};

use super::{Action, CountMap, Number, Selection, SetExpr};
use crate::ids::EntityId;
use crate::kg::KnowledgeGraph;
use crate::sparql::{Answer, EvalOptions, Extremum};

pub fn interpret(kg: &KnowledgeGraph, a: &Action) -> Answer {
    interpret_with(kg, a, &EvalOptions::default())
}

pub fn interpret_with(kg: &KnowledgeGraph, a: &Action, opts: &EvalOptions) -> Answer {
    match a {
        Action::Set(s) => Answer::EntitySet(denote(kg, s)),
        Action::Count(s) => Answer::Count(denote(kg, s).len() as u64),
        Action::IsIn(e, s) => Answer::Boolean(denote(kg, s).contains(e)),
        Action::Select(sel) => Answer::EntitySet(select(kg, sel, opts)),
        Action::CountSelected(sel) => Answer::Count(select(kg, sel, opts).len() as u64),
    }
}

pub(crate) fn denote(kg: &KnowledgeGraph, s: &SetExpr) -> BTreeSet<EntityId> {
    match s {
        SetExpr::Find(e, r) => kg.by_subject_predicate(*e, *r).iter().map(|t| t.object).collect(),
        SetExpr::FindRev(e, r) => kg.by_predicate_object(*r, *e).iter().map(|t| t.subject).collect(),
        SetExpr::FilterType(s, ty) => denote(kg, s).into_iter().filter(|x| kg.has_type(*x, *ty)).collect(),
        SetExpr::Union(a, b) => &denote(kg, a) | &denote(kg, b),
        SetExpr::Intersection(a, b) => &denote(kg, a) & &denote(kg, b),
        SetExpr::Difference(a, b) => &denote(kg, a) - &denote(kg, b),
    }
}

pub(crate) fn count_map(kg: &KnowledgeGraph, m: &CountMap) -> BTreeMap<EntityId, u64> {
    let mut out = BTreeMap::new();
    for key in kg.instances_of(m.key_type) {
        let reached: BTreeSet<EntityId> = if m.reverse {
            kg.by_predicate_object(m.relation, key).iter().map(|t| t.subject).collect()
        } else {
            kg.by_subject_predicate(key, m.relation).iter().map(|t| t.object).collect()
        };
        let n = reached.into_iter().filter(|y| kg.has_type(*y, m.member_type)).count() as u64;
        if n > 0 {
            out.insert(key, n);
        }
    }
    out
}

pub(crate) fn select(kg: &KnowledgeGraph, sel: &Selection, opts: &EvalOptions) -> BTreeSet<EntityId> {
    let counts = count_map(kg, sel.map());
    match sel {
        Selection::Compare { op, n, .. } => {
            let t = match n {
                Number::Literal(v) => *v,
                Number::Count(s) => denote(kg, s).len() as u64,
            };
            let tol = opts.tolerance(t);
            counts.into_iter().filter(|(_, c)| op.holds(*c, t, tol)).map(|(k, _)| k).collect()
        }
        Selection::Extremum { ext, .. } => {
            let best = match ext {
                Extremum::Max => counts.values().max(),
                Extremum::Min => counts.values().min(),
            };
            best.and_then(|b| counts.iter().find(|(_, c)| *c == b).map(|(k, _)| *k))
                .into_iter()
                .collect()
        }
    }
}
