//! Compilation of action programs into the query fragment.
//!
//! Every set expression compiles to a group pattern whose only variable is
//! `?x`. Type filters and intersections are pushed into each union branch
//! and into the base of each `MINUS`, so the result never needs a join of
//! group patterns.

use super::{Action, CountMap, Number, Selection, SetExpr};
use crate::ids::{EntityId, P31};
use crate::sparql::*;

fn x() -> Var {
    var("x")
}

/// Pattern binding `?x` to the members of `s`.
pub(crate) fn set_pattern(s: &SetExpr) -> GroupPattern {
    match s {
        SetExpr::Find(e, r) => GroupPattern::Bgp(vec![TriplePattern::new(*e, *r, x())]),
        SetExpr::FindRev(e, r) => GroupPattern::Bgp(vec![TriplePattern::new(x(), *r, *e)]),
        SetExpr::FilterType(s, ty) => conjoin(
            set_pattern(s),
            &GroupPattern::Bgp(vec![TriplePattern::new(x(), P31, *ty)]),
        ),
        SetExpr::Union(a, b) => GroupPattern::union(set_pattern(a), set_pattern(b)),
        SetExpr::Intersection(a, b) => conjoin(set_pattern(a), &set_pattern(b)),
        SetExpr::Difference(a, b) => GroupPattern::minus(set_pattern(a), set_pattern(b)),
    }
}

/// Conjunction, distributed over unions and into minus bases.
fn conjoin(a: GroupPattern, b: &GroupPattern) -> GroupPattern {
    match a {
        GroupPattern::Union(l, r) => GroupPattern::union(conjoin(*l, b), conjoin(*r, b)),
        GroupPattern::Minus(base, removed) => GroupPattern::minus(conjoin(*base, b), *removed),
        GroupPattern::Bgp(mut ps) => match b {
            GroupPattern::Bgp(qs) => {
                ps.extend(qs.iter().cloned());
                GroupPattern::Bgp(ps)
            }
            GroupPattern::Union(l, r) => GroupPattern::union(
                conjoin(GroupPattern::Bgp(ps.clone()), l),
                conjoin(GroupPattern::Bgp(ps), r),
            ),
            GroupPattern::Minus(base, removed) => {
                GroupPattern::minus(conjoin(GroupPattern::Bgp(ps), base), (**removed).clone())
            }
        },
    }
}

fn substitute(p: &mut GroupPattern, e: EntityId) {
    let target = x();
    p.map_terms(&mut |t| {
        if t.as_var() == Some(&target) {
            *t = Term::Entity(e);
        }
    });
}

fn count_pattern(m: &CountMap) -> GroupPattern {
    let y = var("y");
    let edge = if m.reverse {
        TriplePattern::new(y.clone(), m.relation, x())
    } else {
        TriplePattern::new(x(), m.relation, y.clone())
    };
    GroupPattern::Bgp(vec![
        edge,
        TriplePattern::new(x(), P31, m.key_type),
        TriplePattern::new(y, P31, m.member_type),
    ])
}

fn count_query(s: &SetExpr) -> SparqlQuery {
    SparqlQuery::new(
        QueryForm::SelectCount {
            target: CountTarget::Var(x()),
            distinct: true,
            alias: var("count"),
        },
        set_pattern(s),
    )
}

fn grouped(sel: &Selection, output: GroupOutput) -> SparqlQuery {
    let constraint = match sel {
        Selection::Compare { op, n, .. } => GroupConstraint::Compare {
            op: *op,
            threshold: match n {
                Number::Literal(v) => Threshold::Literal(*v),
                Number::Count(s) => Threshold::Count(Box::new(count_query(s))),
            },
        },
        Selection::Extremum { ext, .. } => GroupConstraint::Extremum(*ext),
    };
    SparqlQuery::new(
        QueryForm::SelectGrouped {
            var: x(),
            output,
            counted: var("y"),
            distinct: true,
            constraint,
        },
        count_pattern(sel.map()),
    )
}

pub fn compile_to_sparql(a: &Action) -> SparqlQuery {
    match a {
        Action::Set(s) => SparqlQuery::new(
            QueryForm::SelectEntities {
                var: x(),
                distinct: false,
            },
            set_pattern(s),
        ),
        Action::Count(s) => count_query(s),
        Action::IsIn(e, s) => {
            let mut p = set_pattern(s);
            substitute(&mut p, *e);
            SparqlQuery::new(QueryForm::Ask, p)
        }
        Action::Select(sel) => grouped(sel, GroupOutput::Entities),
        Action::CountSelected(sel) => grouped(sel, GroupOutput::Count { alias: var("count") }),
    }
}
