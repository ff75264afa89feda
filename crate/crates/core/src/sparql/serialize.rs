//! Single-line text rendering of queries.
//!
//! Strict mode keeps variable names; canonical mode renames variables to
//! `?v0`, `?v1`, ... in order of first appearance. Both keep pattern order.

use std::collections::HashMap;
use std::fmt::{self, Write};

use super::ast::*;
use super::parser::{WDT_NS, WD_NS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SerializeMode {
    #[default]
    Strict,
    Canonical,
}

pub fn serialize(q: &SparqlQuery, mode: SerializeMode) -> String {
    match mode {
        SerializeMode::Strict => q.to_string(),
        SerializeMode::Canonical => canonicalize(q).to_string(),
    }
}

/// Strict rendering preceded by the `PREFIX` declarations, for files.
pub fn serialize_with_prefixes(q: &SparqlQuery) -> String {
    format!("PREFIX wd: <{WD_NS}> PREFIX wdt: <{WDT_NS}> {q}")
}

/// Rename variables by first appearance in serialization order.
pub fn canonicalize(q: &SparqlQuery) -> SparqlQuery {
    let mut order: Vec<Var> = Vec::new();
    collect_vars(q, &mut order);
    let names: HashMap<Var, Var> = order
        .into_iter()
        .enumerate()
        .map(|(i, v)| (v, var(&format!("v{i}"))))
        .collect();
    rename(q, &names)
}

fn note(v: &Var, order: &mut Vec<Var>) {
    if !order.contains(v) {
        order.push(v.clone());
    }
}

fn collect_vars(q: &SparqlQuery, order: &mut Vec<Var>) {
    match &q.form {
        QueryForm::SelectEntities { var, .. } => note(var, order),
        QueryForm::SelectCount { target, alias, .. } => {
            if let CountTarget::Var(v) = target {
                note(v, order);
            }
            note(alias, order);
        }
        QueryForm::Ask => {}
        QueryForm::SelectGrouped { var, output, .. } => {
            note(var, order);
            if let GroupOutput::Count { alias } = output {
                note(alias, order);
            }
        }
    }
    for p in q.pattern.patterns() {
        for t in p.terms() {
            if let Term::Var(v) = t {
                note(v, order);
            }
        }
    }
    if let QueryForm::SelectGrouped {
        var, counted, constraint, ..
    } = &q.form
    {
        note(var, order);
        note(counted, order);
        if let GroupConstraint::Compare {
            threshold: Threshold::Count(sub),
            ..
        } = constraint
        {
            collect_vars(sub, order);
        }
    }
}

fn rename(q: &SparqlQuery, names: &HashMap<Var, Var>) -> SparqlQuery {
    let r = |v: &Var| names.get(v).cloned().unwrap_or_else(|| v.clone());
    let form = match &q.form {
        QueryForm::SelectEntities { var, distinct } => QueryForm::SelectEntities {
            var: r(var),
            distinct: *distinct,
        },
        QueryForm::SelectCount {
            target,
            distinct,
            alias,
        } => QueryForm::SelectCount {
            target: match target {
                CountTarget::Star => CountTarget::Star,
                CountTarget::Var(v) => CountTarget::Var(r(v)),
            },
            distinct: *distinct,
            alias: r(alias),
        },
        QueryForm::Ask => QueryForm::Ask,
        QueryForm::SelectGrouped {
            var,
            output,
            counted,
            distinct,
            constraint,
        } => QueryForm::SelectGrouped {
            var: r(var),
            output: match output {
                GroupOutput::Entities => GroupOutput::Entities,
                GroupOutput::Count { alias } => GroupOutput::Count { alias: r(alias) },
            },
            counted: r(counted),
            distinct: *distinct,
            constraint: match constraint {
                GroupConstraint::Compare {
                    op,
                    threshold: Threshold::Count(sub),
                } => GroupConstraint::Compare {
                    op: *op,
                    threshold: Threshold::Count(Box::new(rename(sub, names))),
                },
                other => other.clone(),
            },
        },
    };
    let mut pattern = q.pattern.clone();
    pattern.map_terms(&mut |t| {
        if let Term::Var(v) = t {
            *v = r(v);
        }
    });
    SparqlQuery { form, pattern }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Entity(e) => write!(f, "wd:{e}"),
            Term::Property(p) => write!(f, "wdt:{p}"),
            Term::Slot(s) => write!(f, "{s}"),
        }
    }
}

impl fmt::Display for TriplePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}

fn write_body(p: &GroupPattern, out: &mut String) {
    match p {
        GroupPattern::Bgp(ps) => {
            for (i, tp) in ps.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "{tp}");
            }
        }
        GroupPattern::Union(a, b) => {
            // a left-nested union prints as a flat chain
            if matches!(**a, GroupPattern::Union(..)) {
                write_body(a, out);
            } else {
                write_braced(a, out);
            }
            out.push_str(" UNION ");
            write_braced(b, out);
        }
        GroupPattern::Minus(base, removed) => {
            write_body(base, out);
            out.push_str(" MINUS ");
            write_braced(removed, out);
        }
    }
}

fn write_braced(p: &GroupPattern, out: &mut String) {
    out.push_str("{ ");
    write_body(p, out);
    out.push_str(" }");
}

impl fmt::Display for GroupPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        write_braced(self, &mut out);
        f.write_str(&out)
    }
}

fn count_expr(target: &CountTarget, distinct: bool) -> String {
    let d = if distinct { "DISTINCT " } else { "" };
    match target {
        CountTarget::Star => format!("COUNT({d}*)"),
        CountTarget::Var(v) => format!("COUNT({d}{v})"),
    }
}

impl fmt::Display for SparqlQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.form {
            QueryForm::SelectEntities { var, distinct } => {
                let d = if *distinct { "DISTINCT " } else { "" };
                write!(f, "SELECT {d}{var} WHERE {}", self.pattern)
            }
            QueryForm::SelectCount {
                target,
                distinct,
                alias,
            } => write!(
                f,
                "SELECT ({} AS {alias}) WHERE {}",
                count_expr(target, *distinct),
                self.pattern
            ),
            QueryForm::Ask => write!(f, "ASK {}", self.pattern),
            QueryForm::SelectGrouped {
                var,
                output,
                counted,
                distinct,
                constraint,
            } => {
                match output {
                    GroupOutput::Entities => write!(f, "SELECT {var}")?,
                    GroupOutput::Count { alias } => write!(f, "SELECT (COUNT(DISTINCT {var}) AS {alias})")?,
                }
                write!(f, " WHERE {} GROUP BY {var} ", self.pattern)?;
                let agg = count_expr(&CountTarget::Var(counted.clone()), *distinct);
                match constraint {
                    GroupConstraint::Compare { op, threshold } => {
                        write!(f, "HAVING ({agg} {} ", op.symbol())?;
                        match threshold {
                            Threshold::Literal(n) => write!(f, "{n}")?,
                            Threshold::Slot(s) => write!(f, "{s}")?,
                            Threshold::Count(sub) => write!(f, "({sub})")?,
                        }
                        f.write_str(")")
                    }
                    GroupConstraint::Extremum(Extremum::Max) => write!(f, "ORDER BY DESC({agg}) LIMIT 1"),
                    GroupConstraint::Extremum(Extremum::Min) => write!(f, "ORDER BY ASC({agg}) LIMIT 1"),
                }
            }
        }
    }
}
