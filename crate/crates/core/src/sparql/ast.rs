use std::collections::BTreeSet;
use std::fmt;

use crate::ids::{EntityId, PropertyId};

/// A query variable, stored without the leading `?`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(String);

impl Var {
    /// Names must match `[A-Za-z][A-Za-z0-9]*`.
    pub fn new(name: impl Into<String>) -> Option<Self> {
        let name = name.into();
        let mut chars = name.chars();
        let ok = chars.next().is_some_and(|c| c.is_ascii_alphabetic()) && chars.all(|c| c.is_ascii_alphanumeric());
        ok.then_some(Var(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "?{}", self.0)
    }
}

/// Shorthand for building variables in code; panics on an invalid name.
pub fn var(name: &str) -> Var {
    Var::new(name).unwrap_or_else(|| panic!("invalid variable name `{name}`"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SlotKind {
    Entity,
    Relation,
    Type,
    Value,
}

impl SlotKind {
    pub fn keyword(self) -> &'static str {
        match self {
            SlotKind::Entity => "ENTITY",
            SlotKind::Relation => "RELATION",
            SlotKind::Type => "TYPE",
            SlotKind::Value => "VALUE",
        }
    }
}

/// A template placeholder such as `ENTITY1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Slot {
    pub kind: SlotKind,
    pub ordinal: u32,
}

impl Slot {
    pub fn new(kind: SlotKind, ordinal: u32) -> Self {
        Slot { kind, ordinal }
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.kind.keyword(), self.ordinal)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(Var),
    Entity(EntityId),
    Property(PropertyId),
    /// Only present in template skeletons.
    Slot(Slot),
}

impl Term {
    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Term::Var(v) => Some(v),
            _ => None,
        }
    }
}

impl From<Var> for Term {
    fn from(v: Var) -> Self {
        Term::Var(v)
    }
}

impl From<EntityId> for Term {
    fn from(e: EntityId) -> Self {
        Term::Entity(e)
    }
}

impl From<PropertyId> for Term {
    fn from(p: PropertyId) -> Self {
        Term::Property(p)
    }
}

impl From<Slot> for Term {
    fn from(s: Slot) -> Self {
        Term::Slot(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TriplePattern {
    pub subject: Term,
    pub predicate: Term,
    pub object: Term,
}

impl TriplePattern {
    pub fn new(subject: impl Into<Term>, predicate: impl Into<Term>, object: impl Into<Term>) -> Self {
        TriplePattern {
            subject: subject.into(),
            predicate: predicate.into(),
            object: object.into(),
        }
    }

    pub fn terms(&self) -> [&Term; 3] {
        [&self.subject, &self.predicate, &self.object]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GroupPattern {
    Bgp(Vec<TriplePattern>),
    Union(Box<GroupPattern>, Box<GroupPattern>),
    Minus(Box<GroupPattern>, Box<GroupPattern>),
}

impl GroupPattern {
    pub fn union(left: GroupPattern, right: GroupPattern) -> Self {
        GroupPattern::Union(Box::new(left), Box::new(right))
    }

    pub fn minus(base: GroupPattern, removed: GroupPattern) -> Self {
        GroupPattern::Minus(Box::new(base), Box::new(removed))
    }

    /// Every triple pattern, left to right.
    pub fn patterns(&self) -> Vec<&TriplePattern> {
        let mut out = Vec::new();
        self.collect_patterns(&mut out);
        out
    }

    fn collect_patterns<'a>(&'a self, out: &mut Vec<&'a TriplePattern>) {
        match self {
            GroupPattern::Bgp(ps) => out.extend(ps.iter()),
            GroupPattern::Union(a, b) | GroupPattern::Minus(a, b) => {
                a.collect_patterns(out);
                b.collect_patterns(out);
            }
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.patterns()
            .into_iter()
            .flat_map(|p| p.terms())
            .filter_map(|t| t.as_var().cloned())
            .collect()
    }

    /// Apply `f` to every term in place.
    pub fn map_terms(&mut self, f: &mut impl FnMut(&mut Term)) {
        match self {
            GroupPattern::Bgp(ps) => {
                for p in ps {
                    f(&mut p.subject);
                    f(&mut p.predicate);
                    f(&mut p.object);
                }
            }
            GroupPattern::Union(a, b) | GroupPattern::Minus(a, b) => {
                a.map_terms(f);
                b.map_terms(f);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CountTarget {
    Star,
    Var(Var),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Comparator {
    Gt,
    Lt,
    Ge,
    Le,
    Eq,
    /// Within a tolerance of the threshold.
    Approx,
}

impl Comparator {
    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::Gt => ">",
            Comparator::Lt => "<",
            Comparator::Ge => ">=",
            Comparator::Le => "<=",
            Comparator::Eq => "=",
            Comparator::Approx => "~",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Self> {
        Some(match s {
            ">" => Comparator::Gt,
            "<" => Comparator::Lt,
            ">=" => Comparator::Ge,
            "<=" => Comparator::Le,
            "=" => Comparator::Eq,
            "~" => Comparator::Approx,
            _ => return None,
        })
    }

    /// `tolerance` only matters for [`Comparator::Approx`].
    pub fn holds(self, value: u64, threshold: u64, tolerance: u64) -> bool {
        match self {
            Comparator::Gt => value > threshold,
            Comparator::Lt => value < threshold,
            Comparator::Ge => value >= threshold,
            Comparator::Le => value <= threshold,
            Comparator::Eq => value == threshold,
            Comparator::Approx => value.abs_diff(threshold) <= tolerance,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Extremum {
    Min,
    Max,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Threshold {
    Literal(u64),
    Slot(Slot),
    /// A `SelectCount` query whose answer is the threshold.
    Count(Box<SparqlQuery>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GroupConstraint {
    Compare { op: Comparator, threshold: Threshold },
    Extremum(Extremum),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GroupOutput {
    /// The group keys that pass.
    Entities,
    /// How many groups pass, bound to `alias`.
    Count { alias: Var },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum QueryForm {
    SelectEntities {
        var: Var,
        distinct: bool,
    },
    SelectCount {
        target: CountTarget,
        distinct: bool,
        alias: Var,
    },
    Ask,
    /// Solutions grouped by `var`; each group is measured by counting
    /// `counted` and kept when it satisfies `constraint`.
    SelectGrouped {
        var: Var,
        output: GroupOutput,
        counted: Var,
        distinct: bool,
        constraint: GroupConstraint,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SparqlQuery {
    pub form: QueryForm,
    pub pattern: GroupPattern,
}

/// Structural problems that make a query fall outside the fragment.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AstError {
    #[error("empty basic graph pattern")]
    EmptyBgp,
    #[error("predicate position must hold a property, found {0}")]
    BadPredicate(String),
    #[error("subject/object position cannot hold property {0}")]
    PropertyAsNode(String),
    #[error("projected variable {0} does not occur in the WHERE clause")]
    UnboundProjection(Var),
    #[error("a count threshold must be a COUNT query")]
    ThresholdNotCount,
    #[error("slot {0} has the wrong kind for its position")]
    MisplacedSlot(Slot),
}

impl SparqlQuery {
    pub fn new(form: QueryForm, pattern: GroupPattern) -> Self {
        SparqlQuery { form, pattern }
    }

    pub fn select(var: Var, patterns: Vec<TriplePattern>) -> Self {
        SparqlQuery::new(QueryForm::SelectEntities { var, distinct: false }, GroupPattern::Bgp(patterns))
    }

    pub fn ask(patterns: Vec<TriplePattern>) -> Self {
        SparqlQuery::new(QueryForm::Ask, GroupPattern::Bgp(patterns))
    }

    /// Check the fragment invariants.
    pub fn validate(&self) -> Result<(), AstError> {
        validate_pattern(&self.pattern)?;
        let vars = self.pattern.vars();
        let need = |v: &Var| {
            if vars.contains(v) {
                Ok(())
            } else {
                Err(AstError::UnboundProjection(v.clone()))
            }
        };
        match &self.form {
            QueryForm::SelectEntities { var, .. } => need(var)?,
            QueryForm::SelectCount { target, .. } => {
                if let CountTarget::Var(v) = target {
                    need(v)?;
                }
            }
            QueryForm::Ask => {}
            QueryForm::SelectGrouped {
                var,
                counted,
                constraint,
                ..
            } => {
                need(var)?;
                need(counted)?;
                if let GroupConstraint::Compare { threshold, .. } = constraint {
                    match threshold {
                        Threshold::Count(q) => {
                            if !matches!(q.form, QueryForm::SelectCount { .. }) {
                                return Err(AstError::ThresholdNotCount);
                            }
                            q.validate()?;
                        }
                        Threshold::Slot(s) if s.kind != SlotKind::Value => return Err(AstError::MisplacedSlot(*s)),
                        _ => {}
                    }
                }
            }
        }
        Ok(())
    }

    /// Slots anywhere in the query, including a threshold sub-query.
    pub fn slots(&self) -> BTreeSet<Slot> {
        let mut out: BTreeSet<Slot> = self
            .pattern
            .patterns()
            .into_iter()
            .flat_map(|p| p.terms())
            .filter_map(|t| match t {
                Term::Slot(s) => Some(*s),
                _ => None,
            })
            .collect();
        if let QueryForm::SelectGrouped {
            constraint: GroupConstraint::Compare { threshold, .. },
            ..
        } = &self.form
        {
            match threshold {
                Threshold::Slot(s) => {
                    out.insert(*s);
                }
                Threshold::Count(q) => out.extend(q.slots()),
                Threshold::Literal(_) => {}
            }
        }
        out
    }

    pub fn entities(&self) -> BTreeSet<EntityId> {
        let mut out = BTreeSet::new();
        self.visit_terms(&mut |t| {
            if let Term::Entity(e) = t {
                out.insert(*e);
            }
        });
        out
    }

    pub fn properties(&self) -> BTreeSet<PropertyId> {
        let mut out = BTreeSet::new();
        self.visit_terms(&mut |t| {
            if let Term::Property(p) = t {
                out.insert(*p);
            }
        });
        out
    }

    /// Visit every triple pattern, including those of a threshold sub-query.
    pub fn visit_patterns(&self, f: &mut impl FnMut(&TriplePattern)) {
        for p in self.pattern.patterns() {
            f(p);
        }
        if let Some(sub) = self.threshold_query() {
            sub.visit_patterns(f);
        }
    }

    /// Visit every term, including those of a threshold sub-query.
    pub fn visit_terms(&self, f: &mut impl FnMut(&Term)) {
        for p in self.pattern.patterns() {
            for t in p.terms() {
                f(t);
            }
        }
        if let Some(sub) = self.threshold_query() {
            sub.visit_terms(f);
        }
    }

    /// Rewrite every term, including those of a threshold sub-query.
    pub fn map_terms(&mut self, f: &mut impl FnMut(&mut Term)) {
        self.pattern.map_terms(f);
        if let QueryForm::SelectGrouped {
            constraint:
                GroupConstraint::Compare {
                    threshold: Threshold::Count(q),
                    ..
                },
            ..
        } = &mut self.form
        {
            q.map_terms(f);
        }
    }

    pub fn threshold_query(&self) -> Option<&SparqlQuery> {
        match &self.form {
            QueryForm::SelectGrouped {
                constraint:
                    GroupConstraint::Compare {
                        threshold: Threshold::Count(q),
                        ..
                    },
                ..
            } => Some(q),
            _ => None,
        }
    }
}

fn validate_pattern(p: &GroupPattern) -> Result<(), AstError> {
    match p {
        GroupPattern::Bgp(ps) => {
            if ps.is_empty() {
                return Err(AstError::EmptyBgp);
            }
            for tp in ps {
                match &tp.predicate {
                    Term::Property(_) => {}
                    Term::Slot(s) if s.kind == SlotKind::Relation => {}
                    Term::Slot(s) => return Err(AstError::MisplacedSlot(*s)),
                    other => return Err(AstError::BadPredicate(format!("{other:?}"))),
                }
                for node in [&tp.subject, &tp.object] {
                    match node {
                        Term::Property(p) => return Err(AstError::PropertyAsNode(p.to_string())),
                        Term::Slot(s) if !matches!(s.kind, SlotKind::Entity | SlotKind::Type) => {
                            return Err(AstError::MisplacedSlot(*s))
                        }
                        _ => {}
                    }
                }
            }
            Ok(())
        }
        GroupPattern::Union(a, b) | GroupPattern::Minus(a, b) => {
            validate_pattern(a)?;
            validate_pattern(b)
        }
    }
}
