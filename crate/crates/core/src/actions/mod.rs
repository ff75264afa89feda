//! Action grammar: prefix-notation programs over KG symbols.
//!
//! Inventory (arity in brackets):
//!
//! | token | operands | result |
//! |-------|----------|--------|
//! | `find` | entity, relation | `{x \| (e, r, x)}` |
//! | `find_rev` | entity, relation | `{x \| (x, r, e)}` |
//! | `filter_type` | set, type | members of the set with that class |
//! | `union`, `intersection`, `difference` | set, set | set algebra |
//! | `count` | set or grouped selection | number of members |
//! | `is_in` | entity, set | membership |
//! | `count_by`, `count_by_rev` | relation, key type, member type | per-key neighbour counts |
//! | `greater`, `less`, `equal`, `atleast`, `atmost`, `approx` | count map, number | keys passing the comparison |
//! | `argmax`, `argmin` | count map | key with the largest or smallest count |
//!
//! A number is an integer literal or `count` of a set. Count maps and the
//! selections built from them are only allowed at the top of a program (or
//! under a top-level `count`), which is what the query fragment can express.
//!
//! ```
//! use convkgqa::actions::Action;
//!
//! let a: Action = "[filter_type, find_rev, Q650855,P1923,Q500834]".parse().unwrap();
//! assert_eq!(a.to_string(), "[filter_type, find_rev, Q650855, P1923, Q500834]");
//! ```

mod compile;
mod interpret;
mod search;

pub use compile::compile_to_sparql;
pub use interpret::{interpret, interpret_with};
pub use search::{search_annotation, SearchSymbols};

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::ids::{EntityId, PropertyId, TypeId};
use crate::sparql::{Comparator, Extremum};

/// An expression denoting a set of entities.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SetExpr {
    Find(EntityId, PropertyId),
    FindRev(EntityId, PropertyId),
    FilterType(Box<SetExpr>, TypeId),
    Union(Box<SetExpr>, Box<SetExpr>),
    Intersection(Box<SetExpr>, Box<SetExpr>),
    Difference(Box<SetExpr>, Box<SetExpr>),
}

/// For every entity of `key_type`, the number of distinct `member_type`
/// entities it reaches through `relation` (against the edge when `reverse`).
/// Keys with a zero count are not part of the map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CountMap {
    pub reverse: bool,
    pub relation: PropertyId,
    pub key_type: TypeId,
    pub member_type: TypeId,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Number {
    Literal(u64),
    Count(SetExpr),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Selection {
    Compare { op: Comparator, map: CountMap, n: Number },
    Extremum { ext: Extremum, map: CountMap },
}

/// A complete, well-typed program.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    Set(SetExpr),
    Count(SetExpr),
    IsIn(EntityId, SetExpr),
    Select(Selection),
    CountSelected(Selection),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ActionError {
    #[error("empty action sequence")]
    Empty,
    #[error("token {at}: unknown action `{token}`")]
    UnknownAction { at: usize, token: String },
    #[error("`{action}` needs {expected} but the sequence ended")]
    Arity { action: String, expected: String },
    #[error("token {at}: expected {expected}, found `{found}`")]
    Expected { at: usize, expected: String, found: String },
    #[error("token {at}: trailing tokens after a complete program")]
    Trailing { at: usize },
}

const SET_ACTIONS: &[&str] = &["find", "find_rev", "filter_type", "union", "intersection", "difference"];
const SELECT_ACTIONS: &[&str] = &["greater", "less", "equal", "atleast", "atmost", "approx", "argmax", "argmin"];
const OTHER_ACTIONS: &[&str] = &["count", "is_in", "count_by", "count_by_rev"];

fn comparator_token(op: Comparator) -> &'static str {
    match op {
        Comparator::Gt => "greater",
        Comparator::Lt => "less",
        Comparator::Eq => "equal",
        Comparator::Ge => "atleast",
        Comparator::Le => "atmost",
        Comparator::Approx => "approx",
    }
}

fn comparator_of(token: &str) -> Option<Comparator> {
    Some(match token {
        "greater" => Comparator::Gt,
        "less" => Comparator::Lt,
        "equal" => Comparator::Eq,
        "atleast" => Comparator::Ge,
        "atmost" => Comparator::Le,
        "approx" => Comparator::Approx,
        _ => return None,
    })
}

/// Is `token` one of the action names?
pub fn is_action_name(token: &str) -> bool {
    SET_ACTIONS.contains(&token) || SELECT_ACTIONS.contains(&token) || OTHER_ACTIONS.contains(&token)
}

struct Reader<'a> {
    tokens: &'a [String],
    at: usize,
    /// Name of the innermost action being read, for arity messages.
    context: String,
}

impl<'a> Reader<'a> {
    fn next(&mut self, expected: &str) -> Result<(usize, &'a str), ActionError> {
        match self.tokens.get(self.at) {
            Some(t) => {
                self.at += 1;
                Ok((self.at - 1, t.as_str()))
            }
            None => Err(ActionError::Arity {
                action: self.context.clone(),
                expected: expected.to_string(),
            }),
        }
    }

    fn peek(&self) -> Option<&'a str> {
        self.tokens.get(self.at).map(String::as_str)
    }

    fn expected(at: usize, expected: &str, found: &str) -> ActionError {
        if !is_action_name(found) && found.chars().all(|c| c.is_ascii_lowercase() || c == '_') {
            return ActionError::UnknownAction {
                at,
                token: found.to_string(),
            };
        }
        ActionError::Expected {
            at,
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    fn entity(&mut self) -> Result<EntityId, ActionError> {
        let (at, t) = self.next("an entity")?;
        EntityId::parse(t).map_err(|_| Self::expected(at, "an entity", t))
    }

    fn type_id(&mut self) -> Result<TypeId, ActionError> {
        let (at, t) = self.next("a type")?;
        EntityId::parse(t).map_err(|_| Self::expected(at, "a type", t))
    }

    fn relation(&mut self) -> Result<PropertyId, ActionError> {
        let (at, t) = self.next("a relation")?;
        PropertyId::parse(t).map_err(|_| Self::expected(at, "a relation", t))
    }

    fn set(&mut self) -> Result<SetExpr, ActionError> {
        let (at, t) = self.next("a set expression")?;
        let outer = std::mem::replace(&mut self.context, t.to_string());
        let out = match t {
            "find" => SetExpr::Find(self.entity()?, self.relation()?),
            "find_rev" => SetExpr::FindRev(self.entity()?, self.relation()?),
            "filter_type" => {
                let s = self.set()?;
                SetExpr::FilterType(Box::new(s), self.type_id()?)
            }
            "union" | "intersection" | "difference" => {
                let a = Box::new(self.set()?);
                let b = Box::new(self.set()?);
                match t {
                    "union" => SetExpr::Union(a, b),
                    "intersection" => SetExpr::Intersection(a, b),
                    _ => SetExpr::Difference(a, b),
                }
            }
            _ => return Err(Self::expected(at, "a set expression", t)),
        };
        self.context = outer;
        Ok(out)
    }

    fn count_map(&mut self) -> Result<CountMap, ActionError> {
        let (at, t) = self.next("a count map")?;
        let reverse = match t {
            "count_by" => false,
            "count_by_rev" => true,
            _ => return Err(Self::expected(at, "`count_by` or `count_by_rev`", t)),
        };
        let outer = std::mem::replace(&mut self.context, t.to_string());
        let map = CountMap {
            reverse,
            relation: self.relation()?,
            key_type: self.type_id()?,
            member_type: self.type_id()?,
        };
        self.context = outer;
        Ok(map)
    }

    fn number(&mut self) -> Result<Number, ActionError> {
        match self.peek() {
            Some("count") => {
                self.at += 1;
                Ok(Number::Count(self.set()?))
            }
            _ => {
                let (at, t) = self.next("a number")?;
                t.parse().map(Number::Literal).map_err(|_| Self::expected(at, "a number", t))
            }
        }
    }

    fn selection(&mut self) -> Result<Selection, ActionError> {
        let (at, t) = self.next("a selection")?;
        let outer = std::mem::replace(&mut self.context, t.to_string());
        let out = if let Some(op) = comparator_of(t) {
            let map = self.count_map()?;
            Selection::Compare {
                op,
                map,
                n: self.number()?,
            }
        } else {
            match t {
                "argmax" => Selection::Extremum {
                    ext: Extremum::Max,
                    map: self.count_map()?,
                },
                "argmin" => Selection::Extremum {
                    ext: Extremum::Min,
                    map: self.count_map()?,
                },
                _ => return Err(Self::expected(at, "a selection", t)),
            }
        };
        self.context = outer;
        Ok(out)
    }

    fn action(&mut self) -> Result<Action, ActionError> {
        let Some(first) = self.peek() else {
            return Err(ActionError::Empty);
        };
        if SELECT_ACTIONS.contains(&first) {
            return Ok(Action::Select(self.selection()?));
        }
        match first {
            "count" => {
                self.at += 1;
                self.context = "count".into();
                if self.peek().is_some_and(|t| SELECT_ACTIONS.contains(&t)) {
                    Ok(Action::CountSelected(self.selection()?))
                } else {
                    Ok(Action::Count(self.set()?))
                }
            }
            "is_in" => {
                self.at += 1;
                self.context = "is_in".into();
                let e = self.entity()?;
                Ok(Action::IsIn(e, self.set()?))
            }
            _ => Ok(Action::Set(self.set()?)),
        }
    }
}

/// Parse a prefix-notation token list.
pub fn parse_actions<S: AsRef<str>>(tokens: &[S]) -> Result<Action, ActionError> {
    let tokens: Vec<String> = tokens.iter().map(|t| t.as_ref().trim().to_string()).collect();
    if tokens.is_empty() {
        return Err(ActionError::Empty);
    }
    let mut r = Reader {
        tokens: &tokens,
        at: 0,
        context: String::new(),
    };
    let a = r.action()?;
    if r.at != tokens.len() {
        return Err(ActionError::Trailing { at: r.at });
    }
    Ok(a)
}

/// Split `[a, b, c]` (brackets optional) into tokens.
pub fn split_tokens(text: &str) -> Vec<String> {
    let inner = text.trim();
    let inner = inner.strip_prefix('[').unwrap_or(inner);
    let inner = inner.strip_suffix(']').unwrap_or(inner);
    inner
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

impl FromStr for Action {
    type Err = ActionError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_actions(&split_tokens(s))
    }
}

impl SetExpr {
    pub fn write_tokens(&self, out: &mut Vec<String>) {
        match self {
            SetExpr::Find(e, r) => out.extend(["find".into(), e.to_string(), r.to_string()]),
            SetExpr::FindRev(e, r) => out.extend(["find_rev".into(), e.to_string(), r.to_string()]),
            SetExpr::FilterType(s, t) => {
                out.push("filter_type".into());
                s.write_tokens(out);
                out.push(t.to_string());
            }
            SetExpr::Union(a, b) | SetExpr::Intersection(a, b) | SetExpr::Difference(a, b) => {
                out.push(
                    match self {
                        SetExpr::Union(..) => "union",
                        SetExpr::Intersection(..) => "intersection",
                        _ => "difference",
                    }
                    .into(),
                );
                a.write_tokens(out);
                b.write_tokens(out);
            }
        }
    }

    pub fn size(&self) -> usize {
        match self {
            SetExpr::Find(..) | SetExpr::FindRev(..) => 3,
            SetExpr::FilterType(s, _) => 2 + s.size(),
            SetExpr::Union(a, b) | SetExpr::Intersection(a, b) | SetExpr::Difference(a, b) => 1 + a.size() + b.size(),
        }
    }
}

impl CountMap {
    fn write_tokens(&self, out: &mut Vec<String>) {
        out.push(if self.reverse { "count_by_rev" } else { "count_by" }.into());
        out.extend([self.relation.to_string(), self.key_type.to_string(), self.member_type.to_string()]);
    }
}

impl Number {
    fn write_tokens(&self, out: &mut Vec<String>) {
        match self {
            Number::Literal(n) => out.push(n.to_string()),
            Number::Count(s) => {
                out.push("count".into());
                s.write_tokens(out);
            }
        }
    }
}

impl Selection {
    fn write_tokens(&self, out: &mut Vec<String>) {
        match self {
            Selection::Compare { op, map, n } => {
                out.push(comparator_token(*op).into());
                map.write_tokens(out);
                n.write_tokens(out);
            }
            Selection::Extremum { ext, map } => {
                out.push(if *ext == Extremum::Max { "argmax" } else { "argmin" }.into());
                map.write_tokens(out);
            }
        }
    }

    pub fn map(&self) -> &CountMap {
        match self {
            Selection::Compare { map, .. } | Selection::Extremum { map, .. } => map,
        }
    }
}

impl Action {
    pub fn tokens(&self) -> Vec<String> {
        let mut out = Vec::new();
        match self {
            Action::Set(s) => s.write_tokens(&mut out),
            Action::Count(s) => {
                out.push("count".into());
                s.write_tokens(&mut out);
            }
            Action::IsIn(e, s) => {
                out.extend(["is_in".into(), e.to_string()]);
                s.write_tokens(&mut out);
            }
            Action::Select(sel) => sel.write_tokens(&mut out),
            Action::CountSelected(sel) => {
                out.push("count".into());
                sel.write_tokens(&mut out);
            }
        }
        out
    }

    /// Node count, equal to the token count.
    pub fn size(&self) -> usize {
        self.tokens().len()
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.tokens().join(", "))
    }
}

#[cfg(test)]
mod tests;
