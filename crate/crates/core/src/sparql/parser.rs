//! Hand-written lexer and recursive-descent parser for the query fragment.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use super::ast::*;
use crate::ids::{EntityId, PropertyId};

pub const WD_NS: &str = "http://www.wikidata.org/entity/";
pub const WDT_NS: &str = "http://www.wikidata.org/prop/direct/";

/// Line and column are 1-based; `offset` is a byte offset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Position {
    pub offset: usize,
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{position}: unexpected {found}, expected one of: {}", expected.join(", "))]
    Unexpected {
        position: Position,
        found: String,
        expected: Vec<String>,
    },
    #[error("{position}: invalid token `{text}`")]
    Lexical { position: Position, text: String },
    #[error("{position}: unsupported construct: {construct}")]
    Unsupported { position: Position, construct: String },
    #[error("{position}: {message}")]
    Invalid { position: Position, message: String },
}

impl ParseError {
    pub fn position(&self) -> Position {
        match self {
            ParseError::Unexpected { position, .. }
            | ParseError::Lexical { position, .. }
            | ParseError::Unsupported { position, .. }
            | ParseError::Invalid { position, .. } => *position,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Word(String),
    Var(String),
    PName(String, String),
    Iri(String),
    Int(u64),
    Punct(&'static str),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Word(w) => format!("`{w}`"),
            Tok::Var(v) => format!("variable `?{v}`"),
            Tok::PName(p, l) => format!("`{p}:{l}`"),
            Tok::Iri(i) => format!("`<{i}>`"),
            Tok::Int(n) => format!("integer `{n}`"),
            Tok::Punct(p) => format!("`{p}`"),
            Tok::Eof => "end of input".to_string(),
        }
    }

    fn is_word(&self, kw: &str) -> bool {
        matches!(self, Tok::Word(w) if w.eq_ignore_ascii_case(kw))
    }
}

const UNSUPPORTED_WORDS: &[&str] = &[
    "OPTIONAL", "FILTER", "BIND", "VALUES", "SERVICE", "GRAPH", "CONSTRUCT", "DESCRIBE", "OFFSET", "REDUCED",
    "FROM", "NAMED", "BASE", "INSERT", "DELETE", "SUM", "AVG", "MIN", "MAX", "SAMPLE", "GROUP_CONCAT", "EXISTS",
    "NOT",
];

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

fn position_of(src: &str, offset: usize) -> Position {
    let before = &src[..offset];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |s| s.chars().count()) + 1;
    Position { offset, line, column }
}

impl<'a> Lexer<'a> {
    fn tokenize(src: &'a str) -> Result<Vec<(Tok, usize)>, ParseError> {
        let mut lx = Lexer { src, pos: 0 };
        let mut out = Vec::new();
        loop {
            lx.skip_ws();
            let start = lx.pos;
            let tok = lx.next_tok()?;
            let done = tok == Tok::Eof;
            out.push((tok, start));
            if done {
                return Ok(out);
            }
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        loop {
            let rest = self.rest();
            let trimmed = rest.trim_start();
            self.pos += rest.len() - trimmed.len();
            if trimmed.starts_with('#') {
                self.pos += trimmed.find('\n').unwrap_or(trimmed.len());
            } else {
                return;
            }
        }
    }

    fn lex_err(&self, start: usize, len: usize) -> ParseError {
        let end = (start + len).min(self.src.len());
        ParseError::Lexical {
            position: position_of(self.src, start),
            text: self.src[start..end].to_string(),
        }
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> &'a str {
        let rest = self.rest();
        let len = rest.find(|c: char| !f(c)).unwrap_or(rest.len());
        self.pos += len;
        &rest[..len]
    }

    fn next_tok(&mut self) -> Result<Tok, ParseError> {
        let start = self.pos;
        let rest = self.rest();
        let Some(c) = rest.chars().next() else {
            return Ok(Tok::Eof);
        };
        let is_name = |c: char| c.is_ascii_alphanumeric() || c == '_';
        if c == '?' || c == '$' {
            self.pos += 1;
            let name = self.take_while(is_name);
            if name.is_empty() {
                return Err(self.lex_err(start, 1));
            }
            return Ok(Tok::Var(name.to_string()));
        }
        if c.is_ascii_digit() {
            let digits = self.take_while(|c| c.is_ascii_digit());
            return digits.parse().map(Tok::Int).map_err(|_| self.lex_err(start, digits.len()));
        }
        if c == '<' {
            // an IRI starts with a letter; otherwise this is a comparator
            if rest[1..].starts_with(|c: char| c.is_ascii_alphabetic()) {
                let Some(end) = rest.find('>') else {
                    return Err(self.lex_err(start, rest.len()));
                };
                let iri = &rest[1..end];
                if iri.contains(char::is_whitespace) {
                    return Err(self.lex_err(start, end + 1));
                }
                self.pos += end + 1;
                return Ok(Tok::Iri(iri.to_string()));
            }
            if rest[1..].starts_with('=') {
                self.pos += 2;
                return Ok(Tok::Punct("<="));
            }
            self.pos += 1;
            return Ok(Tok::Punct("<"));
        }
        if c == '>' {
            if rest[1..].starts_with('=') {
                self.pos += 2;
                return Ok(Tok::Punct(">="));
            }
            self.pos += 1;
            return Ok(Tok::Punct(">"));
        }
        for p in ["{", "}", "(", ")", ".", "*", "=", "~", ",", ";"] {
            if rest.starts_with(p) {
                self.pos += 1;
                return Ok(Tok::Punct(p));
            }
        }
        if c.is_ascii_alphabetic() {
            let word = self.take_while(is_name);
            if self.rest().starts_with(':') {
                self.pos += 1;
                let local = self.take_while(is_name);
                return Ok(Tok::PName(word.to_string(), local.to_string()));
            }
            return Ok(Tok::Word(word.to_string()));
        }
        if c == ':' {
            self.pos += 1;
            let local = self.take_while(is_name);
            return Ok(Tok::PName(String::new(), local.to_string()));
        }
        Err(self.lex_err(start, c.len_utf8()))
    }
}

/// Parse a query. Slot placeholders are rejected.
pub fn parse_query(text: &str) -> Result<SparqlQuery, ParseError> {
    Parser::new(text, false)?.parse_document()
}

/// Parse a template skeleton, which may contain slot placeholders such as
/// `ENTITY1` or `RELATION2`.
pub fn parse_template(text: &str) -> Result<SparqlQuery, ParseError> {
    Parser::new(text, true)?.parse_document()
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<(Tok, usize)>,
    at: usize,
    slots: bool,
    prefixes: BTreeMap<String, String>,
}

fn parse_slot(word: &str) -> Option<Slot> {
    let split = word.find(|c: char| c.is_ascii_digit())?;
    let (head, digits) = word.split_at(split);
    let kind = match head {
        "ENTITY" => SlotKind::Entity,
        "RELATION" => SlotKind::Relation,
        "TYPE" => SlotKind::Type,
        "VALUE" => SlotKind::Value,
        _ => return None,
    };
    if digits.starts_with('0') || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    Some(Slot::new(kind, digits.parse().ok()?))
}

impl<'a> Parser<'a> {
    fn new(src: &'a str, slots: bool) -> Result<Self, ParseError> {
        let prefixes = BTreeMap::from([("wd".to_string(), WD_NS.to_string()), ("wdt".to_string(), WDT_NS.to_string())]);
        Ok(Parser {
            src,
            toks: Lexer::tokenize(src)?,
            at: 0,
            slots,
            prefixes,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn here(&self) -> Position {
        position_of(self.src, self.toks[self.at].1)
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn unexpected(&self, expected: &[&str]) -> ParseError {
        if let Tok::Word(w) = self.peek() {
            let upper = w.to_ascii_uppercase();
            if UNSUPPORTED_WORDS.contains(&upper.as_str()) {
                return ParseError::Unsupported {
                    position: self.here(),
                    construct: upper,
                };
            }
        }
        ParseError::Unexpected {
            position: self.here(),
            found: self.peek().describe(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn unsupported(&self, construct: &str) -> ParseError {
        ParseError::Unsupported {
            position: self.here(),
            construct: construct.to_string(),
        }
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if matches!(self.peek(), Tok::Punct(q) if *q == p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> Result<(), ParseError> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            Err(self.unexpected(&[&format!("`{p}`")]))
        }
    }

    fn eat_word(&mut self, kw: &str) -> bool {
        if self.peek().is_word(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_word(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.eat_word(kw) {
            Ok(())
        } else {
            Err(self.unexpected(&[kw]))
        }
    }

    fn expect_var(&mut self) -> Result<Var, ParseError> {
        let pos = self.here();
        match self.peek().clone() {
            Tok::Var(name) => {
                self.bump();
                Var::new(name.clone()).ok_or(ParseError::Invalid {
                    position: pos,
                    message: format!("invalid variable name `?{name}`"),
                })
            }
            _ => Err(self.unexpected(&["variable"])),
        }
    }

    fn parse_document(mut self) -> Result<SparqlQuery, ParseError> {
        while self.peek().is_word("PREFIX") {
            self.parse_prefix()?;
        }
        let start = self.here();
        let q = if self.peek().is_word("ASK") {
            self.bump();
            self.eat_word("WHERE");
            let pattern = self.parse_group()?;
            SparqlQuery::new(QueryForm::Ask, pattern)
        } else if self.peek().is_word("SELECT") {
            self.parse_select()?
        } else {
            return Err(self.unexpected(&["SELECT", "ASK", "PREFIX"]));
        };
        if *self.peek() != Tok::Eof {
            return Err(self.unexpected(&["end of input"]));
        }
        q.validate().map_err(|e| ParseError::Invalid {
            position: start,
            message: e.to_string(),
        })?;
        Ok(q)
    }

    fn parse_prefix(&mut self) -> Result<(), ParseError> {
        self.bump();
        let Tok::PName(name, local) = self.peek().clone() else {
            return Err(self.unexpected(&["prefix name"]));
        };
        if !local.is_empty() {
            return Err(self.unexpected(&["prefix name"]));
        }
        self.bump();
        let Tok::Iri(iri) = self.peek().clone() else {
            return Err(self.unexpected(&["IRI"]));
        };
        if iri != WD_NS && iri != WDT_NS {
            return Err(self.unsupported(&format!("namespace <{iri}>")));
        }
        self.bump();
        self.prefixes.insert(name, iri);
        Ok(())
    }

    /// `SELECT` through the optional solution modifier.
    fn parse_select(&mut self) -> Result<SparqlQuery, ParseError> {
        self.expect_word("SELECT")?;
        let distinct = self.eat_word("DISTINCT");
        if self.peek().is_word("REDUCED") {
            return Err(self.unsupported("REDUCED"));
        }
        enum Proj {
            Var(Var),
            Count { target: CountTarget, distinct: bool, alias: Var },
        }
        let proj = match self.peek() {
            Tok::Var(_) => {
                let v = self.expect_var()?;
                if matches!(self.peek(), Tok::Var(_)) {
                    return Err(self.unsupported("multiple projected variables"));
                }
                Proj::Var(v)
            }
            Tok::Punct("(") => {
                self.bump();
                let (target, cdistinct) = self.parse_count(true)?;
                self.expect_word("AS")?;
                let alias = self.expect_var()?;
                self.expect_punct(")")?;
                Proj::Count {
                    target,
                    distinct: cdistinct,
                    alias,
                }
            }
            Tok::Punct("*") => return Err(self.unsupported("SELECT *")),
            _ => return Err(self.unexpected(&["variable", "`(`"])),
        };
        self.eat_word("WHERE");
        let pattern = self.parse_group()?;

        if !self.peek().is_word("GROUP") {
            if self.peek().is_word("ORDER") {
                return Err(self.unsupported("ORDER BY without GROUP BY"));
            }
            if self.peek().is_word("LIMIT") {
                return Err(self.unsupported("LIMIT without GROUP BY"));
            }
            let form = match proj {
                Proj::Var(var) => QueryForm::SelectEntities { var, distinct },
                Proj::Count { target, distinct, alias } => QueryForm::SelectCount { target, distinct, alias },
            };
            return Ok(SparqlQuery::new(form, pattern));
        }

        self.bump();
        self.expect_word("BY")?;
        let group_pos = self.here();
        let group_var = self.expect_var()?;
        let output = match proj {
            Proj::Var(v) => {
                if v != group_var {
                    return Err(ParseError::Invalid {
                        position: group_pos,
                        message: format!("projected {v} must be the grouping variable"),
                    });
                }
                GroupOutput::Entities
            }
            Proj::Count { target, alias, .. } => {
                if target != CountTarget::Var(group_var.clone()) {
                    return Err(ParseError::Invalid {
                        position: group_pos,
                        message: format!("a grouped count must count the grouping variable {group_var}"),
                    });
                }
                GroupOutput::Count { alias }
            }
        };
        let (counted, cdistinct, constraint) = if self.eat_word("HAVING") {
            self.expect_punct("(")?;
            let (counted, cdistinct) = self.parse_var_count()?;
            let op = match self.bump() {
                Tok::Punct(p) => Comparator::from_symbol(p),
                _ => None,
            };
            let Some(op) = op else {
                self.at -= 1;
                return Err(self.unexpected(&["`>`", "`<`", "`>=`", "`<=`", "`=`", "`~`"]));
            };
            let threshold = self.parse_threshold()?;
            self.expect_punct(")")?;
            (counted, cdistinct, GroupConstraint::Compare { op, threshold })
        } else if self.eat_word("ORDER") {
            self.expect_word("BY")?;
            let ext = if self.eat_word("DESC") {
                Extremum::Max
            } else if self.eat_word("ASC") {
                Extremum::Min
            } else {
                return Err(self.unexpected(&["DESC", "ASC"]));
            };
            self.expect_punct("(")?;
            let (counted, cdistinct) = self.parse_var_count()?;
            self.expect_punct(")")?;
            self.expect_word("LIMIT")?;
            match self.bump() {
                Tok::Int(1) => {}
                _ => {
                    self.at -= 1;
                    return Err(self.unexpected(&["`1`"]));
                }
            }
            (counted, cdistinct, GroupConstraint::Extremum(ext))
        } else {
            return Err(self.unexpected(&["HAVING", "ORDER"]));
        };
        Ok(SparqlQuery::new(
            QueryForm::SelectGrouped {
                var: group_var,
                output,
                counted,
                distinct: cdistinct,
                constraint,
            },
            pattern,
        ))
    }

    /// `COUNT ( [DISTINCT] (?v | *) )`
    fn parse_count(&mut self, allow_star: bool) -> Result<(CountTarget, bool), ParseError> {
        self.expect_word("COUNT")?;
        self.expect_punct("(")?;
        let distinct = self.eat_word("DISTINCT");
        let target = if allow_star && self.eat_punct("*") {
            CountTarget::Star
        } else {
            CountTarget::Var(self.expect_var()?)
        };
        self.expect_punct(")")?;
        Ok((target, distinct))
    }

    fn parse_var_count(&mut self) -> Result<(Var, bool), ParseError> {
        match self.parse_count(false)? {
            (CountTarget::Var(v), d) => Ok((v, d)),
            (CountTarget::Star, _) => unreachable!("star rejected by parse_count"),
        }
    }

    fn parse_threshold(&mut self) -> Result<Threshold, ParseError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Threshold::Literal(n))
            }
            Tok::Word(w) if self.slots && parse_slot(&w).is_some_and(|s| s.kind == SlotKind::Value) => {
                self.bump();
                Ok(Threshold::Slot(parse_slot(&w).expect("checked above")))
            }
            Tok::Punct("(") => {
                self.bump();
                let pos = self.here();
                let sub = self.parse_select()?;
                if !matches!(sub.form, QueryForm::SelectCount { .. }) {
                    return Err(ParseError::Invalid {
                        position: pos,
                        message: "a threshold sub-query must be a COUNT query".to_string(),
                    });
                }
                self.expect_punct(")")?;
                Ok(Threshold::Count(Box::new(sub)))
            }
            _ => Err(self.unexpected(&["integer", "`(`"])),
        }
    }

    fn parse_group(&mut self) -> Result<GroupPattern, ParseError> {
        self.expect_punct("{")?;
        let mut acc: Option<GroupPattern> = None;
        loop {
            match self.peek() {
                Tok::Punct("}") => break,
                Tok::Punct("{") => {
                    if acc.is_some() {
                        return Err(self.unsupported("join of group patterns"));
                    }
                    let mut g = self.parse_group()?;
                    while self.eat_word("UNION") {
                        let right = self.parse_group()?;
                        g = GroupPattern::union(g, right);
                    }
                    acc = Some(g);
                }
                Tok::Word(w) if w.eq_ignore_ascii_case("MINUS") => {
                    let Some(base) = acc.take() else {
                        return Err(self.unsupported("MINUS without a preceding pattern"));
                    };
                    self.bump();
                    let removed = self.parse_group()?;
                    acc = Some(GroupPattern::minus(base, removed));
                }
                t if self.starts_term(t) => {
                    if acc.is_some() {
                        return Err(self.unsupported("join of group patterns"));
                    }
                    acc = Some(GroupPattern::Bgp(self.parse_triples()?));
                }
                _ => {
                    let mut expected = vec!["`}`", "`{`", "MINUS", "triple pattern"];
                    if acc.is_none() {
                        expected.retain(|e| *e != "MINUS");
                    }
                    return Err(self.unexpected(&expected));
                }
            }
        }
        let close = self.here();
        self.bump();
        acc.ok_or(ParseError::Invalid {
            position: close,
            message: "empty group pattern".to_string(),
        })
    }

    fn starts_term(&self, t: &Tok) -> bool {
        match t {
            Tok::Var(_) | Tok::PName(..) | Tok::Iri(_) => true,
            Tok::Word(w) => self.slots && parse_slot(w).is_some(),
            _ => false,
        }
    }

    fn parse_triples(&mut self) -> Result<Vec<TriplePattern>, ParseError> {
        let mut out = Vec::new();
        while self.starts_term(self.peek()) {
            let subject = self.parse_term()?;
            let predicate = self.parse_term()?;
            let object = self.parse_term()?;
            out.push(TriplePattern {
                subject,
                predicate,
                object,
            });
            match self.peek() {
                Tok::Punct(".") => {
                    self.bump();
                }
                Tok::Punct(";") => return Err(self.unsupported("predicate-object list `;`")),
                Tok::Punct(",") => return Err(self.unsupported("object list `,`")),
                _ => break,
            }
        }
        Ok(out)
    }

    fn parse_term(&mut self) -> Result<Term, ParseError> {
        let pos = self.here();
        let iri = match self.peek().clone() {
            Tok::Var(_) => return self.expect_var().map(Term::Var),
            Tok::Word(w) if self.slots => {
                let slot = parse_slot(&w).ok_or_else(|| self.unexpected(&["term"]))?;
                self.bump();
                return Ok(Term::Slot(slot));
            }
            Tok::PName(prefix, local) => {
                let Some(ns) = self.prefixes.get(&prefix) else {
                    return Err(ParseError::Invalid {
                        position: pos,
                        message: format!("undeclared prefix `{prefix}:`"),
                    });
                };
                format!("{ns}{local}")
            }
            Tok::Iri(iri) => iri,
            _ => return Err(self.unexpected(&["variable", "prefixed name", "IRI"])),
        };
        self.bump();
        let invalid = |message: String| ParseError::Invalid { position: pos, message };
        if let Some(local) = iri.strip_prefix(WD_NS) {
            return EntityId::parse(local).map(Term::Entity).map_err(|e| invalid(e.to_string()));
        }
        if let Some(local) = iri.strip_prefix(WDT_NS) {
            if matches!(self.peek(), Tok::Punct("*")) {
                return Err(self.unsupported("property path"));
            }
            return PropertyId::parse(local).map(Term::Property).map_err(|e| invalid(e.to_string()));
        }
        Err(ParseError::Unsupported {
            position: pos,
            construct: format!("IRI outside the wd:/wdt: namespaces: <{iri}>"),
        })
    }
}
