//! The decoding vocabulary: fixed query tokens plus the turn's KG symbols.

use std::collections::BTreeSet;

use crate::context::{DynamicVocabulary, CLS, CTX, SEP};
use crate::ids::{Symbol, P31};
use crate::sparql::{SparqlQuery, Term};

/// Query keywords, punctuation, variables, operators, slot markers and
/// sequence markers. `wdt:P31` is a keyword here: every template uses it
/// and it never fills a relation slot.
pub const FIXED_VOCABULARY: [&str; 41] = [
    "SELECT", "ASK", "WHERE", "{", "}", ".", "(", ")", "*", "?x", "?y", "?z", "?count", "COUNT", "DISTINCT", "AS",
    "UNION", "MINUS", "GROUP", "BY", "HAVING", "ORDER", "ASC", "DESC", "LIMIT", "=", "<", ">", "<=", ">=", "~",
    "wdt:P31", "NUM", "ENTITY", "RELATION", "TYPE", "VALUE", CLS, CTX, SEP, "[PAD]",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OutputToken {
    Keyword(&'static str),
    Symbol(Symbol),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputVocabulary {
    pub tokens: BTreeSet<OutputToken>,
    pub fixed_len: usize,
    pub dynamic_len: usize,
}

impl OutputVocabulary {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn contains(&self, symbol: Symbol) -> bool {
        self.tokens.contains(&OutputToken::Symbol(symbol))
    }
}

/// Fixed tokens plus every entity, class and relation of `v` (`P31` is
/// already a keyword).
pub fn assemble_output_vocabulary(v: &DynamicVocabulary) -> OutputVocabulary {
    let mut tokens: BTreeSet<OutputToken> = FIXED_VOCABULARY.iter().map(|k| OutputToken::Keyword(k)).collect();
    let fixed_len = tokens.len();
    let symbols = v
        .entities
        .iter()
        .chain(&v.types)
        .map(|e| Symbol::Entity(*e))
        .chain(v.relations.iter().filter(|r| **r != P31).map(|r| Symbol::Property(*r)));
    tokens.extend(symbols.map(OutputToken::Symbol));
    let dynamic_len = tokens.len() - fixed_len;
    OutputVocabulary {
        tokens,
        fixed_len,
        dynamic_len,
    }
}

/// KG symbols of `q` (threshold sub-query included) outside `allowed`;
/// `P31` always passes.
pub fn out_of_vocabulary(q: &SparqlQuery, allowed: &BTreeSet<Symbol>) -> Vec<Symbol> {
    let mut bad = BTreeSet::new();
    q.visit_terms(&mut |t| {
        let sym = match t {
            Term::Entity(e) => Symbol::Entity(*e),
            Term::Property(p) if *p != P31 => Symbol::Property(*p),
            _ => return,
        };
        if !allowed.contains(&sym) {
            bad.insert(sym);
        }
    });
    bad.into_iter().collect()
}
