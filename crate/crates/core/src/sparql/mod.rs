//! The query fragment produced by the template catalog.
//!
//! Supported: `SELECT ?v`, `SELECT (COUNT(...) AS ?count)`, `ASK`, basic
//! graph patterns, `UNION`, `MINUS`, and one grouped form that keeps or
//! counts groups by a count comparison (`GROUP BY ... HAVING`) or picks the
//! largest or smallest group (`GROUP BY ... ORDER BY DESC/ASC(...) LIMIT 1`).
//! A `HAVING` threshold may be a literal or a parenthesized count query.
//!
//! ```
//! use convkgqa::fixtures::mini_kg;
//! use convkgqa::sparql::{evaluate, parse_query, Answer};
//!
//! let q = parse_query("ASK {wd:Q653772 wdt:P17 wd:Q53190.}").unwrap();
//! assert_eq!(evaluate(&mini_kg(), &q).unwrap(), Answer::Boolean(false));
//! ```

mod ast;
mod eval;
mod oracle;
mod parser;
mod serialize;

pub use ast::*;
pub use eval::{compatible, evaluate, evaluate_with, solve, Answer, EvalError, EvalOptions, Solution};
pub use oracle::{brute_force_evaluate, brute_force_evaluate_with};
pub use parser::{parse_query, parse_template, ParseError, Position, WDT_NS, WD_NS};
pub use serialize::{canonicalize, serialize, serialize_with_prefixes, SerializeMode};

#[cfg(test)]
mod tests;
