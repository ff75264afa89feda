//! Conversation records and the JSON-lines dataset format.
//!
//! One conversation per line:
//!
//! ```text
//! {"id": "...", "turns": [{"speaker": "user", "utterance": "...",
//!   "annotation": {"intentType": "...", "subType": "...", "entities": ["Q1"],
//!                  "relations": ["P2"], "types": ["Q3"], "tripleHints": [["Q3","P2","Q1"]]},
//!   "goldSparql": "SELECT ...", "goldAnswer": ["Q4"]},
//!  {"speaker": "system", "utterance": "..."}]}
//! ```
//!
//! A gold answer is an id array, `true`/`false`, or a number. A system turn
//! that asks for clarification carries `"clarification": true`; the user
//! question before it may then be unannotated.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use super::QuestionAnnotation;
use crate::kg::KnowledgeGraph;
use crate::sparql::{parse_query, Answer, SparqlQuery};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Speaker {
    User,
    System,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Turn {
    pub speaker: Speaker,
    pub utterance: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotation: Option<QuestionAnnotation>,
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        serialize_with = "ser_query",
        deserialize_with = "de_query"
    )]
    pub gold_sparql: Option<SparqlQuery>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_answer: Option<Answer>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub clarification: bool,
}

fn ser_query<S: Serializer>(q: &Option<SparqlQuery>, s: S) -> Result<S::Ok, S::Error> {
    match q {
        Some(q) => s.collect_str(q),
        None => s.serialize_none(),
    }
}

fn de_query<'de, D: Deserializer<'de>>(d: D) -> Result<Option<SparqlQuery>, D::Error> {
    let raw: Option<String> = Option::deserialize(d)?;
    raw.map(|text| parse_query(&text).map_err(serde::de::Error::custom)).transpose()
}

impl Turn {
    pub fn user(utterance: impl Into<String>, annotation: QuestionAnnotation) -> Self {
        Turn {
            speaker: Speaker::User,
            utterance: utterance.into(),
            annotation: Some(annotation),
            gold_sparql: None,
            gold_answer: None,
            clarification: false,
        }
    }

    pub fn system(utterance: impl Into<String>) -> Self {
        Turn {
            speaker: Speaker::System,
            utterance: utterance.into(),
            annotation: None,
            gold_sparql: None,
            gold_answer: None,
            clarification: false,
        }
    }

    pub fn with_gold(mut self, sparql: Option<SparqlQuery>, answer: Answer) -> Self {
        self.gold_sparql = sparql;
        self.gold_answer = Some(answer);
        self
    }

    pub fn is_user(&self) -> bool {
        self.speaker == Speaker::User
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conversation {
    pub id: String,
    pub turns: Vec<Turn>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("conversation has no turns")]
    Empty,
    #[error("turn {index}: expected a {expected:?} turn")]
    NotAlternating { index: usize, expected: Speaker },
    #[error("turn {index}: user turn has no annotation and is not followed by a clarification request")]
    Unannotated { index: usize },
}

impl Conversation {
    /// Alternating user/system turns starting with the user.
    pub fn check(&self) -> Result<(), StructureError> {
        if self.turns.is_empty() {
            return Err(StructureError::Empty);
        }
        for (index, turn) in self.turns.iter().enumerate() {
            let expected = if index % 2 == 0 { Speaker::User } else { Speaker::System };
            if turn.speaker != expected {
                return Err(StructureError::NotAlternating { index, expected });
            }
            if turn.is_user() && turn.annotation.is_none() && !self.clarified(index) {
                return Err(StructureError::Unannotated { index });
            }
        }
        Ok(())
    }

    /// True when the system turn after `index` asks for clarification.
    pub fn clarified(&self, index: usize) -> bool {
        self.turns.get(index + 1).is_some_and(|t| t.clarification)
    }

    /// Indexes of user turns carrying an annotation.
    pub fn annotated_user_turns(&self) -> impl Iterator<Item = usize> + '_ {
        self.turns
            .iter()
            .enumerate()
            .filter(|(_, t)| t.is_user() && t.annotation.is_some())
            .map(|(i, _)| i)
    }
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Read one conversation per non-blank line.
pub fn read_dataset<R: BufRead>(reader: R) -> Result<Vec<Conversation>, DatasetError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let c: Conversation = serde_json::from_str(&line).map_err(|e| DatasetError::Line {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(c);
    }
    Ok(out)
}

pub fn write_dataset<W: Write>(mut sink: W, conversations: &[Conversation]) -> io::Result<()> {
    for c in conversations {
        serde_json::to_writer(&mut sink, c)?;
        sink.write_all(b"\n")?;
    }
    Ok(())
}

/// System-side rendering of an answer: comma-joined labels, `Yes`/`No`, or
/// the number. An empty set renders as `None`.
pub fn verbalize(kg: &KnowledgeGraph, answer: &Answer) -> String {
    match answer {
        Answer::Boolean(true) => "Yes".to_string(),
        Answer::Boolean(false) => "No".to_string(),
        Answer::Count(n) => n.to_string(),
        Answer::EntitySet(s) if s.is_empty() => "None".to_string(),
        Answer::EntitySet(s) => s.iter().map(|e| kg.label(*e).into_owned()).collect::<Vec<_>>().join(", "),
    }
}
