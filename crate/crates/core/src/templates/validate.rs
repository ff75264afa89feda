//! Execution-based validation and repair of annotated conversations.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::dataset::{verbalize, Conversation, StructureError};
use super::{instantiate_annotation, TemplateError};
use crate::ids::EntityId;
use crate::kg::KnowledgeGraph;
use crate::sparql::{canonicalize, evaluate, Answer, EvalError};

/// What to do when a turn's instantiated query disagrees with its gold
/// answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RepairPolicy {
    /// Redefine the answer when no later turn depends on what it drops,
    /// otherwise truncate.
    #[default]
    Repair,
    /// Always truncate.
    Truncate,
    /// Change nothing; only report.
    Report,
}

impl FromStr for RepairPolicy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "repair" => Ok(RepairPolicy::Repair),
            "truncate" => Ok(RepairPolicy::Truncate),
            "report" => Ok(RepairPolicy::Report),
            other => Err(format!("unknown policy `{other}`: expected repair, truncate or report")),
        }
    }
}

impl fmt::Display for RepairPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RepairPolicy::Repair => "repair",
            RepairPolicy::Truncate => "truncate",
            RepairPolicy::Report => "report",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TurnStatus {
    Ok,
    Redefined,
    Truncated,
    /// A mismatch left in place under [`RepairPolicy::Report`].
    Mismatch,
    /// An unannotated question answered by a clarification request.
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TurnReport {
    pub index: usize,
    pub status: TurnStatus,
    /// Instantiation or execution failure, when there was one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Whether the stored gold query is canonically equal to the
    /// instantiated one; absent when either is missing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_parse_agrees: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ValidationReport {
    pub conversation: String,
    pub turns: Vec<TurnReport>,
    pub ok: usize,
    pub redefined: usize,
    pub truncated: usize,
    pub mismatched: usize,
    pub errors: usize,
}

impl ValidationReport {
    fn push(&mut self, t: TurnReport) {
        match t.status {
            TurnStatus::Ok => self.ok += 1,
            TurnStatus::Redefined => self.redefined += 1,
            TurnStatus::Truncated => self.truncated += 1,
            TurnStatus::Mismatch => self.mismatched += 1,
            TurnStatus::Skipped => {}
        }
        if t.error.is_some() {
            self.errors += 1;
        }
        self.turns.push(t);
    }

    pub fn all_ok(&self) -> bool {
        self.turns.iter().all(|t| matches!(t.status, TurnStatus::Ok | TurnStatus::Skipped))
    }
}

#[derive(Debug)]
enum Failure {
    Template(TemplateError),
    Eval(EvalError),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Template(e) => e.fmt(f),
            Failure::Eval(e) => e.fmt(f),
        }
    }
}

fn entities_of(a: Option<&Answer>) -> BTreeSet<EntityId> {
    a.and_then(Answer::as_set).cloned().unwrap_or_default()
}

/// Execute every annotated user turn and compare with its gold answer.
///
/// On a mismatch under [`RepairPolicy::Repair`] the answer is redefined
/// to the execution result unless a later annotation mentions an entity
/// that the old answer had and the new one lacks; then, or when the turn
/// cannot be executed at all, the conversation is cut before the turn.
pub fn validate_conversation(
    kg: &KnowledgeGraph,
    c: &Conversation,
    policy: RepairPolicy,
) -> Result<(Conversation, ValidationReport), StructureError> {
    c.check()?;
    let mut out = c.clone();
    let mut report = ValidationReport {
        conversation: c.id.clone(),
        ..Default::default()
    };
    let mut index = 0;
    while index < out.turns.len() {
        let turn = &out.turns[index];
        if !turn.is_user() {
            index += 1;
            continue;
        }
        let Some(ann) = &turn.annotation else {
            report.push(TurnReport {
                index,
                status: TurnStatus::Skipped,
                error: None,
                gold_parse_agrees: None,
            });
            index += 1;
            continue;
        };
        let query = instantiate_annotation(ann).map_err(Failure::Template);
        let gold_parse_agrees = match (&query, &turn.gold_sparql) {
            (Ok(q), Some(g)) => Some(canonicalize(q) == canonicalize(g)),
            _ => None,
        };
        let result = query.and_then(|q| evaluate(kg, &q).map_err(Failure::Eval));
        let error = result.as_ref().err().map(|e| e.to_string());
        if let Ok(answer) = &result {
            if turn.gold_answer.as_ref() == Some(answer) {
                report.push(TurnReport {
                    index,
                    status: TurnStatus::Ok,
                    error,
                    gold_parse_agrees,
                });
                index += 1;
                continue;
            }
        }
        let mut entry = TurnReport {
            index,
            status: TurnStatus::Mismatch,
            error,
            gold_parse_agrees,
        };
        match (policy, result) {
            (RepairPolicy::Report, _) => {}
            (RepairPolicy::Repair, Ok(answer)) if !downstream_depends(&out, index, &answer) => {
                let turns = &mut out.turns;
                turns[index].gold_answer = Some(answer.clone());
                if let Some(reply) = turns.get_mut(index + 1) {
                    reply.utterance = verbalize(kg, &answer);
                }
                entry.status = TurnStatus::Redefined;
            }
            _ => {
                out.turns.truncate(index);
                entry.status = TurnStatus::Truncated;
                report.push(entry);
                break;
            }
        }
        report.push(entry);
        index += 1;
    }
    Ok((out, report))
}

/// Does a later annotation mention an entity the redefinition would drop?
fn downstream_depends(c: &Conversation, index: usize, new: &Answer) -> bool {
    let old = entities_of(c.turns[index].gold_answer.as_ref());
    let new = entities_of(Some(new));
    let dropped: BTreeSet<&EntityId> = old.difference(&new).collect();
    if dropped.is_empty() {
        return false;
    }
    c.turns[index + 1..]
        .iter()
        .filter_map(|t| t.annotation.as_ref())
        .any(|a| a.entities.iter().any(|e| dropped.contains(e)))
}
