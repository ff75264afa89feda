//! Ingestion of source-dump records into a [`KnowledgeGraph`].
//!
//! A dump directory holds JSON-lines files, one JSON object per line:
//!
//! | file name prefix | line shape                                   |
//! |------------------|----------------------------------------------|
//! | `facts_rev`      | `{"<object>": {"<pred>": ["<subject>", ..]}}` |
//! | `facts`          | `{"<subject>": {"<pred>": ["<object>", ..]}}` |
//! | `labels`         | `{"<id>": "<label>", ..}`                     |
//! | `types`          | `{"<entity>": "<class>" or ["<class>", ..]}` |
//!
//! Files are read in name order; other files are ignored.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufRead, BufReader};
use std::path::Path;

use serde_json::Value;

use super::{KgBuilder, KnowledgeGraph, Triple};
use crate::ids::{EntityId, PropertyId, Symbol, P31};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SourceRecord {
    Fact {
        subject: String,
        predicate: String,
        object: String,
    },
    Label {
        id: String,
        label: String,
    },
    /// Class metadata; becomes a `P31` edge unless the entity already has one.
    Class {
        entity: String,
        class: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Located<T> {
    pub source: String,
    pub line: usize,
    pub record: T,
}

impl<T> Located<T> {
    pub fn unlocated(record: T) -> Self {
        Located {
            source: String::new(),
            line: 0,
            record,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub source: String,
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.source.is_empty() {
            write!(f, "record {}: {}", self.line, self.message)
        } else {
            write!(f, "{}:{}: {}", self.source, self.line, self.message)
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub diagnostics: Vec<Diagnostic>,
    pub records: usize,
    pub rejected: usize,
    pub dropped_literals: usize,
    pub duplicates: usize,
    pub synthesized_types: usize,
}

impl IngestReport {
    fn diag<T>(&mut self, at: &Located<T>, message: String) {
        self.diagnostics.push(Diagnostic {
            source: at.source.clone(),
            line: at.line,
            message,
        });
    }
}

/// Build a graph from a record stream. Bad records are reported and skipped.
pub fn ingest<I>(records: I) -> (KnowledgeGraph, IngestReport)
where
    I: IntoIterator<Item = Located<SourceRecord>>,
{
    let mut report = IngestReport::default();
    let mut builder = KgBuilder::new();
    let mut classes: BTreeMap<EntityId, EntityId> = BTreeMap::new();

    for located in records {
        report.records += 1;
        match &located.record {
            SourceRecord::Fact {
                subject,
                predicate,
                object,
            } => {
                let (s, p) = match (EntityId::parse(subject), PropertyId::parse(predicate)) {
                    (Ok(s), Ok(p)) => (s, p),
                    (Err(e), _) | (_, Err(e)) => {
                        report.rejected += 1;
                        report.diag(&located, e.to_string());
                        continue;
                    }
                };
                match EntityId::parse(object) {
                    Ok(o) => {
                        if !builder.add_triple(Triple::new(s, p, o)) {
                            report.duplicates += 1;
                        }
                    }
                    Err(e) if object.starts_with('Q') => {
                        report.rejected += 1;
                        report.diag(&located, e.to_string());
                    }
                    Err(_) => {
                        report.dropped_literals += 1;
                        report.diag(&located, format!("literal object `{object}` dropped"));
                    }
                }
            }
            SourceRecord::Label { id, label } => match Symbol::parse(id) {
                Ok(sym) => {
                    builder.label(sym, label.clone());
                }
                Err(e) => {
                    report.rejected += 1;
                    report.diag(&located, e.to_string());
                }
            },
            SourceRecord::Class { entity, class } => match (EntityId::parse(entity), EntityId::parse(class)) {
                (Ok(e), Ok(c)) => {
                    classes.entry(e).or_insert(c);
                }
                (Err(err), _) | (_, Err(err)) => {
                    report.rejected += 1;
                    report.diag(&located, err.to_string());
                }
            },
        }
    }

    for (entity, class) in classes {
        if !builder.has_class_assertion(entity) {
            builder.add_triple(Triple::new(entity, P31, class));
            report.synthesized_types += 1;
        }
    }

    (builder.build(), report)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum DumpFile {
    Facts,
    ReverseFacts,
    Labels,
    Types,
}

fn classify(name: &str) -> Option<DumpFile> {
    if !name.ends_with(".jsonl") {
        return None;
    }
    if name.starts_with("facts_rev") {
        Some(DumpFile::ReverseFacts)
    } else if name.starts_with("facts") {
        Some(DumpFile::Facts)
    } else if name.starts_with("labels") {
        Some(DumpFile::Labels)
    } else if name.starts_with("types") {
        Some(DumpFile::Types)
    } else {
        None
    }
}

fn string_list(v: &Value) -> Option<Vec<String>> {
    match v {
        Value::String(s) => Some(vec![s.clone()]),
        Value::Array(items) => items
            .iter()
            .map(|i| match i {
                Value::String(s) => Some(s.clone()),
                Value::Number(n) => Some(n.to_string()),
                _ => None,
            })
            .collect(),
        Value::Number(n) => Some(vec![n.to_string()]),
        _ => None,
    }
}

fn records_from_line(kind: DumpFile, line: &str) -> Result<Vec<SourceRecord>, String> {
    let value: Value = serde_json::from_str(line).map_err(|e| format!("malformed JSON: {e}"))?;
    let Value::Object(map) = value else {
        return Err("expected a JSON object".into());
    };
    let mut out = Vec::new();
    for (key, v) in map {
        match kind {
            DumpFile::Facts | DumpFile::ReverseFacts => {
                let Value::Object(preds) = v else {
                    return Err(format!("`{key}`: expected predicate map"));
                };
                for (pred, objs) in preds {
                    let objs = string_list(&objs).ok_or_else(|| format!("`{key}`/`{pred}`: expected id list"))?;
                    for other in objs {
                        let (subject, object) = if kind == DumpFile::Facts {
                            (key.clone(), other)
                        } else {
                            (other, key.clone())
                        };
                        out.push(SourceRecord::Fact {
                            subject,
                            predicate: pred.clone(),
                            object,
                        });
                    }
                }
            }
            DumpFile::Labels => match v {
                Value::String(label) => out.push(SourceRecord::Label { id: key, label }),
                _ => return Err(format!("`{key}`: expected label string")),
            },
            DumpFile::Types => {
                let classes = string_list(&v).ok_or_else(|| format!("`{key}`: expected class id(s)"))?;
                for class in classes {
                    out.push(SourceRecord::Class {
                        entity: key.clone(),
                        class,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Read every recognised file of a dump directory and ingest it.
pub fn read_dump_dir(dir: &Path) -> io::Result<(KnowledgeGraph, IngestReport)> {
    let mut names: Vec<_> = fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .filter_map(|e| {
            let name = e.file_name().to_string_lossy().into_owned();
            classify(&name).map(|k| (name, k, e.path()))
        })
        .collect();
    names.sort_by(|a, b| a.0.cmp(&b.0));

    let mut records = Vec::new();
    let mut line_errors = Vec::new();
    for (name, kind, path) in names {
        let reader = BufReader::new(fs::File::open(&path)?);
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            match records_from_line(kind, &line) {
                Ok(recs) => records.extend(recs.into_iter().map(|record| Located {
                    source: name.clone(),
                    line: idx + 1,
                    record,
                })),
                Err(message) => line_errors.push(Diagnostic {
                    source: name.clone(),
                    line: idx + 1,
                    message,
                }),
            }
        }
    }

    let (kg, mut report) = ingest(records);
    report.rejected += line_errors.len();
    line_errors.extend(report.diagnostics);
    report.diagnostics = line_errors;
    Ok((kg, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{p, q};

    fn fact(s: &str, p: &str, o: &str) -> Located<SourceRecord> {
        Located::unlocated(SourceRecord::Fact {
            subject: s.into(),
            predicate: p.into(),
            object: o.into(),
        })
    }

    #[test]
    fn single_fact() {
        let (kg, report) = ingest([fact("Q846847", "P1923", "Q650855")]);
        assert_eq!(kg.triples(), &[Triple::new(q(846847), p(1923), q(650855))]);
        assert!(report.diagnostics.is_empty());
    }

    #[test]
    fn empty_stream() {
        let (kg, report) = ingest(Vec::new());
        assert!(kg.is_empty());
        assert_eq!(kg.label_count(), 0);
        assert_eq!(report, IngestReport::default());
    }

    #[test]
    fn class_metadata_synthesizes_one_p31_edge() {
        let (kg, report) = ingest([
            fact("Q846847", "P1923", "Q650855"),
            Located::unlocated(SourceRecord::Class {
                entity: "Q846847".into(),
                class: "Q500834".into(),
            }),
            // already typed: metadata must not add a second class
            fact("Q650855", "P31", "Q13027888"),
            Located::unlocated(SourceRecord::Class {
                entity: "Q650855".into(),
                class: "Q12973014".into(),
            }),
        ]);
        let p31: Vec<_> = kg.triples().iter().filter(|t| t.predicate == P31).collect();
        assert_eq!(p31.len(), 2);
        assert!(kg.contains(&Triple::new(q(846847), P31, q(500834))));
        assert!(!kg.contains(&Triple::new(q(650855), P31, q(12973014))));
        assert_eq!(report.synthesized_types, 1);
    }

    #[test]
    fn bad_records_are_diagnosed_and_skipped() {
        let mut bad = fact("X1", "P1", "Q2");
        bad.line = 7;
        bad.source = "facts.jsonl".into();
        let (kg, report) = ingest([bad, fact("Q1", "P1", "1909"), fact("Q1", "P1", "Q2"), fact("Q1", "P1", "Q2")]);
        assert_eq!(kg.len(), 1);
        assert_eq!(report.rejected, 1);
        assert_eq!(report.dropped_literals, 1);
        assert_eq!(report.duplicates, 1);
        assert_eq!(report.diagnostics[0].line, 7);
        assert!(report.diagnostics[0].to_string().starts_with("facts.jsonl:7:"));
    }

    #[test]
    fn dump_directory_layout() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("facts_1.jsonl"), "{\"Q846847\": {\"P1923\": [\"Q650855\"], \"P1346\": [\"Q7199360\"]}}\nnot json\n").unwrap();
        fs::write(dir.path().join("facts_rev.jsonl"), "{\"Q650855\": {\"P1923\": [\"Q846847\"]}}\n").unwrap();
        fs::write(dir.path().join("labels.jsonl"), "{\"Q846847\": \"1909 World Series\", \"P1923\": \"participating team\"}\n").unwrap();
        fs::write(dir.path().join("types.jsonl"), "{\"Q846847\": \"Q500834\"}\n").unwrap();
        fs::write(dir.path().join("README.txt"), "ignored").unwrap();
        let (kg, report) = read_dump_dir(dir.path()).unwrap();
        assert_eq!(kg.len(), 3);
        assert_eq!(kg.types_of(q(846847)), [q(500834)].into());
        assert_eq!(kg.label(q(846847)), "1909 World Series");
        assert_eq!(report.duplicates, 1);
        assert_eq!(report.diagnostics.len(), 1);
        assert_eq!(report.diagnostics[0].source, "facts_1.jsonl");
        assert_eq!(report.diagnostics[0].line, 2);
    }
}
