//! Turtle export and reload.
//!
//! The export writes one statement per line: first every triple in SPO
//! order, then `rdfs:label` statements for labelled symbols in symbol order.
//! Reloading accepts any Turtle document; statements outside the
//! `wd:`/`wdt:` vocabulary are reported and skipped.

use std::io::{self, BufRead, Write};

use oxrdf::{NamedOrBlankNode, Term};
use oxttl::TurtleParser;

use super::ingest::{ingest, Diagnostic, IngestReport, Located, SourceRecord};
use super::KnowledgeGraph;

const WD: &str = "http://www.wikidata.org/entity/";
const WDT: &str = "http://www.wikidata.org/prop/direct/";
const RDFS_LABEL: &str = "http://www.w3.org/2000/01/rdf-schema#label";

pub const TURTLE_PREFIXES: &str = "@prefix wd: <http://www.wikidata.org/entity/> .\n\
@prefix wdt: <http://www.wikidata.org/prop/direct/> .\n\
@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .\n";

fn escape_literal(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for ch in s.chars() {
        match ch {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out
}

pub fn export_turtle<W: Write>(kg: &KnowledgeGraph, mut sink: W) -> io::Result<()> {
    sink.write_all(TURTLE_PREFIXES.as_bytes())?;
    for t in kg.triples() {
        writeln!(sink, "wd:{} wdt:{} wd:{} .", t.subject, t.predicate, t.object)?;
    }
    for (symbol, label) in kg.labels() {
        writeln!(sink, "wd:{symbol} rdfs:label \"{}\" .", escape_literal(label))?;
    }
    sink.flush()
}

pub fn load_turtle<R: BufRead>(reader: R) -> (KnowledgeGraph, IngestReport) {
    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for (idx, item) in TurtleParser::new().for_reader(reader).enumerate() {
        let statement = idx + 1;
        let triple = match item {
            Ok(t) => t,
            Err(e) => {
                skipped.push(Diagnostic {
                    source: String::new(),
                    line: statement,
                    message: format!("turtle syntax error: {e}"),
                });
                // a syntax error may leave the parser unable to resync
                if matches!(e, oxttl::TurtleParseError::Io(_)) {
                    break;
                }
                continue;
            }
        };
        let subject = match &triple.subject {
            NamedOrBlankNode::NamedNode(n) => n.as_str().strip_prefix(WD).map(str::to_string),
            _ => None,
        };
        let Some(subject) = subject else {
            skipped.push(Diagnostic {
                source: String::new(),
                line: statement,
                message: format!("subject outside the wd: namespace: {}", triple.subject),
            });
            continue;
        };
        let predicate = triple.predicate.as_str();
        let record = if predicate == RDFS_LABEL {
            match &triple.object {
                Term::Literal(l) => Some(SourceRecord::Label {
                    id: subject,
                    label: l.value().to_string(),
                }),
                _ => None,
            }
        } else if let Some(pred) = predicate.strip_prefix(WDT) {
            match &triple.object {
                Term::NamedNode(n) => n.as_str().strip_prefix(WD).map(|o| SourceRecord::Fact {
                    subject: subject.clone(),
                    predicate: pred.to_string(),
                    object: o.to_string(),
                }),
                Term::Literal(l) => Some(SourceRecord::Fact {
                    subject: subject.clone(),
                    predicate: pred.to_string(),
                    object: l.value().to_string(),
                }),
                _ => None,
            }
        } else {
            None
        };
        match record {
            Some(record) => records.push(Located {
                source: String::new(),
                line: statement,
                record,
            }),
            None => skipped.push(Diagnostic {
                source: String::new(),
                line: statement,
                message: format!("unsupported statement: {triple}"),
            }),
        }
    }
    let (kg, mut report) = ingest(records);
    report.rejected += skipped.len();
    skipped.extend(report.diagnostics);
    report.diagnostics = skipped;
    (kg, report)
}
