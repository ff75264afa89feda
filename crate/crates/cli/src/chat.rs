//! Line-based conversational loop.
//!
//! Every parsed question is kept with its predicted symbols and answer, so
//! the session reads back as an ordinary annotated conversation.

use std::io::{self, BufRead, Write};

use convkgqa::parser::{Parser, ParserConfig, Trace};
use convkgqa::templates::{verbalize, Conversation, Turn};

pub const PROMPT: &str = "> ";
pub const APOLOGY: &str = "Sorry, I could not understand that question. Type :trace for details.";

pub struct Session<'p, 'k> {
    parser: &'p Parser<'k>,
    cfg: ParserConfig,
    pub conversation: Conversation,
    last_trace: Option<Trace>,
    last_sparql: Option<String>,
}

impl<'p, 'k> Session<'p, 'k> {
    pub fn new(parser: &'p Parser<'k>, cfg: ParserConfig) -> Self {
        Session {
            parser,
            cfg,
            conversation: Conversation {
                id: "chat".to_string(),
                turns: Vec::new(),
            },
            last_trace: None,
            last_sparql: None,
        }
    }

    /// Answer one question; the reply is also appended as a system turn.
    pub fn ask(&mut self, question: &str) -> String {
        let mut turn = Turn::user(question, Default::default());
        turn.annotation = None;
        self.conversation.turns.push(turn);
        let t = self.conversation.turns.len() - 1;
        let reply = match self.parser.parse_turn(&self.conversation, t, &self.cfg) {
            Ok(r) => {
                self.last_trace = Some(r.trace.clone());
                self.last_sparql = Some(r.sparql.to_string());
                let user = &mut self.conversation.turns[t];
                user.annotation = Some(r.symbols.clone());
                user.gold_sparql = Some(r.sparql.clone());
                match r.answer {
                    Some(a) => {
                        let text = verbalize(self.parser.kg(), &a);
                        user.gold_answer = Some(a);
                        text
                    }
                    None => APOLOGY.to_string(),
                }
            }
            Err(e) => {
                self.last_trace = e.trace().cloned();
                self.last_sparql = None;
                APOLOGY.to_string()
            }
        };
        if self.conversation.turns[t].annotation.is_none() {
            // an unannotated question would make the transcript invalid
            self.conversation.turns.pop();
        } else {
            self.conversation.turns.push(Turn::system(reply.clone()));
        }
        reply
    }

    pub fn reset(&mut self) {
        self.conversation.turns.clear();
        self.last_trace = None;
        self.last_sparql = None;
    }

    pub fn trace_text(&self) -> String {
        match (&self.last_sparql, &self.last_trace) {
            (_, None) => "no trace yet".to_string(),
            (Some(q), Some(t)) => format!("{q}\n{t}"),
            (None, Some(t)) => t.to_string(),
        }
    }
}

/// Run until `:quit` or end of input.
pub fn run(session: &mut Session<'_, '_>, input: impl BufRead, mut out: impl Write, prompt: bool) -> io::Result<()> {
    if prompt {
        write!(out, "{PROMPT}")?;
        out.flush()?;
    }
    for line in input.lines() {
        let line = line?;
        let line = line.trim();
        match line {
            "" => {}
            ":quit" | ":q" => break,
            ":reset" => {
                session.reset();
                writeln!(out, "conversation cleared")?;
            }
            ":trace" => writeln!(out, "{}", session.trace_text())?,
            q => writeln!(out, "{}", session.ask(q))?,
        }
        if prompt {
            write!(out, "{PROMPT}")?;
            out.flush()?;
        }
    }
    Ok(())
}
