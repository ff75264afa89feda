//! `convkgqa`: graph building, dataset checks, splits, parsing, evaluation,
//! ad-hoc queries and a chat loop.
//!
//! Every option can also be set through a `CONVKGQA_` environment variable
//! (`--max-len` reads `CONVKGQA_MAX_LEN`). Exit status is 0 on success, 1
//! when the content fails a check and 2 on usage or I/O errors.

mod chat;
mod files;

use std::io::{self, BufWriter, IsTerminal};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser as ClapParser, Subcommand};
use convkgqa::eval::{evaluate_dataset, make_splits, Ratios, SplitSpec, Strata};
use convkgqa::kg::{export_turtle, read_dump_dir};
use convkgqa::parser::{Parser, ParserConfig, Selector};
use convkgqa::sparql::{evaluate, parse_query};
use convkgqa::templates::{dataset_stats, validate_conversation, verbalize, write_dataset, RepairPolicy};

use files::{load_dataset, load_kg, warn_ingest, write_atomic, write_json};

#[derive(ClapParser)]
#[command(name = "convkgqa", version, about = "Conversational question answering over a knowledge graph")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a Turtle graph from a dump directory.
    BuildKg {
        /// Directory of facts/labels/types JSON-lines files.
        #[arg(long, env = "CONVKGQA_SOURCE")]
        source: PathBuf,
        #[arg(long, env = "CONVKGQA_OUT")]
        out: PathBuf,
    },
    /// Check gold answers against the graph and write a repaired dataset.
    Validate {
        #[command(flatten)]
        inputs: Inputs,
        /// Repaired dataset; the report goes next to it as `<out>.report.json`.
        #[arg(long, env = "CONVKGQA_OUT")]
        out: PathBuf,
        #[arg(long, env = "CONVKGQA_POLICY", default_value = "repair", value_parser = ["repair", "truncate", "report"])]
        policy: String,
    },
    /// Parse every annotated turn and score the predictions.
    Eval {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        parsing: Parsing,
        /// Output directory for report.json and report.txt.
        #[arg(long, env = "CONVKGQA_OUT")]
        out: PathBuf,
        /// Row groups: type, phenomenon or all (comma-separated).
        #[arg(long, env = "CONVKGQA_STRATA", default_value = "all")]
        strata: Strata,
    },
    /// Split a dataset with held-out sub-types.
    Split {
        #[arg(long, env = "CONVKGQA_DATASET")]
        dataset: PathBuf,
        /// Output directory for train/valid/test.jsonl and manifest.json.
        #[arg(long, env = "CONVKGQA_OUT")]
        out: PathBuf,
        #[arg(long = "split-spec", env = "CONVKGQA_SPLIT_SPEC", value_parser = ["CountLogic", "UnionMulti", "Verify3"])]
        split_spec: String,
        #[arg(long, env = "CONVKGQA_SEED", default_value_t = 0)]
        seed: u64,
        /// Train/valid/test ratios for the conversations not held out.
        #[arg(long, env = "CONVKGQA_RATIOS", default_value = "0.8,0.1,0.1")]
        ratios: String,
    },
    /// Parse the user turns of one conversation and print the results.
    Parse {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        parsing: Parsing,
        /// Conversation id; the first conversation by default.
        #[arg(long)]
        conversation: Option<String>,
        /// Only this turn index.
        #[arg(long)]
        turn: Option<usize>,
        /// Write JSON lines here instead of stdout.
        #[arg(long, env = "CONVKGQA_OUT")]
        out: Option<PathBuf>,
    },
    /// Run one SPARQL query against the graph.
    Query {
        #[arg(long, env = "CONVKGQA_KG")]
        kg: PathBuf,
        /// Query text, or `-` to read it from stdin.
        sparql: String,
        #[arg(long)]
        json: bool,
    },
    /// Dataset statistics.
    Stats {
        #[arg(long, env = "CONVKGQA_DATASET")]
        dataset: PathBuf,
        /// Adds neighbourhood sizes.
        #[arg(long, env = "CONVKGQA_KG")]
        kg: Option<PathBuf>,
    },
    /// Interactive question answering; `:trace`, `:reset`, `:quit`.
    Chat {
        #[arg(long, env = "CONVKGQA_KG")]
        kg: PathBuf,
        #[command(flatten)]
        parsing: Parsing,
        /// Save the session as a one-conversation dataset on exit.
        #[arg(long, env = "CONVKGQA_OUT")]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Inputs {
    /// Turtle file or dump directory.
    #[arg(long, env = "CONVKGQA_KG")]
    kg: PathBuf,
    /// JSON-lines dataset.
    #[arg(long, env = "CONVKGQA_DATASET")]
    dataset: PathBuf,
}

#[derive(Args)]
struct Parsing {
    /// Previous interactions visible to each turn.
    #[arg(long, env = "CONVKGQA_WINDOW", default_value_t = 1, value_parser = clap::value_parser!(u64).range(0..=16))]
    window: u64,
    #[arg(long, env = "CONVKGQA_BEAM", default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..=256))]
    beam: u64,
    /// Token budget of one linearized input chunk.
    #[arg(long = "max-len", env = "CONVKGQA_MAX_LEN", default_value_t = 512, value_parser = clap::value_parser!(u64).range(16..=65536))]
    max_len: u64,
    #[arg(long, env = "CONVKGQA_SEED", default_value_t = 0)]
    seed: u64,
    /// `rules` predicts everything; `oracle` reads gold annotations.
    #[arg(long, env = "CONVKGQA_SELECTOR", default_value = "rules", value_parser = ["rules", "oracle"])]
    selector: String,
}

impl Parsing {
    fn config(&self) -> ParserConfig {
        ParserConfig {
            selector: self.selector.parse::<Selector>().expect("checked by clap"),
            window: self.window as usize,
            beam: self.beam as usize,
            seed: self.seed,
            max_len: self.max_len as usize,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::BuildKg { source, out } => build_kg(&source, &out),
        Command::Validate { inputs, out, policy } => validate(&inputs, &out, policy.parse().expect("checked by clap")),
        Command::Eval {
            inputs,
            parsing,
            out,
            strata,
        } => eval(&inputs, &parsing, &out, strata),
        Command::Split {
            dataset,
            out,
            split_spec,
            seed,
            ratios,
        } => split(&dataset, &out, &split_spec, seed, &ratios),
        Command::Parse {
            inputs,
            parsing,
            conversation,
            turn,
            out,
        } => parse(&inputs, &parsing, conversation.as_deref(), turn, out.as_deref()),
        Command::Query { kg, sparql, json } => query(&kg, &sparql, json),
        Command::Stats { dataset, kg } => stats(&dataset, kg.as_deref()),
        Command::Chat { kg, parsing, out } => chat(&kg, &parsing, out.as_deref()),
    }
}

fn build_kg(source: &Path, out: &Path) -> Result<ExitCode> {
    if !source.is_dir() {
        anyhow::bail!("source directory not found: {}", source.display());
    }
    let (kg, report) = read_dump_dir(source).with_context(|| format!("reading {}", source.display()))?;
    warn_ingest(source, &report);
    write_atomic(out, |w| export_turtle(&kg, w))?;
    println!("{} triples, {} labels -> {}", kg.len(), kg.label_count(), out.display());
    Ok(ExitCode::SUCCESS)
}

fn validate(inputs: &Inputs, out: &Path, policy: RepairPolicy) -> Result<ExitCode> {
    let kg = load_kg(&inputs.kg)?;
    let data = match load_dataset(&inputs.dataset) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e:#}");
            return Ok(ExitCode::from(1));
        }
    };
    let mut repaired = Vec::with_capacity(data.len());
    let mut reports = Vec::with_capacity(data.len());
    let mut errors = 0;
    let mut structural = Vec::new();
    for c in &data {
        match validate_conversation(&kg, c, policy) {
            Ok((fixed, report)) => {
                errors += report.errors;
                repaired.push(fixed);
                reports.push(report);
            }
            Err(e) => {
                errors += 1;
                structural.push(serde_json::json!({"conversation": c.id, "error": e.to_string()}));
            }
        }
    }
    write_atomic(out, |w| write_dataset(w, &repaired))?;
    let report_path = PathBuf::from(format!("{}.report.json", out.display()));
    write_json(
        &report_path,
        &serde_json::json!({"conversations": reports, "structural": structural, "errors": errors}),
    )?;
    let (ok, redefined, truncated, mismatched) = reports.iter().fold((0, 0, 0, 0), |a, r| {
        (a.0 + r.ok, a.1 + r.redefined, a.2 + r.truncated, a.3 + r.mismatched)
    });
    println!(
        "{} conversations: {ok} ok, {redefined} redefined, {truncated} truncated, {mismatched} mismatched, {errors} errors",
        data.len()
    );
    Ok(if errors == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn eval(inputs: &Inputs, parsing: &Parsing, out: &Path, strata: Strata) -> Result<ExitCode> {
    let kg = load_kg(&inputs.kg)?;
    let data = load_dataset(&inputs.dataset)?;
    let parser = Parser::new(&kg);
    let report = evaluate_dataset(&parser, &parsing.config(), &data, strata);
    write_json(&out.join("report.json"), &report)?;
    let table = report.table();
    write_atomic(&out.join("report.txt"), |w| w.write_all(table.as_bytes()))?;
    print!("{table}");
    if report.failures > 0 {
        eprintln!("{} turns failed to parse or execute and were scored as wrong", report.failures);
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_ratios(text: &str) -> Result<Ratios> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("ratios `{text}`: expected three numbers"))?;
    match parts[..] {
        [train, valid, test] => Ok(Ratios { train, valid, test }),
        _ => anyhow::bail!("ratios `{text}`: expected three numbers"),
    }
}

fn split(dataset: &Path, out: &Path, spec: &str, seed: u64, ratios: &str) -> Result<ExitCode> {
    let spec = SplitSpec::builtin(spec)?;
    let ratios = parse_ratios(ratios)?;
    let data = load_dataset(dataset)?;
    let splits = match make_splits(&data, &spec, ratios, seed) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(ExitCode::from(1));
        }
    };
    for (name, part) in [("train", &splits.train), ("valid", &splits.valid), ("test", &splits.test)] {
        write_atomic(&out.join(format!("{name}.jsonl")), |w| write_dataset(w, part))?;
    }
    write_json(&out.join("manifest.json"), &splits.manifest(&spec, seed))?;
    println!(
        "{}: {} train, {} valid, {} test",
        spec.name,
        splits.train.len(),
        splits.valid.len(),
        splits.test.len()
    );
    Ok(ExitCode::SUCCESS)
}

fn parse(inputs: &Inputs, parsing: &Parsing, id: Option<&str>, turn: Option<usize>, out: Option<&Path>) -> Result<ExitCode> {
    let kg = load_kg(&inputs.kg)?;
    let data = load_dataset(&inputs.dataset)?;
    let c = match id {
        Some(id) => data.iter().find(|c| c.id == id).with_context(|| format!("no conversation `{id}`"))?,
        None => data.first().context("dataset is empty")?,
    };
    let turns: Vec<usize> = match turn {
        Some(t) if c.turns.get(t).is_some_and(|x| x.is_user()) => vec![t],
        Some(t) => anyhow::bail!("turn {t} of `{}` is not a user turn", c.id),
        None => (0..c.turns.len()).filter(|t| c.turns[*t].is_user()).collect(),
    };
    let parser = Parser::new(&kg);
    let cfg = parsing.config();
    let mut lines = Vec::new();
    let mut failed = 0;
    for t in turns {
        let line = match parser.parse_turn(c, t, &cfg) {
            Ok(r) => serde_json::json!({"turn": t, "result": r}),
            Err(e) => {
                failed += 1;
                let trace = e.trace().map(|tr| tr.to_string());
                serde_json::json!({"turn": t, "error": e.to_string(), "trace": trace})
            }
        };
        lines.push(serde_json::to_string(&line)?);
    }
    let text = lines.iter().map(|l| format!("{l}\n")).collect::<String>();
    match out {
        Some(path) => write_atomic(path, |w| w.write_all(text.as_bytes()))?,
        None => print!("{text}"),
    }
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn query(kg: &Path, sparql: &str, json: bool) -> Result<ExitCode> {
    let kg = load_kg(kg)?;
    let text = if sparql == "-" {
        io::read_to_string(io::stdin()).context("reading the query from stdin")?
    } else {
        sparql.to_string()
    };
    let q = match parse_query(&text) {
        Ok(q) => q,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(ExitCode::from(1));
        }
    };
    match evaluate(&kg, &q) {
        Ok(a) if json => println!("{}", serde_json::to_string(&a)?),
        Ok(a) => println!("{}", verbalize(&kg, &a)),
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(ExitCode::from(1));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn stats(dataset: &Path, kg: Option<&Path>) -> Result<ExitCode> {
    let data = load_dataset(dataset)?;
    let kg = kg.map(load_kg).transpose()?;
    let report = dataset_stats(&data, kg.as_ref());
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(ExitCode::SUCCESS)
}

fn chat(kg: &Path, parsing: &Parsing, out: Option<&Path>) -> Result<ExitCode> {
    let kg = load_kg(kg)?;
    let parser = Parser::new(&kg);
    let mut session = chat::Session::new(&parser, parsing.config());
    let stdin = io::stdin();
    let interactive = stdin.is_terminal();
    chat::run(&mut session, stdin.lock(), BufWriter::new(io::stdout().lock()), interactive)?;
    if let Some(path) = out {
        write_atomic(path, |w| write_dataset(w, std::slice::from_ref(&session.conversation)))?;
    }
    Ok(ExitCode::SUCCESS)
}
