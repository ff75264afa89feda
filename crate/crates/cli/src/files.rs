//! Input loading and atomic output.

use std::fs::{self, File};
use std::io::{BufReader, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use convkgqa::kg::{load_turtle, read_dump_dir, IngestReport, KnowledgeGraph};
use convkgqa::templates::{read_dataset, Conversation};

/// A Turtle file, or a dump directory.
pub fn load_kg(path: &Path) -> Result<KnowledgeGraph> {
    if !path.exists() {
        bail!("knowledge graph not found: {}", path.display());
    }
    let (kg, report) = if path.is_dir() {
        read_dump_dir(path).with_context(|| format!("reading dump directory {}", path.display()))?
    } else {
        let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        load_turtle(BufReader::new(file))
    };
    warn_ingest(path, &report);
    Ok(kg)
}

pub fn warn_ingest(path: &Path, report: &IngestReport) {
    if report.diagnostics.is_empty() {
        return;
    }
    eprintln!("{}: {} diagnostics", path.display(), report.diagnostics.len());
    for d in report.diagnostics.iter().take(10) {
        eprintln!("  {d}");
    }
}

pub fn load_dataset(path: &Path) -> Result<Vec<Conversation>> {
    let file = File::open(path).with_context(|| format!("opening dataset {}", path.display()))?;
    read_dataset(BufReader::new(file)).with_context(|| format!("reading dataset {}", path.display()))
}

/// Write through a temporary file in the target directory, then rename.
pub fn write_atomic(path: &Path, fill: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("writing into {}", dir.display()))?;
    fill(tmp.as_file_mut()).with_context(|| format!("writing {}", path.display()))?;
    tmp.as_file_mut().flush()?;
    tmp.persist(path).with_context(|| format!("renaming onto {}", path.display()))?;
    Ok(())
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        w.write_all(b"\n")
    })
}
