use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::Failure;

pub const SCHEMA_VERSION: u32 = 1;

/// Top-level JSON document.
#[derive(Serialize)]
pub struct Document<'a, T: Serialize> {
    pub schema_version: u32,
    pub command: &'a str,
    #[serde(flatten)]
    pub body: T,
}

/// Opens `path` for writing, or stdout when absent.
pub fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| io_failure(p, e))?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure { outcome: crate::Outcome::Io, message: format!("{}: {e}", path.display()) }
}

pub fn write_json<T: Serialize>(path: Option<&Path>, command: &str, body: T) -> Result<(), Failure> {
    let mut w = sink(path)?;
    let doc = Document { schema_version: SCHEMA_VERSION, command, body };
    serde_json::to_writer_pretty(&mut w, &doc).map_err(|e| Failure::internal(e.to_string()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}
