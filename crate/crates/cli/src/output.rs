use std::io::Write;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Serialize;

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Where tables go: the `--out` file, or standard output.
pub struct Sink {
    pub out: Option<PathBuf>,
    pub format: Format,
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types always serialize");
    s.push('\n');
    s
}

impl Sink {
    /// Writes the main table.
    pub fn table(&self, body: &str) -> CliResult<()> {
        match &self.out {
            Some(path) => write_file(path, body),
            None => print(body),
        }
    }

    /// Writes a secondary table next to the main one, as
    /// `<stem>.<suffix>.<ext>`, or after it on standard output.
    pub fn sibling(&self, suffix: &str, body: &str) -> CliResult<Option<PathBuf>> {
        match &self.out {
            Some(path) => {
                let target = sibling_path(path, suffix, self.format.extension());
                write_file(&target, body)?;
                Ok(Some(target))
            }
            None => {
                print("\n")?;
                print(body)?;
                Ok(None)
            }
        }
    }
}

pub fn sibling_path(path: &Path, suffix: &str, ext: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}.{ext}"))
}

fn write_file(path: &Path, body: &str) -> CliResult<()> {
    std::fs::write(path, body).map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))
}

pub fn print(text: &str) -> CliResult<()> {
    let mut stdout = std::io::stdout().lock();
    stdout
        .write_all(text.as_bytes())
        .and_then(|_| stdout.flush())
        .map_err(|e| CliError::io(format!("cannot write to stdout: {e}")))
}

/// Summary line, marked as a comment so it can share a stream with CSV.
pub fn note(text: &str) -> CliResult<()> {
    print(&format!("# {text}\n"))
}
