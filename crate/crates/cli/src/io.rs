//! Input files, atomic output and error reporting.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use serde::de::DeserializeOwned;
use serde_json::json;

use crate::Global;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or flag combinations (exit 2).
    Usage(String),
    /// An input file does not exist (exit 2).
    MissingFile(PathBuf),
    /// Input that cannot be read or decoded (exit 1).
    Input { path: PathBuf, message: String },
    /// The library rejected the request (exit 1).
    Domain(cutset_sync::Error),
    /// Writing the result failed (exit 1).
    Output(String),
}

impl From<cutset_sync::Error> for CliError {
    fn from(e: cutset_sync::Error) -> Self {
        CliError::Domain(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::MissingFile(_) => 2,
            _ => 1,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "UsageError",
            CliError::MissingFile(_) => "MissingFile",
            CliError::Input { .. } => "InputError",
            CliError::Domain(e) => e.kind(),
            CliError::Output(_) => "OutputError",
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) | CliError::Output(m) => m.trim_end().to_string(),
            CliError::MissingFile(p) => format!("no such file: {}", p.display()),
            CliError::Input { path, message } => format!("{}: {message}", path.display()),
            CliError::Domain(e) => e.to_string(),
        }
    }
}

/// Prints `{"error": {"kind", "message"}}` on stderr and returns the exit code.
pub fn report_error(e: &CliError) -> ExitCode {
    let obj = json!({ "error": { "kind": e.kind(), "message": e.message() } });
    eprintln!("{obj}");
    ExitCode::from(e.exit_code())
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => CliError::MissingFile(path.to_path_buf()),
        _ => CliError::Input {
            path: path.to_path_buf(),
            message: e.to_string(),
        },
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::Input {
        path: path.to_path_buf(),
        message: format!("invalid JSON: {e}"),
    })
}

/// Writes `bytes` to `path` through a temporary file in the same directory
/// followed by a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let fail = |e: std::io::Error| CliError::Output(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(fail)?;
    tmp.write_all(bytes).map_err(fail)?;
    tmp.as_file().sync_all().map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}

pub fn emit(global: &Global, content: &str) -> Result<(), CliError> {
    match &global.output {
        Some(path) => {
            write_atomic(path, content.as_bytes())?;
            if !global.quiet {
                eprintln!("wrote {}", path.display());
            }
            Ok(())
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(content.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Output(e.to_string()))
        }
    }
}

pub fn to_json<T: serde::Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Output(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Renders a header and rows of records as CSV.
pub fn to_csv<R: AsRef<[String]>>(header: &[&str], rows: &[R]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Output(e.to_string());
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(r.as_ref()).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))
}

/// Shortest round-trip representation; empty for missing values.
pub fn num(v: Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}
