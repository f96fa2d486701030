use std::fs;
use std::path::{Path, PathBuf};

use reeb_edit::circlefn::FunctionData;
use reeb_edit::reeb::GraphData;
use reeb_edit::{CircleFunction, LabelledReebGraph};
use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// The input is well-formed but violates a mathematical invariant.
    #[error("{0}")]
    Domain(String),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Domain(_) => 1,
            CliError::Io { .. } | CliError::Usage(_) => 2,
        }
    }
}

impl From<reeb_edit::Error> for CliError {
    fn from(e: reeb_edit::Error) -> Self {
        CliError::Domain(e.to_string())
    }
}

pub fn domain<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Domain(e.to_string())
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let io = |message: String| CliError::Io {
        path: path.to_owned(),
        message,
    };
    let text = fs::read_to_string(path).map_err(|e| io(e.to_string()))?;
    serde_json::from_str(&text).map_err(|e| io(e.to_string()))
}

pub fn read_graph(path: &Path) -> Result<LabelledReebGraph, CliError> {
    let data: GraphData = read_json(path)?;
    LabelledReebGraph::try_from(data).map_err(domain)
}

pub fn read_function(path: &Path) -> Result<CircleFunction, CliError> {
    let data: FunctionData = read_json(path)?;
    CircleFunction::try_from(data).map_err(domain)
}

pub fn read_config<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    read_json(path)
}

/// Writes to `out`, or stdout when absent.
pub fn emit_text(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Io {
            path: p.to_owned(),
            message: e.to_string(),
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(domain)?;
    text.push('\n');
    emit_text(out, &text)
}
