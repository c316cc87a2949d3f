//! Script runner for the grewrite engine.
//!
//! A script imports metamodels and a model, includes rule files, runs
//! rule-application sequences and writes the results. See `docs/shell.md`
//! for the command reference and the trace file format.

#![allow(clippy::result_large_err)]

pub mod script;
pub mod shell;

use std::path::PathBuf;
use std::time::Duration;

use grewrite::case::CaseError;
use grewrite::lexer::SyntaxError;
use grewrite::model_io::{EcoreError, ExportError, LayoutError, XmiError};
use grewrite::rules::RuleError;
use grewrite::schema_text::SchemaTextError;
use grewrite::sequences::SeqError;
use grewrite::SchemaError;
use thiserror::Error;

pub use script::{parse_script, Command, Line};
pub use shell::Shell;

#[derive(Debug, Error)]
pub enum ErrorKind {
    #[error("unknown command `{0}`")]
    UnknownCommand(String),
    #[error("usage: {0}")]
    Usage(&'static str),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: unsupported file type, expected .ecore, .gm or .xmi")]
    FileType { path: PathBuf },
    #[error("{path}: {source}")]
    Ecore { path: PathBuf, source: EcoreError },
    #[error("{path}: {source}")]
    SchemaText {
        path: PathBuf,
        source: SchemaTextError,
    },
    #[error("{path}: {source}")]
    Xmi { path: PathBuf, source: XmiError },
    #[error("{path}:{source}")]
    RuleSyntax { path: PathBuf, source: SyntaxError },
    #[error("{path}: {what} `{name}` is already defined")]
    DuplicateRule {
        path: PathBuf,
        what: &'static str,
        name: String,
    },
    #[error("{path}: {source}")]
    Layout { path: PathBuf, source: LayoutError },
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error(transparent)]
    Rules(#[from] RuleError),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Sequence(#[from] SeqError),
    #[error(transparent)]
    Export(#[from] ExportError),
    #[error(transparent)]
    Case(#[from] CaseError),
    #[error("the schema is fixed once a model has been imported")]
    SchemaFrozen,
    #[error("a model has already been imported; use `new graph` first")]
    GraphExists,
}

#[derive(Debug, Error)]
#[error("line {line}: {kind}")]
pub struct ScriptError {
    pub line: u32,
    pub kind: Box<ErrorKind>,
}

impl ScriptError {
    pub fn new(line: u32, kind: ErrorKind) -> ScriptError {
        ScriptError {
            line,
            kind: Box::new(kind),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Options {
    /// Suppresses per-command progress lines.
    pub quiet: bool,
    /// Appends timings to progress lines.
    pub time: bool,
    /// Traces every `xgrs` into this file, not only `debug xgrs`.
    pub trace: Option<PathBuf>,
    /// Scan match candidates in reverse creation order.
    pub reverse_order: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Timing {
    pub line: u32,
    pub command: &'static str,
    pub elapsed: Duration,
}

/// Outcome of a script run.
#[derive(Clone, Debug, Default)]
pub struct Report {
    pub timings: Vec<Timing>,
    /// Time spent in `import` commands.
    pub import: Duration,
    /// Time spent in `xgrs` and `debug xgrs` commands.
    pub extraction: Duration,
    /// Time spent in all commands.
    pub total: Duration,
    pub applications: u64,
    pub trace_records: usize,
    pub trace_file: Option<PathBuf>,
    pub nodes: usize,
    pub edges: usize,
}
