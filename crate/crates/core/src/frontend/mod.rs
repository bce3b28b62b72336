//! Python-subset front end: parses a training script, interprets it
//! abstractly and builds the attributed graph of the model it defines.

pub mod ast;
pub mod defaults;
mod extract;
pub mod interp;
pub mod lexer;
pub mod names;
pub mod parser;
pub mod recognize;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::graph::AttributedGraph;

pub use interp::{ApiCall, BindingTable, Literal, Options, Trace, Value};
pub use recognize::{recognize_layer, LayerSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrontendError {
    #[error("line {line}: syntax error: {message}")]
    Syntax { line: u32, message: String },
    #[error("line {line}: unsupported construct: {message}")]
    UnsupportedConstruct { line: u32, message: String },
    #[error("no model found: no layer or compile call was recognized")]
    NoModelFound,
    #[error("unsupported topology: {message}")]
    UnsupportedTopology { line: Option<u32>, message: String },
}

impl FrontendError {
    pub fn line(&self) -> Option<u32> {
        match self {
            FrontendError::Syntax { line, .. } | FrontendError::UnsupportedConstruct { line, .. } => Some(*line),
            FrontendError::UnsupportedTopology { line, .. } => *line,
            FrontendError::NoModelFound => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Dialect {
    Keras,
    TensorflowV1,
    #[default]
    Auto,
}

impl Dialect {
    pub fn as_str(self) -> &'static str {
        match self {
            Dialect::Keras => "keras",
            Dialect::TensorflowV1 => "tensorflow_v1",
            Dialect::Auto => "auto",
        }
    }
}

impl fmt::Display for Dialect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Dialect {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "keras" => Ok(Dialect::Keras),
            "tf1" | "tensorflow_v1" | "tensorflow" => Ok(Dialect::TensorflowV1),
            "auto" => Ok(Dialect::Auto),
            other => Err(format!("unknown dialect '{other}' (expected auto, keras or tf1)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScriptSource {
    pub path: String,
    pub text: String,
    pub dialect: Dialect,
}

impl ScriptSource {
    pub fn new(path: impl Into<String>, text: impl Into<String>) -> Self {
        ScriptSource {
            path: path.into(),
            text: text.into(),
            dialect: Dialect::Auto,
        }
    }

    pub fn with_dialect(mut self, dialect: Dialect) -> Self {
        self.dialect = dialect;
        self
    }

    pub fn lines(&self) -> impl Iterator<Item = &str> + '_ {
        self.text.lines()
    }
}

/// Recorded library calls and final module-level bindings of a script.
pub fn parse_script(src: &ScriptSource, opts: Options) -> Result<Trace, FrontendError> {
    let stmts = parser::parse(&src.text)?;
    interp::interpret(&stmts, opts)
}

#[derive(Debug, Clone)]
pub struct Extraction {
    pub graph: AttributedGraph,
    /// Dialect actually used (never `Auto`).
    pub dialect: Dialect,
    pub warnings: Vec<String>,
}

pub fn extract_graph(src: &ScriptSource, opts: Options) -> Result<Extraction, FrontendError> {
    let trace = parse_script(src, opts)?;
    let dialect = match src.dialect {
        Dialect::Auto => detect_dialect(&trace.calls),
        d => d,
    };
    extract::build(&trace.calls, dialect)
}

/// Sessions and placeholders mark TensorFlow v1 graph-mode code.
pub fn detect_dialect(calls: &[ApiCall]) -> Dialect {
    let tf1 = calls.iter().any(|c| {
        matches!(
            c.callee.as_str(),
            "tf.Session" | "tf.InteractiveSession" | "tf.placeholder" | "tf.train.MonitoredTrainingSession"
        )
    });
    if tf1 {
        Dialect::TensorflowV1
    } else {
        Dialect::Keras
    }
}
