//! End-to-end analysis of one script.

use crate::engine::{run_to_fixpoint, Application};
use crate::frontend::{self, Dialect, FrontendError, Options, ScriptSource};
use crate::graph::AttributedGraph;
use crate::report::{collect, Diagnostic, Report};
use crate::rules::{catalog_with, patterns_of, CatalogOptions, RuleFilter};
use crate::shape::propagate_shapes;

#[derive(Debug, Clone, Default)]
pub struct AnalysisOptions {
    pub filter: RuleFilter,
    pub catalog: CatalogOptions,
    pub frontend: Options,
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub report: Report,
    /// Final graph, absent when the script could not be analyzed.
    pub graph: Option<AttributedGraph>,
    pub trace: Vec<Application>,
    pub warnings: Vec<String>,
    pub dialect: Option<Dialect>,
    /// Syntax, unsupported-construct or topology failure.
    pub failed: bool,
}

pub fn analyze(src: &ScriptSource, opts: &AnalysisOptions) -> Analysis {
    let failure = |diag: Diagnostic| Analysis {
        report: Report::new(&src.path, vec![diag]),
        graph: None,
        trace: Vec::new(),
        warnings: Vec::new(),
        dialect: None,
        failed: true,
    };
    let extraction = match frontend::extract_graph(src, opts.frontend.clone()) {
        Ok(x) => x,
        Err(e) => return failure(Diagnostic::tool_error(&src.path, e.line(), message_of(&e))),
    };
    let graph = propagate_shapes(extraction.graph);
    let rules = opts.filter.apply(catalog_with(opts.catalog));
    let fix = match run_to_fixpoint(graph, &patterns_of(&rules)) {
        Ok(f) => f,
        Err(e) => return failure(Diagnostic::tool_error(&src.path, None, e.to_string())),
    };
    Analysis {
        report: Report::new(&src.path, collect(&fix.graph, &src.path)),
        graph: Some(fix.graph),
        trace: fix.trace,
        warnings: extraction.warnings,
        dialect: Some(extraction.dialect),
        failed: false,
    }
}

fn message_of(e: &FrontendError) -> String {
    match e {
        FrontendError::Syntax { message, .. } => format!("syntax error: {message}"),
        FrontendError::UnsupportedConstruct { message, .. } => format!("unsupported construct: {message}"),
        FrontendError::UnsupportedTopology { message, .. } => format!("unsupported topology: {message}"),
        FrontendError::NoModelFound => e.to_string(),
    }
}
