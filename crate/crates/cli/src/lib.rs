//! Command implementations behind the `dlint` binary.

pub mod config;
pub mod eval;

use std::path::Path;

use rayon::prelude::*;

use dlint_core::frontend::{Dialect, ScriptSource};
use dlint_core::report::{Diagnostic, Report};
use dlint_core::rules::Severity;
use dlint_core::{analyze, Analysis, AnalysisOptions};

pub const EXIT_CLEAN: i32 = 0;
pub const EXIT_WARNINGS: i32 = 1;
pub const EXIT_ERRORS: i32 = 2;
pub const EXIT_FAILURE: i32 = 3;

#[derive(Debug, Clone, Default)]
pub struct Settings {
    pub analysis: AnalysisOptions,
    pub dialect: Dialect,
}

fn failed(path: &str, message: String) -> Analysis {
    Analysis {
        report: Report::new(path, vec![Diagnostic::tool_error(path, None, message)]),
        graph: None,
        trace: Vec::new(),
        warnings: Vec::new(),
        dialect: None,
        failed: true,
    }
}

pub fn check_file(path: &Path, settings: &Settings) -> Analysis {
    let name = path.display().to_string();
    let bytes = match std::fs::read(path) {
        Ok(b) => b,
        Err(e) => return failed(&name, format!("cannot read file: {e}")),
    };
    let text = match String::from_utf8(bytes) {
        Ok(t) => t,
        Err(_) => return failed(&name, "file is not valid UTF-8".into()),
    };
    check_source(&ScriptSource::new(name, text).with_dialect(settings.dialect), settings)
}

pub fn check_source(src: &ScriptSource, settings: &Settings) -> Analysis {
    // a panic in one file must not take the others down
    match std::panic::catch_unwind(|| analyze(src, &settings.analysis)) {
        Ok(a) => a,
        Err(_) => failed(&src.path, "internal error while analyzing".into()),
    }
}

/// Analyses in input order; files are processed in parallel.
pub fn check_paths<P: AsRef<Path> + Sync>(paths: &[P], settings: &Settings) -> Vec<Analysis> {
    paths.par_iter().map(|p| check_file(p.as_ref(), settings)).collect()
}

pub fn exit_code(analyses: &[Analysis]) -> i32 {
    if analyses.iter().any(|a| a.failed) {
        return EXIT_FAILURE;
    }
    let diags = analyses.iter().flat_map(|a| a.report.diagnostics.iter());
    let mut code = EXIT_CLEAN;
    for d in diags {
        match d.severity {
            Severity::Error => return EXIT_ERRORS,
            Severity::Warning => code = EXIT_WARNINGS,
        }
    }
    code
}
