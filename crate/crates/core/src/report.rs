//! Diagnostics collected from a final graph, and their text/JSON renderings.

use std::cmp::Ordering;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::graph::{Attr, AttributedGraph, EdgeLabel, NodeKind};
use crate::rules::{doc_by_code, Severity};

/// Code used for files that could not be analyzed at all.
pub const TOOL_ERR: &str = "TOOL-ERR";
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub code: String,
    pub severity: Severity,
    pub message: String,
    pub rule_title: String,
    pub file: String,
    pub line: Option<u32>,
    pub remediation: String,
}

impl Diagnostic {
    pub fn tool_error(file: &str, line: Option<u32>, message: impl Into<String>) -> Diagnostic {
        Diagnostic {
            code: TOOL_ERR.into(),
            severity: Severity::Error,
            message: message.into(),
            rule_title: "Analysis failure".into(),
            file: file.into(),
            line,
            remediation: "rewrite the script within the supported subset or check it by hand".into(),
        }
    }

    fn sort_key(&self) -> (&str, Option<u32>, Severity, &str, &str) {
        (&self.file, self.line, self.severity, &self.code, &self.message)
    }
}

impl Ord for Diagnostic {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl PartialOrd for Diagnostic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub errors: usize,
    pub warnings: usize,
}

impl Summary {
    pub fn of(diags: &[Diagnostic]) -> Summary {
        let errors = diags.iter().filter(|d| d.severity == Severity::Error).count();
        Summary {
            errors,
            warnings: diags.len() - errors,
        }
    }
}

/// The JSON document for one analyzed file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub version: u32,
    pub file: String,
    pub summary: Summary,
    pub diagnostics: Vec<Diagnostic>,
}

impl Report {
    pub fn new(file: &str, mut diagnostics: Vec<Diagnostic>) -> Report {
        diagnostics.sort();
        Report {
            version: SCHEMA_VERSION,
            file: file.into(),
            summary: Summary::of(&diagnostics),
            diagnostics,
        }
    }
}

/// One diagnostic per Fault node, located at its anchor's source line.
pub fn collect(g: &AttributedGraph, file: &str) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for fault in g.nodes_of(NodeKind::Fault) {
        let Some(code) = fault.text(Attr::Code) else { continue };
        let anchor = g.predecessors(fault.id, EdgeLabel::HasFault).next();
        let line = anchor.and_then(|a| g.node(a)).and_then(|n| n.source_line);
        let message = fault.text(Attr::Message).unwrap_or_default().to_string();
        let d = match doc_by_code(code) {
            Ok(doc) => Diagnostic {
                code: doc.meta.code,
                severity: doc.meta.severity,
                message,
                rule_title: doc.meta.title,
                file: file.into(),
                line,
                remediation: doc.remediation,
            },
            Err(_) => Diagnostic::tool_error(file, line, format!("unknown fault code {code}: {message}")),
        };
        out.push(d);
    }
    out.sort();
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Json,
}

pub fn render_text(diags: &[Diagnostic]) -> String {
    let mut s = String::new();
    for d in diags {
        match d.line {
            Some(l) => {
                let _ = write!(s, "{}:{}: ", d.file, l);
            }
            None => {
                let _ = write!(s, "{}: ", d.file);
            }
        }
        let _ = writeln!(s, "[{}] {}: {} (hint: {})", d.code, d.severity, d.message, d.remediation);
    }
    s
}

pub fn render_json(report: &Report) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

/// Several reports as one JSON array.
pub fn render_json_many(reports: &[Report]) -> String {
    let mut s = serde_json::to_string_pretty(reports).expect("reports serialize");
    s.push('\n');
    s
}

pub fn parse_json(text: &str) -> Result<Report, serde_json::Error> {
    serde_json::from_str(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::AttributedGraph;

    fn diag(code: &str, sev: Severity, line: Option<u32>) -> Diagnostic {
        Diagnostic {
            code: code.into(),
            severity: sev,
            message: "m".into(),
            rule_title: "t".into(),
            file: "f.py".into(),
            line,
            remediation: "r".into(),
        }
    }

    #[test]
    fn collects_fault_at_anchor_line() {
        let mut g = AttributedGraph::new();
        let learner = g.add_node_with(NodeKind::Learner, [], Some(14));
        g.attach_fault(learner, "APIM-10", "loss mismatch").unwrap();
        let d = collect(&g, "fig1.py");
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].line, Some(14));
        assert_eq!(d[0].severity, Severity::Error);
        assert_eq!(d[0].rule_title, "Valid Loss Linkage");
        assert!(render_text(&d).contains("[APIM-10] error:"));
    }

    #[test]
    fn empty_graph_gives_empty_report() {
        let r = Report::new("x.py", collect(&AttributedGraph::new(), "x.py"));
        assert_eq!(r.summary, Summary { errors: 0, warnings: 0 });
        let json = render_json(&r);
        assert!(json.contains("\"diagnostics\": []"));
        assert_eq!(parse_json(&json).unwrap(), r);
    }

    #[test]
    fn two_faults_on_one_node_in_code_order() {
        let mut g = AttributedGraph::new();
        let l = g.add_node_with(NodeKind::Layer, [], Some(3));
        g.attach_fault(l, "SI-21", "b").unwrap();
        g.attach_fault(l, "SI-20", "a").unwrap();
        let codes: Vec<_> = collect(&g, "f").into_iter().map(|d| d.code).collect();
        assert_eq!(codes, ["SI-20", "SI-21"]);
    }

    #[test]
    fn errors_before_warnings_on_same_line() {
        let r = Report::new(
            "f.py",
            vec![diag("SI-19", Severity::Warning, Some(5)), diag("UT-06", Severity::Error, Some(5))],
        );
        assert_eq!(r.diagnostics[0].code, "UT-06");
        assert_eq!(r.summary, Summary { errors: 1, warnings: 1 });
    }

    #[test]
    fn json_key_order_is_fixed() {
        let r = Report::new("f.py", vec![diag("UT-06", Severity::Error, Some(5))]);
        let json = render_json(&r);
        let pos = |k: &str| json.find(&format!("\"{k}\"")).unwrap();
        assert!(pos("version") < pos("file") && pos("file") < pos("summary") && pos("summary") < pos("diagnostics"));
        assert!(pos("code") < pos("severity") && pos("severity") < pos("message"));
        assert_eq!(parse_json(&json).unwrap(), r);
    }
}
