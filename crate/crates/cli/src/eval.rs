//! Labelled-corpus evaluation: recall and precision of the checker against
//! expected fault codes.
//!
//! Manifest format, one case per line:
//! `path<TAB>codes[<TAB>line-hints[<TAB>tags]]`. `codes` is a comma list or
//! `-` for a clean program; `line-hints` is a comma list of `CODE:LINE` (or
//! `-`); `tags` is a comma list, where `allow-extra` stops unexpected
//! findings from counting as false positives. Blank lines and lines starting
//! with `#` are skipped. Paths are relative to the manifest.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use dlint_core::report::Report;
use dlint_core::rules::is_valid_code;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusCase {
    pub path: PathBuf,
    pub expected: BTreeSet<String>,
    pub lines: BTreeMap<String, u32>,
    pub tags: Vec<String>,
}

impl CorpusCase {
    pub fn allow_extra(&self) -> bool {
        self.tags.iter().any(|t| t == "allow-extra")
    }
}

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("cannot read manifest {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("manifest line {line}: {message}")]
    Invalid { line: usize, message: String },
    #[error("manifest lists no cases")]
    Empty,
}

fn items(field: &str) -> impl Iterator<Item = &str> {
    field.split(',').map(str::trim).filter(|s| !s.is_empty() && *s != "-")
}

pub fn parse_manifest(text: &str, base: &Path) -> Result<Vec<CorpusCase>, ManifestError> {
    let mut cases = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
            continue;
        }
        let bad = |message: String| ManifestError::Invalid { line, message };
        let fields: Vec<&str> = raw.split('\t').collect();
        if fields.len() < 2 || fields.len() > 4 {
            return Err(bad(format!("expected 2 to 4 tab-separated fields, got {}", fields.len())));
        }
        let mut expected = BTreeSet::new();
        for code in items(fields[1]) {
            if !is_valid_code(code) {
                return Err(bad(format!("unknown code '{code}'")));
            }
            expected.insert(code.to_ascii_uppercase());
        }
        let mut lines = BTreeMap::new();
        for hint in items(fields.get(2).copied().unwrap_or("")) {
            let (code, l) = hint
                .split_once(':')
                .ok_or_else(|| bad(format!("line hint '{hint}' is not CODE:LINE")))?;
            let code = code.trim().to_ascii_uppercase();
            if !expected.contains(&code) {
                return Err(bad(format!("line hint for '{code}', which is not expected")));
            }
            let l: u32 = l.trim().parse().map_err(|_| bad(format!("bad line number in '{hint}'")))?;
            lines.insert(code, l);
        }
        let tags = items(fields.get(3).copied().unwrap_or("")).map(str::to_string).collect();
        cases.push(CorpusCase {
            path: base.join(fields[0].trim()),
            expected,
            lines,
            tags,
        });
    }
    if cases.is_empty() {
        return Err(ManifestError::Empty);
    }
    Ok(cases)
}

pub fn load_manifest(path: &Path) -> Result<Vec<CorpusCase>, ManifestError> {
    let text = std::fs::read_to_string(path).map_err(|source| ManifestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_manifest(&text, path.parent().unwrap_or(Path::new(".")))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Counts {
    fn add(&mut self, o: Counts) {
        self.tp += o.tp;
        self.fp += o.fp;
        self.fn_ += o.fn_;
    }

    /// `None` when undefined (no expected findings).
    pub fn recall(&self) -> Option<f64> {
        let d = self.tp + self.fn_;
        (d > 0).then(|| self.tp as f64 / d as f64)
    }

    pub fn precision(&self) -> Option<f64> {
        let d = self.tp + self.fp;
        (d > 0).then(|| self.tp as f64 / d as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseResult {
    pub case: String,
    pub expected: Vec<String>,
    pub found: Vec<String>,
    pub counts: Counts,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalSummary {
    pub cases: Vec<CaseResult>,
    pub per_rule: BTreeMap<String, Counts>,
    pub overall: Counts,
    pub recall: Option<f64>,
    pub precision: Option<f64>,
}

impl EvalSummary {
    pub fn perfect(&self) -> bool {
        self.overall.fp == 0 && self.overall.fn_ == 0
    }
}

/// Scores one case. Each expected code counts once; each unexpected code
/// counts once however many diagnostics carry it.
pub fn score(case: &CorpusCase, report: &Report) -> (CaseResult, BTreeMap<String, Counts>) {
    let found: BTreeSet<String> = report.diagnostics.iter().map(|d| d.code.clone()).collect();
    let mut per = BTreeMap::<String, Counts>::new();
    for code in &case.expected {
        let hit = report
            .diagnostics
            .iter()
            .any(|d| &d.code == code && case.lines.get(code).is_none_or(|&l| d.line == Some(l)));
        let c = per.entry(code.clone()).or_default();
        if hit {
            c.tp += 1;
        } else {
            c.fn_ += 1;
        }
    }
    if !case.allow_extra() {
        for code in found.difference(&case.expected) {
            per.entry(code.clone()).or_default().fp += 1;
        }
    }
    let mut counts = Counts::default();
    per.values().for_each(|c| counts.add(*c));
    let result = CaseResult {
        case: case.path.display().to_string(),
        expected: case.expected.iter().cloned().collect(),
        found: found.into_iter().collect(),
        counts,
    };
    (result, per)
}

pub fn evaluate(cases: &[CorpusCase], run: impl Fn(&Path) -> Report + Sync) -> EvalSummary {
    let scored: Vec<_> = cases.par_iter().map(|c| score(c, &run(&c.path))).collect();
    let mut per_rule = BTreeMap::<String, Counts>::new();
    let mut overall = Counts::default();
    let mut results = Vec::new();
    for (r, per) in scored {
        for (code, c) in per {
            per_rule.entry(code).or_default().add(c);
        }
        overall.add(r.counts);
        results.push(r);
    }
    EvalSummary {
        cases: results,
        per_rule,
        recall: overall.recall(),
        precision: overall.precision(),
        overall,
    }
}

fn pct(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{:.1}%", x * 100.0))
}

fn join(v: &[String]) -> String {
    if v.is_empty() {
        "-".into()
    } else {
        v.join(",")
    }
}

pub fn render_text(s: &EvalSummary) -> String {
    let mut out = String::new();
    let w = s.cases.iter().map(|c| c.case.len()).max().unwrap_or(4).max(4);
    let _ = writeln!(out, "{:<w$}  {:<24}  {:<24}  {:>3}  {:>3}  {:>3}", "case", "expected", "found", "TP", "FN", "FP");
    for c in &s.cases {
        let _ = writeln!(
            out,
            "{:<w$}  {:<24}  {:<24}  {:>3}  {:>3}  {:>3}",
            c.case,
            join(&c.expected),
            join(&c.found),
            c.counts.tp,
            c.counts.fn_,
            c.counts.fp
        );
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "{:<9}  {:>3}  {:>3}  {:>3}  {:>7}  {:>9}", "rule", "TP", "FN", "FP", "recall", "precision");
    for (code, c) in &s.per_rule {
        let _ = writeln!(
            out,
            "{:<9}  {:>3}  {:>3}  {:>3}  {:>7}  {:>9}",
            code,
            c.tp,
            c.fn_,
            c.fp,
            pct(c.recall()),
            pct(c.precision())
        );
    }
    let _ = writeln!(
        out,
        "\noverall: TP={} FN={} FP={} recall={} precision={}",
        s.overall.tp,
        s.overall.fn_,
        s.overall.fp,
        pct(s.recall),
        pct(s.precision)
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use dlint_core::report::Diagnostic;
    use dlint_core::rules::Severity;

    fn report(codes: &[(&str, Option<u32>)]) -> Report {
        let diags = codes
            .iter()
            .map(|(c, l)| Diagnostic {
                code: c.to_string(),
                severity: Severity::Error,
                message: String::new(),
                rule_title: String::new(),
                file: "f".into(),
                line: *l,
                remediation: String::new(),
            })
            .collect();
        Report::new("f", diags)
    }

    #[test]
    fn manifest_fields() {
        let m = "# c\na.py\tAPIM-10,SI-20\tSI-20:7\n\nb.py\t-\t-\tallow-extra\n";
        let cases = parse_manifest(m, Path::new("/x")).unwrap();
        assert_eq!(cases.len(), 2);
        assert_eq!(cases[0].path, Path::new("/x/a.py"));
        assert_eq!(cases[0].lines.get("SI-20"), Some(&7));
        assert!(cases[1].expected.is_empty() && cases[1].allow_extra());
    }

    #[test]
    fn manifest_errors() {
        assert!(matches!(parse_manifest("", Path::new(".")), Err(ManifestError::Empty)));
        assert!(matches!(parse_manifest("a.py\tXX-99", Path::new(".")), Err(ManifestError::Invalid { line: 1, .. })));
        assert!(matches!(parse_manifest("a.py", Path::new(".")), Err(ManifestError::Invalid { .. })));
        assert!(matches!(
            parse_manifest("a.py\tSI-20\tSI-21:3", Path::new(".")),
            Err(ManifestError::Invalid { .. })
        ));
    }

    #[test]
    fn one_of_two_missed_is_half_recall() {
        let cases = parse_manifest("a.py\tAPIM-10\nb.py\tSI-19\n", Path::new("")).unwrap();
        let s = evaluate(&cases, |p| {
            if p.ends_with("a.py") {
                report(&[("APIM-10", Some(3))])
            } else {
                report(&[])
            }
        });
        assert_eq!(s.recall, Some(0.5));
        assert_eq!(s.precision, Some(1.0));
        assert_eq!(s.overall, Counts { tp: 1, fp: 0, fn_: 1 });
    }

    #[test]
    fn line_hints_and_extras() {
        let cases = parse_manifest("a.py\tSI-20\tSI-20:7\nb.py\t-\t-\tallow-extra\nc.py\t-\n", Path::new("")).unwrap();
        let s = evaluate(&cases, |_| report(&[("SI-20", Some(8)), ("SI-21", Some(8)), ("SI-21", Some(9))]));
        // a: wrong line is a miss plus one extra code; b: extras allowed; c: two extra codes
        assert_eq!(s.cases[0].counts, Counts { tp: 0, fp: 1, fn_: 1 });
        assert_eq!(s.cases[1].counts, Counts::default());
        assert_eq!(s.cases[2].counts, Counts { tp: 0, fp: 2, fn_: 0 });
        assert_eq!(s.per_rule["SI-21"].fp, 2);
    }

    #[test]
    fn undefined_ratios_are_na() {
        let c = Counts::default();
        assert_eq!(c.recall(), None);
        assert_eq!(pct(c.precision()), "n/a");
    }
}
