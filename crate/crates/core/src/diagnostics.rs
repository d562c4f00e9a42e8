//! Stable presentation of analysis results: human-readable text with source
//! excerpts and carets, and machine-readable JSON with fixed key order so
//! identical reports serialize to identical bytes.
//!
//! The JSON layout is documented in `docs/diagnostics-schema.md` and is a
//! compatibility surface; the text format is for humans and is not.

use crate::semantics::{Diagnostic, Severity};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;

/// Counts per severity and per kind. Always derivable from the diagnostic
/// list; carried so reports are self-describing.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub errors: usize,
    pub notes: usize,
    pub by_kind: BTreeMap<String, usize>,
}

/// One file's analysis results, ready to render.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedReport {
    #[serde(rename = "version")]
    pub tool_version: String,
    pub file: String,
    /// SHA-256 of the analyzed source bytes.
    #[serde(rename = "digest")]
    pub source_digest: String,
    pub diagnostics: Vec<Diagnostic>,
    pub summary: Summary,
}

impl RenderedReport {
    /// Builds a report over diagnostics that are already ordered (the
    /// analyzer orders and deduplicates before handing them over).
    pub fn new(file: impl Into<String>, source: &str, diagnostics: Vec<Diagnostic>) -> Self {
        let mut summary = Summary::default();
        for diag in &diagnostics {
            match diag.severity {
                Severity::Error => summary.errors += 1,
                Severity::Note => summary.notes += 1,
            }
            *summary
                .by_kind
                .entry(diag.kind.name().to_string())
                .or_insert(0) += 1;
        }
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            file: file.into(),
            source_digest: hex_digest(source),
            diagnostics,
            summary,
        }
    }

    pub fn error_count(&self) -> usize {
        self.summary.errors
    }
}

fn hex_digest(source: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(source.as_bytes());
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for byte in digest {
        use std::fmt::Write;
        let _ = write!(out, "{byte:02x}");
    }
    out
}

/// Canonical JSON bytes: fixed key order, no timestamps, trailing newline.
pub fn render_json(report: &RenderedReport) -> String {
    let mut out = serde_json::to_string(report).expect("report serializes");
    out.push('\n');
    out
}

/// Inverse of [`render_json`]; the round trip is lossless.
pub fn parse_json_report(text: &str) -> Result<RenderedReport, serde_json::Error> {
    serde_json::from_str(text)
}

/// Human-readable rendering: per diagnostic a headline, the source line with
/// a caret under the span, and the offending handle's event trace.
pub fn render_text(report: &RenderedReport, source: &str, color: bool) -> String {
    use std::fmt::Write;
    let lines: Vec<&str> = source.lines().collect();
    let mut out = String::new();

    for diag in &report.diagnostics {
        let severity = paint_severity(diag.severity, color);
        let _ = writeln!(out, "{severity}[{}]: {}", diag.kind.name(), diag.message);
        let _ = writeln!(
            out,
            "  --> {}:{}:{} (rule {}, in @{})",
            report.file, diag.span.line, diag.span.col_start, diag.rule, diag.function
        );
        if let Some(text) = line_at(&lines, diag.span.line) {
            let _ = writeln!(out, "{:>5} | {}", diag.span.line, text);
            let width = text.chars().count() as u32;
            let start = diag.span.col_start.max(1).min(width.max(1));
            let end = diag.span.col_end.max(start + 1).min(width + 1);
            let pad = " ".repeat(start as usize - 1);
            let carets = "^".repeat((end - start) as usize);
            let _ = writeln!(out, "      | {pad}{carets}");
        }
        for entry in &diag.trace {
            let _ = writeln!(
                out,
                "      = {} {}:{} (in @{})",
                entry.event.phrase(),
                report.file,
                entry.span.line,
                entry.function
            );
        }
        out.push('\n');
    }

    if report.diagnostics.is_empty() {
        let _ = writeln!(out, "{}: no issues found", report.file);
    }
    let _ = writeln!(
        out,
        "{}: {} error{}, {} note{}",
        report.file,
        report.summary.errors,
        plural(report.summary.errors),
        report.summary.notes,
        plural(report.summary.notes)
    );
    for (kind, count) in &report.summary.by_kind {
        let _ = writeln!(out, "  {kind}: {count}");
    }
    out
}

fn plural(n: usize) -> &'static str {
    if n == 1 {
        ""
    } else {
        "s"
    }
}

fn line_at<'a>(lines: &[&'a str], line: u32) -> Option<&'a str> {
    if line == 0 {
        return None;
    }
    lines.get(line as usize - 1).copied()
}

fn paint_severity(severity: Severity, color: bool) -> String {
    if !color {
        return severity.to_string();
    }
    match severity {
        Severity::Error => format!("\x1b[1;31m{severity}\x1b[0m"),
        Severity::Note => format!("\x1b[1;34m{severity}\x1b[0m"),
    }
}
