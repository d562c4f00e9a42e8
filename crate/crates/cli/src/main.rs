//! `qir-sentinel`: parse, validate and analyze QIR files, or replay a
//! fixture corpus against an expectations file.
//!
//! Exit codes: 0 — no error-severity diagnostics anywhere; 1 — at least one
//! error diagnostic (or a corpus mismatch); 2 — usage, IO, parse or
//! validation failure.

use clap::{Args, Parser, Subcommand, ValueEnum};
use qir_sentinel_core::semantics::{analyze_module, AnalysisConfig, Diagnostic, GateTable};
use qir_sentinel_core::{
    parse_module, render_json, render_text, validate_module, DiagnosticKind, RenderedReport,
};
use std::io::IsTerminal;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "qir-sentinel",
    version,
    about = "Static safety verifier for QIR programs",
    args_conflicts_with_subcommands = true
)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    /// QIR source files (.ll) to analyze.
    files: Vec<PathBuf>,

    #[command(flatten)]
    options: AnalyzeOptions,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze every fixture in a directory and diff the findings against
    /// an expectations file.
    Corpus {
        /// Directory containing .ll fixtures.
        dir: PathBuf,
        /// Expectations file: one `fixture.ll: Kind@line ...` per fixture,
        /// `-` for none.
        expectations: PathBuf,
        #[command(flatten)]
        options: AnalyzeOptions,
    },
}

#[derive(Args, Clone)]
struct AnalyzeOptions {
    /// Entry function; defaults to analyzing every defined function.
    #[arg(long)]
    entry: Option<String>,

    /// Inline depth limit for user calls.
    #[arg(long, default_value_t = 8)]
    max_inline_depth: usize,

    /// Times a back-edge may be taken before the path is truncated.
    #[arg(long, default_value_t = 1)]
    max_unroll: usize,

    /// Fork budget per entry point.
    #[arg(long, default_value_t = 4096)]
    max_paths: usize,

    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Abort each path at its first error.
    #[arg(long)]
    fail_fast: bool,

    /// Extra gate table: one gate per line, `:ctl` suffix for controlled.
    #[arg(long)]
    gates: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Some(Command::Corpus {
            dir,
            expectations,
            options,
        }) => run_corpus(&dir, &expectations, &options),
        None => {
            if cli.files.is_empty() {
                eprintln!("error: no input files (try --help)");
                2
            } else {
                run_files(&cli.files, &cli.options)
            }
        }
    };
    ExitCode::from(code)
}

fn build_config(options: &AnalyzeOptions) -> Result<AnalysisConfig, String> {
    let mut gates = GateTable::default();
    if let Some(path) = &options.gates {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read gate table {}: {e}", path.display()))?;
        gates
            .extend_from_table_text(&text)
            .map_err(|e| format!("bad gate table {}: {e}", path.display()))?;
    }
    Ok(AnalysisConfig {
        max_inline_depth: options.max_inline_depth.max(1),
        max_unroll: options.max_unroll,
        max_paths: options.max_paths.max(1),
        fail_fast: options.fail_fast,
        gates,
    })
}

fn use_color(format: Format) -> bool {
    if format == Format::Json {
        return false;
    }
    match std::env::var("QIR_SENTINEL_COLOR").as_deref() {
        Ok("never") => false,
        Ok("always") => true,
        _ => std::io::stdout().is_terminal(),
    }
}

/// Analyzes one file through the full pipeline. `Err` carries messages for
/// an exit-2 condition.
fn analyze_file(
    path: &Path,
    config: &AnalysisConfig,
    entry: Option<&str>,
) -> Result<(RenderedReport, String), String> {
    let bytes = std::fs::read(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let source = String::from_utf8_lossy(&bytes).into_owned();
    let display = path.display().to_string();

    let (module, warnings) = match parse_module(&source, &display) {
        Ok(ok) => ok,
        Err(errors) => {
            let rendered: Vec<String> = errors
                .iter()
                .map(|e| {
                    format!(
                        "{display}:{}:{}: error: {}",
                        e.span.line, e.span.col_start, e.message
                    )
                })
                .collect();
            return Err(rendered.join("\n"));
        }
    };
    for w in &warnings {
        eprintln!(
            "{display}:{}:{}: warning: {}",
            w.span.line, w.span.col_start, w.message
        );
    }

    let structural = validate_module(&module);
    if !structural.is_empty() {
        let rendered: Vec<String> = structural
            .iter()
            .map(|e| format!("{display}: error: {e}"))
            .collect();
        return Err(rendered.join("\n"));
    }

    let diagnostics: Vec<Diagnostic> =
        analyze_module(&module, entry, config).map_err(|e| format!("{display}: error: {e}"))?;
    Ok((RenderedReport::new(display, &source, diagnostics), source))
}

fn run_files(files: &[PathBuf], options: &AnalyzeOptions) -> u8 {
    let config = match build_config(options) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}");
            return 2;
        }
    };
    let color = use_color(options.format);

    let mut saw_error_diag = false;
    let mut saw_failure = false;
    for path in files {
        match analyze_file(path, &config, options.entry.as_deref()) {
            Ok((report, source)) => {
                match options.format {
                    Format::Text => print!("{}", render_text(&report, &source, color)),
                    Format::Json => print!("{}", render_json(&report)),
                }
                if report.error_count() > 0 {
                    saw_error_diag = true;
                }
            }
            Err(msg) => {
                eprintln!("{msg}");
                saw_failure = true;
            }
        }
    }
    if saw_failure {
        2
    } else if saw_error_diag {
        1
    } else {
        0
    }
}

// ---- corpus mode ------------------------------------------------------------

type Expectation = Vec<(DiagnosticKind, u32)>;

fn parse_expectations(text: &str) -> Result<Vec<(String, Expectation)>, String> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (name, rest) = line
            .split_once(':')
            .ok_or_else(|| format!("line {}: expected `fixture.ll: ...`", lineno + 1))?;
        let mut expected = Vec::new();
        let rest = rest.trim();
        if rest != "-" {
            for token in rest.split_whitespace() {
                let (kind_name, line_no) = token.split_once('@').ok_or_else(|| {
                    format!("line {}: expected Kind@line, got {token:?}", lineno + 1)
                })?;
                let kind = DiagnosticKind::from_name(kind_name)
                    .ok_or_else(|| format!("line {}: unknown kind {kind_name:?}", lineno + 1))?;
                let line_no: u32 = line_no
                    .parse()
                    .map_err(|_| format!("line {}: bad line number in {token:?}", lineno + 1))?;
                expected.push((kind, line_no));
            }
        }
        out.push((name.trim().to_string(), expected));
    }
    Ok(out)
}

fn format_findings(findings: &Expectation) -> String {
    if findings.is_empty() {
        "-".to_string()
    } else {
        findings
            .iter()
            .map(|(kind, line)| format!("{kind}@{line}"))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn run_corpus(dir: &Path, expectations_path: &Path, options: &AnalyzeOptions) -> u8 {
    let config = match build_config(options) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}");
            return 2;
        }
    };
    let text = match std::fs::read_to_string(expectations_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", expectations_path.display());
            return 2;
        }
    };
    let expectations = match parse_expectations(&text) {
        Ok(map) => map,
        Err(msg) => {
            eprintln!("error: malformed expectations: {msg}");
            return 2;
        }
    };

    let mut fixtures: Vec<PathBuf> = match std::fs::read_dir(dir) {
        Ok(entries) => entries
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.extension().is_some_and(|ext| ext == "ll"))
            .collect(),
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", dir.display());
            return 2;
        }
    };
    fixtures.sort();
    if fixtures.is_empty() {
        eprintln!("warning: no .ll fixtures in {}", dir.display());
        println!("corpus: 0 passed, 0 failed");
        return 0;
    }

    let mut passed = 0usize;
    let mut failed = 0usize;
    let mut broken = false;

    for path in &fixtures {
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let expected = expectations
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, e)| e);

        let got = match analyze_file(path, &config, options.entry.as_deref()) {
            Ok((report, _)) => {
                let mut findings: Expectation = report
                    .diagnostics
                    .iter()
                    .map(|d| (d.kind, d.span.line))
                    .collect();
                findings.sort_by_key(|(kind, line)| (*line, kind.name()));
                findings
            }
            Err(msg) => {
                eprintln!("{msg}");
                broken = true;
                continue;
            }
        };

        match expected {
            Some(expected) => {
                let mut expected = expected.clone();
                expected.sort_by_key(|(kind, line)| (*line, kind.name()));
                if expected == got {
                    println!("PASS {name}");
                    passed += 1;
                } else {
                    println!(
                        "FAIL {name}: expected [{}], got [{}]",
                        format_findings(&expected),
                        format_findings(&got)
                    );
                    failed += 1;
                }
            }
            None => {
                println!(
                    "FAIL {name}: no expectation recorded, got [{}]",
                    format_findings(&got)
                );
                failed += 1;
            }
        }
    }

    println!("corpus: {passed} passed, {failed} failed");
    if broken {
        2
    } else if failed > 0 {
        1
    } else {
        0
    }
}
