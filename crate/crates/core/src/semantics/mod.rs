//! The rule engine: symbolic execution of QIR functions over an
//! (environment, ledger) state, reporting use-after-release and cloning
//! violations as diagnostics instead of halting.

mod diagnostic;
mod engine;
mod value;

pub use diagnostic::{
    rules, sort_and_dedup, Diagnostic, DiagnosticKind, Severity, TraceEntry, TraceEventKind,
};
pub use value::{AbstractValue, ClassicalValue};

use crate::ast::QirModule;
use crate::ledger::Ledger;
use std::collections::BTreeSet;

/// Recognized gate names. The built-in table covers the common single-qubit
/// set; callers may extend it, since the runtime does not close the set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GateTable {
    single: BTreeSet<String>,
    controlled: BTreeSet<String>,
}

const BUILTIN_GATES: &[&str] = &["x", "y", "z", "h", "s", "t", "rx", "ry", "rz"];

impl Default for GateTable {
    fn default() -> Self {
        let names = BUILTIN_GATES.iter().map(|s| s.to_string());
        Self {
            single: names.clone().collect(),
            controlled: names.collect(),
        }
    }
}

impl GateTable {
    pub fn recognizes_single(&self, gate: &str) -> bool {
        self.single.contains(gate)
    }

    pub fn recognizes_controlled(&self, gate: &str) -> bool {
        self.controlled.contains(gate)
    }

    pub fn add_single(&mut self, gate: impl Into<String>) {
        self.single.insert(gate.into());
    }

    pub fn add_controlled(&mut self, gate: impl Into<String>) {
        self.controlled.insert(gate.into());
    }

    /// Extends the table from the one-gate-per-line format: `name` adds a
    /// single-qubit gate, `name:ctl` adds a controlled gate. Blank lines and
    /// `#` comments are ignored.
    pub fn extend_from_table_text(&mut self, text: &str) -> Result<(), String> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_suffix(":ctl") {
                let name = name.trim();
                if name.is_empty() {
                    return Err(format!("line {}: empty gate name", lineno + 1));
                }
                self.add_controlled(name);
            } else if line.contains(':') {
                return Err(format!(
                    "line {}: unrecognized gate qualifier in {line:?}",
                    lineno + 1
                ));
            } else {
                self.add_single(line);
            }
        }
        Ok(())
    }
}

/// Knobs for one analysis run.
#[derive(Clone, Debug)]
pub struct AnalysisConfig {
    /// Maximum user-call inline depth.
    pub max_inline_depth: usize,
    /// How many times a back-edge may be taken before the path is truncated.
    pub max_unroll: usize,
    /// Fork budget per entry point.
    pub max_paths: usize,
    /// Abort a path on its first error, mirroring literal abort semantics.
    pub fail_fast: bool,
    pub gates: GateTable,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            max_inline_depth: 8,
            max_unroll: 1,
            max_paths: 4096,
            fail_fast: false,
            gates: GateTable::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum AnalysisError {
    #[error("function @{0} is not defined in this module")]
    FunctionNotFound(String),
    #[error("function @{0} is a declaration and cannot be analyzed")]
    FunctionIsDeclaration(String),
}

/// A path that reached the entry function's return.
#[derive(Clone, Debug)]
pub struct CompletedPath {
    pub ledger: Ledger,
    pub returned: AbstractValue,
}

/// Everything one entry-point analysis produced.
#[derive(Clone, Debug)]
pub struct AnalysisRun {
    /// Deduplicated, ordered by source position.
    pub diagnostics: Vec<Diagnostic>,
    pub final_states: Vec<CompletedPath>,
    pub paths_explored: usize,
}

/// Symbolically executes `entry` and returns the full run, including final
/// per-path ledgers. Entry parameters are modeled as fresh live values.
pub fn analyze_entry(
    module: &QirModule,
    entry: &str,
    config: &AnalysisConfig,
) -> Result<AnalysisRun, AnalysisError> {
    engine::analyze_entry_impl(module, entry, config)
}

/// Diagnostics-only variant of [`analyze_entry`].
pub fn analyze_function(
    module: &QirModule,
    entry: &str,
    config: &AnalysisConfig,
) -> Result<Vec<Diagnostic>, AnalysisError> {
    Ok(analyze_entry(module, entry, config)?.diagnostics)
}

/// Analyzes the given entry, or every defined function when `entry` is
/// `None`. Diagnostics are merged, deduplicated and ordered by position.
pub fn analyze_module(
    module: &QirModule,
    entry: Option<&str>,
    config: &AnalysisConfig,
) -> Result<Vec<Diagnostic>, AnalysisError> {
    let entries: Vec<String> = match entry {
        Some(name) => vec![name.to_string()],
        None => module.defined_functions().map(|f| f.name.clone()).collect(),
    };
    let mut diagnostics = Vec::new();
    for name in entries {
        diagnostics.extend(analyze_entry(module, &name, config)?.diagnostics);
    }
    sort_and_dedup(&mut diagnostics);
    Ok(diagnostics)
}
