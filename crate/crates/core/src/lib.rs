//! Static safety verifier for the QIR dialect of LLVM IR.
//!
//! The pipeline is: [`parser::parse_module`] turns `.ll` text into an
//! [`ast::QirModule`]; [`ast::validate_module`] checks structural
//! well-formedness; [`semantics::analyze_module`] symbolically executes the
//! quantum runtime calls over a live-qubit ledger and reports
//! use-after-release and cloning violations; [`diagnostics`] renders the
//! findings as caret-annotated text or canonical JSON.

pub mod ast;
pub mod diagnostics;
pub mod ledger;
pub mod parser;
pub mod semantics;

pub use ast::{print_module, validate_module, QirModule, SourceSpan, StructuralError};
pub use diagnostics::{parse_json_report, render_json, render_text, RenderedReport, Summary};
pub use ledger::{ArrayHandle, Ledger, LedgerFault, QubitHandle};
pub use parser::{parse_module, ParseError, ParseWarning};
pub use semantics::{
    analyze_entry, analyze_function, analyze_module, AnalysisConfig, AnalysisError, AnalysisRun,
    Diagnostic, DiagnosticKind, GateTable, Severity,
};
