//! Safety findings reported by the rule engine.
//!
//! The two error classes are use-after-release and qubit cloning; every
//! error kind refines one of them. Rule names in output use the capitalized
//! forms of the rule engine (Q_DEALLOC, QARR_CREATE, ...) so reports can be
//! cross-referenced directly; analyzer-internal notes carry the rule name
//! "plumbing".

use crate::ast::SourceSpan;
use serde::{Deserialize, Serialize};

/// Rule names as they appear in rendered output.
pub mod rules {
    pub const Q_ALLOC: &str = "Q_ALLOC";
    pub const QARR_ALLOC: &str = "QARR_ALLOC";
    pub const Q_DEALLOC: &str = "Q_DEALLOC";
    pub const QARR_DEALLOC: &str = "QARR_DEALLOC";
    pub const Q_LOAD: &str = "Q_LOAD";
    pub const QARR_CREATE: &str = "QARR_CREATE";
    pub const SG_OP: &str = "SG_OP";
    pub const CG_OP: &str = "CG_OP";
    pub const MEASURE: &str = "MEASURE";
    pub const PLUMBING: &str = "plumbing";
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Note,
}

impl std::fmt::Display for Severity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Severity::Error => write!(f, "error"),
            Severity::Note => write!(f, "note"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DiagnosticKind {
    // Use-after-release class.
    UseAfterReleaseQubit,
    UseAfterReleaseArray,
    DoubleReleaseQubit,
    DoubleReleaseArray,
    MeasureReleasedArray,
    LoadFromReleasedArray,
    // Cloning class.
    CloneInArrayStore,
    CloneControlTarget,
    // Hard faults outside the two classes.
    ReleaseStaticQubit,
    IndexOutOfBounds,
    // Hazards and analysis gaps (note severity).
    ReleaseQubitInArray,
    MultiArrayMembershipNote,
    TypeMismatch,
    UnknownGate,
    UnknownArrayLength,
    UnknownIndex,
    StoreUnknownQubit,
    StaticUnknownAddress,
    InlineDepthExceeded,
    RecursionDetected,
    UnrollTruncated,
    Incomplete,
}

impl DiagnosticKind {
    pub fn severity(self) -> Severity {
        use DiagnosticKind::*;
        match self {
            UseAfterReleaseQubit
            | UseAfterReleaseArray
            | DoubleReleaseQubit
            | DoubleReleaseArray
            | MeasureReleasedArray
            | LoadFromReleasedArray
            | CloneInArrayStore
            | CloneControlTarget
            | ReleaseStaticQubit
            | IndexOutOfBounds => Severity::Error,
            // Releasing a live qubit that sits in an array is a hazard for
            // the later array release, not a violation in itself; the rule
            // skips the release and reports a note.
            ReleaseQubitInArray
            | MultiArrayMembershipNote
            | TypeMismatch
            | UnknownGate
            | UnknownArrayLength
            | UnknownIndex
            | StoreUnknownQubit
            | StaticUnknownAddress
            | InlineDepthExceeded
            | RecursionDetected
            | UnrollTruncated
            | Incomplete => Severity::Note,
        }
    }

    /// Which rules may legitimately report this kind.
    pub fn allowed_rules(self) -> &'static [&'static str] {
        use DiagnosticKind::*;
        match self {
            UseAfterReleaseQubit => &[
                rules::SG_OP,
                rules::CG_OP,
                rules::QARR_CREATE,
                rules::Q_DEALLOC,
            ],
            UseAfterReleaseArray => &[rules::CG_OP, rules::QARR_CREATE, rules::QARR_DEALLOC],
            DoubleReleaseQubit | ReleaseQubitInArray | ReleaseStaticQubit => &[rules::Q_DEALLOC],
            DoubleReleaseArray => &[rules::QARR_DEALLOC],
            MeasureReleasedArray => &[rules::MEASURE],
            LoadFromReleasedArray => &[rules::Q_LOAD],
            CloneInArrayStore => &[rules::QARR_CREATE],
            CloneControlTarget => &[rules::CG_OP],
            IndexOutOfBounds => &[rules::Q_LOAD, rules::QARR_CREATE],
            MultiArrayMembershipNote
            | TypeMismatch
            | UnknownGate
            | UnknownArrayLength
            | UnknownIndex
            | StoreUnknownQubit
            | StaticUnknownAddress
            | InlineDepthExceeded
            | RecursionDetected
            | UnrollTruncated
            | Incomplete => &[rules::PLUMBING],
        }
    }

    pub fn name(self) -> &'static str {
        use DiagnosticKind::*;
        match self {
            UseAfterReleaseQubit => "UseAfterReleaseQubit",
            UseAfterReleaseArray => "UseAfterReleaseArray",
            DoubleReleaseQubit => "DoubleReleaseQubit",
            DoubleReleaseArray => "DoubleReleaseArray",
            MeasureReleasedArray => "MeasureReleasedArray",
            LoadFromReleasedArray => "LoadFromReleasedArray",
            CloneInArrayStore => "CloneInArrayStore",
            CloneControlTarget => "CloneControlTarget",
            ReleaseStaticQubit => "ReleaseStaticQubit",
            IndexOutOfBounds => "IndexOutOfBounds",
            ReleaseQubitInArray => "ReleaseQubitInArray",
            MultiArrayMembershipNote => "MultiArrayMembershipNote",
            TypeMismatch => "TypeMismatch",
            UnknownGate => "UnknownGate",
            UnknownArrayLength => "UnknownArrayLength",
            UnknownIndex => "UnknownIndex",
            StoreUnknownQubit => "StoreUnknownQubit",
            StaticUnknownAddress => "StaticUnknownAddress",
            InlineDepthExceeded => "InlineDepthExceeded",
            RecursionDetected => "RecursionDetected",
            UnrollTruncated => "UnrollTruncated",
            Incomplete => "Incomplete",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        use DiagnosticKind::*;
        Some(match name {
            "UseAfterReleaseQubit" => UseAfterReleaseQubit,
            "UseAfterReleaseArray" => UseAfterReleaseArray,
            "DoubleReleaseQubit" => DoubleReleaseQubit,
            "DoubleReleaseArray" => DoubleReleaseArray,
            "MeasureReleasedArray" => MeasureReleasedArray,
            "LoadFromReleasedArray" => LoadFromReleasedArray,
            "CloneInArrayStore" => CloneInArrayStore,
            "CloneControlTarget" => CloneControlTarget,
            "ReleaseStaticQubit" => ReleaseStaticQubit,
            "IndexOutOfBounds" => IndexOutOfBounds,
            "ReleaseQubitInArray" => ReleaseQubitInArray,
            "MultiArrayMembershipNote" => MultiArrayMembershipNote,
            "TypeMismatch" => TypeMismatch,
            "UnknownGate" => UnknownGate,
            "UnknownArrayLength" => UnknownArrayLength,
            "UnknownIndex" => UnknownIndex,
            "StoreUnknownQubit" => StoreUnknownQubit,
            "StaticUnknownAddress" => StaticUnknownAddress,
            "InlineDepthExceeded" => InlineDepthExceeded,
            "RecursionDetected" => RecursionDetected,
            "UnrollTruncated" => UnrollTruncated,
            "Incomplete" => Incomplete,
            _ => return None,
        })
    }
}

impl std::fmt::Display for DiagnosticKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One step in the life of the offending handle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceEventKind {
    Allocated,
    ArrayAllocated,
    ArrayCreated,
    ParamIntroduced,
    StaticIntroduced,
    Released,
    ReleasedViaArray,
    ArrayReleased,
    StoredIntoArray,
    LoadedFromArray,
    UsedHere,
}

impl TraceEventKind {
    /// Phrase used by the text renderer.
    pub fn phrase(self) -> &'static str {
        match self {
            TraceEventKind::Allocated => "allocated at",
            TraceEventKind::ArrayAllocated => "array allocated at",
            TraceEventKind::ArrayCreated => "array created at",
            TraceEventKind::ParamIntroduced => "entered as parameter at",
            TraceEventKind::StaticIntroduced => "static qubit introduced at",
            TraceEventKind::Released => "released at",
            TraceEventKind::ReleasedViaArray => "released with its array at",
            TraceEventKind::ArrayReleased => "array released at",
            TraceEventKind::StoredIntoArray => "stored into array at",
            TraceEventKind::LoadedFromArray => "loaded from array at",
            TraceEventKind::UsedHere => "used here at",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TraceEntry {
    pub event: TraceEventKind,
    pub function: String,
    pub span: SourceSpan,
}

impl TraceEntry {
    pub fn new(event: TraceEventKind, function: impl Into<String>, span: SourceSpan) -> Self {
        Self {
            event,
            function: function.into(),
            span,
        }
    }
}

/// One reported finding, pinned to a source span, with the handle history
/// that led to it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub severity: Severity,
    pub rule: String,
    pub message: String,
    /// Function containing the span.
    pub function: String,
    pub span: SourceSpan,
    pub trace: Vec<TraceEntry>,
}

impl Diagnostic {
    pub fn new(
        kind: DiagnosticKind,
        rule: &'static str,
        message: impl Into<String>,
        function: impl Into<String>,
        span: SourceSpan,
        trace: Vec<TraceEntry>,
    ) -> Self {
        debug_assert!(
            kind.allowed_rules().contains(&rule),
            "kind {kind:?} cannot come from rule {rule}"
        );
        Self {
            kind,
            severity: kind.severity(),
            rule: rule.to_string(),
            message: message.into(),
            function: function.into(),
            span,
            trace,
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    /// Deduplication key: merged paths that found the same violation with
    /// the same handle history collapse to one report.
    pub fn dedup_key(&self) -> (DiagnosticKind, SourceSpan, &[TraceEntry]) {
        (self.kind, self.span, &self.trace)
    }
}

/// Sorts by source position, then kind name, then trace; deduplicates
/// identical (kind, span, trace) findings.
pub fn sort_and_dedup(diagnostics: &mut Vec<Diagnostic>) {
    diagnostics.sort_by(|a, b| {
        (a.span.line, a.span.col_start, a.kind.name(), &a.trace).cmp(&(
            b.span.line,
            b.span.col_start,
            b.kind.name(),
            &b.trace,
        ))
    });
    diagnostics.dedup_by(|a, b| a.dedup_key() == b.dedup_key());
}

#[cfg(test)]
mod tests {
    use super::*;

    const ALL_KINDS: [DiagnosticKind; 22] = [
        DiagnosticKind::UseAfterReleaseQubit,
        DiagnosticKind::UseAfterReleaseArray,
        DiagnosticKind::DoubleReleaseQubit,
        DiagnosticKind::DoubleReleaseArray,
        DiagnosticKind::MeasureReleasedArray,
        DiagnosticKind::LoadFromReleasedArray,
        DiagnosticKind::CloneInArrayStore,
        DiagnosticKind::CloneControlTarget,
        DiagnosticKind::ReleaseStaticQubit,
        DiagnosticKind::IndexOutOfBounds,
        DiagnosticKind::ReleaseQubitInArray,
        DiagnosticKind::MultiArrayMembershipNote,
        DiagnosticKind::TypeMismatch,
        DiagnosticKind::UnknownGate,
        DiagnosticKind::UnknownArrayLength,
        DiagnosticKind::UnknownIndex,
        DiagnosticKind::StoreUnknownQubit,
        DiagnosticKind::StaticUnknownAddress,
        DiagnosticKind::InlineDepthExceeded,
        DiagnosticKind::RecursionDetected,
        DiagnosticKind::UnrollTruncated,
        DiagnosticKind::Incomplete,
    ];

    #[test]
    fn every_kind_has_a_name_severity_and_rule() {
        for kind in ALL_KINDS {
            assert!(!kind.name().is_empty());
            assert!(!kind.allowed_rules().is_empty());
            assert_eq!(DiagnosticKind::from_name(kind.name()), Some(kind));
            // Severity is total by construction; exercise it.
            let _ = kind.severity();
        }
        assert_eq!(DiagnosticKind::from_name("NotAKind"), None);
    }

    #[test]
    fn error_set_is_exactly_the_two_classes_plus_hard_faults() {
        let errors: Vec<_> = ALL_KINDS
            .iter()
            .filter(|k| k.severity() == Severity::Error)
            .map(|k| k.name())
            .collect();
        assert_eq!(
            errors,
            vec![
                "UseAfterReleaseQubit",
                "UseAfterReleaseArray",
                "DoubleReleaseQubit",
                "DoubleReleaseArray",
                "MeasureReleasedArray",
                "LoadFromReleasedArray",
                "CloneInArrayStore",
                "CloneControlTarget",
                "ReleaseStaticQubit",
                "IndexOutOfBounds",
            ]
        );
    }

    #[test]
    fn sort_orders_by_position_then_kind_and_dedups_identical_findings() {
        use crate::ast::SourceSpan;
        let mk = |kind: DiagnosticKind, rule: &'static str, line: u32| {
            Diagnostic::new(
                kind,
                rule,
                "m",
                "f",
                SourceSpan::new(line, 1, 2),
                Vec::new(),
            )
        };
        let mut diags = vec![
            mk(DiagnosticKind::UseAfterReleaseQubit, rules::SG_OP, 9),
            mk(DiagnosticKind::CloneControlTarget, rules::CG_OP, 4),
            mk(DiagnosticKind::CloneInArrayStore, rules::QARR_CREATE, 4),
            mk(DiagnosticKind::UseAfterReleaseQubit, rules::SG_OP, 9),
        ];
        sort_and_dedup(&mut diags);
        let names: Vec<_> = diags.iter().map(|d| (d.span.line, d.kind.name())).collect();
        assert_eq!(
            names,
            vec![
                (4, "CloneControlTarget"),
                (4, "CloneInArrayStore"),
                (9, "UseAfterReleaseQubit")
            ]
        );
    }
}
