//! Per-rule edge cases: analysis gaps, type mismatches, budget notes, and
//! the ledger dump as seen through the engine.

use qir_sentinel_core::parser::parse_module;
use qir_sentinel_core::semantics::{
    analyze_entry, analyze_module, AnalysisConfig, DiagnosticKind, GateTable,
};

fn parse(source: &str) -> qir_sentinel_core::QirModule {
    let (module, _) = parse_module(source, "test.ll").expect("parses");
    assert!(
        qir_sentinel_core::validate_module(&module).is_empty(),
        "{:?}",
        qir_sentinel_core::validate_module(&module)
    );
    module
}

#[test]
fn engine_dump_records_alloc_site() {
    let src = "define internal void @Main__body() {\n\
               entry:\n\
               \x20 %q = call %Qubit* @__quantum__rt__qubit_allocate()\n\
               \x20 ret void\n\
               }\n\
               declare %Qubit* @__quantum__rt__qubit_allocate()\n";
    let module = parse(src);
    let run = analyze_entry(&module, "Main__body", &AnalysisConfig::default()).unwrap();
    let dump = run.final_states[0].ledger.dump();
    assert_eq!(dump, "Q (1 live):\n  q0 single@3:3\nQA (0 rows):\n");
}

#[test]
fn measurement_body_records_the_stored_member() {
    // The measurement pattern: the caller's qubit ends up in the temporary
    // qubit-array row.
    let source = include_str!("../../../corpus/sample.ll");
    let (module, _) = parse_module(source, "sample.ll").unwrap();
    let run = analyze_entry(
        &module,
        "Microsoft__Quantum__Intrinsic__M__body",
        &AnalysisConfig::default(),
    )
    .unwrap();
    assert!(run.diagnostics.is_empty());
    let ledger = &run.final_states[0].ledger;
    // Two created rows (bases, qubits); the qubits row holds the parameter.
    let rows: Vec<_> = ledger.qa_entries().collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].1.members().len(), 0, "pauli bases hold no qubits");
    assert_eq!(
        rows[1].1.members().len(),
        1,
        "the measured qubit is recorded"
    );
    assert_eq!(rows[1].1.members()[0].id, ledger.q_entries()[0].id);
}

#[test]
fn unknown_length_array_parameter_loads_mint_members() {
    let src = "define internal void @Main__body(%Array* %qs) {\n\
               entry:\n\
               \x20 %0 = call i8* @__quantum__rt__array_get_element_ptr_1d(%Array* %qs, i64 7)\n\
               \x20 %1 = bitcast i8* %0 to %Qubit**\n\
               \x20 %q = load %Qubit*, %Qubit** %1, align 8\n\
               \x20 call void @__quantum__qis__h__body(%Qubit* %q)\n\
               \x20 ret void\n\
               }\n\
               declare i8* @__quantum__rt__array_get_element_ptr_1d(%Array*, i64)\n\
               declare void @__quantum__qis__h__body(%Qubit*)\n";
    let module = parse(src);
    let run = analyze_entry(&module, "Main__body", &AnalysisConfig::default()).unwrap();
    assert!(run.diagnostics.is_empty(), "{:?}", run.diagnostics);
    let ledger = &run.final_states[0].ledger;
    let (_, row) = ledger.qa_entries().next().unwrap();
    assert_eq!(row.members().len(), 1, "index 7 minted a stable member");
}

#[test]
fn unknown_allocation_length_is_noted_and_unchecked() {
    let src = "define internal void @Main__body(i64 %n) {\n\
               entry:\n\
               \x20 %a = call %Array* @__quantum__rt__qubit_allocate_array(i64 %n)\n\
               \x20 %0 = call i8* @__quantum__rt__array_get_element_ptr_1d(%Array* %a, i64 999)\n\
               \x20 %1 = bitcast i8* %0 to %Qubit**\n\
               \x20 %q = load %Qubit*, %Qubit** %1, align 8\n\
               \x20 ret void\n\
               }\n\
               declare %Array* @__quantum__rt__qubit_allocate_array(i64)\n\
               declare i8* @__quantum__rt__array_get_element_ptr_1d(%Array*, i64)\n";
    let module = parse(src);
    let diags = analyze_module(&module, None, &AnalysisConfig::default()).unwrap();
    assert_eq!(diags.len(), 1);
    assert_eq!(diags[0].kind, DiagnosticKind::UnknownArrayLength);
    assert!(
        !diags[0].is_error(),
        "no bounds error without a known length"
    );
}

#[test]
fn storing_an_unidentified_qubit_is_an_analysis_gap_note() {
    let src = "define internal void @Main__body() {\n\
               entry:\n\
               \x20 %x = call %Qubit* @Opaque__helper()\n\
               \x20 %a = call %Array* @__quantum__rt__array_create_1d(i32 8, i64 1)\n\
               \x20 %0 = call i8* @__quantum__rt__array_get_element_ptr_1d(%Array* %a, i64 0)\n\
               \x20 %1 = bitcast i8* %0 to %Qubit**\n\
               \x20 store %Qubit* %x, %Qubit** %1, align 8\n\
               \x20 %q = load %Qubit*, %Qubit** %1, align 8\n\
               \x20 ret void\n\
               }\n\
               declare %Qubit* @Opaque__helper()\n\
               declare %Array* @__quantum__rt__array_create_1d(i32, i64)\n\
               declare i8* @__quantum__rt__array_get_element_ptr_1d(%Array*, i64)\n";
    let module = parse(src);
    let run = analyze_entry(&module, "Main__body", &AnalysisConfig::default()).unwrap();
    let kinds: Vec<_> = run.diagnostics.iter().map(|d| d.kind).collect();
    assert_eq!(kinds, vec![DiagnosticKind::StoreUnknownQubit]);
    // The unknown slot poisons later loads but raises nothing further.
    let (_, row) = run.final_states[0].ledger.qa_entries().next().unwrap();
    assert!(row.members().is_empty());
}

#[test]
fn type_mismatches_are_notes() {
    let src = "define internal void @Main__body() {\n\
               entry:\n\
               \x20 %a = call %Array* @__quantum__rt__qubit_allocate_array(i64 1)\n\
               \x20 call void @__quantum__rt__qubit_release(%Qubit* null)\n\
               \x20 ret void\n\
               }\n\
               declare %Array* @__quantum__rt__qubit_allocate_array(i64)\n\
               declare void @__quantum__rt__qubit_release(%Qubit*)\n";
    let module = parse(src);
    let diags = analyze_module(&module, None, &AnalysisConfig::default()).unwrap();
    assert_eq!(diags.len(), 1);
    assert_eq!(diags[0].kind, DiagnosticKind::TypeMismatch);
    assert!(!diags[0].is_error());
}

#[test]
fn path_budget_exhaustion_is_noted_once() {
    // Eleven unknown branches would want 2^11 paths; a budget of 4 stops the
    // forking with a single note and still terminates.
    let mut src = String::from(
        "define internal void @Main__body(i1 %c) {\nentry:\n  %q = call %Qubit* @__quantum__rt__qubit_allocate()\n  br label %b0\n",
    );
    for i in 0..11 {
        src.push_str(&format!(
            "b{i}:\n  br i1 %c, label %b{}, label %b{}\n",
            i + 1,
            i + 1
        ));
    }
    src.push_str("b11:\n  call void @__quantum__rt__qubit_release(%Qubit* %q)\n  ret void\n}\n");
    src.push_str("declare %Qubit* @__quantum__rt__qubit_allocate()\n");
    src.push_str("declare void @__quantum__rt__qubit_release(%Qubit*)\n");

    let module = parse(&src);
    let config = AnalysisConfig {
        max_paths: 4,
        ..AnalysisConfig::default()
    };
    let run = analyze_entry(&module, "Main__body", &config).unwrap();
    let incomplete: Vec<_> = run
        .diagnostics
        .iter()
        .filter(|d| d.kind == DiagnosticKind::Incomplete)
        .collect();
    assert_eq!(incomplete.len(), 1);
    assert!(run.paths_explored <= 4);
}

#[test]
fn recognized_gate_table_is_extensible() {
    let src = "define internal void @Main__body() {\n\
               entry:\n\
               \x20 %q = call %Qubit* @__quantum__rt__qubit_allocate()\n\
               \x20 call void @__quantum__qis__sqrtx__body(%Qubit* %q)\n\
               \x20 call void @__quantum__rt__qubit_release(%Qubit* %q)\n\
               \x20 ret void\n\
               }\n\
               declare %Qubit* @__quantum__rt__qubit_allocate()\n\
               declare void @__quantum__rt__qubit_release(%Qubit*)\n\
               declare void @__quantum__qis__sqrtx__body(%Qubit*)\n";
    let module = parse(src);

    let default_run = analyze_module(&module, None, &AnalysisConfig::default()).unwrap();
    assert_eq!(default_run[0].kind, DiagnosticKind::UnknownGate);

    let mut gates = GateTable::default();
    gates.extend_from_table_text("sqrtx\n").unwrap();
    let config = AnalysisConfig {
        gates,
        ..AnalysisConfig::default()
    };
    let extended_run = analyze_module(&module, None, &config).unwrap();
    assert!(extended_run.is_empty(), "{extended_run:?}");
}

#[test]
fn unknown_gate_on_released_qubit_still_checks_liveness() {
    let src = "define internal void @Main__body() {\n\
               entry:\n\
               \x20 %q = call %Qubit* @__quantum__rt__qubit_allocate()\n\
               \x20 call void @__quantum__rt__qubit_release(%Qubit* %q)\n\
               \x20 call void @__quantum__qis__foo__body(%Qubit* %q)\n\
               \x20 ret void\n\
               }\n\
               declare %Qubit* @__quantum__rt__qubit_allocate()\n\
               declare void @__quantum__rt__qubit_release(%Qubit*)\n\
               declare void @__quantum__qis__foo__body(%Qubit*)\n";
    let module = parse(src);
    let diags = analyze_module(&module, None, &AnalysisConfig::default()).unwrap();
    let kinds: Vec<_> = diags.iter().map(|d| d.kind).collect();
    assert_eq!(
        kinds,
        vec![
            DiagnosticKind::UnknownGate,
            DiagnosticKind::UseAfterReleaseQubit
        ]
    );
}

#[test]
fn adjoint_functors_check_qubit_liveness_quietly() {
    let src = "define internal void @Main__body() {\n\
               entry:\n\
               \x20 %q = call %Qubit* @__quantum__rt__qubit_allocate()\n\
               \x20 call void @__quantum__qis__h__adj(%Qubit* %q)\n\
               \x20 call void @__quantum__rt__qubit_release(%Qubit* %q)\n\
               \x20 call void @__quantum__qis__h__adj(%Qubit* %q)\n\
               \x20 ret void\n\
               }\n\
               declare %Qubit* @__quantum__rt__qubit_allocate()\n\
               declare void @__quantum__rt__qubit_release(%Qubit*)\n\
               declare void @__quantum__qis__h__adj(%Qubit*)\n";
    let module = parse(src);
    let diags = analyze_module(&module, None, &AnalysisConfig::default()).unwrap();
    let kinds: Vec<_> = diags.iter().map(|d| d.kind).collect();
    assert_eq!(kinds, vec![DiagnosticKind::UseAfterReleaseQubit]);
    assert_eq!(
        diags[0].span.line, 6,
        "only the post-release use is flagged"
    );
}

#[test]
fn deduplication_keeps_one_finding_for_identical_traces() {
    // Both forks release on the same line and then use the qubit at the same
    // site with identical histories: one report, not two.
    let src = "define internal void @Main__body(i1 %c) {\n\
               entry:\n\
               \x20 %q = call %Qubit* @__quantum__rt__qubit_allocate()\n\
               \x20 call void @__quantum__rt__qubit_release(%Qubit* %q)\n\
               \x20 br i1 %c, label %a, label %b\n\
               a:\n\
               \x20 br label %join\n\
               b:\n\
               \x20 br label %join\n\
               join:\n\
               \x20 call void @__quantum__qis__h__body(%Qubit* %q)\n\
               \x20 ret void\n\
               }\n\
               declare %Qubit* @__quantum__rt__qubit_allocate()\n\
               declare void @__quantum__rt__qubit_release(%Qubit*)\n\
               declare void @__quantum__qis__h__body(%Qubit*)\n";
    let module = parse(src);
    let diags = analyze_module(&module, None, &AnalysisConfig::default()).unwrap();
    assert_eq!(diags.len(), 1, "{diags:?}");
    assert_eq!(diags[0].kind, DiagnosticKind::UseAfterReleaseQubit);
}
