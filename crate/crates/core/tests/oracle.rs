//! Engine-vs-oracle agreement on straight-line programs: the final ledger
//! and the multiset of reported kinds must match a brute-force replay of
//! the rules over the abstract op sequence. Handle labels follow creation
//! order on both sides, so states compare exactly.

use qir_sentinel_core::parser::parse_module;
use qir_sentinel_core::semantics::{analyze_entry, AnalysisConfig, DiagnosticKind};
use qir_sentinel_core::validate_module;
use qir_sentinel_testkit::{
    gen_any_trace, gen_safe_trace, render_trace, replay_trace, ReplayOutcome, TraceOp,
};
use rand::prelude::*;

fn run_engine(ops: &[TraceOp]) -> (ReplayOutcome, Vec<DiagnosticKind>) {
    let source = render_trace(ops);
    let (module, warnings) = parse_module(&source, "trace.ll")
        .unwrap_or_else(|e| panic!("rendered trace must parse: {e:?}\n{source}"));
    assert!(warnings.is_empty(), "{warnings:?}");
    assert!(validate_module(&module).is_empty());

    let run = analyze_entry(&module, "main", &AnalysisConfig::default()).expect("main defined");
    assert_eq!(
        run.final_states.len(),
        1,
        "straight-line program has one path"
    );
    let ledger = &run.final_states[0].ledger;
    let got = ReplayOutcome {
        q: ledger.q_entries().iter().map(|q| q.id).collect(),
        qa: ledger
            .qa_entries()
            .map(|(a, row)| (a.id, row.members().iter().map(|m| m.id).collect()))
            .collect(),
        kinds: Vec::new(),
    };
    let kinds = run.diagnostics.iter().map(|d| d.kind).collect();
    (got, kinds)
}

fn assert_agreement(ops: &[TraceOp]) {
    let expected = replay_trace(ops);
    let (got, mut got_kinds) = run_engine(ops);
    let mut expected_kinds = expected.kinds.clone();
    got_kinds.sort();
    expected_kinds.sort();
    assert_eq!(
        got.q,
        expected.q,
        "live-qubit list diverged\nops: {ops:?}\nsource:\n{}",
        render_trace(ops)
    );
    assert_eq!(
        got.qa,
        expected.qa,
        "array table diverged\nops: {ops:?}\nsource:\n{}",
        render_trace(ops)
    );
    assert_eq!(
        got_kinds,
        expected_kinds,
        "diagnostic kinds diverged\nops: {ops:?}\nsource:\n{}",
        render_trace(ops)
    );
}

#[test]
fn engine_matches_replay_on_handwritten_sequences() {
    use TraceOp::*;
    let cases: Vec<Vec<TraceOp>> = vec![
        // alloc; alloc; release(first) leaves only the second.
        vec![AllocQubit, AllocQubit, ReleaseQubit { q: 0 }],
        // Allocate, release, release again: double release.
        vec![AllocQubit, ReleaseQubit { q: 0 }, ReleaseQubit { q: 0 }],
        // Array alloc seeds members; loads resolve to them.
        vec![
            AllocArray { len: 2 },
            LoadQubit { a: 0, index: 0 },
            LoadQubit { a: 0, index: 1 },
            GateSingle { q: 1 },
            ReleaseArray { a: 0 },
        ],
        // Created array, two distinct stores, controlled gate on outsider.
        vec![
            AllocQubit,
            AllocQubit,
            AllocQubit,
            CreateArray { len: 2 },
            StoreQubit {
                a: 3,
                index: 0,
                q: 0,
            },
            StoreQubit {
                a: 3,
                index: 1,
                q: 1,
            },
            GateCtl { a: 3, q: 2 },
        ],
        // Cloning pair: duplicate store then control/target overlap.
        vec![
            AllocQubit,
            CreateArray { len: 2 },
            StoreQubit {
                a: 1,
                index: 0,
                q: 0,
            },
            StoreQubit {
                a: 1,
                index: 1,
                q: 0,
            },
            GateCtl { a: 1, q: 0 },
        ],
        // Releasing an array kills stored singles.
        vec![
            AllocQubit,
            CreateArray { len: 1 },
            StoreQubit {
                a: 1,
                index: 0,
                q: 0,
            },
            ReleaseArray { a: 1 },
            GateSingle { q: 0 },
            ReleaseQubit { q: 0 },
        ],
        // Measurement twice on a live array is fine; after release it is not.
        vec![
            CreateArray { len: 1 },
            AllocArray { len: 1 },
            Measure {
                bases: 0,
                qubits: 1,
            },
            Measure {
                bases: 0,
                qubits: 1,
            },
            ReleaseArray { a: 1 },
            Measure {
                bases: 0,
                qubits: 1,
            },
        ],
        // Out-of-bounds load.
        vec![AllocArray { len: 1 }, LoadQubit { a: 0, index: 4 }],
        // Zero-length array.
        vec![AllocArray { len: 0 }, ReleaseArray { a: 0 }],
        // Qubit in two arrays, then one array released.
        vec![
            AllocQubit,
            CreateArray { len: 1 },
            CreateArray { len: 1 },
            StoreQubit {
                a: 1,
                index: 0,
                q: 0,
            },
            StoreQubit {
                a: 2,
                index: 0,
                q: 0,
            },
            ReleaseArray { a: 1 },
            GateSingle { q: 0 },
        ],
    ];
    for ops in &cases {
        assert_agreement(ops);
    }
}

#[test]
fn engine_matches_replay_on_random_mixes() {
    let mut rng = StdRng::seed_from_u64(0x0ac1e);
    for round in 0..300 {
        let len = 4 + (round % 40);
        let ops = gen_any_trace(&mut rng, len);
        assert_agreement(&ops);
    }
}

#[test]
fn engine_matches_replay_on_safe_traces() {
    let mut rng = StdRng::seed_from_u64(0x5afe);
    for round in 0..100 {
        let ops = gen_safe_trace(&mut rng, 6 + (round % 30));
        assert_agreement(&ops);
    }
}
