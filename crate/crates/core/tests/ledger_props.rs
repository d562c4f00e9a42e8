//! Property tests for the management model: agreement with a reference
//! finite-set implementation under arbitrary interleavings, row uniqueness,
//! find/check consistency, and the pure-state law.

use proptest::prelude::*;
use qir_sentinel_core::ast::SourceSpan;
use qir_sentinel_core::ledger::{ArrayHandle, ArrayOrigin, Ledger, QubitHandle, QubitOrigin};

const UNIVERSE: u32 = 24;

fn qubit(id: u32) -> QubitHandle {
    QubitHandle {
        id,
        origin: QubitOrigin::DynamicSingle {
            alloc_span: SourceSpan::new(1, 1, 2),
        },
    }
}

fn array(id: u32) -> ArrayHandle {
    ArrayHandle {
        id: 1000 + id,
        origin: ArrayOrigin::Created {
            span: SourceSpan::new(1, 1, 2),
        },
        length: Some(8),
    }
}

#[derive(Clone, Copy, Debug)]
enum Op {
    AppQ(u32),
    DelQ(u32),
    CheckQ(u32),
    AppArr(u32),
    DelArr(u32),
    CheckArrList(u32),
    AppMember(u32, u32),
    CheckMember(u32, u32),
    FindArr(u32),
}

fn op_strategy() -> impl Strategy<Value = Op> {
    let q = 0..UNIVERSE;
    let a = 0..UNIVERSE / 2;
    prop_oneof![
        q.clone().prop_map(Op::AppQ),
        q.clone().prop_map(Op::DelQ),
        q.clone().prop_map(Op::CheckQ),
        a.clone().prop_map(Op::AppArr),
        a.clone().prop_map(Op::DelArr),
        a.clone().prop_map(Op::CheckArrList),
        (a.clone(), q.clone()).prop_map(|(x, y)| Op::AppMember(x, y)),
        (a.clone(), q.clone()).prop_map(|(x, y)| Op::CheckMember(x, y)),
        q.prop_map(Op::FindArr),
    ]
}

/// Reference model: plain vectors with set semantics, written without
/// looking at the ledger implementation.
#[derive(Default)]
struct SetModel {
    q: Vec<u32>,
    qa: Vec<(u32, Vec<u32>)>,
}

impl SetModel {
    fn row(&mut self, a: u32) -> Option<&mut Vec<u32>> {
        self.qa.iter_mut().find(|(k, _)| *k == a).map(|(_, v)| v)
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 160, ..ProptestConfig::default() })]

    #[test]
    fn ledger_agrees_with_reference_set_model(ops in proptest::collection::vec(op_strategy(), 1..700)) {
        let mut ledger = Ledger::new();
        let mut model = SetModel::default();

        for op in ops {
            match op {
                Op::AppQ(x) => {
                    let snapshot = ledger.clone();
                    let result = ledger.appqlist(qubit(x));
                    // Pure-state law: the input ledger is untouched.
                    prop_assert_eq!(&ledger, &snapshot);
                    match result {
                        Ok(next) => {
                            prop_assert!(!model.q.contains(&x));
                            model.q.push(x);
                            ledger = next;
                        }
                        Err(_) => prop_assert!(model.q.contains(&x)),
                    }
                }
                Op::DelQ(x) => match ledger.delq(qubit(x)) {
                    Ok(next) => {
                        prop_assert!(model.q.contains(&x));
                        model.q.retain(|v| *v != x);
                        ledger = next;
                    }
                    Err(_) => prop_assert!(!model.q.contains(&x)),
                },
                Op::CheckQ(x) => {
                    prop_assert_eq!(ledger.checkq(qubit(x)), model.q.contains(&x));
                }
                Op::AppArr(x) => match ledger.appqarrlist(array(x)) {
                    Ok(next) => {
                        prop_assert!(model.row(x).is_none());
                        model.qa.push((x, Vec::new()));
                        ledger = next;
                    }
                    Err(_) => prop_assert!(model.row(x).is_some()),
                },
                Op::DelArr(x) => match ledger.delqarr(array(x)) {
                    Ok((next, killed)) => {
                        let members = model.row(x).cloned().unwrap();
                        prop_assert_eq!(
                            killed.iter().map(|k| k.id).collect::<Vec<_>>(),
                            members.clone()
                        );
                        for m in &members {
                            model.q.retain(|v| v != m);
                        }
                        model.qa.retain(|(k, _)| *k != x);
                        ledger = next;
                    }
                    Err(_) => prop_assert!(model.row(x).is_none()),
                },
                Op::CheckArrList(x) => {
                    prop_assert_eq!(ledger.checkqarrlist(array(x)), model.row(x).is_some());
                }
                Op::AppMember(a, q) => match ledger.appqarr(array(a), qubit(q)) {
                    Ok(next) => {
                        let row = model.row(a);
                        prop_assert!(row.is_some());
                        let row = row.unwrap();
                        if !row.contains(&q) {
                            row.push(q);
                        }
                        ledger = next;
                    }
                    Err(_) => prop_assert!(model.row(a).is_none()),
                },
                Op::CheckMember(a, q) => {
                    let expected = model.row(a).is_some_and(|row| row.contains(&q));
                    prop_assert_eq!(ledger.checkqarr(array(a), qubit(q)), expected);
                }
                Op::FindArr(q) => {
                    let expected = model
                        .qa
                        .iter()
                        .find(|(_, row)| row.contains(&q))
                        .map(|(k, _)| *k);
                    prop_assert_eq!(ledger.findqarr(qubit(q)).map(|a| a.id - 1000), expected);
                }
            }

            // Row uniqueness after every step.
            for (_, row) in ledger.qa_entries() {
                let mut seen = std::collections::HashSet::new();
                for m in row.members() {
                    prop_assert!(seen.insert(m.id), "duplicate member in a row");
                }
            }
        }

        // Final state agreement, order included.
        prop_assert_eq!(
            ledger.q_entries().iter().map(|q| q.id).collect::<Vec<_>>(),
            model.q.clone()
        );
        prop_assert_eq!(
            ledger
                .qa_entries()
                .map(|(a, row)| (a.id - 1000, row.members().iter().map(|m| m.id).collect()))
                .collect::<Vec<(u32, Vec<u32>)>>(),
            model.qa.clone()
        );
    }

    #[test]
    fn findqarr_result_always_passes_checkqarr(ops in proptest::collection::vec(op_strategy(), 1..200)) {
        let mut ledger = Ledger::new();
        for op in ops {
            match op {
                Op::AppQ(x) => ledger = ledger.appqlist(qubit(x)).unwrap_or(ledger),
                Op::DelQ(x) => ledger = ledger.delq(qubit(x)).unwrap_or(ledger),
                Op::AppArr(x) => ledger = ledger.appqarrlist(array(x)).unwrap_or(ledger),
                Op::DelArr(x) => {
                    ledger = ledger.delqarr(array(x)).map(|(l, _)| l).unwrap_or(ledger)
                }
                Op::AppMember(a, q) => {
                    ledger = ledger.appqarr(array(a), qubit(q)).unwrap_or(ledger)
                }
                _ => {}
            }
            for x in 0..UNIVERSE {
                if let Some(found) = ledger.findqarr(qubit(x)) {
                    prop_assert!(ledger.checkqarr(found, qubit(x)));
                    prop_assert!(ledger.membership_count(qubit(x)) >= 1);
                } else {
                    prop_assert_eq!(ledger.membership_count(qubit(x)), 0);
                }
            }
        }
    }

    #[test]
    fn delete_then_check_is_false(q in 0..UNIVERSE, a in 0..UNIVERSE / 2) {
        let ledger = Ledger::new()
            .appqlist(qubit(q))
            .unwrap()
            .appqarrlist(array(a))
            .unwrap();
        let after_q = ledger.delq(qubit(q)).unwrap();
        prop_assert!(!after_q.checkq(qubit(q)));
        let (after_a, _) = ledger.delqarr(array(a)).unwrap();
        prop_assert!(!after_a.checkqarrlist(array(a)));
    }
}
