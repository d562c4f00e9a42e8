//! Brute-force replay of a straight-line trace, written directly from the
//! management rules and independent of the analyzer's engine and ledger.
//!
//! State is a plain list for Q and an ordered list of (array, members,
//! slots) for QA. Handles are labeled in creation order — one label per
//! allocation event, arrays before their seeded members — which matches the
//! convention the analyzer uses, so final states are comparable label by
//! label.

use crate::traces::TraceOp;
use qir_sentinel_core::DiagnosticKind;
use std::collections::BTreeMap;

/// Final replay state plus every violation kind encountered, in order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ReplayOutcome {
    /// Live single qubits, in insertion order.
    pub q: Vec<u32>,
    /// Live arrays with members in insertion order.
    pub qa: Vec<(u32, Vec<u32>)>,
    pub kinds: Vec<DiagnosticKind>,
}

#[derive(Clone, Debug)]
enum Val {
    Qubit(u32),
    Array(u32),
    /// A value the analysis could not identify.
    Poisoned,
    Result,
}

#[derive(Clone, Debug)]
struct Row {
    label: u32,
    len: u64,
    members: Vec<u32>,
    /// Slot index -> occupant; `None` marks a slot written with an
    /// unidentifiable value.
    slots: BTreeMap<u64, Option<u32>>,
}

struct Replay {
    next_label: u32,
    q: Vec<u32>,
    qa: Vec<Row>,
    vals: Vec<Val>,
    released_qubits: Vec<u32>,
    released_arrays: Vec<u32>,
    kinds: Vec<DiagnosticKind>,
}

pub fn replay_trace(ops: &[TraceOp]) -> ReplayOutcome {
    let mut r = Replay {
        next_label: 0,
        q: Vec::new(),
        qa: Vec::new(),
        vals: Vec::new(),
        released_qubits: Vec::new(),
        released_arrays: Vec::new(),
        kinds: Vec::new(),
    };
    for op in ops {
        r.step(*op);
    }
    ReplayOutcome {
        q: r.q,
        qa: r
            .qa
            .iter()
            .map(|row| (row.label, row.members.clone()))
            .collect(),
        kinds: r.kinds,
    }
}

impl Replay {
    fn fresh(&mut self) -> u32 {
        let label = self.next_label;
        self.next_label += 1;
        label
    }

    fn row_index(&self, label: u32) -> Option<usize> {
        self.qa.iter().position(|row| row.label == label)
    }

    fn qubit_live(&self, q: u32) -> bool {
        self.q.contains(&q) || self.qa.iter().any(|row| row.members.contains(&q))
    }

    fn membership_count(&self, q: u32) -> usize {
        self.qa
            .iter()
            .filter(|row| row.members.contains(&q))
            .count()
    }

    fn in_any_row(&self, q: u32) -> bool {
        self.qa.iter().any(|row| row.members.contains(&q))
    }

    fn step(&mut self, op: TraceOp) {
        match op {
            TraceOp::AllocQubit => {
                let q = self.fresh();
                self.q.push(q);
                self.vals.push(Val::Qubit(q));
            }
            TraceOp::AllocArray { len } => {
                let a = self.fresh();
                let mut row = Row {
                    label: a,
                    len,
                    members: Vec::new(),
                    slots: BTreeMap::new(),
                };
                for index in 0..len {
                    let member = self.fresh();
                    row.members.push(member);
                    row.slots.insert(index, Some(member));
                }
                self.qa.push(row);
                self.vals.push(Val::Array(a));
            }
            TraceOp::CreateArray { len } => {
                let a = self.fresh();
                self.qa.push(Row {
                    label: a,
                    len,
                    members: Vec::new(),
                    slots: BTreeMap::new(),
                });
                self.vals.push(Val::Array(a));
            }
            TraceOp::ReleaseQubit { q } => match self.vals[q].clone() {
                Val::Qubit(label) => {
                    if self.in_any_row(label) {
                        self.kinds.push(DiagnosticKind::ReleaseQubitInArray);
                    } else if !self.q.contains(&label) {
                        if self.released_qubits.contains(&label) {
                            self.kinds.push(DiagnosticKind::DoubleReleaseQubit);
                        } else {
                            self.kinds.push(DiagnosticKind::UseAfterReleaseQubit);
                        }
                    } else {
                        self.q.retain(|x| *x != label);
                        self.released_qubits.push(label);
                    }
                }
                Val::Poisoned => {}
                _ => self.kinds.push(DiagnosticKind::TypeMismatch),
            },
            TraceOp::ReleaseArray { a } => match self.vals[a].clone() {
                Val::Array(label) => match self.row_index(label) {
                    Some(i) => {
                        let row = self.qa.remove(i);
                        for member in row.members {
                            self.q.retain(|x| *x != member);
                            self.released_qubits.push(member);
                        }
                        self.released_arrays.push(label);
                    }
                    None => {
                        if self.released_arrays.contains(&label) {
                            self.kinds.push(DiagnosticKind::DoubleReleaseArray);
                        } else {
                            self.kinds.push(DiagnosticKind::UseAfterReleaseArray);
                        }
                    }
                },
                Val::Poisoned => {}
                _ => self.kinds.push(DiagnosticKind::TypeMismatch),
            },
            TraceOp::StoreQubit { a, index, q } => {
                let Val::Array(alabel) = self.vals[a].clone() else {
                    return;
                };
                match self.vals[q].clone() {
                    Val::Qubit(qlabel) => {
                        if !self.qubit_live(qlabel) {
                            self.kinds.push(DiagnosticKind::UseAfterReleaseQubit);
                            return;
                        }
                        let Some(i) = self.row_index(alabel) else {
                            self.kinds.push(DiagnosticKind::UseAfterReleaseArray);
                            return;
                        };
                        if index >= self.qa[i].len {
                            self.kinds.push(DiagnosticKind::IndexOutOfBounds);
                            return;
                        }
                        if self.qa[i].members.contains(&qlabel) {
                            self.kinds.push(DiagnosticKind::CloneInArrayStore);
                            return;
                        }
                        self.qa[i].members.push(qlabel);
                        self.qa[i].slots.insert(index, Some(qlabel));
                        if self.membership_count(qlabel) > 1 {
                            self.kinds.push(DiagnosticKind::MultiArrayMembershipNote);
                        }
                    }
                    Val::Poisoned => {
                        self.kinds.push(DiagnosticKind::StoreUnknownQubit);
                        if let Some(i) = self.row_index(alabel) {
                            self.qa[i].slots.insert(index, None);
                        }
                    }
                    _ => self.kinds.push(DiagnosticKind::TypeMismatch),
                }
            }
            TraceOp::LoadQubit { a, index } => {
                let Val::Array(alabel) = self.vals[a].clone() else {
                    self.vals.push(Val::Poisoned);
                    return;
                };
                let Some(i) = self.row_index(alabel) else {
                    self.kinds.push(DiagnosticKind::LoadFromReleasedArray);
                    self.vals.push(Val::Poisoned);
                    return;
                };
                if index >= self.qa[i].len {
                    self.kinds.push(DiagnosticKind::IndexOutOfBounds);
                    self.vals.push(Val::Poisoned);
                    return;
                }
                match self.qa[i].slots.get(&index) {
                    Some(Some(member)) => {
                        let member = *member;
                        if !self.qa[i].members.contains(&member) {
                            self.qa[i].members.push(member);
                        }
                        self.vals.push(Val::Qubit(member));
                    }
                    Some(None) => self.vals.push(Val::Poisoned),
                    None => {
                        let member = self.fresh();
                        self.qa[i].members.push(member);
                        self.qa[i].slots.insert(index, Some(member));
                        self.vals.push(Val::Qubit(member));
                    }
                }
            }
            TraceOp::GateSingle { q } | TraceOp::GateRotation { q } => match self.vals[q].clone() {
                Val::Qubit(label) => {
                    if !self.qubit_live(label) {
                        self.kinds.push(DiagnosticKind::UseAfterReleaseQubit);
                    }
                }
                Val::Poisoned => {}
                _ => self.kinds.push(DiagnosticKind::TypeMismatch),
            },
            TraceOp::GateCtl { a, q } => {
                let target = match self.vals[q].clone() {
                    Val::Qubit(label) => {
                        if !self.qubit_live(label) {
                            self.kinds.push(DiagnosticKind::UseAfterReleaseQubit);
                        }
                        Some(label)
                    }
                    Val::Poisoned => None,
                    _ => {
                        self.kinds.push(DiagnosticKind::TypeMismatch);
                        None
                    }
                };
                let controls = match self.vals[a].clone() {
                    Val::Array(label) => {
                        if self.row_index(label).is_none() {
                            self.kinds.push(DiagnosticKind::UseAfterReleaseArray);
                            None
                        } else {
                            Some(label)
                        }
                    }
                    Val::Poisoned => None,
                    _ => {
                        self.kinds.push(DiagnosticKind::TypeMismatch);
                        None
                    }
                };
                if let (Some(t), Some(c)) = (target, controls) {
                    let i = self.row_index(c).expect("checked live");
                    if self.qa[i].members.contains(&t) {
                        self.kinds.push(DiagnosticKind::CloneControlTarget);
                    }
                }
            }
            TraceOp::Measure { bases: _, qubits } => {
                match self.vals[qubits].clone() {
                    Val::Array(label) => {
                        if self.row_index(label).is_none() {
                            self.kinds.push(DiagnosticKind::MeasureReleasedArray);
                        }
                    }
                    Val::Poisoned => {}
                    _ => self.kinds.push(DiagnosticKind::TypeMismatch),
                }
                self.vals.push(Val::Result);
            }
        }
    }
}
