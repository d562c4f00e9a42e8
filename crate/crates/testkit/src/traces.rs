//! Abstract straight-line quantum instruction sequences, their rendering to
//! textual QIR, and random constructors for safe and unsafe programs.

use rand::prelude::*;
use std::fmt::Write;

/// One step of a straight-line program. Qubit- and array-valued operands
/// refer to earlier steps by the index of the value they produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceOp {
    AllocQubit,
    AllocArray { len: u64 },
    CreateArray { len: u64 },
    ReleaseQubit { q: usize },
    ReleaseArray { a: usize },
    StoreQubit { a: usize, index: u64, q: usize },
    LoadQubit { a: usize, index: u64 },
    GateSingle { q: usize },
    GateRotation { q: usize },
    GateCtl { a: usize, q: usize },
    Measure { bases: usize, qubits: usize },
}

impl TraceOp {
    /// Whether this op binds a new value (and thus consumes a `%v` name).
    pub fn produces_value(self) -> bool {
        matches!(
            self,
            TraceOp::AllocQubit
                | TraceOp::AllocArray { .. }
                | TraceOp::CreateArray { .. }
                | TraceOp::LoadQubit { .. }
                | TraceOp::Measure { .. }
        )
    }
}

/// Renders a trace as one `@main` definition plus the runtime declarations.
pub fn render_trace(ops: &[TraceOp]) -> String {
    let mut body = String::new();
    let mut val = 0usize; // %v<i> names, one per produced value
    let mut tmp = 0usize; // %t<i> names for gep/bitcast plumbing

    for op in ops {
        match *op {
            TraceOp::AllocQubit => {
                let _ = writeln!(
                    body,
                    "  %v{val} = call %Qubit* @__quantum__rt__qubit_allocate()"
                );
                val += 1;
            }
            TraceOp::AllocArray { len } => {
                let _ = writeln!(
                    body,
                    "  %v{val} = call %Array* @__quantum__rt__qubit_allocate_array(i64 {len})"
                );
                val += 1;
            }
            TraceOp::CreateArray { len } => {
                let _ = writeln!(
                    body,
                    "  %v{val} = call %Array* @__quantum__rt__array_create_1d(i32 8, i64 {len})"
                );
                val += 1;
            }
            TraceOp::ReleaseQubit { q } => {
                let _ = writeln!(
                    body,
                    "  call void @__quantum__rt__qubit_release(%Qubit* %v{q})"
                );
            }
            TraceOp::ReleaseArray { a } => {
                let _ = writeln!(
                    body,
                    "  call void @__quantum__rt__qubit_release_array(%Array* %v{a})"
                );
            }
            TraceOp::StoreQubit { a, index, q } => {
                let _ = writeln!(
                    body,
                    "  %t{tmp} = call i8* @__quantum__rt__array_get_element_ptr_1d(%Array* %v{a}, i64 {index})"
                );
                let _ = writeln!(body, "  %t{} = bitcast i8* %t{tmp} to %Qubit**", tmp + 1);
                let _ = writeln!(
                    body,
                    "  store %Qubit* %v{q}, %Qubit** %t{}, align 8",
                    tmp + 1
                );
                tmp += 2;
            }
            TraceOp::LoadQubit { a, index } => {
                let _ = writeln!(
                    body,
                    "  %t{tmp} = call i8* @__quantum__rt__array_get_element_ptr_1d(%Array* %v{a}, i64 {index})"
                );
                let _ = writeln!(body, "  %t{} = bitcast i8* %t{tmp} to %Qubit**", tmp + 1);
                let _ = writeln!(
                    body,
                    "  %v{val} = load %Qubit*, %Qubit** %t{}, align 8",
                    tmp + 1
                );
                tmp += 2;
                val += 1;
            }
            TraceOp::GateSingle { q } => {
                let _ = writeln!(body, "  call void @__quantum__qis__h__body(%Qubit* %v{q})");
            }
            TraceOp::GateRotation { q } => {
                let _ = writeln!(
                    body,
                    "  call void @__quantum__qis__rz__body(double 0.5, %Qubit* %v{q})"
                );
            }
            TraceOp::GateCtl { a, q } => {
                let _ = writeln!(
                    body,
                    "  call void @__quantum__qis__x__ctl(%Array* %v{a}, %Qubit* %v{q})"
                );
            }
            TraceOp::Measure { bases, qubits } => {
                let _ = writeln!(
                    body,
                    "  %v{val} = call %Result* @__quantum__qis__measure__body(%Array* %v{bases}, %Array* %v{qubits})"
                );
                val += 1;
            }
        }
    }

    format!(
        "define internal void @main() {{\nentry:\n{body}  ret void\n}}\n\n\
         declare %Qubit* @__quantum__rt__qubit_allocate()\n\
         declare %Array* @__quantum__rt__qubit_allocate_array(i64)\n\
         declare %Array* @__quantum__rt__array_create_1d(i32, i64)\n\
         declare i8* @__quantum__rt__array_get_element_ptr_1d(%Array*, i64)\n\
         declare void @__quantum__rt__qubit_release(%Qubit*)\n\
         declare void @__quantum__rt__qubit_release_array(%Array*)\n\
         declare void @__quantum__qis__h__body(%Qubit*)\n\
         declare void @__quantum__qis__rz__body(double, %Qubit*)\n\
         declare void @__quantum__qis__x__ctl(%Array*, %Qubit*)\n\
         declare %Result* @__quantum__qis__measure__body(%Array*, %Array*)\n"
    )
}

/// What the generator knows about each produced value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum GenVal {
    /// A qubit the generator may still use.
    Qubit,
    /// A qubit value whose identity the analyzer would not know (load from a
    /// released array or out of bounds); never reused.
    PoisonedQubit,
    /// An array with its declared length and generator-side liveness.
    /// `created` distinguishes empty containers from pre-seeded allocations.
    Array { len: u64, live: bool, created: bool },
    /// A measurement result; never reused.
    Result,
}

/// Generator bookkeeping shared by the constructors.
struct TraceBuilder {
    ops: Vec<TraceOp>,
    vals: Vec<GenVal>,
    /// Qubit vals the generator believes dead (released directly or with an
    /// array). Beliefs only guide generation; the oracle decides truth.
    dead_qubits: Vec<usize>,
    /// array val -> member qubit vals the generator has associated with it.
    members: Vec<(usize, Vec<usize>)>,
}

impl TraceBuilder {
    fn new() -> Self {
        Self {
            ops: Vec::new(),
            vals: Vec::new(),
            dead_qubits: Vec::new(),
            members: Vec::new(),
        }
    }

    fn push(&mut self, op: TraceOp) {
        if op.produces_value() {
            let produced = match op {
                TraceOp::AllocQubit => GenVal::Qubit,
                TraceOp::AllocArray { len } => GenVal::Array {
                    len,
                    live: true,
                    created: false,
                },
                TraceOp::CreateArray { len } => GenVal::Array {
                    len,
                    live: true,
                    created: true,
                },
                TraceOp::LoadQubit { a, index } => {
                    let usable = match self.vals[a] {
                        GenVal::Array { len, live, .. } => live && index < len,
                        _ => false,
                    };
                    if usable {
                        GenVal::Qubit
                    } else {
                        GenVal::PoisonedQubit
                    }
                }
                TraceOp::Measure { .. } => GenVal::Result,
                _ => unreachable!(),
            };
            self.vals.push(produced);
            if let (TraceOp::LoadQubit { a, .. }, GenVal::Qubit) = (op, *self.vals.last().unwrap())
            {
                let loaded = self.vals.len() - 1;
                self.member_list(a).push(loaded);
            }
        }
        match op {
            TraceOp::ReleaseQubit { q } => self.dead_qubits.push(q),
            TraceOp::ReleaseArray { a } => {
                if let GenVal::Array { live, .. } = &mut self.vals[a] {
                    *live = false;
                }
                let members = self
                    .members
                    .iter()
                    .find(|(arr, _)| *arr == a)
                    .map(|(_, m)| m.clone())
                    .unwrap_or_default();
                self.dead_qubits.extend(members);
            }
            TraceOp::StoreQubit { a, q, .. } => {
                self.member_list(a).push(q);
            }
            _ => {}
        }
        self.ops.push(op);
    }

    fn member_list(&mut self, a: usize) -> &mut Vec<usize> {
        if let Some(pos) = self.members.iter().position(|(arr, _)| *arr == a) {
            &mut self.members[pos].1
        } else {
            self.members.push((a, Vec::new()));
            &mut self.members.last_mut().unwrap().1
        }
    }

    fn qubit_is_dead(&self, q: usize) -> bool {
        self.dead_qubits.contains(&q)
    }

    /// Qubit values the generator believes are live.
    fn live_qubits(&self) -> Vec<usize> {
        self.vals
            .iter()
            .enumerate()
            .filter(|(i, v)| matches!(v, GenVal::Qubit) && !self.qubit_is_dead(*i))
            .map(|(i, _)| i)
            .collect()
    }

    /// Any qubit value the analyzer can identify, live or dead.
    fn known_qubits(&self) -> Vec<usize> {
        self.vals
            .iter()
            .enumerate()
            .filter(|(_, v)| matches!(v, GenVal::Qubit))
            .map(|(i, _)| i)
            .collect()
    }

    fn arrays(&self, live_only: bool) -> Vec<(usize, u64)> {
        self.vals
            .iter()
            .enumerate()
            .filter_map(|(i, v)| match v {
                GenVal::Array { len, live, .. } if *live || !live_only => Some((i, *len)),
                _ => None,
            })
            .collect()
    }

    /// Live created arrays with a free sequential slot.
    fn created_with_room(&self) -> Vec<(usize, u64)> {
        self.vals
            .iter()
            .enumerate()
            .filter_map(|(i, v)| match v {
                GenVal::Array {
                    len,
                    live: true,
                    created: true,
                } => {
                    let used = self
                        .members
                        .iter()
                        .find(|(arr, _)| *arr == i)
                        .map(|(_, m)| m.len() as u64)
                        .unwrap_or(0);
                    if used < *len {
                        Some((i, used))
                    } else {
                        None
                    }
                }
                _ => None,
            })
            .collect()
    }

    fn members_of(&self, a: usize) -> Vec<usize> {
        self.members
            .iter()
            .find(|(arr, _)| *arr == a)
            .map(|(_, m)| m.clone())
            .unwrap_or_default()
    }
}

/// Free mix of every op kind, including unsafe ones; only values the
/// analyzer cannot identify are never reused.
pub fn gen_any_trace(rng: &mut StdRng, len: usize) -> Vec<TraceOp> {
    let mut b = TraceBuilder::new();
    for _ in 0..len {
        let qubits = b.known_qubits();
        let arrays = b.arrays(false);
        let choice = rng.gen_range(0u32..100);
        let op = match choice {
            0..=17 => TraceOp::AllocQubit,
            18..=27 => TraceOp::AllocArray {
                len: rng.gen_range(0..4),
            },
            28..=37 => TraceOp::CreateArray {
                len: rng.gen_range(1..4),
            },
            38..=49 => match pick(rng, &qubits) {
                Some(q) => TraceOp::ReleaseQubit { q },
                None => TraceOp::AllocQubit,
            },
            50..=57 => match pick(rng, &arrays) {
                Some((a, _)) => TraceOp::ReleaseArray { a },
                None => TraceOp::AllocArray {
                    len: rng.gen_range(1..4),
                },
            },
            58..=69 => match (pick(rng, &arrays), pick(rng, &qubits)) {
                (Some((a, len)), Some(q)) => {
                    let index = rng.gen_range(0..len.max(1) + 1);
                    TraceOp::StoreQubit { a, index, q }
                }
                _ => TraceOp::AllocQubit,
            },
            70..=79 => match pick(rng, &arrays) {
                Some((a, len)) => {
                    let index = rng.gen_range(0..len.max(1) + 1);
                    TraceOp::LoadQubit { a, index }
                }
                None => TraceOp::CreateArray {
                    len: rng.gen_range(1..4),
                },
            },
            80..=88 => match pick(rng, &qubits) {
                Some(q) if rng.gen_bool(0.5) => TraceOp::GateSingle { q },
                Some(q) => TraceOp::GateRotation { q },
                None => TraceOp::AllocQubit,
            },
            89..=94 => match (pick(rng, &arrays), pick(rng, &qubits)) {
                (Some((a, _)), Some(q)) => TraceOp::GateCtl { a, q },
                _ => TraceOp::AllocQubit,
            },
            _ => {
                let pair = (pick(rng, &arrays), pick(rng, &arrays));
                match pair {
                    (Some((bases, _)), Some((qubits, _))) => TraceOp::Measure { bases, qubits },
                    _ => TraceOp::CreateArray { len: 1 },
                }
            }
        };
        b.push(op);
    }
    b.ops
}

/// Only ever uses live, distinct qubits: allocations, in-bounds loads and
/// stores of distinct qubits, gates on live values, measurement of live
/// arrays, releases of values nothing references afterwards.
pub fn gen_safe_trace(rng: &mut StdRng, len: usize) -> Vec<TraceOp> {
    let mut b = TraceBuilder::new();
    for _ in 0..len {
        let live = b.live_qubits();
        let live_arrays = b.arrays(true);
        let choice = rng.gen_range(0u32..100);
        let op = match choice {
            0..=21 => TraceOp::AllocQubit,
            22..=33 => TraceOp::AllocArray {
                len: rng.gen_range(0..4),
            },
            34..=43 => TraceOp::CreateArray {
                len: rng.gen_range(1..4),
            },
            44..=55 => {
                // Store a live single that is in no array yet into the next
                // free slot of a created array.
                let storable: Vec<usize> = live
                    .iter()
                    .copied()
                    .filter(|q| b.members.iter().all(|(_, m)| !m.contains(q)))
                    .collect();
                match (pick(rng, &storable), pick(rng, &b.created_with_room())) {
                    (Some(q), Some((a, index))) => TraceOp::StoreQubit { a, index, q },
                    _ => TraceOp::AllocQubit,
                }
            }
            56..=67 => match pick(rng, &live_arrays) {
                Some((a, len)) if len > 0 => TraceOp::LoadQubit {
                    a,
                    index: rng.gen_range(0..len),
                },
                _ => TraceOp::AllocArray {
                    len: rng.gen_range(1..4),
                },
            },
            68..=81 => match pick(rng, &live) {
                Some(q) if rng.gen_bool(0.5) => TraceOp::GateSingle { q },
                Some(q) => TraceOp::GateRotation { q },
                None => TraceOp::AllocQubit,
            },
            82..=87 => {
                // Controlled gate with a target outside the control array.
                let candidate = live_arrays.iter().find_map(|&(a, _)| {
                    let members = b.members_of(a);
                    live.iter()
                        .copied()
                        .find(|q| !members.contains(q))
                        .map(|q| (a, q))
                });
                match candidate {
                    Some((a, q)) => TraceOp::GateCtl { a, q },
                    None => TraceOp::AllocQubit,
                }
            }
            88..=93 => {
                // Release a single that belongs to no array.
                let releasable: Vec<usize> = live
                    .iter()
                    .copied()
                    .filter(|q| b.members.iter().all(|(_, m)| !m.contains(q)))
                    .collect();
                match pick(rng, &releasable) {
                    Some(q) => TraceOp::ReleaseQubit { q },
                    None => TraceOp::AllocQubit,
                }
            }
            94..=96 => match pick(rng, &live_arrays) {
                Some((a, _)) => TraceOp::ReleaseArray { a },
                None => TraceOp::AllocArray { len: 1 },
            },
            _ => {
                let pair = (pick(rng, &live_arrays), pick(rng, &live_arrays));
                match pair {
                    (Some((bases, _)), Some((qubits, _))) => TraceOp::Measure { bases, qubits },
                    _ => TraceOp::CreateArray { len: 1 },
                }
            }
        };
        b.push(op);
    }
    b.ops
}

/// A safe prefix with one use-after-release violation injected at the end.
pub fn gen_use_after_release_trace(rng: &mut StdRng, prefix: usize) -> Vec<TraceOp> {
    let mut ops = gen_safe_trace(rng, prefix);
    match rng.gen_range(0u32..5) {
        0 => {
            // Gate on a freshly released single.
            let q = next_val(&ops);
            ops.push(TraceOp::AllocQubit);
            ops.push(TraceOp::ReleaseQubit { q });
            ops.push(TraceOp::GateSingle { q });
        }
        1 => {
            // Double release.
            let q = next_val(&ops);
            ops.push(TraceOp::AllocQubit);
            ops.push(TraceOp::ReleaseQubit { q });
            ops.push(TraceOp::ReleaseQubit { q });
        }
        2 => {
            // Load from a released array.
            let a = next_val(&ops);
            ops.push(TraceOp::AllocArray { len: 2 });
            ops.push(TraceOp::ReleaseArray { a });
            ops.push(TraceOp::LoadQubit { a, index: 0 });
        }
        3 => {
            // Measure a released array.
            let bases = next_val(&ops);
            ops.push(TraceOp::CreateArray { len: 1 });
            let a = next_val(&ops);
            ops.push(TraceOp::AllocArray { len: 1 });
            ops.push(TraceOp::ReleaseArray { a });
            ops.push(TraceOp::Measure { bases, qubits: a });
        }
        _ => {
            // Store a released single.
            let a = next_val(&ops);
            ops.push(TraceOp::CreateArray { len: 2 });
            let q = next_val(&ops);
            ops.push(TraceOp::AllocQubit);
            ops.push(TraceOp::ReleaseQubit { q });
            ops.push(TraceOp::StoreQubit { a, index: 0, q });
        }
    }
    ops
}

/// A safe prefix with one cloning violation injected at the end.
pub fn gen_cloning_trace(rng: &mut StdRng, prefix: usize) -> Vec<TraceOp> {
    let mut ops = gen_safe_trace(rng, prefix);
    let a = next_val(&ops);
    ops.push(TraceOp::CreateArray { len: 2 });
    let q = next_val(&ops);
    ops.push(TraceOp::AllocQubit);
    ops.push(TraceOp::StoreQubit { a, index: 0, q });
    if rng.gen_bool(0.5) {
        ops.push(TraceOp::StoreQubit { a, index: 1, q });
    } else {
        ops.push(TraceOp::GateCtl { a, q });
    }
    ops
}

/// Index of the value the next value-producing op will bind.
fn next_val(ops: &[TraceOp]) -> usize {
    ops.iter().filter(|op| op.produces_value()).count()
}

fn pick<T: Copy>(rng: &mut StdRng, xs: &[T]) -> Option<T> {
    if xs.is_empty() {
        None
    } else {
        Some(xs[rng.gen_range(0..xs.len())])
    }
}
