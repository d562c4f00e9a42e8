//! Path-sensitive symbolic executor over (environment, ledger) states.
//!
//! Each quantum runtime call is a transfer function over the ledger. An
//! "abort" in a rule becomes: emit a diagnostic, suppress the operation's
//! state effect, keep going — so a single run reports every independent
//! violation. `fail_fast` restores literal abort semantics for the path
//! that faulted.
//!
//! Unknown branch conditions fork the state (ledger snapshot per fork);
//! back-edges unroll up to the configured bound, then the path is truncated
//! with a note. User calls are inlined up to `max_inline_depth`.

use super::diagnostic::{
    rules, sort_and_dedup, Diagnostic, DiagnosticKind, TraceEntry, TraceEventKind,
};
use super::value::{AbstractValue, ClassicalValue};
use super::{AnalysisConfig, AnalysisError, AnalysisRun, CompletedPath};
use crate::ast::{
    Block, Function, IcmpPredicate, InstKind, Instruction, Operand, QirModule, SourceSpan,
    TermKind, Type,
};
use crate::ledger::{
    ArrayHandle, ArrayOrigin, HandleId, Ledger, QubitHandle, QubitOrigin, SlotState,
};
use std::collections::HashMap;

/// Arrays longer than this are tracked as unknown-length: seeding millions
/// of member handles from a hostile length literal helps nobody.
const MAX_TRACKED_ARRAY_LEN: u64 = 4096;

const RT_PREFIX: &str = "__quantum__rt__";
const QIS_PREFIX: &str = "__quantum__qis__";

/// Quantum runtime calls the engine gives semantics to.
enum Intrinsic<'a> {
    QubitAllocate,
    QubitAllocateArray,
    QubitRelease,
    QubitReleaseArray,
    ArrayCreate1d,
    ArrayGetElementPtr1d,
    /// Reference/alias counting: parsed, no ledger effect.
    CountUpdate,
    /// Any other `__quantum__rt__` function: opaque.
    OtherRuntime,
    Measure,
    GateBody(&'a str),
    GateCtl(&'a str),
    /// `__adj` / `__ctladj` functors: opaque calls with per-qubit-argument
    /// liveness checks.
    GateOpaqueFunctor,
}

fn classify(callee: &str) -> Option<Intrinsic<'_>> {
    if let Some(name) = callee.strip_prefix(RT_PREFIX) {
        return Some(match name {
            "qubit_allocate" => Intrinsic::QubitAllocate,
            "qubit_allocate_array" => Intrinsic::QubitAllocateArray,
            "qubit_release" => Intrinsic::QubitRelease,
            "qubit_release_array" => Intrinsic::QubitReleaseArray,
            "array_create_1d" => Intrinsic::ArrayCreate1d,
            "array_get_element_ptr_1d" => Intrinsic::ArrayGetElementPtr1d,
            "array_update_alias_count" | "array_update_reference_count" => Intrinsic::CountUpdate,
            _ => Intrinsic::OtherRuntime,
        });
    }
    if let Some(name) = callee.strip_prefix(QIS_PREFIX) {
        if name == "measure__body" {
            return Some(Intrinsic::Measure);
        }
        if let Some(gate) = name.strip_suffix("__body") {
            return Some(Intrinsic::GateBody(gate));
        }
        if name.ends_with("__ctladj") || name.ends_with("__adj") {
            return Some(Intrinsic::GateOpaqueFunctor);
        }
        if let Some(gate) = name.strip_suffix("__ctl") {
            return Some(Intrinsic::GateCtl(gate));
        }
        return Some(Intrinsic::OtherRuntime);
    }
    None
}

/// One execution path's mutable state.
#[derive(Clone)]
struct PathState {
    ledger: Ledger,
    /// Per-handle event log; path-local so sibling forks never leak into a
    /// trace.
    history: HashMap<HandleId, Vec<TraceEntry>>,
    /// Set when fail-fast aborted this path.
    dead: bool,
}

impl PathState {
    fn new() -> Self {
        Self {
            ledger: Ledger::new(),
            history: HashMap::new(),
            dead: false,
        }
    }
}

/// SSA environment of the function currently being executed, plus its
/// per-invocation block visit counts for unrolling.
#[derive(Clone)]
struct Frame {
    function: String,
    env: HashMap<String, AbstractValue>,
    visits: HashMap<String, u32>,
}

type CallStack = Vec<(String, SourceSpan)>;
type Outcome = (PathState, AbstractValue);

pub(super) struct Engine<'m> {
    module: &'m QirModule,
    config: &'m AnalysisConfig,
    next_handle: HandleId,
    /// Static qubits dedup by address, shared across paths of one run.
    statics: HashMap<u64, QubitHandle>,
    paths_started: usize,
    budget_noted: bool,
    diagnostics: Vec<Diagnostic>,
}

pub(super) fn analyze_entry_impl(
    module: &QirModule,
    entry: &str,
    config: &AnalysisConfig,
) -> Result<AnalysisRun, AnalysisError> {
    let func = module
        .function(entry)
        .ok_or_else(|| AnalysisError::FunctionNotFound(entry.to_string()))?;
    if func.is_declaration {
        return Err(AnalysisError::FunctionIsDeclaration(entry.to_string()));
    }

    let mut engine = Engine {
        module,
        config,
        next_handle: 0,
        statics: HashMap::new(),
        paths_started: 1,
        budget_noted: false,
        diagnostics: Vec::new(),
    };

    let mut path = PathState::new();
    let args = engine.entry_args(&mut path, func);
    let mut stack = CallStack::new();
    let outcomes = engine.exec_function(func, args, &mut stack, path);

    let mut diagnostics = engine.diagnostics;
    sort_and_dedup(&mut diagnostics);
    Ok(AnalysisRun {
        diagnostics,
        final_states: outcomes
            .into_iter()
            .map(|(p, returned)| CompletedPath {
                ledger: p.ledger,
                returned,
            })
            .collect(),
        paths_explored: engine.paths_started,
    })
}

impl<'m> Engine<'m> {
    fn fresh_qubit(&mut self, origin: QubitOrigin) -> QubitHandle {
        let id = self.next_handle;
        self.next_handle += 1;
        QubitHandle { id, origin }
    }

    fn fresh_array(&mut self, origin: ArrayOrigin, length: Option<u64>) -> ArrayHandle {
        let id = self.next_handle;
        self.next_handle += 1;
        ArrayHandle { id, origin, length }
    }

    fn emit(&mut self, path: &mut PathState, diag: Diagnostic) {
        if diag.is_error() && self.config.fail_fast {
            path.dead = true;
        }
        self.diagnostics.push(diag);
    }

    fn push_event(
        path: &mut PathState,
        id: HandleId,
        event: TraceEventKind,
        function: &str,
        span: SourceSpan,
    ) {
        path.history
            .entry(id)
            .or_default()
            .push(TraceEntry::new(event, function, span));
    }

    /// Handle history plus a closing "used here" entry.
    fn trace_for(
        path: &PathState,
        id: HandleId,
        function: &str,
        span: SourceSpan,
    ) -> Vec<TraceEntry> {
        let mut trace = path.history.get(&id).cloned().unwrap_or_default();
        trace.push(TraceEntry::new(TraceEventKind::UsedHere, function, span));
        trace
    }

    fn qubit_was_released(path: &PathState, q: QubitHandle) -> bool {
        path.history.get(&q.id).is_some_and(|events| {
            events.iter().any(|e| {
                matches!(
                    e.event,
                    TraceEventKind::Released | TraceEventKind::ReleasedViaArray
                )
            })
        })
    }

    fn array_was_released(path: &PathState, a: ArrayHandle) -> bool {
        path.history.get(&a.id).is_some_and(|events| {
            events
                .iter()
                .any(|e| matches!(e.event, TraceEventKind::ArrayReleased))
        })
    }

    fn qubit_is_live(ledger: &Ledger, q: QubitHandle) -> bool {
        ledger.checkq(q) || ledger.findqarr(q).is_some()
    }

    fn eval(&self, frame: &Frame, op: &Operand) -> AbstractValue {
        match op {
            Operand::Local(name) => frame
                .env
                .get(name)
                .copied()
                .unwrap_or(AbstractValue::Unknown),
            Operand::Global(_) => AbstractValue::Unknown,
            Operand::Const(c) => match c {
                crate::ast::Constant::Int { value, .. } => {
                    AbstractValue::Classical(Some(ClassicalValue::Int(*value)))
                }
                crate::ast::Constant::Double(v) => {
                    AbstractValue::Classical(Some(ClassicalValue::Double(*v)))
                }
                _ => AbstractValue::Classical(None),
            },
        }
    }

    /// Fresh live values for the parameters of the function under analysis:
    /// distinct live qubits, unknown-length live arrays, opaque results.
    fn entry_args(&mut self, path: &mut PathState, func: &'m Function) -> Vec<AbstractValue> {
        let span = func.entry_span();
        let fname = func.name.clone();
        func.params
            .iter()
            .map(|(ty, _)| {
                if ty.is_qubit_ptr() {
                    let q = self.fresh_qubit(QubitOrigin::DynamicSingle { alloc_span: span });
                    path.ledger = path
                        .ledger
                        .appqlist(q)
                        .expect("fresh entry qubit is untracked");
                    Self::push_event(path, q.id, TraceEventKind::ParamIntroduced, &fname, span);
                    AbstractValue::Qubit(q)
                } else if ty.is_array_ptr() {
                    let a = self.fresh_array(ArrayOrigin::Parameter { span }, None);
                    path.ledger = path
                        .ledger
                        .appqarrlist(a)
                        .expect("fresh entry array is untracked");
                    Self::push_event(path, a.id, TraceEventKind::ParamIntroduced, &fname, span);
                    AbstractValue::Array(a)
                } else if ty.is_result_ptr() {
                    AbstractValue::MeasureResult { span }
                } else if matches!(ty, Type::Int(_) | Type::Double) {
                    AbstractValue::Classical(None)
                } else {
                    AbstractValue::Unknown
                }
            })
            .collect()
    }

    fn exec_function(
        &mut self,
        func: &'m Function,
        args: Vec<AbstractValue>,
        stack: &mut CallStack,
        path: PathState,
    ) -> Vec<Outcome> {
        let Some(entry) = func.blocks.first() else {
            return vec![(path, AbstractValue::Unknown)];
        };
        let mut env = HashMap::new();
        for ((_, name), value) in func.params.iter().zip(args) {
            if let Some(name) = name {
                env.insert(name.clone(), value);
            }
        }
        let mut visits = HashMap::new();
        visits.insert(entry.label.clone(), 1);
        let frame = Frame {
            function: func.name.clone(),
            env,
            visits,
        };
        self.exec_instrs(func, frame, path, entry, 0, stack)
    }

    fn exec_instrs(
        &mut self,
        func: &'m Function,
        mut frame: Frame,
        mut path: PathState,
        block: &'m Block,
        start: usize,
        stack: &mut CallStack,
    ) -> Vec<Outcome> {
        let mut idx = start;
        while idx < block.instructions.len() {
            let inst = &block.instructions[idx];

            if let InstKind::Call {
                result,
                callee,
                args,
                ..
            } = &inst.kind
            {
                let user_defined = classify(callee).is_none()
                    && self
                        .module
                        .function(callee)
                        .is_some_and(|f| !f.is_declaration);
                if user_defined {
                    return self.exec_call_user(
                        func, frame, path, block, idx, stack, result, callee, args, inst.span,
                    );
                }
            }

            self.exec_step(&mut frame, &mut path, inst);
            if path.dead {
                return Vec::new();
            }
            idx += 1;
        }
        self.exec_terminator(func, frame, path, block, stack)
    }

    /// Inlines a call to a defined function. The callee may fork internally;
    /// the remainder of the caller's block runs once per outcome.
    #[allow(clippy::too_many_arguments)]
    fn exec_call_user(
        &mut self,
        func: &'m Function,
        mut frame: Frame,
        mut path: PathState,
        block: &'m Block,
        idx: usize,
        stack: &mut CallStack,
        result: &'m Option<String>,
        callee: &'m str,
        args: &'m [(Type, Operand)],
        span: SourceSpan,
    ) -> Vec<Outcome> {
        let recursive = frame.function == callee || stack.iter().any(|(name, _)| name == callee);
        if recursive {
            let diag = Diagnostic::new(
                DiagnosticKind::RecursionDetected,
                rules::PLUMBING,
                format!("recursive call to @{callee} is not followed; result is unknown"),
                frame.function.clone(),
                span,
                Vec::new(),
            );
            self.emit(&mut path, diag);
            if let Some(r) = result {
                frame.env.insert(r.clone(), AbstractValue::Unknown);
            }
            return self.exec_instrs(func, frame, path, block, idx + 1, stack);
        }
        if stack.len() >= self.config.max_inline_depth {
            let diag = Diagnostic::new(
                DiagnosticKind::InlineDepthExceeded,
                rules::PLUMBING,
                format!(
                    "call to @{callee} exceeds the inline depth limit of {}; result is unknown",
                    self.config.max_inline_depth
                ),
                frame.function.clone(),
                span,
                Vec::new(),
            );
            self.emit(&mut path, diag);
            if let Some(r) = result {
                frame.env.insert(r.clone(), AbstractValue::Unknown);
            }
            return self.exec_instrs(func, frame, path, block, idx + 1, stack);
        }

        let arg_values: Vec<AbstractValue> =
            args.iter().map(|(_, op)| self.eval(&frame, op)).collect();
        let callee_func = self
            .module
            .function(callee)
            .expect("checked: callee is defined");

        stack.push((callee.to_string(), span));
        let outcomes = self.exec_function(callee_func, arg_values, stack, path);
        stack.pop();

        let mut results = Vec::new();
        for (out_path, returned) in outcomes {
            let mut cont_frame = frame.clone();
            if let Some(r) = result {
                cont_frame.env.insert(r.clone(), returned);
            }
            results.extend(self.exec_instrs(func, cont_frame, out_path, block, idx + 1, stack));
        }
        results
    }

    // ---- single-instruction transfer functions -----------------------------

    fn exec_step(&mut self, frame: &mut Frame, path: &mut PathState, inst: &Instruction) {
        let span = inst.span;
        match &inst.kind {
            InstKind::Call {
                result,
                callee,
                args,
                ..
            } => {
                self.exec_runtime_call(frame, path, result.as_deref(), callee, args, span);
            }
            InstKind::Bitcast {
                result,
                value,
                to_type,
                from_type,
            } => {
                let v = self.eval(frame, value);
                let out = match v {
                    AbstractValue::ElemPtr { array, index } if to_type.is_qubit_ptr_ptr() => {
                        AbstractValue::QubitSlot { array, index }
                    }
                    _ if to_type == from_type => v,
                    AbstractValue::Qubit(_) if to_type.is_qubit_ptr() => v,
                    AbstractValue::Array(_) if to_type.is_array_ptr() => v,
                    _ => AbstractValue::Unknown,
                };
                frame.env.insert(result.clone(), out);
            }
            InstKind::IntToPtr {
                result,
                value,
                to_type,
                ..
            } => {
                let out = if to_type.is_qubit_ptr() {
                    self.exec_inttoptr_qubit(frame, path, value, span)
                } else {
                    AbstractValue::Unknown
                };
                frame.env.insert(result.clone(), out);
            }
            InstKind::Store { value, dest, .. } => {
                self.exec_store(frame, path, value, dest, span);
            }
            InstKind::Load { result, src, .. } => {
                let out = self.exec_load(frame, path, src, span);
                frame.env.insert(result.clone(), out);
            }
            InstKind::GetElementPtr { result, .. } => {
                // Classical address arithmetic; no quantum meaning.
                frame.env.insert(result.clone(), AbstractValue::Unknown);
            }
            InstKind::ICmp {
                result,
                predicate,
                lhs,
                rhs,
                ..
            } => {
                let l = self.eval(frame, lhs).known_int();
                let r = self.eval(frame, rhs).known_int();
                let out = match (l, r) {
                    (Some(a), Some(b)) => {
                        let truth = match predicate {
                            IcmpPredicate::Eq => a == b,
                            IcmpPredicate::Ne => a != b,
                            IcmpPredicate::Slt => a < b,
                            IcmpPredicate::Sle => a <= b,
                            IcmpPredicate::Sgt => a > b,
                            IcmpPredicate::Sge => a >= b,
                            IcmpPredicate::Ult => (a as u128) < (b as u128),
                            IcmpPredicate::Ule => (a as u128) <= (b as u128),
                            IcmpPredicate::Ugt => (a as u128) > (b as u128),
                            IcmpPredicate::Uge => (a as u128) >= (b as u128),
                        };
                        AbstractValue::Classical(Some(ClassicalValue::Int(truth as i128)))
                    }
                    _ => AbstractValue::Classical(None),
                };
                frame.env.insert(result.clone(), out);
            }
            InstKind::Alloca { result, .. } => {
                frame.env.insert(result.clone(), AbstractValue::Unknown);
            }
        }
    }

    fn exec_runtime_call(
        &mut self,
        frame: &mut Frame,
        path: &mut PathState,
        result: Option<&str>,
        callee: &str,
        args: &[(Type, Operand)],
        span: SourceSpan,
    ) {
        let Some(intrinsic) = classify(callee) else {
            // Declared-only (or undeclared) classical function: opaque.
            if let Some(r) = result {
                frame.env.insert(r.to_string(), AbstractValue::Unknown);
            }
            return;
        };
        match intrinsic {
            Intrinsic::QubitAllocate => {
                let q = self.fresh_qubit(QubitOrigin::DynamicSingle { alloc_span: span });
                path.ledger = path.ledger.appqlist(q).expect("fresh qubit is untracked");
                Self::push_event(path, q.id, TraceEventKind::Allocated, &frame.function, span);
                if let Some(r) = result {
                    frame.env.insert(r.to_string(), AbstractValue::Qubit(q));
                }
            }
            Intrinsic::QubitAllocateArray => {
                let n = args
                    .first()
                    .map(|(_, op)| self.eval(frame, op))
                    .and_then(|v| v.known_int());
                let out = self.exec_allocate_array(frame, path, n, span);
                if let Some(r) = result {
                    frame.env.insert(r.to_string(), out);
                }
            }
            Intrinsic::QubitRelease => {
                let arg = args.first().map(|(_, op)| self.eval(frame, op));
                self.exec_qubit_release(frame, path, arg, span);
            }
            Intrinsic::QubitReleaseArray => {
                let arg = args.first().map(|(_, op)| self.eval(frame, op));
                self.exec_qubit_release_array(frame, path, arg, span);
            }
            Intrinsic::ArrayCreate1d => {
                let n = args
                    .get(1)
                    .map(|(_, op)| self.eval(frame, op))
                    .and_then(|v| v.known_int());
                let length = match n {
                    Some(v) if v >= 0 && (v as u64) <= MAX_TRACKED_ARRAY_LEN => Some(v as u64),
                    _ => {
                        let diag = Diagnostic::new(
                            DiagnosticKind::UnknownArrayLength,
                            rules::PLUMBING,
                            "array length is not a tractable constant; index checks are disabled",
                            frame.function.clone(),
                            span,
                            Vec::new(),
                        );
                        self.emit(path, diag);
                        None
                    }
                };
                let a = self.fresh_array(ArrayOrigin::Created { span }, length);
                path.ledger = path
                    .ledger
                    .appqarrlist(a)
                    .expect("fresh array is untracked");
                Self::push_event(
                    path,
                    a.id,
                    TraceEventKind::ArrayCreated,
                    &frame.function,
                    span,
                );
                if let Some(r) = result {
                    frame.env.insert(r.to_string(), AbstractValue::Array(a));
                }
            }
            Intrinsic::ArrayGetElementPtr1d => {
                let array_v = args.first().map(|(_, op)| self.eval(frame, op));
                let index = args
                    .get(1)
                    .map(|(_, op)| self.eval(frame, op))
                    .and_then(|v| v.known_int())
                    .and_then(|v| if v >= 0 { Some(v as u64) } else { None });
                let out = match array_v {
                    Some(AbstractValue::Array(array)) => AbstractValue::ElemPtr { array, index },
                    Some(AbstractValue::Unknown) | None => AbstractValue::Unknown,
                    Some(_) => {
                        let diag = Diagnostic::new(
                            DiagnosticKind::TypeMismatch,
                            rules::PLUMBING,
                            "element pointer of a value that is not an array",
                            frame.function.clone(),
                            span,
                            Vec::new(),
                        );
                        self.emit(path, diag);
                        AbstractValue::Unknown
                    }
                };
                if let Some(r) = result {
                    frame.env.insert(r.to_string(), out);
                }
            }
            Intrinsic::CountUpdate => {
                // Reference and alias counts are outside the model.
            }
            Intrinsic::OtherRuntime => {
                if let Some(r) = result {
                    frame.env.insert(r.to_string(), AbstractValue::Unknown);
                }
            }
            Intrinsic::Measure => {
                let out = self.exec_measure(frame, path, args, span);
                if let Some(r) = result {
                    frame.env.insert(r.to_string(), out);
                }
            }
            Intrinsic::GateBody(gate) => {
                let known = self.config.gates.recognizes_single(gate);
                if !known {
                    self.note_unknown_gate(frame, path, callee, args, span);
                }
                if known || Self::has_qubit_arg(args) {
                    self.exec_gate_single(frame, path, args, span);
                }
                if let Some(r) = result {
                    frame.env.insert(r.to_string(), AbstractValue::Unknown);
                }
            }
            Intrinsic::GateCtl(gate) => {
                let known = self.config.gates.recognizes_controlled(gate);
                if !known {
                    self.note_unknown_gate(frame, path, callee, args, span);
                }
                self.exec_gate_ctl(frame, path, args, span);
                if let Some(r) = result {
                    frame.env.insert(r.to_string(), AbstractValue::Unknown);
                }
            }
            Intrinsic::GateOpaqueFunctor => {
                // Functors outside __body/__ctl: liveness of each qubit
                // argument is still checked.
                self.check_qubit_args_live(frame, path, args, span);
                if let Some(r) = result {
                    frame.env.insert(r.to_string(), AbstractValue::Unknown);
                }
            }
        }
    }

    fn has_qubit_arg(args: &[(Type, Operand)]) -> bool {
        args.iter().any(|(ty, _)| ty.is_qubit_ptr())
    }

    fn note_unknown_gate(
        &mut self,
        frame: &Frame,
        path: &mut PathState,
        callee: &str,
        args: &[(Type, Operand)],
        span: SourceSpan,
    ) {
        if Self::has_qubit_arg(args) {
            let diag = Diagnostic::new(
                DiagnosticKind::UnknownGate,
                rules::PLUMBING,
                format!("@{callee} is not in the recognized gate table; qubit arguments were checked conservatively"),
                frame.function.clone(),
                span,
                Vec::new(),
            );
            self.emit(path, diag);
        }
    }

    /// QARR_ALLOC: fresh array, row seeded with fresh members so later loads
    /// have stable identities and bounds.
    fn exec_allocate_array(
        &mut self,
        frame: &Frame,
        path: &mut PathState,
        n: Option<i128>,
        span: SourceSpan,
    ) -> AbstractValue {
        let length = match n {
            Some(v) if v >= 0 && (v as u64) <= MAX_TRACKED_ARRAY_LEN => Some(v as u64),
            _ => {
                let diag = Diagnostic::new(
                    DiagnosticKind::UnknownArrayLength,
                    rules::PLUMBING,
                    "array length is not a tractable constant; index checks are disabled",
                    frame.function.clone(),
                    span,
                    Vec::new(),
                );
                self.emit(path, diag);
                None
            }
        };
        let a = self.fresh_array(ArrayOrigin::Allocated { span }, length);
        path.ledger = path
            .ledger
            .appqarrlist(a)
            .expect("fresh array is untracked");
        Self::push_event(
            path,
            a.id,
            TraceEventKind::ArrayAllocated,
            &frame.function,
            span,
        );
        if let Some(len) = length {
            for index in 0..len {
                let member =
                    self.fresh_qubit(QubitOrigin::DynamicArrayMember { array: a.id, index });
                path.ledger = path
                    .ledger
                    .appqarr(a, member)
                    .and_then(|l| l.set_slot(a, index, SlotState::Occupied(member)))
                    .expect("fresh member in live row");
                Self::push_event(
                    path,
                    member.id,
                    TraceEventKind::Allocated,
                    &frame.function,
                    span,
                );
            }
        }
        AbstractValue::Array(a)
    }

    /// Q_DEALLOC. Check order: array membership, then liveness, then the
    /// static-qubit restriction; a release that fails any check is skipped.
    fn exec_qubit_release(
        &mut self,
        frame: &Frame,
        path: &mut PathState,
        arg: Option<AbstractValue>,
        span: SourceSpan,
    ) {
        match arg {
            Some(AbstractValue::Qubit(q)) => {
                if path.ledger.findqarr(q).is_some() {
                    let trace = Self::trace_for(path, q.id, &frame.function, span);
                    let diag = Diagnostic::new(
                        DiagnosticKind::ReleaseQubitInArray,
                        rules::Q_DEALLOC,
                        "releasing a single qubit that belongs to a qubit array; the later array release would fault",
                        frame.function.clone(),
                        span,
                        trace,
                    );
                    self.emit(path, diag);
                    return;
                }
                if !path.ledger.checkq(q) {
                    let kind = if q.is_static() {
                        DiagnosticKind::ReleaseStaticQubit
                    } else if Self::qubit_was_released(path, q) {
                        DiagnosticKind::DoubleReleaseQubit
                    } else {
                        DiagnosticKind::UseAfterReleaseQubit
                    };
                    let message = match kind {
                        DiagnosticKind::ReleaseStaticQubit => {
                            "attempt to release a static qubit; hardware registers are not runtime-managed"
                        }
                        DiagnosticKind::DoubleReleaseQubit => "qubit released twice on this path",
                        _ => "release of a qubit that is not live",
                    };
                    let trace = Self::trace_for(path, q.id, &frame.function, span);
                    let diag = Diagnostic::new(
                        kind,
                        rules::Q_DEALLOC,
                        message,
                        frame.function.clone(),
                        span,
                        trace,
                    );
                    self.emit(path, diag);
                    return;
                }
                if q.is_static() {
                    let trace = Self::trace_for(path, q.id, &frame.function, span);
                    let diag = Diagnostic::new(
                        DiagnosticKind::ReleaseStaticQubit,
                        rules::Q_DEALLOC,
                        "attempt to release a static qubit; hardware registers are not runtime-managed",
                        frame.function.clone(),
                        span,
                        trace,
                    );
                    self.emit(path, diag);
                    return;
                }
                path.ledger = path.ledger.delq(q).expect("liveness checked");
                Self::push_event(path, q.id, TraceEventKind::Released, &frame.function, span);
            }
            Some(AbstractValue::Unknown) | None => {
                // Unresolved operand: nothing provable, nothing reported.
            }
            Some(_) => {
                let diag = Diagnostic::new(
                    DiagnosticKind::TypeMismatch,
                    rules::PLUMBING,
                    "qubit_release applied to a value that is not a qubit",
                    frame.function.clone(),
                    span,
                    Vec::new(),
                );
                self.emit(path, diag);
            }
        }
    }

    /// QARR_DEALLOC. Removing a row kills its members: anything only
    /// reachable through the released array is unusable afterwards.
    fn exec_qubit_release_array(
        &mut self,
        frame: &Frame,
        path: &mut PathState,
        arg: Option<AbstractValue>,
        span: SourceSpan,
    ) {
        match arg {
            Some(AbstractValue::Array(a)) => {
                if !path.ledger.checkqarrlist(a) {
                    let kind = if Self::array_was_released(path, a) {
                        DiagnosticKind::DoubleReleaseArray
                    } else {
                        DiagnosticKind::UseAfterReleaseArray
                    };
                    let message = match kind {
                        DiagnosticKind::DoubleReleaseArray => {
                            "qubit array released twice on this path"
                        }
                        _ => "release of a qubit array that is not live",
                    };
                    let trace = Self::trace_for(path, a.id, &frame.function, span);
                    let diag = Diagnostic::new(
                        kind,
                        rules::QARR_DEALLOC,
                        message,
                        frame.function.clone(),
                        span,
                        trace,
                    );
                    self.emit(path, diag);
                    return;
                }
                let (next, killed) = path.ledger.delqarr(a).expect("liveness checked");
                path.ledger = next;
                Self::push_event(
                    path,
                    a.id,
                    TraceEventKind::ArrayReleased,
                    &frame.function,
                    span,
                );
                for member in killed {
                    Self::push_event(
                        path,
                        member.id,
                        TraceEventKind::ReleasedViaArray,
                        &frame.function,
                        span,
                    );
                }
            }
            Some(AbstractValue::Unknown) | None => {}
            Some(_) => {
                let diag = Diagnostic::new(
                    DiagnosticKind::TypeMismatch,
                    rules::PLUMBING,
                    "qubit_release_array applied to a value that is not an array",
                    frame.function.clone(),
                    span,
                    Vec::new(),
                );
                self.emit(path, diag);
            }
        }
    }

    /// Static creation: `inttoptr iN <addr> to %Qubit*`. Equal addresses
    /// are the same handle for the whole run.
    fn exec_inttoptr_qubit(
        &mut self,
        frame: &Frame,
        path: &mut PathState,
        value: &Operand,
        span: SourceSpan,
    ) -> AbstractValue {
        let address = self.eval(frame, value).known_int();
        let q = match address {
            Some(addr) if addr >= 0 => {
                if let Some(q) = self.statics.get(&(addr as u64)) {
                    *q
                } else {
                    let q = self.fresh_qubit(QubitOrigin::Static {
                        address: addr as u64,
                        span,
                    });
                    self.statics.insert(addr as u64, q);
                    q
                }
            }
            _ => {
                let diag = Diagnostic::new(
                    DiagnosticKind::StaticUnknownAddress,
                    rules::PLUMBING,
                    "static qubit address is not a known constant; treating it as a distinct device",
                    frame.function.clone(),
                    span,
                    Vec::new(),
                );
                self.emit(path, diag);
                // Synthetic address keeps the handle unique without a second
                // origin variant.
                let fake = u64::MAX - u64::from(self.next_handle);
                let q = self.fresh_qubit(QubitOrigin::Static {
                    address: fake,
                    span,
                });
                self.statics.insert(fake, q);
                q
            }
        };
        if !Self::qubit_is_live(&path.ledger, q) {
            path.ledger = path.ledger.appqlist(q).expect("checked not live");
            if !path.history.contains_key(&q.id) {
                Self::push_event(
                    path,
                    q.id,
                    TraceEventKind::StaticIntroduced,
                    &frame.function,
                    span,
                );
            }
        }
        AbstractValue::Qubit(q)
    }

    fn exec_store(
        &mut self,
        frame: &mut Frame,
        path: &mut PathState,
        value: &Operand,
        dest: &Operand,
        span: SourceSpan,
    ) {
        let dest_v = self.eval(frame, dest);
        let AbstractValue::QubitSlot { array, index } = dest_v else {
            // Classical store (pauli bases, integers, spills): no effect.
            return;
        };
        match self.eval(frame, value) {
            AbstractValue::Qubit(q) => {
                self.exec_store_qubit(frame, path, array, index, q, span);
            }
            AbstractValue::Unknown => {
                let diag = Diagnostic::new(
                    DiagnosticKind::StoreUnknownQubit,
                    rules::PLUMBING,
                    "stored a qubit the analysis cannot identify; the slot is now unknown",
                    frame.function.clone(),
                    span,
                    Vec::new(),
                );
                self.emit(path, diag);
                if path.ledger.checkqarrlist(array) {
                    if let Some(i) = index {
                        path.ledger = path
                            .ledger
                            .set_slot(array, i, SlotState::Unknown)
                            .expect("row is live");
                    }
                }
            }
            _ => {
                let diag = Diagnostic::new(
                    DiagnosticKind::TypeMismatch,
                    rules::PLUMBING,
                    "stored a non-qubit value through a qubit slot",
                    frame.function.clone(),
                    span,
                    Vec::new(),
                );
                self.emit(path, diag);
            }
        }
    }

    /// QARR_CREATE's store step. Premises in order: the stored qubit must be
    /// live, the array must be live, the index in bounds, and the qubit must
    /// not already be in the row (the cloning check). A failed premise
    /// suppresses the store.
    fn exec_store_qubit(
        &mut self,
        frame: &Frame,
        path: &mut PathState,
        array: ArrayHandle,
        index: Option<u64>,
        q: QubitHandle,
        span: SourceSpan,
    ) {
        if !Self::qubit_is_live(&path.ledger, q) {
            let trace = Self::trace_for(path, q.id, &frame.function, span);
            let diag = Diagnostic::new(
                DiagnosticKind::UseAfterReleaseQubit,
                rules::QARR_CREATE,
                "stored a qubit that is not live",
                frame.function.clone(),
                span,
                trace,
            );
            self.emit(path, diag);
            return;
        }
        if !path.ledger.checkqarrlist(array) {
            let trace = Self::trace_for(path, array.id, &frame.function, span);
            let diag = Diagnostic::new(
                DiagnosticKind::UseAfterReleaseArray,
                rules::QARR_CREATE,
                "stored into a qubit array that is not live",
                frame.function.clone(),
                span,
                trace,
            );
            self.emit(path, diag);
            return;
        }
        if let (Some(i), Some(len)) = (index, array.length) {
            if i >= len {
                let trace = Self::trace_for(path, array.id, &frame.function, span);
                let diag = Diagnostic::new(
                    DiagnosticKind::IndexOutOfBounds,
                    rules::QARR_CREATE,
                    format!("store index {i} is out of bounds for an array of length {len}"),
                    frame.function.clone(),
                    span,
                    trace,
                );
                self.emit(path, diag);
                return;
            }
        }
        if path.ledger.checkqarr(array, q) {
            let trace = Self::trace_for(path, q.id, &frame.function, span);
            let diag = Diagnostic::new(
                DiagnosticKind::CloneInArrayStore,
                rules::QARR_CREATE,
                "the same qubit already occupies this array; storing it again would clone it",
                frame.function.clone(),
                span,
                trace,
            );
            self.emit(path, diag);
            return;
        }
        path.ledger = path.ledger.appqarr(array, q).expect("row is live");
        if let Some(i) = index {
            path.ledger = path
                .ledger
                .set_slot(array, i, SlotState::Occupied(q))
                .expect("row is live");
        }
        Self::push_event(
            path,
            q.id,
            TraceEventKind::StoredIntoArray,
            &frame.function,
            span,
        );
        if path.ledger.membership_count(q) > 1 {
            let trace = Self::trace_for(path, q.id, &frame.function, span);
            let diag = Diagnostic::new(
                DiagnosticKind::MultiArrayMembershipNote,
                rules::PLUMBING,
                "this qubit is now a member of more than one array",
                frame.function.clone(),
                span,
                trace,
            );
            self.emit(path, diag);
        }
    }

    /// Q_LOAD through a `%Qubit**` slot. A fresh member is minted for an
    /// in-bounds slot nothing was stored to, so reloading the same index
    /// always yields the same handle.
    fn exec_load(
        &mut self,
        frame: &mut Frame,
        path: &mut PathState,
        src: &Operand,
        span: SourceSpan,
    ) -> AbstractValue {
        let src_v = self.eval(frame, src);
        let AbstractValue::QubitSlot { array, index } = src_v else {
            return match src_v {
                // Loads through anything that is not a qubit slot are
                // classical and have no quantum effect.
                AbstractValue::Unknown => AbstractValue::Unknown,
                _ => AbstractValue::Classical(None),
            };
        };
        if !path.ledger.checkqarrlist(array) {
            let trace = Self::trace_for(path, array.id, &frame.function, span);
            let diag = Diagnostic::new(
                DiagnosticKind::LoadFromReleasedArray,
                rules::Q_LOAD,
                "loaded a qubit from an array that is not live",
                frame.function.clone(),
                span,
                trace,
            );
            self.emit(path, diag);
            return AbstractValue::Unknown;
        }
        let Some(i) = index else {
            let diag = Diagnostic::new(
                DiagnosticKind::UnknownIndex,
                rules::PLUMBING,
                "load index is not a known constant; the loaded qubit is unknown",
                frame.function.clone(),
                span,
                Vec::new(),
            );
            self.emit(path, diag);
            return AbstractValue::Unknown;
        };
        if let Some(len) = array.length {
            if i >= len {
                let trace = Self::trace_for(path, array.id, &frame.function, span);
                let diag = Diagnostic::new(
                    DiagnosticKind::IndexOutOfBounds,
                    rules::Q_LOAD,
                    format!("load index {i} is out of bounds for an array of length {len}"),
                    frame.function.clone(),
                    span,
                    trace,
                );
                self.emit(path, diag);
                return AbstractValue::Unknown;
            }
        }
        let slot = path.ledger.row(array).and_then(|row| row.slot(i));
        match slot {
            Some(SlotState::Occupied(member)) => {
                path.ledger = path.ledger.appqarr(array, member).expect("row is live");
                Self::push_event(
                    path,
                    member.id,
                    TraceEventKind::LoadedFromArray,
                    &frame.function,
                    span,
                );
                AbstractValue::Qubit(member)
            }
            Some(SlotState::Unknown) => AbstractValue::Unknown,
            None => {
                let member = self.fresh_qubit(QubitOrigin::DynamicArrayMember {
                    array: array.id,
                    index: i,
                });
                path.ledger = path
                    .ledger
                    .appqarr(array, member)
                    .and_then(|l| l.set_slot(array, i, SlotState::Occupied(member)))
                    .expect("row is live");
                Self::push_event(
                    path,
                    member.id,
                    TraceEventKind::LoadedFromArray,
                    &frame.function,
                    span,
                );
                AbstractValue::Qubit(member)
            }
        }
    }

    /// SG_OP: the target must be live (in Q or in some row); the ledger is
    /// never changed by a gate.
    fn exec_gate_single(
        &mut self,
        frame: &Frame,
        path: &mut PathState,
        args: &[(Type, Operand)],
        span: SourceSpan,
    ) {
        let target = args
            .iter()
            .rfind(|(ty, _)| ty.is_qubit_ptr())
            .map(|(_, op)| self.eval(frame, op));
        match target {
            Some(AbstractValue::Qubit(q)) => {
                if !Self::qubit_is_live(&path.ledger, q) {
                    let trace = Self::trace_for(path, q.id, &frame.function, span);
                    let diag = Diagnostic::new(
                        DiagnosticKind::UseAfterReleaseQubit,
                        rules::SG_OP,
                        "gate applied to a qubit that is not live",
                        frame.function.clone(),
                        span,
                        trace,
                    );
                    self.emit(path, diag);
                }
            }
            Some(AbstractValue::Unknown) => {}
            None => {
                let diag = Diagnostic::new(
                    DiagnosticKind::TypeMismatch,
                    rules::PLUMBING,
                    "single-qubit gate without a qubit argument",
                    frame.function.clone(),
                    span,
                    Vec::new(),
                );
                self.emit(path, diag);
            }
            Some(_) => {
                let diag = Diagnostic::new(
                    DiagnosticKind::TypeMismatch,
                    rules::PLUMBING,
                    "gate target is not a qubit",
                    frame.function.clone(),
                    span,
                    Vec::new(),
                );
                self.emit(path, diag);
            }
        }
    }

    /// CG_OP: the target must be live, the control array must be live, and
    /// the target must not be one of the controls. Each failed premise is
    /// reported independently.
    fn exec_gate_ctl(
        &mut self,
        frame: &Frame,
        path: &mut PathState,
        args: &[(Type, Operand)],
        span: SourceSpan,
    ) {
        let controls = args
            .iter()
            .find(|(ty, _)| ty.is_array_ptr())
            .map(|(_, op)| self.eval(frame, op));
        let target = args
            .iter()
            .rfind(|(ty, _)| ty.is_qubit_ptr())
            .map(|(_, op)| self.eval(frame, op));

        let target_q = match target {
            Some(AbstractValue::Qubit(q)) => {
                if !Self::qubit_is_live(&path.ledger, q) {
                    let trace = Self::trace_for(path, q.id, &frame.function, span);
                    let diag = Diagnostic::new(
                        DiagnosticKind::UseAfterReleaseQubit,
                        rules::CG_OP,
                        "controlled gate target is not live",
                        frame.function.clone(),
                        span,
                        trace,
                    );
                    self.emit(path, diag);
                }
                Some(q)
            }
            Some(AbstractValue::Unknown) => None,
            None => {
                let diag = Diagnostic::new(
                    DiagnosticKind::TypeMismatch,
                    rules::PLUMBING,
                    "controlled gate without a target qubit argument",
                    frame.function.clone(),
                    span,
                    Vec::new(),
                );
                self.emit(path, diag);
                None
            }
            Some(_) => {
                let diag = Diagnostic::new(
                    DiagnosticKind::TypeMismatch,
                    rules::PLUMBING,
                    "controlled gate target is not a qubit",
                    frame.function.clone(),
                    span,
                    Vec::new(),
                );
                self.emit(path, diag);
                None
            }
        };

        let control_array = match controls {
            Some(AbstractValue::Array(a)) => {
                if !path.ledger.checkqarrlist(a) {
                    let trace = Self::trace_for(path, a.id, &frame.function, span);
                    let diag = Diagnostic::new(
                        DiagnosticKind::UseAfterReleaseArray,
                        rules::CG_OP,
                        "control qubit array is not live",
                        frame.function.clone(),
                        span,
                        trace,
                    );
                    self.emit(path, diag);
                    None
                } else {
                    Some(a)
                }
            }
            Some(AbstractValue::Unknown) => None,
            None => {
                let diag = Diagnostic::new(
                    DiagnosticKind::TypeMismatch,
                    rules::PLUMBING,
                    "controlled gate without a control array argument",
                    frame.function.clone(),
                    span,
                    Vec::new(),
                );
                self.emit(path, diag);
                None
            }
            Some(_) => {
                let diag = Diagnostic::new(
                    DiagnosticKind::TypeMismatch,
                    rules::PLUMBING,
                    "controlled gate controls are not an array",
                    frame.function.clone(),
                    span,
                    Vec::new(),
                );
                self.emit(path, diag);
                None
            }
        };

        if let (Some(q), Some(a)) = (target_q, control_array) {
            if path.ledger.checkqarr(a, q) {
                let trace = Self::trace_for(path, q.id, &frame.function, span);
                let diag = Diagnostic::new(
                    DiagnosticKind::CloneControlTarget,
                    rules::CG_OP,
                    "the target qubit is one of the control qubits; the gate would clone it",
                    frame.function.clone(),
                    span,
                    trace,
                );
                self.emit(path, diag);
            }
        }
    }

    /// Opaque functor call: per-qubit-argument liveness only.
    fn check_qubit_args_live(
        &mut self,
        frame: &Frame,
        path: &mut PathState,
        args: &[(Type, Operand)],
        span: SourceSpan,
    ) {
        let qubit_values: Vec<AbstractValue> = args
            .iter()
            .filter(|(ty, _)| ty.is_qubit_ptr())
            .map(|(_, op)| self.eval(frame, op))
            .collect();
        for value in qubit_values {
            if let AbstractValue::Qubit(q) = value {
                if !Self::qubit_is_live(&path.ledger, q) {
                    let trace = Self::trace_for(path, q.id, &frame.function, span);
                    let diag = Diagnostic::new(
                        DiagnosticKind::UseAfterReleaseQubit,
                        rules::SG_OP,
                        "gate applied to a qubit that is not live",
                        frame.function.clone(),
                        span,
                        trace,
                    );
                    self.emit(path, diag);
                }
            }
        }
    }

    /// MEASURE: only the qubit array's liveness matters; pauli bases are
    /// not interpreted. Measurement does not release anything.
    fn exec_measure(
        &mut self,
        frame: &Frame,
        path: &mut PathState,
        args: &[(Type, Operand)],
        span: SourceSpan,
    ) -> AbstractValue {
        let mut array_args = args.iter().filter(|(ty, _)| ty.is_array_ptr());
        let _bases = array_args.next().map(|(_, op)| self.eval(frame, op));
        let qubits = array_args.next().map(|(_, op)| self.eval(frame, op));
        match qubits {
            Some(AbstractValue::Array(a)) => {
                if !path.ledger.checkqarrlist(a) {
                    let trace = Self::trace_for(path, a.id, &frame.function, span);
                    let diag = Diagnostic::new(
                        DiagnosticKind::MeasureReleasedArray,
                        rules::MEASURE,
                        "measured a qubit array that is not live",
                        frame.function.clone(),
                        span,
                        trace,
                    );
                    self.emit(path, diag);
                    return AbstractValue::Unknown;
                }
                AbstractValue::MeasureResult { span }
            }
            Some(AbstractValue::Unknown) => AbstractValue::Unknown,
            _ => {
                let diag = Diagnostic::new(
                    DiagnosticKind::TypeMismatch,
                    rules::PLUMBING,
                    "measurement expects a pauli array and a qubit array",
                    frame.function.clone(),
                    span,
                    Vec::new(),
                );
                self.emit(path, diag);
                AbstractValue::Unknown
            }
        }
    }

    // ---- control flow -------------------------------------------------------

    fn exec_terminator(
        &mut self,
        func: &'m Function,
        frame: Frame,
        mut path: PathState,
        block: &'m Block,
        stack: &mut CallStack,
    ) -> Vec<Outcome> {
        let term = &block.terminator;
        match &term.kind {
            TermKind::Ret { value, .. } => {
                let v = self.eval(&frame, value);
                vec![(path, v)]
            }
            TermKind::RetVoid => vec![(path, AbstractValue::Unknown)],
            TermKind::Branch { label } => self.jump(func, frame, path, label, term.span, stack),
            TermKind::CondBranch {
                cond,
                then_label,
                else_label,
            } => match self.eval(&frame, cond).known_int() {
                Some(v) => {
                    let label = if v != 0 { then_label } else { else_label };
                    self.jump(func, frame, path, label, term.span, stack)
                }
                None => {
                    if self.paths_started >= self.config.max_paths {
                        if !self.budget_noted {
                            self.budget_noted = true;
                            let diag = Diagnostic::new(
                                    DiagnosticKind::Incomplete,
                                    rules::PLUMBING,
                                    format!(
                                        "path budget of {} exhausted; remaining branches follow one side only",
                                        self.config.max_paths
                                    ),
                                    frame.function.clone(),
                                    term.span,
                                    Vec::new(),
                                );
                            self.emit(&mut path, diag);
                        }
                        return self.jump(func, frame, path, then_label, term.span, stack);
                    }
                    self.paths_started += 1;
                    let else_frame = frame.clone();
                    let else_path = path.clone();
                    let mut outcomes = self.jump(func, frame, path, then_label, term.span, stack);
                    outcomes.extend(
                        self.jump(func, else_frame, else_path, else_label, term.span, stack),
                    );
                    outcomes
                }
            },
        }
    }

    fn jump(
        &mut self,
        func: &'m Function,
        mut frame: Frame,
        mut path: PathState,
        label: &str,
        branch_span: SourceSpan,
        stack: &mut CallStack,
    ) -> Vec<Outcome> {
        let visits = frame.visits.entry(label.to_string()).or_insert(0);
        *visits += 1;
        if (*visits as usize) > 1 + self.config.max_unroll {
            let diag = Diagnostic::new(
                DiagnosticKind::UnrollTruncated,
                rules::PLUMBING,
                format!(
                    "loop back to \"{label}\" exceeds the unroll bound of {}; this path is truncated",
                    self.config.max_unroll
                ),
                frame.function.clone(),
                branch_span,
                Vec::new(),
            );
            self.emit(&mut path, diag);
            return Vec::new();
        }
        let Some(block) = func.block(label) else {
            // Dangling label: validation reports it; the path just ends.
            return Vec::new();
        };
        self.exec_instrs(func, frame, path, block, 0, stack)
    }
}
