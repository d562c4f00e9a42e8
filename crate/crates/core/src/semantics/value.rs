//! What an SSA name denotes to the analyzer.

use crate::ast::SourceSpan;
use crate::ledger::{ArrayHandle, QubitHandle};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ClassicalValue {
    Int(i128),
    Double(f64),
}

impl ClassicalValue {
    pub fn as_int(self) -> Option<i128> {
        match self {
            ClassicalValue::Int(v) => Some(v),
            ClassicalValue::Double(_) => None,
        }
    }
}

/// Abstract value of one SSA name on one execution path.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AbstractValue {
    /// A `%Qubit*` with known identity.
    Qubit(QubitHandle),
    /// An `%Array*` with known identity.
    Array(ArrayHandle),
    /// `i8*` returned by the element-pointer runtime call; `index` is `None`
    /// when the subscript was not a known constant.
    ElemPtr {
        array: ArrayHandle,
        index: Option<u64>,
    },
    /// An element pointer bitcast to `%Qubit**`: a concrete slot of a qubit
    /// array that loads and stores go through.
    QubitSlot {
        array: ArrayHandle,
        index: Option<u64>,
    },
    /// A `%Result*` produced by a measurement at the given site.
    MeasureResult { span: SourceSpan },
    /// A classical value, with the constant when it is known.
    Classical(Option<ClassicalValue>),
    /// Anything the analysis cannot resolve.
    Unknown,
}

impl AbstractValue {
    pub fn known_int(&self) -> Option<i128> {
        match self {
            AbstractValue::Classical(Some(v)) => v.as_int(),
            _ => None,
        }
    }

    pub fn as_qubit(&self) -> Option<QubitHandle> {
        match self {
            AbstractValue::Qubit(q) => Some(*q),
            _ => None,
        }
    }

    pub fn as_array(&self) -> Option<ArrayHandle> {
        match self {
            AbstractValue::Array(a) => Some(*a),
            _ => None,
        }
    }
}
