//! Typed, span-carrying program representation for the QIR subset of LLVM IR.
//!
//! The shape mirrors what the Q# compiler actually emits for quantum code:
//! opaque type declarations, `define`/`declare` products, labelled blocks,
//! and the eight command forms (call, bitcast, inttoptr, store, load,
//! getelementptr, icmp, alloca) plus `ret`/`br` terminators. Everything the
//! analyzer reports is anchored to a [`SourceSpan`] recorded here.

mod print;
mod validate;

pub use print::print_module;
pub use validate::{validate_module, StructuralError};

use indexmap::IndexMap;

/// Location of a token or instruction in the source file. Lines and columns
/// are 1-based; `col_end` is exclusive.
#[derive(
    Clone,
    Copy,
    Debug,
    Default,
    PartialEq,
    Eq,
    PartialOrd,
    Ord,
    Hash,
    serde::Serialize,
    serde::Deserialize,
)]
pub struct SourceSpan {
    pub line: u32,
    pub col_start: u32,
    pub col_end: u32,
}

impl SourceSpan {
    pub fn new(line: u32, col_start: u32, col_end: u32) -> Self {
        Self {
            line,
            col_start,
            col_end,
        }
    }
}

impl std::fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.col_start)
    }
}

/// A QIR type. `Qubit`, `Result`, `Array` and `Tuple` are opaque and may only
/// appear behind a pointer; `Pauli` and `Range` are value types.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Type {
    /// `iN` with N >= 1.
    Int(u32),
    Double,
    Pointer(Box<Type>),
    /// `[n x T]`
    SizedArray(u64, Box<Type>),
    /// `ret (params)` — only meaningful behind a pointer.
    Function(Box<Type>, Vec<Type>),
    /// `{T, ...}`
    Struct(Vec<Type>),
    /// `%Name` other than the built-in quantum types.
    Named(String),
    Pauli,
    Range,
    Result,
    Qubit,
    Array,
    Tuple,
    Void,
}

impl Type {
    pub fn ptr(inner: Type) -> Type {
        Type::Pointer(Box::new(inner))
    }

    /// The four opaque runtime types that must stay behind pointers.
    pub fn is_opaque(&self) -> bool {
        matches!(self, Type::Qubit | Type::Result | Type::Array | Type::Tuple)
    }

    pub fn is_qubit_ptr(&self) -> bool {
        matches!(self, Type::Pointer(inner) if **inner == Type::Qubit)
    }

    pub fn is_array_ptr(&self) -> bool {
        matches!(self, Type::Pointer(inner) if **inner == Type::Array)
    }

    pub fn is_result_ptr(&self) -> bool {
        matches!(self, Type::Pointer(inner) if **inner == Type::Result)
    }

    /// `%Qubit**` — the slot type produced by the element-pointer bitcast.
    pub fn is_qubit_ptr_ptr(&self) -> bool {
        matches!(self, Type::Pointer(inner) if inner.is_qubit_ptr())
    }
}

/// A literal value. Doubles compare by bit pattern so that modules containing
/// `-0.0` or non-finite values still round-trip exactly.
#[derive(Clone, Debug)]
pub enum Constant {
    Int {
        width: u32,
        value: i128,
    },
    Double(f64),
    Null(Type),
    /// `%Range {start, step, end}` — three i64s.
    Range {
        start: i64,
        step: i64,
        end: i64,
    },
    /// Two-bit Pauli code: 0=I, 1=X, 2=Z, 3=Y.
    Pauli(u8),
    Aggregate(Vec<Constant>),
    Void,
}

impl PartialEq for Constant {
    fn eq(&self, other: &Self) -> bool {
        use Constant::*;
        match (self, other) {
            (
                Int {
                    width: w1,
                    value: v1,
                },
                Int {
                    width: w2,
                    value: v2,
                },
            ) => w1 == w2 && v1 == v2,
            (Double(a), Double(b)) => a.to_bits() == b.to_bits(),
            (Null(a), Null(b)) => a == b,
            (
                Range {
                    start: a1,
                    step: b1,
                    end: c1,
                },
                Range {
                    start: a2,
                    step: b2,
                    end: c2,
                },
            ) => a1 == a2 && b1 == b2 && c1 == c2,
            (Pauli(a), Pauli(b)) => a == b,
            (Aggregate(a), Aggregate(b)) => a == b,
            (Void, Void) => true,
            _ => false,
        }
    }
}

impl Eq for Constant {}

/// A value position in an instruction: an SSA name, a global, or a literal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Operand {
    Local(String),
    Global(String),
    Const(Constant),
}

/// Integer comparison predicates accepted by `icmp`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IcmpPredicate {
    Eq,
    Ne,
    Slt,
    Sle,
    Sgt,
    Sge,
    Ult,
    Ule,
    Ugt,
    Uge,
}

impl IcmpPredicate {
    pub fn as_str(self) -> &'static str {
        match self {
            IcmpPredicate::Eq => "eq",
            IcmpPredicate::Ne => "ne",
            IcmpPredicate::Slt => "slt",
            IcmpPredicate::Sle => "sle",
            IcmpPredicate::Sgt => "sgt",
            IcmpPredicate::Sge => "sge",
            IcmpPredicate::Ult => "ult",
            IcmpPredicate::Ule => "ule",
            IcmpPredicate::Ugt => "ugt",
            IcmpPredicate::Uge => "uge",
        }
    }

    pub fn from_word(s: &str) -> Option<Self> {
        Some(match s {
            "eq" => IcmpPredicate::Eq,
            "ne" => IcmpPredicate::Ne,
            "slt" => IcmpPredicate::Slt,
            "sle" => IcmpPredicate::Sle,
            "sgt" => IcmpPredicate::Sgt,
            "sge" => IcmpPredicate::Sge,
            "ult" => IcmpPredicate::Ult,
            "ule" => IcmpPredicate::Ule,
            "ugt" => IcmpPredicate::Ugt,
            "uge" => IcmpPredicate::Uge,
            _ => return None,
        })
    }
}

/// One command. Structural equality ignores the span.
#[derive(Clone, Debug)]
pub struct Instruction {
    pub kind: InstKind,
    pub span: SourceSpan,
}

impl PartialEq for Instruction {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Eq for Instruction {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InstKind {
    Call {
        /// Absent iff `ret_type` is void.
        result: Option<String>,
        ret_type: Type,
        callee: String,
        args: Vec<(Type, Operand)>,
    },
    Bitcast {
        result: String,
        from_type: Type,
        value: Operand,
        to_type: Type,
    },
    IntToPtr {
        result: String,
        from_type: Type,
        value: Operand,
        to_type: Type,
    },
    Store {
        value_type: Type,
        value: Operand,
        dest: Operand,
        align: Option<u64>,
    },
    Load {
        result: String,
        loaded_type: Type,
        src: Operand,
        align: Option<u64>,
    },
    GetElementPtr {
        result: String,
        base_type: Type,
        base: Operand,
        indices: Vec<(Type, Operand)>,
    },
    ICmp {
        result: String,
        predicate: IcmpPredicate,
        ty: Type,
        lhs: Operand,
        rhs: Operand,
    },
    Alloca {
        result: String,
        ty: Type,
        count: Option<(Type, Operand)>,
        align: Option<u64>,
    },
}

impl InstKind {
    /// The SSA name this instruction binds, if any.
    pub fn result(&self) -> Option<&str> {
        match self {
            InstKind::Call { result, .. } => result.as_deref(),
            InstKind::Bitcast { result, .. }
            | InstKind::IntToPtr { result, .. }
            | InstKind::Load { result, .. }
            | InstKind::GetElementPtr { result, .. }
            | InstKind::ICmp { result, .. }
            | InstKind::Alloca { result, .. } => Some(result),
            InstKind::Store { .. } => None,
        }
    }
}

/// A block terminator. Structural equality ignores the span.
#[derive(Clone, Debug)]
pub struct Terminator {
    pub kind: TermKind,
    pub span: SourceSpan,
}

impl PartialEq for Terminator {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Eq for Terminator {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TermKind {
    Ret {
        ty: Type,
        value: Operand,
    },
    RetVoid,
    CondBranch {
        cond: Operand,
        then_label: String,
        else_label: String,
    },
    Branch {
        label: String,
    },
}

/// A phi node. Parsed and represented, but rejected by validation: no rule
/// gives merges a quantum meaning yet.
#[derive(Clone, Debug)]
pub struct PhiNode {
    pub result: String,
    pub ty: Type,
    pub incomings: Vec<(Operand, String)>,
    pub span: SourceSpan,
}

impl PartialEq for PhiNode {
    fn eq(&self, other: &Self) -> bool {
        self.result == other.result && self.ty == other.ty && self.incomings == other.incomings
    }
}

impl Eq for PhiNode {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub label: String,
    pub phis: Vec<PhiNode>,
    pub instructions: Vec<Instruction>,
    pub terminator: Terminator,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Function {
    pub name: String,
    /// Linkage keyword as written (`internal`, ...), reprinted verbatim.
    pub linkage: Option<String>,
    pub ret_type: Type,
    /// Parameter types with names; declarations may omit names.
    pub params: Vec<(Type, Option<String>)>,
    /// Empty iff `is_declaration`. The first block is the entry.
    pub blocks: Vec<Block>,
    pub is_declaration: bool,
}

impl Function {
    pub fn entry_block(&self) -> Option<&Block> {
        self.blocks.first()
    }

    pub fn block(&self, label: &str) -> Option<&Block> {
        self.blocks.iter().find(|b| b.label == label)
    }

    /// Span of the first instruction (or terminator) of the entry block;
    /// used to anchor events that have no textual site of their own, such as
    /// entry parameters coming to life.
    pub fn entry_span(&self) -> SourceSpan {
        match self.entry_block() {
            Some(b) => b
                .instructions
                .first()
                .map(|i| i.span)
                .unwrap_or(b.terminator.span),
            None => SourceSpan::default(),
        }
    }
}

/// Body of a `%Name = type ...` declaration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TypeDecl {
    Opaque,
    Struct(Vec<Type>),
}

/// A parsed module: type declarations and functions in source order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QirModule {
    pub source_file: String,
    pub type_decls: IndexMap<String, TypeDecl>,
    pub functions: IndexMap<String, Function>,
}

impl QirModule {
    pub fn new(source_file: impl Into<String>) -> Self {
        Self {
            source_file: source_file.into(),
            type_decls: IndexMap::new(),
            functions: IndexMap::new(),
        }
    }

    pub fn function(&self, name: &str) -> Option<&Function> {
        self.functions.get(name)
    }

    pub fn defined_functions(&self) -> impl Iterator<Item = &Function> {
        self.functions.values().filter(|f| !f.is_declaration)
    }
}
