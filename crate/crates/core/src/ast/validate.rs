//! Structural well-formedness checks, run after parsing and before analysis.
//!
//! Name resolution for `%Name` types happens here rather than in the parser
//! so that forward references parse cleanly.

use super::{Function, InstKind, QirModule, SourceSpan, TermKind, Type};
use std::collections::HashSet;

/// One violated structural invariant. The list returned by
/// [`validate_module`] is empty exactly when the module is well-formed.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum StructuralError {
    #[error("{function}: branch to missing label \"{label}\"")]
    DanglingLabel {
        function: String,
        label: String,
        span: SourceSpan,
    },
    #[error("{function}: label \"{label}\" defined more than once")]
    DuplicateLabel { function: String, label: String },
    #[error("{function}: SSA name %{name} bound more than once")]
    DuplicateSsaName {
        function: String,
        name: String,
        span: SourceSpan,
    },
    #[error("{function}: opaque type {type_name} used by value ({context})")]
    OpaqueByValue {
        function: String,
        type_name: String,
        context: String,
    },
    #[error("type %{name} is not declared and is not a built-in")]
    UnresolvedNamedType { name: String },
    #[error("{function}: call to undeclared function @{callee}")]
    CallToUndeclared {
        function: String,
        callee: String,
        span: SourceSpan,
    },
    #[error("{function}: call result present for void callee @{callee}")]
    ResultOnVoidCall {
        function: String,
        callee: String,
        span: SourceSpan,
    },
    #[error("{function}: non-void call to @{callee} must bind a result")]
    MissingCallResult {
        function: String,
        callee: String,
        span: SourceSpan,
    },
    #[error("{function}: phi nodes are not supported")]
    PhiUnsupported { function: String, span: SourceSpan },
    #[error("{function}: integer type must have width >= 1")]
    ZeroWidthInt { function: String },
    #[error("{function}: definition parameter {index} has no name")]
    UnnamedParamInDefinition { function: String, index: usize },
    #[error("declaration @{function} must not have a body")]
    DeclarationWithBody { function: String },
    #[error("definition @{function} must have at least one block")]
    DefinitionWithoutBlocks { function: String },
}

/// Checks every structural invariant and returns all violations found.
pub fn validate_module(module: &QirModule) -> Vec<StructuralError> {
    let mut errors = Vec::new();
    for func in module.functions.values() {
        validate_function(module, func, &mut errors);
    }
    errors
}

fn validate_function(module: &QirModule, func: &Function, errors: &mut Vec<StructuralError>) {
    if func.is_declaration && !func.blocks.is_empty() {
        errors.push(StructuralError::DeclarationWithBody {
            function: func.name.clone(),
        });
    }
    if !func.is_declaration && func.blocks.is_empty() {
        errors.push(StructuralError::DefinitionWithoutBlocks {
            function: func.name.clone(),
        });
    }

    check_type(module, func, &func.ret_type, "return type", errors);
    for (i, (ty, name)) in func.params.iter().enumerate() {
        check_type(module, func, ty, &format!("parameter {i}"), errors);
        if !func.is_declaration && name.is_none() {
            errors.push(StructuralError::UnnamedParamInDefinition {
                function: func.name.clone(),
                index: i,
            });
        }
    }

    let mut labels = HashSet::new();
    for block in &func.blocks {
        if !labels.insert(block.label.as_str()) {
            errors.push(StructuralError::DuplicateLabel {
                function: func.name.clone(),
                label: block.label.clone(),
            });
        }
    }

    let mut ssa_names: HashSet<&str> = func
        .params
        .iter()
        .filter_map(|(_, n)| n.as_deref())
        .collect();

    for block in &func.blocks {
        for phi in &block.phis {
            errors.push(StructuralError::PhiUnsupported {
                function: func.name.clone(),
                span: phi.span,
            });
            if !ssa_names.insert(&phi.result) {
                errors.push(StructuralError::DuplicateSsaName {
                    function: func.name.clone(),
                    name: phi.result.clone(),
                    span: phi.span,
                });
            }
        }
        for inst in &block.instructions {
            if let Some(result) = inst.kind.result() {
                if !ssa_names.insert(result) {
                    errors.push(StructuralError::DuplicateSsaName {
                        function: func.name.clone(),
                        name: result.to_string(),
                        span: inst.span,
                    });
                }
            }
            validate_instruction(module, func, inst, errors);
        }
        match &block.terminator.kind {
            TermKind::Ret { ty, .. } => {
                check_type(module, func, ty, "ret", errors);
            }
            TermKind::RetVoid => {}
            TermKind::CondBranch {
                then_label,
                else_label,
                ..
            } => {
                for label in [then_label, else_label] {
                    if !labels.contains(label.as_str()) {
                        errors.push(StructuralError::DanglingLabel {
                            function: func.name.clone(),
                            label: label.clone(),
                            span: block.terminator.span,
                        });
                    }
                }
            }
            TermKind::Branch { label } => {
                if !labels.contains(label.as_str()) {
                    errors.push(StructuralError::DanglingLabel {
                        function: func.name.clone(),
                        label: label.clone(),
                        span: block.terminator.span,
                    });
                }
            }
        }
    }
}

fn validate_instruction(
    module: &QirModule,
    func: &Function,
    inst: &super::Instruction,
    errors: &mut Vec<StructuralError>,
) {
    match &inst.kind {
        InstKind::Call {
            result,
            ret_type,
            callee,
            args,
        } => {
            check_type(module, func, ret_type, "call return", errors);
            for (ty, _) in args {
                check_type(module, func, ty, "call argument", errors);
            }
            if !module.functions.contains_key(callee) {
                errors.push(StructuralError::CallToUndeclared {
                    function: func.name.clone(),
                    callee: callee.clone(),
                    span: inst.span,
                });
            }
            let is_void = *ret_type == Type::Void;
            if is_void && result.is_some() {
                errors.push(StructuralError::ResultOnVoidCall {
                    function: func.name.clone(),
                    callee: callee.clone(),
                    span: inst.span,
                });
            }
            if !is_void && result.is_none() {
                errors.push(StructuralError::MissingCallResult {
                    function: func.name.clone(),
                    callee: callee.clone(),
                    span: inst.span,
                });
            }
        }
        InstKind::Bitcast {
            from_type, to_type, ..
        }
        | InstKind::IntToPtr {
            from_type, to_type, ..
        } => {
            check_type(module, func, from_type, "cast source", errors);
            check_type(module, func, to_type, "cast target", errors);
        }
        InstKind::Store { value_type, .. } => {
            check_type(module, func, value_type, "store value", errors);
        }
        InstKind::Load { loaded_type, .. } => {
            check_type(module, func, loaded_type, "load value", errors);
        }
        InstKind::GetElementPtr {
            base_type, indices, ..
        } => {
            check_type(module, func, base_type, "getelementptr base", errors);
            for (ty, _) in indices {
                check_type(module, func, ty, "getelementptr index", errors);
            }
        }
        InstKind::ICmp { ty, .. } => {
            check_type(module, func, ty, "icmp operand", errors);
        }
        InstKind::Alloca { ty, count, .. } => {
            check_type(module, func, ty, "alloca element", errors);
            if let Some((cty, _)) = count {
                check_type(module, func, cty, "alloca count", errors);
            }
        }
    }
}

/// Walks a type tree checking opacity, integer widths, and that named types
/// resolve. An opaque type is legal only when its immediate parent is a
/// pointer.
fn check_type(
    module: &QirModule,
    func: &Function,
    ty: &Type,
    context: &str,
    errors: &mut Vec<StructuralError>,
) {
    check_type_inner(module, func, ty, context, false, errors);
}

fn check_type_inner(
    module: &QirModule,
    func: &Function,
    ty: &Type,
    context: &str,
    behind_pointer: bool,
    errors: &mut Vec<StructuralError>,
) {
    if ty.is_opaque() && !behind_pointer {
        errors.push(StructuralError::OpaqueByValue {
            function: func.name.clone(),
            type_name: super::print::fmt_type(ty),
            context: context.to_string(),
        });
    }
    match ty {
        Type::Int(width) => {
            if *width == 0 {
                errors.push(StructuralError::ZeroWidthInt {
                    function: func.name.clone(),
                });
            }
        }
        Type::Pointer(inner) => {
            check_type_inner(module, func, inner, context, true, errors);
        }
        Type::SizedArray(_, elem) => {
            check_type_inner(module, func, elem, context, false, errors);
        }
        Type::Function(ret, params) => {
            check_type_inner(module, func, ret, context, false, errors);
            for p in params {
                check_type_inner(module, func, p, context, false, errors);
            }
        }
        Type::Struct(fields) => {
            for f in fields {
                check_type_inner(module, func, f, context, false, errors);
            }
        }
        Type::Named(name) if !module.type_decls.contains_key(name) => {
            let err = StructuralError::UnresolvedNamedType { name: name.clone() };
            if !errors.contains(&err) {
                errors.push(err);
            }
        }
        _ => {}
    }
}
