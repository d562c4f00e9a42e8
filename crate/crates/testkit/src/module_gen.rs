//! Random well-formed modules for printer/parser round-trip checks.
//!
//! Generated modules satisfy every structural invariant the validator
//! checks (unique SSA names, resolved labels, opaque types behind pointers,
//! declared callees, result bindings matching return types); operand types
//! are deliberately arbitrary beyond that, since the grammar carries them
//! explicitly.

use qir_sentinel_core::ast::{
    Block, Constant, Function, IcmpPredicate, InstKind, Instruction, Operand, QirModule,
    SourceSpan, TermKind, Terminator, Type, TypeDecl,
};
use rand::prelude::*;

pub fn gen_module(rng: &mut StdRng) -> QirModule {
    let mut module = QirModule::new("generated.ll");

    for i in 0..rng.gen_range(0..3) {
        let decl = if rng.gen_bool(0.5) {
            TypeDecl::Opaque
        } else {
            TypeDecl::Struct((0..rng.gen_range(1..3)).map(|_| gen_type(rng, 1)).collect())
        };
        module.type_decls.insert(format!("Custom{i}"), decl);
    }
    let named: Vec<String> = module.type_decls.keys().cloned().collect();

    // Declarations first so defined bodies have callees to reference.
    let n_decls = rng.gen_range(1..4);
    for i in 0..n_decls {
        let func = Function {
            name: format!("ext{i}"),
            linkage: None,
            ret_type: gen_type_with_named(rng, 0, &named),
            params: (0..rng.gen_range(0..3))
                .map(|_| (gen_type_with_named(rng, 0, &named), None))
                .collect(),
            blocks: Vec::new(),
            is_declaration: true,
        };
        module.functions.insert(func.name.clone(), func);
    }

    let callees: Vec<(String, Type, usize)> = module
        .functions
        .values()
        .map(|f| (f.name.clone(), f.ret_type.clone(), f.params.len()))
        .collect();

    let n_defs = rng.gen_range(1..4);
    for i in 0..n_defs {
        let func = gen_function(rng, i, &named, &callees);
        module.functions.insert(func.name.clone(), func);
    }
    module
}

fn gen_function(
    rng: &mut StdRng,
    index: usize,
    named: &[String],
    callees: &[(String, Type, usize)],
) -> Function {
    let mut names = NameSupply::default();
    let params: Vec<(Type, Option<String>)> = (0..rng.gen_range(0..4))
        .map(|_| (gen_type_with_named(rng, 0, named), Some(names.fresh())))
        .collect();
    let ret_type = if rng.gen_bool(0.3) {
        Type::Void
    } else {
        gen_type_with_named(rng, 0, named)
    };

    let n_blocks = rng.gen_range(1..4);
    let labels: Vec<String> = (0..n_blocks).map(|b| format!("b{b}")).collect();
    let mut bound: Vec<String> = params.iter().filter_map(|(_, n)| n.clone()).collect();

    let blocks: Vec<Block> = labels
        .iter()
        .enumerate()
        .map(|(bi, label)| {
            let instructions = (0..rng.gen_range(0..6))
                .map(|_| gen_instruction(rng, &mut names, &mut bound, named, callees))
                .collect();
            let terminator = gen_terminator(rng, bi, &labels, &ret_type, &bound, named);
            Block {
                label: clone_label(label),
                phis: Vec::new(),
                instructions,
                terminator,
            }
        })
        .collect();

    Function {
        name: format!("gen{index}"),
        linkage: if rng.gen_bool(0.5) {
            Some("internal".to_string())
        } else {
            None
        },
        ret_type,
        params,
        blocks,
        is_declaration: false,
    }
}

fn clone_label(label: &str) -> String {
    label.to_string()
}

#[derive(Default)]
struct NameSupply {
    next: usize,
}

impl NameSupply {
    fn fresh(&mut self) -> String {
        let name = format!("v{}", self.next);
        self.next += 1;
        name
    }
}

fn gen_instruction(
    rng: &mut StdRng,
    names: &mut NameSupply,
    bound: &mut Vec<String>,
    named: &[String],
    callees: &[(String, Type, usize)],
) -> Instruction {
    let span = SourceSpan::default();
    let kind = match rng.gen_range(0u32..8) {
        0 => {
            let (callee, ret_type, n_params) = callees[rng.gen_range(0..callees.len())].clone();
            let args = (0..n_params)
                .map(|_| {
                    let ty = gen_type_with_named(rng, 0, named);
                    let op = gen_operand(rng, &ty, bound);
                    (ty, op)
                })
                .collect();
            let result = if ret_type == Type::Void {
                None
            } else {
                let r = names.fresh();
                bound.push(r.clone());
                Some(r)
            };
            InstKind::Call {
                result,
                ret_type,
                callee,
                args,
            }
        }
        1 => {
            let from_type = gen_type_with_named(rng, 0, named);
            let value = gen_operand(rng, &from_type, bound);
            let result = names.fresh();
            bound.push(result.clone());
            InstKind::Bitcast {
                result,
                from_type,
                value,
                to_type: gen_type_with_named(rng, 0, named),
            }
        }
        2 => {
            let from_type = Type::Int(rng.gen_range(1..65));
            let value = gen_operand(rng, &from_type, bound);
            let result = names.fresh();
            bound.push(result.clone());
            InstKind::IntToPtr {
                result,
                from_type,
                value,
                to_type: Type::ptr(if rng.gen_bool(0.5) {
                    Type::Qubit
                } else {
                    Type::Int(8)
                }),
            }
        }
        3 => {
            let value_type = gen_type_with_named(rng, 0, named);
            let value = gen_operand(rng, &value_type, bound);
            let dest = gen_operand(rng, &Type::ptr(value_type.clone()), bound);
            InstKind::Store {
                value_type,
                value,
                dest,
                align: gen_align(rng),
            }
        }
        4 => {
            let loaded_type = gen_type_with_named(rng, 0, named);
            let src = gen_operand(rng, &Type::ptr(loaded_type.clone()), bound);
            let result = names.fresh();
            bound.push(result.clone());
            InstKind::Load {
                result,
                loaded_type,
                src,
                align: gen_align(rng),
            }
        }
        5 => {
            let base_type = gen_type_with_named(rng, 0, named);
            let base = gen_operand(rng, &Type::ptr(base_type.clone()), bound);
            let indices = (0..rng.gen_range(1..3))
                .map(|_| {
                    let ty = Type::Int(if rng.gen_bool(0.5) { 32 } else { 64 });
                    let op = gen_operand(rng, &ty, bound);
                    (ty, op)
                })
                .collect();
            let result = names.fresh();
            bound.push(result.clone());
            InstKind::GetElementPtr {
                result,
                base_type,
                base,
                indices,
            }
        }
        6 => {
            let ty = Type::Int(64);
            let lhs = gen_operand(rng, &ty, bound);
            let rhs = gen_operand(rng, &ty, bound);
            let preds = [
                IcmpPredicate::Eq,
                IcmpPredicate::Ne,
                IcmpPredicate::Slt,
                IcmpPredicate::Sle,
                IcmpPredicate::Sgt,
                IcmpPredicate::Sge,
                IcmpPredicate::Ult,
                IcmpPredicate::Ule,
                IcmpPredicate::Ugt,
                IcmpPredicate::Uge,
            ];
            let result = names.fresh();
            bound.push(result.clone());
            InstKind::ICmp {
                result,
                predicate: preds[rng.gen_range(0..preds.len())],
                ty,
                lhs,
                rhs,
            }
        }
        _ => {
            let count = if rng.gen_bool(0.5) {
                let ty = Type::Int(64);
                let op = gen_operand(rng, &ty, bound);
                Some((ty, op))
            } else {
                None
            };
            let result = names.fresh();
            bound.push(result.clone());
            InstKind::Alloca {
                result,
                ty: gen_type_with_named(rng, 0, named),
                count,
                align: gen_align(rng),
            }
        }
    };
    Instruction { kind, span }
}

fn gen_terminator(
    rng: &mut StdRng,
    block_index: usize,
    labels: &[String],
    ret_type: &Type,
    bound: &[String],
    named: &[String],
) -> Terminator {
    let span = SourceSpan::default();
    // Forward branches only; the last block always returns.
    let can_branch = block_index + 1 < labels.len();
    let kind = if can_branch && rng.gen_bool(0.6) {
        let forward = &labels[block_index + 1..];
        if rng.gen_bool(0.5) && forward.len() >= 2 {
            let cond = gen_operand(rng, &Type::Int(1), bound);
            TermKind::CondBranch {
                cond,
                then_label: forward[rng.gen_range(0..forward.len())].clone(),
                else_label: forward[rng.gen_range(0..forward.len())].clone(),
            }
        } else {
            TermKind::Branch {
                label: forward[rng.gen_range(0..forward.len())].clone(),
            }
        }
    } else if *ret_type == Type::Void {
        TermKind::RetVoid
    } else {
        let value = gen_operand(rng, ret_type, bound);
        TermKind::Ret {
            ty: ret_type.clone(),
            value,
        }
    };
    let _ = named;
    Terminator { kind, span }
}

fn gen_align(rng: &mut StdRng) -> Option<u64> {
    if rng.gen_bool(0.5) {
        Some([1u64, 2, 4, 8][rng.gen_range(0..4)])
    } else {
        None
    }
}

fn gen_operand(rng: &mut StdRng, ty: &Type, bound: &[String]) -> Operand {
    // Prefer locals when any exist; fall back to constants of the given type.
    if !bound.is_empty() && rng.gen_bool(0.5) {
        return Operand::Local(bound[rng.gen_range(0..bound.len())].clone());
    }
    Operand::Const(gen_constant(rng, ty))
}

fn gen_constant(rng: &mut StdRng, ty: &Type) -> Constant {
    match ty {
        Type::Int(width) => Constant::Int {
            width: *width,
            value: rng.gen_range(-128i128..128),
        },
        Type::Double => {
            let candidates = [0.0, -0.0, 0.5, -2.75, 1e30, 1e-30, 42.0, -1.25e2];
            Constant::Double(candidates[rng.gen_range(0..candidates.len())])
        }
        Type::Pauli => Constant::Pauli(rng.gen_range(0..4)),
        Type::Range => Constant::Range {
            start: rng.gen_range(-4..4),
            step: rng.gen_range(1..3),
            end: rng.gen_range(0..16),
        },
        Type::Pointer(_) => Constant::Null(ty.clone()),
        Type::SizedArray(n, elem) => {
            let count = (*n).min(3);
            Constant::Aggregate((0..count).map(|_| gen_constant(rng, elem)).collect())
        }
        _ => Constant::Int {
            width: 64,
            value: rng.gen_range(0i128..8),
        },
    }
}

/// Types usable in any position (opaque ones appear behind pointers only).
fn gen_type(rng: &mut StdRng, depth: usize) -> Type {
    gen_type_with_named(rng, depth, &[])
}

fn gen_type_with_named(rng: &mut StdRng, depth: usize, named: &[String]) -> Type {
    let max = if depth >= 2 { 6 } else { 10 };
    match rng.gen_range(0u32..max) {
        0 => Type::Int([1u32, 2, 8, 32, 64][rng.gen_range(0..5)]),
        1 => Type::Double,
        2 => Type::Pauli,
        3 => Type::ptr(match rng.gen_range(0u32..5) {
            0 => Type::Qubit,
            1 => Type::Result,
            2 => Type::Array,
            3 => Type::Tuple,
            _ => Type::Int(8),
        }),
        4 => Type::Range,
        5 => {
            if named.is_empty() {
                Type::Int(32)
            } else {
                Type::Named(named[rng.gen_range(0..named.len())].clone())
            }
        }
        6 => Type::ptr(gen_type_with_named(rng, depth + 1, named)),
        7 => Type::SizedArray(
            rng.gen_range(0..4),
            Box::new(gen_type_with_named(rng, depth + 1, named)),
        ),
        8 => Type::Struct(
            (0..rng.gen_range(1..3))
                .map(|_| gen_type_with_named(rng, depth + 1, named))
                .collect(),
        ),
        _ => Type::ptr(Type::ptr(Type::Qubit)),
    }
}
