//! Textual emission of a module in the same dialect the parser accepts, so
//! that `parse(print(m))` reproduces `m` up to spans and whitespace.

use super::{
    Block, Constant, Function, InstKind, Instruction, Operand, PhiNode, QirModule, TermKind,
    Terminator, Type, TypeDecl,
};
use std::fmt::Write;

pub fn print_module(module: &QirModule) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "; ModuleID = '{}'", module.source_file);
    for (name, decl) in &module.type_decls {
        match decl {
            TypeDecl::Opaque => {
                let _ = writeln!(out, "%{name} = type opaque");
            }
            TypeDecl::Struct(fields) => {
                let body = fields.iter().map(fmt_type).collect::<Vec<_>>().join(", ");
                let _ = writeln!(out, "%{name} = type {{ {body} }}");
            }
        }
    }
    for func in module.functions.values() {
        out.push('\n');
        print_function(&mut out, func);
    }
    out
}

fn print_function(out: &mut String, func: &Function) {
    let linkage = func
        .linkage
        .as_deref()
        .map(|l| format!("{l} "))
        .unwrap_or_default();
    let params = func
        .params
        .iter()
        .map(|(ty, name)| match name {
            Some(n) => format!("{} %{n}", fmt_type(ty)),
            None => fmt_type(ty),
        })
        .collect::<Vec<_>>()
        .join(", ");
    if func.is_declaration {
        let _ = writeln!(
            out,
            "declare {linkage}{} @{}({params})",
            fmt_type(&func.ret_type),
            func.name
        );
        return;
    }
    let _ = writeln!(
        out,
        "define {linkage}{} @{}({params}) {{",
        fmt_type(&func.ret_type),
        func.name
    );
    for block in &func.blocks {
        print_block(out, block);
    }
    out.push_str("}\n");
}

fn print_block(out: &mut String, block: &Block) {
    let _ = writeln!(out, "{}:", block.label);
    for phi in &block.phis {
        print_phi(out, phi);
    }
    for inst in &block.instructions {
        print_instruction(out, inst);
    }
    print_terminator(out, &block.terminator);
}

fn print_phi(out: &mut String, phi: &PhiNode) {
    let incomings = phi
        .incomings
        .iter()
        .map(|(val, label)| format!("[ {}, %{label} ]", fmt_operand(val)))
        .collect::<Vec<_>>()
        .join(", ");
    let _ = writeln!(
        out,
        "  %{} = phi {} {incomings}",
        phi.result,
        fmt_type(&phi.ty)
    );
}

fn print_instruction(out: &mut String, inst: &Instruction) {
    match &inst.kind {
        InstKind::Call {
            result,
            ret_type,
            callee,
            args,
        } => {
            let args = args
                .iter()
                .map(|(ty, op)| format!("{} {}", fmt_type(ty), fmt_operand(op)))
                .collect::<Vec<_>>()
                .join(", ");
            match result {
                Some(r) => {
                    let _ = writeln!(
                        out,
                        "  %{r} = call {} @{callee}({args})",
                        fmt_type(ret_type)
                    );
                }
                None => {
                    let _ = writeln!(out, "  call {} @{callee}({args})", fmt_type(ret_type));
                }
            }
        }
        InstKind::Bitcast {
            result,
            from_type,
            value,
            to_type,
        } => {
            let _ = writeln!(
                out,
                "  %{result} = bitcast {} {} to {}",
                fmt_type(from_type),
                fmt_operand(value),
                fmt_type(to_type)
            );
        }
        InstKind::IntToPtr {
            result,
            from_type,
            value,
            to_type,
        } => {
            let _ = writeln!(
                out,
                "  %{result} = inttoptr {} {} to {}",
                fmt_type(from_type),
                fmt_operand(value),
                fmt_type(to_type)
            );
        }
        InstKind::Store {
            value_type,
            value,
            dest,
            align,
        } => {
            let ptr_ty = Type::ptr(value_type.clone());
            let _ = write!(
                out,
                "  store {} {}, {} {}",
                fmt_type(value_type),
                fmt_operand(value),
                fmt_type(&ptr_ty),
                fmt_operand(dest)
            );
            if let Some(a) = align {
                let _ = write!(out, ", align {a}");
            }
            out.push('\n');
        }
        InstKind::Load {
            result,
            loaded_type,
            src,
            align,
        } => {
            let ptr_ty = Type::ptr(loaded_type.clone());
            let _ = write!(
                out,
                "  %{result} = load {}, {} {}",
                fmt_type(loaded_type),
                fmt_type(&ptr_ty),
                fmt_operand(src)
            );
            if let Some(a) = align {
                let _ = write!(out, ", align {a}");
            }
            out.push('\n');
        }
        InstKind::GetElementPtr {
            result,
            base_type,
            base,
            indices,
        } => {
            let ptr_ty = Type::ptr(base_type.clone());
            let idx = indices
                .iter()
                .map(|(ty, op)| format!(", {} {}", fmt_type(ty), fmt_operand(op)))
                .collect::<String>();
            let _ = writeln!(
                out,
                "  %{result} = getelementptr {}, {} {}{idx}",
                fmt_type(base_type),
                fmt_type(&ptr_ty),
                fmt_operand(base)
            );
        }
        InstKind::ICmp {
            result,
            predicate,
            ty,
            lhs,
            rhs,
        } => {
            let _ = writeln!(
                out,
                "  %{result} = icmp {} {} {}, {}",
                predicate.as_str(),
                fmt_type(ty),
                fmt_operand(lhs),
                fmt_operand(rhs)
            );
        }
        InstKind::Alloca {
            result,
            ty,
            count,
            align,
        } => {
            let _ = write!(out, "  %{result} = alloca {}", fmt_type(ty));
            if let Some((cty, cop)) = count {
                let _ = write!(out, ", {} {}", fmt_type(cty), fmt_operand(cop));
            }
            if let Some(a) = align {
                let _ = write!(out, ", align {a}");
            }
            out.push('\n');
        }
    }
}

fn print_terminator(out: &mut String, term: &Terminator) {
    match &term.kind {
        TermKind::Ret { ty, value } => {
            let _ = writeln!(out, "  ret {} {}", fmt_type(ty), fmt_operand(value));
        }
        TermKind::RetVoid => out.push_str("  ret void\n"),
        TermKind::CondBranch {
            cond,
            then_label,
            else_label,
        } => {
            let _ = writeln!(
                out,
                "  br i1 {}, label %{then_label}, label %{else_label}",
                fmt_operand(cond)
            );
        }
        TermKind::Branch { label } => {
            let _ = writeln!(out, "  br label %{label}");
        }
    }
}

pub(crate) fn fmt_type(ty: &Type) -> String {
    match ty {
        Type::Int(width) => format!("i{width}"),
        Type::Double => "double".to_string(),
        Type::Pointer(inner) => format!("{}*", fmt_type(inner)),
        Type::SizedArray(n, elem) => format!("[{n} x {}]", fmt_type(elem)),
        Type::Function(ret, params) => {
            let params = params.iter().map(fmt_type).collect::<Vec<_>>().join(", ");
            format!("{} ({params})", fmt_type(ret))
        }
        Type::Struct(fields) => {
            let fields = fields.iter().map(fmt_type).collect::<Vec<_>>().join(", ");
            format!("{{ {fields} }}")
        }
        Type::Named(name) => format!("%{name}"),
        Type::Pauli => "%Pauli".to_string(),
        Type::Range => "%Range".to_string(),
        Type::Result => "%Result".to_string(),
        Type::Qubit => "%Qubit".to_string(),
        Type::Array => "%Array".to_string(),
        Type::Tuple => "%Tuple".to_string(),
        Type::Void => "void".to_string(),
    }
}

pub(crate) fn fmt_operand(op: &Operand) -> String {
    match op {
        Operand::Local(name) => format!("%{name}"),
        Operand::Global(name) => format!("@{name}"),
        Operand::Const(c) => fmt_constant(c),
    }
}

pub(crate) fn fmt_constant(c: &Constant) -> String {
    match c {
        Constant::Int { value, .. } => format!("{value}"),
        Constant::Double(v) => {
            if v.is_finite() {
                // Shortest decimal form that parses back to the same bits.
                let s = format!("{v:?}");
                if s.contains('.') || s.contains('e') || s.contains('E') {
                    s
                } else {
                    format!("{s}.0")
                }
            } else {
                format!("0x{:016X}", v.to_bits())
            }
        }
        Constant::Null(_) => "null".to_string(),
        Constant::Range { start, step, end } => {
            format!("{{ i64 {start}, i64 {step}, i64 {end} }}")
        }
        Constant::Pauli(code) => format!("{code}"),
        Constant::Aggregate(items) => {
            let items = items
                .iter()
                .map(fmt_constant)
                .collect::<Vec<_>>()
                .join(", ");
            format!("[{items}]")
        }
        Constant::Void => "void".to_string(),
    }
}
