use std::fmt::Write;

use super::{Cond, Expr, Program, Stmt};

const INDENT: &str = "    ";

/// Canonical text of a program.
///
/// Binary operations are always parenthesized, so the output does not depend
/// on operator precedence and parsing it back yields the same tree.
pub fn render(program: &Program) -> String {
    let mut out = String::new();
    let params: Vec<String> = (0..program.input_arity())
        .map(|i| format!("x{i}"))
        .collect();
    let _ = writeln!(out, "program {}({})", program.name(), params.join(", "));
    block(&mut out, program.body(), 0);
    out
}

fn block(out: &mut String, stmts: &[Stmt], depth: usize) {
    for s in stmts {
        stmt(out, s, depth);
    }
}

fn stmt(out: &mut String, s: &Stmt, depth: usize) {
    let pad = INDENT.repeat(depth);
    match s {
        Stmt::Assign { target, value, .. } => {
            let _ = writeln!(out, "{pad}{target} = {};", expr(value));
        }
        Stmt::If {
            cond: c,
            then_block,
            else_block,
        } => {
            let _ = writeln!(out, "{pad}if ({}) {{", cond(c));
            block(out, then_block, depth + 1);
            match else_block {
                Some(e) => {
                    let _ = writeln!(out, "{pad}}} else {{");
                    block(out, e, depth + 1);
                    let _ = writeln!(out, "{pad}}}");
                }
                None => {
                    let _ = writeln!(out, "{pad}}}");
                }
            }
        }
        Stmt::Loop { cond: c, body } => {
            let _ = writeln!(out, "{pad}loop ({}) {{", cond(c));
            block(out, body, depth + 1);
            let _ = writeln!(out, "{pad}}}");
        }
    }
}

fn cond(c: &Cond) -> String {
    format!("{} {} {}", expr(&c.left), c.rel.symbol(), expr(&c.right))
}

fn expr(e: &Expr) -> String {
    match e {
        Expr::Const(n) => n.to_string(),
        Expr::Var(v) => v.to_string(),
        Expr::Bin(op, l, r) => format!("({} {} {})", expr(l), op.symbol(), expr(r)),
    }
}
