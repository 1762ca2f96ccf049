// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write;

use super::ast::*;

/// Renders a module as ANSI-style Verilog that parses back to the same tree
/// (modulo source locations).
pub fn print_module(m: &ModuleAst) -> String {
    let mut out = String::new();
    let _ = write!(out, "module {}(", m.name);
    for (i, p) in m.ports.iter().enumerate() {
        let dir = match p.direction {
            Direction::Input => "input",
            Direction::Output => "output",
        };
        let sep = if i + 1 == m.ports.len() { "" } else { "," };
        let _ = write!(out, "\n  {dir}{} {}{sep}", range(p.width), p.name);
    }
    if !m.ports.is_empty() {
        out.push('\n');
    }
    out.push_str(");\n");
    for n in &m.nets {
        let kind = match n.kind {
            NetKind::Wire => "wire",
            NetKind::Reg => "reg",
        };
        let _ = writeln!(out, "  {kind}{} {};", range(n.width), n.name);
    }
    for item in &m.items {
        match item {
            Item::ContinuousAssign(a) => {
                let _ = writeln!(out, "  assign {} = {};", lvalue(&a.lhs), expr(&a.rhs));
            }
            Item::Always(b) => {
                let sens = match &b.sensitivity {
                    Sensitivity::Star => "*".to_string(),
                    Sensitivity::Level(v) => {
                        let names: Vec<&str> = v.iter().map(|(n, _)| n.as_str()).collect();
                        format!("({})", names.join(" or "))
                    }
                    Sensitivity::Edges(v) => {
                        let names: Vec<String> = v
                            .iter()
                            .map(|(e, n, _)| {
                                let e = match e {
                                    Edge::Pos => "posedge",
                                    Edge::Neg => "negedge",
                                };
                                format!("{e} {n}")
                            })
                            .collect();
                        format!("({})", names.join(" or "))
                    }
                };
                let _ = write!(out, "  always @{sens} ");
                stmt(&mut out, &b.body, 1);
            }
        }
    }
    out.push_str("endmodule\n");
    out
}

fn range(width: u32) -> String {
    if width == 1 {
        String::new()
    } else {
        format!(" [{}:0]", width - 1)
    }
}

fn indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

/// Writes `s` starting at the current position and ends with a newline.
fn stmt(out: &mut String, s: &Stmt, level: usize) {
    match &s.kind {
        StmtKind::Block(body) => {
            out.push_str("begin\n");
            for b in body {
                indent(out, level + 1);
                stmt(out, b, level + 1);
            }
            indent(out, level);
            out.push_str("end\n");
        }
        StmtKind::If { cond, then, els } => {
            let _ = write!(out, "if ({}) ", expr(cond));
            stmt(out, then, level);
            if let Some(e) = els {
                indent(out, level);
                out.push_str("else ");
                stmt(out, e, level);
            }
        }
        StmtKind::Case {
            subject,
            arms,
            default,
        } => {
            let _ = writeln!(out, "case ({})", expr(subject));
            for arm in arms {
                indent(out, level + 1);
                let labels: Vec<String> = arm.labels.iter().map(expr).collect();
                let _ = write!(out, "{}: ", labels.join(", "));
                stmt(out, &arm.body, level + 1);
            }
            if let Some(d) = default {
                indent(out, level + 1);
                out.push_str("default: ");
                stmt(out, d, level + 1);
            }
            indent(out, level);
            out.push_str("endcase\n");
        }
        StmtKind::BlockingAssign { lhs, rhs } => {
            let _ = writeln!(out, "{} = {};", lvalue(lhs), expr(rhs));
        }
        StmtKind::NonblockingAssign { lhs, rhs } => {
            let _ = writeln!(out, "{} <= {};", lvalue(lhs), expr(rhs));
        }
    }
}

fn lvalue(l: &LValue) -> String {
    match &l.kind {
        LValueKind::Whole(n) => n.clone(),
        LValueKind::Bit(n, i) => format!("{n}[{}]", expr(i)),
        LValueKind::Part(n, h, lo) => format!("{n}[{h}:{lo}]"),
        LValueKind::Concat(parts) => {
            let v: Vec<String> = parts.iter().map(lvalue).collect();
            format!("{{{}}}", v.join(", "))
        }
    }
}

pub(crate) fn expr(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Const {
            width,
            value,
            sized,
        } => {
            if *sized {
                format!("{width}'h{value:x}")
            } else {
                format!("{value}")
            }
        }
        ExprKind::Ref(n) => n.clone(),
        ExprKind::BitSelect(n, i) => format!("{n}[{}]", expr(i)),
        ExprKind::PartSelect(n, h, l) => format!("{n}[{h}:{l}]"),
        ExprKind::Unary(op, a) => format!("({}{})", op.symbol(), expr(a)),
        ExprKind::Binary(op, a, b) => format!("({} {} {})", expr(a), op.symbol(), expr(b)),
        ExprKind::Concat(parts) => {
            let v: Vec<String> = parts.iter().map(expr).collect();
            format!("{{{}}}", v.join(", "))
        }
        ExprKind::Ternary(c, t, f) => format!("({} ? {} : {})", expr(c), expr(t), expr(f)),
    }
}
