// SPDX-License-Identifier: Apache-2.0

//! SMT-LIB 2.6 (QF_BV) export.
//!
//! Width-1 nodes are bitvectors of width one throughout; predicates are
//! turned back into `#b1`/`#b0` with `ite`, and each constraint is asserted
//! as `(= t #b1)`. Division and remainder are guarded so that a zero divisor
//! yields zero, matching [`eval_concrete`](super::eval_concrete).

use std::collections::{HashMap, HashSet};
use std::fmt::Write;

use super::pool::BvPool;
use super::{BinaryOp, NodeId, NodeKind, UnaryOp, VarId};

/// SMT symbol used for a variable: the plain name at cycle 0, `name@k` for
/// later cycles.
pub fn var_symbol(pool: &BvPool, var: VarId) -> String {
    let info = pool.var_info(var);
    if info.cycle == 0 {
        info.name.to_string()
    } else {
        format!("{}@{}", info.name, info.cycle)
    }
}

pub fn to_smtlib(pool: &BvPool, constraints: &[NodeId]) -> String {
    script(pool, constraints).0
}

/// The script plus the declared symbols in declaration order.
pub(crate) fn script(pool: &BvPool, constraints: &[NodeId]) -> (String, Vec<(String, VarId)>) {
    let mut out = String::new();
    if constraints.is_empty() {
        out.push_str("(check-sat)\n");
        return (out, Vec::new());
    }
    out.push_str("(set-logic QF_BV)\n");
    let vars = pool.vars_in(constraints);
    let mut symbols = Vec::with_capacity(vars.len());
    for v in vars {
        let sym = var_symbol(pool, v);
        let _ = writeln!(
            out,
            "(declare-const {sym} (_ BitVec {}))",
            pool.var_info(v).width
        );
        symbols.push((sym, v));
    }
    let names: HashMap<VarId, String> = symbols.iter().map(|(s, v)| (*v, s.clone())).collect();
    for (i, &c) in constraints.iter().enumerate() {
        let mut printer = Printer {
            pool,
            names: &names,
            lets: HashMap::new(),
            prefix: format!("t{i}_"),
        };
        let body = printer.assertion(c);
        let _ = writeln!(out, "(assert {body})");
    }
    out.push_str("(check-sat)\n(get-model)\n");
    (out, symbols)
}

struct Printer<'a> {
    pool: &'a BvPool,
    names: &'a HashMap<VarId, String>,
    lets: HashMap<NodeId, String>,
    prefix: String,
}

impl Printer<'_> {
    fn assertion(&mut self, root: NodeId) -> String {
        // Post-order over the constraint's DAG with in-constraint fan-out counts.
        let mut order = Vec::new();
        let mut parents: HashMap<NodeId, usize> = HashMap::new();
        let mut visited = HashSet::new();
        let mut stack = vec![(root, false)];
        while let Some((id, done)) = stack.pop() {
            if done {
                order.push(id);
                continue;
            }
            if !visited.insert(id) {
                continue;
            }
            stack.push((id, true));
            let ops: Vec<NodeId> = self.pool.node(id).operands().collect();
            for op in ops.iter().rev() {
                *parents.entry(*op).or_default() += 1;
                stack.push((*op, false));
            }
        }
        let mut bindings = Vec::new();
        for id in order {
            let n = self.pool.node(id);
            let leaf = matches!(n.kind, NodeKind::Const(_) | NodeKind::Var(_));
            if id != root && !leaf && parents.get(&id).copied().unwrap_or(0) > 1 {
                let term = self.term(id);
                let name = format!("{}{}", self.prefix, bindings.len());
                bindings.push((name.clone(), term));
                self.lets.insert(id, name);
            }
        }
        let mut body = format!("(= {} #b1)", self.term(root));
        for (name, term) in bindings.into_iter().rev() {
            body = format!("(let (({name} {term})) {body})");
        }
        body
    }

    fn bits(value: u128, width: u32) -> String {
        let mut s = String::with_capacity(width as usize + 2);
        s.push_str("#b");
        for i in (0..width).rev() {
            s.push(if (value >> i) & 1 == 1 { '1' } else { '0' });
        }
        s
    }

    fn zeros(width: u32) -> String {
        Self::bits(0, width)
    }

    fn pred(p: String) -> String {
        format!("(ite {p} #b1 #b0)")
    }

    fn sub(&self, id: NodeId) -> String {
        match self.lets.get(&id) {
            Some(name) => name.clone(),
            None => self.term(id),
        }
    }

    fn term(&self, id: NodeId) -> String {
        let n = self.pool.node(id);
        match n.kind {
            NodeKind::Const(v) => Self::bits(v, n.width),
            NodeKind::Var(v) => self.names[&v].clone(),
            NodeKind::Unary(op, a) => {
                let wa = self.pool.width(a);
                let s = self.sub(a);
                match op {
                    UnaryOp::Not => format!("(bvnot {s})"),
                    UnaryOp::LogNot => Self::pred(format!("(= {s} {})", Self::zeros(wa))),
                    UnaryOp::RedAnd => {
                        Self::pred(format!("(= {s} {})", Self::bits(super::mask(wa), wa)))
                    }
                    UnaryOp::RedOr => format!("(ite (= {s} {}) #b0 #b1)", Self::zeros(wa)),
                    UnaryOp::RedXor => {
                        let mut acc = format!("((_ extract 0 0) {s})");
                        for i in 1..wa {
                            acc = format!("(bvxor {acc} ((_ extract {i} {i}) {s}))");
                        }
                        acc
                    }
                }
            }
            NodeKind::Binary(op, a, b) => {
                let (wa, wb) = (self.pool.width(a), self.pool.width(b));
                let (x, y) = (self.sub(a), self.sub(b));
                use BinaryOp::*;
                match op {
                    Add => format!("(bvadd {x} {y})"),
                    Sub => format!("(bvsub {x} {y})"),
                    Mul => format!("(bvmul {x} {y})"),
                    And => format!("(bvand {x} {y})"),
                    Or => format!("(bvor {x} {y})"),
                    Xor => format!("(bvxor {x} {y})"),
                    Div | Mod => {
                        let f = if op == Div { "bvudiv" } else { "bvurem" };
                        let z = Self::zeros(wa);
                        format!("(ite (= {y} {z}) {z} ({f} {x} {y}))")
                    }
                    Shl | Shr => {
                        let f = if op == Shl { "bvshl" } else { "bvlshr" };
                        if wa == wb {
                            format!("({f} {x} {y})")
                        } else if wb < wa {
                            format!("({f} {x} ((_ zero_extend {}) {y}))", wa - wb)
                        } else {
                            format!(
                                "((_ extract {} 0) ({f} ((_ zero_extend {}) {x}) {y}))",
                                wa - 1,
                                wb - wa
                            )
                        }
                    }
                    Eq => Self::pred(format!("(= {x} {y})")),
                    Ne => format!("(ite (= {x} {y}) #b0 #b1)"),
                    Lt => Self::pred(format!("(bvult {x} {y})")),
                    Le => Self::pred(format!("(bvule {x} {y})")),
                    Gt => Self::pred(format!("(bvugt {x} {y})")),
                    Ge => Self::pred(format!("(bvuge {x} {y})")),
                    LogAnd => Self::pred(format!(
                        "(and (not (= {x} {})) (not (= {y} {})))",
                        Self::zeros(wa),
                        Self::zeros(wb)
                    )),
                    LogOr => Self::pred(format!(
                        "(or (not (= {x} {})) (not (= {y} {})))",
                        Self::zeros(wa),
                        Self::zeros(wb)
                    )),
                    Concat => format!("(concat {x} {y})"),
                }
            }
            NodeKind::Ite(c, t, e) => {
                format!(
                    "(ite (= {} #b1) {} {})",
                    self.sub(c),
                    self.sub(t),
                    self.sub(e)
                )
            }
            NodeKind::Extract { hi, lo, arg } => {
                format!("((_ extract {hi} {lo}) {})", self.sub(arg))
            }
            NodeKind::ZeroExtend(a) => {
                let k = n.width - self.pool.width(a);
                if k == 0 {
                    self.sub(a)
                } else {
                    format!("((_ zero_extend {k}) {})", self.sub(a))
                }
            }
        }
    }
}
