// SPDX-License-Identifier: Apache-2.0

//! Two-state cycle interpreter over the elaborated IR. Arithmetic is done
//! directly on `u128` values here, independently of the bitvector pool, so
//! the simulator can serve as an oracle for the symbolic executor.

use thiserror::Error;

use crate::bv::BinaryOp;
use crate::elab::{BranchId, Expr, ExprKind, LValue, RtlDesign, Stmt, UnaryOp};
use crate::symexec::{InputPlan, TestCase};

use super::CoverageData;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum SimError {
    #[error("combinational logic did not settle within {bound} passes in cycle {cycle}")]
    SettleDivergence { cycle: u32, bound: usize },
    #[error("test {test}, cycle {cycle}: {message}")]
    Vector {
        test: u64,
        cycle: usize,
        message: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimState {
    /// Indexed by `SignalId`.
    pub values: Vec<u128>,
    pub cycle: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimOutcome {
    pub final_state: SimState,
    pub trace: Vec<(BranchId, u32)>,
    pub coverage: CoverageData,
    /// Signal values after combinational settling, per cycle.
    pub settled: Vec<Vec<u128>>,
    /// Signal values after the clock edge, per cycle.
    pub committed: Vec<Vec<u128>>,
}

fn mask(w: u32) -> u128 {
    if w >= 128 {
        u128::MAX
    } else {
        (1u128 << w) - 1
    }
}

fn lvalue_width(design: &RtlDesign, lv: &LValue) -> u32 {
    match lv {
        LValue::Whole(s) => design.signal(*s).width,
        LValue::Slice { hi, lo, .. } => hi - lo + 1,
        LValue::Concat(parts) => parts.iter().map(|p| lvalue_width(design, p)).sum(),
    }
}

fn store(design: &RtlDesign, target: &mut [u128], lv: &LValue, value: u128) {
    match lv {
        LValue::Whole(s) => target[s.index()] = value & mask(design.signal(*s).width),
        LValue::Slice { signal, hi, lo } => {
            let field = mask(hi - lo + 1) << lo;
            let old = target[signal.index()];
            target[signal.index()] = (old & !field) | ((value << lo) & field);
        }
        LValue::Concat(parts) => {
            let mut offset = 0;
            for part in parts.iter().rev() {
                let w = lvalue_width(design, part);
                store(design, target, part, (value >> offset) & mask(w));
                offset += w;
            }
        }
    }
}

struct Machine<'a> {
    design: &'a RtlDesign,
    values: Vec<u128>,
    /// Nonblocking targets during the clocked phase.
    next: Option<Vec<u128>>,
    trace: Vec<(BranchId, u32)>,
    stmt_hits: Vec<u64>,
    branch_hits: Vec<Vec<u64>>,
}

impl Machine<'_> {
    fn eval(&self, e: &Expr) -> u128 {
        let m = mask(e.width);
        match &e.kind {
            ExprKind::Const(v) => *v,
            ExprKind::Signal(s) => self.values[s.index()],
            ExprKind::Unary(op, a) => {
                let w = a.width;
                let v = self.eval(a);
                match op {
                    UnaryOp::Not => !v & mask(w),
                    UnaryOp::LogNot => (v == 0) as u128,
                    UnaryOp::RedAnd => (v == mask(w)) as u128,
                    UnaryOp::RedOr => (v != 0) as u128,
                    UnaryOp::RedXor => (v.count_ones() & 1) as u128,
                }
            }
            ExprKind::Binary(op, a, b) => {
                let w = a.width;
                let (x, y) = (self.eval(a), self.eval(b));
                let r = match op {
                    BinaryOp::Add => x.wrapping_add(y),
                    BinaryOp::Sub => x.wrapping_sub(y),
                    BinaryOp::Mul => x.wrapping_mul(y),
                    BinaryOp::Div => x.checked_div(y).unwrap_or(0),
                    BinaryOp::Mod => x.checked_rem(y).unwrap_or(0),
                    BinaryOp::And => x & y,
                    BinaryOp::Or => x | y,
                    BinaryOp::Xor => x ^ y,
                    BinaryOp::Shl => {
                        if y >= u128::from(w) {
                            0
                        } else {
                            x << y
                        }
                    }
                    BinaryOp::Shr => {
                        if y >= u128::from(w) {
                            0
                        } else {
                            x >> y
                        }
                    }
                    BinaryOp::Eq => (x == y) as u128,
                    BinaryOp::Ne => (x != y) as u128,
                    BinaryOp::Lt => (x < y) as u128,
                    BinaryOp::Le => (x <= y) as u128,
                    BinaryOp::Gt => (x > y) as u128,
                    BinaryOp::Ge => (x >= y) as u128,
                    BinaryOp::LogAnd => (x != 0 && y != 0) as u128,
                    BinaryOp::LogOr => (x != 0 || y != 0) as u128,
                    BinaryOp::Concat => unreachable!("IR concatenation is n-ary"),
                };
                r & mask(w) & m
            }
            ExprKind::Concat(parts) => parts.iter().fold(0u128, |acc, p| {
                let shifted = if p.width >= 128 { 0 } else { acc << p.width };
                shifted | self.eval(p)
            }),
            ExprKind::Ternary(c, t, f) => {
                if self.eval(c) != 0 {
                    self.eval(t)
                } else {
                    self.eval(f)
                }
            }
            ExprKind::Extract { hi, lo, arg } => (self.eval(arg) >> lo) & mask(hi - lo + 1),
            ExprKind::ZeroExtend(a) => self.eval(a),
        }
    }

    fn take_arm(&mut self, branch: BranchId, arm: usize) {
        self.trace.push((branch, arm as u32));
        self.branch_hits[branch.0 as usize][arm] += 1;
    }

    fn exec(&mut self, body: &[Stmt]) {
        for s in body {
            match s {
                Stmt::Assign { id, lhs, rhs, .. } => {
                    self.stmt_hits[id.0 as usize] += 1;
                    let v = self.eval(rhs);
                    let target = match &mut self.next {
                        Some(next) => next,
                        None => &mut self.values,
                    };
                    store(self.design, target, lhs, v);
                }
                Stmt::If {
                    branch,
                    cond,
                    then,
                    els,
                } => {
                    if self.eval(cond) != 0 {
                        self.take_arm(*branch, 0);
                        self.exec(then);
                    } else {
                        self.take_arm(*branch, 1);
                        self.exec(els);
                    }
                }
                Stmt::Case {
                    branch,
                    subject,
                    arms,
                    default,
                } => {
                    let v = self.eval(subject);
                    match arms.iter().position(|a| a.labels.contains(&v)) {
                        Some(k) => {
                            self.take_arm(*branch, k);
                            self.exec(&arms[k].body);
                        }
                        None => {
                            self.take_arm(*branch, arms.len());
                            self.exec(default);
                        }
                    }
                }
            }
        }
    }
}

/// Replays `test` cycle by cycle. Combinational processes are re-run until
/// a pass changes nothing (at most one pass more than there are
/// processes); only that final pass contributes to the trace and coverage.
pub fn simulate(
    design: &RtlDesign,
    plan: &InputPlan,
    test: &TestCase,
) -> Result<SimOutcome, SimError> {
    let controlled: Vec<_> = plan.controlled().map(|(s, _)| s).collect();
    if test.vectors.len() != plan.max_cycles as usize {
        return Err(SimError::Vector {
            test: test.id,
            cycle: test.vectors.len(),
            message: format!(
                "{} vectors for a {}-cycle harness",
                test.vectors.len(),
                plan.max_cycles
            ),
        });
    }
    let mut m = Machine {
        design,
        values: vec![0; design.signals.len()],
        next: None,
        trace: Vec::new(),
        stmt_hits: vec![0; design.stmt_table.len()],
        branch_hits: design
            .branch_table
            .iter()
            .map(|b| vec![0; b.arms()])
            .collect(),
    };
    let bound = design.num_combinational + 1;
    let mut settled = Vec::with_capacity(test.vectors.len());
    let mut committed = Vec::with_capacity(test.vectors.len());

    for (k, row) in test.vectors.iter().enumerate() {
        let vector_err = |message: String| SimError::Vector {
            test: test.id,
            cycle: k,
            message,
        };
        if row.len() != controlled.len() {
            return Err(vector_err(format!(
                "expected {} input values, found {}",
                controlled.len(),
                row.len()
            )));
        }
        for &s in &controlled {
            let Some(&(_, v)) = row.iter().find(|(id, _)| *id == s) else {
                return Err(vector_err(format!(
                    "no value for input `{}`",
                    design.signal(s).name
                )));
            };
            if v > mask(design.signal(s).width) {
                return Err(vector_err(format!(
                    "value for `{}` exceeds its width",
                    design.signal(s).name
                )));
            }
            m.values[s.index()] = v;
        }
        if let Some(clk) = plan.clock() {
            m.values[clk.index()] = 0;
        }

        // Settle: run passes with scratch counters until one changes nothing.
        let trace_mark = m.trace.len();
        let saved_stmts = m.stmt_hits.clone();
        let saved_branches = m.branch_hits.clone();
        let mut converged = false;
        for _ in 0..bound {
            m.trace.truncate(trace_mark);
            m.stmt_hits.clone_from(&saved_stmts);
            m.branch_hits.clone_from(&saved_branches);
            let before = m.values.clone();
            for p in design.combinational() {
                m.exec(&p.body);
            }
            if m.values == before {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(SimError::SettleDivergence {
                cycle: k as u32,
                bound,
            });
        }
        settled.push(m.values.clone());

        m.next = Some(m.values.clone());
        for p in design.clocked() {
            m.exec(&p.body);
        }
        m.values = m.next.take().expect("set for the clocked phase");
        committed.push(m.values.clone());
    }

    Ok(SimOutcome {
        final_state: SimState {
            values: m.values,
            cycle: test.vectors.len() as u32,
        },
        trace: m.trace,
        coverage: CoverageData {
            design: design.name.clone(),
            stmt_hits: m.stmt_hits,
            branch_hits: m.branch_hits,
        },
        settled,
        committed,
    })
}
