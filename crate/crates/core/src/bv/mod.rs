// SPDX-License-Identifier: Apache-2.0

//! Hash-consed bitvector expressions.
//!
//! Every expression lives in a [`BvPool`] and is referred to by a plain
//! [`NodeId`] handle. Structurally equal nodes always share one handle, so
//! handle equality is structural equality. Node constructors apply a small
//! fixed set of rewrites (constant folding, identities, annihilators) before
//! interning.

mod eval;
mod pool;
mod simplify;
pub mod smtlib;

pub use eval::{eval_concrete, eval_with_default, Assignment};
pub use pool::{BvPool, VarInfo};

use thiserror::Error;

/// Widest bitvector the pool accepts.
pub const MAX_WIDTH: u32 = 128;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub(crate) u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub(crate) u32);

impl VarId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    /// Bitwise complement.
    Not,
    /// Logical negation, 1-bit result.
    LogNot,
    RedAnd,
    RedOr,
    RedXor,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    And,
    Or,
    Xor,
    Shl,
    Shr,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    LogAnd,
    LogOr,
    /// `Concat(hi, lo)`: the first operand supplies the high bits.
    Concat,
}

impl BinaryOp {
    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinaryOp::Eq | BinaryOp::Ne | BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge
        )
    }
}

/// Operator selector for the generic [`BvPool::mk_op`] entry point.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Op {
    Unary(UnaryOp),
    Binary(BinaryOp),
    Ite,
    Extract { hi: u32, lo: u32 },
    ZeroExtend { width: u32 },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Const(u128),
    Var(VarId),
    Unary(UnaryOp, NodeId),
    Binary(BinaryOp, NodeId, NodeId),
    Ite(NodeId, NodeId, NodeId),
    Extract { hi: u32, lo: u32, arg: NodeId },
    ZeroExtend(NodeId),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct Node {
    pub width: u32,
    pub kind: NodeKind,
}

impl Node {
    pub fn as_const(&self) -> Option<u128> {
        match self.kind {
            NodeKind::Const(v) => Some(v),
            _ => None,
        }
    }

    /// Operand handles in order.
    pub fn operands(&self) -> impl Iterator<Item = NodeId> {
        let (a, b, c) = match self.kind {
            NodeKind::Const(_) | NodeKind::Var(_) => (None, None, None),
            NodeKind::Unary(_, a) | NodeKind::Extract { arg: a, .. } | NodeKind::ZeroExtend(a) => {
                (Some(a), None, None)
            }
            NodeKind::Binary(_, a, b) => (Some(a), Some(b), None),
            NodeKind::Ite(c, t, e) => (Some(c), Some(t), Some(e)),
        };
        a.into_iter().chain(b).chain(c)
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum BvError {
    #[error("width {0} outside 1..=128")]
    BadWidth(u32),
    #[error("value {value:#x} does not fit in {width} bits")]
    ValueOverflow { width: u32, value: u128 },
    #[error("operand width mismatch for {op}: {detail}")]
    WidthMismatch { op: String, detail: String },
    #[error("variable `{name}` already declared with width {existing}, requested {requested}")]
    VarWidthConflict {
        name: String,
        existing: u32,
        requested: u32,
    },
    #[error("wrong operand count for {op}: expected {expected}, got {got}")]
    Arity {
        op: String,
        expected: usize,
        got: usize,
    },
    #[error("assignment has no value for variable `{0}`")]
    MissingVar(String),
}

/// All-ones mask for `width` bits.
pub fn mask(width: u32) -> u128 {
    if width >= 128 {
        u128::MAX
    } else {
        (1u128 << width) - 1
    }
}

pub(crate) fn check_width(width: u32) -> Result<(), BvError> {
    if (1..=MAX_WIDTH).contains(&width) {
        Ok(())
    } else {
        Err(BvError::BadWidth(width))
    }
}

/// Result width of a binary operator, or a width error.
pub(crate) fn binary_width(op: BinaryOp, wa: u32, wb: u32) -> Result<u32, BvError> {
    use BinaryOp::*;
    let mismatch = || BvError::WidthMismatch {
        op: format!("{op:?}"),
        detail: format!("{wa} vs {wb}"),
    };
    match op {
        Add | Sub | Mul | Div | Mod | And | Or | Xor => {
            if wa == wb {
                Ok(wa)
            } else {
                Err(mismatch())
            }
        }
        Eq | Ne | Lt | Le | Gt | Ge => {
            if wa == wb {
                Ok(1)
            } else {
                Err(mismatch())
            }
        }
        Shl | Shr => Ok(wa),
        LogAnd | LogOr => Ok(1),
        Concat => {
            let w = wa + wb;
            if w > MAX_WIDTH {
                Err(BvError::WidthMismatch {
                    op: "Concat".into(),
                    detail: format!("result width {w} exceeds {MAX_WIDTH}"),
                })
            } else {
                Ok(w)
            }
        }
    }
}

pub(crate) fn fold_unary(op: UnaryOp, w: u32, a: u128) -> u128 {
    match op {
        UnaryOp::Not => !a & mask(w),
        UnaryOp::LogNot => (a == 0) as u128,
        UnaryOp::RedAnd => (a == mask(w)) as u128,
        UnaryOp::RedOr => (a != 0) as u128,
        UnaryOp::RedXor => (a.count_ones() & 1) as u128,
    }
}

/// Concrete semantics of a binary operator. `wa`/`wb` are operand widths.
pub(crate) fn fold_binary(op: BinaryOp, wa: u32, a: u128, wb: u32, b: u128) -> u128 {
    use BinaryOp::*;
    let m = mask(wa);
    match op {
        Add => a.wrapping_add(b) & m,
        Sub => a.wrapping_sub(b) & m,
        Mul => a.wrapping_mul(b) & m,
        Div => a.checked_div(b).unwrap_or(0),
        Mod => a.checked_rem(b).unwrap_or(0),
        And => a & b,
        Or => a | b,
        Xor => a ^ b,
        Shl => {
            if b >= wa as u128 {
                0
            } else {
                (a << b) & m
            }
        }
        Shr => {
            if b >= wa as u128 {
                0
            } else {
                a >> b
            }
        }
        Eq => (a == b) as u128,
        Ne => (a != b) as u128,
        Lt => (a < b) as u128,
        Le => (a <= b) as u128,
        Gt => (a > b) as u128,
        Ge => (a >= b) as u128,
        LogAnd => (a != 0 && b != 0) as u128,
        LogOr => (a != 0 || b != 0) as u128,
        Concat => {
            if wb >= 128 {
                b
            } else {
                (a << wb) | b
            }
        }
    }
}

pub(crate) fn fold_extract(hi: u32, lo: u32, a: u128) -> u128 {
    (a >> lo) & mask(hi - lo + 1)
}
