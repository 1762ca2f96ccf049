// SPDX-License-Identifier: Apache-2.0

//! Local rewrites applied by the node constructors. Operands are never
//! reordered, so the rewritten shape does not depend on handle numbering.

use super::pool::BvPool;
use super::{mask, BinaryOp, BvError, Node, NodeId, NodeKind, UnaryOp};

pub(super) fn unary(pool: &BvPool, op: UnaryOp, a: &Node) -> Option<NodeId> {
    match (op, a.kind) {
        (UnaryOp::Not, NodeKind::Unary(UnaryOp::Not, inner)) => Some(inner),
        (UnaryOp::LogNot, NodeKind::Unary(UnaryOp::LogNot, inner)) if pool.width(inner) == 1 => {
            Some(inner)
        }
        // Reductions of a single bit are the bit itself.
        (UnaryOp::RedAnd | UnaryOp::RedOr | UnaryOp::RedXor, _) if a.width == 1 => {
            Some(pool.intern(*a))
        }
        _ => None,
    }
}

pub(super) fn binary(
    pool: &BvPool,
    op: BinaryOp,
    a: NodeId,
    na: &Node,
    b: NodeId,
    nb: &Node,
    width: u32,
) -> Result<Option<NodeId>, BvError> {
    use BinaryOp::*;
    let ca = na.as_const();
    let cb = nb.as_const();
    let ones = mask(na.width);
    let zero = || pool.mk_const(width, 0);
    let one_bit = |v: u128| pool.mk_const(1, v);

    let out = match op {
        And => {
            if ca == Some(0) || cb == Some(0) {
                Some(zero()?)
            } else if ca == Some(ones) {
                Some(b)
            } else if cb == Some(ones) || a == b {
                Some(a)
            } else {
                None
            }
        }
        Or => {
            if ca == Some(0) {
                Some(b)
            } else if cb == Some(0) || a == b {
                Some(a)
            } else if ca == Some(ones) || cb == Some(ones) {
                Some(pool.mk_const(width, ones)?)
            } else {
                None
            }
        }
        Xor => {
            if ca == Some(0) {
                Some(b)
            } else if cb == Some(0) {
                Some(a)
            } else if a == b {
                Some(zero()?)
            } else {
                None
            }
        }
        Add => {
            if ca == Some(0) {
                Some(b)
            } else if cb == Some(0) {
                Some(a)
            } else {
                None
            }
        }
        Sub => {
            if cb == Some(0) {
                Some(a)
            } else if a == b {
                Some(zero()?)
            } else {
                None
            }
        }
        Mul => {
            if ca == Some(0) || cb == Some(0) {
                Some(zero()?)
            } else if ca == Some(1) {
                Some(b)
            } else if cb == Some(1) {
                Some(a)
            } else {
                None
            }
        }
        Shl | Shr => {
            if cb == Some(0) || ca == Some(0) {
                Some(a)
            } else if matches!(cb, Some(s) if s >= na.width as u128) {
                Some(zero()?)
            } else {
                None
            }
        }
        Eq => {
            if a == b {
                Some(one_bit(1)?)
            } else {
                None
            }
        }
        LogAnd => {
            if ca == Some(0) || cb == Some(0) {
                Some(one_bit(0)?)
            } else {
                None
            }
        }
        LogOr => {
            if matches!(ca, Some(v) if v != 0) || matches!(cb, Some(v) if v != 0) {
                Some(one_bit(1)?)
            } else {
                None
            }
        }
        // Adjacent slices of one value rejoin into a single slice.
        Concat => match (na.kind, nb.kind) {
            (
                NodeKind::Extract {
                    hi,
                    lo: mid,
                    arg: x,
                },
                NodeKind::Extract {
                    hi: below,
                    lo,
                    arg: y,
                },
            ) if x == y && below + 1 == mid => Some(pool.extract(hi, lo, x)?),
            _ => None,
        },
        _ => None,
    };
    Ok(out)
}

pub(super) fn extract(
    pool: &BvPool,
    hi: u32,
    lo: u32,
    a: NodeId,
    na: &Node,
) -> Result<Option<NodeId>, BvError> {
    if lo == 0 && hi + 1 == na.width {
        return Ok(Some(a));
    }
    let out = match na.kind {
        NodeKind::Extract {
            lo: inner_lo, arg, ..
        } => Some(pool.extract(hi + inner_lo, lo + inner_lo, arg)?),
        NodeKind::Binary(BinaryOp::Concat, top, bottom) => {
            let wb = pool.width(bottom);
            if hi < wb {
                Some(pool.extract(hi, lo, bottom)?)
            } else if lo >= wb {
                Some(pool.extract(hi - wb, lo - wb, top)?)
            } else {
                None
            }
        }
        NodeKind::ZeroExtend(inner) => {
            let wi = pool.width(inner);
            if lo >= wi {
                Some(pool.mk_const(hi - lo + 1, 0)?)
            } else if hi < wi {
                Some(pool.extract(hi, lo, inner)?)
            } else {
                None
            }
        }
        _ => None,
    };
    Ok(out)
}
