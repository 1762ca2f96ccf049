// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use super::simplify;
use super::{
    binary_width, check_width, fold_binary, fold_extract, fold_unary, mask, BinaryOp, BvError,
    Node, NodeId, NodeKind, Op, UnaryOp, VarId,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarInfo {
    pub name: Arc<str>,
    pub width: u32,
    /// Cycle the symbol was introduced in; distinguishes per-cycle fresh inputs.
    pub cycle: u32,
}

#[derive(Default)]
struct PoolInner {
    nodes: Vec<Node>,
    dedup: HashMap<Node, NodeId>,
    vars: Vec<VarInfo>,
    var_dedup: HashMap<(Arc<str>, u32), VarId>,
}

/// Append-only node table. Reads take a shared lock; interning takes the
/// exclusive lock only when the node is new, so concurrent explorers never
/// create duplicate ids.
pub struct BvPool {
    inner: RwLock<PoolInner>,
    simplify: bool,
}

impl Default for BvPool {
    fn default() -> Self {
        Self::new()
    }
}

impl std::fmt::Debug for BvPool {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BvPool")
            .field("nodes", &self.len())
            .finish()
    }
}

impl BvPool {
    pub fn new() -> Self {
        BvPool {
            inner: RwLock::new(PoolInner::default()),
            simplify: true,
        }
    }

    /// A pool that interns every operator node verbatim: no folding, no
    /// rewrites. Used as the reference semantics for the simplifier.
    pub fn without_simplification() -> Self {
        BvPool {
            inner: RwLock::new(PoolInner::default()),
            simplify: false,
        }
    }

    pub fn len(&self) -> usize {
        self.inner.read().unwrap().nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn node(&self, id: NodeId) -> Node {
        self.inner.read().unwrap().nodes[id.index()]
    }

    pub fn width(&self, id: NodeId) -> u32 {
        self.node(id).width
    }

    pub fn as_const(&self, id: NodeId) -> Option<u128> {
        self.node(id).as_const()
    }

    pub fn var_info(&self, var: VarId) -> VarInfo {
        self.inner.read().unwrap().vars[var.index()].clone()
    }

    pub fn intern(&self, node: Node) -> NodeId {
        if let Some(&id) = self.inner.read().unwrap().dedup.get(&node) {
            return id;
        }
        let mut inner = self.inner.write().unwrap();
        if let Some(&id) = inner.dedup.get(&node) {
            return id;
        }
        let id = NodeId(inner.nodes.len() as u32);
        inner.nodes.push(node);
        inner.dedup.insert(node, id);
        id
    }

    pub fn mk_const(&self, width: u32, value: u128) -> Result<NodeId, BvError> {
        check_width(width)?;
        if value & !mask(width) != 0 {
            return Err(BvError::ValueOverflow { width, value });
        }
        Ok(self.intern(Node {
            width,
            kind: NodeKind::Const(value),
        }))
    }

    /// Constant from a value that is truncated to `width` first.
    pub fn mk_const_trunc(&self, width: u32, value: u128) -> Result<NodeId, BvError> {
        self.mk_const(width, value & mask(width.min(128)))
    }

    pub fn zero(&self, width: u32) -> NodeId {
        self.mk_const(width, 0).expect("valid width")
    }

    pub fn one(&self, width: u32) -> NodeId {
        self.mk_const(width, 1).expect("valid width")
    }

    pub fn mk_var(&self, name: &str, width: u32, cycle: u32) -> Result<NodeId, BvError> {
        check_width(width)?;
        let var = {
            let key: (Arc<str>, u32) = (Arc::from(name), cycle);
            let existing = self.inner.read().unwrap().var_dedup.get(&key).copied();
            match existing {
                Some(v) => v,
                None => {
                    let mut inner = self.inner.write().unwrap();
                    match inner.var_dedup.get(&key) {
                        Some(&v) => v,
                        None => {
                            let v = VarId(inner.vars.len() as u32);
                            inner.vars.push(VarInfo {
                                name: key.0.clone(),
                                width,
                                cycle,
                            });
                            inner.var_dedup.insert(key, v);
                            v
                        }
                    }
                }
            }
        };
        let existing = self.var_info(var).width;
        if existing != width {
            return Err(BvError::VarWidthConflict {
                name: name.to_string(),
                existing,
                requested: width,
            });
        }
        Ok(self.intern(Node {
            width,
            kind: NodeKind::Var(var),
        }))
    }

    /// Generic constructor dispatching on `op`.
    pub fn mk_op(&self, op: Op, operands: &[NodeId]) -> Result<NodeId, BvError> {
        let arity = |n: usize| -> Result<(), BvError> {
            if operands.len() == n {
                Ok(())
            } else {
                Err(BvError::Arity {
                    op: format!("{op:?}"),
                    expected: n,
                    got: operands.len(),
                })
            }
        };
        match op {
            Op::Unary(u) => {
                arity(1)?;
                self.unary(u, operands[0])
            }
            Op::Binary(b) => {
                arity(2)?;
                self.binary(b, operands[0], operands[1])
            }
            Op::Ite => {
                arity(3)?;
                self.ite(operands[0], operands[1], operands[2])
            }
            Op::Extract { hi, lo } => {
                arity(1)?;
                self.extract(hi, lo, operands[0])
            }
            Op::ZeroExtend { width } => {
                arity(1)?;
                self.zero_extend(operands[0], width)
            }
        }
    }

    pub fn unary(&self, op: UnaryOp, a: NodeId) -> Result<NodeId, BvError> {
        let na = self.node(a);
        let width = match op {
            UnaryOp::Not => na.width,
            _ => 1,
        };
        if self.simplify {
            if let Some(v) = na.as_const() {
                return self.mk_const(width, fold_unary(op, na.width, v));
            }
            if let Some(id) = simplify::unary(self, op, &na) {
                return Ok(id);
            }
        }
        Ok(self.intern(Node {
            width,
            kind: NodeKind::Unary(op, a),
        }))
    }

    pub fn binary(&self, op: BinaryOp, a: NodeId, b: NodeId) -> Result<NodeId, BvError> {
        let na = self.node(a);
        let nb = self.node(b);
        let width = binary_width(op, na.width, nb.width)?;
        if self.simplify {
            if let (Some(x), Some(y)) = (na.as_const(), nb.as_const()) {
                return self.mk_const(width, fold_binary(op, na.width, x, nb.width, y));
            }
            if let Some(id) = simplify::binary(self, op, a, &na, b, &nb, width)? {
                return Ok(id);
            }
        }
        Ok(self.intern(Node {
            width,
            kind: NodeKind::Binary(op, a, b),
        }))
    }

    pub fn ite(&self, cond: NodeId, then: NodeId, els: NodeId) -> Result<NodeId, BvError> {
        let nc = self.node(cond);
        let (wt, we) = (self.width(then), self.width(els));
        if nc.width != 1 {
            return Err(BvError::WidthMismatch {
                op: "Ite".into(),
                detail: format!("condition has width {}", nc.width),
            });
        }
        if wt != we {
            return Err(BvError::WidthMismatch {
                op: "Ite".into(),
                detail: format!("{wt} vs {we}"),
            });
        }
        if self.simplify {
            if let Some(c) = nc.as_const() {
                return Ok(if c != 0 { then } else { els });
            }
            if then == els {
                return Ok(then);
            }
        }
        Ok(self.intern(Node {
            width: wt,
            kind: NodeKind::Ite(cond, then, els),
        }))
    }

    pub fn extract(&self, hi: u32, lo: u32, a: NodeId) -> Result<NodeId, BvError> {
        let na = self.node(a);
        if lo > hi || hi >= na.width {
            return Err(BvError::WidthMismatch {
                op: "Extract".into(),
                detail: format!("[{hi}:{lo}] of a {}-bit operand", na.width),
            });
        }
        let width = hi - lo + 1;
        if self.simplify {
            if let Some(v) = na.as_const() {
                return self.mk_const(width, fold_extract(hi, lo, v));
            }
            if let Some(id) = simplify::extract(self, hi, lo, a, &na)? {
                return Ok(id);
            }
        }
        Ok(self.intern(Node {
            width,
            kind: NodeKind::Extract { hi, lo, arg: a },
        }))
    }

    pub fn zero_extend(&self, a: NodeId, width: u32) -> Result<NodeId, BvError> {
        check_width(width)?;
        let na = self.node(a);
        if width < na.width {
            return Err(BvError::WidthMismatch {
                op: "ZeroExtend".into(),
                detail: format!("cannot extend {} bits to {width}", na.width),
            });
        }
        if self.simplify {
            if width == na.width {
                return Ok(a);
            }
            if let Some(v) = na.as_const() {
                return self.mk_const(width, v);
            }
        }
        Ok(self.intern(Node {
            width,
            kind: NodeKind::ZeroExtend(a),
        }))
    }

    /// Zero-extends or truncates to exactly `width` bits.
    pub fn resize(&self, a: NodeId, width: u32) -> Result<NodeId, BvError> {
        let w = self.width(a);
        match w.cmp(&width) {
            std::cmp::Ordering::Equal => Ok(a),
            std::cmp::Ordering::Less => self.zero_extend(a, width),
            std::cmp::Ordering::Greater => self.extract(width - 1, 0, a),
        }
    }

    /// Boolean view of a value: `a != 0` as a 1-bit node.
    pub fn truthy(&self, a: NodeId) -> Result<NodeId, BvError> {
        if self.width(a) == 1 {
            Ok(a)
        } else {
            self.unary(UnaryOp::RedOr, a)
        }
    }

    pub fn not1(&self, a: NodeId) -> Result<NodeId, BvError> {
        let a = self.truthy(a)?;
        self.unary(UnaryOp::Not, a)
    }

    pub fn and1(&self, a: NodeId, b: NodeId) -> Result<NodeId, BvError> {
        let (a, b) = (self.truthy(a)?, self.truthy(b)?);
        self.binary(BinaryOp::And, a, b)
    }

    pub fn or1(&self, a: NodeId, b: NodeId) -> Result<NodeId, BvError> {
        let (a, b) = (self.truthy(a)?, self.truthy(b)?);
        self.binary(BinaryOp::Or, a, b)
    }

    /// Vars reachable from `roots`, in order of first occurrence during a
    /// left-to-right depth-first walk.
    pub fn vars_in(&self, roots: &[NodeId]) -> Vec<VarId> {
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::new();
        let mut seen_vars = std::collections::HashSet::new();
        for &r in roots {
            let mut stack = vec![r];
            while let Some(id) = stack.pop() {
                if !seen.insert(id) {
                    continue;
                }
                let n = self.node(id);
                if let NodeKind::Var(v) = n.kind {
                    if seen_vars.insert(v) {
                        out.push(v);
                    }
                }
                let ops: Vec<NodeId> = n.operands().collect();
                stack.extend(ops.into_iter().rev());
            }
        }
        out
    }
}
