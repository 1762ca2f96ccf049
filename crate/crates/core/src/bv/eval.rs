// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, HashMap};

use super::pool::BvPool;
use super::{fold_binary, fold_extract, fold_unary, BvError, NodeId, NodeKind, VarId};

/// Concrete values for symbolic variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assignment {
    values: BTreeMap<VarId, u128>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, var: VarId) -> Option<u128> {
        self.values.get(&var).copied()
    }

    pub fn set(&mut self, var: VarId, value: u128) {
        self.values.insert(var, value);
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, u128)> + '_ {
        self.values.iter().map(|(k, v)| (*k, *v))
    }

    /// Overwrites entries with those of `other`.
    pub fn extend_from(&mut self, other: &Assignment) {
        for (k, v) in other.iter() {
            self.values.insert(k, v);
        }
    }
}

/// Evaluates `node` under `a`. Every variable reachable from `node` must be
/// assigned.
pub fn eval_concrete(pool: &BvPool, node: NodeId, a: &Assignment) -> Result<u128, BvError> {
    let mut memo = HashMap::new();
    eval_rec(pool, node, &mut memo, &|v| {
        a.get(v)
            .ok_or_else(|| BvError::MissingVar(pool.var_info(v).name.to_string()))
    })
}

/// Like [`eval_concrete`] but unassigned variables read as zero.
pub fn eval_with_default(pool: &BvPool, node: NodeId, a: &Assignment) -> u128 {
    let mut memo = HashMap::new();
    eval_rec(pool, node, &mut memo, &|v| Ok(a.get(v).unwrap_or(0))).expect("total lookup")
}

fn eval_rec(
    pool: &BvPool,
    id: NodeId,
    memo: &mut HashMap<NodeId, u128>,
    lookup: &dyn Fn(VarId) -> Result<u128, BvError>,
) -> Result<u128, BvError> {
    if let Some(&v) = memo.get(&id) {
        return Ok(v);
    }
    let n = pool.node(id);
    let v = match n.kind {
        NodeKind::Const(c) => c,
        NodeKind::Var(var) => lookup(var)? & super::mask(n.width),
        NodeKind::Unary(op, a) => {
            let wa = pool.width(a);
            fold_unary(op, wa, eval_rec(pool, a, memo, lookup)?)
        }
        NodeKind::Binary(op, a, b) => {
            let (wa, wb) = (pool.width(a), pool.width(b));
            let x = eval_rec(pool, a, memo, lookup)?;
            let y = eval_rec(pool, b, memo, lookup)?;
            fold_binary(op, wa, x, wb, y)
        }
        NodeKind::Ite(c, t, e) => {
            if eval_rec(pool, c, memo, lookup)? != 0 {
                eval_rec(pool, t, memo, lookup)?
            } else {
                eval_rec(pool, e, memo, lookup)?
            }
        }
        NodeKind::Extract { hi, lo, arg } => {
            fold_extract(hi, lo, eval_rec(pool, arg, memo, lookup)?)
        }
        NodeKind::ZeroExtend(a) => eval_rec(pool, a, memo, lookup)?,
    };
    memo.insert(id, v);
    Ok(v)
}
