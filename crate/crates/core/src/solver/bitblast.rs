// SPDX-License-Identifier: Apache-2.0

//! Tseitin bit-blasting of width-1 bitvector constraints into CNF.
//!
//! Gates fold constants and share structurally identical instances, so
//! constant-heavy terms (shift by a literal, multiply by a literal) collapse
//! to wiring before any clause is emitted.

use std::collections::{BTreeMap, HashMap};

use crate::bv::{BinaryOp, BvPool, NodeId, NodeKind, UnaryOp, VarId};

/// DIMACS-style literal: `v` or `-v` for CNF variable `v >= 1`.
pub type Lit = i32;

/// CNF variable 1 is constant true, pinned by a unit clause.
pub const TRUE: Lit = 1;
pub const FALSE: Lit = -1;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Cnf {
    pub num_vars: u32,
    pub clauses: Vec<Vec<Lit>>,
    /// `(bitvector var, bit index)` to CNF variable.
    pub bit_map: BTreeMap<(VarId, u32), u32>,
}

#[derive(Copy, Clone, PartialEq, Eq, Hash)]
enum Gate {
    And(Lit, Lit),
    Xor(Lit, Lit),
    Mux(Lit, Lit, Lit),
}

struct Blaster<'a> {
    pool: &'a BvPool,
    cnf: Cnf,
    words: HashMap<NodeId, Vec<Lit>>,
    gates: HashMap<Gate, Lit>,
}

/// Encodes the conjunction of `constraints` (each of width 1).
pub fn bitblast(pool: &BvPool, constraints: &[NodeId]) -> Cnf {
    let mut b = Blaster {
        pool,
        cnf: Cnf {
            num_vars: 1,
            clauses: vec![vec![TRUE]],
            bit_map: BTreeMap::new(),
        },
        words: HashMap::new(),
        gates: HashMap::new(),
    };
    for &c in constraints {
        debug_assert_eq!(pool.width(c), 1, "constraints must be width 1");
        let lit = b.word(c)[0];
        match lit {
            TRUE => {}
            FALSE => b.cnf.clauses.push(Vec::new()),
            l => b.cnf.clauses.push(vec![l]),
        }
    }
    b.cnf
}

impl Blaster<'_> {
    fn fresh(&mut self) -> Lit {
        self.cnf.num_vars += 1;
        self.cnf.num_vars as Lit
    }

    fn and(&mut self, a: Lit, b: Lit) -> Lit {
        if a == FALSE || b == FALSE || a == -b {
            return FALSE;
        }
        if a == TRUE || a == b {
            return b;
        }
        if b == TRUE {
            return a;
        }
        let key = Gate::And(a.min(b), a.max(b));
        if let Some(&g) = self.gates.get(&key) {
            return g;
        }
        let g = self.fresh();
        self.cnf.clauses.push(vec![-g, a]);
        self.cnf.clauses.push(vec![-g, b]);
        self.cnf.clauses.push(vec![g, -a, -b]);
        self.gates.insert(key, g);
        g
    }

    fn or(&mut self, a: Lit, b: Lit) -> Lit {
        -self.and(-a, -b)
    }

    fn xor(&mut self, a: Lit, b: Lit) -> Lit {
        if a == FALSE {
            return b;
        }
        if b == FALSE {
            return a;
        }
        if a == TRUE {
            return -b;
        }
        if b == TRUE {
            return -a;
        }
        if a == b {
            return FALSE;
        }
        if a == -b {
            return TRUE;
        }
        // xor(-a, b) = -xor(a, b): cache on positive literals only.
        let flip = (a < 0) != (b < 0);
        let (pa, pb) = (a.abs(), b.abs());
        let key = Gate::Xor(pa.min(pb), pa.max(pb));
        let g = match self.gates.get(&key) {
            Some(&g) => g,
            None => {
                let g = self.fresh();
                self.cnf.clauses.push(vec![-g, pa, pb]);
                self.cnf.clauses.push(vec![-g, -pa, -pb]);
                self.cnf.clauses.push(vec![g, -pa, pb]);
                self.cnf.clauses.push(vec![g, pa, -pb]);
                self.gates.insert(key, g);
                g
            }
        };
        if flip {
            -g
        } else {
            g
        }
    }

    /// `s ? t : e`
    fn mux(&mut self, s: Lit, t: Lit, e: Lit) -> Lit {
        if s == TRUE || t == e {
            return t;
        }
        if s == FALSE {
            return e;
        }
        if t == TRUE {
            return self.or(s, e);
        }
        if t == FALSE {
            return self.and(-s, e);
        }
        if e == TRUE {
            return self.or(-s, t);
        }
        if e == FALSE {
            return self.and(s, t);
        }
        if t == -e {
            return -self.xor(s, t);
        }
        let key = Gate::Mux(s, t, e);
        if let Some(&g) = self.gates.get(&key) {
            return g;
        }
        let g = self.fresh();
        self.cnf.clauses.push(vec![-s, -t, g]);
        self.cnf.clauses.push(vec![-s, t, -g]);
        self.cnf.clauses.push(vec![s, -e, g]);
        self.cnf.clauses.push(vec![s, e, -g]);
        self.cnf.clauses.push(vec![-t, -e, g]);
        self.cnf.clauses.push(vec![t, e, -g]);
        self.gates.insert(key, g);
        g
    }

    fn or_all(&mut self, bits: &[Lit]) -> Lit {
        bits.iter().fold(FALSE, |acc, &b| self.or(acc, b))
    }

    fn and_all(&mut self, bits: &[Lit]) -> Lit {
        bits.iter().fold(TRUE, |acc, &b| self.and(acc, b))
    }

    fn mux_word(&mut self, s: Lit, t: &[Lit], e: &[Lit]) -> Vec<Lit> {
        t.iter().zip(e).map(|(&x, &y)| self.mux(s, x, y)).collect()
    }

    /// Ripple-carry sum of equal-width words with carry-in; returns (sum, carry-out).
    fn add(&mut self, a: &[Lit], b: &[Lit], mut carry: Lit) -> (Vec<Lit>, Lit) {
        let mut sum = Vec::with_capacity(a.len());
        for (&x, &y) in a.iter().zip(b) {
            let p = self.xor(x, y);
            sum.push(self.xor(p, carry));
            let g = self.and(x, y);
            let pc = self.and(p, carry);
            carry = self.or(g, pc);
        }
        (sum, carry)
    }

    fn sub(&mut self, a: &[Lit], b: &[Lit]) -> Vec<Lit> {
        let nb: Vec<Lit> = b.iter().map(|&x| -x).collect();
        self.add(a, &nb, TRUE).0
    }

    /// Unsigned `a < b`.
    fn ult(&mut self, a: &[Lit], b: &[Lit]) -> Lit {
        let mut lt = FALSE;
        for (&x, &y) in a.iter().zip(b) {
            let here = self.and(-x, y);
            let same = -self.xor(x, y);
            let keep = self.and(same, lt);
            lt = self.or(here, keep);
        }
        lt
    }

    fn eq(&mut self, a: &[Lit], b: &[Lit]) -> Lit {
        let bits: Vec<Lit> = a.iter().zip(b).map(|(&x, &y)| -self.xor(x, y)).collect();
        self.and_all(&bits)
    }

    fn mul(&mut self, a: &[Lit], b: &[Lit]) -> Vec<Lit> {
        let w = a.len();
        let mut acc = vec![FALSE; w];
        for (i, &bi) in b.iter().enumerate() {
            if bi == FALSE {
                continue;
            }
            let mut pp = vec![FALSE; w];
            for j in 0..w - i {
                pp[i + j] = self.and(a[j], bi);
            }
            acc = self.add(&acc, &pp, FALSE).0;
        }
        acc
    }

    /// Restoring division; a zero divisor forces both results to zero.
    fn divmod(&mut self, a: &[Lit], b: &[Lit]) -> (Vec<Lit>, Vec<Lit>) {
        let w = a.len();
        let mut b_ext = b.to_vec();
        b_ext.push(FALSE);
        let mut rem = vec![FALSE; w];
        let mut quo = vec![FALSE; w];
        for i in (0..w).rev() {
            // shifted = {rem, a[i]} at w + 1 bits.
            let mut shifted = Vec::with_capacity(w + 1);
            shifted.push(a[i]);
            shifted.extend_from_slice(&rem);
            let lt = self.ult(&shifted, &b_ext);
            let ge = -lt;
            let diff = self.sub(&shifted, &b_ext);
            let next = self.mux_word(ge, &diff[..w], &shifted[..w]);
            rem = next;
            quo[i] = ge;
        }
        let nonzero = self.or_all(b);
        let quo = quo.iter().map(|&q| self.and(nonzero, q)).collect();
        let rem = rem.iter().map(|&r| self.and(nonzero, r)).collect();
        (quo, rem)
    }

    fn shift(&mut self, a: &[Lit], amount: &[Lit], left: bool) -> Vec<Lit> {
        let w = a.len();
        let shift_const = |x: &[Lit], k: usize| -> Vec<Lit> {
            (0..w)
                .map(|i| {
                    let src = if left {
                        i.checked_sub(k)
                    } else {
                        i.checked_add(k)
                    };
                    match src {
                        Some(s) if s < w => x[s],
                        _ => FALSE,
                    }
                })
                .collect()
        };
        let mut x = a.to_vec();
        let mut overflow = FALSE;
        for (k, &bit) in amount.iter().enumerate() {
            let dist = 1usize.checked_shl(k as u32).filter(|&d| d < w);
            match dist {
                Some(d) => {
                    let shifted = shift_const(&x, d);
                    x = self.mux_word(bit, &shifted, &x);
                }
                None => overflow = self.or(overflow, bit),
            }
        }
        x.iter().map(|&b| self.and(-overflow, b)).collect()
    }

    fn var_bits(&mut self, var: VarId, width: u32) -> Vec<Lit> {
        (0..width)
            .map(|i| {
                let v = self.fresh();
                self.cnf.bit_map.insert((var, i), v as u32);
                v
            })
            .collect()
    }

    /// Bits of `root`, least significant first. Iterative post-order so
    /// deep DAGs do not exhaust the call stack.
    fn word(&mut self, root: NodeId) -> Vec<Lit> {
        let mut stack = vec![(root, false)];
        while let Some((id, expanded)) = stack.pop() {
            if self.words.contains_key(&id) {
                continue;
            }
            let node = self.pool.node(id);
            if !expanded {
                stack.push((id, true));
                for op in node.operands() {
                    if !self.words.contains_key(&op) {
                        stack.push((op, false));
                    }
                }
                continue;
            }
            let bits = self.encode(id);
            self.words.insert(id, bits);
        }
        self.words[&root].clone()
    }

    fn encode(&mut self, id: NodeId) -> Vec<Lit> {
        let node = self.pool.node(id);
        let w = node.width as usize;
        match node.kind {
            NodeKind::Const(v) => (0..w)
                .map(|i| if (v >> i) & 1 == 1 { TRUE } else { FALSE })
                .collect(),
            NodeKind::Var(var) => self.var_bits(var, node.width),
            NodeKind::Unary(op, a) => {
                let a = self.words[&a].clone();
                match op {
                    UnaryOp::Not => a.iter().map(|&x| -x).collect(),
                    UnaryOp::LogNot => vec![-self.or_all(&a)],
                    UnaryOp::RedOr => vec![self.or_all(&a)],
                    UnaryOp::RedAnd => vec![self.and_all(&a)],
                    UnaryOp::RedXor => vec![a.iter().fold(FALSE, |acc, &b| self.xor(acc, b))],
                }
            }
            NodeKind::Binary(op, a, b) => {
                let a = self.words[&a].clone();
                let b = self.words[&b].clone();
                self.binary(op, &a, &b)
            }
            NodeKind::Ite(c, t, e) => {
                let c = self.words[&c][0];
                let t = self.words[&t].clone();
                let e = self.words[&e].clone();
                self.mux_word(c, &t, &e)
            }
            NodeKind::Extract { hi, lo, arg } => {
                self.words[&arg][lo as usize..=hi as usize].to_vec()
            }
            NodeKind::ZeroExtend(arg) => {
                let mut bits = self.words[&arg].clone();
                bits.resize(w, FALSE);
                bits
            }
        }
    }

    fn binary(&mut self, op: BinaryOp, a: &[Lit], b: &[Lit]) -> Vec<Lit> {
        use BinaryOp::*;
        match op {
            And => a.iter().zip(b).map(|(&x, &y)| self.and(x, y)).collect(),
            Or => a.iter().zip(b).map(|(&x, &y)| self.or(x, y)).collect(),
            Xor => a.iter().zip(b).map(|(&x, &y)| self.xor(x, y)).collect(),
            Add => self.add(a, b, FALSE).0,
            Sub => self.sub(a, b),
            Mul => self.mul(a, b),
            Div => self.divmod(a, b).0,
            Mod => self.divmod(a, b).1,
            Shl => self.shift(a, b, true),
            Shr => self.shift(a, b, false),
            Eq => vec![self.eq(a, b)],
            Ne => vec![-self.eq(a, b)],
            Lt => vec![self.ult(a, b)],
            Gt => vec![self.ult(b, a)],
            Le => vec![-self.ult(b, a)],
            Ge => vec![-self.ult(a, b)],
            LogAnd => {
                let x = self.or_all(a);
                let y = self.or_all(b);
                vec![self.and(x, y)]
            }
            LogOr => {
                let x = self.or_all(a);
                let y = self.or_all(b);
                vec![self.or(x, y)]
            }
            Concat => {
                let mut bits = b.to_vec();
                bits.extend_from_slice(a);
                bits
            }
        }
    }
}
