// SPDX-License-Identifier: Apache-2.0

//! Oracles shared by the integration tests. Nothing here calls back into
//! the code under test to compute an expected value: terms are evaluated by
//! a local interpreter and branch outcomes come from exhaustive replay.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rtlsym::bv::{BinaryOp, BvPool, NodeId, NodeKind, UnaryOp, VarId};
use rtlsym::elab::{BranchId, RtlDesign, SignalId};
use rtlsym::flow::{self, HarnessOverrides};
use rtlsym::replay::simulate;
use rtlsym::solver::{check, SolveResult, SolverConfig};
use rtlsym::symexec::{
    Executor, InputMode, InputPlan, InputRole, PathState, PathStatus, RunOptions, RunOutput,
    TestCase,
};

/// Every corpus design; each has `<name>.v` and `<name>.harness`.
pub const CORPUS: &[&str] = &[
    "mux",
    "four_paths",
    "counter",
    "fsm",
    "alu",
    "divmod",
    "shifter",
    "slices",
    "fpu_like",
];

/// Designs small enough for exhaustive enumeration of their inputs.
pub const SMALL: &[&str] = &[
    "mux",
    "four_paths",
    "counter",
    "fsm",
    "alu",
    "divmod",
    "shifter",
    "slices",
];

pub fn corpus_path(file: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("corpus")
        .join(file)
}

pub fn fixture_path(file: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("fixtures")
        .join(file)
}

pub fn load(name: &str) -> (RtlDesign, InputPlan) {
    let d = flow::load_design(&corpus_path(&format!("{name}.v"))).unwrap();
    let plan = flow::load_plan(
        &corpus_path(&format!("{name}.harness")),
        &d,
        &HarnessOverrides::default(),
    )
    .unwrap();
    (d, plan)
}

pub fn generate(d: &RtlDesign, plan: &InputPlan, jobs: usize) -> RunOutput {
    let opts = RunOptions {
        solver: SolverConfig::default(),
        jobs,
    };
    flow::testgen(d, plan, &opts).unwrap()
}

pub type Trace = Vec<(BranchId, u32)>;

/// One free input slot: a symbolic signal held for the whole run, or a
/// per-cycle copy of a fresh signal.
#[derive(Clone, Copy, Debug)]
struct Slot {
    signal: SignalId,
    width: u32,
    cycle: Option<u32>,
}

fn slots(d: &RtlDesign, plan: &InputPlan) -> Vec<Slot> {
    let mut out = Vec::new();
    for (s, role) in &plan.roles {
        if let InputRole::Symbolic(mode) = role {
            let width = d.signal(*s).width;
            match mode {
                InputMode::Hold => out.push(Slot {
                    signal: *s,
                    width,
                    cycle: None,
                }),
                InputMode::FreshPerCycle => {
                    for k in 0..plan.max_cycles {
                        out.push(Slot {
                            signal: *s,
                            width,
                            cycle: Some(k),
                        })
                    }
                }
            }
        }
    }
    out
}

pub fn symbolic_bits(d: &RtlDesign, plan: &InputPlan) -> u32 {
    slots(d, plan).iter().map(|s| s.width).sum()
}

/// Concrete input rows for cycle-by-cycle replay given one value per slot.
fn rows(plan: &InputPlan, slots: &[Slot], values: &[u128]) -> Vec<Vec<(SignalId, u128)>> {
    (0..plan.max_cycles)
        .map(|k| {
            plan.roles
                .iter()
                .filter_map(|(s, role)| {
                    let v = match role {
                        InputRole::Clock => return None,
                        InputRole::Reset {
                            active,
                            hold_cycles,
                        } => {
                            if k < *hold_cycles {
                                *active
                            } else {
                                1 - active
                            }
                        }
                        InputRole::Fixed(v) => *v,
                        InputRole::Symbolic(_) => {
                            let i = slots
                                .iter()
                                .position(|sl| {
                                    sl.signal == *s && (sl.cycle.is_none() || sl.cycle == Some(k))
                                })
                                .expect("slot for every symbolic input");
                            values[i]
                        }
                    };
                    Some((*s, v))
                })
                .collect()
        })
        .collect()
}

/// Branch-outcome sequences over every concrete input sequence the harness
/// allows, by replaying each one.
pub fn enumerate_traces(d: &RtlDesign, plan: &InputPlan) -> BTreeSet<Trace> {
    let sl = slots(d, plan);
    let bits = symbolic_bits(d, plan);
    assert!(bits <= 16, "enumeration over {bits} bits");
    let mut out = BTreeSet::new();
    for n in 0u128..(1u128 << bits) {
        let mut rest = n;
        let values: Vec<u128> = sl
            .iter()
            .map(|s| {
                let v = rest & ((1u128 << s.width) - 1);
                rest >>= s.width;
                v
            })
            .collect();
        let t = TestCase {
            id: 0,
            vectors: rows(plan, &sl, &values),
            expected_trace: Vec::new(),
        };
        out.insert(simulate(d, plan, &t).unwrap().trace);
    }
    out
}

/// The harness with every symbolic input pinned to a random value.
pub fn concretize(d: &RtlDesign, plan: &InputPlan, rng: &mut ChaCha8Rng) -> InputPlan {
    let mut p = plan.clone();
    for (s, role) in &mut p.roles {
        if let InputRole::Symbolic(_) = role {
            let w = d.signal(*s).width;
            *role = InputRole::Fixed(rng.gen::<u128>() & rtlsym::bv::mask(w));
        }
    }
    p
}

pub fn const_store(pool: &BvPool, st: &PathState) -> Vec<u128> {
    st.store
        .iter()
        .map(|&n| {
            pool.as_const(n)
                .expect("concrete run keeps every signal constant")
        })
        .collect()
}

/// Runs the executor on a fully concrete harness and checks each cycle's
/// settled and committed values against replay, bit for bit.
pub fn concrete_agreement(d: &RtlDesign, plan: &InputPlan) -> Result<(), String> {
    let pool = BvPool::new();
    let ex = Executor::new(d, plan, &pool, SolverConfig::default());
    let mut st = ex.init_state().map_err(|e| e.to_string())?;
    let mut vectors = Vec::new();
    let mut settled = Vec::new();
    let mut committed = Vec::new();
    while st.status == PathStatus::Active {
        let mut s = ex.settle_comb(st.clone()).map_err(|e| e.to_string())?;
        if s.len() != 1 {
            return Err(format!("concrete settle produced {} states", s.len()));
        }
        settled.push(const_store(&pool, &s.pop().unwrap()));
        let mut next = ex.step_cycle(st).map_err(|e| e.to_string())?;
        if next.len() != 1 {
            return Err(format!("concrete cycle produced {} states", next.len()));
        }
        st = next.pop().unwrap();
        committed.push(const_store(&pool, &st));
    }
    vectors.extend(ex.vectors(&st).map_err(|e| e.to_string())?);
    let t = TestCase {
        id: 0,
        vectors,
        expected_trace: st.trace.clone(),
    };
    let sim = simulate(d, plan, &t).map_err(|e| e.to_string())?;
    if sim.trace != st.trace {
        return Err("branch traces differ".into());
    }
    for k in 0..settled.len() {
        for (i, sig) in d.signals.iter().enumerate() {
            if settled[k][i] != sim.settled[k][i] {
                return Err(format!(
                    "cycle {k} settled `{}`: symbolic {:#x}, replay {:#x}",
                    sig.name, settled[k][i], sim.settled[k][i]
                ));
            }
            if committed[k][i] != sim.committed[k][i] {
                return Err(format!(
                    "cycle {k} committed `{}`: symbolic {:#x}, replay {:#x}",
                    sig.name, committed[k][i], sim.committed[k][i]
                ));
            }
        }
    }
    Ok(())
}

/// Every complete path state, explored without budgets.
pub fn all_paths(ex: &Executor<'_>) -> Vec<PathState> {
    let mut done = Vec::new();
    let mut work = vec![ex.init_state().unwrap()];
    while let Some(st) = work.pop() {
        if st.status == PathStatus::Complete {
            done.push(st);
        } else {
            work.extend(ex.step_cycle(st).unwrap());
        }
    }
    done
}

/// Checks that no two path conditions can hold together.
pub fn pairwise_disjoint(pool: &BvPool, paths: &[PathState]) -> Result<(), String> {
    for i in 0..paths.len() {
        for j in i + 1..paths.len() {
            let mut both = paths[i].path_condition.clone();
            both.extend(&paths[j].path_condition);
            match check(pool, &both, &SolverConfig::default()) {
                Ok(SolveResult::Unsat) => {}
                other => return Err(format!("paths {i} and {j}: {other:?}")),
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Random bitvector terms with a local reference semantics.

#[derive(Clone, Debug)]
pub enum Term {
    Var(usize),
    Const(u32, u128),
    Un(UnaryOp, Box<Term>),
    Bin(BinaryOp, Box<Term>, Box<Term>),
    Ite(Box<Term>, Box<Term>, Box<Term>),
    Ext(u32, u32, Box<Term>),
    Zext(u32, Box<Term>),
}

fn m(w: u32) -> u128 {
    if w >= 128 {
        u128::MAX
    } else {
        (1 << w) - 1
    }
}

impl Term {
    pub fn width(&self, vars: &[u32]) -> u32 {
        match self {
            Term::Var(i) => vars[*i],
            Term::Const(w, _) => *w,
            Term::Un(UnaryOp::Not, a) => a.width(vars),
            Term::Un(..) => 1,
            Term::Bin(op, a, b) => match op {
                BinaryOp::Concat => a.width(vars) + b.width(vars),
                BinaryOp::Eq
                | BinaryOp::Ne
                | BinaryOp::Lt
                | BinaryOp::Le
                | BinaryOp::Gt
                | BinaryOp::Ge
                | BinaryOp::LogAnd
                | BinaryOp::LogOr => 1,
                _ => a.width(vars),
            },
            Term::Ite(_, t, _) => t.width(vars),
            Term::Ext(hi, lo, _) => hi - lo + 1,
            Term::Zext(w, _) => *w,
        }
    }

    /// Reference evaluation on plain integers.
    pub fn eval(&self, vars: &[u32], vals: &[u128]) -> u128 {
        match self {
            Term::Var(i) => vals[*i],
            Term::Const(_, v) => *v,
            Term::Un(op, a) => {
                let w = a.width(vars);
                let x = a.eval(vars, vals);
                match op {
                    UnaryOp::Not => x ^ m(w),
                    UnaryOp::LogNot => u128::from(x == 0),
                    UnaryOp::RedAnd => u128::from(x == m(w)),
                    UnaryOp::RedOr => u128::from(x != 0),
                    UnaryOp::RedXor => {
                        let mut p = 0;
                        for i in 0..w {
                            p ^= (x >> i) & 1;
                        }
                        p
                    }
                }
            }
            Term::Bin(op, a, b) => {
                let w = a.width(vars);
                let wb = b.width(vars);
                let x = a.eval(vars, vals);
                let y = b.eval(vars, vals);
                match op {
                    BinaryOp::Add => (x + y) % (m(w) + 1),
                    BinaryOp::Sub => (x + (m(w) + 1) - y) % (m(w) + 1),
                    BinaryOp::Mul => (x * y) % (m(w) + 1),
                    BinaryOp::Div => x.checked_div(y).unwrap_or(0),
                    BinaryOp::Mod => {
                        if y == 0 {
                            0
                        } else {
                            x % y
                        }
                    }
                    BinaryOp::And => x & y,
                    BinaryOp::Or => x | y,
                    BinaryOp::Xor => x ^ y,
                    BinaryOp::Shl => {
                        let mut r = x;
                        for _ in 0..y.min(u128::from(w)) {
                            r = (r * 2) & m(w);
                        }
                        r
                    }
                    BinaryOp::Shr => {
                        let mut r = x;
                        for _ in 0..y.min(u128::from(w)) {
                            r /= 2;
                        }
                        r
                    }
                    BinaryOp::Eq => u128::from(x == y),
                    BinaryOp::Ne => u128::from(x != y),
                    BinaryOp::Lt => u128::from(x < y),
                    BinaryOp::Le => u128::from(x <= y),
                    BinaryOp::Gt => u128::from(x > y),
                    BinaryOp::Ge => u128::from(x >= y),
                    BinaryOp::LogAnd => u128::from(x != 0 && y != 0),
                    BinaryOp::LogOr => u128::from(x != 0 || y != 0),
                    BinaryOp::Concat => x * (1u128 << wb) + y,
                }
            }
            Term::Ite(c, t, e) => {
                if c.eval(vars, vals) == 1 {
                    t.eval(vars, vals)
                } else {
                    e.eval(vars, vals)
                }
            }
            Term::Ext(hi, lo, a) => (a.eval(vars, vals) / (1u128 << lo)) % (1u128 << (hi - lo + 1)),
            Term::Zext(_, a) => a.eval(vars, vals),
        }
    }

    pub fn build(&self, pool: &BvPool, vars: &[NodeId]) -> NodeId {
        match self {
            Term::Var(i) => vars[*i],
            Term::Const(w, v) => pool.mk_const(*w, *v).unwrap(),
            Term::Un(op, a) => {
                let a = a.build(pool, vars);
                pool.unary(*op, a).unwrap()
            }
            Term::Bin(op, a, b) => {
                let a = a.build(pool, vars);
                let b = b.build(pool, vars);
                pool.binary(*op, a, b).unwrap()
            }
            Term::Ite(c, t, e) => {
                let c = c.build(pool, vars);
                let t = t.build(pool, vars);
                let e = e.build(pool, vars);
                pool.ite(c, t, e).unwrap()
            }
            Term::Ext(hi, lo, a) => {
                let a = a.build(pool, vars);
                pool.extract(*hi, *lo, a).unwrap()
            }
            Term::Zext(w, a) => {
                let a = a.build(pool, vars);
                pool.zero_extend(a, *w).unwrap()
            }
        }
    }
}

const ARITH: &[BinaryOp] = &[
    BinaryOp::Add,
    BinaryOp::Sub,
    BinaryOp::Mul,
    BinaryOp::Div,
    BinaryOp::Mod,
    BinaryOp::And,
    BinaryOp::Or,
    BinaryOp::Xor,
];
const CMP: &[BinaryOp] = &[
    BinaryOp::Eq,
    BinaryOp::Ne,
    BinaryOp::Lt,
    BinaryOp::Le,
    BinaryOp::Gt,
    BinaryOp::Ge,
];
const TO_BIT: &[UnaryOp] = &[
    UnaryOp::LogNot,
    UnaryOp::RedAnd,
    UnaryOp::RedOr,
    UnaryOp::RedXor,
];

/// Generates terms of a requested width over variables of fixed widths.
pub struct TermGen<'a> {
    pub rng: &'a mut ChaCha8Rng,
    pub vars: &'a [u32],
    /// Upper bound on intermediate widths.
    pub max_width: u32,
}

impl TermGen<'_> {
    fn leaf(&mut self, w: u32) -> Term {
        if self.rng.gen_bool(0.25) {
            let v = self.rng.gen::<u128>() & m(w);
            // Bias toward boundary constants.
            let v = match self.rng.gen_range(0..4) {
                0 => 0,
                1 => m(w),
                2 => 1 & m(w),
                _ => v,
            };
            return Term::Const(w, v);
        }
        let i = self.rng.gen_range(0..self.vars.len());
        let vw = self.vars[i];
        match vw.cmp(&w) {
            std::cmp::Ordering::Equal => Term::Var(i),
            std::cmp::Ordering::Less => Term::Zext(w, Box::new(Term::Var(i))),
            std::cmp::Ordering::Greater => {
                let lo = self.rng.gen_range(0..=vw - w);
                Term::Ext(lo + w - 1, lo, Box::new(Term::Var(i)))
            }
        }
    }

    fn any_width(&mut self) -> u32 {
        self.rng.gen_range(1..=self.max_width)
    }

    pub fn term(&mut self, w: u32, depth: u32) -> Term {
        if depth == 0 || self.rng.gen_bool(0.2) {
            return self.leaf(w);
        }
        let d = depth - 1;
        let choice = self.rng.gen_range(0..10);
        match choice {
            0..=2 => {
                let op = ARITH[self.rng.gen_range(0..ARITH.len())];
                Term::Bin(op, Box::new(self.term(w, d)), Box::new(self.term(w, d)))
            }
            3 => {
                let op = if self.rng.gen_bool(0.5) {
                    BinaryOp::Shl
                } else {
                    BinaryOp::Shr
                };
                let ws = self.rng.gen_range(1..=4);
                Term::Bin(op, Box::new(self.term(w, d)), Box::new(self.term(ws, d)))
            }
            4 if w == 1 => {
                let op = CMP[self.rng.gen_range(0..CMP.len())];
                let wo = self.any_width();
                Term::Bin(op, Box::new(self.term(wo, d)), Box::new(self.term(wo, d)))
            }
            5 if w == 1 => {
                let op = if self.rng.gen_bool(0.5) {
                    BinaryOp::LogAnd
                } else {
                    BinaryOp::LogOr
                };
                let (wa, wb) = (self.any_width(), self.any_width());
                Term::Bin(op, Box::new(self.term(wa, d)), Box::new(self.term(wb, d)))
            }
            6 if w == 1 => {
                let op = TO_BIT[self.rng.gen_range(0..TO_BIT.len())];
                let wo = self.any_width();
                Term::Un(op, Box::new(self.term(wo, d)))
            }
            4..=6 => Term::Un(UnaryOp::Not, Box::new(self.term(w, d))),
            7 => Term::Ite(
                Box::new(self.term(1, d)),
                Box::new(self.term(w, d)),
                Box::new(self.term(w, d)),
            ),
            8 if w >= 2 => {
                let wa = self.rng.gen_range(1..w);
                Term::Bin(
                    BinaryOp::Concat,
                    Box::new(self.term(wa, d)),
                    Box::new(self.term(w - wa, d)),
                )
            }
            8 if w < self.max_width => {
                let wi = self.rng.gen_range(w + 1..=self.max_width);
                let lo = self.rng.gen_range(0..=wi - w);
                Term::Ext(lo + w - 1, lo, Box::new(self.term(wi, d)))
            }
            _ if w > 1 => {
                let wi = self.rng.gen_range(1..w);
                Term::Zext(w, Box::new(self.term(wi, d)))
            }
            _ => self.leaf(w),
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn var_id(pool: &BvPool, node: NodeId) -> VarId {
    match pool.node(node).kind {
        NodeKind::Var(v) => v,
        other => panic!("not a variable: {other:?}"),
    }
}

/// Calls `f` on every assignment to variables of the given widths, stopping
/// early when it returns true. Returns whether any call did.
pub fn any_assignment(widths: &[u32], mut f: impl FnMut(&[u128]) -> bool) -> bool {
    let total: u32 = widths.iter().sum();
    let mut vals = vec![0u128; widths.len()];
    for n in 0u128..(1u128 << total) {
        let mut rest = n;
        for (v, w) in vals.iter_mut().zip(widths) {
            *v = rest & m(*w);
            rest >>= w;
        }
        if f(&vals) {
            return true;
        }
    }
    false
}

/// One solver fuzz case: random constraints over one or two variables of at
/// most eight bits, judged against enumeration. Returns whether it was sat.
pub fn solver_fuzz_case(seed: u64) -> Result<bool, String> {
    let mut r = rng(seed);
    let nvars = r.gen_range(1..=2);
    let widths: Vec<u32> = (0..nvars).map(|_| r.gen_range(1..=8)).collect();
    let ncons = r.gen_range(1..=3);
    let depth = r.gen_range(1..=3);
    let terms: Vec<Term> = {
        let mut g = TermGen {
            rng: &mut r,
            vars: &widths,
            max_width: 8,
        };
        (0..ncons).map(|_| g.term(1, depth)).collect()
    };
    let pool = BvPool::new();
    let names = ["x", "y"];
    let var_nodes: Vec<NodeId> = widths
        .iter()
        .zip(names)
        .map(|(w, n)| pool.mk_var(n, *w, 0).unwrap())
        .collect();
    let cons: Vec<NodeId> = terms.iter().map(|t| t.build(&pool, &var_nodes)).collect();
    let expect_sat = any_assignment(&widths, |v| terms.iter().all(|t| t.eval(&widths, v) == 1));
    match check(&pool, &cons, &SolverConfig::default()) {
        Ok(SolveResult::Sat(model)) => {
            if !expect_sat {
                return Err(format!(
                    "seed {seed}: solver sat, enumeration unsat: {terms:?}"
                ));
            }
            let vals: Vec<u128> = var_nodes
                .iter()
                .map(|&n| model.get(var_id(&pool, n)).unwrap_or(0))
                .collect();
            for (i, t) in terms.iter().enumerate() {
                if t.eval(&widths, &vals) != 1 {
                    return Err(format!(
                        "seed {seed}: model {vals:?} falsifies constraint {i}: {t:?}"
                    ));
                }
            }
            Ok(true)
        }
        Ok(SolveResult::Unsat) => {
            if expect_sat {
                Err(format!(
                    "seed {seed}: solver unsat, enumeration sat: {terms:?}"
                ))
            } else {
                Ok(false)
            }
        }
        other => Err(format!("seed {seed}: unexpected {other:?}")),
    }
}

/// Simplified and unsimplified construction of a random term agree with the
/// reference semantics: on every assignment when `samples` is `None`, else
/// on that many random ones. Widths stay at or below 32 so the reference
/// arithmetic cannot overflow.
pub fn simplifier_case(seed: u64, max_width: u32, samples: Option<usize>) -> Result<(), String> {
    assert!(max_width <= 32);
    let mut r = rng(seed);
    let nvars = r.gen_range(1..=2);
    let widths: Vec<u32> = (0..nvars).map(|_| r.gen_range(1..=max_width)).collect();
    let w = r.gen_range(1..=max_width);
    let depth = r.gen_range(1..=4);
    let t = TermGen {
        rng: &mut r,
        vars: &widths,
        max_width,
    }
    .term(w, depth);
    let fast = BvPool::new();
    let raw = BvPool::without_simplification();
    let names = ["p", "q"];
    let fv: Vec<NodeId> = widths
        .iter()
        .zip(names)
        .map(|(w, n)| fast.mk_var(n, *w, 0).unwrap())
        .collect();
    let rv: Vec<NodeId> = widths
        .iter()
        .zip(names)
        .map(|(w, n)| raw.mk_var(n, *w, 0).unwrap())
        .collect();
    let fnode = t.build(&fast, &fv);
    let rnode = t.build(&raw, &rv);
    if fast.width(fnode) != w || raw.width(rnode) != w {
        return Err(format!("seed {seed}: width changed for {t:?}"));
    }
    let mut failure = None;
    let mut probe = |vals: &[u128]| {
        let mut fa = rtlsym::bv::Assignment::new();
        let mut ra = rtlsym::bv::Assignment::new();
        for i in 0..vals.len() {
            fa.set(var_id(&fast, fv[i]), vals[i]);
            ra.set(var_id(&raw, rv[i]), vals[i]);
        }
        let want = t.eval(&widths, vals);
        let got_fast = rtlsym::bv::eval_with_default(&fast, fnode, &fa);
        let got_raw = rtlsym::bv::eval_with_default(&raw, rnode, &ra);
        if got_fast != want || got_raw != want {
            failure = Some(format!(
                "seed {seed}: at {vals:?} want {want:#x}, simplified {got_fast:#x}, raw {got_raw:#x}: {t:?}"
            ));
            return true;
        }
        false
    };
    match samples {
        None => {
            any_assignment(&widths, &mut probe);
        }
        Some(n) => {
            for _ in 0..n {
                let vals: Vec<u128> = widths.iter().map(|w| r.gen::<u128>() & m(*w)).collect();
                if probe(&vals) {
                    break;
                }
            }
        }
    }
    failure.map_or(Ok(()), Err)
}

// ---------------------------------------------------------------------------
// Random small designs: one combinational block with nested branches and
// one clocked counter, over a held 3-bit input and a fresh 2-bit input.

const CONDS: &[&str] = &[
    "a > 3'd{k3}",
    "a[{i3}]",
    "b == 2'd{k2}",
    "(a ^ {1'b0, b}) != 3'd{k3}",
    "st == 2'd{k2}",
    "a < b",
    "(a + b) == 3'd{k3}",
    "(a * b) > 3'd{k3}",
    "!(b[{i2}])",
    "(a % 3'd3) == 3'd{k3}",
];

const RHS: &[&str] = &[
    "a + b",
    "{b, a[1:0]}",
    "4'd{k4}",
    "a - b",
    "st + a",
    "a >> b",
];

/// A random entry of `list` with its placeholders filled.
fn pick(r: &mut ChaCha8Rng, list: &[&str]) -> String {
    let pat = list[r.gen_range(0..list.len())];
    fill(r, pat)
}

fn fill(r: &mut ChaCha8Rng, pat: &str) -> String {
    pat.replace("{k2}", &r.gen_range(0..4).to_string())
        .replace("{k3}", &r.gen_range(0..8).to_string())
        .replace("{k4}", &r.gen_range(0..16).to_string())
        .replace("{i2}", &r.gen_range(0..2).to_string())
        .replace("{i3}", &r.gen_range(0..3).to_string())
}

fn random_stmts(r: &mut ChaCha8Rng, depth: u32, indent: usize, out: &mut String) {
    let n = r.gen_range(1..=2);
    let pad = " ".repeat(indent);
    for _ in 0..n {
        let kind = if depth == 0 { 0 } else { r.gen_range(0..4) };
        match kind {
            0 | 1 => {
                if r.gen_bool(0.5) {
                    let rhs = pick(r, RHS);
                    out.push_str(&format!("{pad}y = {rhs};\n"));
                } else {
                    let c = pick(r, CONDS);
                    out.push_str(&format!("{pad}z = {c};\n"));
                }
            }
            2 => {
                let c = pick(r, CONDS);
                out.push_str(&format!("{pad}if ({c}) begin\n"));
                random_stmts(r, depth - 1, indent + 2, out);
                if r.gen_bool(0.6) {
                    out.push_str(&format!("{pad}end else begin\n"));
                    random_stmts(r, depth - 1, indent + 2, out);
                }
                out.push_str(&format!("{pad}end\n"));
            }
            _ => {
                out.push_str(&format!("{pad}case (b)\n"));
                let first = r.gen_range(0..2);
                for label in [first, first + 2] {
                    out.push_str(&format!("{pad}  2'd{label}: begin\n"));
                    random_stmts(r, depth - 1, indent + 4, out);
                    out.push_str(&format!("{pad}  end\n"));
                }
                if r.gen_bool(0.5) {
                    out.push_str(&format!("{pad}  default: begin\n"));
                    random_stmts(r, depth - 1, indent + 4, out);
                    out.push_str(&format!("{pad}  end\n"));
                }
                out.push_str(&format!("{pad}endcase\n"));
            }
        }
    }
}

/// Verilog source and harness text for a random design named `rnd`.
pub fn random_design(seed: u64) -> (String, String) {
    let mut r = rng(seed);
    let mut comb = String::new();
    random_stmts(&mut r, 3, 4, &mut comb);
    let c1 = pick(&mut r, CONDS).replace("st", "y[1:0]");
    let c2 = pick(&mut r, CONDS);
    let src = format!(
        "module rnd (\n  input clk,\n  input [2:0] a,\n  input [1:0] b,\n  \
         output reg [3:0] y,\n  output reg z\n);\n  reg [1:0] st;\n\n  \
         always @* begin\n    y = 4'd0;\n    z = 1'b0;\n{comb}  end\n\n  \
         always @(posedge clk) begin\n    if ({c1})\n      st <= st + 2'd1;\n    \
         else if ({c2})\n      st <= 2'd0;\n  end\nendmodule\n"
    );
    let harness = "top = \"rnd\"\nmax_cycles = 2\nclock = \"clk\"\n\n\
                   [[symbolic]]\nsignal = \"a\"\nbits = 3\n\n\
                   [[symbolic]]\nsignal = \"b\"\nbits = 2\nmode = \"fresh_per_cycle\"\n"
        .to_string();
    (src, harness)
}

pub fn load_random(seed: u64) -> (RtlDesign, InputPlan) {
    let (src, harness) = random_design(seed);
    let d = flow::design_from_source("rnd.v", &src)
        .unwrap_or_else(|e| panic!("seed {seed}: {e}\n{src}"));
    let plan = flow::plan_from_text(&harness, &d, &HarnessOverrides::default()).unwrap();
    (d, plan)
}
