// SPDX-License-Identifier: Apache-2.0

//! Cycle-bounded symbolic execution of an elaborated design.
//!
//! A path state holds one bitvector term per signal. Each cycle binds the
//! harness inputs, runs the combinational processes once in dependency
//! order, then runs the clocked processes against the pre-edge store and
//! commits their writes together. A branch whose condition folds to a
//! constant is followed without forking; otherwise every feasible arm
//! becomes a child state.
//!
//! Each state carries a model of its path condition. A guard that the
//! model already satisfies needs no solver call; other guards are checked
//! together with only the path constraints that share variables with them.
//!
//! Exploration is depth-first with arm 0 first. With several workers the
//! tree is first expanded breadth-wise into a frontier, subtrees are
//! explored independently into event streams, and the streams are replayed
//! in frontier order under the global budgets, which reproduces the
//! single-worker result exactly.

mod harness;
mod suite;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use crate::bv::{self, eval_with_default, Assignment, BvError, BvPool, NodeId, NodeKind, VarId};
use crate::elab::{BranchId, Expr, ExprKind, LValue, RtlDesign, SignalId, Stmt};
use crate::solver::{self, SolveResult, SolverConfig, SolverError};

pub use harness::{
    validate, Budgets, FixedSpec, Harness, HarnessError, InputMode, InputPlan, InputRole,
    ResetSpec, SymbolicSpec, ValueSpec,
};
pub use suite::{read_suite, write_suite, TestCase, TestSuite, VectorError};

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum PathStatus {
    Active,
    Complete,
}

#[derive(Clone, Debug)]
pub struct PathState {
    /// One term per signal, indexed by `SignalId`.
    pub store: Vec<NodeId>,
    /// Width-1 terms, none of them constant.
    pub path_condition: Vec<NodeId>,
    pc_vars: Vec<Vec<VarId>>,
    /// Satisfies every path constraint; absent variables read as 0.
    pub model: Assignment,
    pub cycle: u32,
    pub trace: Vec<(BranchId, u32)>,
    pub status: PathStatus,
    /// Pending nonblocking writes during the clocked phase.
    next: Option<Vec<NodeId>>,
}

#[derive(Debug, Error)]
pub enum ExecError {
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("internal bitvector error: {0}")]
    Bv(#[from] BvError),
    #[error("cannot start worker threads: {0}")]
    ThreadPool(String),
    /// A worker-local budget tripped inside a step.
    #[error("exploration budget reached")]
    BudgetStop,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Event {
    SolverCall,
    Infeasible,
    Killed,
    Complete {
        vectors: Vec<Vec<(SignalId, u128)>>,
        trace: Vec<(BranchId, u32)>,
    },
    /// The producer stopped early; everything after is unexplored.
    Truncated,
}

/// Collects the events of one exploration context and enforces its local caps.
struct Sink {
    events: Vec<Event>,
    calls: u64,
    completes: u64,
    call_cap: u64,
    complete_cap: u64,
    deadline: Option<Instant>,
}

impl Sink {
    fn unlimited() -> Self {
        Sink {
            events: Vec::new(),
            calls: 0,
            completes: 0,
            call_cap: u64::MAX,
            complete_cap: u64::MAX,
            deadline: None,
        }
    }

    fn solver_call(&mut self) -> Result<(), ExecError> {
        if self.calls >= self.call_cap {
            return Err(ExecError::BudgetStop);
        }
        self.calls += 1;
        self.events.push(Event::SolverCall);
        Ok(())
    }

    fn timed_out(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }
}

enum Query {
    /// Feasible; `Some` carries an updated model.
    Sat(Option<Assignment>),
    Unsat,
    Unknown,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExplorationStats {
    pub tests: u64,
    pub vectors: u64,
    pub paths_completed: u64,
    pub paths_infeasible: u64,
    pub paths_killed: u64,
    pub solver_calls: u64,
    pub budget_exhausted: bool,
    pub elapsed: Duration,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub suite: TestSuite,
    pub stats: ExplorationStats,
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub solver: SolverConfig,
    /// Worker count; 0 and 1 both mean a single worker.
    pub jobs: usize,
}

pub struct Executor<'a> {
    pub design: &'a RtlDesign,
    pub plan: &'a InputPlan,
    pub pool: &'a BvPool,
    pub solver: SolverConfig,
}

impl<'a> Executor<'a> {
    pub fn new(
        design: &'a RtlDesign,
        plan: &'a InputPlan,
        pool: &'a BvPool,
        solver: SolverConfig,
    ) -> Self {
        Executor {
            design,
            plan,
            pool,
            solver,
        }
    }

    /// Internal and output signals start at zero; inputs take their
    /// cycle-0 harness binding.
    pub fn init_state(&self) -> Result<PathState, ExecError> {
        let store = self
            .design
            .signals
            .iter()
            .map(|s| self.pool.zero(s.width))
            .collect();
        let mut st = PathState {
            store,
            path_condition: Vec::new(),
            pc_vars: Vec::new(),
            model: Assignment::new(),
            cycle: 0,
            trace: Vec::new(),
            status: PathStatus::Active,
            next: None,
        };
        self.bind_inputs(&mut st, 0)?;
        Ok(st)
    }

    fn input_var(&self, s: SignalId, mode: InputMode, cycle: u32) -> Result<NodeId, BvError> {
        let sig = self.design.signal(s);
        let tag = match mode {
            InputMode::Hold => 0,
            InputMode::FreshPerCycle => cycle,
        };
        self.pool.mk_var(&sig.name, sig.width, tag)
    }

    fn bind_inputs(&self, st: &mut PathState, cycle: u32) -> Result<(), BvError> {
        for (s, role) in &self.plan.roles {
            let w = self.design.signal(*s).width;
            st.store[s.index()] = match role {
                InputRole::Clock => self.pool.zero(w),
                InputRole::Reset {
                    active,
                    hold_cycles,
                } => {
                    let v = if cycle < *hold_cycles {
                        *active
                    } else {
                        1 - active
                    };
                    self.pool.mk_const(w, v)?
                }
                InputRole::Symbolic(mode) => self.input_var(*s, *mode, cycle)?,
                InputRole::Fixed(v) => self.pool.mk_const(w, *v)?,
            };
        }
        Ok(())
    }

    /// Per-cycle input vectors decoded from the state's model.
    pub fn vectors(&self, st: &PathState) -> Result<Vec<Vec<(SignalId, u128)>>, ExecError> {
        let mut out = Vec::with_capacity(self.plan.max_cycles as usize);
        for k in 0..self.plan.max_cycles {
            let mut row = Vec::new();
            for (s, role) in self.plan.controlled() {
                let v = match role {
                    InputRole::Clock => 0,
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
                    InputRole::Symbolic(mode) => {
                        let node = self.input_var(s, *mode, k)?;
                        let NodeKind::Var(var) = self.pool.node(node).kind else {
                            unreachable!("mk_var yields a Var node")
                        };
                        st.model.get(var).unwrap_or(0)
                    }
                };
                row.push((s, v));
            }
            out.push(row);
        }
        Ok(out)
    }

    fn eval(&self, store: &[NodeId], e: &Expr) -> Result<NodeId, BvError> {
        let p = self.pool;
        Ok(match &e.kind {
            ExprKind::Const(v) => p.mk_const(e.width, *v)?,
            ExprKind::Signal(s) => store[s.index()],
            ExprKind::Unary(op, a) => {
                let a = self.eval(store, a)?;
                let op = match op {
                    crate::elab::UnaryOp::Not => bv::UnaryOp::Not,
                    crate::elab::UnaryOp::LogNot => bv::UnaryOp::LogNot,
                    crate::elab::UnaryOp::RedAnd => bv::UnaryOp::RedAnd,
                    crate::elab::UnaryOp::RedOr => bv::UnaryOp::RedOr,
                    crate::elab::UnaryOp::RedXor => bv::UnaryOp::RedXor,
                };
                p.unary(op, a)?
            }
            ExprKind::Binary(op, a, b) => {
                let a = self.eval(store, a)?;
                let b = self.eval(store, b)?;
                let r = p.binary(*op, a, b)?;
                p.resize(r, e.width)?
            }
            ExprKind::Concat(parts) => {
                let mut acc: Option<NodeId> = None;
                for part in parts {
                    let v = self.eval(store, part)?;
                    acc = Some(match acc {
                        None => v,
                        Some(hi) => p.binary(bv::BinaryOp::Concat, hi, v)?,
                    });
                }
                acc.expect("concatenation has at least one part")
            }
            ExprKind::Ternary(c, t, f) => {
                let c = self.eval(store, c)?;
                let c = p.truthy(c)?;
                let t = self.eval(store, t)?;
                let f = self.eval(store, f)?;
                p.ite(c, t, f)?
            }
            ExprKind::Extract { hi, lo, arg } => {
                let a = self.eval(store, arg)?;
                p.extract(*hi, *lo, a)?
            }
            ExprKind::ZeroExtend(a) => {
                let a = self.eval(store, a)?;
                p.zero_extend(a, e.width)?
            }
        })
    }

    fn lvalue_width(&self, lv: &LValue) -> u32 {
        match lv {
            LValue::Whole(s) => self.design.signal(*s).width,
            LValue::Slice { hi, lo, .. } => hi - lo + 1,
            LValue::Concat(parts) => parts.iter().map(|p| self.lvalue_width(p)).sum(),
        }
    }

    fn write(&self, target: &mut [NodeId], lv: &LValue, value: NodeId) -> Result<(), BvError> {
        let p = self.pool;
        match lv {
            LValue::Whole(s) => target[s.index()] = value,
            LValue::Slice { signal, hi, lo } => {
                let old = target[signal.index()];
                let w = self.design.signal(*signal).width;
                let mut acc = value;
                if *hi + 1 < w {
                    let upper = p.extract(w - 1, hi + 1, old)?;
                    acc = p.binary(bv::BinaryOp::Concat, upper, acc)?;
                }
                if *lo > 0 {
                    let lower = p.extract(lo - 1, 0, old)?;
                    acc = p.binary(bv::BinaryOp::Concat, acc, lower)?;
                }
                target[signal.index()] = acc;
            }
            LValue::Concat(parts) => {
                let mut offset = 0;
                for part in parts.iter().rev() {
                    let pw = self.lvalue_width(part);
                    let piece = p.extract(offset + pw - 1, offset, value)?;
                    self.write(target, part, piece)?;
                    offset += pw;
                }
            }
        }
        Ok(())
    }

    fn query(&self, sink: &mut Sink, st: &PathState, guard: NodeId) -> Result<Query, ExecError> {
        if eval_with_default(self.pool, guard, &st.model) == 1 {
            return Ok(Query::Sat(None));
        }
        // Only constraints transitively sharing variables with the guard
        // can affect its satisfiability given a model of the rest.
        let mut vars: BTreeSet<VarId> = self.pool.vars_in(&[guard]).into_iter().collect();
        let mut included = vec![false; st.path_condition.len()];
        loop {
            let mut changed = false;
            for (i, pv) in st.pc_vars.iter().enumerate() {
                if !included[i] && pv.iter().any(|v| vars.contains(v)) {
                    included[i] = true;
                    vars.extend(pv.iter().copied());
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let mut constraints: Vec<NodeId> = st
            .path_condition
            .iter()
            .zip(&included)
            .filter(|(_, &inc)| inc)
            .map(|(&c, _)| c)
            .collect();
        constraints.push(guard);
        sink.solver_call()?;
        Ok(
            match solver::check(self.pool, &constraints, &self.solver)? {
                SolveResult::Sat(a) => {
                    let mut m = st.model.clone();
                    for v in vars {
                        m.set(v, a.get(v).unwrap_or(0));
                    }
                    Query::Sat(Some(m))
                }
                SolveResult::Unsat => Query::Unsat,
                SolveResult::Unknown(_) => Query::Unknown,
            },
        )
    }

    /// Children for each feasible arm, in arm order.
    fn fork(
        &self,
        sink: &mut Sink,
        st: PathState,
        branch: BranchId,
        guards: &[NodeId],
    ) -> Result<Vec<(usize, PathState)>, ExecError> {
        let mut out = Vec::new();
        for (k, &g) in guards.iter().enumerate() {
            let child = match self.pool.as_const(g) {
                Some(0) => continue,
                Some(_) => st.clone(),
                None => match self.query(sink, &st, g)? {
                    Query::Sat(model) => {
                        let mut c = st.clone();
                        c.path_condition.push(g);
                        c.pc_vars.push(self.pool.vars_in(&[g]));
                        if let Some(m) = model {
                            c.model = m;
                        }
                        c
                    }
                    Query::Unsat => {
                        sink.events.push(Event::Infeasible);
                        continue;
                    }
                    Query::Unknown => {
                        sink.events.push(Event::Killed);
                        continue;
                    }
                },
            };
            let mut child = child;
            child.trace.push((branch, k as u32));
            out.push((k, child));
        }
        Ok(out)
    }

    fn exec_block(
        &self,
        sink: &mut Sink,
        mut states: Vec<PathState>,
        body: &[Stmt],
    ) -> Result<Vec<PathState>, ExecError> {
        for stmt in body {
            let mut next = Vec::with_capacity(states.len());
            for st in states {
                next.extend(self.exec_stmt(sink, st, stmt)?);
            }
            states = next;
        }
        Ok(states)
    }

    fn exec_stmt(
        &self,
        sink: &mut Sink,
        mut st: PathState,
        stmt: &Stmt,
    ) -> Result<Vec<PathState>, ExecError> {
        let p = self.pool;
        match stmt {
            Stmt::Assign { lhs, rhs, .. } => {
                let v = self.eval(&st.store, rhs)?;
                match st.next.take() {
                    Some(mut next) => {
                        self.write(&mut next, lhs, v)?;
                        st.next = Some(next);
                    }
                    None => self.write(&mut st.store, lhs, v)?,
                }
                Ok(vec![st])
            }
            Stmt::If {
                branch,
                cond,
                then,
                els,
            } => {
                let c = self.eval(&st.store, cond)?;
                let c = p.truthy(c)?;
                let guards = [c, p.not1(c)?];
                let mut out = Vec::new();
                for (arm, child) in self.fork(sink, st, *branch, &guards)? {
                    let body = if arm == 0 { then } else { els };
                    out.extend(self.exec_block(sink, vec![child], body)?);
                }
                Ok(out)
            }
            Stmt::Case {
                branch,
                subject,
                arms,
                default,
            } => {
                let s = self.eval(&st.store, subject)?;
                let w = p.width(s);
                // Priority chain: arm k requires a label match and no
                // earlier match.
                let mut none_before = p.one(1);
                let mut guards = Vec::with_capacity(arms.len() + 1);
                for arm in arms {
                    let mut hit = p.zero(1);
                    for &label in &arm.labels {
                        let l = p.mk_const(w, label)?;
                        let eq = p.binary(bv::BinaryOp::Eq, s, l)?;
                        hit = p.or1(hit, eq)?;
                    }
                    guards.push(p.and1(none_before, hit)?);
                    let miss = p.not1(hit)?;
                    none_before = p.and1(none_before, miss)?;
                }
                guards.push(none_before);
                let mut out = Vec::new();
                for (arm, child) in self.fork(sink, st, *branch, &guards)? {
                    let body = arms.get(arm).map_or(default.as_slice(), |a| &a.body);
                    out.extend(self.exec_block(sink, vec![child], body)?);
                }
                Ok(out)
            }
        }
    }

    fn settle(&self, sink: &mut Sink, st: PathState) -> Result<Vec<PathState>, ExecError> {
        let mut states = vec![st];
        for proc in self.design.combinational() {
            states = self.exec_block(sink, states, &proc.body)?;
        }
        Ok(states)
    }

    fn clock_edge(&self, sink: &mut Sink, mut st: PathState) -> Result<Vec<PathState>, ExecError> {
        st.next = Some(st.store.clone());
        let mut states = vec![st];
        for proc in self.design.clocked() {
            states = self.exec_block(sink, states, &proc.body)?;
        }
        for s in &mut states {
            s.store = s.next.take().expect("set for the clocked phase");
        }
        Ok(states)
    }

    fn step(&self, sink: &mut Sink, mut st: PathState) -> Result<Vec<PathState>, ExecError> {
        debug_assert_eq!(st.status, PathStatus::Active);
        let cycle = st.cycle;
        self.bind_inputs(&mut st, cycle)?;
        let mut out = Vec::new();
        for settled in self.settle(sink, st)? {
            for mut child in self.clock_edge(sink, settled)? {
                child.cycle += 1;
                if child.cycle >= self.plan.max_cycles {
                    child.status = PathStatus::Complete;
                }
                out.push(child);
            }
        }
        Ok(out)
    }

    /// Binds the current cycle's inputs and runs every combinational
    /// process once in dependency order, forking on symbolic branches.
    pub fn settle_comb(&self, mut st: PathState) -> Result<Vec<PathState>, ExecError> {
        let cycle = st.cycle;
        self.bind_inputs(&mut st, cycle)?;
        self.settle(&mut Sink::unlimited(), st)
    }

    /// One full cycle: bind inputs, settle, clock edge. States that reach
    /// the cycle bound are marked complete.
    pub fn step_cycle(&self, st: PathState) -> Result<Vec<PathState>, ExecError> {
        self.step(&mut Sink::unlimited(), st)
    }

    fn complete_event(&self, st: &PathState) -> Result<Event, ExecError> {
        Ok(Event::Complete {
            vectors: self.vectors(st)?,
            trace: st.trace.clone(),
        })
    }

    /// Depth-first exploration of one subtree into an event stream.
    fn explore(&self, root: PathState, sink: &mut Sink) -> Result<(), ExecError> {
        let mut stack = vec![root];
        while let Some(st) = stack.pop() {
            if st.status == PathStatus::Complete {
                let ev = self.complete_event(&st)?;
                sink.events.push(ev);
                sink.completes += 1;
                if sink.completes >= sink.complete_cap && !stack.is_empty() {
                    sink.events.push(Event::Truncated);
                    return Ok(());
                }
                continue;
            }
            if sink.timed_out() {
                sink.events.push(Event::Truncated);
                return Ok(());
            }
            match self.step(sink, st) {
                Ok(children) => stack.extend(children.into_iter().rev()),
                Err(ExecError::BudgetStop) => {
                    sink.events.push(Event::Truncated);
                    return Ok(());
                }
                Err(e) => return Err(e),
            }
        }
        Ok(())
    }
}

enum Item {
    Events(Vec<Event>),
    Pending(PathState),
}

/// Replays event streams in order under the global budgets.
struct Linearizer<'a> {
    design: &'a str,
    budgets: Budgets,
    stats: ExplorationStats,
    tests: Vec<TestCase>,
    stopped: bool,
}

impl Linearizer<'_> {
    /// `more_after` tells whether any work follows this stream.
    fn feed(&mut self, events: Vec<Event>, more_after: bool) {
        let n = events.len();
        for (i, ev) in events.into_iter().enumerate() {
            if self.stopped {
                return;
            }
            match ev {
                Event::SolverCall => {
                    if self.stats.solver_calls >= self.budgets.max_solver_calls {
                        self.stats.budget_exhausted = true;
                        self.stopped = true;
                        return;
                    }
                    self.stats.solver_calls += 1;
                }
                Event::Infeasible => self.stats.paths_infeasible += 1,
                Event::Killed => self.stats.paths_killed += 1,
                Event::Complete { vectors, trace } => {
                    self.tests.push(TestCase {
                        id: self.tests.len() as u64,
                        vectors,
                        expected_trace: trace,
                    });
                    if self.tests.len() as u64 >= self.budgets.max_paths {
                        self.stats.budget_exhausted = i + 1 < n || more_after;
                        self.stopped = true;
                        return;
                    }
                }
                Event::Truncated => {
                    self.stats.budget_exhausted = true;
                    self.stopped = true;
                    return;
                }
            }
        }
    }

    fn finish(mut self, started: Instant) -> RunOutput {
        let suite = TestSuite {
            design: self.design.to_string(),
            tests: self.tests,
        };
        self.stats.tests = suite.tests.len() as u64;
        self.stats.paths_completed = self.stats.tests;
        self.stats.vectors = suite.total_vectors();
        self.stats.elapsed = started.elapsed();
        RunOutput {
            suite,
            stats: self.stats,
        }
    }
}

/// Explores every path of `design` under `plan` and returns one test per
/// completed path, in depth-first order.
pub fn run(
    design: &RtlDesign,
    plan: &InputPlan,
    pool: &BvPool,
    opts: &RunOptions,
) -> Result<RunOutput, ExecError> {
    let started = Instant::now();
    let exec = Executor::new(design, plan, pool, opts.solver.clone());
    let budgets = plan.budgets;
    let deadline = started + budgets.wall_clock();
    let root = exec.init_state()?;
    let jobs = opts.jobs.max(1);

    let mut frontier = vec![Item::Pending(root)];
    if jobs > 1 {
        let target = jobs * 8;
        for _ in 0..plan.max_cycles {
            let pending = frontier
                .iter()
                .filter(|i| matches!(i, Item::Pending(_)))
                .count();
            if pending == 0 || pending >= target {
                break;
            }
            let mut next = Vec::with_capacity(frontier.len() * 2);
            for item in frontier {
                match item {
                    Item::Events(e) => next.push(Item::Events(e)),
                    Item::Pending(st) if st.status == PathStatus::Complete => {
                        next.push(Item::Events(vec![exec.complete_event(&st)?]));
                    }
                    Item::Pending(st) => {
                        let mut sink = Sink::unlimited();
                        let children = exec.step(&mut sink, st)?;
                        if !sink.events.is_empty() {
                            next.push(Item::Events(sink.events));
                        }
                        next.extend(children.into_iter().map(Item::Pending));
                    }
                }
            }
            frontier = next;
        }
    }

    let explore = |st: PathState| -> Result<Vec<Event>, ExecError> {
        let mut sink = Sink {
            events: Vec::new(),
            calls: 0,
            completes: 0,
            call_cap: budgets.max_solver_calls,
            complete_cap: budgets.max_paths,
            deadline: Some(deadline),
        };
        exec.explore(st, &mut sink)?;
        Ok(sink.events)
    };
    // `None` slots are filled, in order, by the streams of the pending roots.
    let mut slots: Vec<Option<Vec<Event>>> = Vec::with_capacity(frontier.len());
    let mut roots = Vec::new();
    for item in frontier {
        match item {
            Item::Events(e) => slots.push(Some(e)),
            Item::Pending(st) => {
                slots.push(None);
                roots.push(st);
            }
        }
    }
    let streams: Vec<Vec<Event>> = if jobs > 1 {
        let workers = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| ExecError::ThreadPool(e.to_string()))?;
        workers.install(|| roots.into_par_iter().map(explore).collect::<Result<_, _>>())?
    } else {
        roots.into_iter().map(explore).collect::<Result<_, _>>()?
    };
    let mut streams = streams.into_iter();
    let ordered: Vec<Vec<Event>> = slots
        .into_iter()
        .map(|s| s.unwrap_or_else(|| streams.next().expect("one stream per root")))
        .filter(|e| !e.is_empty())
        .collect();

    let mut lin = Linearizer {
        design: &design.name,
        budgets,
        stats: ExplorationStats::default(),
        tests: Vec::new(),
        stopped: false,
    };
    let count = ordered.len();
    for (i, events) in ordered.into_iter().enumerate() {
        lin.feed(events, i + 1 < count);
        if lin.stopped {
            break;
        }
    }
    Ok(lin.finish(started))
}
