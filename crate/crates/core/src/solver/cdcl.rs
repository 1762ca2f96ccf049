// SPDX-License-Identifier: Apache-2.0

//! Conflict-driven clause learning over DIMACS-style clauses.
//!
//! Two watched literals per clause, first-UIP learning with local
//! minimization, VSIDS activity with lowest-index tie-breaking, saved
//! phases starting at false, Luby restarts, and activity-based deletion of
//! learnt clauses. Nothing is randomized: identical input gives an
//! identical model.

use std::time::Instant;

use super::bitblast::Lit;
use super::UnknownReason;

const NO_REASON: u32 = u32::MAX;
const UNDEF: u8 = 2;
const RESTART_UNIT: u64 = 100;
const VAR_DECAY: f64 = 0.95;
const CLAUSE_DECAY: f64 = 0.999;

pub(crate) enum Outcome {
    /// Indexed by CNF variable; entry 0 unused.
    Sat(Vec<bool>),
    Unsat,
    Unknown(UnknownReason),
}

/// Internal literal code: `2 * var + negated`, with `var` 0-based.
type L = u32;

fn code(l: Lit) -> L {
    let v = l.unsigned_abs() - 1;
    2 * v + (l < 0) as u32
}

fn var(l: L) -> usize {
    (l >> 1) as usize
}

fn neg(l: L) -> L {
    l ^ 1
}

struct Clause {
    lits: Vec<L>,
    learnt: bool,
    deleted: bool,
    activity: f64,
}

/// Max-heap over variables by activity; ties go to the lower index.
struct Order {
    heap: Vec<u32>,
    pos: Vec<u32>,
}

const NOT_IN_HEAP: u32 = u32::MAX;

impl Order {
    fn new(n: usize) -> Self {
        Order {
            heap: (0..n as u32).collect(),
            pos: (0..n as u32).collect(),
        }
    }

    fn better(act: &[f64], a: u32, b: u32) -> bool {
        let (x, y) = (act[a as usize], act[b as usize]);
        x > y || (x == y && a < b)
    }

    fn up(&mut self, act: &[f64], mut i: usize) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            let p = self.heap[parent];
            if !Self::better(act, v, p) {
                break;
            }
            self.heap[i] = p;
            self.pos[p as usize] = i as u32;
            i = parent;
        }
        self.heap[i] = v;
        self.pos[v as usize] = i as u32;
    }

    fn down(&mut self, act: &[f64], mut i: usize) {
        let v = self.heap[i];
        let n = self.heap.len();
        loop {
            let l = 2 * i + 1;
            if l >= n {
                break;
            }
            let r = l + 1;
            let c = if r < n && Self::better(act, self.heap[r], self.heap[l]) {
                r
            } else {
                l
            };
            if !Self::better(act, self.heap[c], v) {
                break;
            }
            self.heap[i] = self.heap[c];
            self.pos[self.heap[i] as usize] = i as u32;
            i = c;
        }
        self.heap[i] = v;
        self.pos[v as usize] = i as u32;
    }

    fn insert(&mut self, act: &[f64], v: u32) {
        if self.pos[v as usize] != NOT_IN_HEAP {
            return;
        }
        self.heap.push(v);
        let i = self.heap.len() - 1;
        self.pos[v as usize] = i as u32;
        self.up(act, i);
    }

    fn pop(&mut self, act: &[f64]) -> Option<u32> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().expect("nonempty");
        self.pos[top as usize] = NOT_IN_HEAP;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last as usize] = 0;
            self.down(act, 0);
        }
        Some(top)
    }

    fn bumped(&mut self, act: &[f64], v: u32) {
        let p = self.pos[v as usize];
        if p != NOT_IN_HEAP {
            self.up(act, p as usize);
        }
    }
}

struct Solver {
    clauses: Vec<Clause>,
    watches: Vec<Vec<u32>>,
    assigns: Vec<u8>,
    level: Vec<u32>,
    reason: Vec<u32>,
    phase: Vec<bool>,
    trail: Vec<L>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    cla_inc: f64,
    order: Order,
    seen: Vec<bool>,
    num_learnts: usize,
}

impl Solver {
    fn value(&self, l: L) -> u8 {
        let a = self.assigns[var(l)];
        if a == UNDEF {
            UNDEF
        } else {
            a ^ (l & 1) as u8
        }
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn enqueue(&mut self, l: L, reason: u32) {
        let v = var(l);
        self.assigns[v] = (l & 1 == 0) as u8;
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    fn attach(&mut self, cref: u32) {
        let c = &self.clauses[cref as usize].lits;
        let (a, b) = (c[0], c[1]);
        self.watches[a as usize].push(cref);
        self.watches[b as usize].push(cref);
    }

    /// Returns a conflicting clause, if any.
    fn propagate(&mut self) -> Option<u32> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let false_lit = neg(p);
            let mut ws = std::mem::take(&mut self.watches[false_lit as usize]);
            let (mut i, mut j) = (0, 0);
            let mut conflict = None;
            while i < ws.len() {
                let cref = ws[i];
                i += 1;
                let lits = &mut self.clauses[cref as usize].lits;
                if lits[0] == false_lit {
                    lits.swap(0, 1);
                }
                let first = lits[0];
                let first_val = {
                    let a = self.assigns[var(first)];
                    if a == UNDEF {
                        UNDEF
                    } else {
                        a ^ (first & 1) as u8
                    }
                };
                if first_val == 1 {
                    ws[j] = cref;
                    j += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..lits.len() {
                    let l = lits[k];
                    let a = self.assigns[var(l)];
                    if a == UNDEF || a ^ (l & 1) as u8 == 1 {
                        lits.swap(1, k);
                        self.watches[lits[1] as usize].push(cref);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = cref;
                j += 1;
                if first_val == 0 {
                    conflict = Some(cref);
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                } else {
                    self.enqueue(first, cref);
                }
            }
            ws.truncate(j);
            self.watches[false_lit as usize] = ws;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                return conflict;
            }
        }
        None
    }

    fn bump_var(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.order.bumped(&self.activity, v as u32);
    }

    fn bump_clause(&mut self, cref: u32) {
        let c = &mut self.clauses[cref as usize];
        if !c.learnt {
            return;
        }
        c.activity += self.cla_inc;
        if c.activity > 1e20 {
            for c in self.clauses.iter_mut().filter(|c| c.learnt) {
                c.activity *= 1e-20;
            }
            self.cla_inc *= 1e-20;
        }
    }

    /// First-UIP clause (asserting literal first) and its backjump level.
    fn analyze(&mut self, mut confl: u32) -> (Vec<L>, u32) {
        let mut learnt: Vec<L> = vec![0];
        let mut pending = 0usize;
        let mut p: Option<L> = None;
        let mut index = self.trail.len();
        let mut touched: Vec<usize> = Vec::new();
        loop {
            self.bump_clause(confl);
            let start = usize::from(p.is_some());
            let lits = self.clauses[confl as usize].lits.clone();
            for &q in &lits[start..] {
                let v = var(q);
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    touched.push(v);
                    self.bump_var(v);
                    if self.level[v] >= self.decision_level() {
                        pending += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[var(self.trail[index])] {
                    break;
                }
            }
            let lit = self.trail[index];
            p = Some(lit);
            confl = self.reason[var(lit)];
            self.seen[var(lit)] = false;
            pending -= 1;
            if pending == 0 {
                break;
            }
        }
        learnt[0] = neg(p.expect("at least one literal at the conflict level"));

        // Drop literals implied by other literals already in the clause.
        let mut keep = vec![learnt[0]];
        for &l in &learnt[1..] {
            let r = self.reason[var(l)];
            let redundant = r != NO_REASON
                && self.clauses[r as usize].lits[1..]
                    .iter()
                    .all(|&q| self.seen[var(q)] || self.level[var(q)] == 0);
            if !redundant {
                keep.push(l);
            }
        }
        for v in touched {
            self.seen[v] = false;
        }
        let mut learnt = keep;

        let bt = if learnt.len() == 1 {
            0
        } else {
            let mut best = 1;
            for i in 2..learnt.len() {
                if self.level[var(learnt[i])] > self.level[var(learnt[best])] {
                    best = i;
                }
            }
            learnt.swap(1, best);
            self.level[var(learnt[1])]
        };
        (learnt, bt)
    }

    fn backtrack(&mut self, level: u32) {
        if self.decision_level() <= level {
            return;
        }
        let start = self.trail_lim[level as usize];
        for i in (start..self.trail.len()).rev() {
            let l = self.trail[i];
            let v = var(l);
            self.phase[v] = l & 1 == 0;
            self.assigns[v] = UNDEF;
            self.reason[v] = NO_REASON;
            self.order.insert(&self.activity, v as u32);
        }
        self.trail.truncate(start);
        self.trail_lim.truncate(level as usize);
        self.qhead = start;
    }

    fn locked(&self, cref: u32) -> bool {
        let c = &self.clauses[cref as usize];
        let v = var(c.lits[0]);
        self.reason[v] == cref && self.value(c.lits[0]) == 1
    }

    fn reduce_db(&mut self) {
        let mut candidates: Vec<u32> = (0..self.clauses.len() as u32)
            .filter(|&i| {
                let c = &self.clauses[i as usize];
                c.learnt && !c.deleted && c.lits.len() > 2 && !self.locked(i)
            })
            .collect();
        candidates.sort_by(|&a, &b| {
            let (x, y) = (&self.clauses[a as usize], &self.clauses[b as usize]);
            x.activity.total_cmp(&y.activity).then(a.cmp(&b))
        });
        for &i in &candidates[..candidates.len() / 2] {
            let c = &mut self.clauses[i as usize];
            c.deleted = true;
            c.lits = Vec::new();
            self.num_learnts -= 1;
        }
        let clauses = &self.clauses;
        for ws in &mut self.watches {
            ws.retain(|&c| !clauses[c as usize].deleted);
        }
    }

    fn pick_branch(&mut self) -> Option<L> {
        while let Some(v) = self.order.pop(&self.activity) {
            if self.assigns[v as usize] == UNDEF {
                let negated = !self.phase[v as usize];
                return Some(2 * v + negated as u32);
            }
        }
        None
    }
}

fn luby(mut i: u64) -> u64 {
    // Finite subsequence containing index i, then descend into it.
    let (mut size, mut seq) = (1u64, 0u32);
    while size < i + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != i {
        size = (size - 1) / 2;
        seq -= 1;
        i %= size;
    }
    1 << seq
}

pub(crate) fn solve(
    num_vars: u32,
    clauses: &[Vec<Lit>],
    max_conflicts: Option<u64>,
    deadline: Option<Instant>,
) -> Outcome {
    let n = num_vars as usize;
    let mut s = Solver {
        clauses: Vec::new(),
        watches: vec![Vec::new(); 2 * n],
        assigns: vec![UNDEF; n],
        level: vec![0; n],
        reason: vec![NO_REASON; n],
        phase: vec![false; n],
        trail: Vec::with_capacity(n),
        trail_lim: Vec::new(),
        qhead: 0,
        activity: vec![0.0; n],
        var_inc: 1.0,
        cla_inc: 1.0,
        order: Order::new(n),
        seen: vec![false; n],
        num_learnts: 0,
    };

    for c in clauses {
        let mut lits: Vec<L> = c.iter().map(|&l| code(l)).collect();
        lits.sort_unstable();
        lits.dedup();
        if lits.windows(2).any(|w| w[0] == neg(w[1])) {
            continue;
        }
        // Drop literals already false at level 0; satisfied clauses vanish.
        if lits.iter().any(|&l| s.value(l) == 1) {
            continue;
        }
        lits.retain(|&l| s.value(l) == UNDEF);
        match lits.len() {
            0 => return Outcome::Unsat,
            1 => {
                s.enqueue(lits[0], NO_REASON);
                if s.propagate().is_some() {
                    return Outcome::Unsat;
                }
            }
            _ => {
                let cref = s.clauses.len() as u32;
                s.clauses.push(Clause {
                    lits,
                    learnt: false,
                    deleted: false,
                    activity: 0.0,
                });
                s.attach(cref);
            }
        }
    }

    let mut max_learnts = (s.clauses.len() / 3).max(2000) as f64;
    let mut conflicts: u64 = 0;
    let mut restart_index = 0u64;
    let mut restart_budget = luby(0) * RESTART_UNIT;
    let mut since_restart = 0u64;
    let mut decisions: u64 = 0;

    loop {
        if let Some(confl) = s.propagate() {
            conflicts += 1;
            since_restart += 1;
            if s.decision_level() == 0 {
                return Outcome::Unsat;
            }
            let (learnt, bt) = s.analyze(confl);
            s.backtrack(bt);
            if learnt.len() == 1 {
                s.enqueue(learnt[0], NO_REASON);
            } else {
                let cref = s.clauses.len() as u32;
                let first = learnt[0];
                s.clauses.push(Clause {
                    lits: learnt,
                    learnt: true,
                    deleted: false,
                    activity: 0.0,
                });
                s.num_learnts += 1;
                s.attach(cref);
                s.bump_clause(cref);
                s.enqueue(first, cref);
            }
            s.var_inc /= VAR_DECAY;
            s.cla_inc /= CLAUSE_DECAY;

            if max_conflicts.is_some_and(|m| conflicts >= m) {
                return Outcome::Unknown(UnknownReason::Budget);
            }
            if conflicts.is_multiple_of(64) && deadline.is_some_and(|d| Instant::now() >= d) {
                return Outcome::Unknown(UnknownReason::Timeout);
            }
            if since_restart >= restart_budget {
                since_restart = 0;
                restart_index += 1;
                restart_budget = luby(restart_index) * RESTART_UNIT;
                s.backtrack(0);
            }
        } else {
            if s.num_learnts as f64 >= max_learnts + s.trail.len() as f64 {
                s.reduce_db();
                max_learnts *= 1.1;
            }
            decisions += 1;
            if decisions.is_multiple_of(1024) && deadline.is_some_and(|d| Instant::now() >= d) {
                return Outcome::Unknown(UnknownReason::Timeout);
            }
            match s.pick_branch() {
                None => {
                    let mut model = vec![false; n + 1];
                    for v in 0..n {
                        model[v + 1] = s.assigns[v] == 1;
                    }
                    return Outcome::Sat(model);
                }
                Some(l) => {
                    s.trail_lim.push(s.trail.len());
                    s.enqueue(l, NO_REASON);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(n: u32, clauses: &[Vec<Lit>]) -> bool {
        (0u32..1 << n).any(|m| {
            clauses.iter().all(|c| {
                c.iter().any(|&l| {
                    let bit = (m >> (l.unsigned_abs() - 1)) & 1 == 1;
                    bit == (l > 0)
                })
            })
        })
    }

    #[test]
    fn luby_prefix() {
        let seq: Vec<u64> = (0..15).map(luby).collect();
        assert_eq!(seq, [1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]);
    }

    #[test]
    fn random_3sat_matches_enumeration() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..2000 {
            let n = rng.gen_range(1..=10u32);
            let m = rng.gen_range(0..=45usize);
            let clauses: Vec<Vec<Lit>> = (0..m)
                .map(|_| {
                    (0..rng.gen_range(1..=3))
                        .map(|_| {
                            let v = rng.gen_range(1..=n) as Lit;
                            if rng.gen() {
                                v
                            } else {
                                -v
                            }
                        })
                        .collect()
                })
                .collect();
            let expect = brute(n, &clauses);
            match solve(n, &clauses, None, None) {
                Outcome::Sat(model) => {
                    assert!(expect);
                    for c in &clauses {
                        assert!(c
                            .iter()
                            .any(|&l| model[l.unsigned_abs() as usize] == (l > 0)));
                    }
                }
                Outcome::Unsat => assert!(!expect, "{clauses:?}"),
                Outcome::Unknown(_) => panic!("no budget given"),
            }
        }
    }

    #[test]
    fn pigeonhole_is_unsat() {
        // 5 pigeons, 4 holes.
        let (p, h) = (5i32, 4i32);
        let v = |i: i32, j: i32| i * h + j + 1;
        let mut clauses = Vec::new();
        for i in 0..p {
            clauses.push((0..h).map(|j| v(i, j)).collect());
        }
        for j in 0..h {
            for a in 0..p {
                for b in a + 1..p {
                    clauses.push(vec![-v(a, j), -v(b, j)]);
                }
            }
        }
        assert!(matches!(
            solve((p * h) as u32, &clauses, None, None),
            Outcome::Unsat
        ));
        assert!(matches!(
            solve((p * h) as u32, &clauses, Some(1), None),
            Outcome::Unknown(UnknownReason::Budget)
        ));
    }
}
