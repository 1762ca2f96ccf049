// SPDX-License-Identifier: Apache-2.0

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use proptest::prelude::*;

use rtlsym::bv::BvPool;
use rtlsym::flow::{self, HarnessOverrides};
use rtlsym::replay::simulate;
use rtlsym::solver::{Backend, Budget, SolverConfig};
use rtlsym::symexec::{write_suite, Executor, InputRole, RunOptions};

fn traces(out: &rtlsym::symexec::RunOutput) -> BTreeSet<common::Trace> {
    out.suite
        .tests
        .iter()
        .map(|t| t.expected_trace.clone())
        .collect()
}

#[test]
fn mux_yields_one_test_per_select_value() {
    let (d, plan) = common::load("mux");
    let out = common::generate(&d, &plan, 1);
    assert_eq!(out.suite.tests.len(), 2);
    let sel = d.lookup("sel").unwrap();
    let values: BTreeSet<u128> = out
        .suite
        .tests
        .iter()
        .map(|t| t.vectors[0].iter().find(|(s, _)| *s == sel).unwrap().1)
        .collect();
    assert_eq!(values, BTreeSet::from([0, 1]));
    assert_eq!(traces(&out), common::enumerate_traces(&d, &plan));
    assert!(!out.stats.budget_exhausted);
}

#[test]
fn four_paths_has_four_distinct_traces() {
    let (d, plan) = common::load("four_paths");
    let out = common::generate(&d, &plan, 1);
    assert_eq!(out.suite.tests.len(), 4);
    assert_eq!(traces(&out).len(), 4);
    assert_eq!(traces(&out), common::enumerate_traces(&d, &plan));
}

#[test]
fn counter_counts_match_enumeration() {
    let (d, plan) = common::load("counter");
    let out = common::generate(&d, &plan, 1);
    let expected = common::enumerate_traces(&d, &plan);
    assert_eq!(out.stats.tests as usize, expected.len());
    assert_eq!(
        out.stats.vectors,
        out.stats.tests * u64::from(plan.max_cycles)
    );
    assert_eq!(out.suite.total_vectors(), out.stats.vectors);
}

#[test]
fn no_symbolic_inputs_gives_one_test() {
    let (d, _) = common::load("mux");
    let h = "top = \"mux\"\nmax_cycles = 2\n\
             [[fixed]]\nsignal = \"sel\"\nvalue = 1\n\
             [[fixed]]\nsignal = \"din_0\"\nvalue = 0\n\
             [[fixed]]\nsignal = \"din_1\"\nvalue = 1\n";
    let plan = flow::plan_from_text(h, &d, &HarnessOverrides::default()).unwrap();
    let out = common::generate(&d, &plan, 1);
    assert_eq!(out.suite.tests.len(), 1);
    assert_eq!(out.stats.solver_calls, 0);
    assert_eq!(out.suite.tests[0].vectors.len(), 2);
}

#[test]
fn generated_sets_equal_enumeration_on_small_corpus() {
    for name in common::SMALL {
        let (d, plan) = common::load(name);
        assert!(common::symbolic_bits(&d, &plan) <= 12, "{name}");
        assert!(plan.max_cycles <= 4, "{name}");
        let t0 = Instant::now();
        let out = common::generate(&d, &plan, 1);
        assert!(t0.elapsed() < Duration::from_secs(60), "{name}");
        assert!(!out.stats.budget_exhausted, "{name}");
        let got = traces(&out);
        assert_eq!(got.len(), out.suite.tests.len(), "{name}: duplicate traces");
        assert_eq!(got, common::enumerate_traces(&d, &plan), "{name}");
    }
}

#[test]
fn replay_reproduces_every_expected_trace() {
    for name in common::CORPUS {
        let (d, plan) = common::load(name);
        let out = common::generate(&d, &plan, 1);
        for t in &out.suite.tests {
            let sim = simulate(&d, &plan, t).unwrap();
            assert_eq!(sim.trace, t.expected_trace, "{name} test {}", t.id);
        }
    }
}

#[test]
fn path_conditions_are_pairwise_unsatisfiable() {
    for name in common::SMALL {
        let (d, plan) = common::load(name);
        let pool = BvPool::new();
        let ex = Executor::new(&d, &plan, &pool, SolverConfig::default());
        let paths = common::all_paths(&ex);
        assert_eq!(
            paths.len(),
            common::enumerate_traces(&d, &plan).len(),
            "{name}"
        );
        common::pairwise_disjoint(&pool, &paths).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn concrete_harnesses_match_replay_bit_for_bit() {
    for name in common::CORPUS {
        let (d, plan) = common::load(name);
        let mut r = common::rng(7);
        for _ in 0..20 {
            let p = common::concretize(&d, &plan, &mut r);
            common::concrete_agreement(&d, &p).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }
}

#[test]
fn worker_count_does_not_change_outputs() {
    for name in common::CORPUS {
        let (d, plan) = common::load(name);
        let base = common::generate(&d, &plan, 1);
        let suite = write_suite(&d, &base.suite);
        let stats = flow::stats_json(&d, &plan, &base, 0);
        for jobs in [2, 3, 8] {
            let out = common::generate(&d, &plan, jobs);
            assert_eq!(write_suite(&d, &out.suite), suite, "{name} jobs={jobs}");
            assert_eq!(
                flow::stats_json(&d, &plan, &out, 0),
                stats,
                "{name} jobs={jobs}"
            );
        }
    }
}

#[test]
fn path_budget_truncates_deterministically() {
    let (d, plan) = common::load("four_paths");
    for (cap, exhausted) in [(1u64, true), (3, true), (4, false), (9, false)] {
        let mut p = plan.clone();
        p.budgets.max_paths = cap;
        let base = common::generate(&d, &p, 1);
        assert_eq!(base.suite.tests.len() as u64, cap.min(4));
        assert_eq!(base.stats.budget_exhausted, exhausted, "cap {cap}");
        for jobs in [2, 4] {
            let out = common::generate(&d, &p, jobs);
            assert_eq!(write_suite(&d, &out.suite), write_suite(&d, &base.suite));
            assert_eq!(out.stats.budget_exhausted, exhausted);
        }
    }
}

#[test]
fn solver_call_budget_truncates_deterministically() {
    let (d, plan) = common::load("fsm");
    let full = common::generate(&d, &plan, 1);
    assert!(full.stats.solver_calls > 2);
    let mut p = plan.clone();
    p.budgets.max_solver_calls = 2;
    let base = common::generate(&d, &p, 1);
    assert!(base.stats.budget_exhausted);
    assert!(base.stats.solver_calls <= 2);
    assert!(base.suite.tests.len() < full.suite.tests.len());
    for jobs in [2, 5] {
        let out = common::generate(&d, &p, jobs);
        assert_eq!(write_suite(&d, &out.suite), write_suite(&d, &base.suite));
        assert_eq!(
            flow::stats_json(&d, &p, &out, 0),
            flow::stats_json(&d, &p, &base, 0)
        );
    }
}

#[test]
fn unknown_verdicts_kill_paths_instead_of_pruning() {
    let (d, plan) = common::load("four_paths");
    let opts = RunOptions {
        solver: SolverConfig {
            backend: Backend::External("cat >/dev/null; echo unknown".into()),
            budget: Budget::default(),
        },
        jobs: 1,
    };
    let out = flow::testgen(&d, &plan, &opts).unwrap();
    assert!(out.stats.paths_killed > 0);
    assert_eq!(out.stats.paths_infeasible, 0);
    // Paths decided by the cached model alone still complete and replay.
    assert!(!out.suite.tests.is_empty());
    flow::replay_suite(&d, &plan, &out.suite, 1).unwrap();
}

#[test]
fn fresh_inputs_are_independent_per_cycle() {
    let (d, plan) = common::load("counter");
    let mut held = plan.clone();
    for (_, role) in &mut held.roles {
        if let InputRole::Symbolic(mode) = role {
            *mode = rtlsym::symexec::InputMode::Hold;
        }
    }
    let fresh = common::generate(&d, &plan, 1);
    let hold = common::generate(&d, &held, 1);
    assert_eq!(traces(&hold), common::enumerate_traces(&d, &held));
    assert!(hold.suite.tests.len() < fresh.suite.tests.len());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    /// On random small designs the generated suite covers exactly the
    /// feasible branch sequences and the path conditions are disjoint.
    #[test]
    fn random_designs_complete_and_disjoint(seed in any::<u64>()) {
        let (d, plan) = common::load_random(seed);
        let out = common::generate(&d, &plan, 1);
        prop_assert_eq!(traces(&out), common::enumerate_traces(&d, &plan));
        prop_assert_eq!(traces(&out).len(), out.suite.tests.len());

        let pool = BvPool::new();
        let ex = Executor::new(&d, &plan, &pool, SolverConfig::default());
        let paths = common::all_paths(&ex);
        common::pairwise_disjoint(&pool, &paths).map_err(TestCaseError::fail)?;

        let mut r = common::rng(seed);
        let p = common::concretize(&d, &plan, &mut r);
        common::concrete_agreement(&d, &p).map_err(TestCaseError::fail)?;
    }
}
