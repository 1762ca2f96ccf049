// SPDX-License-Identifier: Apache-2.0

mod common;

use proptest::prelude::*;

use rtlsym::elab::BranchId;
use rtlsym::flow;
use rtlsym::replay::{merge, report, simulate, CoverageData, CoverageError, SimError};
use rtlsym::symexec::{read_suite, write_suite, TestCase};

fn shaped(stmts: usize, arms: &[usize], seed: u64) -> CoverageData {
    let mut r = common::rng(seed);
    use rand::Rng;
    CoverageData {
        design: "d".into(),
        stmt_hits: (0..stmts).map(|_| r.gen_range(0..4)).collect(),
        branch_hits: arms
            .iter()
            .map(|&n| (0..n).map(|_| r.gen_range(0..4)).collect())
            .collect(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn merge_is_associative_commutative_with_identity(
        stmts in 0usize..12,
        arms in prop::collection::vec(1usize..5, 0..6),
        s1 in any::<u64>(), s2 in any::<u64>(), s3 in any::<u64>(),
    ) {
        let (a, b, c) = (shaped(stmts, &arms, s1), shaped(stmts, &arms, s2), shaped(stmts, &arms, s3));
        let zero = CoverageData {
            design: "d".into(),
            stmt_hits: vec![0; stmts],
            branch_hits: arms.iter().map(|&n| vec![0; n]).collect(),
        };
        prop_assert_eq!(merge(&a, &b).unwrap(), merge(&b, &a).unwrap());
        prop_assert_eq!(
            merge(&merge(&a, &b).unwrap(), &c).unwrap(),
            merge(&a, &merge(&b, &c).unwrap()).unwrap()
        );
        prop_assert_eq!(merge(&a, &zero).unwrap(), a.clone());
        // Hit totals add up.
        let total = |x: &CoverageData| x.stmt_hits.iter().sum::<u64>()
            + x.branch_hits.iter().flatten().sum::<u64>();
        prop_assert_eq!(total(&merge(&a, &b).unwrap()), total(&a) + total(&b));
    }

    #[test]
    fn merge_rejects_other_shapes(stmts in 1usize..8, extra in 1usize..3) {
        let a = shaped(stmts, &[2], 1);
        let b = shaped(stmts + extra, &[2], 2);
        prop_assert!(matches!(merge(&a, &b), Err(CoverageError::DesignMismatch(_))));
        let mut c = a.clone();
        c.design = "other".into();
        prop_assert!(merge(&a, &c).is_err());
    }
}

#[test]
fn mux_single_test_report() {
    let (d, plan) = common::load("mux");
    let sel = d.lookup("sel").unwrap();
    let din_0 = d.lookup("din_0").unwrap();
    let din_1 = d.lookup("din_1").unwrap();
    let t = TestCase {
        id: 0,
        vectors: vec![vec![(din_0, 0), (din_1, 0), (sel, 0)]],
        expected_trace: vec![(BranchId(0), 0)],
    };
    let cov = simulate(&d, &plan, &t).unwrap().coverage;
    let r = report(&d, &cov).unwrap();
    assert_eq!((r.stmt_covered, r.stmt_total), (1, 2));
    assert_eq!((r.branch_covered, r.branch_total), (1, 2));
    assert_eq!(r.stmt_pct.to_string(), "50.0");
    let file = common::corpus_path("mux.v").display().to_string();
    assert_eq!(
        r.to_text(),
        format!(
            "coverage report for mux\n\
             statements: 1/2 (50.0%)\n\
             branches:   1/2 (50.0%)\n\
             uncovered:\n  \
             {file}:18:12 kind=branch-arm hits=0\n  \
             {file}:19:5 kind=stmt hits=0\n"
        )
    );
    let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(json["stmt_pct"], 50.0);
    assert_eq!(json["uncovered"].as_array().unwrap().len(), 2);
}

#[test]
fn coverage_json_round_trips() {
    let (d, plan) = common::load("fsm");
    let out = common::generate(&d, &plan, 1);
    let cov = flow::replay_suite(&d, &plan, &out.suite, 1).unwrap();
    let back = flow::coverage_from_json(&flow::coverage_to_json(&cov)).unwrap();
    assert_eq!(back, cov);
    // Parallel replay sums to the same counters.
    assert_eq!(flow::replay_suite(&d, &plan, &out.suite, 4).unwrap(), cov);
    // Suites survive a write/read round trip.
    let text = write_suite(&d, &out.suite);
    assert_eq!(read_suite(&d, &text).unwrap(), out.suite);
}

#[test]
fn merged_coverage_is_sum_of_per_test_hits() {
    let (d, plan) = common::load("alu");
    let out = common::generate(&d, &plan, 1);
    let cov = flow::replay_suite(&d, &plan, &out.suite, 1).unwrap();
    // Each test runs every combinational statement outside branches once,
    // so arm hits over one branch sum to the test count.
    for hits in &cov.branch_hits {
        assert_eq!(hits.iter().sum::<u64>(), out.suite.tests.len() as u64);
    }
    let mut by_hand = CoverageData::empty(&d);
    for t in &out.suite.tests {
        by_hand = merge(&by_hand, &simulate(&d, &plan, t).unwrap().coverage).unwrap();
    }
    assert_eq!(by_hand, cov);
}

#[test]
fn wrong_trace_is_reported() {
    let (d, plan) = common::load("mux");
    let mut out = common::generate(&d, &plan, 1);
    out.suite.tests[0].expected_trace = vec![(BranchId(0), 1)];
    out.suite.tests[1].expected_trace = vec![(BranchId(0), 1)];
    assert!(matches!(
        flow::replay_suite(&d, &plan, &out.suite, 1),
        Err(flow::Error::TraceMismatch { test: 0 })
    ));
}

#[test]
fn malformed_vectors_are_rejected() {
    let (d, plan) = common::load("mux");
    let sel = d.lookup("sel").unwrap();
    let t = TestCase {
        id: 3,
        vectors: vec![vec![(sel, 1)]],
        expected_trace: vec![],
    };
    assert!(matches!(
        simulate(&d, &plan, &t),
        Err(SimError::Vector { test: 3, .. })
    ));
    let t = TestCase {
        id: 4,
        vectors: vec![],
        expected_trace: vec![],
    };
    assert!(simulate(&d, &plan, &t).is_err());

    for bad in [
        "testsuite other tests=0\n",
        "testsuite mux tests=1\n",
        "testsuite mux tests=1\ntest 0\ncycle 1: sel=0x0\nend\n",
        "testsuite mux tests=1\ntest 0\ncycle 0: sel=0x2 din_0=0x0 din_1=0x0\nend\n",
        "testsuite mux tests=1\ntest 0\ncycle 0: mux_out=0x0\nend\n",
        "testsuite mux tests=1\ntest 0\ncycle 0: sel=0x0\ntrace 0:2\nend\n",
        "testsuite mux tests=1\ntest 0\ncycle 0: sel=0x0 sel=0x1\nend\n",
    ] {
        assert!(read_suite(&d, bad).is_err(), "{bad}");
    }
}

#[test]
fn report_rejects_foreign_coverage() {
    let (mux, _) = common::load("mux");
    let (alu, _) = common::load("alu");
    assert!(report(&mux, &CoverageData::empty(&alu)).is_err());
}
