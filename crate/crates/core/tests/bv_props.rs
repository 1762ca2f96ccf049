// SPDX-License-Identifier: Apache-2.0

mod common;

use proptest::prelude::*;

use rtlsym::bv::{eval_concrete, Assignment, BinaryOp, BvPool, NodeKind, UnaryOp};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(3000))]

    /// Rewrites and constant folding preserve meaning; checked on every
    /// assignment for widths up to four bits.
    #[test]
    fn simplifier_sound_exhaustive(seed in any::<u64>()) {
        common::simplifier_case(seed, 4, None).map_err(TestCaseError::fail)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn simplifier_sound_sampled_wide(seed in any::<u64>()) {
        common::simplifier_case(seed, 32, Some(64)).map_err(TestCaseError::fail)?;
    }

    /// Splitting a value and joining the halves gives the value back, and
    /// slicing a concatenation returns the matching operand.
    #[test]
    fn extract_concat_identities(w in 2u32..=128, cut in 1u32..128, v in any::<u128>()) {
        let cut = 1 + cut % (w - 1);
        let pool = BvPool::new();
        let x = pool.mk_var("x", w, 0).unwrap();
        let hi = pool.extract(w - 1, cut, x).unwrap();
        let lo = pool.extract(cut - 1, 0, x).unwrap();
        let joined = pool.binary(BinaryOp::Concat, hi, lo).unwrap();
        prop_assert_eq!(joined, x);

        let a = pool.mk_var("a", w - cut, 0).unwrap();
        let b = pool.mk_var("b", cut, 0).unwrap();
        let ab = pool.binary(BinaryOp::Concat, a, b).unwrap();
        prop_assert_eq!(pool.extract(cut - 1, 0, ab).unwrap(), b);
        prop_assert_eq!(pool.extract(w - 1, cut, ab).unwrap(), a);

        // Semantics on an unsimplified pool agree with shifting and masking.
        let raw = BvPool::without_simplification();
        let rx = raw.mk_var("x", w, 0).unwrap();
        let rh = raw.extract(w - 1, cut, rx).unwrap();
        let rl = raw.extract(cut - 1, 0, rx).unwrap();
        let rj = raw.binary(BinaryOp::Concat, rh, rl).unwrap();
        let mut asg = Assignment::new();
        let value = v & rtlsym::bv::mask(w);
        let NodeKind::Var(id) = raw.node(rx).kind else { unreachable!() };
        asg.set(id, value);
        prop_assert_eq!(eval_concrete(&raw, rj, &asg).unwrap(), value);
        prop_assert_eq!(eval_concrete(&raw, rl, &asg).unwrap(), value % (1u128 << cut));
    }

    /// Structurally equal requests return the same handle.
    #[test]
    fn hash_consing(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let widths = [4u32, 6];
        let t = common::TermGen { rng: &mut r, vars: &widths, max_width: 8 }.term(5, 4);
        let raw = BvPool::without_simplification();
        let vars: Vec<_> = ["u", "v"].iter().zip(widths).map(|(n, w)| raw.mk_var(n, w, 0).unwrap()).collect();
        let first = t.build(&raw, &vars);
        let len = raw.len();
        let again = t.build(&raw, &vars);
        prop_assert_eq!(first, again);
        prop_assert_eq!(raw.len(), len);

        let simp = BvPool::new();
        let vars: Vec<_> = ["u", "v"].iter().zip(widths).map(|(n, w)| simp.mk_var(n, w, 0).unwrap()).collect();
        prop_assert_eq!(t.build(&simp, &vars), t.build(&simp, &vars));
    }
}

#[test]
fn variables_are_keyed_by_name_and_cycle() {
    let pool = BvPool::new();
    let a0 = pool.mk_var("a", 4, 0).unwrap();
    assert_eq!(pool.mk_var("a", 4, 0).unwrap(), a0);
    assert_ne!(pool.mk_var("a", 4, 1).unwrap(), a0);
    assert!(pool.mk_var("a", 5, 0).is_err());
}

#[test]
fn constant_folding_matches_hand_values() {
    let pool = BvPool::new();
    let c = |w, v| pool.mk_const(w, v).unwrap();
    let fold = |op, a, b| pool.as_const(pool.binary(op, a, b).unwrap()).unwrap();
    assert_eq!(fold(BinaryOp::Add, c(4, 15), c(4, 1)), 0);
    assert_eq!(fold(BinaryOp::Sub, c(4, 0), c(4, 1)), 15);
    assert_eq!(fold(BinaryOp::Div, c(8, 7), c(8, 0)), 0);
    assert_eq!(fold(BinaryOp::Mod, c(8, 7), c(8, 0)), 0);
    assert_eq!(fold(BinaryOp::Shl, c(4, 3), c(3, 4)), 0);
    assert_eq!(fold(BinaryOp::Concat, c(2, 2), c(3, 5)), 0b10101);
    let n = pool.unary(UnaryOp::RedXor, c(5, 0b10110)).unwrap();
    assert_eq!(pool.as_const(n), Some(1));
}

#[test]
fn width_errors() {
    let pool = BvPool::new();
    let a = pool.mk_var("a", 4, 0).unwrap();
    let b = pool.mk_var("b", 5, 0).unwrap();
    assert!(pool.binary(BinaryOp::Add, a, b).is_err());
    assert!(pool.extract(4, 0, a).is_err());
    assert!(pool.zero_extend(b, 4).is_err());
    assert!(pool.mk_const(4, 16).is_err());
    assert!(pool.mk_var("w", 129, 0).is_err());
    assert!(pool.ite(a, a, a).is_err());
}
