// SPDX-License-Identifier: Apache-2.0

mod common;

use proptest::prelude::*;
use rand::Rng;

use rtlsym::frontend::ast::StripLocs;
use rtlsym::frontend::{parse_source, print_module, tokenize, Token, TokenKind};

fn corpus_sources() -> Vec<(String, String)> {
    common::CORPUS
        .iter()
        .map(|n| {
            let file = format!("{n}.v");
            let text = std::fs::read_to_string(common::corpus_path(&file)).unwrap();
            (file, text)
        })
        .collect()
}

fn kinds(tokens: &[Token]) -> Vec<TokenKind> {
    tokens.iter().map(|t| t.kind.clone()).collect()
}

fn assert_increasing(tokens: &[Token]) {
    for pair in tokens.windows(2) {
        let (a, b) = (&pair[0].loc, &pair[1].loc);
        assert!((a.line, a.col) < (b.line, b.col), "{a} then {b}");
    }
}

/// Replaces each whitespace run with random trivia.
fn scramble_trivia(text: &str, seed: u64) -> String {
    const TRIVIA: &[&str] = &[" ", "\n", "\t ", " /* note */ ", " // note\n", "\n\n  "];
    let mut r = common::rng(seed);
    let mut out = String::new();
    let mut in_ws = false;
    for ch in text.chars() {
        if ch.is_whitespace() {
            if !in_ws {
                out.push_str(TRIVIA[r.gen_range(0..TRIVIA.len())]);
            }
            in_ws = true;
        } else {
            out.push(ch);
            in_ws = false;
        }
    }
    out
}

#[test]
fn corpus_token_positions_increase() {
    for (file, text) in corpus_sources() {
        let toks = tokenize(&file, &text).unwrap();
        assert!(!toks.is_empty());
        assert_increasing(&toks);
    }
}

#[test]
fn corpus_round_trips_through_printer() {
    for (file, text) in corpus_sources() {
        let m = parse_source(&file, &text).unwrap();
        let printed = print_module(&m);
        let again = parse_source("printed.v", &printed).unwrap();
        assert_eq!(m.strip_locs(), again.strip_locs(), "{file}:\n{printed}");
        // Printing is a fixed point after one round.
        assert_eq!(print_module(&again), printed);
    }
}

#[test]
fn syntax_error_reports_one_located_diagnostic() {
    let text = std::fs::read_to_string(common::corpus_path("bad.v")).unwrap();
    let e = parse_source("bad.v", &text).unwrap_err();
    assert_eq!(
        e.to_string(),
        "bad.v:2:17: error: expected expression, found `;`"
    );
    assert_eq!(e.to_string().lines().count(), 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// Whitespace and comments change positions but never the token stream.
    #[test]
    fn trivia_does_not_change_tokens(pick in 0usize..9, seed in any::<u64>()) {
        let (file, text) = &corpus_sources()[pick];
        // The printed form has no comments, so every whitespace run is trivia.
        let text = print_module(&parse_source(file, text).unwrap());
        let base = tokenize(file, &text).unwrap();
        let scrambled = scramble_trivia(&text, seed);
        let toks = tokenize(file, &scrambled).unwrap();
        prop_assert_eq!(kinds(&toks), kinds(&base));
        assert_increasing(&toks);
    }

    #[test]
    fn random_designs_round_trip(seed in any::<u64>()) {
        let (src, _) = common::random_design(seed);
        let m = parse_source("rnd.v", &src).unwrap();
        let again = parse_source("p.v", &print_module(&m)).unwrap();
        prop_assert_eq!(m.strip_locs(), again.strip_locs());
    }

    /// Dropping a statement terminator or truncating before `endmodule` is
    /// always rejected.
    #[test]
    fn mutations_are_rejected(pick in 0usize..9, which in any::<prop::sample::Index>(), cut in any::<prop::sample::Index>()) {
        let (file, text) = &corpus_sources()[pick];
        let semis: Vec<usize> = text.match_indices(';').map(|(i, _)| i).collect();
        let i = semis[which.index(semis.len())];
        let mut dropped = text.clone();
        dropped.remove(i);
        prop_assert!(parse_source(file, &dropped).is_err());

        let end = text.rfind("endmodule").unwrap();
        let truncated = &text[..cut.index(end)];
        prop_assert!(parse_source(file, truncated).is_err());
    }
}
