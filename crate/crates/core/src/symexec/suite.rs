// SPDX-License-Identifier: Apache-2.0

//! Line-oriented test-suite files.
//!
//! ```text
//! testsuite mux tests=2
//! test 0
//! cycle 0: sel=0x0 din_0=0x1 din_1=0x0
//! trace 0:0
//! end
//! ```
//!
//! Vector signals appear in declaration order with hex zero-padded to the
//! signal's nibble count. The `trace` line holds the expected
//! `branch:arm` sequence and may be omitted by hand-written suites.

use std::fmt::Write;

use thiserror::Error;

use crate::bv::mask;
use crate::elab::{BranchId, RtlDesign, SignalId, SignalKind};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TestCase {
    pub id: u64,
    /// One entry per executed cycle: controlled inputs in declaration order.
    pub vectors: Vec<Vec<(SignalId, u128)>>,
    pub expected_trace: Vec<(BranchId, u32)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TestSuite {
    pub design: String,
    pub tests: Vec<TestCase>,
}

impl TestSuite {
    pub fn total_vectors(&self) -> u64 {
        self.tests.iter().map(|t| t.vectors.len() as u64).sum()
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("test suite line {line}: {message}")]
pub struct VectorError {
    pub line: usize,
    pub message: String,
}

fn digits(width: u32) -> usize {
    width.div_ceil(4) as usize
}

pub fn write_suite(design: &RtlDesign, suite: &TestSuite) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "testsuite {} tests={}",
        suite.design,
        suite.tests.len()
    );
    for t in &suite.tests {
        let _ = writeln!(out, "test {}", t.id);
        for (k, v) in t.vectors.iter().enumerate() {
            let _ = write!(out, "cycle {k}:");
            for &(s, value) in v {
                let sig = design.signal(s);
                let _ = write!(out, " {}=0x{:0w$x}", sig.name, value, w = digits(sig.width));
            }
            out.push('\n');
        }
        out.push_str("trace");
        for (b, arm) in &t.expected_trace {
            let _ = write!(out, " {}:{arm}", b.0);
        }
        out.push_str("\nend\n");
    }
    out
}

pub fn read_suite(design: &RtlDesign, text: &str) -> Result<TestSuite, VectorError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let fail = |line: usize, message: String| VectorError { line, message };

    let (ln, header) = lines
        .next()
        .ok_or_else(|| fail(1, "empty test suite".into()))?;
    let mut parts = header.split_whitespace();
    let (Some("testsuite"), Some(name), Some(count), None) =
        (parts.next(), parts.next(), parts.next(), parts.next())
    else {
        return Err(fail(ln, "expected `testsuite <design> tests=<n>`".into()));
    };
    if name != design.name {
        return Err(fail(
            ln,
            format!("suite is for `{name}`, design is `{}`", design.name),
        ));
    }
    let expected: usize = count
        .strip_prefix("tests=")
        .and_then(|c| c.parse().ok())
        .ok_or_else(|| fail(ln, format!("bad test count `{count}`")))?;

    let mut tests = Vec::new();
    while let Some((ln, line)) = lines.next() {
        let id: u64 = line
            .strip_prefix("test ")
            .and_then(|i| i.trim().parse().ok())
            .ok_or_else(|| fail(ln, format!("expected `test <id>`, found `{line}`")))?;
        let mut vectors = Vec::new();
        let mut trace = Vec::new();
        loop {
            let (ln, line) = lines
                .next()
                .ok_or_else(|| fail(ln, "test not terminated by `end`".into()))?;
            if line == "end" {
                break;
            }
            if let Some(rest) = line.strip_prefix("trace") {
                for item in rest.split_whitespace() {
                    let parsed = item
                        .split_once(':')
                        .and_then(|(b, a)| Some((b.parse::<u32>().ok()?, a.parse::<u32>().ok()?)));
                    let Some((b, a)) = parsed else {
                        return Err(fail(ln, format!("bad trace item `{item}`")));
                    };
                    let Some(info) = design.branch_table.get(b as usize) else {
                        return Err(fail(ln, format!("unknown branch {b}")));
                    };
                    if a as usize >= info.arms() {
                        return Err(fail(ln, format!("branch {b} has no arm {a}")));
                    }
                    trace.push((BranchId(b), a));
                }
                continue;
            }
            let Some((head, body)) = line.split_once(':') else {
                return Err(fail(
                    ln,
                    format!("expected `cycle <k>: ...`, found `{line}`"),
                ));
            };
            let k: usize = head
                .strip_prefix("cycle ")
                .and_then(|k| k.trim().parse().ok())
                .ok_or_else(|| fail(ln, format!("bad cycle header `{head}`")))?;
            if k != vectors.len() {
                return Err(fail(ln, format!("cycle {k} out of sequence")));
            }
            let mut v = Vec::new();
            for item in body.split_whitespace() {
                let (name, value) = item
                    .split_once('=')
                    .ok_or_else(|| fail(ln, format!("bad assignment `{item}`")))?;
                let id = design
                    .lookup(name)
                    .filter(|&s| design.signal(s).kind == SignalKind::Input)
                    .ok_or_else(|| fail(ln, format!("`{name}` is not a design input")))?;
                let value = value
                    .strip_prefix("0x")
                    .and_then(|h| u128::from_str_radix(h, 16).ok())
                    .ok_or_else(|| fail(ln, format!("bad value `{value}`")))?;
                let width = design.signal(id).width;
                if value > mask(width) {
                    return Err(fail(ln, format!("value for `{name}` exceeds {width} bits")));
                }
                if v.iter().any(|&(s, _)| s == id) {
                    return Err(fail(ln, format!("`{name}` assigned twice")));
                }
                v.push((id, value));
            }
            vectors.push(v);
        }
        tests.push(TestCase {
            id,
            vectors,
            expected_trace: trace,
        });
    }
    if tests.len() != expected {
        return Err(fail(
            ln,
            format!("header announces {expected} tests, found {}", tests.len()),
        ));
    }
    Ok(TestSuite {
        design: design.name.clone(),
        tests,
    })
}
