// SPDX-License-Identifier: Apache-2.0

//! Concrete replay of generated tests with statement and branch-arm coverage.

mod sim;

use std::fmt::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::elab::RtlDesign;
use crate::frontend::SourceLoc;

pub use sim::{simulate, SimError, SimOutcome, SimState};

/// Hit counters shaped by one design's statement and branch tables.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageData {
    pub design: String,
    /// Indexed by `StmtId`.
    pub stmt_hits: Vec<u64>,
    /// Indexed by `BranchId`, then arm.
    pub branch_hits: Vec<Vec<u64>>,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum CoverageError {
    #[error("coverage data are for different designs or table shapes ({0})")]
    DesignMismatch(String),
}

impl CoverageData {
    /// All counters zero.
    pub fn empty(design: &RtlDesign) -> Self {
        CoverageData {
            design: design.name.clone(),
            stmt_hits: vec![0; design.stmt_table.len()],
            branch_hits: design
                .branch_table
                .iter()
                .map(|b| vec![0; b.arms()])
                .collect(),
        }
    }

    fn same_shape(&self, other: &Self) -> bool {
        self.design == other.design
            && self.stmt_hits.len() == other.stmt_hits.len()
            && self.branch_hits.len() == other.branch_hits.len()
            && self
                .branch_hits
                .iter()
                .zip(&other.branch_hits)
                .all(|(a, b)| a.len() == b.len())
    }

    /// True when the shape matches `design`'s tables.
    pub fn fits(&self, design: &RtlDesign) -> bool {
        self.same_shape(&CoverageData::empty(design))
    }
}

/// Pointwise sum.
pub fn merge(a: &CoverageData, b: &CoverageData) -> Result<CoverageData, CoverageError> {
    if !a.same_shape(b) {
        return Err(CoverageError::DesignMismatch(format!(
            "`{}` vs `{}`",
            a.design, b.design
        )));
    }
    Ok(CoverageData {
        design: a.design.clone(),
        stmt_hits: a
            .stmt_hits
            .iter()
            .zip(&b.stmt_hits)
            .map(|(x, y)| x + y)
            .collect(),
        branch_hits: a
            .branch_hits
            .iter()
            .zip(&b.branch_hits)
            .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p + q).collect())
            .collect(),
    })
}

/// A percentage held in tenths so rounding is exact.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Percent {
    pub tenths: u64,
}

impl Percent {
    /// `100 * covered / total` rounded half-up to one decimal; an empty
    /// universe counts as fully covered.
    pub fn of(covered: u64, total: u64) -> Percent {
        if total == 0 {
            return Percent { tenths: 1000 };
        }
        Percent {
            tenths: (2000 * covered + total) / (2 * total),
        }
    }

    pub fn as_f64(self) -> f64 {
        self.tenths as f64 / 10.0
    }
}

impl fmt::Display for Percent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.tenths / 10, self.tenths % 10)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum DetailKind {
    Stmt,
    BranchArm,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DetailRow {
    pub loc: SourceLoc,
    pub kind: DetailKind,
    pub hits: u64,
}

impl fmt::Display for DetailRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            DetailKind::Stmt => "stmt",
            DetailKind::BranchArm => "branch-arm",
        };
        write!(f, "{} kind={kind} hits={}", self.loc, self.hits)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverageReport {
    pub design: String,
    pub stmt_covered: u64,
    pub stmt_total: u64,
    pub stmt_pct: Percent,
    pub branch_covered: u64,
    pub branch_total: u64,
    pub branch_pct: Percent,
    /// Uncovered statements and arms, by (line, col).
    pub rows: Vec<DetailRow>,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    design: &'a str,
    stmt_covered: u64,
    stmt_total: u64,
    stmt_pct: f64,
    branch_covered: u64,
    branch_total: u64,
    branch_pct: f64,
    uncovered: Vec<String>,
}

impl CoverageReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "coverage report for {}", self.design);
        let _ = writeln!(
            out,
            "statements: {}/{} ({}%)",
            self.stmt_covered, self.stmt_total, self.stmt_pct
        );
        let _ = writeln!(
            out,
            "branches:   {}/{} ({}%)",
            self.branch_covered, self.branch_total, self.branch_pct
        );
        if !self.rows.is_empty() {
            out.push_str("uncovered:\n");
            for r in &self.rows {
                let _ = writeln!(out, "  {r}");
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        let j = ReportJson {
            design: &self.design,
            stmt_covered: self.stmt_covered,
            stmt_total: self.stmt_total,
            stmt_pct: self.stmt_pct.as_f64(),
            branch_covered: self.branch_covered,
            branch_total: self.branch_total,
            branch_pct: self.branch_pct.as_f64(),
            uncovered: self.rows.iter().map(|r| r.to_string()).collect(),
        };
        let mut s = serde_json::to_string_pretty(&j).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Summarizes `cov` against `design`'s tables.
pub fn report(design: &RtlDesign, cov: &CoverageData) -> Result<CoverageReport, CoverageError> {
    if !cov.fits(design) {
        return Err(CoverageError::DesignMismatch(format!(
            "`{}` vs `{}`",
            cov.design, design.name
        )));
    }
    let mut rows = Vec::new();
    let mut stmt_covered = 0;
    for (info, &hits) in design.stmt_table.iter().zip(&cov.stmt_hits) {
        if hits > 0 {
            stmt_covered += 1;
        } else {
            rows.push(DetailRow {
                loc: info.loc.clone(),
                kind: DetailKind::Stmt,
                hits,
            });
        }
    }
    let mut branch_covered = 0;
    for (info, hits) in design.branch_table.iter().zip(&cov.branch_hits) {
        for (loc, &h) in info.arm_locs.iter().zip(hits) {
            if h > 0 {
                branch_covered += 1;
            } else {
                rows.push(DetailRow {
                    loc: loc.clone(),
                    kind: DetailKind::BranchArm,
                    hits: h,
                });
            }
        }
    }
    rows.sort_by(|a, b| (a.loc.line, a.loc.col, a.kind).cmp(&(b.loc.line, b.loc.col, b.kind)));
    let stmt_total = design.stmt_table.len() as u64;
    let branch_total = design.total_branch_arms() as u64;
    Ok(CoverageReport {
        design: design.name.clone(),
        stmt_covered,
        stmt_total,
        stmt_pct: Percent::of(stmt_covered, stmt_total),
        branch_covered,
        branch_total,
        branch_pct: Percent::of(branch_covered, branch_total),
        rows,
    })
}
