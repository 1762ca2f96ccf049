// SPDX-License-Identifier: Apache-2.0

//! Satisfiability of conjunctions of width-1 bitvector constraints.

mod bitblast;
mod cdcl;
mod external;

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::bv::{eval_with_default, Assignment, BvPool, NodeId};

pub use bitblast::{bitblast, Cnf, Lit};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum UnknownReason {
    Timeout,
    Budget,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveResult {
    /// Total over the variables of the constraints.
    Sat(Assignment),
    Unsat,
    Unknown(UnknownReason),
}

impl SolveResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SolveResult::Sat(_))
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum SolverError {
    #[error("external solver error: {0}")]
    External(String),
}

/// Resource limits for one query.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub struct Budget {
    pub max_conflicts: Option<u64>,
    pub timeout: Option<Duration>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum Backend {
    #[default]
    Builtin,
    /// Shell command that reads an SMT-LIB script on stdin.
    External(String),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SolverConfig {
    pub backend: Backend,
    pub budget: Budget,
}

/// Runs the built-in CDCL search on `cnf` and decodes the model through
/// its bit map.
pub fn sat_solve(cnf: &Cnf, budget: &Budget) -> SolveResult {
    let deadline = budget.timeout.map(|t| Instant::now() + t);
    match cdcl::solve(cnf.num_vars, &cnf.clauses, budget.max_conflicts, deadline) {
        cdcl::Outcome::Sat(model) => {
            let mut a = Assignment::new();
            for (&(var, bit), &v) in &cnf.bit_map {
                let cur = a.get(var).unwrap_or(0);
                let b = u128::from(model[v as usize]) << bit;
                a.set(var, cur | b);
            }
            SolveResult::Sat(a)
        }
        cdcl::Outcome::Unsat => SolveResult::Unsat,
        cdcl::Outcome::Unknown(r) => SolveResult::Unknown(r),
    }
}

/// Decides the conjunction of `constraints` with the configured backend.
/// Every returned model is checked against the constraints; an external
/// model that fails the check is reported as an error.
pub fn check(
    pool: &BvPool,
    constraints: &[NodeId],
    config: &SolverConfig,
) -> Result<SolveResult, SolverError> {
    if constraints.is_empty() {
        return Ok(SolveResult::Sat(Assignment::new()));
    }
    let result = match &config.backend {
        Backend::Builtin => sat_solve(&bitblast(pool, constraints), &config.budget),
        Backend::External(cmd) => external::check(pool, constraints, cmd, config.budget.timeout)?,
    };
    if let SolveResult::Sat(a) = &result {
        if let Some(&bad) = constraints
            .iter()
            .find(|&&c| eval_with_default(pool, c, a) != 1)
        {
            let msg = format!("model violates constraint node {}", bad.index());
            match config.backend {
                Backend::Builtin => panic!("internal solver error: {msg}"),
                Backend::External(_) => return Err(SolverError::External(msg)),
            }
        }
    }
    Ok(result)
}
