// SPDX-License-Identifier: Apache-2.0

//! End-to-end steps shared by the command line and the C interface:
//! load a design, resolve a harness, generate tests, replay them, report.

use std::path::Path;
use std::time::Duration;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bv::BvPool;
use crate::elab::{elaborate, ElabError, RtlDesign};
use crate::frontend::{parse_source, FrontendError};
use crate::replay::{merge, simulate, CoverageData, CoverageError, SimError};
use crate::symexec::{
    run, validate, ExecError, Harness, HarnessError, InputPlan, RunOptions, RunOutput, TestSuite,
    VectorError,
};

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Frontend(#[from] FrontendError),
    #[error(transparent)]
    Elab(#[from] ElabError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error(transparent)]
    Exec(#[from] ExecError),
    #[error(transparent)]
    Vector(#[from] VectorError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Coverage(#[from] CoverageError),
    #[error("test {test}: replayed branch trace differs from the expected trace")]
    TraceMismatch { test: u64 },
    #[error("coverage file: {0}")]
    CoverageFile(String),
}

pub fn read_file(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), Error> {
    std::fs::write(path, contents).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Parses and elaborates Verilog text; `file` names it in diagnostics.
pub fn design_from_source(file: &str, source: &str) -> Result<RtlDesign, Error> {
    Ok(elaborate(&parse_source(file, source)?)?)
}

pub fn load_design(path: &Path) -> Result<RtlDesign, Error> {
    let src = read_file(path)?;
    design_from_source(&path.display().to_string(), &src)
}

/// Command-line overrides applied on top of a harness file.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HarnessOverrides {
    pub max_cycles: Option<u32>,
    pub max_paths: Option<u64>,
    pub max_solver_calls: Option<u64>,
    pub timeout_s: Option<u64>,
}

pub fn plan_from_text(
    text: &str,
    design: &RtlDesign,
    ov: &HarnessOverrides,
) -> Result<InputPlan, Error> {
    let mut h = Harness::parse(text)?;
    if let Some(v) = ov.max_cycles {
        h.max_cycles = v;
    }
    if let Some(v) = ov.max_paths {
        h.budgets.max_paths = v;
    }
    if let Some(v) = ov.max_solver_calls {
        h.budgets.max_solver_calls = v;
    }
    if let Some(v) = ov.timeout_s {
        h.budgets.wall_clock_s = v;
    }
    Ok(validate(&h, design)?)
}

pub fn load_plan(
    path: &Path,
    design: &RtlDesign,
    ov: &HarnessOverrides,
) -> Result<InputPlan, Error> {
    plan_from_text(&read_file(path)?, design, ov)
}

pub fn testgen(
    design: &RtlDesign,
    plan: &InputPlan,
    opts: &RunOptions,
) -> Result<RunOutput, Error> {
    let pool = BvPool::new();
    Ok(run(design, plan, &pool, opts)?)
}

/// Replays every test, checks each replayed trace against the expected
/// one, and sums the coverage.
pub fn replay_suite(
    design: &RtlDesign,
    plan: &InputPlan,
    suite: &TestSuite,
    jobs: usize,
) -> Result<CoverageData, Error> {
    let one = |t: &crate::symexec::TestCase| -> Result<CoverageData, Error> {
        let out = simulate(design, plan, t)?;
        if !t.expected_trace.is_empty() && out.trace != t.expected_trace {
            return Err(Error::TraceMismatch { test: t.id });
        }
        Ok(out.coverage)
    };
    let parts: Vec<CoverageData> = if jobs > 1 {
        let workers = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::Exec(ExecError::ThreadPool(e.to_string())))?;
        workers.install(|| suite.tests.par_iter().map(one).collect::<Result<_, _>>())?
    } else {
        suite.tests.iter().map(one).collect::<Result<_, _>>()?
    };
    let mut total = CoverageData::empty(design);
    for p in &parts {
        total = merge(&total, p)?;
    }
    Ok(total)
}

pub fn coverage_to_json(cov: &CoverageData) -> String {
    let mut s = serde_json::to_string_pretty(cov).expect("coverage serializes");
    s.push('\n');
    s
}

pub fn coverage_from_json(text: &str) -> Result<CoverageData, Error> {
    serde_json::from_str(text).map_err(|e| Error::CoverageFile(e.to_string()))
}

/// Deterministic exploration counters.
#[derive(Serialize)]
struct StatsJson<'a> {
    design: &'a str,
    max_cycles: u32,
    seed: u64,
    tests: u64,
    vectors: u64,
    paths_completed: u64,
    paths_infeasible: u64,
    paths_killed: u64,
    solver_calls: u64,
    budget_exhausted: bool,
}

pub fn stats_json(design: &RtlDesign, plan: &InputPlan, out: &RunOutput, seed: u64) -> String {
    let s = &out.stats;
    let j = StatsJson {
        design: &design.name,
        max_cycles: plan.max_cycles,
        seed,
        tests: s.tests,
        vectors: s.vectors,
        paths_completed: s.paths_completed,
        paths_infeasible: s.paths_infeasible,
        paths_killed: s.paths_killed,
        solver_calls: s.solver_calls,
        budget_exhausted: s.budget_exhausted,
    };
    let mut text = serde_json::to_string_pretty(&j).expect("stats serialize");
    text.push('\n');
    text
}

/// Process resource usage so far.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Usage {
    pub peak_rss_kb: Option<u64>,
    pub cpu: Duration,
}

pub fn usage() -> Usage {
    // SAFETY: getrusage writes only into the zero-initialized struct we pass.
    let mut ru: libc::rusage = unsafe { std::mem::zeroed() };
    let rc = unsafe { libc::getrusage(libc::RUSAGE_SELF, &mut ru) };
    if rc != 0 {
        return Usage {
            peak_rss_kb: None,
            cpu: Duration::ZERO,
        };
    }
    let tv = |t: libc::timeval| Duration::new(t.tv_sec as u64, (t.tv_usec as u32) * 1000);
    Usage {
        peak_rss_kb: Some(ru.ru_maxrss as u64),
        cpu: tv(ru.ru_utime) + tv(ru.ru_stime),
    }
}

#[derive(Serialize)]
struct TimingJson {
    tests: u64,
    vectors: u64,
    elapsed_ms: u64,
    time_min: f64,
    peak_rss_kb: Option<u64>,
    cpu_percent: f64,
}

/// Wall-clock and resource figures next to the test and vector counts.
/// These vary run to run and are kept apart from the deterministic stats.
pub fn timing_json(out: &RunOutput, usage: Usage) -> String {
    let elapsed = out.stats.elapsed;
    let secs = elapsed.as_secs_f64();
    let j = TimingJson {
        tests: out.stats.tests,
        vectors: out.stats.vectors,
        elapsed_ms: elapsed.as_millis() as u64,
        time_min: (secs / 60.0 * 1000.0).round() / 1000.0,
        peak_rss_kb: usage.peak_rss_kb,
        cpu_percent: if secs > 0.0 {
            (usage.cpu.as_secs_f64() / secs * 1000.0).round() / 10.0
        } else {
            0.0
        },
    };
    let mut text = serde_json::to_string_pretty(&j).expect("timing serializes");
    text.push('\n');
    text
}

/// The summary table printed after test generation.
pub fn summary_table(out: &RunOutput) -> String {
    let mins = out.stats.elapsed.as_secs_f64() / 60.0;
    format!(
        "Tests(#)  Test Vectors(#)  Time(Min)\n{:<8}  {:<15}  {:.2}\n",
        out.stats.tests, out.stats.vectors, mins
    )
}
