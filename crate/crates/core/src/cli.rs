// SPDX-License-Identifier: Apache-2.0

//! Command-line driver. Exit status: 0 on success, 1 on a tool error,
//! 2 on a usage error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

use crate::elab::RtlDesign;
use crate::flow::{self, Error, HarnessOverrides};
use crate::replay::report;
use crate::solver::{Backend, Budget, SolverConfig};
use crate::symexec::{read_suite, write_suite, InputPlan, RunOptions};

pub const SUITE_FILE: &str = "suite.txt";
pub const STATS_FILE: &str = "stats.json";
pub const TIMING_FILE: &str = "timing.json";
pub const COVERAGE_FILE: &str = "coverage.json";
pub const REPORT_TEXT_FILE: &str = "report.txt";
pub const REPORT_JSON_FILE: &str = "report.json";

#[derive(Parser, Debug)]
#[command(
    name = "rtlsym",
    version,
    about = "Symbolic test generation and coverage replay for synthesizable Verilog"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse and elaborate a design, then print its shape.
    Check { design: PathBuf },
    /// Generate a test suite by symbolic execution.
    Testgen {
        design: PathBuf,
        harness: PathBuf,
        #[command(flatten)]
        gen: GenArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Replay a test suite and write merged coverage. Accepts the
    /// generation flags so one configuration drives every step; only the
    /// harness overrides affect replay.
    Simulate {
        design: PathBuf,
        harness: PathBuf,
        suite: PathBuf,
        #[command(flatten)]
        gen: GenArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Render a coverage report.
    Report {
        design: PathBuf,
        coverage: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run testgen, simulate and report in sequence.
    Pipeline {
        design: PathBuf,
        harness: PathBuf,
        #[command(flatten)]
        gen: GenArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum SolverKind {
    Builtin,
    External,
}

#[derive(Args, Debug)]
struct GenArgs {
    /// Override the harness cycle bound.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    max_cycles: Option<u32>,
    /// Stop after this many completed paths.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    max_paths: Option<u64>,
    /// Stop after this many solver queries.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    max_solver_calls: Option<u64>,
    /// Wall-clock budget for exploration, in seconds.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    timeout_s: Option<u64>,
    #[arg(long, value_enum, default_value_t = SolverKind::Builtin)]
    solver: SolverKind,
    /// Shell command for an SMT-LIB solver reading a script on stdin.
    #[arg(long, required_if_eq("solver", "external"))]
    solver_cmd: Option<String>,
    /// Per-query solver time limit.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    solver_timeout_ms: Option<u64>,
    /// Recorded in the stats; exploration itself is deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Worker threads; outputs do not depend on this.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    jobs: u64,
}

impl GenArgs {
    fn overrides(&self) -> HarnessOverrides {
        HarnessOverrides {
            max_cycles: self.max_cycles,
            max_paths: self.max_paths,
            max_solver_calls: self.max_solver_calls,
            timeout_s: self.timeout_s,
        }
    }

    fn solver(&self) -> SolverConfig {
        let backend = match self.solver {
            SolverKind::Builtin => Backend::Builtin,
            SolverKind::External => {
                Backend::External(self.solver_cmd.clone().expect("enforced by clap"))
            }
        };
        SolverConfig {
            backend,
            budget: Budget {
                max_conflicts: None,
                timeout: self.solver_timeout_ms.map(Duration::from_millis),
            },
        }
    }
}

/// Parses `args` (program name first) and runs the chosen subcommand.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}\n{}", flag_reference(&args));
                2
            } else {
                let _ = write!(stdout, "{text}");
                0
            };
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "{e}");
            1
        }
    }
}

/// Help for the subcommand named in `args`, or the top-level help.
fn flag_reference(args: &[OsString]) -> String {
    let mut cmd = Cli::command();
    cmd.build();
    let name = args
        .iter()
        .skip(1)
        .filter_map(|a| a.to_str())
        .find(|a| cmd.find_subcommand(a).is_some())
        .map(str::to_owned);
    match name.and_then(|n| cmd.find_subcommand_mut(&n).cloned()) {
        Some(mut sub) => sub.render_help().to_string(),
        None => cmd.render_help().to_string(),
    }
}

fn out_dir(dir: &Path) -> Result<(), Error> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.display().to_string(),
        source,
    })
}

fn dispatch(cmd: Command, stdout: &mut dyn Write) -> Result<(), Error> {
    match cmd {
        Command::Check { design } => {
            let d = flow::load_design(&design)?;
            let _ = write!(stdout, "{}", check_summary(&d));
            Ok(())
        }
        Command::Testgen {
            design,
            harness,
            gen,
            common,
        } => {
            let d = flow::load_design(&design)?;
            let plan = flow::load_plan(&harness, &d, &gen.overrides())?;
            out_dir(&common.out)?;
            testgen_step(&d, &plan, &gen, &common, stdout)?;
            Ok(())
        }
        Command::Simulate {
            design,
            harness,
            suite,
            gen,
            common,
        } => {
            let d = flow::load_design(&design)?;
            let plan = flow::load_plan(&harness, &d, &gen.overrides())?;
            let text = flow::read_file(&suite)?;
            out_dir(&common.out)?;
            simulate_step(&d, &plan, &text, &common, stdout)?;
            Ok(())
        }
        Command::Report {
            design,
            coverage,
            out,
        } => {
            let d = flow::load_design(&design)?;
            let text = flow::read_file(&coverage)?;
            out_dir(&out)?;
            report_step(&d, &text, &out, stdout)
        }
        Command::Pipeline {
            design,
            harness,
            gen,
            common,
        } => {
            let d = flow::load_design(&design)?;
            let plan = flow::load_plan(&harness, &d, &gen.overrides())?;
            out_dir(&common.out)?;
            let suite = testgen_step(&d, &plan, &gen, &common, stdout)?;
            let coverage = simulate_step(&d, &plan, &suite, &common, stdout)?;
            report_step(&d, &coverage, &common.out, stdout)
        }
    }
}

/// Shape summary and warnings printed by `check`.
pub fn check_summary(d: &RtlDesign) -> String {
    let mut s = format!(
        "design {}: signals={} processes={} (combinational={} clocked={}) \
         statements={} branches={} arms={}\n",
        d.name,
        d.signals.len(),
        d.processes.len(),
        d.num_combinational,
        d.processes.len() - d.num_combinational,
        d.stmt_table.len(),
        d.branch_table.len(),
        d.total_branch_arms()
    );
    for w in &d.warnings {
        s.push_str(&format!("{}: warning: {}\n", w.loc, w.message));
    }
    s
}

/// Returns the suite text it wrote.
fn testgen_step(
    d: &RtlDesign,
    plan: &InputPlan,
    gen: &GenArgs,
    common: &CommonArgs,
    stdout: &mut dyn Write,
) -> Result<String, Error> {
    let opts = RunOptions {
        solver: gen.solver(),
        jobs: common.jobs as usize,
    };
    let out = flow::testgen(d, plan, &opts)?;
    let suite = write_suite(d, &out.suite);
    flow::write_file(&common.out.join(SUITE_FILE), &suite)?;
    flow::write_file(
        &common.out.join(STATS_FILE),
        &flow::stats_json(d, plan, &out, gen.seed),
    )?;
    flow::write_file(
        &common.out.join(TIMING_FILE),
        &flow::timing_json(&out, flow::usage()),
    )?;
    let _ = write!(stdout, "{}", flow::summary_table(&out));
    if out.stats.budget_exhausted {
        let _ = writeln!(stdout, "note: a budget was exhausted; the suite is partial");
    }
    Ok(suite)
}

/// Returns the coverage text it wrote.
fn simulate_step(
    d: &RtlDesign,
    plan: &InputPlan,
    suite_text: &str,
    common: &CommonArgs,
    stdout: &mut dyn Write,
) -> Result<String, Error> {
    let suite = read_suite(d, suite_text)?;
    let cov = flow::replay_suite(d, plan, &suite, common.jobs as usize)?;
    let text = flow::coverage_to_json(&cov);
    flow::write_file(&common.out.join(COVERAGE_FILE), &text)?;
    let _ = writeln!(stdout, "replayed {} tests", suite.tests.len());
    Ok(text)
}

fn report_step(
    d: &RtlDesign,
    coverage_text: &str,
    out: &Path,
    stdout: &mut dyn Write,
) -> Result<(), Error> {
    let cov = flow::coverage_from_json(coverage_text)?;
    let r = report(d, &cov)?;
    let text = r.to_text();
    flow::write_file(&out.join(REPORT_TEXT_FILE), &text)?;
    flow::write_file(&out.join(REPORT_JSON_FILE), &r.to_json())?;
    let _ = write!(stdout, "{text}");
    Ok(())
}
