//! Subcommand definitions and their execution. Each command returns the JSON
//! document, a human summary for the error stream and an exit code; `main`
//! does the printing.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use iscg_core::solver::{
    find_stable, is_c_stable, is_nash, is_pareto, is_super_strong, run_dynamics, CanonicalPolicy, SolveMode,
    SolveOptions, StabilityReport, Terminal,
};
use iscg_core::verify::generator::random_feasible;
use iscg_core::verify::suites::{
    LEMMA1_CASES, LEMMA2_INSTANCES, LEMMA3A_CASES, LEMMA3B_CASES, PROOF_PAIRS, THEOREM_CASES,
};
use iscg_core::verify::{
    lemma1_suite, lemma2_suite, lemma3a_suite, lemma3b_suite, proof_suites, reproduce_examples, theorem_suites,
    SuiteReport,
};
use iscg_core::{CoalitionStructure, IscgError, Limits};

use crate::error::{exit, CliError};
use crate::files::{
    assignment_out, read_json, to_json, AllocationFile, ExamplesOut, InstanceFile, Kernels, ReportFile, SolverOut,
    StabilityOut, SuiteOut, TraceFile, VerifyFile, TOOL, VERSION,
};

#[derive(Debug, Parser)]
#[command(name = "iscg", version, about = "Stability checks and solver for identical singleton congestion games")]
pub struct Cli {
    /// Worker threads (defaults to available parallelism). Output does not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check an allocation for Nash, Pareto, partition and super strong stability.
    Check(CheckArgs),
    /// Compute an allocation that is Nash, Pareto and partition stable.
    Solve(SolveArgs),
    /// Run the seeded property suites.
    Verify(VerifyArgs),
    /// Follow blocking deviations from a start allocation.
    Dynamics(DynamicsArgs),
    /// Reproduce the worked examples (same as `verify --suite examples`).
    Examples(OutArg),
}

#[derive(Debug, Args)]
pub struct OutArg {
    /// Write the JSON report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    pub instance: PathBuf,
    pub allocation: PathBuf,
    #[arg(long)]
    pub nash: bool,
    #[arg(long)]
    pub pareto: bool,
    /// Stability against the coalitions listed in the instance file.
    #[arg(long)]
    pub partition: bool,
    #[arg(long)]
    pub super_strong: bool,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Heuristic,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub instance: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::Heuristic)]
    pub mode: ModeArg,
    /// Longest augmenting chain (in resources) tried by the heuristic.
    #[arg(long)]
    pub chain_limit: Option<usize>,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Lemmas,
    Theorem,
    Proof,
    Examples,
    All,
}

impl SuiteArg {
    fn name(self) -> &'static str {
        match self {
            SuiteArg::Lemmas => "lemmas",
            SuiteArg::Theorem => "theorem",
            SuiteArg::Proof => "proof",
            SuiteArg::Examples => "examples",
            SuiteArg::All => "all",
        }
    }
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = SuiteArg::All)]
    pub suite: SuiteArg,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Cases per suite; each suite has its own default.
    #[arg(long)]
    pub cases: Option<u64>,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Canonical,
}

#[derive(Debug, Args)]
pub struct DynamicsArgs {
    pub instance: PathBuf,
    /// An allocation file, or `random` for a seeded feasible start.
    #[arg(long)]
    pub start: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = PolicyArg::Canonical)]
    pub policy: PolicyArg,
    #[arg(long, default_value_t = 1000)]
    pub max_steps: usize,
    #[command(flatten)]
    pub out: OutArg,
}

/// What a command produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub json: String,
    pub summary: Vec<String>,
    pub code: i32,
}

impl Output {
    /// Writes the JSON to `out` or returns it for standard output.
    pub fn emit(&self, out: Option<&Path>) -> Result<Option<&str>, CliError> {
        match out {
            Some(path) => {
                std::fs::write(path, &self.json)
                    .map_err(|source| CliError::Write { path: path.display().to_string(), source })?;
                Ok(None)
            }
            None => Ok(Some(&self.json)),
        }
    }
}

impl Command {
    pub fn out_path(&self) -> Option<&Path> {
        match self {
            Command::Check(a) => a.out.out.as_deref(),
            Command::Solve(a) => a.out.out.as_deref(),
            Command::Verify(a) => a.out.out.as_deref(),
            Command::Dynamics(a) => a.out.out.as_deref(),
            Command::Examples(a) => a.out.as_deref(),
        }
    }
}

pub fn run(command: &Command) -> Result<Output, CliError> {
    let limits = Limits::from_env()?;
    match command {
        Command::Check(args) => check(args, &limits),
        Command::Solve(args) => solve(args, &limits),
        Command::Verify(args) => verify(args.suite, args.seed, args.cases, &limits),
        Command::Examples(_) => verify(SuiteArg::Examples, 7, None, &limits),
        Command::Dynamics(args) => dynamics(args, &limits),
    }
}

fn elapsed_ms(start: Instant) -> u64 {
    start.elapsed().as_millis() as u64
}

fn check_lines(stability: &StabilityOut) -> Vec<String> {
    stability.checks().map(|(name, c)| format!("{name}: {}", if c.holds { "holds" } else { "fails" })).collect()
}

fn check(args: &CheckArgs, limits: &Limits) -> Result<Output, CliError> {
    let started = Instant::now();
    let file: InstanceFile = read_json(&args.instance)?;
    let (inst, structure) = file.parse()?;
    let a = read_json::<AllocationFile>(&args.allocation)?.parse(&inst)?;

    let none_requested = !(args.nash || args.pareto || args.partition || args.super_strong);
    let want_partition = args.partition || (none_requested && structure.is_some());
    if want_partition && structure.is_none() {
        return Err(CliError::Input("--partition needs \"coalitions\" in the instance file".into()));
    }
    let report = StabilityReport {
        nash: (args.nash || none_requested).then(|| is_nash(&inst, &a)).transpose()?,
        pareto: (args.pareto || none_requested).then(|| is_pareto(&inst, &a, limits)).transpose()?,
        partition_stable: match (&structure, want_partition) {
            (Some(s), true) => Some(is_c_stable(&inst, &a, s, limits)?),
            _ => None,
        },
        super_strong: args.super_strong.then(|| is_super_strong(&inst, &a, limits)).transpose()?,
    };
    let stability = StabilityOut::of(&report);
    let code = if stability.all_hold() { exit::OK } else { exit::PROPERTY_FALSE };
    let summary = check_lines(&stability);
    let out = ReportFile {
        tool: TOOL.into(),
        version: VERSION.into(),
        command: "check".into(),
        seed: None,
        allocation: assignment_out(&a),
        kernels: Kernels::of(&a, structure.as_ref()),
        stability,
        solver: None,
        timing_ms: elapsed_ms(started),
    };
    Ok(Output { json: to_json(&out), summary, code })
}

fn solve(args: &SolveArgs, limits: &Limits) -> Result<Output, CliError> {
    let started = Instant::now();
    let file: InstanceFile = read_json(&args.instance)?;
    let (inst, structure) = file.parse()?;
    let structure = structure.unwrap_or_else(|| CoalitionStructure::singletons(inst.agent_count()));
    if !structure.is_partition() {
        return Err(CliError::Input("solve needs the coalitions to form a partition".into()));
    }
    let mode = match args.mode {
        ModeArg::Exact => SolveMode::Exact,
        ModeArg::Heuristic => SolveMode::Heuristic,
    };
    let opts = SolveOptions { mode, chain_limit: args.chain_limit, limits: *limits };
    let sol = find_stable(&inst, &structure, &opts)?;
    let stability = StabilityOut::of(&sol.report);
    let mut summary = vec![format!("allocation: {:?}", assignment_out(&sol.allocation))];
    summary.extend(check_lines(&stability));
    if sol.fell_back {
        summary.push("heuristic result was not certified; used the exact solver".into());
    }
    let code = if stability.all_hold() { exit::OK } else { exit::PROPERTY_FALSE };
    let out = ReportFile {
        tool: TOOL.into(),
        version: VERSION.into(),
        command: "solve".into(),
        seed: None,
        allocation: assignment_out(&sol.allocation),
        kernels: Kernels::of(&sol.allocation, Some(&structure)),
        stability,
        solver: Some(SolverOut {
            mode: args.mode.to_possible_value().unwrap().get_name().into(),
            fell_back: sol.fell_back,
        }),
        timing_ms: elapsed_ms(started),
    };
    Ok(Output { json: to_json(&out), summary, code })
}

fn verify(suite: SuiteArg, seed: u64, cases: Option<u64>, limits: &Limits) -> Result<Output, CliError> {
    let started = Instant::now();
    let n = |default: u64| cases.unwrap_or(default);
    let mut reports: Vec<SuiteReport> = Vec::new();
    if matches!(suite, SuiteArg::Lemmas | SuiteArg::All) {
        reports.push(lemma1_suite(seed, n(LEMMA1_CASES)));
        reports.push(lemma2_suite(seed, n(LEMMA2_INSTANCES), limits));
        reports.push(lemma3a_suite(seed, n(LEMMA3A_CASES), limits));
        reports.push(lemma3b_suite(seed, n(LEMMA3B_CASES), limits));
    }
    if matches!(suite, SuiteArg::Theorem | SuiteArg::All) {
        let t = theorem_suites(seed, n(THEOREM_CASES), limits);
        reports.extend([t.theorem, t.appendix, t.solver]);
    }
    if matches!(suite, SuiteArg::Proof | SuiteArg::All) {
        let p = proof_suites(seed, n(PROOF_PAIRS), limits);
        reports.extend([p.replay, p.vacuity]);
    }
    let examples = if matches!(suite, SuiteArg::Examples | SuiteArg::All) {
        Some(match reproduce_examples(limits) {
            Ok(r) => ExamplesOut { passed: true, lines: r.lines, error: None },
            Err(e @ IscgError::PropertyViolated(_)) => {
                ExamplesOut { passed: false, lines: Vec::new(), error: Some(e.to_string()) }
            }
            Err(e) => return Err(e.into()),
        })
    } else {
        None
    };

    let mut summary: Vec<String> = reports.iter().map(SuiteReport::summary).collect();
    if let Some(ex) = &examples {
        summary.extend(ex.lines.iter().cloned());
        summary.push(match &ex.error {
            None => "examples: all claims reproduced".into(),
            Some(e) => format!("examples: FAILED: {e}"),
        });
    }
    let passed = reports.iter().all(SuiteReport::passed) && examples.as_ref().is_none_or(|e| e.passed);
    let out = VerifyFile {
        tool: TOOL.into(),
        version: VERSION.into(),
        suite: suite.name().into(),
        seed,
        suites: reports.iter().map(SuiteOut::of).collect(),
        examples,
        passed,
        timing_ms: elapsed_ms(started),
    };
    Ok(Output { json: to_json(&out), summary, code: if passed { exit::OK } else { exit::PROPERTY_FALSE } })
}

fn dynamics(args: &DynamicsArgs, limits: &Limits) -> Result<Output, CliError> {
    let started = Instant::now();
    let file: InstanceFile = read_json(&args.instance)?;
    let (inst, structure) = file.parse()?;
    let structure = structure.unwrap_or_else(|| CoalitionStructure::singletons(inst.agent_count()));
    let (start, seed) = if args.start == "random" {
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
        (random_feasible(&inst, &mut rng), Some(args.seed))
    } else {
        (read_json::<AllocationFile>(Path::new(&args.start))?.parse(&inst)?, None)
    };
    let trace = match args.policy {
        PolicyArg::Canonical => run_dynamics(&inst, &structure, &start, &CanonicalPolicy, args.max_steps, limits)?,
    };
    let terminal = match trace.terminal {
        Terminal::Stable => "stable".to_string(),
        Terminal::Cycle { start } => format!("cycle back to step {start}"),
        Terminal::StepLimit => "step limit".to_string(),
    };
    let summary = vec![
        format!("{} steps, terminal: {terminal}", trace.steps.len()),
        format!("final allocation: {:?}", assignment_out(trace.last())),
    ];
    let code = if trace.terminal == Terminal::Stable { exit::OK } else { exit::PROPERTY_FALSE };
    let out = TraceFile::of(&trace, "canonical", args.max_steps, seed, elapsed_ms(started));
    Ok(Output { json: to_json(&out), summary, code })
}
