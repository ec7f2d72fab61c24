//! `sbstlab`: generate benchmark programs, test them with the GA or the
//! random baseline, and run or re-report the full experiment.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use sbstlab::exec_cov::{run_suite, Criterion, ExecLimits};
use sbstlab::ge_gen::{evolve_programs, GeConfig, GrammarParams, Target};
use sbstlab::harness::{
    rerender, run_experiment, sha256_hex, significance_note, Budgets, CellResult, ExperimentPlan,
    Level,
};
use sbstlab::search::{run_ga, run_random, GaConfig, InputDomain, RandomConfig, SearchOutcome};
use sbstlab::sut_lang::{parse, render, Program};

#[derive(Parser)]
#[command(
    name = "sbstlab",
    version,
    about = "Search-based software testing laboratory"
)]
struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve programs with a target statement or branch count.
    Gen(GenArgs),
    /// Search a test suite for a program with the genetic algorithm.
    RunGa(RunArgs),
    /// Search a test suite for a program by random sampling.
    RunRandom(RunArgs),
    /// Run the factorial GA-versus-random experiment.
    Experiment(ExperimentArgs),
    /// Recompute tables and figures of a finished run directory.
    Report(ReportArgs),
}

#[derive(Args)]
struct Scale {
    /// Small budgets that finish in minutes (default).
    #[arg(long, conflicts_with = "paper_scale")]
    desk_scale: bool,
    /// Full budgets: populations of 200 over 10000 generations, 100000 random suites.
    #[arg(long)]
    paper_scale: bool,
}

impl Scale {
    fn budgets(&self) -> Budgets {
        if self.paper_scale {
            Budgets::PAPER
        } else {
            Budgets::DESK
        }
    }
}

#[derive(Args)]
struct GenArgs {
    /// Size target, `statements=<n>` or `branches=<n>`.
    #[arg(long)]
    target: Target,
    /// Number of distinct programs.
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..))]
    count: u32,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output directory [default: gen-<seed>].
    #[arg(long, env = "SBSTLAB_OUT")]
    out: Option<PathBuf>,
    /// Inputs per program.
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..))]
    input_arity: u32,
    #[command(flatten)]
    scale: Scale,
}

#[derive(Args)]
struct RunArgs {
    /// Program file in the sut text format.
    program: PathBuf,
    #[arg(long, default_value = "branch")]
    criterion: Criterion,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Test cases per suite.
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..))]
    suite_size: u32,
    /// Input range, `<lo>:<hi>`.
    #[arg(long, default_value = "-1000000:1000000", allow_hyphen_values = true)]
    domain: InputDomain,
    /// Iteration cap per loop execution.
    #[arg(long, default_value_t = 1000)]
    max_loop_iters: u32,
    #[command(flatten)]
    scale: Scale,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Plan file of `key = value` lines; flags override it.
    #[arg(long)]
    plan: Option<PathBuf>,
    /// Master seed [default: the plan's, else 42].
    #[arg(long)]
    seed: Option<u64>,
    /// Run directory [default: run-<seed>].
    #[arg(long, env = "SBSTLAB_OUT")]
    out: Option<PathBuf>,
    /// Restrict to one criterion.
    #[arg(long)]
    criterion: Option<Criterion>,
    /// Restrict to one complexity level.
    #[arg(long)]
    level: Option<Level>,
    /// Override the target of the selected level(s), e.g. `branches=40`.
    #[arg(long)]
    target: Option<Target>,
    /// Programs evolved per cell.
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..))]
    programs_per_cell: Option<u32>,
    /// Test cases per suite.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    suite_size: Option<u32>,
    /// Inputs per program.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    input_arity: Option<u32>,
    /// Iteration cap per loop execution.
    #[arg(long)]
    max_loop_iters: Option<u32>,
    /// Input range, `<lo>:<hi>`.
    #[arg(long, allow_hyphen_values = true)]
    domain: Option<InputDomain>,
    #[command(flatten)]
    scale: Scale,
}

#[derive(Args)]
struct ReportArgs {
    /// Run directory written by `experiment`.
    run_dir: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            bail!("--jobs must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("cannot start worker pool")?;
    }
    match cli.command {
        Command::Gen(a) => gen(a),
        Command::RunGa(a) => search(a, true),
        Command::RunRandom(a) => search(a, false),
        Command::Experiment(a) => experiment(a),
        Command::Report(a) => report(a),
    }
}

fn gen(a: GenArgs) -> Result<()> {
    println!("seed: {}", a.seed);
    let budgets = a.scale.budgets();
    let cfg = GeConfig {
        population_size: budgets.ge_population,
        generations: budgets.ge_generations,
        grammar: GrammarParams {
            input_arity: a.input_arity,
            ..GrammarParams::default()
        },
        seed: a.seed,
        ..GeConfig::paper(a.target)
    };
    let out = a
        .out
        .unwrap_or_else(|| PathBuf::from(format!("gen-{}", a.seed)));
    let suts = out.join("suts");
    fs::create_dir_all(&suts).with_context(|| format!("cannot create {}", suts.display()))?;
    let programs = evolve_programs(&cfg, a.count as usize)?;

    let mut manifest = String::from(
        "file,targetKind,targetValue,achievedValue,geFitness,seed,withinTolerance,sha256\n",
    );
    for (i, e) in programs.iter().enumerate() {
        let file = format!(
            "suts/{}-{}-{}.sut",
            a.target.kind(),
            a.target.value(),
            i + 1
        );
        let name = format!("{}_{}_{}", a.target.kind(), a.target.value(), i + 1);
        let text = render(&e.program.clone().renamed(name));
        let path = out.join(&file);
        fs::write(&path, &text).with_context(|| format!("cannot write {}", path.display()))?;
        manifest.push_str(&format!(
            "{file},{},{},{},{},{},{},{}\n",
            a.target.kind(),
            a.target.value(),
            e.achieved,
            e.score,
            e.seed,
            e.within_tolerance,
            sha256_hex(text.as_bytes())
        ));
        println!(
            "{file}: {} {} (target {}){}",
            e.achieved,
            a.target.kind(),
            a.target.value(),
            if e.within_tolerance {
                ""
            } else {
                ", outside tolerance"
            }
        );
    }
    let path = out.join("manifest.csv");
    fs::write(&path, manifest).with_context(|| format!("cannot write {}", path.display()))?;
    println!("wrote {} programs to {}", programs.len(), out.display());
    Ok(())
}

fn load_program(path: &Path) -> Result<Program> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            bail!("{}: file not found", path.display())
        }
        Err(e) => return Err(e).with_context(|| format!("cannot read {}", path.display())),
    };
    parse(&text).with_context(|| format!("{}: not a valid program", path.display()))
}

fn search(a: RunArgs, ga: bool) -> Result<()> {
    let program = load_program(&a.program)?;
    println!("seed: {}", a.seed);
    let budgets = a.scale.budgets();
    let limits = ExecLimits {
        max_loop_iterations: a.max_loop_iters,
        ..ExecLimits::default()
    };
    let outcome: SearchOutcome = if ga {
        let cfg = GaConfig {
            population_size: budgets.ga_population,
            generations: budgets.ga_generations,
            suite_size: a.suite_size as usize,
            domain: a.domain,
            limits,
            ..GaConfig::new(a.criterion, a.seed)
        };
        run_ga(&program, &cfg)?
    } else {
        let cfg = RandomConfig {
            trials: budgets.random_trials,
            suite_size: a.suite_size as usize,
            domain: a.domain,
            limits,
            ..RandomConfig::new(a.criterion, a.seed)
        };
        run_random(&program, &cfg)?
    };
    let report = run_suite(&program, &outcome.best_suite.to_test_cases(), limits)?;
    println!(
        "{} coverage: {:.2}%",
        a.criterion, outcome.best_coverage_pct
    );
    println!(
        "statement coverage: {:.2}%, branch coverage: {:.2}%",
        report.statement_pct, report.branch_pct
    );
    println!("suite evaluations: {}", outcome.evaluations_used);
    println!("best suite:");
    for case in outcome.best_suite.cases() {
        let vals: Vec<String> = case.iter().map(|v| v.to_string()).collect();
        println!("  ({})", vals.join(", "));
    }
    Ok(())
}

fn experiment(a: ExperimentArgs) -> Result<()> {
    let mut plan = ExperimentPlan::desk(0);
    if a.scale.paper_scale {
        plan.budgets = Budgets::PAPER;
    }
    if let Some(path) = &a.plan {
        let text = match fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                bail!("{}: file not found", path.display())
            }
            Err(e) => return Err(e).with_context(|| format!("cannot read {}", path.display())),
        };
        plan.apply_text(&text)
            .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
        if a.scale.desk_scale {
            plan.budgets = Budgets::DESK;
        } else if a.scale.paper_scale {
            plan.budgets = Budgets::PAPER;
        }
    }
    if let Some(seed) = a.seed {
        plan.master_seed = seed;
    } else if a.plan.is_none() {
        plan.master_seed = 42;
    }
    if let Some(c) = a.criterion {
        plan.criteria = vec![c];
    }
    if let Some(l) = a.level {
        plan.levels = vec![l];
    }
    if let Some(t) = a.target {
        let c = match t {
            Target::Statements(_) => Criterion::Statement,
            Target::Branches(_) => Criterion::Branch,
        };
        if !plan.criteria.contains(&c) {
            bail!("--target {t} does not match the selected criterion");
        }
        let levels = plan.levels.clone();
        let targets = match c {
            Criterion::Statement => &mut plan.statement_targets,
            Criterion::Branch => &mut plan.branch_targets,
        };
        for l in levels {
            targets[l as usize] = t.value();
        }
    }
    if let Some(n) = a.programs_per_cell {
        plan.programs_per_cell = n as usize;
    }
    if let Some(m) = a.suite_size {
        plan.suite_size = m as usize;
    }
    if let Some(k) = a.input_arity {
        plan.input_arity = k;
    }
    if let Some(n) = a.max_loop_iters {
        plan.limits.max_loop_iterations = n;
    }
    if let Some(d) = a.domain {
        plan.domain = d;
    }
    plan.check()
        .map_err(|e| anyhow::anyhow!("invalid plan: {e}"))?;

    println!("seed: {}", plan.master_seed);
    let out = a
        .out
        .unwrap_or_else(|| PathBuf::from(format!("run-{}", plan.master_seed)));
    let result = run_experiment(&plan, &out)?;
    print_table(&result.cells);
    for f in &result.failures {
        eprintln!("cell {} {} failed: {}", f.criterion, f.level, f.message);
    }
    println!("run directory: {}", out.display());
    if !result.failures.is_empty() {
        bail!(
            "{} of {} cells failed; partial results kept",
            result.failures.len(),
            result.failures.len() + result.cells.len()
        );
    }
    Ok(())
}

fn report(a: ReportArgs) -> Result<()> {
    if !a.run_dir.is_dir() {
        bail!("{}: file not found", a.run_dir.display());
    }
    let cells = rerender(&a.run_dir)?;
    print_table(&cells);
    Ok(())
}

fn print_table(cells: &[CellResult]) {
    println!(
        "{:<10} {:<7} {:>6} {:>8} {:>7} {:>8} {:>7} {:>9}",
        "criterion", "level", "target", "ga_mean", "ga_std", "rnd_mean", "rnd_std", "actual_cl"
    );
    for c in cells {
        let s = &c.summary;
        println!(
            "{:<10} {:<7} {:>6} {:>8.2} {:>7.2} {:>8.2} {:>7.2} {:>9.2}  ({})",
            c.criterion.to_string(),
            c.level.to_string(),
            c.target.value(),
            s.ga_mean,
            s.ga_std,
            s.rnd_mean,
            s.rnd_std,
            s.actual_cl(),
            significance_note(c)
        );
    }
}
