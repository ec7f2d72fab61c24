//! The factorial experiment: technique x complexity level x criterion.
//!
//! For every `(criterion, level)` cell a corpus of programs is evolved to the
//! level's size target, each program is searched by both the GA and the
//! random baseline, and the two coverage vectors are summarized with a
//! Welch t-test. Everything is seeded from one master seed, and results are
//! gathered in a fixed order, so output files do not depend on scheduling.

mod plan;
mod report;

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use sha2::{Digest, Sha256};

pub use plan::{Budgets, ExperimentPlan, Level};
pub use report::{emit_csv, emit_figures, load_cells, render_figure, rerender, significance_note};

use crate::exec_cov::Criterion;
use crate::ge_gen::{evolve_programs, EvolvedProgram, GeConfig, GrammarParams, Target};
use crate::search::{run_ga, run_random, GaConfig, RandomConfig, SearchOutcome};
use crate::stats::{summarize_cell, CellSummary, StatsError};
use crate::sut_lang::render;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid plan: {0}")]
    Plan(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },
    #[error(transparent)]
    Stats(#[from] StatsError),
}

pub(crate) fn io_err(path: &Path) -> impl FnOnce(io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Technique {
    Ga,
    Random,
}

impl Technique {
    pub fn as_str(self) -> &'static str {
        match self {
            Technique::Ga => "ga",
            Technique::Random => "random",
        }
    }
}

/// Seed for one unit of work, from a SHA-256 of its coordinates.
///
/// `index` is the 1-based program index, or 0 for the cell's GE corpus.
pub fn derive_seed(
    master: u64,
    criterion: Criterion,
    level: Level,
    index: usize,
    role: &str,
) -> u64 {
    let key = format!("{master}/{criterion}/{level}/{index}/{role}");
    let digest = Sha256::digest(key.as_bytes());
    u64::from_be_bytes(digest[..8].try_into().unwrap())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// File name of a program inside the run directory.
pub fn program_file(criterion: Criterion, level: Level, index: usize) -> String {
    format!("suts/{criterion}-{level}-{index}.sut")
}

/// Both techniques' best coverage on one program.
#[derive(Debug, Clone, PartialEq)]
pub struct ProgramOutcome {
    /// Path relative to the run directory.
    pub file: String,
    pub sha256: String,
    pub ga_coverage: f64,
    pub rnd_coverage: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub criterion: Criterion,
    pub level: Level,
    pub target: Target,
    pub programs: Vec<ProgramOutcome>,
    pub summary: CellSummary,
}

impl CellResult {
    pub fn new(
        criterion: Criterion,
        level: Level,
        target: Target,
        programs: Vec<ProgramOutcome>,
    ) -> Result<Self, StatsError> {
        let ga: Vec<f64> = programs.iter().map(|p| p.ga_coverage).collect();
        let rnd: Vec<f64> = programs.iter().map(|p| p.rnd_coverage).collect();
        Ok(CellResult {
            summary: summarize_cell(&ga, &rnd)?,
            criterion,
            level,
            target,
            programs,
        })
    }

    /// Hash over the cell's program hashes, in program order.
    pub fn programs_sha256(&self) -> String {
        let joined: Vec<&str> = self.programs.iter().map(|p| p.sha256.as_str()).collect();
        sha256_hex(joined.join("\n").as_bytes())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellFailure {
    pub criterion: Criterion,
    pub level: Level,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub run_dir: PathBuf,
    pub cells: Vec<CellResult>,
    /// Cells that could not be completed; the others are still reported.
    pub failures: Vec<CellFailure>,
}

/// One search run, as logged in `runs.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub file: String,
    pub technique: Technique,
    pub criterion: Criterion,
    pub seed: u64,
    pub budget: u64,
    pub outcome: SearchOutcome,
}

fn ge_config(plan: &ExperimentPlan, target: Target, seed: u64) -> GeConfig {
    GeConfig {
        population_size: plan.budgets.ge_population,
        generations: plan.budgets.ge_generations,
        grammar: GrammarParams {
            input_arity: plan.input_arity,
            ..GrammarParams::default()
        },
        seed,
        ..GeConfig::paper(target)
    }
}

fn ga_config(plan: &ExperimentPlan, criterion: Criterion, seed: u64) -> GaConfig {
    GaConfig {
        population_size: plan.budgets.ga_population,
        generations: plan.budgets.ga_generations,
        suite_size: plan.suite_size,
        domain: plan.domain,
        crossover_rate: plan.ga_crossover_rate,
        mutation_rate: plan.ga_mutation_rate,
        elitism: plan.ga_elitism,
        limits: plan.limits,
        ..GaConfig::new(criterion, seed)
    }
}

fn random_config(plan: &ExperimentPlan, criterion: Criterion, seed: u64) -> RandomConfig {
    RandomConfig {
        trials: plan.budgets.random_trials,
        suite_size: plan.suite_size,
        domain: plan.domain,
        limits: plan.limits,
        ..RandomConfig::new(criterion, seed)
    }
}

/// Largest number of suite evaluations a GA run may use.
fn ga_budget(plan: &ExperimentPlan) -> u64 {
    let b = &plan.budgets;
    (b.ga_population + (b.ga_population - plan.ga_elitism) * b.ga_generations as usize) as u64
}

struct CorpusEntry {
    criterion: Criterion,
    level: Level,
    index: usize,
    file: String,
    sha: String,
    program: crate::sut_lang::Program,
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), HarnessError> {
    fs::write(path, contents).map_err(io_err(path))
}

/// Runs the whole plan and writes the run directory. Work is spread over
/// the current rayon pool.
pub fn run_experiment(
    plan: &ExperimentPlan,
    run_dir: &Path,
) -> Result<ExperimentResult, HarnessError> {
    plan.check().map_err(HarnessError::Plan)?;
    let suts = run_dir.join("suts");
    fs::create_dir_all(&suts).map_err(io_err(&suts))?;
    write_file(&run_dir.join("plan.txt"), plan.to_text().as_bytes())?;

    let cells = plan.cells();
    let corpora: Vec<Result<Vec<EvolvedProgram>, String>> = cells
        .par_iter()
        .map(|&(criterion, level)| {
            let target = plan.target(criterion, level);
            let seed = derive_seed(plan.master_seed, criterion, level, 0, "ge");
            evolve_programs(&ge_config(plan, target, seed), plan.programs_per_cell)
                .map_err(|e| e.to_string())
        })
        .collect();

    let mut failures = Vec::new();
    let mut manifest = csv::Writer::from_writer(Vec::new());
    manifest
        .write_record([
            "file",
            "targetKind",
            "targetValue",
            "achievedValue",
            "geFitness",
            "seed",
            "withinTolerance",
            "sha256",
        ])
        .unwrap();
    let mut corpus = Vec::new();
    for (&(criterion, level), evolved) in cells.iter().zip(corpora) {
        let evolved = match evolved {
            Ok(e) => e,
            Err(message) => {
                failures.push(CellFailure {
                    criterion,
                    level,
                    message,
                });
                continue;
            }
        };
        let target = plan.target(criterion, level);
        for (i, e) in evolved.into_iter().enumerate() {
            let index = i + 1;
            let file = program_file(criterion, level, index);
            let program = e.program.renamed(format!("{criterion}_{level}_{index}"));
            let text = render(&program);
            write_file(&run_dir.join(&file), text.as_bytes())?;
            let sha = sha256_hex(text.as_bytes());
            manifest
                .write_record([
                    file.clone(),
                    target.kind().to_string(),
                    target.value().to_string(),
                    e.achieved.to_string(),
                    e.score.to_string(),
                    e.seed.to_string(),
                    e.within_tolerance.to_string(),
                    sha.clone(),
                ])
                .unwrap();
            corpus.push(CorpusEntry {
                criterion,
                level,
                index,
                file,
                sha,
                program,
            });
        }
    }
    write_file(
        &run_dir.join("manifest.csv"),
        &manifest.into_inner().unwrap(),
    )?;

    let jobs: Vec<(usize, Technique)> = (0..corpus.len())
        .flat_map(|i| [(i, Technique::Ga), (i, Technique::Random)])
        .collect();
    let runs: Vec<Result<RunRecord, String>> = jobs
        .par_iter()
        .map(|&(i, technique)| {
            let e = &corpus[i];
            let seed = derive_seed(
                plan.master_seed,
                e.criterion,
                e.level,
                e.index,
                technique.as_str(),
            );
            let (outcome, budget) = match technique {
                Technique::Ga => (
                    run_ga(&e.program, &ga_config(plan, e.criterion, seed)),
                    ga_budget(plan),
                ),
                Technique::Random => (
                    run_random(&e.program, &random_config(plan, e.criterion, seed)),
                    plan.budgets.random_trials,
                ),
            };
            Ok(RunRecord {
                file: e.file.clone(),
                technique,
                criterion: e.criterion,
                seed,
                budget,
                outcome: outcome.map_err(|err| format!("{}: {err}", e.file))?,
            })
        })
        .collect();

    let mut runs_csv = csv::Writer::from_writer(Vec::new());
    runs_csv
        .write_record([
            "program",
            "technique",
            "criterion",
            "seed",
            "budget",
            "evaluations_used",
            "best_coverage_pct",
        ])
        .unwrap();
    let mut results = Vec::new();
    for r in runs.iter().flatten() {
        runs_csv
            .write_record([
                r.file.clone(),
                r.technique.as_str().to_string(),
                r.criterion.to_string(),
                r.seed.to_string(),
                r.budget.to_string(),
                r.outcome.evaluations_used.to_string(),
                r.outcome.best_coverage_pct.to_string(),
            ])
            .unwrap();
    }
    write_file(&run_dir.join("runs.csv"), &runs_csv.into_inner().unwrap())?;

    for &(criterion, level) in &cells {
        if failures
            .iter()
            .any(|f| (f.criterion, f.level) == (criterion, level))
        {
            continue;
        }
        let mut programs = Vec::new();
        let mut error = None;
        for (i, entry) in corpus.iter().enumerate() {
            if (entry.criterion, entry.level) != (criterion, level) {
                continue;
            }
            match (&runs[2 * i], &runs[2 * i + 1]) {
                (Ok(ga), Ok(rnd)) => programs.push(ProgramOutcome {
                    file: entry.file.clone(),
                    sha256: entry.sha.clone(),
                    ga_coverage: ga.outcome.best_coverage_pct,
                    rnd_coverage: rnd.outcome.best_coverage_pct,
                }),
                (Err(e), _) | (_, Err(e)) => error = Some(e.clone()),
            }
        }
        if let Some(message) = error {
            failures.push(CellFailure {
                criterion,
                level,
                message,
            });
            continue;
        }
        let target = plan.target(criterion, level);
        results.push(CellResult::new(criterion, level, target, programs)?);
    }

    if !results.is_empty() {
        emit_csv(&results, run_dir)?;
        emit_figures(&results, run_dir)?;
    }
    Ok(ExperimentResult {
        run_dir: run_dir.to_path_buf(),
        cells: results,
        failures,
    })
}
