//! Grammatical evolution of benchmark programs with a target size.
//!
//! Individuals are codon strings mapped through the built-in grammar
//! ([`GrammarSpec::builtin`]). Fitness is the distance of the mapped
//! program's statement or branch count from the target; parents are picked
//! by roulette wheel on `1 / (1 + score)`.

mod grammar;
mod mapper;

use std::collections::HashSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use grammar::{GrammarError, GrammarParams, GrammarSpec, NonTerminal, Production, Symbol};
pub use mapper::{map_genotype, Genotype, MappingFailure};

use crate::search::roulette_select;
use crate::sut_lang::{Metrics, Program};

/// What the evolved program's size should be.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Target {
    Statements(u32),
    Branches(u32),
}

impl Target {
    pub fn value(self) -> u32 {
        match self {
            Target::Statements(n) | Target::Branches(n) => n,
        }
    }

    pub fn kind(self) -> &'static str {
        match self {
            Target::Statements(_) => "statements",
            Target::Branches(_) => "branches",
        }
    }

    /// The metric this target is about.
    pub fn measure(self, m: &Metrics) -> usize {
        match self {
            Target::Statements(_) => m.statements,
            Target::Branches(_) => m.branches,
        }
    }

    /// Accepted deviation from the target: 5% of it.
    pub fn tolerance(self) -> f64 {
        0.05 * self.value() as f64
    }

    pub fn accepts(self, achieved: usize) -> bool {
        (achieved as f64 - self.value() as f64).abs() <= self.tolerance()
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.kind(), self.value())
    }
}

impl std::str::FromStr for Target {
    type Err = String;

    /// Parses `statements=75` or `branches=25`.
    fn from_str(s: &str) -> Result<Self, String> {
        let (kind, n) = s
            .split_once('=')
            .ok_or_else(|| format!("target `{s}` is not of the form <kind>=<n>"))?;
        let n: u32 = n
            .trim()
            .parse()
            .map_err(|_| format!("target value `{n}` is not a non-negative integer"))?;
        match kind.trim() {
            "statements" | "statement" => Ok(Target::Statements(n)),
            "branches" | "branch" => Ok(Target::Branches(n)),
            other => Err(format!(
                "unknown target kind `{other}` (expected statements or branches)"
            )),
        }
    }
}

/// `|metric - target|`; mapping failures score `+inf`.
pub fn ge_fitness(program: Result<&Program, &MappingFailure>, target: Target) -> f64 {
    match program {
        Ok(p) => (target.measure(&p.metrics()) as f64 - target.value() as f64).abs(),
        Err(_) => f64::INFINITY,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeConfig {
    pub population_size: usize,
    pub generations: u32,
    pub initial_chromosome_size: usize,
    /// Offspring longer than this are truncated.
    pub max_chromosome_size: usize,
    pub max_wraps: u32,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub elitism: usize,
    pub target: Target,
    pub grammar: GrammarParams,
    pub seed: u64,
}

impl GeConfig {
    /// Full-size settings: 200 individuals, 10000 generations.
    pub fn paper(target: Target) -> Self {
        GeConfig {
            population_size: 200,
            generations: 10_000,
            initial_chromosome_size: 200,
            max_chromosome_size: 4000,
            max_wraps: 3,
            crossover_rate: 0.9,
            mutation_rate: 0.01,
            elitism: 1,
            target,
            grammar: GrammarParams::default(),
            seed: 0,
        }
    }

    /// Budget small enough for a desktop run: 50 individuals, 200 generations.
    pub fn desk(target: Target) -> Self {
        GeConfig {
            population_size: 50,
            generations: 200,
            ..Self::paper(target)
        }
    }

    pub fn check(&self) -> Result<(), GeError> {
        let bad = |msg: &str| Err(GeError::Config(msg.to_string()));
        if self.population_size < 2 {
            return bad("population size must be at least 2");
        }
        if self.max_wraps < 1 {
            return bad("max wraps must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) || !(0.0..=1.0).contains(&self.mutation_rate)
        {
            return bad("crossover and mutation rates must lie in [0, 1]");
        }
        if self.initial_chromosome_size == 0
            || self.max_chromosome_size < self.initial_chromosome_size
        {
            return bad("chromosome sizes must satisfy 1 <= initial <= max");
        }
        if self.elitism >= self.population_size {
            return bad("elitism must be smaller than the population");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeError {
    #[error("invalid GE configuration: {0}")]
    Config(String),
    #[error("GE produced {produced} of {requested} distinct valid programs for target {target}")]
    GenerationFailure {
        target: Target,
        requested: usize,
        produced: usize,
    },
}

/// Result of one seeded GE run.
#[derive(Debug, Clone, PartialEq)]
pub struct GeRun {
    /// Best mapped program; `None` if no individual ever mapped.
    pub program: Option<Program>,
    pub score: f64,
    pub seed: u64,
    pub generations_run: u32,
    /// Best score after each generation, initial population first.
    pub best_history: Vec<f64>,
}

struct Individual {
    codons: Vec<u8>,
    program: Option<Program>,
    score: f64,
}

fn evaluate(codons: Vec<u8>, grammar: &GrammarSpec, cfg: &GeConfig) -> Individual {
    let mapped = map_genotype(&Genotype::new(codons.clone()), grammar, cfg.max_wraps);
    let score = ge_fitness(mapped.as_ref(), cfg.target);
    Individual {
        codons,
        program: mapped.ok(),
        score,
    }
}

/// Index of the lowest score; the first one wins ties.
fn best_index(pop: &[Individual]) -> usize {
    let mut best = 0;
    for (i, ind) in pop.iter().enumerate() {
        if ind.score < pop[best].score {
            best = i;
        }
    }
    best
}

/// One GE run. Stops early once the target is hit exactly.
pub fn run_ge(cfg: &GeConfig) -> Result<GeRun, GeError> {
    cfg.check()?;
    let grammar = GrammarSpec::builtin(cfg.grammar);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut pop: Vec<Individual> = (0..cfg.population_size)
        .map(|_| {
            let codons = (0..cfg.initial_chromosome_size)
                .map(|_| rng.gen())
                .collect();
            evaluate(codons, &grammar, cfg)
        })
        .collect();

    let mut history = vec![pop[best_index(&pop)].score];
    let mut generation = 0;
    while generation < cfg.generations && pop[best_index(&pop)].score > 0.0 {
        generation += 1;
        let weights: Vec<f64> = pop.iter().map(|i| 1.0 / (1.0 + i.score)).collect();

        let mut order: Vec<usize> = (0..pop.len()).collect();
        order.sort_by(|&a, &b| pop[a].score.total_cmp(&pop[b].score));
        let mut next: Vec<Individual> = order[..cfg.elitism]
            .iter()
            .map(|&i| Individual {
                codons: pop[i].codons.clone(),
                program: pop[i].program.clone(),
                score: pop[i].score,
            })
            .collect();

        while next.len() < cfg.population_size {
            let a = &pop[roulette_select(&weights, &mut rng)].codons;
            let b = &pop[roulette_select(&weights, &mut rng)].codons;
            let (mut c1, mut c2) = if rng.gen_bool(cfg.crossover_rate) {
                crossover(a, b, &mut rng)
            } else {
                (a.clone(), b.clone())
            };
            for child in [&mut c1, &mut c2] {
                child.truncate(cfg.max_chromosome_size);
                for codon in child.iter_mut() {
                    if rng.gen_bool(cfg.mutation_rate) {
                        *codon = rng.gen();
                    }
                }
            }
            next.push(evaluate(c1, &grammar, cfg));
            if next.len() < cfg.population_size {
                next.push(evaluate(c2, &grammar, cfg));
            }
        }
        pop = next;
        history.push(pop[best_index(&pop)].score);
    }

    let best = pop.swap_remove(best_index(&pop));
    Ok(GeRun {
        program: best.program,
        score: best.score,
        seed: cfg.seed,
        generations_run: generation,
        best_history: history,
    })
}

/// Single-point crossover with an independent cut in each parent, so
/// offspring lengths can drift away from the initial size.
fn crossover(a: &[u8], b: &[u8], rng: &mut impl Rng) -> (Vec<u8>, Vec<u8>) {
    let cut = |len: usize, rng: &mut dyn rand::RngCore| {
        if len < 2 {
            len
        } else {
            rng.gen_range(1..len)
        }
    };
    let (ca, cb) = (cut(a.len(), rng), cut(b.len(), rng));
    let mut c1 = a[..ca].to_vec();
    c1.extend_from_slice(&b[cb..]);
    let mut c2 = b[..cb].to_vec();
    c2.extend_from_slice(&a[ca..]);
    (c1, c2)
}

/// A program produced by [`evolve_programs`].
#[derive(Debug, Clone, PartialEq)]
pub struct EvolvedProgram {
    pub program: Program,
    pub seed: u64,
    pub score: f64,
    pub achieved: usize,
    /// Whether `achieved` is within the 5% target tolerance; otherwise the
    /// run used up its generation budget first.
    pub within_tolerance: bool,
    pub generations_run: u32,
}

/// Runs independent GE runs seeded `seed, seed+1, ...` until `count`
/// distinct programs within tolerance are collected, trying at most
/// `4 * count` runs. Slots still empty after that are filled with the
/// closest distinct misses, flagged by `within_tolerance = false`.
pub fn evolve_programs(cfg: &GeConfig, count: usize) -> Result<Vec<EvolvedProgram>, GeError> {
    cfg.check()?;
    let mut hits = Vec::with_capacity(count);
    let mut misses = Vec::new();
    let mut seen = HashSet::new();
    for run in 0..(4 * count) as u64 {
        if hits.len() == count {
            break;
        }
        let run_cfg = GeConfig {
            seed: cfg.seed.wrapping_add(run),
            ..cfg.clone()
        };
        let result = run_ge(&run_cfg)?;
        let Some(program) = result.program else {
            continue;
        };
        if !seen.insert(program.clone()) {
            continue;
        }
        let achieved = cfg.target.measure(&program.metrics());
        let evolved = EvolvedProgram {
            within_tolerance: cfg.target.accepts(achieved),
            achieved,
            program,
            seed: run_cfg.seed,
            score: result.score,
            generations_run: result.generations_run,
        };
        if evolved.within_tolerance {
            hits.push(evolved);
        } else {
            misses.push(evolved);
        }
    }
    misses.sort_by(|a, b| a.score.total_cmp(&b.score));
    let mut misses = misses.into_iter();
    while hits.len() < count {
        match misses.next() {
            Some(m) => hits.push(m),
            None => break,
        }
    }
    hits.sort_by_key(|e| e.seed);
    if hits.len() < count || count == 0 {
        return Err(GeError::GenerationFailure {
            target: cfg.target,
            requested: count,
            produced: hits.len(),
        });
    }
    Ok(hits)
}
