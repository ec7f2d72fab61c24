//! Test-data search: a genetic algorithm over whole suites and a
//! random-testing baseline.

mod fitness;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use fitness::{guidance, suite_fitness, BlockWeights};

use crate::exec_cov::{run_inputs, CoverageReport, Criterion, ExecError, ExecLimits, TestCase};
use crate::sut_lang::Program;

/// Fitness-proportionate choice; uniform when all weights are zero.
pub fn roulette_select(weights: &[f64], rng: &mut impl Rng) -> usize {
    assert!(!weights.is_empty(), "roulette over an empty population");
    let total: f64 = weights.iter().sum();
    if total.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) || !total.is_finite() {
        return rng.gen_range(0..weights.len());
    }
    let mut spin = rng.gen::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if spin < w {
            return i;
        }
        spin -= w;
    }
    // rounding left a sliver past the end
    weights.iter().rposition(|&w| w > 0.0).unwrap()
}

/// Inclusive integer range test inputs are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InputDomain {
    pub low: i64,
    pub high: i64,
}

impl InputDomain {
    pub const DEFAULT: InputDomain = InputDomain {
        low: -1_000_000,
        high: 1_000_000,
    };

    pub fn contains(self, v: i64) -> bool {
        (self.low..=self.high).contains(&v)
    }

    pub fn sample(self, rng: &mut impl Rng) -> i64 {
        rng.gen_range(self.low..=self.high)
    }
}

impl Default for InputDomain {
    fn default() -> Self {
        Self::DEFAULT
    }
}

impl std::str::FromStr for InputDomain {
    type Err = String;

    /// Parses `low:high`.
    fn from_str(s: &str) -> Result<Self, String> {
        let (lo, hi) = s
            .split_once(':')
            .ok_or_else(|| format!("domain `{s}` is not of the form low:high"))?;
        let parse = |t: &str| {
            t.trim()
                .parse::<i64>()
                .map_err(|_| format!("domain bound `{t}` is not an integer"))
        };
        let d = InputDomain {
            low: parse(lo)?,
            high: parse(hi)?,
        };
        if d.low >= d.high {
            return Err(format!(
                "domain low {} must be below high {}",
                d.low, d.high
            ));
        }
        Ok(d)
    }
}

/// A suite of `m` test cases stored row-major, `arity` values per case.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SuiteChromosome {
    arity: usize,
    cases: usize,
    values: Vec<i64>,
}

impl SuiteChromosome {
    pub fn new(arity: usize, values: Vec<i64>) -> Self {
        assert!(arity > 0 && values.len().is_multiple_of(arity) && !values.is_empty());
        SuiteChromosome {
            arity,
            cases: values.len() / arity,
            values,
        }
    }

    pub fn random(arity: usize, cases: usize, domain: InputDomain, rng: &mut impl Rng) -> Self {
        SuiteChromosome {
            arity,
            cases,
            values: (0..arity * cases).map(|_| domain.sample(rng)).collect(),
        }
    }

    pub fn case_count(&self) -> usize {
        self.cases
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn case(&self, i: usize) -> &[i64] {
        &self.values[i * self.arity..(i + 1) * self.arity]
    }

    pub fn cases(&self) -> impl Iterator<Item = &[i64]> + '_ {
        (0..self.cases).map(move |i| self.case(i))
    }

    pub fn to_test_cases(&self) -> Vec<TestCase> {
        self.cases().map(|c| TestCase::new(c.to_vec())).collect()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SearchError {
    #[error("invalid search configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Exec(#[from] ExecError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: u32,
    pub suite_size: usize,
    pub domain: InputDomain,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub elitism: usize,
    pub criterion: Criterion,
    pub limits: ExecLimits,
    pub seed: u64,
}

impl GaConfig {
    pub fn new(criterion: Criterion, seed: u64) -> Self {
        GaConfig {
            population_size: 200,
            generations: 10_000,
            suite_size: 10,
            domain: InputDomain::DEFAULT,
            crossover_rate: 0.9,
            mutation_rate: 0.02,
            elitism: 1,
            criterion,
            limits: ExecLimits::default(),
            seed,
        }
    }

    fn check(&self) -> Result<(), SearchError> {
        let bad = |m: &str| Err(SearchError::Config(m.to_string()));
        if self.population_size < 2 {
            return bad("population size must be at least 2");
        }
        if self.suite_size == 0 {
            return bad("suite size must be at least 1");
        }
        if self.domain.low >= self.domain.high {
            return bad("domain low must be below high");
        }
        if self.elitism >= self.population_size {
            return bad("elitism must be smaller than the population");
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) || !(0.0..=1.0).contains(&self.mutation_rate)
        {
            return bad("crossover and mutation rates must lie in [0, 1]");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomConfig {
    /// Number of whole suites sampled.
    pub trials: u64,
    pub suite_size: usize,
    pub domain: InputDomain,
    pub criterion: Criterion,
    pub limits: ExecLimits,
    pub seed: u64,
}

impl RandomConfig {
    pub fn new(criterion: Criterion, seed: u64) -> Self {
        RandomConfig {
            trials: 100_000,
            suite_size: 10,
            domain: InputDomain::DEFAULT,
            criterion,
            limits: ExecLimits::default(),
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub best_suite: SuiteChromosome,
    pub best_coverage_pct: f64,
    /// Suite evaluations actually performed; both searches stop as soon as
    /// coverage reaches 100%.
    pub evaluations_used: u64,
    /// GA: coverage of the fittest suite after each generation, initial
    /// population first. Random: best-so-far coverage after each trial.
    pub history: Vec<f64>,
}

fn evaluate(
    program: &Program,
    suite: &SuiteChromosome,
    limits: ExecLimits,
) -> Result<CoverageReport, ExecError> {
    run_inputs(program, suite.cases(), limits)
}

fn arity(program: &Program) -> Result<usize, SearchError> {
    match program.input_arity() {
        0 => Err(SearchError::Config("program takes no inputs".into())),
        k => Ok(k as usize),
    }
}

struct Scored {
    suite: SuiteChromosome,
    fitness: f64,
    coverage: f64,
}

/// Generational GA over suites: roulette selection on suite fitness,
/// single-point crossover between test cases, per-value resampling
/// mutation and elitism. Returns the best suite ever evaluated.
pub fn run_ga(program: &Program, cfg: &GaConfig) -> Result<SearchOutcome, SearchError> {
    cfg.check()?;
    let k = arity(program)?;
    let weights = BlockWeights::new(program);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let score_all = |suites: Vec<SuiteChromosome>| -> Result<Vec<Scored>, ExecError> {
        suites
            .into_par_iter()
            .map(|suite| {
                let report = evaluate(program, &suite, cfg.limits)?;
                Ok(Scored {
                    fitness: suite_fitness(&report, cfg.criterion, &weights),
                    coverage: report.pct(cfg.criterion),
                    suite,
                })
            })
            .collect()
    };
    // first index wins ties
    let fittest = |pop: &[Scored]| {
        (0..pop.len()).fold(0, |b, i| {
            if pop[i].fitness > pop[b].fitness {
                i
            } else {
                b
            }
        })
    };

    let initial = (0..cfg.population_size)
        .map(|_| SuiteChromosome::random(k, cfg.suite_size, cfg.domain, &mut rng))
        .collect();
    let mut pop = score_all(initial)?;
    let mut evaluations = pop.len() as u64;
    let b = fittest(&pop);
    let mut best = (pop[b].suite.clone(), pop[b].fitness, pop[b].coverage);
    let mut history = vec![pop[b].coverage];

    for _ in 0..cfg.generations {
        if best.2 >= 100.0 {
            break;
        }
        let wheel: Vec<f64> = pop.iter().map(|s| s.fitness).collect();
        let mut order: Vec<usize> = (0..pop.len()).collect();
        order.sort_by(|&a, &b| pop[b].fitness.total_cmp(&pop[a].fitness));
        let elites: Vec<Scored> = order[..cfg.elitism]
            .iter()
            .map(|&i| Scored {
                suite: pop[i].suite.clone(),
                fitness: pop[i].fitness,
                coverage: pop[i].coverage,
            })
            .collect();

        let mut children = Vec::with_capacity(cfg.population_size - cfg.elitism);
        while children.len() < cfg.population_size - cfg.elitism {
            let a = &pop[roulette_select(&wheel, &mut rng)].suite;
            let b = &pop[roulette_select(&wheel, &mut rng)].suite;
            let (mut c1, mut c2) = (a.clone(), b.clone());
            if cfg.suite_size > 1 && rng.gen_bool(cfg.crossover_rate) {
                let cut = rng.gen_range(1..cfg.suite_size) * k;
                c1.values[cut..].copy_from_slice(&b.values[cut..]);
                c2.values[cut..].copy_from_slice(&a.values[cut..]);
            }
            for child in [&mut c1, &mut c2] {
                for v in child.values.iter_mut() {
                    if rng.gen_bool(cfg.mutation_rate) {
                        *v = cfg.domain.sample(&mut rng);
                    }
                }
            }
            children.push(c1);
            if children.len() < cfg.population_size - cfg.elitism {
                children.push(c2);
            }
        }
        evaluations += children.len() as u64;
        pop = elites;
        pop.extend(score_all(children)?);

        let b = fittest(&pop);
        if pop[b].fitness > best.1 {
            best = (pop[b].suite.clone(), pop[b].fitness, pop[b].coverage);
        }
        history.push(pop[b].coverage);
    }

    Ok(SearchOutcome {
        best_suite: best.0,
        best_coverage_pct: best.2,
        evaluations_used: evaluations,
        history,
    })
}

/// Samples `trials` uniform suites and keeps the one with the highest
/// coverage; the earliest wins ties.
pub fn run_random(program: &Program, cfg: &RandomConfig) -> Result<SearchOutcome, SearchError> {
    if cfg.trials == 0 {
        return Err(SearchError::Config("trials must be at least 1".into()));
    }
    if cfg.suite_size == 0 {
        return Err(SearchError::Config("suite size must be at least 1".into()));
    }
    if cfg.domain.low >= cfg.domain.high {
        return Err(SearchError::Config("domain low must be below high".into()));
    }
    let k = arity(program)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best: Option<(SuiteChromosome, f64)> = None;
    let mut history = Vec::new();
    let mut evaluations = 0;
    while evaluations < cfg.trials {
        let suite = SuiteChromosome::random(k, cfg.suite_size, cfg.domain, &mut rng);
        let pct = evaluate(program, &suite, cfg.limits)?.pct(cfg.criterion);
        evaluations += 1;
        if best.as_ref().is_none_or(|b| pct > b.1) {
            best = Some((suite, pct));
        }
        let top = best.as_ref().unwrap().1;
        history.push(top);
        if top >= 100.0 {
            break;
        }
    }
    let (best_suite, best_coverage_pct) = best.unwrap();
    Ok(SearchOutcome {
        best_suite,
        best_coverage_pct,
        evaluations_used: evaluations,
        history,
    })
}
