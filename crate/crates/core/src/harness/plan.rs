use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::exec_cov::{Criterion, ExecLimits};
use crate::ge_gen::Target;
use crate::search::InputDomain;

/// Complexity level of a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    Low,
    Medium,
    High,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::Low, Level::Medium, Level::High];

    pub fn as_str(self) -> &'static str {
        match self {
            Level::Low => "low",
            Level::Medium => "medium",
            Level::High => "high",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Level {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "low" => Ok(Level::Low),
            "medium" => Ok(Level::Medium),
            "high" => Ok(Level::High),
            other => Err(format!(
                "unknown level `{other}` (expected low, medium or high)"
            )),
        }
    }
}

/// Search and generation budgets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Budgets {
    pub ge_population: usize,
    pub ge_generations: u32,
    pub ga_population: usize,
    pub ga_generations: u32,
    pub random_trials: u64,
}

impl Budgets {
    pub const DESK: Budgets = Budgets {
        ge_population: 50,
        ge_generations: 200,
        ga_population: 20,
        ga_generations: 50,
        random_trials: 1000,
    };

    pub const PAPER: Budgets = Budgets {
        ge_population: 200,
        ge_generations: 10_000,
        ga_population: 200,
        ga_generations: 10_000,
        random_trials: 100_000,
    };
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub criteria: Vec<Criterion>,
    pub levels: Vec<Level>,
    /// Low, medium, high.
    pub statement_targets: [u32; 3],
    pub branch_targets: [u32; 3],
    pub programs_per_cell: usize,
    pub master_seed: u64,
    pub budgets: Budgets,
    pub suite_size: usize,
    pub input_arity: u32,
    pub domain: InputDomain,
    pub limits: ExecLimits,
    pub ga_crossover_rate: f64,
    pub ga_mutation_rate: f64,
    pub ga_elitism: usize,
}

impl ExperimentPlan {
    pub fn desk(master_seed: u64) -> Self {
        ExperimentPlan {
            criteria: Criterion::ALL.to_vec(),
            levels: Level::ALL.to_vec(),
            statement_targets: [75, 150, 300],
            branch_targets: [25, 50, 100],
            programs_per_cell: 10,
            master_seed,
            budgets: Budgets::DESK,
            suite_size: 10,
            input_arity: 5,
            domain: InputDomain::DEFAULT,
            limits: ExecLimits::default(),
            ga_crossover_rate: 0.9,
            ga_mutation_rate: 0.02,
            ga_elitism: 1,
        }
    }

    pub fn paper(master_seed: u64) -> Self {
        ExperimentPlan {
            budgets: Budgets::PAPER,
            ..Self::desk(master_seed)
        }
    }

    pub fn target(&self, criterion: Criterion, level: Level) -> Target {
        match criterion {
            Criterion::Statement => Target::Statements(self.statement_targets[level.index()]),
            Criterion::Branch => Target::Branches(self.branch_targets[level.index()]),
        }
    }

    /// `(criterion, level)` pairs in output order.
    pub fn cells(&self) -> Vec<(Criterion, Level)> {
        let mut criteria = self.criteria.clone();
        criteria.sort();
        criteria.dedup();
        let mut levels = self.levels.clone();
        levels.sort();
        levels.dedup();
        criteria
            .iter()
            .flat_map(|&c| levels.iter().map(move |&l| (c, l)))
            .collect()
    }

    pub fn check(&self) -> Result<(), String> {
        if self.criteria.is_empty() || self.levels.is_empty() {
            return Err("plan needs at least one criterion and one level".into());
        }
        for (name, t) in [
            ("statement_targets", self.statement_targets),
            ("branch_targets", self.branch_targets),
        ] {
            if !(t[0] < t[1] && t[1] < t[2]) {
                return Err(format!("{name} must increase strictly from low to high"));
            }
        }
        if self.programs_per_cell < 2 {
            return Err("programs_per_cell must be at least 2".into());
        }
        if self.suite_size == 0 || self.input_arity == 0 {
            return Err("suite_size and input_arity must be at least 1".into());
        }
        if self.domain.low >= self.domain.high {
            return Err("domain low must be below high".into());
        }
        let b = &self.budgets;
        if b.ge_population < 2 || b.ga_population < 2 || b.random_trials == 0 {
            return Err("populations must be at least 2 and random_trials at least 1".into());
        }
        if self.ga_elitism >= b.ga_population {
            return Err("ga_elitism must be smaller than ga_population".into());
        }
        Ok(())
    }

    /// `key = value` lines, one per setting.
    pub fn to_text(&self) -> String {
        let join = |v: &[String]| v.join(",");
        let nums = |t: [u32; 3]| join(&t.map(|n| n.to_string()));
        let mut s = String::new();
        let mut kv = |k: &str, v: String| writeln!(s, "{k} = {v}").unwrap();
        kv(
            "criteria",
            join(
                &self
                    .criteria
                    .iter()
                    .map(|c| c.to_string())
                    .collect::<Vec<_>>(),
            ),
        );
        kv(
            "levels",
            join(
                &self
                    .levels
                    .iter()
                    .map(|l| l.to_string())
                    .collect::<Vec<_>>(),
            ),
        );
        kv("statement_targets", nums(self.statement_targets));
        kv("branch_targets", nums(self.branch_targets));
        kv("programs_per_cell", self.programs_per_cell.to_string());
        kv("master_seed", self.master_seed.to_string());
        kv("ge_population", self.budgets.ge_population.to_string());
        kv("ge_generations", self.budgets.ge_generations.to_string());
        kv("ga_population", self.budgets.ga_population.to_string());
        kv("ga_generations", self.budgets.ga_generations.to_string());
        kv("ga_crossover_rate", self.ga_crossover_rate.to_string());
        kv("ga_mutation_rate", self.ga_mutation_rate.to_string());
        kv("ga_elitism", self.ga_elitism.to_string());
        kv("random_trials", self.budgets.random_trials.to_string());
        kv("suite_size", self.suite_size.to_string());
        kv("input_arity", self.input_arity.to_string());
        kv(
            "domain",
            format!("{}:{}", self.domain.low, self.domain.high),
        );
        kv(
            "max_loop_iterations",
            self.limits.max_loop_iterations.to_string(),
        );
        kv("max_total_steps", self.limits.max_total_steps.to_string());
        kv("desired_cl", crate::stats::DESIRED_CL.to_string());
        kv("ttest", "welch-two-sided".into());
        s
    }

    /// Applies `key = value` lines on top of `self`. Blank lines and `#`
    /// comments are skipped; `desired_cl` and `ttest` are informational.
    pub fn apply_text(&mut self, text: &str) -> Result<(), String> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected `key = value`", n + 1))?;
            self.set(key.trim(), value.trim())
                .map_err(|e| format!("line {}: {e}", n + 1))?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T, String> {
            v.parse()
                .map_err(|_| format!("`{v}` is not a valid value for {key}"))
        }
        fn list<T: FromStr<Err = String>>(v: &str) -> Result<Vec<T>, String> {
            v.split(',').map(|s| s.trim().parse()).collect()
        }
        fn triple(key: &str, v: &str) -> Result<[u32; 3], String> {
            let parts: Vec<u32> = v
                .split(',')
                .map(|s| num(key, s.trim()))
                .collect::<Result<_, _>>()?;
            parts
                .try_into()
                .map_err(|_| format!("{key} needs exactly three values"))
        }
        match key {
            "criteria" => self.criteria = list(value)?,
            "levels" => self.levels = list(value)?,
            "statement_targets" => self.statement_targets = triple(key, value)?,
            "branch_targets" => self.branch_targets = triple(key, value)?,
            "programs_per_cell" => self.programs_per_cell = num(key, value)?,
            "master_seed" => self.master_seed = num(key, value)?,
            "ge_population" => self.budgets.ge_population = num(key, value)?,
            "ge_generations" => self.budgets.ge_generations = num(key, value)?,
            "ga_population" => self.budgets.ga_population = num(key, value)?,
            "ga_generations" => self.budgets.ga_generations = num(key, value)?,
            "ga_crossover_rate" => self.ga_crossover_rate = num(key, value)?,
            "ga_mutation_rate" => self.ga_mutation_rate = num(key, value)?,
            "ga_elitism" => self.ga_elitism = num(key, value)?,
            "random_trials" => self.budgets.random_trials = num(key, value)?,
            "suite_size" => self.suite_size = num(key, value)?,
            "input_arity" => self.input_arity = num(key, value)?,
            "domain" => self.domain = value.parse()?,
            "max_loop_iterations" => self.limits.max_loop_iterations = num(key, value)?,
            "max_total_steps" => self.limits.max_total_steps = num(key, value)?,
            "desired_cl" | "ttest" => {}
            other => return Err(format!("unknown plan key `{other}`")),
        }
        Ok(())
    }
}
