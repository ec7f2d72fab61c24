//! Instrumenting interpreter for [`sut_lang`](crate::sut_lang) programs.
//!
//! Every run records which assignments executed, which condition outcomes
//! were taken, and for every outcome the smallest branch distance observed
//! over all dynamic evaluations of its condition.

mod distance;

use std::fmt;
use std::io::{self, Write};

pub use distance::{branch_distance, MAX_DISTANCE};

use crate::sut_lang::{BranchId, Cond, Expr, Program, Stmt, StmtId, VarId};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExecError {
    #[error("test case has {got} inputs but the program takes {expected}")]
    ArityMismatch { expected: u32, got: usize },
    #[error("a test suite needs at least one test case")]
    EmptySuite,
}

/// Which structural elements count as coverage units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Criterion {
    Statement,
    Branch,
}

impl Criterion {
    pub const ALL: [Criterion; 2] = [Criterion::Statement, Criterion::Branch];

    pub fn as_str(self) -> &'static str {
        match self {
            Criterion::Statement => "statement",
            Criterion::Branch => "branch",
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Criterion {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "statement" | "statements" => Ok(Criterion::Statement),
            "branch" | "branches" => Ok(Criterion::Branch),
            _ => Err(format!(
                "unknown criterion `{s}` (expected statement or branch)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TestCase {
    pub inputs: Vec<i64>,
}

impl TestCase {
    pub fn new(inputs: Vec<i64>) -> Self {
        TestCase { inputs }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExecLimits {
    /// Iterations after which a loop is exited without re-testing its condition.
    pub max_loop_iterations: u32,
    /// Statement executions plus condition evaluations allowed per run.
    pub max_total_steps: u64,
}

impl Default for ExecLimits {
    fn default() -> Self {
        ExecLimits {
            max_loop_iterations: 1000,
            max_total_steps: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Termination {
    Normal,
    /// A 64-bit arithmetic overflow stopped the run.
    OverflowHalt,
    StepLimit,
}

/// Coverage tables indexed by the program's dense statement and branch ids.
///
/// Outcome slots are indexed `false = 0`, `true = 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageMap {
    stmts: Vec<bool>,
    outcomes: Vec<[bool; 2]>,
    distances: Vec<[Option<u64>; 2]>,
}

impl CoverageMap {
    pub fn new(program: &Program) -> Self {
        let m = program.metrics();
        CoverageMap {
            stmts: vec![false; m.statements],
            outcomes: vec![[false; 2]; m.branches],
            distances: vec![[None; 2]; m.branches],
        }
    }

    pub fn statement_count(&self) -> usize {
        self.stmts.len()
    }

    pub fn branch_count(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_executed(&self, id: StmtId) -> bool {
        self.stmts[id.0 as usize]
    }

    pub fn is_covered(&self, id: BranchId, outcome: bool) -> bool {
        self.outcomes[id.0 as usize][outcome as usize]
    }

    /// Minimum distance recorded for `(id, outcome)`; `None` if the condition
    /// was never evaluated.
    pub fn distance(&self, id: BranchId, outcome: bool) -> Option<u64> {
        self.distances[id.0 as usize][outcome as usize]
    }

    pub fn executed_stmts(&self) -> impl Iterator<Item = StmtId> + '_ {
        self.stmts
            .iter()
            .enumerate()
            .filter(|(_, &hit)| hit)
            .map(|(i, _)| StmtId(i as u32))
    }

    pub fn covered_outcomes(&self) -> impl Iterator<Item = (BranchId, bool)> + '_ {
        self.outcomes.iter().enumerate().flat_map(|(i, o)| {
            [false, true]
                .into_iter()
                .filter(move |&b| o[b as usize])
                .map(move |b| (BranchId(i as u32), b))
        })
    }

    pub fn executed_count(&self) -> usize {
        self.stmts.iter().filter(|&&b| b).count()
    }

    pub fn covered_outcome_count(&self) -> usize {
        self.outcomes
            .iter()
            .map(|o| o[0] as usize + o[1] as usize)
            .sum()
    }

    /// Union of coverage and per-outcome minimum of distances.
    pub fn merge(&mut self, other: &CoverageMap) {
        for (a, b) in self.stmts.iter_mut().zip(&other.stmts) {
            *a |= *b;
        }
        for (a, b) in self.outcomes.iter_mut().zip(&other.outcomes) {
            a[0] |= b[0];
            a[1] |= b[1];
        }
        for (a, b) in self.distances.iter_mut().zip(&other.distances) {
            for k in 0..2 {
                a[k] = min_opt(a[k], b[k]);
            }
        }
    }

    fn record_cond(&mut self, id: BranchId, taken: bool, other_distance: u64) {
        let i = id.0 as usize;
        self.outcomes[i][taken as usize] = true;
        let d = &mut self.distances[i];
        d[taken as usize] = Some(0);
        d[!taken as usize] = min_opt(d[!taken as usize], Some(other_distance));
    }

    /// Writes `branchId,outcome,minDistance` rows for every reached outcome.
    pub fn write_distance_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "branchId,outcome,minDistance")?;
        for (i, d) in self.distances.iter().enumerate() {
            for outcome in [true, false] {
                if let Some(d) = d[outcome as usize] {
                    writeln!(w, "{i},{outcome},{d}")?;
                }
            }
        }
        Ok(())
    }
}

fn min_opt(a: Option<u64>, b: Option<u64>) -> Option<u64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceResult {
    pub coverage: CoverageMap,
    pub termination: Termination,
}

/// Coverage of a whole suite.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageReport {
    pub statement_pct: f64,
    pub branch_pct: f64,
    pub coverage: CoverageMap,
    /// Cases that ended in an overflow halt or at the step limit.
    pub halted_cases: usize,
}

impl CoverageReport {
    fn from_map(coverage: CoverageMap, halted_cases: usize) -> Self {
        let pct = |hit: usize, total: usize| {
            if total == 0 {
                100.0
            } else {
                100.0 * hit as f64 / total as f64
            }
        };
        CoverageReport {
            statement_pct: pct(coverage.executed_count(), coverage.statement_count()),
            branch_pct: pct(
                coverage.covered_outcome_count(),
                2 * coverage.branch_count(),
            ),
            coverage,
            halted_cases,
        }
    }

    pub fn pct(&self, criterion: Criterion) -> f64 {
        match criterion {
            Criterion::Statement => self.statement_pct,
            Criterion::Branch => self.branch_pct,
        }
    }

    /// Covered units: executed statements or covered branch outcomes.
    pub fn covered_units(&self, criterion: Criterion) -> usize {
        match criterion {
            Criterion::Statement => self.coverage.executed_count(),
            Criterion::Branch => self.coverage.covered_outcome_count(),
        }
    }
}

/// Runs `program` on one test case.
pub fn execute(
    program: &Program,
    case: &TestCase,
    limits: ExecLimits,
) -> Result<TraceResult, ExecError> {
    check_arity(program, &case.inputs)?;
    let mut coverage = CoverageMap::new(program);
    let mut frame = Vec::new();
    let termination = run_into(program, &case.inputs, limits, &mut frame, &mut coverage);
    Ok(TraceResult {
        coverage,
        termination,
    })
}

/// Runs every case and accumulates suite coverage.
pub fn run_suite(
    program: &Program,
    suite: &[TestCase],
    limits: ExecLimits,
) -> Result<CoverageReport, ExecError> {
    run_inputs(program, suite.iter().map(|c| c.inputs.as_slice()), limits)
}

/// Like [`run_suite`], over borrowed input vectors.
pub fn run_inputs<'a>(
    program: &Program,
    cases: impl IntoIterator<Item = &'a [i64]>,
    limits: ExecLimits,
) -> Result<CoverageReport, ExecError> {
    let mut coverage = CoverageMap::new(program);
    let mut frame = Vec::new();
    let mut n = 0;
    let mut halted = 0;
    for inputs in cases {
        check_arity(program, inputs)?;
        if run_into(program, inputs, limits, &mut frame, &mut coverage) != Termination::Normal {
            halted += 1;
        }
        n += 1;
    }
    if n == 0 {
        return Err(ExecError::EmptySuite);
    }
    Ok(CoverageReport::from_map(coverage, halted))
}

fn check_arity(program: &Program, inputs: &[i64]) -> Result<(), ExecError> {
    if inputs.len() != program.input_arity() as usize {
        return Err(ExecError::ArityMismatch {
            expected: program.input_arity(),
            got: inputs.len(),
        });
    }
    Ok(())
}

fn run_into(
    program: &Program,
    inputs: &[i64],
    limits: ExecLimits,
    frame: &mut Vec<i64>,
    coverage: &mut CoverageMap,
) -> Termination {
    // inputs first, then zero-initialized locals
    frame.clear();
    frame.extend_from_slice(inputs);
    frame.resize(inputs.len() + program.local_slots() as usize, 0);
    let mut m = Machine {
        frame,
        base: inputs.len(),
        steps: 0,
        limits,
        cov: coverage,
    };
    match m.block(program.body()) {
        Ok(()) => Termination::Normal,
        Err(halt) => halt,
    }
}

struct Machine<'a> {
    frame: &'a mut [i64],
    base: usize,
    steps: u64,
    limits: ExecLimits,
    cov: &'a mut CoverageMap,
}

impl Machine<'_> {
    fn step(&mut self) -> Result<(), Termination> {
        self.steps += 1;
        if self.steps > self.limits.max_total_steps {
            Err(Termination::StepLimit)
        } else {
            Ok(())
        }
    }

    fn block(&mut self, stmts: &[Stmt]) -> Result<(), Termination> {
        for s in stmts {
            self.stmt(s)?;
        }
        Ok(())
    }

    fn stmt(&mut self, s: &Stmt) -> Result<(), Termination> {
        match s {
            Stmt::Assign { target, value, id } => {
                self.step()?;
                // reached counts as executed, even if evaluation overflows
                self.cov.stmts[id.0 as usize] = true;
                let v = self.eval(value)?;
                let slot = self.slot(*target);
                self.frame[slot] = v;
            }
            Stmt::If {
                cond,
                then_block,
                else_block,
            } => {
                if self.cond(cond)? {
                    self.block(then_block)?;
                } else if let Some(e) = else_block {
                    self.block(e)?;
                }
            }
            Stmt::Loop { cond, body } => {
                let mut iterations = 0u32;
                while iterations < self.limits.max_loop_iterations && self.cond(cond)? {
                    iterations += 1;
                    self.block(body)?;
                }
            }
        }
        Ok(())
    }

    fn cond(&mut self, c: &Cond) -> Result<bool, Termination> {
        self.step()?;
        let l = self.eval(&c.left)?;
        let r = self.eval(&c.right)?;
        let taken = c.rel.holds(l, r);
        self.cov
            .record_cond(c.id, taken, branch_distance(c.rel, l, r, !taken));
        Ok(taken)
    }

    fn slot(&self, v: VarId) -> usize {
        match v {
            VarId::Input(i) => i as usize,
            VarId::Local(i) => self.base + i as usize,
        }
    }

    fn eval(&self, e: &Expr) -> Result<i64, Termination> {
        match e {
            Expr::Const(n) => Ok(*n),
            Expr::Var(v) => Ok(self.frame[self.slot(*v)]),
            Expr::Bin(op, l, r) => {
                let a = self.eval(l)?;
                let b = self.eval(r)?;
                op.apply(a, b).ok_or(Termination::OverflowHalt)
            }
        }
    }
}
