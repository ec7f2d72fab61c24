use crate::exec_cov::{CoverageMap, CoverageReport, Criterion};
use crate::sut_lang::{compute_metrics, Program, Stmt};

/// Per-branch weights for the statement criterion: the number of
/// assignments (transitively) governed by each outcome, at least 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockWeights {
    /// Indexed by branch id, `[false, true]`.
    weights: Vec<[u64; 2]>,
}

impl BlockWeights {
    pub fn new(program: &Program) -> Self {
        let mut weights = vec![[1, 1]; program.metrics().branches];
        collect(program.body(), &mut weights);
        BlockWeights { weights }
    }

    pub fn weight(&self, branch: usize, outcome: bool) -> u64 {
        self.weights[branch][outcome as usize]
    }
}

fn collect(block: &[Stmt], out: &mut [[u64; 2]]) {
    let count = |b: &[Stmt]| (compute_metrics(b).statements as u64).max(1);
    for s in block {
        match s {
            Stmt::Assign { .. } => {}
            Stmt::If {
                cond,
                then_block,
                else_block,
            } => {
                let else_block = else_block.as_deref().unwrap_or(&[]);
                out[cond.id.0 as usize] = [count(else_block), count(then_block)];
                collect(then_block, out);
                collect(else_block, out);
            }
            Stmt::Loop { cond, body } => {
                out[cond.id.0 as usize] = [1, count(body)];
                collect(body, out);
            }
        }
    }
}

/// Guidance term in `[0, 1)`: mean of `1/(1+d)` over uncovered outcomes.
///
/// Outcomes whose condition was never evaluated contribute 0. Under the
/// statement criterion each distance is divided by the outcome's weight.
pub fn guidance(coverage: &CoverageMap, criterion: Criterion, weights: &BlockWeights) -> f64 {
    let mut uncovered = 0usize;
    let mut sum = 0.0;
    for b in 0..coverage.branch_count() {
        let id = crate::sut_lang::BranchId(b as u32);
        for outcome in [false, true] {
            if coverage.is_covered(id, outcome) {
                continue;
            }
            uncovered += 1;
            if let Some(d) = coverage.distance(id, outcome) {
                let d = match criterion {
                    Criterion::Statement => d as f64 / weights.weight(b, outcome) as f64,
                    Criterion::Branch => d as f64,
                };
                sum += 1.0 / (1.0 + d);
            }
        }
    }
    if uncovered == 0 {
        0.0
    } else {
        // keep strictly below 1 even when rounding says otherwise
        (sum / uncovered as f64).min(1.0 - f64::EPSILON)
    }
}

/// Covered units plus guidance.
pub fn suite_fitness(report: &CoverageReport, criterion: Criterion, weights: &BlockWeights) -> f64 {
    report.covered_units(criterion) as f64 + guidance(&report.coverage, criterion, weights)
}
