//! Descriptive statistics and Welch's two-sample t-test.

mod dist;

pub use dist::{incomplete_beta, ln_gamma, student_t_cdf, student_t_cdf_closed, two_sided_p};

/// Confidence level (percent) a cell's `actual_cl` is compared against.
pub const DESIRED_CL: f64 = 90.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("need at least {needed} values, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("samples have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
}

pub fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// Mean and sample standard deviation (`n - 1` denominator).
pub fn mean_stdev(values: &[f64]) -> Result<(f64, f64), StatsError> {
    if values.len() < 2 {
        return Err(StatsError::InsufficientData {
            needed: 2,
            got: values.len(),
        });
    }
    let m = mean(values).unwrap();
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    Ok((m, (ss / (values.len() - 1) as f64).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TTestResult {
    pub t: f64,
    /// Welch-Satterthwaite degrees of freedom.
    pub df: f64,
    pub p_two_sided: f64,
    /// `100 * (1 - p)`.
    pub actual_cl: f64,
    /// Both samples have zero variance, so `t` is 0 (equal means) or
    /// infinite, and `df` is undefined (NaN).
    pub degenerate: bool,
}

/// Unpaired two-sided t-test without assuming equal variances.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<TTestResult, StatsError> {
    let (ma, sa) = mean_stdev(a)?;
    let (mb, sb) = mean_stdev(b)?;
    let (va, vb) = (sa * sa / a.len() as f64, sb * sb / b.len() as f64);
    let se2 = va + vb;
    if se2 == 0.0 {
        let t = if ma == mb {
            0.0
        } else {
            (ma - mb).signum() * f64::INFINITY
        };
        let p = if ma == mb { 1.0 } else { 0.0 };
        return Ok(TTestResult {
            t,
            df: f64::NAN,
            p_two_sided: p,
            actual_cl: 100.0 * (1.0 - p),
            degenerate: true,
        });
    }
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2 / (va * va / (a.len() - 1) as f64 + vb * vb / (b.len() - 1) as f64);
    let p = two_sided_p(t, df);
    Ok(TTestResult {
        t,
        df,
        p_two_sided: p,
        actual_cl: 100.0 * (1.0 - p),
        degenerate: false,
    })
}

/// One row of the results table: both techniques' coverage in a cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellSummary {
    pub ga_mean: f64,
    pub ga_std: f64,
    pub rnd_mean: f64,
    pub rnd_std: f64,
    pub test: TTestResult,
}

impl CellSummary {
    pub fn actual_cl(&self) -> f64 {
        self.test.actual_cl
    }

    /// Whether the difference reaches [`DESIRED_CL`].
    pub fn significant(&self) -> bool {
        self.test.actual_cl >= DESIRED_CL
    }
}

pub fn summarize_cell(ga: &[f64], rnd: &[f64]) -> Result<CellSummary, StatsError> {
    if ga.len() != rnd.len() {
        return Err(StatsError::LengthMismatch(ga.len(), rnd.len()));
    }
    let (ga_mean, ga_std) = mean_stdev(ga)?;
    let (rnd_mean, rnd_std) = mean_stdev(rnd)?;
    Ok(CellSummary {
        ga_mean,
        ga_std,
        rnd_mean,
        rnd_std,
        test: welch_t_test(ga, rnd)?,
    })
}
