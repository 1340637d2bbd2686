//! Welch's unequal-variances t-test (two-sided).
//!
//! Used to check whether the similarity populations produced by the two
//! recommendation strategies differ significantly.

use thiserror::Error;

/// Significance level for the two-sided test.
pub const ALPHA: f64 = 0.05;

#[derive(Debug, Error, PartialEq)]
pub enum TTestError {
    /// Fewer than two observations on a side, or no variance anywhere:
    /// the statistic is undefined.
    #[error("degenerate sample: need >= 2 observations per side and nonzero variance")]
    DegenerateSample,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct TTestResult {
    /// Welch's t statistic.
    pub t: f64,
    /// Welch–Satterthwaite degrees of freedom.
    pub df: f64,
    /// Two-sided p-value.
    pub p: f64,
}

impl TTestResult {
    /// Two-sided significance at the 5% level.
    pub fn significant(&self) -> bool {
        self.p < ALPHA
    }
}

fn mean_and_sample_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let ss = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
    (mean, ss / (n - 1.0))
}

/// Welch's two-sample t-test. Exactly equal means give `t == 0.0` and
/// `p == 1.0` with no rounding slack.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<TTestResult, TTestError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(TTestError::DegenerateSample);
    }
    let (mean_a, var_a) = mean_and_sample_var(a);
    let (mean_b, var_b) = mean_and_sample_var(b);
    let na = a.len() as f64;
    let nb = b.len() as f64;
    let se_a = var_a / na;
    let se_b = var_b / nb;
    let se2 = se_a + se_b;
    if se2 == 0.0 {
        // Both sides constant: the statistic is 0/0.
        return Err(TTestError::DegenerateSample);
    }
    let t = (mean_a - mean_b) / se2.sqrt();
    let df = se2 * se2 / (se_a * se_a / (na - 1.0) + se_b * se_b / (nb - 1.0));
    let p = if t == 0.0 {
        1.0
    } else {
        // Two-sided: P(|T| >= |t|) = I_x(df/2, 1/2) with x = df/(df+t^2).
        statrs::function::beta::beta_reg(df / 2.0, 0.5, df / (df + t * t))
    };
    Ok(TTestResult { t, df, p })
}
