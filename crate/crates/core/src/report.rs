use serde::{Deserialize, Serialize};

/// Outcome of a two-sample test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    /// Name of the test, e.g. `"q-null"`, `"q-general"`, `"t2"`, `"oja"`.
    pub test: String,
    /// The test statistic: `Q̂` for the rank-sum tests, the quadratic form otherwise.
    pub statistic: f64,
    /// Standardized statistic for normal-reference tests.
    pub z: Option<f64>,
    /// Degrees of freedom for chi-square-reference tests.
    pub df: Option<u32>,
    pub p_value: f64,
    pub alpha: f64,
    pub reject: bool,
    pub m: usize,
    pub n: usize,
    pub sigma2_gf_hat: Option<f64>,
    pub sigma2_fg_hat: Option<f64>,
    /// `(1 − α)` confidence interval for `Q(F, G)`.
    pub confidence_interval: Option<(f64, f64)>,
}
