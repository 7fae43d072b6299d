//! Seeded Monte Carlo power estimation and the drivers that rebuild the
//! power tables and figure grids.
//!
//! Replication `r` of a plan draws both samples from `RngStream::new(seed, r)`,
//! so a plan's result depends only on the plan, never on scheduling.

use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::time::Instant;

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::competitors::{hotelling_t2_test, oja_test, OjaConfig};
use crate::depth::DepthSpec;
use crate::error::{Error, Result};
use crate::model::{alternative_families, sample, Family, GaussianMixture, RngStream};
use crate::ranksum::null_test;
use crate::theory::{beta_q, beta_t2, figure_grids, Figure, PowerQuery, FIG2_SAMPLE_SIZE};

/// Seed used by [`reproduce`] unless another is given.
pub const DEFAULT_SEED: u64 = 20_040_615;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestKind {
    /// Depth rank-sum test against `F = G`.
    Q,
    T2,
    Oja,
}

impl TestKind {
    pub fn name(self) -> &'static str {
        match self {
            TestKind::Q => "q",
            TestKind::T2 => "t2",
            TestKind::Oja => "oja",
        }
    }

    /// Column label used in power grids.
    pub fn label(self) -> &'static str {
        match self {
            TestKind::Q => "Q",
            TestKind::T2 => "T2",
            TestKind::Oja => "O",
        }
    }
}

impl FromStr for TestKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "q" | "Q" => Ok(TestKind::Q),
            "t2" | "T2" => Ok(TestKind::T2),
            "oja" | "O" => Ok(TestKind::Oja),
            _ => Err(Error::Domain(format!("unknown test '{s}' (expected q, t2 or oja)"))),
        }
    }
}

/// A Monte Carlo power experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimPlan {
    pub test: TestKind,
    /// Depth used by the `Q` test.
    pub depth: DepthSpec,
    pub oja: OjaConfig,
    pub f: GaussianMixture,
    pub g: GaussianMixture,
    pub m: usize,
    pub n: usize,
    pub alpha: f64,
    pub replications: u64,
    pub seed: u64,
}

impl SimPlan {
    /// A plan at `α = 0.05` with exact projection depth and exact Oja ranks.
    pub fn new(test: TestKind, f: GaussianMixture, g: GaussianMixture, m: usize, n: usize) -> Self {
        Self {
            test,
            depth: DepthSpec::projection(),
            oja: OjaConfig::exact(),
            f,
            g,
            m,
            n,
            alpha: 0.05,
            replications: 1000,
            seed: DEFAULT_SEED,
        }
    }

    pub fn with_depth(mut self, depth: DepthSpec) -> Self {
        self.depth = depth;
        self
    }

    pub fn with_replications(mut self, replications: u64) -> Self {
        self.replications = replications;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::Domain("at least one replication is required".into()));
        }
        if self.f.dim() != self.g.dim() {
            return Err(Error::DimensionMismatch { expected: self.f.dim(), found: self.g.dim() });
        }
        if self.m == 0 || self.n == 0 {
            return Err(Error::Domain("sample sizes must be positive".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Domain(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        Ok(())
    }

    /// Whether replication `r` rejects.
    pub fn replicate(&self, r: u64) -> Result<bool> {
        let mut rng = RngStream::new(self.seed, r);
        let x = sample(&self.f, self.m, &mut rng)?;
        let y = sample(&self.g, self.n, &mut rng)?;
        let report = match self.test {
            TestKind::Q => {
                let spec = DepthSpec { seed: rng.next_u64(), ..self.depth };
                null_test(&x, &y, &spec, self.alpha)?
            }
            TestKind::T2 => hotelling_t2_test(&x, &y, self.alpha)?,
            TestKind::Oja => {
                let cfg = OjaConfig { seed: rng.next_u64(), ..self.oja };
                oja_test(&x, &y, &cfg, self.alpha)?
            }
        };
        Ok(report.reject)
    }
}

/// Rejection rate with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub rate: f64,
    pub mc_se: f64,
    pub rejections: u64,
    pub replications: u64,
}

/// Fraction of replications that reject, with `√(r(1 − r)/R)`.
pub fn mc_power(plan: &SimPlan) -> Result<McEstimate> {
    plan.validate()?;
    let outcomes: Vec<Result<bool>> =
        (0..plan.replications).into_par_iter().map(|r| plan.replicate(r)).collect();
    let mut rejections = 0u64;
    for (r, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(true) => rejections += 1,
            Ok(false) => {}
            Err(e) => return Err(Error::Replication { index: r as u64, source: Box::new(e) }),
        }
    }
    let reps = plan.replications as f64;
    let rate = rejections as f64 / reps;
    Ok(McEstimate {
        rate,
        mc_se: (rate * (1.0 - rate) / reps).sqrt(),
        rejections,
        replications: plan.replications,
    })
}

/// How a grid value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    Analytic,
    MonteCarlo,
}

impl Source {
    pub fn name(self) -> &'static str {
        match self {
            Source::Analytic => "analytic",
            Source::MonteCarlo => "monte-carlo",
        }
    }
}

/// One value of a power grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerCell {
    pub param: f64,
    pub method: String,
    pub power: Option<f64>,
    pub mc_se: Option<f64>,
    pub source: Source,
    pub family: Option<Family>,
    /// Second grid coordinate (`σ²` on the `Q(u, σ²)` surface).
    pub secondary: Option<f64>,
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub replications: Option<u64>,
}

impl PowerCell {
    pub fn analytic(param: f64, method: &str, power: f64) -> Self {
        Self {
            param,
            method: method.into(),
            power: Some(power),
            mc_se: None,
            source: Source::Analytic,
            family: None,
            secondary: None,
            m: None,
            n: None,
            replications: None,
        }
    }

    pub fn monte_carlo(param: f64, method: &str, est: &McEstimate) -> Self {
        Self {
            power: Some(est.rate),
            mc_se: Some(est.mc_se),
            source: Source::MonteCarlo,
            replications: Some(est.replications),
            ..Self::analytic(param, method, 0.0)
        }
    }

    /// A placeholder cell with no value.
    pub fn empty(param: f64, method: &str, source: Source) -> Self {
        Self { power: None, source, ..Self::analytic(param, method, 0.0) }
    }

    pub fn with_family(mut self, family: Family) -> Self {
        self.family = Some(family);
        self
    }

    pub fn with_secondary(mut self, v: f64) -> Self {
        self.secondary = Some(v);
        self
    }

    pub fn with_sizes(mut self, m: usize, n: usize) -> Self {
        self.m = Some(m);
        self.n = Some(n);
        self
    }
}

/// Parameter × method grid of power values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerGrid {
    pub name: String,
    pub param_name: String,
    cells: Vec<PowerCell>,
}

pub const CSV_HEADER: &str = "param,method,power,mc_se,source,family,secondary,m,n,replications";

impl PowerGrid {
    pub fn new(name: &str, param_name: &str) -> Self {
        Self { name: name.into(), param_name: param_name.into(), cells: Vec::new() }
    }

    pub fn push(&mut self, cell: PowerCell) {
        self.cells.push(cell);
    }

    pub fn cells(&self) -> &[PowerCell] {
        &self.cells
    }

    pub fn cells_mut(&mut self) -> &mut [PowerCell] {
        &mut self.cells
    }

    /// Cells matching a family, sample size and method, in grid order.
    pub fn row(&self, family: Family, n: usize, method: &str) -> Vec<&PowerCell> {
        self.cells
            .iter()
            .filter(|c| c.family == Some(family) && c.n == Some(n) && c.method == method)
            .collect()
    }

    /// CSV with a header row; reals at 17 significant digits, missing values empty.
    pub fn to_csv(&self) -> String {
        let opt_f = |v: Option<f64>| v.map(format_sig17).unwrap_or_default();
        let opt_u = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                format_sig17(c.param),
                c.method,
                opt_f(c.power),
                opt_f(c.mc_se),
                c.source.name(),
                c.family.map(|f| f.name()).unwrap_or(""),
                opt_f(c.secondary),
                opt_u(c.m),
                opt_u(c.n),
                c.replications.map(|r| r.to_string()).unwrap_or_default(),
            );
        }
        out
    }

    /// Aligned text table: one line per (family, n, secondary, method), one
    /// column per parameter value.
    pub fn to_table(&self) -> String {
        let mut params: Vec<f64> = Vec::new();
        let mut rows: Vec<(String, Vec<Option<f64>>)> = Vec::new();
        for c in &self.cells {
            if !params.contains(&c.param) {
                params.push(c.param);
            }
        }
        let mut keys: Vec<String> = Vec::new();
        for c in &self.cells {
            let mut key = String::new();
            if let Some(f) = c.family {
                key.push_str(f.name());
                key.push(' ');
            }
            if let Some(n) = c.n {
                let _ = write!(key, "n={n} ");
            }
            if let Some(s) = c.secondary {
                let _ = write!(key, "sigma2={s:.2} ");
            }
            key.push_str(&c.method);
            let idx = match keys.iter().position(|k| *k == key) {
                Some(i) => i,
                None => {
                    keys.push(key.clone());
                    rows.push((key, vec![None; params.len()]));
                    keys.len() - 1
                }
            };
            let col = params.iter().position(|p| *p == c.param).expect("param collected above");
            rows[idx].1[col] = c.power;
        }
        let label_w = rows.iter().map(|r| r.0.len()).max().unwrap_or(0).max(self.param_name.len());
        let mut out = format!("{:<label_w$}", self.param_name);
        for p in &params {
            let _ = write!(out, " {:>7}", format!("{p:.2}"));
        }
        out.push('\n');
        for (label, vals) in &rows {
            let _ = write!(out, "{label:<label_w$}");
            for v in vals {
                match v {
                    Some(x) => {
                        let _ = write!(out, " {x:>7.3}");
                    }
                    None => {
                        let _ = write!(out, " {:>7}", "-");
                    }
                }
            }
            out.push('\n');
        }
        out
    }
}

/// `%.17g`-style formatting: 17 significant digits, trailing zeros removed.
pub fn format_sig17(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if !(-5..17).contains(&exp) {
        format!("{}e{}{:02}", trim(mantissa), if exp < 0 { '-' } else { '+' }, exp.abs())
    } else {
        trim(&format!("{:.*}", (16 - exp) as usize, x))
    }
}

/// Reproduction targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    Table1,
    Table2,
    Table3,
    Table4,
    Fig1,
    Fig2,
}

impl Target {
    pub const ALL: [Target; 6] =
        [Target::Table1, Target::Table2, Target::Table3, Target::Table4, Target::Fig1, Target::Fig2];

    pub fn name(self) -> &'static str {
        match self {
            Target::Table1 => "table1",
            Target::Table2 => "table2",
            Target::Table3 => "table3",
            Target::Table4 => "table4",
            Target::Fig1 => "fig1",
            Target::Fig2 => "fig2",
        }
    }

    /// Family and parameter grid of a table.
    pub fn table_layout(self) -> Option<Vec<(Family, [f64; 6])>> {
        const U: [f64; 6] = [0.0, 0.15, 0.20, 0.25, 0.30, 0.35];
        const S2: [f64; 6] = [1.0, 1.2, 1.4, 1.6, 1.8, 2.0];
        match self {
            Target::Table1 => Some(vec![(Family::ContaminatedLocation, U)]),
            Target::Table2 => Some(vec![(Family::ContaminatedScale, S2)]),
            Target::Table3 => Some(vec![(Family::LocationScale, U)]),
            Target::Table4 => Some(vec![
                (Family::ContaminatedLocation, U),
                (Family::ContaminatedScale, S2),
                (Family::LocationScale, U),
            ]),
            Target::Fig1 | Target::Fig2 => None,
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Target::ALL.into_iter().find(|t| t.name() == s).ok_or_else(|| {
            let names: Vec<_> = Target::ALL.iter().map(|t| t.name()).collect();
            Error::Domain(format!("unknown target '{s}' (valid targets: {})", names.join(", ")))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Budget {
    Paper,
    Quick,
}

impl Budget {
    pub fn name(self) -> &'static str {
        match self {
            Budget::Paper => "paper",
            Budget::Quick => "quick",
        }
    }

    /// Replications for the small-sample table.
    pub fn small_sample_reps(self) -> u64 {
        match self {
            Budget::Paper => 1000,
            Budget::Quick => 200,
        }
    }

    /// Replications for Monte Carlo cells beside analytic ones.
    pub fn asymptotic_reps(self) -> u64 {
        match self {
            Budget::Paper => 2000,
            Budget::Quick => 200,
        }
    }
}

impl FromStr for Budget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Budget::Paper),
            "quick" => Ok(Budget::Quick),
            _ => Err(Error::Domain(format!("unknown budget '{s}' (expected paper or quick)"))),
        }
    }
}

/// Sample sizes of the asymptotic tables.
pub const TABLE_SIZES: [usize; 2] = [100, 200];
/// Sample size of the small-sample table.
pub const SMALL_SAMPLE_SIZE: usize = 25;
/// Projection directions used by the small-sample table.
pub const SMALL_SAMPLE_DIRECTIONS: usize = 1000;

/// Per-cell seed: a SplitMix64 step of the run seed and cell index.
pub fn cell_seed(seed: u64, cell: u64) -> u64 {
    let mut z = seed ^ cell.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Projection depth with (median, MAD) over sampled directions, as used for
/// the small-sample table.
pub fn small_sample_depth() -> DepthSpec {
    DepthSpec::projection().approximate(SMALL_SAMPLE_DIRECTIONS)
}

/// Rebuilds a table or figure grid with [`DEFAULT_SEED`].
pub fn reproduce(target: Target, budget: Budget) -> Result<PowerGrid> {
    reproduce_with_seed(target, budget, DEFAULT_SEED)
}

pub fn reproduce_with_seed(target: Target, budget: Budget, seed: u64) -> Result<PowerGrid> {
    let f = GaussianMixture::standard(2);
    match target {
        Target::Fig1 => figure_grids(Figure::Fig1),
        Target::Fig2 => {
            let mut grid = figure_grids(Figure::Fig2)?;
            let n = FIG2_SAMPLE_SIZE;
            for (k, cell) in grid.cells_mut().iter_mut().enumerate() {
                if cell.power.is_some() {
                    continue;
                }
                let g = alternative_families(Family::PureScale, cell.param)?;
                let plan = SimPlan::new(TestKind::Oja, f.clone(), g, n, n)
                    .with_replications(budget.asymptotic_reps())
                    .with_seed(cell_seed(seed, k as u64));
                let est = mc_power(&plan)?;
                let filled = PowerCell::monte_carlo(cell.param, "O", &est)
                    .with_family(Family::PureScale)
                    .with_sizes(n, n);
                *cell = filled;
            }
            Ok(grid)
        }
        Target::Table4 => {
            let mut grid = PowerGrid::new(target.name(), "param");
            let n = SMALL_SAMPLE_SIZE;
            let mut col = 0u64;
            for (family, params) in target.table_layout().expect("table") {
                for p in params {
                    let g = alternative_families(family, p)?;
                    let cell_seed = cell_seed(seed, col);
                    col += 1;
                    for test in [TestKind::T2, TestKind::Q, TestKind::Oja] {
                        let plan = SimPlan::new(test, f.clone(), g.clone(), n, n)
                            .with_depth(small_sample_depth())
                            .with_replications(budget.small_sample_reps())
                            .with_seed(cell_seed);
                        let est = mc_power(&plan)?;
                        grid.push(
                            PowerCell::monte_carlo(p, test.label(), &est)
                                .with_family(family)
                                .with_sizes(n, n),
                        );
                    }
                }
            }
            Ok(grid)
        }
        Target::Table1 | Target::Table2 | Target::Table3 => {
            let (family, params) = target.table_layout().expect("table")[0];
            let mut grid = PowerGrid::new(target.name(), family.param_name());
            let mut col = 0u64;
            for n in TABLE_SIZES {
                for p in params {
                    let q = PowerQuery::new(family, p, n);
                    let g = q.alternative()?;
                    let plan = SimPlan::new(TestKind::Oja, f.clone(), g, n, n)
                        .with_replications(budget.asymptotic_reps())
                        .with_seed(cell_seed(seed, col));
                    col += 1;
                    let est = mc_power(&plan)?;
                    let tag = |c: PowerCell| c.with_family(family).with_sizes(n, n);
                    grid.push(tag(PowerCell::analytic(p, "T2", beta_t2(&q)?)));
                    grid.push(tag(PowerCell::analytic(p, "Q", beta_q(&q)?)));
                    grid.push(tag(PowerCell::monte_carlo(p, "O", &est)));
                }
            }
            Ok(grid)
        }
    }
}

/// Only the analytic cells of tables 1 to 3 (no Monte Carlo).
pub fn analytic_table(target: Target) -> Result<PowerGrid> {
    let layout = target
        .table_layout()
        .filter(|_| target != Target::Table4)
        .ok_or_else(|| Error::Domain(format!("{target} has no analytic cells")))?;
    let (family, params) = layout[0];
    let mut grid = PowerGrid::new(target.name(), family.param_name());
    for n in TABLE_SIZES {
        for p in params {
            let q = PowerQuery::new(family, p, n);
            let tag = |c: PowerCell| c.with_family(family).with_sizes(n, n);
            grid.push(tag(PowerCell::analytic(p, "T2", beta_t2(&q)?)));
            grid.push(tag(PowerCell::analytic(p, "Q", beta_q(&q)?)));
        }
    }
    Ok(grid)
}

/// Provenance written next to every power grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub target: Option<Target>,
    pub budget: Option<Budget>,
    pub seed: u64,
    pub plan: Option<serde_json::Value>,
    pub cells: usize,
    pub wall_time_seconds: f64,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64, grid: &PowerGrid, started: Instant) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            target: None,
            budget: None,
            seed,
            plan: None,
            cells: grid.cells().len(),
            wall_time_seconds: started.elapsed().as_secs_f64(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}
