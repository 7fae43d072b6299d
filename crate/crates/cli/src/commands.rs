use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use depthrank::competitors::{hotelling_t2_test, oja_test, OjaConfig};
use depthrank::depth::{DepthMethod, DepthMode, DepthSpec, LocationScale};
use depthrank::model::{alternative_families, Family, GaussianMixture};
use depthrank::powerlab::{
    format_sig17, mc_power, reproduce_with_seed, Budget, PowerCell, PowerGrid, RunManifest,
    SimPlan, Target, TestKind,
};
use depthrank::ranksum::{general_report, null_report, q_result};

use crate::args::*;
use crate::data::read_sample;
use crate::error::{CliError, CliResult};

pub fn depth_spec(o: &DepthOptions) -> DepthSpec {
    let method = match o.method {
        MethodArg::Mahalanobis => DepthMethod::Mahalanobis,
        MethodArg::Halfspace => DepthMethod::Halfspace,
        MethodArg::Projection => DepthMethod::Projection,
        MethodArg::Cdf1d => DepthMethod::Cdf1d,
    };
    let mut spec = DepthSpec::new(method).with_seed(o.direction_seed).with_location_scale(match o.location_scale {
        LocationScaleArg::MedianMad => LocationScale::MedianMad,
        LocationScaleArg::MeanSd => LocationScale::MeanSd,
    });
    if o.mode == ModeArg::Approximate {
        spec = spec.approximate(o.directions);
    }
    spec
}

fn check_alpha(alpha: f64) -> CliResult<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--alpha must lie in (0, 1), got {alpha}")))
    }
}

fn check_dims(expected: usize, found: usize) -> CliResult<()> {
    if expected == found {
        Ok(())
    } else {
        Err(depthrank::Error::DimensionMismatch { expected, found }.into())
    }
}

pub fn depth(args: &DepthArgs, out: &mut dyn Write) -> CliResult<()> {
    let x = read_sample(&args.x)?;
    let reference = read_sample(&args.reference)?;
    check_dims(x.dim(), reference.dim())?;
    let model = depth_spec(&args.depth).fit(&reference)?;
    let depths = model.depths(&x)?;
    let mut text = String::from("row_index,depth\n");
    for (i, d) in depths.iter().enumerate() {
        text.push_str(&format!("{i},{}\n", format_sig17(*d)));
    }
    write_out(out, &text)
}

#[derive(Serialize)]
struct QtestJson {
    q: f64,
    m: usize,
    n: usize,
    z: f64,
    p_value: f64,
    reject: bool,
    sigma2_gf_hat: f64,
    sigma2_fg_hat: f64,
    method: &'static str,
    mode: &'static str,
    test: String,
    alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    q0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    confidence_interval: Option<[f64; 2]>,
}

pub fn qtest(args: &QtestArgs, out: &mut dyn Write) -> CliResult<()> {
    check_alpha(args.alpha)?;
    let x = read_sample(&args.x)?;
    let y = read_sample(&args.y)?;
    check_dims(x.dim(), y.dim())?;
    let spec = depth_spec(&args.depth);
    let r = q_result(&x, &y, &spec)?;
    let report = match args.q0 {
        Some(q0) => general_report(&r, q0, args.alpha)?,
        None => null_report(&r, args.alpha),
    };
    let doc = QtestJson {
        q: r.q,
        m: r.m,
        n: r.n,
        z: report.z.unwrap_or(r.z_null),
        p_value: report.p_value,
        reject: report.reject,
        sigma2_gf_hat: r.sigma2_gf_hat,
        sigma2_fg_hat: r.sigma2_fg_hat,
        method: spec.method.name(),
        mode: mode_name(&spec, x.dim()),
        test: report.test.clone(),
        alpha: args.alpha,
        q0: args.q0,
        confidence_interval: report.confidence_interval.map(|(a, b)| [a, b]),
    };
    write_json(out, &doc)
}

/// Mahalanobis depth and one-dimensional data are always computed exactly.
fn mode_name(spec: &DepthSpec, dim: usize) -> &'static str {
    match spec.method {
        DepthMethod::Mahalanobis | DepthMethod::Cdf1d => DepthMode::Exact.name(),
        _ if dim == 1 => DepthMode::Exact.name(),
        _ => spec.mode.name(),
    }
}

#[derive(Serialize)]
struct CompetitorJson {
    statistic: f64,
    df: u32,
    p_value: f64,
    reject: bool,
    mode: &'static str,
    test: String,
    alpha: f64,
    m: usize,
    n: usize,
}

pub fn competitor(args: &CompetitorArgs, out: &mut dyn Write) -> CliResult<()> {
    check_alpha(args.alpha)?;
    let x = read_sample(&args.x)?;
    let y = read_sample(&args.y)?;
    check_dims(x.dim(), y.dim())?;
    let (report, mode) = match args.test {
        CompetitorTest::T2 => (hotelling_t2_test(&x, &y, args.alpha)?, "exact"),
        CompetitorTest::Oja => {
            let cfg = match args.oja_mode {
                OjaModeArg::Exact => OjaConfig::exact(),
                OjaModeArg::Sampled => OjaConfig::sampled(args.subsets, args.seed),
            };
            let mode = if args.oja_mode == OjaModeArg::Exact { "exact" } else { "sampled" };
            (oja_test(&x, &y, &cfg, args.alpha)?, mode)
        }
    };
    let doc = CompetitorJson {
        statistic: report.statistic,
        df: report.df.unwrap_or(x.dim() as u32),
        p_value: report.p_value,
        reject: report.reject,
        mode,
        test: report.test,
        alpha: args.alpha,
        m: report.m,
        n: report.n,
    };
    write_json(out, &doc)
}

/// `a,b,c` or `start:stop:step` (inclusive of `stop` up to rounding).
pub fn parse_grid(text: &str) -> CliResult<Vec<f64>> {
    let bad = || CliError::Usage(format!("cannot parse parameter grid '{text}'"));
    if let Some((start, rest)) = text.split_once(':') {
        let (stop, step) = rest.split_once(':').ok_or_else(bad)?;
        let (start, stop, step): (f64, f64, f64) = (
            start.trim().parse().map_err(|_| bad())?,
            stop.trim().parse().map_err(|_| bad())?,
            step.trim().parse().map_err(|_| bad())?,
        );
        if !(step > 0.0) || stop < start {
            return Err(bad());
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize;
        return Ok((0..=count).map(|k| start + k as f64 * step).collect());
    }
    text.split(',').map(|v| v.trim().parse::<f64>().map_err(|_| bad())).collect()
}

fn family(f: FamilyArg) -> Family {
    match f {
        FamilyArg::ContaminatedLocation => Family::ContaminatedLocation,
        FamilyArg::ContaminatedScale => Family::ContaminatedScale,
        FamilyArg::LocationScale => Family::LocationScale,
        FamilyArg::PureLocation => Family::PureLocation,
        FamilyArg::PureScale => Family::PureScale,
    }
}

pub fn power(args: &PowerArgs, out: &mut dyn Write) -> CliResult<()> {
    check_alpha(args.alpha)?;
    if args.reps == 0 || args.m == 0 {
        return Err(CliError::Usage("--reps and --m must be positive".into()));
    }
    let started = Instant::now();
    let fam = family(args.family);
    let test = match args.test {
        TestArg::Q => TestKind::Q,
        TestArg::T2 => TestKind::T2,
        TestArg::Oja => TestKind::Oja,
    };
    let n = args.n.unwrap_or(args.m);
    let spec = depth_spec(&args.depth);
    let mut grid = PowerGrid::new("power", fam.param_name());
    let mut plans = Vec::new();
    for (k, p) in parse_grid(&args.param_grid)?.into_iter().enumerate() {
        let g = alternative_families(fam, p)?;
        let mut plan = SimPlan::new(test, GaussianMixture::standard(2), g, args.m, n)
            .with_depth(spec)
            .with_replications(args.reps)
            .with_seed(depthrank::powerlab::cell_seed(args.seed, k as u64));
        plan.alpha = args.alpha;
        let est = mc_power(&plan)?;
        grid.push(PowerCell::monte_carlo(p, test.label(), &est).with_family(fam).with_sizes(args.m, n));
        plans.push(plan);
    }
    let mut manifest = RunManifest::new("power", args.seed, &grid, started);
    manifest.plan = Some(serde_json::to_value(&plans).expect("plans serialize"));
    write_grid(&args.out, "power", &grid, &manifest)?;
    write_out(out, &grid.to_table())
}

pub fn reproduce(args: &ReproduceArgs, out: &mut dyn Write) -> CliResult<()> {
    let started = Instant::now();
    let target = match args.target {
        TargetArg::Table1 => Target::Table1,
        TargetArg::Table2 => Target::Table2,
        TargetArg::Table3 => Target::Table3,
        TargetArg::Table4 => Target::Table4,
        TargetArg::Fig1 => Target::Fig1,
        TargetArg::Fig2 => Target::Fig2,
    };
    let budget = match args.budget {
        BudgetArg::Paper => Budget::Paper,
        BudgetArg::Quick => Budget::Quick,
    };
    let grid = reproduce_with_seed(target, budget, args.seed)?;
    let mut manifest = RunManifest::new("reproduce", args.seed, &grid, started);
    manifest.target = Some(target);
    manifest.budget = Some(budget);
    write_grid(&args.out, target.name(), &grid, &manifest)?;
    write_out(out, &grid.to_table())
}

fn write_grid(dir: &Path, stem: &str, grid: &PowerGrid, manifest: &RunManifest) -> CliResult<()> {
    let io = |e: std::io::Error| CliError::File { path: dir.to_path_buf(), message: e.to_string() };
    fs::create_dir_all(dir).map_err(io)?;
    fs::write(dir.join(format!("{stem}.csv")), grid.to_csv()).map_err(io)?;
    fs::write(dir.join(format!("{stem}.manifest.json")), manifest.to_json()).map_err(io)?;
    Ok(())
}

fn write_json<T: Serialize>(out: &mut dyn Write, doc: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(doc).expect("report serializes");
    write_out(out, &(text + "\n"))
}

fn write_out(out: &mut dyn Write, text: &str) -> CliResult<()> {
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::File { path: "<stdout>".into(), message: e.to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0, 0.15,0.2").unwrap(), vec![0.0, 0.15, 0.2]);
        let g = parse_grid("1:2:0.2").unwrap();
        assert_eq!(g.len(), 6);
        assert!((g[5] - 2.0).abs() < 1e-12);
        assert!(parse_grid("1:0:0.1").is_err());
        assert!(parse_grid("a,b").is_err());
    }
}
