//! Experiment dispatch.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::time::Instant;

use serde_json::json;

use super::config::{ExperimentConfig, ExperimentKind};
use super::output::{write_rows, ResultRow};
use super::verify::verify;
use super::HarnessError;
use crate::analytics::{green, green_sum_along_walk, suffcond_diagnostic, GreenTable};
use crate::brw::{progeny_ks, ratio_experiment_from, PointMeasure, DEFAULT_PROGENY_CAP};
use crate::distributions::{JumpDistribution, OffspringDistribution};
use crate::lattice::Point;
use crate::replicate::Replication;
use crate::snake::{estimate_no_return_head, excursion_range_estimate, free_range_trace, head_return_table, no_return_head_stopped};
use crate::spine::{conditioned_range, estimate_c_formula, estimate_no_return, range_process, HFallback, HTable};
use crate::stats::{mean_stderr, EstimateRecord};

const DEFAULT_REPS: u64 = 100;

/// Rows for stdout plus any side files already written.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub rows: Vec<ResultRow>,
    /// Rows go to this file instead of stdout.
    pub rows_path: Option<std::path::PathBuf>,
}

fn invalid(msg: impl Into<String>) -> HarnessError {
    HarnessError::Validation(msg.into())
}

fn at_least(name: &str, v: u64, min: u64) -> Result<u64, HarnessError> {
    if v < min {
        return Err(invalid(format!("{name} = {v} must be at least {min}")));
    }
    Ok(v)
}

fn ascending(name: &str, v: &[u64], min_len: usize, min_value: u64) -> Result<(), HarnessError> {
    if v.len() < min_len || v.iter().any(|&x| x < min_value) || v.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid(format!("{name} must be {min_len}+ strictly increasing values ≥ {min_value}, got {v:?}")));
    }
    Ok(())
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    kind: ExperimentKind,
    rep: Replication,
}

impl Ctx<'_> {
    fn row(&self, dim: usize, n: Option<u64>, p: Option<u64>, rec: EstimateRecord) -> ResultRow {
        ResultRow::from_record(self.kind.name(), dim, n, p, rec)
    }

    fn laws(&self) -> Result<(OffspringDistribution, JumpDistribution), HarnessError> {
        Ok((self.cfg.offspring()?, self.cfg.jump(self.kind)?))
    }

    fn transient_jump(&self) -> Result<JumpDistribution, HarnessError> {
        let theta = self.cfg.jump(self.kind)?;
        if theta.dim < 3 {
            return Err(invalid(format!("{} needs a transient walk (dim ≥ 3), got dim = {}", self.kind.name(), theta.dim)));
        }
        Ok(theta)
    }

    fn green_table(&self, theta: &JumpDistribution) -> Result<GreenTable, HarnessError> {
        let r = self.cfg.green_radius.unwrap_or(10);
        if !(1..=60).contains(&r) {
            return Err(invalid(format!("green_radius = {r} outside 1..=60")));
        }
        Ok(GreenTable::build(theta, r)?)
    }
}

/// Validates `cfg` and runs the experiment it names.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput, HarnessError> {
    let kind = cfg.kind()?;
    let reps = at_least("reps", cfg.reps.unwrap_or(DEFAULT_REPS), 1)?;
    let rep = Replication::new(reps, cfg.seed_or_default()).with_workers(cfg.workers.unwrap_or(0));
    let ctx = Ctx { cfg, kind, rep };
    let start = Instant::now();
    let mut rows_path = cfg.out.clone();
    let mut rows = match kind {
        ExperimentKind::InfiniteRange => infinite_range(&ctx)?,
        ExperimentKind::NoReturn => {
            let (mu, theta) = ctx.laws()?;
            let horizon = at_least("horizon", cfg.horizon.or(cfg.n).unwrap_or(10_000), 1)?;
            vec![ctx.row(theta.dim, Some(horizon), None, estimate_no_return(&mu, &theta, horizon, &ctx.rep))]
        }
        ExperimentKind::ConstantFormula => constant_formula(&ctx)?,
        ExperimentKind::ConditionedRange => {
            let (mu, theta) = ctx.laws()?;
            let n = at_least("n", cfg.n.unwrap_or(10_000), 1)?;
            vec![ctx.row(theta.dim, Some(n), None, conditioned_range(&mu, &theta, n, &ctx.rep)?)]
        }
        ExperimentKind::SnakeFree => {
            let theta = cfg.jump(kind)?;
            let cps = cfg.checkpoints.clone().unwrap_or_else(|| vec![cfg.n.unwrap_or(100_000)]);
            ascending("checkpoints", &cps, 1, 2)?;
            free_range_trace(&theta, &cps, &ctx.rep).into_iter().zip(&cps).map(|(r, &n)| ctx.row(theta.dim, Some(n), None, r)).collect()
        }
        ExperimentKind::SnakeExcursion => {
            let theta = cfg.jump(kind)?;
            let n = at_least("n", cfg.n.unwrap_or(100_000), 2)?;
            vec![ctx.row(theta.dim, Some(n), None, excursion_range_estimate(&theta, n, &ctx.rep))]
        }
        ExperimentKind::HeadReturnExact => head_return(&ctx)?,
        ExperimentKind::NoReturnHead => {
            let theta = cfg.jump(kind)?;
            match cfg.p {
                Some(p) => {
                    let p = at_least("p", p, 1)?;
                    let cap = at_least("step_cap", cfg.step_cap.unwrap_or(100_000_000), 1)?;
                    vec![ctx.row(theta.dim, None, Some(p), no_return_head_stopped(&theta, p, cap, &ctx.rep))]
                }
                None => {
                    let n = at_least("n", cfg.n.unwrap_or(10_000), 1)?;
                    vec![ctx.row(theta.dim, Some(n), None, estimate_no_return_head(&theta, n, &ctx.rep))]
                }
            }
        }
        ExperimentKind::Green => green_point(&ctx)?,
        ExperimentKind::GreenSum => {
            let theta = ctx.transient_jump()?;
            let m = at_least("m", cfg.m.or(cfg.n).unwrap_or(10_000), 2)?;
            let table = ctx.green_table(&theta)?;
            vec![ctx.row(theta.dim, Some(m), None, green_sum_along_walk(&theta, &table, m, &ctx.rep))]
        }
        ExperimentKind::Suffcond => suffcond(&ctx)?,
        ExperimentKind::Bessel => bessel(&ctx)?,
        ExperimentKind::Brw => {
            rows_path = None;
            brw(&ctx)?
        }
        ExperimentKind::Verify => {
            let report = verify(cfg.level.unwrap_or_default(), cfg.corrupt_green.unwrap_or(false), cfg.seed_or_default(), cfg.workers.unwrap_or(0));
            report.rows()
        }
    };
    let elapsed = start.elapsed().as_millis() as u64;
    for r in &mut rows {
        if r.elapsed_ms == 0 {
            r.elapsed_ms = elapsed;
        }
    }
    Ok(RunOutput { rows, rows_path })
}

/// Runs `cfg` and writes its rows to `out` (or `stdout` when no file is configured).
pub fn run_and_write<W: Write>(cfg: &ExperimentConfig, stdout: W) -> Result<RunOutput, HarnessError> {
    let output = run(cfg)?;
    match &output.rows_path {
        Some(path) => write_rows(BufWriter::new(File::create(path)?), &output.rows)?,
        None => write_rows(stdout, &output.rows)?,
    }
    Ok(output)
}

fn infinite_range(ctx: &Ctx) -> Result<Vec<ResultRow>, HarnessError> {
    let (mu, theta) = ctx.laws()?;
    let n = at_least("n", ctx.cfg.n.unwrap_or(10_000), 1)?;
    let cps = ctx.cfg.checkpoints.clone().unwrap_or_default();
    if cps.iter().any(|&k| k == 0 || k > n) {
        return Err(invalid(format!("checkpoints must lie in 1..={n}")));
    }
    let t = Instant::now();
    let traces = ctx.rep.run(|_, rng| range_process(&mu, &theta, n, &cps, rng));
    let elapsed = t.elapsed().as_millis() as u64;
    let points = traces[0].checkpoints.clone();
    Ok(points
        .iter()
        .enumerate()
        .map(|(c, &k)| {
            let xs: Vec<f64> = traces.iter().map(|tr| tr.r_values[c] as f64 / k as f64).collect();
            let mut rec = EstimateRecord::from_samples(&xs, ctx.rep.seed, json!({"mu": mu.name, "n": k}));
            rec.elapsed_ms = elapsed;
            ctx.row(theta.dim, Some(k), None, rec)
        })
        .collect())
}

fn constant_formula(ctx: &Ctx) -> Result<Vec<ResultRow>, HarnessError> {
    let (mu, theta) = ctx.laws()?;
    if theta.dim < 3 {
        return Err(invalid("constant-formula needs dim ≥ 3"));
    }
    let cfg = ctx.cfg;
    let radius = cfg.radius.unwrap_or(20);
    if !(1..=63).contains(&radius) {
        return Err(invalid(format!("radius = {radius} outside 1..=63")));
    }
    let j_max = at_least("j_max", cfg.j_max.unwrap_or(10_000), 2)?;
    let trees = at_least("h_trees", cfg.h_trees.unwrap_or(20_000), 8)?;
    let size_cap = at_least("size_cap", cfg.size_cap.unwrap_or(1_000_000), 1)?;
    let fallback = HFallback::Green(ctx.green_table(&theta)?);
    let table = HTable::build(&mu, &theta, radius, size_cap, fallback, &ctx.rep.derive(trees, 0x47));
    let rec = estimate_c_formula(&mu, &theta, &table, j_max, &ctx.rep)?;
    Ok(vec![ctx.row(theta.dim, Some(j_max), None, rec)])
}

fn head_return(ctx: &Ctx) -> Result<Vec<ResultRow>, HarnessError> {
    let theta = ctx.cfg.jump(ctx.kind)?;
    let ks = ctx.cfg.ks.clone().unwrap_or_else(|| match ctx.cfg.n {
        Some(n) => vec![n],
        None => vec![100, 1000],
    });
    if ks.is_empty() || ks.iter().any(|&k| k == 0 || k > 1_000_000) {
        return Err(invalid(format!("ks must be non-empty values in 1..=10^6, got {ks:?}")));
    }
    let t = Instant::now();
    let probs = head_return_table(&theta, &ks)?;
    let elapsed = t.elapsed().as_millis() as u64;
    let period = theta.period.unwrap_or(1) as f64;
    let limit = 1.0 / (4.0 * std::f64::consts::PI.powi(2) * theta.sigma2 * theta.sigma2);
    Ok(ks
        .iter()
        .zip(probs)
        .map(|(&k, pr)| {
            let mut rec = EstimateRecord::exact(pr, json!({"k": k}))
                .with_extra("k_times_p", k as f64 * pr)
                .with_extra("k_times_p_over_period", k as f64 * pr / period)
                .with_extra("period", period)
                .with_extra("limit", limit);
            rec.seed = ctx.rep.seed;
            rec.elapsed_ms = elapsed;
            ctx.row(theta.dim, Some(k), None, rec)
        })
        .collect())
}

fn green_point(ctx: &Ctx) -> Result<Vec<ResultRow>, HarnessError> {
    let theta = ctx.transient_jump()?;
    let x = match &ctx.cfg.x {
        Some(x) if x.len() == theta.dim => Point::from_slice(x),
        Some(x) => return Err(invalid(format!("x = {x:?} does not have {} coordinates", theta.dim))),
        None => Point::ORIGIN,
    };
    let eps = ctx.cfg.eps.unwrap_or(1e-6);
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid(format!("eps = {eps} outside (0, 1)")));
    }
    if let Some(path) = &ctx.cfg.dump {
        let table = ctx.green_table(&theta)?;
        table.write_csv(BufWriter::new(File::create(path)?))?;
    }
    let g = green(&theta, &x, eps)?;
    let norm2 = x.norm2_sq();
    let mut rec = EstimateRecord::exact(g.value, json!({"x": x.coords(theta.dim), "eps": eps}))
        .with_extra("error", g.error)
        .with_extra("method", serde_json::to_value(g.method).unwrap_or_default())
        .with_extra("asymptotic", theta.green_asymptotic(&x));
    if norm2 > 0.0 {
        rec = rec.with_extra("norm2_sq_times_g", norm2 * g.value);
    }
    if let Some(s) = g.steps {
        rec = rec.with_extra("steps", s);
    }
    rec.seed = ctx.rep.seed;
    Ok(vec![ctx.row(theta.dim, None, None, rec)])
}

fn suffcond(ctx: &Ctx) -> Result<Vec<ResultRow>, HarnessError> {
    let mu = ctx.cfg.offspring()?;
    let theta = ctx.transient_jump()?;
    let j_max = ctx.cfg.j_max.unwrap_or(100_000);
    let cps = ctx.cfg.checkpoints.clone().unwrap_or_else(|| vec![j_max / 10, j_max]);
    ascending("checkpoints", &cps, 2, 1)?;
    if let Some(a) = ctx.cfg.alpha {
        if !(a > 0.0 && a < 1.0) {
            return Err(invalid(format!("alpha = {a} outside (0, 1)")));
        }
    }
    let table = ctx.green_table(&theta)?;
    let t = Instant::now();
    let mut rec = suffcond_diagnostic(&mu, &theta, &table, &cps, ctx.cfg.alpha, &ctx.rep);
    rec.elapsed_ms = t.elapsed().as_millis() as u64;
    Ok(vec![ctx.row(theta.dim, Some(*cps.last().unwrap()), None, rec)])
}

#[cfg(feature = "bessel")]
fn bessel(ctx: &Ctx) -> Result<Vec<ResultRow>, HarnessError> {
    let (r, t, dt) = (ctx.cfg.r.unwrap_or(1.0), ctx.cfg.t.unwrap_or(100.0), ctx.cfg.dt.unwrap_or(1e-3));
    let rec = crate::analytics::bessel_log_integral(r, t, dt, &ctx.rep)?;
    Ok(vec![ctx.row(4, None, None, rec)])
}

#[cfg(not(feature = "bessel"))]
fn bessel(_: &Ctx) -> Result<Vec<ResultRow>, HarnessError> {
    Err(invalid("built without the bessel feature"))
}

fn brw(ctx: &Ctx) -> Result<Vec<ResultRow>, HarnessError> {
    let (mu, theta) = ctx.laws()?;
    let cfg = ctx.cfg;
    let initial = match &cfg.initial_positions {
        Some(pos) => {
            if pos.iter().any(|x| x.len() != theta.dim) {
                return Err(invalid(format!("initial positions must have {} coordinates", theta.dim)));
            }
            if cfg.p.is_some_and(|p| p != pos.len() as u64) {
                return Err(invalid(format!("p = {} but {} initial positions given", cfg.p.unwrap(), pos.len())));
            }
            PointMeasure::from_points(&pos.iter().map(|x| Point::from_slice(x)).collect::<Vec<_>>())
        }
        None => PointMeasure::at_origin(at_least("p", cfg.p.unwrap_or(10), 1)?),
    };
    if initial.is_empty() {
        return Err(invalid("no initial particles"));
    }
    let p = initial.total();
    let cap = at_least("progeny_cap", cfg.progeny_cap.unwrap_or(DEFAULT_PROGENY_CAP), p)?;
    let t = Instant::now();
    let summary = ratio_experiment_from(&initial, &mu, &theta, cap, &ctx.rep);
    let elapsed = t.elapsed().as_millis() as u64;
    if let Some(path) = &cfg.out {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(BufWriter::new(File::create(path)?));
        w.write_record(["replica", "p", "dim", "R", "N", "generations", "truncated"])?;
        for (i, r) in summary.runs.iter().enumerate() {
            w.write_record([
                i.to_string(),
                p.to_string(),
                theta.dim.to_string(),
                r.range.to_string(),
                r.progeny.to_string(),
                r.generations.to_string(),
                r.truncated.to_string(),
            ])?;
        }
        w.flush()?;
    }
    let ratios: Vec<f64> = summary.runs.iter().filter(|r| !r.truncated).map(|r| r.range as f64 / r.progeny as f64).collect();
    let (mean, se) = mean_stderr(&ratios);
    let sigma2_mu = mu.variance;
    let ks = progeny_ks(&summary.runs, p, sigma2_mu, cap);
    let mut rec = EstimateRecord::from_samples(&ratios, ctx.rep.seed, json!({"p": p, "mu": mu.name, "progeny_cap": cap}));
    rec.value = mean;
    rec.stderr = se;
    rec.reps = ctx.rep.reps;
    rec.elapsed_ms = elapsed;
    rec = rec
        .with_extra("ratio_median", summary.ratio_median)
        .with_extra("ratio_iqr", summary.ratio_iqr)
        .with_extra("truncated", summary.truncated)
        .with_extra("truncated_fraction", summary.truncated as f64 / ctx.rep.reps as f64)
        .with_extra("ks_statistic", ks.statistic)
        .with_extra("ks_p_value", ks.p_value)
        .with_extra("sigma2_mu", sigma2_mu);
    if theta.dim == 4 {
        rec = rec.with_extra("log_scaled_ratio", summary.log_scaled_ratio).with_extra("d4_limit", summary.d4_limit);
    }
    Ok(vec![ctx.row(theta.dim, None, Some(p), rec)])
}
