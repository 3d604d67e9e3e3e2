//! Monte Carlo harness for the averaging principle: sup-error decay with
//! `eps`, log-log rate fits, a tightness surrogate for normalized errors, and
//! the Itô cross-check for Wiener drivers.
//!
//! Every replicate draws ONE path on the finest grid and solves the averaged
//! system and all scaled systems on it, so errors at different `eps` refer to
//! the same `omega`.

use rayon::prelude::*;
use serde::Serialize;

use crate::averaging::Verdict;
use crate::error::{Error, Result};
use crate::flow::FlowMap;
use crate::noise::{DriverSpec, NoiseGrid, NoisePath};
use crate::solver::{
    ito_reference_solve, solve_averaged, solve_scaled, sup_distance, ModelSpec, Regime,
    FAST_STEP_FRACTION,
};
use crate::stats::{fit_rate, median, quantile};
use crate::symint::residual;

/// Largest tolerated fraction of failed replicates.
pub const MAX_FAILURE_FRACTION: f64 = 0.01;
/// Allowed rise of the normalized 0.99-quantile above its median.
pub const BOUNDEDNESS_GROWTH: f64 = 1.5;
/// Grids of the Itô cross-check, all nested in the finest one.
pub const ITO_LEVELS: [usize; 4] = [1 << 9, 1 << 10, 1 << 11, 1 << 12];

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub driver: DriverSpec,
    pub horizon: f64,
    pub finest_n: usize,
    /// Strictly decreasing, in `(0, 1]`.
    pub epsilons: Vec<f64>,
    pub replicates: usize,
    pub base_seed: u64,
    pub rate_exponent_hypothesis: f64,
    /// Minimum RK4 steps per grid cell.
    pub substeps: usize,
    /// Worker threads; `None` lets rayon decide.
    pub jobs: Option<usize>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epsilons.is_empty() {
            return Err(Error::Config("no epsilons given".into()));
        }
        if self.epsilons.iter().any(|&e| !(e > 0.0 && e <= 1.0)) {
            return Err(Error::Config("epsilons must lie in (0, 1]".into()));
        }
        if self.epsilons.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config("epsilons must be strictly decreasing".into()));
        }
        if self.replicates == 0 {
            return Err(Error::Config("replicates must be at least 1".into()));
        }
        if self.substeps == 0 {
            return Err(Error::Config("substeps must be at least 1".into()));
        }
        let grid = self.grid()?;
        let min_eps = *self.epsilons.last().expect("non-empty");
        if grid.dt() > FAST_STEP_FRACTION * min_eps * (1.0 + 1e-12) {
            return Err(Error::Config(format!(
                "finest grid step {} does not resolve eps = {min_eps} (need <= eps/8)",
                grid.dt()
            )));
        }
        if !self.model.drift.has_average() {
            return Err(Error::UnsupportedDrift);
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<NoiseGrid> {
        NoiseGrid::new(self.horizon, self.finest_n)
    }

    pub fn seed(&self, replicate: usize) -> u64 {
        self.base_seed.wrapping_add(replicate as u64)
    }

    pub fn path(&self, replicate: usize) -> Result<NoisePath> {
        self.driver.generate(&self.grid()?, self.seed(replicate))
    }

    fn run_parallel<T: Send>(&self, work: impl Fn(usize) -> T + Sync + Send) -> Result<Vec<T>> {
        let run = || (0..self.replicates).into_par_iter().map(&work).collect();
        match self.jobs {
            Some(n) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(n.max(1))
                    .build()
                    .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
                Ok(pool.install(run))
            }
            None => Ok(run()),
        }
    }
}

/// Per-`eps` summary of the sup errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsilonStats {
    pub epsilon: f64,
    pub mean_error: f64,
    /// Quantiles 0.5, 0.9, 0.99 of the sup error.
    pub error_quantiles: [f64; 3],
    /// Same quantiles of `error / eps^hypothesis`.
    pub normalized_quantiles: [f64; 3],
}

/// One row of `rates.csv`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorRecord {
    pub epsilon: f64,
    pub replicate: usize,
    pub sup_error: f64,
    pub normalized_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateFailure {
    pub replicate: usize,
    pub seed: u64,
    pub message: String,
}

/// Outcome of a rate experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    pub hypothesis: f64,
    pub per_epsilon: Vec<EpsilonStats>,
    /// Slope of `log(mean error)` against `log(eps)`.
    pub slope: f64,
    pub slope_stderr: f64,
    #[serde(skip)]
    pub records: Vec<ErrorRecord>,
    pub failures: Vec<ReplicateFailure>,
}

impl RateFit {
    /// Builds the fit from `errors[replicate][eps_index]`.
    pub fn from_errors(hypothesis: f64, epsilons: &[f64], errors: &[Vec<f64>]) -> Result<Self> {
        if epsilons.len() < 3 {
            return Err(Error::Input(
                "a rate fit needs at least three epsilons".into(),
            ));
        }
        if errors.is_empty() {
            return Err(Error::Input("no successful replicates".into()));
        }
        let mut records = Vec::with_capacity(errors.len() * epsilons.len());
        for (i, &eps) in epsilons.iter().enumerate() {
            for (r, row) in errors.iter().enumerate() {
                records.push(ErrorRecord {
                    epsilon: eps,
                    replicate: r,
                    sup_error: row[i],
                    normalized_error: row[i] / eps.powf(hypothesis),
                });
            }
        }
        Self::from_records(hypothesis, epsilons, records)
    }

    fn from_records(hypothesis: f64, epsilons: &[f64], records: Vec<ErrorRecord>) -> Result<Self> {
        let mut per_epsilon = Vec::with_capacity(epsilons.len());
        for &eps in epsilons {
            let mut errs: Vec<f64> = records
                .iter()
                .filter(|r| r.epsilon == eps)
                .map(|r| r.sup_error)
                .collect();
            errs.sort_by(f64::total_cmp);
            let norm = eps.powf(hypothesis);
            let q = |p| quantile(&errs, p);
            let error_quantiles = [q(0.5), q(0.9), q(0.99)];
            per_epsilon.push(EpsilonStats {
                epsilon: eps,
                mean_error: errs.iter().sum::<f64>() / errs.len() as f64,
                error_quantiles,
                normalized_quantiles: error_quantiles.map(|v| v / norm),
            });
        }
        let pairs: Vec<(f64, f64)> = per_epsilon
            .iter()
            .map(|s| (s.epsilon, s.mean_error))
            .collect();
        let fit = fit_rate(&pairs)?;
        Ok(Self {
            hypothesis,
            per_epsilon,
            slope: fit.slope,
            slope_stderr: fit.stderr,
            records,
            failures: Vec::new(),
        })
    }

    /// `epsilon,replicate,sup_error,normalized_error` CSV.
    pub fn rates_csv(&self) -> String {
        let mut out = String::from("epsilon,replicate,sup_error,normalized_error\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.epsilon, r.replicate, r.sup_error, r.normalized_error
            ));
        }
        out
    }
}

/// Sup errors `max_k |X^eps_k - Xbar_k|` of one replicate, one per `eps`.
pub fn replicate_errors(
    cfg: &ExperimentConfig,
    fm: &FlowMap,
    path: &NoisePath,
) -> Result<Vec<f64>> {
    let averaged = solve_averaged(&cfg.model, fm, path, cfg.substeps)?;
    cfg.epsilons
        .iter()
        .map(|&eps| {
            let scaled = solve_scaled(&cfg.model, fm, path, eps, cfg.substeps)?;
            sup_distance(&scaled, &averaged)
        })
        .collect()
}

fn check_failures(total: usize, failures: &[ReplicateFailure]) -> Result<()> {
    if failures.len() as f64 > MAX_FAILURE_FRACTION * total as f64 {
        let first = &failures[0];
        return Err(Error::Numerical(format!(
            "{} of {total} replicates failed; first (seed {}): {}",
            failures.len(),
            first.seed,
            first.message
        )));
    }
    Ok(())
}

/// Runs every replicate and aggregates the sup errors into a [`RateFit`].
///
/// Deterministic given `cfg`, whatever the thread count.
pub fn run_averaging_experiment(cfg: &ExperimentConfig) -> Result<RateFit> {
    cfg.validate()?;
    if cfg.epsilons.len() < 3 {
        return Err(Error::Config(
            "a rate experiment needs at least three epsilons".into(),
        ));
    }
    let fm = FlowMap::new(cfg.model.diffusion.clone());
    let outcomes =
        cfg.run_parallel(|r| cfg.path(r).and_then(|p| replicate_errors(cfg, &fm, &p)))?;

    let mut errors = Vec::with_capacity(cfg.replicates);
    let mut kept = Vec::with_capacity(cfg.replicates);
    let mut failures = Vec::new();
    for (r, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(row) => {
                errors.push(row);
                kept.push(r);
            }
            // Configuration problems are not replicate failures.
            Err(e) if e.is_validation() => return Err(e),
            Err(e) => failures.push(ReplicateFailure {
                replicate: r,
                seed: cfg.seed(r),
                message: e.to_string(),
            }),
        }
    }
    check_failures(cfg.replicates, &failures)?;

    let mut fit = RateFit::from_errors(cfg.rate_exponent_hypothesis, &cfg.epsilons, &errors)?;
    // Report the original replicate indices.
    for rec in &mut fit.records {
        rec.replicate = kept[rec.replicate];
    }
    fit.failures = failures;
    Ok(fit)
}

/// Tightness surrogate for `sup error / eps^hypothesis`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundednessReport {
    pub verdict: Verdict,
    pub hypothesis: f64,
    /// `(eps, 0.99-quantile of the normalized error)`, largest `eps` first.
    pub q99: Vec<(f64, f64)>,
    pub median_q99: f64,
    /// Largest 0.99-quantile over the smaller-`eps` half of the ladder,
    /// divided by the median of all of them.
    pub tail_over_median: f64,
}

/// PASS when, going down the ladder, the normalized 0.99-quantiles do not
/// climb above [`BOUNDEDNESS_GROWTH`] times their median: every quantile in
/// the smaller-`eps` half must stay below that level. Quantiles that shrink
/// as `eps` decreases are bounded and pass.
pub fn boundedness_diagnostic(fit: &RateFit) -> Result<BoundednessReport> {
    if fit.per_epsilon.len() < 4 {
        return Err(Error::Input(
            "boundedness diagnostic needs at least four epsilons".into(),
        ));
    }
    let mut q99: Vec<(f64, f64)> = fit
        .per_epsilon
        .iter()
        .map(|s| (s.epsilon, s.normalized_quantiles[2]))
        .collect();
    q99.sort_by(|a, b| b.0.total_cmp(&a.0));
    let values: Vec<f64> = q99.iter().map(|p| p.1).collect();
    let med = median(&values);
    let tail = values[values.len() / 2..]
        .iter()
        .fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let ratio = if med > 0.0 {
        tail / med
    } else if tail > 0.0 {
        f64::INFINITY
    } else {
        1.0
    };
    Ok(BoundednessReport {
        verdict: if ratio <= BOUNDEDNESS_GROWTH {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        hypothesis: fit.hypothesis,
        q99,
        median_q99: med,
        tail_over_median: ratio,
    })
}

/// Doss-Sussmann against Euler-Maruyama-with-correction over nested grids.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ItoCrosscheckReport {
    pub verdict: Verdict,
    pub epsilon: f64,
    /// `(n_steps, mean sup difference)`.
    pub mean_difference: Vec<(usize, f64)>,
    pub failures: Vec<ReplicateFailure>,
}

/// For each replicate, one Wiener path on the finest level of
/// [`ITO_LEVELS`], downsampled to every level; PASS when the mean sup
/// difference decreases at every doubling.
pub fn ito_crosscheck_experiment(
    cfg: &ExperimentConfig,
    epsilon: f64,
) -> Result<ItoCrosscheckReport> {
    if !matches!(cfg.driver, DriverSpec::Wiener) {
        return Err(Error::Unsupported(
            "the Itô cross-check needs a Wiener driver".into(),
        ));
    }
    let finest = *ITO_LEVELS.last().expect("levels");
    let grid = NoiseGrid::new(cfg.horizon, finest)?;
    let fm = FlowMap::new(cfg.model.diffusion.clone());
    let outcomes = cfg.run_parallel(|r| -> Result<Vec<f64>> {
        let fine = cfg.driver.generate(&grid, cfg.seed(r))?;
        ITO_LEVELS
            .iter()
            .map(|&n| {
                let p = fine.resample_to(n)?;
                let ds = solve_scaled(&cfg.model, &fm, &p, epsilon, cfg.substeps)?;
                let em = ito_reference_solve(&cfg.model, &p, epsilon)?;
                sup_distance(&ds, &em)
            })
            .collect()
    })?;

    let mut sums = [0.0; ITO_LEVELS.len()];
    let mut ok = 0usize;
    let mut failures = Vec::new();
    for (r, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(row) => {
                ok += 1;
                for (s, v) in sums.iter_mut().zip(row) {
                    *s += v;
                }
            }
            Err(e) if e.is_validation() => return Err(e),
            Err(e) => failures.push(ReplicateFailure {
                replicate: r,
                seed: cfg.seed(r),
                message: e.to_string(),
            }),
        }
    }
    check_failures(cfg.replicates, &failures)?;
    let mean_difference: Vec<(usize, f64)> = ITO_LEVELS
        .iter()
        .zip(sums)
        .map(|(&n, s)| (n, s / ok as f64))
        .collect();
    let decreasing = mean_difference.windows(2).all(|w| w[1].1 < w[0].1);
    Ok(ItoCrosscheckReport {
        verdict: if decreasing {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        epsilon,
        mean_difference,
        failures,
    })
}

/// Integral-equation residuals of one trajectory family under grid
/// refinement: the path `fine` is downsampled to each of `levels`.
pub fn residual_refinement(
    model: &ModelSpec,
    fm: &FlowMap,
    fine: &NoisePath,
    regime: Regime,
    levels: &[usize],
    substeps: usize,
) -> Result<Vec<f64>> {
    levels
        .iter()
        .map(|&n| {
            let p = fine.resample_to(n)?;
            let traj = match regime {
                Regime::Scaled(eps) => solve_scaled(model, fm, &p, eps, substeps)?,
                Regime::Averaged => solve_averaged(model, fm, &p, substeps)?,
                Regime::ItoReference(eps) => ito_reference_solve(model, &p, eps)?,
            };
            residual(model, &traj, &p)
        })
        .collect()
}
