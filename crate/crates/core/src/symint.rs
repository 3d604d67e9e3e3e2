//! Midpoint (symmetric) Riemann sums
//! `sum_k (xi[k-1] + xi[k]) / 2 * (eta[k] - eta[k-1])`
//! and the integral-equation residual of solver output.

use crate::error::{Error, Result};
use crate::noise::NoisePath;
use crate::solver::{ModelSpec, Regime, Trajectory};

/// One symmetric sum over a partition with `n_points` nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionSum {
    pub n_points: usize,
    pub value: f64,
}

fn check_lengths(xi: &[f64], eta: &[f64]) -> Result<()> {
    if xi.len() != eta.len() {
        return Err(Error::Input(format!(
            "integrand has {} samples, integrator {}",
            xi.len(),
            eta.len()
        )));
    }
    if xi.len() < 2 {
        return Err(Error::Input("need at least two samples".into()));
    }
    Ok(())
}

pub fn symmetric_sum(xi: &[f64], eta: &[f64]) -> Result<PartitionSum> {
    let value = *symmetric_prefix_sums(xi, eta)?.last().expect("non-empty");
    Ok(PartitionSum {
        n_points: xi.len(),
        value,
    })
}

/// `int xi o d eta` over the whole grid.
pub fn symmetric_integral(xi: &[f64], eta: &[f64]) -> Result<f64> {
    symmetric_sum(xi, eta).map(|s| s.value)
}

/// Running symmetric sums; entry `k` integrates over the first `k` cells.
pub fn symmetric_prefix_sums(xi: &[f64], eta: &[f64]) -> Result<Vec<f64>> {
    check_lengths(xi, eta)?;
    let mut out = Vec::with_capacity(xi.len());
    let mut acc = 0.0;
    out.push(acc);
    for k in 1..xi.len() {
        acc += 0.5 * (xi[k - 1] + xi[k]) * (eta[k] - eta[k - 1]);
        out.push(acc);
    }
    Ok(out)
}

/// `max_k |sum_0^k f(mu) o d mu - (g(mu_k) - g(mu_0))|` where `g' = f`.
pub fn change_of_variables_residual(
    f: impl Fn(f64) -> f64,
    antiderivative: impl Fn(f64) -> f64,
    mu: &[f64],
) -> Result<f64> {
    let xi: Vec<f64> = mu.iter().map(|&m| f(m)).collect();
    let sums = symmetric_prefix_sums(&xi, mu)?;
    let g0 = antiderivative(mu[0]);
    Ok(sums.iter().zip(mu).fold(0.0f64, |r, (s, &m)| {
        r.max((s - (antiderivative(m) - g0)).abs())
    }))
}

/// Worst defect of the integral form of the equation over grid prefixes:
///
/// ```text
/// max_k | X_k - X_0 - sum_0^k sigma(X) o d mu - int_0^{t_k} b(X_s, s/eps) ds |
/// ```
///
/// with the `ds` term by the trapezoid rule on the same grid (`b_bar` for
/// averaged trajectories).
pub fn residual(model: &ModelSpec, traj: &Trajectory, path: &NoisePath) -> Result<f64> {
    if traj.path_ref != path.path_ref() || traj.grid != path.grid {
        return Err(Error::Comparison(
            "trajectory was not produced on this path".into(),
        ));
    }
    let sigma: Vec<f64> = traj.x.iter().map(|&x| model.diffusion.sigma(x)).collect();
    let stoch = symmetric_prefix_sums(&sigma, &path.values)?;

    let times = traj.grid.times();
    let drift = traj
        .x
        .iter()
        .zip(times)
        .map(|(&x, &t)| match traj.regime {
            Regime::Scaled(eps) | Regime::ItoReference(eps) => model.drift.eval(x, t / eps),
            Regime::Averaged => model.drift.averaged_drift(x),
        })
        .collect::<Result<Vec<f64>>>()?;

    let dt = traj.grid.dt();
    let x0 = traj.x[0];
    let mut ds = 0.0;
    let mut worst = (traj.x[0] - x0 - stoch[0]).abs();
    for k in 1..traj.x.len() {
        ds += 0.5 * (drift[k - 1] + drift[k]) * dt;
        worst = worst.max((traj.x[k] - x0 - stoch[k] - ds).abs());
    }
    Ok(worst)
}
