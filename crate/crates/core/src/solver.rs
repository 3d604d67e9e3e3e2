//! Pathwise solutions of the scaled and averaged equations.
//!
//! With `X = F(mu, Y)`, the process `Y` solves
//!
//! ```text
//! dY/ds = dH/dx(mu_s, X_s) * b(X_s, s / eps),    Y_0 = H(0, x0)
//! ```
//!
//! which is an ordinary ODE once `mu` is fixed. Since `H(r, F(r, y)) = y`,
//! the factor `dH/dx(mu, F(mu, Y))` equals `1 / dF/dx(mu, Y)` and needs no
//! Newton inversion.

use std::io::{self, Write};

use crate::averaging::DriftSpec;
use crate::error::{Error, Result};
use crate::flow::{DiffusionSpec, FlowMap};
use crate::noise::{Driver, NoiseGrid, NoisePath, PathRef};
use crate::ode::rk4_step;

/// Largest integration step, as a fraction of `eps`, for the fast drift.
pub const FAST_STEP_FRACTION: f64 = 1.0 / 8.0;

#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub diffusion: DiffusionSpec,
    pub drift: DriftSpec,
    pub x0: f64,
}

impl ModelSpec {
    pub fn new(diffusion: DiffusionSpec, drift: DriftSpec, x0: f64) -> Self {
        Self {
            diffusion,
            drift,
            x0,
        }
    }
}

/// Which equation a trajectory solves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regime {
    /// Drift `b(x, t / eps)`.
    Scaled(f64),
    /// Drift `b_bar(x)`.
    Averaged,
    /// Euler-Maruyama on the equivalent Itô equation with drift `b(x, t / eps)`.
    ItoReference(f64),
}

impl Regime {
    pub fn label(&self) -> String {
        match self {
            Regime::Scaled(eps) => format!("eps={eps}"),
            Regime::Averaged => "averaged".into(),
            Regime::ItoReference(eps) => format!("ito,eps={eps}"),
        }
    }
}

/// Grid values of `Y` and `X = F(mu, Y)` for one path.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub grid: NoiseGrid,
    pub mu: Vec<f64>,
    /// Empty for [`Regime::ItoReference`], which has no `Y` process.
    pub y: Vec<f64>,
    pub x: Vec<f64>,
    pub regime: Regime,
    pub path_ref: PathRef,
}

impl Trajectory {
    /// Writes `t,mu,y,x` CSV.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,mu,y,x")?;
        for (k, t) in self.grid.times().iter().enumerate() {
            match self.y.get(k) {
                Some(y) => writeln!(w, "{t},{},{y},{}", self.mu[k], self.x[k])?,
                None => writeln!(w, "{t},{},,{}", self.mu[k], self.x[k])?,
            }
        }
        Ok(())
    }
}

/// Solves the equation with fast drift `b(x, t / eps)`.
///
/// Each grid cell is split into `max(substeps, ceil(dt / (eps / 8)))` RK4
/// steps, with `mu` linear inside the cell.
pub fn solve_scaled(
    model: &ModelSpec,
    fm: &FlowMap,
    path: &NoisePath,
    epsilon: f64,
    substeps: usize,
) -> Result<Trajectory> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::Config(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let fast_cap = (path.grid.dt() / (FAST_STEP_FRACTION * epsilon)).ceil() as usize;
    let drift = &model.drift;
    solve_with(
        model,
        fm,
        path,
        Regime::Scaled(epsilon),
        substeps.max(fast_cap),
        |x, s| drift.eval(x, s / epsilon),
    )
}

/// Solves the averaged equation with drift `b_bar(x)`.
pub fn solve_averaged(
    model: &ModelSpec,
    fm: &FlowMap,
    path: &NoisePath,
    substeps: usize,
) -> Result<Trajectory> {
    let drift = &model.drift;
    if !drift.has_average() {
        return Err(Error::UnsupportedDrift);
    }
    solve_with(model, fm, path, Regime::Averaged, substeps, |x, _| {
        let v = drift.averaged_drift(x)?;
        if v.abs() > drift.sup_bound * (1.0 + 1e-12) {
            return Err(Error::Validation(format!(
                "{}: averaged drift {v} at x = {x} exceeds bound {}",
                drift.name, drift.sup_bound
            )));
        }
        Ok(v)
    })
}

fn solve_with(
    model: &ModelSpec,
    fm: &FlowMap,
    path: &NoisePath,
    regime: Regime,
    steps_per_cell: usize,
    drift: impl Fn(f64, f64) -> Result<f64>,
) -> Result<Trajectory> {
    if steps_per_cell == 0 {
        return Err(Error::Config("substeps must be at least 1".into()));
    }
    let grid = &path.grid;
    let times = grid.times();
    let mu = &path.values;
    let dt = grid.dt();
    let h = dt / steps_per_cell as f64;

    let y0 = fm.inverse(0.0, model.x0)?;
    let mut y = Vec::with_capacity(mu.len());
    y.push(y0);
    let mut state = [y0];
    for k in 0..grid.n_steps() {
        let (t0, mu0) = (times[k], mu[k]);
        let slope = (mu[k + 1] - mu0) / dt;
        let rhs = |tau: f64, s: [f64; 1]| -> Result<[f64; 1]> {
            let (x, fx) = fm.forward_with_dx(mu0 + slope * tau, s[0])?;
            Ok([drift(x, t0 + tau)? / fx])
        };
        for j in 0..steps_per_cell {
            state = rk4_step(j as f64 * h, state, h, &rhs).map_err(|e| Error::At {
                t: t0 + j as f64 * h,
                source: Box::new(e),
            })?;
        }
        if !state[0].is_finite() {
            return Err(Error::Numerical(format!(
                "Y became non-finite at t = {}",
                times[k + 1]
            )));
        }
        y.push(state[0]);
    }

    let x = mu
        .iter()
        .zip(&y)
        .zip(times)
        .map(|((&m, &yk), &t)| {
            fm.forward(m, yk).map_err(|e| Error::At {
                t,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let traj = Trajectory {
        grid: grid.clone(),
        mu: mu.clone(),
        y,
        x,
        regime,
        path_ref: path.path_ref(),
    };
    check_a_priori_bounds(model, &traj)?;
    Ok(traj)
}

/// `exp(deriv_bound * max|mu|) * sup|b|`: bounds `|dY/dt|` uniformly in `eps`.
pub fn y_speed_bound(model: &ModelSpec, mu: &[f64]) -> f64 {
    let mu_max = mu.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    (model.diffusion.deriv_bound * mu_max).exp() * model.drift.sup_bound
}

fn check_a_priori_bounds(model: &ModelSpec, traj: &Trajectory) -> Result<()> {
    let c = y_speed_bound(model, &traj.mu);
    let dt = traj.grid.dt();
    let slack = |v: f64| v * (1.0 + 1e-9) + 1e-12;
    for (k, w) in traj.y.windows(2).enumerate() {
        if (w[1] - w[0]).abs() > slack(c * dt) {
            return Err(Error::Numerical(format!(
                "Y moved {} over cell {k}, above the Lipschitz bound {}",
                (w[1] - w[0]).abs(),
                c * dt
            )));
        }
    }
    let cap = traj.y[0].abs() + traj.grid.horizon() * c;
    if let Some(v) = traj.y.iter().find(|v| v.abs() > slack(cap)) {
        return Err(Error::Numerical(format!(
            "|Y| = {} exceeds a-priori bound {cap}",
            v.abs()
        )));
    }
    Ok(())
}

/// `max_k |a.x[k] - b.x[k]|` for trajectories on the same grid and the same
/// noise realization.
pub fn sup_distance(a: &Trajectory, b: &Trajectory) -> Result<f64> {
    if a.grid != b.grid {
        return Err(Error::Comparison(format!(
            "grids differ ({} vs {} steps)",
            a.grid.n_steps(),
            b.grid.n_steps()
        )));
    }
    if a.path_ref != b.path_ref {
        return Err(Error::Comparison(format!(
            "different noise realizations ({} seed {} vs {} seed {})",
            a.path_ref.driver, a.path_ref.seed, b.path_ref.driver, b.path_ref.seed
        )));
    }
    Ok(a.x
        .iter()
        .zip(&b.x)
        .fold(0.0f64, |m, (p, q)| m.max((p - q).abs())))
}

/// Euler-Maruyama for `dX = sigma(X) dW + (b(X, t/eps) + sigma sigma'(X) / 2) dt`
/// on the path's own increments. Only meaningful for Wiener drivers.
pub fn ito_reference_solve(
    model: &ModelSpec,
    path: &NoisePath,
    epsilon: f64,
) -> Result<Trajectory> {
    if path.driver != Driver::Wiener {
        return Err(Error::Unsupported(format!(
            "Itô reference needs a Wiener driver, got {}",
            path.driver
        )));
    }
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::Config(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let sigma = &model.diffusion;
    let dt = path.grid.dt();
    let times = path.grid.times();
    let mut x = Vec::with_capacity(path.values.len());
    let mut xk = model.x0;
    x.push(xk);
    for (k, w) in path.values.windows(2).enumerate() {
        let s = sigma.sigma(xk);
        let drift = model.drift.eval(xk, times[k] / epsilon)? + 0.5 * s * sigma.sigma_prime(xk);
        xk += s * (w[1] - w[0]) + drift * dt;
        if !xk.is_finite() {
            return Err(Error::Numerical(format!(
                "Euler-Maruyama diverged at t = {}",
                times[k + 1]
            )));
        }
        x.push(xk);
    }
    Ok(Trajectory {
        grid: path.grid.clone(),
        mu: path.values.clone(),
        y: Vec::new(),
        x,
        regime: Regime::ItoReference(epsilon),
        path_ref: path.path_ref(),
    })
}
