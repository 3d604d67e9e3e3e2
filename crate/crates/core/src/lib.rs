//! Pathwise simulation of symmetric-integral SDEs driven by continuous
//! stochastic measures, and Monte Carlo checks of the averaging principle.
//!
//! The equation
//!
//! ```text
//! dX = sigma(X) o dmu + b(X, t / eps) dt,    X_0 = x0
//! ```
//!
//! is solved for each noise realization through the Doss-Sussmann
//! representation `X_t = F(mu_t, Y_t)`, where `F` is the flow of
//! `dF/dr = sigma(F)` and `Y` solves a random ODE with bounded right-hand
//! side. The averaged system replaces `b(x, s)` by its time mean `b_bar(x)`.
//!
//! Modules, bottom-up:
//!
//! - [`noise`]: seeded grid realizations of `mu_t` (Wiener via Brownian
//!   bridge, fractional and sub-fractional Brownian motion, deterministic,
//!   composite kernel measures).
//! - [`flow`]: the flow `F`, its inverse `H` and both x-derivatives.
//! - [`averaging`]: averaged drift, the `G` function and its boundedness scan.
//! - [`solver`]: scaled and averaged trajectories, sup distance, and an
//!   Euler-Maruyama reference for Wiener drivers.
//! - [`symint`]: midpoint Riemann sums and integral-equation residuals.
//! - [`experiment`]: rate experiments, regression and boundedness diagnostics.
//! - [`config`] and [`cli`]: file-driven runs behind the `smavg` binary.

pub mod averaging;
pub mod catalog;
pub mod cli;
pub mod config;
pub mod error;
pub mod experiment;
pub mod flow;
pub mod noise;
mod ode;
pub mod output;
pub mod solver;
pub mod stats;
pub mod symint;
pub mod verify;

pub use averaging::{A4Report, DriftSpec, Verdict};
pub use error::{Error, Result};
pub use experiment::{ExperimentConfig, RateFit};
pub use flow::{DiffusionSpec, FlowMap};
pub use noise::{Driver, DriverSpec, NoiseGrid, NoisePath};
pub use solver::{ModelSpec, Trajectory};
