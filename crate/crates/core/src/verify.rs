//! Invariant suites for the flow and the symmetric integral, run by
//! `smavg verify`.

use crate::error::Result;
use crate::flow::{DiffusionSpec, FlowMap};
use crate::noise::{generate_fbm, generate_wiener, NoiseGrid};
use crate::symint::{change_of_variables_residual, symmetric_integral};

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self {
            name,
            passed,
            detail,
        }
    }
}

fn lattice(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        ((a - b) / b).abs()
    }
}

pub fn flow_closed_forms() -> Result<Check> {
    let fm = FlowMap::new(DiffusionSpec::linear());
    let mut worst = 0.0f64;
    for &r in &lattice(21, -2.0, 2.0) {
        for &x in &lattice(21, -2.0, 2.0) {
            let (f, d) = fm.forward_with_dx(r, x)?;
            worst = worst
                .max(rel(f, x * r.exp()))
                .max(rel(d, r.exp()))
                .max(rel(fm.inverse(r, x)?, x * (-r).exp()))
                .max(rel(fm.inverse_dx(r, x)?, (-r).exp()));
        }
    }
    Ok(Check::new(
        "flow closed forms (sigma = x)",
        worst < 1e-8,
        format!("max rel err {worst:e}"),
    ))
}

pub fn flow_round_trip() -> Result<Check> {
    let fm = FlowMap::new(DiffusionSpec::sine_plus(2.0));
    let mut worst = 0.0f64;
    for &r in &lattice(21, -2.0, 2.0) {
        for &x in &lattice(21, -2.0, 2.0) {
            let z = fm.forward(r, x)?;
            worst = worst.max((fm.inverse(r, z)? - x).abs());
        }
    }
    Ok(Check::new(
        "flow round trip H(r, F(r, x)) = x",
        worst <= fm.newton_tol,
        format!("max err {worst:e}"),
    ))
}

pub fn flow_group_property() -> Result<Check> {
    let fm = FlowMap::new(DiffusionSpec::sine_plus(2.0));
    let mut worst = 0.0f64;
    for &r in &lattice(9, -1.0, 1.0) {
        for &s in &lattice(9, -1.0, 1.0) {
            for x in [-1.5, 0.2, 1.1] {
                let lhs = fm.forward(r + s, x)?;
                let rhs = fm.forward(s, fm.forward(r, x)?)?;
                worst = worst.max((lhs - rhs).abs());
            }
        }
    }
    Ok(Check::new(
        "flow group property",
        worst < 2e-8,
        format!("max err {worst:e}"),
    ))
}

pub fn flow_derivative_envelope() -> Result<Check> {
    let spec = DiffusionSpec::sine_plus(2.0);
    let bound = spec.deriv_bound;
    let fm = FlowMap::new(spec);
    let mut ok = true;
    for &r in &lattice(21, -2.0, 2.0) {
        for &x in &lattice(21, -2.0, 2.0) {
            let d = fm.dx(r, x)?;
            let env = (bound * r.abs()).exp() * (1.0 + 1e-12);
            ok &= d > 0.0 && d <= env && d >= 1.0 / env;
        }
    }
    Ok(Check::new(
        "flow derivative within exp(+-L|r|)",
        ok,
        String::new(),
    ))
}

pub fn flow_finite_differences() -> Result<Check> {
    let fm = FlowMap::new(DiffusionSpec::sine_plus(2.0));
    let h = 1e-5;
    let mut worst = 0.0f64;
    for &r in &lattice(10, -1.8, 1.9) {
        for &x in &lattice(10, -1.7, 2.0) {
            let fd = (fm.forward(r, x + h)? - fm.forward(r, x - h)?) / (2.0 * h);
            worst = worst.max(rel(fm.dx(r, x)?, fd));
            let fd = (fm.inverse(r, x + h)? - fm.inverse(r, x - h)?) / (2.0 * h);
            worst = worst.max(rel(fm.inverse_dx(r, x)?, fd));
        }
    }
    Ok(Check::new(
        "flow derivatives vs central differences",
        worst < 1e-5,
        format!("max rel err {worst:e}"),
    ))
}

pub fn symint_chain_identity() -> Result<Check> {
    let mut worst = 0.0f64;
    for seed in 0..20 {
        let fine = generate_wiener(&NoiseGrid::new(1.0, 1 << 12)?, seed)?;
        for level in 4..=12 {
            let mu = fine.resample_to(1 << level)?.values;
            let v = symmetric_integral(&mu, &mu)?;
            let exact = 0.5 * (mu[mu.len() - 1].powi(2) - mu[0].powi(2));
            worst = worst.max((v - exact).abs() / exact.abs().max(1.0));
        }
    }
    Ok(Check::new(
        "symmetric integral of mu o d mu",
        worst < 1e-12,
        format!("max err {worst:e}"),
    ))
}

pub fn symint_linearity() -> Result<Check> {
    let eta = generate_wiener(&NoiseGrid::new(1.0, 1 << 10)?, 5)?.values;
    let xi1: Vec<f64> = eta.iter().map(|v| v.sin()).collect();
    let xi2: Vec<f64> = eta.iter().map(|v| v * v).collect();
    let (a, b) = (1.75, -0.5);
    let comb: Vec<f64> = xi1.iter().zip(&xi2).map(|(p, q)| a * p + b * q).collect();
    let lhs = symmetric_integral(&comb, &eta)?;
    let rhs = a * symmetric_integral(&xi1, &eta)? + b * symmetric_integral(&xi2, &eta)?;
    let err = (lhs - rhs).abs();
    Ok(Check::new(
        "symmetric integral linearity",
        err < 1e-12,
        format!("err {err:e}"),
    ))
}

pub fn symint_change_of_variables() -> Result<Check> {
    let fine = generate_fbm(&NoiseGrid::new(1.0, 1 << 12)?, 0.75, 17)?;
    let res = (4..=12)
        .map(|l| {
            let p = fine.resample_to(1 << l)?;
            change_of_variables_residual(f64::cos, f64::sin, &p.values)
        })
        .collect::<Result<Vec<f64>>>()?;
    let ok = res.windows(2).all(|w| w[1] < w[0]);
    Ok(Check::new(
        "change of variables for cos under refinement",
        ok,
        format!("residuals {res:.3?}"),
    ))
}

/// Every suite, in a fixed order.
pub fn run_all() -> Result<Vec<Check>> {
    Ok(vec![
        flow_closed_forms()?,
        flow_round_trip()?,
        flow_group_property()?,
        flow_derivative_envelope()?,
        flow_finite_differences()?,
        symint_chain_identity()?,
        symint_linearity()?,
        symint_change_of_variables()?,
    ])
}
