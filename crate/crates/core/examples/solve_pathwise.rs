//! Solves the fast-drift equation for a shrinking `eps` and the averaged
//! equation on one Wiener path, and reports their sup distance and the
//! integral-equation residual of each trajectory.
//!
//! ```text
//! cargo run --example solve_pathwise
//! ```

use smavg::noise::generate_wiener;
use smavg::solver::{solve_averaged, solve_scaled, sup_distance};
use smavg::symint::residual;
use smavg::{catalog, FlowMap, ModelSpec, NoiseGrid};

fn main() -> smavg::Result<()> {
    let model = ModelSpec::new(
        catalog::diffusion("sin+2")?,
        catalog::drift("sin_x_mixed")?,
        0.5,
    );
    let fm = FlowMap::new(model.diffusion.clone());
    let path = generate_wiener(&NoiseGrid::new(1.0, 1 << 12)?, 2024)?;

    let averaged = solve_averaged(&model, &fm, &path, 1)?;
    println!(
        "averaged: X_T = {:.6}  residual {:.2e}",
        averaged.x[averaged.x.len() - 1],
        residual(&model, &averaged, &path)?
    );
    for k in 2..=8 {
        let eps = 0.5f64.powi(k);
        let scaled = solve_scaled(&model, &fm, &path, eps, 1)?;
        println!(
            "eps = {eps:<10} sup |X^eps - Xbar| = {:.4e}  residual {:.2e}",
            sup_distance(&scaled, &averaged)?,
            residual(&model, &scaled, &path)?
        );
    }
    Ok(())
}
