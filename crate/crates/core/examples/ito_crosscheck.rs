//! For a Wiener driver the symmetric-integral equation is the Itô equation
//! with drift `b + sigma sigma' / 2`. This compares the pathwise solution
//! with Euler-Maruyama on nested grids.
//!
//! ```text
//! cargo run --release --example ito_crosscheck -- [replicates]
//! ```

use smavg::experiment::{ito_crosscheck_experiment, ExperimentConfig};
use smavg::{catalog, DriverSpec, ModelSpec};

fn main() -> smavg::Result<()> {
    let replicates = std::env::args()
        .nth(1)
        .map_or(20, |r| r.parse().expect("replicates"));
    let cfg = ExperimentConfig {
        model: ModelSpec::new(
            catalog::diffusion("sin+2")?,
            catalog::drift("sin_x_mixed")?,
            0.5,
        ),
        driver: DriverSpec::Wiener,
        horizon: 1.0,
        finest_n: 1 << 12,
        epsilons: vec![0.25],
        replicates,
        base_seed: 99,
        rate_exponent_hypothesis: 1.0 / 3.0,
        substeps: 1,
        jobs: None,
    };
    let report = ito_crosscheck_experiment(&cfg, 0.25)?;
    for (n, d) in &report.mean_difference {
        println!("n = {n:>5}  mean sup |X_pathwise - X_euler| = {d:.4e}");
    }
    println!("decreasing at every doubling: {}", report.verdict);
    Ok(())
}
