//! Midpoint Riemann sums for the symmetric integral: the exact chain rule
//! for `int mu o d mu`, and the change-of-variables defect for `cos` shrinking
//! as the grid is refined, on Wiener and fBm paths.
//!
//! ```text
//! cargo run --example symmetric_integral
//! ```

use smavg::noise::{generate_fbm, generate_wiener};
use smavg::symint::{change_of_variables_residual, symmetric_integral};
use smavg::NoiseGrid;

fn main() -> smavg::Result<()> {
    let grid = NoiseGrid::new(1.0, 1 << 12)?;
    for fine in [generate_wiener(&grid, 3)?, generate_fbm(&grid, 0.75, 3)?] {
        println!("{}", fine.driver);
        let mu = &fine.values;
        let exact = 0.5 * (mu[mu.len() - 1].powi(2) - mu[0].powi(2));
        println!(
            "  int mu o dmu - (mu_T^2 - mu_0^2)/2 = {:.2e}",
            symmetric_integral(mu, mu)? - exact
        );
        for level in (4..=12).step_by(2) {
            let p = fine.resample_to(1 << level)?;
            let res = change_of_variables_residual(f64::cos, f64::sin, &p.values)?;
            println!("  n = {:>5}  cos residual {res:.3e}", 1 << level);
        }
    }
    Ok(())
}
