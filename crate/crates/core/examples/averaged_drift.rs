//! Averaged drift by quadrature against the closed form, the function
//! `G(y, r) = int_0^r (b(y, s) - b_bar(y)) ds`, and the boundedness scan that
//! separates periodic drifts from one whose `G` grows like `ln(1 + r)`.
//!
//! ```text
//! cargo run --example averaged_drift
//! ```

use smavg::catalog;

fn main() -> smavg::Result<()> {
    let mixed = catalog::drift("sin_x_mixed")?;
    let numeric = catalog::drift("sin_x_mixed")?.without_mean();
    for y in [-1.0, 0.3, 2.0] {
        println!(
            "b_bar({y:>4}) closed form {:>9.6}  quadrature {:>9.6}  G({y}, 10) = {:>8.5}",
            mixed.averaged_drift(y)?,
            numeric.averaged_drift(y)?,
            mixed.g_function(y, 10.0)?
        );
    }

    let probes = [-1.5, -0.5, 0.5, 1.5];
    for name in ["sin_x_cos_s", "sin_x_mixed", "decaying_sin_x"] {
        let report = catalog::drift(name)?.check_a4(&probes, 1e3, 0.01)?;
        println!(
            "{name:<16} {}  sup|G| = {:.4}  growth over last decade = {:.4}",
            report.verdict, report.sup, report.growth
        );
    }
    Ok(())
}
