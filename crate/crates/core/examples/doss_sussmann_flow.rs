//! The flow `F(r, x)` of `dF/dr = sigma(F)`, its inverse `H` and their
//! `x`-derivatives, checked against the closed form for `sigma(x) = x` and
//! against each other for `sigma(x) = sin x + 2`.
//!
//! ```text
//! cargo run --example doss_sussmann_flow
//! ```

use smavg::{DiffusionSpec, FlowMap};

fn main() -> smavg::Result<()> {
    let linear = FlowMap::new(DiffusionSpec::linear());
    println!("sigma(x) = x, where F(r, x) = x e^r:");
    for (r, x) in [(-2.0, 1.5), (0.5, -0.3), (2.0, 2.0)] {
        let (f, d) = linear.forward_with_dx(r, x)?;
        println!(
            "  F({r:>4}, {x:>4}) = {f:>10.6}  exact {:>10.6}   dF/dx = {d:.6}",
            x * f64::exp(r)
        );
    }

    let fm = FlowMap::new(DiffusionSpec::sine_plus(2.0));
    println!("sigma(x) = sin x + 2:");
    for (r, x) in [(-1.5, 0.2), (0.7, -1.0), (1.9, 1.3)] {
        let z = fm.forward(r, x)?;
        let back = fm.inverse(r, z)?;
        let product = fm.dx(r, x)? * fm.inverse_dx(r, z)?;
        println!(
            "  F = {z:>9.6}  H(r, F) - x = {:>9.2e}  dF/dx * dH/dx = {product:.12}",
            back - x
        );
    }

    let (r, s, x) = (0.4, -1.1, 0.8);
    let two_steps = fm.forward(s, fm.forward(r, x)?)?;
    println!(
        "group property F(r + s, x) - F(s, F(r, x)) = {:.2e}",
        fm.forward(r + s, x)? - two_steps
    );
    Ok(())
}
