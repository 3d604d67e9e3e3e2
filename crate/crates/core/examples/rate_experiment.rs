//! Monte Carlo rate experiment from a config file.
//!
//! ```text
//! cargo run --release --example rate_experiment -- fixtures/wiener.toml [replicates]
//! ```

use std::time::Instant;

use smavg::config::Config;
use smavg::experiment::{boundedness_diagnostic, run_averaging_experiment};

fn main() -> smavg::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| "fixtures/wiener.toml".into());
    let mut cfg = Config::load(path.as_ref())?.experiment()?;
    if let Some(r) = args.next() {
        cfg.replicates = r.parse().expect("replicates must be an integer");
    }

    let start = Instant::now();
    let fit = run_averaging_experiment(&cfg)?;
    println!(
        "driver {:?}  replicates {}  n {}",
        cfg.driver, cfg.replicates, cfg.finest_n
    );
    println!(
        "{:>10} {:>12} {:>12} {:>12} {:>12}",
        "eps", "mean", "q50", "q90", "q99/eps^h"
    );
    for s in &fit.per_epsilon {
        println!(
            "{:>10.6} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4}",
            s.epsilon,
            s.mean_error,
            s.error_quantiles[0],
            s.error_quantiles[1],
            s.normalized_quantiles[2]
        );
    }
    println!("slope {:.4} +- {:.4}", fit.slope, fit.slope_stderr);
    let b = boundedness_diagnostic(&fit)?;
    println!(
        "boundedness at eps^{:.4}: {} (tail/median q99 = {:.3})",
        b.hypothesis, b.verdict, b.tail_over_median
    );
    println!(
        "failures {}  elapsed {:.1?}",
        fit.failures.len(),
        start.elapsed()
    );
    Ok(())
}
