//! Paths of every supported driver on one grid, with their sup norms, and a
//! check that a Wiener path on a coarse grid is the fine path read at the
//! shared times.
//!
//! ```text
//! cargo run --example noise_paths
//! ```

use smavg::catalog;
use smavg::noise::{generate_composite, generate_fbm, generate_subfbm, generate_wiener};
use smavg::{NoiseGrid, NoisePath};

fn main() -> smavg::Result<()> {
    let grid = NoiseGrid::new(1.0, 1 << 10)?;
    let seed = 7;
    let paths = [
        generate_wiener(&grid, seed)?,
        generate_fbm(&grid, 0.75, seed)?,
        generate_subfbm(&grid, 0.75, seed)?,
        generate_composite(&grid, &catalog::kernel("t_sin_x", 0.0, 1.0)?, seed, 256)?,
        NoisePath::deterministic(&grid, seed),
    ];
    for p in &paths {
        println!(
            "{:<40} mu_T = {:>9.5}  sup|mu| = {:.5}",
            p.driver.to_string(),
            p.values[grid.n_steps()],
            p.max_abs()
        );
    }

    let coarse = generate_wiener(&NoiseGrid::new(1.0, 1 << 6)?, seed)?;
    let nested = paths[0].resample_to(1 << 6)?;
    println!(
        "coarse Wiener path equals the restricted fine one: {}",
        coarse.values == nested.values
    );

    let mut csv = Vec::new();
    paths[1].write_csv(&mut csv).expect("write to memory");
    let text = String::from_utf8(csv).expect("utf8");
    println!("fBm CSV head:");
    for line in text.lines().take(6) {
        println!("  {line}");
    }
    Ok(())
}
