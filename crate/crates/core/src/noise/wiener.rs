use rand_distr::{Distribution, StandardNormal};

use super::{seeded_rng, Driver, NoiseGrid, NoisePath, WIENER_HOLDER};
use crate::error::Result;

/// Wiener path by dyadic Brownian-bridge refinement.
///
/// Draws are consumed endpoint first, then level by level left to right, so
/// the grid-`n` path is a prefix computation of the grid-`2n` path and the two
/// agree bit-for-bit at shared times.
pub fn generate_wiener(grid: &NoiseGrid, seed: u64) -> Result<NoisePath> {
    let values = bridge(grid.horizon(), grid.n_steps(), seed);
    Ok(NoisePath {
        grid: grid.clone(),
        values,
        driver: Driver::Wiener,
        seed,
        holder_gamma: Some(WIENER_HOLDER),
    })
}

/// Brownian motion on `[0, length]` sampled at `n + 1` equispaced points.
pub(crate) fn bridge(length: f64, n: usize, seed: u64) -> Vec<f64> {
    debug_assert!(n.is_power_of_two());
    let mut rng = seeded_rng(seed);
    let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };

    let mut w = vec![0.0; n + 1];
    w[n] = length.sqrt() * normal();

    let mut stride = n;
    let mut cells = 1usize;
    while stride > 1 {
        let half = stride / 2;
        // Midpoint of an interval of length 2h has conditional variance h/2.
        let h = length / (2 * cells) as f64;
        let sd = (0.5 * h).sqrt();
        for c in 0..cells {
            let left = c * stride;
            let mid = left + half;
            w[mid] = 0.5 * (w[left] + w[left + stride]) + sd * normal();
        }
        stride = half;
        cells *= 2;
    }
    w
}
