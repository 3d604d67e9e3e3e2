//! Grid realizations of the driving measure `mu_t = mu((0, t])`.
//!
//! Every generator is a pure function of its parameters and a 64-bit seed.

mod composite;
mod gaussian;
mod wiener;

use std::fmt;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use composite::{generate_composite, CompositeKernel};
pub use gaussian::{
    fbm_covariance, generate_fbm, generate_fbm_with, generate_subfbm, subfbm_covariance, FbmMethod,
    CHOLESKY_MAX_STEPS,
};
pub use wiener::generate_wiener;

/// Hölder exponent recorded for Wiener paths (any value below 1/2 is valid).
pub const WIENER_HOLDER: f64 = 0.49;

/// Uniform grid `t_k = k T / n` on `[0, T]` with `n` a power of two.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseGrid {
    horizon: f64,
    n_steps: usize,
    times: Vec<f64>,
}

impl NoiseGrid {
    pub fn new(horizon: f64, n_steps: usize) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::Config(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        if n_steps == 0 || !n_steps.is_power_of_two() {
            return Err(Error::Config(format!(
                "n_steps must be a positive power of two, got {n_steps}"
            )));
        }
        // k*T/n is bit-identical to 2k*T/2n, so nested grids share their times.
        let times = (0..=n_steps)
            .map(|k| k as f64 * horizon / n_steps as f64)
            .collect();
        Ok(Self {
            horizon,
            n_steps,
            times,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.n_steps as f64
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Coarser grid keeping every `factor`-th node.
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        if factor == 0 || !factor.is_power_of_two() || factor > self.n_steps {
            return Err(Error::Config(format!(
                "cannot coarsen a {}-step grid by {factor}",
                self.n_steps
            )));
        }
        Self::new(self.horizon, self.n_steps / factor)
    }
}

/// Which process generated a path, with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Driver {
    Wiener,
    Fbm { hurst: f64 },
    SubFbm { hurst: f64 },
    Deterministic,
    Composite { kernel: String, base_points: usize },
}

impl fmt::Display for Driver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Driver::Wiener => write!(f, "wiener"),
            Driver::Fbm { hurst } => write!(f, "fbm(H={hurst})"),
            Driver::SubFbm { hurst } => write!(f, "subfbm(H={hurst})"),
            Driver::Deterministic => write!(f, "deterministic"),
            Driver::Composite {
                kernel,
                base_points,
            } => {
                write!(f, "composite({kernel},m={base_points})")
            }
        }
    }
}

/// Identity of one noise realization `omega`: two trajectories may only be
/// compared when they share it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRef {
    pub driver: Driver,
    pub seed: u64,
}

/// One realization of `mu` on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisePath {
    pub grid: NoiseGrid,
    pub values: Vec<f64>,
    pub driver: Driver,
    pub seed: u64,
    /// A Hölder exponent the paths are known to have, if any.
    pub holder_gamma: Option<f64>,
}

impl NoisePath {
    pub fn deterministic(grid: &NoiseGrid, seed: u64) -> Self {
        Self {
            values: grid.times().to_vec(),
            grid: grid.clone(),
            driver: Driver::Deterministic,
            seed,
            holder_gamma: Some(1.0),
        }
    }

    pub fn path_ref(&self) -> PathRef {
        PathRef {
            driver: self.driver.clone(),
            seed: self.seed,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Same realization seen on a grid `factor` times coarser.
    pub fn downsample(&self, factor: usize) -> Result<Self> {
        let grid = self.grid.coarsen(factor)?;
        let values = self.values.iter().step_by(factor).copied().collect();
        Ok(Self {
            grid,
            values,
            driver: self.driver.clone(),
            seed: self.seed,
            holder_gamma: self.holder_gamma,
        })
    }

    /// Same realization downsampled to exactly `n_steps` cells.
    pub fn resample_to(&self, n_steps: usize) -> Result<Self> {
        if n_steps == 0 || !self.grid.n_steps().is_multiple_of(n_steps) {
            return Err(Error::Config(format!(
                "cannot resample {} steps to {n_steps}",
                self.grid.n_steps()
            )));
        }
        self.downsample(self.grid.n_steps() / n_steps)
    }

    /// Writes `t,mu` CSV preceded by `# key=value` metadata lines.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "# driver={}", self.driver)?;
        writeln!(w, "# seed={}", self.seed)?;
        writeln!(w, "# horizon={}", self.grid.horizon())?;
        writeln!(w, "# n_steps={}", self.grid.n_steps())?;
        match self.holder_gamma {
            Some(g) => writeln!(w, "# holder_gamma={g}")?,
            None => writeln!(w, "# holder_gamma=unknown")?,
        }
        writeln!(w, "t,mu")?;
        for (t, mu) in self.grid.times().iter().zip(&self.values) {
            writeln!(w, "{t},{mu}")?;
        }
        Ok(())
    }
}

/// Recipe for generating paths of one driver from a seed.
#[derive(Debug, Clone)]
pub enum DriverSpec {
    Wiener,
    Fbm {
        hurst: f64,
    },
    SubFbm {
        hurst: f64,
    },
    Deterministic,
    Composite {
        kernel: CompositeKernel,
        base_points: usize,
    },
}

impl DriverSpec {
    pub fn generate(&self, grid: &NoiseGrid, seed: u64) -> Result<NoisePath> {
        match self {
            DriverSpec::Wiener => generate_wiener(grid, seed),
            DriverSpec::Fbm { hurst } => generate_fbm(grid, *hurst, seed),
            DriverSpec::SubFbm { hurst } => generate_subfbm(grid, *hurst, seed),
            DriverSpec::Deterministic => Ok(NoisePath::deterministic(grid, seed)),
            DriverSpec::Composite {
                kernel,
                base_points,
            } => generate_composite(grid, kernel, seed, *base_points),
        }
    }

    /// True when paths on nested grids coincide at shared times, so coarse
    /// paths can be generated directly instead of downsampled.
    pub fn is_refinement_consistent(&self) -> bool {
        !matches!(self, DriverSpec::Fbm { .. } | DriverSpec::SubFbm { .. })
    }
}

pub(crate) fn seeded_rng(seed: u64) -> rand_chacha::ChaCha20Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha20Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rejects_bad_sizes() {
        assert!(NoiseGrid::new(1.0, 0).is_err());
        assert!(NoiseGrid::new(1.0, 12).is_err());
        assert!(NoiseGrid::new(0.0, 8).is_err());
        assert!(NoiseGrid::new(f64::NAN, 8).is_err());
    }

    #[test]
    fn grid_endpoints_and_spacing() {
        let g = NoiseGrid::new(2.5, 64).unwrap();
        assert_eq!(g.times()[0], 0.0);
        assert_eq!(*g.times().last().unwrap(), 2.5);
        assert!(g.times().windows(2).all(|w| w[1] > w[0]));
        for w in g.times().windows(2) {
            assert!((w[1] - w[0] - g.dt()).abs() < 1e-15);
        }
    }

    #[test]
    fn nested_grids_share_times_exactly() {
        let fine = NoiseGrid::new(0.7, 256).unwrap();
        let coarse = fine.coarsen(4).unwrap();
        for (k, t) in coarse.times().iter().enumerate() {
            assert_eq!(*t, fine.times()[4 * k]);
        }
    }

    #[test]
    fn deterministic_path_is_time() {
        let g = NoiseGrid::new(1.0, 16).unwrap();
        let p = NoisePath::deterministic(&g, 0);
        assert_eq!(p.values, g.times());
        assert_eq!(p.values[0], 0.0);
    }

    #[test]
    fn csv_has_header_metadata_and_rows() {
        let g = NoiseGrid::new(1.0, 4).unwrap();
        let p = NoisePath::deterministic(&g, 3);
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "# driver=deterministic");
        assert!(lines.contains(&"t,mu"));
        assert_eq!(lines.iter().filter(|l| !l.starts_with('#')).count(), 6);
        assert_eq!(*lines.last().unwrap(), "1,1");
    }
}
