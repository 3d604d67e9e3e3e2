//! Exact-in-distribution synthesis of fractional and sub-fractional Brownian
//! motion on a uniform grid.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::{seeded_rng, Driver, NoiseGrid, NoisePath};
use crate::error::{Error, Result};

/// Largest grid for which [`generate_fbm`] uses the Cholesky route.
pub const CHOLESKY_MAX_STEPS: usize = 4096;

/// Offset below the Hurst index recorded as the paths' Hölder exponent.
const HOLDER_MARGIN: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FbmMethod {
    /// Lower Cholesky factor of the grid covariance.
    Cholesky,
    /// Davies-Harte circulant embedding of the increments.
    Circulant,
}

/// `E[B_s B_t]` for fractional Brownian motion.
pub fn fbm_covariance(hurst: f64, s: f64, t: f64) -> f64 {
    let e = 2.0 * hurst;
    0.5 * (t.powf(e) + s.powf(e) - (t - s).abs().powf(e))
}

/// `E[S_s S_t]` for sub-fractional Brownian motion.
pub fn subfbm_covariance(hurst: f64, s: f64, t: f64) -> f64 {
    let e = 2.0 * hurst;
    s.powf(e) + t.powf(e) - 0.5 * ((s + t).powf(e) + (t - s).abs().powf(e))
}

fn check_hurst(hurst: f64) -> Result<()> {
    if hurst > 0.5 && hurst < 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "hurst index must lie in (1/2, 1), got {hurst}"
        )))
    }
}

/// Fractional Brownian motion; Cholesky up to [`CHOLESKY_MAX_STEPS`] steps,
/// circulant embedding beyond.
pub fn generate_fbm(grid: &NoiseGrid, hurst: f64, seed: u64) -> Result<NoisePath> {
    let method = if grid.n_steps() <= CHOLESKY_MAX_STEPS {
        FbmMethod::Cholesky
    } else {
        FbmMethod::Circulant
    };
    generate_fbm_with(grid, hurst, seed, method)
}

pub fn generate_fbm_with(
    grid: &NoiseGrid,
    hurst: f64,
    seed: u64,
    method: FbmMethod,
) -> Result<NoisePath> {
    check_hurst(hurst)?;
    let values = match method {
        FbmMethod::Cholesky => {
            let factor = cached_factor(Kind::Fbm, grid, hurst)?;
            apply_factor(&factor, seed)
        }
        FbmMethod::Circulant => circulant_fbm(grid, hurst, seed)?,
    };
    Ok(NoisePath {
        grid: grid.clone(),
        values,
        driver: Driver::Fbm { hurst },
        seed,
        holder_gamma: Some(hurst - HOLDER_MARGIN),
    })
}

/// Sub-fractional Brownian motion via Cholesky of the grid covariance.
pub fn generate_subfbm(grid: &NoiseGrid, hurst: f64, seed: u64) -> Result<NoisePath> {
    check_hurst(hurst)?;
    let factor = cached_factor(Kind::SubFbm, grid, hurst)?;
    Ok(NoisePath {
        grid: grid.clone(),
        values: apply_factor(&factor, seed),
        driver: Driver::SubFbm { hurst },
        seed,
        holder_gamma: Some(hurst - HOLDER_MARGIN),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Kind {
    Fbm,
    SubFbm,
}

type Key = (Kind, usize, u64, u64);

fn factor_cache() -> &'static Mutex<HashMap<Key, Arc<DMatrix<f64>>>> {
    static CACHE: OnceLock<Mutex<HashMap<Key, Arc<DMatrix<f64>>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

fn cached_factor(kind: Kind, grid: &NoiseGrid, hurst: f64) -> Result<Arc<DMatrix<f64>>> {
    let key = (
        kind,
        grid.n_steps(),
        grid.horizon().to_bits(),
        hurst.to_bits(),
    );
    let mut cache = factor_cache().lock().expect("factor cache poisoned");
    if let Some(l) = cache.get(&key) {
        return Ok(Arc::clone(l));
    }
    let l = Arc::new(covariance_factor(kind, grid, hurst)?);
    cache.insert(key, Arc::clone(&l));
    Ok(l)
}

fn covariance_factor(kind: Kind, grid: &NoiseGrid, hurst: f64) -> Result<DMatrix<f64>> {
    let t = &grid.times()[1..];
    let n = t.len();
    let cov = match kind {
        Kind::Fbm => DMatrix::from_fn(n, n, |i, j| fbm_covariance(hurst, t[i], t[j])),
        Kind::SubFbm => DMatrix::from_fn(n, n, |i, j| subfbm_covariance(hurst, t[i], t[j])),
    };
    cov.cholesky().map(|c| c.unpack()).ok_or_else(|| {
        Error::Numerical(format!(
            "grid covariance not positive definite (n = {n}, H = {hurst})"
        ))
    })
}

fn apply_factor(l: &DMatrix<f64>, seed: u64) -> Vec<f64> {
    let n = l.nrows();
    let mut rng = seeded_rng(seed);
    let z: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let mut out = vec![0.0; n + 1];
    // Column-major walk over the lower triangle.
    for (j, zj) in z.iter().enumerate() {
        let col = l.column(j);
        for i in j..n {
            out[i + 1] += col[i] * zj;
        }
    }
    out
}

fn circulant_fbm(grid: &NoiseGrid, hurst: f64, seed: u64) -> Result<Vec<f64>> {
    let n = grid.n_steps();
    let m = 2 * n;
    let e = 2.0 * hurst;
    let gamma = |k: f64| 0.5 * ((k - 1.0).abs().powf(e) - 2.0 * k.powf(e) + (k + 1.0).powf(e));

    let mut row: Vec<Complex<f64>> = (0..m)
        .map(|j| {
            let k = if j <= n { j } else { m - j };
            Complex::new(gamma(k as f64), 0.0)
        })
        .collect();
    let fft = FftPlanner::new().plan_fft_forward(m);
    fft.process(&mut row);

    let lmax = row.iter().fold(0.0f64, |a, c| a.max(c.re));
    let mut eig = Vec::with_capacity(m);
    for c in &row {
        if c.re < -1e-10 * lmax {
            return Err(Error::Numerical(format!(
                "circulant embedding has negative eigenvalue {} (n = {n}, H = {hurst})",
                c.re
            )));
        }
        eig.push(c.re.max(0.0));
    }

    let mut rng = seeded_rng(seed);
    let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
    let mf = m as f64;
    let mut w = vec![Complex::new(0.0, 0.0); m];
    w[0] = Complex::new((eig[0] / mf).sqrt() * normal(), 0.0);
    for j in 1..n {
        let s = (eig[j] / (2.0 * mf)).sqrt();
        let (a, b) = (normal(), normal());
        w[j] = Complex::new(s * a, s * b);
        w[m - j] = w[j].conj();
    }
    w[n] = Complex::new((eig[n] / mf).sqrt() * normal(), 0.0);
    fft.process(&mut w);

    // Unit-spaced fractional Gaussian noise, rescaled to the grid by self-similarity.
    let scale = grid.dt().powf(hurst);
    let mut out = Vec::with_capacity(n + 1);
    out.push(0.0);
    let mut acc = 0.0;
    for c in &w[..n] {
        acc += scale * c.re;
        out.push(acc);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn second_moment(samples: &[(f64, f64)]) -> (f64, f64) {
        let m = samples.len() as f64;
        let prods: Vec<f64> = samples.iter().map(|(a, b)| a * b).collect();
        let mean = prods.iter().sum::<f64>() / m;
        let var = prods.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (m - 1.0);
        (mean, (var / m).sqrt())
    }

    #[test]
    fn rejects_hurst_outside_open_interval() {
        let g = NoiseGrid::new(1.0, 8).unwrap();
        for h in [0.4, 0.5, 1.0, 1.2, f64::NAN] {
            assert!(matches!(generate_fbm(&g, h, 0), Err(Error::Config(_))));
            assert!(matches!(generate_subfbm(&g, h, 0), Err(Error::Config(_))));
        }
    }

    #[test]
    fn covariance_factors_on_small_grid() {
        let g = NoiseGrid::new(1.0, 8).unwrap();
        for h in [0.55, 0.75, 0.95] {
            for kind in [Kind::Fbm, Kind::SubFbm] {
                let l = covariance_factor(kind, &g, h).unwrap();
                // L L^T reproduces the covariance.
                let t = &g.times()[1..];
                let rebuilt = &l * l.transpose();
                for i in 0..8 {
                    for j in 0..8 {
                        let c = match kind {
                            Kind::Fbm => fbm_covariance(h, t[i], t[j]),
                            Kind::SubFbm => subfbm_covariance(h, t[i], t[j]),
                        };
                        assert!((rebuilt[(i, j)] - c).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn fbm_seed_determinism() {
        let g = NoiseGrid::new(1.0, 64).unwrap();
        let a = generate_fbm(&g, 0.9, 1).unwrap();
        let b = generate_fbm(&g, 0.9, 1).unwrap();
        let c = generate_fbm(&g, 0.9, 2).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.values, c.values);
        assert_eq!(a.values[0], 0.0);
        assert!((a.holder_gamma.unwrap() - 0.89).abs() < 1e-12);
    }

    #[test]
    fn fbm_terminal_variance() {
        let (t, h) = (2.0, 0.7);
        let g = NoiseGrid::new(t, 16).unwrap();
        let xs: Vec<(f64, f64)> = (0..10_000)
            .map(|s| {
                let v = *generate_fbm(&g, h, s).unwrap().values.last().unwrap();
                (v, v)
            })
            .collect();
        let (var, se) = second_moment(&xs);
        let truth = t.powf(2.0 * h);
        assert!((var - truth).abs() < 5.0 * se, "{var} vs {truth}");
    }

    #[test]
    fn circulant_matches_fbm_covariance() {
        let h = 0.75;
        let g = NoiseGrid::new(1.0, 16).unwrap();
        let probes = [(4usize, 4usize), (4, 12), (16, 16)];
        let paths: Vec<Vec<f64>> = (0..20_000)
            .map(|s| {
                generate_fbm_with(&g, h, s, FbmMethod::Circulant)
                    .unwrap()
                    .values
            })
            .collect();
        for (i, j) in probes {
            let pairs: Vec<(f64, f64)> = paths.iter().map(|p| (p[i], p[j])).collect();
            let (c, se) = second_moment(&pairs);
            let truth = fbm_covariance(h, g.times()[i], g.times()[j]);
            assert!((c - truth).abs() < 5.0 * se, "({i},{j}) {c} vs {truth}");
        }
    }

    #[test]
    fn subfbm_covariance_and_diagonal() {
        let (t, h) = (1.5, 0.8);
        let g = NoiseGrid::new(t, 8).unwrap();
        let paths: Vec<Vec<f64>> = (0..100_000)
            .map(|s| generate_subfbm(&g, h, s).unwrap().values)
            .collect();
        for (i, j) in [(3usize, 7usize), (2, 5), (8, 8)] {
            let pairs: Vec<(f64, f64)> = paths.iter().map(|p| (p[i], p[j])).collect();
            let (c, se) = second_moment(&pairs);
            let truth = subfbm_covariance(h, g.times()[i], g.times()[j]);
            assert!((c - truth).abs() < 5.0 * se, "({i},{j}) {c} vs {truth}");
        }
        let diag = (2.0 - 2f64.powf(2.0 * h - 1.0)) * t.powf(2.0 * h);
        assert!((subfbm_covariance(h, t, t) - diag).abs() < 1e-12);
    }

    #[test]
    fn large_grid_uses_circulant_route() {
        let g = NoiseGrid::new(1.0, 2 * CHOLESKY_MAX_STEPS).unwrap();
        let p = generate_fbm(&g, 0.75, 3).unwrap();
        assert_eq!(p.values.len(), g.n_steps() + 1);
        assert_eq!(p.values[0], 0.0);
        assert!(p.values.iter().all(|v| v.is_finite()));
    }
}
