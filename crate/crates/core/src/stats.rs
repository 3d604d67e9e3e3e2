//! Small statistics helpers: quantiles and log-log least squares.

use crate::error::{Error, Result};

/// Linear-interpolation quantile of already sorted data.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let pos = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    quantile(&v, 0.5)
}

/// Least-squares line through `(log eps, log error)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLogFit {
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
}

/// Ordinary least squares of `log(error)` on `log(eps)`.
pub fn fit_rate(pairs: &[(f64, f64)]) -> Result<LogLogFit> {
    if pairs.len() < 3 {
        return Err(Error::Input(format!(
            "rate fit needs >= 3 points, got {}",
            pairs.len()
        )));
    }
    if let Some(&(e, r)) = pairs.iter().find(|(e, r)| !(*e > 0.0 && *r > 0.0)) {
        return Err(Error::Input(format!(
            "rate fit needs positive values, got ({e}, {r})"
        )));
    }
    let n = pairs.len() as f64;
    let xs: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let (mx, my) = (mean(&xs), mean(&ys));
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Input("rate fit needs distinct epsilons".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let stderr = (ssr / (n - 2.0) / sxx).sqrt();
    Ok(LogLogFit {
        slope,
        stderr,
        intercept,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn quantiles_interpolate() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 0.5), 3.0);
        assert_eq!(quantile(&v, 1.0), 5.0);
        assert!((quantile(&v, 0.9) - 4.6).abs() < 1e-12);
        assert_eq!(median(&[3.0, 1.0, 2.0, 10.0]), 2.5);
    }

    #[test]
    fn exact_power_laws() {
        let eps: Vec<f64> = (3..=8).map(|k| 0.5f64.powi(k)).collect();
        let fit = fit_rate(&eps.iter().map(|&e| (e, e)).collect::<Vec<_>>()).unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-12);
        assert!(fit.stderr < 1e-12);
        let fit = fit_rate(&eps.iter().map(|&e| (e, 5.0 * e.cbrt())).collect::<Vec<_>>()).unwrap();
        assert!((fit.slope - 1.0 / 3.0).abs() < 1e-12);
        assert!((fit.intercept - 5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn noisy_power_law_within_three_stderr() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
        let eps: Vec<f64> = (1..=8).map(|k| 0.5f64.powi(k)).collect();
        let pairs: Vec<(f64, f64)> = eps
            .iter()
            .map(|&e| {
                (
                    e,
                    2.0 * e.powf(0.4) * (1.0 + 0.1 * rng.random_range(-1.0..1.0)),
                )
            })
            .collect();
        let fit = fit_rate(&pairs).unwrap();
        assert!((fit.slope - 0.4).abs() < 3.0 * fit.stderr, "{fit:?}");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(fit_rate(&[(0.1, 0.1), (0.2, 0.2)]).is_err());
        assert!(fit_rate(&[(0.1, 0.1), (0.2, 0.0), (0.3, 0.3)]).is_err());
        assert!(fit_rate(&[(-0.1, 0.1), (0.2, 0.2), (0.3, 0.3)]).is_err());
    }
}
