//! Named coefficient families, so configs and examples can refer to models
//! by short strings such as `sin+2` or `sin_x_cos_s`.

use std::f64::consts::PI;

use crate::averaging::DriftSpec;
use crate::error::{Error, Result};
use crate::flow::DiffusionSpec;
use crate::noise::CompositeKernel;

/// Parses `zero`, `linear`, `const:<a>` or `sin+<c>`.
pub fn diffusion(name: &str) -> Result<DiffusionSpec> {
    let name = name.trim();
    match name {
        "zero" => return Ok(DiffusionSpec::zero()),
        "linear" => return Ok(DiffusionSpec::linear()),
        _ => {}
    }
    if let Some(a) = name.strip_prefix("const:") {
        return Ok(DiffusionSpec::constant(number(a, name)?));
    }
    if let Some(c) = name.strip_prefix("sin+") {
        return Ok(DiffusionSpec::sine_plus(number(c, name)?));
    }
    Err(Error::Config(format!("unknown diffusion '{name}'")))
}

/// Drift families:
///
/// | name | `b(x, s)` | `b_bar(x)` |
/// |------|-----------|------------|
/// | `zero` | 0 | 0 |
/// | `const:<c>` | c | c |
/// | `cos_s` | cos s | 0 |
/// | `sin_x_cos_s` | sin x cos s | 0 |
/// | `sin_x_mixed` | sin x (0.3 + 0.7 cos^2 s) | 0.65 sin x |
/// | `decaying_sin_x` | sin x * s / (1 + s) | sin x (aperiodic, unbounded G) |
pub fn drift(name: &str) -> Result<DriftSpec> {
    let name = name.trim();
    let spec = match name {
        "zero" => DriftSpec::new("zero", |_, _| 0.0, |_| 0.0, 0.0)
            .with_period(1.0)?
            .with_mean(|_| 0.0),
        "cos_s" => DriftSpec::new("cos_s", |_, s: f64| s.cos(), |_| 0.0, 1.0)
            .with_period(2.0 * PI)?
            .with_mean(|_| 0.0),
        "sin_x_cos_s" => DriftSpec::new(
            "sin_x_cos_s",
            |x: f64, s: f64| x.sin() * s.cos(),
            |_| 1.0,
            1.0,
        )
        .with_period(2.0 * PI)?
        .with_mean(|_| 0.0),
        "sin_x_mixed" => DriftSpec::new(
            "sin_x_mixed",
            |x: f64, s: f64| x.sin() * (0.3 + 0.7 * s.cos().powi(2)),
            |_| 1.0,
            1.0,
        )
        .with_period(PI)?
        .with_mean(|x: f64| 0.65 * x.sin()),
        "decaying_sin_x" => DriftSpec::new(
            "decaying_sin_x",
            |x: f64, s: f64| x.sin() * s / (1.0 + s),
            |_| 1.0,
            1.0,
        )
        .with_mean(f64::sin),
        _ => {
            if let Some(c) = name.strip_prefix("const:") {
                let c = number(c, name)?;
                DriftSpec::new(name, move |_, _| c, |_| 0.0, c.abs())
                    .with_period(1.0)?
                    .with_mean(move |_| c)
            } else {
                return Err(Error::Config(format!("unknown drift '{name}'")));
            }
        }
    };
    Ok(spec)
}

/// Composite-measure kernels `t` and `t_sin_x` on `[a, b]`.
pub fn kernel(name: &str, a: f64, b: f64) -> Result<CompositeKernel> {
    match name.trim() {
        "t" => CompositeKernel::new("t", a, b, |t, _| t),
        "t_sin_x" => CompositeKernel::new("t_sin_x", a, b, |t, x: f64| t * x.sin()),
        other => Err(Error::Config(format!("unknown kernel '{other}'"))),
    }
}

fn number(text: &str, whole: &str) -> Result<f64> {
    text.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Config(format!("bad number in '{whole}'")))
}
