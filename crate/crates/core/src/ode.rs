//! Classical fourth-order Runge-Kutta on small fixed-size states.

/// One RK4 step of `dy/dt = f(t, y)` from `(t, y)` with step `h`.
///
/// The closure may fail; the first error aborts the step.
#[inline]
pub(crate) fn rk4_step<const N: usize, E>(
    t: f64,
    y: [f64; N],
    h: f64,
    mut f: impl FnMut(f64, [f64; N]) -> Result<[f64; N], E>,
) -> Result<[f64; N], E> {
    let k1 = f(t, y)?;
    let k2 = f(t + 0.5 * h, axpy(y, 0.5 * h, k1))?;
    let k3 = f(t + 0.5 * h, axpy(y, 0.5 * h, k2))?;
    let k4 = f(t + h, axpy(y, h, k3))?;
    let mut out = y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(out)
}

#[inline]
fn axpy<const N: usize>(y: [f64; N], a: f64, k: [f64; N]) -> [f64; N] {
    let mut out = y;
    for i in 0..N {
        out[i] += a * k[i];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_fourth_order() {
        let solve = |n: usize| {
            let h = 1.0 / n as f64;
            let mut y = [1.0];
            for i in 0..n {
                y = rk4_step::<1, ()>(i as f64 * h, y, h, |_, y| Ok([-y[0]])).unwrap();
            }
            (y[0] - (-1.0f64).exp()).abs()
        };
        let ratio = solve(10) / solve(20);
        assert!((ratio - 16.0).abs() < 1.0, "ratio {ratio}");
    }

    #[test]
    fn time_dependent_rhs_is_exact_for_cubics() {
        // y' = 3t^2 integrates exactly under Simpson weights.
        let y = rk4_step::<1, ()>(0.5, [0.0], 0.25, |t, _| Ok([3.0 * t * t])).unwrap();
        assert!((y[0] - (0.75f64.powi(3) - 0.125)).abs() < 1e-15);
    }
}
