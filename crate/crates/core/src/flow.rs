//! The Doss-Sussmann flow `F(r, x)` of `dF/dr = sigma(F)`, `F(0, x) = x`,
//! its inverse `H(r, .)` in `x`, and the x-derivatives of both.
//!
//! `dF/dx = exp(int_0^r sigma'(F(s, x)) ds)` is integrated alongside the flow
//! as a log-derivative, so it is strictly positive by construction.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ode::rk4_step;

type Scalar = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Points at which a diffusion coefficient's derivatives are checked on
/// construction.
const PROBES: [f64; 13] = [
    -3.0, -2.5, -2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0,
];
const FD_STEP: f64 = 1e-5;
const FD_REL_TOL: f64 = 1e-5;

/// Diffusion coefficient `sigma` with its first two derivatives and a
/// declared bound on both derivatives.
#[derive(Clone)]
pub struct DiffusionSpec {
    pub name: String,
    sigma: Scalar,
    sigma_prime: Scalar,
    sigma_second: Scalar,
    pub deriv_bound: f64,
}

impl fmt::Debug for DiffusionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiffusionSpec")
            .field("name", &self.name)
            .field("deriv_bound", &self.deriv_bound)
            .finish_non_exhaustive()
    }
}

impl DiffusionSpec {
    /// Builds the spec and checks, at a fixed set of probe points, that the
    /// derivatives match finite differences and respect `deriv_bound`.
    pub fn new(
        name: impl Into<String>,
        sigma: impl Fn(f64) -> f64 + Send + Sync + 'static,
        sigma_prime: impl Fn(f64) -> f64 + Send + Sync + 'static,
        sigma_second: impl Fn(f64) -> f64 + Send + Sync + 'static,
        deriv_bound: f64,
    ) -> Result<Self> {
        let spec = Self {
            name: name.into(),
            sigma: Arc::new(sigma),
            sigma_prime: Arc::new(sigma_prime),
            sigma_second: Arc::new(sigma_second),
            deriv_bound,
        };
        spec.self_check()?;
        Ok(spec)
    }

    fn self_check(&self) -> Result<()> {
        if !(self.deriv_bound.is_finite() && self.deriv_bound >= 0.0) {
            return Err(Error::Validation(format!(
                "{}: derivative bound must be finite and non-negative",
                self.name
            )));
        }
        let fd = |g: &Scalar, x: f64| (g(x + FD_STEP) - g(x - FD_STEP)) / (2.0 * FD_STEP);
        for &x in &PROBES {
            let (d1, d2) = (self.sigma_prime(x), self.sigma_second(x));
            for (label, analytic, numeric) in [
                ("sigma'", d1, fd(&self.sigma, x)),
                ("sigma''", d2, fd(&self.sigma_prime, x)),
            ] {
                if (analytic - numeric).abs() > FD_REL_TOL * analytic.abs().max(1.0) {
                    return Err(Error::Validation(format!(
                        "{}: {label}({x}) = {analytic} disagrees with finite difference {numeric}",
                        self.name
                    )));
                }
            }
            self.check_bound(x, d1)?;
            self.check_bound(x, d2)?;
        }
        Ok(())
    }

    fn check_bound(&self, x: f64, d: f64) -> Result<()> {
        if d.abs() > self.deriv_bound * (1.0 + 1e-12) {
            Err(Error::Validation(format!(
                "{}: derivative {d} at x = {x} exceeds declared bound {}",
                self.name, self.deriv_bound
            )))
        } else {
            Ok(())
        }
    }

    pub fn sigma(&self, x: f64) -> f64 {
        (self.sigma)(x)
    }

    pub fn sigma_prime(&self, x: f64) -> f64 {
        (self.sigma_prime)(x)
    }

    pub fn sigma_second(&self, x: f64) -> f64 {
        (self.sigma_second)(x)
    }

    /// `sigma = a`.
    pub fn constant(a: f64) -> Self {
        Self::new(format!("const:{a}"), move |_| a, |_| 0.0, |_| 0.0, 0.0)
            .expect("constant diffusion is valid")
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// `sigma(x) = x`.
    pub fn linear() -> Self {
        Self::new("linear", |x| x, |_| 1.0, |_| 0.0, 1.0).expect("linear diffusion is valid")
    }

    /// `sigma(x) = sin(x) + c`.
    pub fn sine_plus(c: f64) -> Self {
        Self::new(
            format!("sin+{c}"),
            move |x| x.sin() + c,
            f64::cos,
            |x| -x.sin(),
            1.0,
        )
        .expect("shifted sine diffusion is valid")
    }
}

/// The flow of a [`DiffusionSpec`] together with its numerical settings.
#[derive(Debug, Clone)]
pub struct FlowMap {
    pub spec: DiffusionSpec,
    pub r_substeps_per_unit: usize,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
}

impl FlowMap {
    pub const DEFAULT_SUBSTEPS_PER_UNIT: usize = 64;
    pub const DEFAULT_NEWTON_TOL: f64 = 1e-10;
    pub const DEFAULT_NEWTON_MAX_ITER: usize = 50;

    pub fn new(spec: DiffusionSpec) -> Self {
        Self {
            spec,
            r_substeps_per_unit: Self::DEFAULT_SUBSTEPS_PER_UNIT,
            newton_tol: Self::DEFAULT_NEWTON_TOL,
            newton_max_iter: Self::DEFAULT_NEWTON_MAX_ITER,
        }
    }

    pub fn with_substeps(mut self, per_unit: usize) -> Self {
        self.r_substeps_per_unit = per_unit.max(1);
        self
    }

    /// `(F(r, x), dF/dx(r, x))` from one integration of the augmented system.
    pub fn forward_with_dx(&self, r: f64, x: f64) -> Result<(f64, f64)> {
        if !(r.is_finite() && x.is_finite()) {
            return Err(Error::Numerical(format!(
                "non-finite flow argument ({r}, {x})"
            )));
        }
        let steps = (r.abs() * self.r_substeps_per_unit as f64).ceil() as usize;
        if steps == 0 {
            return Ok((x, 1.0));
        }
        let h = r / steps as f64;
        let spec = &self.spec;
        let rhs = |_: f64, s: [f64; 2]| -> Result<[f64; 2]> {
            let d = spec.sigma_prime(s[0]);
            spec.check_bound(s[0], d)?;
            Ok([spec.sigma(s[0]), d])
        };
        let mut state = [x, 0.0];
        for i in 0..steps {
            state = rk4_step(i as f64 * h, state, h, &rhs)?;
            if !state[0].is_finite() {
                return Err(Error::Numerical(format!(
                    "flow of {} overflowed at r = {r}, x = {x}",
                    spec.name
                )));
            }
        }
        Ok((state[0], state[1].exp()))
    }

    /// `F(r, x)`.
    pub fn forward(&self, r: f64, x: f64) -> Result<f64> {
        self.forward_with_dx(r, x).map(|(f, _)| f)
    }

    /// `dF/dx(r, x)`, always positive.
    pub fn dx(&self, r: f64, x: f64) -> Result<f64> {
        self.forward_with_dx(r, x).map(|(_, d)| d)
    }

    /// `H(r, z)`: the `x` with `F(r, x) = z`.
    ///
    /// Newton iteration started from the backward flow `F(-r, z)`, which is
    /// already the inverse up to integrator error.
    pub fn inverse(&self, r: f64, z: f64) -> Result<f64> {
        let mut x = self.forward(-r, z)?;
        for _ in 0..self.newton_max_iter {
            let (f, d) = self.forward_with_dx(r, x)?;
            let res = f - z;
            if !res.is_finite() {
                break;
            }
            let next = x - res / d;
            if res.abs() <= self.newton_tol {
                // The pending step is free and only sharpens the answer.
                return Ok(next);
            }
            x = next;
        }
        Err(Error::Inversion { r, z })
    }

    /// `dH/dx(r, z) = 1 / dF/dx(r, H(r, z))`.
    pub fn inverse_dx(&self, r: f64, z: f64) -> Result<f64> {
        let x = self.inverse(r, z)?;
        Ok(1.0 / self.dx(r, x)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn zero_parameter_is_identity() {
        let fm = FlowMap::new(DiffusionSpec::sine_plus(2.0));
        for x in [-3.0, 0.0, 1.7] {
            assert_eq!(fm.forward_with_dx(0.0, x).unwrap(), (x, 1.0));
            assert_eq!(fm.inverse(0.0, x).unwrap(), x);
        }
    }

    #[test]
    fn constant_diffusion_translates() {
        let fm = FlowMap::new(DiffusionSpec::constant(1.5));
        for (r, x) in [(0.3, 1.0), (-1.7, 0.2), (2.0, -4.0)] {
            assert!((fm.forward(r, x).unwrap() - (x + 1.5 * r)).abs() < 1e-12);
            assert_eq!(fm.dx(r, x).unwrap(), 1.0);
            assert!((fm.inverse(r, x).unwrap() - (x - 1.5 * r)).abs() < 1e-12);
            assert_eq!(fm.inverse_dx(r, x).unwrap(), 1.0);
        }
    }

    #[test]
    fn linear_diffusion_is_exponential() {
        let fm = FlowMap::new(DiffusionSpec::linear());
        for r in [-2.0, -0.6, 0.1, 1.3, 2.0] {
            for x in [-2.0, -0.5, 0.7, 2.0] {
                assert!(rel(fm.forward(r, x).unwrap(), x * f64::exp(r)) < 1e-8);
                assert!(rel(fm.dx(r, x).unwrap(), f64::exp(r)) < 1e-8);
                assert!(rel(fm.inverse(r, x).unwrap(), x * f64::exp(-r)) < 1e-8);
                assert!(rel(fm.inverse_dx(r, x).unwrap(), f64::exp(-r)) < 1e-8);
            }
        }
    }

    #[test]
    fn sine_flow_matches_ten_times_finer_integration() {
        let coarse = FlowMap::new(DiffusionSpec::sine_plus(2.0));
        let fine = coarse.clone().with_substeps(640);
        let (a, b) = (
            coarse.forward(0.5, 1.0).unwrap(),
            fine.forward(0.5, 1.0).unwrap(),
        );
        assert!((a - b).abs() < 1e-8, "{a} vs {b}");
    }

    #[test]
    fn sine_round_trip() {
        let fm = FlowMap::new(DiffusionSpec::sine_plus(2.0));
        let z = fm.forward(0.7, -1.3).unwrap();
        assert!((fm.inverse(0.7, z).unwrap() + 1.3).abs() < 1e-8);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let fm = FlowMap::new(DiffusionSpec::sine_plus(2.0));
        let h = 1e-5;
        for (r, x) in [(0.5, 1.0), (-1.2, 0.3), (1.9, -2.0)] {
            let fd = (fm.forward(r, x + h).unwrap() - fm.forward(r, x - h).unwrap()) / (2.0 * h);
            assert!(rel(fm.dx(r, x).unwrap(), fd) < 1e-5);
            let fd = (fm.inverse(r, x + h).unwrap() - fm.inverse(r, x - h).unwrap()) / (2.0 * h);
            assert!(rel(fm.inverse_dx(r, x).unwrap(), fd) < 1e-5);
        }
    }

    #[test]
    fn inconsistent_derivative_is_rejected() {
        let err = DiffusionSpec::new("bad", f64::sin, |x| 2.0 * x.cos(), |x| -x.sin(), 2.0);
        assert!(matches!(err, Err(Error::Validation(_))));
    }

    #[test]
    fn unbounded_derivative_fails_at_evaluation() {
        // x^2 passes the probe checks with a generous bound but leaves it along the flow.
        let spec = DiffusionSpec::new("square", |x| x * x, |x| 2.0 * x, |_| 2.0, 6.0).unwrap();
        let fm = FlowMap::new(spec);
        assert!(fm.forward(0.1, 1.0).is_ok());
        assert!(matches!(fm.forward(0.9, 1.0), Err(Error::Validation(_))));
    }

    #[test]
    fn declared_bound_is_checked_on_construction() {
        let err = DiffusionSpec::new("tight", |x| 3.0 * x, |_| 3.0, |_| 0.0, 1.0);
        assert!(matches!(err, Err(Error::Validation(_))));
    }
}
