//! Averaged drift `b_bar(y) = lim (1/t) int_0^t b(y, s) ds` and the bounded-G
//! condition `G(y, r) = int_0^r (b(y, s) - b_bar(y)) ds`.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};

type Drift = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
type Scalar = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Simpson panels used for the period mean.
const MEAN_PANELS: usize = 1 << 10;
/// Quadrature panels per period for `G`.
const G_PANELS_PER_PERIOD: f64 = 256.0;
/// Panel width for `G` when the drift has no period.
const G_APERIODIC_STEP: f64 = 1.0 / 256.0;
const PERIOD_TOL: f64 = 1e-12;

/// Drift `b(x, s)` with its regularity declarations.
#[derive(Clone)]
pub struct DriftSpec {
    pub name: String,
    b: Drift,
    lipschitz: Scalar,
    pub sup_bound: f64,
    pub period: Option<f64>,
    b_bar: Option<Scalar>,
}

impl fmt::Debug for DriftSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DriftSpec")
            .field("name", &self.name)
            .field("sup_bound", &self.sup_bound)
            .field("period", &self.period)
            .field("analytic_mean", &self.b_bar.is_some())
            .finish_non_exhaustive()
    }
}

impl DriftSpec {
    /// `lipschitz(c)` is the local Lipschitz constant of `b` in `x` on `|x| <= c`.
    pub fn new(
        name: impl Into<String>,
        b: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        lipschitz: impl Fn(f64) -> f64 + Send + Sync + 'static,
        sup_bound: f64,
    ) -> Self {
        Self {
            name: name.into(),
            b: Arc::new(b),
            lipschitz: Arc::new(lipschitz),
            sup_bound,
            period: None,
            b_bar: None,
        }
    }

    /// Declares `b` periodic in `s`, verified at a handful of probe points.
    pub fn with_period(mut self, period: f64) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::Validation(format!(
                "{}: period must be positive",
                self.name
            )));
        }
        for x in [-2.0, -0.7, 0.0, 0.4, 1.9] {
            for s in [0.0, 0.37, 1.1, 2.9, 5.3] {
                let d = (self.b_unchecked(x, s + period) - self.b_unchecked(x, s)).abs();
                if d > PERIOD_TOL {
                    return Err(Error::Validation(format!(
                        "{}: not {period}-periodic at (x, s) = ({x}, {s}), off by {d}",
                        self.name
                    )));
                }
            }
        }
        self.period = Some(period);
        Ok(self)
    }

    /// Supplies the averaged drift in closed form.
    pub fn with_mean(mut self, b_bar: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.b_bar = Some(Arc::new(b_bar));
        self
    }

    /// Drops any closed-form mean, forcing the quadrature route.
    pub fn without_mean(mut self) -> Self {
        self.b_bar = None;
        self
    }

    pub fn has_analytic_mean(&self) -> bool {
        self.b_bar.is_some()
    }

    pub fn has_average(&self) -> bool {
        self.b_bar.is_some() || self.period.is_some()
    }

    pub fn lipschitz(&self, c: f64) -> f64 {
        (self.lipschitz)(c)
    }

    pub(crate) fn b_unchecked(&self, x: f64, s: f64) -> f64 {
        (self.b)(x, s)
    }

    /// `b(x, s)`, failing if the declared sup bound is exceeded.
    pub fn eval(&self, x: f64, s: f64) -> Result<f64> {
        let v = (self.b)(x, s);
        if v.abs() > self.sup_bound * (1.0 + 1e-12) || !v.is_finite() {
            return Err(Error::Validation(format!(
                "{}: |b({x}, {s})| = {} exceeds declared bound {}",
                self.name,
                v.abs(),
                self.sup_bound
            )));
        }
        Ok(v)
    }

    /// `b_bar(y)`: the closed form if given, else the period mean by
    /// composite Simpson quadrature.
    pub fn averaged_drift(&self, y: f64) -> Result<f64> {
        if let Some(b_bar) = &self.b_bar {
            return Ok(b_bar(y));
        }
        let p = self.period.ok_or(Error::UnsupportedDrift)?;
        Ok(simpson(|s| self.b_unchecked(y, s), 0.0, p, MEAN_PANELS) / p)
    }

    fn g_step(&self) -> f64 {
        self.period
            .map_or(G_APERIODIC_STEP, |p| p / G_PANELS_PER_PERIOD)
    }

    /// `G(y, r) = int_0^r (b(y, s) - b_bar(y)) ds`.
    pub fn g_function(&self, y: f64, r: f64) -> Result<f64> {
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::Input(format!("G needs r >= 0, got {r}")));
        }
        let mean = self.averaged_drift(y)?;
        if r == 0.0 {
            return Ok(0.0);
        }
        let panels = ((r / self.g_step()).ceil() as usize).max(2);
        let panels = panels + panels % 2;
        Ok(simpson(|s| self.b_unchecked(y, s) - mean, 0.0, r, panels))
    }

    /// Heuristic scan for boundedness of `G`.
    ///
    /// `G` is integrated cumulatively up to `r_max`, tracking the running
    /// sup of `|G|` over all probes at every quadrature node. The verdict is
    /// PASS when the sup grows by less than `threshold` (relative) over the
    /// last decade `[r_max / 10, r_max]`.
    pub fn check_a4(&self, y_probes: &[f64], r_max: f64, threshold: f64) -> Result<A4Report> {
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(Error::Input(format!("r_max must be positive, got {r_max}")));
        }
        let decade_start = r_max / 10.0;
        let step = self.g_step();
        let pairs = ((r_max / (2.0 * step)).ceil() as usize).max(1);
        let h = r_max / (2 * pairs) as f64;
        let checkpoints = log_checkpoints(r_max);

        let mut sup_at_decade = 0.0f64;
        let mut sup = 0.0f64;
        let mut trace = vec![0.0; checkpoints.len()];
        for &y in y_probes {
            let mean = self.averaged_drift(y)?;
            let f = |s: f64| self.b_unchecked(y, s) - mean;
            let mut g = 0.0f64;
            let mut running = 0.0f64;
            let mut next_cp = 0;
            let mut left = f(0.0);
            for i in 0..pairs {
                let s0 = 2.0 * i as f64 * h;
                let right = f(s0 + 2.0 * h);
                g += h / 3.0 * (left + 4.0 * f(s0 + h) + right);
                left = right;
                running = running.max(g.abs());
                let s1 = s0 + 2.0 * h;
                if s1 <= decade_start {
                    sup_at_decade = sup_at_decade.max(running);
                }
                while next_cp < checkpoints.len() && checkpoints[next_cp] <= s1 {
                    trace[next_cp] = f64::max(trace[next_cp], running);
                    next_cp += 1;
                }
            }
            sup = sup.max(running);
        }

        let growth = if sup == 0.0 {
            0.0
        } else if sup_at_decade == 0.0 {
            f64::INFINITY
        } else {
            (sup - sup_at_decade) / sup_at_decade
        };
        let verdict = if growth < threshold {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        Ok(A4Report {
            drift: self.name.clone(),
            verdict,
            sup,
            sup_at_last_decade: sup_at_decade,
            growth,
            threshold,
            r_max,
            trace: checkpoints.into_iter().zip(trace).collect(),
        })
    }
}

fn log_checkpoints(r_max: f64) -> Vec<f64> {
    // Ten points per decade over six decades below r_max.
    (0..=60)
        .rev()
        .map(|j| r_max * 10f64.powf(-j as f64 / 10.0))
        .collect()
}

/// Composite Simpson rule with an even number of panels.
pub(crate) fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    debug_assert!(panels >= 2 && panels.is_multiple_of(2));
    let h = (b - a) / panels as f64;
    let mut acc = f(a) + f(b);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
        })
    }
}

/// Outcome of [`DriftSpec::check_a4`].
#[derive(Debug, Clone, Serialize)]
pub struct A4Report {
    pub drift: String,
    pub verdict: Verdict,
    pub sup: f64,
    pub sup_at_last_decade: f64,
    /// Relative growth of the running sup over the last decade.
    pub growth: f64,
    pub threshold: f64,
    pub r_max: f64,
    /// `(r, running sup of |G|)` at log-spaced checkpoints.
    pub trace: Vec<(f64, f64)>,
}

impl A4Report {
    /// Structured `key = value` block for text reports.
    pub fn to_text(&self) -> String {
        format!(
            "[bounded_g]\ndrift = {}\nverdict = {}\nsup = {}\nsup_at_last_decade = {}\n\
             growth = {}\nthreshold = {}\nr_max = {}\n",
            self.drift,
            self.verdict,
            self.sup,
            self.sup_at_last_decade,
            self.growth,
            self.threshold,
            self.r_max
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sin_cos() -> DriftSpec {
        DriftSpec::new(
            "sin_x_cos_s",
            |x: f64, s: f64| x.sin() * s.cos(),
            |_| 1.0,
            1.0,
        )
        .with_period(2.0 * PI)
        .unwrap()
    }

    fn decaying() -> DriftSpec {
        DriftSpec::new(
            "decaying",
            |x: f64, s: f64| x.sin() * s / (1.0 + s),
            |_| 1.0,
            1.0,
        )
        .with_mean(f64::sin)
    }

    #[test]
    fn cosine_drift_averages_to_zero() {
        let d = sin_cos();
        for y in [-2.0, 0.3, 1.0] {
            assert!(d.averaged_drift(y).unwrap().abs() < 1e-14);
        }
    }

    #[test]
    fn one_plus_cos_averages_to_coefficient() {
        let d = DriftSpec::new(
            "c(1+cos)",
            |x: f64, s: f64| x.tanh() * (1.0 + s.cos()),
            |_| 1.0,
            2.0,
        )
        .with_period(2.0 * PI)
        .unwrap();
        for y in [-1.0, 0.5, 3.0] {
            assert!((d.averaged_drift(y).unwrap() - y.tanh()).abs() < 1e-13);
        }
    }

    #[test]
    fn cos_squared_mean_by_quadrature() {
        let d = DriftSpec::new(
            "mixed",
            |x: f64, s: f64| x.sin() * (0.3 + 0.7 * s.cos().powi(2)),
            |_| 1.0,
            1.0,
        )
        .with_period(PI)
        .unwrap();
        for y in [-1.2, 0.4, 2.0] {
            assert!((d.averaged_drift(y).unwrap() - 0.65 * y.sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn no_mean_and_no_period_is_unsupported() {
        let d = decaying().without_mean();
        assert!(matches!(
            d.averaged_drift(0.3),
            Err(Error::UnsupportedDrift)
        ));
        assert!(matches!(
            d.g_function(0.3, 1.0),
            Err(Error::UnsupportedDrift)
        ));
    }

    #[test]
    fn wrong_period_is_rejected() {
        let d = DriftSpec::new("cos", |_, s: f64| s.cos(), |_| 0.0, 1.0);
        assert!(d.with_period(3.0).is_err());
    }

    #[test]
    fn g_closed_forms() {
        let d = sin_cos();
        for (y, r) in [(0.5, 1.0), (1.3, 7.7), (-0.4, 40.0)] {
            let g = d.g_function(y, r).unwrap();
            assert!((g - y.sin() * r.sin()).abs() < 1e-8, "{g}");
            assert!(g.abs() <= 1.0 + 1e-12);
        }
        assert_eq!(d.g_function(0.5, 0.0).unwrap(), 0.0);
        let d = decaying();
        for (y, r) in [(0.5, 1.0), (1.3, 50.0)] {
            let g = d.g_function(y, r).unwrap();
            assert!((g + y.sin() * (1.0 + r).ln()).abs() < 1e-8, "{g}");
        }
    }

    #[test]
    fn g_vanishes_at_whole_periods() {
        let d = sin_cos();
        for k in 1..5 {
            assert!(d.g_function(0.9, k as f64 * 2.0 * PI).unwrap().abs() < 1e-8);
        }
    }

    #[test]
    fn a4_scan_verdicts() {
        let probes = [-1.5, -0.5, 0.5, 1.5];
        let r = sin_cos().check_a4(&probes, 1e3, 0.01).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!((r.sup - 1.5f64.sin()).abs() < 1e-3, "{}", r.sup);

        let r = decaying().check_a4(&probes, 1e3, 0.01).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(r.trace.windows(2).all(|w| w[1].1 >= w[0].1));
        assert!((r.sup - 1.5f64.sin() * 1001f64.ln()).abs() < 1e-6);

        let flat = DriftSpec::new("flat", |x: f64, _| x.sin(), |_| 1.0, 1.0).with_mean(f64::sin);
        let r = flat.check_a4(&probes, 1e3, 0.01).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert_eq!(r.sup, 0.0);
    }

    #[test]
    fn averaged_drift_inherits_bounds() {
        let d = sin_cos().without_mean();
        let mixed = DriftSpec::new(
            "mixed",
            |x: f64, s: f64| x.sin() * (0.3 + 0.7 * s.cos().powi(2)),
            |_| 1.0,
            1.0,
        )
        .with_period(PI)
        .unwrap();
        for d in [d, mixed] {
            let ys: Vec<f64> = (-20..=20).map(|i| i as f64 * 0.15).collect();
            for &x in &ys {
                let bx = d.averaged_drift(x).unwrap();
                assert!(bx.abs() <= d.sup_bound);
                for &y in &ys {
                    let by = d.averaged_drift(y).unwrap();
                    let c = x.abs().max(y.abs());
                    assert!((bx - by).abs() <= d.lipschitz(c) * (x - y).abs() + 1e-14);
                }
            }
        }
    }

    #[test]
    fn sup_bound_enforced_on_eval() {
        let d = DriftSpec::new("big", |_, _| 2.0, |_| 0.0, 1.0);
        assert!(d.eval(0.0, 0.0).is_err());
        assert_eq!(sin_cos().eval(PI / 2.0, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn constant_in_s_mean_is_exact() {
        let d = DriftSpec::new("x", |x: f64, _| x.tanh(), |_| 1.0, 1.0)
            .with_period(1.0)
            .unwrap();
        for y in [-2.0, 0.1, 1.5] {
            assert!((d.averaged_drift(y).unwrap() - y.tanh()).abs() < 1e-14);
        }
    }
}
