use proptest::prelude::*;

use smavg::noise::generate_wiener;
use smavg::stats::fit_rate;
use smavg::symint::{symmetric_integral, symmetric_prefix_sums};
use smavg::{DiffusionSpec, FlowMap, NoiseGrid};

fn path(seed: u64, n: usize) -> Vec<f64> {
    generate_wiener(&NoiseGrid::new(1.0, n).unwrap(), seed)
        .unwrap()
        .values
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn flow_round_trip(r in -2.0f64..2.0, x in -3.0f64..3.0, c in 1.5f64..4.0) {
        let fm = FlowMap::new(DiffusionSpec::sine_plus(c));
        let z = fm.forward(r, x).unwrap();
        prop_assert!((fm.inverse(r, z).unwrap() - x).abs() < 1e-9);
        prop_assert!((fm.dx(r, x).unwrap() * fm.inverse_dx(r, z).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn flow_is_monotone_in_x(r in -2.0f64..2.0, x in -3.0f64..3.0, h in 1e-3f64..1.0) {
        let fm = FlowMap::new(DiffusionSpec::sine_plus(2.0));
        prop_assert!(fm.forward(r, x + h).unwrap() > fm.forward(r, x).unwrap());
    }

    #[test]
    fn symmetric_integral_is_bilinear(seed in 0u64..1000, a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let eta = path(seed, 256);
        let xi1: Vec<f64> = eta.iter().map(|v| v.cos()).collect();
        let xi2: Vec<f64> = eta.iter().map(|v| v.powi(3)).collect();
        let comb: Vec<f64> = xi1.iter().zip(&xi2).map(|(p, q)| a * p + b * q).collect();
        let lhs = symmetric_integral(&comb, &eta).unwrap();
        let rhs = a * symmetric_integral(&xi1, &eta).unwrap() + b * symmetric_integral(&xi2, &eta).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-10 * (1.0 + lhs.abs()));
    }

    #[test]
    fn prefix_sums_telescope(seed in 0u64..1000) {
        let eta = path(seed, 128);
        let sums = symmetric_prefix_sums(&eta, &eta).unwrap();
        prop_assert_eq!(sums[0], 0.0);
        for (k, s) in sums.iter().enumerate() {
            prop_assert!((s - 0.5 * eta[k] * eta[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn fit_recovers_power_laws(p in 0.1f64..2.0, c in 0.01f64..10.0) {
        let pairs: Vec<(f64, f64)> = (2..8).map(|k| {
            let e = 0.5f64.powi(k);
            (e, c * e.powf(p))
        }).collect();
        let fit = fit_rate(&pairs).unwrap();
        prop_assert!((fit.slope - p).abs() < 1e-10);
        prop_assert!(fit.stderr < 1e-8);
    }
}
