mod common;

use esgbo::acquisition::{expected_improvement, maximize_acquisition, upper_confidence_bound, AcquisitionSpec};
use esgbo::gp::{GpSurrogate, KernelParams, Prediction};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pred(mean: f64, sd: f64) -> Prediction<f64> {
    Prediction { mean, variance: sd * sd }
}

#[test]
fn ei_matches_monte_carlo_on_a_few_tuples() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (mean, sd, inc, eps) in [(0.0, 1.0, 0.0, 0.0), (1.5, 0.1, 1.6, 0.01), (0.2, 0.5, -0.3, 0.05)] {
        let (est, se) = common::mc_expected_improvement(mean, sd, inc, eps, 200_000, &mut rng);
        let ei = expected_improvement(&pred(mean, sd), inc, eps);
        assert!((ei - est).abs() <= 3.0 * se, "EI {ei} vs MC {est} ± {se}");
    }
}

/// Surrogate with one clear bump near (0.7, 0.3).
fn bump_surrogate() -> GpSurrogate<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let x: Vec<Vec<f64>> = (0..20).map(|_| vec![rng.random(), rng.random()]).chain([vec![0.7, 0.3]]).collect();
    let y: Vec<f64> = x
        .iter()
        .map(|p| 2.0 * (-((p[0] - 0.7f64).powi(2) + (p[1] - 0.3f64).powi(2)) / 0.03).exp())
        .collect();
    GpSurrogate::fit(x, y, KernelParams::new(1.0, vec![0.2, 0.2], 1e-6).unwrap()).unwrap()
}

#[test]
fn maximizer_agrees_with_dense_grid() {
    let gp = bump_surrogate();
    for spec in [AcquisitionSpec::ucb(2.0), AcquisitionSpec::ei(0.01)] {
        let incumbent = 1.9;
        let mut best = (f64::NEG_INFINITY, [0.0, 0.0]);
        for i in 0..100 {
            for j in 0..100 {
                let p = [i as f64 / 99.0, j as f64 / 99.0];
                let v = spec.evaluate(&gp.predict(&p), incumbent);
                if v > best.0 {
                    best = (v, p);
                }
            }
        }
        let found = maximize_acquisition(&gp, &spec, incumbent, 2, &mut ChaCha8Rng::seed_from_u64(1), 500);
        let dist = (found[0] - best.1[0]).abs().max((found[1] - best.1[1]).abs());
        assert!(dist <= 0.05, "{spec:?}: found {found:?}, grid {:?}", best.1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn ei_non_negative_and_monotone(mean in -3.0f64..3.0, sd in 0.0f64..2.0, inc in -3.0f64..3.0, eps in 0.0f64..0.1, dm in 0.0f64..1.0) {
        let a = expected_improvement(&pred(mean, sd), inc, eps);
        prop_assert!(a >= 0.0);
        prop_assert!(expected_improvement(&pred(mean + dm, sd), inc, eps) >= a - 1e-15);
        if sd == 0.0 && mean <= inc + eps {
            prop_assert_eq!(a, 0.0);
        }
    }

    #[test]
    fn ei_grows_with_uncertainty(mean in -2.0f64..2.0, sd in 0.01f64..2.0, inc in -2.0f64..2.0, ds in 0.0f64..1.0) {
        prop_assert!(expected_improvement(&pred(mean, sd + ds), inc, 0.01) >= expected_improvement(&pred(mean, sd), inc, 0.01) - 1e-15);
    }

    #[test]
    fn ucb_properties(mean in -3.0f64..3.0, var in 0.0f64..4.0, beta in 0.0f64..5.0, db in 0.0f64..2.0) {
        let p = Prediction { mean, variance: var };
        prop_assert!(upper_confidence_bound(&p, beta + db) >= upper_confidence_bound(&p, beta));
        prop_assert_eq!(upper_confidence_bound(&p, 0.0), mean);
    }

    #[test]
    fn maximizer_stays_in_box(seed in any::<u64>(), n in 1usize..50) {
        let gp = bump_surrogate();
        let x = maximize_acquisition(&gp, &AcquisitionSpec::ucb(3.0), 1.0, 2, &mut ChaCha8Rng::seed_from_u64(seed), n);
        prop_assert!(x.iter().all(|v| (0.0..=1.0).contains(v)));
    }
}
