mod common;

use common::{dense_log_marginal_likelihood, dense_predict};
use esgbo::gp::{default_grid, select_hyperparams, GpSurrogate, KernelParams};
use esgbo::linalg::Matrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

struct Instance {
    x: Vec<Vec<f64>>,
    y: Vec<f64>,
    signal: f64,
    ls: Vec<f64>,
    noise: f64,
}

fn random_instance(rng: &mut ChaCha8Rng, max_t: usize, max_d: usize, noise_lo: f64) -> Instance {
    let t = rng.random_range(1..=max_t);
    let d = rng.random_range(1..=max_d);
    Instance {
        x: (0..t).map(|_| (0..d).map(|_| rng.random()).collect()).collect(),
        y: (0..t).map(|_| rng.random_range(-2.0..2.0)).collect(),
        signal: rng.random_range(0.5..2.0),
        ls: (0..d).map(|_| rng.random_range(0.1..1.0)).collect(),
        noise: rng.random_range(noise_lo..0.1),
    }
}

impl Instance {
    fn params(&self) -> KernelParams<f64> {
        KernelParams::new(self.signal, self.ls.clone(), self.noise).unwrap()
    }
}

#[test]
fn predictions_match_dense_inverse() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for _ in 0..100 {
        let inst = random_instance(&mut rng, 5, 3, 1e-3);
        let gp = GpSurrogate::fit(inst.x.clone(), inst.y.clone(), inst.params()).unwrap();
        for _ in 0..5 {
            let xs: Vec<f64> = (0..inst.ls.len()).map(|_| rng.random_range(-0.2..1.2)).collect();
            let (m, v) = dense_predict(&inst.x, &inst.y, inst.signal, &inst.ls, inst.noise, &xs);
            let p = gp.predict(&xs);
            assert!((p.mean - m).abs() < 1e-8, "mean {} vs {}", p.mean, m);
            assert!((p.variance - v.max(0.0)).abs() < 1e-8, "var {} vs {}", p.variance, v);
        }
    }
}

#[test]
fn lml_matches_explicit_determinant() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..50 {
        let mut inst = random_instance(&mut rng, 4, 3, 1e-3);
        while inst.x.len() < 4 {
            inst = random_instance(&mut rng, 4, 3, 1e-3);
        }
        let gp = GpSurrogate::fit(inst.x.clone(), inst.y.clone(), inst.params()).unwrap();
        let oracle = dense_log_marginal_likelihood(&inst.x, &inst.y, inst.signal, &inst.ls, inst.noise);
        assert!((gp.log_marginal_likelihood() - oracle).abs() < 1e-8);
    }
}

#[test]
fn appending_a_row_equals_refitting() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for standardized in [false, true] {
        for _ in 0..20 {
            let inst = random_instance(&mut rng, 7, 3, 1e-4);
            let d = inst.ls.len();
            let xnew: Vec<f64> = (0..d).map(|_| rng.random()).collect();
            let ynew: f64 = rng.random_range(-2.0..2.0);
            let fit = |x: Vec<Vec<f64>>, y: Vec<f64>| {
                if standardized {
                    GpSurrogate::fit_standardized(x, y, inst.params()).unwrap()
                } else {
                    GpSurrogate::fit(x, y, inst.params()).unwrap()
                }
            };
            let grown = fit(inst.x.clone(), inst.y.clone()).with_observation(xnew.clone(), ynew).unwrap();
            let mut x = inst.x.clone();
            let mut y = inst.y.clone();
            x.push(xnew);
            y.push(ynew);
            let scratch = fit(x, y);
            let (a, b) = (grown.cholesky(), scratch.cholesky());
            for i in 0..a.rows() {
                for j in 0..a.cols() {
                    assert!((a[(i, j)] - b[(i, j)]).abs() < 1e-10);
                }
            }
            for (p, q) in grown.alpha().iter().zip(scratch.alpha()) {
                assert!((p - q).abs() < 1e-10);
            }
            let probe: Vec<f64> = (0..d).map(|_| rng.random()).collect();
            assert!((grown.predict(&probe).mean - scratch.predict(&probe).mean).abs() < 1e-10);
        }
    }
}

#[test]
fn fit_is_bitwise_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let inst = random_instance(&mut rng, 8, 3, 1e-4);
    let a = GpSurrogate::fit(inst.x.clone(), inst.y.clone(), inst.params()).unwrap();
    let b = GpSurrogate::fit(inst.x.clone(), inst.y.clone(), inst.params()).unwrap();
    assert_eq!(a.cholesky(), b.cholesky());
    assert_eq!(a.alpha(), b.alpha());
}

#[test]
fn interpolates_noise_free_training_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for _ in 0..20 {
        let inst = random_instance(&mut rng, 6, 3, 0.0);
        // well separated points so K is comfortably positive definite without noise
        let params = KernelParams::new(inst.signal, vec![0.05; inst.ls.len()], 0.0).unwrap();
        let gp = GpSurrogate::fit(inst.x.clone(), inst.y.clone(), params).unwrap();
        if gp.jitter() > 0.0 {
            continue;
        }
        for (x, y) in inst.x.iter().zip(&inst.y) {
            let p = gp.predict(x);
            assert!((p.mean - y).abs() < 1e-8);
            assert!(p.variance <= 1e-8);
        }
    }
}

/// Draws a GP prior sample at `x` with isotropic lengthscale `ls`.
fn sample_prior(x: &[Vec<f64>], ls: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let k = Matrix::from_fn(x.len(), x.len(), |i, j| {
        common::se_kernel(&x[i], &x[j], 1.0, &[ls]) + if i == j { 1e-8 } else { 0.0 }
    });
    let l = k.cholesky().unwrap();
    let z: Vec<f64> = (0..x.len()).map(|_| StandardNormal.sample(rng)).collect();
    l.mul_vec(&z)
}

#[test]
fn selection_recovers_generating_lengthscale() {
    let grid = default_grid(&[1.0], 1.0, 1e-6).unwrap();
    let steps: Vec<f64> = grid.iter().map(|p| p.lengthscales()[0]).collect();
    let truth_idx = steps.iter().position(|&l| l == 0.2).unwrap();
    for seed in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let x: Vec<Vec<f64>> = (0..30).map(|_| vec![rng.random()]).collect();
        let y = sample_prior(&x, 0.2, &mut rng);
        let chosen = select_hyperparams(&x, &y, &grid).unwrap();
        let idx = steps.iter().position(|&l| l == chosen.lengthscales()[0]).unwrap();
        assert!(idx.abs_diff(truth_idx) <= 1, "seed {seed}: picked {}", steps[idx]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn variance_non_negative_and_shrinks_with_data(
        pts in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 2), 1..6),
        extra in prop::collection::vec(0.0f64..1.0, 2),
        probe in prop::collection::vec(-0.5f64..1.5, 2),
    ) {
        let params = KernelParams::new(1.0, vec![0.3, 0.3], 0.0).unwrap();
        let y: Vec<f64> = pts.iter().map(|p| p[0] - p[1]).collect();
        let gp = GpSurrogate::fit(pts.clone(), y.clone(), params.clone()).unwrap();
        let grown = gp.with_observation(extra.clone(), 0.1).unwrap();
        let before = gp.predict(&probe).variance;
        let after = grown.predict(&probe).variance;
        prop_assert!(before >= 0.0 && after >= 0.0);
        if gp.jitter() == 0.0 && grown.jitter() == 0.0 {
            prop_assert!(after <= before + 1e-8, "{} > {}", after, before);
        }
    }
}
