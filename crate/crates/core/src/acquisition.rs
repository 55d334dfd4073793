//! Acquisition functions over the surrogate's predictive distribution and
//! their maximization over the unit box.

use rand::Rng;
use rayon::prelude::*;

use crate::gp::{GpSurrogate, Prediction};
use crate::scalar::{normal_cdf, normal_pdf};
use crate::{Error, Result, Scalar};

const REFINE_STARTS: usize = 5;
const REFINE_INITIAL_STEP: f64 = 0.1;
const REFINE_HALVINGS: usize = 8;
const REFINE_MAX_SWEEPS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AcquisitionKind {
    ExpectedImprovement,
    UpperConfidenceBound,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcquisitionSpec<T> {
    pub kind: AcquisitionKind,
    pub ei_epsilon: T,
    pub ucb_beta: T,
}

impl<T: Scalar> Default for AcquisitionSpec<T> {
    fn default() -> Self {
        Self {
            kind: AcquisitionKind::UpperConfidenceBound,
            ei_epsilon: T::lit(0.01),
            ucb_beta: T::lit(2.0),
        }
    }
}

impl<T: Scalar> AcquisitionSpec<T> {
    pub fn ucb(beta: T) -> Self {
        Self {
            kind: AcquisitionKind::UpperConfidenceBound,
            ucb_beta: beta,
            ..Self::default()
        }
    }

    pub fn ei(epsilon: T) -> Self {
        Self {
            kind: AcquisitionKind::ExpectedImprovement,
            ei_epsilon: epsilon,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ei_epsilon >= T::zero()) || !self.ei_epsilon.is_finite() {
            return Err(Error::config(format!("ei_epsilon {} must be >= 0", self.ei_epsilon)));
        }
        if !(self.ucb_beta > T::zero()) || !self.ucb_beta.is_finite() {
            return Err(Error::config(format!("ucb_beta {} must be > 0", self.ucb_beta)));
        }
        Ok(())
    }

    pub fn evaluate(&self, pred: &Prediction<T>, incumbent: T) -> T {
        match self.kind {
            AcquisitionKind::ExpectedImprovement => expected_improvement(pred, incumbent, self.ei_epsilon),
            AcquisitionKind::UpperConfidenceBound => upper_confidence_bound(pred, self.ucb_beta),
        }
    }
}

/// Expected improvement over `incumbent + epsilon` for a maximization problem.
pub fn expected_improvement<T: Scalar>(pred: &Prediction<T>, incumbent: T, epsilon: T) -> T {
    let s = pred.std_dev();
    let gap = pred.mean - incumbent - epsilon;
    if s == T::zero() {
        return gap.max(T::zero());
    }
    let z = gap / s;
    (gap * normal_cdf(z) + s * normal_pdf(z)).max(T::zero())
}

pub fn upper_confidence_bound<T: Scalar>(pred: &Prediction<T>, beta: T) -> T {
    pred.mean + beta * pred.std_dev()
}

/// Multi-start maximization over `[0, 1]^dim`: score `n_candidates` uniform
/// draws, then hill-climb coordinate-wise from the best few. Deterministic
/// for a given generator state.
pub fn maximize_acquisition<T: Scalar, R: Rng + ?Sized>(
    gp: &GpSurrogate<T>,
    spec: &AcquisitionSpec<T>,
    incumbent: T,
    dim: usize,
    rng: &mut R,
    n_candidates: usize,
) -> Vec<T> {
    assert!(n_candidates >= 1, "need at least one acquisition candidate");
    assert_eq!(dim, gp.dim(), "box dimension differs from surrogate dimension");
    let score = |x: &[T]| -> T {
        let v = spec.evaluate(&gp.predict(x), incumbent);
        if v.is_nan() {
            T::neg_infinity()
        } else {
            v
        }
    };

    let candidates: Vec<Vec<T>> = (0..n_candidates)
        .map(|_| (0..dim).map(|_| T::lit(rng.random::<f64>())).collect())
        .collect();
    let values: Vec<T> = candidates.par_iter().map(|c| score(c)).collect();

    let mut order: Vec<usize> = (0..n_candidates).collect();
    // stable sort keeps the lowest index first among equal scores
    order.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).expect("scores are not NaN"));

    let mut best: Option<(Vec<T>, T)> = None;
    for &start in order.iter().take(REFINE_STARTS) {
        let (x, v) = hill_climb(candidates[start].clone(), values[start], &score);
        if best.as_ref().is_none_or(|(_, bv)| v > *bv) {
            best = Some((x, v));
        }
    }
    best.expect("at least one start").0
}

fn hill_climb<T: Scalar>(mut x: Vec<T>, mut value: T, score: &impl Fn(&[T]) -> T) -> (Vec<T>, T) {
    let mut step = T::lit(REFINE_INITIAL_STEP);
    for _level in 0..=REFINE_HALVINGS {
        for _sweep in 0..REFINE_MAX_SWEEPS {
            let mut improved = false;
            for d in 0..x.len() {
                for dir in [T::one(), -T::one()] {
                    let moved = (x[d] + dir * step).max(T::zero()).min(T::one());
                    if moved == x[d] {
                        continue;
                    }
                    let mut cand = x.clone();
                    cand[d] = moved;
                    let v = score(&cand);
                    if v > value {
                        x = cand;
                        value = v;
                        improved = true;
                        break;
                    }
                }
            }
            if !improved {
                break;
            }
        }
        step = step / T::lit(2.0);
    }
    (x, value)
}
