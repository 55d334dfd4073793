//! Sequential Bayesian optimization and the random-search baseline.
//!
//! Both methods search the unit box `[0, 1]^N`; a box point is mapped onto
//! the weight simplex by [`box_to_simplex`] before the objective sees it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::acquisition::{maximize_acquisition, AcquisitionSpec};
use crate::gp::{default_grid, select_hyperparams, GpSurrogate, TargetScaling, NOISE_FLOOR};
use crate::objective::{PortfolioObjective, PortfolioWeights};
use crate::{Error, Result, Scalar};

const DEGENERATE_SUM: f64 = 1e-12;

/// Something the optimizer can query at a point of the unit box.
pub trait Objective<T: Scalar>: Sync {
    fn dim(&self) -> usize;
    fn evaluate(&self, point: &[T]) -> Result<T>;
}

impl<T: Scalar> Objective<T> for PortfolioObjective<T> {
    fn dim(&self) -> usize {
        self.n_assets()
    }

    fn evaluate(&self, point: &[T]) -> Result<T> {
        PortfolioObjective::evaluate(self, &box_to_simplex(point))
    }
}

/// Wraps a closure over box points.
pub struct FnObjective<F> {
    dim: usize,
    f: F,
}

impl<F> FnObjective<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<T: Scalar, F: Fn(&[T]) -> Result<T> + Sync> Objective<T> for FnObjective<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn evaluate(&self, point: &[T]) -> Result<T> {
        (self.f)(point)
    }
}

/// `w_i = u_i / Σ u_j`, or uniform weights when the box point is (numerically) zero.
pub fn box_to_simplex<T: Scalar>(u: &[T]) -> PortfolioWeights<T> {
    let sum: T = u.iter().copied().sum();
    if !(sum >= T::lit(DEGENERATE_SUM)) {
        return PortfolioWeights::uniform(u.len());
    }
    let w: Vec<T> = u.iter().map(|&x| x.max(T::zero()) / sum).collect();
    PortfolioWeights::new(w).unwrap_or_else(|_| PortfolioWeights::uniform(u.len()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig<T> {
    pub budget: usize,
    pub n_assets: usize,
    pub acquisition: AcquisitionSpec<T>,
    pub seed: u64,
    pub n_acq_candidates: usize,
    /// Evaluations per random-search run; `None` uses `budget`.
    pub random_search_draws: Option<usize>,
}

impl<T: Scalar> RunConfig<T> {
    pub fn new(n_assets: usize, seed: u64) -> Self {
        Self {
            budget: 25,
            n_assets,
            acquisition: AcquisitionSpec::default(),
            seed,
            n_acq_candidates: 1000,
            random_search_draws: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.budget < 1 {
            return Err(Error::config("budget must be at least 1"));
        }
        if self.n_assets < 2 {
            return Err(Error::config(format!("need at least 2 assets, got {}", self.n_assets)));
        }
        if self.n_acq_candidates < 1 {
            return Err(Error::config("n_acq_candidates must be at least 1"));
        }
        if self.random_search_draws == Some(0) {
            return Err(Error::config("random_search_draws must be at least 1"));
        }
        self.acquisition.validate()
    }

    pub fn random_search_budget(&self) -> usize {
        self.random_search_draws.unwrap_or(self.budget)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation<T> {
    pub point: Vec<T>,
    pub weights: PortfolioWeights<T>,
    pub fitness: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace<T> {
    evaluations: Vec<Evaluation<T>>,
    best_so_far: Vec<T>,
    best_index: usize,
}

impl<T: Scalar> RunTrace<T> {
    /// Builds the trace from evaluations in order; `None` if there are none.
    pub fn from_evaluations(evaluations: Vec<Evaluation<T>>) -> Option<Self> {
        let first = evaluations.first()?.fitness;
        let mut best_so_far = Vec::with_capacity(evaluations.len());
        let mut best = first;
        let mut best_index = 0;
        for (i, e) in evaluations.iter().enumerate() {
            if e.fitness > best {
                best = e.fitness;
                best_index = i;
            }
            best_so_far.push(best);
        }
        Some(Self {
            evaluations,
            best_so_far,
            best_index,
        })
    }

    pub fn evaluations(&self) -> &[Evaluation<T>] {
        &self.evaluations
    }

    pub fn best_so_far(&self) -> &[T] {
        &self.best_so_far
    }

    pub fn best_fitness(&self) -> T {
        self.evaluations[self.best_index].fitness
    }

    /// Best observed portfolio.
    pub fn recommendation(&self) -> &PortfolioWeights<T> {
        &self.evaluations[self.best_index].weights
    }

    pub fn best_index(&self) -> usize {
        self.best_index
    }

    pub fn len(&self) -> usize {
        self.evaluations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.evaluations.is_empty()
    }
}

/// A run aborted by an error, carrying whatever was evaluated before it.
#[derive(Debug, Error)]
#[error("run aborted after {} evaluations: {source}", partial.len())]
pub struct RunError<T: Scalar> {
    #[source]
    pub source: Error,
    pub partial: Vec<Evaluation<T>>,
}

fn uniform_point<T: Scalar, R: Rng>(rng: &mut R, dim: usize) -> Vec<T> {
    (0..dim).map(|_| T::lit(rng.random::<f64>())).collect()
}

fn check<T: Scalar, O: Objective<T> + ?Sized>(objective: &O, cfg: &RunConfig<T>) -> Result<(), RunError<T>> {
    let fail = |source| RunError {
        source,
        partial: Vec::new(),
    };
    cfg.validate().map_err(fail)?;
    if objective.dim() != cfg.n_assets {
        return Err(fail(Error::config(format!(
            "objective has dimension {} but run config says {}",
            objective.dim(),
            cfg.n_assets
        ))));
    }
    Ok(())
}

fn evaluate_into<T: Scalar, O: Objective<T> + ?Sized>(
    objective: &O,
    point: Vec<T>,
    evaluations: &mut Vec<Evaluation<T>>,
) -> Result<(), RunError<T>> {
    match objective.evaluate(&point) {
        Ok(fitness) if fitness.is_finite() => {
            let weights = box_to_simplex(&point);
            evaluations.push(Evaluation {
                point,
                weights,
                fitness,
            });
            Ok(())
        }
        Ok(fitness) => Err(RunError {
            source: Error::Objective(format!("non-finite fitness {fitness}")),
            partial: std::mem::take(evaluations),
        }),
        Err(source) => Err(RunError {
            source,
            partial: std::mem::take(evaluations),
        }),
    }
}

/// Fits the surrogate to standardized observations, choosing kernel
/// lengthscales by marginal likelihood over the default grid.
pub fn fit_surrogate<T: Scalar>(inputs: &[Vec<T>], targets: &[T]) -> Result<GpSurrogate<T>> {
    let dim = inputs.first().map_or(0, Vec::len);
    let scaling = TargetScaling::from_targets(targets);
    let standardized: Vec<T> = targets.iter().map(|&y| scaling.forward(y)).collect();
    let grid = default_grid(&vec![T::one(); dim], T::one(), T::lit(NOISE_FLOOR))?;
    let params = select_hyperparams(inputs, &standardized, &grid)?;
    GpSurrogate::fit_standardized(inputs.to_vec(), targets.to_vec(), params)
}

/// Bayesian optimization: one uniform random evaluation, then `budget - 1`
/// rounds of refit-surrogate / maximize-acquisition / evaluate.
pub fn bo_run<T: Scalar, O: Objective<T> + ?Sized>(objective: &O, cfg: &RunConfig<T>) -> Result<RunTrace<T>, RunError<T>> {
    check(objective, cfg)?;
    let dim = cfg.n_assets;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut evaluations: Vec<Evaluation<T>> = Vec::with_capacity(cfg.budget);

    let first = uniform_point(&mut rng, dim);
    evaluate_into(objective, first, &mut evaluations)?;

    for _ in 1..cfg.budget {
        let inputs: Vec<Vec<T>> = evaluations.iter().map(|e| e.point.clone()).collect();
        let targets: Vec<T> = evaluations.iter().map(|e| e.fitness).collect();
        let gp = match fit_surrogate(&inputs, &targets) {
            Ok(gp) => gp,
            Err(source) => {
                return Err(RunError {
                    source,
                    partial: evaluations,
                })
            }
        };
        let incumbent = targets.iter().copied().fold(T::neg_infinity(), T::max);
        let next = maximize_acquisition(&gp, &cfg.acquisition, incumbent, dim, &mut rng, cfg.n_acq_candidates);
        evaluate_into(objective, next, &mut evaluations)?;
    }
    Ok(RunTrace::from_evaluations(evaluations).expect("budget >= 1"))
}

/// Independent uniform draws from the box, mapped and evaluated.
pub fn random_search_run<T: Scalar, O: Objective<T> + ?Sized>(
    objective: &O,
    cfg: &RunConfig<T>,
) -> Result<RunTrace<T>, RunError<T>> {
    check(objective, cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let draws = cfg.random_search_budget();
    let mut evaluations = Vec::with_capacity(draws);
    for _ in 0..draws {
        let point = uniform_point(&mut rng, cfg.n_assets);
        evaluate_into(objective, point, &mut evaluations)?;
    }
    Ok(RunTrace::from_evaluations(evaluations).expect("draws >= 1"))
}
