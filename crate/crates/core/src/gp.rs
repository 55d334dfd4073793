//! Exact Gaussian-process regression with a squared-exponential ARD kernel.
//!
//! The surrogate caches the Cholesky factor of `K + σ²I` and the weight
//! vector `(K + σ²I)⁻¹ y`, so prediction costs one kernel row and one
//! triangular solve.

use crate::linalg::{dot, solve_lower, solve_lower_transpose, Matrix};
use crate::{Error, Result, Scalar};

const JITTER_START: f64 = 1e-10;
const JITTER_MAX: f64 = 1e-4;

/// Lengthscale multipliers (of the per-dimension input range) in the default grid.
pub const LENGTHSCALE_FACTORS: [f64; 5] = [0.05, 0.1, 0.2, 0.5, 1.0];
pub const NOISE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct KernelParams<T> {
    signal_variance: T,
    lengthscales: Vec<T>,
    noise_variance: T,
}

impl<T: Scalar> KernelParams<T> {
    pub fn new(signal_variance: T, lengthscales: Vec<T>, noise_variance: T) -> Result<Self> {
        if !(signal_variance > T::zero()) || !signal_variance.is_finite() {
            return Err(Error::config(format!("signal variance {signal_variance} must be positive")));
        }
        if lengthscales.is_empty() {
            return Err(Error::config("at least one lengthscale required"));
        }
        if let Some(l) = lengthscales.iter().find(|l| !(**l > T::zero()) || !l.is_finite()) {
            return Err(Error::config(format!("lengthscale {l} must be positive")));
        }
        if !(noise_variance >= T::zero()) || !noise_variance.is_finite() {
            return Err(Error::config(format!("noise variance {noise_variance} must be non-negative")));
        }
        Ok(Self {
            signal_variance,
            lengthscales,
            noise_variance,
        })
    }

    pub fn signal_variance(&self) -> T {
        self.signal_variance
    }

    pub fn lengthscales(&self) -> &[T] {
        &self.lengthscales
    }

    pub fn noise_variance(&self) -> T {
        self.noise_variance
    }

    pub fn dim(&self) -> usize {
        self.lengthscales.len()
    }
}

/// `s² · exp(-½ Σ_d ((x_d - x2_d) / ℓ_d)²)`
pub fn kernel<T: Scalar>(x: &[T], x2: &[T], params: &KernelParams<T>) -> T {
    debug_assert_eq!(x.len(), params.dim());
    debug_assert_eq!(x2.len(), params.dim());
    let r2: T = x
        .iter()
        .zip(x2)
        .zip(&params.lengthscales)
        .map(|((&a, &b), &l)| {
            let d = (a - b) / l;
            d * d
        })
        .sum();
    params.signal_variance * (-T::lit(0.5) * r2).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction<T> {
    pub mean: T,
    pub variance: T,
}

impl<T: Scalar> Prediction<T> {
    pub fn std_dev(&self) -> T {
        self.variance.max(T::zero()).sqrt()
    }
}

/// Affine map between raw targets and the zero-mean, unit-variance scale
/// the surrogate is fitted on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetScaling<T> {
    pub offset: T,
    pub scale: T,
}

impl<T: Scalar> TargetScaling<T> {
    pub fn identity() -> Self {
        Self {
            offset: T::zero(),
            scale: T::one(),
        }
    }

    /// Sample mean and sample standard deviation of `y`. Falls back to unit
    /// scale for a single target or a constant sequence.
    pub fn from_targets(y: &[T]) -> Self {
        let n = y.len();
        if n == 0 {
            return Self::identity();
        }
        let count = T::from_usize(n).expect("count fits scalar");
        let offset = y.iter().copied().sum::<T>() / count;
        if n < 2 {
            return Self { offset, scale: T::one() };
        }
        let var = y.iter().map(|&v| (v - offset) * (v - offset)).sum::<T>() / (count - T::one());
        let std = var.sqrt();
        let tiny = T::lit(1e-12) * offset.abs().max(T::one());
        let scale = if std > tiny { std } else { T::one() };
        Self { offset, scale }
    }

    pub fn forward(&self, v: T) -> T {
        (v - self.offset) / self.scale
    }
}

#[derive(Debug, Clone)]
pub struct GpSurrogate<T> {
    inputs: Vec<Vec<T>>,
    targets: Vec<T>,
    params: KernelParams<T>,
    scaling: TargetScaling<T>,
    jitter: T,
    chol: Matrix<T>,
    alpha: Vec<T>,
}

impl<T: Scalar> GpSurrogate<T> {
    /// Zero-mean fit on the targets as given.
    pub fn fit(inputs: Vec<Vec<T>>, targets: Vec<T>, params: KernelParams<T>) -> Result<Self> {
        Self::fit_scaled(inputs, targets, params, TargetScaling::identity())
    }

    /// Fits on standardized targets; `predict` maps back to the raw scale.
    pub fn fit_standardized(inputs: Vec<Vec<T>>, targets: Vec<T>, params: KernelParams<T>) -> Result<Self> {
        let scaling = TargetScaling::from_targets(&targets);
        Self::fit_scaled(inputs, targets, params, scaling)
    }

    fn fit_scaled(
        inputs: Vec<Vec<T>>,
        targets: Vec<T>,
        params: KernelParams<T>,
        scaling: TargetScaling<T>,
    ) -> Result<Self> {
        validate_data(&inputs, &targets, &params)?;
        let gram = gram_matrix(&inputs, &params);
        let (chol, jitter) = factorize(&gram)?;
        let alpha = solve_weights(&chol, &targets, &scaling);
        Ok(Self {
            inputs,
            targets,
            params,
            scaling,
            jitter,
            chol,
            alpha,
        })
    }

    /// Returns the surrogate conditioned on one more observation, extending
    /// the cached factor by a row when possible.
    pub fn with_observation(&self, x: Vec<T>, y: T) -> Result<Self> {
        let standardized = self.scaling != TargetScaling::identity();
        let mut inputs = self.inputs.clone();
        let mut targets = self.targets.clone();
        inputs.push(x);
        targets.push(y);
        let scaling = if standardized {
            TargetScaling::from_targets(&targets)
        } else {
            TargetScaling::identity()
        };
        validate_data(&inputs, &targets, &self.params)?;

        let xnew = inputs.last().expect("just pushed");
        let t = self.inputs.len();
        if self.jitter == T::zero() {
            let kvec: Vec<T> = self.inputs.iter().map(|xi| kernel(xi, xnew, &self.params)).collect();
            let row = solve_lower(&self.chol, &kvec);
            let d = kernel(xnew, xnew, &self.params) + self.params.noise_variance - dot(&row, &row);
            if d > T::zero() {
                let mut chol = Matrix::zeros(t + 1, t + 1);
                for i in 0..t {
                    for j in 0..=i {
                        chol[(i, j)] = self.chol[(i, j)];
                    }
                }
                for (j, &v) in row.iter().enumerate() {
                    chol[(t, j)] = v;
                }
                chol[(t, t)] = d.sqrt();
                let alpha = solve_weights(&chol, &targets, &scaling);
                return Ok(Self {
                    inputs,
                    targets,
                    params: self.params.clone(),
                    scaling,
                    jitter: T::zero(),
                    chol,
                    alpha,
                });
            }
        }
        Self::fit_scaled(inputs, targets, self.params.clone(), scaling)
    }

    pub fn predict(&self, xstar: &[T]) -> Prediction<T> {
        let kstar: Vec<T> = self.inputs.iter().map(|xi| kernel(xi, xstar, &self.params)).collect();
        let mean = dot(&kstar, &self.alpha);
        let v = solve_lower(&self.chol, &kstar);
        let variance = (kernel(xstar, xstar, &self.params) - dot(&v, &v)).max(T::zero());
        Prediction {
            mean: mean * self.scaling.scale + self.scaling.offset,
            variance: variance * self.scaling.scale * self.scaling.scale,
        }
    }

    /// Log evidence of the (scaled) targets under the fitted kernel.
    pub fn log_marginal_likelihood(&self) -> T {
        let y: Vec<T> = self.targets.iter().map(|&v| self.scaling.forward(v)).collect();
        let t = T::from_usize(y.len()).expect("count fits scalar");
        let log_det_half: T = (0..self.chol.rows()).map(|i| self.chol[(i, i)].ln()).sum();
        -T::lit(0.5) * dot(&y, &self.alpha) - log_det_half - t / T::lit(2.0) * (T::lit(2.0) * T::PI()).ln()
    }

    pub fn inputs(&self) -> &[Vec<T>] {
        &self.inputs
    }

    pub fn targets(&self) -> &[T] {
        &self.targets
    }

    pub fn params(&self) -> &KernelParams<T> {
        &self.params
    }

    pub fn scaling(&self) -> TargetScaling<T> {
        self.scaling
    }

    /// Diagonal jitter added on top of the noise variance (zero unless the
    /// plain factorization failed).
    pub fn jitter(&self) -> T {
        self.jitter
    }

    pub fn cholesky(&self) -> &Matrix<T> {
        &self.chol
    }

    pub fn alpha(&self) -> &[T] {
        &self.alpha
    }

    pub fn dim(&self) -> usize {
        self.params.dim()
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }
}

fn validate_data<T: Scalar>(inputs: &[Vec<T>], targets: &[T], params: &KernelParams<T>) -> Result<()> {
    if inputs.is_empty() {
        return Err(Error::input("surrogate needs at least one observation"));
    }
    if inputs.len() != targets.len() {
        return Err(Error::input(format!(
            "{} inputs but {} targets",
            inputs.len(),
            targets.len()
        )));
    }
    if let Some(x) = inputs.iter().find(|x| x.len() != params.dim()) {
        return Err(Error::input(format!(
            "input of dimension {} for a {}-dimensional kernel",
            x.len(),
            params.dim()
        )));
    }
    if inputs.iter().flatten().chain(targets).any(|v| !v.is_finite()) {
        return Err(Error::input("non-finite training data"));
    }
    Ok(())
}

/// `K + σ²I`
fn gram_matrix<T: Scalar>(inputs: &[Vec<T>], params: &KernelParams<T>) -> Matrix<T> {
    let n = inputs.len();
    let mut k = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..i {
            let v = kernel(&inputs[i], &inputs[j], params);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
        k[(i, i)] = params.signal_variance + params.noise_variance;
    }
    k
}

/// Cholesky with diagonal jitter escalation 1e-10, 1e-9, ..., 1e-4.
fn factorize<T: Scalar>(gram: &Matrix<T>) -> Result<(Matrix<T>, T)> {
    if let Some(l) = gram.cholesky() {
        return Ok((l, T::zero()));
    }
    let mut jitter = JITTER_START;
    while jitter <= JITTER_MAX * (1.0 + 1e-9) {
        let mut g = gram.clone();
        for i in 0..g.rows() {
            g[(i, i)] = g[(i, i)] + T::lit(jitter);
        }
        if let Some(l) = g.cholesky() {
            return Ok((l, T::lit(jitter)));
        }
        jitter *= 10.0;
    }
    Err(Error::NumericalConditioning(format!(
        "covariance of {} points not positive definite even with jitter {JITTER_MAX:e}",
        gram.rows()
    )))
}

fn solve_weights<T: Scalar>(chol: &Matrix<T>, targets: &[T], scaling: &TargetScaling<T>) -> Vec<T> {
    let y: Vec<T> = targets.iter().map(|&v| scaling.forward(v)).collect();
    solve_lower_transpose(chol, &solve_lower(chol, &y))
}

/// Grid member with the highest log marginal likelihood on `(inputs, targets)`
/// (zero-mean, targets as given). Ties keep the earliest member; members whose
/// factorization fails are skipped.
pub fn select_hyperparams<T: Scalar>(
    inputs: &[Vec<T>],
    targets: &[T],
    grid: &[KernelParams<T>],
) -> Result<KernelParams<T>> {
    if grid.is_empty() {
        return Err(Error::config("empty hyperparameter grid"));
    }
    let mut best: Option<(T, &KernelParams<T>)> = None;
    let mut last_err = None;
    for params in grid {
        match GpSurrogate::fit(inputs.to_vec(), targets.to_vec(), params.clone()) {
            Ok(gp) => {
                let lml = gp.log_marginal_likelihood();
                if best.is_none_or(|(b, _)| lml > b) {
                    best = Some((lml, params));
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    match best {
        Some((_, p)) => Ok(p.clone()),
        None => Err(last_err.expect("non-empty grid produced an error")),
    }
}

/// Full product grid over per-dimension lengthscales
/// `LENGTHSCALE_FACTORS · range_d`, with a fixed signal and noise variance.
pub fn default_grid<T: Scalar>(ranges: &[T], signal_variance: T, noise_variance: T) -> Result<Vec<KernelParams<T>>> {
    let mut combos: Vec<Vec<T>> = vec![Vec::new()];
    for &range in ranges {
        combos = combos
            .into_iter()
            .flat_map(|prefix| {
                LENGTHSCALE_FACTORS.iter().map(move |&f| {
                    let mut v = prefix.clone();
                    v.push(T::lit(f) * range);
                    v
                })
            })
            .collect();
    }
    combos
        .into_iter()
        .map(|ls| KernelParams::new(signal_variance, ls, noise_variance))
        .collect()
}
