//! ESG-penalized Sharpe-ratio fitness.
//!
//! `fitness = normalize(sharpe) + g(normalize(portfolio_esg))`, both terms
//! clamped to [0, 1], so the fitness lies in [0, 2].

use std::fmt::Display;

use num_traits::Num;

use crate::esg::{portfolio_esg, EsgTotal};
use crate::linalg::dot;
use crate::market_data::ReturnStats;
use crate::{Error, Result, Scalar};

const SIMPLEX_TOL: f64 = 1e-9;

/// A point on the probability simplex: non-negative weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct PortfolioWeights<T>(Vec<T>);

impl<T: Scalar> PortfolioWeights<T> {
    pub fn new(w: Vec<T>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::input("empty weight vector"));
        }
        if let Some(x) = w.iter().find(|x| !(**x >= T::zero() && **x <= T::one())) {
            return Err(Error::input(format!("weight {x} outside [0, 1]")));
        }
        let sum: T = w.iter().copied().sum();
        if (sum - T::one()).abs() > T::lit(SIMPLEX_TOL) {
            return Err(Error::input(format!("weights sum to {sum}, not 1")));
        }
        Ok(Self(w))
    }

    pub fn uniform(n: usize) -> Self {
        let v = T::one() / T::from_usize(n).expect("asset count fits scalar");
        Self(vec![v; n])
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<T> {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveConfig<T> {
    pub risk_free: T,
    pub sharpe_min: T,
    pub sharpe_max: T,
    pub esg_min: T,
    pub esg_max: T,
    pub esg_log_transform: bool,
}

impl<T: Scalar> ObjectiveConfig<T> {
    /// Bounds used in the reference experiment: risk-free 1.2%, Sharpe in
    /// [-60, 3], ESG in [0, 10], no log transform.
    pub fn reference() -> Self {
        Self {
            risk_free: T::lit(0.012),
            sharpe_min: T::lit(-60.0),
            sharpe_max: T::lit(3.0),
            esg_min: T::lit(0.0),
            esg_max: T::lit(10.0),
            esg_log_transform: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sharpe_min < self.sharpe_max) {
            return Err(Error::config(format!(
                "sharpe_min ({}) must be below sharpe_max ({})",
                self.sharpe_min, self.sharpe_max
            )));
        }
        if !(self.esg_min < self.esg_max) {
            return Err(Error::config(format!(
                "esg_min ({}) must be below esg_max ({})",
                self.esg_min, self.esg_max
            )));
        }
        if !self.risk_free.is_finite() {
            return Err(Error::config("risk_free must be finite"));
        }
        Ok(())
    }
}

fn check_dims<T: Scalar>(weights: &PortfolioWeights<T>, stats: &ReturnStats<T>) -> Result<()> {
    if weights.len() != stats.n_assets() {
        return Err(Error::input(format!(
            "{} weights for {} assets",
            weights.len(),
            stats.n_assets()
        )));
    }
    Ok(())
}

/// `(w·r - r_f) / sqrt(wᵀΣw)`; zero portfolio risk is an error.
pub fn sharpe_ratio<T: Scalar>(weights: &PortfolioWeights<T>, stats: &ReturnStats<T>, risk_free: T) -> Result<T> {
    check_dims(weights, stats)?;
    let w = weights.as_slice();
    let variance = stats.covariance().quad_form(w);
    if !(variance > T::zero()) {
        return Err(Error::DegenerateRisk);
    }
    Ok((dot(w, stats.mean_returns()) - risk_free) / variance.sqrt())
}

/// Gradient of the Sharpe ratio with respect to the raw weight vector,
/// treating each coordinate as free (no simplex projection).
pub fn sharpe_gradient<T: Scalar>(weights: &PortfolioWeights<T>, stats: &ReturnStats<T>, risk_free: T) -> Result<Vec<T>> {
    check_dims(weights, stats)?;
    let w = weights.as_slice();
    let cov_w = stats.covariance().mul_vec(w);
    let variance = dot(w, &cov_w);
    if !(variance > T::zero()) {
        return Err(Error::DegenerateRisk);
    }
    let sigma = variance.sqrt();
    let excess = dot(w, stats.mean_returns()) - risk_free;
    let sigma3 = sigma * variance;
    Ok(stats
        .mean_returns()
        .iter()
        .zip(&cov_w)
        .map(|(&r, &cw)| r / sigma - excess * cw / sigma3)
        .collect())
}

/// Min-max scaling clamped to [0, 1].
///
/// Only needs field arithmetic, so it also runs on exact rationals.
pub fn normalize<T>(value: T, lo: T, hi: T) -> Result<T>
where
    T: Num + PartialOrd + Copy + Display,
{
    if !(lo < hi) {
        return Err(Error::config(format!("normalization bounds [{lo}, {hi}] are empty")));
    }
    let u = (value - lo) / (hi - lo);
    Ok(if u < T::zero() {
        T::zero()
    } else if u > T::one() {
        T::one()
    } else {
        u
    })
}

/// `ln(1 + u(e - 1))`: concave, maps [0, 1] onto [0, 1], and penalizes low
/// normalized ESG more steeply than high.
pub fn log_esg_transform<T: Scalar>(u: T) -> T {
    (T::one() + u * (T::E() - T::one())).ln().max(T::zero()).min(T::one())
}

/// The ESG-penalized, normalized Sharpe fitness in [0, 2].
pub fn fitness<T: Scalar>(
    weights: &PortfolioWeights<T>,
    stats: &ReturnStats<T>,
    esg_totals: &[EsgTotal<T>],
    cfg: &ObjectiveConfig<T>,
) -> Result<T> {
    cfg.validate()?;
    let sharpe = sharpe_ratio(weights, stats, cfg.risk_free)?;
    let sharpe_term = normalize(sharpe, cfg.sharpe_min, cfg.sharpe_max)?;
    let esg = normalize(portfolio_esg(weights, esg_totals)?, cfg.esg_min, cfg.esg_max)?;
    let esg_term = if cfg.esg_log_transform {
        log_esg_transform(esg)
    } else {
        esg
    };
    Ok(sharpe_term + esg_term)
}

/// Bundles market statistics, ESG totals and bounds into one evaluator.
#[derive(Debug, Clone)]
pub struct PortfolioObjective<T> {
    stats: ReturnStats<T>,
    esg_totals: Vec<EsgTotal<T>>,
    config: ObjectiveConfig<T>,
}

impl<T: Scalar> PortfolioObjective<T> {
    pub fn new(stats: ReturnStats<T>, esg_totals: Vec<EsgTotal<T>>, config: ObjectiveConfig<T>) -> Result<Self> {
        config.validate()?;
        if stats.n_assets() < 2 {
            return Err(Error::input(format!("need at least 2 assets, got {}", stats.n_assets())));
        }
        if esg_totals.len() != stats.n_assets() {
            return Err(Error::input(format!(
                "{} ESG totals for {} assets",
                esg_totals.len(),
                stats.n_assets()
            )));
        }
        Ok(Self {
            stats,
            esg_totals,
            config,
        })
    }

    pub fn n_assets(&self) -> usize {
        self.stats.n_assets()
    }

    pub fn stats(&self) -> &ReturnStats<T> {
        &self.stats
    }

    pub fn esg_totals(&self) -> &[EsgTotal<T>] {
        &self.esg_totals
    }

    pub fn config(&self) -> &ObjectiveConfig<T> {
        &self.config
    }

    pub fn evaluate(&self, weights: &PortfolioWeights<T>) -> Result<T> {
        fitness(weights, &self.stats, &self.esg_totals, &self.config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use approx::assert_abs_diff_eq;

    fn stats(means: Vec<f64>, cov: Vec<Vec<f64>>) -> ReturnStats<f64> {
        let names = (0..means.len()).map(|i| format!("a{i}")).collect();
        ReturnStats::new(names, means, Matrix::from_rows(&cov).unwrap()).unwrap()
    }

    #[test]
    fn simplex_validation() {
        assert!(PortfolioWeights::new(vec![0.5, 0.5]).is_ok());
        assert!(PortfolioWeights::new(vec![0.5, 0.6]).is_err());
        assert!(PortfolioWeights::new(vec![1.5, -0.5]).is_err());
        assert!(PortfolioWeights::<f64>::new(vec![]).is_err());
    }

    #[test]
    fn sharpe_examples() {
        let s = stats(vec![0.05], vec![vec![0.04]]);
        let w = PortfolioWeights::new(vec![1.0]).unwrap();
        assert_abs_diff_eq!(sharpe_ratio(&w, &s, 0.01).unwrap(), 0.2, epsilon = 1e-12);

        let s = stats(vec![0.03, 0.03], vec![vec![0.02, 0.005], vec![0.005, 0.01]]);
        let w = PortfolioWeights::new(vec![0.3, 0.7]).unwrap();
        assert_eq!(sharpe_ratio(&w, &s, 0.03).unwrap(), 0.0);

        let s = stats(vec![0.04, 0.04], vec![vec![0.01, 0.0], vec![0.0, 0.01]]);
        let w = PortfolioWeights::uniform(2);
        let v = sharpe_ratio(&w, &s, 0.0).unwrap();
        assert_abs_diff_eq!(v, 0.04 / 0.005_f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(v, 0.5657, epsilon = 1e-4);
    }

    #[test]
    fn zero_risk_is_an_error() {
        let s = stats(vec![0.01, 0.02], vec![vec![0.0, 0.0], vec![0.0, 0.0]]);
        let w = PortfolioWeights::uniform(2);
        assert!(matches!(sharpe_ratio(&w, &s, 0.0), Err(Error::DegenerateRisk)));
        let cfg = ObjectiveConfig::reference();
        let t = vec![EsgTotal::new("a", 5.0).unwrap(), EsgTotal::new("b", 5.0).unwrap()];
        assert!(matches!(fitness(&w, &s, &t, &cfg), Err(Error::DegenerateRisk)));
    }

    #[test]
    fn normalize_fixed_points() {
        assert_eq!(normalize(3.0, -60.0, 3.0).unwrap(), 1.0);
        assert_eq!(normalize(-60.0, -60.0, 3.0).unwrap(), 0.0);
        // 8.7 is not representable; the f64 quotient lands one ulp below 0.87
        assert!((normalize(8.7, 0.0, 10.0).unwrap() - 0.87_f64).abs() <= f64::EPSILON);
        let r = |n: i64, d: i64| crate::Rational::new(n, d);
        assert_eq!(normalize(r(87, 10), r(0, 1), r(10, 1)).unwrap(), r(87, 100));
        assert_eq!(normalize(r(3, 1), r(-60, 1), r(3, 1)).unwrap(), r(1, 1));
        assert_eq!(normalize(100.0, -60.0, 3.0).unwrap(), 1.0);
        assert_eq!(normalize(-100.0, -60.0, 3.0).unwrap(), 0.0);
        assert!(matches!(normalize(1.0, 3.0, 3.0), Err(Error::MalformedConfig(_))));
    }

    #[test]
    fn log_transform_endpoints() {
        assert_eq!(log_esg_transform(0.0_f64), 0.0);
        assert_abs_diff_eq!(log_esg_transform(1.0_f64), 1.0, epsilon = 1e-15);
        assert!(log_esg_transform(0.5_f64) > 0.5);
    }

    #[test]
    fn fitness_extremes() {
        // single-asset limit: Sharpe (0.05-0.01)/0.2 = 0.2 with bounds [-1, 0.2] => 1
        let s = stats(vec![0.05, 0.05], vec![vec![0.04, 0.04], vec![0.04, 0.04]]);
        let w = PortfolioWeights::uniform(2);
        let t = vec![EsgTotal::new("a", 10.0).unwrap(), EsgTotal::new("b", 10.0).unwrap()];
        let mut cfg = ObjectiveConfig {
            risk_free: 0.01,
            sharpe_min: -1.0,
            sharpe_max: 0.2,
            esg_min: 0.0,
            esg_max: 10.0,
            esg_log_transform: false,
        };
        assert_abs_diff_eq!(fitness(&w, &s, &t, &cfg).unwrap(), 2.0, epsilon = 1e-12);
        cfg.sharpe_min = 0.2;
        cfg.sharpe_max = 1.0;
        let t0 = vec![EsgTotal::new("a", 0.0).unwrap(), EsgTotal::new("b", 0.0).unwrap()];
        assert_abs_diff_eq!(fitness(&w, &s, &t0, &cfg).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn objective_checks_dimensions() {
        let s = stats(vec![0.01, 0.02], vec![vec![0.01, 0.0], vec![0.0, 0.01]]);
        let t = vec![EsgTotal::new("a", 5.0).unwrap()];
        assert!(PortfolioObjective::new(s, t, ObjectiveConfig::reference()).is_err());
    }
}
