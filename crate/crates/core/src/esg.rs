//! Firm-level ESG scorecards and portfolio-level aggregation.
//!
//! A firm's total is a weighted combination of fourteen category scores,
//! each on a 0-10 scale. The portfolio score is the holding-weighted average
//! of firm totals.

use crate::objective::PortfolioWeights;
use crate::{Error, Result, Scalar};

pub const N_CATEGORIES: usize = 14;
pub const SCORE_MIN: f64 = 0.0;
pub const SCORE_MAX: f64 = 10.0;
const WEIGHT_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct EsgScorecard<T> {
    firm_name: String,
    category_scores: [T; N_CATEGORIES],
    category_weights: [T; N_CATEGORIES],
}

impl<T: Scalar> EsgScorecard<T> {
    pub fn new(firm_name: impl Into<String>, scores: &[T], weights: &[T]) -> Result<Self> {
        let firm_name = firm_name.into();
        let category_scores: [T; N_CATEGORIES] = scores.try_into().map_err(|_| {
            Error::input(format!(
                "{firm_name}: expected {N_CATEGORIES} category scores, got {}",
                scores.len()
            ))
        })?;
        let category_weights: [T; N_CATEGORIES] = weights.try_into().map_err(|_| {
            Error::input(format!(
                "{firm_name}: expected {N_CATEGORIES} category weights, got {}",
                weights.len()
            ))
        })?;
        for (k, s) in category_scores.iter().enumerate() {
            if !(*s >= T::lit(SCORE_MIN) && *s <= T::lit(SCORE_MAX)) {
                return Err(Error::input(format!(
                    "{firm_name}: category {} score {s} outside [{SCORE_MIN}, {SCORE_MAX}]",
                    k + 1
                )));
            }
        }
        if let Some(w) = category_weights.iter().find(|w| !(**w >= T::zero())) {
            return Err(Error::input(format!("{firm_name}: negative category weight {w}")));
        }
        let sum: T = category_weights.iter().copied().sum();
        if (sum - T::one()).abs() > T::lit(WEIGHT_SUM_TOL) {
            return Err(Error::input(format!("{firm_name}: category weights sum to {sum}, not 1")));
        }
        Ok(Self {
            firm_name,
            category_scores,
            category_weights,
        })
    }

    /// Scorecard with every category weighted 1/14.
    pub fn uniform(firm_name: impl Into<String>, scores: &[T]) -> Result<Self> {
        Self::new(firm_name, scores, &uniform_category_weights::<T>())
    }

    pub fn firm_name(&self) -> &str {
        &self.firm_name
    }

    pub fn category_scores(&self) -> &[T] {
        &self.category_scores
    }

    pub fn category_weights(&self) -> &[T] {
        &self.category_weights
    }
}

pub fn uniform_category_weights<T: Scalar>() -> [T; N_CATEGORIES] {
    [T::one() / T::lit(N_CATEGORIES as f64); N_CATEGORIES]
}

#[derive(Debug, Clone, PartialEq)]
pub struct EsgTotal<T> {
    firm_name: String,
    total: T,
}

impl<T: Scalar> EsgTotal<T> {
    /// A directly supplied firm total, bypassing the scorecard.
    pub fn new(firm_name: impl Into<String>, total: T) -> Result<Self> {
        let firm_name = firm_name.into();
        if !(total >= T::lit(SCORE_MIN) && total <= T::lit(SCORE_MAX)) {
            return Err(Error::input(format!(
                "{firm_name}: ESG total {total} outside [{SCORE_MIN}, {SCORE_MAX}]"
            )));
        }
        Ok(Self { firm_name, total })
    }

    pub fn firm_name(&self) -> &str {
        &self.firm_name
    }

    pub fn total(&self) -> T {
        self.total
    }
}

pub fn scorecard_total<T: Scalar>(card: &EsgScorecard<T>) -> EsgTotal<T> {
    let total: T = card
        .category_scores
        .iter()
        .zip(&card.category_weights)
        .map(|(&s, &w)| s * w)
        .sum();
    EsgTotal {
        firm_name: card.firm_name.clone(),
        total: total.max(T::lit(SCORE_MIN)).min(T::lit(SCORE_MAX)),
    }
}

/// Holding-weighted average of firm totals.
pub fn portfolio_esg<T: Scalar>(weights: &PortfolioWeights<T>, totals: &[EsgTotal<T>]) -> Result<T> {
    let w = weights.as_slice();
    if w.len() != totals.len() {
        return Err(Error::input(format!(
            "{} weights but {} ESG totals",
            w.len(),
            totals.len()
        )));
    }
    let value: T = w.iter().zip(totals).map(|(&wi, t)| wi * t.total).sum();
    // weights sum to 1 only up to 1e-9; keep the convex-combination bound exact
    let lo = totals.iter().map(|t| t.total).fold(T::infinity(), T::min);
    let hi = totals.iter().map(|t| t.total).fold(T::neg_infinity(), T::max);
    Ok(value.max(lo).min(hi))
}
