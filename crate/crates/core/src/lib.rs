//! Bayesian optimization of portfolios under an ESG-penalized Sharpe-ratio
//! objective, with a random-search baseline and a paired-seed experiment
//! harness.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the scalar for the common cases.

// NaN-rejecting checks read as `!(a < b)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acquisition;
pub mod cli;
pub mod config;


mod error;
pub mod esg;
pub mod gp;
pub mod harness;
pub mod linalg;
pub mod market_data;
pub mod objective;
pub mod optimizer;
mod scalar;
pub mod synthetic;

pub use error::{Error, Result};
pub use scalar::{normal_cdf, normal_pdf, Scalar};

pub use acquisition::{AcquisitionKind, AcquisitionSpec};
pub use esg::{EsgScorecard, EsgTotal};
pub use gp::{GpSurrogate, KernelParams, Prediction};
pub use harness::{AggregateCurves, ExperimentConfig, Method};
pub use market_data::{PriceSeries, ReturnStats};
pub use objective::{ObjectiveConfig, PortfolioObjective, PortfolioWeights};
pub use optimizer::{Objective, RunConfig, RunTrace};

/// Exact rational scalar for the field-only helpers such as
/// [`objective::normalize`].
pub type Rational = num_rational::Ratio<i64>;

pub type Gp = GpSurrogate<f64>;
pub type Gp32 = GpSurrogate<f32>;
pub type Kernel = KernelParams<f64>;
pub type Weights = PortfolioWeights<f64>;
pub type Weights32 = PortfolioWeights<f32>;
pub type Stats = ReturnStats<f64>;
pub type Stats32 = ReturnStats<f32>;
pub type Portfolio = PortfolioObjective<f64>;
pub type Portfolio32 = PortfolioObjective<f32>;
pub type Run = RunConfig<f64>;
pub type Trace = RunTrace<f64>;
pub type Experiment = ExperimentConfig<f64>;
pub type Curves = AggregateCurves<f64>;
