//! Run-config file: TOML with one table per component, plus dotted-path
//! `key=value` overrides applied on top of the parsed file.
//!
//! ```toml
//! [objective]
//! risk_free = 0.012
//! sharpe_min = -60.0
//! sharpe_max = 3.0
//!
//! [run]
//! budget = 25
//! seed = 1
//! [run.acquisition]
//! kind = "ucb"
//!
//! [experiment]
//! repetitions = 25
//!
//! [market]
//! prices = "prices.csv"
//!
//! [[assets]]
//! name = "Endesa"
//! esg_total = 8.7
//! ```

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::Deserialize;
use toml::{Table, Value};

use crate::acquisition::{AcquisitionKind, AcquisitionSpec};
use crate::esg::{scorecard_total, uniform_category_weights, EsgScorecard, EsgTotal};
use crate::harness::ExperimentConfig;
use crate::linalg::Matrix;
use crate::market_data::{read_prices_csv, stats_from_prices, ReturnStats};
use crate::objective::{ObjectiveConfig, PortfolioObjective, PortfolioWeights};
use crate::optimizer::RunConfig;
use crate::synthetic::SyntheticMarket;
use crate::{Error, Result};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub objective: ObjectiveSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub experiment: ExperimentSection,
    pub market: Option<MarketSection>,
    #[serde(default)]
    pub assets: Vec<AssetSection>,
    pub portfolio: Option<PortfolioSection>,
    pub gen_data: Option<GenDataSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ObjectiveSection {
    pub risk_free: f64,
    pub sharpe_min: f64,
    pub sharpe_max: f64,
    pub esg_min: f64,
    pub esg_max: f64,
    pub esg_log_transform: bool,
}

impl Default for ObjectiveSection {
    fn default() -> Self {
        let r = ObjectiveConfig::<f64>::reference();
        Self {
            risk_free: r.risk_free,
            sharpe_min: r.sharpe_min,
            sharpe_max: r.sharpe_max,
            esg_min: r.esg_min,
            esg_max: r.esg_max,
            esg_log_transform: r.esg_log_transform,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub budget: usize,
    pub seed: u64,
    pub n_acq_candidates: usize,
    pub random_search_draws: Option<usize>,
    pub acquisition: AcquisitionSection,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            budget: 25,
            seed: 0,
            n_acq_candidates: 1000,
            random_search_draws: None,
            acquisition: AcquisitionSection::default(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AcquisitionSection {
    pub kind: String,
    pub ei_epsilon: f64,
    pub ucb_beta: f64,
}

impl Default for AcquisitionSection {
    fn default() -> Self {
        Self {
            kind: "ucb".into(),
            ei_epsilon: 0.01,
            ucb_beta: 2.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSection {
    pub repetitions: usize,
    /// Defaults to `run.seed`.
    pub base_seed: Option<u64>,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            repetitions: 25,
            base_seed: None,
        }
    }
}

/// Either a price file or explicit statistics (in `assets` order).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketSection {
    pub prices: Option<PathBuf>,
    pub mean_returns: Option<Vec<f64>>,
    pub covariance: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssetSection {
    pub name: String,
    pub esg_total: Option<f64>,
    pub esg_categories: Option<Vec<f64>>,
    pub esg_category_weights: Option<Vec<f64>>,
    /// Target mean per-period return for `gen-data`.
    pub target_mean: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PortfolioSection {
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenDataSection {
    #[serde(default = "default_days")]
    pub days: usize,
    #[serde(default = "default_start_date")]
    pub start_date: String,
    #[serde(default = "default_start_price")]
    pub start_price: f64,
    #[serde(default)]
    pub seed: u64,
    pub covariance: Vec<Vec<f64>>,
    pub output: Option<PathBuf>,
}

fn default_days() -> usize {
    SyntheticMarket::DEFAULT_DAYS
}

fn default_start_date() -> String {
    "2021-03-15".into()
}

fn default_start_price() -> f64 {
    100.0
}

/// A parsed config together with the directory relative paths resolve against.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub file: FileConfig,
    pub base_dir: PathBuf,
}

pub fn load(path: impl AsRef<Path>, overrides: &[String]) -> Result<LoadedConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let file = parse(&text, overrides).map_err(|e| match e {
        Error::MalformedConfig(msg) => Error::config(format!("{}: {msg}", path.display())),
        other => other,
    })?;
    Ok(LoadedConfig { file, base_dir })
}

pub fn parse(text: &str, overrides: &[String]) -> Result<FileConfig> {
    let mut table: Table = text.parse().map_err(|e: toml::de::Error| Error::config(e.to_string()))?;
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    table.try_into().map_err(|e: toml::de::Error| Error::config(e.to_string()))
}

/// Sets `a.b.c=value`. Numeric segments index into arrays. The value is read
/// as a TOML literal, falling back to a bare string.
pub fn apply_override(table: &mut Table, spec: &str) -> Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| Error::config(format!("override `{spec}` is not key=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = match format!("v = {raw}").parse::<Table>() {
        Ok(mut t) => t.remove("v").expect("parsed key present"),
        Err(_) => Value::String(raw.to_string()),
    };
    let segments: Vec<&str> = key.split('.').collect();
    if segments.iter().any(|s| s.is_empty()) {
        return Err(Error::config(format!("override key `{key}` has an empty segment")));
    }
    let mut root = Value::Table(std::mem::take(table));
    let result = set_path(&mut root, &segments, value, key);
    if let Value::Table(t) = root {
        *table = t;
    }
    result
}

fn set_path(root: &mut Value, segments: &[&str], value: Value, key: &str) -> Result<()> {
    let (last, parents) = segments.split_last().expect("at least one segment");
    let mut cursor = root;
    for seg in parents {
        cursor = step(cursor, seg, key)?;
    }
    match cursor {
        Value::Table(t) => {
            t.insert(last.to_string(), value);
            Ok(())
        }
        Value::Array(a) => {
            let i: usize = last
                .parse()
                .map_err(|_| Error::config(format!("override `{key}`: `{last}` is not an index")))?;
            let slot = a
                .get_mut(i)
                .ok_or_else(|| Error::config(format!("override `{key}`: index {i} out of range")))?;
            *slot = value;
            Ok(())
        }
        _ => Err(Error::config(format!("override `{key}`: parent is not a table"))),
    }
}

fn step<'a>(cursor: &'a mut Value, seg: &str, key: &str) -> Result<&'a mut Value> {
    match cursor {
        Value::Table(t) => Ok(t.entry(seg.to_string()).or_insert_with(|| Value::Table(Table::new()))),
        Value::Array(a) => {
            let i: usize = seg
                .parse()
                .map_err(|_| Error::config(format!("override `{key}`: `{seg}` is not an index")))?;
            a.get_mut(i)
                .ok_or_else(|| Error::config(format!("override `{key}`: index {i} out of range")))
        }
        _ => Err(Error::config(format!("override `{key}`: `{seg}` has no parent table"))),
    }
}

impl LoadedConfig {
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn asset_names(&self) -> Vec<String> {
        self.file.assets.iter().map(|a| a.name.clone()).collect()
    }

    pub fn objective_config(&self) -> Result<ObjectiveConfig<f64>> {
        let o = &self.file.objective;
        let cfg = ObjectiveConfig {
            risk_free: o.risk_free,
            sharpe_min: o.sharpe_min,
            sharpe_max: o.sharpe_max,
            esg_min: o.esg_min,
            esg_max: o.esg_max,
            esg_log_transform: o.esg_log_transform,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// One total per asset: the direct `esg_total`, else the scorecard total
    /// (uniform category weights when none are given).
    pub fn esg_totals(&self) -> Result<Vec<EsgTotal<f64>>> {
        if self.file.assets.is_empty() {
            return Err(Error::config("no [[assets]] entries"));
        }
        self.file
            .assets
            .iter()
            .map(|a| match (&a.esg_total, &a.esg_categories) {
                (Some(_), Some(_)) => Err(Error::config(format!(
                    "{}: give either esg_total or esg_categories, not both",
                    a.name
                ))),
                (Some(t), None) => EsgTotal::new(a.name.clone(), *t),
                (None, Some(scores)) => {
                    let card = match &a.esg_category_weights {
                        Some(w) => EsgScorecard::new(a.name.clone(), scores, w)?,
                        None => EsgScorecard::new(a.name.clone(), scores, &uniform_category_weights::<f64>())?,
                    };
                    Ok(scorecard_total(&card))
                }
                (None, None) => Err(Error::config(format!("{}: no ESG score given", a.name))),
            })
            .collect()
    }

    pub fn return_stats(&self) -> Result<ReturnStats<f64>> {
        let market = self
            .file
            .market
            .as_ref()
            .ok_or_else(|| Error::config("missing [market] section"))?;
        let names = self.asset_names();
        match (&market.prices, &market.mean_returns, &market.covariance) {
            (Some(p), None, None) => {
                let series = read_prices_csv::<f64>(self.resolve(p))?;
                stats_from_prices(&series)?.select(&names)
            }
            (None, Some(means), Some(cov)) => {
                let cov = Matrix::from_rows(cov).ok_or_else(|| Error::config("market.covariance rows differ in length"))?;
                ReturnStats::new(names, means.clone(), cov)
            }
            _ => Err(Error::config(
                "[market] needs either `prices` or both `mean_returns` and `covariance`",
            )),
        }
    }

    pub fn portfolio_objective(&self) -> Result<PortfolioObjective<f64>> {
        PortfolioObjective::new(self.return_stats()?, self.esg_totals()?, self.objective_config()?)
    }

    pub fn acquisition(&self) -> Result<AcquisitionSpec<f64>> {
        let a = &self.file.run.acquisition;
        let kind = match a.kind.to_ascii_lowercase().as_str() {
            "ucb" => AcquisitionKind::UpperConfidenceBound,
            "ei" => AcquisitionKind::ExpectedImprovement,
            other => return Err(Error::config(format!("unknown acquisition kind `{other}` (ucb or ei)"))),
        };
        let spec = AcquisitionSpec {
            kind,
            ei_epsilon: a.ei_epsilon,
            ucb_beta: a.ucb_beta,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn run_config(&self, n_assets: usize) -> Result<RunConfig<f64>> {
        let r = &self.file.run;
        let cfg = RunConfig {
            budget: r.budget,
            n_assets,
            acquisition: self.acquisition()?,
            seed: r.seed,
            n_acq_candidates: r.n_acq_candidates,
            random_search_draws: r.random_search_draws,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn experiment_config(&self, n_assets: usize) -> Result<ExperimentConfig<f64>> {
        let cfg = ExperimentConfig {
            repetitions: self.file.experiment.repetitions,
            base_seed: self.file.experiment.base_seed.unwrap_or(self.file.run.seed),
            run: self.run_config(n_assets)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn portfolio_weights(&self) -> Result<Option<PortfolioWeights<f64>>> {
        self.file
            .portfolio
            .as_ref()
            .map(|p| PortfolioWeights::new(p.weights.clone()))
            .transpose()
    }

    pub fn synthetic_market(&self) -> Result<SyntheticMarket> {
        let g = self
            .file
            .gen_data
            .as_ref()
            .ok_or_else(|| Error::config("missing [gen_data] section"))?;
        let target_means = self
            .file
            .assets
            .iter()
            .map(|a| {
                a.target_mean
                    .ok_or_else(|| Error::config(format!("{}: gen-data needs target_mean", a.name)))
            })
            .collect::<Result<Vec<_>>>()?;
        let covariance =
            Matrix::from_rows(&g.covariance).ok_or_else(|| Error::config("gen_data.covariance rows differ in length"))?;
        let start_date = NaiveDate::parse_from_str(&g.start_date, "%Y-%m-%d")
            .map_err(|e| Error::config(format!("gen_data.start_date `{}`: {e}", g.start_date)))?;
        let market = SyntheticMarket {
            asset_names: self.asset_names(),
            target_means,
            covariance,
            days: g.days,
            start_date,
            start_price: g.start_price,
            seed: g.seed,
        };
        market.validate()?;
        Ok(market)
    }
}
