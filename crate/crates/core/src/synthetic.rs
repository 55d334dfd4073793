//! Synthetic daily price paths whose sample mean returns hit given targets.
//!
//! Returns are drawn as correlated Gaussians, re-centred so each asset's
//! sample mean equals its target exactly, then compounded into prices.

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::Matrix;
use crate::market_data::PriceSeries;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticMarket {
    pub asset_names: Vec<String>,
    pub target_means: Vec<f64>,
    pub covariance: Matrix<f64>,
    /// Number of price observations per asset.
    pub days: usize,
    pub start_date: NaiveDate,
    pub start_price: f64,
    pub seed: u64,
}

impl SyntheticMarket {
    pub const DEFAULT_DAYS: usize = 252;

    pub fn validate(&self) -> Result<()> {
        let n = self.asset_names.len();
        if n == 0 || self.target_means.len() != n {
            return Err(Error::config(format!(
                "{} asset names but {} target means",
                n,
                self.target_means.len()
            )));
        }
        if self.covariance.rows() != n || self.covariance.cols() != n {
            return Err(Error::config(format!("covariance must be {n}x{n}")));
        }
        if self.days < 3 {
            return Err(Error::config("need at least 3 days of prices"));
        }
        if !(self.start_price > 0.0) {
            return Err(Error::config("start price must be positive"));
        }
        Ok(())
    }
}

/// Weekdays starting at `start` (rolled forward off a weekend).
pub fn business_days(start: NaiveDate, count: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(count);
    let mut d = start;
    while out.len() < count {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d += Duration::days(1);
    }
    out
}

/// Lower factor of the covariance; a semidefinite matrix gets a tiny ridge.
fn covariance_factor(cov: &Matrix<f64>) -> Result<Matrix<f64>> {
    if let Some(l) = cov.cholesky() {
        return Ok(l);
    }
    let scale = (0..cov.rows()).map(|i| cov[(i, i)]).fold(0.0, f64::max).max(1e-300);
    let mut ridged = cov.clone();
    for i in 0..cov.rows() {
        ridged[(i, i)] += 1e-12 * scale;
    }
    ridged
        .cholesky()
        .ok_or_else(|| Error::config("covariance is not positive semidefinite"))
}

pub fn generate_prices(market: &SyntheticMarket) -> Result<Vec<PriceSeries<f64>>> {
    market.validate()?;
    let n = market.asset_names.len();
    let periods = market.days - 1;
    let factor = covariance_factor(&market.covariance)?;
    let mut rng = ChaCha8Rng::seed_from_u64(market.seed);

    let mut returns = vec![Vec::with_capacity(periods); n];
    for _ in 0..periods {
        let z: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        for (i, r) in factor.mul_vec(&z).into_iter().enumerate() {
            returns[i].push(r);
        }
    }
    for (series, &target) in returns.iter_mut().zip(&market.target_means) {
        let mean = series.iter().sum::<f64>() / periods as f64;
        for r in series.iter_mut() {
            *r += target - mean;
        }
    }

    let dates = business_days(market.start_date, market.days);
    market
        .asset_names
        .iter()
        .zip(returns)
        .map(|(name, rets)| {
            let mut prices = Vec::with_capacity(market.days);
            prices.push(market.start_price);
            for r in rets {
                if r <= -1.0 {
                    return Err(Error::config(format!("{name}: simulated return {r} wipes out the price")));
                }
                let last = *prices.last().expect("seeded with start price");
                prices.push(last * (1.0 + r));
            }
            PriceSeries::new(name.clone(), dates.clone(), prices)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market_data::{format_prices_csv, parse_prices_csv, stats_from_prices};

    fn market(seed: u64) -> SyntheticMarket {
        SyntheticMarket {
            asset_names: vec!["a".into(), "b".into()],
            target_means: vec![0.001, -0.0005],
            covariance: Matrix::from_rows(&[vec![1e-4, 2e-5], vec![2e-5, 4e-4]]).unwrap(),
            days: 252,
            start_date: NaiveDate::from_ymd_opt(2021, 3, 15).unwrap(),
            start_price: 100.0,
            seed,
        }
    }

    #[test]
    fn means_hit_targets() {
        let series = generate_prices(&market(1)).unwrap();
        assert_eq!(series[0].len(), 252);
        let stats = stats_from_prices(&series).unwrap();
        assert!((stats.mean_returns()[0] - 0.001).abs() < 1e-15);
        assert!((stats.mean_returns()[1] + 0.0005).abs() < 1e-15);
        let back: Vec<PriceSeries<f64>> = parse_prices_csv(&format_prices_csv(&series)).unwrap();
        assert_eq!(back, series);
    }

    #[test]
    fn weekends_skipped() {
        let d = business_days(NaiveDate::from_ymd_opt(2021, 3, 19).unwrap(), 3);
        assert_eq!(d[1], NaiveDate::from_ymd_opt(2021, 3, 22).unwrap());
        let s = business_days(NaiveDate::from_ymd_opt(2021, 3, 20).unwrap(), 1);
        assert_eq!(s[0].weekday(), Weekday::Mon);
    }

    #[test]
    fn seeded() {
        assert_eq!(generate_prices(&market(4)).unwrap(), generate_prices(&market(4)).unwrap());
        assert_ne!(generate_prices(&market(4)).unwrap(), generate_prices(&market(5)).unwrap());
    }
}
