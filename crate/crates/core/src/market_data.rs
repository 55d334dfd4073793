//! Price ingestion and return statistics.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use chrono::NaiveDate;

use crate::linalg::Matrix;
use crate::{Error, Result, Scalar};

const SYMMETRY_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;

/// Dated price observations for one asset.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries<T> {
    asset_name: String,
    dates: Vec<NaiveDate>,
    prices: Vec<T>,
}

impl<T: Scalar> PriceSeries<T> {
    /// Validates: at least two observations, strictly positive prices and
    /// strictly increasing dates.
    pub fn new(asset_name: impl Into<String>, dates: Vec<NaiveDate>, prices: Vec<T>) -> Result<Self> {
        let asset_name = asset_name.into();
        if dates.len() != prices.len() {
            return Err(Error::input(format!(
                "{asset_name}: {} dates but {} prices",
                dates.len(),
                prices.len()
            )));
        }
        if prices.len() < 2 {
            return Err(Error::input(format!(
                "{asset_name}: need at least 2 prices, got {}",
                prices.len()
            )));
        }
        if let Some(p) = prices.iter().find(|p| !(**p > T::zero()) || !p.is_finite()) {
            return Err(Error::input(format!("{asset_name}: non-positive price {p}")));
        }
        if let Some(w) = dates.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::input(format!(
                "{asset_name}: dates not strictly increasing at {}",
                w[1]
            )));
        }
        Ok(Self {
            asset_name,
            dates,
            prices,
        })
    }

    pub fn asset_name(&self) -> &str {
        &self.asset_name
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn prices(&self) -> &[T] {
        &self.prices
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }
}

/// Per-asset mean returns and the sample covariance of returns.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnStats<T> {
    asset_names: Vec<String>,
    mean_returns: Vec<T>,
    covariance: Matrix<T>,
}

impl<T: Scalar> ReturnStats<T> {
    /// Builds stats from explicit values, checking symmetry, a non-negative
    /// diagonal and positive semidefiniteness.
    pub fn new(asset_names: Vec<String>, mean_returns: Vec<T>, covariance: Matrix<T>) -> Result<Self> {
        let n = mean_returns.len();
        if asset_names.len() != n {
            return Err(Error::input(format!(
                "{} asset names for {n} mean returns",
                asset_names.len()
            )));
        }
        if covariance.rows() != n || covariance.cols() != n {
            return Err(Error::input(format!(
                "covariance is {}x{}, expected {n}x{n}",
                covariance.rows(),
                covariance.cols()
            )));
        }
        if mean_returns.iter().any(|m| !m.is_finite()) {
            return Err(Error::input("non-finite mean return"));
        }
        if covariance.max_asymmetry() > T::lit(SYMMETRY_TOL) {
            return Err(Error::input("covariance is not symmetric"));
        }
        if (0..n).any(|i| covariance[(i, i)] < T::zero()) {
            return Err(Error::input("covariance has a negative diagonal entry"));
        }
        if n > 0 && covariance.symmetric_eigenvalues()[0] < -T::lit(PSD_TOL) {
            return Err(Error::input("covariance is not positive semidefinite"));
        }
        Ok(Self {
            asset_names,
            mean_returns,
            covariance,
        })
    }

    pub fn asset_names(&self) -> &[String] {
        &self.asset_names
    }

    pub fn mean_returns(&self) -> &[T] {
        &self.mean_returns
    }

    pub fn covariance(&self) -> &Matrix<T> {
        &self.covariance
    }

    pub fn n_assets(&self) -> usize {
        self.mean_returns.len()
    }

    /// Stats restricted to and ordered by `names`.
    pub fn select(&self, names: &[String]) -> Result<Self> {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| {
                self.asset_names
                    .iter()
                    .position(|a| a == n)
                    .ok_or_else(|| Error::input(format!("no price data for asset `{n}`")))
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            asset_names: names.to_vec(),
            mean_returns: idx.iter().map(|&i| self.mean_returns[i]).collect(),
            covariance: Matrix::from_fn(idx.len(), idx.len(), |a, b| self.covariance[(idx[a], idx[b])]),
        })
    }
}

/// Simple per-period returns `p[t+1]/p[t] - 1`.
pub fn compute_returns<T: Scalar>(prices: &[T]) -> Result<Vec<T>> {
    if prices.len() < 2 {
        return Err(Error::input(format!(
            "need at least 2 prices to form a return, got {}",
            prices.len()
        )));
    }
    Ok(prices.windows(2).map(|w| w[1] / w[0] - T::one()).collect())
}

/// Arithmetic means and unbiased (T-1) sample covariance of aligned returns.
pub fn estimate_stats<T: Scalar>(asset_names: Vec<String>, aligned_returns: &[Vec<T>]) -> Result<ReturnStats<T>> {
    let n = aligned_returns.len();
    if n == 0 {
        return Err(Error::input("no assets"));
    }
    let len = aligned_returns[0].len();
    if aligned_returns.iter().any(|r| r.len() != len) {
        return Err(Error::input("return series have mismatched lengths"));
    }
    if len < 2 {
        return Err(Error::input(format!("need at least 2 returns per asset, got {len}")));
    }
    let count = T::from_usize(len).expect("length fits scalar");
    let means: Vec<T> = aligned_returns
        .iter()
        .map(|r| r.iter().copied().sum::<T>() / count)
        .collect();
    let mut cov = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let s: T = aligned_returns[i]
                .iter()
                .zip(&aligned_returns[j])
                .map(|(&a, &b)| (a - means[i]) * (b - means[j]))
                .sum();
            let c = s / (count - T::one());
            cov[(i, j)] = c;
            cov[(j, i)] = c;
        }
    }
    ReturnStats::new(asset_names, means, cov)
}

/// Restricts every series to the dates all of them share, then computes
/// simple returns over that common calendar. Returns asset names and the
/// aligned return lists, in input order.
pub fn align_returns<T: Scalar>(series: &[PriceSeries<T>]) -> Result<(Vec<String>, Vec<Vec<T>>)> {
    let first = series.first().ok_or_else(|| Error::input("no price series"))?;
    let mut common: BTreeSet<NaiveDate> = first.dates.iter().copied().collect();
    for s in &series[1..] {
        let dates: BTreeSet<NaiveDate> = s.dates.iter().copied().collect();
        common = common.intersection(&dates).copied().collect();
    }
    if common.len() < 2 {
        return Err(Error::input(format!(
            "only {} dates shared by all assets, need at least 2",
            common.len()
        )));
    }
    let mut names = Vec::with_capacity(series.len());
    let mut returns = Vec::with_capacity(series.len());
    for s in series {
        let prices: Vec<T> = s
            .dates
            .iter()
            .zip(&s.prices)
            .filter(|(d, _)| common.contains(d))
            .map(|(_, &p)| p)
            .collect();
        names.push(s.asset_name.clone());
        returns.push(compute_returns(&prices)?);
    }
    Ok((names, returns))
}

/// Convenience pipeline: align, compute returns, estimate stats.
pub fn stats_from_prices<T: Scalar>(series: &[PriceSeries<T>]) -> Result<ReturnStats<T>> {
    let (names, returns) = align_returns(series)?;
    estimate_stats(names, &returns)
}

/// Parses a `date,asset,price` CSV. Assets keep the order of their first
/// appearance; rows within an asset may come in any date order.
pub fn read_prices_csv<T: Scalar>(path: impl AsRef<Path>) -> Result<Vec<PriceSeries<T>>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_prices_csv(&text).map_err(|e| match e {
        Error::MalformedInput(msg) => Error::input(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_prices_csv<T: Scalar>(text: &str) -> Result<Vec<PriceSeries<T>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::input(format!("unreadable header: {e}")))?;
    if headers.iter().collect::<Vec<_>>() != ["date", "asset", "price"] {
        return Err(Error::input(format!(
            "expected header `date,asset,price`, found `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }

    let mut order: Vec<String> = Vec::new();
    let mut rows: HashMap<String, BTreeMap<NaiveDate, T>> = HashMap::new();
    for (idx, record) in reader.records().enumerate() {
        // header is row 1
        let row = idx + 2;
        let record = record.map_err(|e| Error::input(format!("row {row}: {e}")))?;
        if record.len() != 3 {
            return Err(Error::input(format!("row {row}: expected 3 fields, found {}", record.len())));
        }
        let date = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d")
            .map_err(|e| Error::input(format!("row {row}: bad date `{}`: {e}", &record[0])))?;
        let asset = record[1].to_string();
        if asset.is_empty() {
            return Err(Error::input(format!("row {row}: empty asset name")));
        }
        let price: f64 = record[2]
            .parse()
            .map_err(|e| Error::input(format!("row {row}: bad price `{}`: {e}", &record[2])))?;
        if !(price > 0.0) || !price.is_finite() {
            return Err(Error::input(format!("row {row}: non-positive price {price}")));
        }
        let by_date = rows.entry(asset.clone()).or_insert_with(|| {
            order.push(asset.clone());
            BTreeMap::new()
        });
        if by_date.insert(date, T::lit(price)).is_some() {
            return Err(Error::input(format!("row {row}: duplicate entry for ({date}, {asset})")));
        }
    }
    if order.is_empty() {
        return Err(Error::input("no price rows"));
    }
    order
        .into_iter()
        .map(|name| {
            let by_date = rows.remove(&name).expect("asset recorded");
            let (dates, prices) = by_date.into_iter().unzip();
            PriceSeries::new(name, dates, prices)
        })
        .collect()
}

/// Writes series as `date,asset,price`, rows ordered by date then asset order.
pub fn write_prices_csv<T: Scalar>(path: impl AsRef<Path>, series: &[PriceSeries<T>]) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_prices_csv(series)).map_err(|e| Error::io(path, e))
}

pub fn format_prices_csv<T: Scalar>(series: &[PriceSeries<T>]) -> String {
    let mut rows: BTreeMap<NaiveDate, Vec<(usize, T)>> = BTreeMap::new();
    for (k, s) in series.iter().enumerate() {
        for (d, &p) in s.dates.iter().zip(&s.prices) {
            rows.entry(*d).or_default().push((k, p));
        }
    }
    let mut out = String::from("date,asset,price\n");
    for (date, entries) in rows {
        for (k, p) in entries {
            out.push_str(&format!("{},{},{}\n", date.format("%Y-%m-%d"), series[k].asset_name, p.as_f64()));
        }
    }
    out
}
