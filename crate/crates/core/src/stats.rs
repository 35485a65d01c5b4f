//! Returns, annualized return and risk, and the Sharpe index.

use chrono::NaiveDate;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::market_data::{PriceSeries, TRADING_DAYS_PER_YEAR};

/// Annual risk-free rate used when none is configured.
pub const DEFAULT_RISK_FREE: f64 = 0.019;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReturnKind {
    Simple,
    Log,
}

/// Per-day returns; entry `i` covers the move from day `i` to day `i + 1` and
/// is stamped with the later date.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    dates: Vec<NaiveDate>,
    values: Vec<f64>,
    kind: ReturnKind,
}

impl ReturnSeries {
    /// Wraps raw return values; used when returns come from somewhere other
    /// than a price series.
    pub fn from_values(values: Vec<f64>, kind: ReturnKind) -> Self {
        Self {
            dates: Vec::new(),
            values,
            kind,
        }
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> ReturnKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn returns_with(
    series: &PriceSeries,
    kind: ReturnKind,
    f: impl Fn(f64, f64) -> f64,
) -> ReturnSeries {
    ReturnSeries {
        dates: series.dates()[1..].to_vec(),
        values: series.prices().windows(2).map(|w| f(w[0], w[1])).collect(),
        kind,
    }
}

/// `(P1 - P0) / P0` for each consecutive pair.
pub fn simple_returns(series: &PriceSeries) -> ReturnSeries {
    returns_with(series, ReturnKind::Simple, |p0, p1| (p1 - p0) / p0)
}

/// `ln(P1 / P0)` for each consecutive pair.
pub fn log_returns(series: &PriceSeries) -> ReturnSeries {
    returns_with(series, ReturnKind::Log, |p0, p1| (p1 / p0).ln())
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample (n - 1) standard deviation, Welford's recurrence.
pub(crate) fn sample_std(xs: &[f64]) -> f64 {
    let mut m = 0.0;
    let mut m2 = 0.0;
    for (k, &x) in xs.iter().enumerate() {
        let d = x - m;
        m += d / (k + 1) as f64;
        m2 += d * (x - m);
    }
    (m2 / (xs.len() - 1) as f64).max(0.0).sqrt()
}

/// Mean daily log return times 252.
pub fn annualize_return(returns: &ReturnSeries) -> Result<f64> {
    if returns.kind != ReturnKind::Log {
        return Err(Error::InvalidParameter(
            "annualized return is defined on log returns".into(),
        ));
    }
    if returns.is_empty() {
        return Err(Error::InvalidParameter("empty return series".into()));
    }
    Ok(mean(&returns.values) * TRADING_DAYS_PER_YEAR as f64)
}

/// Sample standard deviation of daily returns times sqrt(252).
pub fn annualize_risk(returns: &ReturnSeries) -> Result<f64> {
    if returns.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "risk needs at least 2 returns, got {}",
            returns.len()
        )));
    }
    Ok(sample_std(&returns.values) * (TRADING_DAYS_PER_YEAR as f64).sqrt())
}

/// `(return_annual - risk_free) / risk_annual`; zero or negative risk is an
/// error rather than an infinity.
pub fn sharpe_ratio(return_annual: f64, risk_annual: f64, risk_free: f64) -> Result<f64> {
    if risk_annual.is_nan() || risk_annual <= 0.0 {
        return Err(Error::UndefinedSharpe(risk_annual));
    }
    Ok((return_annual - risk_free) / risk_annual)
}

/// Daily and annualized statistics of one asset, computed on log returns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AssetStats {
    pub mu_daily: f64,
    pub sigma_daily: f64,
    pub return_annual: f64,
    pub risk_annual: f64,
    /// `None` when the series has zero risk.
    pub sharpe: Option<f64>,
}

/// Needs at least three prices (two returns) for a sample deviation.
pub fn asset_stats(series: &PriceSeries, risk_free: f64) -> Result<AssetStats> {
    let r = log_returns(series);
    if r.len() < 2 {
        return Err(Error::InsufficientData {
            ticker: series.ticker().to_string(),
            rows: series.len(),
            needed: 3,
        });
    }
    let mu_daily = mean(r.values());
    let sigma_daily = sample_std(r.values());
    let return_annual = annualize_return(&r)?;
    let risk_annual = annualize_risk(&r)?;
    Ok(AssetStats {
        mu_daily,
        sigma_daily,
        return_annual,
        risk_annual,
        sharpe: sharpe_ratio(return_annual, risk_annual, risk_free).ok(),
    })
}
