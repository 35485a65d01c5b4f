//! Daily price histories: CSV ingestion, alignment and windowing.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;
use log::warn;

use crate::error::{Error, Result};

/// Approximate number of trading days in a year, used for annualization.
pub const TRADING_DAYS_PER_YEAR: usize = 252;

/// Trading sessions in the one-year evaluation horizon.
pub const EVALUATION_YEAR_DAYS: usize = 247;

const DATE_COLUMN: &str = "date";
const PRICE_COLUMN: &str = "adj close";

/// One asset's dated daily closing prices.
///
/// Construction validates that dates are strictly increasing, every price is
/// finite and positive, and there are at least two observations.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    ticker: String,
    dates: Vec<NaiveDate>,
    prices: Vec<f64>,
}

impl PriceSeries {
    pub fn new(ticker: impl Into<String>, dates: Vec<NaiveDate>, prices: Vec<f64>) -> Result<Self> {
        let ticker = ticker.into();
        let invalid = |reason: String| Error::InvalidSeries {
            ticker: ticker.clone(),
            reason,
        };
        if dates.len() != prices.len() {
            return Err(invalid(format!(
                "{} dates but {} prices",
                dates.len(),
                prices.len()
            )));
        }
        if prices.len() < 2 {
            return Err(Error::InsufficientData {
                ticker,
                rows: prices.len(),
                needed: 2,
            });
        }
        if let Some(w) = dates.windows(2).find(|w| w[0] >= w[1]) {
            return Err(invalid(format!(
                "dates not strictly increasing at {}",
                w[1]
            )));
        }
        if let Some((i, p)) = prices
            .iter()
            .enumerate()
            .find(|(_, p)| !(p.is_finite() && **p > 0.0))
        {
            return Err(invalid(format!(
                "price {p} at {} is not positive",
                dates[i]
            )));
        }
        Ok(Self {
            ticker,
            dates,
            prices,
        })
    }

    pub fn ticker(&self) -> &str {
        &self.ticker
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    /// Always false; a valid series holds at least two points.
    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }

    pub fn first_price(&self) -> f64 {
        self.prices[0]
    }

    pub fn last_price(&self) -> f64 {
        self.prices[self.prices.len() - 1]
    }

    pub fn last_date(&self) -> NaiveDate {
        self.dates[self.dates.len() - 1]
    }

    pub fn with_ticker(mut self, ticker: impl Into<String>) -> Self {
        self.ticker = ticker.into();
        self
    }

    /// Rescales so the first price is exactly 100, keeping every ratio between
    /// consecutive prices.
    pub fn normalize_base100(&self) -> PriceSeries {
        let base = self.prices[0];
        let mut prices: Vec<f64> = self.prices.iter().map(|p| p / base * 100.0).collect();
        prices[0] = 100.0;
        PriceSeries {
            ticker: self.ticker.clone(),
            dates: self.dates.clone(),
            prices,
        }
    }

    /// Rows with `start <= date <= end`. Fails if fewer than two remain.
    pub fn slice_period(&self, start: NaiveDate, end: NaiveDate) -> Result<PriceSeries> {
        if start > end {
            return Err(Error::InvalidParameter(format!(
                "window start {start} is after end {end}"
            )));
        }
        let lo = self.dates.partition_point(|d| *d < start);
        let hi = self.dates.partition_point(|d| *d <= end);
        if hi.saturating_sub(lo) < 2 {
            return Err(Error::EmptyWindow {
                ticker: self.ticker.clone(),
                start,
                end,
            });
        }
        Ok(PriceSeries {
            ticker: self.ticker.clone(),
            dates: self.dates[lo..hi].to_vec(),
            prices: self.prices[lo..hi].to_vec(),
        })
    }
}

/// Reads a daily export (`Date,Open,High,Low,Close,Adj Close,Volume`) and
/// keeps the adjusted close.
pub fn load_csv(path: impl AsRef<Path>, ticker: &str) -> Result<PriceSeries> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(file, ticker)
}

/// Same as [`load_csv`] over any reader.
///
/// Rows whose date or price cell is empty or unparsable are dropped, as are
/// rows with a non-positive price. Column names match case-insensitively.
pub fn read_csv<R: Read>(reader: R, ticker: &str) -> Result<PriceSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);

    let headers = rdr.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim_start_matches('\u{feff}').eq_ignore_ascii_case(name))
    };
    let date_idx = find(DATE_COLUMN)
        .ok_or_else(|| Error::MalformedHeader(format!("{ticker}: no Date column")))?;
    let price_idx = find(PRICE_COLUMN)
        .ok_or_else(|| Error::MalformedHeader(format!("{ticker}: no Adj Close column")))?;

    let mut rows: Vec<(NaiveDate, f64)> = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record?;
        let date = record
            .get(date_idx)
            .and_then(|s| NaiveDate::parse_from_str(s, "%Y-%m-%d").ok());
        let price = record.get(price_idx).and_then(|s| s.parse::<f64>().ok());
        match (date, price) {
            (Some(d), Some(p)) if p.is_finite() && p > 0.0 => rows.push((d, p)),
            (Some(d), Some(p)) if p.is_finite() => {
                warn!("{ticker}: rejecting non-positive price {p} on {d}");
            }
            _ => warn!("{ticker}: dropping unparsable row {}", line + 2),
        }
    }

    if rows.len() < 2 {
        return Err(Error::InsufficientData {
            ticker: ticker.to_string(),
            rows: rows.len(),
            needed: 2,
        });
    }
    rows.sort_by_key(|(d, _)| *d);
    let (dates, prices) = rows.into_iter().unzip();
    PriceSeries::new(ticker, dates, prices)
}

/// Several assets on one shared trading-day axis.
#[derive(Debug, Clone, PartialEq)]
pub struct PricePanel {
    tickers: Vec<String>,
    dates: Vec<NaiveDate>,
    // column-major: columns[j][t]
    columns: Vec<Vec<f64>>,
}

impl PricePanel {
    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn n_assets(&self) -> usize {
        self.tickers.len()
    }

    pub fn n_dates(&self) -> usize {
        self.dates.len()
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn price(&self, t: usize, j: usize) -> f64 {
        self.columns[j][t]
    }

    pub fn series(&self, j: usize) -> PriceSeries {
        PriceSeries {
            ticker: self.tickers[j].clone(),
            dates: self.dates.clone(),
            prices: self.columns[j].clone(),
        }
    }

    /// Sub-panel of the listed columns, in the given order.
    pub fn select(&self, indices: &[usize]) -> PricePanel {
        PricePanel {
            tickers: indices.iter().map(|&j| self.tickers[j].clone()).collect(),
            dates: self.dates.clone(),
            columns: indices.iter().map(|&j| self.columns[j].clone()).collect(),
        }
    }

    pub fn index_of(&self, ticker: &str) -> Option<usize> {
        self.tickers.iter().position(|t| t == ticker)
    }

    pub fn slice_period(&self, start: NaiveDate, end: NaiveDate) -> Result<PricePanel> {
        if start > end {
            return Err(Error::InvalidParameter(format!(
                "window start {start} is after end {end}"
            )));
        }
        let lo = self.dates.partition_point(|d| *d < start);
        let hi = self.dates.partition_point(|d| *d <= end);
        if hi.saturating_sub(lo) < 2 {
            return Err(Error::EmptyWindow {
                ticker: "panel".to_string(),
                start,
                end,
            });
        }
        Ok(PricePanel {
            tickers: self.tickers.clone(),
            dates: self.dates[lo..hi].to_vec(),
            columns: self.columns.iter().map(|c| c[lo..hi].to_vec()).collect(),
        })
    }
}

/// Inner-joins the series on date. Columns keep the input order.
pub fn align_panel(series: &[PriceSeries]) -> Result<PricePanel> {
    let (first, rest) = series
        .split_first()
        .ok_or_else(|| Error::InvalidParameter("align_panel needs at least one series".into()))?;

    let mut common: BTreeSet<NaiveDate> = first.dates.iter().copied().collect();
    for s in rest {
        let other: BTreeSet<NaiveDate> = s.dates.iter().copied().collect();
        common.retain(|d| other.contains(d));
    }
    if common.is_empty() {
        return Err(Error::NoCommonDates(series.len()));
    }
    let dates: Vec<NaiveDate> = common.into_iter().collect();

    let columns = series
        .iter()
        .map(|s| {
            // both date lists are sorted, so a single merge pass suffices
            let mut out = Vec::with_capacity(dates.len());
            let mut k = 0;
            for d in &dates {
                while s.dates[k] < *d {
                    k += 1;
                }
                out.push(s.prices[k]);
            }
            out
        })
        .collect();

    Ok(PricePanel {
        tickers: series.iter().map(|s| s.ticker.clone()).collect(),
        dates,
        columns,
    })
}
