//! Forecast scoring: Pearson correlation and MAPE of simulated paths against
//! realized prices over fixed horizons.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gbm::PathSet;
use crate::market_data::{PriceSeries, EVALUATION_YEAR_DAYS};

/// Forecast horizon in trading days.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Horizon {
    #[serde(rename = "1w")]
    Week,
    #[serde(rename = "2w")]
    TwoWeeks,
    #[serde(rename = "1m")]
    Month,
    #[serde(rename = "6m")]
    SixMonths,
    #[serde(rename = "1y")]
    Year,
}

impl Horizon {
    pub const ALL: [Horizon; 5] = [
        Horizon::Week,
        Horizon::TwoWeeks,
        Horizon::Month,
        Horizon::SixMonths,
        Horizon::Year,
    ];

    pub fn days(self) -> usize {
        match self {
            Horizon::Week => 5,
            Horizon::TwoWeeks => 10,
            Horizon::Month => 21,
            Horizon::SixMonths => 126,
            Horizon::Year => EVALUATION_YEAR_DAYS,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Horizon::Week => "1w",
            Horizon::TwoWeeks => "2w",
            Horizon::Month => "1m",
            Horizon::SixMonths => "6m",
            Horizon::Year => "1y",
        }
    }

    /// Parses a comma-separated label list such as `1w,1m,1y`.
    pub fn parse_list(s: &str) -> Result<Vec<Horizon>> {
        let mut out: Vec<Horizon> = s
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect::<Result<_>>()?;
        out.sort();
        out.dedup();
        Ok(out)
    }
}

impl fmt::Display for Horizon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Horizon {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Horizon::ALL
            .into_iter()
            .find(|h| h.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown horizon {s:?}")))
    }
}

/// Product-moment correlation. Fails on a constant input.
pub fn pearson_correlation(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "correlation needs at least 2 points, got {}",
            x.len()
        )));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Which series divides the absolute error in [`mape_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MapeDenominator {
    /// `|A - F| / F`
    #[default]
    Forecast,
    /// `|A - F| / A`, the textbook form.
    Actual,
}

/// Mean of `|A_t - F_t| / F_t`.
pub fn mape(actual: &[f64], forecast: &[f64]) -> Result<f64> {
    mape_with(actual, forecast, MapeDenominator::Forecast)
}

pub fn mape_with(actual: &[f64], forecast: &[f64], denominator: MapeDenominator) -> Result<f64> {
    if actual.len() != forecast.len() {
        return Err(Error::DimensionMismatch {
            expected: actual.len(),
            got: forecast.len(),
        });
    }
    if actual.is_empty() {
        return Err(Error::InvalidParameter("MAPE of empty series".into()));
    }
    let mut total = 0.0;
    for (t, (a, f)) in actual.iter().zip(forecast).enumerate() {
        let d = match denominator {
            MapeDenominator::Forecast => *f,
            MapeDenominator::Actual => *a,
        };
        if d == 0.0 {
            return Err(Error::ZeroForecast(t));
        }
        total += ((a - f) / d).abs();
    }
    Ok(total / actual.len() as f64)
}

/// Qualitative accuracy band for a MAPE value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PrecisionBand {
    High,
    Good,
    Reasonable,
    Imprecise,
}

impl PrecisionBand {
    pub fn as_str(self) -> &'static str {
        match self {
            PrecisionBand::High => "high",
            PrecisionBand::Good => "good",
            PrecisionBand::Reasonable => "reasonable",
            PrecisionBand::Imprecise => "imprecise",
        }
    }
}

impl fmt::Display for PrecisionBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `<= 10%` high, `<= 20%` good, `<= 50%` reasonable, otherwise imprecise.
pub fn classify_mape(mape: f64) -> PrecisionBand {
    if mape <= 0.10 {
        PrecisionBand::High
    } else if mape <= 0.20 {
        PrecisionBand::Good
    } else if mape <= 0.50 {
        PrecisionBand::Reasonable
    } else {
        PrecisionBand::Imprecise
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HorizonScore {
    pub horizon: Horizon,
    /// Mean over paths with a defined correlation; `None` if there were none.
    pub mean_correlation: Option<f64>,
    pub correlated_paths: usize,
    pub mape: f64,
    pub band: PrecisionBand,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub subject: String,
    pub scores: Vec<HorizonScore>,
}

impl EvalReport {
    pub fn score(&self, horizon: Horizon) -> Option<&HorizonScore> {
        self.scores.iter().find(|s| s.horizon == horizon)
    }
}

/// Scores every path against `actual` on days `1..=h` for each horizon and
/// averages across paths. Day 0 is the shared starting price and is left out.
pub fn evaluate_ensemble(
    paths: &PathSet,
    actual: &PriceSeries,
    horizons: &[Horizon],
) -> Result<EvalReport> {
    evaluate_ensemble_with(paths, actual, horizons, MapeDenominator::Forecast)
}

pub fn evaluate_ensemble_with(
    paths: &PathSet,
    actual: &PriceSeries,
    horizons: &[Horizon],
    denominator: MapeDenominator,
) -> Result<EvalReport> {
    let max_h = horizons.iter().map(|h| h.days()).max().unwrap_or(0);
    if actual.len() < max_h + 1 {
        return Err(Error::InsufficientData {
            ticker: actual.ticker().to_string(),
            rows: actual.len(),
            needed: max_h + 1,
        });
    }
    if paths.config.horizon < max_h {
        return Err(Error::InvalidParameter(format!(
            "paths cover {} days, horizon needs {max_h}",
            paths.config.horizon
        )));
    }
    if paths.n_paths() == 0 {
        return Err(Error::NoUsablePaths);
    }
    let a = actual.prices();

    // per path, per horizon: (correlation if defined, mape)
    let per_path: Vec<Vec<(Option<f64>, f64)>> = (0..paths.n_paths())
        .into_par_iter()
        .map(|i| {
            let p = paths.path(i);
            horizons
                .iter()
                .map(|h| {
                    let d = h.days();
                    let r = pearson_correlation(&a[1..=d], &p[1..=d]).ok();
                    mape_with(&a[1..=d], &p[1..=d], denominator).map(|m| (r, m))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let scores = horizons
        .iter()
        .enumerate()
        .map(|(k, &horizon)| {
            // summed in path order so the result is independent of scheduling
            let (mut rsum, mut rcount, mut msum) = (0.0, 0usize, 0.0);
            for row in &per_path {
                let (r, m) = row[k];
                if let Some(r) = r {
                    rsum += r;
                    rcount += 1;
                }
                msum += m;
            }
            let mape = msum / per_path.len() as f64;
            HorizonScore {
                horizon,
                mean_correlation: (rcount > 0).then(|| rsum / rcount as f64),
                correlated_paths: rcount,
                mape,
                band: classify_mape(mape),
            }
        })
        .collect();

    Ok(EvalReport {
        subject: actual.ticker().to_string(),
        scores,
    })
}
