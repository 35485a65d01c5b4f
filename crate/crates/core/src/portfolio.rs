//! Portfolio construction: buy-and-hold value series, mean-variance statistics,
//! random-weight max-Sharpe search and ranked grouping of a universe.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::market_data::{PricePanel, PriceSeries, TRADING_DAYS_PER_YEAR};
use crate::rng::stream_rng;
use crate::stats::{asset_stats, sharpe_ratio};

const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

/// Non-negative allocation fractions summing to one.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Weights(Vec<f64>);

impl Weights {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidWeights("no weights".into()));
        }
        if let Some(w) = values.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidWeights(format!(
                "weight {w} is negative or not finite"
            )));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::InvalidWeights(format!("weights sum to {sum}")));
        }
        Ok(Self(values))
    }

    pub fn equal(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidWeights("no assets".into()));
        }
        Ok(Self(vec![1.0 / n as f64; n]))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Independent uniforms on (0, 1] normalized by their sum.
pub fn random_weights<R: Rng + ?Sized>(n_assets: usize, rng: &mut R) -> Result<Weights> {
    if n_assets == 0 {
        return Err(Error::InvalidWeights("no assets".into()));
    }
    let raw: Vec<f64> = (0..n_assets).map(|_| 1.0 - rng.random::<f64>()).collect();
    let sum: f64 = raw.iter().sum();
    Ok(Weights(raw.into_iter().map(|u| u / sum).collect()))
}

fn check_dims(panel: &PricePanel, weights: &Weights) -> Result<()> {
    if panel.n_assets() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: panel.n_assets(),
            got: weights.len(),
        });
    }
    Ok(())
}

/// Buy-and-hold value: `capital * sum_j w_j * P_j(t) / P_j(0)`, never rebalanced.
///
/// The returned series carries the panel's dates and the ticker `"portfolio"`.
pub fn portfolio_value_series(
    panel: &PricePanel,
    weights: &Weights,
    capital: f64,
) -> Result<PriceSeries> {
    check_dims(panel, weights)?;
    if !(capital.is_finite() && capital > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "capital must be positive, got {capital}"
        )));
    }
    let w = weights.as_slice();
    let wsum: f64 = w.iter().sum();
    let values = (0..panel.n_dates())
        .map(|t| {
            let growth: f64 = (0..panel.n_assets())
                .map(|j| w[j] * (panel.price(t, j) / panel.price(0, j)))
                .sum();
            // dividing by the exact weight sum pins value(0) to capital
            capital * (growth / wsum)
        })
        .collect();
    PriceSeries::new("portfolio", panel.dates().to_vec(), values)
}

/// A named allocation over a set of tickers together with its value history.
#[derive(Debug, Clone, PartialEq)]
pub struct Portfolio {
    pub id: String,
    pub tickers: Vec<String>,
    pub weights: Weights,
    pub capital: f64,
    pub value_series: PriceSeries,
}

impl Portfolio {
    pub fn build(
        id: impl Into<String>,
        panel: &PricePanel,
        weights: Weights,
        capital: f64,
    ) -> Result<Self> {
        let id = id.into();
        let value_series =
            portfolio_value_series(panel, &weights, capital)?.with_ticker(id.clone());
        Ok(Self {
            id,
            tickers: panel.tickers().to_vec(),
            weights,
            capital,
            value_series,
        })
    }

    /// Fixed lot of `per_asset` currency in every ticker.
    pub fn equal_lots(id: impl Into<String>, panel: &PricePanel, per_asset: f64) -> Result<Self> {
        let n = panel.n_assets();
        Self::build(id, panel, Weights::equal(n)?, per_asset * n as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PortfolioStats {
    pub return_annual: f64,
    pub risk_annual: f64,
    pub sharpe: f64,
}

/// Mean vector and sample covariance of daily log returns.
#[derive(Debug, Clone)]
struct ReturnMoments {
    means: Vec<f64>,
    // row-major n x n
    cov: Vec<f64>,
    n: usize,
}

impl ReturnMoments {
    fn from_panel(panel: &PricePanel) -> Result<Self> {
        let n = panel.n_assets();
        let t = panel.n_dates();
        if t < 3 {
            return Err(Error::InsufficientData {
                ticker: "panel".into(),
                rows: t,
                needed: 3,
            });
        }
        let returns: Vec<Vec<f64>> = (0..n)
            .map(|j| {
                panel
                    .column(j)
                    .windows(2)
                    .map(|w| (w[1] / w[0]).ln())
                    .collect()
            })
            .collect();
        let m = (t - 1) as f64;
        let means: Vec<f64> = returns.iter().map(|r| r.iter().sum::<f64>() / m).collect();
        let mut cov = vec![0.0; n * n];
        for a in 0..n {
            for b in a..n {
                let s: f64 = returns[a]
                    .iter()
                    .zip(&returns[b])
                    .map(|(x, y)| (x - means[a]) * (y - means[b]))
                    .sum();
                cov[a * n + b] = s / (m - 1.0);
                cov[b * n + a] = cov[a * n + b];
            }
        }
        Ok(Self { means, cov, n })
    }

    fn daily_mean(&self, w: &[f64]) -> f64 {
        w.iter().zip(&self.means).map(|(w, m)| w * m).sum()
    }

    /// `w' C w`, snapped to zero when it is indistinguishable from rounding
    /// noise relative to the constituents' own variances.
    fn daily_variance(&self, w: &[f64]) -> f64 {
        let n = self.n;
        let mut var = 0.0;
        let mut scale = 0.0;
        for a in 0..n {
            let row = &self.cov[a * n..(a + 1) * n];
            var += w[a] * row.iter().zip(w).map(|(c, wb)| c * wb).sum::<f64>();
            scale += w[a] * row[a].max(0.0).sqrt();
        }
        if var <= 64.0 * f64::EPSILON * scale * scale {
            0.0
        } else {
            var
        }
    }

    fn stats(&self, w: &[f64], risk_free: f64) -> Result<PortfolioStats> {
        let days = TRADING_DAYS_PER_YEAR as f64;
        let return_annual = self.daily_mean(w) * days;
        let risk_annual = self.daily_variance(w).sqrt() * days.sqrt();
        Ok(PortfolioStats {
            return_annual,
            risk_annual,
            sharpe: sharpe_ratio(return_annual, risk_annual, risk_free)?,
        })
    }
}

/// Annualized mean-variance statistics of a fixed allocation, using the full
/// sample covariance of daily log returns.
pub fn portfolio_stats(
    panel: &PricePanel,
    weights: &Weights,
    risk_free: f64,
) -> Result<PortfolioStats> {
    check_dims(panel, weights)?;
    ReturnMoments::from_panel(panel)?.stats(weights.as_slice(), risk_free)
}

/// Random search for the max-Sharpe allocation.
///
/// Trial 0 is the equal-weight portfolio; trials `1..=n_trials` draw
/// [`random_weights`] from stream `(seed, i)`. Trials with undefined Sharpe
/// are skipped. The best trial wins, the lowest index breaking ties, so the
/// result does not depend on the thread pool.
pub fn optimize_max_sharpe(
    panel: &PricePanel,
    n_trials: usize,
    seed: u64,
    risk_free: f64,
) -> Result<(Weights, PortfolioStats)> {
    if n_trials == 0 {
        return Err(Error::InvalidParameter(
            "n_trials must be at least 1".into(),
        ));
    }
    let n = panel.n_assets();
    if n == 0 {
        return Err(Error::InvalidWeights("no assets".into()));
    }
    let moments = ReturnMoments::from_panel(panel)?;
    let trial_weights = |i: usize| -> Weights {
        if i == 0 {
            Weights(vec![1.0 / n as f64; n])
        } else {
            let mut rng = stream_rng(seed, i as u64);
            random_weights(n, &mut rng).expect("n_assets checked non-zero")
        }
    };

    let best = (0..=n_trials)
        .into_par_iter()
        .filter_map(|i| {
            let w = trial_weights(i);
            moments
                .stats(w.as_slice(), risk_free)
                .ok()
                .map(|s| (i, s.sharpe))
        })
        .reduce_with(|a, b| match a.1.total_cmp(&b.1) {
            Ordering::Greater => a,
            Ordering::Less => b,
            Ordering::Equal => {
                if a.0 <= b.0 {
                    a
                } else {
                    b
                }
            }
        });

    let (idx, _) = best.ok_or(Error::UndefinedSharpe(0.0))?;
    let weights = trial_weights(idx);
    let stats = moments.stats(weights.as_slice(), risk_free)?;
    Ok((weights, stats))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Return,
    Risk,
    Sharpe,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Return, Metric::Risk, Metric::Sharpe];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Return => "return",
            Metric::Risk => "risk",
            Metric::Sharpe => "sharpe",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "return" => Ok(Metric::Return),
            "risk" => Ok(Metric::Risk),
            "sharpe" => Ok(Metric::Sharpe),
            other => Err(Error::InvalidParameter(format!("unknown metric {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GroupingConfig {
    pub group_count: usize,
    pub group_size: usize,
}

impl Default for GroupingConfig {
    fn default() -> Self {
        Self {
            group_count: 6,
            group_size: 13,
        }
    }
}

/// A universe split into consecutive groups after sorting by a metric,
/// highest first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PortfolioGroup {
    pub metric: Metric,
    pub groups: Vec<Vec<String>>,
    /// Metric value of each member, parallel to `groups`.
    pub scores: Vec<Vec<f64>>,
}

impl PortfolioGroup {
    /// Ranked tickers with their scores, groups concatenated.
    pub fn ranking(&self) -> impl Iterator<Item = (&str, f64)> {
        self.groups
            .iter()
            .flatten()
            .zip(self.scores.iter().flatten())
            .map(|(t, s)| (t.as_str(), *s))
    }
}

/// Sorts the universe descending by the per-asset metric (ties by ticker)
/// and chunks it into `group_count` groups of `group_size`.
pub fn rank_and_group(
    universe: &PricePanel,
    metric: Metric,
    risk_free: f64,
    grouping: &GroupingConfig,
) -> Result<PortfolioGroup> {
    let count = universe.n_assets();
    if grouping.group_size == 0 || count != grouping.group_count * grouping.group_size {
        return Err(Error::Indivisible {
            count,
            group_count: grouping.group_count,
            group_size: grouping.group_size,
        });
    }

    let mut scored = Vec::with_capacity(count);
    for j in 0..count {
        let st = asset_stats(&universe.series(j), risk_free)?;
        let score = match metric {
            Metric::Return => st.return_annual,
            Metric::Risk => st.risk_annual,
            Metric::Sharpe => st.sharpe.ok_or(Error::UndefinedSharpe(st.risk_annual))?,
        };
        scored.push((universe.tickers()[j].clone(), score));
    }
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

    let (groups, scores) = scored
        .chunks(grouping.group_size)
        .map(|c| c.iter().cloned().unzip::<String, f64, Vec<_>, Vec<_>>())
        .unzip();
    Ok(PortfolioGroup {
        metric,
        groups,
        scores,
    })
}
