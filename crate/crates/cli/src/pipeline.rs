//! The commands behind the CLI: per-asset statistics, ranked groups,
//! simulate-and-evaluate, and the full report.
//!
//! Every command reads `<data_dir>/<TICKER>.csv` files and writes into
//! `out_dir`. Subjects are processed in parallel; each one derives its random
//! streams from the run seed and its own id, so outputs do not depend on
//! scheduling.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use log::info;
use rayon::prelude::*;
use stockgbm::evaluation::evaluate_ensemble_with;
use stockgbm::rng::derive_seed;
use stockgbm::{
    align_panel, asset_stats, envelope, load_csv, optimize_max_sharpe, portfolio_stats,
    rank_and_group, simulate_ensemble, AssetStats, EvalReport, GbmParams, Metric, Portfolio,
    PortfolioGroup, PortfolioStats, PricePanel, PriceSeries, SimulationConfig, Weights,
};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::output::{fmt_num, fmt_opt, render_table, OutputDir};

/// Tickers with a CSV file in `data_dir`, sorted.
pub fn list_tickers(data_dir: &Path) -> Result<Vec<String>> {
    let entries = fs::read_dir(data_dir).map_err(|e| CliError::io(data_dir, e))?;
    let mut tickers = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| CliError::io(data_dir, e))?.path();
        if path
            .extension()
            .is_some_and(|x| x.eq_ignore_ascii_case("csv"))
        {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                tickers.push(stem.to_string());
            }
        }
    }
    tickers.sort();
    Ok(tickers)
}

pub fn load_ticker(config: &RunConfig, ticker: &str) -> Result<PriceSeries> {
    Ok(load_csv(
        config.data_dir.join(format!("{ticker}.csv")),
        ticker,
    )?)
}

fn load_all(config: &RunConfig, tickers: &[String]) -> Result<Vec<PriceSeries>> {
    tickers.par_iter().map(|t| load_ticker(config, t)).collect()
}

/// File-name-safe form of a subject id.
fn file_id(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') {
                c
            } else {
                '_'
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct StatsRow {
    pub ticker: String,
    pub stats: AssetStats,
}

const STATS_HEADER: [&str; 6] = [
    "ticker",
    "mu_daily",
    "sigma_daily",
    "return_annual",
    "risk_annual",
    "sharpe",
];

/// Annualized statistics of each ticker over the calibration window.
/// Writes `stats.csv` and `stats.txt`.
pub fn cmd_stats(config: &RunConfig, tickers: &[String]) -> Result<Vec<StatsRow>> {
    let out = OutputDir::create(config)?;
    let rows: Vec<StatsRow> = load_all(config, tickers)?
        .into_iter()
        .map(|s| {
            let window = s.slice_period(config.calibration.start, config.calibration.end)?;
            Ok(StatsRow {
                ticker: s.ticker().to_string(),
                stats: asset_stats(&window, config.risk_free)?,
            })
        })
        .collect::<Result<_>>()?;

    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.ticker.clone(),
                fmt_num(r.stats.mu_daily),
                fmt_num(r.stats.sigma_daily),
                fmt_num(r.stats.return_annual),
                fmt_num(r.stats.risk_annual),
                fmt_opt(r.stats.sharpe),
            ]
        })
        .collect();
    out.write_table("stats", &STATS_HEADER, &cells)?;

    let pretty: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.ticker.clone(),
                format!("{:.1}%", r.stats.return_annual * 100.0),
                format!("{:.1}%", r.stats.risk_annual * 100.0),
                r.stats
                    .sharpe
                    .map_or_else(|| "NA".into(), |s| format!("{s:.3}")),
            ]
        })
        .collect();
    out.write_text(
        "stats.txt",
        &render_table(&["ticker", "return", "risk", "sharpe"], &pretty),
    )?;
    Ok(rows)
}

/// The universe on one date axis, cut to calibration start .. evaluation end.
pub fn universe_panel(config: &RunConfig) -> Result<PricePanel> {
    let tickers = list_tickers(&config.data_dir)?;
    if tickers.is_empty() {
        return Err(CliError::Usage(format!(
            "no CSV files in {}",
            config.data_dir.display()
        )));
    }
    let series = load_all(config, &tickers)?;
    Ok(align_panel(&series)?.slice_period(config.calibration.start, config.evaluation.end)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupPortfolio {
    pub id: String,
    pub portfolio: Portfolio,
    /// Mean-variance statistics over the calibration window.
    pub stats: Option<PortfolioStats>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupResult {
    pub grouping: PortfolioGroup,
    pub portfolios: Vec<GroupPortfolio>,
}

pub fn group_id(metric: Metric, index: usize) -> String {
    format!("{metric}-{}", index + 1)
}

/// Ranks on the calibration window and builds one portfolio per group:
/// equal lots for return and risk, max-Sharpe weights for sharpe.
pub fn build_groups(config: &RunConfig, panel: &PricePanel, metric: Metric) -> Result<GroupResult> {
    let calibration = panel.slice_period(config.calibration.start, config.calibration.end)?;
    let grouping = rank_and_group(&calibration, metric, config.risk_free, &config.grouping())?;

    let portfolios = grouping
        .groups
        .par_iter()
        .enumerate()
        .map(|(k, members)| {
            let id = group_id(metric, k);
            let idx: Vec<usize> = members
                .iter()
                .map(|t| {
                    panel
                        .index_of(t)
                        .expect("grouped tickers come from the panel")
                })
                .collect();
            let full = panel.select(&idx);
            let calib = calibration.select(&idx);
            let capital = config.capital_per_asset * members.len() as f64;
            let (weights, stats) = match metric {
                Metric::Sharpe => {
                    let seed = derive_seed(config.seed, &format!("optimize:{id}"));
                    let (w, s) =
                        optimize_max_sharpe(&calib, config.n_trials, seed, config.risk_free)?;
                    (w, Some(s))
                }
                Metric::Return | Metric::Risk => {
                    let w = Weights::equal(members.len())?;
                    let s = portfolio_stats(&calib, &w, config.risk_free).ok();
                    (w, s)
                }
            };
            Ok(GroupPortfolio {
                portfolio: Portfolio::build(id.clone(), &full, weights, capital)?,
                id,
                stats,
            })
        })
        .collect::<Result<_>>()?;

    Ok(GroupResult {
        grouping,
        portfolios,
    })
}

fn write_groups(out: &OutputDir, result: &GroupResult) -> Result<()> {
    let metric = result.grouping.metric;
    let groups = &result.grouping.groups;
    let mut header = vec!["rank".to_string()];
    header.extend((1..=groups.len()).map(|k| format!("group_{k}")));
    let depth = groups.iter().map(Vec::len).max().unwrap_or(0);
    let rows: Vec<Vec<String>> = (0..depth)
        .map(|r| {
            std::iter::once((r + 1).to_string())
                .chain(groups.iter().map(|g| g.get(r).cloned().unwrap_or_default()))
                .collect()
        })
        .collect();
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    out.write_table(&format!("groups_{metric}"), &header_refs, &rows)?;

    let stats_rows: Vec<Vec<String>> = result
        .portfolios
        .iter()
        .map(|p| {
            vec![
                p.id.clone(),
                fmt_num(p.portfolio.capital),
                fmt_opt(p.stats.map(|s| s.return_annual)),
                fmt_opt(p.stats.map(|s| s.risk_annual)),
                fmt_opt(p.stats.map(|s| s.sharpe)),
            ]
        })
        .collect();
    out.write_table(
        &format!("portfolios_{metric}"),
        &[
            "portfolio",
            "capital",
            "return_annual",
            "risk_annual",
            "sharpe",
        ],
        &stats_rows,
    )?;

    if metric == Metric::Sharpe {
        let weight_rows: Vec<Vec<String>> = result
            .portfolios
            .iter()
            .flat_map(|p| {
                p.portfolio
                    .tickers
                    .iter()
                    .zip(p.portfolio.weights.as_slice())
                    .map(|(t, w)| vec![p.id.clone(), t.clone(), fmt_num(*w)])
            })
            .collect();
        out.write_table(
            "weights_sharpe",
            &["portfolio", "ticker", "weight"],
            &weight_rows,
        )?;
    }
    Ok(())
}

/// Ranked membership table for one metric (plus optimized weights for sharpe).
pub fn cmd_group(config: &RunConfig, metric: Metric) -> Result<GroupResult> {
    let out = OutputDir::create(config)?;
    let panel = universe_panel(config)?;
    let result = build_groups(config, &panel, metric)?;
    write_groups(&out, &result)?;
    Ok(result)
}

/// What `simulate --subject` accepts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Subject {
    AllAssets,
    Asset(String),
    Group { metric: Metric, index: usize },
}

impl FromStr for Subject {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("all") {
            return Ok(Subject::AllAssets);
        }
        if let Some((m, k)) = s.rsplit_once('-') {
            if let (Ok(metric), Ok(k)) = (m.parse::<Metric>(), k.parse::<usize>()) {
                if k == 0 {
                    return Err(CliError::Usage(format!("group numbers start at 1: {s}")));
                }
                return Ok(Subject::Group {
                    metric,
                    index: k - 1,
                });
            }
        }
        if s.is_empty() {
            return Err(CliError::Usage("empty subject".into()));
        }
        Ok(Subject::Asset(s.to_string()))
    }
}

/// Realized path for scoring: the last calibration price as day 0, followed
/// by the evaluation window, cut to the longest horizon.
pub fn evaluation_actual(
    config: &RunConfig,
    calibration: &PriceSeries,
    history: &PriceSeries,
) -> Result<PriceSeries> {
    let need = config.max_horizon() + 1;
    let mut dates = vec![calibration.last_date()];
    let mut prices = vec![calibration.last_price()];
    for (d, p) in history.dates().iter().zip(history.prices()) {
        if dates.len() == need {
            break;
        }
        if *d >= config.evaluation.start && *d <= config.evaluation.end {
            dates.push(*d);
            prices.push(*p);
        }
    }
    if dates.len() < need {
        return Err(stockgbm::Error::InsufficientData {
            ticker: history.ticker().to_string(),
            rows: dates.len(),
            needed: need,
        }
        .into());
    }
    Ok(PriceSeries::new(history.ticker(), dates, prices)?)
}

fn quantile_label(q: f64) -> String {
    format!("q{:02}", (q * 100.0).round() as u32)
}

/// Calibrates on the calibration window, simulates, scores against the
/// evaluation window and writes `eval_<id>.csv` and `envelope_<id>.csv`.
pub fn simulate_subject(
    config: &RunConfig,
    out: &OutputDir,
    id: &str,
    history: &PriceSeries,
) -> Result<EvalReport> {
    let calibration = history.slice_period(config.calibration.start, config.calibration.end)?;
    let params = GbmParams::calibrate(&calibration)?;
    let actual = evaluation_actual(config, &calibration, history)?;
    let sim = SimulationConfig {
        n_paths: config.n_paths,
        horizon: config.max_horizon(),
        seed: derive_seed(config.seed, id),
    };
    let paths = simulate_ensemble(&params, &sim)?;
    let mut report =
        evaluate_ensemble_with(&paths, &actual, &config.horizons, config.mape_denominator)?;
    report.subject = id.to_string();

    let fid = file_id(id);
    let rows: Vec<Vec<String>> = report
        .scores
        .iter()
        .map(|s| {
            vec![
                s.horizon.label().to_string(),
                s.horizon.days().to_string(),
                fmt_opt(s.mean_correlation),
                fmt_num(s.mape),
                s.band.to_string(),
            ]
        })
        .collect();
    out.write_table(
        &format!("eval_{fid}"),
        &["horizon", "days", "mean_correlation", "mape", "band"],
        &rows,
    )?;

    let env = envelope(&paths, config.lower_quantile, config.upper_quantile)?;
    let lo = quantile_label(config.lower_quantile);
    let hi = quantile_label(config.upper_quantile);
    let rows: Vec<Vec<String>> = (0..actual.len())
        .map(|k| {
            vec![
                k.to_string(),
                actual.dates()[k].to_string(),
                fmt_num(actual.prices()[k]),
                fmt_num(env.mean[k]),
                fmt_num(env.lower[k]),
                fmt_num(env.upper[k]),
            ]
        })
        .collect();
    out.write_table(
        &format!("envelope_{fid}"),
        &["day_index", "date", "actual", "mean", &lo, &hi],
        &rows,
    )?;
    info!("{id}: mu={:.6} sigma={:.6}", params.mu, params.sigma);
    Ok(report)
}

/// One row per subject, correlation columns then MAPE columns, and a final
/// `mean` row. Correlation means skip undefined entries.
pub fn write_summary(
    config: &RunConfig,
    out: &OutputDir,
    name: &str,
    reports: &[EvalReport],
) -> Result<()> {
    let hs = &config.horizons;
    let mut header = vec!["subject".to_string()];
    header.extend(hs.iter().map(|h| format!("corr_{h}")));
    header.extend(hs.iter().map(|h| format!("mape_{h}")));

    let value = |r: &EvalReport, k: usize, corr: bool| -> Option<f64> {
        let s = r.score(hs[k])?;
        if corr {
            s.mean_correlation
        } else {
            Some(s.mape)
        }
    };
    let mut rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            std::iter::once(r.subject.clone())
                .chain((0..hs.len()).map(|k| fmt_opt(value(r, k, true))))
                .chain((0..hs.len()).map(|k| fmt_opt(value(r, k, false))))
                .collect()
        })
        .collect();

    let column_mean = |k: usize, corr: bool| -> Option<f64> {
        let vals: Vec<f64> = reports.iter().filter_map(|r| value(r, k, corr)).collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    };
    rows.push(
        std::iter::once("mean".to_string())
            .chain((0..hs.len()).map(|k| fmt_opt(column_mean(k, true))))
            .chain((0..hs.len()).map(|k| fmt_opt(column_mean(k, false))))
            .collect(),
    );
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    out.write_table(&format!("summary_{name}"), &header_refs, &rows)?;
    Ok(())
}

fn simulate_assets(
    config: &RunConfig,
    out: &OutputDir,
    tickers: &[String],
) -> Result<Vec<EvalReport>> {
    tickers
        .par_iter()
        .map(|t| {
            let s = load_ticker(config, t)?;
            simulate_subject(config, out, t, &s)
        })
        .collect()
}

fn simulate_groups(
    config: &RunConfig,
    out: &OutputDir,
    groups: &GroupResult,
) -> Result<Vec<EvalReport>> {
    groups
        .portfolios
        .par_iter()
        .map(|p| simulate_subject(config, out, &p.id, &p.portfolio.value_series))
        .collect()
}

pub fn cmd_simulate(config: &RunConfig, subject: &Subject) -> Result<Vec<EvalReport>> {
    let out = OutputDir::create(config)?;
    match subject {
        Subject::AllAssets => {
            let tickers = list_tickers(&config.data_dir)?;
            let reports = simulate_assets(config, &out, &tickers)?;
            write_summary(config, &out, "assets", &reports)?;
            Ok(reports)
        }
        Subject::Asset(t) => simulate_assets(config, &out, std::slice::from_ref(t)),
        Subject::Group { metric, index } => {
            let panel = universe_panel(config)?;
            let groups = build_groups(config, &panel, *metric)?;
            let p = groups.portfolios.get(*index).ok_or_else(|| {
                CliError::Usage(format!(
                    "{} has only {} groups",
                    metric,
                    groups.portfolios.len()
                ))
            })?;
            Ok(vec![simulate_subject(
                config,
                &out,
                &p.id,
                &p.portfolio.value_series,
            )?])
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReportOutcome {
    pub assets: Vec<EvalReport>,
    /// Per metric, in `Metric::ALL` order.
    pub portfolios: Vec<(Metric, Vec<EvalReport>)>,
}

/// Everything: statistics, the three groupings, every asset and every group
/// portfolio simulated and scored, and one summary per family.
pub fn cmd_report(config: &RunConfig) -> Result<ReportOutcome> {
    let out = OutputDir::create(config)?;
    let tickers = list_tickers(&config.data_dir)?;
    cmd_stats(config, &tickers)?;

    let panel = universe_panel(config)?;
    let mut portfolios = Vec::new();
    for metric in Metric::ALL {
        let groups = build_groups(config, &panel, metric)?;
        write_groups(&out, &groups)?;
        let reports = simulate_groups(config, &out, &groups)?;
        write_summary(config, &out, metric.as_str(), &reports)?;
        portfolios.push((metric, reports));
    }

    let assets = simulate_assets(config, &out, &tickers)?;
    write_summary(config, &out, "assets", &assets)?;
    Ok(ReportOutcome { assets, portfolios })
}
