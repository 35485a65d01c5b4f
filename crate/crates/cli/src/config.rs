//! Run configuration: defaults, a flat `key = value` file, then flag overrides.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::Serialize;
use stockgbm::{GroupingConfig, Horizon, MapeDenominator, DEFAULT_RISK_FREE};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Window {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub data_dir: PathBuf,
    /// Not part of the recorded configuration, so output location never
    /// changes output bytes.
    #[serde(skip)]
    pub out_dir: PathBuf,
    pub calibration: Window,
    pub evaluation: Window,
    pub risk_free: f64,
    pub n_paths: usize,
    pub n_trials: usize,
    pub seed: u64,
    pub group_count: usize,
    pub group_size: usize,
    pub horizons: Vec<Horizon>,
    /// Currency placed in each constituent of an equal-lot portfolio.
    pub capital_per_asset: f64,
    pub lower_quantile: f64,
    pub upper_quantile: f64,
    pub mape_denominator: MapeDenominator,
}

fn ymd(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).expect("valid literal date")
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            data_dir: PathBuf::from("data"),
            out_dir: PathBuf::from("out"),
            calibration: Window {
                start: ymd(2016, 1, 1),
                end: ymd(2018, 12, 31),
            },
            evaluation: Window {
                start: ymd(2019, 1, 1),
                end: ymd(2019, 12, 31),
            },
            risk_free: DEFAULT_RISK_FREE,
            n_paths: 1000,
            n_trials: 100_000,
            seed: 2019,
            group_count: 6,
            group_size: 13,
            horizons: Horizon::ALL.to_vec(),
            capital_per_asset: 100.0,
            lower_quantile: 0.05,
            upper_quantile: 0.95,
            mape_denominator: MapeDenominator::Forecast,
        }
    }
}

fn parse_date(key: &str, v: &str) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(v, "%Y-%m-%d")
        .map_err(|_| CliError::Usage(format!("{key}: expected YYYY-MM-DD, got {v:?}")))
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| CliError::Usage(format!("{key}: cannot parse {v:?}")))
}

impl RunConfig {
    pub fn grouping(&self) -> GroupingConfig {
        GroupingConfig {
            group_count: self.group_count,
            group_size: self.group_size,
        }
    }

    pub fn max_horizon(&self) -> usize {
        self.horizons.iter().map(|h| h.days()).max().unwrap_or(0)
    }

    /// Applies one setting by name. Keys match the config-file keys.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "data_dir" => self.data_dir = PathBuf::from(v),
            "out_dir" => self.out_dir = PathBuf::from(v),
            "calibration_start" => self.calibration.start = parse_date(key, v)?,
            "calibration_end" => self.calibration.end = parse_date(key, v)?,
            "evaluation_start" => self.evaluation.start = parse_date(key, v)?,
            "evaluation_end" => self.evaluation.end = parse_date(key, v)?,
            "risk_free" => self.risk_free = parse_num(key, v)?,
            "n_paths" | "paths" => self.n_paths = parse_num(key, v)?,
            "n_trials" | "trials" => self.n_trials = parse_num(key, v)?,
            "seed" => self.seed = parse_num(key, v)?,
            "group_count" => self.group_count = parse_num(key, v)?,
            "group_size" => self.group_size = parse_num(key, v)?,
            "horizons" => {
                self.horizons =
                    Horizon::parse_list(v).map_err(|e| CliError::Usage(e.to_string()))?
            }
            "capital_per_asset" => self.capital_per_asset = parse_num(key, v)?,
            "lower_quantile" => self.lower_quantile = parse_num(key, v)?,
            "upper_quantile" => self.upper_quantile = parse_num(key, v)?,
            "mape_denominator" => {
                self.mape_denominator = match v {
                    "forecast" => MapeDenominator::Forecast,
                    "actual" => MapeDenominator::Actual,
                    other => {
                        return Err(CliError::Usage(format!(
                            "mape_denominator: expected forecast or actual, got {other:?}"
                        )))
                    }
                }
            }
            other => return Err(CliError::Usage(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Reads `key = value` lines; blank lines and `#` comments are ignored.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("config line {}: expected key = value", n + 1))
            })?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        self.apply_text(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CliError::Usage(m));
        if self.calibration.start > self.calibration.end
            || self.evaluation.start > self.evaluation.end
        {
            return bad("window start after end".into());
        }
        if self.calibration.end >= self.evaluation.start {
            return bad(format!(
                "calibration window must end before evaluation starts ({} >= {})",
                self.calibration.end, self.evaluation.start
            ));
        }
        if self.n_paths == 0 || self.n_trials == 0 {
            return bad("paths and trials must be at least 1".into());
        }
        if self.group_count == 0 || self.group_size == 0 {
            return bad("group_count and group_size must be at least 1".into());
        }
        if self.horizons.is_empty() {
            return bad("at least one horizon is required".into());
        }
        if !(0.0..=1.0).contains(&self.lower_quantile)
            || !(0.0..=1.0).contains(&self.upper_quantile)
            || self.lower_quantile >= self.upper_quantile
        {
            return bad("quantiles must satisfy 0 <= lower < upper <= 1".into());
        }
        if self.capital_per_asset.is_nan()
            || self.capital_per_asset <= 0.0
            || !self.risk_free.is_finite()
        {
            return bad("capital_per_asset must be positive and risk_free finite".into());
        }
        Ok(())
    }
}
