//! Synthetic price universes in the daily-export CSV layout.
//!
//! Each asset follows its own GBM with drift and volatility drawn from the
//! ranges below, on a Monday-to-Friday calendar.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::{Datelike, NaiveDate, Weekday};
use rand::Rng;
use stockgbm::rng::{derive_seed, stream_rng};
use stockgbm::{gbm_path, GbmParams};

use crate::error::{CliError, Result};
use crate::output::fmt_num;

#[derive(Debug, Clone)]
pub struct SynthSpec {
    pub n_assets: usize,
    pub seed: u64,
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub mu_range: (f64, f64),
    pub sigma_range: (f64, f64),
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            n_assets: 78,
            seed: 1,
            start: NaiveDate::from_ymd_opt(2016, 1, 4).expect("valid date"),
            end: NaiveDate::from_ymd_opt(2019, 12, 30).expect("valid date"),
            mu_range: (-0.0006, 0.0016),
            sigma_range: (0.010, 0.035),
        }
    }
}

pub fn weekdays(start: NaiveDate, end: NaiveDate) -> Vec<NaiveDate> {
    start
        .iter_days()
        .take_while(|d| *d <= end)
        .filter(|d| !matches!(d.weekday(), Weekday::Sat | Weekday::Sun))
        .collect()
}

pub fn ticker_name(i: usize) -> String {
    format!("SYN{:02}", i + 1)
}

/// Writes one `<TICKER>.csv` per asset into `dir` and returns the paths.
pub fn generate_universe(dir: &Path, spec: &SynthSpec) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let dates = weekdays(spec.start, spec.end);
    if dates.len() < 2 {
        return Err(CliError::Usage(
            "synthetic calendar has fewer than two days".into(),
        ));
    }
    let mut out = Vec::with_capacity(spec.n_assets);
    for i in 0..spec.n_assets {
        let ticker = ticker_name(i);
        let mut rng = stream_rng(derive_seed(spec.seed, &ticker), 0);
        let mu = rng.random_range(spec.mu_range.0..=spec.mu_range.1);
        let sigma = rng.random_range(spec.sigma_range.0..=spec.sigma_range.1);
        let s0 = rng.random_range(5.0..60.0);
        let params = GbmParams::new(s0, mu, sigma, 1.0)?;
        let prices = gbm_path(&params, dates.len() - 1, &mut rng);

        let mut text = String::from("Date,Open,High,Low,Close,Adj Close,Volume\n");
        for (d, p) in dates.iter().zip(&prices) {
            let spread = 1.0 + 0.5 * sigma;
            let volume: u32 = rng.random_range(10_000..2_000_000);
            text.push_str(&format!(
                "{d},{o},{h},{l},{c},{c},{volume}\n",
                o = fmt_num(*p),
                h = fmt_num(p * spread),
                l = fmt_num(p / spread),
                c = fmt_num(*p),
            ));
        }
        let path = dir.join(format!("{ticker}.csv"));
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        out.push(path);
    }
    Ok(out)
}
