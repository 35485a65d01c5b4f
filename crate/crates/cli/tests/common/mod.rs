#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use stockgbm_cli::synth::{generate_universe, weekdays, SynthSpec};
use stockgbm_cli::RunConfig;

pub fn ymd(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).unwrap()
}

/// Trading days spanning both default windows.
pub fn calendar() -> Vec<NaiveDate> {
    weekdays(ymd(2016, 1, 4), ymd(2019, 12, 30))
}

pub fn write_prices(dir: &Path, ticker: &str, dates: &[NaiveDate], prices: &[f64]) -> PathBuf {
    fs::create_dir_all(dir).unwrap();
    let mut text = String::from("Date,Open,High,Low,Close,Adj Close,Volume\n");
    for (d, p) in dates.iter().zip(prices) {
        text.push_str(&format!("{d},{p},{p},{p},{p},{p},1000\n"));
    }
    let path = dir.join(format!("{ticker}.csv"));
    fs::write(&path, text).unwrap();
    path
}

pub fn synthetic(dir: &Path, n_assets: usize, seed: u64) {
    generate_universe(
        dir,
        &SynthSpec {
            n_assets,
            seed,
            ..SynthSpec::default()
        },
    )
    .unwrap();
}

/// Small, fast settings rooted in a temporary directory.
pub fn config(root: &Path) -> RunConfig {
    RunConfig {
        data_dir: root.join("data"),
        out_dir: root.join("out"),
        n_paths: 200,
        n_trials: 500,
        ..RunConfig::default()
    }
}

pub fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

/// Every file in `dir`, name and bytes, sorted by name.
pub fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}
