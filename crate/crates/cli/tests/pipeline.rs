mod common;

use std::fs;
use std::process::Command;

use common::*;
use stockgbm::{asset_stats, load_csv, Horizon, Metric, PrecisionBand};
use stockgbm_cli::pipeline::{
    cmd_group, cmd_report, cmd_simulate, cmd_stats, list_tickers, Subject,
};
use stockgbm_cli::RunConfig;

fn tickers(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("SYN{i:02}")).collect()
}

#[test]
fn stats_zero_risk_asset_reports_na() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path());
    let days = calendar();
    // ratio 1.25 is exact in binary, so every log return is identical
    let prices: Vec<f64> = (0..12).map(|k| 100.0 * 1.25f64.powi(k)).collect();
    write_prices(&cfg.data_dir, "FLAT", &days[..12], &prices);

    let rows = cmd_stats(&cfg, &["FLAT".to_string()]).unwrap();
    assert_eq!(rows[0].stats.risk_annual, 0.0);
    assert_eq!(rows[0].stats.sharpe, None);
    let (_, cells) = read_csv(&cfg.out_dir.join("stats.csv"));
    assert_eq!(cells[0][4], "0");
    assert_eq!(cells[0][5], "NA");
}

#[test]
fn stats_rows_match_library() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path());
    synthetic(&cfg.data_dir, 4, 3);
    let names = tickers(4);
    let rows = cmd_stats(&cfg, &names).unwrap();
    let (header, cells) = read_csv(&cfg.out_dir.join("stats.csv"));
    assert_eq!(header[0], "ticker");
    assert_eq!(cells.len(), 4);
    for (row, cell) in rows.iter().zip(&cells) {
        let s = load_csv(
            cfg.data_dir.join(format!("{}.csv", row.ticker)),
            &row.ticker,
        )
        .unwrap()
        .slice_period(cfg.calibration.start, cfg.calibration.end)
        .unwrap();
        let expected = asset_stats(&s, cfg.risk_free).unwrap();
        assert_eq!(row.stats, expected);
        // written values round-trip within 1e-9
        let written: Vec<f64> = cell[1..].iter().map(|c| c.parse().unwrap()).collect();
        let mem = [
            expected.mu_daily,
            expected.sigma_daily,
            expected.return_annual,
            expected.risk_annual,
            expected.sharpe.unwrap(),
        ];
        for (w, m) in written.iter().zip(mem) {
            assert!((w - m).abs() <= 1e-9 * m.abs().max(1e-12), "{w} vs {m}");
        }
    }
    assert!(cfg.out_dir.join("stats.txt").exists());
    assert!(cfg.out_dir.join("stats.meta.json").exists());
}

#[test]
fn stats_empty_ticker_list() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path());
    let rows = cmd_stats(&cfg, &[]).unwrap();
    assert!(rows.is_empty());
    assert_eq!(
        fs::read_to_string(cfg.out_dir.join("stats.csv")).unwrap(),
        "ticker,mu_daily,sigma_daily,return_annual,risk_annual,sharpe\n"
    );
}

#[test]
fn stats_missing_ticker_is_a_data_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path());
    synthetic(&cfg.data_dir, 1, 3);
    let err = cmd_stats(&cfg, &["NOPE".to_string()]).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn group_singletons_descending() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        group_count: 6,
        group_size: 1,
        ..config(tmp.path())
    };
    synthetic(&cfg.data_dir, 6, 4);
    let res = cmd_group(&cfg, Metric::Return).unwrap();
    let scores: Vec<f64> = res.grouping.ranking().map(|(_, s)| s).collect();
    assert!(scores.windows(2).all(|w| w[0] >= w[1]));
    let (header, rows) = read_csv(&cfg.out_dir.join("groups_return.csv"));
    assert_eq!(header.len(), 7);
    assert_eq!(rows.len(), 1);
}

#[test]
fn group_full_universe_shape() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path());
    synthetic(&cfg.data_dir, 78, 5);
    for metric in Metric::ALL {
        cmd_group(&cfg, metric).unwrap();
        let (header, rows) = read_csv(&cfg.out_dir.join(format!("groups_{metric}.csv")));
        assert_eq!(
            header,
            ["rank", "group_1", "group_2", "group_3", "group_4", "group_5", "group_6"]
        );
        assert_eq!(rows.len(), 13);
        let mut seen: Vec<&String> = rows.iter().flat_map(|r| &r[1..]).collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 78);
    }
}

#[test]
fn sharpe_group_weights_sum_to_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        n_trials: 1,
        group_count: 2,
        group_size: 3,
        ..config(tmp.path())
    };
    synthetic(&cfg.data_dir, 6, 6);
    cmd_group(&cfg, Metric::Sharpe).unwrap();
    let (_, rows) = read_csv(&cfg.out_dir.join("weights_sharpe.csv"));
    assert_eq!(rows.len(), 6);
    for g in ["sharpe-1", "sharpe-2"] {
        let sum: f64 = rows
            .iter()
            .filter(|r| r[0] == g)
            .map(|r| r[2].parse::<f64>().unwrap())
            .sum();
        assert!((sum - 1.0).abs() < 1e-9, "{g}: {sum}");
    }
}

#[test]
fn group_size_mismatch_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path());
    synthetic(&cfg.data_dir, 10, 7);
    assert!(matches!(
        cmd_group(&cfg, Metric::Risk),
        Err(stockgbm_cli::CliError::Core(stockgbm::Error::Indivisible {
            count: 10,
            ..
        }))
    ));
}

#[test]
fn perfect_forecast_scores_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path());
    let days = calendar();
    write_prices(&cfg.data_dir, "CONST", &days, &vec![42.0; days.len()]);
    let reports = cmd_simulate(&cfg, &Subject::Asset("CONST".into())).unwrap();
    for s in &reports[0].scores {
        assert_eq!(s.mape, 0.0);
        assert_eq!(s.band, PrecisionBand::High);
        assert_eq!(s.mean_correlation, None);
    }
    let (_, rows) = read_csv(&cfg.out_dir.join("eval_CONST.csv"));
    assert!(rows
        .iter()
        .all(|r| r[2] == "NA" && r[3] == "0" && r[4] == "high"));
}

#[test]
fn all_subjects_with_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path());
    synthetic(&cfg.data_dir, 6, 8);
    let reports = cmd_simulate(&cfg, &Subject::AllAssets).unwrap();
    assert_eq!(reports.len(), 6);
    let evals = fs::read_dir(&cfg.out_dir)
        .unwrap()
        .filter(|e| {
            let n = e.as_ref().unwrap().file_name();
            let n = n.to_string_lossy();
            n.starts_with("eval_") && n.ends_with(".csv")
        })
        .count();
    assert_eq!(evals, 6);

    let (header, rows) = read_csv(&cfg.out_dir.join("summary_assets.csv"));
    assert_eq!(header.len(), 11);
    assert_eq!(rows.len(), 7);
    assert_eq!(rows[6][0], "mean");
    // mean row agrees with the per-subject rows
    for col in 6..11 {
        let m: f64 = rows[..6]
            .iter()
            .map(|r| r[col].parse::<f64>().unwrap())
            .sum::<f64>()
            / 6.0;
        assert!((rows[6][col].parse::<f64>().unwrap() - m).abs() < 1e-9);
    }

    // eval files round-trip to the in-memory reports
    for r in &reports {
        let (_, rows) = read_csv(&cfg.out_dir.join(format!("eval_{}.csv", r.subject)));
        for (row, s) in rows.iter().zip(&r.scores) {
            assert_eq!(row[0], s.horizon.label());
            let mape: f64 = row[3].parse().unwrap();
            assert!((mape - s.mape).abs() <= 1e-9 * s.mape);
            let corr: f64 = row[2].parse().unwrap();
            let mem = s.mean_correlation.unwrap();
            assert!((corr - mem).abs() <= 1e-9 * mem.abs().max(1e-12));
        }
    }

    let (header, rows) = read_csv(&cfg.out_dir.join("envelope_SYN01.csv"));
    assert_eq!(
        header,
        ["day_index", "date", "actual", "mean", "q05", "q95"]
    );
    assert_eq!(rows.len(), 248);
    for r in &rows {
        let (lo, hi): (f64, f64) = (r[4].parse().unwrap(), r[5].parse().unwrap());
        assert!(lo <= hi);
    }
}

#[test]
fn group_subject_simulation() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        group_count: 2,
        group_size: 3,
        ..config(tmp.path())
    };
    synthetic(&cfg.data_dir, 6, 9);
    let r = cmd_simulate(
        &cfg,
        &Subject::Group {
            metric: Metric::Sharpe,
            index: 1,
        },
    )
    .unwrap();
    assert_eq!(r[0].subject, "sharpe-2");
    assert!(cfg.out_dir.join("eval_sharpe-2.csv").exists());
    assert!(cmd_simulate(
        &cfg,
        &Subject::Group {
            metric: Metric::Risk,
            index: 5
        }
    )
    .is_err());
}

#[test]
fn short_evaluation_window_is_a_data_error() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = config(tmp.path());
    cfg.evaluation.end = ymd(2019, 3, 31);
    synthetic(&cfg.data_dir, 1, 10);
    let err = cmd_simulate(&cfg, &Subject::Asset("SYN01".into())).unwrap_err();
    assert_eq!(err.exit_code(), 2);

    cfg.horizons = vec![Horizon::Week, Horizon::Month];
    cmd_simulate(&cfg, &Subject::Asset("SYN01".into())).unwrap();
}

#[test]
fn report_is_deterministic_across_runs_and_dirs() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig {
        group_count: 3,
        group_size: 4,
        ..config(tmp.path())
    };
    synthetic(&cfg.data_dir, 12, 11);
    cmd_report(&cfg).unwrap();
    let first = snapshot(&cfg.out_dir);
    cfg.out_dir = tmp.path().join("again");
    cmd_report(&cfg).unwrap();
    assert_eq!(first, snapshot(&cfg.out_dir));
    assert!(first.iter().any(|(n, _)| n == "summary_sharpe.csv"));
    assert_eq!(list_tickers(&cfg.data_dir).unwrap().len(), 12);
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_stockgbm"))
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    let out = tmp.path().join("out");

    assert_eq!(bin().arg("--help").output().unwrap().status.code(), Some(0));
    assert_eq!(
        bin().arg("frobnicate").output().unwrap().status.code(),
        Some(1)
    );
    assert_eq!(
        bin()
            .args(["group", "--metric", "alpha"])
            .output()
            .unwrap()
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        bin()
            .arg("--data-dir")
            .arg(&data)
            .arg("stats")
            .output()
            .unwrap()
            .status
            .code(),
        Some(2)
    );

    let days = calendar();
    write_prices(&data, "FLAT", &days, &vec![10.0; days.len()]);
    write_prices(
        &data,
        "MOVE",
        &days,
        &(0..days.len())
            .map(|k| 10.0 + (k % 7) as f64)
            .collect::<Vec<_>>(),
    );
    let cfg_file = tmp.path().join("run.cfg");
    fs::write(&cfg_file, "group_count = 2\ngroup_size = 1\nseed = 5\n").unwrap();
    let status = bin()
        .arg("--config")
        .arg(&cfg_file)
        .arg("--data-dir")
        .arg(&data)
        .arg("--out-dir")
        .arg(&out)
        .args(["group", "--metric", "sharpe"])
        .output()
        .unwrap()
        .status;
    // FLAT has zero risk, so its Sharpe index is undefined
    assert_eq!(status.code(), Some(3));

    let o = bin()
        .arg("--config")
        .arg(&cfg_file)
        .arg("--data-dir")
        .arg(&data)
        .arg("--out-dir")
        .arg(&out)
        .args(["group", "--metric", "return"])
        .output()
        .unwrap();
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let meta: serde_json::Value =
        serde_json::from_slice(&fs::read(out.join("groups_return.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 5);
    assert_eq!(meta["config"]["group_size"], 1);
}
