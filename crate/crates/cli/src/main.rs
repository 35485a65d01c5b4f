use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use stockgbm::Metric;
use stockgbm_cli::pipeline::{self, Subject};
use stockgbm_cli::synth::{generate_universe, SynthSpec};
use stockgbm_cli::{CliError, Result, RunConfig};

/// Calibrate GBM on daily price histories, build ranked portfolios and score
/// simulated forecasts against realized prices.
#[derive(Parser)]
#[command(name = "stockgbm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Directory holding one <TICKER>.csv per asset
    #[arg(long, global = true)]
    data_dir: Option<PathBuf>,

    /// Directory for generated tables
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// Flat key = value configuration file; flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Simulated paths per subject
    #[arg(long, global = true)]
    paths: Option<usize>,

    /// Random portfolios tried per max-Sharpe search
    #[arg(long, global = true)]
    trials: Option<usize>,

    /// Annual risk-free rate as a fraction
    #[arg(long, global = true)]
    risk_free: Option<f64>,

    /// Comma-separated horizons out of 1w,2w,1m,6m,1y
    #[arg(long, global = true)]
    horizons: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Annual return, risk and Sharpe per ticker over the calibration window
    Stats {
        /// Tickers to include; all files in the data directory when omitted
        tickers: Vec<String>,
    },
    /// Rank the universe by a metric and split it into groups
    Group {
        #[arg(long, value_parser = parse_metric)]
        metric: Metric,
    },
    /// Simulate and score a ticker, a group portfolio (e.g. sharpe-1) or all tickers
    Simulate {
        #[arg(long)]
        subject: String,
    },
    /// Run stats, all groupings and every simulation
    Report,
    /// Write a synthetic universe of daily CSV files into the data directory
    Synth {
        #[arg(long, default_value_t = 78)]
        assets: usize,
        #[arg(long, default_value_t = 1)]
        universe_seed: u64,
    },
}

fn parse_metric(s: &str) -> std::result::Result<Metric, String> {
    s.parse().map_err(|e: stockgbm::Error| e.to_string())
}

fn build_config(cli: &Cli) -> Result<RunConfig> {
    let mut config = RunConfig::default();
    if let Some(path) = &cli.config {
        config.apply_file(path)?;
    }
    if let Some(d) = &cli.data_dir {
        config.data_dir = d.clone();
    }
    if let Some(d) = &cli.out_dir {
        config.out_dir = d.clone();
    }
    if let Some(s) = cli.seed {
        config.seed = s;
    }
    if let Some(p) = cli.paths {
        config.n_paths = p;
    }
    if let Some(t) = cli.trials {
        config.n_trials = t;
    }
    if let Some(r) = cli.risk_free {
        config.risk_free = r;
    }
    if let Some(h) = &cli.horizons {
        config.set("horizons", h)?;
    }
    config.validate()?;
    Ok(config)
}

fn run(cli: Cli) -> Result<()> {
    let config = build_config(&cli)?;
    match cli.command {
        Command::Stats { tickers } => {
            let tickers = if tickers.is_empty() {
                pipeline::list_tickers(&config.data_dir)?
            } else {
                tickers
            };
            let rows = pipeline::cmd_stats(&config, &tickers)?;
            println!(
                "{} tickers -> {}",
                rows.len(),
                config.out_dir.join("stats.csv").display()
            );
        }
        Command::Group { metric } => {
            let res = pipeline::cmd_group(&config, metric)?;
            for (k, g) in res.grouping.groups.iter().enumerate() {
                println!("{}: {}", pipeline::group_id(metric, k), g.join(" "));
            }
        }
        Command::Simulate { subject } => {
            let subject: Subject = subject.parse()?;
            for r in pipeline::cmd_simulate(&config, &subject)? {
                let cells: Vec<String> = r
                    .scores
                    .iter()
                    .map(|s| format!("{}={:.4}/{}", s.horizon, s.mape, s.band))
                    .collect();
                println!("{}: {}", r.subject, cells.join(" "));
            }
        }
        Command::Report => {
            let outcome = pipeline::cmd_report(&config)?;
            let n: usize = outcome.portfolios.iter().map(|(_, r)| r.len()).sum();
            println!(
                "{} assets and {n} portfolios -> {}",
                outcome.assets.len(),
                config.out_dir.display()
            );
        }
        Command::Synth {
            assets,
            universe_seed,
        } => {
            let spec = SynthSpec {
                n_assets: assets,
                seed: universe_seed,
                ..SynthSpec::default()
            };
            let files = generate_universe(&config.data_dir, &spec)?;
            println!("{} files -> {}", files.len(), config.data_dir.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &CliError) -> u8 {
    e.exit_code() as u8
}
