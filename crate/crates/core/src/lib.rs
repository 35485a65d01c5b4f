//! Daily price histories in, simulated futures and forecast scores out.
//!
//! The crate is split along the pipeline:
//!
//! - [`market_data`]: CSV ingestion, alignment, base-100 normalization and windowing.
//! - [`stats`]: simple/log returns, annualized return and risk, Sharpe index.
//! - [`portfolio`]: buy-and-hold value series, random-weight search for the
//!   max-Sharpe allocation, ranked grouping of a universe.
//! - [`gbm`]: Wiener increments, closed-form geometric Brownian motion paths,
//!   ensembles and quantile envelopes.
//! - [`evaluation`]: Pearson correlation, MAPE and precision bands per horizon.
//!
//! All randomness flows through [`rng::stream_rng`], so every simulated
//! quantity is a pure function of `(seed, stream index)` and does not depend
//! on thread scheduling.

pub mod error;
pub mod evaluation;
pub mod gbm;
pub mod market_data;
pub mod portfolio;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use evaluation::{
    classify_mape, evaluate_ensemble, mape, pearson_correlation, EvalReport, Horizon, HorizonScore,
    MapeDenominator, PrecisionBand,
};
pub use gbm::{
    envelope, gbm_path, simulate_ensemble, wiener_increments, Envelope, GbmParams, PathSet,
    SimulationConfig,
};
pub use market_data::{align_panel, load_csv, PricePanel, PriceSeries, TRADING_DAYS_PER_YEAR};
pub use portfolio::{
    optimize_max_sharpe, portfolio_stats, portfolio_value_series, random_weights, rank_and_group,
    GroupingConfig, Metric, Portfolio, PortfolioGroup, PortfolioStats, Weights,
};
pub use stats::{
    annualize_return, annualize_risk, asset_stats, log_returns, sharpe_ratio, simple_returns,
    AssetStats, ReturnKind, ReturnSeries, DEFAULT_RISK_FREE,
};
