//! Geometric Brownian motion sampled with its closed-form solution
//!
//! ```text
//! dS = mu S dt + sigma S dW
//! S(t) = S(0) exp((mu - sigma^2 / 2) t + sigma W(t))
//! ```
//!
//! Time is counted in trading days, so `mu` and `sigma` are daily figures
//! calibrated on daily log returns and `dt` defaults to one day.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::market_data::{PriceSeries, EVALUATION_YEAR_DAYS};
use crate::rng::stream_rng;
use crate::stats::{log_returns, mean, sample_std};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GbmParams {
    pub s0: f64,
    pub mu: f64,
    pub sigma: f64,
    pub dt: f64,
}

impl GbmParams {
    pub fn new(s0: f64, mu: f64, sigma: f64, dt: f64) -> Result<Self> {
        if !(s0.is_finite() && s0 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "s0 must be positive, got {s0}"
            )));
        }
        if !mu.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "mu must be finite, got {mu}"
            )));
        }
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sigma must be non-negative, got {sigma}"
            )));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "dt must be positive, got {dt}"
            )));
        }
        Ok(Self { s0, mu, sigma, dt })
    }

    /// Daily drift and volatility from the mean and sample deviation of the
    /// series' log returns; the walk starts from the last observed price.
    pub fn calibrate(history: &PriceSeries) -> Result<Self> {
        let r = log_returns(history);
        if r.len() < 2 {
            return Err(Error::InsufficientData {
                ticker: history.ticker().to_string(),
                rows: history.len(),
                needed: 3,
            });
        }
        Self::new(
            history.last_price(),
            mean(r.values()),
            sample_std(r.values()),
            1.0,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SimulationConfig {
    pub n_paths: usize,
    pub horizon: usize,
    pub seed: u64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            n_paths: 1000,
            horizon: EVALUATION_YEAR_DAYS,
            seed: 0,
        }
    }
}

impl SimulationConfig {
    fn validate(&self) -> Result<()> {
        if self.n_paths == 0 || self.horizon == 0 {
            return Err(Error::InvalidParameter(format!(
                "need n_paths >= 1 and horizon >= 1, got {} and {}",
                self.n_paths, self.horizon
            )));
        }
        Ok(())
    }
}

/// `n` Wiener increments `eps * sqrt(dt)` with `eps` standard normal.
pub fn wiener_increments<R: Rng + ?Sized>(n: usize, dt: f64, rng: &mut R) -> Result<Vec<f64>> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "dt must be positive, got {dt}"
        )));
    }
    let scale = dt.sqrt();
    Ok((0..n)
        .map(|_| {
            let eps: f64 = StandardNormal.sample(rng);
            eps * scale
        })
        .collect())
}

/// One path of `horizon + 1` prices starting at `s0`.
pub fn gbm_path<R: Rng + ?Sized>(params: &GbmParams, horizon: usize, rng: &mut R) -> Vec<f64> {
    let drift = params.mu - 0.5 * params.sigma * params.sigma;
    let increments = wiener_increments(horizon, params.dt, rng).expect("dt validated by GbmParams");
    let mut path = Vec::with_capacity(horizon + 1);
    path.push(params.s0);
    let mut w = 0.0;
    for (k, dw) in increments.iter().enumerate() {
        w += dw;
        let t = (k + 1) as f64 * params.dt;
        path.push(params.s0 * (drift * t + params.sigma * w).exp());
    }
    path
}

/// `n_paths` independent trajectories, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    pub params: GbmParams,
    pub config: SimulationConfig,
    values: Vec<f64>,
}

impl PathSet {
    pub fn n_paths(&self) -> usize {
        self.config.n_paths
    }

    /// Number of stored points per path (`horizon + 1`).
    pub fn width(&self) -> usize {
        self.config.horizon + 1
    }

    pub fn path(&self, i: usize) -> &[f64] {
        let w = self.width();
        &self.values[i * w..(i + 1) * w]
    }

    pub fn paths(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.width())
    }

    pub(crate) fn column(&self, k: usize) -> Vec<f64> {
        self.paths().map(|p| p[k]).collect()
    }
}

/// Path `i` is drawn from stream `(config.seed, i)`, so the ensemble is the
/// same under any thread count.
pub fn simulate_ensemble(params: &GbmParams, config: &SimulationConfig) -> Result<PathSet> {
    config.validate()?;
    let width = config.horizon + 1;
    let mut values = vec![0.0; config.n_paths * width];
    values
        .par_chunks_exact_mut(width)
        .enumerate()
        .for_each(|(i, row)| {
            let mut rng = stream_rng(config.seed, i as u64);
            row.copy_from_slice(&gbm_path(params, config.horizon, &mut rng));
        });
    Ok(PathSet {
        params: *params,
        config: *config,
        values,
    })
}

/// Per-step quantile band and mean across an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Envelope {
    pub lower_q: f64,
    pub upper_q: f64,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub mean: Vec<f64>,
}

/// Nearest-rank quantile of sorted data: the value of rank `ceil(q * n)`,
/// with rank clamped to `1..=n`.
fn nearest_rank(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let rank = ((q * n as f64).ceil() as usize).clamp(1, n);
    sorted[rank - 1]
}

pub fn envelope(paths: &PathSet, lower_q: f64, upper_q: f64) -> Result<Envelope> {
    if !(0.0..=1.0).contains(&lower_q) || !(0.0..=1.0).contains(&upper_q) || lower_q >= upper_q {
        return Err(Error::InvalidParameter(format!(
            "quantiles must satisfy 0 <= lower < upper <= 1, got {lower_q} and {upper_q}"
        )));
    }
    let width = paths.width();
    let mut lower = Vec::with_capacity(width);
    let mut upper = Vec::with_capacity(width);
    let mut mean = Vec::with_capacity(width);
    for k in 0..width {
        let mut col = paths.column(k);
        mean.push(col.iter().sum::<f64>() / col.len() as f64);
        col.sort_by(f64::total_cmp);
        lower.push(nearest_rank(&col, lower_q));
        upper.push(nearest_rank(&col, upper_q));
    }
    Ok(Envelope {
        lower_q,
        upper_q,
        lower,
        upper,
        mean,
    })
}

#[cfg(test)]
mod tests {
    use chrono::NaiveDate;
    use proptest::prelude::*;

    use super::*;

    fn params(s0: f64, mu: f64, sigma: f64) -> GbmParams {
        GbmParams::new(s0, mu, sigma, 1.0).unwrap()
    }

    fn moments(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, v.sqrt())
    }

    #[test]
    fn params_validation() {
        assert!(GbmParams::new(0.0, 0.0, 0.1, 1.0).is_err());
        assert!(GbmParams::new(1.0, 0.0, -0.1, 1.0).is_err());
        assert!(GbmParams::new(1.0, 0.0, 0.1, 0.0).is_err());
        assert!(GbmParams::new(1.0, f64::NAN, 0.1, 1.0).is_err());
    }

    #[test]
    fn calibrate_uses_log_return_moments() {
        let d0 = NaiveDate::from_ymd_opt(2018, 1, 1).unwrap();
        let prices = vec![100.0, 110.0, 99.0, 104.0];
        let dates = (0..4).map(|i| d0 + chrono::Days::new(i)).collect();
        let s = PriceSeries::new("X", dates, prices.clone()).unwrap();
        let p = GbmParams::calibrate(&s).unwrap();
        let r: Vec<f64> = prices.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
        let (m, sd) = moments(&r);
        assert_eq!(p.s0, 104.0);
        assert!((p.mu - m).abs() < 1e-15);
        assert!((p.sigma - sd).abs() < 1e-15);
        assert_eq!(p.dt, 1.0);
    }

    #[test]
    fn wiener_moments() {
        let n = 200_000;
        let x = wiener_increments(n, 1.0, &mut stream_rng(1, 0)).unwrap();
        let (m, sd) = moments(&x);
        assert!(m.abs() < 3.0 / (n as f64).sqrt());
        assert!((sd - 1.0).abs() < 0.01);

        let x = wiener_increments(n, 4.0, &mut stream_rng(2, 0)).unwrap();
        assert!((moments(&x).1 - 2.0).abs() < 0.02);
    }

    #[test]
    fn wiener_is_deterministic_per_stream() {
        let a = wiener_increments(100, 1.0, &mut stream_rng(5, 2)).unwrap();
        let b = wiener_increments(100, 1.0, &mut stream_rng(5, 2)).unwrap();
        assert_eq!(a, b);
        assert!(wiener_increments(1, 0.0, &mut stream_rng(5, 2)).is_err());
    }

    #[test]
    fn degenerate_paths() {
        let p = gbm_path(&params(100.0, 0.001, 0.0), 2, &mut stream_rng(0, 0));
        assert_eq!(
            p,
            vec![100.0, 100.0 * 0.001f64.exp(), 100.0 * 0.002f64.exp()]
        );
        let p = gbm_path(&params(100.0, 0.0, 0.0), 10, &mut stream_rng(0, 0));
        assert!(p.iter().all(|&x| x == 100.0));
    }

    #[test]
    fn log_increments_have_gbm_moments() {
        let (mu, sigma) = (0.0004, 0.01);
        let n = 20_000;
        let p = gbm_path(&params(100.0, mu, sigma), n, &mut stream_rng(3, 0));
        let inc: Vec<f64> = p.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
        let (m, sd) = moments(&inc);
        let se = sigma / (n as f64).sqrt();
        assert!((m - (mu - sigma * sigma / 2.0)).abs() < 5.0 * se);
        // standard error of a sample deviation ~ sigma / sqrt(2n)
        assert!((sd - sigma).abs() < 5.0 * sigma / (2.0 * n as f64).sqrt());
    }

    #[test]
    fn single_path_ensemble_is_gbm_path() {
        let pr = params(50.0, 0.001, 0.02);
        let cfg = SimulationConfig {
            n_paths: 1,
            horizon: 30,
            seed: 77,
        };
        let set = simulate_ensemble(&pr, &cfg).unwrap();
        assert_eq!(
            set.path(0),
            gbm_path(&pr, 30, &mut stream_rng(77, 0)).as_slice()
        );
    }

    #[test]
    fn path_i_depends_only_on_seed_and_index() {
        let pr = params(50.0, 0.001, 0.02);
        let small = simulate_ensemble(
            &pr,
            &SimulationConfig {
                n_paths: 3,
                horizon: 20,
                seed: 4,
            },
        )
        .unwrap();
        let big = simulate_ensemble(
            &pr,
            &SimulationConfig {
                n_paths: 10,
                horizon: 20,
                seed: 4,
            },
        )
        .unwrap();
        for i in 0..3 {
            assert_eq!(small.path(i), big.path(i));
        }
        assert_ne!(big.path(0), big.path(1));
    }

    #[test]
    fn zero_sigma_paths_coincide() {
        let set = simulate_ensemble(
            &params(10.0, 0.002, 0.0),
            &SimulationConfig {
                n_paths: 5,
                horizon: 12,
                seed: 1,
            },
        )
        .unwrap();
        assert!(set.paths().all(|p| p == set.path(0)));
        let env = envelope(&set, 0.05, 0.95).unwrap();
        for k in 0..set.width() {
            assert_eq!(env.lower[k], set.path(0)[k]);
            assert_eq!(env.upper[k], set.path(0)[k]);
            assert!((env.mean[k] - set.path(0)[k]).abs() < 1e-12 * set.path(0)[k]);
        }
    }

    #[test]
    fn ensemble_mean_matches_lognormal_mean() {
        let (s0, mu, sigma, h, n) = (100.0, 0.0004, 0.01, 247usize, 5000usize);
        let set = simulate_ensemble(
            &params(s0, mu, sigma),
            &SimulationConfig {
                n_paths: n,
                horizon: h,
                seed: 2024,
            },
        )
        .unwrap();
        let terminal = set.column(h);
        let t = h as f64;
        let mean = terminal.iter().sum::<f64>() / n as f64;
        let expected = s0 * (mu * t).exp();
        // analytic log-normal variance: s0^2 e^{2 mu t} (e^{sigma^2 t} - 1)
        let se =
            (s0 * s0 * (2.0 * mu * t).exp() * ((sigma * sigma * t).exp() - 1.0) / n as f64).sqrt();
        assert!((expected - 110.3846).abs() < 1e-3);
        assert!(
            (mean - expected).abs() < 3.0 * se,
            "{mean} vs {expected} (se {se})"
        );
    }

    #[test]
    fn discounted_mean_stays_near_s0() {
        let (s0, mu, sigma, n) = (100.0, 0.0008, 0.02, 4000usize);
        let set = simulate_ensemble(
            &params(s0, mu, sigma),
            &SimulationConfig {
                n_paths: n,
                horizon: 120,
                seed: 8,
            },
        )
        .unwrap();
        for k in [1usize, 10, 30, 60, 120] {
            let t = k as f64;
            let disc: Vec<f64> = set.column(k).iter().map(|x| x / (mu * t).exp()).collect();
            let m = disc.iter().sum::<f64>() / n as f64;
            let se = s0 * ((sigma * sigma * t).exp() - 1.0).sqrt() / (n as f64).sqrt();
            assert!((m - s0).abs() < 5.0 * se, "step {k}: {m}");
        }
    }

    #[test]
    fn envelope_examples() {
        let cfg = SimulationConfig {
            n_paths: 3,
            horizon: 2,
            seed: 0,
        };
        let set = PathSet {
            params: params(100.0, 0.0, 0.0),
            config: cfg,
            values: vec![90.0, 90.0, 90.0, 100.0, 100.0, 100.0, 110.0, 110.0, 110.0],
        };
        let env = envelope(&set, 0.5, 1.0).unwrap();
        assert_eq!(env.lower, vec![100.0; 3]);
        assert_eq!(env.upper, vec![110.0; 3]);
        assert_eq!(env.mean, vec![100.0; 3]);

        let env = envelope(&set, 0.0, 1.0).unwrap();
        assert_eq!(env.lower, vec![90.0; 3]);
        assert_eq!(env.upper, vec![110.0; 3]);

        assert!(envelope(&set, 0.9, 0.1).is_err());
        assert!(envelope(&set, 0.5, 0.5).is_err());
        assert!(envelope(&set, -0.1, 0.5).is_err());
    }

    #[test]
    fn ensemble_is_thread_count_independent() {
        let pr = params(100.0, 0.0003, 0.015);
        let cfg = SimulationConfig {
            n_paths: 64,
            horizon: 50,
            seed: 99,
        };
        let a = simulate_ensemble(&pr, &cfg).unwrap();
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| simulate_ensemble(&pr, &cfg).unwrap());
        assert_eq!(a, b);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn prices_stay_positive(
            s0 in 0.01f64..1e4,
            mu in -0.05f64..0.05,
            sigma in 0.0f64..0.2,
            seed in any::<u64>(),
        ) {
            let set = simulate_ensemble(&params(s0, mu, sigma), &SimulationConfig { n_paths: 8, horizon: 60, seed }).unwrap();
            for p in set.paths() {
                prop_assert_eq!(p[0], s0);
                prop_assert!(p.iter().all(|&x| x > 0.0));
            }
        }
    }
}
