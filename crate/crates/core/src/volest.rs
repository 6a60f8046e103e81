//! Returns, intraday-normalized returns, forward-window volatility and
//! histogram densities from a price series.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{self, Exec};

/// Timestamped prices. Times are in sampling units (Δt₀ = 1 trading day for
/// daily data); `trading_day_length` is the number of samples per day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketSeries {
    pub times: Vec<f64>,
    pub prices: Vec<f64>,
    pub trading_day_length: usize,
}

impl MarketSeries {
    pub fn new(times: Vec<f64>, prices: Vec<f64>, trading_day_length: usize) -> Result<Self> {
        if times.len() != prices.len() {
            return Err(Error::Invalid(format!("{} times but {} prices", times.len(), prices.len())));
        }
        if prices.len() < 2 {
            return Err(Error::Invalid("a series needs at least 2 observations".into()));
        }
        if trading_day_length == 0 {
            return Err(Error::Invalid("trading_day_length must be positive".into()));
        }
        if let Some(i) = prices.iter().position(|&p| !(p > 0.0 && p.is_finite())) {
            return Err(Error::domain("MarketSeries", format!("price at index {i} is {} (must be positive)", prices[i])));
        }
        if let Some(i) = times.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::Invalid(format!("timestamps not strictly increasing at index {}", i + 1)));
        }
        Ok(MarketSeries { times, prices, trading_day_length })
    }

    /// Daily series with times 0, 1, 2, ...
    pub fn daily(prices: Vec<f64>) -> Result<Self> {
        let times = (0..prices.len()).map(|i| i as f64).collect();
        MarketSeries::new(times, prices, 1)
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }

    /// Mean spacing of the timestamps.
    pub fn sampling_interval(&self) -> f64 {
        (self.times[self.len() - 1] - self.times[0]) / (self.len() - 1) as f64
    }

    /// Largest relative deviation of a time step from the mean spacing.
    pub fn spacing_irregularity(&self) -> f64 {
        let dt = self.sampling_interval();
        self.times.windows(2).map(|w| ((w[1] - w[0]) / dt - 1.0).abs()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolEstimatorConfig {
    pub window_n: usize,
    pub normalize: bool,
    pub n_trading_days: Option<usize>,
}

impl VolEstimatorConfig {
    pub fn plain(window_n: usize) -> Self {
        VolEstimatorConfig { window_n, normalize: false, n_trading_days: None }
    }
}

/// R(t_n) = ln[S(t_{n+1})/S(t_n)].
pub fn log_returns(series: &MarketSeries) -> Result<Vec<f64>> {
    if series.len() < 2 {
        return Err(Error::Invalid("need at least 2 prices".into()));
    }
    if let Some(i) = series.prices.iter().position(|&p| !(p > 0.0)) {
        return Err(Error::domain("log_returns", format!("price at index {i} is not positive")));
    }
    Ok(series.prices.windows(2).map(|w| (w[1] / w[0]).ln()).collect())
}

/// Divide each return by the mean |return| at the same intraday slot over the
/// first `n_td` complete days. Slot = return index mod trading_day_length.
pub fn normalized_returns(series: &MarketSeries, n_td: usize) -> Result<Vec<f64>> {
    let r = log_returns(series)?;
    normalize_by_slot(&r, series.trading_day_length, n_td)
}

pub fn normalize_by_slot(returns: &[f64], day_len: usize, n_td: usize) -> Result<Vec<f64>> {
    if day_len == 0 || n_td == 0 {
        return Err(Error::Invalid("trading day length and N_td must be positive".into()));
    }
    let complete = returns.len() / day_len;
    if complete < n_td {
        return Err(Error::Invalid(format!("series has {complete} complete trading days, {n_td} requested")));
    }
    let used = n_td * day_len;
    if returns.len() > used {
        log::warn!("dropping {} returns beyond {} complete trading days", returns.len() - used, n_td);
    }
    let mut denom = vec![0.0; day_len];
    for d in 0..n_td {
        for (s, den) in denom.iter_mut().enumerate() {
            *den += returns[d * day_len + s].abs();
        }
    }
    for (s, den) in denom.iter_mut().enumerate() {
        *den /= n_td as f64;
        if *den == 0.0 {
            return Err(Error::Degenerate(format!("intraday slot {s} has zero mean absolute return")));
        }
    }
    Ok(returns[..used].iter().enumerate().map(|(i, r)| r / denom[i % day_len]).collect())
}

const VOL_BLOCK: usize = 4096;

/// σ_T(t_η) = (1/n) Σ_{m=η}^{η+n−1} |R(t_m)| for every complete forward window.
pub fn windowed_volatility(returns: &[f64], cfg: &VolEstimatorConfig) -> Result<Vec<f64>> {
    windowed_volatility_with(returns, cfg, Exec::default())
}

/// Blocks of windows start from a fresh sum, so output is the same for any
/// thread count.
pub fn windowed_volatility_with(returns: &[f64], cfg: &VolEstimatorConfig, exec: Exec) -> Result<Vec<f64>> {
    let n = cfg.window_n;
    if n == 0 {
        return Err(Error::Invalid("window_n must be at least 1".into()));
    }
    if cfg.normalize {
        return Err(Error::Invalid("intraday normalization needs the slot structure; use volatility_from_series".into()));
    }
    let abs: Vec<f64> = returns.iter().map(|r| r.abs()).collect();
    if n > abs.len() {
        return Err(Error::Invalid(format!("window {n} exceeds the {} available returns", abs.len())));
    }
    let count = abs.len() - n + 1;
    let blocks = count.div_ceil(VOL_BLOCK);
    let inv = 1.0 / n as f64;
    let out = par::map_range(exec, blocks, |b| {
        let start = b * VOL_BLOCK;
        let end = (start + VOL_BLOCK).min(count);
        let mut sum: f64 = abs[start..start + n].iter().sum();
        let mut v = Vec::with_capacity(end - start);
        v.push(sum * inv);
        for eta in start + 1..end {
            sum += abs[eta + n - 1] - abs[eta - 1];
            v.push(sum.max(0.0) * inv);
        }
        v
    });
    Ok(out.into_iter().flatten().collect())
}

/// Volatility of a price series with optional intraday normalization.
pub fn volatility_from_series(series: &MarketSeries, cfg: &VolEstimatorConfig, exec: Exec) -> Result<Vec<f64>> {
    let r = if cfg.normalize {
        let ntd = cfg.n_trading_days.ok_or_else(|| Error::Invalid("normalize requires n_trading_days".into()))?;
        normalized_returns(series, ntd)?
    } else {
        log_returns(series)?
    };
    windowed_volatility_with(&r, &VolEstimatorConfig::plain(cfg.window_n), exec)
}

/// Relative-frequency histogram: bin i covers [origin + i·w, origin + (i+1)·w).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub origin: f64,
    pub bin_width: f64,
    pub counts: Vec<usize>,
    pub density: Vec<f64>,
}

impl Histogram {
    pub fn centers(&self) -> Vec<f64> {
        (0..self.counts.len()).map(|i| self.origin + (i as f64 + 0.5) * self.bin_width).collect()
    }
}

pub fn empirical_density(values: &[f64], bin_width: f64) -> Result<Histogram> {
    if values.is_empty() {
        return Err(Error::Invalid("no values to histogram".into()));
    }
    if !(bin_width > 0.0) {
        return Err(Error::Invalid(format!("bin width {bin_width} must be positive")));
    }
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let origin = (lo / bin_width).floor() * bin_width;
    let nbins = (((hi - origin) / bin_width).floor() as usize + 1).max(1);
    let mut counts = vec![0usize; nbins];
    for &v in values {
        let i = (((v - origin) / bin_width).floor() as usize).min(nbins - 1);
        counts[i] += 1;
    }
    let total = values.len() as f64;
    let density = counts.iter().map(|&c| c as f64 / (total * bin_width)).collect();
    Ok(Histogram { origin, bin_width, counts, density })
}
