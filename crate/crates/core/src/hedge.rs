//! Δ-hedged portfolios Π = O − Δ·S and their daily backtest.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::distfit::{ols, GammaParams};
use crate::error::{Error, Result};
use crate::par::{self, Exec};
use crate::pricing::{call_price, OptionContract, OptionKind, SeriesControl};
use crate::rng::stream_rng;
use crate::specfun::norm_cdf;
use crate::volest::MarketSeries;

/// Π = O − Δ·S
pub fn build_portfolio(option_value: f64, delta: f64, spot: f64) -> f64 {
    option_value - delta * spot
}

/// Π = −E e^{−r t} Φ⁻ for a call with `c.t` left to expiry.
pub fn portfolio_explicit(c: &OptionContract, p: &GammaParams, ctl: &SeriesControl) -> Result<f64> {
    let r = call_price(c, p, ctl)?;
    Ok(-c.strike * c.discount() * r.phi_minus)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluctuationStats {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortfolioPath {
    pub times: Vec<f64>,
    pub spots: Vec<f64>,
    pub option_values: Vec<f64>,
    pub deltas: Vec<f64>,
    pub portfolio_values: Vec<f64>,
    /// Per-day implied δr(τ); NaN where Π ≥ 0.
    pub rate_fluctuations: Vec<f64>,
    /// Slope of ln(−Π) against τ.
    pub fitted_rate: Option<f64>,
    pub fit_intercept: Option<f64>,
    /// Statistics of δr/r over the usable days.
    pub rate_fluctuation_stats: Option<FluctuationStats>,
    /// Samples with Π ≥ 0 left out of the fit.
    pub excluded: usize,
    pub fit_error: Option<String>,
}

/// Daily re-hedged short-call portfolio over a price series.
///
/// The series times share the clock of `c`: expiry is at t_b = times[0] + c.t,
/// and every sample must fall before it.
pub fn backtest(series: &MarketSeries, c: &OptionContract, p: &GammaParams, ctl: &SeriesControl, exec: Exec) -> Result<PortfolioPath> {
    c.validate()?;
    p.validate()?;
    if c.kind != OptionKind::Call {
        return Err(Error::Invalid("backtest expects a call contract".into()));
    }
    if series.len() < 2 {
        return Err(Error::Invalid("backtest needs at least two samples".into()));
    }
    let t_b = series.times[0] + c.t;
    if let Some(&last) = series.times.last() {
        if last >= t_b {
            return Err(Error::Invalid(format!("series runs to τ = {last}, past expiry t_b = {t_b}")));
        }
    }
    let vbar = p.vbar();
    let rows = par::try_map_range(exec, series.len(), |i| -> Result<(f64, f64, f64, f64)> {
        let tau = series.times[i];
        let s = series.prices[i];
        let ci = OptionContract { spot: s, t: t_b - tau, ..*c };
        let r = call_price(&ci, p, ctl).map_err(|e| e.context(format!("pricing at τ = {tau}")))?;
        let pi = build_portfolio(r.price, r.phi_plus, s);
        let rem = t_b - tau;
        let y_minus = ((s / c.strike).ln() + (c.rate - 0.5 * vbar) * rem) / (vbar * rem).sqrt();
        let dr = -(r.phi_minus / norm_cdf(y_minus)).ln() / rem;
        Ok((r.price, r.phi_plus, pi, dr))
    })?;
    let option_values: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let deltas: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let portfolio_values: Vec<f64> = rows.iter().map(|r| r.2).collect();

    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut rate_fluctuations = Vec::with_capacity(rows.len());
    for (i, r) in rows.iter().enumerate() {
        if r.2 < 0.0 {
            xs.push(series.times[i]);
            ys.push((-r.2).ln());
            rate_fluctuations.push(r.3);
        } else {
            rate_fluctuations.push(f64::NAN);
        }
    }
    let excluded = rows.len() - xs.len();
    let (mut fitted_rate, mut fit_intercept, mut fit_error) = (None, None, None);
    if xs.len() >= 2 {
        let (slope, intercept) = ols(&xs, &ys)?;
        fitted_rate = Some(slope);
        fit_intercept = Some(intercept);
    } else {
        fit_error = Some(format!("only {} samples with Π < 0; exponential fit skipped", xs.len()));
    }
    let rel: Vec<f64> = rate_fluctuations.iter().filter(|x| x.is_finite()).map(|x| x / c.rate).filter(|x| x.is_finite()).collect();
    let rate_fluctuation_stats = (rel.len() >= 2).then(|| {
        let n = rel.len() as f64;
        let mean = rel.iter().sum::<f64>() / n;
        let var = rel.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        FluctuationStats { mean, stderr: (var / n).sqrt(), n: rel.len() }
    });
    Ok(PortfolioPath {
        times: series.times.clone(),
        spots: series.prices.clone(),
        option_values,
        deltas,
        portfolio_values,
        rate_fluctuations,
        fitted_rate,
        fit_intercept,
        rate_fluctuation_stats,
        excluded,
        fit_error,
    })
}

/// Daily log-price path ln S_{i+1} = ln S_i + r − v_i/2 + √v_i Z_i.
pub fn simulate_price_path(s0: f64, rate: f64, variances: &[f64], seed: u64) -> Result<MarketSeries> {
    if !(s0 > 0.0) {
        return Err(Error::domain("simulate_price_path", "initial price must be positive"));
    }
    let mut rng = stream_rng(seed, 0);
    let mut prices = Vec::with_capacity(variances.len() + 1);
    let mut x = s0.ln();
    prices.push(s0);
    for &v in variances {
        if !(v >= 0.0) {
            return Err(Error::domain("simulate_price_path", format!("variance {v} must be nonnegative")));
        }
        let z: f64 = StandardNormal.sample(&mut rng);
        x += rate - 0.5 * v + v.sqrt() * z;
        prices.push(x.exp());
    }
    MarketSeries::daily(prices)
}
