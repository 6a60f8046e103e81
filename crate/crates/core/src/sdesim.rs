//! Euler–Maruyama simulation of the time-inhomogeneous variance and
//! volatility diffusions whose law at every time is Gamma(μ(t), ν(t)) (resp.
//! the Chi law), including the drift correction a(v, t) that keeps the
//! instantaneous law on the moving Gamma family.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma as GammaDist, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::distfit::{chi_cdf, gamma_cdf, GammaParams};
use crate::error::{Error, Result};
use crate::par::{self, Exec};
use crate::quad::{self, QuadConfig};
use crate::rng::stream_rng;
use crate::specfun::{digamma, log_gamma};

/// A positive function of time with an analytic derivative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ParamFn {
    Constant { value: f64 },
    /// slope·t
    Linear { slope: f64 },
    /// intercept + slope·t
    Affine { intercept: f64, slope: f64 },
}

impl ParamFn {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            ParamFn::Constant { value } => value,
            ParamFn::Linear { slope } => slope * t,
            ParamFn::Affine { intercept, slope } => intercept + slope * t,
        }
    }

    pub fn deriv(&self, _t: f64) -> f64 {
        match *self {
            ParamFn::Constant { .. } => 0.0,
            ParamFn::Linear { slope } | ParamFn::Affine { slope, .. } => slope,
        }
    }

    fn is_constant(&self) -> bool {
        matches!(self, ParamFn::Constant { .. }) || self.deriv(0.0) == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    #[default]
    Reflect,
    RejectStep,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SdeConfig {
    pub gamma_fn: ParamFn,
    pub mu_fn: ParamFn,
    pub nu_fn: ParamFn,
    pub dt: f64,
    /// Start time; the initial ensemble is drawn from the law at t0.
    pub t0: f64,
    pub horizon: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub boundary: Boundary,
    /// Switch off to integrate the plain square-root (CIR) drift.
    pub drift_correction: bool,
    /// Switch off the diffusion term entirely.
    pub noise: bool,
    /// Fixed starting value instead of a draw from the law at t0.
    pub start: Option<f64>,
    /// Record every n-th step (0 keeps only the terminal values).
    pub record_every: usize,
}

impl Default for SdeConfig {
    fn default() -> Self {
        SdeConfig {
            gamma_fn: ParamFn::Constant { value: 1.0 },
            mu_fn: ParamFn::Linear { slope: 2.0 },
            nu_fn: ParamFn::Linear { slope: 3.0 },
            dt: 1e-3,
            t0: 1.0,
            horizon: 2.0,
            n_paths: 100_000,
            seed: 0,
            boundary: Boundary::Reflect,
            drift_correction: true,
            noise: true,
            start: None,
            record_every: 0,
        }
    }
}

impl SdeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::Invalid(format!("dt = {} must be positive", self.dt)));
        }
        if !(self.horizon >= self.dt) {
            return Err(Error::Invalid(format!("horizon {} shorter than dt {}", self.horizon, self.dt)));
        }
        if self.n_paths < 1 {
            return Err(Error::Invalid("n_paths must be at least 1".into()));
        }
        if !(self.t0 >= 0.0) {
            return Err(Error::Invalid("t0 must be nonnegative".into()));
        }
        if let Some(s) = self.start {
            if !(s > 0.0) {
                return Err(Error::Invalid(format!("start value {s} must be positive")));
            }
        }
        for (name, f) in [("gamma", self.gamma_fn), ("mu", self.mu_fn), ("nu", self.nu_fn)] {
            for t in [self.t0, self.t0 + self.horizon] {
                if !(f.value(t) > 0.0) {
                    return Err(Error::Invalid(format!("{name}(t) must be positive on the horizon, got {} at t = {t}", f.value(t))));
                }
            }
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.horizon / self.dt).round().max(1.0) as usize
    }

    pub fn t_end(&self) -> f64 {
        self.t0 + self.n_steps() as f64 * self.dt
    }

    /// Gamma law (rate μ(t), shape ν(t)) at time t.
    pub fn law_at(&self, t: f64) -> Result<GammaParams> {
        GammaParams::new(self.mu_fn.value(t), self.nu_fn.value(t))
    }

    fn corrected(&self) -> bool {
        self.drift_correction && !(self.mu_fn.is_constant() && self.nu_fn.is_constant())
    }
}

/// D(ν, x) = e^x x^{−ν} Γ(ν) ∂P(ν, x)/∂ν with P the regularized lower incomplete Gamma.
pub fn shape_sensitivity(nu: f64, x: f64) -> Result<f64> {
    if !(nu > 0.0 && x > 0.0) {
        return Err(Error::domain("shape_sensitivity", format!("need ν, x > 0, got ν = {nu}, x = {x}")));
    }
    if x < nu {
        // Σ_j x^j/(ν)_{j+1} [ln x − ψ(ν+j+1)]
        let ln_x = x.ln();
        let mut t = 1.0 / nu;
        let mut psi = digamma(nu)? + 1.0 / nu;
        let mut sum = 0.0;
        let cap = 500 + (50.0 * nu.sqrt()) as usize;
        for j in 0..cap {
            let term = t * (ln_x - psi);
            sum += term;
            if term.abs() < 1e-17 * sum.abs() {
                return Ok(sum);
            }
            let jf = j as f64;
            t *= x / (nu + jf + 1.0);
            psi += 1.0 / (nu + jf + 1.0);
        }
        return Err(Error::Convergence { op: "shape_sensitivity (series)", terms: cap, partial: sum, last_term: t });
    }
    // −(1/x) ∫₀^∞ (ln(x+u) − ψ(ν)) (1+u/x)^{ν−1} e^{−u} du
    let psi = digamma(nu)?;
    let f = |u: f64| ((nu - 1.0) * (u / x).ln_1p() - u).exp() * ((x + u).ln() - psi);
    let decay = (1.0 - (nu - 1.0) / x).max(1e-300);
    let scale = (1.0 / decay).min(x.sqrt() + 1.0);
    let r = quad::integrate_upper(f, 0.0, scale, &QuadConfig::with_tol(1e-15, 1e-13))
        .map_err(|e| e.context("shape_sensitivity (integral)"))?;
    Ok(-r.value / x)
}

/// The drift correction a(v) entering dv = γ[ν − μv − a]dt + √(2γv)dW.
pub fn drift_correction(v: f64, mu: f64, nu: f64, gamma: f64, dmu: f64, dnu: f64) -> Result<f64> {
    check_drift_args(v, mu, nu, gamma)?;
    let mut a = v * dmu / (mu * gamma);
    if dnu != 0.0 {
        a += v * shape_sensitivity(nu, v * mu)? * dnu / gamma;
    }
    Ok(a)
}

/// The same correction with ln(vμ/ν) in place of ln(vμ) − ψ(ν) in the
/// complete-Gamma term.
pub fn drift_correction_printed(v: f64, mu: f64, nu: f64, gamma: f64, dmu: f64, dnu: f64) -> Result<f64> {
    let exact = drift_correction(v, mu, nu, gamma, dmu, dnu)?;
    if dnu == 0.0 {
        return Ok(exact);
    }
    let x = v * mu;
    let ln_weight = x - nu * x.ln() + log_gamma(nu)?;
    Ok(exact + v * dnu / gamma * ln_weight.exp() * (digamma(nu)? - nu.ln()))
}

fn check_drift_args(v: f64, mu: f64, nu: f64, gamma: f64) -> Result<()> {
    if !(v > 0.0 && mu > 0.0 && nu > 0.0 && gamma > 0.0) {
        return Err(Error::domain("drift_correction", format!("need v, μ, ν, γ > 0, got v = {v}, μ = {mu}, ν = {nu}, γ = {gamma}")));
    }
    Ok(())
}

/// ∂P/∂t ÷ (γ ρ) by a central difference in t of the CDF; an independent
/// route to the correction.
pub fn drift_correction_from_cdf(v: f64, mu: &ParamFn, nu: &ParamFn, gamma: f64, t: f64) -> Result<f64> {
    let h = 1e-5 * t.max(1e-3);
    // difference whichever tail is small to keep relative precision
    let upper = gamma_cdf(v, &GammaParams::new(mu.value(t), nu.value(t))?)? > 0.5;
    let cdf = |s: f64| -> Result<f64> {
        let (a, x) = (nu.value(s), mu.value(s) * v);
        Ok(if upper { -crate::specfun::gamma_q(a, x)? } else { crate::specfun::gamma_p(a, x)? })
    };
    let dp = (cdf(t + h)? - cdf(t - h)?) / (2.0 * h);
    let rho = crate::distfit::gamma_pdf(v, &GammaParams::new(mu.value(t), nu.value(t))?)?;
    Ok(dp / (gamma * rho))
}

/// a(v) tabulated on a log grid around the mean at one time.
struct DriftTable {
    ln_lo: f64,
    step: f64,
    values: Vec<f64>,
    mu: f64,
    nu: f64,
    gamma: f64,
    dmu: f64,
    dnu: f64,
}

const TABLE_POINTS: usize = 400;
const TABLE_SPAN: (f64, f64) = (-12.0, 4.0);
const STEPS_PER_BLOCK: usize = 128;

impl DriftTable {
    fn build(cfg: &SdeConfig, t: f64) -> Result<Self> {
        let (mu, nu, gamma) = (cfg.mu_fn.value(t), cfg.nu_fn.value(t), cfg.gamma_fn.value(t));
        let (dmu, dnu) = (cfg.mu_fn.deriv(t), cfg.nu_fn.deriv(t));
        let ln_mean = (nu / mu).ln();
        let ln_lo = ln_mean + TABLE_SPAN.0;
        let step = (TABLE_SPAN.1 - TABLE_SPAN.0) / (TABLE_POINTS - 1) as f64;
        let values = (0..TABLE_POINTS)
            .map(|i| drift_correction((ln_lo + step * i as f64).exp(), mu, nu, gamma, dmu, dnu))
            .collect::<Result<Vec<_>>>()?;
        Ok(DriftTable { ln_lo, step, values, mu, nu, gamma, dmu, dnu })
    }

    fn eval(&self, v: f64) -> Result<f64> {
        let pos = (v.ln() - self.ln_lo) / self.step;
        if pos >= 0.0 && pos < (TABLE_POINTS - 1) as f64 {
            let i = pos as usize;
            let w = pos - i as f64;
            return Ok(self.values[i] * (1.0 - w) + self.values[i + 1] * w);
        }
        drift_correction(v, self.mu, self.nu, self.gamma, self.dmu, self.dnu)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantity {
    Variance,
    Volatility,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub quantity: Quantity,
    pub times: Vec<f64>,
    /// Recorded values, path-major: paths[p * times.len() + j].
    pub paths: Vec<f64>,
    pub terminal: Vec<f64>,
    pub t_end: f64,
    pub rejected_steps: u64,
}

impl Ensemble {
    pub fn n_paths(&self) -> usize {
        self.terminal.len()
    }

    pub fn path(&self, p: usize) -> &[f64] {
        let m = self.times.len();
        &self.paths[p * m..(p + 1) * m]
    }

    /// Terminal values mapped to variance.
    pub fn terminal_variance(&self) -> Vec<f64> {
        match self.quantity {
            Quantity::Variance => self.terminal.clone(),
            Quantity::Volatility => self.terminal.iter().map(|s| s * s).collect(),
        }
    }

    /// Little-endian f64 dump, path-major.
    pub fn write_paths_le<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        for x in &self.paths {
            w.write_all(&x.to_le_bytes())?;
        }
        Ok(())
    }
}

struct PathState {
    x: f64,
    rng: ChaCha8Rng,
    rejected: u64,
    record: Vec<f64>,
}

pub fn simulate_variance(cfg: &SdeConfig, exec: Exec) -> Result<Ensemble> {
    simulate(cfg, Quantity::Variance, exec)
}

pub fn simulate_volatility(cfg: &SdeConfig, exec: Exec) -> Result<Ensemble> {
    simulate(cfg, Quantity::Volatility, exec)
}

fn simulate(cfg: &SdeConfig, quantity: Quantity, exec: Exec) -> Result<Ensemble> {
    cfg.validate()?;
    let n_steps = cfg.n_steps();
    let law0 = cfg.law_at(cfg.t0)?;
    let init = GammaDist::new(law0.nu, 1.0 / law0.mu).map_err(|e| Error::Invalid(e.to_string()))?;
    let mut times = Vec::new();
    if cfg.record_every > 0 {
        times = (0..=n_steps).step_by(cfg.record_every).map(|i| cfg.t0 + i as f64 * cfg.dt).collect();
    }
    let n_rec = times.len();
    let mut states: Vec<PathState> = par::map_range(exec, cfg.n_paths, |p| {
        let mut rng = stream_rng(cfg.seed, p as u64);
        let v0 = cfg.start.unwrap_or_else(|| init.sample(&mut rng));
        let x = match quantity {
            Quantity::Variance => v0,
            Quantity::Volatility => v0.sqrt(),
        };
        let mut record = Vec::with_capacity(n_rec);
        if n_rec > 0 {
            record.push(x);
        }
        PathState { x, rng, rejected: 0, record }
    });
    let corrected = cfg.corrected();
    let mut step0 = 0;
    while step0 < n_steps {
        let step1 = (step0 + STEPS_PER_BLOCK).min(n_steps);
        let tables: Vec<Option<DriftTable>> = if corrected {
            par::try_map_range(exec, step1 - step0, |i| DriftTable::build(cfg, cfg.t0 + (step0 + i) as f64 * cfg.dt).map(Some))?
        } else {
            (step0..step1).map(|_| None).collect()
        };
        par::try_for_each_mut(exec, &mut states, |_, st| {
            for (i, table) in tables.iter().enumerate() {
                let step = step0 + i;
                advance(cfg, quantity, st, cfg.t0 + step as f64 * cfg.dt, table.as_ref())?;
                if cfg.record_every > 0 && (step + 1) % cfg.record_every == 0 {
                    st.record.push(st.x);
                }
            }
            Ok(())
        })?;
        step0 = step1;
    }
    let terminal = states.iter().map(|s| s.x).collect();
    let rejected_steps = states.iter().map(|s| s.rejected).sum();
    let paths = if n_rec > 0 { states.into_iter().flat_map(|s| s.record).collect() } else { Vec::new() };
    Ok(Ensemble { quantity, times, paths, terminal, t_end: cfg.t_end(), rejected_steps })
}

fn advance(cfg: &SdeConfig, quantity: Quantity, st: &mut PathState, t: f64, table: Option<&DriftTable>) -> Result<()> {
    let (mu, nu, gamma) = (cfg.mu_fn.value(t), cfg.nu_fn.value(t), cfg.gamma_fn.value(t));
    let dt = cfg.dt;
    let x = st.x;
    let v = match quantity {
        Quantity::Variance => x,
        Quantity::Volatility => x * x,
    };
    let a = match table {
        Some(tb) => tb.eval(v)?,
        None => 0.0,
    };
    let (drift, diffusion) = match quantity {
        Quantity::Variance => (gamma * (nu - mu * v - a), (2.0 * gamma * v * dt).sqrt()),
        Quantity::Volatility => (0.5 * gamma * ((nu - 0.5) / x - mu * x - a / x), (0.5 * gamma * dt).sqrt()),
    };
    let mean = x + drift * dt;
    let mut next = if cfg.noise {
        mean + diffusion * st.rng.sample::<f64, _>(StandardNormal)
    } else {
        mean
    };
    if next <= 0.0 && cfg.boundary == Boundary::RejectStep && cfg.noise {
        for _ in 0..64 {
            st.rejected += 1;
            next = mean + diffusion * st.rng.sample::<f64, _>(StandardNormal);
            if next > 0.0 {
                break;
            }
        }
    }
    if next <= 0.0 {
        next = if next < 0.0 { -next } else { f64::MIN_POSITIVE };
    }
    let vbar = nu / mu;
    let scale = match quantity {
        Quantity::Variance => vbar,
        Quantity::Volatility => vbar.sqrt(),
    };
    if !next.is_finite() || next > 1e6 * scale {
        return Err(Error::Unstable(format!(
            "path left the stable region at t = {t} (value {next:.3e}, mean level {scale:.3e}); reduce dt below {dt}"
        )));
    }
    st.x = next;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Target {
    Gamma(GammaParams),
    Chi(GammaParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryReport {
    pub ks: f64,
    pub n: usize,
    /// Moments of the variance samples (squared first for a Chi target).
    pub sample: MomentRow,
    pub theory: MomentRow,
}

fn moments(x: &[f64]) -> MomentRow {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &v in x {
        let d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);
    MomentRow { mean, variance: m2, skewness: m3 / m2.powf(1.5), excess_kurtosis: m4 / (m2 * m2) - 3.0 }
}

/// KS distance and moment table of an ensemble against its target law.
pub fn stationary_check(samples: &[f64], target: Target, exec: Exec) -> Result<StationaryReport> {
    if samples.len() < 100 {
        return Err(Error::Invalid(format!("stationary_check needs at least 100 samples, got {}", samples.len())));
    }
    let (p, ks, vs) = match target {
        Target::Gamma(p) => (p, crate::distfit::ks_distance(samples, |v| gamma_cdf(v, &p).unwrap_or(f64::NAN), exec), samples.to_vec()),
        Target::Chi(p) => (
            p,
            crate::distfit::ks_distance(samples, |s| chi_cdf(s, &p).unwrap_or(f64::NAN), exec),
            samples.iter().map(|s| s * s).collect(),
        ),
    };
    Ok(StationaryReport {
        ks,
        n: samples.len(),
        sample: moments(&vs),
        theory: MomentRow { mean: p.nu / p.mu, variance: p.nu / (p.mu * p.mu), skewness: 2.0 / p.nu.sqrt(), excess_kurtosis: 6.0 / p.nu },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const MU: f64 = 2.0;
    const NU: f64 = 3.0;

    #[test]
    fn correction_matches_cdf_route() {
        let (mf, nf) = (ParamFn::Linear { slope: MU }, ParamFn::Linear { slope: NU });
        for &t in &[0.05, 1.0, 3.0, 40.0, 300.0] {
            let w = (1.0 / (NU * t).sqrt()).min(0.5);
            for &z in &[-2.5, -1.0, 0.0, 1.0, 3.0] {
                let v = ((z * w).exp() * NU / MU).max(1e-3);
                let a = drift_correction(v, MU * t, NU * t, 1.0, MU, NU).unwrap();
                let b = drift_correction_from_cdf(v, &mf, &nf, 1.0, t).unwrap();
                assert!((a - b).abs() < 1e-6 * (1.0 + b.abs()), "t {t} v {v}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn constant_parameters_give_no_correction() {
        assert_eq!(drift_correction(1.3, 2.0, 3.0, 1.0, 0.0, 0.0).unwrap(), 0.0);
        assert_eq!(drift_correction_printed(1.3, 2.0, 3.0, 1.0, 0.0, 0.0).unwrap(), 0.0);
        assert!(drift_correction(0.0, 2.0, 3.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn large_time_decay() {
        let vbar = NU / MU;
        let mut worst: f64 = 0.0;
        for &t in &[1e2, 3e2, 1e3, 3e3, 1e4] {
            for &r in &[0.9, 1.0, 1.1] {
                let a = drift_correction(r * vbar, MU * t, NU * t, 1.0, MU, NU).unwrap();
                worst = worst.max((a * t).abs());
            }
        }
        assert!(worst < 10.0, "{worst}");
    }

    #[test]
    fn small_time_asymptote() {
        let vbar = NU / MU;
        let t = 1e-7;
        for &r in &[0.5, 1.0, 2.0] {
            let v = r * vbar;
            let a = drift_correction(v, MU * t, NU * t, 1.0, MU, NU).unwrap();
            let asym = v / t * (1.0 + crate::specfun::EULER_GAMMA + (MU * t * v).ln());
            assert_relative_eq!(a, asym, max_relative = 1e-4);
        }
    }

    #[test]
    fn zero_noise_relaxes_to_fixed_point() {
        let cfg = SdeConfig {
            mu_fn: ParamFn::Constant { value: MU },
            nu_fn: ParamFn::Constant { value: NU },
            noise: false,
            start: Some(0.2),
            n_paths: 3,
            horizon: 20.0,
            ..Default::default()
        };
        let e = simulate_variance(&cfg, Exec::Sequential).unwrap();
        for v in e.terminal {
            assert!((v - NU / MU).abs() < 1e-10);
        }
    }

    #[test]
    fn seeds_repeat_and_policies_agree() {
        let cfg = SdeConfig { n_paths: 200, horizon: 0.2, record_every: 50, ..Default::default() };
        let a = simulate_variance(&cfg, Exec::Parallel).unwrap();
        let b = simulate_variance(&cfg, Exec::Sequential).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.times.len(), 5);
        assert_eq!(a.paths.len(), 200 * 5);
        assert!(a.paths.iter().all(|&v| v > 0.0));
        let c = simulate_variance(&SdeConfig { seed: 1, ..cfg }, Exec::Parallel).unwrap();
        assert_ne!(a.terminal, c.terminal);
    }

    #[test]
    fn reject_step_keeps_positive() {
        let cfg = SdeConfig {
            mu_fn: ParamFn::Constant { value: 5.0 },
            nu_fn: ParamFn::Constant { value: 0.3 },
            boundary: Boundary::RejectStep,
            dt: 1e-2,
            horizon: 1.0,
            n_paths: 500,
            ..Default::default()
        };
        let e = simulate_variance(&cfg, Exec::Parallel).unwrap();
        assert!(e.terminal.iter().all(|&v| v > 0.0));
        assert!(e.rejected_steps > 0);
    }

    #[test]
    fn instability_is_reported() {
        let cfg = SdeConfig {
            mu_fn: ParamFn::Constant { value: 1e3 },
            nu_fn: ParamFn::Constant { value: 1e3 },
            dt: 0.5,
            horizon: 50.0,
            n_paths: 4,
            ..Default::default()
        };
        assert!(matches!(simulate_variance(&cfg, Exec::Sequential), Err(Error::Unstable(_))));
    }

    #[test]
    fn short_run_stays_on_gamma_law() {
        let cfg = SdeConfig { n_paths: 20_000, horizon: 1.0, dt: 2e-3, ..Default::default() };
        let e = simulate_variance(&cfg, Exec::Parallel).unwrap();
        let law = cfg.law_at(e.t_end).unwrap();
        let r = stationary_check(&e.terminal, Target::Gamma(law), Exec::Parallel).unwrap();
        assert!(r.ks < 0.02, "{r:?}");
        // without the correction the ensemble lags behind the moving law
        let cir = simulate_variance(&SdeConfig { drift_correction: false, ..cfg }, Exec::Parallel).unwrap();
        let r2 = stationary_check(&cir.terminal, Target::Gamma(law), Exec::Parallel).unwrap();
        assert!(r2.ks > r.ks);
    }

    #[test]
    fn stationary_check_null_and_shift() {
        let p = GammaParams::new(MU, NU).unwrap();
        let s = crate::distfit::sample_gamma(&p, 5000, 3, Exec::Parallel);
        let r = stationary_check(&s, Target::Gamma(p), Exec::Parallel).unwrap();
        assert!(r.ks < 0.03);
        assert_relative_eq!(r.sample.mean, r.theory.mean, max_relative = 0.05);
        let shifted: Vec<f64> = s.iter().map(|v| v + 0.5).collect();
        assert!(stationary_check(&shifted, Target::Gamma(p), Exec::Parallel).unwrap().ks > 0.2);
        assert!(stationary_check(&s[..50], Target::Gamma(p), Exec::Parallel).is_err());
    }
}
