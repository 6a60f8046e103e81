//! Gamma and Chi laws for variance and volatility, moment fitting, reference
//! fits, KS distances and the scaled-collapse diagnostic.

use rand_distr::{Distribution, Gamma as GammaDist};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{self, Exec};
use crate::quad::{self, QuadConfig};
use crate::rng::stream_rng;
use crate::specfun::{self, log_gamma, norm_cdf};
use crate::volest;

/// Gamma law of the variance: rate μ (1/variance) and shape ν.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaParams {
    pub mu: f64,
    pub nu: f64,
}

impl GammaParams {
    pub fn new(mu: f64, nu: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) || !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::Invalid(format!("GammaParams need mu > 0 and nu > 0, got mu = {mu}, nu = {nu}")));
        }
        Ok(GammaParams { mu, nu })
    }

    /// From mean variance v̄ and spread δ = 1/ν.
    pub fn from_vbar_delta(vbar: f64, delta: f64) -> Result<Self> {
        if !(vbar > 0.0) || !(delta > 0.0) {
            return Err(Error::Invalid(format!("need vbar > 0 and delta > 0, got {vbar}, {delta}")));
        }
        GammaParams::new(1.0 / (vbar * delta), 1.0 / delta)
    }

    /// From rate μ and spread δ.
    pub fn from_mu_delta(mu: f64, delta: f64) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(Error::Invalid(format!("delta must be positive, got {delta}")));
        }
        GammaParams::new(mu, 1.0 / delta)
    }

    pub fn vbar(&self) -> f64 {
        self.nu / self.mu
    }

    pub fn delta(&self) -> f64 {
        1.0 / self.nu
    }

    pub fn q(&self) -> f64 {
        1.0 + self.delta()
    }

    pub fn beta(&self) -> f64 {
        self.vbar()
    }

    /// The law f_{tμ, t/δ} reached after time t.
    pub fn compound(&self, t: f64) -> GammaParams {
        GammaParams { mu: t * self.mu, nu: t * self.nu }
    }

    pub fn variance(&self) -> f64 {
        self.nu / (self.mu * self.mu)
    }

    pub fn validate(&self) -> Result<()> {
        GammaParams::new(self.mu, self.nu).map(|_| ())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub params: GammaParams,
    pub sample_mean: f64,
    pub sample_variance: f64,
    pub ks_distance: f64,
    pub n_samples: usize,
}

pub fn ln_gamma_pdf(v: f64, p: &GammaParams) -> Result<f64> {
    if !(v >= 0.0) {
        return Err(Error::domain("gamma_pdf", format!("v = {v} must be nonnegative")));
    }
    if v == 0.0 {
        return match p.nu.partial_cmp(&1.0) {
            Some(std::cmp::Ordering::Greater) => Ok(f64::NEG_INFINITY),
            Some(std::cmp::Ordering::Equal) => Ok(p.mu.ln()),
            _ => Err(Error::Singularity { op: "gamma_pdf", detail: format!("density diverges at v = 0 for nu = {}", p.nu) }),
        };
    }
    Ok(p.nu * p.mu.ln() + (p.nu - 1.0) * v.ln() - p.mu * v - log_gamma(p.nu)?)
}

/// f_{μ,ν}(v) = μ^ν v^{ν−1} e^{−μv}/Γ(ν).
pub fn gamma_pdf(v: f64, p: &GammaParams) -> Result<f64> {
    Ok(ln_gamma_pdf(v, p)?.exp())
}

pub fn gamma_cdf(v: f64, p: &GammaParams) -> Result<f64> {
    if v <= 0.0 {
        return Ok(0.0);
    }
    specfun::gamma_p(p.nu, p.mu * v)
}

/// ρ(σ) = 2σ f(σ²).
pub fn chi_pdf(sigma: f64, p: &GammaParams) -> Result<f64> {
    if !(sigma >= 0.0) {
        return Err(Error::domain("chi_pdf", format!("sigma = {sigma} must be nonnegative")));
    }
    Ok(2.0 * sigma * gamma_pdf(sigma * sigma, p)?)
}

pub fn chi_cdf(sigma: f64, p: &GammaParams) -> Result<f64> {
    gamma_cdf(sigma * sigma, p)
}

/// Draws from Gamma(μ, ν), reproducible for a seed regardless of thread count.
pub fn sample_gamma(p: &GammaParams, n: usize, seed: u64, exec: Exec) -> Vec<f64> {
    const BLOCK: usize = 4096;
    let dist = GammaDist::new(p.nu, 1.0 / p.mu).expect("validated parameters");
    let blocks = n.div_ceil(BLOCK);
    par::map_range(exec, blocks, |b| {
        let mut rng = stream_rng(seed, b as u64);
        let len = BLOCK.min(n - b * BLOCK);
        (0..len).map(|_| dist.sample(&mut rng)).collect::<Vec<f64>>()
    })
    .into_iter()
    .flatten()
    .collect()
}

/// Sup distance between the empirical CDF of `samples` and `cdf`.
pub fn ks_distance<F: Fn(f64) -> f64 + Sync + Send>(samples: &[f64], cdf: F, exec: Exec) -> f64 {
    let mut s = samples.to_vec();
    par::sort_f64(exec, &mut s);
    ks_sorted(&s, cdf, exec)
}

pub(crate) fn ks_sorted<F: Fn(f64) -> f64 + Sync + Send>(sorted: &[f64], cdf: F, exec: Exec) -> f64 {
    let n = sorted.len() as f64;
    let d = par::map_range(exec, sorted.len(), |i| {
        let f = cdf(sorted[i]);
        (f - i as f64 / n).max((i + 1) as f64 / n - f)
    });
    d.into_iter().fold(0.0, f64::max).clamp(0.0, 1.0)
}

/// Asymptotic Kolmogorov survival function Q(λ) = 2 Σ (−1)^{k−1} e^{−2k²λ²}.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..200 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoSampleKs {
    pub distance: f64,
    pub p_value: f64,
}

/// Two-sample KS statistic with the asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64], exec: Exec) -> TwoSampleKs {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    par::sort_f64(exec, &mut x);
    par::sort_f64(exec, &mut y);
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    let ne = n * m / (n + m);
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    TwoSampleKs { distance: d, p_value: kolmogorov_q(lambda) }
}

fn mean_var(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Method of moments: μ = E(v)/Var(v), ν = E(v)²/Var(v).
pub fn fit_moments(samples: &[f64]) -> Result<FitReport> {
    fit_moments_with(samples, Exec::default())
}

pub fn fit_moments_with(samples: &[f64], exec: Exec) -> Result<FitReport> {
    if samples.len() < 2 {
        return Err(Error::Degenerate(format!("need at least 2 samples, got {}", samples.len())));
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::Invalid("samples contain non-finite values".into()));
    }
    let (mean, var) = mean_var(samples);
    if !(var > 0.0) {
        return Err(Error::Degenerate("sample variance is zero".into()));
    }
    if !(mean > 0.0) {
        return Err(Error::Degenerate(format!("sample mean {mean} is not positive")));
    }
    let params = GammaParams::new(mean / var, mean * mean / var)?;
    let ks = ks_distance(samples, |x| gamma_cdf(x, &params).unwrap_or(f64::NAN), exec);
    Ok(FitReport { params, sample_mean: mean, sample_variance: var, ks_distance: ks, n_samples: samples.len() })
}

/// Gamma fit of σ² for volatility samples σ; the KS distance is that of σ
/// against the Chi law (identical to σ² against the Gamma law).
pub fn fit_chi(sigmas: &[f64], exec: Exec) -> Result<FitReport> {
    if sigmas.iter().any(|&s| s < 0.0) {
        return Err(Error::Invalid("volatility samples must be nonnegative".into()));
    }
    let v: Vec<f64> = sigmas.iter().map(|s| s * s).collect();
    fit_moments_with(&v, exec)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceModel {
    Gaussian,
    Lognormal,
}

/// Maximum-likelihood reference fit: location/scale of the normal law of x (Gaussian)
/// or of ln x (log-normal).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceFit {
    pub model: ReferenceModel,
    pub location: f64,
    pub scale: f64,
    pub ks_distance: f64,
    pub n_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceFits {
    pub gaussian: ReferenceFit,
    pub lognormal: ReferenceFit,
}

fn mle_normal(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let s = (x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n).sqrt();
    (m, s)
}

pub fn fit_gaussian(samples: &[f64], exec: Exec) -> Result<ReferenceFit> {
    if samples.len() < 2 {
        return Err(Error::Degenerate("need at least 2 samples".into()));
    }
    let (m, s) = mle_normal(samples);
    if !(s > 0.0) {
        return Err(Error::Degenerate("sample variance is zero".into()));
    }
    let ks = ks_distance(samples, |x| norm_cdf((x - m) / s), exec);
    Ok(ReferenceFit { model: ReferenceModel::Gaussian, location: m, scale: s, ks_distance: ks, n_samples: samples.len() })
}

pub fn fit_lognormal(samples: &[f64], exec: Exec) -> Result<ReferenceFit> {
    if samples.len() < 2 {
        return Err(Error::Degenerate("need at least 2 samples".into()));
    }
    if let Some(i) = samples.iter().position(|&x| !(x > 0.0)) {
        return Err(Error::domain("fit_lognormal", format!("sample {i} = {} is not positive", samples[i])));
    }
    let logs: Vec<f64> = samples.iter().map(|x| x.ln()).collect();
    let (m, s) = mle_normal(&logs);
    if !(s > 0.0) {
        return Err(Error::Degenerate("log-sample variance is zero".into()));
    }
    let ks = ks_distance(samples, |x| if x > 0.0 { norm_cdf((x.ln() - m) / s) } else { 0.0 }, exec);
    Ok(ReferenceFit { model: ReferenceModel::Lognormal, location: m, scale: s, ks_distance: ks, n_samples: samples.len() })
}

pub fn fit_reference_models(samples: &[f64], exec: Exec) -> Result<ReferenceFits> {
    Ok(ReferenceFits { gaussian: fit_gaussian(samples, exec)?, lognormal: fit_lognormal(samples, exec)? })
}

/// v_tr = Tμv + (1 − Tν) ln(Tμv).
pub fn scaled_collapse(v: f64, window: f64, p: &GammaParams) -> Result<f64> {
    if !(v > 0.0) || !(window > 0.0) {
        return Err(Error::domain("scaled_collapse", format!("need v > 0 and T > 0, got v = {v}, T = {window}")));
    }
    let x = window * p.mu * v;
    Ok(x + (1.0 - window * p.nu) * x.ln())
}

/// Γ(Tν) ρ_T(v) / (Tμ): the density rescaling that pairs with [`scaled_collapse`].
pub fn collapse_density_scale(rho: f64, window: f64, p: &GammaParams) -> Result<f64> {
    Ok((log_gamma(window * p.nu)? - (window * p.mu).ln()).exp() * rho)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapsePoint {
    pub v: f64,
    pub v_tr: f64,
    pub scaled_density: f64,
    pub target: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapseReport {
    pub window: f64,
    pub points: Vec<CollapsePoint>,
    /// KS distance between the samples and the law whose density is
    /// Tμ e^{−v_tr(v)}/Γ(Tν), integrated numerically in v.
    pub ks_distance: f64,
    pub n_samples: usize,
}

/// Histogram the window-T variance samples, map to collapse coordinates and
/// measure the KS distance to the collapsed law.
pub fn collapse_report(samples: &[f64], window: f64, p: &GammaParams, bins: usize, exec: Exec) -> Result<CollapseReport> {
    if samples.len() < 2 || bins == 0 {
        return Err(Error::Degenerate("need at least 2 samples and 1 bin".into()));
    }
    if let Some(&bad) = samples.iter().find(|&&x| !(x > 0.0)) {
        return Err(Error::domain("collapse_report", format!("sample {bad} is not positive")));
    }
    let mut sorted = samples.to_vec();
    par::sort_f64(exec, &mut sorted);
    let lo = sorted[0];
    let hi = sorted[sorted.len() - 1];
    let width = ((hi - lo) / bins as f64).max(f64::MIN_POSITIVE);
    let hist = volest::empirical_density(&sorted, width)?;
    let mut points = Vec::new();
    for (i, &d) in hist.density.iter().enumerate() {
        if d <= 0.0 {
            continue;
        }
        let v = hist.origin + (i as f64 + 0.5) * width;
        if v <= 0.0 {
            continue;
        }
        let v_tr = scaled_collapse(v, window, p)?;
        points.push(CollapsePoint { v, v_tr, scaled_density: collapse_density_scale(d, window, p)?, target: (-v_tr).exp() });
    }

    // reconstructed density Tμ e^{−v_tr}/Γ(Tν), integrated segment by segment between sorted samples
    let tmu = window * p.mu;
    let ln_norm = tmu.ln() - log_gamma(window * p.nu)?;
    let dens = |v: f64| if v > 0.0 { (ln_norm - scaled_collapse(v, window, p).unwrap_or(f64::INFINITY)).exp() } else { 0.0 };
    let cfg = QuadConfig::with_tol(1e-14, 1e-12);
    let k = window * p.nu;
    let m = if k < 1.0 { 1.0 / k } else { 1.0 };
    let head = quad::integrate_power_report(dens, 0.0, sorted[0], m, &cfg);
    let segs = par::map_range(exec, sorted.len() - 1, |i| quad::integrate_report(dens, sorted[i], sorted[i + 1], &cfg).value);
    let mut cdf = Vec::with_capacity(sorted.len());
    let mut acc = head.value;
    cdf.push(acc);
    for s in segs {
        acc += s;
        cdf.push(acc);
    }
    let n = sorted.len() as f64;
    let ks = cdf
        .iter()
        .enumerate()
        .map(|(i, &f)| (f - i as f64 / n).max((i + 1) as f64 / n - f))
        .fold(0.0, f64::max)
        .clamp(0.0, 1.0);
    Ok(CollapseReport { window, points, ks_distance: ks, n_samples: samples.len() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub vbar: f64,
    pub delta: f64,
    pub half_width: f64,
    pub mass: f64,
}

/// Mass of the Gamma law within ±half_width of its mean; concentrates to 1 as δ → 0.
pub fn delta_limit_check(p: &GammaParams, half_width: f64) -> Result<ConcentrationReport> {
    let vbar = p.vbar();
    let lo = (vbar - half_width).max(0.0);
    let mass = gamma_cdf(vbar + half_width, p)? - gamma_cdf(lo, p)?;
    Ok(ConcentrationReport { vbar, delta: p.delta(), half_width, mass })
}

/// Per-window fits and a linear regression of μ(T), ν(T) on T.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowScaling {
    pub windows: Vec<f64>,
    pub fits: Vec<GammaParams>,
    pub mu_slope: f64,
    pub mu_intercept: f64,
    pub nu_slope: f64,
    pub nu_intercept: f64,
}

pub fn window_scaling(windows: &[f64], fits: &[GammaParams]) -> Result<WindowScaling> {
    if windows.len() != fits.len() || windows.len() < 2 {
        return Err(Error::Invalid("need at least two windows with one fit each".into()));
    }
    let mu: Vec<f64> = fits.iter().map(|f| f.mu).collect();
    let nu: Vec<f64> = fits.iter().map(|f| f.nu).collect();
    let (mu_slope, mu_intercept) = ols(windows, &mu)?;
    let (nu_slope, nu_intercept) = ols(windows, &nu)?;
    Ok(WindowScaling { windows: windows.to_vec(), fits: fits.to_vec(), mu_slope, mu_intercept, nu_slope, nu_intercept })
}

/// Ordinary least squares y = a x + b; returns (a, b).
pub fn ols(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Degenerate("regressor has zero variance".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand_distr::{Exp, LogNormal, Normal};

    fn moment_quad(p: &GammaParams, k: i32) -> f64 {
        let m = if p.nu < 1.0 { 1.0 / p.nu } else { 1.0 };
        quad::integrate_upper_singular(|v| v.powi(k) * gamma_pdf(v, p).unwrap(), 0.0, m, p.vbar(), &QuadConfig::with_tol(1e-14, 1e-12))
            .unwrap()
            .value
    }

    #[test]
    fn gamma_pdf_normalized_and_moments() {
        for &(mu, nu) in &[(1e-3, 0.05), (2.0, 0.7), (351.29, 1.0 / 69.43), (50.0, 3.0), (1e4, 100.0)] {
            let p = GammaParams::new(mu, nu).unwrap();
            assert!((moment_quad(&p, 0) - 1.0).abs() < 1e-10, "mu {mu} nu {nu}");
            let m1 = moment_quad(&p, 1);
            assert_relative_eq!(m1, nu / mu, max_relative = 1e-9);
        }
        let p = GammaParams::new(3.0, 2.5).unwrap();
        let m1 = moment_quad(&p, 1);
        let m2 = moment_quad(&p, 2);
        let m3 = moment_quad(&p, 3);
        let m4 = moment_quad(&p, 4);
        let var = m2 - m1 * m1;
        let skew = (m3 - 3.0 * m1 * var - m1.powi(3)) / var.powf(1.5);
        let c4 = m4 - 4.0 * m3 * m1 + 6.0 * m2 * m1 * m1 - 3.0 * m1.powi(4);
        assert_relative_eq!(var, p.variance(), max_relative = 1e-9);
        assert_relative_eq!(skew, 2.0 / p.nu.sqrt(), max_relative = 1e-7);
        assert_relative_eq!(c4 / (var * var) - 3.0, 6.0 / p.nu, max_relative = 1e-7);
    }

    #[test]
    fn gamma_pdf_special_cases() {
        let p = GammaParams::new(2.5, 1.0).unwrap();
        for &v in &[0.0, 0.3, 4.0] {
            assert_relative_eq!(gamma_pdf(v, &p).unwrap(), 2.5 * (-2.5 * v as f64).exp(), max_relative = 1e-14);
        }
        let p = GammaParams::new(1.0, 0.5).unwrap();
        assert!(matches!(gamma_pdf(0.0, &p), Err(Error::Singularity { .. })));
        assert_eq!(gamma_pdf(0.0, &GammaParams::new(1.0, 2.0).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn derived_accessors() {
        let p = GammaParams::from_vbar_delta(0.000041, 69.43).unwrap();
        assert_relative_eq!(p.vbar() * p.delta(), 1.0 / p.mu, max_relative = 1e-14);
        assert_relative_eq!(p.q(), 70.43, max_relative = 1e-14);
        assert_eq!(p.beta(), p.vbar());
        assert!(GammaParams::new(0.0, 1.0).is_err());
    }

    #[test]
    fn chi_pdf_half_normal_and_cdf() {
        let p = GammaParams::new(0.5, 0.5).unwrap();
        for &s in &[0.1, 0.7, 2.0] {
            let half_normal = (2.0 / std::f64::consts::PI).sqrt() * (-s * s / 2.0 as f64).exp();
            assert_relative_eq!(chi_pdf(s, &p).unwrap(), half_normal, max_relative = 1e-13);
        }
        let p = GammaParams::new(4.0, 1.7).unwrap();
        let cfg = QuadConfig::with_tol(1e-13, 1e-13);
        let total = quad::integrate_upper(|s| chi_pdf(s, &p).unwrap(), 0.0, 0.5, &cfg).unwrap().value;
        assert!((total - 1.0).abs() < 1e-10);
        for &x in &[0.2, 0.6, 1.3] {
            let lhs = quad::integrate(|s| chi_pdf(s, &p).unwrap(), 0.0, x, &cfg).unwrap().value;
            let rhs = quad::integrate(|v| gamma_pdf(v, &p).unwrap(), 0.0, x * x, &cfg).unwrap().value;
            assert!((lhs - rhs).abs() < 1e-10);
        }
    }

    #[test]
    fn fit_small_shape_large_spread() {
        // ν = 1/69.43 gives a very skewed law; relative sd of ν̂ at n = 1e5 is about 6.5%,
        // so the bound is four standard errors
        let p = GammaParams::new(351.29, 1.0 / 69.43).unwrap();
        let s = sample_gamma(&p, 100_000, 11, Exec::Parallel);
        let r = fit_moments(&s).unwrap();
        assert!((r.params.nu / p.nu - 1.0).abs() < 0.26, "{:?}", r.params);
        assert!((r.params.mu / p.mu - 1.0).abs() < 0.26, "{:?}", r.params);
    }

    #[test]
    fn fit_exponential_and_constant() {
        let mut rng = stream_rng(3, 0);
        let d = Exp::new(4.0).unwrap();
        let s: Vec<f64> = (0..50_000).map(|_| d.sample(&mut rng)).collect();
        let r = fit_moments(&s).unwrap();
        assert!((r.params.nu - 1.0).abs() < 0.05);
        assert!((r.params.mu / 4.0 - 1.0).abs() < 0.05);
        assert!(r.ks_distance < 0.02);
        assert!(matches!(fit_moments(&[2.0, 2.0, 2.0]), Err(Error::Degenerate(_))));
        assert!(fit_moments(&[1.0]).is_err());
    }

    #[test]
    fn fit_error_shrinks_with_n() {
        let p = GammaParams::new(5.0, 2.0).unwrap();
        let errs: Vec<f64> = [1_000usize, 10_000, 100_000]
            .iter()
            .map(|&n| {
                // average over several seeds so the trend is not a fluke of one draw
                (0..8)
                    .map(|seed| {
                        let r = fit_moments(&sample_gamma(&p, n, 100 + seed, Exec::Parallel)).unwrap();
                        (r.params.nu / p.nu - 1.0).powi(2)
                    })
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        assert!(errs[1] < errs[0] && errs[2] < errs[1], "{errs:?}");
        assert!(errs[0] / errs[2] > 4.0 && errs[0] / errs[2] < 25.0, "{errs:?}");
    }

    #[test]
    fn reference_fits() {
        let mut rng = stream_rng(5, 0);
        let g = Normal::new(10.0, 1.0).unwrap();
        let gs: Vec<f64> = (0..50_000).map(|_| g.sample(&mut rng)).collect();
        let refs = fit_reference_models(&gs, Exec::Parallel).unwrap();
        let chi = fit_chi(&gs, Exec::Parallel).unwrap();
        assert!(refs.gaussian.ks_distance < chi.ks_distance);

        let l = LogNormal::new(0.0, 0.8).unwrap();
        let ls: Vec<f64> = (0..50_000).map(|_| l.sample(&mut rng)).collect();
        let refs = fit_reference_models(&ls, Exec::Parallel).unwrap();
        let chi = fit_chi(&ls, Exec::Parallel).unwrap();
        assert!(refs.lognormal.ks_distance < refs.gaussian.ks_distance);
        assert!(refs.lognormal.ks_distance < chi.ks_distance);

        assert!(fit_reference_models(&[0.0, 1.0, 2.0], Exec::Sequential).is_err());
    }

    #[test]
    fn collapse_coordinates() {
        let p = GammaParams::new(2.0, 0.5).unwrap();
        // Tν = 1: log term vanishes
        assert_relative_eq!(scaled_collapse(0.3, 2.0, &p).unwrap(), 2.0 * 2.0 * 0.3, max_relative = 1e-15);
        // Tμv = 1 → 1
        let t = 3.0;
        assert_relative_eq!(scaled_collapse(1.0 / (t * p.mu), t, &p).unwrap(), 1.0, max_relative = 1e-15);
        assert!(scaled_collapse(0.0, 1.0, &p).is_err());
    }

    #[test]
    fn collapse_of_gamma_samples() {
        let p = GammaParams::new(2.0, 0.01).unwrap();
        for &t in &[300.0, 600.0, 900.0] {
            let s = sample_gamma(&p.compound(t), 20_000, t as u64, Exec::Parallel);
            let r = collapse_report(&s, t, &p, 40, Exec::Parallel).unwrap();
            assert!(r.ks_distance < 0.02, "T {t}: {}", r.ks_distance);
            // the histogram collapses onto e^{-v_tr} near the mode
            let best = r.points.iter().max_by(|a, b| a.scaled_density.total_cmp(&b.scaled_density)).unwrap();
            assert!((best.scaled_density / best.target - 1.0).abs() < 0.15, "{best:?}");
        }
    }

    #[test]
    fn concentration() {
        // sd of the law is v̄√δ, so at δ = 1e-4 a ±1% window is ±1σ
        let p = GammaParams::from_vbar_delta(1.0, 1e-4).unwrap();
        assert!((delta_limit_check(&p, 0.01).unwrap().mass - 0.6827).abs() < 2e-3);
        let p = GammaParams::from_vbar_delta(1.0, 1e-6).unwrap();
        assert!(delta_limit_check(&p, 0.01).unwrap().mass > 0.999);
        let p = GammaParams::from_vbar_delta(1.0, 1e-2).unwrap();
        assert!(delta_limit_check(&p, 3.0 * p.nu.sqrt() / p.mu).unwrap().mass > 0.99);
        let p = GammaParams::from_vbar_delta(1.0, 1.0).unwrap();
        assert!(delta_limit_check(&p, 0.01).unwrap().mass < 0.02);
    }

    #[test]
    fn two_sample_ks() {
        let p = GammaParams::new(2.0, 3.0).unwrap();
        let a = sample_gamma(&p, 20_000, 1, Exec::Parallel);
        let b = sample_gamma(&p, 20_000, 2, Exec::Parallel);
        assert!(ks_two_sample(&a, &b, Exec::Parallel).p_value > 0.01);
        let c: Vec<f64> = b.iter().map(|x| x * 1.1).collect();
        assert!(ks_two_sample(&a, &c, Exec::Parallel).p_value < 1e-6);
    }

    #[test]
    fn sampling_is_thread_independent() {
        let p = GammaParams::new(2.0, 3.0).unwrap();
        assert_eq!(sample_gamma(&p, 10_000, 9, Exec::Sequential), sample_gamma(&p, 10_000, 9, Exec::Parallel));
    }

    #[test]
    fn window_regression() {
        let base = GammaParams::new(2.0, 0.01).unwrap();
        let w = [300.0, 600.0, 900.0];
        let fits: Vec<GammaParams> = w.iter().map(|&t| base.compound(t)).collect();
        let s = window_scaling(&w, &fits).unwrap();
        assert_relative_eq!(s.mu_slope, 2.0, max_relative = 1e-12);
        assert!(s.nu_intercept.abs() < 1e-12);
    }
}
