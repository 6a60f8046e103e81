//! The Gamma-smeared martingale measure for log-price increments, its
//! moment generating function and cumulants, characteristic times and the
//! Edgeworth-type correction.
//!
//! Over a horizon t the integrated variance W = v·t of the mixture is
//! Gamma(shape k = t/δ, rate μ). Conditional on W the log-return Δx is normal
//! with mean r_W t − W/2 and variance W, so the density of y = Δx − r_W t is
//!
//!   p(y) = e^{−y/2} · 2μ^k/(Γ(k)√(2π)) · (2|y|/c)^{k−½} K_{k−½}(|y| c/2),  c = √(1+8μ).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::distfit::GammaParams;
use crate::error::{Error, Result};
use crate::par::{self, Exec};
use crate::quad::{self, Breakpoint, QuadConfig};
use crate::specfun::{log_gamma, ln_bessel_k, norm_cdf, norm_pdf};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureParams {
    pub gamma: GammaParams,
    pub r_w: f64,
    pub t: f64,
}

impl MeasureParams {
    pub fn new(gamma: GammaParams, r_w: f64, t: f64) -> Result<Self> {
        gamma.validate()?;
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::domain("MeasureParams", format!("t = {t} must be positive")));
        }
        if !r_w.is_finite() {
            return Err(Error::domain("MeasureParams", "r_W must be finite"));
        }
        Ok(MeasureParams { gamma, r_w, t })
    }

    /// Shape of the integrated-variance law, t/δ.
    pub fn k(&self) -> f64 {
        self.t * self.gamma.nu
    }

    /// Growth rate of the log-price at fixed variance v under the martingale measure.
    pub fn r_x(&self, v: f64) -> f64 {
        self.r_w - 0.5 * v
    }

    /// Mean integrated variance v̄ t.
    pub fn mean_w(&self) -> f64 {
        self.k() / self.gamma.mu
    }

    fn bessel_arg_scale(&self) -> f64 {
        (1.0 + 8.0 * self.gamma.mu).sqrt()
    }
}

/// Exponent m of the power substitution that smooths a |y|^{2k−1} singularity.
pub(crate) fn singular_power(k: f64) -> f64 {
    if k < 0.5 {
        1.0 / (2.0 * k)
    } else {
        2.0
    }
}

/// ln p(y) with y = Δx − r_W t.
pub fn ln_density_y(y: f64, p: &MeasureParams) -> Result<f64> {
    let k = p.k();
    let mu = p.gamma.mu;
    let c = p.bessel_arg_scale();
    let s = k - 0.5;
    let ln_pref = k * mu.ln() + std::f64::consts::LN_2 - log_gamma(k)? - 0.5 * LN_2PI;
    let z = 0.5 * y.abs() * c;
    if y == 0.0 || (z < 1e-6 && s >= 1.0) {
        if s <= 0.0 {
            return Err(Error::Singularity {
                op: "measure_density",
                detail: format!("density diverges at Δx = r_W t for t/δ = {k} ≤ 1/2"),
            });
        }
        // K_s(z) ≈ ½Γ(s)(2/z)^s
        return Ok(ln_pref - std::f64::consts::LN_2 + log_gamma(s)? + s * (8.0 / (c * c)).ln());
    }
    Ok(-0.5 * y + ln_pref + s * (2.0 * y.abs() / c).ln() + ln_bessel_k(s, z)?)
}

/// Probability density of Δx (unit total mass).
pub fn measure_density(dx: f64, p: &MeasureParams) -> Result<f64> {
    Ok(ln_density_y(dx - p.r_w * p.t, p)?.exp())
}

/// The discounted kernel e^{−r_W t}·[`measure_density`], i.e. the pricing
/// kernel whose integral against a payoff gives the present value.
pub fn measure_density_discounted(dx: f64, p: &MeasureParams) -> Result<f64> {
    Ok((ln_density_y(dx - p.r_w * p.t, p)? - p.r_w * p.t).exp())
}

/// exp(−(|Δx|/2)√(1+8μ) − Δx/2)·|Δx|^{−1+t/δ}.
pub fn tail_asymptote(dx: f64, p: &MeasureParams) -> f64 {
    let c = p.bessel_arg_scale();
    (-0.5 * dx.abs() * c - 0.5 * dx + (p.k() - 1.0) * dx.abs().ln()).exp()
}

/// Density of the drift-free symmetric mixture √W·Z, W ~ Gamma(t/δ, μ).
pub fn driftless_density(y: f64, p: &MeasureParams) -> Result<f64> {
    let k = p.k();
    let mu = p.gamma.mu;
    let s = k - 0.5;
    let b = (2.0 * mu).sqrt();
    let ln_pref = k * mu.ln() + std::f64::consts::LN_2 - log_gamma(k)? - 0.5 * LN_2PI;
    if y == 0.0 {
        if s <= 0.0 {
            return Err(Error::Singularity { op: "driftless_density", detail: format!("diverges at 0 for t/δ = {k}") });
        }
        // (|y|/b)^s K_s(|y| b) → ½Γ(s)(2/b²)^s
        return Ok((ln_pref - std::f64::consts::LN_2 + log_gamma(s)? + s * (2.0 / (b * b)).ln()).exp());
    }
    Ok((ln_pref + s * (y.abs() / b).ln() + ln_bessel_k(s, y.abs() * b)?).exp())
}

fn density_breakpoints(p: &MeasureParams, extra_shift: f64) -> (Vec<Breakpoint>, f64) {
    let k = p.k();
    let sd = p.mean_w().sqrt();
    let mean = -0.5 * p.mean_w() + extra_shift;
    let mut pts = vec![Breakpoint { at: 0.0, m: singular_power(k) }];
    if mean.abs() > 0.5 * sd {
        pts.push(Breakpoint { at: mean, m: 1.0 });
    }
    (pts, sd.max(1e-300))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MartingaleReport {
    /// ∫ P dΔx
    pub mass: f64,
    /// |e^{−r_W t} ∫ e^{Δx} P dΔx − 1|
    pub deviation: f64,
    pub divergent: bool,
    pub quad_error: f64,
}

/// Normalization and martingale property of the measure.
pub fn martingale_check(p: &MeasureParams) -> Result<MartingaleReport> {
    let cfg = QuadConfig::with_tol(1e-13, 1e-12);
    let dens = |y: f64| ln_density_y(y, p).map(f64::exp).unwrap_or(0.0);
    let (pts, sd) = density_breakpoints(p, 0.0);
    let mass = quad::integrate_line(dens, &pts, sd, &cfg)?;
    // e^{−r t}·e^{Δx} = e^{y}; tilted mass sits near +W/2
    let tilted = |y: f64| ln_density_y(y, p).map(|l| (l + y).exp()).unwrap_or(0.0);
    let (tpts, _) = density_breakpoints(p, p.mean_w());
    let mart = quad::integrate_line_report(tilted, &tpts, sd, &cfg);
    // the tilted integrand must decay in both tails
    let far = 60.0 * sd + p.mean_w();
    let divergent = !mart.value.is_finite() || tilted(far) > 1e-3 * tilted(0.5 * p.mean_w()).max(f64::MIN_POSITIVE) || tilted(-far) > 1e-3;
    if !mart.converged && !divergent {
        return Err(Error::Quadrature { op: "martingale_check", value: mart.value, achieved: mart.abs_error, target: cfg.abs_tol });
    }
    Ok(MartingaleReport {
        mass: mass.value,
        deviation: (mart.value - 1.0).abs(),
        divergent,
        quad_error: mass.abs_error + mart.abs_error,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChapmanKolmogorovReport {
    pub t: f64,
    pub t_split: f64,
    pub grid: Vec<f64>,
    pub direct: Vec<f64>,
    pub convolved: Vec<f64>,
    pub max_deviation: f64,
}

/// max over a Δx grid of |P(·, t) − P(·, t − t_split) ∗ P(·, t_split)|.
pub fn chapman_kolmogorov_check(p: &MeasureParams, t_split: f64, grid_points: usize, exec: Exec) -> Result<ChapmanKolmogorovReport> {
    if !(t_split > 0.0 && t_split < p.t) {
        return Err(Error::domain("chapman_kolmogorov_check", format!("need 0 < t_split < t, got {t_split}")));
    }
    let p1 = MeasureParams { t: p.t - t_split, ..*p };
    let p2 = MeasureParams { t: t_split, ..*p };
    let sd = p.mean_w().sqrt();
    let center = p.r_w * p.t - 0.5 * p.mean_w();
    let n = grid_points.max(2);
    let grid: Vec<f64> = (0..n)
        .map(|i| center + sd * (-4.0 + 8.0 * (i as f64 + 0.5) / n as f64))
        .filter(|&x| x != p.r_w * p.t)
        .collect();
    let cfg = QuadConfig::with_tol(1e-11, 1e-11);
    let d1 = |x: f64| measure_density(x, &p1).unwrap_or(0.0);
    let d2 = |x: f64| measure_density(x, &p2).unwrap_or(0.0);
    let rows = par::try_map_range(exec, grid.len(), |i| -> Result<(f64, f64)> {
        let x = grid[i];
        let direct = measure_density(x, p)?;
        let integrand = |xp: f64| d1(x - xp) * d2(xp);
        let pts = [
            Breakpoint { at: p.r_w * t_split, m: singular_power(p2.k()) },
            Breakpoint { at: x - p.r_w * p1.t, m: singular_power(p1.k()) },
            Breakpoint { at: p.r_w * t_split - 0.5 * p2.mean_w(), m: 1.0 },
        ];
        let conv = quad::integrate_line(integrand, &pts, p2.mean_w().sqrt().min(p1.mean_w().sqrt()), &cfg)
            .map_err(|e| e.context(format!("convolution at Δx = {x}")))?;
        Ok((direct, conv.value))
    })?;
    let (direct, convolved): (Vec<f64>, Vec<f64>) = rows.into_iter().unzip();
    let max_deviation = direct.iter().zip(&convolved).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(ChapmanKolmogorovReport { t: p.t, t_split, grid, direct, convolved, max_deviation })
}

/// Density samples on a grid, for plotting and export.
pub fn density_grid(p: &MeasureParams, lo: f64, hi: f64, n: usize, exec: Exec) -> Vec<(f64, f64)> {
    let n = n.max(2);
    par::map_range(exec, n, |i| {
        let x = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        (x, measure_density(x, p).unwrap_or(f64::NAN))
    })
}

/// G(p) = 2^{1/δ} μ^{1/2} / (p² + 2μ)^{1/δ} at unit time.
pub fn mgf(pvar: f64, gp: &GammaParams) -> f64 {
    ln_mgf(pvar, gp).exp()
}

pub fn ln_mgf(pvar: f64, gp: &GammaParams) -> f64 {
    gp.nu * std::f64::consts::LN_2 + 0.5 * gp.mu.ln() - gp.nu * (pvar * pvar + 2.0 * gp.mu).ln()
}

/// G(p)/G(0) = (2μ/(p² + 2μ))^{1/δ}.
pub fn mgf_normalized(pvar: f64, gp: &GammaParams) -> f64 {
    (-gp.nu * (1.0 + pvar * pvar / (2.0 * gp.mu)).ln()).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CumulantSet {
    pub c: BTreeMap<usize, f64>,
    pub kappa3: f64,
    pub kappa4: f64,
}

impl CumulantSet {
    pub fn get(&self, n: usize) -> f64 {
        self.c.get(&n).copied().unwrap_or(0.0)
    }
}

/// c_{2n} = (2n)!/(n 2ⁿ) v̄ⁿ δ^{n−1}; odd cumulants vanish.
pub fn cumulants(gp: &GammaParams, max_order: usize) -> Result<CumulantSet> {
    if max_order < 2 {
        return Err(Error::Invalid(format!("max_order must be at least 2, got {max_order}")));
    }
    let (vbar, delta) = (gp.vbar(), gp.delta());
    let mut c = BTreeMap::new();
    for order in 1..=max_order.max(4) {
        let val = if order % 2 == 1 {
            0.0
        } else {
            let n = order / 2;
            let ln_fact = log_gamma(order as f64 + 1.0)?;
            let nf = n as f64;
            (ln_fact - nf.ln() - nf * std::f64::consts::LN_2 + nf * vbar.ln() + (nf - 1.0) * delta.ln()).exp()
        };
        c.insert(order, val);
    }
    let kappa4 = c[&4] / (c[&2] * c[&2]);
    c.retain(|&k, _| k <= max_order.max(2));
    Ok(CumulantSet { c, kappa3: 0.0, kappa4 })
}

/// Both sides of δ·c_{2n}/(Γ(n) 2^{2n}) = (1/2)_n (v̄δ/2)ⁿ.
pub fn cumulant_identity_sides(gp: &GammaParams, n: usize) -> Result<(f64, f64)> {
    let cs = cumulants(gp, 2 * n)?;
    let nf = n as f64;
    let lhs = gp.delta() * cs.get(2 * n) / (log_gamma(nf)?.exp() * 4f64.powi(n as i32));
    let rhs = crate::specfun::pochhammer(0.5, nf)? * (gp.vbar() * gp.delta() / 2.0).powi(n as i32);
    Ok((lhs, rhs))
}

/// (t* from the kurtosis criterion, t* from the width criterion) = (3δ, δ).
pub fn characteristic_time(gp: &GammaParams) -> (f64, f64) {
    (3.0 * gp.delta(), gp.delta())
}

/// ΔP(u) = φ(u)[Q₁(u)/√t + Q₂(u)/t].
pub fn edgeworth_correction(u: f64, t: f64, cum: &CumulantSet) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::domain("edgeworth_correction", format!("t = {t} must be positive")));
    }
    let (k3, k4) = (cum.kappa3, cum.kappa4);
    let q1 = k3 / 6.0 * (1.0 - u * u);
    let q2 = 10.0 * k3 * k3 / 720.0 * u.powi(5) + (k4 / 3.0 - 10.0 * k3 * k3 / 9.0) / 8.0 * u.powi(3) + (5.0 * k3 * k3 / 24.0 - k4 / 8.0) * u;
    Ok(norm_pdf(u) * (q1 / t.sqrt() + q2 / t))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeworthTailRatio {
    /// |ΔP(1)|/Φ(−1) from the literal Q₂.
    pub from_q2: f64,
    /// κ₄/(24 t).
    pub quoted_constant: f64,
}

pub fn edgeworth_tail_ratio(t: f64, cum: &CumulantSet) -> Result<EdgeworthTailRatio> {
    Ok(EdgeworthTailRatio {
        from_q2: edgeworth_correction(1.0, t, cum)?.abs() / norm_cdf(-1.0),
        quoted_constant: cum.kappa4 / (24.0 * t),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(mu: f64, delta: f64, r: f64, t: f64) -> MeasureParams {
        MeasureParams::new(GammaParams::from_mu_delta(mu, delta).unwrap(), r, t).unwrap()
    }

    // independent path: integrate the Gaussian kernel against the Gamma law of v
    fn smeared(dx: f64, p: &MeasureParams) -> f64 {
        let law = p.gamma.compound(p.t);
        let m = if law.nu < 1.0 { 1.0 / law.nu } else { 1.0 };
        let f = |v: f64| {
            let w = v * p.t;
            let mean = (p.r_w - 0.5 * v) * p.t;
            crate::distfit::gamma_pdf(v, &law).unwrap() * (-(dx - mean).powi(2) / (2.0 * w)).exp() / (2.0 * std::f64::consts::PI * w).sqrt()
        };
        quad::integrate_upper_singular(f, 0.0, m, law.vbar(), &QuadConfig::with_tol(1e-14, 1e-12)).unwrap().value
    }

    #[test]
    fn density_matches_smearing_oracle() {
        for &(mu, delta, r, t) in &[(5.0, 1.0, 0.01, 2.0), (0.5, 0.1, 0.0, 1.0), (40.0, 3.0, 0.05, 1.5), (2.0, 0.7, 0.02, 10.0)] {
            let p = params(mu, delta, r, t);
            let sd = p.mean_w().sqrt();
            for i in 0..9 {
                let dx = r * t - 0.5 * p.mean_w() + sd * (-3.1 + 0.77 * i as f64);
                let a = measure_density(dx, &p).unwrap();
                let b = smeared(dx, &p);
                assert!((a - b).abs() < 1e-8 * b.max(1.0), "mu {mu} delta {delta} t {t} dx {dx}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn limit_at_center() {
        let p = params(3.0, 0.5, 0.02, 2.0); // k = 4
        let c = measure_density(p.r_w * p.t, &p).unwrap();
        let near = measure_density(p.r_w * p.t + 1e-7, &p).unwrap();
        assert_relative_eq!(c, near, max_relative = 1e-6);
        assert_relative_eq!(c, smeared(p.r_w * p.t, &p), max_relative = 1e-9);
        let q = params(3.0, 5.0, 0.02, 2.0); // k = 0.4
        assert!(matches!(measure_density(q.r_w * q.t, &q), Err(Error::Singularity { .. })));
    }

    #[test]
    fn discounted_kernel_scales() {
        let p = params(3.0, 0.5, 0.02, 2.0);
        let x = 0.13;
        assert_relative_eq!(measure_density_discounted(x, &p).unwrap(), (-0.04f64).exp() * measure_density(x, &p).unwrap(), max_relative = 1e-14);
    }

    #[test]
    fn gaussian_limit() {
        let p = params(1e4, 1e-4, 0.001, 1.0); // v̄ = 1
        let sd = p.mean_w().sqrt();
        let mut sup: f64 = 0.0;
        for i in 0..41 {
            let dx = -0.5 + sd * (-4.0 + 0.2 * i as f64);
            let g = norm_pdf((dx - (p.r_w - 0.5) * p.t) / sd) / sd;
            sup = sup.max((measure_density(dx, &p).unwrap() - g).abs());
        }
        assert!(sup < 1e-3, "{sup}");
    }

    #[test]
    fn tail_ratio_is_flat() {
        let p = params(1.0, 1.0, 0.0, 1.0);
        for sign in [1.0, -1.0] {
            let r8 = measure_density(8.0 * sign, &p).unwrap() / tail_asymptote(8.0 * sign, &p);
            let r12 = measure_density(12.0 * sign, &p).unwrap() / tail_asymptote(12.0 * sign, &p);
            assert!((r8 / r12 - 1.0).abs() < 0.02);
        }
        // log-slopes
        let p = params(1.0, 0.3, 0.0, 1.0);
        let c = 3.0;
        let h = 1.0;
        let slope = |x: f64| (measure_density(x + h, &p).unwrap().ln() - measure_density(x - h, &p).unwrap().ln()) / (2.0 * h);
        let k = p.k();
        assert!((slope(300.0) - (-(c + 1.0) / 2.0 + (k - 1.0) / 300.0)).abs() < 1e-4);
        assert!((slope(-300.0) - ((c - 1.0) / 2.0 - (k - 1.0) / 300.0)).abs() < 1e-4);
    }

    #[test]
    fn driftless_law_is_symmetric() {
        let p = params(5.0, 1.0, 0.0, 2.0);
        let cfg = QuadConfig::with_tol(1e-14, 1e-13);
        let f = |y: f64| driftless_density(y, &p).unwrap();
        let pts = [Breakpoint { at: 0.0, m: singular_power(p.k()) }];
        let sd = p.mean_w().sqrt();
        let m0 = quad::integrate_line(f, &pts, sd, &cfg).unwrap().value;
        let m1 = quad::integrate_line(|y| y * f(y), &pts, sd, &QuadConfig::with_tol(1e-12, 1e-12)).unwrap().value;
        let m2 = quad::integrate_line(|y| y * y * f(y), &pts, sd, &cfg).unwrap().value;
        let m3 = quad::integrate_line(|y| (y - m1).powi(3) * f(y), &pts, sd, &QuadConfig::with_tol(1e-12, 1e-12)).unwrap().value;
        assert!((m0 - 1.0).abs() < 1e-10);
        assert!(m3.abs() < 1e-8);
        assert_relative_eq!(m2, p.mean_w(), max_relative = 1e-9);
    }

    #[test]
    fn normalization_and_martingale() {
        for &(mu, delta, t) in &[(5.0, 1.0, 1.0), (0.5, 0.1, 10.0), (351.29, 70.0, 1.0), (5.0, 70.0, 252.0)] {
            let p = params(mu, delta, 0.045 / 252.0, t);
            let r = martingale_check(&p).unwrap();
            assert!((r.mass - 1.0).abs() < 1e-8, "mu {mu} delta {delta} t {t}: {r:?}");
            assert!(r.deviation < 1e-6, "mu {mu} delta {delta} t {t}: {r:?}");
            assert!(!r.divergent);
        }
        let p = params(5.0, 1.0, 0.0, 3.0);
        assert!(martingale_check(&p).unwrap().deviation < 1e-9);
    }

    #[test]
    fn chapman_kolmogorov() {
        let p = params(5.0, 1.0, 0.01, 2.0);
        for &s in &[0.5, 1.0, 1.5] {
            let r = chapman_kolmogorov_check(&p, s, 9, Exec::Parallel).unwrap();
            assert!(r.max_deviation < 1e-6, "split {s}: {}", r.max_deviation);
        }
    }

    #[test]
    fn mgf_and_cumulants() {
        let gp = GammaParams::from_mu_delta(351.29, 69.43).unwrap();
        assert_eq!(mgf_normalized(0.0, &gp), 1.0);
        assert_relative_eq!(mgf(0.3, &gp) / mgf(0.0, &gp), mgf_normalized(0.3, &gp), max_relative = 1e-12);
        let cs = cumulants(&gp, 8).unwrap();
        assert_relative_eq!(cs.get(2), gp.vbar(), max_relative = 1e-14);
        assert_relative_eq!(cs.get(4), 3.0 * gp.vbar().powi(2) * gp.delta(), max_relative = 1e-13);
        assert_relative_eq!(cs.kappa4, 3.0 * gp.delta(), max_relative = 1e-13);
        assert_eq!(cs.kappa3, 0.0);
        assert_eq!(cs.get(3), 0.0);
        for n in 1..5 {
            let (l, r) = cumulant_identity_sides(&gp, n).unwrap();
            assert_relative_eq!(l, r, max_relative = 1e-12);
        }
    }

    #[test]
    fn characteristic_times() {
        let gp = GammaParams::from_mu_delta(351.29, 69.43).unwrap();
        let (k, w) = characteristic_time(&gp);
        assert_relative_eq!(k, 208.29, max_relative = 1e-12);
        assert_relative_eq!(w, 69.43, max_relative = 1e-12);
        assert_relative_eq!(k / w, 3.0, max_relative = 1e-14);
    }

    #[test]
    fn edgeworth_basics() {
        let zero = CumulantSet { c: BTreeMap::new(), kappa3: 0.0, kappa4: 0.0 };
        assert_eq!(edgeworth_correction(0.7, 3.0, &zero).unwrap(), 0.0);
        let gp = GammaParams::from_mu_delta(10.0, 0.2).unwrap();
        let cs = cumulants(&gp, 4).unwrap();
        assert_eq!(edgeworth_correction(0.0, 3.0, &cs).unwrap(), 0.0);
        // with κ₃ = 0 the correction is (κ₄/24)(u³ − 3u)φ(u)/t
        let u = 1.3;
        let t = 4.0;
        let expect = cs.kappa4 / 24.0 * (u * u * u - 3.0 * u) * norm_pdf(u) / t;
        assert_relative_eq!(edgeworth_correction(u, t, &cs).unwrap(), expect, max_relative = 1e-13);
        let r = edgeworth_tail_ratio(t, &cs).unwrap();
        assert_relative_eq!(r.from_q2, cs.kappa4 * norm_pdf(1.0) / (12.0 * t * norm_cdf(-1.0)), max_relative = 1e-13);
    }

    #[test]
    fn edgeworth_vs_tail_quadrature() {
        // small δ, moderate t: compare with ∫_u^∞ [P − φ] in standardized coordinates
        let gp = GammaParams::from_mu_delta(20.0, 0.05).unwrap();
        let t = 2.0;
        let p = MeasureParams::new(gp, 0.0, t).unwrap();
        let sd = p.mean_w().sqrt();
        let cfg = QuadConfig::with_tol(1e-14, 1e-12);
        let tail = quad::integrate_upper(|y| driftless_density(y, &p).unwrap(), sd, sd, &cfg).unwrap().value;
        let direct = tail - norm_cdf(-1.0);
        let cs = cumulants(&gp, 4).unwrap();
        let dp = edgeworth_correction(1.0, t, &cs).unwrap();
        assert!(direct.signum() == dp.signum(), "{direct} vs {dp}");
        let ratio = direct / dp;
        assert!(ratio > 0.5 && ratio < 2.0, "{direct} vs {dp}");
    }
}
