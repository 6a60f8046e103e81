//! European option prices under the Gamma-smeared variance law.
//!
//! Prices take the Black–Scholes shape O = S·Φ⁺ − e^{−r t}E·Φ⁻ where Φ± are
//! Gamma averages of the normal CDF at y± = A/√W ± √W/2, A = ln(S/E) + r t and
//! W ~ Gamma(k = t/δ, μ). Φ± are computed from hypergeometric series in the
//! moneyness; a direct quadrature of the Gamma average is the reference and
//! the fallback whenever the series diagnostics look unreliable.

use argmin::core::{CostFunction, Executor, State, TerminationReason, TerminationStatus};
use argmin::solver::neldermead::NelderMead;
use serde::{Deserialize, Serialize};

use crate::distfit::GammaParams;
use crate::error::{Error, Result};
use crate::par::{self, Exec};
use crate::quad::{self, QuadConfig};
use crate::specfun::{self, digamma, kummer_1f1, kummer_1f1_param_derivs, log_gamma, log_gamma_signed, norm_cdf, EvalResult, KahanSum};

/// Shape t/δ above which the variance law is treated as a point mass.
const BS_LIMIT_SHAPE: f64 = 1e10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptionKind {
    Call,
    Put,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptionContract {
    pub spot: f64,
    pub strike: f64,
    /// Interest rate per time unit.
    pub rate: f64,
    /// Time to expiry.
    pub t: f64,
    pub kind: OptionKind,
}

impl OptionContract {
    pub fn new(spot: f64, strike: f64, rate: f64, t: f64, kind: OptionKind) -> Result<Self> {
        let c = OptionContract { spot, strike, rate, t, kind };
        c.validate()?;
        Ok(c)
    }

    pub fn call(spot: f64, strike: f64, rate: f64, t: f64) -> Result<Self> {
        Self::new(spot, strike, rate, t, OptionKind::Call)
    }

    pub fn put(spot: f64, strike: f64, rate: f64, t: f64) -> Result<Self> {
        Self::new(spot, strike, rate, t, OptionKind::Put)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.spot > 0.0 && self.spot.is_finite()) {
            return Err(Error::domain("OptionContract", format!("spot {} must be positive", self.spot)));
        }
        if !(self.strike > 0.0 && self.strike.is_finite()) {
            return Err(Error::domain("OptionContract", format!("strike {} must be positive", self.strike)));
        }
        if !(self.t > 0.0 && self.t.is_finite()) {
            return Err(Error::domain("OptionContract", format!("time to expiry {} must be positive", self.t)));
        }
        if !self.rate.is_finite() {
            return Err(Error::domain("OptionContract", "rate must be finite"));
        }
        Ok(())
    }

    /// ln(S/E) + r t
    pub fn a(&self) -> f64 {
        (self.spot / self.strike).ln() + self.rate * self.t
    }

    pub fn ln_strike(&self) -> f64 {
        self.strike.ln()
    }

    pub fn discount(&self) -> f64 {
        (-self.rate * self.t).exp()
    }

    pub fn with_spot(&self, spot: f64) -> Self {
        OptionContract { spot, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesControl {
    pub max_terms: usize,
    pub tol: f64,
    pub pole_eps: f64,
}

impl Default for SeriesControl {
    fn default() -> Self {
        SeriesControl { max_terms: 25, tol: 1e-10, pole_eps: 1e-6 }
    }
}

impl SeriesControl {
    pub fn validate(&self) -> Result<()> {
        if self.max_terms < 1 || !(self.tol > 0.0) || !(self.pole_eps > 0.0) {
            return Err(Error::Invalid(format!("bad series control {self:?}")));
        }
        Ok(())
    }

    /// Series results with a larger error estimate are rejected.
    fn accept_threshold(&self) -> f64 {
        100.0 * self.tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    RegularSeries,
    HalfIntegerSeries,
    Quadrature,
    BsLimit,
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Branch::RegularSeries => "regular-series",
            Branch::HalfIntegerSeries => "half-integer-series",
            Branch::Quadrature => "quadrature",
            Branch::BsLimit => "bs-limit",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceResult {
    pub price: f64,
    pub phi_plus: f64,
    pub phi_minus: f64,
    pub delta: f64,
    pub branch: Branch,
    pub terms_used: usize,
    pub trunc_error: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

fn assemble(c: &OptionContract, phi_plus: f64, phi_minus: f64, branch: Branch, terms_used: usize, trunc_error: f64, note: Option<String>) -> PriceResult {
    let d = c.discount();
    let (price, delta) = match c.kind {
        OptionKind::Call => (c.spot * phi_plus - d * c.strike * phi_minus, phi_plus),
        OptionKind::Put => (d * c.strike * (1.0 - phi_minus) - c.spot * (1.0 - phi_plus), phi_plus - 1.0),
    };
    PriceResult { price, phi_plus, phi_minus, delta, branch, terms_used, trunc_error, note }
}

/// Black–Scholes price at constant variance v per time unit.
pub fn bs_price(c: &OptionContract, v: f64) -> Result<PriceResult> {
    c.validate()?;
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::domain("bs_price", format!("variance {v} must be positive")));
    }
    let sd = (v * c.t).sqrt();
    let lm = (c.spot / c.strike).ln();
    let yp = (lm + (c.rate + 0.5 * v) * c.t) / sd;
    let ym = (lm + (c.rate - 0.5 * v) * c.t) / sd;
    let mut r = assemble(c, norm_cdf(yp), norm_cdf(ym), Branch::BsLimit, 0, 0.0, None);
    // tail-accurate put
    if c.kind == OptionKind::Put {
        r.price = c.discount() * c.strike * norm_cdf(-ym) - c.spot * norm_cdf(-yp);
    }
    Ok(r)
}

// ---------------------------------------------------------------------------
// quadrature reference

/// ln of the Gamma(k, 1) density, centred at s = k so that large shapes keep
/// full relative precision.
fn ln_unit_gamma_density(s: f64, k: f64, ln_gamma_k: f64) -> f64 {
    if k < 10.0 {
        return (k - 1.0) * s.ln() - s - ln_gamma_k;
    }
    let u = s / k - 1.0;
    let corr = {
        let r = 1.0 / k;
        let r2 = r * r;
        r * (1.0 / 12.0 - r2 * (1.0 / 360.0 - r2 * (1.0 / 1260.0 - r2 / 1680.0)))
    };
    k * log1pmx(u) - u.ln_1p() - 0.5 * (2.0 * std::f64::consts::PI * k).ln() - corr
}

/// ln(1 + u) − u
fn log1pmx(u: f64) -> f64 {
    if u.abs() < 0.01 {
        let mut pow = u;
        let mut sum = 0.0;
        for j in 2..14 {
            pow *= u;
            let sign = if j % 2 == 0 { -1.0 } else { 1.0 };
            sum += sign * pow / j as f64;
        }
        return sum;
    }
    u.ln_1p() - u
}

/// Φ± = E[Φ(A/√W ± √W/2)] with W ~ Gamma(k, μ), integrated in s = μW.
fn phi_quad(a: f64, mu: f64, k: f64, sign: f64, cfg: &QuadConfig) -> Result<EvalResult> {
    let lg = log_gamma(k)?;
    let g = |s: f64| {
        let w = s / mu;
        norm_cdf(a / w.sqrt() + sign * 0.5 * w.sqrt())
    };
    if k < 1.0 {
        // y = ln s with the s → 0 limit of the integrand split off
        let g0 = if a > 0.0 { 1.0 } else if a < 0.0 { 0.0 } else { 0.5 };
        let f = |y: f64| {
            let s = y.exp();
            (k * y - s - lg).exp() * (g(s) - g0)
        };
        let mut pts = vec![quad::Breakpoint { at: 0.0, m: 1.0 }];
        if a != 0.0 {
            pts.push(quad::Breakpoint { at: (a * a * mu).ln(), m: 1.0 });
        }
        let r = quad::integrate_line(f, &pts, 2.0, cfg)?;
        return Ok(EvalResult { value: g0 + r.value, abs_error_estimate: r.abs_error, terms_used: r.evaluations });
    }
    let f = |s: f64| {
        if s <= 0.0 {
            return 0.0;
        }
        ln_unit_gamma_density(s, k, lg).exp() * g(s)
    };
    let mut value = 0.0;
    let mut err = 0.0;
    let mut evals = 0;
    if k < 4.0 {
        let r = quad::integrate_upper(f, 0.0, k, cfg)?;
        value += r.value;
        err += r.abs_error;
        evals += r.evaluations;
    } else {
        let sd = k.sqrt();
        let lo = (k - 12.0 * sd).max(0.0);
        let hi = k + 14.0 * sd;
        if lo > 0.0 {
            let r = quad::integrate(f, 0.0, lo, cfg)?;
            value += r.value;
            err += r.abs_error;
            evals += r.evaluations;
        }
        for (x0, x1) in [(lo, k), (k, hi)] {
            let r = quad::integrate(f, x0, x1, cfg)?;
            value += r.value;
            err += r.abs_error;
            evals += r.evaluations;
        }
        let r = quad::integrate_upper(f, hi, sd, cfg)?;
        value += r.value;
        err += r.abs_error;
        evals += r.evaluations;
    }
    Ok(EvalResult { value, abs_error_estimate: err, terms_used: evals })
}

/// Tolerances used by the quadrature oracle and the series fallback.
pub fn default_quad_cfg() -> QuadConfig {
    QuadConfig::with_tol(1e-16, 1e-11)
}

/// (Φ⁺, Φ⁻) by direct quadrature of the Gamma average.
pub fn phi_quadrature(a: f64, p: &GammaParams, t: f64) -> Result<(EvalResult, EvalResult)> {
    p.validate()?;
    let k = t * p.nu;
    let cfg = default_quad_cfg();
    Ok((phi_quad(a, p.mu, k, 1.0, &cfg)?, phi_quad(a, p.mu, k, -1.0, &cfg)?))
}

/// The smeared price ∫ f_{tμ,t/δ}(v) O_BS(v) dv by adaptive quadrature.
pub fn price_quadrature(c: &OptionContract, p: &GammaParams, cfg: &QuadConfig) -> Result<PriceResult> {
    c.validate()?;
    p.validate()?;
    let k = c.t * p.nu;
    let a = c.a();
    let plus = phi_quad(a, p.mu, k, 1.0, cfg)?;
    let minus = phi_quad(a, p.mu, k, -1.0, cfg)?;
    let err = c.spot * plus.abs_error_estimate + c.strike * minus.abs_error_estimate;
    Ok(assemble(c, plus.value, minus.value, Branch::Quadrature, plus.terms_used + minus.terms_used, err, None))
}

// ---------------------------------------------------------------------------
// series

/// Running sum with the absolute stop rule and a round-off estimate.
struct Accum {
    sum: KahanSum,
    max_abs: f64,
    last: f64,
    streak: u8,
    terms: usize,
}

impl Accum {
    fn new() -> Self {
        Accum { sum: KahanSum::new(0.0), max_abs: 0.0, last: 0.0, streak: 0, terms: 0 }
    }

    /// Adds a term; true once three consecutive terms fall below `tol`.
    fn push(&mut self, term: f64, tol: f64) -> Result<bool> {
        if !term.is_finite() {
            return Err(Error::Unstable(format!("non-finite series term after {} terms", self.terms)));
        }
        self.sum.add(term);
        self.terms += 1;
        self.max_abs = self.max_abs.max(term.abs());
        self.last = term.abs();
        if term.abs() < tol {
            self.streak += 1;
        } else {
            self.streak = 0;
        }
        Ok(self.streak >= 3)
    }

    fn error(&self) -> f64 {
        self.last + 4.0 * f64::EPSILON * self.max_abs * (self.terms as f64).sqrt()
    }

    fn fail(&self, op: &'static str) -> Error {
        Error::Convergence { op, terms: self.terms, partial: self.sum.value(), last_term: self.last }
    }
}

#[derive(Debug, Clone, Copy)]
struct Part {
    value: f64,
    err: f64,
    terms: usize,
}

/// Γ(a)/Γ(b), directly when both fit in f64.
fn gamma_ratio(a: f64, b: f64) -> Result<f64> {
    if a > 0.0 && b > 0.0 {
        return Ok(specfun::ln_gamma_ratio(b, a - b)?.exp());
    }
    let (la, sa) = log_gamma_signed(a)?;
    let (lb, sb) = log_gamma_signed(b)?;
    Ok(sa * sb * (la - lb).exp())
}

/// cos(πk) with the integer part of k removed exactly.
fn cos_pi(k: f64) -> f64 {
    let n = k.floor();
    let c = (std::f64::consts::PI * (k - n)).cos();
    if n.rem_euclid(2.0) == 0.0 {
        c
    } else {
        -c
    }
}

fn f11(a: f64, b: f64, z: f64) -> Result<f64> {
    Ok(kummer_1f1(a, b, z)?.value)
}

/// (2πμ)^{−½} Σₙ (k)_{n+½}(½)ₙ/(2n+1)! (−1/(2μ))ⁿ ₁F₁(n+½, 2n+2, z)
fn sigma1(z: f64, mu: f64, k: f64, ctl: &SeriesControl) -> Result<Part> {
    let pref = 1.0 / (2.0 * std::f64::consts::PI * mu).sqrt();
    let mut c = gamma_ratio(k + 0.5, k)?;
    let mut acc = Accum::new();
    for n in 0..ctl.max_terms {
        let nf = n as f64;
        let term = pref * c * f11(nf + 0.5, 2.0 * nf + 2.0, z)?;
        if acc.push(term, ctl.tol)? {
            return Ok(Part { value: acc.sum.value(), err: acc.error(), terms: acc.terms });
        }
        let ratio = (k + nf + 0.5) * (nf + 0.5) / ((2.0 * nf + 2.0) * (2.0 * nf + 3.0)) / (2.0 * mu);
        if ratio >= 1.0 && nf > 2.0 * k + 2.0 {
            return Err(Error::Convergence { op: "phi_series (variance block)", terms: acc.terms, partial: acc.sum.value(), last_term: acc.last });
        }
        c *= -ratio;
    }
    Err(acc.fail("phi_series (variance block)"))
}

/// √(x/π) Σ_{n<limit} (k)_{−n−½}(½)ₙ/(2n+1)! (−x)ⁿ ₁F₁(n+½, 2n+2, z), summed to convergence
/// when `limit` is None.
fn odd_block(z: f64, x: f64, k: f64, limit: Option<usize>, ctl: &SeriesControl) -> Result<Part> {
    if limit == Some(0) {
        return Ok(Part { value: 0.0, err: 0.0, terms: 0 });
    }
    let mut d = gamma_ratio(k - 0.5, k)? * (x / std::f64::consts::PI).sqrt();
    let mut acc = Accum::new();
    let cap = limit.unwrap_or(ctl.max_terms);
    for n in 0..cap {
        let nf = n as f64;
        let term = d * f11(nf + 0.5, 2.0 * nf + 2.0, z)?;
        let done = acc.push(term, ctl.tol)?;
        if limit.is_none() && done {
            return Ok(Part { value: acc.sum.value(), err: acc.error(), terms: acc.terms });
        }
        d *= (nf + 0.5) * (-x) / ((k - nf - 1.5) * (2.0 * nf + 2.0) * (2.0 * nf + 3.0));
    }
    match limit {
        Some(_) => Ok(Part { value: acc.sum.value(), err: 4.0 * f64::EPSILON * acc.max_abs * (acc.terms as f64).sqrt(), terms: acc.terms }),
        None => Err(acc.fail("phi_series (odd moneyness block)")),
    }
}

/// (x^k/cos πk) Σ (k)ₙ/((2n+2k)! n!) xⁿ ₁F₁(n+k, 2n+1+2k, z)
fn pole_block(z: f64, x: f64, k: f64, ctl: &SeriesControl) -> Result<Part> {
    let direct = x.powf(k) / libm::tgamma(2.0 * k + 1.0);
    let pref = if direct.is_finite() && direct > 0.0 && 2.0 * k + 1.0 < 170.0 {
        direct
    } else {
        (k * x.ln() - log_gamma(2.0 * k + 1.0)?).exp()
    };
    let mut e = pref / cos_pi(k);
    let mut acc = Accum::new();
    for n in 0..ctl.max_terms {
        let nf = n as f64;
        let term = e * f11(nf + k, 2.0 * nf + 1.0 + 2.0 * k, z)?;
        if acc.push(term, ctl.tol)? {
            return Ok(Part { value: acc.sum.value(), err: acc.error(), terms: acc.terms });
        }
        e *= (k + nf) * x / ((2.0 * nf + 2.0 * k + 1.0) * (2.0 * nf + 2.0 * k + 2.0) * (nf + 1.0));
    }
    Err(acc.fail("phi_series (power block)"))
}

/// Replacement for the odd and power blocks when k = l + ½ exactly.
fn half_integer_block(z: f64, x: f64, l: usize, ctl: &SeriesControl) -> Result<Part> {
    let k = l as f64 + 0.5;
    let finite = odd_block(z, x, k, Some(l), ctl)?;
    let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
    let ln_x = x.ln();
    let ln_pref = -std::f64::consts::PI.ln() - log_gamma(k)?;
    let mut acc = Accum::new();
    for m in 0..ctl.max_terms {
        let mf = m as f64;
        let big_l = k + mf;
        let ln_g = big_l * ln_x + log_gamma(big_l)? - log_gamma(2.0 * big_l + 1.0)? - log_gamma(mf + 1.0)? + ln_pref;
        let fd = kummer_1f1_param_derivs(big_l, 2.0 * big_l + 1.0, z)?;
        let bracket = fd.value * (digamma(mf + 1.0)? - ln_x - digamma(big_l)? + 2.0 * digamma(2.0 * big_l + 1.0)?) - (fd.d_a + 2.0 * fd.d_b);
        let term = sign * ln_g.exp() * bracket;
        if acc.push(term, ctl.tol)? {
            return Ok(Part {
                value: finite.value + acc.sum.value(),
                err: finite.err + acc.error(),
                terms: finite.terms + acc.terms,
            });
        }
    }
    Err(acc.fail("phi_series (half-integer block)"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Leg {
    Plus,
    Minus,
}

fn moneyness_blocks(z: f64, x: f64, k: f64, half: Option<usize>, ctl: &SeriesControl) -> Result<Part> {
    if x == 0.0 {
        return Ok(Part { value: 0.0, err: 0.0, terms: 0 });
    }
    match half {
        Some(l) => half_integer_block(z, x, l, ctl),
        None => {
            let o = odd_block(z, x, k, None, ctl)?;
            let p = pole_block(z, x, k, ctl)?;
            Ok(Part { value: o.value + p.value, err: o.err + p.err, terms: o.terms.max(p.terms) })
        }
    }
}

fn phi_series_core(a: f64, mu: f64, k: f64, half: Option<usize>, leg: Leg, ctl: &SeriesControl) -> Result<EvalResult> {
    ctl.validate()?;
    let x = 2.0 * a * a * mu;
    let s = if a > 0.0 { 1.0 } else if a < 0.0 { -1.0 } else { 0.0 };
    let (z, s1_sign) = match leg {
        Leg::Plus => (-a, 1.0),
        Leg::Minus => (a, -1.0),
    };
    let s1 = sigma1(z, mu, k, ctl)?;
    let rest = moneyness_blocks(z, x, k, half, ctl)?;
    Ok(EvalResult {
        value: 0.5 * (1.0 + s1_sign * s1.value + s * rest.value),
        abs_error_estimate: 0.5 * (s1.err + rest.err),
        terms_used: s1.terms.max(rest.terms),
    })
}

fn nearest_half_integer(k: f64) -> (i64, f64) {
    let l = (k - 0.5).round();
    (l as i64, (k - (l + 0.5)).abs())
}

fn check_pole(op: &'static str, k: f64, ctl: &SeriesControl) -> Result<()> {
    let (l, dist) = nearest_half_integer(k);
    if l >= 0 && dist <= ctl.pole_eps {
        return Err(Error::Pole { op, at: k });
    }
    Ok(())
}

/// Φ⁺ from the moneyness series; fails within `pole_eps` of a half-integer t/δ.
pub fn phi_plus_series(a: f64, p: &GammaParams, t: f64, ctl: &SeriesControl) -> Result<EvalResult> {
    p.validate()?;
    let k = t * p.nu;
    check_pole("phi_plus_series", k, ctl)?;
    phi_series_core(a, p.mu, k, None, Leg::Plus, ctl)
}

/// Φ⁻ from the moneyness series.
pub fn phi_minus_series(a: f64, p: &GammaParams, t: f64, ctl: &SeriesControl) -> Result<EvalResult> {
    p.validate()?;
    let k = t * p.nu;
    check_pole("phi_minus_series", k, ctl)?;
    phi_series_core(a, p.mu, k, None, Leg::Minus, ctl)
}

/// Φ⁺ at t/δ = l + ½.
pub fn phi_plus_half_integer(a: f64, p: &GammaParams, l: i64, ctl: &SeriesControl) -> Result<EvalResult> {
    p.validate()?;
    if l < 0 {
        return Err(Error::domain("phi_plus_half_integer", format!("l = {l} must be nonnegative")));
    }
    phi_series_core(a, p.mu, l as f64 + 0.5, Some(l as usize), Leg::Plus, ctl)
}

/// Φ⁻ at t/δ = l + ½.
pub fn phi_minus_half_integer(a: f64, p: &GammaParams, l: i64, ctl: &SeriesControl) -> Result<EvalResult> {
    p.validate()?;
    if l < 0 {
        return Err(Error::domain("phi_minus_half_integer", format!("l = {l} must be nonnegative")));
    }
    phi_series_core(a, p.mu, l as f64 + 0.5, Some(l as usize), Leg::Minus, ctl)
}

fn series_price(c: &OptionContract, p: &GammaParams, ctl: &SeriesControl) -> Result<PriceResult> {
    let k = c.t * p.nu;
    let a = c.a();
    let (l, dist) = nearest_half_integer(k);
    let (plus, minus, branch, note) = if l >= 0 && dist <= ctl.pole_eps {
        let note = (dist > 0.0).then(|| format!("t/δ = {k} evaluated at the half-integer {}", l as f64 + 0.5));
        (
            phi_plus_half_integer(a, p, l, ctl)?,
            phi_minus_half_integer(a, p, l, ctl)?,
            Branch::HalfIntegerSeries,
            note,
        )
    } else {
        (
            phi_series_core(a, p.mu, k, None, Leg::Plus, ctl)?,
            phi_series_core(a, p.mu, k, None, Leg::Minus, ctl)?,
            Branch::RegularSeries,
            None,
        )
    };
    let err = plus.abs_error_estimate.max(minus.abs_error_estimate);
    let in_range = |v: f64| v > -err && v < 1.0 + err;
    if err > ctl.accept_threshold() || !in_range(plus.value) || !in_range(minus.value) {
        return Err(Error::Unstable(format!(
            "series estimate Φ⁺ = {}, Φ⁻ = {} with error {err:.3e}",
            plus.value, minus.value
        )));
    }
    let trunc = c.spot * plus.abs_error_estimate + c.strike * minus.abs_error_estimate;
    Ok(assemble(c, plus.value, minus.value, branch, plus.terms_used.max(minus.terms_used), trunc, note))
}

fn price_any(c: &OptionContract, p: &GammaParams, ctl: &SeriesControl) -> Result<PriceResult> {
    c.validate()?;
    p.validate()?;
    ctl.validate()?;
    let k = c.t * p.nu;
    if k >= BS_LIMIT_SHAPE {
        let mut r = bs_price(c, p.vbar())?;
        r.note = Some(format!("t/δ = {k:.3e}: variance law treated as a point mass"));
        return Ok(r);
    }
    match series_price(c, p, ctl) {
        Ok(r) => Ok(r),
        Err(e) if e.is_numerical() => {
            log::debug!("series rejected ({e}); falling back to quadrature");
            let mut r = price_quadrature(c, p, &default_quad_cfg())?;
            r.note = Some(format!("series rejected: {e}"));
            Ok(r)
        }
        Err(e) => Err(e),
    }
}

/// Call price with automatic branch selection.
pub fn call_price(c: &OptionContract, p: &GammaParams, ctl: &SeriesControl) -> Result<PriceResult> {
    price_any(&OptionContract { kind: OptionKind::Call, ..*c }, p, ctl)
}

/// Put price with automatic branch selection.
pub fn put_price(c: &OptionContract, p: &GammaParams, ctl: &SeriesControl) -> Result<PriceResult> {
    price_any(&OptionContract { kind: OptionKind::Put, ..*c }, p, ctl)
}

/// Price according to `c.kind`.
pub fn price(c: &OptionContract, p: &GammaParams, ctl: &SeriesControl) -> Result<PriceResult> {
    price_any(c, p, ctl)
}

/// Δ = Φ⁺ for a call.
pub fn delta_hedge(c: &OptionContract, p: &GammaParams, ctl: &SeriesControl) -> Result<f64> {
    if c.kind != OptionKind::Call {
        return Err(Error::Invalid("delta_hedge expects a call contract".into()));
    }
    Ok(call_price(c, p, ctl)?.phi_plus)
}

/// Central finite difference of the call price in S with step h = rel_step·S.
pub fn delta_finite_difference(c: &OptionContract, p: &GammaParams, ctl: &SeriesControl, rel_step: f64) -> Result<f64> {
    let h = rel_step * c.spot;
    let up = call_price(&c.with_spot(c.spot + h), p, ctl)?.price;
    let dn = call_price(&c.with_spot(c.spot - h), p, ctl)?.price;
    Ok((up - dn) / (2.0 * h))
}

/// A/√(v t)
pub fn moneyness(c: &OptionContract, v: f64) -> f64 {
    c.a() / (v * c.t).sqrt()
}

/// ⟨|A/√W|^{2n+1}⟩ over W ~ Gamma(t/δ, μ); infinite when t/δ ≤ n + ½.
pub fn moneyness_odd_moments(c: &OptionContract, p: &GammaParams, n: u32) -> f64 {
    let a = c.a();
    if a == 0.0 {
        return 0.0;
    }
    let k = c.t * p.nu;
    let nf = n as f64;
    if k <= nf + 0.5 {
        return f64::INFINITY;
    }
    let ln = (2.0 * nf + 1.0) * a.abs().ln() + (nf + 0.5) * p.mu.ln() + specfun::ln_gamma_ratio(k, -nf - 0.5).unwrap_or(f64::NAN);
    ln.exp()
}

// ---------------------------------------------------------------------------
// calibration

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quote {
    pub contract: OptionContract,
    pub observed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub params: GammaParams,
    pub chi2: f64,
    pub residuals: Vec<f64>,
    pub iterations: u64,
    pub converged: bool,
    pub restarts: usize,
}

struct Objective<'a> {
    quotes: &'a [Quote],
    ctl: SeriesControl,
    exec: Exec,
    scale: f64,
}

impl Objective<'_> {
    fn params(x: &[f64]) -> Option<GammaParams> {
        GammaParams::from_mu_delta(x[1].exp(), x[0].exp()).ok()
    }

    fn residuals(&self, gp: &GammaParams) -> Result<Vec<f64>> {
        par::try_map_range(self.exec, self.quotes.len(), |i| {
            let q = &self.quotes[i];
            Ok(price(&q.contract, gp, &self.ctl)?.price - q.observed)
        })
    }
}

impl CostFunction for Objective<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, x: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        let Some(gp) = Self::params(x) else { return Ok(f64::MAX) };
        match self.residuals(&gp) {
            Ok(r) => Ok(r.iter().map(|e| e * e).sum::<f64>() / self.scale),
            Err(_) => Ok(f64::MAX),
        }
    }
}

/// Least-squares fit of (δ, μ) to quoted prices by a simplex search in
/// (ln δ, ln μ), restarted twice from perturbed copies of the best point.
pub fn calibrate(quotes: &[Quote], init: &GammaParams, ctl: &SeriesControl, exec: Exec) -> Result<CalibrationReport> {
    if quotes.len() < 2 {
        return Err(Error::Invalid(format!("calibration needs at least 2 quotes, got {}", quotes.len())));
    }
    init.validate()?;
    for q in quotes {
        q.contract.validate()?;
        if !q.observed.is_finite() {
            return Err(Error::Invalid("non-finite observed price".into()));
        }
    }
    let scale = quotes.iter().map(|q| q.observed * q.observed).sum::<f64>().max(f64::MIN_POSITIVE);
    let mut best = vec![init.delta().ln(), init.mu.ln()];
    let mut iterations = 0;
    let mut converged = false;
    let steps = [(0.3, 0.3), (-0.15, 0.2), (0.05, -0.05)];
    for (run, &(s0, s1)) in steps.iter().enumerate() {
        let simplex = vec![best.clone(), vec![best[0] + s0, best[1]], vec![best[0], best[1] + s1]];
        let problem = Objective { quotes, ctl: *ctl, exec, scale };
        let solver = NelderMead::new(simplex)
            .with_sd_tolerance(1e-18)
            .map_err(|e| Error::Invalid(e.to_string()))?;
        let res = Executor::new(problem, solver)
            .configure(|s| s.max_iters(1500))
            .run()
            .map_err(|e| Error::Invalid(format!("optimizer failed: {e}")))?;
        let state = res.state();
        iterations += state.get_iter();
        if let Some(p) = state.get_best_param() {
            best = p.clone();
        }
        converged = matches!(state.get_termination_status(), TerminationStatus::Terminated(TerminationReason::SolverConverged));
        log::debug!("calibration run {run}: cost {} after {} iterations", state.get_best_cost(), state.get_iter());
    }
    let params = Objective::params(&best).ok_or_else(|| Error::Degenerate("optimizer left the parameter domain".into()))?;
    let problem = Objective { quotes, ctl: *ctl, exec, scale };
    let residuals = problem.residuals(&params)?;
    let chi2 = residuals.iter().map(|e| e * e).sum();
    Ok(CalibrationReport { params, chi2, residuals, iterations, converged, restarts: steps.len() - 1 })
}

/// Convenience wrapper used by reports: Φ(√(v̄t)/2), the at-the-money-forward Φ⁺.
pub fn atm_phi_plus(p: &GammaParams, t: f64) -> f64 {
    specfun::norm_cdf(0.5 * (p.vbar() * t).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn gp(vbar: f64, delta: f64) -> GammaParams {
        GammaParams::from_vbar_delta(vbar, delta).unwrap()
    }

    fn wide() -> SeriesControl {
        SeriesControl { max_terms: 300, tol: 1e-14, pole_eps: 1e-6 }
    }

    #[test]
    fn centred_gamma_density() {
        for &k in &[12.0, 250.0, 3.7e4] {
            let lg = log_gamma(k).unwrap();
            for &z in &[-3.0, -0.001, 0.0, 0.5, 4.0] {
                let s = k + z * k.sqrt();
                let direct = (k - 1.0) * s.ln() - s - lg;
                assert!((ln_unit_gamma_density(s, k, lg) - direct).abs() < 1e-9 * (1.0 + k.ln()), "k {k} z {z}");
            }
        }
        assert!((log1pmx(1e-3) - (1e-3f64.ln_1p() - 1e-3)).abs() < 1e-19);
    }

    #[test]
    fn quadrature_extreme_shapes() {
        // tiny shape: W is almost surely ~0, so Φ± → 1 in the money
        let p = gp(1e-4, 5.0);
        let (qp, qm) = phi_quadrature(0.4, &p, 1e-6).unwrap();
        assert!((qp.value - 1.0).abs() < 1e-9 && (qm.value - 1.0).abs() < 1e-9);
        let (qp, _) = phi_quadrature(-0.4, &p, 1e-6).unwrap();
        assert!(qp.value.abs() < 1e-9);
        // huge shape: the Black–Scholes value at v̄
        let p = gp(1e-4, 1e-6);
        let c = OptionContract::call(100.0, 98.0, 1e-4, 250.0).unwrap();
        let q = price_quadrature(&c, &p, &default_quad_cfg()).unwrap();
        let bs = bs_price(&c, 1e-4).unwrap();
        assert!((q.price - bs.price).abs() < 1e-6 * bs.price);
    }

    #[test]
    fn bs_reference_value() {
        // S = E = 100, r = 0, σ² = 0.04, t = 1: 100·(2Φ(0.1) − 1)
        let c = OptionContract::call(100.0, 100.0, 0.0, 1.0).unwrap();
        let r = bs_price(&c, 0.04).unwrap();
        assert_relative_eq!(r.price, 7.965_567_455_405_804, max_relative = 1e-12);
        let deep = OptionContract::call(120.0, 100.0, 0.0, 1e-8).unwrap();
        assert_relative_eq!(bs_price(&deep, 0.04).unwrap().price, 20.0, max_relative = 1e-12);
        assert_relative_eq!(bs_price(&c, 1e6).unwrap().price, 100.0, max_relative = 1e-9);
        assert!(bs_price(&c, 0.0).is_err());
    }

    #[test]
    fn series_matches_quadrature() {
        let ctl = wide();
        for &(vbar, delta, t) in &[(1e-4, 5.0, 100.0), (1e-4, 1.0, 2.3), (2e-3, 3.0, 4.1), (1e-4, 50.0, 40.0), (1e-4, 0.5, 20.0)] {
            let p = gp(vbar, delta);
            let sd = (vbar * t).sqrt();
            for &m in &[-3.0, -1.2, -0.3, 0.0, 0.05 / sd.max(0.05), 0.7, 2.0, 3.0] {
                let a = m * sd;
                let (qp, qm) = phi_quadrature(a, &p, t).unwrap();
                let sp = phi_plus_series(a, &p, t, &ctl).unwrap();
                let sm = phi_minus_series(a, &p, t, &ctl).unwrap();
                assert!((sp.value - qp.value).abs() < 1e-8, "Φ⁺ v̄ {vbar} δ {delta} t {t} A {a}: {} vs {}", sp.value, qp.value);
                assert!((sm.value - qm.value).abs() < 1e-8, "Φ⁻ v̄ {vbar} δ {delta} t {t} A {a}: {} vs {}", sm.value, qm.value);
            }
        }
    }

    #[test]
    fn at_the_money_forward() {
        let p = gp(1e-4, 5.0);
        let t = 100.0;
        let ctl = wide();
        let (qp, qm) = phi_quadrature(0.0, &p, t).unwrap();
        assert!((phi_plus_series(0.0, &p, t, &ctl).unwrap().value - qp.value).abs() < 1e-12);
        assert!((phi_minus_series(0.0, &p, t, &ctl).unwrap().value - qm.value).abs() < 1e-12);
        // Φ⁺ + Φ⁻ = 1 at A = 0
        assert!((qp.value + qm.value - 1.0).abs() < 1e-12);
        // close to the BS value at v̄ for small δ
        let p = gp(1e-4, 1e-3);
        assert!((phi_plus_series(0.0, &p, t, &ctl).unwrap().value - atm_phi_plus(&p, t)).abs() < 1e-7);
    }

    #[test]
    fn half_integer_branch() {
        let ctl = wide();
        for &(vbar, delta, l, m) in &[(1e-4, 2.0, 0i64, 0.8), (1e-4, 2.0, 1, -1.1), (2e-3, 1.0, 3, 1.5), (1e-4, 4.0, 5, -0.4)] {
            let p = gp(vbar, delta);
            let k = l as f64 + 0.5;
            let t = k * delta;
            let a = m * (vbar * t).sqrt();
            let hp = phi_plus_half_integer(a, &p, l, &ctl).unwrap().value;
            let hm = phi_minus_half_integer(a, &p, l, &ctl).unwrap().value;
            let (qp, qm) = phi_quadrature(a, &p, t).unwrap();
            assert!((hp - qp.value).abs() < 1e-8, "l {l}: {hp} vs {}", qp.value);
            assert!((hm - qm.value).abs() < 1e-8, "l {l}: {hm} vs {}", qm.value);
            for eps in [1e-4, -1e-4] {
                let s = phi_plus_series(a, &p, t + eps * delta, &ctl).unwrap().value;
                assert!((s - hp).abs() < 1e-4);
            }
        }
        let p = gp(1e-4, 2.0);
        assert!(phi_plus_half_integer(0.0, &p, -1, &ctl).is_err());
        assert!(matches!(phi_plus_series(0.01, &p, 3.0, &ctl), Err(Error::Pole { .. })));
    }

    #[test]
    fn branch_selection_and_fallback() {
        let p = gp(1e-4, 2.0);
        let c = OptionContract::call(100.0, 100.0, 1e-4, 3.0).unwrap();
        let r = call_price(&c, &p, &SeriesControl::default()).unwrap();
        assert_eq!(r.branch, Branch::HalfIntegerSeries);
        let c2 = OptionContract::call(100.0, 100.0, 1e-4, 3.0 + 1e-7).unwrap();
        let r2 = call_price(&c2, &p, &SeriesControl::default()).unwrap();
        assert_eq!(r2.branch, Branch::HalfIntegerSeries);
        assert!(r2.note.is_some());
        // far out of the money with few terms: series is rejected
        let far = OptionContract::call(100.0, 180.0, 0.0, 20.0).unwrap();
        let r3 = call_price(&far, &p, &SeriesControl { max_terms: 5, ..Default::default() }).unwrap();
        assert_eq!(r3.branch, Branch::Quadrature);
        let q = price_quadrature(&far, &p, &default_quad_cfg()).unwrap();
        assert_relative_eq!(r3.price, q.price, max_relative = 1e-12);
        let tiny = GammaParams::from_vbar_delta(1e-4, 1e-12).unwrap();
        assert_eq!(call_price(&c, &tiny, &SeriesControl::default()).unwrap().branch, Branch::BsLimit);
    }

    #[test]
    fn parity_and_bounds() {
        let p = gp(1e-4, 5.0);
        let ctl = SeriesControl::default();
        for &(s, e, t) in &[(100.0, 95.0, 30.0), (100.0, 110.0, 13.0), (50.0, 50.0, 200.0)] {
            let c = OptionContract::call(s, e, 2e-4, t).unwrap();
            let call = call_price(&c, &p, &ctl).unwrap();
            let put = put_price(&c, &p, &ctl).unwrap();
            assert!((put.price - (call.price - s + e * c.discount())).abs() < 1e-12 * s);
            assert!(call.phi_plus > call.phi_minus);
            assert!(call.phi_plus < 1.0 && call.phi_minus > 0.0);
            assert!(call.price >= (s - e * c.discount()).max(0.0) - 1e-12 && call.price <= s);
        }
    }

    #[test]
    fn delta_and_finite_difference() {
        let p = gp(1e-4, 5.0);
        let ctl = SeriesControl { max_terms: 200, ..Default::default() };
        for &(s, e, t) in &[(100.0, 97.0, 40.0), (100.0, 103.0, 12.0)] {
            let c = OptionContract::call(s, e, 1e-4, t).unwrap();
            let d = delta_hedge(&c, &p, &ctl).unwrap();
            let fd = delta_finite_difference(&c, &p, &ctl, 1e-5).unwrap();
            assert!((d - fd).abs() < 1e-6, "{d} vs {fd}");
        }
        let put = OptionContract::put(100.0, 100.0, 0.0, 1.0).unwrap();
        assert!(delta_hedge(&put, &p, &ctl).is_err());
    }

    #[test]
    fn small_delta_tends_to_black_scholes() {
        let vbar = 1e-4;
        let c = OptionContract::call(100.0, 102.0, 1e-4, 60.0).unwrap();
        let bs = bs_price(&c, vbar).unwrap().price;
        let ctl = wide();
        let mut prev = f64::INFINITY;
        for d in [1e-1, 1e-2, 1e-3] {
            let r = call_price(&c, &gp(vbar, d), &ctl).unwrap();
            let gap = (r.price - bs).abs();
            assert!(gap < prev, "δ {d}: {gap}");
            prev = gap;
        }
        assert!(prev / bs < 1e-4);
    }

    #[test]
    fn huge_shape_series_agrees_with_quadrature() {
        // t/δ = 3e7: the Γ ratios must not come from differences of huge log-gammas
        let p = GammaParams::from_mu_delta(1e10, 1e-6).unwrap();
        let c = OptionContract::call(100.0, 102.0, 0.045 / 252.0, 30.0).unwrap();
        let s = call_price(&c, &p, &SeriesControl::default()).unwrap();
        assert_eq!(s.branch, Branch::RegularSeries);
        let q = price_quadrature(&c, &p, &default_quad_cfg()).unwrap();
        assert_relative_eq!(s.price, q.price, max_relative = 1e-10);
    }

    #[test]
    fn moneyness_moments() {
        let c = OptionContract::call(100.0, 100.0, 0.0, 10.0).unwrap();
        let p = gp(1e-4, 2.0);
        assert_eq!(moneyness(&c, 1e-4), 0.0);
        assert_eq!(moneyness_odd_moments(&c, &p, 0), 0.0);
        let c = OptionContract::call(105.0, 100.0, 0.0, 10.0).unwrap();
        assert!(moneyness(&c, 1e-4) > 0.0);
        // quadrature of |A|/√W over the Gamma law of W
        let k = c.t * p.nu;
        let a = c.a();
        let f = |s: f64| ((k - 1.0) * s.ln() - s - log_gamma(k).unwrap()).exp() * a.abs() / (s / p.mu).sqrt();
        let q = quad::integrate_upper(f, 0.0, k, &QuadConfig::with_tol(1e-14, 1e-13)).unwrap().value;
        assert_relative_eq!(moneyness_odd_moments(&c, &p, 0), q, max_relative = 1e-8);
        assert!(moneyness_odd_moments(&c, &p, 10).is_infinite());
    }

    #[test]
    fn result_serializes_with_fixed_names() {
        let c = OptionContract::call(100.0, 100.0, 0.0, 10.0).unwrap();
        let r = call_price(&c, &gp(1e-4, 3.0), &SeriesControl::default()).unwrap();
        let j = serde_json::to_value(&r).unwrap();
        for key in ["price", "phi_plus", "phi_minus", "delta", "branch", "terms_used", "trunc_error"] {
            assert!(j.get(key).is_some(), "{key}");
        }
        assert_eq!(j["branch"], "regular-series");
    }

    #[test]
    fn calibration_round_trip() {
        let truth = GammaParams::from_mu_delta(2000.0, 5.0).unwrap();
        let ctl = SeriesControl { max_terms: 60, ..Default::default() };
        let mut quotes = Vec::new();
        for &t in &[12.0, 31.0, 66.0] {
            for &e in &[96.0, 100.0, 104.0] {
                let c = OptionContract::call(100.0, e, 1e-4, t).unwrap();
                quotes.push(Quote { contract: c, observed: call_price(&c, &truth, &ctl).unwrap().price });
            }
        }
        let init = GammaParams::from_mu_delta(1500.0, 3.0).unwrap();
        let rep = calibrate(&quotes, &init, &ctl, Exec::Parallel).unwrap();
        assert!((rep.params.mu / truth.mu - 1.0).abs() < 1e-3, "{rep:?}");
        assert!((rep.params.delta() / truth.delta() - 1.0).abs() < 1e-3, "{rep:?}");
        assert!(calibrate(&quotes[..1], &init, &ctl, Exec::Sequential).is_err());
    }
}
