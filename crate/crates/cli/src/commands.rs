use std::fs::File;
use std::io::{BufWriter, Write};

use anyhow::{Context, Result};
use gammabs::distfit::{chi_pdf, collapse_report, fit_chi, fit_moments_with, fit_reference_models, gamma_pdf, GammaParams};
use gammabs::hedge::backtest;
use gammabs::measure::{characteristic_time, cumulants, density_grid, edgeworth_tail_ratio, martingale_check, MeasureParams};
use gammabs::pricing::{calibrate, default_quad_cfg, price, price_quadrature, OptionContract, OptionKind, SeriesControl};
use gammabs::sdesim::{simulate_variance, simulate_volatility, stationary_check, SdeConfig, Target};
use gammabs::volest::{empirical_density, volatility_from_series, VolEstimatorConfig};
use gammabs::Exec;
use serde_json::json;

use crate::args::*;
use crate::io::{self, emit_json, input_error, invariant, resolve_input, write_table};

fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else {
        String::new()
    }
}

fn params_json(p: &GammaParams) -> serde_json::Value {
    json!({ "mu": p.mu, "nu": p.nu, "delta": p.delta(), "vbar": p.vbar() })
}

pub fn run(global: Global, command: Command) -> Result<()> {
    if let Command::Replay(r) = &command {
        let text = std::fs::read_to_string(&r.config).with_context(|| format!("reading {}", r.config.display()))?;
        let text = text.trim();
        let text = text.strip_prefix("effective-config:").unwrap_or(text).trim();
        let eff: Effective = serde_json::from_str(text).map_err(|e| input_error(format!("{}: {e}", r.config.display())))?;
        let g = Global { config_out: global.config_out, quiet: global.quiet, ..eff.global };
        return run(g, eff.command);
    }
    if !(global.trading_days_per_year > 0.0) {
        return Err(input_error("--trading-days-per-year must be positive"));
    }
    let exec = if global.sequential { Exec::Sequential } else { Exec::Parallel };
    let command = resolve(command, &global)?;
    echo(&global, &command)?;
    match command {
        Command::EstimateVol(a) => estimate_vol(&a, exec),
        Command::FitDist(a) => fit_dist(&a, exec),
        Command::Price(a) => price_cmd(&a, &global),
        Command::HedgeBacktest(a) => hedge(&a, &global, exec),
        Command::Simulate(a) => simulate(&a, exec),
        Command::Calibrate(a) => calibrate_cmd(&a, &global, exec),
        Command::Diagnose(a) => diagnose(&a, &global, exec),
        Command::Replay(_) => Err(input_error("replay cannot be nested")),
    }
}

/// Absolute input paths and inlined configuration files, so the echo is self-contained.
fn resolve(command: Command, g: &Global) -> Result<Command> {
    let dir = g.config_dir.as_deref();
    Ok(match command {
        Command::EstimateVol(mut a) => {
            a.input = resolve_input(&a.input, dir)?;
            Command::EstimateVol(a)
        }
        Command::FitDist(mut a) => {
            a.input = resolve_input(&a.input, dir)?;
            Command::FitDist(a)
        }
        Command::HedgeBacktest(mut a) => {
            a.prices = resolve_input(&a.prices, dir)?;
            if a.resolved_contract.is_none() {
                a.resolved_contract = Some(io::read_json(&resolve_input(&a.contract, dir)?)?);
            }
            if a.resolved_params.is_none() {
                a.resolved_params = Some(io::read_json(&resolve_input(&a.params, dir)?)?);
            }
            Command::HedgeBacktest(a)
        }
        Command::Simulate(mut a) => {
            if a.resolved.is_none() {
                let mut cfg: SdeConfig = match &a.config {
                    Some(p) => io::read_json(&resolve_input(p, dir)?)?,
                    None => SdeConfig::default(),
                };
                if let Some(s) = g.seed {
                    cfg.seed = s;
                }
                a.resolved = Some(cfg);
            }
            Command::Simulate(a)
        }
        Command::Calibrate(mut a) => {
            a.quotes = resolve_input(&a.quotes, dir)?;
            Command::Calibrate(a)
        }
        Command::Diagnose(mut a) => {
            if a.resolved.is_none() {
                a.resolved = Some(io::read_json(&resolve_input(&a.params, dir)?)?);
            }
            Command::Diagnose(a)
        }
        other => other,
    })
}

fn echo(global: &Global, command: &Command) -> Result<()> {
    let eff = Effective { global: global.clone(), command: command.clone() };
    if !global.quiet {
        eprintln!("effective-config: {}", serde_json::to_string(&eff)?);
    }
    if let Some(p) = &global.config_out {
        let mut w = BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?);
        serde_json::to_writer_pretty(&mut w, &eff)?;
        writeln!(w)?;
        w.flush()?;
    }
    Ok(())
}

fn estimate_vol(a: &EstimateVolArgs, exec: Exec) -> Result<()> {
    let table = io::read_prices(&a.input, a.day_length, a.allow_gaps)?;
    let cfg = VolEstimatorConfig { window_n: a.window, normalize: a.normalize, n_trading_days: a.ntd };
    let vols = volatility_from_series(&table.series, &cfg, exec)?;
    invariant(vols.iter().all(|v| v.is_finite() && *v >= 0.0), || "volatility estimate is negative or non-finite".into())?;
    let rows: Vec<Vec<String>> = vols.iter().enumerate().map(|(i, v)| vec![num(i as f64 / a.day_length as f64), num(*v)]).collect();
    let units = if a.normalize {
        "time in trading days from the first sample; value = window mean of |normalized return| (dimensionless)"
    } else {
        "time in trading days from the first sample; value = window mean of |log-return| per sampling step"
    };
    write_table(a.out.as_deref(), units, &["time", "value"], &rows)
}

fn fit_dist(a: &FitDistArgs, exec: Exec) -> Result<()> {
    let xs = io::read_values(&a.input)?;
    let (fit, variances): (_, Vec<f64>) = match a.quantity {
        SeriesKind::Volatility => (fit_chi(&xs, exec)?, xs.iter().map(|s| s * s).collect()),
        SeriesKind::Variance => (fit_moments_with(&xs, exec)?, xs.clone()),
    };
    let refs = fit_reference_models(&xs, exec)?;
    let mut out = json!({
        "quantity": a.quantity,
        "n_samples": xs.len(),
        "gamma_fit": fit,
        "derived": params_json(&fit.params),
        "reference": refs,
    });
    if let Some(t) = a.scale_collapse {
        if !(t > 0.0) {
            return Err(input_error("--scale-collapse must be positive"));
        }
        let p = GammaParams::new(fit.params.mu / t, fit.params.nu / t)?;
        let rep = collapse_report(&variances, t, &p, a.bins, exec)?;
        out["collapse"] = json!({ "window": t, "per_unit_params": params_json(&p), "ks_distance": rep.ks_distance, "n_samples": rep.n_samples });
        if let Some(path) = &a.collapse_out {
            let rows: Vec<Vec<String>> = rep.points.iter().map(|q| vec![num(q.v), num(q.v_tr), num(q.scaled_density), num(q.target)]).collect();
            write_table(Some(path), "v in squared input units; v_tr, scaled_density and target dimensionless", &["v", "v_tr", "scaled_density", "target"], &rows)?;
        }
    }
    emit_json(out, "mu in inverse squared input units; nu, delta dimensionless; vbar in squared input units")
}

fn price_cmd(a: &PriceArgs, g: &Global) -> Result<()> {
    let p = GammaParams::from_mu_delta(a.mu, a.delta)?;
    let kind: OptionKind = a.kind.into();
    let c = OptionContract::new(a.spot, a.strike, a.rate / g.trading_days_per_year, a.days, kind)?;
    let ctl = SeriesControl { max_terms: a.terms, tol: a.tol, ..Default::default() };
    ctl.validate()?;
    let r = if a.oracle { price_quadrature(&c, &p, &default_quad_cfg())? } else { price(&c, &p, &ctl)? };
    let slack = 1e-9 * c.strike.max(c.spot);
    let fwd = c.spot - c.strike * c.discount();
    let bounds_ok = match kind {
        OptionKind::Call => r.price >= fwd.max(0.0) - slack && r.price <= c.spot + slack,
        OptionKind::Put => r.price >= (-fwd).max(0.0) - slack && r.price <= c.strike * c.discount() + slack,
    };
    invariant(r.price.is_finite() && bounds_ok, || format!("price {} outside the no-arbitrage bounds", r.price))?;
    let mut out = serde_json::to_value(&r)?;
    out["contract"] = json!({ "spot": c.spot, "strike": c.strike, "rate_per_day": c.rate, "days": c.t, "kind": c.kind });
    out["params"] = params_json(&p);
    emit_json(out, "price in the currency of spot and strike; days are trading days; rate_per_day is the annual rate divided by trading_days_per_year")
}

fn hedge(a: &HedgeArgs, g: &Global, exec: Exec) -> Result<()> {
    let table = io::read_prices(&a.prices, a.day_length, a.allow_gaps)?;
    let cf = a.resolved_contract.context("contract not loaded")?;
    let p = a.resolved_params.context("parameters not loaded")?.params()?;
    let rate = cf.rate / g.trading_days_per_year;
    let c = OptionContract::call(table.series.prices[0], cf.strike, rate, cf.expiry_days)?;
    let ctl = SeriesControl { max_terms: a.terms, ..Default::default() };
    let path = backtest(&table.series, &c, &p, &ctl, exec)?;
    invariant(path.option_values.iter().all(|v| v.is_finite()), || "non-finite option value in backtest".into())?;
    if let Some(out) = &a.out {
        let rows: Vec<Vec<String>> = (0..path.times.len())
            .map(|i| {
                vec![
                    table.stamps[i].clone(),
                    num(path.option_values[i]),
                    num(path.deltas[i]),
                    num(path.portfolio_values[i]),
                    num(path.rate_fluctuations[i]),
                ]
            })
            .collect();
        write_table(
            Some(out),
            "option and pi in the currency of the price series; delta dimensionless; implied_rate_fluct per trading day (empty where pi >= 0)",
            &["date", "option", "delta", "pi", "implied_rate_fluct"],
            &rows,
        )?;
    }
    let out = json!({
        "n_samples": path.times.len(),
        "rate_per_day": rate,
        "fitted_rate_per_day": path.fitted_rate,
        "fitted_rate_annualized": path.fitted_rate.map(|r| r * g.trading_days_per_year),
        "fitted_over_rate": path.fitted_rate.map(|r| r / rate),
        "fit_intercept": path.fit_intercept,
        "excluded_nonnegative_pi": path.excluded,
        "fit_error": path.fit_error,
        "relative_rate_fluctuation": path.rate_fluctuation_stats,
        "params": params_json(&p),
    });
    emit_json(out, "rates per trading day unless annualized; relative_rate_fluctuation is dimensionless")
}

fn simulate(a: &SimulateArgs, exec: Exec) -> Result<()> {
    let cfg = a.resolved.context("configuration not loaded")?;
    cfg.validate().map_err(|e| input_error(e.to_string()))?;
    if a.paths_out.is_some() && cfg.record_every == 0 {
        return Err(input_error("--paths-out needs record_every > 0 in the SDE configuration"));
    }
    let ens = match a.sde {
        SdeKind::Variance => simulate_variance(&cfg, exec)?,
        SdeKind::Volatility => simulate_volatility(&cfg, exec)?,
    };
    invariant(ens.terminal.iter().all(|v| v.is_finite() && *v > 0.0), || "ensemble left the positive half-line".into())?;
    let law = cfg.law_at(ens.t_end)?;
    let target = match a.sde {
        SdeKind::Variance => Target::Gamma(law),
        SdeKind::Volatility => Target::Chi(law),
    };
    let report = if ens.n_paths() >= 100 { Some(stationary_check(&ens.terminal, target, exec)?) } else { None };
    if let Some(h) = &a.hist_out {
        let lo = ens.terminal.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ens.terminal.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let width = ((hi - lo) / a.bins.max(1) as f64).max(f64::MIN_POSITIVE);
        let hist = empirical_density(&ens.terminal, width)?;
        let rows: Vec<Vec<String>> = hist
            .centers()
            .iter()
            .zip(&hist.density)
            .map(|(&x, &d)| {
                let th = match a.sde {
                    SdeKind::Variance => gamma_pdf(x, &law),
                    SdeKind::Volatility => chi_pdf(x, &law),
                };
                vec![num(x), num(d), num(th.unwrap_or(f64::NAN))]
            })
            .collect();
        let units = match a.sde {
            SdeKind::Variance => "value = variance per unit time; densities per unit variance",
            SdeKind::Volatility => "value = volatility per square-root unit time; densities per unit volatility",
        };
        write_table(Some(h), units, &["value", "density", "target_density"], &rows)?;
    }
    if let Some(pth) = &a.paths_out {
        let mut w = BufWriter::new(File::create(pth).with_context(|| format!("creating {}", pth.display()))?);
        ens.write_paths_le(&mut w)?;
        w.flush()?;
    }
    let out = json!({
        "quantity": ens.quantity,
        "n_paths": ens.n_paths(),
        "t_end": ens.t_end,
        "seed": cfg.seed,
        "law_at_end": params_json(&law),
        "stationary": report,
        "rejected_steps": ens.rejected_steps,
        "recorded_times": ens.times,
        "paths_layout": a.paths_out.as_ref().map(|_| format!("little-endian f64, path-major, {} paths x {} times", ens.n_paths(), ens.times.len())),
    });
    emit_json(out, "time in the units of the configuration; variance per unit time")
}

fn calibrate_cmd(a: &CalibrateArgs, g: &Global, exec: Exec) -> Result<()> {
    let quotes = io::read_quotes(&a.quotes, g.trading_days_per_year)?;
    let init = GammaParams::from_mu_delta(a.init_mu, a.init_delta)?;
    let ctl = SeriesControl { max_terms: a.terms, ..Default::default() };
    let rep = calibrate(&quotes, &init, &ctl, exec)?;
    let rms = (rep.chi2 / quotes.len() as f64).sqrt();
    let out = json!({
        "params": params_json(&rep.params),
        "chi2": rep.chi2,
        "rms_residual": rms,
        "residuals": rep.residuals,
        "iterations": rep.iterations,
        "converged": rep.converged,
        "n_quotes": quotes.len(),
    });
    emit_json(out, "mu per unit daily variance; chi2 in squared currency units")
}

fn diagnose(a: &DiagnoseArgs, g: &Global, exec: Exec) -> Result<()> {
    let p = a.resolved.context("parameters not loaded")?.params()?;
    let (t_kurt, t_width) = characteristic_time(&p);
    let cs = cumulants(&p, 8)?;
    let rate = a.rate / g.trading_days_per_year;
    let m = MeasureParams::new(p, rate, a.days)?;
    let mart = martingale_check(&m)?;
    invariant(mart.divergent || (mart.mass - 1.0).abs() < 1e-6, || format!("measure mass {} differs from 1", mart.mass))?;
    let tail = edgeworth_tail_ratio(a.days, &cs)?;
    if let Some(out) = &a.grid_out {
        let sd = m.mean_w().sqrt();
        let center = rate * a.days - 0.5 * m.mean_w();
        let grid = density_grid(&m, center - 8.0 * sd, center + 8.0 * sd, a.grid_points, exec);
        let rows: Vec<Vec<String>> = grid.iter().map(|(x, d)| vec![num(*x), num(*d)]).collect();
        write_table(Some(out), "dx = log-price change over the horizon (dimensionless); density per unit dx", &["dx", "density"], &rows)?;
    }
    let cum: serde_json::Map<String, serde_json::Value> = cs.c.iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
    let out = json!({
        "params": params_json(&p),
        "t_star_kurtosis_days": t_kurt,
        "t_star_width_days": t_width,
        "kappa4": cs.kappa4,
        "cumulants": cum,
        "edgeworth_tail_ratio": tail,
        "measure": { "days": a.days, "rate_per_day": rate, "mass": mart.mass, "martingale_deviation": mart.deviation, "divergent": mart.divergent },
    });
    emit_json(out, "times in trading days; cumulants of the daily log-return")
}
