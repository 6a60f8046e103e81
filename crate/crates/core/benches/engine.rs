use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use gammabs::distfit::{ks_distance, sample_gamma, GammaParams};
use gammabs::measure::{chapman_kolmogorov_check, MeasureParams};
use gammabs::par;
use gammabs::pricing::{call_price, OptionContract, SeriesControl};
use gammabs::sdesim::{simulate_variance, SdeConfig};
use gammabs::Exec;

const POLICIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn pricing_grid(c: &mut Criterion) {
    let p = GammaParams::from_vbar_delta(1e-4, 5.0).unwrap();
    let ctl = SeriesControl::default();
    let contracts: Vec<OptionContract> = (0..400)
        .map(|i| OptionContract::call(100.0, 80.0 + 0.1 * i as f64, 1e-4, 5.0 + (i % 40) as f64 * 6.0).unwrap())
        .collect();
    let mut g = c.benchmark_group("price_400_calls");
    for (name, exec) in POLICIES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| par::map_slice(exec, &contracts, |k| call_price(k, &p, &ctl).map(|r| r.price).unwrap_or(f64::NAN)))
        });
    }
    g.finish();
}

fn sde(c: &mut Criterion) {
    let cfg = SdeConfig { n_paths: 5_000, horizon: 0.5, ..Default::default() };
    let mut g = c.benchmark_group("sde_5000_paths");
    g.sample_size(10);
    for (name, exec) in POLICIES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| simulate_variance(black_box(&cfg), exec).unwrap()));
    }
    g.finish();
}

fn ks(c: &mut Criterion) {
    let p = GammaParams::new(2.0, 3.0).unwrap();
    let s = sample_gamma(&p, 100_000, 1, Exec::Parallel);
    let mut g = c.benchmark_group("ks_100k");
    g.sample_size(10);
    for (name, exec) in POLICIES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| ks_distance(&s, |v| gammabs::distfit::gamma_cdf(v, &p).unwrap(), exec))
        });
    }
    g.finish();
}

fn convolution(c: &mut Criterion) {
    let m = MeasureParams::new(GammaParams::from_vbar_delta(1e-4, 5.0).unwrap(), 1e-4, 30.0).unwrap();
    let mut g = c.benchmark_group("convolution_check");
    g.sample_size(10);
    for (name, exec) in POLICIES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| chapman_kolmogorov_check(&m, 15.0, 9, exec).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, pricing_grid, sde, ks, convolution);
criterion_main!(benches);
