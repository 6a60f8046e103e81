use gammabs::distfit::GammaParams;
use gammabs::measure::{cumulants, mgf_normalized};
use gammabs::pricing::{call_price, phi_minus_series, phi_plus_series, put_price, OptionContract, SeriesControl};
use gammabs::sdesim::drift_correction;
use proptest::prelude::*;

fn ctl() -> SeriesControl {
    SeriesControl { max_terms: 200, ..Default::default() }
}

fn contract() -> impl Strategy<Value = (f64, f64, f64, f64, f64)> {
    // spot, strike, rate, t, δ
    (50.0..150.0f64, 0.8..1.25f64, 0.0..3e-4f64, 1.0..300.0f64, 0.05..50.0f64).prop_map(|(s, k, r, t, d)| (s, s * k, r, t, d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parity_and_bounds((s, e, r, t, d) in contract()) {
        let p = GammaParams::from_vbar_delta(1e-4, d).unwrap();
        let c = OptionContract::call(s, e, r, t).unwrap();
        let call = call_price(&c, &p, &ctl()).unwrap();
        let put = put_price(&c, &p, &ctl()).unwrap();
        prop_assert!((put.price - (call.price - s + e * c.discount())).abs() < 1e-12 * e);
        prop_assert!(call.price >= (s - e * c.discount()).max(0.0) - 1e-9 * e);
        prop_assert!(call.price <= s);
        prop_assert!(put.price >= -1e-9 * e);
        prop_assert!(call.phi_plus >= call.phi_minus);
        prop_assert!((0.0..=1.0).contains(&call.phi_plus) && (0.0..=1.0).contains(&call.phi_minus));
    }

    #[test]
    fn call_decreases_in_strike((s, e, r, t, d) in contract()) {
        let p = GammaParams::from_vbar_delta(1e-4, d).unwrap();
        let lo = call_price(&OptionContract::call(s, e, r, t).unwrap(), &p, &ctl()).unwrap().price;
        let hi = call_price(&OptionContract::call(s, e * 1.01, r, t).unwrap(), &p, &ctl()).unwrap().price;
        prop_assert!(hi <= lo + 1e-10 * s);
    }

    #[test]
    fn phi_increases_in_moneyness(m in -2.5..2.5f64, k in 0.6..20.0f64, d in 0.05..50.0f64) {
        let vbar = 1e-4;
        let p = GammaParams::from_vbar_delta(vbar, d).unwrap();
        prop_assume!(((k - 0.5) - (k - 0.5).round()).abs() > 1e-3);
        let t = k * d;
        let a = m * (vbar * t).sqrt();
        let b = a + 0.05 * (vbar * t).sqrt();
        let c = SeriesControl { max_terms: 300, tol: 1e-13, pole_eps: 1e-6 };
        let (p0, p1) = (phi_plus_series(a, &p, t, &c).unwrap().value, phi_plus_series(b, &p, t, &c).unwrap().value);
        let (m0, m1) = (phi_minus_series(a, &p, t, &c).unwrap().value, phi_minus_series(b, &p, t, &c).unwrap().value);
        prop_assert!(p1 >= p0 - 1e-9 && m1 >= m0 - 1e-9);
    }

    #[test]
    fn characteristic_function_is_bounded(p in -50.0..50.0f64, mu in 1.0..1e4f64, nu in 0.01..50.0f64) {
        let g = GammaParams::new(mu, nu).unwrap();
        let f = mgf_normalized(p, &g);
        prop_assert!(f > 0.0 && f <= 1.0);
        prop_assert!(mgf_normalized(-p, &g) == f);
    }

    #[test]
    fn even_cumulants_are_positive(vbar in 1e-6..1.0f64, d in 1e-3..100.0f64) {
        let g = GammaParams::from_vbar_delta(vbar, d).unwrap();
        let cs = cumulants(&g, 8).unwrap();
        for n in 1..=8 {
            if n % 2 == 0 { prop_assert!(cs.get(n) > 0.0) } else { prop_assert!(cs.get(n) == 0.0) }
        }
        prop_assert!((cs.kappa4 / (3.0 * d) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn drift_correction_vanishes_without_time_dependence(v in 1e-3..10.0f64, mu in 0.1..100.0f64, nu in 0.1..100.0f64) {
        prop_assert_eq!(drift_correction(v, mu, nu, 1.0, 0.0, 0.0).unwrap(), 0.0);
    }
}
