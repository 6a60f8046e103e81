//! Gamma-smeared Black–Scholes: volatility statistics, the mixed martingale
//! measure, hypergeometric price series, hedging backtests and the
//! stochastic-variance simulator.

pub mod distfit;
pub mod error;
pub mod hedge;
pub mod measure;
pub mod par;
pub mod pricing;
pub mod quad;
pub mod rng;
pub mod sdesim;
pub mod specfun;
pub mod volest;

pub use error::{Error, Result};
pub use par::Exec;
