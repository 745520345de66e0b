//! Fair strikes of discretely sampled variance swaps and higher moment swaps
//! under Heston stochastic variance, a CIR short rate and variance-gamma
//! jumps.
//!
//! Strikes come from the affine moment generating function of the log
//! return under the maturity-forward measure: each period's coefficients
//! are integrated backward over two nested windows and differentiated at
//! zero. A Monte Carlo engine simulates the same dynamics as an
//! independent check.
//!
//! ```
//! use varswap::params::{to_forward, validate, RiskNeutralParams};
//! use varswap::pricer::{fair_strike, PricingSettings, SwapContract};
//!
//! let q = validate(RiskNeutralParams::table1()).unwrap();
//! let p = to_forward(&q, 1.0).unwrap();
//! let contract = SwapContract::variance(1.0, 12, 1.0).unwrap();
//! let k = fair_strike(&contract, &p, &PricingSettings::default()).unwrap();
//! assert!((k.strike - 0.0501).abs() < 1e-3);
//! ```

pub mod affine;
pub mod cli;
pub mod config;
pub mod equilibrium;
pub mod error;
pub mod levy;
pub mod mc;
pub mod moments;
pub mod ode;
pub mod params;
pub mod pricer;
pub mod rates;

pub use error::{Error, Result};
