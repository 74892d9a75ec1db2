//! Liquidity-spread estimation for defaultable coupon bonds.
//!
//! The value of marketability is measured with a look-back option: an
//! investor with perfect foresight sells the bond at the best possible date
//! and reinvests at the risk-free rate. Valuing that option on a liquid
//! market (hourly sale dates) and on an illiquid market (sparse sale dates)
//! and equating the ratio of values to the discount implied by a constant
//! liquidity spread gives an implicit equation for the spread.
//!
//! Rates follow a two-factor Gaussian short-rate model fitted to an input
//! discount curve; the credit spread follows a CIR square-root process whose
//! LGD-rescaled level doubles as the default intensity of a Cox process.
//!
//! Modules:
//! - [`curves`]: dates, day counts, discount curves, schedules, Svensson fit
//! - [`models`]: closed-form G2++/CIR bond prices
//! - [`simulate`]: reproducible joint path generation
//! - [`lookback`]: probing schedules and option valuation
//! - [`spread`]: the implicit-equation solver and sweeps
//! - [`marketcal`]: liquidity classification and probing-frequency calibration
//! - [`io`]: run configuration and CSV emission

pub mod curves;
pub mod error;
pub mod io;
pub mod lookback;
pub mod marketcal;
pub mod math;
pub mod models;
pub mod refdata;
pub mod simulate;
pub mod spread;

pub use error::{Error, Result};
