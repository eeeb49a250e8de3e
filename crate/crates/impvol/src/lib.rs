//! Black implied volatility by a fixed number of Householder-3 steps on an
//! erfcx-factored log-price objective.
//!
//! ```
//! use impvol::{solve, OptionKind, OptionQuote, SolverConfig};
//!
//! let quote = OptionQuote { kind: OptionKind::Call, forward: 100.0, strike: 110.0, price: 2.5, expiry: 0.5 };
//! let res = solve(&quote, &SolverConfig::default()).unwrap();
//! assert!(res.sigma > 0.0);
//! ```

// `!(a < b)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dd;
pub mod datasets;
mod error;
pub mod math;
pub mod normalization;
pub mod objective;
pub mod oracle;
pub mod seeds;
pub mod solver;

pub use error::IvError;
pub use math::ErfcxTier;
pub use normalization::{denormalize, normalize, NormalizedQuote, OptionKind, OptionQuote};
pub use seeds::GuessBranch;
pub use solver::{solve, solve_normalized, Polish, SolverConfig, SolverResult};
