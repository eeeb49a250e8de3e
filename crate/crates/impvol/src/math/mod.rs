//! Special functions used by the objective, the seeds and the oracle.

mod erfcx;
mod normal;

pub use erfcx::{erfcx_exact, erfcx_fast, ErfcxTier};
pub use normal::{norm_cdf, norm_cdf_inv, norm_pdf, FRAC_1_SQRT_2PI, SQRT_2PI};
