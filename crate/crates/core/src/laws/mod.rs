//! Approximating laws for the Hájek estimator and the pseudo-likelihood
//! estimator, with the numerical machinery to evaluate them.

pub mod block;
pub mod ks;
pub mod mple_law;
pub mod pointwise;
pub mod uniform;
pub mod wc;

pub use block::{block_law_sample, BlockComponent, BlockLawSpec, BlockRegime};
pub use ks::{ks_critical_1pct, ks_distance, ks_two_sample, ks_two_sample_critical_1pct};
pub use mple_law::{mple_limit_quantile, MpleLawSampler};
pub use pointwise::{asym_law_sd, ln_cdf, ln_quantile, low_temp_law_sd, LimitLawParams, Regime};
pub use uniform::{hn_cdf, hn_quantile, HnLaw};
pub use wc::{wc_cdf, wc_quantile, wc_sample, WcLaw};
