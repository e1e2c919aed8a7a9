//! Panel factor-model estimation for metropolitan house-price returns.
//!
//! The pipeline runs from quarterly index levels ([`panel`]) through factor
//! construction ([`factors`]), per-asset regressions ([`ols`], [`suite`]),
//! moving-window betas ([`rolling`]) and the three-stage Fama-MacBeth
//! portfolio test ([`fama_macbeth`]). [`synth`] generates panels with known
//! parameters and [`report`] turns results into delimited or JSON tables.

pub mod dist;
pub mod error;
pub mod factors;
pub mod fama_macbeth;
pub mod linalg;
pub mod ols;
pub mod panel;
pub mod quarter;
pub mod report;
pub mod rng;
pub mod rolling;
pub mod suite;
pub mod synth;

pub use error::{Error, Result};
pub use quarter::{QuarterId, QuarterRange};
