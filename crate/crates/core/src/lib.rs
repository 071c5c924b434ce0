//! Rank-based tests of first-order stochastic dominance.
//!
//! The test statistic is the one-sided Wilcoxon-Mann-Whitney statistic: the
//! scaled area between the empirical ordinal dominance curve (ODC) and the
//! 45-degree line. Critical values come from a multinomial-weight bootstrap,
//! either the standard one or a modified version that drops grid points
//! lying well below the diagonal (an implicit contact-set estimate). Both
//! independent samples and matched pairs are supported.
//!
//! Module map:
//!
//! - [`odc`]: empirical CDFs, quantiles, ranks and the empirical ODC.
//! - [`statistics`]: the WMW statistic, the exact ODC area and one-sided KS.
//! - [`bootstrap`]: weights, bootstrap ODCs, variance profiles, critical
//!   values and the end-to-end [`bootstrap::run_test`].
//! - [`limitdist`]: Brownian-bridge functional and limit variances.
//! - [`simulate`]: data-generating processes and rejection-rate studies.
//! - [`io`]: CSV input and report serialization.
//! - [`cli`]: the `domtest` command-line front end.

pub mod bootstrap;
pub mod cli;
pub mod error;
pub mod io;
pub mod limitdist;
pub mod odc;
pub mod seed;
pub mod simulate;
pub mod statistics;

pub use error::{Error, Result};
pub use odc::{OdcCurve, Pairing, RankProfile, TwoSampleData};
