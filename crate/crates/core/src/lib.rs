//! Tests of the martingale difference hypothesis for financial return series.
//!
//! Two complementary tests are provided:
//!
//! * the wild-bootstrap automatic variance ratio test ([`avr`]), sensitive to
//!   linear serial correlation, with a data-dependent quadratic spectral
//!   bandwidth;
//! * the generalized spectral test ([`gs`]), an integrated Cramér–von Mises
//!   statistic sensitive to nonlinear dependence in the conditional mean.
//!
//! [`rolling`] re-estimates either test over calendar windows to track how
//! predictability changes through time, [`dgp`] generates seeded synthetic
//! processes for validation, and [`panel`] builds equal-weighted portfolio
//! returns from per-instrument CSV files.
//!
//! All stochastic code draws from counter-derived substreams ([`rng`]), so
//! results depend on the master seed only, never on thread count.

pub mod avr;
pub mod bootstrap;
pub mod dgp;
pub mod error;
pub mod gs;
pub mod panel;
pub mod rng;
pub mod rolling;
pub mod series;

pub use avr::{auto_bandwidth, avr_statistic, avr_test, qs_kernel, variance_ratio, AvrOutcome, AvrStatistic};
pub use bootstrap::{BootstrapConfig, Multiplier};
pub use dgp::{generate, DgpKind, DgpSpec};
pub use error::{Error, Result};
pub use gs::{gram_matrix, gs_statistic, gs_test, GramMatrix, GsOutcome, MaxLag};
pub use panel::{equal_weight_series, load_panel, Panel, PanelFormat};
pub use rolling::{
    make_windows, run_rolling, RollingResult, RollingTest, Window, WindowOutcome, WindowResult, WindowSpec,
};
pub use series::{autocorr, describe, Frequency, MomentSummary, ReturnSeries};
