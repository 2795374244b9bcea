//! Photon-budget allocation model for an E91 receiver pair.
//!
//! The crate follows a pair source (a Werner state) through the beam-splitter
//! network at both receivers, builds the expected coincidence table, estimates
//! the CHSH parameter with propagated uncertainty and turns it into a
//! device-independent average raw key rate. The [`optimizer`] module searches
//! splitter reflectances for the best rate and [`montecarlo`] provides a
//! sampling oracle for the analytic statistics.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bell;
pub mod detection;
pub mod error;
pub mod export;
pub mod keyrate;
pub mod montecarlo;
pub mod optimizer;
pub mod quantum;
pub mod svg;

pub use bell::{
    classical_probability, delta_s, delta_s_closed_form, estimate_s, sd_of_violation,
    uncertainty_surface, BellEstimate, SurfacePoint,
};
pub use detection::{
    allocation, expected_table, observed_rate, observed_rate_full, observed_table, AliceDetector,
    Allocation, BobDetector, CoincidenceTable, DeadTimeMode, DetectorModel, SetupConfig,
};
pub use error::{Error, Result};
pub use keyrate::{average_key_rate, average_key_rate_with_mode, binary_entropy, eve_information, RateComponents, RateReport};
pub use montecarlo::{gaussianity_check, run_mc, GaussianityReport, McConfig, McResult};
pub use optimizer::{grid_search, normalized_heatmap, rate_sweep, GridSpec, Heatmap, Optimum, SweepRow};
pub use quantum::{
    coincidence_probs, correlation, ideal_chsh, qber, AnalyzerAngle, BasisConfig, Combo, Outcomes,
    WernerState,
};

/// Tsirelson's bound, the largest |S| a quantum state can reach.
pub const TSIRELSON: f64 = 2.0 * std::f64::consts::SQRT_2;

/// Bound on |S| for local hidden-variable models.
pub const CLASSICAL_BOUND: f64 = 2.0;
