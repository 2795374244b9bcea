//! Device-independent average raw key rate.
//!
//! ```text
//! rate = (1 − h(Q) − h((1 + sqrt((s_wc/2)² − 1))/2)) · N_key · (1 − P)
//! ```
//!
//! with `s_wc = |S| − δS` the worst-case CHSH magnitude, `N_key` the observed
//! key photon rate and `P` the probability that a block's S falls in the
//! classical region.

use serde::Serialize;

use crate::bell::BellEstimate;
use crate::detection::{expected_table, observed_table, Allocation, DeadTimeMode, DetectorModel, SetupConfig};
use crate::error::{Error, Result};
use crate::quantum::qber;
use crate::{CLASSICAL_BOUND, TSIRELSON};

/// Binary entropy in bits, with `h(0) = h(1) = 0`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::ProbabilityOutOfRange(p));
    }
    if p == 0.0 || p == 1.0 {
        return Ok(0.0);
    }
    Ok(-p * p.log2() - (1.0 - p) * (1.0 - p).log2())
}

/// Eavesdropper information per symbol for a CHSH value `s` with uncertainty `delta_s`.
///
/// Evaluated at the worst case `|s| − δS` (clamped to Tsirelson's bound);
/// returns a full bit when the worst case is not above the classical bound.
pub fn eve_information(s: f64, delta_s: f64) -> Result<f64> {
    if !(delta_s >= 0.0) {
        return Err(Error::NonPositiveUncertainty(delta_s));
    }
    let worst = (s.abs() - delta_s).min(TSIRELSON);
    if worst <= CLASSICAL_BOUND {
        return Ok(1.0);
    }
    let root = ((worst / 2.0).powi(2) - 1.0).sqrt();
    binary_entropy(((1.0 + root) / 2.0).min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateComponents {
    pub h_q: f64,
    pub eve_info: f64,
    #[serde(flatten)]
    pub allocation: Allocation,
    pub s_value: f64,
    pub delta_s: f64,
    pub sd_of_violation: Option<f64>,
}

/// Average key rate together with the terms that produced it. Serializes to a
/// flat JSON object.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateReport {
    /// Bits per symbol, in [0, 1].
    pub per_symbol_rate: f64,
    /// Key photons per second after the detector response.
    pub n_key_observed: f64,
    pub p_classical: f64,
    /// Bits per second.
    pub average_key_rate: f64,
    /// Set when no pair reaches the key analyzers.
    pub zero_key_fraction: bool,
    #[serde(flatten)]
    pub components: RateComponents,
}

impl RateReport {
    pub fn average_key_rate_mbps(&self) -> f64 {
        self.average_key_rate / 1e6
    }
}

/// Average key rate with the detector applied per detector group.
pub fn average_key_rate(cfg: &SetupConfig, detector: &DetectorModel) -> Result<RateReport> {
    average_key_rate_with_mode(cfg, detector, DeadTimeMode::Group)
}

pub fn average_key_rate_with_mode(cfg: &SetupConfig, detector: &DetectorModel, mode: DeadTimeMode) -> Result<RateReport> {
    let alloc = cfg.allocation()?;
    let table = observed_table(&expected_table(cfg)?, detector, mode);
    let bell = BellEstimate::from_table(&table)?;

    let h_q = binary_entropy(qber(cfg.state))?;
    let eve_info = eve_information(bell.s_value, bell.delta_s)?;
    let per_symbol_rate = (1.0 - h_q - eve_info).max(0.0);
    let zero_key_fraction = alloc.key_fraction == 0.0;
    let n_key_observed = if zero_key_fraction { 0.0 } else { table.key_total() };

    Ok(RateReport {
        per_symbol_rate,
        n_key_observed,
        p_classical: bell.p_classical,
        average_key_rate: per_symbol_rate * n_key_observed * (1.0 - bell.p_classical),
        zero_key_fraction,
        components: RateComponents {
            h_q,
            eve_info,
            allocation: alloc,
            s_value: bell.s_value,
            delta_s: bell.delta_s,
            sd_of_violation: bell.sd_of_violation,
        },
    })
}
