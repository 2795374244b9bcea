//! CHSH estimation from a coincidence table with Poisson error propagation
//! and the Gaussian probability of landing in the classical region.

use rayon::prelude::*;
use serde::Serialize;
use libm::erfc;

use crate::detection::{expected_table, CoincidenceTable, SetupConfig};
use crate::error::{Error, Result};
use crate::quantum::Combo;
use crate::CLASSICAL_BOUND;

/// Combinations with fewer counts than this cannot be estimated.
pub const MIN_COMBO_COUNTS: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BellEstimate {
    pub s_value: f64,
    pub delta_s: f64,
    /// `(|S| − 2)/δS`; `None` when δS is zero.
    pub sd_of_violation: Option<f64>,
    pub p_classical: f64,
}

impl BellEstimate {
    /// Worst-case magnitude `|S| − δS` within one standard deviation.
    pub fn worst_case(&self) -> f64 {
        self.s_value.abs() - self.delta_s
    }

    pub fn from_table(table: &CoincidenceTable) -> Result<Self> {
        let s_value = estimate_s(table)?;
        let delta_s = delta_s(table)?;
        let (sd, p) = if delta_s > 0.0 {
            (
                Some(sd_of_violation(s_value, delta_s)?),
                classical_probability(s_value, delta_s)?,
            )
        } else if s_value.abs() <= CLASSICAL_BOUND {
            (None, 1.0)
        } else {
            (None, 0.0)
        };
        Ok(Self {
            s_value,
            delta_s,
            sd_of_violation: sd,
            p_classical: p,
        })
    }
}

fn checked_total(table: &CoincidenceTable, combo: Combo) -> Result<f64> {
    let total = table.combo_total(combo);
    if total < MIN_COMBO_COUNTS {
        return Err(Error::StarvedCombo { combo, total });
    }
    Ok(total)
}

/// Estimated correlation of each combination, in [`Combo::ALL`] order.
pub fn correlations(table: &CoincidenceTable) -> Result<[f64; 4]> {
    let mut e = [0.0; 4];
    for combo in Combo::ALL {
        let total = checked_total(table, combo)?;
        e[combo.index()] = table.combo(combo).signed_sum() / total;
    }
    Ok(e)
}

/// `S = E(a0,b0) + E(a0,b1) − E(a1,b0) + E(a1,b1)` from counts.
pub fn estimate_s(table: &CoincidenceTable) -> Result<f64> {
    let e = correlations(table)?;
    Ok(Combo::ALL.iter().map(|c| c.sign() * e[c.index()]).sum())
}

/// Propagated uncertainty `δS = sqrt(Σ_kl (∂S/∂n_kl)² · n_kl)` using `δn = √n`.
///
/// For a same-outcome entry of a combination, `∂E/∂n = (1 − E)/N`; for a
/// different-outcome entry `∂E/∂n = −(1 + E)/N`.
pub fn delta_s(table: &CoincidenceTable) -> Result<f64> {
    let mut var = 0.0;
    for combo in Combo::ALL {
        let total = checked_total(table, combo)?;
        let block = table.combo(combo);
        let e = block.signed_sum() / total;
        let d_same = combo.sign() * (1.0 - e) / total;
        let d_diff = combo.sign() * (-1.0 - e) / total;
        for (n, d) in [
            (block.pp, d_same),
            (block.pm, d_diff),
            (block.mp, d_diff),
            (block.mm, d_same),
        ] {
            var += d * d * n;
        }
    }
    Ok(var.sqrt())
}

/// `δS = sqrt(Σ_combos (1 − E²)/N)`, algebraically equal to [`delta_s`].
pub fn delta_s_closed_form(table: &CoincidenceTable) -> Result<f64> {
    let e = correlations(table)?;
    let mut var = 0.0;
    for combo in Combo::ALL {
        let ei = e[combo.index()];
        var += (1.0 - ei * ei) / table.combo_total(combo);
    }
    Ok(var.sqrt())
}

/// Number of standard deviations by which `|S|` exceeds the classical bound.
pub fn sd_of_violation(s: f64, delta_s: f64) -> Result<f64> {
    if !(delta_s > 0.0) {
        return Err(Error::NonPositiveUncertainty(delta_s));
    }
    Ok((s.abs() - CLASSICAL_BOUND) / delta_s)
}

fn upper_tail(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

/// Mass of `N(s, δS²)` inside `[−2, 2]`.
///
/// Both boundaries are evaluated through upper tails so that far-tail values
/// keep their relative accuracy; results below the smallest subnormal
/// underflow to zero.
pub fn classical_probability(s: f64, delta_s: f64) -> Result<f64> {
    if !(delta_s > 0.0) {
        return Err(Error::NonPositiveUncertainty(delta_s));
    }
    let hi = (CLASSICAL_BOUND - s) / delta_s;
    let lo = (-CLASSICAL_BOUND - s) / delta_s;
    let p = if lo >= 0.0 {
        upper_tail(lo) - upper_tail(hi)
    } else if hi <= 0.0 {
        upper_tail(-hi) - upper_tail(-lo)
    } else {
        1.0 - upper_tail(hi) - upper_tail(-lo)
    };
    Ok(p.clamp(0.0, 1.0))
}

/// One grid point of the δS / P surface. Starved points carry `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurfacePoint {
    pub eta: f64,
    pub r_b: f64,
    pub delta_s: Option<f64>,
    pub p_classical: Option<f64>,
}

impl SurfacePoint {
    pub fn is_starved(&self) -> bool {
        self.delta_s.is_none()
    }
}

/// δS and P over budgets × B3 reflectances, with the rest of `template` fixed.
///
/// Rows are budget-major in input order.
pub fn uncertainty_surface(budgets: &[f64], r_b_values: &[f64], template: &SetupConfig) -> Result<Vec<SurfacePoint>> {
    let points: Vec<(f64, f64)> = budgets
        .iter()
        .flat_map(|&b| r_b_values.iter().map(move |&r| (b, r)))
        .collect();
    points
        .par_iter()
        .map(|&(budget, r_b)| {
            let mut cfg = template.with_budget(budget);
            cfg.r_b = r_b;
            let table = expected_table(&cfg)?;
            let est = BellEstimate::from_table(&table);
            Ok(match est {
                Ok(est) => SurfacePoint {
                    eta: table.eta(),
                    r_b,
                    delta_s: Some(est.delta_s),
                    p_classical: Some(est.p_classical),
                },
                Err(Error::StarvedCombo { .. }) => SurfacePoint {
                    eta: table.eta(),
                    r_b,
                    delta_s: None,
                    p_classical: None,
                },
                Err(e) => return Err(e),
            })
        })
        .collect()
}
