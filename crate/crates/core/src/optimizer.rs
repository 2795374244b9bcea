//! Exhaustive search over splitter reflectances.

use rayon::prelude::*;
use serde::Serialize;

use crate::detection::{DetectorModel, SetupConfig};
use crate::error::{Error, Result};
use crate::keyrate::average_key_rate;

/// `first/denom, (first+1)/denom, ..., last/denom`, each value correctly rounded.
pub fn ratio_grid(first: u32, last: u32, denom: u32) -> Vec<f64> {
    (first..=last).map(|k| k as f64 / denom as f64).collect()
}

/// `points` values spaced evenly in log10 between `lo` and `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            (0..points)
                .map(|i| 10f64.powf(a + (b - a) * i as f64 / (points - 1) as f64))
                .collect()
        }
    }
}

/// `per_decade` log-spaced values per decade from `10^lo_exp` to `10^hi_exp`.
pub fn decades(lo_exp: i32, hi_exp: i32, per_decade: u32) -> Vec<f64> {
    let steps = ((hi_exp - lo_exp) as u32) * per_decade;
    (0..=steps)
        .map(|i| {
            let e = lo_exp as f64 + i as f64 / per_decade as f64;
            if i % per_decade == 0 {
                10f64.powi(e as i32)
            } else {
                10f64.powf(e)
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSpec {
    pub r_a_values: Vec<f64>,
    pub r_b_values: Vec<f64>,
    /// Second pass at 10× finer steps around the coarse optimum.
    pub refine: bool,
}

impl Default for GridSpec {
    /// Alice 0.1..0.9 step 0.1, Bob 0.001..0.999 step 0.001.
    fn default() -> Self {
        Self {
            r_a_values: ratio_grid(1, 9, 10),
            r_b_values: ratio_grid(1, 999, 1000),
            refine: false,
        }
    }
}

impl GridSpec {
    pub fn new(r_a_values: Vec<f64>, r_b_values: Vec<f64>) -> Result<Self> {
        let g = Self {
            r_a_values,
            r_b_values,
            refine: false,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, values) in [("r_a", &self.r_a_values), ("r_b", &self.r_b_values)] {
            if values.is_empty() {
                return Err(Error::InvalidGrid(format!("{name} grid is empty")));
            }
            if let Some(v) = values.iter().find(|&&v| !(v > 0.0 && v < 1.0)) {
                return Err(Error::InvalidGrid(format!("{name} value {v} outside (0, 1)")));
            }
            if values.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::InvalidGrid(format!("{name} grid is not strictly increasing")));
            }
        }
        Ok(())
    }

    fn points(&self) -> Vec<(f64, f64)> {
        self.r_a_values
            .iter()
            .flat_map(|&a| self.r_b_values.iter().map(move |&b| (a, b)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub r_a: f64,
    pub r_b: f64,
    pub rate_bps: f64,
}

/// Rate at a single point; starved Bell combinations count as zero rate.
fn point_rate(template: &SetupConfig, detector: &DetectorModel, r_a: f64, r_b: f64) -> Result<f64> {
    match average_key_rate(&template.with_reflectances(r_a, r_b), detector) {
        Ok(r) => Ok(r.average_key_rate),
        Err(Error::StarvedCombo { .. }) => Ok(0.0),
        Err(e) => Err(e),
    }
}

fn evaluate(template: &SetupConfig, detector: &DetectorModel, points: &[(f64, f64)]) -> Result<Vec<SweepRow>> {
    points
        .par_iter()
        .map(|&(r_a, r_b)| {
            Ok(SweepRow {
                r_a,
                r_b,
                rate_bps: point_rate(template, detector, r_a, r_b)?,
            })
        })
        .collect()
}

/// Average key rate at every grid point, r_a-major.
pub fn rate_sweep(template: &SetupConfig, detector: &DetectorModel, grid: &GridSpec) -> Result<Vec<SweepRow>> {
    grid.validate()?;
    template.validate()?;
    evaluate(template, detector, &grid.points())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Optimum {
    pub r_a_star: f64,
    pub r_b_star: f64,
    #[serde(rename = "rate_star_bps")]
    pub rate_star: f64,
    #[serde(rename = "baseline_bps")]
    pub baseline_rate: f64,
    /// `100·(rate_star/baseline − 1)`; `None` when the baseline rate is zero.
    pub improvement_percent: Option<f64>,
    #[serde(skip)]
    pub sweep: Vec<SweepRow>,
}

/// Best row; ties go to the larger r_a, then the larger r_b.
fn argmax(rows: &[SweepRow]) -> Option<SweepRow> {
    rows.iter().copied().reduce(|best, row| {
        let better = row.rate_bps > best.rate_bps
            || (row.rate_bps == best.rate_bps && (row.r_a, row.r_b) > (best.r_a, best.r_b));
        if better {
            row
        } else {
            best
        }
    })
}

fn refinement(coarse: &[f64], best: f64) -> Vec<f64> {
    let step = coarse
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    if !step.is_finite() {
        return vec![best];
    }
    let fine = step / 10.0;
    (-10..=10)
        .map(|i| best + i as f64 * fine)
        .filter(|&v| v > 0.0 && v < 1.0)
        .collect()
}

/// Exhaustive search for the reflectances with the highest average key rate.
///
/// The baseline is the symmetric (0.5, 0.5) configuration.
pub fn grid_search(template: &SetupConfig, detector: &DetectorModel, grid: &GridSpec) -> Result<Optimum> {
    let mut sweep = rate_sweep(template, detector, grid)?;
    let mut best = argmax(&sweep).expect("grid is nonempty");
    if best.rate_bps <= 0.0 {
        return Err(Error::NoSecureOperatingPoint);
    }
    if grid.refine {
        let fine = GridSpec {
            r_a_values: refinement(&grid.r_a_values, best.r_a),
            r_b_values: refinement(&grid.r_b_values, best.r_b),
            refine: false,
        };
        let rows = evaluate(template, detector, &fine.points())?;
        if let Some(row) = argmax(&rows) {
            if row.rate_bps > best.rate_bps {
                best = row;
            }
        }
        sweep.extend(rows);
    }
    let baseline_rate = point_rate(template, detector, 0.5, 0.5)?;
    let improvement_percent = (baseline_rate > 0.0).then(|| 100.0 * (best.rate_bps / baseline_rate - 1.0));
    Ok(Optimum {
        r_a_star: best.r_a,
        r_b_star: best.r_b,
        rate_star: best.rate_bps,
        baseline_rate,
        improvement_percent,
        sweep,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeatmapRow {
    pub budget: f64,
    /// Rates divided by the row maximum.
    pub normalized: Vec<f64>,
    pub max_rate_bps: f64,
    /// Set when every rate in the row is zero.
    pub all_zero: bool,
}

impl HeatmapRow {
    /// Index of the row maximum, ties to the larger ratio.
    pub fn argmax(&self) -> Option<usize> {
        if self.all_zero {
            return None;
        }
        self.normalized
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Heatmap {
    pub ratios: Vec<f64>,
    pub rows: Vec<HeatmapRow>,
}

/// Key rate with `r_a = r_b = r` for each budget, normalized per budget.
pub fn normalized_heatmap(
    template: &SetupConfig,
    detector: &DetectorModel,
    budgets: &[f64],
    ratios: &[f64],
) -> Result<Heatmap> {
    if let Some(b) = budgets.iter().find(|&&b| !(b.is_finite() && b > 0.0)) {
        return Err(Error::InvalidBudget(*b));
    }
    if budgets.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid("budgets must be ascending".into()));
    }
    GridSpec::new(vec![0.5], ratios.to_vec())?;

    let points: Vec<(f64, f64)> = budgets
        .iter()
        .flat_map(|&b| ratios.iter().map(move |&r| (b, r)))
        .collect();
    let rates: Vec<f64> = points
        .par_iter()
        .map(|&(budget, r)| point_rate(&template.with_budget(budget), detector, r, r))
        .collect::<Result<_>>()?;

    let rows = budgets
        .iter()
        .zip(rates.chunks(ratios.len()))
        .map(|(&budget, row)| {
            let max = row.iter().copied().fold(0.0, f64::max);
            let all_zero = max <= 0.0;
            HeatmapRow {
                budget,
                normalized: if all_zero {
                    vec![0.0; row.len()]
                } else {
                    row.iter().map(|r| r / max).collect()
                },
                max_rate_bps: max,
                all_zero,
            }
        })
        .collect();
    Ok(Heatmap {
        ratios: ratios.to_vec(),
        rows,
    })
}
