//! CSV tables behind each figure. Every file has a header row and uses `.`
//! as the decimal separator; missing values are written as `NaN`.

use std::io::Write;

use crate::bell::SurfacePoint;
use crate::detection::ResponsePoint;
use crate::error::Result;
use crate::montecarlo::Trial;
use crate::optimizer::{Heatmap, SweepRow};

pub const SWEEP_HEADER: [&str; 3] = ["r_a", "r_b", "rate_bps"];
pub const HEATMAP_HEADER: [&str; 3] = ["budget", "r", "normalized_rate"];
pub const SURFACE_HEADER: [&str; 4] = ["eta", "r_b", "delta_s", "p_classical"];
pub const RESPONSE_HEADER: [&str; 5] = ["n", "dead_time_ps", "pde", "dark_counts", "observed"];
pub const TRIALS_HEADER: [&str; 4] = ["trial", "s_value", "key_same", "key_total"];

/// Shortest round-trip decimal, switching to scientific notation for very
/// large or small magnitudes.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else if x == 0.0 || (1e-4..1e15).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn opt(x: Option<f64>) -> String {
    format_float(x.unwrap_or(f64::NAN))
}

fn writer<W: Write>(w: W, header: &[&str]) -> Result<csv::Writer<W>> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header)?;
    Ok(out)
}

pub fn write_sweep_csv<W: Write>(w: W, rows: &[SweepRow]) -> Result<()> {
    let mut out = writer(w, &SWEEP_HEADER)?;
    for r in rows {
        out.write_record([format_float(r.r_a), format_float(r.r_b), format_float(r.rate_bps)])?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_heatmap_csv<W: Write>(w: W, heatmap: &Heatmap) -> Result<()> {
    let mut out = writer(w, &HEATMAP_HEADER)?;
    for row in &heatmap.rows {
        for (r, v) in heatmap.ratios.iter().zip(&row.normalized) {
            out.write_record([format_float(row.budget), format_float(*r), format_float(*v)])?;
        }
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Starved grid points carry `NaN` in both value columns.
pub fn write_surface_csv<W: Write>(w: W, points: &[SurfacePoint]) -> Result<()> {
    let mut out = writer(w, &SURFACE_HEADER)?;
    for p in points {
        out.write_record([format_float(p.eta), format_float(p.r_b), opt(p.delta_s), opt(p.p_classical)])?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_response_csv<W: Write>(w: W, points: &[ResponsePoint]) -> Result<()> {
    let mut out = writer(w, &RESPONSE_HEADER)?;
    for p in points {
        out.write_record([
            format_float(p.n),
            format_float(p.dead_time_ps),
            format_float(p.pde),
            format_float(p.dark_counts),
            format_float(p.observed),
        ])?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_trials_csv<W: Write>(w: W, trials: &[Trial]) -> Result<()> {
    let mut out = writer(w, &TRIALS_HEADER)?;
    for (i, t) in trials.iter().enumerate() {
        out.write_record([i.to_string(), opt(t.s), t.key_same.to_string(), t.key_total.to_string()])?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}
