//! Subcommand bodies. Everything is computed before the first file is written.

use std::fs;
use std::path::Path;

use e91_core::detection::{dead_time_curves, response_curves, ResponsePoint};
use e91_core::export::{
    write_heatmap_csv, write_response_csv, write_surface_csv, write_sweep_csv, write_trials_csv,
};
use e91_core::montecarlo::{sample_moments, sample_trials, summarize, MIN_GAUSSIANITY_TRIALS};
use e91_core::optimizer::{decades, log_spaced, ratio_grid};
use e91_core::svg::{self, LinePlot, Series};
use e91_core::{
    average_key_rate_with_mode, grid_search, normalized_heatmap, rate_sweep, uncertainty_surface,
    BellEstimate, DetectorModel, SweepRow,
};
use serde::Serialize;
use serde_json::json;

use crate::config::{Resolved, RunConfig};
use crate::CliError;

/// Dead time of the detectors in the PDE / dark-count comparison, 22 ns.
const RESPONSE_DEAD_TIME_PS: f64 = 22_000.0;
const RESPONSE_PDE: [f64; 3] = [1.0, 0.7, 0.4];
const RESPONSE_DARK_COUNTS: [f64; 3] = [0.0, 1e3, 1e5];

/// Output files collected in memory and written in one go.
struct Outputs<'a> {
    dir: &'a Path,
    files: Vec<(&'static str, Vec<u8>)>,
}

impl<'a> Outputs<'a> {
    fn new(cfg: &'a RunConfig) -> Self {
        Self { dir: &cfg.out, files: Vec::new() }
    }

    fn add(&mut self, name: &'static str, bytes: Vec<u8>) {
        self.files.push((name, bytes));
    }

    fn csv(&mut self, name: &'static str, write: impl FnOnce(&mut Vec<u8>) -> e91_core::Result<()>) -> Result<(), CliError> {
        let mut buf = Vec::new();
        write(&mut buf)?;
        self.add(name, buf);
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &'static str, value: &T) {
        self.add(name, to_json(value).into_bytes());
    }

    fn write(self) -> Result<(), CliError> {
        let io = |path: &Path, e: std::io::Error| CliError::Io(format!("cannot write {}: {e}", path.display()));
        fs::create_dir_all(self.dir).map_err(|e| io(self.dir, e))?;
        for (name, bytes) in self.files {
            let path = self.dir.join(name);
            fs::write(&path, bytes).map_err(|e| io(&path, e))?;
        }
        Ok(())
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

fn sweep_plot(rows: &[SweepRow]) -> String {
    let mut series: Vec<Series> = Vec::new();
    for row in rows {
        let label = format!("r_a = {}", row.r_a);
        match series.last_mut() {
            Some(s) if s.label == label => s.points.push((row.r_b, row.rate_bps / 1e6)),
            _ => series.push(Series { label, points: vec![(row.r_b, row.rate_bps / 1e6)] }),
        }
    }
    LinePlot {
        title: "Average key rate".into(),
        x_label: "r_b".into(),
        y_label: "rate [Mbps]".into(),
        series,
        ..LinePlot::default()
    }
    .render()
}

fn response_plot(title: &str, x_label: &str, points: &[ResponsePoint], x: fn(&ResponsePoint) -> f64, label: fn(&ResponsePoint) -> String) -> String {
    let mut series: Vec<Series> = Vec::new();
    for p in points {
        let l = label(p);
        match series.last_mut() {
            Some(s) if s.label == l => s.points.push((x(p), p.observed)),
            _ => series.push(Series { label: l, points: vec![(x(p), p.observed)] }),
        }
    }
    LinePlot {
        title: title.into(),
        x_label: x_label.into(),
        y_label: "N [1/s]".into(),
        log_x: true,
        log_y: true,
        series,
    }
    .render()
}

pub fn rate(r: &Resolved) -> Result<(), CliError> {
    let report = average_key_rate_with_mode(&r.setup, &r.detector, r.mc.mode)?;
    print!("{}", to_json(&report));
    Ok(())
}

pub fn sweep(cfg: &RunConfig, r: &Resolved) -> Result<(), CliError> {
    let rows = rate_sweep(&r.setup, &r.detector, &r.grid)?;
    let mut out = Outputs::new(cfg);
    out.csv("sweep.csv", |w| write_sweep_csv(w, &rows))?;
    if cfg.svg {
        out.add("sweep.svg", sweep_plot(&rows).into_bytes());
    }
    out.write()
}

pub fn optimize(cfg: &RunConfig, r: &Resolved) -> Result<(), CliError> {
    let opt = grid_search(&r.setup, &r.detector, &r.grid)?;
    let mut out = Outputs::new(cfg);
    out.json("optimum.json", &opt);
    out.csv("sweep.csv", |w| write_sweep_csv(w, &opt.sweep))?;
    if cfg.svg {
        // the refinement rows would interleave with the coarse curves
        let coarse = r.grid.r_a_values.len() * r.grid.r_b_values.len();
        out.add("sweep.svg", sweep_plot(&opt.sweep[..coarse]).into_bytes());
    }
    out.write()?;
    print!("{}", to_json(&opt));
    Ok(())
}

pub fn heatmap(cfg: &RunConfig, r: &Resolved) -> Result<(), CliError> {
    let budgets = decades(3, 9, 10);
    let ratios = ratio_grid(1, 19, 20);
    let map = normalized_heatmap(&r.setup, &r.detector, &budgets, &ratios)?;
    let mut out = Outputs::new(cfg);
    out.csv("heatmap.csv", |w| write_heatmap_csv(w, &map))?;
    if cfg.svg {
        let values: Vec<Vec<f64>> = map.rows.iter().map(|row| row.normalized.clone()).collect();
        let plot = svg::heatmap("Normalized key rate", "r_a = r_b", "budget [1/s]", &ratios, &budgets, &values, true);
        out.add("heatmap.svg", plot.into_bytes());
    }
    out.write()
}

pub fn uncertainty(cfg: &RunConfig, r: &Resolved) -> Result<(), CliError> {
    let budgets = decades(3, 9, 10);
    let r_b_values = ratio_grid(0, 100, 100);
    let points = uncertainty_surface(&budgets, &r_b_values, &r.setup)?;
    let mut out = Outputs::new(cfg);
    out.csv("uncertainty.csv", |w| write_surface_csv(w, &points))?;
    if cfg.svg {
        let etas: Vec<f64> = points.chunks(r_b_values.len()).map(|row| row[0].eta).collect();
        let values: Vec<Vec<f64>> = points
            .chunks(r_b_values.len())
            .map(|row| row.iter().map(|p| p.delta_s.map_or(f64::NAN, f64::log10)).collect())
            .collect();
        let plot = svg::heatmap("log10 of CHSH uncertainty", "r_b", "eta [1/s]", &r_b_values, &etas, &values, true);
        out.add("uncertainty.svg", plot.into_bytes());
    }
    out.write()
}

pub fn detector(cfg: &RunConfig, r: &Resolved) -> Result<(), CliError> {
    let incident = decades(6, 12, 1);
    let dead_times = log_spaced(1e3, 1e7, 81);
    let dead = dead_time_curves(&incident, &dead_times)?;

    let mut detectors = Vec::new();
    for pde in RESPONSE_PDE {
        for dc in RESPONSE_DARK_COUNTS {
            detectors.push(DetectorModel::new(RESPONSE_DEAD_TIME_PS, pde, dc)?);
        }
    }
    if !detectors.contains(&r.detector) {
        detectors.push(r.detector);
    }
    let response = response_curves(&decades(0, 12, 10), &detectors)?;

    let mut out = Outputs::new(cfg);
    out.csv("dead_time.csv", |w| write_response_csv(w, &dead))?;
    out.csv("detector_response.csv", |w| write_response_csv(w, &response))?;
    if cfg.svg {
        let plot = response_plot("Observed rate vs dead time", "t [ps]", &dead, |p| p.dead_time_ps, |p| format!("n = {:e}", p.n));
        out.add("dead_time.svg", plot.into_bytes());
        let plot = response_plot("Observed rate vs incident rate", "n [1/s]", &response, |p| p.n, |p| {
            format!("t = {} ps, PDE = {}, DC = {}", p.dead_time_ps, p.pde, p.dark_counts)
        });
        out.add("detector_response.svg", plot.into_bytes());
    }
    out.write()
}

pub fn mc(cfg: &RunConfig, r: &Resolved, dump_trials: bool) -> Result<(), CliError> {
    let trials = sample_trials(&r.mc)?;
    let result = summarize(&trials)?;
    let s: Vec<f64> = trials.iter().filter_map(|t| t.s).collect();
    let gaussianity = (s.len() >= MIN_GAUSSIANITY_TRIALS).then(|| {
        let m = sample_moments(&s);
        json!({ "skewness": m.skewness, "excess_kurtosis": m.excess_kurtosis })
    });

    let table = e91_core::observed_table(&e91_core::expected_table(&r.setup)?, &r.detector, r.mc.mode);
    let analytic = BellEstimate::from_table(&table)?;
    let summary = json!({
        "mc": result,
        "seed": r.mc.seed,
        "analytic": {
            "s_value": analytic.s_value,
            "delta_s": analytic.delta_s,
            "p_classical": analytic.p_classical,
        },
        "s_std_over_delta_s": result.s_std / analytic.delta_s,
        "gaussianity": gaussianity,
    });

    let mut out = Outputs::new(cfg);
    out.json("mc.json", &result);
    if dump_trials {
        out.csv("mc_trials.csv", |w| write_trials_csv(w, &trials))?;
    }
    if cfg.svg {
        out.add("mc.svg", histogram(&s, analytic.s_value, analytic.delta_s).into_bytes());
    }
    out.write()?;
    print!("{}", to_json(&summary));
    Ok(())
}

/// Sampled S histogram against the Gaussian with the analytic mean and δS.
fn histogram(s: &[f64], mean: f64, sd: f64) -> String {
    const BINS: usize = 60;
    let (lo, hi) = (mean - 5.0 * sd, mean + 5.0 * sd);
    let width = (hi - lo) / BINS as f64;
    let mut counts = [0usize; BINS];
    for &x in s {
        let i = ((x - lo) / width).floor();
        if (0.0..BINS as f64).contains(&i) {
            counts[i as usize] += 1;
        }
    }
    let norm = s.len() as f64 * width;
    let center = |i: usize| lo + (i as f64 + 0.5) * width;
    let sampled = (0..BINS).map(|i| (center(i), counts[i] as f64 / norm)).collect();
    let gauss = (0..BINS)
        .map(|i| {
            let z = (center(i) - mean) / sd;
            (center(i), (-0.5 * z * z).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt()))
        })
        .collect();
    LinePlot {
        title: "Sampled CHSH value".into(),
        x_label: "S".into(),
        y_label: "density".into(),
        series: vec![
            Series { label: "sampled".into(), points: sampled },
            Series { label: "Gaussian, analytic".into(), points: gauss },
        ],
        ..LinePlot::default()
    }
    .render()
}
