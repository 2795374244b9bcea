//! Acceptance criteria. Each test prints one PASS/FAIL line followed by the
//! individual checks it ran. Run with `-- --nocapture` to see them.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use e91_core::montecarlo::{sample_trials, McConfig};
use e91_core::optimizer::{decades, log_spaced, ratio_grid};
use e91_core::quantum::AnalyzerAngle;
use e91_core::*;

struct Criterion {
    id: u32,
    name: &'static str,
    checks: Vec<(String, bool)>,
}

impl Criterion {
    fn new(id: u32, name: &'static str) -> Self {
        Self {
            id,
            name,
            checks: Vec::new(),
        }
    }

    fn check(&mut self, what: impl Into<String>, ok: bool) {
        self.checks.push((what.into(), ok));
    }

    fn finish(self) {
        let ok = self.checks.iter().all(|c| c.1);
        println!("criterion {} [{}] {}", self.id, if ok { "PASS" } else { "FAIL" }, self.name);
        for (what, pass) in &self.checks {
            println!("    {} {}", if *pass { "ok  " } else { "FAIL" }, what);
        }
        let failed: Vec<_> = self.checks.iter().filter(|c| !c.1).map(|c| c.0.as_str()).collect();
        assert!(failed.is_empty(), "criterion {} failed: {:?}", self.id, failed);
    }
}

fn setup(budget: f64, r_a: f64, r_b: f64, v: f64) -> SetupConfig {
    SetupConfig {
        budget,
        r_a,
        r_b,
        state: WernerState::new(v).unwrap(),
        ..SetupConfig::default()
    }
}

fn rate(budget: f64, r_a: f64, r_b: f64) -> RateReport {
    average_key_rate(&setup(budget, r_a, r_b, 0.95), &DetectorModel::default()).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn criterion_1_ideal_chsh() {
    let mut c = Criterion::new(1, "ideal CHSH at V = 0.95 is -2.6870 within 1e-4");
    let s = ideal_chsh(WernerState::new(0.95).unwrap(), &BasisConfig::default());
    c.check(format!("S = {s:.6}"), (s - -2.6870).abs() <= 1e-4);
    c.finish();
}

#[test]
fn criterion_2_baseline_rate() {
    let mut c = Criterion::new(2, "baseline rate at 50:50 splitters is 0.1331 Mbps within 0.5%");
    let r = rate(1e6, 0.5, 0.5);
    c.check(
        format!("rate = {:.6} Mbps", r.average_key_rate_mbps()),
        rel(r.average_key_rate, 0.1331e6) <= 5e-3,
    );
    c.finish();
}

#[test]
fn criterion_3_optimum_rate_and_location() {
    let mut c = Criterion::new(3, "optimum rate 0.4342 Mbps within 1% and grid optimum at r_a = 0.9, r_b in [0.95, 0.99]");
    let r = rate(1e6, 0.9, 0.97);
    c.check(
        format!("rate(0.9, 0.97) = {:.6} Mbps", r.average_key_rate_mbps()),
        rel(r.average_key_rate, 0.4342e6) <= 1e-2,
    );
    let start = Instant::now();
    let opt = grid_search(&SetupConfig::default(), &DetectorModel::default(), &GridSpec::default()).unwrap();
    let elapsed = start.elapsed();
    c.check(format!("9 x 999 grid searched in {elapsed:.2?}"), elapsed < Duration::from_secs(60));
    c.check(format!("r_a* = {}", opt.r_a_star), opt.r_a_star == 0.9);
    c.check(format!("r_b* = {}", opt.r_b_star), (0.95..=0.99).contains(&opt.r_b_star));
    c.check(
        format!("rate* = {:.6} Mbps", opt.rate_star / 1e6),
        rel(opt.rate_star, 0.4342e6) <= 1e-2,
    );
    c.finish();
}

#[test]
fn criterion_4_improvement() {
    let mut c = Criterion::new(4, "improvement over baseline is 226.22% within 2 points");
    let opt = grid_search(&SetupConfig::default(), &DetectorModel::default(), &GridSpec::default()).unwrap();
    let imp = opt.improvement_percent.unwrap();
    c.check(format!("grid optimum improvement = {imp:.3}%"), (imp - 226.22).abs() <= 2.0);
    let stated = 100.0 * (rate(1e6, 0.9, 0.97).average_key_rate / rate(1e6, 0.5, 0.5).average_key_rate - 1.0);
    c.check(format!("(0.9, 0.97) improvement = {stated:.3}%"), (stated - 226.22).abs() <= 2.0);
    let consistent = 100.0 * (opt.rate_star / opt.baseline_rate - 1.0);
    c.check("improvement consistent with reported rates", (consistent - imp).abs() <= 1e-9);
    c.finish();
}

#[test]
fn criterion_5_allocations() {
    let mut c = Criterion::new(5, "allocations 25/50/25 and 87/10/3, eta = 1e5 at the optimum");
    let a = allocation(0.5, 0.5).unwrap();
    c.check(
        format!("(0.5, 0.5) -> ({}, {}, {})", a.key_fraction, a.bell_fraction, a.discarded_fraction),
        (a.key_fraction, a.bell_fraction, a.discarded_fraction) == (0.25, 0.5, 0.25),
    );
    let a = allocation(0.9, 0.97).unwrap();
    let pct = |x: f64| (100.0 * x).round();
    c.check(
        format!(
            "(0.9, 0.97) -> ({:.4}, {:.4}, {:.4})",
            a.key_fraction, a.bell_fraction, a.discarded_fraction
        ),
        (pct(a.key_fraction), pct(a.bell_fraction), pct(a.discarded_fraction)) == (87.0, 10.0, 3.0),
    );
    let t = expected_table(&setup(1e6, 0.9, 0.97, 0.95)).unwrap();
    c.check(format!("eta = {}", t.eta()), t.eta() == 1e5);
    let sum: f64 = t.entries().iter().flatten().sum();
    c.check(format!("sum of n_kl = {sum}"), rel(sum, 1e5) <= 1e-9);
    c.finish();
}

#[test]
fn criterion_6_violation_strength() {
    let mut c = Criterion::new(6, "standard deviations of violation at the optimum lie in [24, 28]");
    let r = rate(1e6, 0.9, 0.97);
    let sd = r.components.sd_of_violation.unwrap();
    c.check(
        format!("S = {:.4} +- {:.4}, {sd:.2} SD", r.components.s_value, r.components.delta_s),
        (24.0..=28.0).contains(&sd),
    );
    c.finish();
}

#[test]
fn criterion_7_oracle_equivalence() {
    let mut c = Criterion::new(7, "propagated dS equals closed form; Monte Carlo agrees with dS and P");

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let combos = [(); 4].map(|_| Outcomes {
            pp: rng.random_range(1.0..1e6),
            pm: rng.random_range(0.0..1e6),
            mp: rng.random_range(0.0..1e6),
            mm: rng.random_range(0.0..1e6),
        });
        let t = CoincidenceTable::from_combos(combos, Outcomes::default(), 0.0).unwrap();
        let a = delta_s(&t).unwrap();
        let b = delta_s_closed_form(&t).unwrap();
        worst = worst.max(rel(a, b));
    }
    c.check(format!("1000 random tables, worst relative gap {worst:.2e}"), worst <= 1e-10);

    for budget in [2e4, 1e6] {
        let cfg = setup(budget, 0.5, 0.5, 0.95);
        let eta = expected_table(&cfg).unwrap().eta();
        let ds = delta_s(&expected_table(&cfg).unwrap()).unwrap();
        let r = run_mc(&McConfig::new(cfg, 10_000, 17)).unwrap();
        let ratio = r.s_std / ds;
        c.check(
            format!("eta = {eta:e}: s_std/dS = {ratio:.4} over 1e4 trials"),
            (0.95..=1.05).contains(&ratio),
        );
        let tol = 3.0 * ds / (r.trials as f64).sqrt();
        let s0 = ideal_chsh(WernerState::new(0.95).unwrap(), &BasisConfig::default());
        c.check(
            format!("eta = {eta:e}: s_mean = {:.6}, |s_mean - S| <= {tol:.1e}", r.s_mean),
            (r.s_mean - s0).abs() <= tol,
        );
    }

    for v in [0.95, 0.75] {
        let cfg = setup(4e3, 0.5, 0.5, v);
        let t = expected_table(&cfg).unwrap();
        let p = classical_probability(estimate_s(&t).unwrap(), delta_s(&t).unwrap()).unwrap();
        let trials = 20_000;
        let r = run_mc(&McConfig::new(cfg, trials, 99)).unwrap();
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        c.check(
            format!(
                "budget 4e3, V = {v}: empirical P = {:.5}, analytic P = {p:.5}, 3 sigma = {:.5}",
                r.empirical_p_classical,
                3.0 * sigma
            ),
            (r.empirical_p_classical - p).abs() <= 3.0 * sigma + 1e-12,
        );
    }
    c.finish();
}

#[test]
fn criterion_8_detector_model() {
    let mut c = Criterion::new(8, "dead-time and full detector response");
    let half = observed_rate(1e6, 1e6).unwrap();
    c.check(format!("observed_rate(1e6, 1e6 ps) = {half}"), half == 5e5);

    let worst = log_spaced(1e3, 1e7, 41)
        .into_iter()
        .map(|t| rel(observed_rate(1e12, t).unwrap(), 1e12 / t))
        .fold(0.0, f64::max);
    c.check(format!("n = 1e12 plateau vs 1e12/t, worst gap {worst:.2e}"), worst <= 1e-3);

    let mut exact = true;
    for n in log_spaced(1.0, 1e13, 61).into_iter().chain([0.0]) {
        for t in log_spaced(1.0, 1e12, 25) {
            let det = DetectorModel::with_dead_time(t).unwrap();
            exact &= observed_rate_full(n, &det).unwrap().to_bits() == observed_rate(n, t).unwrap().to_bits();
        }
    }
    c.check("full model at PDE = 1, DC = 0 is bit-identical to dead-time model", exact);

    let det = DetectorModel::new(22_000.0, 0.6, 250.0).unwrap();
    let floor = observed_rate_full(1e-9, &det).unwrap();
    c.check(format!("DC = 250: N(n -> 0) = {floor}"), rel(floor, 250.0) <= 1e-9);
    c.check("DC = 250: N(0) = 250", observed_rate_full(0.0, &det).unwrap() == 250.0);
    c.finish();
}

fn mc_json(threads: usize) -> (String, String) {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| {
        let mc = McConfig::new(setup(5e4, 0.7, 0.8, 0.9), 3000, 123);
        let result = serde_json::to_string(&run_mc(&mc).unwrap()).unwrap();
        let trials = serde_json::to_string(&sample_trials(&mc).unwrap()).unwrap();
        (result, trials)
    })
}

#[test]
fn criterion_9_property_suite() {
    let mut c = Criterion::new(9, "property suite");

    let mut worst = 0.0f64;
    let state_grid = [0.0, 0.3, std::f64::consts::FRAC_1_SQRT_2, 0.95, 1.0];
    for &v in &state_grid {
        for a in (-180..180).step_by(15) {
            for b in (-180..180).step_by(15) {
                let p = coincidence_probs(
                    WernerState::new(v).unwrap(),
                    AnalyzerAngle::new(a as f64 + 0.5),
                    AnalyzerAngle::new(b as f64),
                );
                worst = worst.max((p.total() - 1.0).abs());
                worst = worst.max(if p.as_array().iter().any(|&x| x < 0.0) { 1.0 } else { 0.0 });
            }
        }
    }
    c.check(format!("coincidence probabilities normalize, worst gap {worst:.1e}"), worst <= 1e-12);

    let sym = (0..=1000).all(|i| {
        let p = i as f64 / 1000.0;
        (binary_entropy(p).unwrap() - binary_entropy(1.0 - p).unwrap()).abs() <= 1e-12
    });
    c.check("h(p) = h(1 - p) on a 0.001 grid", sym);

    // detector stage is linear at t = 1 ps
    let n_key = |b: f64| rate(b, 0.5, 0.5).n_key_observed;
    let key_ratio = n_key(1e6) / n_key(5e5);
    c.check(format!("observed key rate doubles with budget: ratio {key_ratio:.7}"), (key_ratio - 2.0).abs() <= 2e-3);
    for (lo, hi) in [(2.5e5, 5e5), (5e5, 1e6)] {
        let ratio = rate(hi, 0.5, 0.5).average_key_rate / rate(lo, 0.5, 0.5).average_key_rate;
        c.check(
            format!("average key rate doubles from {lo:e} to {hi:e} within 0.1%: ratio {ratio:.5}"),
            (ratio / 2.0 - 1.0).abs() <= 1e-3,
        );
    }

    let h = normalized_heatmap(
        &SetupConfig::default(),
        &DetectorModel::default(),
        &decades(3, 9, 10),
        &ratio_grid(1, 19, 20),
    )
    .unwrap();
    let normalized = h
        .rows
        .iter()
        .all(|r| r.all_zero || r.normalized.iter().copied().fold(0.0, f64::max) == 1.0);
    c.check(format!("{} heatmap rows max-normalized to 1.0", h.rows.len()), normalized);

    let one = mc_json(1);
    let four = mc_json(4);
    c.check("fixed-seed Monte Carlo identical on 1 and 4 threads", one == four);
    c.finish();
}
