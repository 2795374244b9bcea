//! Monte Carlo validation of the analytic CHSH statistics.
//!
//! Each trial draws `round(budget)` pairs from a multinomial over the 21
//! outcome classes (16 Bell detector pairs, 4 key outcomes, discarded) and
//! re-estimates S and the QBER from the sampled counts. Trial `i` uses its
//! own ChaCha8 stream `(seed, i)`, so results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::Serialize;

use crate::bell::estimate_s;
use crate::detection::{expected_table, observed_table, CoincidenceTable, DeadTimeMode, DetectorModel, SetupConfig};
use crate::error::{Error, Result};
use crate::quantum::Outcomes;
use crate::CLASSICAL_BOUND;

const CLASSES: usize = 21;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McConfig {
    pub trials: usize,
    pub seed: u64,
    pub cfg: SetupConfig,
    pub detector: DetectorModel,
    pub mode: DeadTimeMode,
}

impl McConfig {
    pub fn new(cfg: SetupConfig, trials: usize, seed: u64) -> Self {
        Self {
            trials,
            seed,
            cfg,
            detector: DetectorModel::default(),
            mode: DeadTimeMode::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidMonteCarlo("trials must be at least 1".into()));
        }
        self.cfg.validate()
    }

    /// Probabilities of the 21 outcome classes, from the detector-adjusted
    /// expected rates.
    pub fn class_probabilities(&self) -> Result<[f64; CLASSES]> {
        let table = observed_table(&expected_table(&self.cfg)?, &self.detector, self.mode);
        let mut rates = [0.0; CLASSES];
        for (dst, src) in rates.iter_mut().zip(table.entries().iter().flatten()) {
            *dst = *src;
        }
        rates[16..20].copy_from_slice(&table.key_counts().as_array());
        rates[20] = table.discarded_rate();
        let total: f64 = rates.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidMonteCarlo("no detected pairs to sample".into()));
        }
        Ok(rates.map(|r| r / total))
    }

    fn pairs_per_trial(&self) -> u64 {
        self.cfg.budget.round() as u64
    }
}

/// Multinomial draw by sequential conditional binomials.
fn sample_multinomial(rng: &mut ChaCha8Rng, n: u64, probs: &[f64; CLASSES]) -> [u64; CLASSES] {
    let mut counts = [0u64; CLASSES];
    let mut remaining = n;
    let mut mass = 1.0;
    for (i, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i == CLASSES - 1 {
            counts[i] = remaining;
            break;
        }
        let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
        let k = Binomial::new(remaining, q)
            .expect("conditional probability lies in [0, 1]")
            .sample(rng);
        counts[i] = k;
        remaining -= k;
        mass -= p;
    }
    counts
}

/// Outcome of one sampled trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Trial {
    /// `None` when a Bell combination received no counts.
    pub s: Option<f64>,
    pub key_same: u64,
    pub key_total: u64,
}

fn run_trial(mc: &McConfig, probs: &[f64; CLASSES], index: usize) -> Trial {
    let mut rng = ChaCha8Rng::seed_from_u64(mc.seed);
    rng.set_stream(index as u64);
    let c = sample_multinomial(&mut rng, mc.pairs_per_trial(), probs);

    let mut n = [[0.0; 4]; 4];
    for (k, row) in n.iter_mut().enumerate() {
        for (l, x) in row.iter_mut().enumerate() {
            *x = c[4 * k + l] as f64;
        }
    }
    let key = Outcomes {
        pp: c[16] as f64,
        pm: c[17] as f64,
        mp: c[18] as f64,
        mm: c[19] as f64,
    };
    let table = CoincidenceTable::from_parts(n, key, c[20] as f64).expect("counts are finite");
    Trial {
        s: estimate_s(&table).ok(),
        key_same: c[16] + c[19],
        key_total: c[16..20].iter().sum(),
    }
}

/// Every trial in index order.
pub fn sample_trials(mc: &McConfig) -> Result<Vec<Trial>> {
    mc.validate()?;
    let probs = mc.class_probabilities()?;
    Ok((0..mc.trials)
        .into_par_iter()
        .map(|i| run_trial(mc, &probs, i))
        .collect())
}

/// Neumaier-compensated sum.
fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Mean, sample standard deviation, skewness and excess kurtosis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub mean: f64,
    pub std: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

pub fn sample_moments(xs: &[f64]) -> Moments {
    let n = xs.len() as f64;
    let mean = compensated_sum(xs.iter().copied()) / n;
    let central = |p: i32| compensated_sum(xs.iter().map(|x| (x - mean).powi(p))) / n;
    let m2 = central(2);
    let std = if xs.len() > 1 {
        (m2 * n / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let (skewness, excess_kurtosis) = if m2 > 0.0 {
        (central(3) / m2.powf(1.5), central(4) / (m2 * m2) - 3.0)
    } else {
        (0.0, 0.0)
    };
    Moments {
        mean,
        std,
        skewness,
        excess_kurtosis,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McResult {
    pub trials: usize,
    /// Trials dropped because a Bell combination was empty.
    pub excluded_trials: usize,
    pub s_mean: f64,
    pub s_std: f64,
    /// Fraction of trials with S in [−2, 2].
    pub empirical_p_classical: f64,
    /// Pooled same-outcome fraction of key counts; `None` without key counts.
    pub empirical_qber: Option<f64>,
}

pub fn summarize(trials: &[Trial]) -> Result<McResult> {
    let s: Vec<f64> = trials.iter().filter_map(|t| t.s).collect();
    if s.is_empty() {
        return Err(Error::InvalidMonteCarlo("every trial had an empty Bell combination".into()));
    }
    let m = sample_moments(&s);
    let classical = s.iter().filter(|x| x.abs() <= CLASSICAL_BOUND).count();
    let key_same: u64 = trials.iter().map(|t| t.key_same).sum();
    let key_total: u64 = trials.iter().map(|t| t.key_total).sum();
    Ok(McResult {
        trials: trials.len(),
        excluded_trials: trials.len() - s.len(),
        s_mean: m.mean,
        s_std: m.std,
        empirical_p_classical: classical as f64 / s.len() as f64,
        empirical_qber: (key_total > 0).then(|| key_same as f64 / key_total as f64),
    })
}

pub fn run_mc(mc: &McConfig) -> Result<McResult> {
    summarize(&sample_trials(mc)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianityReport {
    pub samples: usize,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

pub const MIN_GAUSSIANITY_TRIALS: usize = 5000;

/// Skewness and excess kurtosis of the sampled S distribution.
pub fn gaussianity_check(mc: &McConfig) -> Result<GaussianityReport> {
    if mc.trials < MIN_GAUSSIANITY_TRIALS {
        return Err(Error::InvalidMonteCarlo(format!(
            "gaussianity check needs at least {MIN_GAUSSIANITY_TRIALS} trials, got {}",
            mc.trials
        )));
    }
    let s: Vec<f64> = sample_trials(mc)?.iter().filter_map(|t| t.s).collect();
    let m = sample_moments(&s);
    Ok(GaussianityReport {
        samples: s.len(),
        skewness: m.skewness,
        excess_kurtosis: m.excess_kurtosis,
    })
}
