//! Beam-splitter routing of pairs into key, Bell and discarded streams, and
//! the detector response applied to those streams.
//!
//! Alice: B1 reflects `r_a` of her photons to the H/V key analyzer; the rest
//! goes through B2 (`r_b2` to a0, the rest to a1). Bob: B3 reflects `r_b` to
//! the H/V analyzer {1', 2'}, which is both his key analyzer and Bell basis
//! b0; the transmitted port feeds b1 = {3', 4'}.
//!
//! A pair is a key bit when both photons reach H/V analyzers, a Bell bit when
//! Alice's photon reaches a0 or a1, and a discarded bit when Alice is at H/V
//! while Bob is at b1.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{coincidence_probs, BasisConfig, Combo, Outcomes, WernerState};

fn check_reflectance(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::ReflectanceOutOfRange { name, value })
    }
}

/// Fractions of the pair budget per bit type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    pub key_fraction: f64,
    pub bell_fraction: f64,
    pub discarded_fraction: f64,
}

/// Bit-type fractions for splitter reflectances `r_a` (B1) and `r_b` (B3).
pub fn allocation(r_a: f64, r_b: f64) -> Result<Allocation> {
    check_reflectance("r_a", r_a)?;
    check_reflectance("r_b", r_b)?;
    Ok(Allocation {
        key_fraction: r_a * r_b,
        bell_fraction: 1.0 - r_a,
        discarded_fraction: r_a * (1.0 - r_b),
    })
}

/// Source, splitter and basis settings of one operating point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetupConfig {
    /// Photon pairs per second entering the two detection modules.
    pub budget: f64,
    /// Reflectance of Alice's B1 (fraction to the key analyzer).
    pub r_a: f64,
    /// Reflectance of Bob's B3 (fraction to the H/V analyzer).
    pub r_b: f64,
    /// Split of Alice's Bell arm toward a0.
    pub r_b2: f64,
    pub state: WernerState,
    pub basis: BasisConfig,
}

impl Default for SetupConfig {
    fn default() -> Self {
        Self {
            budget: 1e6,
            r_a: 0.5,
            r_b: 0.5,
            r_b2: 0.5,
            state: WernerState::default(),
            basis: BasisConfig::default(),
        }
    }
}

impl SetupConfig {
    pub fn new(budget: f64, r_a: f64, r_b: f64) -> Result<Self> {
        let cfg = Self {
            budget,
            r_a,
            r_b,
            ..Self::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.budget.is_finite() && self.budget > 0.0) {
            return Err(Error::InvalidBudget(self.budget));
        }
        check_reflectance("r_a", self.r_a)?;
        check_reflectance("r_b", self.r_b)?;
        check_reflectance("r_b2", self.r_b2)?;
        Ok(())
    }

    pub fn with_reflectances(&self, r_a: f64, r_b: f64) -> Self {
        Self {
            r_a,
            r_b,
            ..self.clone()
        }
    }

    pub fn with_budget(&self, budget: f64) -> Self {
        Self {
            budget,
            ..self.clone()
        }
    }

    pub fn with_state(&self, state: WernerState) -> Self {
        Self {
            state,
            ..self.clone()
        }
    }

    pub fn allocation(&self) -> Result<Allocation> {
        allocation(self.r_a, self.r_b)
    }
}

/// Alice's Bell detectors 3, 4 (basis a0) and 5, 6 (basis a1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AliceDetector {
    D3,
    D4,
    D5,
    D6,
}

/// Bob's Bell detectors 1', 2' (basis b0) and 3', 4' (basis b1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BobDetector {
    D1,
    D2,
    D3,
    D4,
}

impl AliceDetector {
    pub const ALL: [AliceDetector; 4] = [Self::D3, Self::D4, Self::D5, Self::D6];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        ["3", "4", "5", "6"][self.index()]
    }
}

impl BobDetector {
    pub const ALL: [BobDetector; 4] = [Self::D1, Self::D2, Self::D3, Self::D4];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        ["1'", "2'", "3'", "4'"][self.index()]
    }
}

/// Coincidence rates of the 16 Bell detector pairs plus the key and
/// discarded streams.
///
/// Rows are Alice's detectors 3, 4, 5, 6 and columns Bob's 1', 2', 3', 4'.
/// Within each basis set the first detector is the "+" (axis-aligned) port.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoincidenceTable {
    n: [[f64; 4]; 4],
    key: Outcomes,
    discarded: f64,
    eta: f64,
}

impl CoincidenceTable {
    /// Builds a table from raw rates; `eta` is the sum of the 16 entries.
    pub fn from_parts(n: [[f64; 4]; 4], key: Outcomes, discarded: f64) -> Result<Self> {
        let key_rates = key.as_array();
        let all = n.iter().flatten().chain(key_rates.iter()).chain(std::iter::once(&discarded));
        for &x in all {
            if !(x.is_finite() && x >= 0.0) {
                return Err(Error::InvalidRate(x));
            }
        }
        let eta = n.iter().flatten().sum();
        Ok(Self {
            n,
            key,
            discarded,
            eta,
        })
    }

    /// Builds a table from the four per-combination outcome blocks, in
    /// [`Combo::ALL`] order.
    pub fn from_combos(combos: [Outcomes; 4], key: Outcomes, discarded: f64) -> Result<Self> {
        let mut n = [[0.0; 4]; 4];
        for (combo, block) in Combo::ALL.into_iter().zip(combos) {
            let (i, j) = (2 * combo.alice_set(), 2 * combo.bob_set());
            n[i][j] = block.pp;
            n[i][j + 1] = block.pm;
            n[i + 1][j] = block.mp;
            n[i + 1][j + 1] = block.mm;
        }
        Self::from_parts(n, key, discarded)
    }

    pub fn n_kl(&self, k: AliceDetector, l: BobDetector) -> f64 {
        self.n[k.index()][l.index()]
    }

    pub fn entries(&self) -> &[[f64; 4]; 4] {
        &self.n
    }

    pub fn combo(&self, combo: Combo) -> Outcomes {
        let (i, j) = (2 * combo.alice_set(), 2 * combo.bob_set());
        Outcomes {
            pp: self.n[i][j],
            pm: self.n[i][j + 1],
            mp: self.n[i + 1][j],
            mm: self.n[i + 1][j + 1],
        }
    }

    pub fn combo_total(&self, combo: Combo) -> f64 {
        self.combo(combo).total()
    }

    /// Total Bell pair rate.
    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn key_counts(&self) -> Outcomes {
        self.key
    }

    pub fn key_total(&self) -> f64 {
        self.key.total()
    }

    pub fn discarded_rate(&self) -> f64 {
        self.discarded
    }

    /// Every rate multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut n = self.n;
        n.iter_mut().flatten().for_each(|x| *x *= factor);
        Self {
            n,
            key: self.key.scaled(factor),
            discarded: self.discarded * factor,
            eta: self.eta * factor,
        }
    }
}

/// Expected (noise-free) rates for a configuration.
pub fn expected_table(cfg: &SetupConfig) -> Result<CoincidenceTable> {
    cfg.validate()?;
    let alloc = cfg.allocation()?;
    let eta = cfg.budget - cfg.r_a * cfg.budget;
    let alice_share = [cfg.r_b2, 1.0 - cfg.r_b2];
    let bob_share = [cfg.r_b, 1.0 - cfg.r_b];

    let mut n = [[0.0; 4]; 4];
    for combo in Combo::ALL {
        let (a, b) = cfg.basis.combo_axes(combo);
        let total = eta * alice_share[combo.alice_set()] * bob_share[combo.bob_set()];
        let block = coincidence_probs(cfg.state, a, b).scaled(total);
        let (i, j) = (2 * combo.alice_set(), 2 * combo.bob_set());
        n[i][j] = block.pp;
        n[i][j + 1] = block.pm;
        n[i + 1][j] = block.mp;
        n[i + 1][j + 1] = block.mm;
    }
    let key = coincidence_probs(cfg.state, cfg.basis.key, cfg.basis.key)
        .scaled(alloc.key_fraction * cfg.budget);
    let discarded = alloc.discarded_fraction * cfg.budget;

    Ok(CoincidenceTable {
        n,
        key,
        discarded,
        eta,
    })
}

/// Dead time, detection efficiency and dark counts of a detector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectorModel {
    dead_time_ps: f64,
    pde: f64,
    dark_counts_per_s: f64,
}

impl DetectorModel {
    pub const MIN_DEAD_TIME_PS: f64 = 1.0;
    pub const MAX_DEAD_TIME_PS: f64 = 1e12;

    pub fn new(dead_time_ps: f64, pde: f64, dark_counts_per_s: f64) -> Result<Self> {
        check_dead_time(dead_time_ps)?;
        if !(0.0..=1.0).contains(&pde) {
            return Err(Error::PdeOutOfRange(pde));
        }
        if !(dark_counts_per_s.is_finite() && dark_counts_per_s >= 0.0) {
            return Err(Error::InvalidDarkCounts(dark_counts_per_s));
        }
        Ok(Self {
            dead_time_ps,
            pde,
            dark_counts_per_s,
        })
    }

    /// Dead time only, ideal efficiency and no dark counts.
    pub fn with_dead_time(dead_time_ps: f64) -> Result<Self> {
        Self::new(dead_time_ps, 1.0, 0.0)
    }

    pub fn dead_time_ps(&self) -> f64 {
        self.dead_time_ps
    }

    pub fn pde(&self) -> f64 {
        self.pde
    }

    pub fn dark_counts_per_s(&self) -> f64 {
        self.dark_counts_per_s
    }

    fn respond(&self, n: f64) -> f64 {
        let detected = n * self.pde;
        (detected + self.dark_counts_per_s) / (detected * self.dead_time_ps / 1e12 + 1.0)
    }
}

impl Default for DetectorModel {
    fn default() -> Self {
        Self {
            dead_time_ps: 1.0,
            pde: 1.0,
            dark_counts_per_s: 0.0,
        }
    }
}

fn check_dead_time(t: f64) -> Result<()> {
    if (DetectorModel::MIN_DEAD_TIME_PS..=DetectorModel::MAX_DEAD_TIME_PS).contains(&t) {
        Ok(())
    } else {
        Err(Error::DeadTimeOutOfRange(t))
    }
}

fn check_rate(n: f64) -> Result<()> {
    if n.is_finite() && n >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidRate(n))
    }
}

/// Observed rate of a detector with dead time `t` ps receiving `n` photons/s:
/// `N = n / (n·t·1e−12 + 1)`.
pub fn observed_rate(n: f64, dead_time_ps: f64) -> Result<f64> {
    check_rate(n)?;
    check_dead_time(dead_time_ps)?;
    Ok(n / (n * dead_time_ps / 1e12 + 1.0))
}

/// Observed rate including efficiency and dark counts:
/// `N = (n·PDE + DC) / (n·PDE·t·1e−12 + 1)`.
pub fn observed_rate_full(n: f64, detector: &DetectorModel) -> Result<f64> {
    check_rate(n)?;
    Ok(detector.respond(n))
}

/// Where the detector response is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeadTimeMode {
    /// Once per detector group: the key group and each basis combination.
    #[default]
    Group,
    /// To every individual entry before re-aggregation.
    PerDetector,
}

impl FromStr for DeadTimeMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "group" => Ok(Self::Group),
            "per_detector" | "per-detector" => Ok(Self::PerDetector),
            other => Err(format!("unknown dead-time mode `{other}` (expected group or per_detector)")),
        }
    }
}

impl fmt::Display for DeadTimeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Group => "group",
            Self::PerDetector => "per_detector",
        })
    }
}

fn respond_group(block: Outcomes, detector: &DetectorModel) -> Outcomes {
    let total = block.total();
    let observed = detector.respond(total);
    if total > 0.0 {
        block.scaled(observed / total)
    } else {
        // dark counts only, spread evenly over the four detector pairs
        Outcomes::default().map(|_| observed / 4.0)
    }
}

/// Applies the detector response to every stream of `table`.
pub fn observed_table(table: &CoincidenceTable, detector: &DetectorModel, mode: DeadTimeMode) -> CoincidenceTable {
    let (blocks, key) = match mode {
        DeadTimeMode::Group => (
            Combo::ALL.map(|c| respond_group(table.combo(c), detector)),
            respond_group(table.key, detector),
        ),
        DeadTimeMode::PerDetector => (
            Combo::ALL.map(|c| table.combo(c).map(|x| detector.respond(x))),
            table.key.map(|x| detector.respond(x)),
        ),
    };
    let discarded = detector.respond(table.discarded);
    CoincidenceTable::from_combos(blocks, key, discarded)
        .expect("detector response keeps rates finite and nonnegative")
}

/// One point of a detector response curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResponsePoint {
    pub n: f64,
    pub dead_time_ps: f64,
    pub pde: f64,
    pub dark_counts: f64,
    pub observed: f64,
}

/// Observed rate for every (detector, incident rate) pair, detector-major.
pub fn response_curves(rates: &[f64], detectors: &[DetectorModel]) -> Result<Vec<ResponsePoint>> {
    let mut out = Vec::with_capacity(rates.len() * detectors.len());
    for det in detectors {
        for &n in rates {
            out.push(ResponsePoint {
                n,
                dead_time_ps: det.dead_time_ps,
                pde: det.pde,
                dark_counts: det.dark_counts_per_s,
                observed: observed_rate_full(n, det)?,
            });
        }
    }
    Ok(out)
}

/// Observed rate against dead time for several incident rates, rate-major.
pub fn dead_time_curves(rates: &[f64], dead_times_ps: &[f64]) -> Result<Vec<ResponsePoint>> {
    let mut out = Vec::with_capacity(rates.len() * dead_times_ps.len());
    for &n in rates {
        for &t in dead_times_ps {
            out.push(ResponsePoint {
                n,
                dead_time_ps: t,
                pde: 1.0,
                dark_counts: 0.0,
                observed: observed_rate(n, t)?,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    fn cfg(budget: f64, r_a: f64, r_b: f64, v: f64) -> SetupConfig {
        SetupConfig {
            budget,
            r_a,
            r_b,
            state: WernerState::new(v).unwrap(),
            ..SetupConfig::default()
        }
    }

    #[test]
    fn allocation_examples() {
        let a = allocation(0.5, 0.5).unwrap();
        assert_eq!((a.key_fraction, a.bell_fraction, a.discarded_fraction), (0.25, 0.5, 0.25));

        let a = allocation(0.9, 0.97).unwrap();
        assert_abs_diff_eq!(a.key_fraction, 0.873, epsilon = 1e-12);
        assert_abs_diff_eq!(a.bell_fraction, 0.100, epsilon = 1e-12);
        assert_abs_diff_eq!(a.discarded_fraction, 0.027, epsilon = 1e-12);

        let a = allocation(1.0, 1.0).unwrap();
        assert_eq!((a.key_fraction, a.bell_fraction, a.discarded_fraction), (1.0, 0.0, 0.0));
    }

    #[test]
    fn allocation_rejects_bad_reflectance() {
        assert!(matches!(
            allocation(1.5, 0.5),
            Err(Error::ReflectanceOutOfRange { name: "r_a", .. })
        ));
        assert!(allocation(0.5, -0.01).is_err());
        assert!(allocation(f64::NAN, 0.5).is_err());
    }

    #[test]
    fn baseline_table_combo_totals() {
        let t = expected_table(&cfg(1e6, 0.5, 0.5, 0.95)).unwrap();
        for c in Combo::ALL {
            assert_relative_eq!(t.combo_total(c), 125_000.0, max_relative = 1e-12);
        }
        assert_eq!(t.eta(), 500_000.0);
        let sum: f64 = t.entries().iter().flatten().sum();
        assert_relative_eq!(sum, t.eta(), max_relative = 1e-9);
        assert_relative_eq!(t.key_total(), 250_000.0, max_relative = 1e-12);
        assert_eq!(t.discarded_rate(), 250_000.0);
    }

    #[test]
    fn optimum_eta_is_one_tenth_of_budget() {
        let t = expected_table(&cfg(1e6, 0.9, 0.97, 0.95)).unwrap();
        assert_eq!(t.eta(), 1e5);
        let sum: f64 = t.entries().iter().flatten().sum();
        assert_relative_eq!(sum, 1e5, max_relative = 1e-9);
    }

    #[test]
    fn white_noise_blocks_are_flat() {
        let t = expected_table(&cfg(1e6, 0.5, 0.5, 0.0)).unwrap();
        for c in Combo::ALL {
            let b = t.combo(c);
            for x in b.as_array() {
                assert_relative_eq!(x, b.pp, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn detector_labels_follow_block_layout() {
        let t = expected_table(&cfg(1e6, 0.5, 0.5, 0.95)).unwrap();
        // 3 is the a0 "+" port, 1' the b0 "+" port
        assert_eq!(t.n_kl(AliceDetector::D3, BobDetector::D1), t.combo(Combo::A0B0).pp);
        assert_eq!(t.n_kl(AliceDetector::D6, BobDetector::D4), t.combo(Combo::A1B1).mm);
        assert_eq!(t.n_kl(AliceDetector::D5, BobDetector::D2), t.combo(Combo::A1B0).pm);
        assert_eq!(AliceDetector::D5.label(), "5");
        assert_eq!(BobDetector::D4.label(), "4'");
    }

    #[test]
    fn observed_rate_examples() {
        assert_eq!(observed_rate(1e6, 1e6).unwrap(), 5e5);
        assert_eq!(observed_rate(0.0, 123.0).unwrap(), 0.0);
        assert_relative_eq!(observed_rate(1e6, 1.0).unwrap(), 999_999.000_001, max_relative = 1e-15);
        assert_eq!(observed_rate(1.0, 0.5), Err(Error::DeadTimeOutOfRange(0.5)));
        assert!(observed_rate(1.0, 2e12).is_err());
        assert!(observed_rate(-1.0, 10.0).is_err());
    }

    #[test]
    fn observed_rate_full_examples() {
        let dc_only = DetectorModel::new(22_000.0, 0.5, 100.0).unwrap();
        assert_eq!(observed_rate_full(0.0, &dc_only).unwrap(), 100.0);
        let fig7 = DetectorModel::with_dead_time(22_000.0).unwrap();
        assert_relative_eq!(observed_rate_full(1e9, &fig7).unwrap(), 1e9 / 23.0, max_relative = 1e-14);
    }

    #[test]
    fn detector_model_is_validated() {
        assert!(DetectorModel::new(0.9, 1.0, 0.0).is_err());
        assert!(DetectorModel::new(1.0, 1.1, 0.0).is_err());
        assert!(DetectorModel::new(1.0, 1.0, -1.0).is_err());
        assert!(DetectorModel::new(1e12, 0.0, 0.0).is_ok());
    }

    #[test]
    fn observed_table_negligible_at_one_picosecond() {
        let t = expected_table(&cfg(1e6, 0.5, 0.5, 0.95)).unwrap();
        for mode in [DeadTimeMode::Group, DeadTimeMode::PerDetector] {
            let o = observed_table(&t, &DetectorModel::default(), mode);
            for (a, b) in o.entries().iter().flatten().zip(t.entries().iter().flatten()) {
                assert_relative_eq!(*a, *b, max_relative = 1e-5);
            }
            assert_relative_eq!(o.key_total(), t.key_total(), max_relative = 1e-5);
        }
    }

    #[test]
    fn blind_detector_sees_nothing() {
        let t = expected_table(&cfg(1e6, 0.5, 0.5, 0.95)).unwrap();
        let blind = DetectorModel::new(1.0, 0.0, 0.0).unwrap();
        for mode in [DeadTimeMode::Group, DeadTimeMode::PerDetector] {
            let o = observed_table(&t, &blind, mode);
            assert!(o.entries().iter().flatten().all(|&x| x == 0.0));
            assert_eq!(o.key_total(), 0.0);
            assert_eq!(o.discarded_rate(), 0.0);
            assert_eq!(o.eta(), 0.0);
        }
    }

    #[test]
    fn single_stream_halves_at_one_microsecond() {
        let key = Outcomes {
            pp: 0.0,
            pm: 1e6,
            mp: 0.0,
            mm: 0.0,
        };
        let t = CoincidenceTable::from_combos([Outcomes::default(); 4], key, 0.0).unwrap();
        let det = DetectorModel::with_dead_time(1e6).unwrap();
        let g = observed_table(&t, &det, DeadTimeMode::Group);
        assert_eq!(g.key_total(), 5e5);
        let p = observed_table(&t, &det, DeadTimeMode::PerDetector);
        assert_eq!(p.key_counts().pm, 5e5);
    }

    #[test]
    fn group_mode_preserves_correlations() {
        let t = expected_table(&cfg(1e8, 0.3, 0.6, 0.9)).unwrap();
        let det = DetectorModel::with_dead_time(50_000.0).unwrap();
        let o = observed_table(&t, &det, DeadTimeMode::Group);
        for c in Combo::ALL {
            let (a, b) = (t.combo(c), o.combo(c));
            assert_relative_eq!(a.signed_sum() / a.total(), b.signed_sum() / b.total(), max_relative = 1e-12);
            assert!(b.total() < a.total());
        }
    }

    #[test]
    fn mode_parses() {
        assert_eq!("group".parse::<DeadTimeMode>().unwrap(), DeadTimeMode::Group);
        assert_eq!("per_detector".parse::<DeadTimeMode>().unwrap(), DeadTimeMode::PerDetector);
        assert!("both".parse::<DeadTimeMode>().is_err());
    }

    #[test]
    fn allocation_grid_sums_to_one() {
        for i in 0..=100 {
            for j in 0..=100 {
                let a = allocation(i as f64 / 100.0, j as f64 / 100.0).unwrap();
                let sum = a.key_fraction + a.bell_fraction + a.discarded_fraction;
                assert!((sum - 1.0).abs() <= 1e-12, "({i}, {j}) sums to {sum}");
            }
        }
    }

    proptest! {
        #[test]
        fn table_sums_to_eta(budget in 1.0..1e9f64, r_a in 0.0..=1.0f64, r_b in 0.0..=1.0f64, v in 0.0..=1.0f64) {
            let c = cfg(budget, r_a, r_b, v);
            let t = expected_table(&c).unwrap();
            let sum: f64 = t.entries().iter().flatten().sum();
            let bell = c.allocation().unwrap().bell_fraction * budget;
            prop_assert!((sum - t.eta()).abs() <= 1e-9 * t.eta().max(1e-300));
            prop_assert!((t.eta() - bell).abs() <= 1e-9 * budget);
        }

        #[test]
        fn table_marginals_follow_splitters(budget in 1.0..1e9f64, r_a in 0.0..0.99f64, r_b in 0.0..=1.0f64, v in 0.0..=1.0f64) {
            let c = cfg(budget, r_a, r_b, v);
            let t = expected_table(&c).unwrap();
            let eta = t.eta();
            // Alice's a0 rows across one Bob set recover the r_b2 share of that set
            for (set, share) in [(0usize, r_b), (1, 1.0 - r_b)] {
                let a0: f64 = (0..2).flat_map(|i| (0..2).map(move |j| (i, 2 * set + j))).map(|(i, j)| t.entries()[i][j]).sum();
                prop_assert!((a0 - eta * 0.5 * share).abs() <= 1e-9 * eta.max(1.0));
            }
            // Bob's b0 columns across one Alice set recover the r_b share
            for set in 0..2usize {
                let b0: f64 = (0..2).flat_map(|i| (0..2).map(move |j| (2 * set + i, j))).map(|(i, j)| t.entries()[i][j]).sum();
                prop_assert!((b0 - eta * 0.5 * r_b).abs() <= 1e-9 * eta.max(1.0));
            }
        }

        #[test]
        fn dead_time_bounds(n in 0.0..1e15f64, t in 1.0..=1e12f64) {
            let o = observed_rate(n, t).unwrap();
            prop_assert!(o <= n);
            prop_assert!(o <= 1e12 / t * (1.0 + 1e-15));
            prop_assert!(o * t * 1e-12 < 1.0);
        }

        #[test]
        fn dead_time_monotone_in_rate(n1 in 0.0..1e13f64, n2 in 0.0..1e13f64, t in 1.0..=1e12f64) {
            let (lo, hi) = if n1 <= n2 { (n1, n2) } else { (n2, n1) };
            prop_assert!(observed_rate(lo, t).unwrap() <= observed_rate(hi, t).unwrap());
        }

        #[test]
        fn full_model_reduces_bit_exactly(n in 0.0..1e13f64, t in 1.0..=1e12f64) {
            let det = DetectorModel::with_dead_time(t).unwrap();
            prop_assert_eq!(observed_rate_full(n, &det).unwrap().to_bits(), observed_rate(n, t).unwrap().to_bits());
        }
    }

    #[test]
    fn short_dead_time_is_transparent_at_low_rate() {
        let n = 1e3;
        let o = observed_rate(n, 1.0).unwrap();
        assert_relative_eq!(o, n, max_relative = 1e-8);
    }

    #[test]
    fn dark_counts_set_the_floor() {
        let det = DetectorModel::new(22_000.0, 0.8, 500.0).unwrap();
        let o = observed_rate_full(1e-6, &det).unwrap();
        assert_relative_eq!(o, 500.0, max_relative = 1e-6);
    }

    #[test]
    fn plateau_for_bright_light() {
        for t in [1e3, 1e4, 1e5, 1e6, 1e7] {
            let o = observed_rate(1e12, t).unwrap();
            assert_relative_eq!(o, 1e12 / t, max_relative = 1e-3);
        }
    }
}
