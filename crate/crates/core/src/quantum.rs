//! Polarization statistics of a singlet-based Werner state.
//!
//! The state is `V·|ψ⁻⟩⟨ψ⁻| + (1 − V)·I/4`. Every analyzer is a polarizing
//! beam splitter: the "+" outcome is the port aligned with the analyzer axis,
//! the "−" outcome is the orthogonal port.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Singlet fraction of the source state mixed with white noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct WernerState {
    visibility: f64,
}

impl WernerState {
    pub const DEFAULT_VISIBILITY: f64 = 0.95;

    pub fn new(visibility: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&visibility) {
            return Err(Error::VisibilityOutOfRange(visibility));
        }
        Ok(Self { visibility })
    }

    pub fn visibility(&self) -> f64 {
        self.visibility
    }
}

impl Default for WernerState {
    fn default() -> Self {
        Self {
            visibility: Self::DEFAULT_VISIBILITY,
        }
    }
}

impl TryFrom<f64> for WernerState {
    type Error = Error;

    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<WernerState> for f64 {
    fn from(s: WernerState) -> f64 {
        s.visibility
    }
}

/// Analyzer axis in degrees, normalized to (−90, 90].
///
/// The axis and axis + 90° are the two output ports of the same analyzer, so
/// angles are only meaningful modulo 180°.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(from = "f64", into = "f64")]
pub struct AnalyzerAngle(f64);

impl AnalyzerAngle {
    pub fn new(degrees: f64) -> Self {
        let mut d = degrees.rem_euclid(180.0);
        if d > 90.0 {
            d -= 180.0;
        }
        // rem_euclid can land on -0.0 or on exactly -90 after the shift
        if d <= -90.0 {
            d += 180.0;
        }
        AnalyzerAngle(d + 0.0)
    }

    pub fn degrees(self) -> f64 {
        self.0
    }

    pub fn radians(self) -> f64 {
        self.0.to_radians()
    }

    /// The orthogonal ("−") port of the same analyzer.
    pub fn orthogonal(self) -> Self {
        AnalyzerAngle::new(self.0 + 90.0)
    }

    pub fn rotated(self, degrees: f64) -> Self {
        AnalyzerAngle::new(self.0 + degrees)
    }
}

impl From<f64> for AnalyzerAngle {
    fn from(d: f64) -> Self {
        AnalyzerAngle::new(d)
    }
}

impl From<AnalyzerAngle> for f64 {
    fn from(a: AnalyzerAngle) -> f64 {
        a.0
    }
}

/// Analyzer axes of the two Bell basis sets per side plus the shared key basis.
///
/// Alice: a0 = {3, 4} with axis 67.5°, a1 = {5, 6} with axis 22.5°.
/// Bob: b0 = {1', 2'} with axis 90° (V), b1 = {3', 4'} with axis 45°.
/// Bob's b0 analyzer is the same H/V analyzer that produces key bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisConfig {
    pub a0: AnalyzerAngle,
    pub a1: AnalyzerAngle,
    pub b0: AnalyzerAngle,
    pub b1: AnalyzerAngle,
    pub key: AnalyzerAngle,
}

impl Default for BasisConfig {
    fn default() -> Self {
        Self {
            a0: AnalyzerAngle::new(67.5),
            a1: AnalyzerAngle::new(22.5),
            b0: AnalyzerAngle::new(90.0),
            b1: AnalyzerAngle::new(45.0),
            key: AnalyzerAngle::new(90.0),
        }
    }
}

impl BasisConfig {
    pub fn alice(&self, set: usize) -> AnalyzerAngle {
        match set {
            0 => self.a0,
            1 => self.a1,
            _ => panic!("Alice has two Bell basis sets, got index {set}"),
        }
    }

    pub fn bob(&self, set: usize) -> AnalyzerAngle {
        match set {
            0 => self.b0,
            1 => self.b1,
            _ => panic!("Bob has two Bell basis sets, got index {set}"),
        }
    }

    pub fn combo_axes(&self, combo: Combo) -> (AnalyzerAngle, AnalyzerAngle) {
        (self.alice(combo.alice_set()), self.bob(combo.bob_set()))
    }
}

/// One of the four Bell basis combinations entering the CHSH sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Combo {
    A0B0,
    A0B1,
    A1B0,
    A1B1,
}

impl Combo {
    pub const ALL: [Combo; 4] = [Combo::A0B0, Combo::A0B1, Combo::A1B0, Combo::A1B1];

    pub fn alice_set(self) -> usize {
        match self {
            Combo::A0B0 | Combo::A0B1 => 0,
            Combo::A1B0 | Combo::A1B1 => 1,
        }
    }

    pub fn bob_set(self) -> usize {
        match self {
            Combo::A0B0 | Combo::A1B0 => 0,
            Combo::A0B1 | Combo::A1B1 => 1,
        }
    }

    /// Coefficient of this combination's correlation in S.
    pub fn sign(self) -> f64 {
        match self {
            Combo::A1B0 => -1.0,
            _ => 1.0,
        }
    }

    pub fn index(self) -> usize {
        2 * self.alice_set() + self.bob_set()
    }
}

impl fmt::Display for Combo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Combo::A0B0 => "(a0,b0)",
            Combo::A0B1 => "(a0,b1)",
            Combo::A1B0 => "(a1,b0)",
            Combo::A1B1 => "(a1,b1)",
        };
        f.write_str(s)
    }
}

/// Four joint-outcome values `(s_A, s_B)` for one analyzer pair.
///
/// Holds probabilities or rates depending on context.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Outcomes {
    pub pp: f64,
    pub pm: f64,
    pub mp: f64,
    pub mm: f64,
}

impl Outcomes {
    pub fn total(&self) -> f64 {
        self.pp + self.pm + self.mp + self.mm
    }

    pub fn same(&self) -> f64 {
        self.pp + self.mm
    }

    pub fn different(&self) -> f64 {
        self.pm + self.mp
    }

    /// `pp + mm − pm − mp`, the unnormalized correlation.
    pub fn signed_sum(&self) -> f64 {
        self.same() - self.different()
    }

    pub fn scaled(&self, factor: f64) -> Outcomes {
        self.map(|x| x * factor)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Outcomes {
        Outcomes {
            pp: f(self.pp),
            pm: f(self.pm),
            mp: f(self.mp),
            mm: f(self.mm),
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.pp, self.pm, self.mp, self.mm]
    }
}

/// Joint outcome probabilities `P(s_A, s_B) = ¼(1 − s_A·s_B·V·cos 2(α − β))`.
pub fn coincidence_probs(state: WernerState, alpha: AnalyzerAngle, beta: AnalyzerAngle) -> Outcomes {
    let c = state.visibility * (2.0 * (alpha.radians() - beta.radians())).cos();
    let same = 0.25 * (1.0 - c);
    let different = 0.25 * (1.0 + c);
    Outcomes {
        pp: same,
        pm: different,
        mp: different,
        mm: same,
    }
}

/// Correlation coefficient `E = −V·cos 2(α − β)`.
pub fn correlation(state: WernerState, alpha: AnalyzerAngle, beta: AnalyzerAngle) -> f64 {
    -state.visibility * (2.0 * (alpha.radians() - beta.radians())).cos()
}

/// `S = E(a0,b0) + E(a0,b1) − E(a1,b0) + E(a1,b1)` on the basis axes.
pub fn ideal_chsh(state: WernerState, basis: &BasisConfig) -> f64 {
    Combo::ALL
        .iter()
        .map(|&c| {
            let (a, b) = basis.combo_axes(c);
            c.sign() * correlation(state, a, b)
        })
        .sum()
}

/// Quantum bit error rate at matched H/V analyzers: `(1 − V)/2`.
pub fn qber(state: WernerState) -> f64 {
    (1.0 - state.visibility) / 2.0
}
