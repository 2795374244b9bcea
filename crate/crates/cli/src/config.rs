//! Run configuration: defaults, then an optional JSON file, then flags.

use std::path::{Path, PathBuf};

use e91_core::{DeadTimeMode, DetectorModel, GridSpec, McConfig, SetupConfig, WernerState};
use serde::Deserialize;

use crate::CliError;

/// Flat run configuration. File keys match the flag names (`r_a`, `r-a` and
/// `ra` are all accepted for `--r-a`).
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub budget: f64,
    pub visibility: f64,
    #[serde(alias = "r-a", alias = "ra")]
    pub r_a: f64,
    #[serde(alias = "r-b", alias = "rb")]
    pub r_b: f64,
    #[serde(alias = "r-b2", alias = "rb2")]
    pub r_b2: f64,
    #[serde(alias = "dead-time-ps", alias = "deadtimeps")]
    pub dead_time_ps: f64,
    pub pde: f64,
    #[serde(alias = "dark-counts", alias = "darkcounts")]
    pub dark_counts: f64,
    pub mode: DeadTimeMode,
    #[serde(alias = "r-a-values", alias = "ravalues")]
    pub r_a_values: Option<Vec<f64>>,
    #[serde(alias = "r-b-values", alias = "rbvalues")]
    pub r_b_values: Option<Vec<f64>>,
    pub refine: bool,
    pub trials: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub svg: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let setup = SetupConfig::default();
        let det = DetectorModel::default();
        Self {
            budget: setup.budget,
            visibility: setup.state.visibility(),
            r_a: setup.r_a,
            r_b: setup.r_b,
            r_b2: setup.r_b2,
            dead_time_ps: det.dead_time_ps(),
            pde: det.pde(),
            dark_counts: det.dark_counts_per_s(),
            mode: DeadTimeMode::default(),
            r_a_values: None,
            r_b_values: None,
            refine: false,
            trials: 10_000,
            seed: 2024,
            out: PathBuf::from("."),
            svg: false,
        }
    }
}

/// Validated model objects built from a [`RunConfig`].
#[derive(Debug, Clone)]
pub struct Resolved {
    pub setup: SetupConfig,
    pub detector: DetectorModel,
    pub grid: GridSpec,
    pub mc: McConfig,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Validation(format!("invalid config {}: {e}", path.display())))
    }

    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let setup = SetupConfig {
            budget: self.budget,
            r_a: self.r_a,
            r_b: self.r_b,
            r_b2: self.r_b2,
            state: WernerState::new(self.visibility)?,
            ..SetupConfig::default()
        };
        setup.validate()?;
        let detector = DetectorModel::new(self.dead_time_ps, self.pde, self.dark_counts)?;

        let default_grid = GridSpec::default();
        let grid = GridSpec {
            r_a_values: self.r_a_values.clone().unwrap_or(default_grid.r_a_values),
            r_b_values: self.r_b_values.clone().unwrap_or(default_grid.r_b_values),
            refine: self.refine,
        };
        grid.validate()?;

        if self.trials == 0 {
            return Err(CliError::Validation("trials must be at least 1".into()));
        }
        let mc = McConfig {
            detector,
            mode: self.mode,
            ..McConfig::new(setup.clone(), self.trials, self.seed)
        };
        Ok(Resolved { setup, detector, grid, mc })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_gives_defaults() {
        let cfg: RunConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(cfg, RunConfig::default());
        let r = cfg.resolve().unwrap();
        assert_eq!(r.setup, SetupConfig::default());
        assert_eq!(r.grid, GridSpec::default());
    }

    #[test]
    fn flag_style_keys() {
        let cfg: RunConfig = serde_json::from_str(r#"{"r-a": 0.9, "rb": 0.97, "dead_time_ps": 22000}"#).unwrap();
        assert_eq!((cfg.r_a, cfg.r_b, cfg.dead_time_ps), (0.9, 0.97, 22000.0));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"r_c": 0.5}"#).is_err());
    }

    #[test]
    fn invariants_revalidated() {
        for json in [
            r#"{"r_a": 1.5}"#,
            r#"{"visibility": -0.1}"#,
            r#"{"budget": 0}"#,
            r#"{"pde": 2}"#,
            r#"{"dead_time_ps": 0.5}"#,
            r#"{"trials": 0}"#,
            r#"{"r_b_values": [0.5, 0.4]}"#,
        ] {
            let cfg: RunConfig = serde_json::from_str(json).unwrap();
            assert!(matches!(cfg.resolve(), Err(CliError::Validation(_))), "{json}");
        }
    }
}
