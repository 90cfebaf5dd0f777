use std::f64::consts::FRAC_PI_4;
use std::path::{Path, PathBuf};

use holonomic_optics::charts::ChartKind;
use holonomic_optics::kick::{self, KickConvention};
use holonomic_optics::verify::Tolerances;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    CheckConnection,
    CheckFieldStrength,
    Holonomy,
    Stokes,
    BerryPhase,
    KickConvergence,
    SwapDemo,
    CalibrateConventions,
}

impl Suite {
    pub fn name(&self) -> &'static str {
        match self {
            Suite::CheckConnection => "check-connection",
            Suite::CheckFieldStrength => "check-field-strength",
            Suite::Holonomy => "holonomy",
            Suite::Stokes => "stokes",
            Suite::BerryPhase => "berry-phase",
            Suite::KickConvergence => "kick-convergence",
            Suite::SwapDemo => "swap-demo",
            Suite::CalibrateConventions => "calibrate-conventions",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KickParams {
    pub total_time: f64,
    pub coupling: f64,
    pub radius: f64,
    pub m_values: Vec<usize>,
    pub reference_m: usize,
    /// Calibrated against the target table when absent.
    pub convention: Option<KickConvention>,
    pub start_at_origin: bool,
}

impl Default for KickParams {
    fn default() -> Self {
        Self {
            total_time: kick::TARGET_TOTAL_TIME,
            coupling: kick::TARGET_COUPLING,
            radius: kick::TARGET_RADIUS,
            m_values: kick::TARGET_M_VALUES.to_vec(),
            reference_m: kick::TARGET_REFERENCE_M,
            convention: None,
            start_at_origin: true,
        }
    }
}

impl KickParams {
    /// Whether the table can be compared entry by entry with the target one.
    pub fn is_standard_layout(&self) -> bool {
        self.total_time == kick::TARGET_TOTAL_TIME
            && self.coupling == kick::TARGET_COUPLING
            && self.radius == kick::TARGET_RADIUS
            && self.m_values == kick::TARGET_M_VALUES
            && self.reference_m == kick::TARGET_REFERENCE_M
            && self.start_at_origin
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StokesParams {
    pub angles: Vec<f64>,
}

impl Default for StokesParams {
    fn default() -> Self {
        Self {
            angles: vec![0.2, FRAC_PI_4, 1.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SwapParams {
    pub beams: [usize; 4],
}

impl Default for SwapParams {
    fn default() -> Self {
        Self {
            beams: [0, 1, 2, 3],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub suite: Option<Suite>,
    /// Restricts `check-connection` to one chart.
    pub chart: Option<String>,
    pub seed: u64,
    /// Starting truncation for numeric connections; the kick cutoff otherwise.
    pub cutoff: Option<usize>,
    pub points: usize,
    pub tolerances: Tolerances,
    pub kick: KickParams,
    pub stokes: StokesParams,
    pub swap: SwapParams,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            suite: None,
            chart: None,
            seed: 0,
            cutoff: None,
            points: 20,
            tolerances: Tolerances::default(),
            kick: KickParams::default(),
            stokes: StokesParams::default(),
            swap: SwapParams::default(),
            out: None,
            format: Format::Csv,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn charts(&self) -> Result<Vec<ChartKind>, CliError> {
        match &self.chart {
            None => Ok(ChartKind::ALL.to_vec()),
            Some(name) => ChartKind::from_name(name).map(|c| vec![c]).ok_or_else(|| {
                let known: Vec<&str> = ChartKind::ALL.iter().map(|c| c.name()).collect();
                CliError::Config(format!("unknown chart {name:?}, expected one of {known:?}"))
            }),
        }
    }

    pub fn validate(&self) -> Result<Suite, CliError> {
        let suite = self
            .suite
            .ok_or_else(|| CliError::Config("no suite given".into()))?;
        if self.points == 0 {
            return Err(CliError::Config("points must be positive".into()));
        }
        if let Some(c) = self.cutoff {
            if c < 2 {
                return Err(CliError::Config(format!("cutoff {c} is below 2")));
            }
        }
        self.charts()?;
        Ok(suite)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_standard_kick_layout() {
        let cfg = ExperimentConfig::from_json(r#"{"suite": "kick-convergence"}"#).unwrap();
        assert_eq!(cfg.seed, 0);
        assert!(cfg.kick.is_standard_layout());
        assert_eq!(cfg.validate().unwrap(), Suite::KickConvergence);
        let moved = ExperimentConfig::from_json(
            r#"{"suite": "kick-convergence", "kick": {"radius": 0.5, "convention": "m_kicks"}}"#,
        )
        .unwrap();
        assert!(!moved.kick.is_standard_layout());
        assert_eq!(moved.kick.convention, Some(KickConvention::MKicks));
    }

    #[test]
    fn nested_unknown_fields_are_rejected() {
        assert!(ExperimentConfig::from_json(r#"{"kick": {"radious": 1}}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"tolerances": {"route": 1e-3, "x": 0}}"#).is_err());
    }

    #[test]
    fn tolerances_override_partially() {
        let cfg = ExperimentConfig::from_json(r#"{"tolerances": {"route": 1e-3}}"#).unwrap();
        assert_eq!(cfg.tolerances.route, 1e-3);
        assert_eq!(cfg.tolerances.swap, Tolerances::default().swap);
    }
}
