//! Sign and phase conventions relating closed-form connections to the
//! finite-difference ones, fitted once per chart and frozen.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::charts::{self, ChartKind, Component, ControlPoint, NumericOptions};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

/// Sign of the squeeze phase in the closed forms: `Derived` gives the
/// `a^dagger` coefficient `-e^{i theta} sinh 2r` of `S a S^dagger`,
/// `Nominal` the conjugate phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SqueezePhase {
    Derived,
    Nominal,
}

/// Coordinate signs `sigma_i -> s_i sigma_i`, optional transpose and squeeze
/// phase applied to the closed forms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConventionMap {
    pub chart: ChartKind,
    pub signs: Vec<f64>,
    pub transpose: bool,
    pub squeeze_phase: SqueezePhase,
}

impl ConventionMap {
    pub fn identity(chart: ChartKind) -> Self {
        Self {
            chart,
            signs: vec![1.0; chart.n_coords()],
            transpose: false,
            squeeze_phase: SqueezePhase::Derived,
        }
    }

    pub fn check_chart(&self, chart: ChartKind) -> Result<()> {
        if self.chart != chart || self.signs.len() != chart.n_coords() {
            return Err(Error::InvalidParameter(format!(
                "convention map for {} used on {chart}",
                self.chart
            )));
        }
        if self.signs.iter().any(|s| s.abs() != 1.0) {
            return Err(Error::InvalidParameter(
                "coordinate signs must be +1 or -1".into(),
            ));
        }
        Ok(())
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.chart)
    }

    /// Every candidate map, identity first.
    pub fn candidates(chart: ChartKind) -> Vec<Self> {
        let n = chart.n_coords();
        let phases: &[SqueezePhase] = if chart == ChartKind::SingleModeDS {
            &[SqueezePhase::Derived, SqueezePhase::Nominal]
        } else {
            &[SqueezePhase::Derived]
        };
        let mut out = Vec::new();
        for &squeeze_phase in phases {
            for transpose in [false, true] {
                for mask in 0..(1u32 << n) {
                    let signs = (0..n)
                        .map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 })
                        .collect();
                    out.push(Self {
                        chart,
                        signs,
                        transpose,
                        squeeze_phase,
                    });
                }
            }
        }
        out
    }
}

/// Fixed generic probe points per chart.
pub fn probe_points(chart: ChartKind) -> Vec<ControlPoint> {
    let raw: &[[f64; 4]] = match chart {
        ChartKind::SingleModeDS => &[
            [0.3, -0.2, 0.25, 0.7],
            [-0.5, 0.4, 0.1, -1.3],
            [0.1, 0.6, 0.35, 2.2],
            [0.7, -0.6, 0.2, -2.6],
            [-0.2, -0.4, 0.3, 0.4],
        ],
        ChartKind::TwoModeNM => &[
            [0.3, 0.5, 0.7, -0.4],
            [0.1, -1.2, 1.1, 2.0],
            [0.4, 2.5, 0.2, 1.0],
            [0.2, -2.0, 0.9, -2.7],
            [0.35, 1.1, 0.5, 0.3],
        ],
        ChartKind::SU2Interferometer => &[
            [0.3, 0.5, 0.7, 0.0],
            [-1.0, 1.2, -0.4, 0.0],
            [2.0, -0.6, 2.5, 0.0],
            [0.8, 2.9, -2.2, 0.0],
            [-2.4, -1.7, 1.3, 0.0],
        ],
    };
    raw.iter()
        .map(|r| {
            ControlPoint::new(chart, r[..chart.n_coords()].to_vec()).expect("probe inside chart")
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChartCalibration {
    pub map: ConventionMap,
    /// Largest elementwise mismatch under the selected map.
    pub residual: f64,
    /// Candidates fitting as well as the selected one (exact symmetries of
    /// the closed forms); the earliest, simplest one is selected.
    pub equivalent: usize,
    /// Best mismatch among the candidates that are not equivalent.
    pub runner_up_residual: f64,
    /// Mismatch with identity signs and the nominal squeeze phase.
    pub nominal_phase_residual: f64,
    pub candidates: usize,
    pub probes: Vec<Vec<f64>>,
}

/// Candidates whose mismatch differs by less than this are equivalent.
pub const EQUIVALENCE_TOL: f64 = 1e-7;

fn mismatch(
    map: &ConventionMap,
    probes: &[ControlPoint],
    numeric: &[Vec<(Component, CMatrix)>],
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (p, comps) in probes.iter().zip(numeric) {
        for (c, m) in comps {
            let a = charts::analytic_at(p.chart(), p.coords(), *c, map)?;
            worst = worst.max(linalg::max_abs_diff(&a, m));
        }
    }
    Ok(worst)
}

/// Fits the convention map of one chart at its probe points.
pub fn calibrate_chart(chart: ChartKind) -> Result<ChartCalibration> {
    let probes = probe_points(chart);
    let opts = NumericOptions::default();
    let components: Vec<Component> = chart
        .coordinates()
        .iter()
        .copied()
        .filter(|&c| chart.has_closed_form(c))
        .collect();
    let numeric = probes
        .iter()
        .map(|p| {
            components
                .iter()
                .map(|&c| Ok((c, charts::connection_numeric(p, c, &opts)?.matrix)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let cands = ConventionMap::candidates(chart);
    let scored = cands
        .iter()
        .map(|m| Ok((mismatch(m, &probes, &numeric)?, m.clone())))
        .collect::<Result<Vec<_>>>()?;
    let best = scored.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let tie = best + EQUIVALENCE_TOL;
    let selected = scored
        .iter()
        .find(|s| s.0 <= tie)
        .expect("at least one candidate");
    let nominal = ConventionMap {
        squeeze_phase: SqueezePhase::Nominal,
        ..ConventionMap::identity(chart)
    };
    Ok(ChartCalibration {
        map: selected.1.clone(),
        residual: selected.0,
        equivalent: scored.iter().filter(|s| s.0 <= tie).count(),
        runner_up_residual: scored
            .iter()
            .map(|s| s.0)
            .filter(|&r| r > tie)
            .fold(f64::INFINITY, f64::min),
        nominal_phase_residual: mismatch(&nominal, &probes, &numeric)?,
        candidates: cands.len(),
        probes: probes.iter().map(|p| p.coords().to_vec()).collect(),
    })
}

static FROZEN: OnceLock<std::result::Result<Vec<ChartCalibration>, Error>> = OnceLock::new();

/// Calibrations of all charts, computed on first use and then fixed for
/// the lifetime of the process.
pub fn frozen_calibrations() -> Result<&'static [ChartCalibration]> {
    FROZEN
        .get_or_init(|| ChartKind::ALL.iter().map(|&c| calibrate_chart(c)).collect())
        .as_ref()
        .map(|v| v.as_slice())
        .map_err(Clone::clone)
}

pub fn frozen_map(chart: ChartKind) -> Result<ConventionMap> {
    Ok(frozen_calibrations()?
        .iter()
        .find(|c| c.map.chart == chart)
        .expect("every chart is calibrated")
        .map
        .clone())
}

/// Analytic source under the frozen convention map.
pub fn calibrated_source(chart: ChartKind) -> Result<charts::AnalyticSource> {
    charts::AnalyticSource::new(chart, frozen_map(chart)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn candidate_counts() {
        assert_eq!(ConventionMap::candidates(ChartKind::SingleModeDS).len(), 64);
        assert_eq!(ConventionMap::candidates(ChartKind::TwoModeNM).len(), 32);
        assert_eq!(
            ConventionMap::candidates(ChartKind::SU2Interferometer).len(),
            16
        );
        assert!(ConventionMap::candidates(ChartKind::TwoModeNM)[0].is_identity());
    }

    #[test]
    fn calibration_selects_unique_map() {
        for chart in ChartKind::ALL {
            let cal = calibrate_chart(chart).unwrap();
            assert!(cal.residual < 1e-6, "{chart}: {}", cal.residual);
            assert!(
                cal.runner_up_residual > 1e-2,
                "{chart}: {}",
                cal.runner_up_residual
            );
            assert!(cal.map.is_identity(), "{chart}: {:?}", cal.map);
        }
    }
}
