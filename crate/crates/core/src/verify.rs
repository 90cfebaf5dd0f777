//! Verification suites shared by the command-line runner and the acceptance
//! tests. Each report lists named checks of the form `value <= tolerance`.

use std::f64::consts::{FRAC_PI_4, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::charts::{
    self, connection_numeric, sample_points, ChartKind, Component, ConnectionSource, NumericOptions,
};
use crate::conventions;
use crate::error::Result;
use crate::fock::FockSpace;
use crate::gates;
use crate::holonomy::{
    berry_phase_displace, path_ordered_converged, path_ordered_holonomy, plane_indices, LoopPath,
    DEFAULT_STEPS,
};
use crate::kick::{self, KickSetup};
use crate::linalg::{self, max_abs_diff};
use crate::stokes::{self, StokesOptions, Su2Rect};
use crate::surface::{holonomy_from_sigma, surface_sigma, PlanarRegion, SigmaKind};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `value <= tolerance`; NaN fails.
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            pass: value <= tolerance,
        }
    }

    /// Passes when `value > threshold`.
    pub fn above(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance: threshold,
            pass: value > threshold,
        }
    }

    pub fn within(name: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        let d = if value < lo {
            lo - value
        } else if value > hi {
            value - hi
        } else {
            0.0
        };
        Self {
            name: name.into(),
            value,
            tolerance: hi,
            pass: d == 0.0 && value.is_finite(),
        }
    }
}

pub fn all_pass(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.pass)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub connection: f64,
    pub commutator: f64,
    pub route: f64,
    pub swap: f64,
    pub unitarity: f64,
    pub cutoff_doubling: f64,
    pub step_halving: f64,
    /// Relative error allowed on each target kick-table entry.
    pub kick_relative: f64,
    pub phase_ratio: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            connection: 1e-5,
            commutator: 1e-8,
            route: 1e-5,
            swap: 1e-8,
            unitarity: 1e-9,
            cutoff_doubling: 1e-8,
            step_halving: 1e-6,
            kick_relative: 0.25,
            phase_ratio: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentDeviation {
    pub component: Component,
    pub max_deviation: f64,
    pub max_truncation_change: f64,
    pub flagged: usize,
    pub max_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcordanceReport {
    pub chart: ChartKind,
    pub points: usize,
    pub seed: u64,
    pub components: Vec<ComponentDeviation>,
}

impl ConcordanceReport {
    pub fn checks(&self, tol: &Tolerances) -> Vec<Check> {
        let mut out: Vec<Check> = self
            .components
            .iter()
            .map(|c| {
                Check::at_most(
                    format!("{} A_{} analytic vs numeric", self.chart, c.component),
                    c.max_deviation,
                    tol.connection,
                )
            })
            .collect();
        if let Some(r1) = self
            .components
            .iter()
            .find(|c| c.component == Component::R1)
        {
            out.push(Check::at_most("A_r1 vanishes", r1.max_norm, tol.connection));
        }
        out
    }
}

/// Calibrated closed forms against finite differences of `U` at seeded
/// points, over the components that have closed forms; `cutoff` overrides
/// the chart's starting truncation.
pub fn connection_concordance(
    chart: ChartKind,
    points: usize,
    seed: u64,
    cutoff: Option<usize>,
) -> Result<ConcordanceReport> {
    let source = conventions::calibrated_source(chart)?;
    let pts = sample_points(chart, points, seed);
    let opts = NumericOptions {
        cutoff,
        ..NumericOptions::default()
    };
    let with_closed_form: Vec<Component> = chart
        .coordinates()
        .iter()
        .copied()
        .filter(|&c| chart.has_closed_form(c))
        .collect();
    let components = with_closed_form
        .par_iter()
        .map(|&c| {
            let mut dev = ComponentDeviation {
                component: c,
                max_deviation: 0.0,
                max_truncation_change: 0.0,
                flagged: 0,
                max_norm: 0.0,
            };
            for p in &pts {
                let num = connection_numeric(p, c, &opts)?;
                let ana = source.component(p.coords(), c)?;
                dev.max_deviation = dev.max_deviation.max(max_abs_diff(&num.matrix, &ana));
                dev.max_truncation_change = dev
                    .max_truncation_change
                    .max(num.truncation_change.unwrap_or(0.0));
                dev.flagged += usize::from(num.truncation_flagged);
                dev.max_norm = dev.max_norm.max(linalg::max_abs(&num.matrix));
            }
            Ok(dev)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConcordanceReport {
        chart,
        points,
        seed,
        components,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldStrengthRow {
    pub kind: SigmaKind,
    pub max_deviation: f64,
    pub max_commutator: f64,
}

/// Finite-difference curvature of the calibrated connection against the
/// closed forms on each commuting plane.
pub fn field_strength_report(points: usize, seed: u64) -> Result<Vec<FieldStrengthRow>> {
    SigmaKind::ALL
        .iter()
        .map(|&kind| {
            let chart = kind.chart();
            let source = conventions::calibrated_source(chart)?;
            let (u, v) = kind.plane();
            let (i, j) = plane_indices(chart, (u, v))?;
            let mut row = FieldStrengthRow {
                kind,
                max_deviation: 0.0,
                max_commutator: 0.0,
            };
            for p in sample_points(chart, points, seed) {
                let mut c = kind.standard_base();
                c[i] = p.coords()[i];
                c[j] = p.coords()[j];
                let f = charts::field_strength(&source, &c, u, v)?.matrix;
                row.max_deviation = row
                    .max_deviation
                    .max(max_abs_diff(&f, &kind.field_strength(&c)?));
                row.max_commutator = row
                    .max_commutator
                    .max(charts::commutator_norm(&source, &c, u, v)?);
            }
            Ok(row)
        })
        .collect()
}

pub fn field_strength_checks(rows: &[FieldStrengthRow], tol: &Tolerances) -> Vec<Check> {
    rows.iter()
        .flat_map(|r| {
            [
                Check::at_most(
                    format!("F on Sigma_{} closed form", r.kind.name()),
                    r.max_deviation,
                    tol.connection,
                ),
                Check::at_most(
                    format!("[A, A] on Sigma_{}", r.kind.name()),
                    r.max_commutator,
                    tol.commutator,
                ),
            ]
        })
        .collect()
}

/// Rectangles used for the route comparison.
pub fn standard_regions() -> Vec<(SigmaKind, PlanarRegion)> {
    let r = |k, a, b| (k, PlanarRegion::for_kind(k, a, b).expect("valid rectangle"));
    vec![
        r(SigmaKind::I, (0.0, 0.0), (1.0, 0.7)),
        r(SigmaKind::II, (-0.3, 0.1), (0.6, 0.5)),
        r(SigmaKind::III, (0.0, 0.0), (0.5, 2.0 * PI)),
        r(SigmaKind::IV, (0.0, 0.0), (0.3, 1.0)),
        r(SigmaKind::V, (0.1, 0.2), (0.4, 0.9)),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RouteRow {
    pub kind: SigmaKind,
    pub sigma: f64,
    pub distance: f64,
    pub steps_per_edge: Option<usize>,
    pub unitarity_defect: f64,
}

/// Surface-integral holonomy against the path-ordered product of the
/// boundary.
pub fn route_equivalence() -> Result<Vec<RouteRow>> {
    standard_regions()
        .par_iter()
        .map(|(kind, region)| {
            let sigma = surface_sigma(region, *kind)?;
            let surf = holonomy_from_sigma(*kind, sigma);
            let source = conventions::calibrated_source(kind.chart())?;
            let path = path_ordered_converged(&region.boundary(DEFAULT_STEPS)?, &source, 1e-10)?;
            Ok(RouteRow {
                kind: *kind,
                sigma,
                distance: max_abs_diff(&surf.matrix, &path.matrix),
                steps_per_edge: path.steps_per_edge,
                unitarity_defect: path.unitarity_defect.max(surf.unitarity_defect),
            })
        })
        .collect()
}

pub fn route_checks(rows: &[RouteRow], tol: &Tolerances) -> Vec<Check> {
    rows.iter()
        .map(|r| {
            Check::at_most(
                format!("Sigma_{} surface vs path-ordered", r.kind.name()),
                r.distance,
                tol.route,
            )
        })
        .collect()
}

pub const STOKES_ANGLES: [f64; 3] = [0.2, FRAC_PI_4, 1.0];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StokesRow {
    pub rect: Su2Rect,
    pub angle: f64,
    pub stokes_vs_path: f64,
    /// Counterclockwise traversal against `exp(+2 i angle sigma^12)`.
    pub counterclockwise_vs_closed_form: f64,
    /// Reversed traversal against the nominal `exp(-2 i angle sigma^12)`.
    pub reversed_vs_closed_form: f64,
    pub unitarity_defect: f64,
}

pub fn stokes_report(angles: &[f64]) -> Result<Vec<StokesRow>> {
    let source = conventions::calibrated_source(ChartKind::SU2Interferometer)?;
    let opts = StokesOptions::default();
    let cases: Vec<(Su2Rect, f64)> = [Su2Rect::C1, Su2Rect::C2]
        .iter()
        .flat_map(|&r| angles.iter().map(move |&a| (r, a)))
        .collect();
    cases
        .par_iter()
        .map(|&(rect, angle)| {
            let region = stokes::su2_rect_region(rect, angle)?;
            let s = stokes::stokes_holonomy(&region, &source, &opts)?;
            let p = path_ordered_converged(&region.boundary(DEFAULT_STEPS)?, &source, 1e-10)?;
            let back = stokes::stokes_holonomy(&region.reversed(), &source, &opts)?;
            Ok(StokesRow {
                rect,
                angle,
                stokes_vs_path: max_abs_diff(&s.matrix, &p.matrix),
                counterclockwise_vs_closed_form: max_abs_diff(
                    &s.matrix,
                    &stokes::su2_rect_gate(rect, -angle).matrix,
                ),
                reversed_vs_closed_form: max_abs_diff(
                    &back.matrix,
                    &stokes::su2_rect_gate(rect, angle).matrix,
                ),
                unitarity_defect: s.unitarity_defect.max(back.unitarity_defect),
            })
        })
        .collect()
}

pub fn stokes_checks(rows: &[StokesRow], tol: &Tolerances) -> Vec<Check> {
    rows.iter()
        .flat_map(|r| {
            let tag = format!("{:?} at {:.4}", r.rect, r.angle);
            [
                Check::at_most(
                    format!("{tag} stokes vs path-ordered"),
                    r.stokes_vs_path,
                    tol.route,
                ),
                Check::at_most(
                    format!("{tag} closed form up to orientation"),
                    r.counterclockwise_vs_closed_form
                        .max(r.reversed_vs_closed_form),
                    tol.route,
                ),
            ]
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BerryReport {
    /// Tracked phases of `|0>` and `|1>` around an `(r1, theta1)` rectangle.
    pub squeeze_phases: [f64; 2],
    pub squeeze_ratio: f64,
    pub square_side: f64,
    pub square_area_integral: f64,
    pub square_phases: [f64; 2],
    /// `max(|phi_0 + 2 I|, |phi_1|)` with `I = oint (y dx - x dy)`.
    pub square_area_law_residual: f64,
    pub circle_phases: [f64; 2],
    pub circle_difference: f64,
}

pub const SQUARE_SIDE: f64 = 0.01;

pub fn berry_report() -> Result<BerryReport> {
    let ds = ChartKind::SingleModeDS;
    let source = conventions::calibrated_source(ds)?;
    let rect = LoopPath::rectangle(
        ds,
        &[0.0; 4],
        (Component::R1, Component::Theta1),
        (0.0, 0.5),
        (0.0, 2.0 * PI),
        true,
        DEFAULT_STEPS,
    )?;
    let h = path_ordered_holonomy(&rect, &source)?;
    let sq = h.tracked_phases.expect("path-ordered route tracks phases");
    let eps = SQUARE_SIDE;
    let square = LoopPath::rectangle(
        ds,
        &[0.0; 4],
        (Component::X, Component::Y),
        (0.0, eps),
        (0.0, eps),
        true,
        50,
    )?;
    let s = berry_phase_displace(&square, &source, 1e-12)?;
    let circle = LoopPath::circle(
        ds,
        &[0.0; 4],
        (Component::X, Component::Y),
        (0.0, 0.0),
        1.0,
        256,
        8,
    )?;
    let c = berry_phase_displace(&circle, &source, 1e-9)?;
    let i = s.area_integral;
    Ok(BerryReport {
        squeeze_phases: [sq[0], sq[1]],
        squeeze_ratio: sq[1] / sq[0],
        square_side: eps,
        square_area_integral: i,
        square_phases: s.phases,
        square_area_law_residual: (s.phases[0] + 2.0 * i).abs().max(s.phases[1].abs()),
        circle_phases: c.phases,
        circle_difference: c.difference,
    })
}

impl BerryReport {
    pub fn checks(&self, tol: &Tolerances) -> Vec<Check> {
        vec![
            Check::at_most(
                "squeeze phase ratio 3:1 (relative)",
                (self.squeeze_ratio / 3.0 - 1.0).abs(),
                tol.phase_ratio,
            ),
            Check::at_most(
                "displacement square area law residual / side^3",
                self.square_area_law_residual / self.square_side.powi(3),
                1.0,
            ),
            Check::above(
                "unit circle |phi_0 - phi_1|",
                self.circle_difference.abs(),
                1e-3,
            ),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KickReport {
    pub calibration: kick::KickCalibration,
    pub table: kick::DeviationReport,
    /// `|v - target| / target`, row-major.
    pub relative_errors: Vec<f64>,
    pub fit: kick::ConvergenceFit,
    #[serde(skip)]
    pub seconds: f64,
}

pub fn kick_report(cutoff: usize) -> Result<KickReport> {
    let start = std::time::Instant::now();
    let calibration = kick::convention_calibration(cutoff, true)?;
    let setup = calibration.selected.setup(cutoff);
    let table = kick::deviation_table(&kick::TARGET_M_VALUES, kick::TARGET_REFERENCE_M, &setup)?;
    let relative_errors = kick::relative_errors(&table)?;
    let fit = kick::convergence_fit(
        &kick::CONVERGENCE_M_VALUES,
        kick::CONVERGENCE_REFERENCE_M,
        &setup,
    )?;
    Ok(KickReport {
        calibration,
        table,
        relative_errors,
        fit,
        seconds: start.elapsed().as_secs_f64(),
    })
}

impl KickReport {
    pub fn table_checks(&self, tol: &Tolerances) -> Vec<Check> {
        let mut out: Vec<Check> = self
            .relative_errors
            .iter()
            .enumerate()
            .map(|(k, &r)| {
                Check::at_most(
                    format!(
                        "entry {} m={} relative error",
                        kick::ENTRY_LABELS[k / 4],
                        kick::TARGET_M_VALUES[k % 4]
                    ),
                    r,
                    tol.kick_relative,
                )
            })
            .collect();
        out.push(Check::at_most(
            "rows 01 and 10 coincide",
            self.table.off_diagonal_asymmetry(),
            1e-10,
        ));
        out.push(Check::at_most(
            "deviations decrease in m",
            if self.table.is_monotone() { 0.0 } else { 1.0 },
            0.0,
        ));
        out.push(Check::at_most("runtime seconds", self.seconds, 120.0));
        out
    }

    pub fn slope_checks(&self) -> Vec<Check> {
        self.fit
            .slopes
            .iter()
            .enumerate()
            .map(|(k, &s)| Check::within(format!("slope {}", kick::ENTRY_LABELS[k]), s, -2.3, -1.7))
            .collect()
    }
}

pub fn swap_checks(r: &gates::SwapReport, tol: &Tolerances) -> Vec<Check> {
    vec![
        Check::at_most("distance to U_SWAP", r.distance, tol.swap),
        Check::at_most(
            "SWAP^2 distance to identity",
            r.squared_distance_to_identity,
            tol.swap,
        ),
        Check::at_most("off-pattern entries", r.off_pattern, tol.swap),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HygieneReport {
    /// Kick block entries at cutoff 32 against 64, over `m = 5` and the
    /// reference.
    pub kick_cutoff_change: f64,
    /// Largest truncation change met by the numeric connection.
    pub connection_cutoff_change: f64,
    /// Unit-circle displacement holonomy under one more step halving.
    pub path_step_change: f64,
    /// Stokes SU(2) rectangle with the slice length halved.
    pub stokes_step_change: f64,
    pub max_unitarity_defect: f64,
}

pub fn hygiene_report(connection_cutoff_change: f64) -> Result<HygieneReport> {
    let mut unitarity = 0.0f64;
    let mut kick_change = 0.0f64;
    for m in [5, kick::TARGET_REFERENCE_M] {
        let lo = KickSetup::standard(kick::KickConvention::MKicks);
        let hi = KickSetup {
            cutoff: 2 * lo.cutoff,
            ..lo
        };
        let (a, b) = (lo.evolution(m)?, hi.evolution(m)?);
        unitarity = unitarity
            .max(a.unitarity_defect())
            .max(b.unitarity_defect());
        let (ba, bb) = (
            a.matrix().view((0, 0), (2, 2)).into_owned(),
            b.matrix().view((0, 0), (2, 2)).into_owned(),
        );
        kick_change = kick_change.max(max_abs_diff(&ba, &bb));
    }
    let ds = ChartKind::SingleModeDS;
    let source = conventions::calibrated_source(ds)?;
    let circle = LoopPath::circle(
        ds,
        &[0.0; 4],
        (Component::X, Component::Y),
        (0.0, 0.0),
        1.0,
        64,
        8,
    )?;
    let conv = path_ordered_converged(&circle, &source, 1e-9)?;
    let finer = path_ordered_holonomy(
        &circle.with_steps(
            conv.steps_per_edge
                .expect("path-ordered route records steps")
                * 2,
        ),
        &source,
    )?;
    unitarity = unitarity
        .max(conv.unitarity_defect)
        .max(finer.unitarity_defect);
    let su2 = conventions::calibrated_source(ChartKind::SU2Interferometer)?;
    let region = stokes::su2_rect_region(Su2Rect::C1, 1.0)?;
    let coarse = stokes::stokes_holonomy(&region, &su2, &StokesOptions::default())?;
    let fine_opts = StokesOptions {
        tau_step: StokesOptions::default().tau_step / 2.0,
        line_step: StokesOptions::default().line_step / 2.0,
        ..StokesOptions::default()
    };
    let fine = stokes::stokes_holonomy(&region, &su2, &fine_opts)?;
    unitarity = unitarity
        .max(coarse.unitarity_defect)
        .max(fine.unitarity_defect);
    let swap = gates::swap_operator(FockSpace::new(4, gates::SWAP_CUTOFF)?, [0, 1, 2, 3])?;
    unitarity = unitarity.max(swap.unitarity_defect());
    Ok(HygieneReport {
        kick_cutoff_change: kick_change,
        connection_cutoff_change,
        path_step_change: max_abs_diff(&conv.matrix, &finer.matrix),
        stokes_step_change: max_abs_diff(&coarse.matrix, &fine.matrix),
        max_unitarity_defect: unitarity,
    })
}

impl HygieneReport {
    pub fn checks(&self, tol: &Tolerances) -> Vec<Check> {
        vec![
            Check::at_most(
                "kick block under cutoff doubling",
                self.kick_cutoff_change,
                tol.cutoff_doubling,
            ),
            Check::at_most(
                "numeric connection under cutoff doubling",
                self.connection_cutoff_change,
                tol.cutoff_doubling,
            ),
            Check::at_most(
                "path-ordered holonomy under step halving",
                self.path_step_change,
                tol.step_halving,
            ),
            Check::at_most(
                "stokes holonomy under step halving",
                self.stokes_step_change,
                tol.step_halving,
            ),
            Check::at_most(
                "max unitarity defect",
                self.max_unitarity_defect,
                tol.unitarity,
            ),
        ]
    }
}
