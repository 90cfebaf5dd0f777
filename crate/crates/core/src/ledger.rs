//! Every sign, phase and ordering choice fixed by calibration, gathered in
//! one serializable record.

use serde::Serialize;

use crate::charts::{self, ChartKind};
use crate::conventions::{self, ChartCalibration};
use crate::error::Result;
use crate::kick::{self, KickVariant};
use crate::linalg::{self, c64, CMatrix};
use crate::stokes::{self, StokesOptions, Su2Rect};
use crate::surface::SigmaKind;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratorEntry {
    pub kind: SigmaKind,
    pub label: &'static str,
    pub nominal_label: &'static str,
    /// `max |i F / density - G|` at the probe point.
    pub residual: f64,
    /// Same with the nominal generator.
    pub nominal_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderingEntry {
    pub rule: &'static str,
    /// `max |W(C1) - exp(+2 i beta sigma_2^12)|` for the vertex order
    /// `(0,0), (pi,0), (pi,beta), (0,beta)`.
    pub c1_counterclockwise_residual: f64,
    /// Same against `exp(-2 i beta sigma_2^12)`.
    pub c1_nominal_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KickEntry {
    pub selected: KickVariant,
    pub label: String,
    pub within_quarter: usize,
    pub max_relative_error: f64,
    pub runner_up: Option<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConventionLedger {
    pub charts: Vec<ChartCalibration>,
    pub generators: Vec<GeneratorEntry>,
    pub ordering: OrderingEntry,
    pub kick: KickEntry,
}

fn nominal_generator(kind: SigmaKind) -> (&'static str, CMatrix) {
    match kind {
        SigmaKind::I => ("sigma_1", linalg::pauli_x()),
        SigmaKind::II => ("sigma_2", linalg::pauli_y()),
        SigmaKind::III => ("sigma_3", linalg::pauli_z()),
        SigmaKind::IV => ("sigma_2^12", linalg::sigma_12(2)),
        SigmaKind::V => ("sigma_1^12", linalg::sigma_12(1)),
    }
}

fn probe(kind: SigmaKind) -> Vec<f64> {
    let mut p = kind.standard_base();
    let (i, j) =
        crate::holonomy::plane_indices(kind.chart(), kind.plane()).expect("plane of chart");
    p[i] = 0.3;
    p[j] = 0.4;
    p
}

pub fn generator_entries() -> Result<Vec<GeneratorEntry>> {
    SigmaKind::ALL
        .iter()
        .map(|&kind| {
            let source = conventions::calibrated_source(kind.chart())?;
            let p = probe(kind);
            let (i, j) = crate::holonomy::plane_indices(kind.chart(), kind.plane())?;
            let (u, v) = kind.plane();
            let f = charts::field_strength(&source, &p, u, v)?.matrix;
            let fitted = f * c64(0.0, 1.0 / kind.density(p[i], p[j]));
            let (nominal_label, nominal) = nominal_generator(kind);
            Ok(GeneratorEntry {
                kind,
                label: kind.generator_label(),
                nominal_label,
                residual: linalg::max_abs_diff(&fitted, &kind.generator()),
                nominal_residual: linalg::max_abs_diff(&fitted, &nominal),
            })
        })
        .collect()
}

pub fn ordering_entry() -> Result<OrderingEntry> {
    let beta = 0.3;
    let source = conventions::calibrated_source(ChartKind::SU2Interferometer)?;
    let region = stokes::su2_rect_region(Su2Rect::C1, beta)?;
    let w = stokes::stokes_holonomy(&region, &source, &StokesOptions::default())?.matrix;
    Ok(OrderingEntry {
        rule: "later path segments multiply on the left",
        c1_counterclockwise_residual: linalg::max_abs_diff(
            &w,
            &stokes::su2_rect_gate(Su2Rect::C1, -beta).matrix,
        ),
        c1_nominal_residual: linalg::max_abs_diff(
            &w,
            &stokes::su2_rect_gate(Su2Rect::C1, beta).matrix,
        ),
    })
}

pub fn kick_entry(cutoff: usize) -> Result<KickEntry> {
    let cal = kick::convention_calibration(cutoff, true)?;
    let best = &cal.scores[0];
    let runner_up = cal
        .scores
        .iter()
        .find(|s| {
            s.variant.convention != best.variant.convention
                || s.variant.start_at_origin != best.variant.start_at_origin
        })
        .map(|s| (s.variant.label(), s.total_relative_error));
    Ok(KickEntry {
        selected: cal.selected,
        label: cal.selected.label(),
        within_quarter: best.within_quarter,
        max_relative_error: best.max_relative_error,
        runner_up,
    })
}

pub fn build_ledger(kick_cutoff: usize) -> Result<ConventionLedger> {
    Ok(ConventionLedger {
        charts: conventions::frozen_calibrations()?.to_vec(),
        generators: generator_entries()?,
        ordering: ordering_entry()?,
        kick: kick_entry(kick_cutoff)?,
    })
}
