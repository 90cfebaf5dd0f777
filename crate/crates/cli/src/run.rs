use holonomic_optics::gates;
use holonomic_optics::kick::{
    self, convention_calibration, convergence_fit, deviation_table, KickSchedule, KickSetup,
};
use holonomic_optics::ledger::{self, ConventionLedger};
use holonomic_optics::linalg::c64;
use holonomic_optics::verify::{self, Check};
use serde_json::json;

use crate::config::{ExperimentConfig, Format, Suite};
use crate::error::CliError;
use crate::report::{pct, real, sci, Report, Table};

type Outcome = (Vec<Check>, Table, serde_json::Value);

fn to_json<T: serde::Serialize>(v: &T) -> Result<serde_json::Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Encode(e.to_string()))
}

fn kick_cutoff(cfg: &ExperimentConfig) -> usize {
    cfg.cutoff.unwrap_or(kick::DEFAULT_CUTOFF)
}

fn check_connection(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let mut checks = Vec::new();
    let mut table = Table::new(&[
        "chart",
        "component",
        "max_deviation",
        "max_truncation_change",
        "flagged_points",
    ]);
    let mut reports = Vec::new();
    for chart in cfg.charts()? {
        let r = verify::connection_concordance(chart, cfg.points, cfg.seed, cfg.cutoff)?;
        for c in &r.components {
            table.push(vec![
                chart.name().into(),
                c.component.name().into(),
                sci(c.max_deviation),
                sci(c.max_truncation_change),
                c.flagged.to_string(),
            ]);
        }
        checks.extend(r.checks(&cfg.tolerances));
        reports.push(r);
    }
    Ok((checks, table, to_json(&reports)?))
}

fn check_field_strength(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let rows = verify::field_strength_report(cfg.points, cfg.seed)?;
    let mut table = Table::new(&["plane", "generator", "max_deviation", "max_commutator"]);
    for r in &rows {
        table.push(vec![
            r.kind.name().into(),
            r.kind.generator_label().into(),
            sci(r.max_deviation),
            sci(r.max_commutator),
        ]);
    }
    Ok((
        verify::field_strength_checks(&rows, &cfg.tolerances),
        table,
        to_json(&rows)?,
    ))
}

fn holonomy(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let rows = verify::route_equivalence()?;
    let mut table = Table::new(&["plane", "generator", "sigma", "distance", "steps_per_edge"]);
    for r in &rows {
        table.push(vec![
            r.kind.name().into(),
            r.kind.generator_label().into(),
            real(r.sigma),
            sci(r.distance),
            r.steps_per_edge.map_or(String::new(), |s| s.to_string()),
        ]);
    }
    Ok((
        verify::route_checks(&rows, &cfg.tolerances),
        table,
        to_json(&rows)?,
    ))
}

fn stokes(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let rows = verify::stokes_report(&cfg.stokes.angles)?;
    let mut table = Table::new(&[
        "rectangle",
        "angle",
        "stokes_vs_path",
        "counterclockwise_vs_closed_form",
        "reversed_vs_closed_form",
    ]);
    for r in &rows {
        table.push(vec![
            format!("{:?}", r.rect),
            real(r.angle),
            sci(r.stokes_vs_path),
            sci(r.counterclockwise_vs_closed_form),
            sci(r.reversed_vs_closed_form),
        ]);
    }
    Ok((
        verify::stokes_checks(&rows, &cfg.tolerances),
        table,
        to_json(&rows)?,
    ))
}

fn berry_phase(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let r = verify::berry_report()?;
    let mut table = Table::new(&["quantity", "value"]);
    for (k, v) in [
        ("squeeze_phase_0", r.squeeze_phases[0]),
        ("squeeze_phase_1", r.squeeze_phases[1]),
        ("squeeze_ratio", r.squeeze_ratio),
        ("square_area_integral", r.square_area_integral),
        ("square_phase_0", r.square_phases[0]),
        ("square_phase_1", r.square_phases[1]),
        ("square_area_law_residual", r.square_area_law_residual),
        ("circle_phase_0", r.circle_phases[0]),
        ("circle_phase_1", r.circle_phases[1]),
        ("circle_difference", r.circle_difference),
    ] {
        table.push(vec![k.into(), real(v)]);
    }
    Ok((r.checks(&cfg.tolerances), table, to_json(&r)?))
}

fn kick_convergence(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let p = &cfg.kick;
    let cutoff = kick_cutoff(cfg);
    let (convention, half_step_offset, calibration) = match p.convention {
        Some(c) => (c, false, None),
        None => {
            let cal = convention_calibration(cutoff, true)?;
            (
                cal.selected.convention,
                cal.selected.half_step_offset,
                Some(cal),
            )
        }
    };
    let setup = KickSetup {
        schedule: KickSchedule::new(p.total_time, p.coupling, convention)?,
        radius: p.radius,
        center: c64(0.0, 0.0),
        start_at_origin: p.start_at_origin,
        half_step_offset,
        cutoff,
    };
    let report = deviation_table(&p.m_values, p.reference_m, &setup)?;
    let mut header: Vec<String> = vec!["entry".into()];
    header.extend(p.m_values.iter().map(|m| format!("m={m}")));
    header.push(format!("reference_abs_m={}", p.reference_m));
    let mut table = Table {
        header,
        rows: Vec::new(),
    };
    for row in &report.rows {
        let mut r = vec![row.label.to_string()];
        r.extend(row.percent.iter().map(|v| v.map_or("flagged".into(), pct)));
        r.push(real(row.reference));
        table.push(r);
    }
    let tol = &cfg.tolerances;
    let mut checks = Vec::new();
    let relative = if p.is_standard_layout() {
        let rel = kick::relative_errors(&report)?;
        for (k, &r) in rel.iter().enumerate() {
            checks.push(Check::at_most(
                format!(
                    "entry {} m={} relative error",
                    kick::ENTRY_LABELS[k / 4],
                    kick::TARGET_M_VALUES[k % 4]
                ),
                r,
                tol.kick_relative,
            ));
        }
        Some(rel)
    } else {
        None
    };
    checks.push(Check::at_most(
        "rows 01 and 10 coincide",
        report.off_diagonal_asymmetry(),
        1e-10,
    ));
    checks.push(Check::at_most(
        "deviations decrease in m",
        if report.is_monotone() { 0.0 } else { 1.0 },
        0.0,
    ));
    let fit = convergence_fit(
        &kick::CONVERGENCE_M_VALUES,
        kick::CONVERGENCE_REFERENCE_M,
        &setup,
    )?;
    for (k, &s) in fit.slopes.iter().enumerate() {
        checks.push(Check::within(
            format!("slope {}", kick::ENTRY_LABELS[k]),
            s,
            -2.3,
            -1.7,
        ));
    }
    let diagnostics = json!({
        "setup": to_json(&setup)?,
        "table": to_json(&report)?,
        "relative_errors": relative,
        "convergence": to_json(&fit)?,
        "calibration": calibration.as_ref().map(to_json).transpose()?,
    });
    Ok((checks, table, diagnostics))
}

fn swap_demo(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let r = gates::swap_gate(cfg.swap.beams)?;
    let mut table = Table::new(&["quantity", "value"]);
    for (k, v) in [
        ("distance_to_swap", r.distance),
        (
            "swap_squared_distance_to_identity",
            r.squared_distance_to_identity,
        ),
        ("off_pattern", r.off_pattern),
        ("leakage", r.leakage),
    ] {
        table.push(vec![k.into(), sci(v)]);
    }
    Ok((
        verify::swap_checks(&r, &cfg.tolerances),
        table,
        to_json(&r)?,
    ))
}

fn calibrate_conventions(
    cfg: &ExperimentConfig,
    ledger: &ConventionLedger,
) -> Result<Outcome, CliError> {
    let tol = &cfg.tolerances;
    let mut table = Table::new(&[
        "section",
        "item",
        "selected",
        "residual",
        "alternative_residual",
    ]);
    let mut checks = Vec::new();
    for c in &ledger.charts {
        let signs: Vec<String> = c.map.signs.iter().map(|s| format!("{s:+}")).collect();
        table.push(vec![
            "chart".into(),
            c.map.chart.name().into(),
            format!(
                "signs [{}] transpose {} phase {:?}",
                signs.join(" "),
                c.map.transpose,
                c.map.squeeze_phase
            ),
            sci(c.residual),
            sci(c.runner_up_residual),
        ]);
        checks.push(Check::at_most(
            format!("{} calibration residual", c.map.chart),
            c.residual,
            tol.connection,
        ));
    }
    for g in &ledger.generators {
        table.push(vec![
            "generator".into(),
            format!("Sigma_{}", g.kind.name()),
            g.label.into(),
            sci(g.residual),
            sci(g.nominal_residual),
        ]);
        checks.push(Check::at_most(
            format!("Sigma_{} generator from field strength", g.kind.name()),
            g.residual,
            tol.connection,
        ));
    }
    table.push(vec![
        "ordering".into(),
        "C1 counterclockwise".into(),
        ledger.ordering.rule.into(),
        sci(ledger.ordering.c1_counterclockwise_residual),
        sci(ledger.ordering.c1_nominal_residual),
    ]);
    checks.push(Check::at_most(
        "C1 orientation",
        ledger.ordering.c1_counterclockwise_residual,
        tol.route,
    ));
    table.push(vec![
        "kick".into(),
        "convention".into(),
        ledger.kick.label.clone(),
        sci(ledger.kick.max_relative_error),
        ledger
            .kick
            .runner_up
            .as_ref()
            .map_or(String::new(), |(_, v)| sci(*v)),
    ]);
    Ok((checks, table, serde_json::Value::Null))
}

pub fn run(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let suite = cfg.validate()?;
    let needs_ledger = suite == Suite::CalibrateConventions || cfg.format == Format::Json;
    let ledger = if needs_ledger {
        Some(ledger::build_ledger(kick_cutoff(cfg))?)
    } else {
        None
    };
    let (checks, table, diagnostics) = match suite {
        Suite::CheckConnection => check_connection(cfg)?,
        Suite::CheckFieldStrength => check_field_strength(cfg)?,
        Suite::Holonomy => holonomy(cfg)?,
        Suite::Stokes => stokes(cfg)?,
        Suite::BerryPhase => berry_phase(cfg)?,
        Suite::KickConvergence => kick_convergence(cfg)?,
        Suite::SwapDemo => swap_demo(cfg)?,
        Suite::CalibrateConventions => {
            calibrate_conventions(cfg, ledger.as_ref().expect("ledger is built"))?
        }
    };
    Ok(Report {
        suite: suite.name(),
        passed: verify::all_pass(&checks),
        checks,
        table,
        diagnostics,
        config: cfg.clone(),
        conventions: if cfg.format == Format::Json {
            ledger
        } else {
            None
        },
    })
}
