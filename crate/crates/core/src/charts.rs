//! Control charts, their unitary families and Wilczek-Zee connections.
//!
//! A connection component is `A_i = <rho_bar| U^dagger d_i U |rho>` over the
//! chart's code block, rows indexed by `rho_bar`.

use std::fmt;

use log::warn;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::conventions::{ConventionMap, SqueezePhase};
use crate::error::{Error, Result};
use crate::fock::{CodeBlock, FockSpace, Ladder, LadderGenerator, Operator};
use crate::linalg::{self, c64, cis, CMatrix, I, ZERO};
use crate::optics::{self, SU2Angles};

/// Smallest displacement modulus at which polar components are defined.
pub const POLAR_MIN_R0: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChartKind {
    /// `U = D(lambda) S(mu)` on one mode, coordinates `(x, y, r1, theta1)`.
    SingleModeDS,
    /// `U = N(xi) M(zeta)` on two modes, coordinates `(r2, theta2, r3, theta3)`.
    TwoModeNM,
    /// `U = Ux(alpha) Uy(beta) Uz(gamma)` on two modes.
    SU2Interferometer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Component {
    X,
    Y,
    R0,
    Theta0,
    R1,
    Theta1,
    R2,
    Theta2,
    R3,
    Theta3,
    Alpha,
    Beta,
    Gamma,
}

impl Component {
    pub const ALL: [Component; 13] = [
        Component::X,
        Component::Y,
        Component::R0,
        Component::Theta0,
        Component::R1,
        Component::Theta1,
        Component::R2,
        Component::Theta2,
        Component::R3,
        Component::Theta3,
        Component::Alpha,
        Component::Beta,
        Component::Gamma,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Component::X => "x",
            Component::Y => "y",
            Component::R0 => "r0",
            Component::Theta0 => "theta0",
            Component::R1 => "r1",
            Component::Theta1 => "theta1",
            Component::R2 => "r2",
            Component::Theta2 => "theta2",
            Component::R3 => "r3",
            Component::Theta3 => "theta3",
            Component::Alpha => "alpha",
            Component::Beta => "beta",
            Component::Gamma => "gamma",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|c| c.name() == name)
    }

    pub fn chart(&self) -> ChartKind {
        match self {
            Component::X
            | Component::Y
            | Component::R0
            | Component::Theta0
            | Component::R1
            | Component::Theta1 => ChartKind::SingleModeDS,
            Component::R2 | Component::Theta2 | Component::R3 | Component::Theta3 => {
                ChartKind::TwoModeNM
            }
            Component::Alpha | Component::Beta | Component::Gamma => ChartKind::SU2Interferometer,
        }
    }

    pub fn is_radial(&self) -> bool {
        matches!(
            self,
            Component::R0 | Component::R1 | Component::R2 | Component::R3
        )
    }

    /// Polar displacement components, derived from `(x, y)`.
    pub fn is_polar(&self) -> bool {
        matches!(self, Component::R0 | Component::Theta0)
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl ChartKind {
    pub const ALL: [ChartKind; 3] = [
        ChartKind::SingleModeDS,
        ChartKind::TwoModeNM,
        ChartKind::SU2Interferometer,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ChartKind::SingleModeDS => "single-mode-ds",
            ChartKind::TwoModeNM => "two-mode-nm",
            ChartKind::SU2Interferometer => "su2",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|c| c.name() == name)
    }

    /// Primary coordinates in storage order.
    pub fn coordinates(&self) -> &'static [Component] {
        match self {
            ChartKind::SingleModeDS => {
                &[Component::X, Component::Y, Component::R1, Component::Theta1]
            }
            ChartKind::TwoModeNM => &[
                Component::R2,
                Component::Theta2,
                Component::R3,
                Component::Theta3,
            ],
            ChartKind::SU2Interferometer => &[Component::Alpha, Component::Beta, Component::Gamma],
        }
    }

    pub fn n_coords(&self) -> usize {
        self.coordinates().len()
    }

    pub fn index_of(&self, c: Component) -> Option<usize> {
        self.coordinates().iter().position(|&k| k == c)
    }

    pub fn n_modes(&self) -> usize {
        match self {
            ChartKind::SingleModeDS => 1,
            _ => 2,
        }
    }

    pub fn block(&self) -> CodeBlock {
        match self {
            ChartKind::SingleModeDS => CodeBlock::single_mode(),
            _ => CodeBlock::two_mode(),
        }
    }

    pub fn block_dim(&self) -> usize {
        match self {
            ChartKind::SingleModeDS => 2,
            _ => 4,
        }
    }

    pub fn default_cutoff(&self) -> usize {
        match self {
            ChartKind::SingleModeDS => 32,
            _ => 16,
        }
    }

    /// Largest cutoff reached by truncation doubling.
    pub fn max_cutoff(&self) -> usize {
        match self {
            ChartKind::SingleModeDS => 256,
            _ => 32,
        }
    }

    pub fn space(&self, cutoff: usize) -> Result<FockSpace> {
        FockSpace::new(self.n_modes(), cutoff)
    }

    pub fn origin(&self) -> Vec<f64> {
        vec![0.0; self.n_coords()]
    }

    /// Whether a component has a closed form.
    pub fn has_closed_form(&self, c: Component) -> bool {
        c.chart() == *self && !matches!(c, Component::Theta2 | Component::Theta3)
    }
}

impl fmt::Display for ChartKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlPoint {
    chart: ChartKind,
    coords: Vec<f64>,
}

impl ControlPoint {
    pub fn new(chart: ChartKind, coords: Vec<f64>) -> Result<Self> {
        if coords.len() != chart.n_coords() {
            return Err(Error::InvalidParameter(format!(
                "{chart} takes {} coordinates, got {}",
                chart.n_coords(),
                coords.len()
            )));
        }
        for (c, v) in chart.coordinates().iter().zip(&coords) {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{c} = {v} is not finite")));
            }
            if c.is_radial() && *v < 0.0 {
                return Err(Error::InvalidParameter(format!("{c} = {v} is negative")));
            }
        }
        Ok(Self { chart, coords })
    }

    pub fn single_mode(x: f64, y: f64, r1: f64, theta1: f64) -> Result<Self> {
        Self::new(ChartKind::SingleModeDS, vec![x, y, r1, theta1])
    }

    pub fn two_mode(r2: f64, theta2: f64, r3: f64, theta3: f64) -> Result<Self> {
        Self::new(ChartKind::TwoModeNM, vec![r2, theta2, r3, theta3])
    }

    pub fn su2(alpha: f64, beta: f64, gamma: f64) -> Self {
        Self {
            chart: ChartKind::SU2Interferometer,
            coords: vec![alpha, beta, gamma],
        }
    }

    pub fn origin(chart: ChartKind) -> Self {
        Self {
            chart,
            coords: chart.origin(),
        }
    }

    pub fn chart(&self) -> ChartKind {
        self.chart
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Value of a coordinate, including the polar displacement pair.
    pub fn get(&self, c: Component) -> Option<f64> {
        if let Some(i) = self.chart.index_of(c) {
            return Some(self.coords[i]);
        }
        if self.chart == ChartKind::SingleModeDS {
            let (x, y) = (self.coords[0], self.coords[1]);
            return match c {
                Component::R0 => Some(x.hypot(y)),
                Component::Theta0 => Some(y.atan2(x)),
                _ => None,
            };
        }
        None
    }
}

fn check_component(chart: ChartKind, c: Component) -> Result<()> {
    if c.chart() != chart {
        return Err(Error::InvalidParameter(format!(
            "component {c} does not belong to chart {chart}"
        )));
    }
    Ok(())
}

fn check_space(chart: ChartKind, space: FockSpace) -> Result<()> {
    if space.n_modes() != chart.n_modes() {
        return Err(Error::InvalidSpace(format!(
            "{chart} needs {} modes, space has {}",
            chart.n_modes(),
            space.n_modes()
        )));
    }
    Ok(())
}

/// Full-space `U(sigma)` in the chart's operator order.
pub fn control_unitary(point: &ControlPoint, space: FockSpace) -> Result<Operator> {
    control_unitary_at(point.chart, &point.coords, space)
}

/// As [`control_unitary`] for raw coordinates, which may leave the chart's
/// radial ranges (finite-difference stencils do).
pub fn control_unitary_at(chart: ChartKind, coords: &[f64], space: FockSpace) -> Result<Operator> {
    check_space(chart, space)?;
    match chart {
        ChartKind::SingleModeDS => {
            let d = optics::displacer(space, 0, c64(coords[0], coords[1]))?;
            let s = optics::squeezer(space, 0, Complex64::from_polar(coords[2], coords[3]))?;
            Ok(&d * &s)
        }
        ChartKind::TwoModeNM => {
            let n = optics::two_mode_displacer(
                space,
                (0, 1),
                Complex64::from_polar(coords[2], coords[3]),
            )?;
            let m = optics::two_mode_squeezer(
                space,
                (0, 1),
                Complex64::from_polar(coords[0], coords[1]),
            )?;
            Ok(&n * &m)
        }
        ChartKind::SU2Interferometer => optics::su2_unitary(
            space,
            (0, 1),
            SU2Angles {
                alpha: coords[0],
                beta: coords[1],
                gamma: coords[2],
            },
        ),
    }
}

/// Anti-Hermitian exponents of the factors of `U(sigma)`, leftmost first.
fn factor_generators(
    chart: ChartKind,
    coords: &[f64],
    space: FockSpace,
) -> Result<Vec<LadderGenerator>> {
    use Ladder::{Lower, Raise};
    let pair = |z: Complex64, up: &[Ladder], down: &[Ladder]| -> Result<LadderGenerator> {
        let mut g = LadderGenerator::new(space);
        g.add_word(z, up)?;
        g.add_word(-z.conj(), down)?;
        Ok(g)
    };
    match chart {
        ChartKind::SingleModeDS => {
            let lambda = c64(coords[0], coords[1]);
            let mu = Complex64::from_polar(coords[2], coords[3]);
            Ok(vec![
                pair(lambda, &[Raise(0)], &[Lower(0)])?,
                pair(mu, &[Raise(0), Raise(0)], &[Lower(0), Lower(0)])?,
            ])
        }
        ChartKind::TwoModeNM => {
            let zeta = Complex64::from_polar(coords[0], coords[1]);
            let xi = Complex64::from_polar(coords[2], coords[3]);
            Ok(vec![
                pair(xi, &[Raise(0), Lower(1)], &[Lower(0), Raise(1)])?,
                pair(zeta, &[Raise(0), Raise(1)], &[Lower(0), Lower(1)])?,
            ])
        }
        ChartKind::SU2Interferometer => {
            let (a, b, g) = (coords[0], coords[1], coords[2]);
            let mut ux = LadderGenerator::new(space);
            ux.add_word(c64(0.0, a / 2.0), &[Raise(0), Lower(1)])?;
            ux.add_word(c64(0.0, a / 2.0), &[Raise(1), Lower(0)])?;
            let mut uy = LadderGenerator::new(space);
            uy.add_word(c64(b / 2.0, 0.0), &[Raise(0), Lower(1)])?;
            uy.add_word(c64(-b / 2.0, 0.0), &[Raise(1), Lower(0)])?;
            let mut uz = LadderGenerator::new(space);
            uz.add_word(c64(0.0, g / 2.0), &[Raise(0), Lower(0)])?;
            uz.add_word(c64(0.0, -g / 2.0), &[Raise(1), Lower(1)])?;
            Ok(vec![ux, uy, uz])
        }
    }
}

/// `U(sigma) V` without forming `U(sigma)`.
pub fn control_apply(
    chart: ChartKind,
    coords: &[f64],
    space: FockSpace,
    v: &CMatrix,
) -> Result<CMatrix> {
    check_space(chart, space)?;
    let mut out = v.clone();
    for g in factor_generators(chart, coords, space)?.iter().rev() {
        out = linalg::expm_action_with(g, &out)?;
    }
    Ok(out)
}

/// Finite-difference stencil for the derivative in the connection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stencil {
    Central,
    FivePoint,
}

/// Coordinates shifted by `t` along `c`; polar shifts keep the other polar
/// coordinate fixed.
fn shifted(chart: ChartKind, coords: &[f64], c: Component, t: f64) -> Result<Vec<f64>> {
    let mut out = coords.to_vec();
    if let Some(i) = chart.index_of(c) {
        out[i] += t;
        return Ok(out);
    }
    let (x, y) = (coords[0], coords[1]);
    let r0 = x.hypot(y);
    if r0 < POLAR_MIN_R0 {
        return Err(Error::PolarSingularity(r0));
    }
    let th = y.atan2(x);
    let (r, th) = match c {
        Component::R0 => (r0 + t, th),
        Component::Theta0 => (r0, th + t),
        _ => unreachable!("component checked against chart"),
    };
    out[0] = r * th.cos();
    out[1] = r * th.sin();
    Ok(out)
}

/// Numeric connection component at a fixed truncation.
pub fn connection_numeric_at(
    chart: ChartKind,
    coords: &[f64],
    c: Component,
    h: f64,
    stencil: Stencil,
    space: FockSpace,
) -> Result<CMatrix> {
    check_component(chart, c)?;
    if h.is_nan() || h <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "step {h} must be positive"
        )));
    }
    let block = chart.block().vectors(space)?;
    let base = control_apply(chart, coords, space, &block)?;
    let at = |t: f64| -> Result<CMatrix> {
        control_apply(chart, &shifted(chart, coords, c, t)?, space, &block)
    };
    let deriv = match stencil {
        Stencil::Central => (at(h)? - at(-h)?) / c64(2.0 * h, 0.0),
        Stencil::FivePoint => {
            let num = (at(-2.0 * h)? - at(2.0 * h)?) + (at(h)? - at(-h)?) * c64(8.0, 0.0);
            num / c64(12.0 * h, 0.0)
        }
    };
    Ok(base.adjoint() * deriv)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumericOptions {
    pub h: f64,
    pub stencil: Stencil,
    /// Starting cutoff; the chart default when `None`.
    pub cutoff: Option<usize>,
    /// Doubling stops once the change falls below this.
    pub doubling_tol: f64,
    /// Changes above this at the largest cutoff are errors, not flags.
    pub failure_tol: f64,
}

impl Default for NumericOptions {
    fn default() -> Self {
        Self {
            h: 1e-5,
            stencil: Stencil::Central,
            cutoff: None,
            doubling_tol: 1e-8,
            failure_tol: 1e-6,
        }
    }
}

/// Outcome of a truncation-doubling study.
#[derive(Debug, Clone, PartialEq)]
pub struct Converged<T> {
    pub value: T,
    pub cutoff: usize,
    /// Largest entry change between the last two cutoffs.
    pub change: f64,
    pub flagged: bool,
}

/// Evaluates `f` at doubling cutoffs until consecutive results agree to
/// `tol`. Past `max_cutoff` a change above `fail_tol` is an error and a
/// change between the two tolerances is returned flagged.
pub fn converge_in_cutoff<F>(
    start: usize,
    max_cutoff: usize,
    tol: f64,
    fail_tol: f64,
    what: &str,
    f: F,
) -> Result<Converged<CMatrix>>
where
    F: Fn(usize) -> Result<CMatrix>,
{
    let mut cutoff = start;
    let mut prev = f(cutoff)?;
    loop {
        let next = f(2 * cutoff)?;
        let change = linalg::max_abs_diff(&prev, &next);
        cutoff *= 2;
        if change <= tol {
            return Ok(Converged {
                value: next,
                cutoff,
                change,
                flagged: false,
            });
        }
        if 2 * cutoff > max_cutoff {
            if change > fail_tol {
                return Err(Error::Convergence {
                    what: what.to_string(),
                    change,
                    tolerance: fail_tol,
                });
            }
            warn!("{what}: change {change:.3e} under cutoff doubling to {cutoff}");
            return Ok(Converged {
                value: next,
                cutoff,
                change,
                flagged: true,
            });
        }
        prev = next;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConnectionSample {
    pub chart: ChartKind,
    pub coords: Vec<f64>,
    pub component: Component,
    #[serde(serialize_with = "crate::linalg::serialize_matrix")]
    pub matrix: CMatrix,
    pub anti_hermitian_defect: f64,
    pub cutoff: Option<usize>,
    pub truncation_change: Option<f64>,
    pub truncation_flagged: bool,
}

/// Connection component from finite differences of `U(sigma)`, with the
/// truncation doubled until the result is stable.
pub fn connection_numeric(
    point: &ControlPoint,
    c: Component,
    opts: &NumericOptions,
) -> Result<ConnectionSample> {
    let chart = point.chart;
    check_component(chart, c)?;
    let start = opts.cutoff.unwrap_or(chart.default_cutoff());
    let conv = converge_in_cutoff(
        start,
        chart.max_cutoff().max(2 * start),
        opts.doubling_tol,
        opts.failure_tol,
        &format!("A_{c} on {chart}"),
        |cut| {
            connection_numeric_at(
                chart,
                &point.coords,
                c,
                opts.h,
                opts.stencil,
                chart.space(cut)?,
            )
        },
    )?;
    Ok(ConnectionSample {
        chart,
        coords: point.coords.clone(),
        component: c,
        anti_hermitian_defect: linalg::anti_hermitian_defect(&conv.value),
        matrix: conv.value,
        cutoff: Some(conv.cutoff),
        truncation_change: Some(conv.change),
        truncation_flagged: conv.flagged,
    })
}

fn mat2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[a, b, c, d])
}

/// Closed-form components with squeeze-phase sign `kappa`, no coordinate map.
fn closed_form(chart: ChartKind, coords: &[f64], c: Component, kappa: f64) -> Result<CMatrix> {
    check_component(chart, c)?;
    match chart {
        ChartKind::SingleModeDS => {
            let (x, y, r1, th1) = (coords[0], coords[1], coords[2], coords[3]);
            let ch = c64((2.0 * r1).cosh(), 0.0);
            let sh = (2.0 * r1).sinh();
            match c {
                Component::X => Ok(mat2(
                    c64(0.0, -y),
                    -(ch - cis(-kappa * th1) * sh),
                    ch - cis(kappa * th1) * sh,
                    c64(0.0, -y),
                )),
                Component::Y => Ok(mat2(
                    c64(0.0, x),
                    I * (ch + cis(-kappa * th1) * sh),
                    I * (ch + cis(kappa * th1) * sh),
                    c64(0.0, x),
                )),
                Component::R0 | Component::Theta0 => {
                    let r0 = x.hypot(y);
                    if r0 < POLAR_MIN_R0 {
                        return Err(Error::PolarSingularity(r0));
                    }
                    let th0 = y.atan2(x);
                    let mixed = th0 - kappa * th1;
                    if c == Component::R0 {
                        Ok(mat2(
                            ZERO,
                            -(cis(-th0) * ch - cis(mixed) * sh),
                            cis(th0) * ch - cis(-mixed) * sh,
                            ZERO,
                        ))
                    } else {
                        let d = c64(0.0, r0 * r0);
                        Ok(mat2(
                            d,
                            I * r0 * (cis(-th0) * ch + cis(mixed) * sh),
                            I * r0 * (cis(th0) * ch + cis(-mixed) * sh),
                            d,
                        ))
                    }
                }
                Component::R1 => Ok(CMatrix::zeros(2, 2)),
                Component::Theta1 => {
                    let f = ((4.0 * r1).cosh() - 1.0) / 4.0;
                    Ok(mat2(c64(0.0, f), ZERO, ZERO, c64(0.0, 3.0 * f)))
                }
                _ => unreachable!("component checked against chart"),
            }
        }
        ChartKind::TwoModeNM => {
            let (r2, th2, th3) = (coords[0], coords[1], coords[3]);
            let mut m = CMatrix::zeros(4, 4);
            match c {
                Component::R2 => {
                    m[(0, 3)] = -cis(-th2);
                    m[(3, 0)] = cis(th2);
                }
                Component::R3 => {
                    let w = 2.0 * r2.cosh().powi(2) - 1.0;
                    m[(1, 2)] = -cis(-th3) * w;
                    m[(2, 1)] = cis(th3) * w;
                }
                _ => {
                    return Err(Error::Unsupported(format!(
                        "no closed form for A_{c}; use the numeric connection"
                    )))
                }
            }
            Ok(m)
        }
        ChartKind::SU2Interferometer => {
            let (b, g) = (coords[1], coords[2]);
            let inner = match c {
                Component::Alpha => mat2(
                    c64(0.0, b.sin() / 2.0),
                    I * cis(g) * (b.cos() / 2.0),
                    I * cis(-g) * (b.cos() / 2.0),
                    c64(0.0, -b.sin() / 2.0),
                ),
                Component::Beta => mat2(ZERO, -cis(g) / 2.0, cis(-g) / 2.0, ZERO),
                Component::Gamma => mat2(c64(0.0, -0.5), ZERO, ZERO, c64(0.0, 0.5)),
                _ => unreachable!("component checked against chart"),
            };
            Ok(linalg::embed_middle(&inner))
        }
    }
}

/// Closed-form component under a convention map.
pub fn analytic_at(
    chart: ChartKind,
    coords: &[f64],
    c: Component,
    map: &ConventionMap,
) -> Result<CMatrix> {
    check_component(chart, c)?;
    if !chart.has_closed_form(c) {
        return Err(Error::Unsupported(format!(
            "no closed form for A_{c}; use the numeric connection"
        )));
    }
    map.check_chart(chart)?;
    let kappa = match map.squeeze_phase {
        SqueezePhase::Derived => 1.0,
        SqueezePhase::Nominal => -1.0,
    };
    let mapped: Vec<f64> = coords.iter().zip(&map.signs).map(|(v, s)| v * s).collect();
    let m = if let Some(i) = chart.index_of(c) {
        closed_form(chart, &mapped, c, kappa)? * c64(map.signs[i], 0.0)
    } else if map.signs[0] == 1.0 && map.signs[1] == 1.0 {
        closed_form(chart, &mapped, c, kappa)?
    } else {
        // polar components through the chain rule of the mapped Cartesian pair
        let (x, y) = (coords[0], coords[1]);
        let r0 = x.hypot(y);
        if r0 < POLAR_MIN_R0 {
            return Err(Error::PolarSingularity(r0));
        }
        let th = y.atan2(x);
        let ax = closed_form(chart, &mapped, Component::X, kappa)? * c64(map.signs[0], 0.0);
        let ay = closed_form(chart, &mapped, Component::Y, kappa)? * c64(map.signs[1], 0.0);
        let (cx, cy) = if c == Component::R0 {
            (th.cos(), th.sin())
        } else {
            (-r0 * th.sin(), r0 * th.cos())
        };
        let mut out = ax * c64(cx, 0.0) + ay * c64(cy, 0.0);
        if map.transpose {
            out = out.transpose();
        }
        return Ok(out);
    };
    Ok(if map.transpose { m.transpose() } else { m })
}

/// Closed-form connection component at a point.
pub fn connection_analytic(
    point: &ControlPoint,
    c: Component,
    map: &ConventionMap,
) -> Result<ConnectionSample> {
    let m = analytic_at(point.chart, &point.coords, c, map)?;
    Ok(ConnectionSample {
        chart: point.chart,
        coords: point.coords.clone(),
        component: c,
        anti_hermitian_defect: linalg::anti_hermitian_defect(&m),
        matrix: m,
        cutoff: None,
        truncation_change: None,
        truncation_flagged: false,
    })
}

/// A way of evaluating connection components anywhere on a chart.
pub trait ConnectionSource: Sync {
    fn chart(&self) -> ChartKind;

    fn component(&self, coords: &[f64], c: Component) -> Result<CMatrix>;

    fn label(&self) -> &'static str;
}

#[derive(Debug, Clone)]
pub struct AnalyticSource {
    chart: ChartKind,
    map: ConventionMap,
}

impl AnalyticSource {
    pub fn new(chart: ChartKind, map: ConventionMap) -> Result<Self> {
        map.check_chart(chart)?;
        Ok(Self { chart, map })
    }

    /// Closed forms with the identity coordinate map and the derived phase.
    pub fn canonical(chart: ChartKind) -> Self {
        Self {
            chart,
            map: ConventionMap::identity(chart),
        }
    }

    pub fn map(&self) -> &ConventionMap {
        &self.map
    }
}

impl ConnectionSource for AnalyticSource {
    fn chart(&self) -> ChartKind {
        self.chart
    }

    fn component(&self, coords: &[f64], c: Component) -> Result<CMatrix> {
        analytic_at(self.chart, coords, c, &self.map)
    }

    fn label(&self) -> &'static str {
        "analytic"
    }
}

/// Finite-difference connection at a fixed truncation.
#[derive(Debug, Clone, Copy)]
pub struct NumericSource {
    chart: ChartKind,
    space: FockSpace,
    h: f64,
    stencil: Stencil,
}

impl NumericSource {
    pub fn new(chart: ChartKind, cutoff: usize) -> Result<Self> {
        Ok(Self {
            chart,
            space: chart.space(cutoff)?,
            h: 1e-5,
            stencil: Stencil::Central,
        })
    }

    pub fn with_step(mut self, h: f64, stencil: Stencil) -> Self {
        self.h = h;
        self.stencil = stencil;
        self
    }

    pub fn cutoff(&self) -> usize {
        self.space.cutoff()
    }
}

impl ConnectionSource for NumericSource {
    fn chart(&self) -> ChartKind {
        self.chart
    }

    fn component(&self, coords: &[f64], c: Component) -> Result<CMatrix> {
        connection_numeric_at(self.chart, coords, c, self.h, self.stencil, self.space)
    }

    fn label(&self) -> &'static str {
        "numeric"
    }
}

/// Step used for derivatives of the connection.
pub const FIELD_STEP: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldStrengthSample {
    pub chart: ChartKind,
    pub coords: Vec<f64>,
    pub components: (Component, Component),
    #[serde(serialize_with = "crate::linalg::serialize_matrix")]
    pub matrix: CMatrix,
}

fn five_point<S: ConnectionSource + ?Sized>(
    source: &S,
    coords: &[f64],
    along: Component,
    of: Component,
    h: f64,
) -> Result<CMatrix> {
    let chart = source.chart();
    let at =
        |t: f64| -> Result<CMatrix> { source.component(&shifted(chart, coords, along, t)?, of) };
    let num = (at(-2.0 * h)? - at(2.0 * h)?) + (at(h)? - at(-h)?) * c64(8.0, 0.0);
    Ok(num / c64(12.0 * h, 0.0))
}

/// `F_ij = d_i A_j - d_j A_i + [A_i, A_j]` with five-point derivatives of the
/// source; `F_ji = -F_ij` holds exactly.
pub fn field_strength<S: ConnectionSource + ?Sized>(
    source: &S,
    coords: &[f64],
    i: Component,
    j: Component,
) -> Result<FieldStrengthSample> {
    let chart = source.chart();
    check_component(chart, i)?;
    check_component(chart, j)?;
    let d = chart.block_dim();
    let order = |c: Component| Component::ALL.iter().position(|&k| k == c).unwrap_or(0);
    let matrix = if i == j {
        CMatrix::zeros(d, d)
    } else {
        let (p, q, sign) = if order(i) < order(j) {
            (i, j, 1.0)
        } else {
            (j, i, -1.0)
        };
        let dp_aq = five_point(source, coords, p, q, FIELD_STEP)?;
        let dq_ap = five_point(source, coords, q, p, FIELD_STEP)?;
        let ap = source.component(coords, p)?;
        let aq = source.component(coords, q)?;
        (dp_aq - dq_ap + linalg::commutator(&ap, &aq)) * c64(sign, 0.0)
    };
    Ok(FieldStrengthSample {
        chart,
        coords: coords.to_vec(),
        components: (i, j),
        matrix,
    })
}

/// `max |[A_i, A_j]|` at a point.
pub fn commutator_norm<S: ConnectionSource + ?Sized>(
    source: &S,
    coords: &[f64],
    i: Component,
    j: Component,
) -> Result<f64> {
    let ai = source.component(coords, i)?;
    let aj = source.component(coords, j)?;
    Ok(linalg::max_abs(&linalg::commutator(&ai, &aj)))
}

/// Uniformly sampled points inside the ranges used for concordance checks:
/// `x, y` in `[-1, 1]`, `r1` in `[0, 0.5]`, `r2` in `[0, 0.5]`, `r3` in
/// `[0, 1.2]`, angles in `(-pi, pi]`.
pub fn sample_points(chart: ChartKind, n: usize, seed: u64) -> Vec<ControlPoint> {
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let coords: Vec<f64> = chart
                .coordinates()
                .iter()
                .map(|c| match c {
                    Component::X | Component::Y => rng.random_range(-1.0..=1.0),
                    Component::R1 | Component::R2 => rng.random_range(0.0..=0.5),
                    Component::R3 => rng.random_range(0.0..=1.2),
                    _ => rng.random_range(-PI..=PI),
                })
                .collect();
            ControlPoint::new(chart, coords).expect("sampled inside the chart")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::project_block;
    use crate::linalg::{max_abs_diff, ONE};

    #[test]
    fn origin_acts_as_identity_on_block() {
        for chart in ChartKind::ALL {
            let u = control_unitary(&ControlPoint::origin(chart), chart.space(6).unwrap()).unwrap();
            let p = project_block(&u, &chart.block()).unwrap();
            assert!(max_abs_diff(&p, &linalg::identity(chart.block_dim())) < 1e-14);
        }
    }

    #[test]
    fn apply_matches_dense_unitary() {
        let cases = [
            ControlPoint::single_mode(0.3, -0.2, 0.25, 0.9).unwrap(),
            ControlPoint::two_mode(0.3, 0.4, 0.8, -1.1).unwrap(),
            ControlPoint::su2(0.7, -0.4, 1.3),
        ];
        for p in cases {
            let space = p.chart().space(10).unwrap();
            let u = control_unitary(&p, space).unwrap();
            let v = p.chart().block().vectors(space).unwrap();
            let w = control_apply(p.chart(), p.coords(), space, &v).unwrap();
            assert!(max_abs_diff(&(u.matrix() * &v), &w) < 1e-12, "{p:?}");
        }
    }

    #[test]
    fn special_cases_of_unitaries() {
        let s = FockSpace::single_mode(12).unwrap();
        let p = ControlPoint::single_mode(0.4, 0.1, 0.0, 1.0).unwrap();
        let d = optics::displacer(s, 0, c64(0.4, 0.1)).unwrap();
        assert!(max_abs_diff(control_unitary(&p, s).unwrap().matrix(), d.matrix()) < 1e-13);
        let s2 = FockSpace::two_mode(5).unwrap();
        let jx = optics::su2_generators(s2, (0, 1)).unwrap().jx;
        let ux = crate::fock::expm_antihermitian(&jx.scaled(c64(0.0, 0.8))).unwrap();
        let u = control_unitary(&ControlPoint::su2(0.8, 0.0, 0.0), s2).unwrap();
        assert!(max_abs_diff(u.matrix(), ux.matrix()) < 1e-13);
    }

    #[test]
    fn theta1_component_vanishes_at_origin() {
        let p = ControlPoint::origin(ChartKind::SingleModeDS);
        let a = connection_numeric(&p, Component::Theta1, &NumericOptions::default()).unwrap();
        assert!(linalg::max_abs(&a.matrix) < 1e-9);
    }

    #[test]
    fn r1_component_is_zero() {
        let p = ControlPoint::single_mode(0.2, 0.0, 0.3, 0.0).unwrap();
        let a = connection_numeric(&p, Component::R1, &NumericOptions::default()).unwrap();
        assert!(linalg::max_abs(&a.matrix) < 1e-6);
        assert!(!a.truncation_flagged);
    }

    #[test]
    fn richardson_consistency() {
        let p = ControlPoint::single_mode(0.3, -0.4, 0.2, 0.5).unwrap();
        let space = ChartKind::SingleModeDS.space(64).unwrap();
        let h = 1e-3;
        let coarse = connection_numeric_at(
            p.chart(),
            p.coords(),
            Component::X,
            h,
            Stencil::Central,
            space,
        )
        .unwrap();
        let fine = connection_numeric_at(
            p.chart(),
            p.coords(),
            Component::X,
            h / 2.0,
            Stencil::Central,
            space,
        )
        .unwrap();
        let oracle = connection_numeric_at(
            p.chart(),
            p.coords(),
            Component::X,
            1e-2,
            Stencil::FivePoint,
            space,
        )
        .unwrap();
        let e_coarse = max_abs_diff(&coarse, &oracle);
        let e_fine = max_abs_diff(&fine, &oracle);
        assert!(
            e_coarse < 1e-5 && e_fine < e_coarse / 3.0,
            "{e_coarse} {e_fine}"
        );
    }

    #[test]
    fn closed_forms_at_reference_points() {
        let a = analytic_at(
            ChartKind::SingleModeDS,
            &[0.0, 0.0, 0.5, 0.0],
            Component::Theta1,
            &ConventionMap::identity(ChartKind::SingleModeDS),
        )
        .unwrap();
        let f = (2f64.cosh() - 1.0) / 4.0;
        assert!(
            (a[(0, 0)] - c64(0.0, f)).norm() < 1e-14
                && (a[(1, 1)] - c64(0.0, 3.0 * f)).norm() < 1e-14
        );
        let a = analytic_at(
            ChartKind::TwoModeNM,
            &[0.0, 0.0, 0.5, 0.0],
            Component::R3,
            &ConventionMap::identity(ChartKind::TwoModeNM),
        )
        .unwrap();
        assert!((a[(1, 2)] + ONE).norm() < 1e-14 && (a[(2, 1)] - ONE).norm() < 1e-14);
        let a = analytic_at(
            ChartKind::SU2Interferometer,
            &[0.3, 0.2, 0.1],
            Component::Gamma,
            &ConventionMap::identity(ChartKind::SU2Interferometer),
        )
        .unwrap();
        let expect = linalg::sigma_12(3) * c64(0.0, -0.5);
        assert!(max_abs_diff(&a, &expect) < 1e-15);
        assert!(matches!(
            analytic_at(
                ChartKind::TwoModeNM,
                &[0.1, 0.0, 0.1, 0.0],
                Component::Theta3,
                &ConventionMap::identity(ChartKind::TwoModeNM)
            ),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn polar_components_follow_chain_rule() {
        let map = ConventionMap::identity(ChartKind::SingleModeDS);
        let coords = [0.3, -0.45, 0.2, 1.1];
        let (r0, th) = (0.3f64.hypot(-0.45), (-0.45f64).atan2(0.3));
        let ax = analytic_at(ChartKind::SingleModeDS, &coords, Component::X, &map).unwrap();
        let ay = analytic_at(ChartKind::SingleModeDS, &coords, Component::Y, &map).unwrap();
        let ar = analytic_at(ChartKind::SingleModeDS, &coords, Component::R0, &map).unwrap();
        let at = analytic_at(ChartKind::SingleModeDS, &coords, Component::Theta0, &map).unwrap();
        let x_from = &ar * c64(th.cos(), 0.0) - &at * c64(th.sin() / r0, 0.0);
        let y_from = &ar * c64(th.sin(), 0.0) + &at * c64(th.cos() / r0, 0.0);
        assert!(max_abs_diff(&x_from, &ax) < 1e-14);
        assert!(max_abs_diff(&y_from, &ay) < 1e-14);
        assert!(matches!(
            analytic_at(
                ChartKind::SingleModeDS,
                &[0.0, 0.0, 0.2, 0.0],
                Component::R0,
                &map
            ),
            Err(Error::PolarSingularity(_))
        ));
        let p = ControlPoint::single_mode(0.3, -0.45, 0.2, 1.1).unwrap();
        let num = connection_numeric(&p, Component::Theta0, &NumericOptions::default()).unwrap();
        assert!(max_abs_diff(&num.matrix, &at) < 1e-6);
    }

    #[test]
    fn field_strength_antisymmetry() {
        let src = AnalyticSource::canonical(ChartKind::SingleModeDS);
        let c = [0.1, 0.2, 0.3, 0.4];
        let f = field_strength(&src, &c, Component::X, Component::R1).unwrap();
        let g = field_strength(&src, &c, Component::R1, Component::X).unwrap();
        assert_eq!(f.matrix, -g.matrix);
        let z = field_strength(&src, &c, Component::Y, Component::Y).unwrap();
        assert_eq!(linalg::max_abs(&z.matrix), 0.0);
    }

    #[test]
    fn su2_components_do_not_commute() {
        let src = AnalyticSource::canonical(ChartKind::SU2Interferometer);
        assert!(
            commutator_norm(&src, &[0.4, 0.7, 0.2], Component::Alpha, Component::Beta).unwrap()
                > 0.01
        );
    }
}
