//! Loops in control space, path-ordered holonomies and Berry phases.
//!
//! Ordering: a loop is cut into straight segments and each contributes
//! `exp(sum_i A_i(midpoint) d sigma_i)`; later segments multiply from the left.

use serde::Serialize;

use crate::charts::{ChartKind, Component, ConnectionSource, ControlPoint};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::quadrature;

/// Default number of midpoint steps per loop edge.
pub const DEFAULT_STEPS: usize = 200;
/// Largest steps per edge reached by self-convergence doubling.
pub const MAX_STEPS: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Route {
    PathOrdered,
    Surface,
    Stokes,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Holonomy {
    pub route: Route,
    #[serde(serialize_with = "crate::linalg::serialize_matrix")]
    pub matrix: CMatrix,
    pub unitarity_defect: f64,
    pub steps_per_edge: Option<usize>,
    /// Change under the last doubling of steps per edge.
    pub self_convergence: Option<f64>,
    /// Continuously tracked phases of the diagonal entries.
    pub tracked_phases: Option<Vec<f64>>,
}

impl Holonomy {
    pub fn new(route: Route, matrix: CMatrix) -> Self {
        Self {
            route,
            unitarity_defect: linalg::unitarity_defect(&matrix),
            matrix,
            steps_per_edge: None,
            self_convergence: None,
            tracked_phases: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

fn is_periodic(c: Component) -> bool {
    matches!(
        c,
        Component::Theta0 | Component::Theta1 | Component::Theta2 | Component::Theta3
    )
}

/// Ordered polyline in one chart's coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoopPath {
    chart: ChartKind,
    vertices: Vec<Vec<f64>>,
    steps_per_edge: usize,
}

impl LoopPath {
    pub fn new(
        chart: ChartKind,
        vertices: Vec<ControlPoint>,
        steps_per_edge: usize,
    ) -> Result<Self> {
        if let Some(p) = vertices.iter().find(|p| p.chart() != chart) {
            return Err(Error::InvalidParameter(format!(
                "vertex on {} in a {chart} loop",
                p.chart()
            )));
        }
        Self::from_coords(
            chart,
            vertices.iter().map(|p| p.coords().to_vec()).collect(),
            steps_per_edge,
        )
    }

    /// Loop from raw coordinate tuples.
    pub fn from_coords(
        chart: ChartKind,
        vertices: Vec<Vec<f64>>,
        steps_per_edge: usize,
    ) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::InvalidParameter(
                "a loop needs at least two vertices".into(),
            ));
        }
        if steps_per_edge == 0 {
            return Err(Error::InvalidParameter(
                "steps per edge must be at least one".into(),
            ));
        }
        for v in &vertices {
            if v.len() != chart.n_coords() || v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "bad vertex {v:?} for {chart}"
                )));
            }
        }
        Ok(Self {
            chart,
            vertices,
            steps_per_edge,
        })
    }

    /// Axis-aligned rectangle in the plane `(first, second)` through `base`,
    /// starting at `(a1, a2)`; counterclockwise runs along `first` first.
    pub fn rectangle(
        chart: ChartKind,
        base: &[f64],
        plane: (Component, Component),
        (a1, b1): (f64, f64),
        (a2, b2): (f64, f64),
        counterclockwise: bool,
        steps_per_edge: usize,
    ) -> Result<Self> {
        let (i, j) = plane_indices(chart, plane)?;
        let corner = |u: f64, v: f64| {
            let mut c = base.to_vec();
            c[i] = u;
            c[j] = v;
            c
        };
        let mut verts = vec![
            corner(a1, a2),
            corner(b1, a2),
            corner(b1, b2),
            corner(a1, b2),
            corner(a1, a2),
        ];
        if !counterclockwise {
            verts.reverse();
        }
        Self::from_coords(chart, verts, steps_per_edge)
    }

    /// Regular polygon with `n_vertices` corners approximating a circle in
    /// the plane, traversed counterclockwise from angle zero.
    pub fn circle(
        chart: ChartKind,
        base: &[f64],
        plane: (Component, Component),
        center: (f64, f64),
        radius: f64,
        n_vertices: usize,
        steps_per_edge: usize,
    ) -> Result<Self> {
        let (i, j) = plane_indices(chart, plane)?;
        if n_vertices < 3 {
            return Err(Error::InvalidParameter(
                "a circle needs at least three vertices".into(),
            ));
        }
        let verts = (0..=n_vertices)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * (k % n_vertices) as f64 / n_vertices as f64;
                let mut c = base.to_vec();
                c[i] = center.0 + radius * t.cos();
                c[j] = center.1 + radius * t.sin();
                c
            })
            .collect();
        Self::from_coords(chart, verts, steps_per_edge)
    }

    pub fn chart(&self) -> ChartKind {
        self.chart
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn steps_per_edge(&self) -> usize {
        self.steps_per_edge
    }

    pub fn with_steps(&self, steps_per_edge: usize) -> Self {
        Self {
            steps_per_edge: steps_per_edge.max(1),
            ..self.clone()
        }
    }

    /// First and last vertices agree, angles modulo `2 pi`.
    pub fn is_closed(&self) -> bool {
        let first = &self.vertices[0];
        let last = self.vertices.last().expect("non-empty");
        let two_pi = 2.0 * std::f64::consts::PI;
        self.chart
            .coordinates()
            .iter()
            .zip(first.iter().zip(last))
            .all(|(&c, (a, b))| {
                let d = b - a;
                if is_periodic(c) {
                    (d - two_pi * (d / two_pi).round()).abs() < 1e-12
                } else {
                    d.abs() < 1e-12
                }
            })
    }

    pub fn reversed(&self) -> Self {
        let mut v = self.vertices.clone();
        v.reverse();
        Self {
            vertices: v,
            ..self.clone()
        }
    }

    /// `self` followed by `next`; both must start at the same point.
    pub fn then(&self, next: &LoopPath) -> Result<Self> {
        if next.chart != self.chart {
            return Err(Error::InvalidParameter("loops on different charts".into()));
        }
        let end = self.vertices.last().expect("non-empty");
        if linalg_dist(end, &next.vertices[0]) > 1e-12 {
            return Err(Error::InvalidParameter(
                "loops do not share a base point".into(),
            ));
        }
        let mut v = self.vertices.clone();
        v.extend(next.vertices.iter().skip(1).cloned());
        Ok(Self {
            vertices: v,
            ..self.clone()
        })
    }

    fn edges(&self) -> impl Iterator<Item = (&Vec<f64>, &Vec<f64>)> {
        self.vertices.iter().zip(self.vertices.iter().skip(1))
    }
}

fn linalg_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub(crate) fn plane_indices(
    chart: ChartKind,
    (p, q): (Component, Component),
) -> Result<(usize, usize)> {
    let i = chart.index_of(p);
    let j = chart.index_of(q);
    match (i, j) {
        (Some(i), Some(j)) if i != j => Ok((i, j)),
        _ => Err(Error::PlaneMismatch(format!(
            "({p}, {q}) is not a coordinate plane of {chart}"
        ))),
    }
}

fn small_exp(g: &CMatrix) -> CMatrix {
    linalg::expm_general(g)
}

fn wrap(phi: f64) -> f64 {
    crate::optics::wrap_angle(phi)
}

/// Ordered product over the loop at its own step count.
pub fn path_ordered_holonomy<S: ConnectionSource + ?Sized>(
    path: &LoopPath,
    source: &S,
) -> Result<Holonomy> {
    if source.chart() != path.chart {
        return Err(Error::InvalidParameter(format!(
            "{} connection on a {} loop",
            source.chart(),
            path.chart
        )));
    }
    if !path.is_closed() {
        return Err(Error::OpenLoop);
    }
    let chart = path.chart;
    let d = chart.block_dim();
    let coords = chart.coordinates();
    let n = path.steps_per_edge;
    let mut prod = linalg::identity(d);
    let mut phases = vec![0.0; d];
    for (v0, v1) in path.edges() {
        let delta: Vec<f64> = v0.iter().zip(v1).map(|(a, b)| (b - a) / n as f64).collect();
        let moving: Vec<usize> = (0..delta.len()).filter(|&i| delta[i] != 0.0).collect();
        if moving.is_empty() {
            continue;
        }
        for k in 0..n {
            let t = (k as f64 + 0.5) / n as f64;
            let mid: Vec<f64> = v0.iter().zip(v1).map(|(a, b)| a + (b - a) * t).collect();
            let mut g = CMatrix::zeros(d, d);
            for &i in &moving {
                g += source.component(&mid, coords[i])? * linalg::c64(delta[i], 0.0);
            }
            let next = small_exp(&g) * &prod;
            for (r, ph) in phases.iter_mut().enumerate() {
                let (old, new) = (prod[(r, r)], next[(r, r)]);
                if old.norm() > 0.0 && new.norm() > 0.0 {
                    *ph += wrap((new / old).arg());
                }
            }
            prod = next;
        }
    }
    let mut h = Holonomy::new(Route::PathOrdered, prod);
    h.steps_per_edge = Some(n);
    h.tracked_phases = Some(phases);
    Ok(h)
}

/// Doubles steps per edge, starting from the loop's own count, until the
/// product changes by less than `tol`.
pub fn path_ordered_converged<S: ConnectionSource + ?Sized>(
    path: &LoopPath,
    source: &S,
    tol: f64,
) -> Result<Holonomy> {
    let mut steps = path.steps_per_edge;
    let mut prev = path_ordered_holonomy(path, source)?;
    loop {
        steps *= 2;
        let mut next = path_ordered_holonomy(&path.with_steps(steps), source)?;
        let change = linalg::max_abs_diff(&prev.matrix, &next.matrix);
        next.self_convergence = Some(change);
        if change < tol {
            return Ok(next);
        }
        if steps * 2 > MAX_STEPS {
            return Err(Error::Convergence {
                what: "path-ordered holonomy under step doubling".into(),
                change,
                tolerance: tol,
            });
        }
        prev = next;
    }
}

/// Which line element multiplies the squeeze Berry integrand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SqueezeDifferential {
    Theta1,
    R1,
}

/// `((2n+1)/4) * oint (cosh 4 r1 - 1) d(sigma)` along a single-mode loop,
/// `sigma` being `theta1` or `r1`.
pub fn berry_phase_squeeze(
    path: &LoopPath,
    level: usize,
    differential: SqueezeDifferential,
) -> Result<f64> {
    if path.chart != ChartKind::SingleModeDS {
        return Err(Error::PlaneMismatch(
            "squeeze phases live on the single-mode chart".into(),
        ));
    }
    if level > 1 {
        return Err(Error::InvalidParameter(format!(
            "level {level} is outside the code block"
        )));
    }
    if !path.is_closed() {
        return Err(Error::OpenLoop);
    }
    let rule = quadrature::gauss_legendre_on(32, 0.0, 1.0);
    let mut total = 0.0;
    for (v0, v1) in path.edges() {
        let d_r = v1[2] - v0[2];
        let d_sigma = match differential {
            SqueezeDifferential::Theta1 => v1[3] - v0[3],
            SqueezeDifferential::R1 => d_r,
        };
        if d_sigma == 0.0 {
            continue;
        }
        total += rule
            .iter()
            .map(|&(t, w)| w * ((4.0 * (v0[2] + d_r * t)).cosh() - 1.0))
            .sum::<f64>()
            * d_sigma;
    }
    Ok((2 * level + 1) as f64 / 4.0 * total)
}

/// `oint (y dx - x dy)` along the displacement part of a single-mode loop.
pub fn displacement_area_integral(path: &LoopPath) -> f64 {
    path.edges()
        .map(|(a, b)| {
            // exact on straight segments
            let (x0, y0, x1, y1) = (a[0], a[1], b[0], b[1]);
            let ym = (y0 + y1) / 2.0;
            let xm = (x0 + x1) / 2.0;
            ym * (x1 - x0) - xm * (y1 - y0)
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisplacementPhases {
    /// Tracked phases of the `|0>` and `|1>` diagonal entries.
    pub phases: [f64; 2],
    pub difference: f64,
    /// `oint (y dx - x dy)`.
    pub area_integral: f64,
    pub holonomy: Holonomy,
}

/// Diagonal phases of the path-ordered holonomy of a loop in `(x, y)` with
/// the squeezer switched off.
pub fn berry_phase_displace<S: ConnectionSource + ?Sized>(
    path: &LoopPath,
    source: &S,
    tol: f64,
) -> Result<DisplacementPhases> {
    if path.chart != ChartKind::SingleModeDS {
        return Err(Error::PlaneMismatch(
            "displacement phases live on the single-mode chart".into(),
        ));
    }
    if path.vertices.iter().any(|v| v[2] != 0.0) {
        return Err(Error::InvalidParameter("r1 must stay at zero".into()));
    }
    let h = path_ordered_converged(path, source, tol)?;
    let ph = h
        .tracked_phases
        .clone()
        .expect("path-ordered route tracks phases");
    Ok(DisplacementPhases {
        phases: [ph[0], ph[1]],
        difference: ph[0] - ph[1],
        area_integral: displacement_area_integral(path),
        holonomy: h,
    })
}
