//! Holonomies of axis-aligned rectangles as tau-ordered surface integrals.
//!
//! For the rectangle from corner `(s0, t0)` to `(s1, t1)` traversed along
//! `sigma` first, with the ordering of [`crate::holonomy`],
//!
//! `W = P_tau exp( int dtau int dsigma T^-1 K T )`, later `tau` to the left,
//!
//! where `K = d_sigma A_tau - d_tau A_sigma - [A_sigma, A_tau]` and
//! `T(sigma, tau)` transports from the base corner up the `sigma = s0` edge
//! and then along the `tau` slice.

use serde::Serialize;

use crate::charts::{self, ChartKind, Component, ConnectionSource};
use crate::error::{Error, Result};
use crate::holonomy::{plane_indices, Holonomy, LoopPath, Route};
use crate::linalg::{self, c64, CMatrix};
use crate::quadrature;
use crate::surface::PlanarRegion;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StokesOptions {
    /// Longest fourth-order Magnus slice along `tau`.
    pub tau_step: f64,
    /// Gauss-Legendre order along `sigma`.
    pub sigma_order: usize,
    /// Longest Magnus step for the Wilson lines inside `T`.
    pub line_step: f64,
}

impl Default for StokesOptions {
    fn default() -> Self {
        Self {
            tau_step: 0.02,
            sigma_order: 32,
            line_step: 0.01,
        }
    }
}

const GL2: f64 = 0.288_675_134_594_812_9; // sqrt(3) / 6

fn magnus_step(a1: &CMatrix, a2: &CMatrix, h: f64) -> CMatrix {
    let omega = (a1 + a2) * c64(h / 2.0, 0.0)
        + linalg::commutator(a2, a1) * c64(3f64.sqrt() * h * h / 12.0, 0.0);
    linalg::expm_general(&omega)
}

/// Wilson line along one coordinate from `s` to `e`, applied on the left of `u`.
fn transport<S: ConnectionSource + ?Sized>(
    source: &S,
    at: &[f64],
    index: usize,
    s: f64,
    e: f64,
    max_step: f64,
    u: &CMatrix,
) -> Result<CMatrix> {
    let len = e - s;
    if len == 0.0 {
        return Ok(u.clone());
    }
    let n = (len.abs() / max_step).ceil().max(1.0) as usize;
    let h = len / n as f64;
    let comp = source.chart().coordinates()[index];
    let mut out = u.clone();
    let mut p = at.to_vec();
    for k in 0..n {
        let s0 = s + h * k as f64;
        p[index] = s0 + h * (0.5 - GL2);
        let a1 = source.component(&p, comp)?;
        p[index] = s0 + h * (0.5 + GL2);
        let a2 = source.component(&p, comp)?;
        out = magnus_step(&a1, &a2, h) * out;
    }
    Ok(out)
}

/// `K = d_sigma A_tau - d_tau A_sigma - [A_sigma, A_tau]`.
fn transport_curvature<S: ConnectionSource + ?Sized>(
    source: &S,
    at: &[f64],
    sigma: Component,
    tau: Component,
) -> Result<CMatrix> {
    let f = charts::field_strength(source, at, sigma, tau)?.matrix;
    let a_s = source.component(at, sigma)?;
    let a_t = source.component(at, tau)?;
    Ok(f - linalg::commutator(&a_s, &a_t) * c64(2.0, 0.0))
}

fn invert(m: &CMatrix) -> CMatrix {
    m.clone().try_inverse().expect("transport is invertible")
}

/// Surface-ordered evaluation of the rectangle's holonomy.
pub fn stokes_holonomy<S: ConnectionSource + ?Sized>(
    region: &PlanarRegion,
    source: &S,
    opts: &StokesOptions,
) -> Result<Holonomy> {
    let chart = region.chart();
    if source.chart() != chart {
        return Err(Error::InvalidParameter(format!(
            "{} connection on a {chart} region",
            source.chart()
        )));
    }
    let (sigma, tau) = region.plane();
    let (i, j) = plane_indices(chart, (sigma, tau))?;
    let ((s0, t0), (s1, t1)) = region.corners();
    let d = chart.block_dim();
    let mut w = linalg::identity(d);
    if s0 != s1 && t0 != t1 {
        let n = ((t1 - t0).abs() / opts.tau_step).ceil().max(1.0) as usize;
        let h = (t1 - t0) / n as f64;
        let sigma_nodes = quadrature::gauss_legendre_on(opts.sigma_order, s0, s1);
        let mut left = region.base().to_vec();
        left[i] = s0;
        let mut v = linalg::identity(d);
        let mut v_at = t0;
        let slice_integral = |tau_val: f64, v: &CMatrix| -> Result<CMatrix> {
            let mut p = region.base().to_vec();
            p[j] = tau_val;
            let mut acc = CMatrix::zeros(d, d);
            let mut r = linalg::identity(d);
            let mut r_at = s0;
            for &(s, wgt) in &sigma_nodes {
                p[i] = r_at;
                r = transport(source, &p, i, r_at, s, opts.line_step, &r)?;
                r_at = s;
                p[i] = s;
                let t = &r * v;
                let k = transport_curvature(source, &p, sigma, tau)?;
                acc += invert(&t) * k * t * c64(wgt, 0.0);
            }
            Ok(acc)
        };
        for slice in 0..n {
            let ta = t0 + h * slice as f64;
            let mut ms = Vec::with_capacity(2);
            for node in [ta + h * (0.5 - GL2), ta + h * (0.5 + GL2)] {
                left[j] = v_at;
                v = transport(source, &left, j, v_at, node, opts.line_step, &v)?;
                v_at = node;
                ms.push(slice_integral(node, &v)?);
            }
            w = magnus_step(&ms[0], &ms[1], h) * w;
        }
    }
    if region.is_reversed() {
        w = invert(&w);
    }
    Ok(Holonomy::new(Route::Stokes, w))
}

/// Stokes evaluation for a loop that is the boundary of an axis-aligned
/// rectangle traversed from one corner.
pub fn stokes_for_loop<S: ConnectionSource + ?Sized>(
    path: &LoopPath,
    source: &S,
    opts: &StokesOptions,
) -> Result<Holonomy> {
    let v = path.vertices();
    if v.len() != 5 || !path.is_closed() {
        return Err(Error::NotAxisAligned);
    }
    let chart = path.chart();
    let moving =
        |a: &[f64], b: &[f64]| -> Vec<usize> { (0..a.len()).filter(|&k| a[k] != b[k]).collect() };
    let e0 = moving(&v[0], &v[1]);
    let e1 = moving(&v[1], &v[2]);
    if e0.len() != 1 || e1.len() != 1 || e0[0] == e1[0] {
        return Err(Error::NotAxisAligned);
    }
    let (i, j) = (e0[0], e1[0]);
    let rect = v[2][i] == v[1][i] && v[3][i] == v[0][i] && v[3][j] == v[2][j] && v[4] == v[0];
    if !rect || moving(&v[2], &v[3]) != vec![i] || moving(&v[3], &v[4]) != vec![j] {
        return Err(Error::NotAxisAligned);
    }
    let coords = chart.coordinates();
    // the first edge runs along the region's first axis
    let region = PlanarRegion::new(
        chart,
        (coords[i], coords[j]),
        v[0].clone(),
        (v[0][i], v[0][j]),
        (v[2][i], v[2][j]),
    )?;
    stokes_holonomy(&region, source, opts)
}

/// The two interferometer rectangles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Su2Rect {
    /// `(alpha, beta)` plane, `gamma = 0`.
    C1,
    /// `(alpha, gamma)` plane, `beta = 0`.
    C2,
}

impl Su2Rect {
    pub fn plane(&self) -> (Component, Component) {
        match self {
            Su2Rect::C1 => (Component::Alpha, Component::Beta),
            Su2Rect::C2 => (Component::Alpha, Component::Gamma),
        }
    }

    fn generator(&self) -> CMatrix {
        match self {
            Su2Rect::C1 => linalg::sigma_12(2),
            Su2Rect::C2 => linalg::sigma_12(3),
        }
    }
}

/// Rectangle `(0,0) -> (pi,0) -> (pi,angle) -> (0,angle)`, counterclockwise
/// for positive `angle`.
pub fn su2_rect_region(kind: Su2Rect, angle: f64) -> Result<PlanarRegion> {
    PlanarRegion::new(
        ChartKind::SU2Interferometer,
        kind.plane(),
        vec![0.0; 3],
        (0.0, 0.0),
        (std::f64::consts::PI, angle),
    )
}

/// `exp(-2 i angle sigma^12)` with `sigma_2^12` for `C1` and `sigma_3^12`
/// for `C2`: the holonomy of [`su2_rect_region`] traversed in reverse.
pub fn su2_rect_gate(kind: Su2Rect, angle: f64) -> Holonomy {
    let g = kind.generator() * c64(0.0, -2.0 * angle);
    Holonomy::new(
        Route::Stokes,
        linalg::expm_anti_hermitian(&g).expect("generator is Hermitian"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charts::AnalyticSource;
    use crate::holonomy::path_ordered_holonomy;
    use crate::linalg::max_abs_diff;
    use std::f64::consts::PI;

    fn su2() -> AnalyticSource {
        AnalyticSource::canonical(ChartKind::SU2Interferometer)
    }

    #[test]
    fn zero_area_is_identity() {
        let r = su2_rect_region(Su2Rect::C1, 0.0).unwrap();
        let h = stokes_holonomy(&r, &su2(), &StokesOptions::default()).unwrap();
        assert!(max_abs_diff(&h.matrix, &linalg::identity(4)) < 1e-15);
    }

    #[test]
    fn c1_matches_closed_form_up_to_orientation() {
        let beta = 0.3;
        let r = su2_rect_region(Su2Rect::C1, beta).unwrap();
        let h = stokes_holonomy(&r, &su2(), &StokesOptions::default()).unwrap();
        assert!(max_abs_diff(&h.matrix, &su2_rect_gate(Su2Rect::C1, -beta).matrix) < 1e-8);
        let hr = stokes_holonomy(&r.reversed(), &su2(), &StokesOptions::default()).unwrap();
        assert!(max_abs_diff(&hr.matrix, &su2_rect_gate(Su2Rect::C1, beta).matrix) < 1e-8);
    }

    #[test]
    fn theorem_holds_on_generic_rectangle() {
        let r = PlanarRegion::new(
            ChartKind::SU2Interferometer,
            (Component::Beta, Component::Gamma),
            vec![0.4, 0.0, 0.0],
            (0.2, -0.1),
            (1.1, 0.8),
        )
        .unwrap();
        let s = stokes_holonomy(&r, &su2(), &StokesOptions::default()).unwrap();
        let p = path_ordered_holonomy(&r.boundary(50).unwrap(), &su2()).unwrap();
        assert!(max_abs_diff(&s.matrix, &p.matrix) < 1e-8);
        assert!(s.unitarity_defect < 1e-10);
    }

    #[test]
    fn loop_conversion() {
        let l = r_loop();
        let s = stokes_for_loop(&l, &su2(), &StokesOptions::default()).unwrap();
        let p = path_ordered_holonomy(&l, &su2()).unwrap();
        assert!(max_abs_diff(&s.matrix, &p.matrix) < 1e-8);
        let tri = LoopPath::from_coords(
            ChartKind::SU2Interferometer,
            vec![
                vec![0.0; 3],
                vec![1.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0],
                vec![0.0; 3],
            ],
            10,
        )
        .unwrap();
        assert_eq!(
            stokes_for_loop(&tri, &su2(), &StokesOptions::default()),
            Err(Error::NotAxisAligned)
        );
    }

    fn r_loop() -> LoopPath {
        LoopPath::from_coords(
            ChartKind::SU2Interferometer,
            vec![
                vec![0.0; 3],
                vec![0.0, 0.0, 0.9],
                vec![PI, 0.0, 0.9],
                vec![PI, 0.0, 0.0],
                vec![0.0; 3],
            ],
            10,
        )
        .unwrap()
    }
}
