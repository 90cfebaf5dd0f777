//! Planar rectangles and the abelian surface-integral route for the five
//! commuting planes.

use serde::Serialize;

use crate::charts::{ChartKind, Component};
use crate::error::{Error, Result};
use crate::holonomy::{plane_indices, Holonomy, LoopPath, Route};
use crate::linalg::{self, c64, CMatrix};
use crate::quadrature;

/// The five planes on which the two connection components commute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum SigmaKind {
    /// `(x, r1)` at `theta1 = 0`.
    I,
    /// `(y, r1)` at `theta1 = 0`.
    II,
    /// `(r1, theta1)`.
    III,
    /// `(r2, r3)` at `theta2 = theta3 = 0`.
    IV,
    /// `(r2, r3)` at `theta2 = 0`, `theta3 = 3 pi / 2`.
    V,
}

impl SigmaKind {
    pub const ALL: [SigmaKind; 5] = [
        SigmaKind::I,
        SigmaKind::II,
        SigmaKind::III,
        SigmaKind::IV,
        SigmaKind::V,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SigmaKind::I => "I",
            SigmaKind::II => "II",
            SigmaKind::III => "III",
            SigmaKind::IV => "IV",
            SigmaKind::V => "V",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|k| k.name().eq_ignore_ascii_case(s))
    }

    pub fn chart(&self) -> ChartKind {
        match self {
            SigmaKind::I | SigmaKind::II | SigmaKind::III => ChartKind::SingleModeDS,
            SigmaKind::IV | SigmaKind::V => ChartKind::TwoModeNM,
        }
    }

    pub fn plane(&self) -> (Component, Component) {
        match self {
            SigmaKind::I => (Component::X, Component::R1),
            SigmaKind::II => (Component::Y, Component::R1),
            SigmaKind::III => (Component::R1, Component::Theta1),
            SigmaKind::IV | SigmaKind::V => (Component::R2, Component::R3),
        }
    }

    /// Required values of the frozen angles, as `(coordinate index, value)`.
    pub fn frozen_angles(&self) -> &'static [(usize, f64)] {
        match self {
            SigmaKind::I | SigmaKind::II => &[(3, 0.0)],
            SigmaKind::III => &[],
            SigmaKind::IV => &[(1, 0.0), (3, 0.0)],
            SigmaKind::V => &[(1, 0.0), (3, 3.0 * std::f64::consts::FRAC_PI_2)],
        }
    }

    /// Origin of the chart with the frozen angles set.
    pub fn standard_base(&self) -> Vec<f64> {
        let mut base = self.chart().origin();
        for &(i, v) in self.frozen_angles() {
            base[i] = v;
        }
        base
    }

    fn check_frozen(&self, base: &[f64]) -> Result<()> {
        let two_pi = 2.0 * std::f64::consts::PI;
        for &(i, v) in self.frozen_angles() {
            let d = base[i] - v;
            if (d - two_pi * (d / two_pi).round()).abs() > 1e-12 {
                return Err(Error::PlaneMismatch(format!(
                    "Sigma_{} needs {} = {v}, got {}",
                    self.name(),
                    self.chart().coordinates()[i],
                    base[i]
                )));
            }
        }
        Ok(())
    }

    /// Density in the plane coordinates `(u, v)`.
    pub fn density(&self, u: f64, v: f64) -> f64 {
        match self {
            SigmaKind::I => 2.0 * (-2.0 * v).exp(),
            SigmaKind::II => 2.0 * (2.0 * v).exp(),
            SigmaKind::III => (4.0 * u).sinh(),
            SigmaKind::IV | SigmaKind::V => 2.0 * (2.0 * u).sinh(),
        }
    }

    /// `int_{a1}^{b1} du int_{a2}^{b2} dv density`, signed.
    pub fn rectangle_integral(&self, (a1, b1): (f64, f64), (a2, b2): (f64, f64)) -> f64 {
        match self {
            SigmaKind::I => (b1 - a1) * ((-2.0 * a2).exp() - (-2.0 * b2).exp()),
            SigmaKind::II => (b1 - a1) * ((2.0 * b2).exp() - (2.0 * a2).exp()),
            SigmaKind::III => ((4.0 * b1).cosh() - (4.0 * a1).cosh()) / 4.0 * (b2 - a2),
            SigmaKind::IV | SigmaKind::V => ((2.0 * b1).cosh() - (2.0 * a1).cosh()) * (b2 - a2),
        }
    }

    /// Hermitian generator `G` with `Gamma = exp(-i G Sigma)`, fixed by the
    /// field strength `F = -i G density`.
    pub fn generator(&self) -> CMatrix {
        match self {
            SigmaKind::I => linalg::pauli_y(),
            SigmaKind::II => linalg::pauli_x(),
            SigmaKind::III => CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                c64(-1.0, 0.0),
                c64(-3.0, 0.0),
            ])),
            SigmaKind::IV => linalg::sigma_12(2),
            SigmaKind::V => linalg::sigma_12(1),
        }
    }

    /// Name of the generator as used in the code.
    pub fn generator_label(&self) -> &'static str {
        match self {
            SigmaKind::I => "sigma_2",
            SigmaKind::II => "sigma_1",
            SigmaKind::III => "s_3 = -diag(1, 3)",
            SigmaKind::IV => "sigma_2^12",
            SigmaKind::V => "sigma_1^12",
        }
    }

    /// Closed-form field strength `-i G density` at chart coordinates.
    pub fn field_strength(&self, coords: &[f64]) -> Result<CMatrix> {
        let (i, j) = plane_indices(self.chart(), self.plane())?;
        let rho = self.density(coords[i], coords[j]);
        Ok(self.generator() * c64(0.0, -rho))
    }
}

/// Rectangle traversed from corner `from` along the first plane axis to
/// `to.0`, then along the second to `to.1`, and back; `reversed` flips the
/// traversal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanarRegion {
    chart: ChartKind,
    plane: (Component, Component),
    base: Vec<f64>,
    from: (f64, f64),
    to: (f64, f64),
    reversed: bool,
    quadrature_order: usize,
}

impl PlanarRegion {
    pub fn new(
        chart: ChartKind,
        plane: (Component, Component),
        base: Vec<f64>,
        from: (f64, f64),
        to: (f64, f64),
    ) -> Result<Self> {
        let (i, j) = plane_indices(chart, plane)?;
        if base.len() != chart.n_coords() {
            return Err(Error::InvalidParameter(format!(
                "base point has {} coordinates",
                base.len()
            )));
        }
        for (k, v) in [(i, from.0), (i, to.0), (j, from.1), (j, to.1)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter("non-finite bound".into()));
            }
            if chart.coordinates()[k].is_radial() && v < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{} bound {v} is negative",
                    chart.coordinates()[k]
                )));
            }
        }
        Ok(Self {
            chart,
            plane,
            base,
            from,
            to,
            reversed: false,
            quadrature_order: 32,
        })
    }

    /// Rectangle on the plane of `kind` through its standard base point.
    pub fn for_kind(kind: SigmaKind, from: (f64, f64), to: (f64, f64)) -> Result<Self> {
        Self::new(kind.chart(), kind.plane(), kind.standard_base(), from, to)
    }

    pub fn with_quadrature_order(mut self, order: usize) -> Self {
        self.quadrature_order = order.max(1);
        self
    }

    pub fn reversed(&self) -> Self {
        Self {
            reversed: !self.reversed,
            ..self.clone()
        }
    }

    pub fn chart(&self) -> ChartKind {
        self.chart
    }

    pub fn plane(&self) -> (Component, Component) {
        self.plane
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn corners(&self) -> ((f64, f64), (f64, f64)) {
        (self.from, self.to)
    }

    pub fn is_reversed(&self) -> bool {
        self.reversed
    }

    pub fn quadrature_order(&self) -> usize {
        self.quadrature_order
    }

    /// `+1` counterclockwise in `(first, second)`, `-1` clockwise, `0` if flat.
    pub fn orientation(&self) -> f64 {
        let s = ((self.to.0 - self.from.0) * (self.to.1 - self.from.1)).signum();
        let flat = self.to.0 == self.from.0 || self.to.1 == self.from.1;
        if flat {
            0.0
        } else if self.reversed {
            -s
        } else {
            s
        }
    }

    pub fn boundary(&self, steps_per_edge: usize) -> Result<LoopPath> {
        let (i, j) = plane_indices(self.chart, self.plane)?;
        let corner = |u: f64, v: f64| {
            let mut c = self.base.clone();
            c[i] = u;
            c[j] = v;
            c
        };
        let (a, b) = (self.from, self.to);
        let mut verts = vec![
            corner(a.0, a.1),
            corner(b.0, a.1),
            corner(b.0, b.1),
            corner(a.0, b.1),
            corner(a.0, a.1),
        ];
        if self.reversed {
            verts.reverse();
        }
        LoopPath::from_coords(self.chart, verts, steps_per_edge)
    }

    fn check_kind(&self, kind: SigmaKind) -> Result<()> {
        if self.chart != kind.chart() || self.plane != kind.plane() {
            return Err(Error::PlaneMismatch(format!(
                "region on ({}, {}) of {} does not carry Sigma_{}",
                self.plane.0,
                self.plane.1,
                self.chart,
                kind.name()
            )));
        }
        kind.check_frozen(&self.base)
    }

    fn sign(&self) -> f64 {
        if self.reversed {
            -1.0
        } else {
            1.0
        }
    }
}

/// Closed-form signed surface integral of the density of `kind`.
pub fn surface_sigma(region: &PlanarRegion, kind: SigmaKind) -> Result<f64> {
    region.check_kind(kind)?;
    let ((a1, a2), (b1, b2)) = (region.from, region.to);
    Ok(region.sign() * kind.rectangle_integral((a1, b1), (a2, b2)))
}

/// The same integral by tensor Gauss-Legendre quadrature.
pub fn surface_sigma_quadrature(region: &PlanarRegion, kind: SigmaKind) -> Result<f64> {
    region.check_kind(kind)?;
    let ((a1, a2), (b1, b2)) = (region.from, region.to);
    Ok(region.sign()
        * quadrature::integrate_2d(
            |u, v| kind.density(u, v),
            (a1, b1),
            (a2, b2),
            region.quadrature_order,
        ))
}

/// `exp(-i G Sigma)` on the chart's code block.
pub fn holonomy_from_sigma(kind: SigmaKind, sigma: f64) -> Holonomy {
    let g = kind.generator() * c64(0.0, -sigma);
    let m = linalg::expm_anti_hermitian(&g).expect("generator is Hermitian");
    Holonomy::new(Route::Surface, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charts::AnalyticSource;
    use crate::holonomy::path_ordered_holonomy;
    use crate::linalg::max_abs_diff;
    use std::f64::consts::PI;

    #[test]
    fn closed_forms_match_quadrature() {
        let cases = [
            (SigmaKind::I, (0.0, 0.0), (1.0, 0.7)),
            (SigmaKind::II, (-0.3, 0.1), (0.6, 0.5)),
            (SigmaKind::III, (0.0, 0.0), (0.5, 2.0 * PI)),
            (SigmaKind::IV, (0.0, 0.0), (0.3, 1.0)),
            (SigmaKind::V, (0.1, 0.8), (0.4, 0.2)),
        ];
        for (k, a, b) in cases {
            let r = PlanarRegion::for_kind(k, a, b).unwrap();
            let exact = surface_sigma(&r, k).unwrap();
            let quad = surface_sigma_quadrature(&r, k).unwrap();
            assert!((exact - quad).abs() < 1e-12, "{k:?}");
        }
    }

    #[test]
    fn reference_integrals() {
        let r = PlanarRegion::for_kind(SigmaKind::I, (0.0, 0.0), (1.0, 20.0)).unwrap();
        assert!((surface_sigma(&r, SigmaKind::I).unwrap() - 1.0).abs() < 1e-15);
        let r = PlanarRegion::for_kind(SigmaKind::III, (0.0, 0.0), (0.5, 2.0 * PI)).unwrap();
        assert!(
            (surface_sigma(&r, SigmaKind::III).unwrap() - 2.0 * PI * (2f64.cosh() - 1.0) / 4.0)
                .abs()
                < 1e-13
        );
        let r = PlanarRegion::for_kind(SigmaKind::IV, (0.0, 0.0), (0.3, 1.0)).unwrap();
        assert!((surface_sigma(&r, SigmaKind::IV).unwrap() - (0.6f64.cosh() - 1.0)).abs() < 1e-15);
        assert!(
            (surface_sigma(&r.reversed(), SigmaKind::IV).unwrap() + (0.6f64.cosh() - 1.0)).abs()
                < 1e-15
        );
    }

    #[test]
    fn constraint_mismatch() {
        let r = PlanarRegion::new(
            ChartKind::SingleModeDS,
            (Component::X, Component::R1),
            vec![0.0, 0.0, 0.0, 0.3],
            (0.0, 0.0),
            (1.0, 1.0),
        )
        .unwrap();
        assert!(matches!(
            surface_sigma(&r, SigmaKind::I),
            Err(Error::PlaneMismatch(_))
        ));
        assert!(matches!(
            surface_sigma(&r, SigmaKind::II),
            Err(Error::PlaneMismatch(_))
        ));
    }

    #[test]
    fn quarter_turn_in_dual_rail_block() {
        let h = holonomy_from_sigma(SigmaKind::IV, PI / 2.0);
        let expect = linalg::sigma_12(2) * c64(0.0, -1.0)
            + CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                linalg::ONE,
                linalg::ZERO,
                linalg::ZERO,
                linalg::ONE,
            ]));
        assert!(max_abs_diff(&h.matrix, &expect) < 1e-14);
        assert!(
            max_abs_diff(
                &holonomy_from_sigma(SigmaKind::II, 0.0).matrix,
                &linalg::identity(2)
            ) < 1e-15
        );
    }

    #[test]
    fn field_strength_forms_match_connection() {
        for k in SigmaKind::ALL {
            let src = AnalyticSource::canonical(k.chart());
            let (i, j) = plane_indices(k.chart(), k.plane()).unwrap();
            let mut c = k.standard_base();
            c[i] += 0.31;
            c[j] += 0.27;
            let f = crate::charts::field_strength(&src, &c, k.plane().0, k.plane().1).unwrap();
            assert!(
                max_abs_diff(&f.matrix, &k.field_strength(&c).unwrap()) < 1e-9,
                "{k:?}"
            );
        }
    }

    #[test]
    fn surface_route_matches_boundary() {
        let r = PlanarRegion::for_kind(SigmaKind::I, (0.0, 0.0), (0.8, 0.6)).unwrap();
        let h = path_ordered_holonomy(
            &r.boundary(200).unwrap(),
            &AnalyticSource::canonical(ChartKind::SingleModeDS),
        )
        .unwrap();
        let s = holonomy_from_sigma(SigmaKind::I, surface_sigma(&r, SigmaKind::I).unwrap());
        assert!(max_abs_diff(&h.matrix, &s.matrix) < 1e-10);
    }
}
