//! Logical encodings, loop planning for target rotations, and composition of
//! holonomic gates on multi-mode spaces.

use serde::{Deserialize, Serialize};

use crate::charts::{AnalyticSource, ChartKind};
use crate::error::{Error, Result};
use crate::fock::{FockSpace, Operator};
use crate::holonomy::{path_ordered_converged, DEFAULT_STEPS};
use crate::linalg::{self, c64, CMatrix, ONE, ZERO};
use crate::stokes::{su2_rect_gate, Su2Rect};
use crate::surface::{holonomy_from_sigma, surface_sigma, PlanarRegion, SigmaKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QubitEncoding {
    /// `{|0>, |1>}` of one mode.
    SingleMode(usize),
    /// `{|01>, |10>}` of a pair of modes.
    DualRail(usize, usize),
}

impl QubitEncoding {
    pub fn dual_rail(a: usize, b: usize) -> Result<Self> {
        if a == b {
            return Err(Error::NonDistinctBeams(vec![a, b]));
        }
        Ok(Self::DualRail(a, b))
    }

    pub fn modes(&self) -> Vec<usize> {
        match *self {
            QubitEncoding::SingleMode(m) => vec![m],
            QubitEncoding::DualRail(a, b) => vec![a, b],
        }
    }

    /// Occupations of the encoding's modes for logical `0` and `1`.
    pub fn logical_occupations(&self, bit: usize) -> Vec<usize> {
        match self {
            QubitEncoding::SingleMode(_) => vec![bit],
            QubitEncoding::DualRail(..) => vec![bit, 1 - bit],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    /// Plane whose holonomy realizes the rotation. The assignment follows the
    /// generators obtained from the field strengths.
    pub fn sigma_kind(&self) -> SigmaKind {
        match self {
            Axis::X => SigmaKind::II,
            Axis::Y => SigmaKind::I,
            Axis::Z => SigmaKind::III,
        }
    }
}

/// Extent of the second plane axis (or the radial one for `Z`) held fixed
/// when inverting the surface integral.
pub const PLAN_FIXED_EXTENT: f64 = 1.0;

/// Rectangle whose signed surface integral equals `angle`.
pub fn plan_rotation(axis: Axis, angle: f64) -> Result<PlanarRegion> {
    if !angle.is_finite() {
        return Err(Error::InvalidParameter(format!("angle {angle}")));
    }
    let kind = axis.sigma_kind();
    let a = angle.abs();
    let r = PLAN_FIXED_EXTENT;
    let region = match kind {
        SigmaKind::I => PlanarRegion::for_kind(kind, (0.0, 0.0), (a / (1.0 - (-2.0 * r).exp()), r)),
        SigmaKind::II => PlanarRegion::for_kind(kind, (0.0, 0.0), (a / ((2.0 * r).exp() - 1.0), r)),
        SigmaKind::III => {
            PlanarRegion::for_kind(kind, (0.0, 0.0), (r, 4.0 * a / ((4.0 * r).cosh() - 1.0)))
        }
        _ => unreachable!("rotations use single-mode planes"),
    }?;
    Ok(if angle < 0.0 {
        region.reversed()
    } else {
        region
    })
}

/// Block unitary of [`plan_rotation`]: `exp(-i angle G)`.
pub fn rotation_gate(axis: Axis, angle: f64) -> Result<CMatrix> {
    let kind = axis.sigma_kind();
    let sigma = surface_sigma(&plan_rotation(axis, angle)?, kind)?;
    Ok(holonomy_from_sigma(kind, sigma).matrix)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GateStep {
    /// Planned single-mode rotation on a qubit.
    Rotation {
        axis: Axis,
        angle: f64,
        qubit: usize,
    },
    /// Interferometer rectangle in closed form between two modes.
    Interferometer {
        rect: Su2Rect,
        angle: f64,
        modes: (usize, usize),
    },
    /// Path-ordered holonomy of an arbitrary rectangle on the given modes.
    Region {
        region: PlanarRegion,
        modes: Vec<usize>,
    },
    /// Exchange of two dual-rail qubits.
    Swap { first: usize, second: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GatePlan {
    pub encodings: Vec<QubitEncoding>,
    pub steps: Vec<GateStep>,
    pub cutoff: usize,
    #[serde(serialize_with = "serialize_optional")]
    pub expected: Option<CMatrix>,
}

fn serialize_optional<S: serde::Serializer>(
    m: &Option<CMatrix>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match m {
        Some(m) => linalg::serialize_matrix(m, s),
        None => s.serialize_none(),
    }
}

impl GatePlan {
    pub fn new(encodings: Vec<QubitEncoding>, cutoff: usize) -> Result<Self> {
        let mut modes: Vec<usize> = encodings.iter().flat_map(|e| e.modes()).collect();
        let n = modes.len();
        modes.sort_unstable();
        modes.dedup();
        if modes.len() != n {
            return Err(Error::NonDistinctBeams(
                encodings.iter().flat_map(|e| e.modes()).collect(),
            ));
        }
        if cutoff < 2 {
            return Err(Error::InvalidParameter(
                "logical states need cutoff >= 2".into(),
            ));
        }
        Ok(Self {
            encodings,
            steps: Vec::new(),
            cutoff,
            expected: None,
        })
    }

    pub fn then(mut self, step: GateStep) -> Self {
        self.steps.push(step);
        self
    }

    pub fn expecting(mut self, u: CMatrix) -> Self {
        self.expected = Some(u);
        self
    }

    pub fn n_modes(&self) -> usize {
        let enc = self.encodings.iter().flat_map(|e| e.modes());
        let steps = self.steps.iter().flat_map(|s| match s {
            GateStep::Rotation { .. } | GateStep::Swap { .. } => Vec::new(),
            GateStep::Interferometer { modes, .. } => vec![modes.0, modes.1],
            GateStep::Region { modes, .. } => modes.clone(),
        });
        enc.chain(steps).max().map_or(1, |m| m + 1)
    }

    pub fn space(&self) -> Result<FockSpace> {
        FockSpace::new(self.n_modes(), self.cutoff)
    }

    /// Flat indices of the logical basis, first qubit most significant.
    pub fn logical_indices(&self, space: FockSpace) -> Result<Vec<usize>> {
        let q = self.encodings.len();
        (0..1usize << q)
            .map(|word| {
                let mut occ = vec![0; space.n_modes()];
                for (k, enc) in self.encodings.iter().enumerate() {
                    let bit = (word >> (q - 1 - k)) & 1;
                    for (m, n) in enc.modes().into_iter().zip(enc.logical_occupations(bit)) {
                        occ[m] = n;
                    }
                }
                space.flat_index(&occ)
            })
            .collect()
    }

    fn qubit(&self, q: usize) -> Result<QubitEncoding> {
        self.encodings
            .get(q)
            .copied()
            .ok_or_else(|| Error::EncodingMismatch(format!("no qubit {q}")))
    }
}

/// Acts with `b` on the states `block` of `modes` and as the identity on
/// every other basis state.
pub fn embed_local(
    space: FockSpace,
    modes: &[usize],
    block: &[Vec<usize>],
    b: &CMatrix,
) -> Result<Operator> {
    for &m in modes {
        space.check_mode(m)?;
    }
    if b.nrows() != block.len() || b.ncols() != block.len() {
        return Err(Error::DimensionMismatch {
            expected: block.len(),
            found: b.nrows(),
        });
    }
    let dim = space.dim();
    let mut out = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        let occ = space.occupations(col);
        let local: Vec<usize> = modes.iter().map(|&m| occ[m]).collect();
        match block.iter().position(|s| *s == local) {
            None => out[(col, col)] = ONE,
            Some(c) => {
                for (r, state) in block.iter().enumerate() {
                    let mut o = occ.clone();
                    for (&m, &n) in modes.iter().zip(state) {
                        o[m] = n;
                    }
                    out[(space.flat_index(&o)?, col)] = b[(r, c)];
                }
            }
        }
    }
    Operator::new(space, out)
}

const PAIR_BLOCK: [[usize; 2]; 4] = [[0, 0], [0, 1], [1, 0], [1, 1]];

fn pair_block() -> Vec<Vec<usize>> {
    PAIR_BLOCK.iter().map(|s| s.to_vec()).collect()
}

fn distinct(modes: &[usize]) -> Result<()> {
    for (i, a) in modes.iter().enumerate() {
        if modes[..i].contains(a) {
            return Err(Error::NonDistinctBeams(modes.to_vec()));
        }
    }
    Ok(())
}

fn step_operator(plan: &GatePlan, step: &GateStep, space: FockSpace) -> Result<Operator> {
    match step {
        GateStep::Rotation { axis, angle, qubit } => match plan.qubit(*qubit)? {
            QubitEncoding::SingleMode(m) => embed_local(
                space,
                &[m],
                &[vec![0], vec![1]],
                &rotation_gate(*axis, *angle)?,
            ),
            QubitEncoding::DualRail(..) => Err(Error::EncodingMismatch(format!(
                "single-mode rotation on dual-rail qubit {qubit}"
            ))),
        },
        GateStep::Interferometer { rect, angle, modes } => {
            distinct(&[modes.0, modes.1])?;
            embed_local(
                space,
                &[modes.0, modes.1],
                &pair_block(),
                &su2_rect_gate(*rect, *angle).matrix,
            )
        }
        GateStep::Region { region, modes } => {
            let chart = region.chart();
            if modes.len() != chart.n_modes() {
                return Err(Error::EncodingMismatch(format!(
                    "{chart} acts on {} modes, got {}",
                    chart.n_modes(),
                    modes.len()
                )));
            }
            distinct(modes)?;
            let source = AnalyticSource::canonical(chart);
            let h = path_ordered_converged(&region.boundary(DEFAULT_STEPS)?, &source, 1e-10)?;
            let block: Vec<Vec<usize>> = match chart {
                ChartKind::SingleModeDS => vec![vec![0], vec![1]],
                _ => pair_block(),
            };
            embed_local(space, modes, &block, &h.matrix)
        }
        GateStep::Swap { first, second } => match (plan.qubit(*first)?, plan.qubit(*second)?) {
            (QubitEncoding::DualRail(a, b), QubitEncoding::DualRail(c, d)) => {
                swap_operator(space, [a, b, c, d])
            }
            _ => Err(Error::EncodingMismatch(
                "swap needs two dual-rail qubits".into(),
            )),
        },
    }
}

/// Interferometer rectangles at `beta = pi/4` on beams `(1, 3)` and
/// `3 pi / 4` on `(2, 4)`.
pub fn swap_operator(space: FockSpace, beams: [usize; 4]) -> Result<Operator> {
    distinct(&beams)?;
    let first = embed_local(
        space,
        &[beams[0], beams[2]],
        &pair_block(),
        &su2_rect_gate(Su2Rect::C1, std::f64::consts::FRAC_PI_4).matrix,
    )?;
    let second = embed_local(
        space,
        &[beams[1], beams[3]],
        &pair_block(),
        &su2_rect_gate(Su2Rect::C1, 3.0 * std::f64::consts::FRAC_PI_4).matrix,
    )?;
    Ok(&second * &first)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GateOutcome {
    #[serde(serialize_with = "linalg::serialize_matrix")]
    pub logical: CMatrix,
    /// Largest norm lost from the logical span over logical inputs.
    pub leakage: f64,
    pub distance_to_expected: Option<f64>,
    pub unitarity_defect: f64,
}

/// Ordered product of the plan's steps, first step acting first.
pub fn compose_plan(plan: &GatePlan) -> Result<GateOutcome> {
    let space = plan.space()?;
    let idx = plan.logical_indices(space)?;
    let mut u = Operator::identity(space);
    for step in &plan.steps {
        u = &step_operator(plan, step, space)? * &u;
    }
    let n = idx.len();
    let logical = CMatrix::from_fn(n, n, |r, c| u.matrix()[(idx[r], idx[c])]);
    let leakage = (0..n)
        .map(|c| 1.0 - (0..n).map(|r| logical[(r, c)].norm_sqr()).sum::<f64>())
        .fold(0.0, f64::max)
        .max(0.0);
    let distance_to_expected = plan
        .expected
        .as_ref()
        .map(|e| phase_aligned_distance(&logical, e));
    Ok(GateOutcome {
        unitarity_defect: u.unitarity_defect(),
        logical,
        leakage,
        distance_to_expected,
    })
}

/// Rotates the global phase so the first entry above `1e-12` is real
/// positive.
pub fn align_global_phase(m: &CMatrix) -> CMatrix {
    match m.iter().find(|z| z.norm() > 1e-12) {
        Some(z) => m * (z.conj() / z.norm()),
        None => m.clone(),
    }
}

pub fn phase_aligned_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    linalg::max_abs_diff(&align_global_phase(a), &align_global_phase(b))
}

/// Two-qubit exchange in the logical basis `00, 01, 10, 11`.
pub fn swap_matrix() -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    for (r, c) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
        m[(r, c)] = ONE;
    }
    m
}

pub const SWAP_CUTOFF: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwapReport {
    pub beams: [usize; 4],
    #[serde(serialize_with = "linalg::serialize_matrix")]
    pub logical: CMatrix,
    pub distance: f64,
    pub squared_distance_to_identity: f64,
    /// Largest logical entry off the permutation pattern.
    pub off_pattern: f64,
    pub leakage: f64,
}

/// Dual-rail qubits on `(beams[0], beams[1])` and `(beams[2], beams[3])`,
/// four modes at cutoff [`SWAP_CUTOFF`].
pub fn swap_gate(beams: [usize; 4]) -> Result<SwapReport> {
    distinct(&beams)?;
    let plan = GatePlan::new(
        vec![
            QubitEncoding::dual_rail(beams[0], beams[1])?,
            QubitEncoding::dual_rail(beams[2], beams[3])?,
        ],
        SWAP_CUTOFF,
    )?
    .then(GateStep::Swap {
        first: 0,
        second: 1,
    })
    .expecting(swap_matrix());
    let out = compose_plan(&plan)?;
    let sq = &out.logical * &out.logical;
    let target = swap_matrix();
    let off_pattern = out
        .logical
        .iter()
        .zip(target.iter())
        .filter(|(_, t)| **t == ZERO)
        .map(|(z, _)| z.norm())
        .fold(0.0, f64::max);
    Ok(SwapReport {
        beams,
        distance: out.distance_to_expected.expect("expected is set"),
        squared_distance_to_identity: phase_aligned_distance(&sq, &linalg::identity(4)),
        off_pattern,
        leakage: out.leakage,
        logical: out.logical,
    })
}

/// `exp(-i angle sigma_k)` as plain 2x2 algebra.
pub fn pauli_rotation(k: usize, angle: f64) -> CMatrix {
    let p = match k {
        1 => linalg::pauli_x(),
        2 => linalg::pauli_y(),
        _ => linalg::pauli_z(),
    };
    linalg::identity(2) * c64(angle.cos(), 0.0) - p * c64(0.0, angle.sin())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use std::f64::consts::PI;

    #[test]
    fn zero_angle_plans_are_flat() {
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            let r = plan_rotation(axis, 0.0).unwrap();
            assert_eq!(r.orientation(), 0.0);
            assert!(max_abs_diff(&rotation_gate(axis, 0.0).unwrap(), &linalg::identity(2)) < 1e-15);
        }
    }

    #[test]
    fn quarter_turn_about_x() {
        let g = rotation_gate(Axis::X, PI / 2.0).unwrap();
        let want = linalg::pauli_x() * c64(0.0, -1.0);
        assert!(max_abs_diff(&g, &want) < 1e-12);
    }

    #[test]
    fn local_embedding_is_identity_off_block() {
        let space = FockSpace::new(2, 3).unwrap();
        let b = linalg::pauli_x();
        let u = embed_local(space, &[1], &[vec![0], vec![1]], &b).unwrap();
        assert!(u.unitarity_defect() < 1e-15);
        let at = |r: &[usize], c: &[usize]| u.element(r, c).unwrap();
        assert_eq!(at(&[2, 1], &[2, 0]), ONE);
        assert_eq!(at(&[0, 2], &[0, 2]), ONE);
    }

    #[test]
    fn swap_is_exact() {
        let r = swap_gate([0, 1, 2, 3]).unwrap();
        assert!(r.distance < 1e-12);
        assert!(r.squared_distance_to_identity < 1e-12);
        assert!(r.leakage < 1e-12);
        assert_eq!(
            swap_gate([0, 1, 1, 3]).unwrap_err(),
            Error::NonDistinctBeams(vec![0, 1, 1, 3])
        );
    }

    #[test]
    fn encodings_must_match_steps() {
        let plan = GatePlan::new(vec![QubitEncoding::DualRail(0, 1)], 2)
            .unwrap()
            .then(GateStep::Rotation {
                axis: Axis::X,
                angle: 0.1,
                qubit: 0,
            });
        assert!(matches!(
            compose_plan(&plan),
            Err(Error::EncodingMismatch(_))
        ));
    }
}
