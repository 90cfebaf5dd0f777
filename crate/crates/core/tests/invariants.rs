use std::f64::consts::{PI, TAU};

use holonomic_optics::charts::{self, AnalyticSource, ChartKind, Component};
use holonomic_optics::fock::FockSpace;
use holonomic_optics::gates::{self, Axis, GatePlan, GateStep, QubitEncoding};
use holonomic_optics::holonomy::path_ordered_holonomy;
use holonomic_optics::kick::{KickConvention, KickSetup};
use holonomic_optics::linalg::{self, c64, CMatrix};
use holonomic_optics::optics::{self, SU2Angles};
use holonomic_optics::stokes::{self, StokesOptions};
use holonomic_optics::surface::{surface_sigma, PlanarRegion, SigmaKind};
use num_complex::Complex64;
use proptest::prelude::*;

fn m2(a: [Complex64; 4]) -> CMatrix {
    CMatrix::from_row_slice(2, 2, &a)
}

/// `exp(-i t sigma_k)` written out with cos and sin.
fn rotation_oracle(k: usize, t: f64) -> CMatrix {
    let (c, s) = (c64(t.cos(), 0.0), t.sin());
    match k {
        1 => m2([c, c64(0.0, -s), c64(0.0, -s), c]),
        2 => m2([c, c64(-s, 0.0), c64(s, 0.0), c]),
        _ => m2([
            c64(t.cos(), -s),
            c64(0.0, 0.0),
            c64(0.0, 0.0),
            c64(t.cos(), s),
        ]),
    }
}

fn axis_index(axis: Axis) -> usize {
    match axis {
        Axis::X => 1,
        Axis::Y => 2,
        Axis::Z => 3,
    }
}

fn axis() -> impl Strategy<Value = Axis> {
    prop_oneof![Just(Axis::X), Just(Axis::Y), Just(Axis::Z)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn planned_area_recovers_angle(axis in axis(), angle in -TAU..TAU) {
        let region = gates::plan_rotation(axis, angle).unwrap();
        let sigma = surface_sigma(&region, axis.sigma_kind()).unwrap();
        prop_assert!((sigma - angle).abs() < 1e-10, "{sigma} vs {angle}");
    }

    #[test]
    fn rotation_matches_pauli_exponential(axis in axis(), angle in -TAU..TAU) {
        let u = gates::rotation_gate(axis, angle).unwrap();
        let d = gates::phase_aligned_distance(&u, &rotation_oracle(axis_index(axis), angle));
        prop_assert!(d < 1e-10, "{d}");
    }

    #[test]
    fn displacers_compose_with_area_phase(
        (ax, ay, bx, by) in (-0.8f64..0.8, -0.8f64..0.8, -0.8f64..0.8, -0.8f64..0.8)
    ) {
        let space = FockSpace::single_mode(48).unwrap();
        let (a, b) = (c64(ax, ay), c64(bx, by));
        let lhs = &optics::displacer(space, 0, a).unwrap() * &optics::displacer(space, 0, b).unwrap();
        let phase = Complex64::from_polar(1.0, (a * b.conj()).im);
        let rhs = optics::displacer(space, 0, a + b).unwrap().into_matrix() * phase;
        let low = 12;
        let d = linalg::max_abs_diff(
            &lhs.matrix().view((0, 0), (low, low)).into_owned(),
            &rhs.view((0, 0), (low, low)).into_owned(),
        );
        prop_assert!(d < 1e-10, "{d}");
    }

    #[test]
    fn su2_keeps_single_photon_span(alpha in -PI..PI, beta in -PI..PI, gamma in -PI..PI) {
        let space = FockSpace::two_mode(3).unwrap();
        let u = optics::su2_unitary(space, (0, 1), SU2Angles { alpha, beta, gamma }).unwrap();
        let span = [space.flat_index(&[0, 1]).unwrap(), space.flat_index(&[1, 0]).unwrap()];
        for &c in &span {
            let outside: f64 = (0..space.dim())
                .filter(|r| !span.contains(r))
                .map(|r| u.matrix()[(r, c)].norm())
                .fold(0.0, f64::max);
            prop_assert!(outside < 1e-10, "{outside}");
        }
    }

    #[test]
    fn reversed_loop_inverts_holonomy(
        b0 in -1.0f64..1.0, g0 in -1.0f64..1.0, db in 0.1f64..1.0, dg in 0.1f64..1.0
    ) {
        let region = PlanarRegion::new(
            ChartKind::SU2Interferometer,
            (Component::Beta, Component::Gamma),
            vec![0.3, 0.0, 0.0],
            (b0, g0),
            (b0 + db, g0 + dg),
        )
        .unwrap();
        let source = AnalyticSource::canonical(ChartKind::SU2Interferometer);
        let path = region.boundary(40).unwrap();
        let fwd = path_ordered_holonomy(&path, &source).unwrap().matrix;
        let back = path_ordered_holonomy(&path.reversed(), &source).unwrap().matrix;
        prop_assert!(linalg::max_abs_diff(&(&back * &fwd), &linalg::identity(4)) < 1e-12);
        let opts = StokesOptions::default();
        let s = stokes::stokes_holonomy(&region, &source, &opts).unwrap().matrix;
        let r = stokes::stokes_holonomy(&region.reversed(), &source, &opts).unwrap().matrix;
        prop_assert!(linalg::max_abs_diff(&(&r * &s), &linalg::identity(4)) < 1e-8);
    }

    #[test]
    fn field_strength_is_antisymmetric(
        x in -0.5f64..0.5, y in -0.5f64..0.5, r1 in 0.05f64..0.5, t1 in -3.0f64..3.0
    ) {
        let source = AnalyticSource::canonical(ChartKind::SingleModeDS);
        let p = [x, y, r1, t1];
        let comps = ChartKind::SingleModeDS.coordinates();
        for &i in comps {
            for &j in comps {
                let fij = charts::field_strength(&source, &p, i, j).unwrap().matrix;
                let fji = charts::field_strength(&source, &p, j, i).unwrap().matrix;
                prop_assert_eq!(fij, -fji);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn kicked_evolution_is_unitary(m in 3usize..30, plus_one in any::<bool>()) {
        let conv = if plus_one { KickConvention::MPlusOneKicks } else { KickConvention::MKicks };
        let u = KickSetup::standard(conv).evolution(m).unwrap();
        prop_assert!(u.unitarity_defect() < 1e-9);
    }

    #[test]
    fn kick_off_diagonals_agree(m in 3usize..30) {
        let mags = KickSetup::standard(KickConvention::MKicks).magnitudes(m).unwrap();
        prop_assert!((mags[1] - mags[2]).abs() < 1e-10);
    }
}

#[test]
fn conjugated_quarter_turn_is_y_half_turn() {
    let plan = GatePlan::new(vec![QubitEncoding::SingleMode(0)], 8)
        .unwrap()
        .then(GateStep::Rotation {
            axis: Axis::Z,
            angle: -PI / 4.0,
            qubit: 0,
        })
        .then(GateStep::Rotation {
            axis: Axis::X,
            angle: PI / 2.0,
            qubit: 0,
        })
        .then(GateStep::Rotation {
            axis: Axis::Z,
            angle: PI / 4.0,
            qubit: 0,
        })
        .expecting(m2([
            c64(0.0, 0.0),
            c64(-1.0, 0.0),
            c64(1.0, 0.0),
            c64(0.0, 0.0),
        ]));
    let out = gates::compose_plan(&plan).unwrap();
    assert!(out.distance_to_expected.unwrap() < 1e-10);
    assert!(out.leakage < 1e-12);
}

#[test]
fn surface_generators_are_hermitian_and_labelled() {
    for kind in SigmaKind::ALL {
        let g = kind.generator();
        assert_eq!(g.adjoint(), g, "{}", kind.generator_label());
    }
}
