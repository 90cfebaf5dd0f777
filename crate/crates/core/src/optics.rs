//! Quantum-optical control unitaries on truncated Fock spaces and the Kerr
//! Hamiltonian.

use log::warn;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{
    annihilation_op, creation_op, expm_antihermitian, number_op, FockSpace, Operator,
};
use crate::linalg::{self, c64, CMatrix, ZERO};

/// Displacement amplitude `lambda = x + i y = r0 e^{i theta0}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisplaceParam {
    pub lambda: Complex64,
}

impl DisplaceParam {
    pub fn cartesian(x: f64, y: f64) -> Self {
        Self { lambda: c64(x, y) }
    }

    pub fn polar(r0: f64, theta0: f64) -> Result<Self> {
        if r0 < 0.0 {
            return Err(Error::InvalidParameter(format!("r0 = {r0} is negative")));
        }
        Ok(Self {
            lambda: Complex64::from_polar(r0, theta0),
        })
    }

    pub fn x(&self) -> f64 {
        self.lambda.re
    }

    pub fn y(&self) -> f64 {
        self.lambda.im
    }

    pub fn r0(&self) -> f64 {
        self.lambda.norm()
    }

    pub fn theta0(&self) -> f64 {
        self.lambda.arg()
    }
}

/// Squeeze amplitude `mu = r1 e^{i theta1}` with `r1 >= 0`, `-pi < theta1 <= pi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezeParam {
    r1: f64,
    theta1: f64,
}

impl SqueezeParam {
    pub fn new(r1: f64, theta1: f64) -> Result<Self> {
        if r1 < 0.0 {
            return Err(Error::InvalidParameter(format!("r1 = {r1} is negative")));
        }
        Ok(Self {
            r1,
            theta1: wrap_angle(theta1),
        })
    }

    pub fn r1(&self) -> f64 {
        self.r1
    }

    pub fn theta1(&self) -> f64 {
        self.theta1
    }

    pub fn mu(&self) -> Complex64 {
        Complex64::from_polar(self.r1, self.theta1)
    }
}

/// Maps an angle into `(-pi, pi]`.
pub fn wrap_angle(theta: f64) -> f64 {
    use std::f64::consts::PI;
    let mut t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    }
    t
}

/// `zeta = r2 e^{i theta2}` (two-mode squeezer) and `xi = r3 e^{i theta3}`
/// (two-mode displacer).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoModeParams {
    pub zeta: Complex64,
    pub xi: Complex64,
}

impl TwoModeParams {
    pub fn polar(r2: f64, theta2: f64, r3: f64, theta3: f64) -> Result<Self> {
        if r2 < 0.0 || r3 < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "radii r2 = {r2}, r3 = {r3} must be non-negative"
            )));
        }
        Ok(Self {
            zeta: Complex64::from_polar(r2, theta2),
            xi: Complex64::from_polar(r3, theta3),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SU2Angles {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

/// Kerr coupling `X` and an optional free-field frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KerrConfig {
    coupling: f64,
    omega: Option<f64>,
}

impl KerrConfig {
    pub fn new(coupling: f64) -> Result<Self> {
        if coupling <= 0.0 || !coupling.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "Kerr coupling {coupling} must be positive"
            )));
        }
        Ok(Self {
            coupling,
            omega: None,
        })
    }

    pub fn with_frequency(mut self, omega: f64) -> Self {
        self.omega = Some(omega);
        self
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn omega(&self) -> Option<f64> {
        self.omega
    }
}

fn check_pair(space: FockSpace, modes: (usize, usize)) -> Result<()> {
    space.check_mode(modes.0)?;
    space.check_mode(modes.1)?;
    if modes.0 == modes.1 {
        return Err(Error::IdenticalModes(modes.0));
    }
    Ok(())
}

/// Population above three quarters of the cutoff in any mode, taken over
/// the images of the vacuum and the one-photon states.
pub fn edge_population(u: &Operator) -> f64 {
    let space = u.space();
    let threshold = (3 * space.cutoff()).div_ceil(4);
    let edge: Vec<bool> = (0..space.dim())
        .map(|k| space.occupations(k).iter().any(|&n| n >= threshold))
        .collect();
    let mut sources = vec![0usize];
    for mode in 0..space.n_modes() {
        let mut occ = vec![0; space.n_modes()];
        occ[mode] = 1;
        sources.push(space.flat_index(&occ).expect("cutoff >= 2"));
    }
    sources
        .into_iter()
        .map(|c| {
            (0..space.dim())
                .filter(|&r| edge[r])
                .map(|r| u.matrix()[(r, c)].norm_sqr())
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

fn guard(what: &str, value: f64, limit: f64, u: &Operator) {
    if value > limit {
        warn!(
            "{what} = {value:.4} exceeds the truncation guard {limit:.4} at cutoff {}; edge population {:.3e}",
            u.space().cutoff(),
            edge_population(u)
        );
    }
}

/// `D(lambda) = exp(lambda a^dagger - conj(lambda) a)`
pub fn displacer(space: FockSpace, mode: usize, lambda: Complex64) -> Result<Operator> {
    let a = annihilation_op(space, mode)?;
    let ad = a.adjoint();
    let g = ad.scaled(lambda).minus(&a.scaled(lambda.conj()));
    let u = expm_antihermitian(&g)?;
    guard("|lambda|", lambda.norm(), space.cutoff() as f64 / 4.0, &u);
    Ok(u)
}

/// `S(mu) = exp(mu a^dagger^2 - conj(mu) a^2)`
pub fn squeezer(space: FockSpace, mode: usize, mu: Complex64) -> Result<Operator> {
    let a = annihilation_op(space, mode)?;
    let a2 = &a * &a;
    let g = a2.adjoint().scaled(mu).minus(&a2.scaled(mu.conj()));
    let u = expm_antihermitian(&g)?;
    guard("r1", mu.norm(), 2.0, &u);
    Ok(u)
}

/// `M(zeta) = exp(zeta a1^dagger a2^dagger - conj(zeta) a1 a2)`
pub fn two_mode_squeezer(
    space: FockSpace,
    modes: (usize, usize),
    zeta: Complex64,
) -> Result<Operator> {
    check_pair(space, modes)?;
    let pair = &annihilation_op(space, modes.0)? * &annihilation_op(space, modes.1)?;
    let g = pair.adjoint().scaled(zeta).minus(&pair.scaled(zeta.conj()));
    let u = expm_antihermitian(&g)?;
    guard("r2", zeta.norm(), 2.0, &u);
    Ok(u)
}

/// `N(xi) = exp(xi a1^dagger a2 - conj(xi) a1 a2^dagger)`
pub fn two_mode_displacer(
    space: FockSpace,
    modes: (usize, usize),
    xi: Complex64,
) -> Result<Operator> {
    check_pair(space, modes)?;
    let hop = &creation_op(space, modes.0)? * &annihilation_op(space, modes.1)?;
    let g = hop.scaled(xi).minus(&hop.adjoint().scaled(xi.conj()));
    expm_antihermitian(&g)
}

/// Schwinger generators of a two-beam interferometer.
#[derive(Debug, Clone)]
pub struct SU2Generators {
    pub jx: Operator,
    pub jy: Operator,
    pub jz: Operator,
    pub n: Operator,
}

pub fn su2_generators(space: FockSpace, modes: (usize, usize)) -> Result<SU2Generators> {
    check_pair(space, modes)?;
    let hop = &creation_op(space, modes.0)? * &annihilation_op(space, modes.1)?;
    let hop_back = hop.adjoint();
    let n1 = number_op(space, modes.0)?;
    let n2 = number_op(space, modes.1)?;
    let half = c64(0.5, 0.0);
    Ok(SU2Generators {
        jx: hop.plus(&hop_back).scaled(half),
        jy: hop.minus(&hop_back).scaled(c64(0.0, -0.5)),
        jz: n1.minus(&n2).scaled(half),
        n: n1.plus(&n2),
    })
}

/// `exp(i alpha Jx) exp(i beta Jy) exp(i gamma Jz)`
pub fn su2_unitary(space: FockSpace, modes: (usize, usize), angles: SU2Angles) -> Result<Operator> {
    let g = su2_generators(space, modes)?;
    let ux = expm_antihermitian(&g.jx.scaled(c64(0.0, angles.alpha)))?;
    let uy = expm_antihermitian(&g.jy.scaled(c64(0.0, angles.beta)))?;
    let uz = expm_antihermitian(&g.jz.scaled(c64(0.0, angles.gamma)))?;
    Ok(&(&ux * &uy) * &uz)
}

/// Diagonal of `X sum_l n_l (n_l - 1)` in the Fock basis.
pub fn kerr_spectrum(space: FockSpace, coupling: f64) -> Vec<f64> {
    (0..space.dim())
        .map(|k| {
            let occ = space.occupations(k);
            coupling
                * occ
                    .iter()
                    .map(|&n| (n * n.saturating_sub(1)) as f64)
                    .sum::<f64>()
        })
        .collect()
}

pub fn kerr_hamiltonian(space: FockSpace, config: &KerrConfig) -> Operator {
    let spec = kerr_spectrum(space, config.coupling);
    let m = CMatrix::from_fn(space.dim(), space.dim(), |r, c| {
        if r == c {
            c64(spec[r], 0.0)
        } else {
            ZERO
        }
    });
    Operator::new(space, m).expect("shape matches space")
}

/// `exp(-i H dt)` for a Kerr coupling `X >= 0`.
pub fn kerr_propagator(space: FockSpace, coupling: f64, dt: f64) -> Operator {
    let spec = kerr_spectrum(space, coupling);
    let m = CMatrix::from_fn(space.dim(), space.dim(), |r, c| {
        if r == c {
            linalg::cis(-spec[r] * dt)
        } else {
            ZERO
        }
    });
    Operator::new(space, m).expect("shape matches space")
}

pub fn kerr_evolution(space: FockSpace, config: &KerrConfig, dt: f64) -> Operator {
    kerr_propagator(space, config.coupling, dt)
}

/// Positions `2 pi k / omega`, `k = 0..=k_max`, where the free phase
/// `exp(-i omega x)` returns to one (units with `c = 1`).
pub fn degenerate_lattice_points(config: &KerrConfig, k_max: usize) -> Result<Vec<f64>> {
    let omega = config.omega.ok_or(Error::MissingFrequency)?;
    if omega == 0.0 || !omega.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "frequency {omega} is not usable"
        )));
    }
    Ok((0..=k_max)
        .map(|k| 2.0 * std::f64::consts::PI * k as f64 / omega)
        .collect())
}

/// Coefficients `(u, v)` of the best fit `S a S^dagger ~ u a + v a^dagger`
/// on the lowest `levels` Fock states, with the residual there.
pub fn squeeze_conjugation_fit(
    cutoff: usize,
    levels: usize,
    mu: Complex64,
) -> Result<(Complex64, Complex64, f64)> {
    if levels < 2 || levels > cutoff {
        return Err(Error::InvalidParameter(format!(
            "fit window {levels} not within cutoff {cutoff}"
        )));
    }
    let space = FockSpace::single_mode(cutoff)?;
    let s = squeezer(space, 0, mu)?;
    let a = annihilation_op(space, 0)?;
    let conj = &(&s * &a) * &s.adjoint();
    let half = levels;
    // a has entries on the superdiagonal, a^dagger on the subdiagonal.
    let mut u_num = ZERO;
    let mut v_num = ZERO;
    let mut den = 0.0;
    for n in 1..half {
        let w = (n as f64).sqrt();
        u_num += conj.matrix()[(n - 1, n)] * w;
        v_num += conj.matrix()[(n, n - 1)] * w;
        den += w * w;
    }
    let u = u_num / den;
    let v = v_num / den;
    let ad = a.adjoint();
    let model = &a.matrix().map(|z| z * u) + &ad.matrix().map(|z| z * v);
    let mut resid: f64 = 0.0;
    for r in 0..half {
        for c in 0..half {
            resid = resid.max((conj.matrix()[(r, c)] - model[(r, c)]).norm());
        }
    }
    Ok((u, v, resid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{project_block, CodeBlock};
    use crate::linalg::{max_abs, max_abs_diff, ONE};
    use std::f64::consts::PI;

    fn sub(m: &CMatrix, k: usize) -> CMatrix {
        m.view((0, 0), (k, k)).into_owned()
    }

    #[test]
    fn zero_parameters_are_identity() {
        let s1 = FockSpace::single_mode(12).unwrap();
        let s2 = FockSpace::two_mode(6).unwrap();
        let id1 = linalg::identity(12);
        let id2 = linalg::identity(36);
        assert!(max_abs_diff(displacer(s1, 0, ZERO).unwrap().matrix(), &id1) < 1e-14);
        assert!(max_abs_diff(squeezer(s1, 0, ZERO).unwrap().matrix(), &id1) < 1e-14);
        assert!(max_abs_diff(two_mode_squeezer(s2, (0, 1), ZERO).unwrap().matrix(), &id2) < 1e-14);
        assert!(max_abs_diff(two_mode_displacer(s2, (0, 1), ZERO).unwrap().matrix(), &id2) < 1e-14);
        let su = su2_unitary(s2, (0, 1), SU2Angles::default()).unwrap();
        assert!(max_abs_diff(su.matrix(), &id2) < 1e-14);
    }

    #[test]
    fn displacer_shifts_annihilator() {
        let s = FockSpace::single_mode(40).unwrap();
        let lambda = c64(0.3, 0.4);
        let d = displacer(s, 0, lambda).unwrap();
        let a = annihilation_op(s, 0).unwrap();
        let lhs = &(&d * &a) * &d.adjoint();
        let rhs = a.minus(&Operator::identity(s).scaled(lambda));
        assert!(max_abs_diff(&sub(lhs.matrix(), 20), &sub(rhs.matrix(), 20)) < 1e-8);
    }

    #[test]
    fn displacer_composition_phase() {
        let s = FockSpace::single_mode(40).unwrap();
        let (l, lp) = (c64(0.2, 0.0), c64(0.0, 0.1));
        let lhs = &displacer(s, 0, l).unwrap() * &displacer(s, 0, lp).unwrap();
        let phase = linalg::cis((l * lp.conj()).im);
        let rhs = displacer(s, 0, l + lp).unwrap().scaled(phase);
        assert!(max_abs_diff(&sub(lhs.matrix(), 20), &sub(rhs.matrix(), 20)) < 1e-8);
    }

    #[test]
    fn displacer_alone_leaks() {
        let s = FockSpace::single_mode(20).unwrap();
        let d = displacer(s, 0, ONE).unwrap();
        assert!(crate::fock::leakage(&d, &CodeBlock::single_mode()).unwrap() > 0.1);
    }

    #[test]
    fn squeeze_bogoliubov_magnitudes_and_phase() {
        const CUT: usize = 96;
        const WIN: usize = CUT / 8;
        let (r, th) = (0.3, 0.7);
        let (u, v, resid) =
            squeeze_conjugation_fit(CUT, WIN, Complex64::from_polar(r, th)).unwrap();
        assert!(resid < 1e-8, "residual {resid}");
        assert!((u - c64((2.0 * r).cosh(), 0.0)).norm() < 1e-8);
        // oracle: direct conjugation at double cutoff
        let (u2, v2, _) =
            squeeze_conjugation_fit(2 * CUT, WIN, Complex64::from_polar(r, th)).unwrap();
        assert!((u - u2).norm() < 1e-8 && (v - v2).norm() < 1e-8);
        assert!((v.norm() - (2.0 * r).sinh()).abs() < 1e-8);
        assert!((v + linalg::cis(th) * (2.0 * r).sinh()).norm() < 1e-8);
    }

    #[test]
    fn two_mode_structure() {
        let s = FockSpace::two_mode(10).unwrap();
        let n = two_mode_displacer(s, (0, 1), Complex64::from_polar(0.5, 1.0)).unwrap();
        let tot = crate::fock::total_number_op(s);
        assert!(max_abs(n.commutator(&tot).matrix()) < 1e-10);
        let m = two_mode_squeezer(s, (0, 1), c64(0.4, 0.0)).unwrap();
        let vac = s.flat_index(&[0, 0]).unwrap();
        for r in 0..s.dim() {
            let occ = s.occupations(r);
            if occ[0] != occ[1] {
                assert!(m.matrix()[(r, vac)].norm() < 1e-12);
            }
        }
        assert!(m.matrix()[(s.flat_index(&[1, 1]).unwrap(), vac)].norm() > 0.1);
        assert!(matches!(
            two_mode_squeezer(s, (1, 1), ONE),
            Err(Error::IdenticalModes(1))
        ));
    }

    #[test]
    fn su2_algebra() {
        let s = FockSpace::two_mode(8).unwrap();
        let g = su2_generators(s, (0, 1)).unwrap();
        let lhs = g.jx.commutator(&g.jy).minus(&g.jz.scaled(c64(0.0, 1.0)));
        // the algebra closes exactly on states with n1 + n2 < cutoff
        for k in 0..s.dim() {
            if s.occupations(k).iter().sum::<usize>() < 8 {
                for j in 0..s.dim() {
                    assert!(lhs.matrix()[(j, k)].norm() < 1e-10);
                }
            }
        }
        assert_eq!(max_abs(g.n.commutator(&g.jx).matrix()), 0.0);
        let h = kerr_hamiltonian(s, &KerrConfig::new(1.0).unwrap());
        assert!(max_abs(h.commutator(&g.jx).matrix()) > 0.1);
    }

    #[test]
    fn su2_dual_rail_action() {
        let s = FockSpace::two_mode(4).unwrap();
        let rail = CodeBlock::new(vec![vec![0, 1], vec![1, 0]]).unwrap();
        let ux = su2_unitary(
            s,
            (0, 1),
            SU2Angles {
                alpha: 2.0 * PI,
                ..Default::default()
            },
        )
        .unwrap();
        let p = project_block(&ux, &rail).unwrap();
        assert!(max_abs_diff(&p, &(-linalg::identity(2))) < 1e-12);
        let beta = 0.9;
        let uy = su2_unitary(
            s,
            (0, 1),
            SU2Angles {
                beta,
                ..Default::default()
            },
        )
        .unwrap();
        let p = project_block(&uy, &rail).unwrap();
        let (c, sn) = ((beta / 2.0).cos(), (beta / 2.0).sin());
        assert!(p.iter().all(|z| z.im.abs() < 1e-12));
        assert!((p[(0, 0)].re - c).abs() < 1e-12 && (p[(1, 1)].re - c).abs() < 1e-12);
        assert!((p[(0, 1)].re.abs() - sn).abs() < 1e-12 && (p[(0, 1)] + p[(1, 0)]).norm() < 1e-12);
        assert!(crate::fock::leakage(&uy, &rail).unwrap() < 1e-10);
    }

    #[test]
    fn kerr_levels() {
        let cfg = KerrConfig::new(1.5).unwrap();
        let s1 = FockSpace::single_mode(5).unwrap();
        let h = kerr_hamiltonian(s1, &cfg);
        assert_eq!(h.matrix()[(0, 0)], ZERO);
        assert_eq!(h.matrix()[(1, 1)], ZERO);
        assert!((h.matrix()[(2, 2)].re - 3.0).abs() < 1e-15);
        let s2 = FockSpace::two_mode(5).unwrap();
        let h2 = kerr_hamiltonian(s2, &cfg);
        let k = s2.flat_index(&[2, 3]).unwrap();
        assert!((h2.matrix()[(k, k)].re - 8.0 * 1.5).abs() < 1e-14);
        assert!(KerrConfig::new(0.0).is_err());
        let u = kerr_evolution(s2, &cfg, 0.3);
        assert!(u.unitarity_defect() < 1e-14);
    }

    #[test]
    fn lattice_points() {
        let cfg = KerrConfig::new(1.0).unwrap();
        assert_eq!(
            degenerate_lattice_points(&cfg, 3),
            Err(Error::MissingFrequency)
        );
        let pts = degenerate_lattice_points(&cfg.with_frequency(2.0 * PI), 4).unwrap();
        for (k, x) in pts.iter().enumerate() {
            assert!((x - k as f64).abs() < 1e-12);
        }
        assert!((linalg::cis(-2.0 * PI * pts[1]) - ONE).norm() < 1e-12);
    }

    #[test]
    fn angle_wrapping() {
        assert!((wrap_angle(PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
    }
}
