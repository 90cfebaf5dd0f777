//! Dense complex linear algebra helpers: matrix exponentials, norms and the
//! small Pauli-type matrices used on code blocks.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Tolerance on `|G + G^dagger|` accepted by [`expm_anti_hermitian`].
pub const ANTI_HERMITIAN_TOL: f64 = 1e-10;

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `e^{i phi}`
#[inline]
pub fn cis(phi: f64) -> Complex64 {
    Complex64::from_polar(1.0, phi)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn frobenius_sq(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

pub fn anti_hermitian_defect(m: &CMatrix) -> f64 {
    max_abs(&(m + m.adjoint()))
}

pub fn hermitian_defect(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// `max |U^dagger U - 1|`
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let n = u.ncols();
    max_abs(&(u.adjoint() * u - identity(n)))
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Exponential of an anti-Hermitian matrix through the eigendecomposition of
/// the Hermitian matrix `iG`. The result is unitary to rounding error.
pub fn expm_anti_hermitian(g: &CMatrix) -> Result<CMatrix> {
    if !g.is_square() {
        return Err(Error::InvalidParameter("exponent must be square".into()));
    }
    let defect = anti_hermitian_defect(g);
    if defect > ANTI_HERMITIAN_TOL {
        return Err(Error::NotAntiHermitian(defect));
    }
    let n = g.nrows();
    if n == 0 {
        return Ok(g.clone());
    }
    // G = -iH with H Hermitian.
    let h = g.map(|z| z * I);
    let h = (&h + h.adjoint()).map(|z| z * 0.5);
    let eig = h.symmetric_eigen();
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (j, lambda) in eig.eigenvalues.iter().enumerate() {
        let phase = cis(-lambda);
        scaled.column_mut(j).iter_mut().for_each(|z| *z *= phase);
    }
    Ok(scaled * v.adjoint())
}

/// Exponential of a small, not necessarily anti-Hermitian, matrix.
pub fn expm_general(g: &CMatrix) -> CMatrix {
    g.exp()
}

/// Anything that can multiply a block of column vectors.
pub trait LinearAction {
    fn dim(&self) -> usize;
    fn apply(&self, v: &CMatrix) -> CMatrix;
    /// Upper bound on the spectral radius.
    fn norm_bound(&self) -> f64;
}

impl LinearAction for CMatrix {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, v: &CMatrix) -> CMatrix {
        self * v
    }

    fn norm_bound(&self) -> f64 {
        self.row_iter()
            .map(|r| r.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// Applies `exp(G)` to the columns of `v` for anti-Hermitian `G` using a
/// Chebyshev expansion of `exp(-iH)`, `H = iG`, without forming `exp(G)`.
pub fn expm_action(g: &CMatrix, v: &CMatrix) -> Result<CMatrix> {
    let defect = anti_hermitian_defect(g);
    if defect > ANTI_HERMITIAN_TOL {
        return Err(Error::NotAntiHermitian(defect));
    }
    expm_action_with(g, v)
}

/// As [`expm_action`] for any operator the caller knows to be anti-Hermitian.
///
/// The spectral radius is bounded by [`LinearAction::norm_bound`]; the
/// expansion is cut once the Bessel coefficients fall below `1e-18` past the
/// transition region.
pub fn expm_action_with<A: LinearAction + ?Sized>(g: &A, v: &CMatrix) -> Result<CMatrix> {
    if g.dim() != v.nrows() {
        return Err(Error::DimensionMismatch {
            expected: g.dim(),
            found: v.nrows(),
        });
    }
    let rho = g.norm_bound();
    if rho == 0.0 {
        return Ok(v.clone());
    }
    // Scaled Hermitian operator with spectrum inside [-1, 1].
    let factor = I / rho;
    let h_scaled = |w: &CMatrix| -> CMatrix {
        let mut out = g.apply(w);
        out.iter_mut().for_each(|z| *z *= factor);
        out
    };
    let coeffs = bessel_j_sequence(rho);

    let mut t_prev = v.clone();
    let mut t_curr = h_scaled(v);
    let mut acc = v.map(|z| z * coeffs[0]);
    let mut phase = ONE;
    for (k, jk) in coeffs.iter().enumerate().skip(1) {
        phase *= -I;
        if k > 1 {
            let mut t_next = h_scaled(&t_curr);
            t_next *= c64(2.0, 0.0);
            t_next -= &t_prev;
            t_prev = std::mem::replace(&mut t_curr, t_next);
        }
        let weight = phase * (2.0 * jk);
        acc.zip_apply(&t_curr, |a, t| *a += weight * t);
    }
    Ok(acc)
}

/// `J_0(x) .. J_K(x)` for `x > 0` by Miller's backward recurrence, truncated
/// where the tail is negligible.
fn bessel_j_sequence(x: f64) -> Vec<f64> {
    let n_keep = (x + 15.0 * x.cbrt() + 40.0).ceil() as usize;
    let n_start = n_keep + 40 + (x.sqrt() as usize);
    let mut values = vec![0.0f64; n_start + 2];
    values[n_start] = 1e-300;
    for k in (1..=n_start).rev() {
        let next = values[k + 1];
        values[k - 1] = (2.0 * k as f64 / x) * values[k] - next;
        if values[k - 1].abs() > 1e250 {
            for v in values.iter_mut().skip(k - 1) {
                *v *= 1e-250;
            }
        }
    }
    // J_0 + 2 sum_{k>=1} J_{2k} = 1
    let norm: f64 = values[0] + 2.0 * values.iter().skip(2).step_by(2).sum::<f64>();
    let mut out: Vec<f64> = values.iter().take(n_keep + 1).map(|v| v / norm).collect();
    while out.len() > 1 && out.len() as f64 > x + 1.0 && out.last().is_some_and(|v| v.abs() < 1e-18)
    {
        out.pop();
    }
    out
}

/// Pauli matrices on a two-dimensional block.
pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

/// Embeds a 2x2 matrix into the `{|01>, |10>}` sector of the 4-state
/// two-mode block `{|00>, |01>, |10>, |11>}`.
pub fn embed_middle(m: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(4, 4);
    for r in 0..2 {
        for c in 0..2 {
            out[(r + 1, c + 1)] = m[(r, c)];
        }
    }
    out
}

/// `sigma_k^{12}`: Pauli matrix `k` (1, 2 or 3) on `{|01>, |10>}`.
pub fn sigma_12(k: usize) -> CMatrix {
    match k {
        1 => embed_middle(&pauli_x()),
        2 => embed_middle(&pauli_y()),
        3 => embed_middle(&pauli_z()),
        _ => panic!("Pauli index must be 1, 2 or 3"),
    }
}

/// Scales a real matrix expression by a complex scalar.
pub fn scale(m: &CMatrix, s: Complex64) -> CMatrix {
    m.map(|z| z * s)
}

/// Serializes a complex matrix as rows of `[re, im]` pairs.
pub fn serialize_matrix<S: serde::Serializer>(
    m: &CMatrix,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut rows = s.serialize_seq(Some(m.nrows()))?;
    for r in 0..m.nrows() {
        let row: Vec<[f64; 2]> = (0..m.ncols())
            .map(|c| [m[(r, c)].re, m[(r, c)].im])
            .collect();
        rows.serialize_element(&row)?;
    }
    rows.end()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_anti_hermitian(n: usize, seed: u64) -> CMatrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let m = CMatrix::from_fn(n, n, |_, _| {
            c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        (&m - m.adjoint()).map(|z| z * 0.5)
    }

    /// Scaling and squaring with a Taylor core; used as an independent oracle.
    fn taylor_expm(g: &CMatrix, halvings: u32, tol: f64) -> CMatrix {
        let n = g.nrows();
        let scaled = g.map(|z| z / 2f64.powi(halvings as i32));
        let mut sum = identity(n);
        let mut term = identity(n);
        for k in 1..200 {
            term = &term * &scaled / c64(k as f64, 0.0);
            sum += &term;
            if max_abs(&term) < tol {
                break;
            }
        }
        for _ in 0..halvings {
            sum = &sum * &sum;
        }
        sum
    }

    #[test]
    fn zero_exponent_is_identity() {
        let u = expm_anti_hermitian(&CMatrix::zeros(5, 5)).unwrap();
        assert!(max_abs_diff(&u, &identity(5)) < 1e-15);
    }

    #[test]
    fn diagonal_pi_flip() {
        let mut g = CMatrix::zeros(4, 4);
        g[(1, 1)] = I * std::f64::consts::PI;
        let u = expm_anti_hermitian(&g).unwrap();
        let mut expected = identity(4);
        expected[(1, 1)] = -ONE;
        assert!(max_abs_diff(&u, &expected) < 1e-14);
    }

    #[test]
    fn rejects_hermitian_input() {
        let g = pauli_x();
        assert!(matches!(
            expm_anti_hermitian(&g),
            Err(Error::NotAntiHermitian(_))
        ));
    }

    #[test]
    fn matches_taylor_oracle_at_two_scalings() {
        let g = random_anti_hermitian(8, 11).map(|z| z * 3.0);
        let u = expm_anti_hermitian(&g).unwrap();
        let oracle = taylor_expm(&g, 8, 1e-18);
        let oracle_halved = taylor_expm(&g, 9, 1e-18);
        assert!(max_abs_diff(&oracle, &oracle_halved) < 1e-12);
        assert!(max_abs_diff(&u, &oracle) < 1e-10);
    }

    #[test]
    fn unitary_for_large_generators() {
        let g = random_anti_hermitian(40, 3);
        let norm = max_abs(&g) * 40.0;
        let g = g.map(|z| z * 50.0 / norm);
        let u = expm_anti_hermitian(&g).unwrap();
        assert!(unitarity_defect(&u) < 1e-10);
    }

    #[test]
    fn action_agrees_with_dense_exponential() {
        for (seed, s) in [(1u64, 0.3), (2, 5.0), (3, 60.0)] {
            let g = random_anti_hermitian(30, seed).map(|z| z * s);
            let v = CMatrix::from_fn(30, 3, |r, c| {
                c64((r + c) as f64 * 0.1, (r * c) as f64 * 0.05)
            });
            let dense = expm_anti_hermitian(&g).unwrap() * &v;
            let act = expm_action(&g, &v).unwrap();
            assert!(max_abs_diff(&dense, &act) < 1e-11 * (1.0 + s), "scale {s}");
        }
    }

    #[test]
    fn bessel_sequence_normalised() {
        let j = bessel_j_sequence(1.0);
        assert!((j[0] - 0.765_197_686_557_966_6).abs() < 1e-14);
        assert!((j[1] - 0.440_050_585_744_933_5).abs() < 1e-14);
        let j = bessel_j_sequence(300.0);
        assert!(j.len() > 300);
    }

    #[test]
    fn sigma_12_layout() {
        let s2 = sigma_12(2);
        assert_eq!(s2[(1, 2)], -I);
        assert_eq!(s2[(2, 1)], I);
        assert_eq!(s2[(0, 0)], ZERO);
    }
}
