//! Truncated multimode Fock spaces, ladder operators and degenerate code blocks.
//!
//! Basis ordering: mode 0 is the slowest-varying tensor index, so the flat
//! index of `|n_0 n_1 ... n_{m-1}>` is `sum_l n_l * cutoff^(m-1-l)`.

use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c64, CMatrix, ONE, ZERO};

/// Largest total dimension accepted for a dense space.
pub const MAX_DIM: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FockSpace {
    n_modes: usize,
    cutoff: usize,
}

impl FockSpace {
    pub fn new(n_modes: usize, cutoff: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::InvalidSpace("at least one mode is required".into()));
        }
        if cutoff < 2 {
            return Err(Error::InvalidSpace(format!(
                "cutoff {cutoff} cannot hold the states |0> and |1>"
            )));
        }
        let dim = (cutoff as u128).checked_pow(n_modes as u32);
        match dim {
            Some(d) if d <= MAX_DIM as u128 => Ok(Self { n_modes, cutoff }),
            _ => Err(Error::InvalidSpace(format!(
                "dimension {cutoff}^{n_modes} exceeds the dense limit {MAX_DIM}"
            ))),
        }
    }

    pub fn single_mode(cutoff: usize) -> Result<Self> {
        Self::new(1, cutoff)
    }

    pub fn two_mode(cutoff: usize) -> Result<Self> {
        Self::new(2, cutoff)
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.cutoff.pow(self.n_modes as u32)
    }

    /// Same number of modes with the cutoff doubled.
    pub fn doubled(&self) -> Result<Self> {
        Self::new(self.n_modes, self.cutoff * 2)
    }

    fn stride(&self, mode: usize) -> usize {
        self.cutoff.pow((self.n_modes - 1 - mode) as u32)
    }

    pub fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.n_modes {
            return Err(Error::ModeOutOfRange {
                mode,
                n_modes: self.n_modes,
            });
        }
        Ok(())
    }

    pub fn flat_index(&self, occupations: &[usize]) -> Result<usize> {
        if occupations.len() != self.n_modes {
            return Err(Error::InvalidBlock(format!(
                "state {occupations:?} has {} entries for a {}-mode space",
                occupations.len(),
                self.n_modes
            )));
        }
        let mut k = 0;
        for &n in occupations {
            if n >= self.cutoff {
                return Err(Error::InvalidBlock(format!(
                    "occupation {n} not below cutoff {}",
                    self.cutoff
                )));
            }
            k = k * self.cutoff + n;
        }
        Ok(k)
    }

    pub fn occupations(&self, index: usize) -> Vec<usize> {
        assert!(index < self.dim(), "basis index {index} out of range");
        let mut occ = vec![0; self.n_modes];
        let mut rest = index;
        for slot in occ.iter_mut().rev() {
            *slot = rest % self.cutoff;
            rest /= self.cutoff;
        }
        occ
    }
}

/// Dense operator on a [`FockSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    space: FockSpace,
    matrix: CMatrix,
}

impl Operator {
    pub fn new(space: FockSpace, matrix: CMatrix) -> Result<Self> {
        let d = space.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: matrix.nrows(),
            });
        }
        Ok(Self { space, matrix })
    }

    pub fn identity(space: FockSpace) -> Self {
        Self {
            space,
            matrix: linalg::identity(space.dim()),
        }
    }

    pub fn zeros(space: FockSpace) -> Self {
        let d = space.dim();
        Self {
            space,
            matrix: CMatrix::zeros(d, d),
        }
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self {
            space: self.space,
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        Self {
            space: self.space,
            matrix: linalg::scale(&self.matrix, s),
        }
    }

    pub fn plus(&self, other: &Self) -> Self {
        assert_eq!(
            self.space, other.space,
            "operators live on different spaces"
        );
        Self {
            space: self.space,
            matrix: &self.matrix + &other.matrix,
        }
    }

    pub fn minus(&self, other: &Self) -> Self {
        assert_eq!(
            self.space, other.space,
            "operators live on different spaces"
        );
        Self {
            space: self.space,
            matrix: &self.matrix - &other.matrix,
        }
    }

    pub fn commutator(&self, other: &Self) -> Self {
        assert_eq!(
            self.space, other.space,
            "operators live on different spaces"
        );
        Self {
            space: self.space,
            matrix: linalg::commutator(&self.matrix, &other.matrix),
        }
    }

    pub fn unitarity_defect(&self) -> f64 {
        linalg::unitarity_defect(&self.matrix)
    }

    /// Matrix element `<bra|O|ket>` between occupation-number states.
    pub fn element(&self, bra: &[usize], ket: &[usize]) -> Result<Complex64> {
        let r = self.space.flat_index(bra)?;
        let c = self.space.flat_index(ket)?;
        Ok(self.matrix[(r, c)])
    }
}

impl Mul for &Operator {
    type Output = Operator;

    fn mul(self, rhs: &Operator) -> Operator {
        assert_eq!(self.space, rhs.space, "operators live on different spaces");
        Operator {
            space: self.space,
            matrix: &self.matrix * &rhs.matrix,
        }
    }
}

/// Annihilation operator `a_mode` tensored with identities on the other modes.
pub fn annihilation_op(space: FockSpace, mode: usize) -> Result<Operator> {
    space.check_mode(mode)?;
    let d = space.dim();
    let stride = space.stride(mode);
    let mut m = CMatrix::zeros(d, d);
    for k in 0..d {
        let n = (k / stride) % space.cutoff;
        if n > 0 {
            m[(k - stride, k)] = c64((n as f64).sqrt(), 0.0);
        }
    }
    Ok(Operator { space, matrix: m })
}

pub fn creation_op(space: FockSpace, mode: usize) -> Result<Operator> {
    Ok(annihilation_op(space, mode)?.adjoint())
}

pub fn number_op(space: FockSpace, mode: usize) -> Result<Operator> {
    space.check_mode(mode)?;
    let d = space.dim();
    let stride = space.stride(mode);
    let m = CMatrix::from_fn(d, d, |r, c| {
        if r == c {
            c64(((r / stride) % space.cutoff) as f64, 0.0)
        } else {
            ZERO
        }
    });
    Ok(Operator { space, matrix: m })
}

/// Total photon number summed over all modes.
pub fn total_number_op(space: FockSpace) -> Operator {
    let d = space.dim();
    let m = CMatrix::from_fn(d, d, |r, c| {
        if r == c {
            c64(space.occupations(r).iter().sum::<usize>() as f64, 0.0)
        } else {
            ZERO
        }
    });
    Operator { space, matrix: m }
}

/// `exp(G)` for an anti-Hermitian operator `G`.
pub fn expm_antihermitian(g: &Operator) -> Result<Operator> {
    Ok(Operator {
        space: g.space,
        matrix: linalg::expm_anti_hermitian(&g.matrix)?,
    })
}

/// Ordered list of occupation tuples spanning a degenerate subspace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeBlock {
    states: Vec<Vec<usize>>,
}

impl CodeBlock {
    pub fn new(states: Vec<Vec<usize>>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidBlock("empty block".into()));
        }
        let width = states[0].len();
        for (i, s) in states.iter().enumerate() {
            if s.len() != width {
                return Err(Error::InvalidBlock(
                    "states have different mode counts".into(),
                ));
            }
            if s.iter().any(|&n| n > 1) {
                return Err(Error::InvalidBlock(format!(
                    "state {s:?} is not a degenerate Kerr state"
                )));
            }
            if states[..i].contains(s) {
                return Err(Error::InvalidBlock(format!("state {s:?} repeated")));
            }
        }
        Ok(Self { states })
    }

    /// `{|0>, |1>}`
    pub fn single_mode() -> Self {
        Self {
            states: vec![vec![0], vec![1]],
        }
    }

    /// `{|00>, |01>, |10>, |11>}`
    pub fn two_mode() -> Self {
        Self {
            states: vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]],
        }
    }

    pub fn states(&self) -> &[Vec<usize>] {
        &self.states
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn n_modes(&self) -> usize {
        self.states[0].len()
    }

    pub fn indices(&self, space: FockSpace) -> Result<Vec<usize>> {
        self.states.iter().map(|s| space.flat_index(s)).collect()
    }

    /// Full-space column vectors of the block states.
    pub fn vectors(&self, space: FockSpace) -> Result<CMatrix> {
        let idx = self.indices(space)?;
        let mut v = CMatrix::zeros(space.dim(), idx.len());
        for (c, &k) in idx.iter().enumerate() {
            v[(k, c)] = ONE;
        }
        Ok(v)
    }
}

/// `<rho_bar|U|rho>` over the block basis, rows indexed by `rho_bar`.
pub fn project_block(u: &Operator, block: &CodeBlock) -> Result<CMatrix> {
    let idx = block.indices(u.space)?;
    let d = idx.len();
    Ok(CMatrix::from_fn(d, d, |r, c| u.matrix[(idx[r], idx[c])]))
}

/// Norm lost from the block: `sqrt(dim - |P U P|_F^2)`.
pub fn leakage(u: &Operator, block: &CodeBlock) -> Result<f64> {
    let p = project_block(u, block)?;
    Ok((block.dim() as f64 - linalg::frobenius_sq(&p))
        .max(0.0)
        .sqrt())
}

/// Operator acting as `m` on the block and as the identity on its complement.
pub fn embed_on_block(space: FockSpace, block: &CodeBlock, m: &CMatrix) -> Result<Operator> {
    let idx = block.indices(space)?;
    if m.nrows() != idx.len() || m.ncols() != idx.len() {
        return Err(Error::DimensionMismatch {
            expected: idx.len(),
            found: m.nrows(),
        });
    }
    let mut out = linalg::identity(space.dim());
    for (r, &kr) in idx.iter().enumerate() {
        for (c, &kc) in idx.iter().enumerate() {
            out[(kr, kc)] = m[(r, c)];
        }
    }
    Ok(Operator { space, matrix: out })
}

/// A single ladder operator in a word.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ladder {
    Lower(usize),
    Raise(usize),
}

/// Generator stored as Fock-basis transitions, built from ladder words.
/// Used where only the action on a few vectors is needed.
#[derive(Debug, Clone)]
pub struct LadderGenerator {
    space: FockSpace,
    entries: Vec<(usize, usize, Complex64)>,
}

impl LadderGenerator {
    pub fn new(space: FockSpace) -> Self {
        Self {
            space,
            entries: Vec::new(),
        }
    }

    /// Adds `coef * word[0] word[1] ... word[k-1]`.
    pub fn add_word(&mut self, coef: Complex64, word: &[Ladder]) -> Result<&mut Self> {
        for op in word {
            let (Ladder::Lower(m) | Ladder::Raise(m)) = *op;
            self.space.check_mode(m)?;
        }
        if coef == ZERO {
            return Ok(self);
        }
        let cutoff = self.space.cutoff;
        'cols: for col in 0..self.space.dim() {
            let mut occ = self.space.occupations(col);
            let mut amp = 1.0;
            for op in word.iter().rev() {
                match *op {
                    Ladder::Lower(m) => {
                        if occ[m] == 0 {
                            continue 'cols;
                        }
                        amp *= (occ[m] as f64).sqrt();
                        occ[m] -= 1;
                    }
                    Ladder::Raise(m) => {
                        if occ[m] + 1 >= cutoff {
                            continue 'cols;
                        }
                        occ[m] += 1;
                        amp *= (occ[m] as f64).sqrt();
                    }
                }
            }
            let row = self
                .space
                .flat_index(&occ)
                .expect("occupations stay in range");
            self.entries.push((row, col, coef * amp));
        }
        Ok(self)
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn to_dense(&self) -> CMatrix {
        let d = self.space.dim();
        let mut m = CMatrix::zeros(d, d);
        for &(r, c, z) in &self.entries {
            m[(r, c)] += z;
        }
        m
    }
}

impl linalg::LinearAction for LadderGenerator {
    fn dim(&self) -> usize {
        self.space.dim()
    }

    fn apply(&self, v: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(v.nrows(), v.ncols());
        for &(r, c, z) in &self.entries {
            for j in 0..v.ncols() {
                out[(r, j)] += z * v[(c, j)];
            }
        }
        out
    }

    fn norm_bound(&self) -> f64 {
        let mut rows = vec![0.0; self.space.dim()];
        for &(r, _, z) in &self.entries {
            rows[r] += z.norm();
        }
        rows.into_iter().fold(0.0, f64::max)
    }
}
