//! Dense complex Hermitian matrix algebra.
//!
//! Everything here is sized for small systems (n up to about 32). Matrices are
//! stored as `nalgebra::DMatrix<Complex64>`; `HermitianMatrix` guarantees the
//! Hermitian invariant at construction so downstream code never re-checks it.

mod basis;
mod eig;

pub use basis::{gell_mann_basis, hermitian_from_coords, hermitian_to_coords, traceless_basis};
pub use eig::{classify, eig, eig_with, Definiteness, Eigendecomposition, JacobiOptions};

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
pub use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance on `max |A - A^H|` accepted by [`HermitianMatrix::new`].
pub const TOL_HERM: f64 = 1e-12;
/// Relative eigenvalue cutoff used for definiteness decisions.
pub const TOL_PSD_REL: f64 = 1e-10;

pub type CMatrix = DMatrix<Complex64>;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub(crate) const I_UNIT: Complex64 = Complex64::new(0.0, 1.0);

/// Largest entry modulus, `max_ij |a_ij|`.
pub fn norm_inf(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Definiteness cutoff for a matrix with the given entrywise norm.
pub fn psd_tolerance(norm: f64) -> f64 {
    TOL_PSD_REL * norm.max(1.0)
}

/// A gamble: an n x n complex Hermitian matrix.
#[derive(Clone, PartialEq)]
pub struct HermitianMatrix {
    m: CMatrix,
}

impl HermitianMatrix {
    /// Validates and symmetrizes a raw complex matrix.
    pub fn new(raw: CMatrix) -> Result<Self> {
        if raw.nrows() != raw.ncols() {
            return Err(Error::NotSquare { rows: raw.nrows(), cols: raw.ncols() });
        }
        if raw.nrows() == 0 {
            return Err(Error::InvalidArgument("matrix dimension must be positive".into()));
        }
        for j in 0..raw.ncols() {
            for i in 0..raw.nrows() {
                let z = raw[(i, j)];
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        let deviation = norm_inf(&(&raw - raw.adjoint()));
        if deviation > TOL_HERM {
            return Err(Error::NotHermitian { deviation, tol: TOL_HERM });
        }
        Ok(Self::symmetrized(raw))
    }

    /// Builds from row-major nested rows of complex entries.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        for r in rows {
            if r.len() != n {
                return Err(Error::NotSquare { rows: n, cols: r.len() });
            }
        }
        Self::new(CMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    /// Builds from row-major real entries.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    /// `(A + A^H) / 2` with an exactly real diagonal. No validation.
    pub(crate) fn symmetrized(raw: CMatrix) -> Self {
        let n = raw.nrows();
        let mut m = CMatrix::from_fn(n, n, |i, j| (raw[(i, j)] + raw[(j, i)].conj()) * 0.5);
        for i in 0..n {
            m[(i, i)].im = 0.0;
        }
        Self { m }
    }

    pub fn identity(n: usize) -> Self {
        Self { m: CMatrix::identity(n, n) }
    }

    pub fn zeros(n: usize) -> Self {
        Self { m: CMatrix::zeros(n, n) }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        Self { m: CMatrix::from_fn(n, n, |i, j| if i == j { Complex64::new(values[i], 0.0) } else { ZERO }) }
    }

    /// Rank-one projector `v v^H / |v|^2`.
    pub fn projector_onto(v: &[Complex64]) -> Self {
        let n = v.len();
        let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        Self::symmetrized(CMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj() / norm2))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.m[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.m[(i, i)].re).sum()
    }

    pub fn norm_inf(&self) -> f64 {
        norm_inf(&self.m)
    }

    pub fn frobenius(&self) -> f64 {
        self.m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.m[(i, i)].re).collect()
    }

    /// True when every off-diagonal entry is exactly zero.
    pub fn is_diagonal(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| i == j || self.m[(i, j)] == ZERO))
    }

    /// True when every diagonal entry is exactly zero.
    pub fn has_zero_diagonal(&self) -> bool {
        (0..self.dim()).all(|i| self.m[(i, i)].re == 0.0)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { m: &self.m * Complex64::new(s, 0.0) }
    }

    /// `self + c I`.
    pub fn shift(&self, c: f64) -> Self {
        let mut m = self.m.clone();
        for i in 0..self.dim() {
            m[(i, i)].re += c;
        }
        Self { m }
    }

    /// Entrywise complex conjugate (the transpose, for a Hermitian matrix).
    pub fn conj(&self) -> Self {
        Self { m: self.m.map(|z| z.conj()) }
    }

    /// `C A C^H` for an arbitrary square `C`.
    pub fn congruence(&self, c: &CMatrix) -> Result<Self> {
        if c.ncols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: c.ncols() });
        }
        Ok(Self::symmetrized(c * &self.m * c.adjoint()))
    }

    /// `P A P` for a Hermitian `P`.
    pub fn sandwich(&self, p: &HermitianMatrix) -> Result<Self> {
        check_dims(self.dim(), p.dim())?;
        Ok(Self::symmetrized(&p.m * &self.m * &p.m))
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(eig(self)?.eigenvalues)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?[0])
    }

    pub fn max_eigenvalue(&self) -> Result<f64> {
        Ok(*self.eigenvalues()?.last().expect("non-empty spectrum"))
    }

    /// Row-major `[re, im]` pairs.
    pub fn to_pairs(&self) -> Vec<Vec<[f64; 2]>> {
        let n = self.dim();
        (0..n).map(|i| (0..n).map(|j| [self.m[(i, j)].re, self.m[(i, j)].im]).collect()).collect()
    }
}

impl fmt::Debug for HermitianMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HermitianMatrix{:?}", self.to_pairs())
    }
}

/// Serialized as row-major `[re, im]` pairs.
impl serde::Serialize for HermitianMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_pairs().serialize(s)
    }
}

impl Add for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn add(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch in Hermitian addition");
        HermitianMatrix { m: &self.m + &rhs.m }
    }
}

impl Sub for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn sub(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch in Hermitian subtraction");
        HermitianMatrix { m: &self.m - &rhs.m }
    }
}

impl Neg for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn neg(self) -> HermitianMatrix {
        HermitianMatrix { m: -&self.m }
    }
}

impl Mul<f64> for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn mul(self, s: f64) -> HermitianMatrix {
        self.scale(s)
    }
}

pub(crate) fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Validates a raw complex grid as Hermitian.
pub fn validate_hermitian(raw: CMatrix) -> Result<HermitianMatrix> {
    HermitianMatrix::new(raw)
}

/// Trace inner product `Re Tr(A^H B)`.
///
/// Panics if the imaginary residual exceeds 1e-10, which cannot happen for
/// two Hermitian matrices short of memory corruption.
pub fn inner(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    check_dims(a.dim(), b.dim())?;
    let mut acc = ZERO;
    // Tr(A^H B) = sum_ij conj(a_ij) b_ij
    for (x, y) in a.m.iter().zip(b.m.iter()) {
        acc += x.conj() * y;
    }
    assert!(acc.im.abs() <= 1e-10 * (1.0 + acc.re.abs()), "imaginary trace residual {}", acc.im);
    Ok(acc.re)
}

/// Pauli coordinates `(v, x, y, z)` with `A = v I + x sx + y sy + z sz`.
pub fn pauli_coords(a: &HermitianMatrix) -> Result<(f64, f64, f64, f64)> {
    check_dims(2, a.dim())?;
    let (a00, a11, a10) = (a.get(0, 0).re, a.get(1, 1).re, a.get(1, 0));
    Ok(((a00 + a11) / 2.0, a10.re, a10.im, (a00 - a11) / 2.0))
}

/// Inverse of [`pauli_coords`].
pub fn pauli_build(v: f64, x: f64, y: f64, z: f64) -> HermitianMatrix {
    let m = CMatrix::from_row_slice(
        2,
        2,
        &[Complex64::new(v + z, 0.0), Complex64::new(x, -y), Complex64::new(x, y), Complex64::new(v - z, 0.0)],
    );
    HermitianMatrix { m }
}

pub fn sigma_x() -> HermitianMatrix {
    pauli_build(0.0, 1.0, 0.0, 0.0)
}

pub fn sigma_y() -> HermitianMatrix {
    pauli_build(0.0, 0.0, 1.0, 0.0)
}

pub fn sigma_z() -> HermitianMatrix {
    pauli_build(0.0, 0.0, 0.0, 1.0)
}

/// Kronecker product with `a`'s index major.
pub fn tensor(a: &HermitianMatrix, b: &HermitianMatrix) -> HermitianMatrix {
    HermitianMatrix { m: a.m.kronecker(&b.m) }
}

/// Which tensor factor an operation refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Subsystem {
    A,
    B,
}

impl Subsystem {
    pub fn other(self) -> Self {
        match self {
            Subsystem::A => Subsystem::B,
            Subsystem::B => Subsystem::A,
        }
    }
}

/// Partial trace of an `(n m) x (n m)` matrix over subsystem `over`.
pub fn partial_trace(m: &HermitianMatrix, dims: (usize, usize), over: Subsystem) -> Result<HermitianMatrix> {
    let (n, k) = dims;
    if n == 0 || k == 0 || n * k != m.dim() {
        return Err(Error::DimensionMismatch { expected: n * k, found: m.dim() });
    }
    let raw = match over {
        Subsystem::B => CMatrix::from_fn(n, n, |i, j| (0..k).map(|b| m.m[(i * k + b, j * k + b)]).sum()),
        Subsystem::A => CMatrix::from_fn(k, k, |i, j| (0..n).map(|a| m.m[(a * k + i, a * k + j)]).sum()),
    };
    Ok(HermitianMatrix::symmetrized(raw))
}

/// Embeds a local gamble into the composite system: `G (x) I_m` or `I_n (x) G`.
pub fn embed_local(g: &HermitianMatrix, dims: (usize, usize), on: Subsystem) -> Result<HermitianMatrix> {
    let (n, k) = dims;
    match on {
        Subsystem::A => {
            check_dims(n, g.dim())?;
            Ok(tensor(g, &HermitianMatrix::identity(k)))
        }
        Subsystem::B => {
            check_dims(k, g.dim())?;
            Ok(tensor(&HermitianMatrix::identity(n), g))
        }
    }
}

/// Unitary (or anti-unitary) time-evolution map.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMap {
    matrix: CMatrix,
    antiunitary: bool,
}

impl UnitaryMap {
    pub const TOL: f64 = 1e-10;

    pub fn new(matrix: CMatrix, antiunitary: bool) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::NotSquare { rows: matrix.nrows(), cols: matrix.ncols() });
        }
        let n = matrix.nrows();
        let deviation = norm_inf(&(matrix.adjoint() * &matrix - CMatrix::identity(n, n)));
        if deviation > Self::TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self { matrix, antiunitary })
    }

    pub fn from_real_rows(rows: &[Vec<f64>], antiunitary: bool) -> Result<Self> {
        let n = rows.len();
        let m = CMatrix::from_fn(n, rows.first().map_or(0, |r| r.len()), |i, j| Complex64::new(rows[i][j], 0.0));
        Self::new(m, antiunitary)
    }

    pub fn identity(n: usize) -> Self {
        Self { matrix: CMatrix::identity(n, n), antiunitary: false }
    }

    pub fn hadamard() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_real_rows(&[vec![h, h], vec![h, -h]], false).expect("Hadamard is unitary")
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn is_antiunitary(&self) -> bool {
        self.antiunitary
    }

    /// True when the map sends diagonal matrices to diagonal matrices.
    pub fn is_monomial(&self) -> bool {
        let n = self.dim();
        (0..n).all(|j| (0..n).filter(|&i| self.matrix[(i, j)].norm() > 1e-12).count() == 1)
    }
}

/// Direction of a conjugation: gambles pull back, states push forward.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// `U^H A U`
    Gamble,
    /// `U A U^H`
    State,
}

/// Conjugates `a` by `u`; an anti-unitary map conjugates `a` entrywise first.
pub fn conjugate(u: &UnitaryMap, a: &HermitianMatrix, direction: Direction) -> Result<HermitianMatrix> {
    check_dims(u.dim(), a.dim())?;
    let base = if u.antiunitary { a.conj() } else { a.clone() };
    let out = match direction {
        Direction::Gamble => u.matrix.adjoint() * &base.m * &u.matrix,
        Direction::State => &u.matrix * &base.m * u.matrix.adjoint(),
    };
    Ok(HermitianMatrix::symmetrized(out))
}
