//! Cyclic Jacobi diagonalization of complex Hermitian matrices.

use super::{norm_inf, psd_tolerance, CMatrix, Complex64, HermitianMatrix, ONE, ZERO};
use crate::error::{Error, Result};

/// Spectral decomposition `A = V diag(eigenvalues) V^H`.
#[derive(Clone, Debug)]
pub struct Eigendecomposition {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Eigenvectors stored as columns, in the order of `eigenvalues`.
    pub eigenvectors: CMatrix,
}

impl Eigendecomposition {
    /// `V diag(f(lambda)) V^H`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> HermitianMatrix {
        let v = &self.eigenvectors;
        let n = v.nrows();
        let mut scaled = v.clone();
        for (j, &l) in self.eigenvalues.iter().enumerate() {
            let s = Complex64::new(f(l), 0.0);
            for i in 0..n {
                scaled[(i, j)] *= s;
            }
        }
        HermitianMatrix::symmetrized(scaled * v.adjoint())
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        self.eigenvectors.column(j).iter().copied().collect()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct JacobiOptions {
    pub max_sweeps: usize,
    /// Off-diagonal convergence threshold relative to `max(1, |A|_inf)`.
    pub rel_threshold: f64,
}

impl Default for JacobiOptions {
    fn default() -> Self {
        Self { max_sweeps: 100, rel_threshold: 1e-13 }
    }
}

pub fn eig(a: &HermitianMatrix) -> Result<Eigendecomposition> {
    eig_with(a, JacobiOptions::default())
}

pub fn eig_with(a: &HermitianMatrix, opts: JacobiOptions) -> Result<Eigendecomposition> {
    let n = a.dim();
    let mut m = a.as_matrix().clone();
    let mut v = CMatrix::identity(n, n);
    let scale = norm_inf(&m).max(1.0);
    let threshold = opts.rel_threshold * scale;

    let off = |m: &CMatrix| {
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..j {
                worst = worst.max(m[(i, j)].norm());
            }
        }
        worst
    };

    let mut sweeps = 0;
    while off(&m) > threshold {
        if sweeps == opts.max_sweeps {
            return Err(Error::NoConvergence { sweeps, off: off(&m) });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re).then(i.cmp(&j)));
    let eigenvalues = order.iter().map(|&i| m[(i, i)].re).collect();
    let mut vectors = CMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    normalize_phases(&mut vectors);
    Ok(Eigendecomposition { eigenvalues, eigenvectors: vectors })
}

/// Zeroes `m[p][q]` with a unitary rotation in the (p, q) plane.
fn rotate(m: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let apq = m[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    // Phase so that the (p, q) element becomes real, then a real Jacobi rotation.
    let phase = apq / r;
    let (app, aqq) = (m[(p, p)].re, m[(q, q)].re);
    let theta = (aqq - app) / (2.0 * r);
    let t = if theta >= 0.0 {
        1.0 / (theta + (1.0 + theta * theta).sqrt())
    } else {
        -1.0 / (-theta + (1.0 + theta * theta).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    // J = diag(1, conj(phase)) * [[c, s], [-s, c]]
    let jpp = Complex64::new(c, 0.0);
    let jpq = Complex64::new(s, 0.0);
    let jqp = phase.conj() * (-s);
    let jqq = phase.conj() * c;

    let n = m.nrows();
    for k in 0..n {
        let (mkp, mkq) = (m[(k, p)], m[(k, q)]);
        m[(k, p)] = mkp * jpp + mkq * jqp;
        m[(k, q)] = mkp * jpq + mkq * jqq;
    }
    for k in 0..n {
        let (mpk, mqk) = (m[(p, k)], m[(q, k)]);
        m[(p, k)] = jpp.conj() * mpk + jqp.conj() * mqk;
        m[(q, k)] = jpq.conj() * mpk + jqq.conj() * mqk;
    }
    m[(p, q)] = ZERO;
    m[(q, p)] = ZERO;
    m[(p, p)].im = 0.0;
    m[(q, q)].im = 0.0;
    for k in 0..n {
        let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
        v[(k, p)] = vkp * jpp + vkq * jqp;
        v[(k, q)] = vkp * jpq + vkq * jqq;
    }
}

/// Rotates each column so its first non-negligible component is real positive.
fn normalize_phases(v: &mut CMatrix) {
    let n = v.nrows();
    for j in 0..v.ncols() {
        let lead = (0..n).map(|i| v[(i, j)]).find(|z| z.norm() > 1e-12);
        if let Some(z) = lead {
            let fix = z.conj() / z.norm();
            if fix != ONE {
                for i in 0..n {
                    v[(i, j)] *= fix;
                }
            }
        }
    }
}

/// Sign pattern of a Hermitian matrix's spectrum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Definiteness {
    /// Positive definite.
    PD,
    /// Positive semi-definite and non-zero.
    PSDNZ,
    Zero,
    Indefinite,
    /// Negative semi-definite and non-zero.
    NSDNZ,
    /// Negative definite.
    ND,
}

impl Definiteness {
    /// PSDNZ or PD: a gamble that can never lose.
    pub fn is_positive(self) -> bool {
        matches!(self, Definiteness::PD | Definiteness::PSDNZ)
    }

    pub fn is_negative(self) -> bool {
        matches!(self, Definiteness::ND | Definiteness::NSDNZ)
    }
}

/// Classifies `a` using the cutoff `1e-10 * max(1, |A|_inf)`.
pub fn classify(a: &HermitianMatrix) -> Definiteness {
    let norm = a.norm_inf();
    let tol = psd_tolerance(norm);
    if norm <= tol {
        return Definiteness::Zero;
    }
    let values = match eig(a) {
        Ok(e) => e.eigenvalues,
        // A finite Hermitian matrix below 32x32 always converges; treat a
        // failure as the least informative label.
        Err(_) => return Definiteness::Indefinite,
    };
    let pos = values.iter().filter(|&&l| l > tol).count();
    let neg = values.iter().filter(|&&l| l < -tol).count();
    let n = values.len();
    match (pos, neg) {
        (p, 0) if p == n => Definiteness::PD,
        (p, 0) if p > 0 => Definiteness::PSDNZ,
        (0, q) if q == n => Definiteness::ND,
        (0, q) if q > 0 => Definiteness::NSDNZ,
        (0, 0) => Definiteness::Zero,
        _ => Definiteness::Indefinite,
    }
}
