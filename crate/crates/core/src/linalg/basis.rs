use super::{inner, CMatrix, Complex64, HermitianMatrix, I_UNIT, ONE};

/// Orthonormal Hermitian basis under `Tr(A^H B)`, generalized Gell-Mann form.
///
/// Ordering: `I / sqrt(n)`, then the traceless elements of [`traceless_basis`].
pub fn gell_mann_basis(n: usize) -> Vec<HermitianMatrix> {
    let mut out = Vec::with_capacity(n * n);
    out.push(HermitianMatrix::identity(n).scale(1.0 / (n as f64).sqrt()));
    out.extend(traceless_basis(n));
    out
}

/// The `n^2 - 1` traceless orthonormal elements: symmetric pairs `(j, k)` with
/// `j < k`, antisymmetric pairs, then the diagonal elements.
pub fn traceless_basis(n: usize) -> Vec<HermitianMatrix> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(n * n - 1);
    for j in 0..n {
        for k in (j + 1)..n {
            let mut m = CMatrix::zeros(n, n);
            m[(j, k)] = ONE * h;
            m[(k, j)] = ONE * h;
            out.push(HermitianMatrix::symmetrized(m));
        }
    }
    for j in 0..n {
        for k in (j + 1)..n {
            let mut m = CMatrix::zeros(n, n);
            m[(j, k)] = -I_UNIT * h;
            m[(k, j)] = I_UNIT * h;
            out.push(HermitianMatrix::symmetrized(m));
        }
    }
    for l in 1..n {
        let norm = ((l * (l + 1)) as f64).sqrt();
        let mut d = vec![0.0; n];
        for x in d.iter_mut().take(l) {
            *x = 1.0 / norm;
        }
        d[l] = -(l as f64) / norm;
        out.push(HermitianMatrix::diagonal(&d));
    }
    out
}

/// Real coordinates in the Gell-Mann basis; an isometry for the trace inner product.
pub fn hermitian_to_coords(a: &HermitianMatrix) -> Vec<f64> {
    gell_mann_basis(a.dim()).iter().map(|e| inner(e, a).expect("same dimension")).collect()
}

pub fn hermitian_from_coords(n: usize, coords: &[f64]) -> HermitianMatrix {
    assert_eq!(coords.len(), n * n, "need n^2 coordinates");
    let mut m = CMatrix::zeros(n, n);
    for (e, &c) in gell_mann_basis(n).iter().zip(coords) {
        m += e.as_matrix() * Complex64::new(c, 0.0);
    }
    HermitianMatrix::symmetrized(m)
}
