//! Conversions for sets given by extreme points.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::linalg::{gell_mann_basis, hermitian_to_coords, inner, traceless_basis, HermitianMatrix};
use crate::measurement::DensityMatrix;

const MAX_FACET_CANDIDATES: u64 = 200_000;
const AFFINE_TOL: f64 = 1e-10;
const SIDE_TOL: f64 = 1e-9;
/// Residual accepted by the hull membership test.
const HULL_TOL: f64 = 1e-7;
/// Row weight of the sum-to-one condition in the membership least squares.
const SUM_WEIGHT: f64 = 10.0;

/// Whether `rho` lies in the convex hull of `points`, decided by non-negative
/// least squares in Gell-Mann coordinates.
pub fn hull_contains(points: &[DensityMatrix], rho: &DensityMatrix) -> Result<bool> {
    let n = rho.dim();
    let basis = gell_mann_basis(n);
    let k = points.len();
    let mut a = DMatrix::zeros(basis.len(), k);
    let mut b = DVector::zeros(basis.len());
    for (r, e) in basis.iter().enumerate() {
        let w = if r == 0 { SUM_WEIGHT } else { 1.0 };
        for (c, p) in points.iter().enumerate() {
            a[(r, c)] = w * inner(e, p.matrix())?;
        }
        b[r] = w * inner(e, rho.matrix())?;
    }
    let x = nnls(&a, &b);
    Ok((&a * &x - &b).norm() <= HULL_TOL)
}

/// Lawson-Hanson active-set non-negative least squares.
pub(crate) fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let k = a.ncols();
    let mut x = DVector::zeros(k);
    let mut passive = vec![false; k];
    let tol = 1e-12 * a.amax().max(1.0) * b.amax().max(1.0);
    for _ in 0..(3 * k + 10) {
        let w = a.transpose() * (b - a * &x);
        let Some(j) = (0..k).filter(|&j| !passive[j] && w[j] > tol).max_by(|&p, &q| w[p].total_cmp(&w[q])) else {
            break;
        };
        passive[j] = true;
        loop {
            let cols: Vec<usize> = (0..k).filter(|&j| passive[j]).collect();
            let sub = DMatrix::from_fn(a.nrows(), cols.len(), |r, c| a[(r, cols[c])]);
            let z = sub.svd(true, true).solve(b, 1e-14).unwrap_or_else(|_| DVector::zeros(cols.len()));
            if z.iter().all(|&v| v > 0.0) {
                for (c, &j) in cols.iter().enumerate() {
                    x[j] = z[c];
                }
                break;
            }
            let mut alpha = 1.0f64;
            for (c, &j) in cols.iter().enumerate() {
                if z[c] <= 0.0 {
                    alpha = alpha.min(x[j] / (x[j] - z[c]));
                }
            }
            for (c, &j) in cols.iter().enumerate() {
                x[j] += alpha * (z[c] - x[j]);
                if x[j] <= 1e-15 {
                    x[j] = 0.0;
                    passive[j] = false;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
    x
}

/// Constraint gambles whose spectrahedron equals the convex hull of `points`.
///
/// Directions orthogonal to the affine hull become pairs of opposite equality
/// gambles; the facets of the polytope inside its affine hull become single
/// inequality gambles.
pub fn vrep_to_hrep(points: &[DensityMatrix]) -> Result<Vec<HermitianMatrix>> {
    let n = points.first().ok_or_else(|| Error::InvalidArgument("no extreme points".into()))?.dim();
    let basis = traceless_basis(n);
    let d = basis.len();
    let coords: Vec<DVector<f64>> = points
        .iter()
        .map(|p| DVector::from_vec(hermitian_to_coords(p.matrix())[1..].to_vec()))
        .collect();
    let centroid = coords.iter().fold(DVector::zeros(d), |acc, x| acc + x) / coords.len() as f64;
    let diffs = DMatrix::from_fn(d, coords.len(), |r, c| coords[c][r] - centroid[r]);
    let eig = SymmetricEigen::new(&diffs * diffs.transpose());
    let top = eig.eigenvalues.iter().fold(0.0f64, |m, &v| m.max(v));
    let cut = AFFINE_TOL * top.max(AFFINE_TOL);
    let (span, normal): (Vec<usize>, Vec<usize>) = (0..d).partition(|&i| eig.eigenvalues[i] > cut);

    let gamble = |w: &DVector<f64>, offset: f64| -> HermitianMatrix {
        let mut g = HermitianMatrix::identity(n).scale(offset);
        for (l, e) in basis.iter().enumerate() {
            if w[l] != 0.0 {
                g = &g + &e.scale(w[l]);
            }
        }
        g
    };

    let mut out = Vec::new();
    for &i in &normal {
        let u = eig.eigenvectors.column(i).into_owned();
        let g = gamble(&u, -u.dot(&centroid));
        out.push(-&g);
        out.push(g);
    }

    let k = span.len();
    if k == 0 {
        return Ok(out);
    }
    let uk = DMatrix::from_fn(d, k, |r, c| eig.eigenvectors[(r, span[c])]);
    let z: Vec<DVector<f64>> = coords.iter().map(|x| uk.transpose() * (x - &centroid)).collect();
    let total = binomial(z.len(), k);
    if total > MAX_FACET_CANDIDATES {
        return Err(Error::Unsupported(format!("facet enumeration over {total} point subsets")));
    }
    let scale = z.iter().fold(1.0f64, |m, v| m.max(v.amax()));
    let mut facets: Vec<(DVector<f64>, f64)> = Vec::new();
    for_each_subset(z.len(), k, |subset| {
        let mut m = DMatrix::zeros(k, k);
        for (r, &j) in subset.iter().enumerate().skip(1) {
            for c in 0..k {
                m[(r - 1, c)] = z[j][c] - z[subset[0]][c];
            }
        }
        let svd = m.svd(false, true);
        let Some(vt) = svd.v_t else { return };
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&p, &q| svd.singular_values[p].total_cmp(&svd.singular_values[q]));
        if k > 1 && svd.singular_values[order[1]] <= 1e-9 * scale {
            return;
        }
        let mut a: DVector<f64> = vt.row(order[0]).transpose();
        let mut b = a.dot(&z[subset[0]]);
        let values: Vec<f64> = z.iter().map(|p| a.dot(p) - b).collect();
        let tol = SIDE_TOL * scale;
        if values.iter().all(|&v| v <= tol) {
            a = -a;
            b = -b;
        } else if !values.iter().all(|&v| v >= -tol) {
            return;
        }
        if facets.iter().any(|(fa, fb)| (fa - &a).amax() <= 1e-9 && (fb - b).abs() <= 1e-9 * scale) {
            return;
        }
        facets.push((a, b));
    });
    for (a, b) in facets {
        let w = &uk * a;
        out.push(gamble(&w, -w.dot(&centroid) - b));
    }
    Ok(out)
}

fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc.saturating_mul((n - i) as u64) / (i as u64 + 1))
}

fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else { return };
        idx[i] += 1;
        for j in (i + 1)..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}
