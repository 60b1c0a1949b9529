//! Exact route for diagonal instances: a linear program over the probability
//! simplex, solved by enumerating the vertices of the constraint polytope.

use nalgebra::{DMatrix, DVector};

use super::{SdpProblem, SdpSolution, SdpStatus};
use crate::error::{Error, Result};
use crate::linalg::HermitianMatrix;
use crate::measurement::DensityMatrix;

pub const MAX_FAST_PATH_DIM: usize = 8;
const MAX_VERTEX_CANDIDATES: u64 = 400_000;
const VERTEX_TOL: f64 = 1e-10;

/// True when the objective is diagonal and every (offset-folded) constraint
/// is either diagonal or has an all-zero diagonal. Zero-diagonal constraints
/// evaluate to zero on every diagonal density matrix, and the diagonal part of
/// any feasible matrix is feasible with the same objective, so the LP over the
/// simplex has the same optimum as the SDP.
pub fn fast_path_applies(p: &SdpProblem) -> bool {
    p.objective().is_diagonal() && p.homogenized().iter().all(|a| a.is_diagonal() || a.has_zero_diagonal())
}

fn binomial(n: usize, k: usize) -> u64 {
    let k = k.min(n - k.min(n));
    (0..k).fold(1u64, |acc, i| acc.saturating_mul((n - i) as u64) / (i as u64 + 1))
}

/// Solves a diagonal instance exactly. Errors with `DimensionTooLarge` above
/// dimension 8 or when the vertex count is impractical; callers fall back to
/// [`super::sdp_minimize`].
pub fn diagonal_fast_path(p: &SdpProblem) -> Result<SdpSolution> {
    let n = p.dim();
    if n > MAX_FAST_PATH_DIM {
        return Err(Error::DimensionTooLarge(n));
    }
    if !fast_path_applies(p) {
        return Err(Error::InvalidArgument("fast path needs a diagonal objective and diagonal constraints".into()));
    }
    let cost = p.objective().diag();
    let rows: Vec<Vec<f64>> = p.homogenized().into_iter().filter(|a| a.is_diagonal()).map(|a| a.diag()).collect();
    let vertices = simplex_vertices(n, &rows)?;
    let candidates = vertices.len();
    let best = vertices
        .into_iter()
        .map(|x| (cost.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>(), x))
        .min_by(|a, b| a.0.total_cmp(&b.0));

    Ok(match best {
        Some((value, x)) => {
            let rho = DensityMatrix::new(HermitianMatrix::diagonal(&x))?;
            SdpSolution { status: SdpStatus::Optimal, value, optimizer: Some(rho), gap: 0.0, certificate: None, iterations: candidates }
        }
        None => SdpSolution {
            status: SdpStatus::Infeasible,
            value: f64::NAN,
            optimizer: None,
            gap: 0.0,
            certificate: None,
            iterations: candidates,
        },
    })
}

/// Vertices of `{p in simplex : r . p >= 0 for every row r}`, deduplicated.
/// Empty when the polytope is empty.
pub fn simplex_vertices(n: usize, constraint_rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    if n > MAX_FAST_PATH_DIM {
        return Err(Error::DimensionTooLarge(n));
    }
    let mut rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            e
        })
        .collect();
    for r in constraint_rows {
        crate::linalg::check_dims(n, r.len())?;
        rows.push(r.clone());
    }
    let scale: Vec<f64> = rows.iter().map(|r| r.iter().fold(1.0f64, |m, x| m.max(x.abs()))).collect();

    if binomial(rows.len(), n - 1) > MAX_VERTEX_CANDIDATES {
        return Err(Error::DimensionTooLarge(n));
    }

    let mut out: Vec<Vec<f64>> = Vec::new();
    for_each_combination(rows.len(), n - 1, |active| {
        let mut m = DMatrix::zeros(n, n);
        for (r, &idx) in active.iter().enumerate() {
            for c in 0..n {
                m[(r, c)] = rows[idx][c];
            }
        }
        for c in 0..n {
            m[(n - 1, c)] = 1.0;
        }
        let mut rhs = DVector::zeros(n);
        rhs[n - 1] = 1.0;
        let lu = m.clone().full_piv_lu();
        if !lu.is_invertible() {
            return;
        }
        let Some(x) = lu.solve(&rhs) else { return };
        if x.iter().any(|v| !v.is_finite()) || (&m * &x - &rhs).amax() > VERTEX_TOL {
            return;
        }
        let feasible = rows.iter().zip(&scale).all(|(r, s)| r.iter().zip(x.iter()).map(|(a, b)| a * b).sum::<f64>() >= -VERTEX_TOL * s);
        if !feasible {
            return;
        }
        let clipped: Vec<f64> = x.iter().map(|v| v.max(0.0)).collect();
        let total: f64 = clipped.iter().sum();
        let v: Vec<f64> = clipped.iter().map(|c| c / total).collect();
        if !out.iter().any(|w| w.iter().zip(&v).all(|(a, b)| (a - b).abs() <= VERTEX_TOL)) {
            out.push(v);
        }
    });
    Ok(out)
}

/// Calls `f` with every `k`-subset of `0..n` in lexicographic order.
fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in (i + 1)..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combinations_enumerated() {
        let mut seen = Vec::new();
        for_each_combination(4, 2, |c| seen.push(c.to_vec()));
        assert_eq!(seen.len(), 6);
        assert_eq!(seen[0], vec![0, 1]);
        assert_eq!(seen[5], vec![2, 3]);
        let mut count = 0;
        for_each_combination(3, 0, |c| {
            assert!(c.is_empty());
            count += 1;
        });
        assert_eq!(count, 1);
    }

    #[test]
    fn interval_vertices() {
        let v = simplex_vertices(2, &[vec![0.8, -0.2], vec![-0.4, 0.6]]).unwrap();
        assert_eq!(v.len(), 2);
        assert!(v.iter().any(|p| (p[0] - 0.2).abs() < 1e-12));
        assert!(v.iter().any(|p| (p[0] - 0.6).abs() < 1e-12));
        assert_eq!(simplex_vertices(3, &[]).unwrap().len(), 3);
    }

    #[test]
    fn fair_coin_value() {
        let f = HermitianMatrix::diagonal(&[1., -1.]);
        let p = SdpProblem::homogeneous(HermitianMatrix::diagonal(&[3., -5.]), &[f.clone(), -&f]).unwrap();
        let sol = diagonal_fast_path(&p).unwrap();
        assert!((sol.value - 0.5 * (3.0 - 5.0)).abs() < 1e-12);
    }

    #[test]
    fn vacuous_is_min_component() {
        let p = SdpProblem::homogeneous(HermitianMatrix::diagonal(&[0.3, -2.0, 4.0]), &[]).unwrap();
        assert!((diagonal_fast_path(&p).unwrap().value + 2.0).abs() < 1e-15);
    }

    #[test]
    fn single_vertex() {
        // p pinned to (0.25, 0.75)
        let a = HermitianMatrix::diagonal(&[0.75, -0.25]);
        let p = SdpProblem::homogeneous(HermitianMatrix::diagonal(&[4., 8.]), &[a.clone(), -&a]).unwrap();
        assert!((diagonal_fast_path(&p).unwrap().value - 7.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_polytope() {
        let p = SdpProblem::homogeneous(HermitianMatrix::diagonal(&[1., 0.]), &[HermitianMatrix::diagonal(&[-1., -1.])]).unwrap();
        assert_eq!(diagonal_fast_path(&p).unwrap().status, SdpStatus::Infeasible);
    }

    #[test]
    fn rejects_large_or_non_diagonal() {
        let p = SdpProblem::homogeneous(HermitianMatrix::identity(9), &[]).unwrap();
        assert!(matches!(diagonal_fast_path(&p), Err(Error::DimensionTooLarge(9))));
        let p = SdpProblem::homogeneous(crate::linalg::sigma_x(), &[]).unwrap();
        assert!(!fast_path_applies(&p));
    }
}
