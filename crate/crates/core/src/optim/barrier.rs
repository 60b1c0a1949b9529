//! Log-barrier path following on the dual side of the density-matrix SDP.
//!
//! The engine maximizes `b . y` subject to the linear matrix inequality
//! `S(y) = C - sum_a y_a F_a > 0` (complex Hermitian, n x n), sign and box
//! bounds on the `y_a`, and extra linear rows `r . y <= h`. Every primal
//! problem solved by this crate has a dual of that form with a nonempty
//! interior, including primal feasible sets that have none (equality-pinned
//! credal sets). The primal density matrix is recovered as `mu S(y)^{-1}`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, Complex64, HermitianMatrix};

/// Sign constraint on a dual variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum VarKind {
    /// Unbounded; used for the objective variable only.
    Free,
    /// `-bound <= y <= bound`.
    Boxed,
    /// `0 <= y <= bound`.
    NonNeg,
}

#[derive(Clone, Debug)]
pub(crate) struct DualProblem {
    pub c: CMatrix,
    pub f: Vec<CMatrix>,
    pub b: Vec<f64>,
    pub kind: Vec<VarKind>,
    pub rows: Vec<(Vec<f64>, f64)>,
    pub bound: f64,
    /// Index of the variable whose coefficient matrix is `+-I`; used to find a
    /// strictly feasible start.
    pub lead: usize,
    /// Units of the objective, used to scale `mu` and the stopping gap.
    pub scale: f64,
}

#[derive(Clone, Debug)]
pub(crate) struct BarrierOutcome {
    pub y: Vec<f64>,
    /// `b . y` at termination.
    pub dual_value: f64,
    /// `mu S^{-1}`, trace close to one.
    pub primal: HermitianMatrix,
    /// `mu * nu` at termination.
    pub gap: f64,
    pub newton_steps: usize,
}

/// Primal point on the central path: `mu S^{-1}` and the row multipliers.
#[derive(Clone, Debug)]
struct Snapshot {
    rho: CMatrix,
    z: Vec<f64>,
}

pub(crate) const MU_FACTOR: f64 = 5.0;
pub(crate) const NEWTON_TOL: f64 = 1e-10;
const POLISH_TOL: f64 = 1e-24;
pub(crate) const GAP_TOL: f64 = 1e-10;
const LATE_GAP_TOL: f64 = 1e-7;
pub(crate) const MAX_NEWTON: usize = 800;
const CENTER_STEPS: usize = 80;

struct Eval {
    grad: DVector<f64>,
    hess: DMatrix<f64>,
    s_inv: CMatrix,
}

impl DualProblem {
    fn dim(&self) -> usize {
        self.c.nrows()
    }

    fn slack(&self, y: &[f64]) -> CMatrix {
        let mut s = self.c.clone();
        for (fa, &ya) in self.f.iter().zip(y) {
            if ya != 0.0 {
                s -= fa * Complex64::new(ya, 0.0);
            }
        }
        s
    }

    /// Barrier parameter count `nu`.
    fn nu(&self) -> f64 {
        let boxed = self
            .kind
            .iter()
            .map(|k| match k {
                VarKind::Free => 0,
                VarKind::Boxed | VarKind::NonNeg => 2,
            })
            .sum::<usize>();
        (self.dim() + boxed + self.rows.len()) as f64
    }

    fn in_domain(&self, y: &[f64]) -> bool {
        for (k, &v) in self.kind.iter().zip(y) {
            let ok = match k {
                VarKind::Free => v.is_finite(),
                VarKind::Boxed => v.abs() < self.bound,
                VarKind::NonNeg => v > 0.0 && v < self.bound,
            };
            if !ok {
                return false;
            }
        }
        self.rows.iter().all(|(r, h)| h - dot(r, y) > 0.0)
    }

    fn evaluate(&self, y: &[f64], mu: f64) -> Option<Eval> {
        let p = y.len();
        let chol = self.slack(y).cholesky()?;
        let s_inv = chol.inverse();
        let w: Vec<CMatrix> = self.f.iter().map(|fa| &s_inv * fa).collect();

        let mut grad = DVector::from_fn(p, |a, _| self.b[a] / mu);
        let mut hess = DMatrix::zeros(p, p);
        for a in 0..p {
            // d/dy_a log det S = -Tr(S^{-1} F_a)
            grad[a] -= w[a].trace().re;
            for c in a..p {
                let h = trace_of_product(&w[a], &w[c]);
                hess[(a, c)] = h;
                hess[(c, a)] = h;
            }
        }
        for (a, (k, &v)) in self.kind.iter().zip(y).enumerate() {
            match k {
                VarKind::Free => {}
                VarKind::Boxed => {
                    let (lo, hi) = (self.bound + v, self.bound - v);
                    grad[a] += 1.0 / lo - 1.0 / hi;
                    hess[(a, a)] += 1.0 / (lo * lo) + 1.0 / (hi * hi);
                }
                VarKind::NonNeg => {
                    let hi = self.bound - v;
                    grad[a] += 1.0 / v - 1.0 / hi;
                    hess[(a, a)] += 1.0 / (v * v) + 1.0 / (hi * hi);
                }
            }
        }
        for (r, h) in &self.rows {
            let slack = h - dot(r, y);
            for a in 0..p {
                grad[a] -= r[a] / slack;
                for c in 0..p {
                    hess[(a, c)] += r[a] * r[c] / (slack * slack);
                }
            }
        }
        Some(Eval { grad, hess, s_inv })
    }

    /// A strictly feasible point: non-lead variables at `init`, the lead
    /// variable pushed until `S` is comfortably positive definite.
    fn starting_point(&self, init: &[f64]) -> Result<Vec<f64>> {
        let mut y = init.to_vec();
        y[self.lead] = 0.0;
        let rest = HermitianMatrix::symmetrized(self.slack(&y));
        // The lead coefficient is s I with s = +-1: S = rest - y_lead s I.
        let sign = self.f[self.lead][(0, 0)].re.signum();
        let margin = self.scale.max(1.0);
        let lam = rest.min_eigenvalue()?;
        y[self.lead] = sign * (lam - margin);
        if !self.in_domain(&y) {
            return Err(Error::SolverFailure("no strictly feasible dual start".into()));
        }
        Ok(y)
    }

    pub fn solve(&self, init: &[f64]) -> Result<BarrierOutcome> {
        let mut y = self.starting_point(init)?;
        let nu = self.nu();
        let scale = self.scale.max(1.0);
        let mut mu = scale;
        let mut steps = 0usize;
        let mut path = Vec::new();
        loop {
            let before = y.clone();
            match self.center(&mut y, mu, MAX_NEWTON.saturating_sub(steps)) {
                Ok(k) => steps += k,
                // Late in the path the previous centre is already within the
                // accepted gap; keep it rather than fail.
                Err(Error::MaxIterations { iterations, .. })
                    if !path.is_empty() && MU_FACTOR * mu * nu <= LATE_GAP_TOL * scale =>
                {
                    steps += iterations;
                    y = before;
                    mu *= MU_FACTOR;
                    break;
                }
                Err(e) => return Err(e),
            }
            let eval = self
                .evaluate(&y, mu)
                .ok_or_else(|| Error::SolverFailure("iterate left the domain".into()))?;
            path.push(Snapshot {
                rho: eval.s_inv * Complex64::new(mu, 0.0),
                z: self.rows.iter().map(|(r, h)| mu / (h - dot(r, &y))).collect(),
            });
            if mu * nu <= GAP_TOL * scale {
                break;
            }
            mu /= MU_FACTOR;
        }
        let primal = self.recover_primal(&path, &y, mu)?;
        Ok(BarrierOutcome { dual_value: dot(&self.b, &y), y, primal, gap: mu * nu, newton_steps: steps })
    }

    /// `mu S^{-1}` loses accuracy as `S` approaches a singular matrix, since
    /// `S` is formed by cancellation. Candidates are the recorded central-path
    /// points and their first- and second-order Richardson extrapolations to
    /// `mu = 0`; the winner minimizes the primal objective plus an exact
    /// penalty on the primal residuals, weighted by the final multipliers.
    fn recover_primal(&self, path: &[Snapshot], y: &[f64], mu: f64) -> Result<HermitianMatrix> {
        let tail = &path[path.len().saturating_sub(8)..];
        let combine = |a: &Snapshot, b: &Snapshot, r: f64| Snapshot {
            rho: (&b.rho * Complex64::new(r, 0.0) - &a.rho) / Complex64::new(r - 1.0, 0.0),
            z: a.z.iter().zip(&b.z).map(|(x, w)| (r * w - x) / (r - 1.0)).collect(),
        };
        let first: Vec<Snapshot> = tail.windows(2).map(|w| combine(&w[0], &w[1], MU_FACTOR)).collect();
        let second: Vec<Snapshot> = first.windows(2).map(|w| combine(&w[0], &w[1], MU_FACTOR * MU_FACTOR)).collect();

        let weights: Vec<f64> = y.iter().map(|v| 2.0 * v.abs() + 1.0).collect();
        let mut best: Option<(f64, HermitianMatrix, Vec<f64>)> = None;
        for cand in tail.iter().chain(&first).chain(&second) {
            let Some((score, rho)) = self.primal_score(cand, &weights) else { continue };
            if best.as_ref().is_none_or(|(s, _, _)| score < *s) {
                best = Some((score, rho, cand.z.clone()));
            }
        }
        let (score, rho, z) =
            best.ok_or_else(|| Error::SolverFailure("no usable primal point on the central path".into()))?;
        if let Some(refined) = self.refine_on_face(&rho, &z, y, mu) {
            if let Some((s2, rho2)) = self.primal_score(&refined, &weights) {
                if s2 <= score {
                    return Ok(rho2);
                }
            }
        }
        Ok(rho)
    }

    /// Projects `rho` onto the face `V X V^H` picked out by the near-null space
    /// `V` of the final slack, with the active primal constraints imposed as
    /// equalities by a minimum-norm correction.
    fn refine_on_face(&self, rho: &HermitianMatrix, z: &[f64], y: &[f64], mu: f64) -> Option<Snapshot> {
        let n = self.dim();
        let cut = (mu * self.scale.max(1.0)).sqrt();
        let slack = crate::linalg::eig(&HermitianMatrix::symmetrized(self.slack(y))).ok()?;
        let face: Vec<usize> = (0..n).filter(|&i| slack.eigenvalues[i] <= cut).collect();
        let r = face.len();
        if r == 0 {
            return None;
        }
        let v = CMatrix::from_fn(n, r, |i, j| slack.eigenvectors[(i, face[j])]);
        let vh = v.adjoint();
        let x0 = &vh * rho.as_matrix() * &v;

        // Real coordinates of X: diagonal, then (re, im) of the strict upper triangle.
        let coords = |g: &CMatrix| -> Vec<f64> {
            let mut out = Vec::with_capacity(r * r);
            for i in 0..r {
                out.push(g[(i, i)].re);
            }
            for i in 0..r {
                for j in (i + 1)..r {
                    out.push(2.0 * g[(j, i)].re);
                    out.push(-2.0 * g[(j, i)].im);
                }
            }
            out
        };
        let mut x = Vec::with_capacity(r * r);
        for i in 0..r {
            x.push(x0[(i, i)].re);
        }
        for i in 0..r {
            for j in (i + 1)..r {
                x.push(x0[(i, j)].re);
                x.push(x0[(i, j)].im);
            }
        }
        let active_row: Vec<bool> = self.rows.iter().map(|(row, h)| h - dot(row, y) <= cut).collect();
        let zvars: Vec<usize> = (0..self.rows.len()).filter(|&k| active_row[k]).collect();
        let nvar = r * r + zvars.len();

        let mut eqs: Vec<(Vec<f64>, f64)> = Vec::new();
        for (a, fa) in self.f.iter().enumerate() {
            let active = match self.kind[a] {
                VarKind::Free | VarKind::Boxed => true,
                VarKind::NonNeg => y[a] * y[a] > mu,
            };
            if !active {
                continue;
            }
            let mut row = coords(&(&vh * fa * &v));
            for &k in &zvars {
                row.push(self.rows[k].0[a]);
            }
            eqs.push((row, self.b[a]));
        }
        if eqs.is_empty() {
            return None;
        }
        let mut xz = x;
        xz.extend(zvars.iter().map(|&k| z[k].max(0.0)));
        let a = DMatrix::from_fn(eqs.len(), nvar, |i, j| eqs[i].0[j]);
        let resid = DVector::from_fn(eqs.len(), |i, _| eqs[i].1 - dot(&eqs[i].0, &xz));
        let svd = a.svd(true, true);
        let tol = 1e-12 * svd.singular_values.max().max(1.0);
        let delta = svd.solve(&resid, tol).ok()?;
        for (xi, d) in xz.iter_mut().zip(delta.iter()) {
            *xi += d;
        }

        let mut xm = CMatrix::zeros(r, r);
        let mut k = 0;
        for i in 0..r {
            xm[(i, i)] = Complex64::new(xz[k], 0.0);
            k += 1;
        }
        for i in 0..r {
            for j in (i + 1)..r {
                xm[(i, j)] = Complex64::new(xz[k], xz[k + 1]);
                xm[(j, i)] = Complex64::new(xz[k], -xz[k + 1]);
                k += 2;
            }
        }
        let mut zfull = vec![0.0; self.rows.len()];
        for (slot, &kk) in zvars.iter().enumerate() {
            zfull[kk] = xz[r * r + slot];
        }
        Some(Snapshot { rho: &v * xm * &vh, z: zfull })
    }

    fn primal_score(&self, cand: &Snapshot, weights: &[f64]) -> Option<(f64, HermitianMatrix)> {
        let rho = crate::measurement::clip_psd(&HermitianMatrix::symmetrized(cand.rho.clone())).ok()?;
        let z: Vec<f64> = cand.z.iter().map(|v| v.max(0.0)).collect();
        let m = rho.as_matrix();
        let mut score = trace_of_product(&self.c, m) + self.rows.iter().zip(&z).map(|((_, h), zr)| h * zr).sum::<f64>();
        for (a, fa) in self.f.iter().enumerate() {
            let lhs = trace_of_product(fa, m) + self.rows.iter().zip(&z).map(|((r, _), zr)| r[a] * zr).sum::<f64>();
            let resid = lhs - self.b[a];
            let viol = match self.kind[a] {
                VarKind::NonNeg => (-resid).max(0.0),
                VarKind::Free | VarKind::Boxed => resid.abs(),
            };
            score += weights[a] * viol;
        }
        score.is_finite().then_some((score, rho))
    }

    /// Damped Newton ascent on the barrier function for fixed `mu`. Steps are
    /// `1 / (1 + lambda)` outside the quadratic region, which keeps the iterate
    /// in the domain of a self-concordant barrier without value comparisons
    /// (those lose all precision once `1 / mu` is large).
    fn center(&self, y: &mut Vec<f64>, mu: f64, budget: usize) -> Result<usize> {
        let mut steps = 0;
        let mut previous = f64::INFINITY;
        loop {
            let eval = self
                .evaluate(y, mu)
                .ok_or_else(|| Error::SolverFailure("iterate left the barrier domain".into()))?;
            let dir = newton_direction(&eval.hess, &eval.grad)?;
            let decrement = eval.grad.dot(&dir).max(0.0);
            // Once centred, keep taking full steps while they still help:
            // primal residuals scale with the root of the decrement.
            if decrement <= POLISH_TOL || (decrement <= NEWTON_TOL && decrement >= 0.25 * previous) {
                return Ok(steps);
            }
            previous = decrement;
            if steps >= budget.min(CENTER_STEPS) {
                if decrement <= 1e-6 {
                    return Ok(steps);
                }
                return Err(Error::MaxIterations { iterations: steps, gap: mu * self.nu() });
            }
            steps += 1;
            let lambda = decrement.sqrt();
            let mut t = if lambda > 0.25 { 1.0 / (1.0 + lambda) } else { 1.0 };
            loop {
                let trial: Vec<f64> = y.iter().zip(dir.iter()).map(|(a, d)| a + t * d).collect();
                if trial.iter().zip(y.iter()).all(|(a, b)| (a - b).abs() <= 8.0 * f64::EPSILON * b.abs().max(1.0)) {
                    // The step is below floating-point resolution of the iterate.
                    return Ok(steps);
                }
                if self.in_domain(&trial) && self.slack(&trial).cholesky().is_some() {
                    *y = trial;
                    break;
                }
                t *= 0.5;
                if t < 1e-14 {
                    // Stalled at floating-point resolution.
                    return Ok(steps);
                }
            }
        }
    }
}

fn newton_direction(hess: &DMatrix<f64>, grad: &DVector<f64>) -> Result<DVector<f64>> {
    if let Some(ch) = hess.clone().cholesky() {
        return Ok(ch.solve(grad));
    }
    let jitter = 1e-12 * hess.diagonal().amax().max(1e-300);
    let mut h = hess.clone();
    for i in 0..h.nrows() {
        h[(i, i)] += jitter;
    }
    h.cholesky()
        .map(|ch| ch.solve(grad))
        .ok_or_else(|| Error::SolverFailure("Newton system is not positive definite".into()))
}

/// `Re Tr(A B)`.
fn trace_of_product(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            let (x, y) = (a[(i, j)], b[(j, i)]);
            acc += x.re * y.re - x.im * y.im;
        }
    }
    acc
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
