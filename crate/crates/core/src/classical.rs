//! Classical probability as the diagonal special case.
//!
//! A probability mass function `p` on `n` outcomes embeds as `diag(p)`. Sets of
//! mass functions embed as credal sets of diagonal density matrices: extreme
//! points map directly, and linear inequalities `a . p >= b` become the
//! gambles `diag(a) - b I` together with pins forcing every off-diagonal entry
//! to zero.

use serde::Serialize;

use crate::credal::{credal_from_assessments, Assessment, CredalSet, Representation};
use crate::error::{Error, Result};
use crate::linalg::{traceless_basis, HermitianMatrix};
use crate::measurement::DensityMatrix;
use crate::optim::simplex_vertices;

const DIST_TOL: f64 = 1e-9;
const DIAG_TOL: f64 = 1e-9;

/// A set of probability mass functions on `n` outcomes.
#[derive(Clone, Debug, PartialEq)]
pub enum ClassicalModel {
    Point(Vec<f64>),
    /// Convex hull of the listed mass functions.
    Vertices(Vec<Vec<f64>>),
    /// `{p : sum_i a_i p_i >= b for each (a, b)}`.
    Inequalities { n: usize, rows: Vec<(Vec<f64>, f64)> },
}

impl ClassicalModel {
    /// `lo <= p_outcome <= hi`, other outcomes free.
    pub fn interval(n: usize, outcome: usize, lo: f64, hi: f64) -> Result<Self> {
        if outcome >= n {
            return Err(Error::InvalidArgument(format!("outcome {outcome} out of range for {n} outcomes")));
        }
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
            return Err(Error::InvalidDistribution(format!("interval [{lo}, {hi}] is not a probability range")));
        }
        let mut up = vec![0.0; n];
        up[outcome] = 1.0;
        let down: Vec<f64> = up.iter().map(|x| -x).collect();
        Ok(ClassicalModel::Inequalities { n, rows: vec![(up, lo), (down, -hi)] })
    }
}

fn check_distribution(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::InvalidDistribution("no outcomes".into()));
    }
    if let Some((i, v)) = p.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < -DIST_TOL) {
        return Err(Error::InvalidDistribution(format!("p[{i}] = {v} is negative")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > DIST_TOL {
        return Err(Error::InvalidDistribution(format!("probabilities sum to {total}")));
    }
    Ok(())
}

fn embed_point(p: &[f64]) -> Result<DensityMatrix> {
    check_distribution(p)?;
    let clipped: Vec<f64> = p.iter().map(|v| v.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    DensityMatrix::diagonal(&clipped.iter().map(|v| v / total).collect::<Vec<_>>())
}

/// Pairs of opposite gambles whose border constraints force the real and
/// imaginary part of every off-diagonal entry to zero.
pub fn classical_pins(n: usize) -> Vec<HermitianMatrix> {
    let off = n * (n - 1);
    let mut out = Vec::with_capacity(2 * off);
    for e in traceless_basis(n).into_iter().take(off) {
        out.push(-&e);
        out.push(e);
    }
    out
}

/// Diagonal credal set of a classical model.
pub fn classical_embed(model: &ClassicalModel) -> Result<CredalSet> {
    match model {
        ClassicalModel::Point(p) => Ok(CredalSet::singleton(embed_point(p)?)),
        ClassicalModel::Vertices(vs) => {
            CredalSet::from_extreme_points(vs.iter().map(|v| embed_point(v)).collect::<Result<Vec<_>>>()?)
        }
        ClassicalModel::Inequalities { n, rows } => {
            let mut constraints = classical_pins(*n);
            for (a, b) in rows {
                if a.len() != *n {
                    return Err(Error::DimensionMismatch { expected: *n, found: a.len() });
                }
                constraints.push(HermitianMatrix::diagonal(a).shift(-b));
            }
            CredalSet::from_constraints(*n, constraints).map_err(|e| match e {
                Error::EmptyCredalSet { margin } => {
                    Error::InvalidDistribution(format!("no mass function satisfies the inequalities (margin {margin:e})"))
                }
                other => other,
            })
        }
    }
}

/// Classical reading of assessments: the off-diagonal pins are added as
/// border assessments, so the result contains only diagonal states.
pub fn classical_from_assessments(assessments: &[Assessment], n: usize) -> Result<CredalSet> {
    let mut all = assessments.to_vec();
    all.extend(classical_pins(n).into_iter().map(Assessment::border));
    credal_from_assessments(&all, n)
}

/// A diagonal credal set read back as a set of mass functions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassicalProjection {
    /// `[lower, upper]` probability of each outcome.
    pub outcome_bounds: Vec<(f64, f64)>,
    /// Extreme mass functions, when they could be enumerated.
    pub vertices: Option<Vec<Vec<f64>>>,
    /// Homogeneous rows `a` meaning `a . p >= 0`.
    pub inequalities: Vec<Vec<f64>>,
}

/// Reads a credal set of diagonal states as a set of mass functions.
/// Constraints with an all-zero diagonal (off-diagonal pins) are ignored;
/// any other non-diagonal data is rejected.
pub fn classical_project(m: &CredalSet) -> Result<ClassicalProjection> {
    let n = m.dim();
    let (vertices, inequalities) = match m.representation() {
        Representation::VRep(points) => {
            let mut vs = Vec::with_capacity(points.len());
            for p in points {
                if !off_diagonal_small(p.matrix()) {
                    return Err(Error::InvalidArgument("extreme point is not diagonal".into()));
                }
                vs.push(p.matrix().diag());
            }
            (Some(vs), Vec::new())
        }
        Representation::HRep(cons) => {
            let mut rows = Vec::new();
            for a in cons {
                if a.has_zero_diagonal() {
                    continue;
                }
                if !off_diagonal_small(a) {
                    return Err(Error::InvalidArgument("constraint gamble is not diagonal".into()));
                }
                rows.push(a.diag());
            }
            let vertices = match simplex_vertices(n, &rows) {
                Ok(v) => Some(v),
                Err(Error::DimensionTooLarge(_)) => None,
                Err(e) => return Err(e),
            };
            (vertices, rows)
        }
        _ => return Err(Error::Unsupported("classical reading of an implicit set".into())),
    };
    let mut outcome_bounds = Vec::with_capacity(n);
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        let p = m.prevision(&HermitianMatrix::diagonal(&e))?;
        outcome_bounds.push((p.lower, p.upper));
    }
    Ok(ClassicalProjection { outcome_bounds, vertices, inequalities })
}

fn off_diagonal_small(a: &HermitianMatrix) -> bool {
    let n = a.dim();
    (0..n).all(|i| (0..n).all(|j| i == j || a.get(i, j).norm() <= DIAG_TOL * a.norm_inf().max(1.0)))
}
