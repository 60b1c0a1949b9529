//! Projective measurements, payoffs and Born probabilities.

use crate::error::{Error, Result};
use crate::linalg::{
    check_dims, classify, eig, inner, norm_inf, CMatrix, Complex64, HermitianMatrix,
};

const TOL_PROJ: f64 = 1e-10;
const TOL_RANK: f64 = 1e-9;
const TOL_TRACE: f64 = 1e-9;
const TOL_NEG_PROB: f64 = 1e-12;

/// An orthogonal projector `P = P^2 = P^H`.
#[derive(Clone, Debug, PartialEq)]
pub struct Projector {
    matrix: HermitianMatrix,
    rank: usize,
}

impl Projector {
    pub fn new(matrix: HermitianMatrix) -> Result<Self> {
        Self::validate(matrix, 0)
    }

    fn validate(matrix: HermitianMatrix, index: usize) -> Result<Self> {
        let m = matrix.as_matrix();
        let idem = norm_inf(&(m * m - m));
        if idem > TOL_PROJ {
            return Err(Error::NotProjector { index, reason: format!("not idempotent (|P^2 - P| = {idem:e})") });
        }
        let class = classify(&matrix);
        if !(class.is_positive()) {
            return Err(Error::NotProjector { index, reason: format!("not positive semi-definite and non-zero ({class:?})") });
        }
        let tr = matrix.trace();
        let rank = tr.round();
        if (tr - rank).abs() > TOL_RANK {
            return Err(Error::NotProjector { index, reason: format!("trace {tr} is not an integer") });
        }
        Ok(Self { matrix, rank: rank as usize })
    }

    /// Rank-one projector onto `v`.
    pub fn onto(v: &[Complex64]) -> Result<Self> {
        Self::new(HermitianMatrix::projector_onto(v))
    }

    /// `e_i e_i^T` in dimension `n`.
    pub fn basis(n: usize, i: usize) -> Self {
        let mut d = vec![0.0; n];
        d[i] = 1.0;
        Self { matrix: HermitianMatrix::diagonal(&d), rank: 1 }
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

/// A complete family of mutually orthogonal projectors.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectiveMeasurement {
    projectors: Vec<Projector>,
}

impl ProjectiveMeasurement {
    pub fn new(projectors: Vec<HermitianMatrix>) -> Result<Self> {
        make_measurement(projectors)
    }

    /// `{e_1 e_1^T, ..., e_n e_n^T}`.
    pub fn canonical(n: usize) -> Self {
        Self { projectors: (0..n).map(|i| Projector::basis(n, i)).collect() }
    }

    /// Rank-one projectors onto the columns of a unitary matrix.
    pub fn from_unitary_columns(u: &CMatrix) -> Result<Self> {
        let cols: Vec<HermitianMatrix> = (0..u.ncols())
            .map(|j| HermitianMatrix::projector_onto(&u.column(j).iter().copied().collect::<Vec<_>>()))
            .collect();
        make_measurement(cols)
    }

    pub fn projectors(&self) -> &[Projector] {
        &self.projectors
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].dim()
    }

    /// `sum_{j in J} P_j`.
    pub fn event(&self, indices: &[usize]) -> Result<HermitianMatrix> {
        let mut acc = HermitianMatrix::zeros(self.dim());
        for &j in indices {
            let p = self
                .projectors
                .get(j)
                .ok_or_else(|| Error::InvalidArgument(format!("outcome index {j} out of range")))?;
            acc = &acc + p.matrix();
        }
        Ok(acc)
    }
}

/// Validates a projector family: each projector, pairwise orthogonality, completeness.
pub fn make_measurement(projectors: Vec<HermitianMatrix>) -> Result<ProjectiveMeasurement> {
    let n = projectors.first().ok_or_else(|| Error::InvalidArgument("empty projector list".into()))?.dim();
    let mut checked = Vec::with_capacity(projectors.len());
    for (i, p) in projectors.into_iter().enumerate() {
        check_dims(n, p.dim())?;
        checked.push(Projector::validate(p, i)?);
    }
    for i in 0..checked.len() {
        for k in (i + 1)..checked.len() {
            let prod = checked[i].matrix.as_matrix() * checked[k].matrix.as_matrix();
            let deviation = norm_inf(&prod);
            if deviation > TOL_PROJ {
                return Err(Error::NotOrthogonal { first: i, second: k, deviation });
            }
        }
    }
    let mut sum = CMatrix::zeros(n, n);
    for p in &checked {
        sum += p.matrix.as_matrix();
    }
    let deviation = norm_inf(&(sum - CMatrix::identity(n, n)));
    if deviation > TOL_PROJ {
        return Err(Error::NotComplete { deviation });
    }
    Ok(ProjectiveMeasurement { projectors: checked })
}

/// A positive semi-definite, trace-one Hermitian matrix.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
#[serde(transparent)]
pub struct DensityMatrix {
    matrix: HermitianMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: HermitianMatrix) -> Result<Self> {
        let class = classify(&matrix);
        if !class.is_positive() {
            return Err(Error::NotDensityMatrix { reason: format!("not positive semi-definite ({class:?})") });
        }
        let tr = matrix.trace();
        if (tr - 1.0).abs() > TOL_TRACE {
            return Err(Error::NotDensityMatrix { reason: format!("trace {tr} differs from 1") });
        }
        Ok(Self { matrix })
    }

    /// Clips negative eigenvalues and rescales to unit trace. For solver output.
    pub(crate) fn from_near_psd(matrix: &HermitianMatrix) -> Result<Self> {
        let clipped = clip_psd(matrix)?;
        let tr = clipped.trace();
        if tr <= 0.0 {
            return Err(Error::NotDensityMatrix { reason: "no positive spectrum".into() });
        }
        Ok(Self { matrix: clipped.scale(1.0 / tr) })
    }

    /// Normalizes a PSD matrix with positive trace.
    pub fn normalized(matrix: &HermitianMatrix) -> Result<Self> {
        let tr = matrix.trace();
        if tr <= 0.0 {
            return Err(Error::NotDensityMatrix { reason: format!("trace {tr} is not positive") });
        }
        Self::new(matrix.scale(1.0 / tr))
    }

    pub fn maximally_mixed(n: usize) -> Self {
        Self { matrix: HermitianMatrix::identity(n).scale(1.0 / n as f64) }
    }

    pub fn pure(v: &[Complex64]) -> Self {
        Self { matrix: HermitianMatrix::projector_onto(v) }
    }

    pub fn diagonal(p: &[f64]) -> Result<Self> {
        Self::new(HermitianMatrix::diagonal(p))
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> HermitianMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// `Tr(G^H rho)`.
    pub fn expectation(&self, g: &HermitianMatrix) -> Result<f64> {
        inner(g, &self.matrix)
    }
}

/// The scalar `gamma` with `P G P = gamma P` for a rank-one `P`.
pub fn payoff(g: &HermitianMatrix, p: &Projector) -> Result<f64> {
    check_dims(p.dim(), g.dim())?;
    if p.rank != 1 {
        return Err(Error::RankNotOne { rank: p.rank });
    }
    let gamma = inner(p.matrix(), g)?;
    debug_assert!(
        (&g.sandwich(p.matrix())? - &p.matrix().scale(gamma)).norm_inf() <= 1e-10 * g.norm_inf().max(1.0),
        "rank-one sandwich is not proportional to the projector"
    );
    Ok(gamma)
}

/// Outcome probabilities `Tr(P_i rho P_i)`.
pub fn born_probabilities(rho: &DensityMatrix, m: &ProjectiveMeasurement) -> Result<Vec<f64>> {
    check_dims(m.dim(), rho.dim())?;
    let mut probs = Vec::with_capacity(m.len());
    for (index, p) in m.projectors().iter().enumerate() {
        let value = inner(p.matrix(), rho.matrix())?;
        if value < -TOL_NEG_PROB {
            return Err(Error::NegativeProbability { index, value });
        }
        probs.push(value.max(0.0));
    }
    let total: f64 = probs.iter().sum();
    Ok(probs.into_iter().map(|p| p / total).collect())
}

/// Rank-one projectors onto the eigenvectors of `rho`, ascending eigenvalue order.
pub fn eigenmeasurement(rho: &DensityMatrix) -> Result<ProjectiveMeasurement> {
    let e = eig(rho.matrix())?;
    let projectors = (0..rho.dim()).map(|j| HermitianMatrix::projector_onto(&e.column(j))).collect();
    make_measurement(projectors)
}

/// `sum_i P_i G P_i`. Differs from `G` unless `G` commutes with the measurement.
pub fn dephase(g: &HermitianMatrix, m: &ProjectiveMeasurement) -> Result<HermitianMatrix> {
    check_dims(m.dim(), g.dim())?;
    let mut acc = HermitianMatrix::zeros(g.dim());
    for p in m.projectors() {
        acc = &acc + &g.sandwich(p.matrix())?;
    }
    Ok(acc)
}

/// Sets negative eigenvalues to zero.
pub(crate) fn clip_psd(matrix: &HermitianMatrix) -> Result<HermitianMatrix> {
    Ok(eig(matrix)?.map_spectrum(|l| l.max(0.0)))
}
