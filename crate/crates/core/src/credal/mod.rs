//! Credal sets: closed convex sets of density matrices dual to coherent sets
//! of desirable gambles, and the operations on them.

mod coherence;
mod composite;
mod conditioning;
mod vrep;

pub use coherence::{
    check_coherence, credal_from_assessments, CoherenceReport, CoherenceStatus, PartialLossCertificate,
};
pub use composite::{
    check_independence, check_irrelevance_probe, frechet_check, marginal, natural_extension, random_measurements,
    FrechetReport, IndependenceReport, IrrelevanceDirection, IrrelevanceReport, HAAR_FAMILY_SIZE,
};
pub use conditioning::{condition_nonselective, condition_selective};
pub use vrep::{hull_contains, vrep_to_hrep};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    classify, conjugate, eig, embed_local, gell_mann_basis, hermitian_from_coords, inner, CMatrix, Definiteness,
    Direction, HermitianMatrix, Subsystem, UnitaryMap,
};
use crate::measurement::DensityMatrix;
use crate::optim::{conditional_bisection, feasibility_margin_dim, lower_expectation, GambleMap, BISECTION_TOL};

/// Strict positivity required of the coherence margin.
pub const COHERENCE_TOL: f64 = 1e-9;
/// Accuracy of previsions and the maximality spread.
pub const PREVISION_TOL: f64 = 1e-7;
/// Agreement required when two sets are compared through probe previsions.
pub const SET_TOL: f64 = 1e-6;
/// Probabilities at or below this are treated as zero when conditioning.
pub const ZERO_PROB_TOL: f64 = 1e-9;
/// Constraint slack allowed in membership tests, relative to the gamble norm.
pub const MEMBERSHIP_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strictness {
    /// In the open cone: must be strictly preferred to the status quo.
    Strict,
    /// Desirable but not strictly; pins the boundary of the cone.
    Border,
}

/// One gamble Alice accepts.
#[derive(Clone, Debug, PartialEq)]
pub struct Assessment {
    pub gamble: HermitianMatrix,
    pub strictness: Strictness,
}

impl Assessment {
    pub fn strict(gamble: HermitianMatrix) -> Self {
        Self { gamble, strictness: Strictness::Strict }
    }

    pub fn border(gamble: HermitianMatrix) -> Self {
        Self { gamble, strictness: Strictness::Border }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PrevisionInterval {
    pub lower: f64,
    pub upper: f64,
}

/// How a credal set is stored.
#[derive(Clone, Debug, PartialEq)]
pub enum Representation {
    /// `{rho in D : Tr(A_j^H rho) >= 0 for all j}`.
    HRep(Vec<HermitianMatrix>),
    /// Convex hull of the listed density matrices.
    VRep(Vec<DensityMatrix>),
    /// Implicit conditional of `base` under the Lüders-type `map`.
    Conditioned { base: Box<CredalSet>, map: GambleMap },
    /// Implicit marginal of a joint set on the `keep` factor.
    Marginal { joint: Box<CredalSet>, dims: (usize, usize), keep: Subsystem },
}

#[derive(Clone, Debug, PartialEq)]
pub struct CredalSet {
    dim: usize,
    repr: Representation,
}

impl CredalSet {
    /// All density matrices of dimension `n`: full ignorance.
    pub fn vacuous(n: usize) -> Self {
        Self { dim: n, repr: Representation::HRep(Vec::new()) }
    }

    /// HRep set. Positive semi-definite (and zero) constraints are vacuous
    /// and dropped; the remaining system must be feasible.
    pub fn from_constraints(n: usize, constraints: Vec<HermitianMatrix>) -> Result<Self> {
        for a in &constraints {
            crate::linalg::check_dims(n, a.dim())?;
        }
        let kept: Vec<HermitianMatrix> = constraints.into_iter().filter(is_informative).collect();
        if !kept.is_empty() {
            let m = feasibility_margin_dim(&kept, &[], n)?;
            if !m.feasible {
                return Err(Error::EmptyCredalSet { margin: m.margin });
            }
        }
        Ok(Self { dim: n, repr: Representation::HRep(kept) })
    }

    /// VRep set: the convex hull of `points`.
    pub fn from_extreme_points(points: Vec<DensityMatrix>) -> Result<Self> {
        let n = points.first().ok_or_else(|| Error::InvalidArgument("no extreme points".into()))?.dim();
        for p in &points {
            crate::linalg::check_dims(n, p.dim())?;
        }
        Ok(Self { dim: n, repr: Representation::VRep(points) })
    }

    pub fn singleton(rho: DensityMatrix) -> Self {
        Self { dim: rho.dim(), repr: Representation::VRep(vec![rho]) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn representation(&self) -> &Representation {
        &self.repr
    }

    /// True for the HRep set without constraints.
    pub fn is_vacuous(&self) -> bool {
        matches!(&self.repr, Representation::HRep(c) if c.is_empty())
    }

    pub fn constraints(&self) -> Option<&[HermitianMatrix]> {
        match &self.repr {
            Representation::HRep(c) => Some(c),
            _ => None,
        }
    }

    pub fn extreme_points(&self) -> Option<&[DensityMatrix]> {
        match &self.repr {
            Representation::VRep(p) => Some(p),
            _ => None,
        }
    }

    /// `inf_{rho in M} Tr(G^H rho)`.
    pub fn lower_prevision(&self, g: &HermitianMatrix) -> Result<f64> {
        crate::linalg::check_dims(self.dim, g.dim())?;
        match &self.repr {
            Representation::HRep(c) => lower_expectation(g, c),
            Representation::VRep(points) => {
                let mut best = f64::INFINITY;
                for p in points {
                    best = best.min(inner(g, p.matrix())?);
                }
                Ok(best)
            }
            Representation::Conditioned { base, map } => {
                if base.is_vacuous() {
                    compressed_minimum(g, map)
                } else {
                    conditional_bisection(|x| base.lower_prevision(x), map, g, BISECTION_TOL)
                }
            }
            Representation::Marginal { joint, dims, keep } => joint.lower_prevision(&embed_local(g, *dims, *keep)?),
        }
    }

    /// `sup_{rho in M} Tr(G^H rho) = -P(-G)`.
    pub fn upper_prevision(&self, g: &HermitianMatrix) -> Result<f64> {
        Ok(-self.lower_prevision(&-g)?)
    }

    pub fn prevision(&self, g: &HermitianMatrix) -> Result<PrevisionInterval> {
        Ok(PrevisionInterval { lower: self.lower_prevision(g)?, upper: self.upper_prevision(g)? })
    }

    /// Positive semi-definite non-zero gambles, or a positive lower prevision.
    pub fn is_desirable(&self, g: &HermitianMatrix) -> Result<bool> {
        crate::linalg::check_dims(self.dim, g.dim())?;
        if classify(g).is_positive() {
            return Ok(true);
        }
        Ok(self.lower_prevision(g)? > COHERENCE_TOL)
    }

    /// Membership of `rho`, with constraint slack [`MEMBERSHIP_TOL`].
    pub fn contains(&self, rho: &DensityMatrix) -> Result<bool> {
        crate::linalg::check_dims(self.dim, rho.dim())?;
        match &self.repr {
            Representation::HRep(c) => {
                for a in c {
                    if inner(a, rho.matrix())? < -MEMBERSHIP_TOL * a.norm_inf().max(1.0) {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Representation::VRep(points) => hull_contains(points, rho),
            Representation::Conditioned { base, map } if base.is_vacuous() => {
                let image = map.apply(rho.matrix())?;
                Ok((&image - rho.matrix()).norm_inf() <= MEMBERSHIP_TOL)
            }
            Representation::Conditioned { .. } => {
                Err(Error::Unsupported("membership in an implicit conditional set".into()))
            }
            Representation::Marginal { joint, dims, keep } => marginal_contains(joint, *dims, *keep, rho),
        }
    }

    /// True when every generalized Gell-Mann probe has a spread of at most
    /// [`PREVISION_TOL`], i.e. the set is a single density matrix.
    pub fn is_maximal(&self) -> Result<bool> {
        Ok(self.spreads()?.iter().all(|(_, s)| *s <= PREVISION_TOL))
    }

    /// The unique member of a maximal set.
    pub fn extract_state(&self) -> Result<DensityMatrix> {
        let n = self.dim;
        let mut coords = vec![1.0 / (n as f64).sqrt()];
        for (index, (mid, spread)) in self.spreads()?.into_iter().enumerate() {
            if spread > PREVISION_TOL {
                return Err(Error::NotMaximal { index: index + 1, spread });
            }
            coords.push(mid);
        }
        let m = hermitian_from_coords(n, &coords);
        let lam = m.min_eigenvalue()?;
        if lam < -SET_TOL {
            return Err(Error::NotDensityMatrix { reason: format!("reconstructed state has eigenvalue {lam:e}") });
        }
        DensityMatrix::from_near_psd(&m)
    }

    /// Midpoint and spread of each traceless basis probe.
    fn spreads(&self) -> Result<Vec<(f64, f64)>> {
        gell_mann_basis(self.dim)
            .iter()
            .skip(1)
            .map(|e| {
                let p = self.prevision(e)?;
                Ok((0.5 * (p.lower + p.upper), p.upper - p.lower))
            })
            .collect()
    }

    /// Time evolution `rho -> U rho U^H`; constraint gambles move the same way
    /// so that membership is preserved.
    pub fn evolve(&self, u: &UnitaryMap) -> Result<CredalSet> {
        crate::linalg::check_dims(self.dim, u.dim())?;
        let repr = match &self.repr {
            Representation::HRep(c) => Representation::HRep(
                c.iter().map(|a| conjugate(u, a, Direction::State)).collect::<Result<Vec<_>>>()?,
            ),
            Representation::VRep(points) => Representation::VRep(
                points
                    .iter()
                    .map(|p| DensityMatrix::from_near_psd(&conjugate(u, p.matrix(), Direction::State)?))
                    .collect::<Result<Vec<_>>>()?,
            ),
            Representation::Conditioned { base, map } => {
                let moved = |p: &HermitianMatrix| conjugate(u, p, Direction::State);
                let map = match map {
                    GambleMap::Selective(p) => GambleMap::Selective(moved(p)?),
                    GambleMap::NonSelective(ps) => {
                        GambleMap::NonSelective(ps.iter().map(moved).collect::<Result<Vec<_>>>()?)
                    }
                };
                Representation::Conditioned { base: Box::new(base.evolve(u)?), map }
            }
            Representation::Marginal { joint, dims, keep } => {
                let (n, m) = *dims;
                let full = match keep {
                    Subsystem::A => u.matrix().kronecker(&CMatrix::identity(m, m)),
                    Subsystem::B => CMatrix::identity(n, n).kronecker(u.matrix()),
                };
                let lifted = UnitaryMap::new(full, u.is_antiunitary())?;
                Representation::Marginal { joint: Box::new(joint.evolve(&lifted)?), dims: *dims, keep: *keep }
            }
        };
        Ok(CredalSet { dim: self.dim, repr })
    }
}

fn is_informative(a: &HermitianMatrix) -> bool {
    !matches!(classify(a), Definiteness::PD | Definiteness::PSDNZ | Definiteness::Zero)
}

/// Lower prevision under full ignorance restricted to the blocks of `map`:
/// the smallest eigenvalue of `G` compressed to any block.
fn compressed_minimum(g: &HermitianMatrix, map: &GambleMap) -> Result<f64> {
    let blocks: Vec<&HermitianMatrix> = match map {
        GambleMap::Selective(p) => vec![p],
        GambleMap::NonSelective(ps) => ps.iter().collect(),
    };
    let mut best = f64::INFINITY;
    for p in blocks {
        let e = eig(p)?;
        let cols: Vec<usize> = (0..p.dim()).filter(|&j| e.eigenvalues[j] > 0.5).collect();
        if cols.is_empty() {
            continue;
        }
        let v = CMatrix::from_fn(p.dim(), cols.len(), |i, j| e.eigenvectors[(i, cols[j])]);
        let compressed = HermitianMatrix::symmetrized(v.adjoint() * g.as_matrix() * &v);
        best = best.min(compressed.min_eigenvalue()?);
    }
    Ok(best)
}

/// Feasibility of `{rho in joint : Tr_other(rho) = sigma}`.
fn marginal_contains(joint: &CredalSet, dims: (usize, usize), keep: Subsystem, sigma: &DensityMatrix) -> Result<bool> {
    let Representation::HRep(base) = &joint.repr else {
        return Err(Error::Unsupported("membership in a marginal of an implicit set".into()));
    };
    let mut constraints = base.clone();
    for e in gell_mann_basis(sigma.dim()).iter().skip(1) {
        let pin = embed_local(e, dims, keep)?.shift(-inner(e, sigma.matrix())?);
        constraints.push(-&pin);
        constraints.push(pin);
    }
    let m = feasibility_margin_dim(&constraints, &[], joint.dim)?;
    Ok(m.margin >= -MEMBERSHIP_TOL)
}
