//! Composite systems: marginals, natural extension, independence and the
//! separability bounds.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::{condition_selective, vrep_to_hrep, CredalSet, Representation, SET_TOL};
use crate::error::{Error, Result};
use crate::linalg::{
    classify, embed_local, gell_mann_basis, partial_trace, tensor, CMatrix, Complex64, HermitianMatrix, Subsystem,
};
use crate::measurement::{DensityMatrix, ProjectiveMeasurement, Projector};

/// Pseudo-random measurements added to an irrelevance test when seeded.
pub const HAAR_FAMILY_SIZE: usize = 20;
/// `|rho_AB - rho_A (x) rho_B|_inf` accepted as a product state.
const PRODUCT_TOL: f64 = 1e-8;

fn check_factorization(total: usize, dims: (usize, usize)) -> Result<()> {
    if dims.0 == 0 || dims.1 == 0 || dims.0 * dims.1 != total {
        return Err(Error::DimensionMismatch { expected: dims.0 * dims.1, found: total });
    }
    Ok(())
}

fn factor_dim(dims: (usize, usize), s: Subsystem) -> usize {
    match s {
        Subsystem::A => dims.0,
        Subsystem::B => dims.1,
    }
}

/// The marginal of a joint set on the `keep` factor. Sets given by extreme
/// points are partial-traced exactly; others become implicit query objects.
pub fn marginal(m: &CredalSet, dims: (usize, usize), keep: Subsystem) -> Result<CredalSet> {
    check_factorization(m.dim(), dims)?;
    let k = factor_dim(dims, keep);
    if m.is_vacuous() {
        return Ok(CredalSet::vacuous(k));
    }
    let repr = match &m.repr {
        Representation::VRep(points) => {
            let mut out = Vec::with_capacity(points.len());
            for p in points {
                out.push(DensityMatrix::from_near_psd(&partial_trace(p.matrix(), dims, keep.other())?)?);
            }
            Representation::VRep(out)
        }
        _ => Representation::Marginal { joint: Box::new(m.clone()), dims, keep },
    };
    Ok(CredalSet { dim: k, repr })
}

fn hrep_of(m: &CredalSet) -> Result<Vec<HermitianMatrix>> {
    match &m.repr {
        Representation::HRep(c) => Ok(c.clone()),
        Representation::VRep(points) => vrep_to_hrep(points),
        Representation::Conditioned { .. } => Err(Error::Unsupported("natural extension of an implicit conditional".into())),
        Representation::Marginal { .. } => Err(Error::Unsupported("natural extension of an implicit marginal".into())),
    }
}

/// Least-committal joint set with the given marginals:
/// constraints `{A_j (x) I} u {I (x) B_k}`.
pub fn natural_extension(a: &CredalSet, b: &CredalSet) -> Result<CredalSet> {
    let dims = (a.dim(), b.dim());
    let mut constraints = Vec::new();
    for g in hrep_of(a)? {
        constraints.push(embed_local(&g, dims, Subsystem::A)?);
    }
    for g in hrep_of(b)? {
        constraints.push(embed_local(&g, dims, Subsystem::B)?);
    }
    constraints.retain(super::is_informative);
    Ok(CredalSet { dim: dims.0 * dims.1, repr: Representation::HRep(constraints) })
}

#[derive(Clone, Debug, PartialEq)]
pub struct IndependenceReport {
    pub independent: bool,
    pub rho_a: DensityMatrix,
    pub rho_b: DensityMatrix,
    /// `|rho_AB - rho_A (x) rho_B|_inf`.
    pub residual: f64,
}

pub fn check_independence(rho: &DensityMatrix, dims: (usize, usize)) -> Result<IndependenceReport> {
    check_factorization(rho.dim(), dims)?;
    let rho_a = DensityMatrix::from_near_psd(&partial_trace(rho.matrix(), dims, Subsystem::B)?)?;
    let rho_b = DensityMatrix::from_near_psd(&partial_trace(rho.matrix(), dims, Subsystem::A)?)?;
    let residual = (rho.matrix() - &tensor(rho_a.matrix(), rho_b.matrix())).norm_inf();
    Ok(IndependenceReport { independent: residual <= PRODUCT_TOL, rho_a, rho_b, residual })
}

/// The four necessary conditions for a separable state:
/// `rho_A (x) I - rho`, `I (x) rho_B - rho`,
/// `rho - (rho_A (x) I + I (x) rho_B - I)` positive semi-definite and `rho`
/// positive semi-definite non-zero.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrechetReport {
    pub holds: [bool; 4],
    pub min_eigenvalues: [f64; 4],
}

impl FrechetReport {
    pub fn all_hold(&self) -> bool {
        self.holds.iter().all(|&h| h)
    }
}

pub fn frechet_check(rho: &DensityMatrix, dims: (usize, usize)) -> Result<FrechetReport> {
    check_factorization(rho.dim(), dims)?;
    let r = rho.matrix();
    let ra = embed_local(&partial_trace(r, dims, Subsystem::B)?, dims, Subsystem::A)?;
    let rb = embed_local(&partial_trace(r, dims, Subsystem::A)?, dims, Subsystem::B)?;
    let lower = &(&ra + &rb) - &HermitianMatrix::identity(r.dim());
    let tests = [&ra - r, &rb - r, r - &lower, r.clone()];
    let mut holds = [false; 4];
    let mut min_eigenvalues = [0.0; 4];
    for (i, t) in tests.iter().enumerate() {
        let lam = t.min_eigenvalue()?;
        min_eigenvalues[i] = lam;
        let tol = crate::linalg::psd_tolerance(t.norm_inf());
        holds[i] = if i == 3 { classify(t).is_positive() } else { lam >= -tol };
    }
    Ok(FrechetReport { holds, min_eigenvalues })
}

/// Which way irrelevance is tested: `AtoB` measures A and probes B.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
pub enum IrrelevanceDirection {
    AtoB,
    BtoA,
}

impl IrrelevanceDirection {
    fn measured(self) -> Subsystem {
        match self {
            IrrelevanceDirection::AtoB => Subsystem::A,
            IrrelevanceDirection::BtoA => Subsystem::B,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IrrelevanceReport {
    /// Largest difference between unconditional and conditional probe
    /// previsions, lower or upper.
    pub max_discrepancy: f64,
    /// True when `max_discrepancy <= 1e-6` on the tested family.
    pub holds: bool,
    /// `(measurement, outcome)` pairs skipped because the outcome has zero
    /// upper probability.
    pub null_events: Vec<(usize, usize)>,
    /// `(measurement, outcome)` pairs whose conditioning is undefined.
    pub undefined: Vec<(usize, usize)>,
    pub measurements_tested: usize,
}

/// Tests epistemic irrelevance of the measured factor to the other on a
/// finite family of measurements, plus [`HAAR_FAMILY_SIZE`] random ones when
/// `seed` is given. Probes default to the Gell-Mann basis of the probed factor.
pub fn check_irrelevance_probe(
    m: &CredalSet,
    dims: (usize, usize),
    direction: IrrelevanceDirection,
    measurements: &[ProjectiveMeasurement],
    probes: &[HermitianMatrix],
    seed: Option<u64>,
) -> Result<IrrelevanceReport> {
    check_factorization(m.dim(), dims)?;
    let measured = direction.measured();
    let probed = measured.other();
    let md = factor_dim(dims, measured);
    let pd = factor_dim(dims, probed);
    let mut family: Vec<ProjectiveMeasurement> = measurements.to_vec();
    if let Some(s) = seed {
        family.extend(random_measurements(md, HAAR_FAMILY_SIZE, s)?);
    }
    for meas in &family {
        crate::linalg::check_dims(md, meas.dim())?;
    }
    let probes: Vec<HermitianMatrix> = if probes.is_empty() { gell_mann_basis(pd) } else { probes.to_vec() };
    for p in &probes {
        crate::linalg::check_dims(pd, p.dim())?;
    }

    let base = marginal(m, dims, probed)?;
    let reference: Vec<(f64, f64)> = probes
        .iter()
        .map(|g| base.prevision(g).map(|p| (p.lower, p.upper)))
        .collect::<Result<_>>()?;

    let mut report = IrrelevanceReport {
        max_discrepancy: 0.0,
        holds: true,
        null_events: Vec::new(),
        undefined: Vec::new(),
        measurements_tested: family.len(),
    };
    for (mi, meas) in family.iter().enumerate() {
        for (oi, p) in meas.projectors().iter().enumerate() {
            let lifted = Projector::new(embed_local(p.matrix(), dims, measured)?)?;
            if !m.is_vacuous() && m.upper_prevision(lifted.matrix())? <= super::ZERO_PROB_TOL {
                report.null_events.push((mi, oi));
                continue;
            }
            let cond = match condition_selective(m, &lifted) {
                Ok(c) => c,
                Err(Error::UndefinedConditioning { .. }) => {
                    report.undefined.push((mi, oi));
                    continue;
                }
                Err(e) => return Err(e),
            };
            let cm = marginal(&cond, dims, probed)?;
            for (g, (lo, up)) in probes.iter().zip(&reference) {
                let q = cm.prevision(g)?;
                report.max_discrepancy = report.max_discrepancy.max((q.lower - lo).abs()).max((q.upper - up).abs());
            }
        }
    }
    report.holds = report.max_discrepancy <= SET_TOL;
    Ok(report)
}

/// `count` rank-one measurements in Haar-random bases, reproducible from `seed`.
pub fn random_measurements(n: usize, count: usize, seed: u64) -> Result<Vec<ProjectiveMeasurement>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let z = CMatrix::from_fn(n, n, |_, _| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im)
        });
        let qr = z.qr();
        let (mut q, r) = qr.unpack();
        for j in 0..n {
            let d = r[(j, j)];
            let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
            for i in 0..n {
                q[(i, j)] *= phase;
            }
        }
        out.push(ProjectiveMeasurement::from_unitary_columns(&q)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sigma_z;

    fn bell() -> DensityMatrix {
        DensityMatrix::new(
            HermitianMatrix::from_real_rows(&[
                vec![0.5, 0., 0., 0.5],
                vec![0., 0., 0., 0.],
                vec![0., 0., 0., 0.],
                vec![0.5, 0., 0., 0.5],
            ])
            .unwrap(),
        )
        .unwrap()
    }

    fn product() -> DensityMatrix {
        DensityMatrix::new(tensor(&HermitianMatrix::diagonal(&[0.2, 0.8]), &HermitianMatrix::diagonal(&[0.6, 0.4]))).unwrap()
    }

    #[test]
    fn bell_marginal_is_mixed() {
        let m = marginal(&CredalSet::singleton(bell()), (2, 2), Subsystem::A).unwrap();
        let s = m.extract_state().unwrap();
        assert!((s.matrix() - &HermitianMatrix::diagonal(&[0.5, 0.5])).norm_inf() < 1e-12);
    }

    #[test]
    fn vacuous_marginal() {
        let m = marginal(&CredalSet::vacuous(6), (2, 3), Subsystem::B).unwrap();
        assert_eq!(m.dim(), 3);
        assert!(m.is_vacuous());
        let g = HermitianMatrix::diagonal(&[1.0, -3.0]);
        let implicit = CredalSet {
            dim: 2,
            repr: Representation::Marginal { joint: Box::new(CredalSet::vacuous(4)), dims: (2, 2), keep: Subsystem::A },
        };
        assert!((implicit.lower_prevision(&g).unwrap() + 3.0).abs() < 1e-7);
    }

    #[test]
    fn extension_contains_bell_and_products() {
        let half = CredalSet::singleton(DensityMatrix::maximally_mixed(2));
        let ext = natural_extension(&half, &half).unwrap();
        assert!(ext.contains(&bell()).unwrap());
        assert!(ext.contains(&DensityMatrix::maximally_mixed(4)).unwrap());
        assert!(!ext.contains(&product()).unwrap());
        let lo = ext.lower_prevision(&embed_local(&sigma_z(), (2, 2), Subsystem::A).unwrap()).unwrap();
        assert!(lo.abs() < 1e-6, "{lo}");
    }

    #[test]
    fn implicit_marginal_membership() {
        let half = CredalSet::singleton(DensityMatrix::maximally_mixed(2));
        let ext = natural_extension(&half, &half).unwrap();
        let mb = marginal(&ext, (2, 2), Subsystem::B).unwrap();
        assert!(mb.contains(&DensityMatrix::maximally_mixed(2)).unwrap());
        assert!(!mb.contains(&DensityMatrix::diagonal(&[0.7, 0.3]).unwrap()).unwrap());
    }

    #[test]
    fn independence_reports() {
        let r = check_independence(&bell(), (2, 2)).unwrap();
        assert!(!r.independent);
        assert!((r.residual - 0.5).abs() < 1e-12);
        assert!(check_independence(&product(), (2, 2)).unwrap().independent);
        assert!(check_independence(&DensityMatrix::maximally_mixed(4), (2, 2)).unwrap().independent);
    }

    #[test]
    fn frechet_bell_and_product() {
        let r = frechet_check(&bell(), (2, 2)).unwrap();
        assert!(!r.holds[0] && !r.holds[1]);
        assert!((r.min_eigenvalues[0] + 0.5).abs() < 1e-10);
        assert!(frechet_check(&product(), (2, 2)).unwrap().all_hold());
    }

    #[test]
    fn irrelevance_product_vs_bell() {
        let canon = [ProjectiveMeasurement::canonical(2)];
        let r = check_irrelevance_probe(
            &CredalSet::singleton(product()),
            (2, 2),
            IrrelevanceDirection::BtoA,
            &canon,
            &[],
            Some(7),
        )
        .unwrap();
        assert!(r.holds, "{}", r.max_discrepancy);
        assert_eq!(r.measurements_tested, 21);
        let r = check_irrelevance_probe(
            &CredalSet::singleton(bell()),
            (2, 2),
            IrrelevanceDirection::BtoA,
            &canon,
            &[sigma_z()],
            None,
        )
        .unwrap();
        assert!(!r.holds);
    }

    #[test]
    fn irrelevance_vacuous_joint() {
        let canon = [ProjectiveMeasurement::canonical(2)];
        let r = check_irrelevance_probe(&CredalSet::vacuous(4), (2, 2), IrrelevanceDirection::AtoB, &canon, &[], Some(1))
            .unwrap();
        assert!(r.holds, "{}", r.max_discrepancy);
    }

    #[test]
    fn random_measurements_are_seeded() {
        let a = random_measurements(3, 2, 42).unwrap();
        let b = random_measurements(3, 2, 42).unwrap();
        assert_eq!(a, b);
    }
}
