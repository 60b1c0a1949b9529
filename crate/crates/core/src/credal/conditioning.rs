use super::{CredalSet, Representation, ZERO_PROB_TOL};
use crate::error::{Error, Result};
use crate::linalg::check_dims;
use crate::measurement::{DensityMatrix, ProjectiveMeasurement, Projector};
use crate::optim::GambleMap;

/// Conditions on the event `P`: Lüders update `rho -> P rho P / Tr(P rho P)`.
pub fn condition_selective(m: &CredalSet, p: &Projector) -> Result<CredalSet> {
    check_dims(m.dim(), p.dim())?;
    condition(m, GambleMap::Selective(p.matrix().clone()))
}

/// Conditions on the outcome set `J` of a measurement without selecting a
/// single outcome: `rho -> sum_J P_j rho P_j` renormalized.
pub fn condition_nonselective(m: &CredalSet, meas: &ProjectiveMeasurement, outcomes: &[usize]) -> Result<CredalSet> {
    check_dims(m.dim(), meas.dim())?;
    if outcomes.is_empty() {
        return Err(Error::InvalidArgument("empty outcome set".into()));
    }
    let mut ps = Vec::with_capacity(outcomes.len());
    for &j in outcomes {
        let p = meas
            .projectors()
            .get(j)
            .ok_or_else(|| Error::InvalidArgument(format!("outcome {j} out of range for {} projectors", meas.len())))?;
        ps.push(p.matrix().clone());
    }
    condition(m, GambleMap::NonSelective(ps))
}

fn condition(m: &CredalSet, map: GambleMap) -> Result<CredalSet> {
    let n = m.dim();
    if m.is_vacuous() {
        return Ok(CredalSet { dim: n, repr: Representation::Conditioned { base: Box::new(m.clone()), map } });
    }
    let event = map.event();
    let upper = m.upper_prevision(&event)?;
    if upper <= ZERO_PROB_TOL {
        return Ok(CredalSet::vacuous(n));
    }
    let lower = m.lower_prevision(&event)?;
    if lower <= ZERO_PROB_TOL {
        return Err(Error::UndefinedConditioning { lower, upper });
    }
    let repr = match &m.repr {
        Representation::VRep(points) => {
            let mut out = Vec::with_capacity(points.len());
            for rho in points {
                let image = map.apply(rho.matrix())?;
                out.push(DensityMatrix::from_near_psd(&image)?);
            }
            Representation::VRep(out)
        }
        _ => Representation::Conditioned { base: Box::new(m.clone()), map },
    };
    Ok(CredalSet { dim: n, repr })
}
