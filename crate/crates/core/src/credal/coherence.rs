use serde::Serialize;

use super::{is_informative, Assessment, CredalSet, Representation, Strictness, COHERENCE_TOL};
use crate::error::{Error, Result};
use crate::linalg::{check_dims, classify, Definiteness, HermitianMatrix};
use crate::measurement::DensityMatrix;
use crate::optim::feasibility_margin_dim;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CoherenceStatus {
    Coherent,
    IncursPartialLoss,
}

/// Weights `alpha` with `sum_k alpha_k G_k <= -beta I`.
///
/// `alpha` has one entry per assessment in input order; assessments that took
/// no part in the test (positive gambles, zero border gambles) carry zero.
/// `beta = 0` marks a zero-margin certificate: the combination is negative
/// semi-definite but not strictly negative.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartialLossCertificate {
    pub alpha: Vec<f64>,
    pub beta: f64,
    /// Largest eigenvalue of the combination, re-verified.
    pub max_eigenvalue: f64,
}

impl PartialLossCertificate {
    pub fn is_boundary(&self) -> bool {
        self.beta == 0.0
    }

    /// `sum_k alpha_k G_k`.
    pub fn combined(&self, assessments: &[Assessment]) -> HermitianMatrix {
        let n = assessments.first().map_or(1, |a| a.gamble.dim());
        let mut acc = HermitianMatrix::zeros(n);
        for (w, a) in self.alpha.iter().zip(assessments) {
            if *w != 0.0 {
                acc = &acc + &a.gamble.scale(*w);
            }
        }
        acc
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoherenceReport {
    pub status: CoherenceStatus,
    /// `t* = max t` such that every strict gamble has expectation at least `t`
    /// on some density matrix satisfying the border constraints. With no strict
    /// gambles, the margin of the border system itself.
    pub margin: f64,
    pub witness: Option<DensityMatrix>,
    pub certificate: Option<PartialLossCertificate>,
}

impl CoherenceReport {
    pub fn is_coherent(&self) -> bool {
        self.status == CoherenceStatus::Coherent
    }
}

/// Decides whether the assessments avoid partial loss.
pub fn check_coherence(assessments: &[Assessment], n: usize) -> Result<CoherenceReport> {
    for a in assessments {
        check_dims(n, a.gamble.dim())?;
    }
    let mut strict = Vec::new();
    let mut strict_idx = Vec::new();
    let mut border = Vec::new();
    let mut border_idx = Vec::new();
    for (i, a) in assessments.iter().enumerate() {
        match (a.strictness, classify(&a.gamble)) {
            (_, Definiteness::PD | Definiteness::PSDNZ) => {}
            (Strictness::Border, Definiteness::Zero) => {}
            (Strictness::Strict, _) => {
                strict.push(a.gamble.clone());
                strict_idx.push(i);
            }
            (Strictness::Border, _) => {
                border.push(a.gamble.clone());
                border_idx.push(i);
            }
        }
    }
    let sol = feasibility_margin_dim(&border, &strict, n)?;
    let coherent = if strict.is_empty() { sol.feasible } else { sol.feasible && sol.margin > COHERENCE_TOL };
    if coherent {
        return Ok(CoherenceReport {
            status: CoherenceStatus::Coherent,
            margin: sol.margin,
            witness: Some(sol.witness),
            certificate: None,
        });
    }
    let cert = sol.certificate.ok_or_else(|| Error::SolverFailure("incoherent system without certificate".into()))?;
    let mut alpha = vec![0.0; assessments.len()];
    for (w, &i) in cert.strict_weights.iter().zip(&strict_idx) {
        alpha[i] = *w;
    }
    for (w, &i) in cert.border_weights.iter().zip(&border_idx) {
        alpha[i] = *w;
    }
    Ok(CoherenceReport {
        status: CoherenceStatus::IncursPartialLoss,
        margin: sol.margin,
        witness: None,
        certificate: Some(PartialLossCertificate { alpha, beta: cert.beta, max_eigenvalue: cert.max_eigenvalue }),
    })
}

/// The credal set dual to a coherent assessment: every informative gamble,
/// strict or border, becomes a constraint `Tr(G^H rho) >= 0`.
pub fn credal_from_assessments(assessments: &[Assessment], n: usize) -> Result<CredalSet> {
    let report = check_coherence(assessments, n)?;
    if !report.is_coherent() {
        return Err(Error::Incoherent(Box::new(report)));
    }
    let constraints = assessments.iter().map(|a| a.gamble.clone()).filter(is_informative).collect();
    Ok(CredalSet { dim: n, repr: Representation::HRep(constraints) })
}
