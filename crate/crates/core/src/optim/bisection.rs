//! Conditional previsions as roots of a monotone scalar function.
//!
//! The conditional lower prevision of `G` given an event is the `mu` at which
//! `h(mu) = inf_rho Tr(map(G - mu I)^H rho)` crosses zero, where `map` is
//! `P G P` (selective) or `sum_J P_j G P_j` (non-selective). `h` is
//! non-increasing, and strictly decreasing whenever the event has positive
//! lower probability.

use crate::error::{Error, Result};
use crate::linalg::HermitianMatrix;

pub const BISECTION_TOL: f64 = 1e-9;

/// How a gamble is restricted to the conditioning event.
#[derive(Clone, Debug, PartialEq)]
pub enum GambleMap {
    /// `G -> P G P`.
    Selective(HermitianMatrix),
    /// `G -> sum_j P_j G P_j`.
    NonSelective(Vec<HermitianMatrix>),
}

impl GambleMap {
    pub fn apply(&self, g: &HermitianMatrix) -> Result<HermitianMatrix> {
        match self {
            GambleMap::Selective(p) => g.sandwich(p),
            GambleMap::NonSelective(ps) => {
                let mut acc = HermitianMatrix::zeros(g.dim());
                for p in ps {
                    acc = &acc + &g.sandwich(p)?;
                }
                Ok(acc)
            }
        }
    }

    /// The event projector `P` or `sum_J P_j`.
    pub fn event(&self) -> HermitianMatrix {
        match self {
            GambleMap::Selective(p) => p.clone(),
            GambleMap::NonSelective(ps) => {
                let mut acc = HermitianMatrix::zeros(ps[0].dim());
                for p in ps {
                    acc = &acc + p;
                }
                acc
            }
        }
    }
}

/// Bisects `h(mu) = lower(map(G - mu I))` on `[lambda_min(G), lambda_max(G)]`.
///
/// `lower` evaluates the unconditional lower prevision of the set being
/// conditioned. The caller guarantees positive lower probability of the event.
pub fn conditional_bisection<F>(lower: F, map: &GambleMap, g: &HermitianMatrix, tol: f64) -> Result<f64>
where
    F: Fn(&HermitianMatrix) -> Result<f64>,
{
    let spectrum = g.eigenvalues()?;
    let (mut lo, mut hi) = (spectrum[0], *spectrum.last().expect("non-empty"));
    if hi - lo <= tol {
        return Ok(0.5 * (lo + hi));
    }
    let h = |mu: f64| -> Result<f64> { lower(&map.apply(&g.shift(-mu))?) };
    let slack = 1e-8 * g.norm_inf().max(1.0);
    let (h_lo, h_hi) = (h(lo)?, h(hi)?);
    if h_lo < -slack || h_hi > slack {
        return Err(Error::BracketFailure { h_lo, h_hi });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if h(mid)? >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
