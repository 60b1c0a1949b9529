//! Monte-Carlo runs of the betting protocol and Dutch-book demonstrations.
//!
//! Each round the bookmaker measures his system, prepared in `rho*`, along a
//! rank-one projective measurement; Alice then receives, for every gamble she
//! accepted, the payoff `gamma_i` with `P_i G P_i = gamma_i P_i`.
//!
//! Outcomes come from a counter-based SplitMix64 stream: draw `t` is
//! `mix(seed + (t + 1) * 0x9E3779B97F4A7C15)`, its top 53 bits give a uniform
//! `u` in `[0, 1)`, and the outcome is the first index whose cumulative Born
//! probability exceeds `u`. Any trial can be recomputed from its index alone.

use serde::Serialize;

use crate::credal::{check_coherence, Assessment, PartialLossCertificate};
use crate::error::{Error, Result};
use crate::linalg::{check_dims, HermitianMatrix};
use crate::measurement::{born_probabilities, eigenmeasurement, payoff, DensityMatrix, ProjectiveMeasurement};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
/// Slack allowed on the per-trial sure-loss bound.
pub const DUTCH_BOOK_TOL: f64 = 1e-8;

/// SplitMix64 output for counter `t`.
pub fn splitmix64(seed: u64, t: u64) -> u64 {
    let mut z = seed.wrapping_add(t.wrapping_add(1).wrapping_mul(GOLDEN));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform draw in `[0, 1)` for counter `t`.
pub fn uniform(seed: u64, t: u64) -> f64 {
    (splitmix64(seed, t) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Inverse-CDF sampling in projector order.
pub fn sample_outcome(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub bookmaker_state: DensityMatrix,
    /// Defaults to the eigenmeasurement of `bookmaker_state`.
    pub measurement: Option<ProjectiveMeasurement>,
    pub accepted_gambles: Vec<HermitianMatrix>,
    pub trials: usize,
    pub seed: u64,
}

impl Scenario {
    pub fn new(bookmaker_state: DensityMatrix, accepted_gambles: Vec<HermitianMatrix>, trials: usize, seed: u64) -> Self {
        Self { bookmaker_state, measurement: None, accepted_gambles, trials, seed }
    }

    pub fn with_measurement(mut self, m: ProjectiveMeasurement) -> Self {
        self.measurement = Some(m);
        self
    }

    fn resolved_measurement(&self) -> Result<ProjectiveMeasurement> {
        let m = match &self.measurement {
            Some(m) => m.clone(),
            None => eigenmeasurement(&self.bookmaker_state)?,
        };
        check_dims(self.bookmaker_state.dim(), m.dim())?;
        if let Some(p) = m.projectors().iter().find(|p| p.rank() != 1) {
            return Err(Error::RankNotOne { rank: p.rank() });
        }
        Ok(m)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Ledger {
    /// Per gamble, the running sum of payoffs in trial order.
    pub cumulative: Vec<f64>,
    pub outcomes: Vec<usize>,
    pub empirical_means: Vec<f64>,
    /// `Tr(G^H rho*)`.
    pub expectations: Vec<f64>,
    /// Per-trial standard deviation of each gamble's payoff under the Born
    /// probabilities.
    pub sigmas: Vec<f64>,
    pub probabilities: Vec<f64>,
    /// `payoffs[g][i]`: payoff of gamble `g` on outcome `i`.
    pub payoffs: Vec<Vec<f64>>,
}

impl Ledger {
    pub fn trials(&self) -> usize {
        self.outcomes.len()
    }

    /// `k sigma / sqrt(N)` for each gamble.
    pub fn sigma_bounds(&self, k: f64) -> Vec<f64> {
        let n = self.trials().max(1) as f64;
        self.sigmas.iter().map(|s| k * s / n.sqrt()).collect()
    }
}

pub fn run_simulation(s: &Scenario) -> Result<Ledger> {
    if s.trials == 0 {
        return Err(Error::InvalidArgument("trials must be positive".into()));
    }
    let n = s.bookmaker_state.dim();
    for g in &s.accepted_gambles {
        check_dims(n, g.dim())?;
    }
    let m = s.resolved_measurement()?;
    let probs = born_probabilities(&s.bookmaker_state, &m)?;
    let payoffs: Vec<Vec<f64>> = s
        .accepted_gambles
        .iter()
        .map(|g| m.projectors().iter().map(|p| payoff(g, p)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;

    let mut outcomes = Vec::with_capacity(s.trials);
    let mut cumulative = vec![0.0; payoffs.len()];
    for t in 0..s.trials {
        let i = sample_outcome(&probs, uniform(s.seed, t as u64));
        outcomes.push(i);
        for (c, row) in cumulative.iter_mut().zip(&payoffs) {
            *c += row[i];
        }
    }
    let empirical_means = cumulative.iter().map(|c| c / s.trials as f64).collect();
    let mut expectations = Vec::with_capacity(payoffs.len());
    let mut sigmas = Vec::with_capacity(payoffs.len());
    for (g, row) in s.accepted_gambles.iter().zip(&payoffs) {
        let mean: f64 = row.iter().zip(&probs).map(|(x, p)| x * p).sum();
        let var: f64 = row.iter().zip(&probs).map(|(x, p)| p * (x - mean).powi(2)).sum();
        expectations.push(s.bookmaker_state.expectation(g)?);
        sigmas.push(var.max(0.0).sqrt());
    }
    Ok(Ledger { cumulative, outcomes, empirical_means, expectations, sigmas, probabilities: probs, payoffs })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DutchBookReport {
    pub certificate: PartialLossCertificate,
    /// `sum_k alpha_k G_k`.
    pub combined: HermitianMatrix,
    /// Payoff of the combined gamble on each outcome of the measurement used.
    pub outcome_payoffs: Vec<f64>,
    /// Largest eigenvalue of the combined gamble: the best payoff Alice can
    /// hope for under any state and any measurement.
    pub worst_case_bound: f64,
    pub max_trial_payoff: f64,
    /// Every trial paid at most `-beta + 1e-8`.
    pub sure_loss: bool,
    /// Zero-margin book: Alice never gains but need not lose.
    pub boundary: bool,
    pub ledger: Ledger,
}

/// Builds the certificate combination for incoherent assessments and plays it
/// against the bookmaker of `skeleton` (whose gamble list is ignored).
pub fn dutch_book_demo(assessments: &[Assessment], skeleton: &Scenario) -> Result<DutchBookReport> {
    let n = skeleton.bookmaker_state.dim();
    let report = check_coherence(assessments, n)?;
    if report.is_coherent() {
        return Err(Error::NotIncoherent);
    }
    let certificate =
        report.certificate.ok_or_else(|| Error::SolverFailure("partial loss reported without certificate".into()))?;
    let combined = certificate.combined(assessments);
    let scenario = Scenario { accepted_gambles: vec![combined.clone()], ..skeleton.clone() };
    let ledger = run_simulation(&scenario)?;
    let outcome_payoffs = ledger.payoffs[0].clone();
    let max_trial_payoff = ledger.outcomes.iter().map(|&i| outcome_payoffs[i]).fold(f64::NEG_INFINITY, f64::max);
    let bound = -certificate.beta + DUTCH_BOOK_TOL;
    Ok(DutchBookReport {
        worst_case_bound: combined.max_eigenvalue()?,
        sure_loss: max_trial_payoff <= bound,
        boundary: certificate.is_boundary(),
        certificate,
        combined,
        outcome_payoffs,
        max_trial_payoff,
        ledger,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Complex64;

    #[test]
    fn splitmix_reference_values() {
        // First outputs of the reference SplitMix64 seeded with 0.
        assert_eq!(splitmix64(0, 0), 0xE220_A839_7B1D_CDAF);
        assert_eq!(splitmix64(0, 1), 0x6E78_9E6A_A1B9_65F4);
        assert!((0..1000).all(|t| (0.0..1.0).contains(&uniform(9, t))));
    }

    #[test]
    fn identity_pays_one_each_trial() {
        let s = Scenario::new(DensityMatrix::diagonal(&[0.3, 0.7]).unwrap(), vec![HermitianMatrix::identity(2)], 1000, 5);
        let l = run_simulation(&s).unwrap();
        assert_eq!(l.cumulative[0], 1000.0);
    }

    #[test]
    fn bernoulli_mean() {
        let s = Scenario::new(DensityMatrix::diagonal(&[0.2, 0.8]).unwrap(), vec![HermitianMatrix::diagonal(&[1., 0.])], 10_000, 11);
        let l = run_simulation(&s).unwrap();
        assert!((l.empirical_means[0] - 0.2).abs() <= 4.0 * 0.4 / 100.0);
        assert!((l.sigmas[0] - 0.4).abs() < 1e-12);
        assert_eq!(l, run_simulation(&s).unwrap());
    }

    #[test]
    fn sure_loss_demo() {
        let c = |re, im| Complex64::new(re, im);
        let g1 = HermitianMatrix::from_rows(&[vec![c(1., 0.), c(0., -1.)], vec![c(0., 1.), c(-2., 0.)]]).unwrap();
        let g2 = HermitianMatrix::from_rows(&[vec![c(-2., 0.), c(0., 1.)], vec![c(0., -1.), c(1., 0.)]]).unwrap();
        let a = [Assessment::strict(g1), Assessment::strict(g2)];
        let skel = Scenario::new(DensityMatrix::maximally_mixed(2), vec![], 200, 3);
        let r = dutch_book_demo(&a, &skel).unwrap();
        assert!(r.sure_loss && !r.boundary);
        assert!(r.outcome_payoffs.iter().all(|p| (p + 1.0).abs() < 1e-6));
    }

    #[test]
    fn boundary_book_and_coherent_input() {
        let a = [
            Assessment::strict(HermitianMatrix::diagonal(&[2., -1.])),
            Assessment::strict(HermitianMatrix::diagonal(&[-2., 1.])),
        ];
        let skel = Scenario::new(DensityMatrix::diagonal(&[0.4, 0.6]).unwrap(), vec![], 100, 3);
        let r = dutch_book_demo(&a, &skel).unwrap();
        assert!(r.boundary && r.sure_loss);
        assert!(r.outcome_payoffs.iter().all(|p| p.abs() < 1e-8));
        let f = HermitianMatrix::diagonal(&[1., -1.]);
        let fair = [Assessment::border(f.clone()), Assessment::border(-&f)];
        assert!(matches!(dutch_book_demo(&fair, &skel), Err(Error::NotIncoherent)));
    }
}
