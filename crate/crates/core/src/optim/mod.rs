//! Linear objectives over spectrahedra of density matrices.
//!
//! All problems live on `{rho >= 0, Tr rho = 1, Tr(A_j^H rho) >= b_j}`.
//! [`sdp_minimize`] is the general solver, [`diagonal_fast_path`] the exact
//! route for classical (diagonal) instances, [`minimize`] picks between them,
//! and [`feasibility_margin`] decides strict feasibility with a Farkas-type
//! certificate when it fails.

mod barrier;
mod bisection;
mod lp;

pub use bisection::{conditional_bisection, GambleMap, BISECTION_TOL};
pub use lp::{diagonal_fast_path, fast_path_applies, simplex_vertices, MAX_FAST_PATH_DIM};

use barrier::{DualProblem, VarKind};

use crate::error::{Error, Result};
use crate::linalg::{inner, CMatrix, HermitianMatrix};
use crate::measurement::DensityMatrix;

/// Multiplier cap relative to the problem scale. Multipliers of normalized
/// constraints beyond this are treated as unbounded (exact penalty regime).
const BOUND_REL: f64 = 1e7;
/// Relative tolerance used to merge antiparallel constraint pairs into one
/// equality.
const PAIR_TOL: f64 = 1e-12;
const CERT_TOL: f64 = 1e-8;
pub const FEAS_TOL: f64 = 1e-9;

/// `min Tr(C^H rho)` over `rho >= 0`, `Tr rho = 1`, `Tr(A_j^H rho) >= b_j`.
#[derive(Clone, Debug)]
pub struct SdpProblem {
    objective: HermitianMatrix,
    constraints: Vec<(HermitianMatrix, f64)>,
}

impl SdpProblem {
    pub fn new(objective: HermitianMatrix, constraints: Vec<(HermitianMatrix, f64)>) -> Result<Self> {
        let n = objective.dim();
        for (a, b) in &constraints {
            crate::linalg::check_dims(n, a.dim())?;
            if !b.is_finite() {
                return Err(Error::InvalidArgument(format!("non-finite constraint offset {b}")));
            }
        }
        Ok(Self { objective, constraints })
    }

    /// Homogeneous constraints `Tr(A_j^H rho) >= 0`.
    pub fn homogeneous(objective: HermitianMatrix, constraints: &[HermitianMatrix]) -> Result<Self> {
        Self::new(objective, constraints.iter().map(|a| (a.clone(), 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.objective.dim()
    }

    pub fn objective(&self) -> &HermitianMatrix {
        &self.objective
    }

    pub fn constraints(&self) -> &[(HermitianMatrix, f64)] {
        &self.constraints
    }

    /// Constraints with offsets folded in: `A_j - b_j I`, valid because `Tr rho = 1`.
    pub(crate) fn homogenized(&self) -> Vec<HermitianMatrix> {
        self.constraints.iter().map(|(a, b)| if *b == 0.0 { a.clone() } else { a.shift(-b) }).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    /// Newton budget exhausted; `value` holds the last dual bound and `gap`
    /// the barrier gap at that point.
    MaxIterations,
}

/// Weights proving that an inequality system on density matrices is
/// infeasible: `sum_k strict_k S_k + sum_i border_i B_i <= -beta I`.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct Certificate {
    pub strict_weights: Vec<f64>,
    pub border_weights: Vec<f64>,
    pub beta: f64,
    /// Largest eigenvalue of the weighted sum, as re-verified.
    pub max_eigenvalue: f64,
}

impl Certificate {
    pub fn combined(&self, strict: &[HermitianMatrix], border: &[HermitianMatrix], n: usize) -> HermitianMatrix {
        let mut acc = HermitianMatrix::zeros(n);
        for (w, g) in self.strict_weights.iter().zip(strict).chain(self.border_weights.iter().zip(border)) {
            acc = &acc + &g.scale(*w);
        }
        acc
    }
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub status: SdpStatus,
    pub value: f64,
    pub optimizer: Option<DensityMatrix>,
    /// Primal minus dual objective at termination.
    pub gap: f64,
    pub certificate: Option<Certificate>,
    pub iterations: usize,
}

/// A constraint after normalization and pair merging.
struct Prepared {
    /// Unit-Frobenius coefficient.
    matrix: HermitianMatrix,
    /// Index into the original list and its norm.
    source: usize,
    norm: f64,
    /// Index of the antiparallel partner, if merged into an equality.
    partner: Option<(usize, f64)>,
}

fn prepare(constraints: &[HermitianMatrix]) -> Vec<Prepared> {
    let mut out: Vec<Prepared> = Vec::new();
    'next: for (j, a) in constraints.iter().enumerate() {
        let norm = a.frobenius();
        if norm == 0.0 {
            continue;
        }
        let unit = a.scale(1.0 / norm);
        for p in out.iter_mut() {
            if (&p.matrix - &unit).norm_inf() <= PAIR_TOL {
                continue 'next;
            }
            if p.partner.is_none() && (&p.matrix + &unit).norm_inf() <= PAIR_TOL {
                p.partner = Some((j, norm));
                continue 'next;
            }
        }
        out.push(Prepared { matrix: unit, source: j, norm, partner: None });
    }
    out
}

fn to_c(h: &HermitianMatrix) -> CMatrix {
    h.as_matrix().clone()
}

/// Scatters prepared-constraint multipliers back onto the original list, in
/// the units of the original (unnormalized) matrices.
fn scatter(prepared: &[Prepared], values: &[f64], len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for (p, &v) in prepared.iter().zip(values) {
        match p.partner {
            Some((k, knorm)) if v < 0.0 => out[k] += -v / knorm,
            _ => out[p.source] += v.max(0.0) / p.norm,
        }
    }
    out
}

/// Interior-point solve of the SDP; never takes the diagonal shortcut.
/// Feasibility is decided first by [`feasibility_margin`], whose dual is
/// always bounded, so infeasible instances come back with a certificate.
pub fn sdp_minimize(p: &SdpProblem) -> Result<SdpSolution> {
    let constraints = p.homogenized();
    if !constraints.is_empty() {
        let margin = feasibility_margin_dim(&constraints, &[], p.dim())?;
        if !margin.feasible {
            return Ok(SdpSolution {
                status: SdpStatus::Infeasible,
                value: f64::NAN,
                optimizer: None,
                gap: margin.gap,
                certificate: margin.certificate,
                iterations: 0,
            });
        }
    }
    match solve_feasible(p) {
        Err(Error::MaxIterations { iterations, gap }) => Ok(SdpSolution {
            status: SdpStatus::MaxIterations,
            value: f64::NAN,
            optimizer: None,
            gap,
            certificate: None,
            iterations,
        }),
        other => other,
    }
}

/// [`sdp_minimize`] for instances already known to be feasible.
pub(crate) fn solve_feasible(p: &SdpProblem) -> Result<SdpSolution> {
    let n = p.dim();
    let constraints = p.homogenized();
    let prepared = prepare(&constraints);
    let scale = p.objective.norm_inf().max(1.0);

    let mut f = vec![to_c(&HermitianMatrix::identity(n))];
    let mut kind = vec![VarKind::Free];
    let mut init = vec![0.0];
    for c in &prepared {
        f.push(to_c(&c.matrix));
        if c.partner.is_some() {
            kind.push(VarKind::Boxed);
            init.push(0.0);
        } else {
            kind.push(VarKind::NonNeg);
            init.push(1.0);
        }
    }
    let mut b = vec![0.0; f.len()];
    b[0] = 1.0;
    let dual = DualProblem {
        c: to_c(&p.objective),
        f,
        b,
        kind,
        rows: Vec::new(),
        bound: BOUND_REL * scale,
        lead: 0,
        scale,
    };
    let out = dual.solve(&init)?;
    let rho = DensityMatrix::from_near_psd(&out.primal)?;
    let value = inner(&p.objective, rho.matrix())?;
    Ok(SdpSolution {
        status: SdpStatus::Optimal,
        value,
        optimizer: Some(rho),
        gap: value - out.dual_value,
        certificate: None,
        iterations: out.newton_steps,
    })
}

/// Solves with the exact diagonal route when it applies, else [`sdp_minimize`].
/// Infeasible diagonal instances are re-solved by the SDP route so that a
/// certificate is attached.
pub fn minimize(p: &SdpProblem) -> Result<SdpSolution> {
    if fast_path_applies(p) {
        match diagonal_fast_path(p) {
            Ok(sol) if sol.status == SdpStatus::Optimal => return Ok(sol),
            Ok(_) | Err(Error::DimensionTooLarge(_)) => {}
            Err(e) => return Err(e),
        }
    }
    sdp_minimize(p)
}

/// [`minimize`] for constraint systems already known to be feasible.
pub(crate) fn minimize_feasible(p: &SdpProblem) -> Result<SdpSolution> {
    if fast_path_applies(p) {
        match diagonal_fast_path(p) {
            Ok(sol) if sol.status == SdpStatus::Optimal => return Ok(sol),
            Ok(_) | Err(Error::DimensionTooLarge(_)) => {}
            Err(e) => return Err(e),
        }
    }
    solve_feasible(p)
}

/// `inf Tr(G^H rho)` over the credal set `{rho : Tr(A_j^H rho) >= 0}`, which
/// the caller guarantees to be non-empty.
pub fn lower_expectation(g: &HermitianMatrix, constraints: &[HermitianMatrix]) -> Result<f64> {
    if constraints.is_empty() {
        return g.min_eigenvalue();
    }
    let sol = minimize_feasible(&SdpProblem::homogeneous(g.clone(), constraints)?)?;
    match sol.status {
        SdpStatus::Optimal => Ok(sol.value),
        SdpStatus::Infeasible => Err(Error::SolverFailure("credal constraints are infeasible".into())),
        SdpStatus::MaxIterations => Err(Error::MaxIterations { iterations: sol.iterations, gap: sol.gap }),
    }
}

/// Result of [`feasibility_margin`].
#[derive(Clone, Debug)]
pub struct MarginSolution {
    /// `t* = max t` with strict constraints `>= t` and border constraints `>= 0`.
    /// With no strict constraints, the border constraints carry `t`.
    /// `+inf` when there are no constraints at all.
    pub margin: f64,
    /// Whether the system with `t = 0` is feasible.
    pub feasible: bool,
    pub witness: DensityMatrix,
    /// Present whenever `margin <= 1e-9`; `beta = 0` flags a zero-margin
    /// (boundary) certificate.
    pub certificate: Option<Certificate>,
    pub gap: f64,
}

/// Maximal uniform margin of the strict constraints subject to the border
/// constraints, over density matrices.
pub fn feasibility_margin(border: &[HermitianMatrix], strict: &[HermitianMatrix]) -> Result<MarginSolution> {
    let n = match border.first().or(strict.first()) {
        Some(g) => g.dim(),
        None => return Err(Error::InvalidArgument("dimension unknown for an empty constraint list".into())),
    };
    feasibility_margin_dim(border, strict, n)
}

pub fn feasibility_margin_dim(border: &[HermitianMatrix], strict: &[HermitianMatrix], n: usize) -> Result<MarginSolution> {
    for g in border.iter().chain(strict) {
        crate::linalg::check_dims(n, g.dim())?;
    }
    if border.is_empty() && strict.is_empty() {
        return Ok(MarginSolution {
            margin: f64::INFINITY,
            feasible: true,
            witness: DensityMatrix::maximally_mixed(n),
            certificate: None,
            gap: 0.0,
        });
    }
    // Border-only systems put the margin on the border constraints themselves.
    let border_only = strict.is_empty();
    if !border_only && !border.is_empty() {
        // An infeasible border system alone already decides the question.
        let hard = feasibility_margin_dim(border, &[], n)?;
        if !hard.feasible {
            let mut cert = hard.certificate.expect("negative margin carries a certificate");
            cert.strict_weights = vec![0.0; strict.len()];
            return Ok(MarginSolution { certificate: Some(cert), ..hard });
        }
    }
    let (soft, hard): (&[HermitianMatrix], &[HermitianMatrix]) = if border_only { (border, &[]) } else { (strict, border) };

    let k = soft.len();
    let last = to_c(&soft[k - 1]);
    let prepared = prepare(hard);
    let scale = soft.iter().map(|g| g.norm_inf()).fold(1.0, f64::max);

    // S = y0 I - S_K - sum_{k<K} a_k (S_k - S_K) - sum_i b_i B_i
    let mut f = vec![-to_c(&HermitianMatrix::identity(n))];
    let mut kind = vec![VarKind::Free];
    let mut init = vec![0.0];
    for s in &soft[..k - 1] {
        f.push(to_c(s) - &last);
        kind.push(VarKind::NonNeg);
        init.push(1.0 / k as f64);
    }
    for c in &prepared {
        f.push(to_c(&c.matrix));
        if c.partner.is_some() {
            kind.push(VarKind::Boxed);
            init.push(0.0);
        } else {
            kind.push(VarKind::NonNeg);
            init.push(1.0);
        }
    }
    let mut rows = Vec::new();
    if k > 1 {
        let mut r = vec![0.0; f.len()];
        for x in r.iter_mut().take(k).skip(1) {
            *x = 1.0;
        }
        rows.push((r, 1.0));
    }
    let mut b = vec![0.0; f.len()];
    b[0] = -1.0;
    let dual = DualProblem { c: -last, f, b, kind, rows, bound: BOUND_REL * scale, lead: 0, scale };
    let out = dual.solve(&init)?;

    let margin = out.y[0];
    let witness = DensityMatrix::from_near_psd(&out.primal)?;

    let mut soft_w: Vec<f64> = out.y[1..k].to_vec();
    soft_w.push(1.0 - soft_w.iter().sum::<f64>());
    let soft_w: Vec<f64> = soft_w.into_iter().map(|w| w.max(0.0)).collect();
    let hard_w = scatter(&prepared, &out.y[k..], hard.len());

    let feasible = margin >= -FEAS_TOL * scale;
    let certificate = if margin <= FEAS_TOL * scale {
        let (strict_w, border_w) = if border_only { (Vec::new(), soft_w) } else { (soft_w, hard_w) };
        Some(normalize_certificate(strict_w, border_w, margin, strict, border, n)?)
    } else {
        None
    };
    Ok(MarginSolution { margin, feasible, witness, certificate, gap: out.gap })
}

/// Rescales raw multipliers so that `beta = 1` (strictly negative combination)
/// or the largest weight is one (zero margin), then re-verifies by eigenvalues.
fn normalize_certificate(
    strict_w: Vec<f64>,
    border_w: Vec<f64>,
    margin: f64,
    strict: &[HermitianMatrix],
    border: &[HermitianMatrix],
    n: usize,
) -> Result<Certificate> {
    let negative = margin < -FEAS_TOL;
    let divisor = if negative {
        -margin
    } else {
        strict_w.iter().chain(&border_w).fold(0.0f64, |a, &b| a.max(b)).max(f64::MIN_POSITIVE)
    };
    let mut cert = Certificate {
        strict_weights: strict_w.iter().map(|w| w / divisor).collect(),
        border_weights: border_w.iter().map(|w| w / divisor).collect(),
        beta: if negative { 1.0 } else { 0.0 },
        max_eigenvalue: 0.0,
    };
    let combined = cert.combined(strict, border, n);
    let lam = combined.max_eigenvalue()?;
    cert.max_eigenvalue = lam;
    let weight: f64 = cert
        .strict_weights
        .iter()
        .zip(strict)
        .chain(cert.border_weights.iter().zip(border))
        .map(|(w, g)| w * g.norm_inf())
        .sum();
    if lam > -cert.beta + CERT_TOL * weight.max(1.0) {
        if negative {
            return Err(Error::SolverFailure(format!(
                "infeasibility certificate failed verification: max eigenvalue {lam:e} above {:e}",
                -cert.beta
            )));
        }
        // A zero-margin certificate that does not verify carries no information.
        cert.beta = 0.0;
    }
    Ok(cert)
}
