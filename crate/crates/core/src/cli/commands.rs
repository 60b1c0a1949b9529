use serde_json::{json, Map, Value};

use super::report::{num, Report};
use super::scenario::{matrix_value, Domain, ModelKind, ModelSpec, Scenario};
use super::Tolerances;
use crate::classical::{classical_embed, classical_from_assessments, classical_pins};
use crate::credal::{
    check_coherence, check_independence, check_irrelevance_probe, condition_nonselective, condition_selective,
    credal_from_assessments, frechet_check, marginal, natural_extension, Assessment, CoherenceReport, CredalSet,
    IrrelevanceDirection, Representation,
};
use crate::error::{Error, Result};
use crate::game::{dutch_book_demo, run_simulation, Scenario as GameScenario};
use crate::linalg::{pauli_coords, HermitianMatrix, Subsystem};
use crate::measurement::{born_probabilities, payoff, DensityMatrix, ProjectiveMeasurement};

const DEFAULT_TRIALS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Check,
    Prevision,
    Member,
    Condition,
    Marginal,
    Extend,
    Evolve,
    Born,
    Frechet,
    Independence,
    Simulate,
    Pauli,
}

impl Command {
    pub const ALL: [Command; 12] = [
        Command::Check,
        Command::Prevision,
        Command::Member,
        Command::Condition,
        Command::Marginal,
        Command::Extend,
        Command::Evolve,
        Command::Born,
        Command::Frechet,
        Command::Independence,
        Command::Simulate,
        Command::Pauli,
    ];

    pub fn from_name(name: &str) -> Option<Command> {
        Command::ALL.into_iter().find(|c| c.name() == name)
    }

    pub fn name(self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Prevision => "prevision",
            Command::Member => "member",
            Command::Condition => "condition",
            Command::Marginal => "marginal",
            Command::Extend => "extend",
            Command::Evolve => "evolve",
            Command::Born => "born",
            Command::Frechet => "frechet",
            Command::Independence => "independence",
            Command::Simulate => "simulate",
            Command::Pauli => "pauli",
        }
    }
}

struct Out {
    exit_code: i32,
    result: Map<String, Value>,
    lines: Vec<String>,
}

impl Out {
    fn new() -> Self {
        Self { exit_code: 0, result: Map::new(), lines: Vec::new() }
    }

    fn put(&mut self, key: &str, v: Value) {
        self.result.insert(key.into(), v);
    }

    fn line(&mut self, s: String) {
        self.lines.push(s);
    }
}

/// Runs `command` on the scenario. Incoherent assessments give a report
/// with exit code 2 and the partial-loss certificate; other failures are
/// returned as errors.
pub fn dispatch(command: Command, s: &Scenario, tol: &Tolerances) -> Result<Report> {
    let mut out = Out::new();
    let run = match command {
        Command::Check => check(s, tol, &mut out),
        Command::Prevision => prevision(s, &mut out),
        Command::Member => member(s, &mut out),
        Command::Condition => condition(s, &mut out),
        Command::Marginal => marginal_cmd(s, &mut out),
        Command::Extend => extend(s, &mut out),
        Command::Evolve => evolve(s, &mut out),
        Command::Born => born(s, &mut out),
        Command::Frechet => frechet(s, &mut out),
        Command::Independence => independence(s, tol, &mut out),
        Command::Simulate => simulate(s, tol, &mut out),
        Command::Pauli => pauli(s, &mut out),
    };
    match run {
        Ok(()) => {}
        Err(Error::Incoherent(report)) => {
            out = Out::new();
            coherence_out(&report, s.model.as_ref().map_or(0, assessment_count), None, &mut out);
        }
        Err(e) => return Err(e),
    }
    Ok(Report {
        command: command.name(),
        exit_code: out.exit_code,
        result: Value::Object(out.result),
        lines: out.lines,
        tolerances: tol.metadata(),
    })
}

fn need<'a, T>(x: &'a Option<T>, field: &str) -> Result<&'a T> {
    x.as_ref().ok_or_else(|| Error::InvalidArgument(format!("scenario needs `{field}`")))
}

fn assessment_count(m: &ModelSpec) -> usize {
    match &m.kind {
        ModelKind::Assessments(a) => a.len(),
        _ => 0,
    }
}

/// The user's assessments, plus the off-diagonal pins in the classical domain.
fn full_assessments(m: &ModelSpec, a: &[Assessment]) -> Vec<Assessment> {
    let mut all = a.to_vec();
    if m.domain == Domain::Classical {
        all.extend(classical_pins(m.dim).into_iter().map(Assessment::border));
    }
    all
}

pub(crate) fn build_model(m: &ModelSpec) -> Result<CredalSet> {
    match &m.kind {
        ModelKind::Vacuous => Ok(CredalSet::vacuous(m.dim)),
        ModelKind::Assessments(a) => match m.domain {
            Domain::Quantum => credal_from_assessments(a, m.dim),
            Domain::Classical => classical_from_assessments(a, m.dim),
        },
        ModelKind::ExtremePoints(p) => CredalSet::from_extreme_points(p.clone()),
        ModelKind::Constraints(c) => CredalSet::from_constraints(m.dim, c.clone()),
        ModelKind::Classical(c) => classical_embed(c),
    }
}

fn model(s: &Scenario) -> Result<CredalSet> {
    build_model(need(&s.model, "model")?)
}

fn states(s: &Scenario) -> Vec<&DensityMatrix> {
    s.state.iter().chain(&s.states).collect()
}

fn state_value(r: &DensityMatrix) -> Value {
    matrix_value(r.matrix())
}

fn list(xs: &[f64]) -> String {
    format!("({})", xs.iter().map(|x| num(*x)).collect::<Vec<_>>().join(", "))
}

fn representation_name(m: &CredalSet) -> &'static str {
    match m.representation() {
        Representation::HRep(_) => "constraints",
        Representation::VRep(_) => "extreme_points",
        Representation::Conditioned { .. } => "conditioned",
        Representation::Marginal { .. } => "marginal",
    }
}

/// `threshold` applies to systems with strict gambles, whose margin is
/// compared against the coherence tolerance.
fn coherence_out(r: &CoherenceReport, user: usize, threshold: Option<f64>, out: &mut Out) {
    let coherent = r.is_coherent() && threshold.is_none_or(|t| r.margin > t);
    let status = if coherent { "coherent" } else { "incoherent" };
    out.exit_code = if coherent { 0 } else { 2 };
    out.put("status", json!(status));
    out.put("margin", json!(r.margin));
    out.line(format!("status: {status}, margin: {}", num(r.margin)));
    if let Some(w) = &r.witness {
        out.put("witness", state_value(w));
    }
    match &r.certificate {
        Some(c) => {
            let (alpha, pins) = c.alpha.split_at(user.min(c.alpha.len()));
            let mut cert = Map::new();
            cert.insert("alpha".into(), json!(alpha));
            if pins.iter().any(|w| *w != 0.0) {
                cert.insert("pin_weights".into(), json!(pins));
            }
            cert.insert("beta".into(), json!(c.beta));
            cert.insert("max_eigenvalue".into(), json!(c.max_eigenvalue));
            cert.insert("boundary".into(), json!(c.is_boundary()));
            out.put("certificate", Value::Object(cert));
            out.line(format!(
                "certificate: alpha = {}, beta = {}, max eigenvalue = {}",
                list(alpha),
                num(c.beta),
                num(c.max_eigenvalue)
            ));
        }
        None if !coherent => {
            out.put("certificate", Value::Null);
            out.line("certificate: none (margin below the coherence tolerance)".into());
        }
        None => {}
    }
}

fn check(s: &Scenario, tol: &Tolerances, out: &mut Out) -> Result<()> {
    let m = need(&s.model, "model")?;
    match &m.kind {
        ModelKind::Assessments(a) => {
            let all = full_assessments(m, a);
            let report = check_coherence(&all, m.dim)?;
            let strict = a.iter().any(|x| x.strictness == crate::credal::Strictness::Strict);
            coherence_out(&report, a.len(), strict.then_some(tol.coherence), out);
        }
        _ => {
            let set = build_model(m)?;
            out.put("status", json!("coherent"));
            out.put("representation", json!(representation_name(&set)));
            out.line("status: coherent (non-empty credal set)".into());
        }
    }
    Ok(())
}

fn interval_lines(set: &CredalSet, gambles: &[HermitianMatrix], out: &mut Out) -> Result<()> {
    let mut rows = Vec::with_capacity(gambles.len());
    for g in gambles {
        let p = set.prevision(g)?;
        rows.push(json!({"lower": p.lower, "upper": p.upper}));
        out.line(format!("[{}, {}]", num(p.lower), num(p.upper)));
    }
    out.put("previsions", Value::Array(rows));
    Ok(())
}

fn describe_set(set: &CredalSet, s: &Scenario, out: &mut Out) -> Result<()> {
    out.put("dim", json!(set.dim()));
    out.put("representation", json!(representation_name(set)));
    out.put("vacuous", json!(set.is_vacuous()));
    out.line(format!("dim: {}, representation: {}, vacuous: {}", set.dim(), representation_name(set), set.is_vacuous()));
    if !set.is_vacuous() && set.is_maximal()? {
        let rho = set.extract_state()?;
        out.put("state", state_value(&rho));
        out.line(format!("state: {}", matrix_text(rho.matrix())));
    }
    interval_lines(set, &s.gambles, out)?;
    membership(set, s, out)
}

fn membership(set: &CredalSet, s: &Scenario, out: &mut Out) -> Result<()> {
    let rs = states(s);
    if rs.is_empty() {
        return Ok(());
    }
    let mut flags = Vec::with_capacity(rs.len());
    for (i, r) in rs.iter().enumerate() {
        let inside = set.contains(r)?;
        flags.push(inside);
        out.line(format!("state {i}: {}", if inside { "member" } else { "not a member" }));
    }
    out.put("members", json!(flags));
    Ok(())
}

fn matrix_text(m: &HermitianMatrix) -> String {
    let n = m.dim();
    let rows: Vec<String> = (0..n)
        .map(|i| {
            let cells: Vec<String> = (0..n)
                .map(|j| {
                    let z = m.get(i, j);
                    if crate::cli::round_sig(z.im) == 0.0 {
                        num(z.re)
                    } else {
                        format!("{}{}{}i", num(z.re), if z.im < 0.0 { "-" } else { "+" }, num(z.im.abs()))
                    }
                })
                .collect();
            cells.join(", ")
        })
        .collect();
    format!("[{}]", rows.join("; "))
}

fn prevision(s: &Scenario, out: &mut Out) -> Result<()> {
    if s.gambles.is_empty() {
        return Err(Error::InvalidArgument("scenario needs `gambles`".into()));
    }
    interval_lines(&model(s)?, &s.gambles, out)
}

fn member(s: &Scenario, out: &mut Out) -> Result<()> {
    if states(s).is_empty() {
        return Err(Error::InvalidArgument("scenario needs `state` or `states`".into()));
    }
    membership(&model(s)?, s, out)
}

fn condition(s: &Scenario, out: &mut Out) -> Result<()> {
    let set = model(s)?;
    let cond = match (&s.projector, &s.measurement) {
        (Some(p), _) => condition_selective(&set, p)?,
        (None, Some(m)) => {
            let outcomes = need(&s.outcomes, "outcomes")?;
            condition_nonselective(&set, m, outcomes)?
        }
        (None, None) => return Err(Error::InvalidArgument("scenario needs `projector` or `measurement`".into())),
    };
    describe_set(&cond, s, out)
}

fn marginal_cmd(s: &Scenario, out: &mut Out) -> Result<()> {
    let dims = *need(&s.dims, "dims")?;
    let keep = s.keep.unwrap_or(Subsystem::A);
    let set = marginal(&model(s)?, dims, keep)?;
    describe_set(&set, s, out)
}

fn extend(s: &Scenario, out: &mut Out) -> Result<()> {
    let a = model(s)?;
    let b = build_model(need(&s.other, "other")?)?;
    let ext = natural_extension(&a, &b)?;
    out.put("constraints", json!(ext.constraints().map_or(0, <[_]>::len)));
    describe_set(&ext, s, out)
}

fn evolve(s: &Scenario, out: &mut Out) -> Result<()> {
    let u = need(&s.unitary, "unitary")?;
    let set = model(s)?.evolve(u)?;
    describe_set(&set, s, out)
}

fn born(s: &Scenario, out: &mut Out) -> Result<()> {
    let rho = need(&s.state, "state")?;
    let m = s.measurement.clone().unwrap_or_else(|| ProjectiveMeasurement::canonical(rho.dim()));
    let probs = born_probabilities(rho, &m)?;
    out.put("probabilities", json!(probs));
    out.line(format!("probabilities: {}", list(&probs)));
    if !s.gambles.is_empty() {
        let mut rows = Vec::new();
        for (k, g) in s.gambles.iter().enumerate() {
            let pays = m.projectors().iter().map(|p| payoff(g, p)).collect::<Result<Vec<_>>>()?;
            let expected = rho.expectation(g)?;
            out.line(format!("gamble {k}: payoffs {}, expectation {}", list(&pays), num(expected)));
            rows.push(json!({"payoffs": pays, "expectation": expected}));
        }
        out.put("gambles", Value::Array(rows));
    }
    Ok(())
}

fn frechet(s: &Scenario, out: &mut Out) -> Result<()> {
    let rho = need(&s.state, "state")?;
    let dims = *need(&s.dims, "dims")?;
    let r = frechet_check(rho, dims)?;
    out.put("holds", json!(r.holds));
    out.put("min_eigenvalues", json!(r.min_eigenvalues));
    out.put("all_hold", json!(r.all_hold()));
    let names = [
        "(i) rho_A x I - rho",
        "(ii) I x rho_B - rho",
        "(iii) rho - (rho_A x I + I x rho_B - I)",
        "(iv) rho",
    ];
    for ((name, h), lam) in names.iter().zip(r.holds).zip(r.min_eigenvalues) {
        out.line(format!("{name}: {}, min eigenvalue {}", if h { "holds" } else { "violated" }, num(lam)));
    }
    Ok(())
}

fn independence(s: &Scenario, tol: &Tolerances, out: &mut Out) -> Result<()> {
    let dims = *need(&s.dims, "dims")?;
    if let Some(rho) = &s.state {
        let r = check_independence(rho, dims)?;
        let independent = r.residual <= tol.product;
        out.put("independent", json!(independent));
        out.put("residual", json!(r.residual));
        out.put("rho_a", state_value(&r.rho_a));
        out.put("rho_b", state_value(&r.rho_b));
        out.line(format!("independent: {independent}, residual: {}", num(r.residual)));
        return Ok(());
    }
    let set = model(s)?;
    let directions = match s.direction {
        Some(d) => vec![d],
        None => vec![IrrelevanceDirection::AtoB, IrrelevanceDirection::BtoA],
    };
    let mut all = true;
    let mut rows = Map::new();
    for d in directions {
        let r = check_irrelevance_probe(&set, dims, d, &s.measurements, &s.gambles, s.seed)?;
        let holds = r.max_discrepancy <= tol.set;
        all &= holds;
        let name = if d == IrrelevanceDirection::AtoB { "AtoB" } else { "BtoA" };
        out.line(format!(
            "{name}: irrelevant: {holds}, max discrepancy: {}, measurements: {}, null events: {}, undefined: {}",
            num(r.max_discrepancy),
            r.measurements_tested,
            r.null_events.len(),
            r.undefined.len()
        ));
        rows.insert(
            name.into(),
            json!({
                "holds": holds,
                "max_discrepancy": r.max_discrepancy,
                "measurements_tested": r.measurements_tested,
                "null_events": r.null_events,
                "undefined": r.undefined,
            }),
        );
    }
    out.put("directions", Value::Object(rows));
    out.put("independent", json!(all));
    Ok(())
}

fn simulate(s: &Scenario, tol: &Tolerances, out: &mut Out) -> Result<()> {
    let rho = need(&s.state, "state")?.clone();
    let trials = s.trials.unwrap_or(DEFAULT_TRIALS);
    let seed = s.seed.unwrap_or(0);
    let mut game = GameScenario::new(rho, s.gambles.clone(), trials, seed);
    if let Some(m) = &s.measurement {
        game = game.with_measurement(m.clone());
    }
    if let Some(spec) = &s.model {
        if let ModelKind::Assessments(a) = &spec.kind {
            let all = full_assessments(spec, a);
            let report = check_coherence(&all, spec.dim)?;
            if !report.is_coherent() {
                return dutch_book(&all, a.len(), &game, out);
            }
            if game.accepted_gambles.is_empty() {
                game.accepted_gambles = a.iter().map(|x| x.gamble.clone()).collect();
            }
        }
    }
    if game.accepted_gambles.is_empty() {
        return Err(Error::InvalidArgument("scenario needs `gambles` or assessments to play".into()));
    }
    let ledger = run_simulation(&game)?;
    let bounds = ledger.sigma_bounds(tol.sigma);
    out.put("trials", json!(trials));
    out.put("seed", json!(seed));
    out.put("probabilities", json!(ledger.probabilities));
    out.line(format!("trials: {trials}, seed: {seed}"));
    out.line("gamble  empirical mean  expectation  |delta|  sigma bound".into());
    let mut rows = Vec::new();
    let mut within_all = true;
    for k in 0..ledger.expectations.len() {
        let delta = (ledger.empirical_means[k] - ledger.expectations[k]).abs();
        let within = delta <= bounds[k];
        within_all &= within;
        out.line(format!(
            "{k}  {}  {}  {}  {}",
            num(ledger.empirical_means[k]),
            num(ledger.expectations[k]),
            num(delta),
            num(bounds[k])
        ));
        rows.push(json!({
            "empirical_mean": ledger.empirical_means[k],
            "expectation": ledger.expectations[k],
            "delta": delta,
            "sigma_bound": bounds[k],
            "within": within,
            "cumulative": ledger.cumulative[k],
        }));
    }
    out.put("gambles", Value::Array(rows));
    out.put("within_bounds", json!(within_all));
    Ok(())
}

fn dutch_book(all: &[Assessment], user: usize, game: &GameScenario, out: &mut Out) -> Result<()> {
    let r = dutch_book_demo(all, game)?;
    out.exit_code = 2;
    let alpha = &r.certificate.alpha[..user.min(r.certificate.alpha.len())];
    out.put("status", json!("incoherent"));
    out.put(
        "certificate",
        json!({"alpha": alpha, "beta": r.certificate.beta, "max_eigenvalue": r.certificate.max_eigenvalue}),
    );
    out.put("combined", matrix_value(&r.combined));
    out.put("outcome_payoffs", json!(r.outcome_payoffs));
    out.put("worst_case_bound", json!(r.worst_case_bound));
    out.put("max_trial_payoff", json!(r.max_trial_payoff));
    out.put("sure_loss", json!(r.sure_loss));
    out.put("boundary", json!(r.boundary));
    out.put("trials", json!(r.ledger.trials()));
    out.put("cumulative", json!(r.ledger.cumulative[0]));
    out.line(format!(
        "status: incoherent, certificate: alpha = {}, beta = {}",
        list(alpha),
        num(r.certificate.beta)
    ));
    out.line(format!("combined gamble: {}", matrix_text(&r.combined)));
    out.line(format!("payoff per outcome: {}", list(&r.outcome_payoffs)));
    out.line(format!(
        "trials: {}, cumulative payoff: {}, max trial payoff: {}, sure loss: {}",
        r.ledger.trials(),
        num(r.ledger.cumulative[0]),
        num(r.max_trial_payoff),
        r.sure_loss
    ));
    Ok(())
}

fn pauli(s: &Scenario, out: &mut Out) -> Result<()> {
    let mut rows = Vec::new();
    for (k, g) in s.gambles.iter().enumerate() {
        let (v, x, y, z) = pauli_coords(g)?;
        out.line(format!("gamble {k}: v = {}, x = {}, y = {}, z = {}", num(v), num(x), num(y), num(z)));
        rows.push(json!({"v": v, "x": x, "y": y, "z": z}));
    }
    let empty = rows.is_empty();
    out.put("gambles", Value::Array(rows));
    if let Some(rho) = &s.state {
        let (_, x, y, z) = pauli_coords(rho.matrix())?;
        let bloch = [2.0 * x, 2.0 * y, 2.0 * z];
        out.line(format!("state: bloch vector {}", list(&bloch)));
        out.put("bloch", json!(bloch));
    }
    if empty && s.state.is_none() {
        return Err(Error::InvalidArgument("scenario needs `gambles` or `state`".into()));
    }
    Ok(())
}
