//! JSON scenario files.
//!
//! Complex entries are `[re, im]` pairs or plain real numbers; matrices are
//! row-major nested arrays. Every field is checked at parse time and errors
//! carry the JSON path of the offending value, e.g. `$.gambles[0][1][1]`.

use std::collections::BTreeMap;

use serde_json::{json, Map, Value};

use crate::classical::ClassicalModel;
use crate::credal::{Assessment, IrrelevanceDirection, Strictness};
use crate::linalg::{CMatrix, Complex64, HermitianMatrix, Subsystem, UnitaryMap};
use crate::measurement::{make_measurement, DensityMatrix, ProjectiveMeasurement, Projector};

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ScenarioError {
    #[error("parse error at {path}: {reason}")]
    Parse { path: String, reason: String },
    #[error("validation error at {path}: {reason}")]
    Validation { path: String, reason: String },
}

type Res<T> = std::result::Result<T, ScenarioError>;

fn parse_err<T>(path: &str, reason: impl Into<String>) -> Res<T> {
    Err(ScenarioError::Parse { path: path.to_string(), reason: reason.into() })
}

fn invalid<T>(path: &str, reason: impl ToString) -> Res<T> {
    Err(ScenarioError::Validation { path: path.to_string(), reason: reason.to_string() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Domain {
    #[default]
    Quantum,
    Classical,
}

/// How a credal set is given in a scenario.
#[derive(Clone, Debug, PartialEq)]
pub enum ModelKind {
    Vacuous,
    Assessments(Vec<Assessment>),
    ExtremePoints(Vec<DensityMatrix>),
    Constraints(Vec<HermitianMatrix>),
    Classical(ClassicalModel),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    pub dim: usize,
    pub domain: Domain,
    pub kind: ModelKind,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Scenario {
    pub description: Option<String>,
    pub model: Option<ModelSpec>,
    /// Second operand of `extend`.
    pub other: Option<ModelSpec>,
    pub gambles: Vec<HermitianMatrix>,
    pub state: Option<DensityMatrix>,
    pub states: Vec<DensityMatrix>,
    pub dims: Option<(usize, usize)>,
    pub keep: Option<Subsystem>,
    pub measurement: Option<ProjectiveMeasurement>,
    pub measurements: Vec<ProjectiveMeasurement>,
    pub projector: Option<Projector>,
    pub outcomes: Option<Vec<usize>>,
    pub unitary: Option<UnitaryMap>,
    pub direction: Option<IrrelevanceDirection>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub tolerances: BTreeMap<String, f64>,
}

const TOP_FIELDS: &[&str] = &[
    "schema",
    "description",
    "model",
    "other",
    "gambles",
    "state",
    "states",
    "dims",
    "keep",
    "measurement",
    "measurements",
    "projector",
    "outcomes",
    "unitary",
    "direction",
    "trials",
    "seed",
    "tolerances",
];

const MODEL_FIELDS: &[&str] =
    &["dim", "domain", "vacuous", "assessments", "extreme_points", "constraints", "distribution", "vertices", "interval"];

fn object<'a>(v: &'a Value, path: &str, allowed: &[&str]) -> Res<&'a Map<String, Value>> {
    let Value::Object(map) = v else { return parse_err(path, "expected an object") };
    for key in map.keys() {
        if !allowed.contains(&key.as_str()) {
            return parse_err(&format!("{path}.{key}"), "unknown field");
        }
    }
    Ok(map)
}

fn array<'a>(v: &'a Value, path: &str) -> Res<&'a Vec<Value>> {
    match v {
        Value::Array(a) => Ok(a),
        _ => parse_err(path, "expected an array"),
    }
}

fn number(v: &Value, path: &str) -> Res<f64> {
    match v.as_f64() {
        Some(x) if v.is_number() => Ok(x),
        _ => parse_err(path, "expected a number"),
    }
}

fn unsigned(v: &Value, path: &str) -> Res<u64> {
    v.as_u64().map_or_else(|| parse_err(path, "expected a non-negative integer"), Ok)
}

fn string<'a>(v: &'a Value, path: &str) -> Res<&'a str> {
    v.as_str().map_or_else(|| parse_err(path, "expected a string"), Ok)
}

fn boolean(v: &Value, path: &str) -> Res<bool> {
    v.as_bool().map_or_else(|| parse_err(path, "expected a boolean"), Ok)
}

fn complex(v: &Value, path: &str) -> Res<Complex64> {
    match v {
        Value::Number(_) => Ok(Complex64::new(number(v, path)?, 0.0)),
        Value::Array(pair) if pair.len() == 2 => {
            Ok(Complex64::new(number(&pair[0], &format!("{path}[0]"))?, number(&pair[1], &format!("{path}[1]"))?))
        }
        _ => parse_err(path, "expected a number or an [re, im] pair"),
    }
}

fn complex_matrix(v: &Value, path: &str) -> Res<CMatrix> {
    let rows = array(v, path)?;
    let n = rows.len();
    if n == 0 {
        return parse_err(path, "empty matrix");
    }
    let mut m = CMatrix::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        let rp = format!("{path}[{i}]");
        let cells = array(row, &rp)?;
        if cells.len() != n {
            return parse_err(&rp, format!("row has {} entries, expected {n}", cells.len()));
        }
        for (j, cell) in cells.iter().enumerate() {
            m[(i, j)] = complex(cell, &format!("{rp}[{j}]"))?;
        }
    }
    Ok(m)
}

fn hermitian(v: &Value, path: &str) -> Res<HermitianMatrix> {
    HermitianMatrix::new(complex_matrix(v, path)?).or_else(|e| invalid(path, e))
}

fn density(v: &Value, path: &str) -> Res<DensityMatrix> {
    DensityMatrix::new(hermitian(v, path)?).or_else(|e| invalid(path, e))
}

fn hermitian_list(v: &Value, path: &str) -> Res<Vec<HermitianMatrix>> {
    array(v, path)?.iter().enumerate().map(|(i, m)| hermitian(m, &format!("{path}[{i}]"))).collect()
}

fn density_list(v: &Value, path: &str) -> Res<Vec<DensityMatrix>> {
    array(v, path)?.iter().enumerate().map(|(i, m)| density(m, &format!("{path}[{i}]"))).collect()
}

fn measurement(v: &Value, path: &str) -> Res<ProjectiveMeasurement> {
    make_measurement(hermitian_list(v, path)?).or_else(|e| invalid(path, e))
}

fn real_vector(v: &Value, path: &str) -> Res<Vec<f64>> {
    array(v, path)?.iter().enumerate().map(|(i, x)| number(x, &format!("{path}[{i}]"))).collect()
}

fn subsystem(v: &Value, path: &str) -> Res<Subsystem> {
    match string(v, path)? {
        "A" | "a" => Ok(Subsystem::A),
        "B" | "b" => Ok(Subsystem::B),
        other => parse_err(path, format!("expected \"A\" or \"B\", got {other:?}")),
    }
}

fn model(v: &Value, path: &str) -> Res<ModelSpec> {
    let map = object(v, path, MODEL_FIELDS)?;
    let field = |k: &str| format!("{path}.{k}");
    let domain = match map.get("domain") {
        None => Domain::Quantum,
        Some(d) => match string(d, &field("domain"))? {
            "quantum" => Domain::Quantum,
            "classical" => Domain::Classical,
            other => return parse_err(&field("domain"), format!("expected \"quantum\" or \"classical\", got {other:?}")),
        },
    };
    let declared = match map.get("dim") {
        Some(d) => Some(unsigned(d, &field("dim"))? as usize).filter(|&n| n > 0).map_or_else(
            || invalid(&field("dim"), "dimension must be positive").map(Some),
            |n| Ok(Some(n)),
        )?,
        None => None,
    };
    let kinds: Vec<&str> = ["vacuous", "assessments", "extreme_points", "constraints", "distribution", "vertices", "interval"]
        .into_iter()
        .filter(|k| map.contains_key(*k))
        .collect();
    if kinds.len() != 1 {
        return invalid(path, "exactly one of vacuous, assessments, extreme_points, constraints, distribution, vertices, interval is required");
    }
    let key = kinds[0];
    let kp = field(key);
    let body = &map[key];
    let (kind, inferred) = match key {
        "vacuous" => {
            if !boolean(body, &kp)? {
                return invalid(&kp, "vacuous must be true when present");
            }
            (ModelKind::Vacuous, None)
        }
        "assessments" => {
            let mut out = Vec::new();
            for (i, a) in array(body, &kp)?.iter().enumerate() {
                let ap = format!("{kp}[{i}]");
                let obj = object(a, &ap, &["gamble", "strictness"])?;
                let g = hermitian(obj.get("gamble").ok_or_else(|| missing(&ap, "gamble"))?, &format!("{ap}.gamble"))?;
                let strictness = match obj.get("strictness") {
                    None => Strictness::Strict,
                    Some(s) => match string(s, &format!("{ap}.strictness"))? {
                        "strict" => Strictness::Strict,
                        "border" => Strictness::Border,
                        other => {
                            return parse_err(
                                &format!("{ap}.strictness"),
                                format!("expected \"strict\" or \"border\", got {other:?}"),
                            )
                        }
                    },
                };
                out.push(Assessment { gamble: g, strictness });
            }
            let n = out.first().map(|a| a.gamble.dim());
            (ModelKind::Assessments(out), n)
        }
        "extreme_points" => {
            let pts = density_list(body, &kp)?;
            if pts.is_empty() {
                return invalid(&kp, "at least one extreme point is required");
            }
            let n = pts[0].dim();
            (ModelKind::ExtremePoints(pts), Some(n))
        }
        "constraints" => {
            let c = hermitian_list(body, &kp)?;
            let n = c.first().map(|g| g.dim());
            (ModelKind::Constraints(c), n)
        }
        "distribution" => {
            let p = real_vector(body, &kp)?;
            let n = p.len();
            (ModelKind::Classical(ClassicalModel::Point(p)), Some(n))
        }
        "vertices" => {
            let vs: Vec<Vec<f64>> =
                array(body, &kp)?.iter().enumerate().map(|(i, v)| real_vector(v, &format!("{kp}[{i}]"))).collect::<Res<_>>()?;
            let n = vs.first().map(|v| v.len());
            (ModelKind::Classical(ClassicalModel::Vertices(vs)), n)
        }
        _ => {
            let obj = object(body, &kp, &["outcome", "lower", "upper"])?;
            let get = |k: &str| obj.get(k).ok_or_else(|| missing(&kp, k));
            let outcome = unsigned(get("outcome")?, &format!("{kp}.outcome"))? as usize;
            let lo = number(get("lower")?, &format!("{kp}.lower"))?;
            let hi = number(get("upper")?, &format!("{kp}.upper"))?;
            let n = declared.ok_or_else(|| missing(path, "dim"))?;
            let m = ClassicalModel::interval(n, outcome, lo, hi).or_else(|e| invalid(&kp, e))?;
            (ModelKind::Classical(m), Some(n))
        }
    };
    let dim = match (declared, inferred) {
        (Some(d), Some(i)) if d != i => return invalid(&field("dim"), format!("declared {d} but matrices have dimension {i}")),
        (Some(d), _) => d,
        (None, Some(i)) => i,
        (None, None) => return Err(missing(path, "dim")),
    };
    check_model_dims(&kind, dim, &kp)?;
    Ok(ModelSpec { dim, domain, kind })
}

fn check_model_dims(kind: &ModelKind, n: usize, path: &str) -> Res<()> {
    let dims: Vec<usize> = match kind {
        ModelKind::Vacuous => vec![],
        ModelKind::Assessments(a) => a.iter().map(|x| x.gamble.dim()).collect(),
        ModelKind::ExtremePoints(p) => p.iter().map(|x| x.dim()).collect(),
        ModelKind::Constraints(c) => c.iter().map(|x| x.dim()).collect(),
        ModelKind::Classical(ClassicalModel::Point(p)) => vec![p.len()],
        ModelKind::Classical(ClassicalModel::Vertices(v)) => v.iter().map(|x| x.len()).collect(),
        ModelKind::Classical(ClassicalModel::Inequalities { n, .. }) => vec![*n],
    };
    if let Some(i) = dims.iter().position(|&d| d != n) {
        return invalid(&format!("{path}[{i}]"), format!("dimension {} differs from {n}", dims[i]));
    }
    Ok(())
}

fn missing(path: &str, field: &str) -> ScenarioError {
    ScenarioError::Validation { path: path.to_string(), reason: format!("missing field `{field}`") }
}

pub fn parse_scenario(text: &str) -> Res<Scenario> {
    let root: Value = serde_json::from_str(text).or_else(|e| parse_err("$", e.to_string()))?;
    let map = object(&root, "$", TOP_FIELDS)?;
    let p = |k: &str| format!("$.{k}");
    let mut s = Scenario::default();
    if let Some(v) = map.get("schema") {
        let version = unsigned(v, &p("schema"))?;
        if version != SCHEMA_VERSION {
            return invalid(&p("schema"), format!("unsupported schema version {version}"));
        }
    }
    for (key, v) in map {
        let path = p(key);
        match key.as_str() {
            "schema" => {}
            "description" => s.description = Some(string(v, &path)?.to_string()),
            "model" => s.model = Some(model(v, &path)?),
            "other" => s.other = Some(model(v, &path)?),
            "gambles" => s.gambles = hermitian_list(v, &path)?,
            "state" => s.state = Some(density(v, &path)?),
            "states" => s.states = density_list(v, &path)?,
            "dims" => {
                let d = array(v, &path)?;
                if d.len() != 2 {
                    return parse_err(&path, "expected [n, m]");
                }
                let a = unsigned(&d[0], &format!("{path}[0]"))? as usize;
                let b = unsigned(&d[1], &format!("{path}[1]"))? as usize;
                if a == 0 || b == 0 {
                    return invalid(&path, "factor dimensions must be positive");
                }
                s.dims = Some((a, b));
            }
            "keep" => s.keep = Some(subsystem(v, &path)?),
            "measurement" => s.measurement = Some(measurement(v, &path)?),
            "measurements" => {
                s.measurements = array(v, &path)?
                    .iter()
                    .enumerate()
                    .map(|(i, m)| measurement(m, &format!("{path}[{i}]")))
                    .collect::<Res<_>>()?
            }
            "projector" => s.projector = Some(Projector::new(hermitian(v, &path)?).or_else(|e| invalid(&path, e))?),
            "outcomes" => {
                s.outcomes = Some(
                    array(v, &path)?
                        .iter()
                        .enumerate()
                        .map(|(i, x)| unsigned(x, &format!("{path}[{i}]")).map(|u| u as usize))
                        .collect::<Res<_>>()?,
                )
            }
            "unitary" => {
                let obj = object(v, &path, &["matrix", "antiunitary"])?;
                let m = complex_matrix(obj.get("matrix").ok_or_else(|| missing(&path, "matrix"))?, &format!("{path}.matrix"))?;
                let anti = match obj.get("antiunitary") {
                    Some(b) => boolean(b, &format!("{path}.antiunitary"))?,
                    None => false,
                };
                s.unitary = Some(UnitaryMap::new(m, anti).or_else(|e| invalid(&format!("{path}.matrix"), e))?);
            }
            "direction" => {
                s.direction = Some(match string(v, &path)? {
                    "AtoB" => IrrelevanceDirection::AtoB,
                    "BtoA" => IrrelevanceDirection::BtoA,
                    other => return parse_err(&path, format!("expected \"AtoB\" or \"BtoA\", got {other:?}")),
                })
            }
            "trials" => {
                let t = unsigned(v, &path)? as usize;
                if t == 0 {
                    return invalid(&path, "trials must be positive");
                }
                s.trials = Some(t);
            }
            "seed" => s.seed = Some(unsigned(v, &path)?),
            "tolerances" => {
                let Value::Object(tm) = v else { return parse_err(&path, "expected an object") };
                for (name, x) in tm {
                    let tp = format!("{path}.{name}");
                    let value = number(x, &tp)?;
                    super::tolerance_check(name, value).or_else(|reason| invalid(&tp, reason))?;
                    s.tolerances.insert(name.clone(), value);
                }
            }
            _ => unreachable!("field list checked above"),
        }
    }
    Ok(s)
}

fn complex_value(z: Complex64) -> Value {
    json!([z.re, z.im])
}

pub fn matrix_value(m: &HermitianMatrix) -> Value {
    serde_json::to_value(m).expect("matrix serializes")
}

fn cmatrix_value(m: &CMatrix) -> Value {
    Value::Array((0..m.nrows()).map(|i| Value::Array((0..m.ncols()).map(|j| complex_value(m[(i, j)])).collect())).collect())
}

fn measurement_value(m: &ProjectiveMeasurement) -> Value {
    Value::Array(m.projectors().iter().map(|p| matrix_value(p.matrix())).collect())
}

fn model_value(m: &ModelSpec) -> Value {
    let mut out = Map::new();
    out.insert("dim".into(), json!(m.dim));
    if m.domain == Domain::Classical {
        out.insert("domain".into(), json!("classical"));
    }
    match &m.kind {
        ModelKind::Vacuous => {
            out.insert("vacuous".into(), json!(true));
        }
        ModelKind::Assessments(a) => {
            let list: Vec<Value> = a
                .iter()
                .map(|x| {
                    json!({
                        "gamble": matrix_value(&x.gamble),
                        "strictness": match x.strictness { Strictness::Strict => "strict", Strictness::Border => "border" },
                    })
                })
                .collect();
            out.insert("assessments".into(), Value::Array(list));
        }
        ModelKind::ExtremePoints(p) => {
            out.insert("extreme_points".into(), Value::Array(p.iter().map(|x| matrix_value(x.matrix())).collect()));
        }
        ModelKind::Constraints(c) => {
            out.insert("constraints".into(), Value::Array(c.iter().map(matrix_value).collect()));
        }
        ModelKind::Classical(ClassicalModel::Point(p)) => {
            out.insert("distribution".into(), json!(p));
        }
        ModelKind::Classical(ClassicalModel::Vertices(v)) => {
            out.insert("vertices".into(), json!(v));
        }
        ModelKind::Classical(ClassicalModel::Inequalities { rows, .. }) => {
            // Intervals are the only inequality form a scenario can express.
            let outcome = rows[0].0.iter().position(|&x| x != 0.0).unwrap_or(0);
            out.insert("interval".into(), json!({"outcome": outcome, "lower": rows[0].1, "upper": -rows[1].1}));
        }
    }
    Value::Object(out)
}

/// Canonical JSON form; parsing it yields an equal scenario.
pub fn scenario_value(s: &Scenario) -> Value {
    let mut out = Map::new();
    out.insert("schema".into(), json!(SCHEMA_VERSION));
    if let Some(d) = &s.description {
        out.insert("description".into(), json!(d));
    }
    if let Some(m) = &s.model {
        out.insert("model".into(), model_value(m));
    }
    if let Some(m) = &s.other {
        out.insert("other".into(), model_value(m));
    }
    if !s.gambles.is_empty() {
        out.insert("gambles".into(), Value::Array(s.gambles.iter().map(matrix_value).collect()));
    }
    if let Some(r) = &s.state {
        out.insert("state".into(), matrix_value(r.matrix()));
    }
    if !s.states.is_empty() {
        out.insert("states".into(), Value::Array(s.states.iter().map(|r| matrix_value(r.matrix())).collect()));
    }
    if let Some((a, b)) = s.dims {
        out.insert("dims".into(), json!([a, b]));
    }
    if let Some(k) = s.keep {
        out.insert("keep".into(), json!(if k == Subsystem::A { "A" } else { "B" }));
    }
    if let Some(m) = &s.measurement {
        out.insert("measurement".into(), measurement_value(m));
    }
    if !s.measurements.is_empty() {
        out.insert("measurements".into(), Value::Array(s.measurements.iter().map(measurement_value).collect()));
    }
    if let Some(p) = &s.projector {
        out.insert("projector".into(), matrix_value(p.matrix()));
    }
    if let Some(o) = &s.outcomes {
        out.insert("outcomes".into(), json!(o));
    }
    if let Some(u) = &s.unitary {
        out.insert("unitary".into(), json!({"matrix": cmatrix_value(u.matrix()), "antiunitary": u.is_antiunitary()}));
    }
    if let Some(d) = s.direction {
        out.insert("direction".into(), json!(if d == IrrelevanceDirection::AtoB { "AtoB" } else { "BtoA" }));
    }
    if let Some(t) = s.trials {
        out.insert("trials".into(), json!(t));
    }
    if let Some(seed) = s.seed {
        out.insert("seed".into(), json!(seed));
    }
    if !s.tolerances.is_empty() {
        out.insert("tolerances".into(), json!(s.tolerances));
    }
    Value::Object(out)
}
