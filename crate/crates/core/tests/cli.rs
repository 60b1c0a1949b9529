use std::process::Command as Proc;
use std::time::{Duration, Instant};

use qdg::cli::{parse_scenario, run, scenario_value, ModelKind, Scenario, EXAMPLES};
use qdg::linalg::HermitianMatrix;
use serde_json::Value;

fn qdg(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["qdg"];
    argv.extend_from_slice(args);
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut a = args.to_vec();
    a.extend(["--format", "json"]);
    let (code, out, err) = qdg(&a);
    assert!(err.is_empty(), "{err}");
    (code, serde_json::from_str(&out).unwrap())
}

fn close(a: &HermitianMatrix, b: &HermitianMatrix) -> bool {
    a.dim() == b.dim() && (a - b).norm_inf() <= 1e-15
}

/// Structural equality up to 1e-15 on every matrix.
fn same(a: &Scenario, b: &Scenario) -> bool {
    let mats = |s: &Scenario| -> Vec<HermitianMatrix> {
        let mut v = s.gambles.clone();
        v.extend(s.state.iter().chain(&s.states).map(|r| r.matrix().clone()));
        for m in [&s.model, &s.other].into_iter().flatten() {
            match &m.kind {
                ModelKind::Assessments(a) => v.extend(a.iter().map(|x| x.gamble.clone())),
                ModelKind::ExtremePoints(p) => v.extend(p.iter().map(|x| x.matrix().clone())),
                ModelKind::Constraints(c) => v.extend(c.iter().cloned()),
                _ => {}
            }
        }
        v.extend(s.measurement.iter().chain(&s.measurements).flat_map(|m| m.projectors().iter().map(|p| p.matrix().clone())));
        v.extend(s.projector.iter().map(|p| p.matrix().clone()));
        v
    };
    let (ma, mb) = (mats(a), mats(b));
    ma.len() == mb.len()
        && ma.iter().zip(&mb).all(|(x, y)| close(x, y))
        && a.dims == b.dims
        && a.keep == b.keep
        && a.outcomes == b.outcomes
        && a.trials == b.trials
        && a.seed == b.seed
        && a.tolerances == b.tolerances
        && a.model.as_ref().map(|m| (m.dim, m.domain)) == b.model.as_ref().map(|m| (m.dim, m.domain))
}

#[test]
fn bundled_scenarios_round_trip() {
    for (name, text) in EXAMPLES {
        let a = parse_scenario(text).unwrap_or_else(|e| panic!("{name}: {e}"));
        let b = parse_scenario(&scenario_value(&a).to_string()).unwrap();
        assert!(same(&a, &b), "{name}");
        assert_eq!(a, b, "{name}");
    }
}

#[test]
fn fair_coin_file_holds_border_assessments() {
    let s = parse_scenario(qdg::cli::example("fair_coin").unwrap()).unwrap();
    let ModelKind::Assessments(a) = &s.model.unwrap().kind else { panic!("assessments expected") };
    assert_eq!(a.len(), 2);
    assert_eq!(a[0].gamble, HermitianMatrix::diagonal(&[1., -1.]));
    assert_eq!(a[1].gamble, HermitianMatrix::diagonal(&[-1., 1.]));
    assert!(a.iter().all(|x| x.strictness == qdg::credal::Strictness::Border));
}

#[test]
fn case4_check_exits_2_with_certificate() {
    let (code, v) = json(&["check", "--example", "quantum_coin_case4"]);
    assert_eq!(code, 2);
    let cert = &v["result"]["certificate"];
    let alpha: Vec<f64> = cert["alpha"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!(alpha.iter().all(|a| (a - 1.0).abs() < 1e-6), "{alpha:?}");
    assert!((cert["beta"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(v["tolerances"]["herm"].is_number() && v["tolerances"]["coherence"].is_number());
}

#[test]
fn vacuous_prevision_text() {
    let (code, out, _) = qdg(&["prevision", "--example", "vacuous_prevision"]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "[-2.30277563773, 1.30277563773]");
}

#[test]
fn coherent_check_text() {
    let (code, out, _) = qdg(&["check", "--example", "interval_coin"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("status: coherent, margin: "), "{out}");
    let (_, out, _) = qdg(&["prevision", "--example", "interval_coin"]);
    assert_eq!(out.lines().next().unwrap(), "[0.2, 0.6]");
}

#[test]
fn classical_strict_pair_is_flagged() {
    let (code, v) = json(&["check", "--example", "classical_incoherent"]);
    assert_eq!(code, 2);
    assert!(v["result"]["margin"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn bell_frechet() {
    let (code, v) = json(&["frechet", "--example", "bell_frechet"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["holds"], serde_json::json!([false, false, true, true]));
    let mins = v["result"]["min_eigenvalues"].as_array().unwrap();
    for m in &mins[..2] {
        assert!((m.as_f64().unwrap() + 0.5).abs() < 1e-9);
    }
}

#[test]
fn two_coins_members() {
    let (code, v) = json(&["extend", "--example", "two_quantum_coins"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["members"], serde_json::json!([true, true, true, true]));
}

#[test]
fn simulate_table_and_dutch_book() {
    let (code, out, _) = qdg(&["simulate", "--example", "simulate_mixed"]);
    assert_eq!(code, 0);
    assert!(out.contains("empirical mean  expectation  |delta|  sigma bound"), "{out}");
    let (code, v) = json(&["simulate", "--example", "simulate_mixed", "--seed", "9"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["seed"], 9);
    assert_eq!(v["result"]["within_bounds"], true);
    let (code, v) = json(&["simulate", "--example", "dutch_book_case4"]);
    assert_eq!(code, 2);
    for p in v["result"]["outcome_payoffs"].as_array().unwrap() {
        assert!((p.as_f64().unwrap() + 1.0).abs() < 1e-6);
    }
    assert_eq!(v["result"]["sure_loss"], true);
}

#[test]
fn tolerance_overrides() {
    let (code, v) = json(&["independence", "--example", "bell_independence", "--tol", "product=0.6"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["independent"], true);
    assert_eq!(v["tolerances"]["product"], 0.6);
    let (code, _, err) = qdg(&["check", "--example", "fair_coin", "--tol", "bogus=1"]);
    assert_eq!(code, 1);
    assert!(err.contains("unknown tolerance"), "{err}");
}

#[test]
fn error_exit_codes() {
    let dir = std::env::temp_dir().join(format!("qdg-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, r#"{"gambles": [[[1, 0], [0, "x"]]]}"#).unwrap();
    let (code, out, err) = qdg(&["prevision", "--scenario", bad.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(out.is_empty());
    assert!(err.contains("$.gambles[0][1][1]"), "{err}");
    let herm = dir.join("herm.json");
    std::fs::write(&herm, r#"{"model": {"vacuous": true, "dim": 2}, "gambles": [[[1, 2], [0, 1]]]}"#).unwrap();
    let (code, _, err) = qdg(&["prevision", "--scenario", herm.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("tol_herm"), "{err}");
    let (code, _, err) = qdg(&["frechet", "--example", "fair_coin"]);
    assert_eq!(code, 1);
    assert!(err.contains("state"), "{err}");
    let (code, _, _) = qdg(&["explode", "--example", "fair_coin"]);
    assert_eq!(code, 1);
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn every_example_runs_quickly() {
    let plan = [
        ("check", "fair_coin", 0),
        ("prevision", "interval_coin", 0),
        ("check", "classical_incoherent", 2),
        ("check", "quantum_coin_case4", 2),
        ("prevision", "vacuous_prevision", 0),
        ("condition", "condition_head", 0),
        ("evolve", "hadamard_evolution", 0),
        ("born", "born_plus", 0),
        ("frechet", "bell_frechet", 0),
        ("marginal", "bell_marginal", 0),
        ("independence", "bell_independence", 0),
        ("extend", "two_quantum_coins", 0),
        ("independence", "product_irrelevance", 0),
        ("simulate", "simulate_mixed", 0),
        ("simulate", "dutch_book_case4", 2),
        ("pauli", "pauli_g2", 0),
    ];
    assert_eq!(plan.len(), EXAMPLES.len());
    for (cmd, name, expected) in plan {
        let t = Instant::now();
        let (code, _, err) = qdg(&[cmd, "--example", name]);
        assert_eq!(code, expected, "{cmd} {name}: {err}");
        assert!(t.elapsed() < Duration::from_secs(5), "{cmd} {name} took {:?}", t.elapsed());
    }
}

#[test]
fn documented_outputs() {
    let (_, v) = json(&["condition", "--example", "condition_head"]);
    let p = &v["result"]["previsions"][0];
    assert!((p["lower"].as_f64().unwrap() - 1.0).abs() < 1e-8);
    let (_, v) = json(&["marginal", "--example", "bell_marginal"]);
    assert_eq!(v["result"]["state"], serde_json::json!([[[0.5, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.5, 0.0]]]));
    let (_, out, _) = qdg(&["born", "--example", "born_plus"]);
    assert!(out.starts_with("probabilities: (0.5, 0.5)"));
    let (_, out, _) = qdg(&["pauli", "--example", "pauli_g2"]);
    assert!(out.contains("gamble 0: v = -0.5, x = 0, y = 1, z = 1.5"), "{out}");
    assert!(out.contains("bloch vector (0, 1, 0)"), "{out}");
    let (_, out, _) = qdg(&["evolve", "--example", "hadamard_evolution"]);
    assert!(out.lines().any(|l| l == "[-1, -1]"), "{out}");
}

#[test]
fn binary_uses_stdout_and_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_qdg");
    let o = Proc::new(bin).args(["check", "--example", "quantum_coin_case4"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("status: incoherent"));
    let o = Proc::new(bin).args(["check", "--example", "missing"]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(o.stdout.is_empty() && !o.stderr.is_empty());
    let o = Proc::new(bin).arg("--list-examples").output().unwrap();
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().count(), EXAMPLES.len());
}
