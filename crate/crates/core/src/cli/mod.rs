//! Command-line front end: scenario files, dispatch and reports.

mod commands;
mod report;
pub mod scenario;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use clap::Parser;

pub use commands::{dispatch, Command};
pub use report::{emit_report, round_sig, Format, Report};
pub use scenario::{parse_scenario, scenario_value, ModelKind, ModelSpec, Scenario, ScenarioError};

/// Bundled scenarios, by name.
pub const EXAMPLES: &[(&str, &str)] = &[
    ("fair_coin", include_str!("../../scenarios/fair_coin.json")),
    ("interval_coin", include_str!("../../scenarios/interval_coin.json")),
    ("classical_incoherent", include_str!("../../scenarios/classical_incoherent.json")),
    ("quantum_coin_case4", include_str!("../../scenarios/quantum_coin_case4.json")),
    ("vacuous_prevision", include_str!("../../scenarios/vacuous_prevision.json")),
    ("condition_head", include_str!("../../scenarios/condition_head.json")),
    ("hadamard_evolution", include_str!("../../scenarios/hadamard_evolution.json")),
    ("born_plus", include_str!("../../scenarios/born_plus.json")),
    ("bell_frechet", include_str!("../../scenarios/bell_frechet.json")),
    ("bell_marginal", include_str!("../../scenarios/bell_marginal.json")),
    ("bell_independence", include_str!("../../scenarios/bell_independence.json")),
    ("two_quantum_coins", include_str!("../../scenarios/two_quantum_coins.json")),
    ("product_irrelevance", include_str!("../../scenarios/product_irrelevance.json")),
    ("simulate_mixed", include_str!("../../scenarios/simulate_mixed.json")),
    ("dutch_book_case4", include_str!("../../scenarios/dutch_book_case4.json")),
    ("pauli_g2", include_str!("../../scenarios/pauli_g2.json")),
];

pub fn example(name: &str) -> Option<&'static str> {
    EXAMPLES.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

/// Thresholds that decide report verdicts. Defaults match the library.
#[derive(Clone, Debug, PartialEq)]
pub struct Tolerances {
    /// Coherence needs margin above this.
    pub coherence: f64,
    /// Largest product residual accepted as independent.
    pub product: f64,
    /// Largest irrelevance discrepancy accepted.
    pub set: f64,
    /// `k` in the `k sigma / sqrt(N)` simulator bound.
    pub sigma: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { coherence: crate::credal::COHERENCE_TOL, product: 1e-8, set: crate::credal::SET_TOL, sigma: 4.0 }
    }
}

pub const TOLERANCE_NAMES: &[&str] = &["coherence", "product", "set", "sigma"];

pub(crate) fn tolerance_check(name: &str, value: f64) -> std::result::Result<(), String> {
    if !TOLERANCE_NAMES.contains(&name) {
        return Err(format!("unknown tolerance `{name}` (expected one of {})", TOLERANCE_NAMES.join(", ")));
    }
    if !value.is_finite() || value < 0.0 {
        return Err(format!("tolerance `{name}` must be a finite non-negative number"));
    }
    Ok(())
}

impl Tolerances {
    pub fn set(&mut self, name: &str, value: f64) -> std::result::Result<(), String> {
        tolerance_check(name, value)?;
        match name {
            "coherence" => self.coherence = value,
            "product" => self.product = value,
            "set" => self.set = value,
            _ => self.sigma = value,
        }
        Ok(())
    }

    pub fn apply(&mut self, overrides: &BTreeMap<String, f64>) -> std::result::Result<(), String> {
        overrides.iter().try_for_each(|(k, v)| self.set(k, *v))
    }

    /// Every threshold in force, including the fixed library ones.
    pub fn metadata(&self) -> serde_json::Value {
        use crate::credal::{MEMBERSHIP_TOL, PREVISION_TOL, ZERO_PROB_TOL};
        serde_json::json!({
            "coherence": self.coherence,
            "product": self.product,
            "set": self.set,
            "sigma": self.sigma,
            "herm": crate::linalg::TOL_HERM,
            "psd_rel": crate::linalg::TOL_PSD_REL,
            "prevision": PREVISION_TOL,
            "membership": MEMBERSHIP_TOL,
            "zero_prob": ZERO_PROB_TOL,
            "feasibility": crate::optim::FEAS_TOL,
        })
    }
}

#[derive(Parser, Debug)]
#[command(name = "qdg", version, about = "Desirable gambles over Hermitian matrices")]
pub struct Args {
    /// Operation to run.
    #[arg(value_enum)]
    pub command: Command,
    /// Scenario file (JSON).
    #[arg(long, conflicts_with = "example")]
    pub scenario: Option<PathBuf>,
    /// Bundled scenario name; `--list-examples` shows them.
    #[arg(long)]
    pub example: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Overrides the scenario seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Threshold override, `name=value`; may repeat.
    #[arg(long = "tol", value_parser = parse_tol)]
    pub tol: Vec<(String, f64)>,
}

fn parse_tol(s: &str) -> std::result::Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or_else(|| format!("expected name=value, got `{s}`"))?;
    let value: f64 = value.trim().parse().map_err(|e| format!("bad value in `{s}`: {e}"))?;
    tolerance_check(name.trim(), value)?;
    Ok((name.trim().to_string(), value))
}

/// Runs the CLI on `argv`, writing the report to `out` and diagnostics to
/// `err`. Returns the process exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    if argv.iter().skip(1).any(|a| a == "--list-examples") {
        for (name, _) in EXAMPLES {
            let _ = writeln!(out, "{name}");
        }
        return 0;
    }
    let args = match Args::try_parse_from(&argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if code == 0 { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    match execute(&args) {
        Ok(report) => {
            let _ = writeln!(out, "{}", emit_report(&report, args.format));
            report.exit_code
        }
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
    }
}

fn execute(args: &Args) -> std::result::Result<Report, String> {
    let text = match (&args.scenario, &args.example) {
        (Some(path), _) => std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?,
        (None, Some(name)) => example(name).ok_or_else(|| format!("no bundled scenario named `{name}`"))?.to_string(),
        (None, None) => return Err("one of --scenario or --example is required".into()),
    };
    let mut scenario = parse_scenario(&text).map_err(|e| e.to_string())?;
    if let Some(seed) = args.seed {
        scenario.seed = Some(seed);
    }
    let mut tol = Tolerances::default();
    tol.apply(&scenario.tolerances)?;
    for (name, value) in &args.tol {
        tol.set(name, *value)?;
    }
    dispatch(args.command, &scenario, &tol).map_err(|e| e.to_string())
}
