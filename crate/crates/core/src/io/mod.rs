//! Problem-file ingestion, subcommand dispatch and report emission.

pub mod commands;
pub mod demos;
pub mod json;

pub use commands::{run_item, Check, Field, ItemOutput};
pub use demos::{demo, Demo, DEMOS};

use crate::error::Error;
use crate::scalar::{with_float_policy, FloatPolicy, Rational};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

pub const SEED_ENV: &str = "MASLOVKIT_SEED";
pub const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Psig,
    Maslov,
    Pair,
    Triple,
    Hormander,
    Cz,
    Geodesic,
}

impl Command {
    pub const ALL: [Command; 7] =
        [Command::Psig, Command::Maslov, Command::Pair, Command::Triple, Command::Hormander, Command::Cz, Command::Geodesic];

    pub fn name(&self) -> &'static str {
        match self {
            Command::Psig => "psig",
            Command::Maslov => "maslov",
            Command::Pair => "pair",
            Command::Triple => "triple",
            Command::Hormander => "hormander",
            Command::Cz => "cz",
            Command::Geodesic => "geodesic",
        }
    }

    pub fn parse(s: &str) -> Option<Command> {
        Command::ALL.into_iter().find(|c| c.name() == s)
    }

    /// CSV columns after `item`; the geodesic table is followed by `sigma_1 … sigma_K`.
    fn csv_header(&self) -> &'static [&'static str] {
        match self {
            Command::Psig => &["t", "k", "dim_w", "n_plus", "n_minus", "n_zero", "sigma"],
            Command::Maslov => &["route", "value"],
            Command::Pair => &["value", "swapped"],
            Command::Triple => &["tau", "qbar_ext_coindex", "qbar_coindex", "c"],
            Command::Hormander => &["q"],
            Command::Cz => &["cz", "mu_beta", "correction", "is_loop"],
            Command::Geodesic => &["t0", "multiplicity", "location", "contribution", "degenerate", "bifurcation"],
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalarKind {
    #[default]
    Exact,
    Float,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
    Text,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub inputs: Vec<String>,
    pub scalar: ScalarKind,
    pub tol: f64,
    pub strict: bool,
    pub galerkin_n: usize,
    pub m0: Option<f64>,
    pub seed: u64,
    pub format: Format,
    pub jobs: usize,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            inputs: vec![],
            scalar: ScalarKind::Exact,
            tol: FloatPolicy::default().rel_tol,
            strict: false,
            galerkin_n: crate::morse_sturm::DEFAULT_GALERKIN_N,
            m0: None,
            seed: DEFAULT_SEED,
            format: Format::Json,
            jobs: 0,
        }
    }

    pub fn policy(&self) -> FloatPolicy {
        FloatPolicy { rel_tol: self.tol, strict: self.strict }
    }
}

/// Seed from `MASLOVKIT_SEED` (decimal or `0x` hex), else the default.
pub fn env_seed() -> Result<u64, String> {
    match std::env::var(SEED_ENV) {
        Ok(s) => parse_seed(&s),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

pub fn parse_seed(s: &str) -> Result<u64, String> {
    let s = s.trim();
    let r = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(h) => u64::from_str_radix(h, 16),
        None => s.parse(),
    };
    r.map_err(|_| format!("invalid seed {s:?}"))
}

/// One unit of work: a named JSON value, or the reason it could not be read.
#[derive(Clone, Debug)]
pub struct InputItem {
    pub name: String,
    pub value: Result<Value, String>,
}

/// A file holding one item, or a JSON array of items named `file#i`.
pub fn items_from_text(name: &str, text: &str) -> Vec<InputItem> {
    match serde_json::from_str::<Value>(text) {
        Ok(Value::Array(a)) => {
            a.into_iter().enumerate().map(|(i, v)| InputItem { name: format!("{name}#{i}"), value: Ok(v) }).collect()
        }
        Ok(v) => vec![InputItem { name: name.to_string(), value: Ok(v) }],
        Err(e) => vec![InputItem { name: name.to_string(), value: Err(e.to_string()) }],
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ItemError {
    pub kind: String,
    pub message: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ItemReport {
    pub input: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ItemError>,
    #[serde(skip)]
    pub summary: String,
    #[serde(skip)]
    pub rows: Vec<Vec<String>>,
    #[serde(skip)]
    pub exit_code: i32,
}

#[derive(Clone, Debug, Serialize)]
pub struct LedgerEntry {
    pub item: String,
    pub check: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: Command,
    pub config: RunConfig,
    pub items: Vec<ItemReport>,
    pub ledger: Vec<LedgerEntry>,
    pub ok: bool,
    pub exit_code: i32,
}

pub fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::AmbiguousRank { .. } => "AmbiguousRank",
        Error::DimensionMismatch(_) => "DimensionMismatch",
        Error::NotSymmetric => "NotSymmetric",
        Error::Singular => "Singular",
        Error::OrderExceeded { .. } => "OrderExceeded",
        Error::NonIsolated(_) => "NonIsolated",
        Error::NotNilpotent => "NotNilpotent",
        Error::NotGSymmetric => "NotGSymmetric",
        Error::NotAnEigenvalue => "NotAnEigenvalue",
        Error::NotTransversal(_) => "NotTransversal",
        Error::RefinementExhausted(_) => "RefinementExhausted",
        Error::EntirelySingular => "EntirelySingular",
        Error::NotSymplectic(_) => "NotSymplectic",
        Error::NotIsotropic(_) => "NotIsotropic",
        Error::NotStabilized(..) => "NotStabilized",
        Error::M0TooSmall => "M0TooSmall",
        Error::IntegrationTolerance(_) => "IntegrationTolerance",
        Error::NoAdmissibleT => "NoAdmissibleT",
        Error::InconsistentEigendata(_) => "InconsistentEigendata",
        Error::InvariantViolation(_) => "InvariantViolation",
        Error::Parse(_) => "Parse",
    }
}

/// 2 for parse errors, 3 for numerical ambiguity, 4 for violated invariants, 1 otherwise.
pub fn error_exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_) => 2,
        Error::AmbiguousRank { .. } | Error::NotStabilized(..) => 3,
        Error::InvariantViolation(_) | Error::InconsistentEigendata(_) => 4,
        _ => 1,
    }
}

fn run_one(cfg: &RunConfig, item: &InputItem) -> (ItemReport, Vec<LedgerEntry>) {
    let mut rep =
        ItemReport { input: item.name.clone(), result: None, error: None, summary: String::new(), rows: vec![], exit_code: 0 };
    let out = match &item.value {
        Err(msg) => Err(Error::Parse(msg.clone())),
        Ok(v) => with_float_policy(cfg.policy(), || match cfg.scalar {
            ScalarKind::Exact => run_item::<Rational>(cfg.command, v, cfg),
            ScalarKind::Float => run_item::<f64>(cfg.command, v, cfg),
        }),
    };
    match out {
        Ok(mut o) => {
            if let Some(exp) = item.value.as_ref().ok().and_then(|v| v.get("expect")) {
                o.ledger.extend(expectations(exp, &o.result));
            }
            let ledger: Vec<LedgerEntry> = o
                .ledger
                .into_iter()
                .map(|c| LedgerEntry { item: item.name.clone(), check: c.check, pass: c.pass, detail: c.detail })
                .collect();
            if ledger.iter().any(|c| !c.pass) {
                rep.exit_code = 4;
            }
            rep.result = Some(o.result);
            rep.summary = o.summary;
            rep.rows = o.rows;
            (rep, ledger)
        }
        Err(e) => {
            rep.exit_code = error_exit_code(&e);
            rep.summary = format!("error ({}): {e}", error_kind(&e));
            rep.error = Some(ItemError { kind: error_kind(&e).into(), message: e.to_string() });
            (rep, vec![])
        }
    }
}

fn subset_match(expected: &Value, actual: &Value) -> bool {
    match (expected, actual) {
        (Value::Object(e), Value::Object(a)) => e.iter().all(|(k, v)| a.get(k).is_some_and(|x| subset_match(v, x))),
        (Value::Number(e), Value::Number(a)) => e.as_f64() == a.as_f64(),
        _ => expected == actual,
    }
}

/// One ledger check per key of the item's `expect` object, matched recursively against the result.
fn expectations(expected: &Value, result: &Value) -> Vec<Check> {
    let Some(map) = expected.as_object() else {
        return vec![Check::new("expected values", false, "expect must be an object")];
    };
    map.iter()
        .map(|(k, v)| {
            let got = result.get(k).cloned().unwrap_or(Value::Null);
            Check::new(format!("expected {k}"), subset_match(v, &got), format!("expected {v}, got {}", compact(&got)))
        })
        .collect()
}

fn compact(v: &Value) -> String {
    let s = v.to_string();
    if s.len() > 120 {
        format!("{}…", &s[..s.char_indices().take_while(|(i, _)| *i < 120).last().map_or(0, |(i, c)| i + c.len_utf8())])
    } else {
        s
    }
}

/// Runs every item, in parallel when `jobs != 1`, keeping input order in the report.
pub fn run(cfg: &RunConfig, items: &[InputItem]) -> Report {
    let work = || items.par_iter().map(|it| run_one(cfg, it)).collect::<Vec<_>>();
    let outs = match rayon::ThreadPoolBuilder::new().num_threads(cfg.jobs).build() {
        Ok(pool) => pool.install(work),
        Err(_) => work(),
    };
    let mut reports = Vec::with_capacity(outs.len());
    let mut ledger = Vec::new();
    for (r, l) in outs {
        reports.push(r);
        ledger.extend(l);
    }
    let exit_code = reports.iter().map(|r| r.exit_code).find(|&c| c != 0).unwrap_or(0);
    Report { command: cfg.command, config: cfg.clone(), items: reports, ledger, ok: exit_code == 0, exit_code }
}

pub fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).unwrap_or_else(|e| json!({ "error": e.to_string() }).to_string());
            s.push('\n');
            s
        }
        Format::Csv => render_csv(report),
        Format::Text => render_text(report),
    }
}

fn render_csv(report: &Report) -> String {
    let base = report.command.csv_header();
    let width = report.items.iter().flat_map(|i| i.rows.iter().map(|r| r.len())).max().unwrap_or(0).max(base.len());
    let mut header: Vec<String> = std::iter::once("item".to_string()).chain(base.iter().map(|s| s.to_string())).collect();
    header.extend((1..=width - base.len()).map(|k| format!("sigma_{k}")));
    let mut w = csv::Writer::from_writer(Vec::new());
    let _ = w.write_record(&header);
    for it in &report.items {
        for row in &it.rows {
            let mut rec = vec![it.input.clone()];
            rec.extend(row.iter().cloned());
            rec.resize(header.len(), String::new());
            let _ = w.write_record(&rec);
        }
    }
    String::from_utf8(w.into_inner().unwrap_or_default()).unwrap_or_default()
}

fn render_text(report: &Report) -> String {
    let mut s = format!("{} (seed {:#x}, scalar {:?})\n", report.command.name(), report.config.seed, report.config.scalar);
    for it in &report.items {
        s.push_str(&format!("{}: {}\n", it.input, it.summary));
        for c in report.ledger.iter().filter(|c| c.item == it.input) {
            s.push_str(&format!("  [{}] {}: {}\n", if c.pass { "pass" } else { "FAIL" }, c.check, c.detail));
        }
    }
    s.push_str(&format!("{} (exit {})\n", if report.ok { "ok" } else { "FAILED" }, report.exit_code));
    s
}
