//! Per-item computations behind each subcommand, with their identity ledgers.

use super::json::{
    array, field, obj, parse_f64, parse_frame, parse_frames, parse_interval, parse_matpoly, parse_matrix, parse_polypath,
    parse_problem, parse_space, parse_taylor, parse_usize, IoScalar,
};
use super::{Command, RunConfig};
use crate::error::{Error, Result};
use crate::indices::symplectic::{hamiltonian_flow, MatProvider};
use crate::indices::{
    conley_zehnder, cz_comparison, hormander_fourfold, hormander_fourfold_sampled, kashiwara_triple, pair_maslov, qbar,
    SymplecticPath,
};
use crate::lagrangian::sampled::Provider;
use crate::lagrangian::{
    any_lagrangian, maslov_analytic, maslov_continuous, random_symplectic, AnalyticPath, Convention, LagrangianFrame, MaslovOptions,
    SampledPath, SymplecticSpace,
};
use crate::matrix::Mat;
use crate::morse_sturm::verify_index_theorem;
use crate::psig::flow::{spectral_flow, spectral_flow_f64, CrossingLocation, FlowReport};
use crate::psig::{jump_decomposition, partial_signatures, PolyPath, SignatureTable};
use crate::scalar::Rational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use std::sync::Arc;

const PATH_SAMPLES: usize = 64;
const FOURFOLD_SAMPLES: usize = 32;

/// Scalars with a spectral-flow routine for polynomial paths.
pub trait Field: IoScalar {
    fn flow(path: &PolyPath<Self>) -> Result<FlowReport>;
}

impl Field for Rational {
    fn flow(path: &PolyPath<Self>) -> Result<FlowReport> {
        spectral_flow(path)
    }
}

impl Field for f64 {
    fn flow(path: &PolyPath<Self>) -> Result<FlowReport> {
        spectral_flow_f64(path)
    }
}

/// One asserted identity.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct Check {
    pub check: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(check: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Check { check: check.into(), pass, detail: detail.into() }
    }

    fn equal<T: PartialEq + std::fmt::Debug>(check: impl Into<String>, lhs: T, rhs: T) -> Self {
        let pass = lhs == rhs;
        Check::new(check, pass, format!("{lhs:?} vs {rhs:?}"))
    }
}

/// Result of one input item.
#[derive(Clone, Debug)]
pub struct ItemOutput {
    pub result: Value,
    pub ledger: Vec<Check>,
    pub rows: Vec<Vec<String>>,
    pub summary: String,
}

pub fn run_item<S: Field>(cmd: Command, v: &Value, cfg: &RunConfig) -> Result<ItemOutput> {
    match cmd {
        Command::Psig => cmd_psig::<S>(v),
        Command::Maslov => cmd_maslov::<S>(v, cfg),
        Command::Pair => cmd_pair::<S>(v, cfg),
        Command::Triple => cmd_triple::<S>(v, cfg),
        Command::Hormander => cmd_hormander::<S>(v, cfg),
        Command::Cz => cmd_cz::<S>(v, cfg),
        Command::Geodesic => cmd_geodesic(v, cfg),
    }
}

fn options(v: &Value, cfg: &RunConfig) -> Result<MaslovOptions> {
    let mut o = MaslovOptions { seed: cfg.seed, ..MaslovOptions::default() };
    if let Some(c) = obj(v)?.get("convention") {
        o.convention = match c.as_str() {
            Some("ext_coindex") | Some("extended") => Convention::ExtendedCoindex,
            Some("coindex") => Convention::Coindex,
            _ => return Err(Error::Parse(format!("unknown convention {c}"))),
        };
    }
    Ok(o)
}

fn table_rows(t: &str, table: &SignatureTable) -> Vec<Vec<String>> {
    table
        .levels
        .iter()
        .map(|l| {
            vec![
                t.to_string(),
                l.k.to_string(),
                l.dim_w.to_string(),
                l.inertia.n_plus.to_string(),
                l.inertia.n_minus.to_string(),
                l.inertia.n_zero.to_string(),
                l.inertia.signature.to_string(),
            ]
        })
        .collect()
}

fn fmt_sigmas(t: &SignatureTable) -> String {
    let s: Vec<String> = t.sigmas().iter().map(|x| x.to_string()).collect();
    format!("({})", s.join(","))
}

fn table_checks(at: &str, table: &SignatureTable, sf_across: i64) -> Vec<Check> {
    let structure = table.check_invariants();
    vec![
        Check::new(
            format!("dim W(k+1) = n0(B_k) and Σ(n⁺+n⁻) = dim ker at {at}"),
            structure.is_ok(),
            structure.err().map_or_else(|| format!("dims {:?}", table.dims()), |e| e.to_string()),
        ),
        Check::equal(format!("odd signatures sum to the flow across {at}"), table.odd_sigma_sum(), sf_across),
    ]
}

fn cmd_psig<S: Field>(v: &Value) -> Result<ItemOutput> {
    let o = obj(v)?;
    if o.contains_key("coeffs") {
        let path = parse_taylor::<S>(v)?;
        let table = partial_signatures(&path)?;
        let jumps = jump_decomposition(&table);
        let t0 = path.t0().to_f64().to_string();
        Ok(ItemOutput {
            result: json!({
                "kind": "jet",
                "t0": path.t0().emit(),
                "sigmas": table.sigmas(),
                "dims": table.dims(),
                "table": table,
                "jumps": jumps,
            }),
            ledger: table_checks(&format!("t0 = {t0}"), &table, jumps.sf_across),
            rows: table_rows(&t0, &table),
            summary: format!("σ = {}, dims {:?}, sf_across {}, coindex_across {}", fmt_sigmas(&table), table.dims(), jumps.sf_across, jumps.coindex_across),
        })
    } else if o.contains_key("poly") {
        let path = parse_polypath::<S>(v)?;
        let flow = S::flow(&path)?;
        let mut ledger = Vec::new();
        let mut rows = Vec::new();
        for c in &flow.crossings {
            ledger.extend(table_checks(&format!("t = {}", c.t), &c.table, c.jumps.sf_across));
            rows.extend(table_rows(&c.t_approx.to_string(), &c.table));
        }
        let sum: i64 = flow.crossings.iter().map(|c| c.contribution()).sum();
        ledger.push(Check::equal("flow equals the sum of crossing contributions", flow.total, sum));
        ledger.push(Check::equal(
            "flow equals the endpoint change of n̄⁺",
            flow.total,
            flow.ext_coindex_b as i64 - flow.ext_coindex_a as i64,
        ));
        let parts: Vec<String> = flow
            .crossings
            .iter()
            .map(|c| {
                let loc = match c.location {
                    CrossingLocation::Start => "start",
                    CrossingLocation::Interior => "interior",
                    CrossingLocation::End => "end",
                };
                format!("t≈{:.6} ({loc}) σ={}", c.t_approx, fmt_sigmas(&c.table))
            })
            .collect();
        Ok(ItemOutput {
            summary: format!("flow {} over [{}, {}]; {}", flow.total, flow.a, flow.b, parts.join("; ")),
            result: json!({ "kind": "path", "flow": flow }),
            ledger,
            rows,
        })
    } else {
        Err(Error::Parse("psig input needs either {t0, coeffs} or {interval, poly}".into()))
    }
}

fn poly_provider<S: IoScalar>(space: &SymplecticSpace<S>, frame: crate::matpoly::MatPoly<S>) -> Provider<S> {
    let sp = space.clone();
    Arc::new(move |t: f64| LagrangianFrame::new(&sp, frame.eval(&S::from_f64(t))))
}

/// `{"samples": [{"t", "frame"}]}` or `{"interval", "frame"}` with polynomial entries.
fn parse_sampled_path<S: IoScalar>(space: &SymplecticSpace<S>, v: &Value) -> Result<SampledPath<S>> {
    if let Some(s) = obj(v)?.get("samples") {
        let samples: Result<Vec<(f64, LagrangianFrame<S>)>> = array(s, "samples")?
            .iter()
            .map(|x| Ok((parse_f64(field(x, "t")?)?, parse_frame(space, field(x, "frame")?)?)))
            .collect();
        SampledPath::from_samples(samples?)
    } else {
        let (a, b) = parse_interval::<f64>(field(v, "interval")?)?;
        let frame = parse_matpoly::<S>(field(v, "frame")?)?;
        SampledPath::from_provider(poly_provider(space, frame), a, b, PATH_SAMPLES)
    }
}

fn cmd_maslov<S: Field>(v: &Value, cfg: &RunConfig) -> Result<ItemOutput> {
    let opts = options(v, cfg)?;
    let space = parse_space::<S>(v)?;
    let l0 = parse_frame(&space, field(v, "l0")?)?;
    let path_v = obj(v)?.get("path").unwrap_or(v);
    let sampled = maslov_continuous(&parse_sampled_path(&space, path_v)?, &l0, &opts)?;
    let mut ledger = Vec::new();
    let mut rows = vec![vec!["sampled".to_string(), sampled.value.to_string()]];
    let analytic = if obj(path_v)?.contains_key("interval") {
        let rspace = parse_space::<Rational>(v)?;
        let (a, b) = parse_interval::<Rational>(field(path_v, "interval")?)?;
        let ap = AnalyticPath::new(&rspace, parse_matpoly(field(path_v, "frame")?)?, a, b)?;
        let r = maslov_analytic(&ap, &parse_frame(&rspace, field(v, "l0")?)?, &opts)?;
        ledger.push(Check::equal("analytic index equals sampled index", r.value, sampled.value));
        rows.push(vec!["analytic".to_string(), r.value.to_string()]);
        Some(r)
    } else {
        None
    };
    let value = analytic.as_ref().map_or(sampled.value, |r| r.value);
    Ok(ItemOutput {
        summary: format!("μ = {value}"),
        result: json!({ "value": value, "analytic": analytic, "sampled": sampled }),
        ledger,
        rows,
    })
}

fn endpoints_transversal<S: IoScalar>(p: &SampledPath<S>, q: &SampledPath<S>) -> Result<bool> {
    let (ps, qs) = (p.samples(), q.samples());
    Ok(ps[0].1.is_transversal(&qs[0].1)? && ps[ps.len() - 1].1.is_transversal(&qs[qs.len() - 1].1)?)
}

fn cmd_pair<S: Field>(v: &Value, cfg: &RunConfig) -> Result<ItemOutput> {
    let opts = options(v, cfg)?;
    let space = parse_space::<S>(v)?;
    let g1 = parse_sampled_path(&space, field(v, "path1")?)?;
    let g2 = parse_sampled_path(&space, field(v, "path2")?)?;
    let r = pair_maslov(&g1, &g2, &opts)?;
    let mut ledger = Vec::new();
    let mut swapped = None;
    if endpoints_transversal(&g1, &g2)? {
        let s = pair_maslov(&g2, &g1, &opts)?.value;
        ledger.push(Check::equal("swapping the pair negates the index", s, -r.value));
        swapped = Some(s);
    }
    Ok(ItemOutput {
        summary: format!("μ(γ₁, γ₂) = {}", r.value),
        result: json!({ "value": r.value, "report": r, "swapped": swapped }),
        ledger,
        rows: vec![vec![r.value.to_string(), swapped.map_or(String::new(), |s| s.to_string())]],
    })
}

/// The standard triple `(x-axis, diagonal, y-axis)` of the plane.
fn standard_triple<S: IoScalar>() -> Result<(SymplecticSpace<S>, [LagrangianFrame<S>; 3])> {
    let sp = SymplecticSpace::<S>::standard(1);
    let f = |a: i64, b: i64| LagrangianFrame::new(&sp, Mat::from_rows(vec![vec![S::from_i64(a)], vec![S::from_i64(b)]])?);
    Ok((sp.clone(), [f(1, 0)?, f(1, 1)?, f(0, 1)?]))
}

fn cmd_triple<S: Field>(v: &Value, cfg: &RunConfig) -> Result<ItemOutput> {
    let opts = options(v, cfg)?;
    let space = parse_space::<S>(v)?;
    let l = parse_frames(&space, field(v, "frames")?, 3)?;
    let tau = kashiwara_triple(&l[0], &l[1], &l[2])?;
    let q_ext = qbar(&l[0], &l[1], &l[2], &MaslovOptions { convention: Convention::ExtendedCoindex, ..opts })?;
    let q_co = qbar(&l[0], &l[1], &l[2], &MaslovOptions { convention: Convention::Coindex, ..opts })?;
    let n = space.n() as i64;
    let c = n - l[0].intersection_dim(&l[1])? as i64 - l[0].intersection_dim(&l[2])? as i64 + l[1].intersection_dim(&l[2])? as i64;

    let mut ledger = vec![
        Check::equal("transposing the first two negates τ", kashiwara_triple(&l[1], &l[0], &l[2])?, -tau),
        Check::equal("transposing the last two negates τ", kashiwara_triple(&l[0], &l[2], &l[1])?, -tau),
        Check::equal("cyclic shift preserves τ", kashiwara_triple(&l[1], &l[2], &l[0])?, tau),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x7a1e);
    let phi = random_symplectic(&space, &mut rng, 3)?;
    let moved = kashiwara_triple(&l[0].transform(&phi)?, &l[1].transform(&phi)?, &l[2].transform(&phi)?)?;
    ledger.push(Check::equal("symplectic invariance", moved, tau));
    let (_, st) = standard_triple::<S>()?;
    let std_tau = kashiwara_triple(&st[0], &st[1], &st[2])?;
    ledger.push(Check::equal("standard triple of the plane has τ = 1", std_tau, 1));
    let summed = kashiwara_triple(&l[0].direct_sum(&st[0]), &l[1].direct_sum(&st[1]), &l[2].direct_sum(&st[2]))?;
    ledger.push(Check::equal("additivity under direct sum", summed, tau + std_tau));
    ledger.push(Check::equal("2 q̄ (extended coindex) = τ − c", 2 * q_ext, tau - c));
    ledger.push(Check::equal("2 q̄ (coindex) = τ + c", 2 * q_co, tau + c));

    Ok(ItemOutput {
        summary: format!("τ = {tau}, q̄ = {q_ext} (extended coindex), {q_co} (coindex), c = {c}"),
        result: json!({ "tau": tau, "qbar_ext_coindex": q_ext, "qbar_coindex": q_co, "c": c }),
        ledger,
        rows: vec![vec![tau.to_string(), q_ext.to_string(), q_co.to_string(), c.to_string()]],
    })
}

fn cmd_hormander<S: Field>(v: &Value, cfg: &RunConfig) -> Result<ItemOutput> {
    let opts = options(v, cfg)?;
    let space = parse_space::<S>(v)?;
    let l = parse_frames(&space, field(v, "frames")?, 4)?;
    let q = |a: usize, b: usize, c: usize, d: usize| hormander_fourfold(&l[a], &l[b], &l[c], &l[d], &opts);
    let val = q(0, 1, 2, 3)?;
    let mut ledger = vec![
        Check::equal("swapping the first pair negates q", q(1, 0, 2, 3)?, -val),
        Check::equal("swapping the second pair negates q", q(0, 1, 3, 2)?, -val),
        Check::equal("exchanging the pairs negates q", q(2, 3, 0, 1)?, -val),
        Check::equal("full reversal negates q", q(3, 2, 1, 0)?, -val),
        Check::equal(
            "q̄(L₀,L₁,L₀') − q̄(L₀,L₁,L₁') = q",
            qbar(&l[0], &l[1], &l[2], &opts)? - qbar(&l[0], &l[1], &l[3], &opts)?,
            val,
        ),
    ];
    match hormander_fourfold_sampled(&l[0], &l[1], &l[2], &l[3], FOURFOLD_SAMPLES, &opts) {
        Ok(s) => ledger.push(Check::equal("sampled chart segment agrees", s, val)),
        Err(Error::NotTransversal(_)) => {}
        Err(e) => return Err(e),
    }
    Ok(ItemOutput {
        summary: format!("q = {val}"),
        result: json!({ "q": val }),
        ledger,
        rows: vec![vec![val.to_string()]],
    })
}

fn parse_symplectic_path<S: IoScalar>(space: &SymplecticSpace<S>, v: &Value) -> Result<SymplecticPath<S>> {
    let samples: Result<Vec<(f64, Mat<S>)>> = array(field(v, "samples")?, "samples")?
        .iter()
        .map(|x| Ok((parse_f64(field(x, "t")?)?, parse_matrix(field(x, "matrix")?)?)))
        .collect();
    SymplecticPath::from_samples(space, samples?)
}

fn cz_ledger<S: IoScalar>(path: &SymplecticPath<S>, v: &Value, opts: &MaslovOptions) -> Result<ItemOutput> {
    let space = path.space();
    let o = obj(v)?;
    let l0 = match o.get("l0") {
        Some(f) => parse_frame(space, f)?,
        None => any_lagrangian(space)?,
    };
    let ell0 = match o.get("ell0") {
        Some(f) => parse_frame(space, f)?,
        None => l0.clone(),
    };
    let cz = conley_zehnder(path, opts)?;
    let cmp = cz_comparison(path, &l0, &ell0, opts)?;
    let mut ledger = vec![Check::new(
        "i(Φ) + μ(Φℓ₀) = q(Δ, L₀⊕ℓ₀; GrΦ(a)⁻¹, GrΦ(b)⁻¹)",
        cmp.holds(),
        format!("{} + {} vs {}", cmp.cz, cmp.mu_beta, cmp.correction),
    )];
    if cmp.is_loop {
        ledger.push(Check::equal("loop relation i(Φ) = −μ(Φℓ₀)", cmp.cz, -cmp.mu_beta));
    }
    Ok(ItemOutput {
        summary: format!("i(Φ) = {}, μ(Φℓ₀) = {}, correction {}, loop {}", cz.value, cmp.mu_beta, cmp.correction, cmp.is_loop),
        rows: vec![vec![cz.value.to_string(), cmp.mu_beta.to_string(), cmp.correction.to_string(), cmp.is_loop.to_string()]],
        result: json!({ "cz": cz.value, "report": cz, "comparison": cmp }),
        ledger,
    })
}

fn cmd_cz<S: Field>(v: &Value, cfg: &RunConfig) -> Result<ItemOutput> {
    let opts = options(v, cfg)?;
    if let Some(h) = obj(v)?.get("hamiltonian") {
        let h: Mat<f64> = parse_matrix(h)?;
        let space = match obj(v)?.get("omega") {
            Some(_) => parse_space::<f64>(v)?,
            None => SymplecticSpace::standard(h.rows() / 2),
        };
        let period = parse_f64(field(v, "period")?)?;
        let steps = obj(v)?.get("steps").map(parse_usize).transpose()?.unwrap_or(PATH_SAMPLES);
        let flow: MatProvider<f64> = hamiltonian_flow(&space, &h)?;
        let path = SymplecticPath::from_provider(&space, flow, 0.0, period, steps)?;
        cz_ledger(&path, v, &opts)
    } else {
        let space = parse_space::<S>(v)?;
        cz_ledger(&parse_symplectic_path(&space, v)?, v, &opts)
    }
}

fn cmd_geodesic(v: &Value, cfg: &RunConfig) -> Result<ItemOutput> {
    let prob = parse_problem(v)?;
    let r = verify_index_theorem(&prob, cfg.galerkin_n, cfg.m0)?;
    let ledger = r.verdicts.iter().map(|x| Check::new(x.check.clone(), x.pass, x.detail.clone())).collect();
    let rows = r
        .instants
        .iter()
        .map(|c| {
            let mut row = vec![
                c.t0.to_string(),
                c.multiplicity.to_string(),
                format!("{:?}", c.location).to_lowercase(),
                c.contribution.to_string(),
                c.degenerate.to_string(),
                c.bifurcation.to_string(),
            ];
            row.extend(c.table.sigmas().iter().map(|s| s.to_string()));
            row
        })
        .collect();
    Ok(ItemOutput {
        summary: format!(
            "(maslov, morse, spectral) = ({}, {}, {}); conjugate instants: {}; theorem {}",
            r.i_maslov,
            r.i_morse,
            r.i_spectral,
            r.instants.len(),
            if r.holds { "holds" } else { "FAILS" }
        ),
        result: serde_json::to_value(&r).map_err(|e| Error::InvariantViolation(e.to_string()))?,
        ledger,
        rows,
    })
}
