//! Conjugate instants along the Jacobi flow and their partial signatures.

use super::flow::{integrate_flow, JacobiFlow};
use super::problem::MorseSturmProblem;
use crate::error::{Error, Result};
use crate::lagrangian::{maslov_continuous, LagrangianFrame, MaslovOptions, SampledPath, SymplecticSpace};
use crate::matrix::Mat;
use crate::psig::flow::CrossingLocation;
use crate::psig::{jump_decomposition, partial_signatures, JumpRecord, SignatureTable, TaylorPath, DEFAULT_MAX_ORDER};
use crate::scalar::{float_policy, with_float_policy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::sync::Arc;

const SCAN_POINTS: usize = 512;
/// Sine of the largest principal angle to `L₀` below which an instant counts as conjugate.
pub const ZERO_TOL: f64 = 1e-7;
const MULT_TOL: f64 = 1e-6;
const CHART_MARGIN: f64 = 1e-3;

/// Singular values of the upper block of an orthonormal frame of `Φ·L₀`, ascending.
pub(crate) fn cycle_angles(phi: &Mat<f64>) -> Vec<f64> {
    let n = phi.rows() / 2;
    let f = phi.submatrix(0, n, 2 * n, n).to_dmatrix();
    let q = f.qr().q();
    let top = q.rows(0, n).into_owned();
    let mut s: Vec<f64> = top.singular_values().iter().cloned().collect();
    s.sort_by(f64::total_cmp);
    s
}

pub(crate) fn golden_min(f: &dyn Fn(f64) -> Result<f64>, mut a: f64, mut b: f64) -> Result<(f64, f64)> {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while b - a > 1e-15 * b.abs().max(1.0) {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
    }
    let ends = [(a, f(a)?), (b, f(b)?), (c, fc), (d, fd)];
    Ok(ends.into_iter().fold((a, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc }))
}

/// Zeros of `s ↦ σ_min` on `(a, b]` located from grid minima, refined by golden section.
pub(crate) fn locate_zeros(f: &(dyn Fn(f64) -> Result<f64> + Sync), a: f64, b: f64, points: usize) -> Result<Vec<f64>> {
    let grid: Vec<f64> = (0..=points).map(|i| a + (b - a) * i as f64 / points as f64).collect();
    let vals: Result<Vec<f64>> = grid.par_iter().map(|&t| f(t)).collect();
    let vals = vals?;
    let mut roots: Vec<f64> = Vec::new();
    for i in 1..=points {
        let right = if i == points { f64::INFINITY } else { vals[i + 1] };
        if !(vals[i] <= vals[i - 1] && vals[i] <= right) {
            continue;
        }
        let hi = if i == points { b } else { grid[i + 1] };
        let (t, v) = golden_min(f, grid[i - 1], hi)?;
        let (t, v) = if b - t < 1e-9 * (b - a) && f(b)? <= ZERO_TOL { (b, f(b)?) } else { (t, v) };
        if v <= ZERO_TOL && t > a && !roots.iter().any(|r| (r - t).abs() < 1e-8) {
            roots.push(t);
        }
    }
    Ok(roots)
}

/// Lagrangian `L₁` used as the second leg of the chart over `L₀ = {0} ⊕ ℝⁿ`.
#[derive(Clone, Debug, PartialEq)]
pub enum ChartLeg {
    /// `{(v, 0)}`, giving `g(J₁, J₂′)`.
    Horizontal,
    /// `{(Tw, w)}` for a `g`-symmetric `T`; stores `g T⁻¹`.
    Graph { t: Mat<f64>, g_tinv: Mat<f64> },
}

impl ChartLeg {
    pub fn name(&self) -> &'static str {
        match self {
            ChartLeg::Horizontal => "formula1",
            ChartLeg::Graph { .. } => "formula2",
        }
    }
}

fn smallest_sv(m: &Mat<f64>) -> f64 {
    m.to_dmatrix().singular_values().min()
}

/// Blocks of an orthonormal basis of `span[B; B′]`.
fn orthonormal_blocks(b: &Mat<f64>, bp: &Mat<f64>) -> (Mat<f64>, Mat<f64>) {
    let n = b.rows();
    let q = Mat::from_dmatrix(&b.vstack(bp).to_dmatrix().qr().q());
    (q.submatrix(0, 0, n, n), q.submatrix(n, 0, n, n))
}

fn horizontal_admissible(b: &Mat<f64>, bp: &Mat<f64>) -> bool {
    let (_, qbp) = orthonormal_blocks(b, bp);
    smallest_sv(&qbp) >= CHART_MARGIN
}

/// A random `g`-symmetric invertible `T` with `{(Tw, w)}` transversal to `span[B; B′]`.
pub(crate) fn random_graph_leg(g: &Mat<f64>, b: &Mat<f64>, bp: &Mat<f64>, rng: &mut ChaCha8Rng) -> Result<ChartLeg> {
    let n = g.rows();
    let ginv = g.inverse().ok_or(Error::Singular)?;
    let (b, bp) = orthonormal_blocks(b, bp);
    for _ in 0..64 {
        let mut s = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = rng.gen_range(-1.0..1.0) + if i == j { rng.gen_range(-1.0..1.0f64).signum() } else { 0.0 };
                s[(i, j)] = v;
                s[(j, i)] = v;
            }
        }
        if smallest_sv(&s) < 0.1 * s.norm2() {
            continue;
        }
        let t = ginv.mul(&s);
        let tn = t.norm2().max(1.0);
        if smallest_sv(&b.sub(&t.mul(&bp))) < CHART_MARGIN * tn {
            continue;
        }
        let g_tinv = g.mul(&s.inverse().ok_or(Error::Singular)?).mul(g).symmetrized();
        return Ok(ChartLeg::Graph { t, g_tinv });
    }
    Err(Error::NoAdmissibleT)
}

/// Taylor coefficients of `Bᵀ g B′ − Bᵀ (gT⁻¹) B` from those of `B` and `B′`.
pub(crate) fn chart_form_jet(g: &Mat<f64>, b: &[Mat<f64>], bp: &[Mat<f64>], leg: &ChartLeg, order: usize) -> Vec<Mat<f64>> {
    let n = g.rows();
    (0..=order)
        .map(|j| {
            let mut m = Mat::zeros(n, n);
            for a in 0..=j {
                m = m.add(&b[a].transpose().mul(g).mul(&bp[j - a]));
                if let ChartLeg::Graph { g_tinv, .. } = leg {
                    m = m.sub(&b[a].transpose().mul(g_tinv).mul(&b[j - a]));
                }
            }
            m.symmetrized()
        })
        .collect()
}

/// Splits phase-space jets of `Φ` into the jets of the `𝕁`-block `B` and of `B′`.
pub(crate) fn j_blocks(jets: &[Mat<f64>]) -> (Vec<Mat<f64>>, Vec<Mat<f64>>) {
    let n = jets[0].rows() / 2;
    (jets.iter().map(|y| y.submatrix(0, n, n, n)).collect(), jets.iter().map(|y| y.submatrix(n, n, n, n)).collect())
}

/// Partial signatures at a crossing with `L₀`, computed in two charts that must agree.
#[derive(Clone, Debug, Serialize)]
pub struct ChartedTable {
    pub table: SignatureTable,
    pub chart: &'static str,
    pub recheck_chart: &'static str,
}

pub(crate) fn charted_table(g: &Mat<f64>, t0: f64, jets: &[Mat<f64>], seed: u64) -> Result<ChartedTable> {
    let order = jets.len() - 1;
    let (b, bp) = j_blocks(jets);
    let r = Mat::from_dmatrix(&b[0].vstack(&bp[0]).to_dmatrix().qr().r());
    let c = r.inverse().ok_or(Error::Singular)?;
    let b: Vec<Mat<f64>> = b.iter().map(|x| x.mul(&c)).collect();
    let bp: Vec<Mat<f64>> = bp.iter().map(|x| x.mul(&c)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let first = if horizontal_admissible(&b[0], &bp[0]) {
        ChartLeg::Horizontal
    } else {
        random_graph_leg(g, &b[0], &bp[0], &mut rng)?
    };
    let second = random_graph_leg(g, &b[0], &bp[0], &mut rng)?;
    let table_in = |leg: &ChartLeg| -> Result<SignatureTable> {
        partial_signatures(&TaylorPath::new(t0, chart_form_jet(g, &b, &bp, leg, order))?)
    };
    let table = table_in(&first)?;
    if table_in(&second)? != table {
        return Err(Error::InvariantViolation(format!("partial signatures at {t0} depend on the chart")));
    }
    Ok(ChartedTable { table, chart: first.name(), recheck_chart: second.name() })
}

#[derive(Clone, Debug, Serialize)]
pub struct ConjugateInstant {
    pub t0: f64,
    pub location: CrossingLocation,
    pub multiplicity: usize,
    pub table: SignatureTable,
    pub jumps: JumpRecord,
    /// Signature of `B₁`.
    pub sigma: i64,
    pub odd_sum: i64,
    pub contribution: i64,
    pub degenerate: bool,
    pub bifurcation: bool,
    pub chart: &'static str,
}

pub fn is_bifurcation(table: &SignatureTable, location: CrossingLocation) -> bool {
    location == CrossingLocation::Interior && table.odd_sigma_sum() != 0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InstantLocation {
    pub t0: f64,
    pub multiplicity: usize,
}

fn instants_of(flow: &JacobiFlow) -> Result<Vec<InstantLocation>> {
    let f = |t: f64| -> Result<f64> { Ok(cycle_angles(&flow.phi(t)?)[0]) };
    let policy = float_policy();
    let wrapped = move |t: f64| with_float_policy(policy, || f(t));
    let roots = locate_zeros(&wrapped, 0.0, 1.0, SCAN_POINTS)?;
    roots
        .into_iter()
        .map(|t0| {
            let s = cycle_angles(&flow.phi(t0)?);
            Ok(InstantLocation { t0, multiplicity: s.iter().filter(|&&x| x <= MULT_TOL).count() })
        })
        .collect()
}

pub fn conjugate_instants(prob: &MorseSturmProblem) -> Result<Vec<InstantLocation>> {
    instants_of(&integrate_flow(prob, 0.0, 0)?)
}

fn table_at(flow: &JacobiFlow, t0: f64, seed: u64) -> Result<ChartedTable> {
    let jets = flow.t_jet(t0, DEFAULT_MAX_ORDER)?;
    charted_table(&flow.problem().g, t0, &jets, seed)
}

pub fn conjugate_partial_signatures(prob: &MorseSturmProblem, t0: f64) -> Result<SignatureTable> {
    let flow = integrate_flow(prob, 0.0, 0)?;
    let ct = table_at(&flow, t0, MaslovOptions::default().seed)?;
    if ct.table.n0 == 0 {
        return Err(Error::InvariantViolation(format!("t = {t0} is not a conjugate instant")));
    }
    Ok(ct.table)
}

fn contribution(j: &JumpRecord, loc: CrossingLocation) -> i64 {
    match loc {
        CrossingLocation::Start => j.sf_right,
        CrossingLocation::Interior => j.sf_across,
        CrossingLocation::End => j.sf_left,
    }
}

fn build_instant(flow: &JacobiFlow, loc: InstantLocation, seed: u64) -> Result<ConjugateInstant> {
    let location = if loc.t0 == 1.0 { CrossingLocation::End } else { CrossingLocation::Interior };
    let ct = table_at(flow, loc.t0, seed)?;
    if ct.table.n0 != loc.multiplicity {
        return Err(Error::InvariantViolation(format!(
            "multiplicity {} at t = {} differs from dim W₁ = {}",
            loc.multiplicity, loc.t0, ct.table.n0
        )));
    }
    let jumps = jump_decomposition(&ct.table);
    Ok(ConjugateInstant {
        t0: loc.t0,
        location,
        multiplicity: loc.multiplicity,
        sigma: ct.table.sigma(1),
        odd_sum: ct.table.odd_sigma_sum(),
        contribution: contribution(&jumps, location),
        degenerate: ct.table.k_max > 1,
        bifurcation: is_bifurcation(&ct.table, location),
        chart: ct.chart,
        table: ct.table,
        jumps,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct GeodesicMaslov {
    /// `μ_{L₀}(γ) + n⁻(g)` from the crossing tables.
    pub value: i64,
    pub instants: Vec<ConjugateInstant>,
    /// Table of the initial instant, where `B₁ = g`.
    pub start_table: SignatureTable,
    pub start_contribution: i64,
    /// `μ_{L₀}(γ)` on `[0, 1]` and on `[ε, 1]` by chart bookkeeping of sampled frames.
    pub mu_full: i64,
    pub mu_tail: i64,
    pub epsilon: f64,
}

fn sampled_mu(flow: &JacobiFlow, a: f64, b: f64, opts: &MaslovOptions) -> Result<i64> {
    let g = &flow.problem().g;
    let n = g.rows();
    let space = SymplecticSpace::from_metric(g)?;
    let mut l0 = Mat::zeros(2 * n, n);
    l0.set_block(n, 0, &Mat::identity(n));
    let l0 = LagrangianFrame::new(&space, l0)?;
    let fl = flow.clone();
    let sp = space.clone();
    let policy = float_policy();
    let prov: crate::lagrangian::sampled::Provider<f64> = Arc::new(move |t| {
        with_float_policy(policy, || LagrangianFrame::new(&sp, fl.phi(t)?.submatrix(0, n, 2 * n, n)))
    });
    let speed = 1.0 + flow.problem().sup_norm();
    let steps = ((4.0 * speed * (b - a)).ceil() as usize).clamp(64, 1 << 14);
    Ok(maslov_continuous(&SampledPath::from_provider(prov, a, b, steps)?, &l0, opts)?.value)
}

pub fn geodesic_maslov(prob: &MorseSturmProblem) -> Result<GeodesicMaslov> {
    let opts = MaslovOptions::default();
    let flow = integrate_flow(prob, 0.0, 0)?;
    let locs = instants_of(&flow)?;
    let policy = float_policy();
    let instants: Result<Vec<ConjugateInstant>> = locs
        .par_iter()
        .enumerate()
        .map(|(i, l)| with_float_policy(policy, || build_instant(&flow, *l, opts.seed ^ i as u64)))
        .collect();
    let instants = instants?;
    let start = table_at(&flow, 0.0, opts.seed)?;
    let n_minus = crate::forms::inertia_mat(&prob.g)?.n_minus as i64;
    let start_contribution = jump_decomposition(&start.table).sf_right;
    if start.table.k_max != 1 || start_contribution != -n_minus {
        return Err(Error::InvariantViolation("initial instant table differs from the metric".into()));
    }
    let value: i64 = instants.iter().map(|c| c.contribution).sum();
    let first = locs.first().map_or(1.0, |l| l.t0);
    let epsilon = (0.5 * first).min(0.01);
    let mu_full = sampled_mu(&flow, 0.0, 1.0, &opts)?;
    let mu_tail = sampled_mu(&flow, epsilon, 1.0, &opts)?;
    if mu_tail != mu_full + n_minus {
        return Err(Error::InvariantViolation(format!(
            "μ on [ε,1] = {mu_tail} but μ on [0,1] + n⁻(g) = {}",
            mu_full + n_minus
        )));
    }
    if mu_tail != value {
        return Err(Error::InvariantViolation(format!(
            "crossing tables give {value}, sampled frames give {mu_tail}"
        )));
    }
    Ok(GeodesicMaslov { value, instants, start_table: start.table, start_contribution, mu_full, mu_tail, epsilon })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BifurcationFlag {
    pub t0: f64,
    pub odd_sum: i64,
    pub flagged: bool,
}

pub fn bifurcation_flags(prob: &MorseSturmProblem) -> Result<Vec<BifurcationFlag>> {
    Ok(geodesic_maslov(prob)?
        .instants
        .iter()
        .filter(|c| c.location == CrossingLocation::Interior)
        .map(|c| BifurcationFlag { t0: c.t0, odd_sum: c.odd_sum, flagged: c.bifurcation })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::morse_sturm::problem::Curvature;
    use std::f64::consts::PI;

    fn iso(n: usize, r: f64) -> MorseSturmProblem {
        MorseSturmProblem::constant(Mat::identity(n), Mat::identity(n).scale(&r), "iso").unwrap()
    }

    #[test]
    fn flat_problem_has_no_instants() {
        for g in [Mat::identity(2), Mat::diag(&[1.0, -1.0])] {
            let p = MorseSturmProblem::constant(g, Mat::zeros(2, 2), "flat").unwrap();
            assert!(conjugate_instants(&p).unwrap().is_empty());
            let m = geodesic_maslov(&p).unwrap();
            assert_eq!(m.value, 0);
        }
    }

    #[test]
    fn sphere_like_instants() {
        let p = iso(3, -(2.5 * PI).powi(2));
        let inst = conjugate_instants(&p).unwrap();
        assert_eq!(inst.len(), 2);
        assert!((inst[0].t0 - 0.4).abs() < 1e-8 && (inst[1].t0 - 0.8).abs() < 1e-8);
        assert!(inst.iter().all(|i| i.multiplicity == 3));
        let m = geodesic_maslov(&p).unwrap();
        assert_eq!(m.value, 6);
        for c in &m.instants {
            assert_eq!(c.table.sigmas(), vec![3]);
            assert_eq!(c.chart, "formula1");
            assert!(c.bifurcation);
        }
    }

    #[test]
    fn final_instant_is_counted() {
        let p = iso(2, -PI * PI);
        let inst = conjugate_instants(&p).unwrap();
        assert_eq!(inst, vec![InstantLocation { t0: 1.0, multiplicity: 2 }]);
        let m = geodesic_maslov(&p).unwrap();
        assert_eq!(m.value, 2);
        assert_eq!(m.instants[0].location, CrossingLocation::End);
        assert!(bifurcation_flags(&p).unwrap().is_empty());
    }

    #[test]
    fn initial_instant_table_is_the_metric() {
        let p = MorseSturmProblem::constant(Mat::diag(&[1.0, -1.0, -1.0]), Mat::diag(&[-3.0, 2.0, 1.0]), "x").unwrap();
        let t = conjugate_partial_signatures(&p, 0.0).unwrap();
        assert_eq!(t.k_max, 1);
        assert_eq!(t.levels[0].inertia.n_plus, 1);
        assert_eq!(t.levels[0].inertia.n_minus, 2);
        assert_eq!(geodesic_maslov(&p).unwrap().start_contribution, -2);
    }

    #[test]
    fn timelike_instant_has_negative_signature() {
        // spacelike block conjugate at 0.4, 0.8; timelike block at 2/3
        let g = Mat::diag(&[1.0, -1.0]);
        let r = Mat::diag(&[-(2.5 * PI).powi(2), -(1.5 * PI).powi(2)]);
        let p = MorseSturmProblem::constant(g, r, "lorentz").unwrap();
        let m = geodesic_maslov(&p).unwrap();
        let ts: Vec<f64> = m.instants.iter().map(|c| c.t0).collect();
        assert_eq!(ts.len(), 3);
        assert!((ts[1] - 2.0 / 3.0).abs() < 1e-8);
        assert_eq!(m.instants[1].sigma, -1);
        assert_eq!(m.value, 1);
    }

    #[test]
    fn formula2_used_when_derivative_block_is_singular() {
        // 𝕁-block B(t) = diag(sin(at)/a, sin(bt)/b); B′(t₀) singular when cos(b t₀) = 0 at a conjugate t₀ of the first
        let (a, b) = (2.0 * PI, PI);
        let p = MorseSturmProblem::constant(Mat::identity(2), Mat::diag(&[-a * a, -b * b]), "mixed").unwrap();
        let flow = integrate_flow(&p, 0.0, 0).unwrap();
        let ct = table_at(&flow, 0.5, 7).unwrap();
        assert_eq!(ct.chart, "formula2");
        assert_eq!(ct.table.sigmas(), vec![1]);
    }

    #[test]
    fn time_dependent_curvature_matches_sampled_count() {
        let g = Mat::identity(2);
        let r0 = Mat::from_rows(vec![vec![-60.0, 4.0], vec![4.0, -25.0]]).unwrap();
        let r1 = Mat::from_rows(vec![vec![-30.0, 0.0], vec![0.0, 10.0]]).unwrap();
        let p = MorseSturmProblem::new(g, Curvature::Poly(vec![r0, r1]), "tv").unwrap();
        let m = geodesic_maslov(&p).unwrap();
        let mult: usize = m.instants.iter().map(|c| c.multiplicity).sum();
        assert_eq!(m.value, mult as i64);
        assert!(m.value >= 2);
    }

    #[test]
    fn trivialization_invariance() {
        let g = Mat::diag(&[1.0, -1.0]);
        let r = Mat::diag(&[-(2.5 * PI).powi(2), -(1.5 * PI).powi(2)]);
        let p = MorseSturmProblem::constant(g, r, "lorentz").unwrap();
        let t = Mat::from_rows(vec![vec![1.0, 0.5], vec![-0.3, 2.0]]).unwrap();
        let q = p.transformed(&t).unwrap();
        let a = geodesic_maslov(&p).unwrap();
        let b = geodesic_maslov(&q).unwrap();
        assert_eq!(a.value, b.value);
        for (x, y) in a.instants.iter().zip(&b.instants) {
            assert!((x.t0 - y.t0).abs() < 1e-8);
            assert_eq!(x.table, y.table);
        }
    }

    #[test]
    fn fast_rotation_is_not_aliased() {
        let p = iso(1, -(7.5 * PI).powi(2));
        let m = geodesic_maslov(&p).unwrap();
        assert_eq!(m.instants.len(), 7);
        assert_eq!((m.value, m.mu_full, m.mu_tail), (7, 7, 7));
    }
}
