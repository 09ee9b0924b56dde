//! Maslov index of polynomial Lagrangian paths from partial signatures at exact crossings.

use super::sampled::Provider;
use super::{chart_cogredient, complement, graph_lagrangian, Convention, LagrangianFrame, MaslovOptions, SampledPath, SymplecticSpace};
use crate::algebraic::Real;
use crate::error::{Error, Result};
use crate::matpoly::MatPoly;
use crate::matrix::Mat;
use crate::poly::{real_roots, RealRoot};
use crate::psig::flow::CrossingLocation;
use crate::psig::{jet_at, jump_decomposition, partial_signatures, JumpRecord, PolyPath, SignatureTable};
use crate::scalar::{Rational, Scalar};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::sync::Arc;

/// A Lagrangian path `t ↦ span F(t)` with `F` polynomial on `[a, b]`.
#[derive(Clone, Debug)]
pub struct AnalyticPath {
    space: SymplecticSpace<Rational>,
    frame: MatPoly<Rational>,
    pub a: Rational,
    pub b: Rational,
}

impl AnalyticPath {
    pub fn new(space: &SymplecticSpace<Rational>, frame: MatPoly<Rational>, a: Rational, b: Rational) -> Result<Self> {
        if frame.rows() != space.dim() || frame.cols() != space.n() {
            return Err(Error::DimensionMismatch("polynomial frame has the wrong shape".into()));
        }
        if b < a {
            return Err(Error::DimensionMismatch("interval endpoints out of order".into()));
        }
        let iso = frame.transpose().mul(&frame.left_mul(space.omega()));
        if !iso.is_zero() {
            return Err(Error::NotIsotropic("ω does not vanish identically on the frame".into()));
        }
        let gram = frame.transpose().mul(&frame).det_poly();
        if gram.is_zero() || !real_roots(&gram, &a, &b).is_empty() {
            return Err(Error::NotIsotropic("frame drops rank on the interval".into()));
        }
        Ok(AnalyticPath { space: space.clone(), frame, a, b })
    }

    pub fn space(&self) -> &SymplecticSpace<Rational> {
        &self.space
    }

    pub fn frame(&self) -> &MatPoly<Rational> {
        &self.frame
    }

    pub fn eval(&self, t: &Rational) -> Result<LagrangianFrame<Rational>> {
        LagrangianFrame::new(&self.space, self.frame.eval(t))
    }

    /// Sampled view with exact frames at binary-rational sample times.
    pub fn sampled(&self, n: usize) -> Result<SampledPath<Rational>> {
        let me = self.clone();
        let prov: Provider<Rational> = Arc::new(move |t| me.eval(&Rational::from_f64(t)));
        SampledPath::from_provider(prov, self.a.to_f64(), self.b.to_f64(), n)
    }

    /// Float copy of the frame polynomial evaluated at `t`.
    pub fn eval_f64(&self, t: f64) -> Result<LagrangianFrame<f64>> {
        let sp = SymplecticSpace::new(self.space.omega().to_f64())?;
        LagrangianFrame::new(&sp, self.frame.map(|x| x.to_f64()).eval(&t))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalyticCrossing {
    pub t: String,
    pub t_approx: f64,
    pub location: CrossingLocation,
    pub table: SignatureTable,
    pub jumps: JumpRecord,
    pub contribution: i64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalyticReport {
    pub value: i64,
    pub crossings: Vec<AnalyticCrossing>,
}

fn contribution(j: &JumpRecord, loc: CrossingLocation, conv: Convention) -> i64 {
    match (conv, loc) {
        (Convention::ExtendedCoindex, CrossingLocation::Start) => j.sf_right,
        (Convention::ExtendedCoindex, CrossingLocation::Interior) => j.sf_across,
        (Convention::ExtendedCoindex, CrossingLocation::End) => j.sf_left,
        (Convention::Coindex, CrossingLocation::Start) => j.coindex_right,
        (Convention::Coindex, CrossingLocation::Interior) => j.coindex_across,
        (Convention::Coindex, CrossingLocation::End) => j.coindex_left,
    }
}

/// Rational Lagrangians transversal to `L₀` and to `F(t₀)`.
fn local_transversals(
    l0: &LagrangianFrame<Rational>,
    f_at: &Mat<Real>,
    rng: &mut ChaCha8Rng,
    count: usize,
) -> Result<Vec<LagrangianFrame<Rational>>> {
    let c = complement(l0)?;
    let mut out: Vec<LagrangianFrame<Rational>> = Vec::new();
    for _ in 0..64 {
        let s = super::random_symmetric::<Rational, _>(rng, l0.n(), 1.0);
        let cand = graph_lagrangian(l0, &c, &s)?;
        let m = cand.frame().map(Real::from_rational).hstack(f_at);
        if m.det().is_zero() || out.iter().any(|o| o.same_as(&cand).unwrap_or(true)) {
            continue;
        }
        out.push(cand);
        if out.len() == count {
            return Ok(out);
        }
    }
    Err(Error::RefinementExhausted("no rational transversal at a crossing".into()))
}

fn crossing_table(
    path: &AnalyticPath,
    l0: &LagrangianFrame<Rational>,
    l1: &LagrangianFrame<Rational>,
    t0: &Real,
) -> Result<SignatureTable> {
    let n = l0.n();
    let ginv = l0.frame().hstack(l1.frame()).inverse().ok_or(Error::NotTransversal("L0 and L1 intersect".into()))?;
    let pq = path.frame.left_mul(&ginv);
    let p = pq.submatrix(0, 0, n, n);
    let q = pq.submatrix(n, 0, n, n);
    let k = l1.frame().transpose().mul(l0.space().omega()).mul(l0.frame());
    let s = q.transpose().mul(&p.left_mul(&k));
    debug_assert_eq!(s.eval(&path.a), chart_cogredient(l0, l1, &path.frame.eval(&path.a))?);
    if !s.is_symmetric() {
        return Err(Error::InvariantViolation("cogredient chart form is not symmetric".into()));
    }
    let order = s.det_poly().degree().unwrap_or(0) + 1;
    let rpath = PolyPath::new(Real::from_rational(&path.a), Real::from_rational(&path.b), s.map(Real::from_rational))?;
    partial_signatures(&jet_at(&rpath, t0, order)?)
}

/// `μ_{L₀}` of a polynomial Lagrangian path, summing partial-signature contributions at each
/// exact crossing; each crossing table is recomputed in a second chart.
pub fn maslov_analytic(path: &AnalyticPath, l0: &LagrangianFrame<Rational>, opts: &MaslovOptions) -> Result<AnalyticReport> {
    if l0.space() != &path.space {
        return Err(Error::DimensionMismatch("path and L0 in different spaces".into()));
    }
    let d = path.frame.left_mul(&l0.frame().transpose().mul(path.space.omega())).det_poly();
    if d.is_zero() {
        return Err(Error::EntirelySingular);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut crossings = Vec::new();
    let roots = if path.a == path.b { vec![] } else { real_roots(&d, &path.a, &path.b) };
    for root in roots {
        let location = match &root {
            RealRoot::Exact(r) if *r == path.a => CrossingLocation::Start,
            RealRoot::Exact(r) if *r == path.b => CrossingLocation::End,
            _ => CrossingLocation::Interior,
        };
        let t0 = Real::from_root(&root);
        let f_at = path.frame.map(Real::from_rational).eval(&t0);
        let l1s = local_transversals(l0, &f_at, &mut rng, 2)?;
        let table = crossing_table(path, l0, &l1s[0], &t0)?;
        if crossing_table(path, l0, &l1s[1], &t0)? != table {
            return Err(Error::InvariantViolation(format!("crossing table at {} depends on the chart", root.describe())));
        }
        let jumps = jump_decomposition(&table);
        crossings.push(AnalyticCrossing {
            t: root.describe(),
            t_approx: root.approx(),
            location,
            contribution: contribution(&jumps, location, opts.convention),
            table,
            jumps,
        });
    }
    Ok(AnalyticReport { value: crossings.iter().map(|c| c.contribution).sum(), crossings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lagrangian::maslov_continuous;
    use crate::scalar::rat;

    fn q(n: i64) -> Rational {
        rat(n, 1)
    }

    fn planar_loop() -> AnalyticPath {
        // span(1 − t², 2t) on [−1, 1] turns the line once through RP¹
        let s = SymplecticSpace::<Rational>::standard(1);
        let f = MatPoly::from_entries(&[vec![vec![q(1), q(0), q(-1)]], vec![vec![q(0), q(2)]]]).unwrap();
        AnalyticPath::new(&s, f, q(-1), q(1)).unwrap()
    }

    fn horizontal() -> LagrangianFrame<Rational> {
        LagrangianFrame::new(&SymplecticSpace::standard(1), Mat::from_i64(&[&[1], &[0]])).unwrap()
    }

    #[test]
    fn planar_loop_matches_orientation_constant() {
        let r = maslov_analytic(&planar_loop(), &horizontal(), &MaslovOptions::default()).unwrap();
        assert_eq!(r.value, -1);
        assert_eq!(r.crossings.len(), 1);
        assert_eq!(r.crossings[0].table.sigmas(), vec![-1]);
        let c = maslov_continuous(&planar_loop().sampled(32).unwrap(), &horizontal(), &MaslovOptions::default()).unwrap();
        assert_eq!(c.value, -1);
    }

    #[test]
    fn graph_path_with_known_chart_image() {
        // F(t) = [I; −P(t)] with P = [[1,t],[t,t³]]: chart over span(0,I) is P(t) itself
        let s = SymplecticSpace::<Rational>::standard(2);
        let f = MatPoly::from_entries(&[
            vec![vec![q(1)], vec![]],
            vec![vec![], vec![q(1)]],
            vec![vec![q(-1)], vec![q(0), q(-1)]],
            vec![vec![q(0), q(-1)], vec![q(0), q(0), q(0), q(-1)]],
        ])
        .unwrap();
        let l0 = LagrangianFrame::new(&s, Mat::from_i64(&[&[1, 0], &[0, 1], &[0, 0], &[0, 0]])).unwrap();
        let interior = AnalyticPath::new(&s, f.clone(), rat(-1, 2), rat(1, 2)).unwrap();
        let r = maslov_analytic(&interior, &l0, &MaslovOptions::default()).unwrap();
        assert_eq!(r.crossings.len(), 1);
        assert_eq!(r.crossings[0].contribution, 0);
        let ending = AnalyticPath::new(&s, f, rat(-1, 2), q(0)).unwrap();
        let r = maslov_analytic(&ending, &l0, &MaslovOptions::default()).unwrap();
        assert_eq!(r.crossings[0].location, CrossingLocation::End);
        assert_eq!(r.crossings[0].table.sigmas(), vec![0, -1]);
        assert_eq!(r.value, 1);
        let c = maslov_continuous(&ending.sampled(32).unwrap(), &l0, &MaslovOptions::default()).unwrap();
        assert_eq!(c.value, 1);
    }

    #[test]
    fn path_inside_cycle_is_rejected() {
        let s = SymplecticSpace::<Rational>::standard(1);
        let f = MatPoly::from_entries(&[vec![vec![q(1)]], vec![vec![]]]).unwrap();
        let p = AnalyticPath::new(&s, f, q(0), q(1)).unwrap();
        assert!(matches!(maslov_analytic(&p, &horizontal(), &MaslovOptions::default()), Err(Error::EntirelySingular)));
    }
}
