//! Spectral flow of polynomial paths, telescoped over isolated degeneracy instants.

use super::{jet_at, jump_decomposition, partial_signatures, JumpRecord, PolyPath, SignatureTable, TaylorPath};
use crate::algebraic::Real;
use crate::error::{Error, Result};
use crate::forms::inertia_mat;
use crate::matrix::Mat;
use crate::poly::{real_roots, RealRoot};
use crate::scalar::{Rational, Scalar};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossingLocation {
    Start,
    Interior,
    End,
}

#[derive(Clone, Debug, Serialize)]
pub struct Crossing {
    pub t: String,
    pub t_approx: f64,
    pub location: CrossingLocation,
    pub table: SignatureTable,
    pub jumps: JumpRecord,
}

impl Crossing {
    /// Contribution to the flow on the interval.
    pub fn contribution(&self) -> i64 {
        match self.location {
            CrossingLocation::Start => self.jumps.sf_right,
            CrossingLocation::Interior => self.jumps.sf_across,
            CrossingLocation::End => self.jumps.sf_left,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FlowReport {
    pub a: f64,
    pub b: f64,
    pub ext_coindex_a: usize,
    pub ext_coindex_b: usize,
    pub total: i64,
    pub crossings: Vec<Crossing>,
}

/// `n̄⁺(P(b)) − n̄⁺(P(a))`, checked against the sum of per-crossing jumps.
pub fn spectral_flow(path: &PolyPath<Rational>) -> Result<FlowReport> {
    let d = path.poly().det_poly();
    if d.is_zero() {
        return Err(Error::NonIsolated(0));
    }
    let order = d.degree().unwrap_or(0) + 1;
    let ca = inertia_mat(&path.eval(&path.a))?.ext_coindex;
    let cb = inertia_mat(&path.eval(&path.b))?.ext_coindex;
    let mut crossings = Vec::new();
    if path.a != path.b {
        let rpath = PolyPath::new(
            Real::from_rational(&path.a),
            Real::from_rational(&path.b),
            path.poly().map(Real::from_rational),
        )?;
        for root in real_roots(&d, &path.a, &path.b) {
            let location = match &root {
                RealRoot::Exact(r) if *r == path.a => CrossingLocation::Start,
                RealRoot::Exact(r) if *r == path.b => CrossingLocation::End,
                _ => CrossingLocation::Interior,
            };
            let t0 = Real::from_root(&root);
            let table = partial_signatures(&jet_at(&rpath, &t0, order)?)?;
            crossings.push(Crossing {
                t: root.describe(),
                t_approx: root.approx(),
                location,
                jumps: jump_decomposition(&table),
                table,
            });
        }
    }
    let total = cb as i64 - ca as i64;
    let sum: i64 = crossings.iter().map(|c| c.contribution()).sum();
    if sum != total {
        return Err(Error::InvariantViolation(format!(
            "spectral flow {total} differs from the sum {sum} of crossing contributions"
        )));
    }
    Ok(FlowReport {
        a: path.a.to_f64(),
        b: path.b.to_f64(),
        ext_coindex_a: ca,
        ext_coindex_b: cb,
        total,
        crossings,
    })
}

const FLOAT_GRID: usize = 2000;

fn golden_min(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > 1e-13 * (1.0 + lo.abs()) {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        }
    }
    (lo + hi) / 2.0
}

fn bisect_root(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let slo = f(lo) > 0.0;
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        let v = f(mid);
        if v == 0.0 {
            return mid;
        }
        if (v > 0.0) == slo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Floating-point variant: sign-change bracketing of `det P` plus refined local minima of `|det P|`.
pub fn spectral_flow_f64(path: &PolyPath<f64>) -> Result<FlowReport> {
    let (a, b) = (path.a, path.b);
    let scale = path.poly().coeffs().iter().map(|c| c.max_abs()).fold(1.0, f64::max);
    let n = path.dim() as i32;
    let det = |t: f64| path.eval(&t).det();
    let absdet = |t: f64| det(t).abs();
    let zero_tol = 1e-10 * scale.powi(n);
    let ca = inertia_mat(&path.eval(&a))?.ext_coindex;
    let cb = inertia_mat(&path.eval(&b))?.ext_coindex;
    let mut instants: Vec<f64> = Vec::new();
    if b > a {
        let h = (b - a) / FLOAT_GRID as f64;
        let ts: Vec<f64> = (0..=FLOAT_GRID).map(|i| a + h * i as f64).collect();
        let vs: Vec<f64> = ts.iter().map(|&t| det(t)).collect();
        if vs.iter().all(|v| v.abs() <= zero_tol) {
            return Err(Error::NonIsolated(0));
        }
        for i in 0..FLOAT_GRID {
            if vs[i] != 0.0 && vs[i + 1] != 0.0 && (vs[i] > 0.0) != (vs[i + 1] > 0.0) {
                instants.push(bisect_root(&det, ts[i], ts[i + 1]));
            }
        }
        for i in 0..=FLOAT_GRID {
            let left = if i == 0 { f64::INFINITY } else { vs[i - 1].abs() };
            let right = if i == FLOAT_GRID { f64::INFINITY } else { vs[i + 1].abs() };
            if vs[i].abs() <= left && vs[i].abs() <= right {
                let t = golden_min(&absdet, ts[i.saturating_sub(1)], ts[(i + 1).min(FLOAT_GRID)]);
                if absdet(t) <= zero_tol {
                    instants.push(t);
                }
            }
        }
        if absdet(a) <= zero_tol {
            instants.push(a);
        }
        if absdet(b) <= zero_tol {
            instants.push(b);
        }
        instants.sort_by(f64::total_cmp);
        instants.dedup_by(|x, y| (*x - *y).abs() < 1e-8 * (b - a).max(1.0));
    }
    let mut crossings = Vec::new();
    for t in instants {
        let tol = 1e-8 * (b - a).max(1.0);
        let (t, location) = if (t - a).abs() < tol {
            (a, CrossingLocation::Start)
        } else if (t - b).abs() < tol {
            (b, CrossingLocation::End)
        } else {
            (t, CrossingLocation::Interior)
        };
        let jet: TaylorPath<f64> = jet_at(path, &t, 2 * path.dim() * path.poly().degree().max(1) + 1)?;
        let table = partial_signatures(&jet)?;
        crossings.push(Crossing { t: format!("{t:.15}"), t_approx: t, location, jumps: jump_decomposition(&table), table });
    }
    let total = cb as i64 - ca as i64;
    let sum: i64 = crossings.iter().map(|c| c.contribution()).sum();
    if sum != total {
        return Err(Error::InvariantViolation(format!(
            "spectral flow {total} differs from the sum {sum} of crossing contributions"
        )));
    }
    Ok(FlowReport { a, b, ext_coindex_a: ca, ext_coindex_b: cb, total, crossings })
}

/// `n̄⁺` of `P(t)` at a sample point, for brute-force comparisons.
pub fn ext_coindex_at<S: Scalar>(path: &PolyPath<S>, t: &S) -> Result<usize> {
    let m: Mat<S> = path.eval(t);
    Ok(inertia_mat(&m)?.ext_coindex)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matpoly::MatPoly;
    use crate::scalar::rat;

    fn q(n: i64) -> Rational {
        rat(n, 1)
    }

    fn example() -> MatPoly<Rational> {
        MatPoly::from_entries(&[
            vec![vec![q(1)], vec![q(0), q(1)]],
            vec![vec![q(0), q(1)], vec![q(0), q(0), q(0), q(1)]],
        ])
        .unwrap()
    }

    #[test]
    fn symmetric_window_around_crossing() {
        let p = PolyPath::new(rat(-1, 10), rat(1, 10), example()).unwrap();
        let r = spectral_flow(&p).unwrap();
        assert_eq!(r.total, 0);
        assert_eq!(r.crossings.len(), 1);
        assert_eq!(r.crossings[0].location, CrossingLocation::Interior);
    }

    #[test]
    fn half_window_ending_at_degeneracy() {
        let m = MatPoly::from_entries(&[vec![vec![], vec![q(0), q(-1)]], vec![vec![q(0), q(-1)], vec![q(1)]]])
            .unwrap();
        let p = PolyPath::new(rat(-1, 10), q(0), m.clone()).unwrap();
        assert_eq!(spectral_flow(&p).unwrap().total, 1);
        let pf = PolyPath::new(-0.1, 0.0, m.map(|x| x.to_f64())).unwrap();
        assert_eq!(spectral_flow_f64(&pf).unwrap().total, 1);
    }

    #[test]
    fn irrational_crossings_are_exact() {
        // diag(t² − 2, 1 − t): crossings at √2 and 1 inside [0, 2]
        let m = MatPoly::from_entries(&[vec![vec![q(-2), q(0), q(1)], vec![]], vec![vec![], vec![q(1), q(-1)]]])
            .unwrap();
        let p = PolyPath::new(q(0), q(2), m).unwrap();
        let r = spectral_flow(&p).unwrap();
        assert_eq!(r.crossings.len(), 2);
        assert_eq!(r.total, 0);
        assert!(r.crossings.iter().any(|c| (c.t_approx - 2f64.sqrt()).abs() < 1e-12));
    }

    #[test]
    fn constant_nondegenerate_path_has_no_flow() {
        let p = PolyPath::new(q(-3), q(5), MatPoly::constant(Mat::<Rational>::from_i64(&[&[2, 1], &[1, -1]]))).unwrap();
        let r = spectral_flow(&p).unwrap();
        assert_eq!((r.total, r.crossings.len()), (0, 0));
    }

    #[test]
    fn identically_degenerate_path_is_rejected() {
        let p = PolyPath::new(q(0), q(1), MatPoly::constant(Mat::<Rational>::from_i64(&[&[1, 0], &[0, 0]]))).unwrap();
        assert!(matches!(spectral_flow(&p), Err(Error::NonIsolated(_))));
    }
}
