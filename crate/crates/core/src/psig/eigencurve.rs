//! Partial signatures assembled from an explicit analytic eigendecomposition.

use super::{LevelSummary, SignatureTable};
use crate::error::{Error, Result};
use crate::forms::Inertia;
use crate::matrix::Mat;
use crate::scalar::Scalar;

/// One analytic eigencurve: Taylor coefficients of `λ(t)` at `t0` and `v(t0)`.
#[derive(Clone, Debug)]
pub struct Eigencurve<S> {
    pub jet: Vec<S>,
    pub vector: Vec<S>,
}

fn vanishing_order<S: Scalar>(jet: &[S]) -> Option<usize> {
    jet.iter().position(|c| !c.is_zero())
}

/// Table from eigencurves whose vectors at `t0` form an orthonormal basis.
pub fn eigencurve_signatures<S: Scalar>(curves: &[Eigencurve<S>]) -> Result<SignatureTable> {
    let n = curves.len();
    if curves.iter().any(|c| c.vector.len() != n) {
        return Err(Error::InconsistentEigendata("need as many eigenvectors as the dimension".into()));
    }
    let v = Mat::from_fn(n, n, |i, j| curves[j].vector[i].clone());
    let gram = v.transpose().mul(&v).sub(&Mat::identity(n));
    let orthonormal = if S::EXACT { gram.is_zero() } else { gram.max_abs() <= 1e-8 };
    if !orthonormal {
        return Err(Error::InconsistentEigendata("eigenvectors are not orthonormal".into()));
    }
    let mut orders = Vec::with_capacity(n);
    for c in curves {
        match vanishing_order(&c.jet) {
            Some(k) => orders.push(k),
            None => return Err(Error::NonIsolated(c.jet.len().saturating_sub(1))),
        }
    }
    let k_max = orders.iter().copied().max().unwrap_or(0);
    let mut levels = Vec::new();
    for k in 1..=k_max {
        let dim_w = orders.iter().filter(|&&o| o >= k).count();
        let mut p = 0;
        let mut m = 0;
        for (c, &o) in curves.iter().zip(&orders) {
            if o == k {
                if c.jet[k].signum() > 0 {
                    p += 1;
                } else {
                    m += 1;
                }
            }
        }
        levels.push(LevelSummary { k, dim_w, inertia: Inertia::new(p, m, dim_w - p - m) });
    }
    let table = SignatureTable { n0: orders.iter().filter(|&&o| o >= 1).count(), k_max, levels };
    table.check_invariants()?;
    Ok(table)
}

/// `Σ λ_i(t) v_i v_iᵀ` truncated at the common jet length.
pub fn assemble_jet<S: Scalar>(curves: &[Eigencurve<S>]) -> Vec<Mat<S>> {
    let n = curves.len();
    let len = curves.iter().map(|c| c.jet.len()).max().unwrap_or(0);
    (0..len)
        .map(|k| {
            let mut acc = Mat::zeros(n, n);
            for c in curves {
                if let Some(l) = c.jet.get(k) {
                    let v = Mat::column_vector(&c.vector);
                    acc = acc.add(&v.mul(&v.transpose()).scale(l));
                }
            }
            acc
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matpoly::MatPoly;
    use crate::psig::{partial_signatures, TaylorPath};
    use crate::scalar::{rat, Rational};

    type Q = Rational;

    fn curve(jet: &[i64], v: &[i64]) -> Eigencurve<Q> {
        Eigencurve { jet: jet.iter().map(|&x| rat(x, 1)).collect(), vector: v.iter().map(|&x| rat(x, 1)).collect() }
    }

    #[test]
    fn diagonal_path() {
        let t = eigencurve_signatures(&[curve(&[0, 1], &[1, 0]), curve(&[0, 0, 1], &[0, 1])]).unwrap();
        assert_eq!(t.sigmas(), vec![1, 1]);
        assert_eq!(t.dims(), vec![2, 1]);
    }

    /// Power series of `√(1 + x)` composed with `x(t)`, exact up to `order`.
    fn sqrt_series(x: &[Q], order: usize) -> Vec<Q> {
        let mut s = vec![rat(1, 1)];
        s.resize(order + 1, rat(0, 1));
        let mut f = vec![rat(0, 1); order + 1];
        f[0] = rat(1, 1);
        for (i, xi) in x.iter().enumerate().take(order + 1) {
            f[i] = f[i].clone() + xi.clone();
        }
        // s² = f solved term by term
        for k in 1..=order {
            let mut acc = f[k].clone();
            for j in 1..k {
                acc = acc - s[j].clone() * s[k - j].clone();
            }
            s[k] = acc / rat(2, 1);
        }
        s
    }

    #[test]
    fn irrational_eigencurve_has_negative_second_order() {
        // λ₁(t) = (1 + t³ − √(1 + 4t² − 2t³ + t⁶)) / 2 on the path [[1,t],[t,t³]]
        let order = 4;
        let r = sqrt_series(&[rat(0, 1), rat(0, 1), rat(4, 1), rat(-2, 1), rat(0, 1), rat(0, 1), rat(1, 1)], order);
        let mut lam = vec![rat(1, 2), rat(0, 1), rat(0, 1), rat(1, 2), rat(0, 1)];
        for k in 0..=order {
            lam[k] = lam[k].clone() - r[k].clone() / rat(2, 1);
        }
        assert_eq!(lam[0], rat(0, 1));
        assert_eq!(lam[1], rat(0, 1));
        assert_eq!(lam[2], rat(-1, 1));
        let c1 = Eigencurve { jet: lam, vector: vec![rat(0, 1), rat(1, 1)] };
        let c2 = curve(&[1], &[1, 0]);
        let t = eigencurve_signatures(&[c1, c2]).unwrap();
        assert_eq!(t.sigmas(), vec![0, -1]);
    }

    #[test]
    fn cayley_rotated_path_matches_jordan_chain_table() {
        // R(t) = [[1−t², −2t],[2t, 1−t²]], R Rᵀ = (1+t²)² I; P = R diag(t³, 1) Rᵀ
        let r = MatPoly::<Q>::from_entries(&[
            vec![vec![rat(1, 1), rat(0, 1), rat(-1, 1)], vec![rat(0, 1), rat(-2, 1)]],
            vec![vec![rat(0, 1), rat(2, 1)], vec![rat(1, 1), rat(0, 1), rat(-1, 1)]],
        ])
        .unwrap();
        let d = MatPoly::<Q>::from_entries(&[
            vec![vec![rat(0, 1), rat(0, 1), rat(0, 1), rat(1, 1)], vec![]],
            vec![vec![], vec![rat(1, 1)]],
        ])
        .unwrap();
        let p = r.mul(&d).mul(&r.transpose());
        let direct = partial_signatures(&TaylorPath::new(rat(0, 1), p.jet(&rat(0, 1), 8)).unwrap()).unwrap();
        // eigenvalues (1+t²)² t³ and (1+t²)², eigenvectors e₁, e₂ at t = 0
        let curves = [curve(&[0, 0, 0, 1, 0, 2, 0, 1], &[1, 0]), curve(&[1, 0, 2, 0, 1], &[0, 1])];
        assert_eq!(eigencurve_signatures(&curves).unwrap(), direct);
        assert_eq!(direct.sigmas(), vec![0, 0, 1]);
    }

    #[test]
    fn non_orthonormal_frame_is_rejected() {
        let e = eigencurve_signatures(&[curve(&[0, 1], &[1, 1]), curve(&[1], &[0, 1])]);
        assert!(matches!(e, Err(Error::InconsistentEigendata(_))));
    }

    #[test]
    fn assembled_jet_reproduces_diagonal() {
        let j = assemble_jet(&[curve(&[0, 1], &[1, 0]), curve(&[2, 0, 1], &[0, 1])]);
        assert_eq!(j[0], Mat::from_i64(&[&[0, 0], &[0, 2]]));
        assert_eq!(j[1], Mat::from_i64(&[&[1, 0], &[0, 0]]));
        assert_eq!(j[2], Mat::from_i64(&[&[0, 0], &[0, 1]]));
    }
}
