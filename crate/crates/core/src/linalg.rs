//! Elimination routines for exact fields and SVD/eigen routines for `f64`.

use crate::error::Result;
use crate::forms::Inertia;
use crate::matrix::Mat;
use crate::scalar::{float_tol, is_negligible, Scalar};
use nalgebra::DMatrix;

/// Reduced row echelon form and pivot columns.
pub fn rref<S: Scalar>(m: &Mat<S>) -> (Mat<S>, Vec<usize>) {
    let (rows, cols) = (m.rows(), m.cols());
    let mut a = m.clone();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[(i, c)].is_zero()) else {
            continue;
        };
        if p != r {
            for j in 0..cols {
                let tmp = a[(p, j)].clone();
                a[(p, j)] = a[(r, j)].clone();
                a[(r, j)] = tmp;
            }
        }
        let inv = a[(r, c)].inv().expect("nonzero pivot");
        for j in c..cols {
            a[(r, j)] = a[(r, j)].clone() * inv.clone();
        }
        for i in 0..rows {
            if i == r || a[(i, c)].is_zero() {
                continue;
            }
            let f = a[(i, c)].clone();
            for j in c..cols {
                let v = a[(i, j)].clone() - f.clone() * a[(r, j)].clone();
                a[(i, j)] = v;
            }
        }
        pivots.push(c);
        r += 1;
    }
    (a, pivots)
}

pub fn exact_nullspace<S: Scalar>(m: &Mat<S>) -> Mat<S> {
    let cols = m.cols();
    let (r, pivots) = rref(m);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    let mut out = Mat::zeros(cols, free.len());
    for (k, &f) in free.iter().enumerate() {
        out[(f, k)] = S::one();
        for (i, &p) in pivots.iter().enumerate() {
            out[(p, k)] = -r[(i, f)].clone();
        }
    }
    out
}

pub fn exact_colspace_selector<S: Scalar>(m: &Mat<S>) -> Mat<S> {
    let (_, pivots) = rref(m);
    let mut x = Mat::zeros(m.cols(), pivots.len());
    for (k, &p) in pivots.iter().enumerate() {
        x[(p, k)] = S::one();
    }
    x
}

pub fn exact_solve_min_norm<S: Scalar>(a: &Mat<S>, b: &Mat<S>) -> Option<Mat<S>> {
    let at = a.transpose();
    let g = a.mul(&at);
    let n = g.rows();
    let aug = g.hstack(b);
    let (r, pivots) = rref(&aug);
    if pivots.iter().any(|&p| p >= n) {
        return None;
    }
    let mut y = Mat::zeros(n, b.cols());
    for (i, &p) in pivots.iter().enumerate() {
        for j in 0..b.cols() {
            y[(p, j)] = r[(i, n + j)].clone();
        }
    }
    Some(at.mul(&y))
}

pub fn exact_det<S: Scalar>(m: &Mat<S>) -> S {
    let n = m.rows();
    let mut a = m.clone();
    let mut det = S::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[(i, c)].is_zero()) else {
            return S::zero();
        };
        if p != c {
            for j in 0..n {
                let tmp = a[(p, j)].clone();
                a[(p, j)] = a[(c, j)].clone();
                a[(c, j)] = tmp;
            }
            det = -det;
        }
        let piv = a[(c, c)].clone();
        det = det * piv.clone();
        let inv = piv.inv().expect("nonzero pivot");
        for i in c + 1..n {
            if a[(i, c)].is_zero() {
                continue;
            }
            let f = a[(i, c)].clone() * inv.clone();
            for j in c..n {
                let v = a[(i, j)].clone() - f.clone() * a[(c, j)].clone();
                a[(i, j)] = v;
            }
        }
    }
    det
}

pub fn exact_inverse<S: Scalar>(m: &Mat<S>) -> Option<Mat<S>> {
    let n = m.rows();
    if !m.is_square() {
        return None;
    }
    let (r, pivots) = rref(&m.hstack(&Mat::identity(n)));
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(r.submatrix(0, n, n, n))
}

/// Symmetric congruence reduction: returns `(P, d)` with `Pᵀ·m·P = diag(d)`.
pub fn congruence_diagonalize<S: Scalar>(m: &Mat<S>) -> (Mat<S>, Vec<S>) {
    let n = m.rows();
    let mut a = m.clone();
    let mut p = Mat::<S>::identity(n);
    for i in 0..n {
        let mut piv = (i..n).find(|&j| !a[(j, j)].is_zero());
        if piv.is_none() {
            let off = (i..n).flat_map(|j| (j + 1..n).map(move |k| (j, k))).find(|&(j, k)| !a[(j, k)].is_zero());
            match off {
                Some((j, k)) => {
                    // col_j += col_k, row_j += row_k
                    for r in 0..n {
                        let v = a[(r, j)].clone() + a[(r, k)].clone();
                        a[(r, j)] = v;
                    }
                    for c in 0..n {
                        let v = a[(j, c)].clone() + a[(k, c)].clone();
                        a[(j, c)] = v;
                    }
                    for r in 0..n {
                        let v = p[(r, j)].clone() + p[(r, k)].clone();
                        p[(r, j)] = v;
                    }
                    piv = Some(j);
                }
                None => break,
            }
        }
        let j = piv.expect("pivot");
        if j != i {
            for r in 0..n {
                let t = a[(r, i)].clone();
                a[(r, i)] = a[(r, j)].clone();
                a[(r, j)] = t;
            }
            for c in 0..n {
                let t = a[(i, c)].clone();
                a[(i, c)] = a[(j, c)].clone();
                a[(j, c)] = t;
            }
            for r in 0..n {
                let t = p[(r, i)].clone();
                p[(r, i)] = p[(r, j)].clone();
                p[(r, j)] = t;
            }
        }
        let inv = a[(i, i)].inv().expect("nonzero pivot");
        for r in i + 1..n {
            if a[(r, i)].is_zero() {
                continue;
            }
            let f = a[(r, i)].clone() * inv.clone();
            for c in 0..n {
                let v = a[(r, c)].clone() - f.clone() * a[(i, c)].clone();
                a[(r, c)] = v;
            }
            for q in 0..n {
                let v = a[(q, r)].clone() - f.clone() * a[(q, i)].clone();
                a[(q, r)] = v;
            }
            for q in 0..n {
                let v = p[(q, r)].clone() - f.clone() * p[(q, i)].clone();
                p[(q, r)] = v;
            }
        }
    }
    let d = (0..n).map(|i| a[(i, i)].clone()).collect();
    (p, d)
}

pub fn exact_inertia<S: Scalar>(m: &Mat<S>) -> Result<Inertia> {
    let (_, d) = congruence_diagonalize(m);
    let (mut pl, mut mi, mut ze) = (0, 0, 0);
    for x in &d {
        match x.signum() {
            1 => pl += 1,
            -1 => mi += 1,
            _ => ze += 1,
        }
    }
    Ok(Inertia::new(pl, mi, ze))
}

pub fn exact_negative_subspace<S: Scalar>(m: &Mat<S>) -> Mat<S> {
    let (p, d) = congruence_diagonalize(m);
    let idx: Vec<usize> = (0..d.len()).filter(|&i| d[i].signum() < 0).collect();
    p.select_cols(&idx)
}

fn padded_svd(m: &Mat<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let (r, c) = (m.rows(), m.cols());
    let mut d = m.to_dmatrix();
    if r < c {
        d = d.resize_vertically(c, 0.0);
    }
    let svd = d.svd(true, true);
    let u = svd.u.expect("u");
    let v = svd.v_t.expect("v_t").transpose();
    (u, svd.singular_values.iter().cloned().collect(), v)
}

pub fn float_inertia(m: &Mat<f64>) -> Result<Inertia> {
    let n = m.rows();
    if n == 0 {
        return Ok(Inertia::new(0, 0, 0));
    }
    let eig = m.symmetrized().to_dmatrix().symmetric_eigenvalues();
    let smax = eig.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let tol = float_tol(smax);
    let (mut pl, mut mi, mut ze) = (0, 0, 0);
    for &l in eig.iter() {
        if is_negligible(l, tol)? {
            ze += 1;
        } else if l > 0.0 {
            pl += 1;
        } else {
            mi += 1;
        }
    }
    Ok(Inertia::new(pl, mi, ze))
}

pub fn float_rank(m: &Mat<f64>) -> Result<usize> {
    if m.rows() == 0 || m.cols() == 0 {
        return Ok(0);
    }
    let s = m.to_dmatrix().singular_values();
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let tol = float_tol(smax);
    let mut r = 0;
    for &x in s.iter() {
        if !is_negligible(x, tol)? {
            r += 1;
        }
    }
    Ok(r)
}

pub fn float_nullspace(m: &Mat<f64>) -> Result<Mat<f64>> {
    let c = m.cols();
    if m.rows() == 0 {
        return Ok(Mat::identity(c));
    }
    if c == 0 {
        return Ok(Mat::zeros(0, 0));
    }
    let (_, s, v) = padded_svd(m);
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let tol = float_tol(smax);
    let mut idx = Vec::new();
    for (k, &x) in s.iter().enumerate() {
        if is_negligible(x, tol)? {
            idx.push(k);
        }
    }
    Ok(Mat::from_fn(c, idx.len(), |i, j| v[(i, idx[j])]))
}

pub fn float_colspace_selector(m: &Mat<f64>) -> Result<Mat<f64>> {
    let c = m.cols();
    if m.rows() == 0 || c == 0 {
        return Ok(Mat::zeros(c, 0));
    }
    let svd = m.to_dmatrix().svd(false, true);
    let vt = svd.v_t.expect("v_t");
    let s = &svd.singular_values;
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let tol = float_tol(smax);
    let mut idx = Vec::new();
    for (k, &x) in s.iter().enumerate() {
        if !is_negligible(x, tol)? {
            idx.push(k);
        }
    }
    Ok(Mat::from_fn(c, idx.len(), |i, j| vt[(idx[j], i)] / s[idx[j]]))
}

pub fn float_solve_min_norm(a: &Mat<f64>, b: &Mat<f64>) -> Result<Option<Mat<f64>>> {
    let (r, c) = (a.rows(), a.cols());
    if c == 0 {
        return Ok(if b.norm_fro() == 0.0 { Some(Mat::zeros(0, b.cols())) } else { None });
    }
    let svd = a.to_dmatrix().svd(true, true);
    let u = svd.u.expect("u");
    let vt = svd.v_t.expect("v_t");
    let s = &svd.singular_values;
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let tol = float_tol(smax);
    let bd = b.to_dmatrix();
    let mut x = DMatrix::<f64>::zeros(c, b.cols());
    for k in 0..s.len() {
        if is_negligible(s[k], tol)? {
            continue;
        }
        let coef = u.column(k).transpose() * &bd / s[k];
        x += vt.row(k).transpose() * coef;
    }
    let resid = (a.to_dmatrix() * &x - &bd).norm();
    let scale = 1.0f64.max(bd.norm()).max(smax * x.norm());
    debug_assert_eq!(r, a.rows());
    if resid > 1e-7 * scale {
        return Ok(None);
    }
    Ok(Some(Mat::from_dmatrix(&x)))
}

pub fn float_negative_subspace(m: &Mat<f64>) -> Result<Mat<f64>> {
    let n = m.rows();
    if n == 0 {
        return Ok(Mat::zeros(0, 0));
    }
    let eig = m.symmetrized().to_dmatrix().symmetric_eigen();
    let smax = eig.eigenvalues.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let tol = float_tol(smax);
    let mut idx = Vec::new();
    for (k, &l) in eig.eigenvalues.iter().enumerate() {
        if !is_negligible(l, tol)? && l < 0.0 {
            idx.push(k);
        }
    }
    Ok(Mat::from_fn(n, idx.len(), |i, j| eig.eigenvectors[(i, idx[j])]))
}

/// Orthonormal basis of the column span (float), via thin SVD.
pub fn orthonormal_basis(m: &Mat<f64>) -> Mat<f64> {
    let svd = m.to_dmatrix().svd(true, false);
    let u = svd.u.expect("u");
    let s = &svd.singular_values;
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let tol = float_tol(smax);
    let idx: Vec<usize> = (0..s.len()).filter(|&k| s[k] > tol).collect();
    Mat::from_fn(m.rows(), idx.len(), |i, j| u[(i, idx[j])])
}

/// Smallest singular value (zero for an empty or wide-deficient matrix).
pub fn sigma_min(m: &Mat<f64>) -> f64 {
    if m.rows() == 0 || m.cols() == 0 {
        return 0.0;
    }
    let s = m.to_dmatrix().singular_values();
    if m.rows() < m.cols() {
        return 0.0;
    }
    s.iter().cloned().fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Rational};

    #[test]
    fn congruence_handles_zero_diagonal() {
        let m = Mat::<Rational>::from_i64(&[&[0, 1], &[1, 0]]);
        let (p, d) = congruence_diagonalize(&m);
        let dd = p.transpose().mul(&m).mul(&p);
        assert_eq!(dd, Mat::diag(&d));
        assert_eq!(exact_inertia(&m).unwrap(), Inertia::new(1, 1, 0));
    }

    #[test]
    fn exact_nullspace_and_solve() {
        let m = Mat::<Rational>::from_i64(&[&[1, 2, 3], &[2, 4, 6]]);
        let n = exact_nullspace(&m);
        assert_eq!(n.cols(), 2);
        assert!(m.mul(&n).is_zero());
        let b = Mat::column_vector(&[rat(14, 1), rat(28, 1)]);
        let x = exact_solve_min_norm(&m, &b).unwrap();
        assert_eq!(m.mul(&x), b);
        // minimum-norm solution lies in the row space
        assert!(n.transpose().mul(&x).is_zero());
        let bad = Mat::column_vector(&[rat(1, 1), rat(0, 1)]);
        assert!(exact_solve_min_norm(&m, &bad).is_none());
    }

    #[test]
    fn float_routines_agree_with_exact() {
        let m = Mat::<f64>::from_i64(&[&[2, 1, 0], &[1, 2, 0], &[0, 0, 0]]);
        assert_eq!(float_inertia(&m).unwrap(), Inertia::new(2, 0, 1));
        assert_eq!(float_rank(&m).unwrap(), 2);
        let n = float_nullspace(&m).unwrap();
        assert_eq!(n.cols(), 1);
        assert!((n[(2, 0)].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_inverse_and_det() {
        let m = Mat::<Rational>::from_i64(&[&[2, 1], &[7, 4]]);
        assert_eq!(exact_det(&m), rat(1, 1));
        let inv = exact_inverse(&m).unwrap();
        assert_eq!(m.mul(&inv), Mat::identity(2));
    }
}
