//! Matrix polynomials `Σ tᵏ M_k` and truncated matrix power series.

use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::poly::Poly;
use crate::scalar::{Rational, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct MatPoly<S> {
    rows: usize,
    cols: usize,
    coeffs: Vec<Mat<S>>,
}

fn binom(n: usize, k: usize) -> i64 {
    let mut r: i64 = 1;
    for i in 0..k {
        r = r * (n - i) as i64 / (i + 1) as i64;
    }
    r
}

impl<S: Scalar> MatPoly<S> {
    pub fn new(rows: usize, cols: usize, mut coeffs: Vec<Mat<S>>) -> Result<Self> {
        if coeffs.iter().any(|c| c.rows() != rows || c.cols() != cols) {
            return Err(Error::DimensionMismatch("matrix polynomial coefficients".into()));
        }
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Ok(MatPoly { rows, cols, coeffs })
    }

    pub fn constant(m: Mat<S>) -> Self {
        let (r, c) = (m.rows(), m.cols());
        MatPoly::new(r, c, vec![m]).expect("shape")
    }

    /// Builds from per-entry coefficient lists (low degree first).
    pub fn from_entries(entries: &[Vec<Vec<S>>]) -> Result<Self> {
        let rows = entries.len();
        let cols = entries.first().map_or(0, |r| r.len());
        if entries.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged polynomial matrix".into()));
        }
        let deg = entries.iter().flatten().map(|c| c.len()).max().unwrap_or(0);
        let coeffs = (0..deg)
            .map(|k| Mat::from_fn(rows, cols, |i, j| entries[i][j].get(k).cloned().unwrap_or_else(S::zero)))
            .collect();
        MatPoly::new(rows, cols, coeffs)
    }

    pub fn entries(&self) -> Vec<Vec<Vec<S>>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.coeffs.iter().map(|c| c[(i, j)].clone()).collect()).collect())
            .collect()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn coeffs(&self) -> &[Mat<S>] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeff(&self, k: usize) -> Mat<S> {
        self.coeffs.get(k).cloned().unwrap_or_else(|| Mat::zeros(self.rows, self.cols))
    }

    pub fn eval(&self, t: &S) -> Mat<S> {
        let mut acc = Mat::zeros(self.rows, self.cols);
        for c in self.coeffs.iter().rev() {
            acc = acc.scale(t).add(c);
        }
        acc
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> MatPoly<T> {
        MatPoly { rows: self.rows, cols: self.cols, coeffs: self.coeffs.iter().map(|c| c.map(&f)).collect() }
    }

    pub fn transpose(&self) -> Self {
        MatPoly { rows: self.cols, cols: self.rows, coeffs: self.coeffs.iter().map(|c| c.transpose()).collect() }
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        MatPoly::new(self.rows, self.cols, (0..n).map(|k| self.coeff(k).add(&o.coeff(k))).collect()).expect("shape")
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows);
        if self.coeffs.is_empty() || o.coeffs.is_empty() {
            return MatPoly { rows: self.rows, cols: o.cols, coeffs: vec![] };
        }
        let n = self.coeffs.len() + o.coeffs.len() - 1;
        let mut out = vec![Mat::zeros(self.rows, o.cols); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        MatPoly::new(self.rows, o.cols, out).expect("shape")
    }

    pub fn left_mul(&self, m: &Mat<S>) -> Self {
        MatPoly::new(m.rows(), self.cols, self.coeffs.iter().map(|c| m.mul(c)).collect()).expect("shape")
    }

    pub fn right_mul(&self, m: &Mat<S>) -> Self {
        MatPoly::new(self.rows, m.cols(), self.coeffs.iter().map(|c| c.mul(m)).collect()).expect("shape")
    }

    pub fn submatrix(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> Self {
        MatPoly::new(nr, nc, self.coeffs.iter().map(|c| c.submatrix(r0, c0, nr, nc)).collect()).expect("shape")
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_symmetric(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_symmetric_exact())
    }

    /// Taylor coefficients at `t0` up to `order` (inclusive).
    pub fn jet(&self, t0: &S, order: usize) -> Vec<Mat<S>> {
        let d = self.coeffs.len();
        let mut pw = vec![S::one()];
        for k in 1..d.max(1) {
            pw.push(pw[k - 1].clone() * t0.clone());
        }
        (0..=order)
            .map(|k| {
                let mut acc = Mat::zeros(self.rows, self.cols);
                for j in k..d {
                    let f = S::from_i64(binom(j, k)) * pw[j - k].clone();
                    acc = acc.add(&self.coeffs[j].scale(&f));
                }
                acc
            })
            .collect()
    }
}

impl MatPoly<Rational> {
    /// Determinant polynomial of a square matrix polynomial by evaluation and interpolation.
    pub fn det_poly(&self) -> Poly {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let deg = n * self.degree();
        let xs: Vec<Rational> = (0..=deg).map(|i| Rational::from_integer((i as i64).into())).collect();
        let ys: Vec<Rational> = xs.iter().map(|x| self.eval(x).det()).collect();
        Poly::interpolate(&xs, &ys)
    }
}

/// Product of truncated matrix power series.
pub fn series_mul<S: Scalar>(a: &[Mat<S>], b: &[Mat<S>], order: usize) -> Vec<Mat<S>> {
    (0..=order)
        .map(|k| {
            let mut acc = Mat::zeros(a[0].rows(), b[0].cols());
            for i in 0..=k {
                if i < a.len() && k - i < b.len() {
                    acc = acc.add(&a[i].mul(&b[k - i]));
                }
            }
            acc
        })
        .collect()
}

/// Inverse of a truncated matrix power series with invertible constant term.
pub fn series_inv<S: Scalar>(a: &[Mat<S>], order: usize) -> Result<Vec<Mat<S>>> {
    let a0inv = a[0].inverse().ok_or(Error::Singular)?;
    let mut out: Vec<Mat<S>> = vec![a0inv.clone()];
    for k in 1..=order {
        let mut acc = Mat::zeros(a[0].rows(), a[0].cols());
        for i in 1..=k {
            if i < a.len() {
                acc = acc.add(&a[i].mul(&out[k - i]));
            }
        }
        out.push(a0inv.mul(&acc).neg());
    }
    Ok(out)
}
