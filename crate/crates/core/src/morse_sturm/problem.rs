//! Trivialized Morse–Sturm data `V″ = R(t)V` with a constant nondegenerate metric `g`.

use crate::error::{Error, Result};
use crate::matrix::Mat;

/// Natural cubic spline through matrix samples, stored as local cubics per knot interval.
#[derive(Clone, Debug, PartialEq)]
pub struct MatSpline {
    knots: Vec<f64>,
    /// `coeffs[i][j]` multiplies `(t − knots[i])ʲ` on `[knots[i], knots[i+1]]`.
    coeffs: Vec<[Mat<f64>; 4]>,
}

impl MatSpline {
    pub fn new(knots: Vec<f64>, values: Vec<Mat<f64>>) -> Result<Self> {
        let m = knots.len();
        if m < 2 || values.len() != m {
            return Err(Error::DimensionMismatch("spline needs at least two samples, one value per knot".into()));
        }
        if knots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::DimensionMismatch("spline knots must be strictly increasing".into()));
        }
        if (knots[0] - 0.0).abs() > 1e-12 || (knots[m - 1] - 1.0).abs() > 1e-12 {
            return Err(Error::DimensionMismatch("spline knots must span [0, 1]".into()));
        }
        let (r, c) = (values[0].rows(), values[0].cols());
        if values.iter().any(|v| v.rows() != r || v.cols() != c) {
            return Err(Error::DimensionMismatch("spline samples of unequal size".into()));
        }
        let h: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();
        // second derivatives with natural end conditions, Thomas algorithm on matrices
        let mut sec = vec![Mat::zeros(r, c); m];
        if m > 2 {
            let k = m - 2;
            let mut diag = vec![0.0; k];
            let mut rhs = vec![Mat::zeros(r, c); k];
            for i in 0..k {
                diag[i] = 2.0 * (h[i] + h[i + 1]);
                let d1 = values[i + 2].sub(&values[i + 1]).scale(&(1.0 / h[i + 1]));
                let d0 = values[i + 1].sub(&values[i]).scale(&(1.0 / h[i]));
                rhs[i] = d1.sub(&d0).scale(&6.0);
            }
            for i in 1..k {
                let w = h[i] / diag[i - 1];
                diag[i] -= w * h[i];
                let prev = rhs[i - 1].scale(&w);
                rhs[i] = rhs[i].sub(&prev);
            }
            sec[k] = rhs[k - 1].scale(&(1.0 / diag[k - 1]));
            for i in (0..k.saturating_sub(1)).rev() {
                sec[i + 1] = rhs[i].sub(&sec[i + 2].scale(&h[i + 1])).scale(&(1.0 / diag[i]));
            }
        }
        let mut coeffs = Vec::with_capacity(m - 1);
        for i in 0..m - 1 {
            let a = values[i].clone();
            let slope = values[i + 1].sub(&values[i]).scale(&(1.0 / h[i]));
            let b = slope.sub(&sec[i].scale(&(h[i] / 3.0)).add(&sec[i + 1].scale(&(h[i] / 6.0))));
            let c2 = sec[i].scale(&0.5);
            let d = sec[i + 1].sub(&sec[i]).scale(&(1.0 / (6.0 * h[i])));
            coeffs.push([a, b, c2, d]);
        }
        Ok(MatSpline { knots, coeffs })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    fn piece(&self, t: f64) -> usize {
        let last = self.coeffs.len() - 1;
        self.knots[1..].iter().position(|&k| t < k).unwrap_or(last).min(last)
    }

    /// Taylor coefficients of the spline at `t`, taken from the piece containing `t` on its left end.
    pub fn taylor(&self, t: f64) -> Vec<Mat<f64>> {
        let i = self.piece(t);
        let x = t - self.knots[i];
        let [a, b, c, d] = &self.coeffs[i];
        let v = a.add(&b.scale(&x)).add(&c.scale(&(x * x))).add(&d.scale(&(x * x * x)));
        let v1 = b.add(&c.scale(&(2.0 * x))).add(&d.scale(&(3.0 * x * x)));
        let v2 = c.add(&d.scale(&(3.0 * x)));
        vec![v, v1, v2, d.clone()]
    }
}

/// The curvature term `R(t)` on `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub enum Curvature {
    Constant(Mat<f64>),
    /// `R(t) = Σ Rⱼ tʲ`.
    Poly(Vec<Mat<f64>>),
    Samples(MatSpline),
}

impl Curvature {
    pub fn is_constant(&self) -> bool {
        match self {
            Curvature::Constant(_) => true,
            Curvature::Poly(c) => c.iter().skip(1).all(|m| m.max_abs() == 0.0),
            Curvature::Samples(_) => false,
        }
    }

    pub fn at(&self, t: f64) -> Mat<f64> {
        self.taylor(t, 0).swap_remove(0)
    }

    /// Taylor coefficients `R(t₀ + h) = Σ Cⱼ hʲ` for `j ≤ order`.
    pub fn taylor(&self, t0: f64, order: usize) -> Vec<Mat<f64>> {
        let n = self.dim();
        let mut out = match self {
            Curvature::Constant(r) => vec![r.clone()],
            Curvature::Poly(c) => {
                let deg = c.len() - 1;
                let mut shifted = Vec::with_capacity(deg + 1);
                for k in 0..=deg {
                    let mut acc = Mat::zeros(n, n);
                    let mut binom = 1.0;
                    for j in k..=deg {
                        if j > k {
                            binom = binom * j as f64 / (j - k) as f64;
                        }
                        acc = acc.add(&c[j].scale(&(binom * t0.powi((j - k) as i32))));
                    }
                    shifted.push(acc);
                }
                shifted
            }
            Curvature::Samples(s) => s.taylor(t0),
        };
        out.resize(order + 1, Mat::zeros(n, n));
        out.truncate(order + 1);
        out
    }

    pub fn dim(&self) -> usize {
        match self {
            Curvature::Constant(r) => r.rows(),
            Curvature::Poly(c) => c[0].rows(),
            Curvature::Samples(s) => s.coeffs[0][0].rows(),
        }
    }

    /// Matrices whose span contains every value of `R`.
    fn generators(&self) -> Vec<Mat<f64>> {
        match self {
            Curvature::Constant(r) => vec![r.clone()],
            Curvature::Poly(c) => c.clone(),
            Curvature::Samples(s) => s.coeffs.iter().flat_map(|c| c.iter().cloned()).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MorseSturmProblem {
    pub n: usize,
    pub g: Mat<f64>,
    pub r: Curvature,
    pub label: String,
}

impl MorseSturmProblem {
    pub fn new(g: Mat<f64>, r: Curvature, label: impl Into<String>) -> Result<Self> {
        let n = g.rows();
        if n == 0 || !g.is_square() {
            return Err(Error::DimensionMismatch("metric must be a nonempty square matrix".into()));
        }
        if g.sub(&g.transpose()).max_abs() > 1e-12 * g.max_abs().max(1.0) {
            return Err(Error::NotSymmetric);
        }
        let sv = g.to_dmatrix().singular_values();
        if sv.min() <= 1e-12 * sv.max().max(1.0) {
            return Err(Error::Singular);
        }
        let gens = r.generators();
        if gens.is_empty() || gens.iter().any(|m| m.rows() != n || m.cols() != n) {
            return Err(Error::DimensionMismatch("curvature size differs from the metric".into()));
        }
        for m in &gens {
            let gr = g.mul(m);
            if gr.sub(&gr.transpose()).max_abs() > 1e-9 * gr.max_abs().max(1.0) {
                return Err(Error::NotGSymmetric);
            }
        }
        Ok(MorseSturmProblem { n, g: g.symmetrized(), r, label: label.into() })
    }

    pub fn constant(g: Mat<f64>, r: Mat<f64>, label: impl Into<String>) -> Result<Self> {
        Self::new(g, Curvature::Constant(r), label)
    }

    /// `‖R‖∞`, the largest operator norm over the samples or a fine grid.
    pub fn sup_norm(&self) -> f64 {
        let grid = (0..=400).map(|i| i as f64 / 400.0);
        let mut m = grid.map(|t| self.r.at(t).norm2()).fold(0.0, f64::max);
        if let Curvature::Samples(s) = &self.r {
            m = s.knots.iter().map(|&t| self.r.at(t).norm2()).fold(m, f64::max);
        }
        m
    }

    pub fn default_m0(&self) -> f64 {
        self.sup_norm() + 1.0
    }

    /// Change of frame `V = T·W`: `g ↦ TᵀgT`, `R ↦ T⁻¹RT`.
    pub fn transformed(&self, t: &Mat<f64>) -> Result<Self> {
        let tinv = t.inverse().ok_or(Error::Singular)?;
        let conj = |m: &Mat<f64>| tinv.mul(m).mul(t);
        let r = match &self.r {
            Curvature::Constant(m) => Curvature::Constant(conj(m)),
            Curvature::Poly(c) => Curvature::Poly(c.iter().map(conj).collect()),
            Curvature::Samples(s) => Curvature::Samples(MatSpline {
                knots: s.knots.clone(),
                coeffs: s.coeffs.iter().map(|c| [conj(&c[0]), conj(&c[1]), conj(&c[2]), conj(&c[3])]).collect(),
            }),
        };
        Self::new(t.transpose().mul(&self.g).mul(t), r, self.label.clone())
    }
}
