//! Partial signatures of analytic paths of symmetric forms at an isolated degeneracy.
//!
//! `W_k` is the projection onto the first block of the kernel of the block-Toeplitz
//! system `Σ_{j≤r} L_{r-j} u_j = 0, r < k`; `B_k(u₀, v₀) = Σ_{j<k} ⟨L_{k-j} u_j, v₀⟩`.

pub mod affine;
pub mod eigencurve;
pub mod flow;

use crate::error::{Error, Result};
use crate::forms::{inertia, Inertia, Subspace, SymForm};
use crate::matpoly::MatPoly;
use crate::matrix::Mat;
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};

pub const DEFAULT_MAX_ORDER: usize = 8;

/// Jet `L₀ … L_m` of a symmetric path at `t0`, `L_k` the k-th Taylor coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct TaylorPath<S> {
    t0: S,
    coeffs: Vec<Mat<S>>,
}

impl<S: Scalar> TaylorPath<S> {
    pub fn new(t0: S, coeffs: Vec<Mat<S>>) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(Error::OrderExceeded { needed: 1, available: coeffs.len().saturating_sub(1) });
        }
        let n = coeffs[0].rows();
        let mut out = Vec::with_capacity(coeffs.len());
        for c in coeffs {
            if c.rows() != n || c.cols() != n {
                return Err(Error::DimensionMismatch("jet coefficients of unequal size".into()));
            }
            out.push(SymForm::new(c)?.into_mat());
        }
        Ok(TaylorPath { t0, coeffs: out })
    }

    pub fn t0(&self) -> &S {
        &self.t0
    }

    pub fn dim(&self) -> usize {
        self.coeffs[0].rows()
    }

    pub fn max_order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Mat<S>] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Mat<S> {
        self.coeffs.get(k).cloned().unwrap_or_else(|| Mat::zeros(self.dim(), self.dim()))
    }

    /// Same jet with zero coefficients appended up to `order`.
    pub fn padded(&self, order: usize) -> Self {
        let mut c = self.coeffs.clone();
        while c.len() <= order {
            c.push(Mat::zeros(self.dim(), self.dim()));
        }
        TaylorPath { t0: self.t0.clone(), coeffs: c }
    }

    pub fn neg(&self) -> Self {
        TaylorPath { t0: self.t0.clone(), coeffs: self.coeffs.iter().map(|c| c.neg()).collect() }
    }
}

/// Entrywise polynomial symmetric path on `[a, b]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyPath<S> {
    pub a: S,
    pub b: S,
    poly: MatPoly<S>,
}

impl<S: Scalar> PolyPath<S> {
    pub fn new(a: S, b: S, poly: MatPoly<S>) -> Result<Self> {
        if poly.rows() != poly.cols() {
            return Err(Error::DimensionMismatch("polynomial path must be square".into()));
        }
        if (b.clone() - a.clone()).signum() < 0 {
            return Err(Error::DimensionMismatch("interval endpoints out of order".into()));
        }
        let poly = if S::EXACT {
            if !poly.is_symmetric() {
                return Err(Error::NotSymmetric);
            }
            poly
        } else {
            let c: Result<Vec<Mat<S>>> =
                poly.coeffs().iter().map(|m| SymForm::new(m.clone()).map(|f| f.into_mat())).collect();
            MatPoly::new(poly.rows(), poly.cols(), c?)?
        };
        Ok(PolyPath { a, b, poly })
    }

    pub fn poly(&self) -> &MatPoly<S> {
        &self.poly
    }

    pub fn dim(&self) -> usize {
        self.poly.rows()
    }

    pub fn eval(&self, t: &S) -> Mat<S> {
        self.poly.eval(t)
    }
}

/// Exact Taylor coefficients of a polynomial path at `t0`.
pub fn jet_at<S: Scalar>(path: &PolyPath<S>, t0: &S, order: usize) -> Result<TaylorPath<S>> {
    if (t0.clone() - path.a.clone()).signum() < 0 || (path.b.clone() - t0.clone()).signum() < 0 {
        return Err(Error::DimensionMismatch("expansion point outside the interval".into()));
    }
    TaylorPath::new(t0.clone(), path.poly.jet(t0, order.max(1)))
}

/// Vectors `u₀ … u_k` of a generalized Jordan chain.
#[derive(Clone, Debug, PartialEq)]
pub struct JordanChain<S> {
    pub vectors: Vec<Vec<S>>,
}

impl<S: Scalar> JordanChain<S> {
    pub fn new(vectors: Vec<Vec<S>>) -> Self {
        JordanChain { vectors }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Residuals `Σ_{j≤r} L_{r-j} u_j` for `r = 0 … k`.
    pub fn residuals(&self, path: &TaylorPath<S>) -> Vec<Vec<S>> {
        (0..self.vectors.len())
            .map(|r| {
                let mut acc = vec![S::zero(); path.dim()];
                for j in 0..=r {
                    let v = path.coeff(r - j).mul(&Mat::column_vector(&self.vectors[j])).col(0);
                    for (a, b) in acc.iter_mut().zip(v) {
                        *a = a.clone() + b;
                    }
                }
                acc
            })
            .collect()
    }

    pub fn is_valid(&self, path: &TaylorPath<S>) -> Result<bool> {
        let res = self.residuals(path);
        if S::EXACT {
            return Ok(res.iter().flatten().all(|x| x.is_zero()));
        }
        let scale = path.coeffs.iter().map(|c| c.max_abs()).fold(1.0, f64::max);
        let vs = self.vectors.iter().flatten().map(|x| x.to_f64().abs()).fold(1.0, f64::max);
        Ok(res.iter().flatten().all(|x| x.to_f64().abs() <= 1e-7 * scale * vs))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ChainExtension<S> {
    /// A minimum-norm `u_{k+1}` extending the chain.
    Extendible(Vec<S>),
    /// The residual `Σ_{j≤k} L_{k+1-j} u_j`, not in the image of `L₀`.
    Obstructed(Vec<S>),
}

pub fn chain_extend<S: Scalar>(path: &TaylorPath<S>, chain: &JordanChain<S>) -> Result<ChainExtension<S>> {
    if chain.is_empty() {
        return Err(Error::DimensionMismatch("empty chain".into()));
    }
    if !chain.is_valid(path)? {
        return Err(Error::InvariantViolation("input chain does not solve the Jordan system".into()));
    }
    let k = chain.len() - 1;
    if k + 1 > path.max_order() {
        return Err(Error::OrderExceeded { needed: k + 1, available: path.max_order() });
    }
    let mut r = vec![S::zero(); path.dim()];
    for j in 0..=k {
        let v = path.coeff(k + 1 - j).mul(&Mat::column_vector(&chain.vectors[j])).col(0);
        for (a, b) in r.iter_mut().zip(v) {
            *a = a.clone() + b;
        }
    }
    let rhs = Mat::column_vector(&r).neg();
    match S::solve_min_norm(&path.coeff(0), &rhs)? {
        Some(x) => Ok(ChainExtension::Extendible(x.col(0))),
        None => Ok(ChainExtension::Obstructed(r)),
    }
}

fn toeplitz<S: Scalar>(path: &TaylorPath<S>, k: usize) -> Mat<S> {
    let n = path.dim();
    let mut t = Mat::zeros(k * n, k * n);
    for r in 0..k {
        for j in 0..=r {
            t.set_block(r * n, j * n, &path.coeff(r - j));
        }
    }
    t
}

/// A basis of `W_k` together with a Jordan chain of length `k` for each basis vector.
#[derive(Clone, Debug)]
pub struct ChainBasis<S> {
    pub k: usize,
    /// `n × r` basis of `W_k`.
    pub w: Mat<S>,
    /// `chains[j]` holds `u_j` for every basis vector as columns.
    pub chains: Vec<Mat<S>>,
}

pub fn chain_basis<S: Scalar>(path: &TaylorPath<S>, k: usize) -> Result<ChainBasis<S>> {
    if k == 0 {
        return Err(Error::DimensionMismatch("k must be at least 1".into()));
    }
    if k - 1 > path.max_order() {
        return Err(Error::OrderExceeded { needed: k - 1, available: path.max_order() });
    }
    let n = path.dim();
    let nul = S::nullspace(&toeplitz(path, k))?;
    let top = nul.submatrix(0, 0, n, nul.cols());
    let x = S::colspace_selector(&top)?;
    let c = nul.mul(&x);
    let chains = (0..k).map(|j| c.submatrix(j * n, 0, n, c.cols())).collect();
    Ok(ChainBasis { k, w: top.mul(&x), chains })
}

pub fn wk_space<S: Scalar>(path: &TaylorPath<S>, k: usize) -> Result<Subspace<S>> {
    Subspace::new(chain_basis(path, k)?.w)
}

fn bk_matrix<S: Scalar>(path: &TaylorPath<S>, k: usize, chains: &[Mat<S>], w: &Mat<S>) -> Mat<S> {
    let r = w.cols();
    let mut g = Mat::zeros(r, r);
    for (j, u) in chains.iter().enumerate().take(k) {
        g = g.add(&u.transpose().mul(&path.coeff(k - j)).mul(w));
    }
    g
}

/// Chains shifted by a chain of length `k - 1` starting one slot later; still valid.
fn shifted_chains<S: Scalar>(path: &TaylorPath<S>, cb: &ChainBasis<S>) -> Result<Option<Vec<Mat<S>>>> {
    if cb.k < 2 || cb.w.cols() == 0 {
        return Ok(None);
    }
    let n = path.dim();
    let nul = S::nullspace(&toeplitz(path, cb.k - 1))?;
    if nul.cols() == 0 {
        return Ok(None);
    }
    let xi = nul.submatrix(0, 0, nul.rows(), 1);
    let r = cb.w.cols();
    let mut out = cb.chains.clone();
    for j in 1..cb.k {
        let piece = xi.submatrix((j - 1) * n, 0, n, 1);
        let row = Mat::from_fn(1, r, |_, c| S::from_i64(c as i64 + 1));
        out[j] = out[j].add(&piece.mul(&row));
    }
    Ok(Some(out))
}

/// `W_k` and the form `B_k` in the returned basis.
pub fn bk_form<S: Scalar>(path: &TaylorPath<S>, k: usize) -> Result<(Subspace<S>, SymForm<S>)> {
    if k > path.max_order() {
        return Err(Error::OrderExceeded { needed: k, available: path.max_order() });
    }
    let cb = chain_basis(path, k)?;
    let g = bk_matrix(path, k, &cb.chains, &cb.w);
    if S::EXACT && !g.is_symmetric_exact() {
        return Err(Error::InvariantViolation(format!("B_{k} not symmetric")));
    }
    if let Some(alt) = shifted_chains(path, &cb)? {
        let g2 = bk_matrix(path, k, &alt, &cb.w);
        let same = if S::EXACT {
            g2 == g
        } else {
            g2.sub(&g).max_abs() <= 1e-6 * g.max_abs().max(1.0)
        };
        if !same {
            return Err(Error::InvariantViolation(format!("B_{k} depends on the chain choice")));
        }
    }
    Ok((Subspace::new(cb.w)?, SymForm::new(g)?))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub k: usize,
    pub dim_w: usize,
    pub inertia: Inertia,
}

/// Per-order dimensions of `W_k` and inertia of `B_k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignatureTable {
    pub n0: usize,
    pub k_max: usize,
    pub levels: Vec<LevelSummary>,
}

impl SignatureTable {
    pub fn empty() -> Self {
        SignatureTable { n0: 0, k_max: 0, levels: vec![] }
    }

    pub fn sigma(&self, k: usize) -> i64 {
        self.levels.get(k.wrapping_sub(1)).map_or(0, |l| l.inertia.signature)
    }

    pub fn sigmas(&self) -> Vec<i64> {
        self.levels.iter().map(|l| l.inertia.signature).collect()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.dim_w).collect()
    }

    pub fn odd_sigma_sum(&self) -> i64 {
        self.levels.iter().filter(|l| l.k % 2 == 1).map(|l| l.inertia.signature).sum()
    }

    /// Checks `dim W_{k+1} = n₀(B_k)`, `Σ(n⁺_k + n⁻_k) = n₀` and `dim W₁ = n₀`.
    pub fn check_invariants(&self) -> Result<()> {
        if self.levels.is_empty() {
            return if self.n0 == 0 {
                Ok(())
            } else {
                Err(Error::InvariantViolation("empty table with nonzero degeneracy".into()))
            };
        }
        if self.levels[0].dim_w != self.n0 {
            return Err(Error::InvariantViolation("dim W_1 differs from dim Ker L_0".into()));
        }
        for (i, l) in self.levels.iter().enumerate() {
            let next = self.levels.get(i + 1).map_or(0, |x| x.dim_w);
            if l.inertia.n_zero != next {
                return Err(Error::InvariantViolation(format!("dim W_{} != n0(B_{})", l.k + 1, l.k)));
            }
        }
        let s: usize = self.levels.iter().map(|l| l.inertia.n_plus + l.inertia.n_minus).sum();
        if s != self.n0 {
            return Err(Error::InvariantViolation("sum of partial indices differs from dim Ker L_0".into()));
        }
        Ok(())
    }
}

/// One order of the partial-signature hierarchy with its concrete data.
#[derive(Clone, Debug)]
pub struct Level<S> {
    pub k: usize,
    pub w: Subspace<S>,
    pub form: SymForm<S>,
    pub inertia: Inertia,
}

pub fn partial_signature_data<S: Scalar>(path: &TaylorPath<S>) -> Result<Vec<Level<S>>> {
    let mut levels: Vec<Level<S>> = Vec::new();
    let mut k = 1;
    loop {
        let w = wk_space(path, k)?;
        if let Some(prev) = levels.last() {
            if w.dim() != prev.inertia.n_zero {
                return Err(Error::InvariantViolation(format!("dim W_{k} != n0(B_{})", k - 1)));
            }
            if w.dim() > 0 && !prev.w.contains(&w)? {
                return Err(Error::InvariantViolation(format!("W_{k} not contained in W_{}", k - 1)));
            }
        }
        if w.dim() == 0 {
            break;
        }
        if k > path.max_order() {
            return Err(Error::NonIsolated(path.max_order()));
        }
        let (w, form) = bk_form(path, k)?;
        let i = inertia(&form)?;
        levels.push(Level { k, w, form, inertia: i });
        k += 1;
    }
    Ok(levels)
}

pub fn partial_signatures<S: Scalar>(path: &TaylorPath<S>) -> Result<SignatureTable> {
    let data = partial_signature_data(path)?;
    let table = SignatureTable {
        n0: data.first().map_or(0, |l| l.w.dim()),
        k_max: data.len(),
        levels: data.iter().map(|l| LevelSummary { k: l.k, dim_w: l.w.dim(), inertia: l.inertia }).collect(),
    };
    table.check_invariants()?;
    Ok(table)
}

/// Spectral flow and coindex jumps at an isolated degeneracy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JumpRecord {
    /// `n̄⁺(t₀) − n̄⁺(t₀−ε)`
    pub sf_left: i64,
    /// `n̄⁺(t₀+ε) − n̄⁺(t₀)`
    pub sf_right: i64,
    pub sf_across: i64,
    /// `n⁺(t₀) − n⁺(t₀−ε)`
    pub coindex_left: i64,
    /// `n⁺(t₀+ε) − n⁺(t₀)`
    pub coindex_right: i64,
    pub coindex_across: i64,
}

pub fn jump_decomposition(table: &SignatureTable) -> JumpRecord {
    let mut left = 0i64;
    let mut right = 0i64;
    let mut across = 0i64;
    let mut cleft = 0i64;
    let mut cright = 0i64;
    for l in &table.levels {
        let (p, m) = (l.inertia.n_plus as i64, l.inertia.n_minus as i64);
        if l.k % 2 == 1 {
            left += p;
            across += p - m;
            cleft -= m;
        } else {
            left += m;
            cleft -= p;
        }
        right -= m;
        cright += p;
    }
    JumpRecord {
        sf_left: left,
        sf_right: right,
        sf_across: across,
        coindex_left: cleft,
        coindex_right: cright,
        coindex_across: cleft + cright,
    }
}
