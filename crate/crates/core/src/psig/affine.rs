//! Closed forms at a crossing of an affine path `λ ↦ A + λK` and of `λ ↦ gT − λg`.

use super::{jump_decomposition, partial_signature_data, JumpRecord, Level, SignatureTable, TaylorPath};
use crate::error::{Error, Result};
use crate::forms::{inertia_mat, Inertia, Subspace};
use crate::matrix::Mat;
use crate::scalar::{Rational, Scalar};
use rand::Rng;
use serde::Serialize;

/// `∪_j Ker Mʲ`, iterated until the dimension stabilizes.
pub fn power_kernel<S: Scalar>(m: &Mat<S>) -> Result<Subspace<S>> {
    let n = m.rows();
    let mut p = Mat::identity(n);
    let mut last: Option<Mat<S>> = None;
    for _ in 0..n.max(1) {
        p = p.mul(m);
        let k = S::nullspace(&p)?;
        if last.as_ref().is_some_and(|l| l.cols() == k.cols()) {
            return Subspace::new(k);
        }
        last = Some(k);
    }
    Subspace::new(last.unwrap_or_else(|| Mat::zeros(n, 0)))
}

fn table_of<S: Scalar>(path: &TaylorPath<S>) -> Result<(SignatureTable, Vec<Level<S>>)> {
    let data = partial_signature_data(path)?;
    let table = SignatureTable {
        n0: data.first().map_or(0, |l| l.w.dim()),
        k_max: data.len(),
        levels: data
            .iter()
            .map(|l| super::LevelSummary { k: l.k, dim_w: l.w.dim(), inertia: l.inertia })
            .collect(),
    };
    table.check_invariants()?;
    Ok((table, data))
}

fn restricted<S: Scalar>(m: &Mat<S>, h: &Subspace<S>) -> Result<Inertia> {
    let b = h.basis();
    inertia_mat(&b.transpose().mul(m).mul(b))
}

fn jumps_match(a: &JumpRecord, left: i64, right: i64, across: i64) -> bool {
    a.sf_left == left && a.sf_right == right && a.sf_across == across
}

#[derive(Clone, Debug, Serialize)]
pub struct AffineCrossing {
    pub h_dim: usize,
    /// Inertia of `⟨A·,·⟩` on the generalized eigenspace.
    pub b1: Inertia,
    /// Inertia of `⟨(A + λ₀K)·,·⟩` on the generalized eigenspace.
    pub b2: Inertia,
    pub sf_left: i64,
    pub sf_right: i64,
    pub sf_across: i64,
    pub table: SignatureTable,
}

/// Crossing of `λ ↦ A + λK` at `λ₀ ≠ 0`, where `λ₀⁻¹` is an eigenvalue of `−A⁻¹K`.
pub fn affine_crossing<S: Scalar>(a: &Mat<S>, k: &Mat<S>, lambda0: &S) -> Result<AffineCrossing> {
    let n = a.rows();
    if !a.is_square() || k.rows() != n || k.cols() != n {
        return Err(Error::DimensionMismatch("affine path coefficients".into()));
    }
    let ainv = S::inverse(a).ok_or(Error::Singular)?;
    let linv = lambda0.inv().ok_or(Error::NotAnEigenvalue)?;
    let m = ainv.mul(k).add(&Mat::identity(n).scale(&linv));
    let h = power_kernel(&m)?;
    if h.dim() == 0 {
        return Err(Error::NotAnEigenvalue);
    }
    let at = a.add(&k.scale(lambda0));
    let b1 = restricted(a, &h)?;
    let b2 = restricted(&at, &h)?;
    if b1.n_zero != 0 {
        return Err(Error::InvariantViolation("⟨A·,·⟩ degenerate on the generalized eigenspace".into()));
    }
    let (p1, m1, s1) = (b1.n_plus as i64, b1.n_minus as i64, b1.signature);
    let e2 = b2.ext_coindex as i64;
    let (sf_left, sf_right, sf_across) =
        if lambda0.signum() > 0 { (e2 - p1, m1 - e2, -s1) } else { (e2 - m1, p1 - e2, s1) };
    let path = TaylorPath::new(lambda0.clone(), vec![at, k.clone()])?.padded(n + 1);
    let (table, _) = table_of(&path)?;
    if !jumps_match(&jump_decomposition(&table), sf_left, sf_right, sf_across) {
        return Err(Error::InvariantViolation("affine closed form disagrees with the partial signatures".into()));
    }
    Ok(AffineCrossing { h_dim: h.dim(), b1, b2, sf_left, sf_right, sf_across, table })
}

#[derive(Clone, Debug, Serialize)]
pub struct GSymCrossing {
    pub h_dim: usize,
    pub sf_left: i64,
    pub sf_right: i64,
    pub sf_across: i64,
    pub table: SignatureTable,
}

/// Crossing of `λ ↦ gT − λg` at `λ = 0` for a `g`-symmetric `T`.
pub fn gsym_crossing<S: Scalar>(g: &Mat<S>, t: &Mat<S>) -> Result<GSymCrossing> {
    check_gsym(g, t)?;
    let gt = g.mul(t);
    let h = power_kernel(t)?;
    let gi = restricted(g, &h)?;
    let gti = restricted(&gt, &h)?;
    let e = gti.ext_coindex as i64;
    let (sf_left, sf_right, sf_across) = (e - gi.n_plus as i64, gi.n_minus as i64 - e, -gi.signature);
    let path = TaylorPath::new(S::zero(), vec![gt, g.neg()])?.padded(g.rows() + 1);
    let (table, _) = table_of(&path)?;
    if !jumps_match(&jump_decomposition(&table), sf_left, sf_right, sf_across) {
        return Err(Error::InvariantViolation("g-symmetric closed form disagrees with the partial signatures".into()));
    }
    Ok(GSymCrossing { h_dim: h.dim(), sf_left, sf_right, sf_across, table })
}

fn check_gsym<S: Scalar>(g: &Mat<S>, t: &Mat<S>) -> Result<()> {
    let n = g.rows();
    if !g.is_square() || t.rows() != n || t.cols() != n {
        return Err(Error::DimensionMismatch("metric and endomorphism sizes".into()));
    }
    if inertia_mat(g)?.n_zero != 0 {
        return Err(Error::Singular);
    }
    let gt = g.mul(t);
    let sym = if S::EXACT {
        gt.is_symmetric_exact()
    } else {
        gt.sub(&gt.transpose()).max_abs() <= 1e-9 * gt.max_abs().max(1.0)
    };
    if !sym {
        return Err(Error::NotGSymmetric);
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct NilpotentReport {
    pub table: SignatureTable,
    /// Inertia of the displayed closed form `g(c, b)` with `a = T^{k−1}c`, per order.
    pub displayed: Vec<Inertia>,
    /// True when every displayed form is the negative of the chain-based `B_k`.
    pub displayed_is_negated: bool,
    /// `(lhs, rhs)` of the three spectral identities.
    pub identities: [(i64, i64); 3],
}

/// Partial signatures of `λ ↦ gT − λg` at `0` for nilpotent `g`-symmetric `T`.
pub fn nilpotent_block_signatures<S: Scalar>(g: &Mat<S>, t: &Mat<S>) -> Result<NilpotentReport> {
    check_gsym(g, t)?;
    let n = g.rows();
    if !t.pow(n.max(1)).is_zero() && (S::EXACT || t.pow(n.max(1)).max_abs() > 1e-9) {
        return Err(Error::NotNilpotent);
    }
    let gt = g.mul(t);
    let path = TaylorPath::new(S::zero(), vec![gt.clone(), g.neg()])?.padded(n + 1);
    let (table, data) = table_of(&path)?;
    let mut displayed = Vec::new();
    let mut negated = true;
    for lvl in &data {
        let w = &lvl.w;
        let k = lvl.k;
        let tk = t.pow(k);
        let expected = Subspace::span(&t.pow(k - 1).mul(&S::nullspace(&tk)?))?;
        if !expected.same_as(w)? {
            return Err(Error::InvariantViolation(format!("W_{k} differs from T^(k-1)(Ker T^k)")));
        }
        let c = S::solve_min_norm(&t.pow(k - 1), w.basis())?
            .ok_or_else(|| Error::InvariantViolation(format!("W_{k} not in the image of T^(k-1)")))?;
        let d = c.transpose().mul(g).mul(w.basis());
        let same = if S::EXACT {
            d.add(lvl.form.mat()).is_zero()
        } else {
            d.add(lvl.form.mat()).max_abs() <= 1e-7 * d.max_abs().max(1.0)
        };
        negated &= same;
        displayed.push(inertia_mat(&d.symmetrized())?);
    }
    let gi = inertia_mat(g)?;
    let gti = inertia_mat(&gt)?;
    let mut odd_even = 0i64;
    let mut plus = 0i64;
    for l in &table.levels {
        let i = l.inertia;
        odd_even += if l.k % 2 == 1 { i.n_minus as i64 } else { i.n_plus as i64 };
        plus += i.n_plus as i64;
    }
    let identities = [
        (odd_even, gti.ext_index as i64 - gi.n_minus as i64),
        (plus, gti.ext_index as i64 - gi.n_plus as i64),
        (table.odd_sigma_sum(), -gi.signature),
    ];
    if identities.iter().any(|(l, r)| l != r) {
        return Err(Error::InvariantViolation(format!("nilpotent spectral identities fail: {identities:?}")));
    }
    Ok(NilpotentReport { table, displayed, displayed_is_negated: negated, identities })
}

/// Random `g`-symmetric nilpotent pair: canonical blocks `(εE_m, N_m)` moved by a random congruence.
pub fn random_gsym_nilpotent<R: Rng + ?Sized>(rng: &mut R, blocks: &[(usize, i64)]) -> (Mat<Rational>, Mat<Rational>) {
    let n: usize = blocks.iter().map(|b| b.0).sum();
    let mut g = Mat::<Rational>::zeros(n, n);
    let mut t = Mat::<Rational>::zeros(n, n);
    let mut off = 0;
    for &(m, eps) in blocks {
        for i in 0..m {
            g[(off + i, off + m - 1 - i)] = Rational::from_i64(eps);
            if i + 1 < m {
                t[(off + i, off + i + 1)] = Rational::from_i64(1);
            }
        }
        off += m;
    }
    let mut lower = Mat::<Rational>::identity(n);
    let mut upper = Mat::<Rational>::identity(n);
    for i in 0..n {
        for j in 0..i {
            lower[(i, j)] = Rational::from_i64(rng.gen_range(-2..=2));
            upper[(j, i)] = Rational::from_i64(rng.gen_range(-2..=2));
        }
    }
    let p = lower.mul(&upper);
    let pinv = p.inverse().expect("unimodular");
    (p.transpose().mul(&g).mul(&p), pinv.mul(&t).mul(&p))
}
