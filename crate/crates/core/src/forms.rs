//! Symmetric bilinear forms: inertia, kernels, restrictions, pullbacks and relative indices.

use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::scalar::{float_tol, Scalar};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Inertia {
    pub n_plus: usize,
    pub n_minus: usize,
    pub n_zero: usize,
    pub signature: i64,
    pub ext_coindex: usize,
    pub ext_index: usize,
}

impl Inertia {
    pub fn new(n_plus: usize, n_minus: usize, n_zero: usize) -> Self {
        Inertia {
            n_plus,
            n_minus,
            n_zero,
            signature: n_plus as i64 - n_minus as i64,
            ext_coindex: n_plus + n_zero,
            ext_index: n_minus + n_zero,
        }
    }

    pub fn dim(&self) -> usize {
        self.n_plus + self.n_minus + self.n_zero
    }

    /// Inertia of the negated form.
    pub fn negated(&self) -> Self {
        Inertia::new(self.n_minus, self.n_plus, self.n_zero)
    }

    fn check(&self, dim: usize) -> Result<()> {
        if self.dim() != dim
            || self.signature != self.n_plus as i64 - self.n_minus as i64
            || self.ext_coindex != self.n_plus + self.n_zero
            || self.ext_index != self.n_minus + self.n_zero
        {
            return Err(Error::InvariantViolation(format!("inconsistent inertia {self:?} for dim {dim}")));
        }
        Ok(())
    }
}

/// A symmetric bilinear form on `S^dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymForm<S> {
    mat: Mat<S>,
}

impl<S: Scalar> SymForm<S> {
    /// Exact fields require exact symmetry; floats are symmetrized if the asymmetry is
    /// within tolerance.
    pub fn new(mat: Mat<S>) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::DimensionMismatch(format!("{}x{} form", mat.rows(), mat.cols())));
        }
        if S::EXACT {
            if !mat.is_symmetric_exact() {
                return Err(Error::NotSymmetric);
            }
            Ok(SymForm { mat })
        } else {
            let asym = mat.sub(&mat.transpose()).max_abs();
            if asym > 1e3 * float_tol(mat.max_abs()) {
                return Err(Error::NotSymmetric);
            }
            Ok(SymForm { mat: mat.symmetrized() })
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn mat(&self) -> &Mat<S> {
        &self.mat
    }

    pub fn into_mat(self) -> Mat<S> {
        self.mat
    }

    pub fn eval(&self, u: &[S], v: &[S]) -> S {
        let mv = self.mat.mul(&Mat::column_vector(v));
        Mat::dot(u, &mv.col(0))
    }

    pub fn neg(&self) -> Self {
        SymForm { mat: self.mat.neg() }
    }
}

/// A subspace given by a full-column-rank basis matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace<S> {
    basis: Mat<S>,
}

impl<S: Scalar> Subspace<S> {
    pub fn new(basis: Mat<S>) -> Result<Self> {
        if basis.cols() > 0 && S::rank(&basis)? != basis.cols() {
            return Err(Error::DimensionMismatch("subspace basis is rank deficient".into()));
        }
        Ok(Subspace { basis })
    }

    /// Subspace spanned by the columns of `m` (dependent columns dropped).
    pub fn span(m: &Mat<S>) -> Result<Self> {
        let x = S::colspace_selector(m)?;
        Ok(Subspace { basis: m.mul(&x) })
    }

    pub fn zero(ambient: usize) -> Self {
        Subspace { basis: Mat::zeros(ambient, 0) }
    }

    pub fn full(ambient: usize) -> Self {
        Subspace { basis: Mat::identity(ambient) }
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn basis(&self) -> &Mat<S> {
        &self.basis
    }

    pub fn contains(&self, other: &Subspace<S>) -> Result<bool> {
        Ok(S::rank(&self.basis.hstack(&other.basis))? == self.dim())
    }

    pub fn same_as(&self, other: &Subspace<S>) -> Result<bool> {
        Ok(self.dim() == other.dim() && self.contains(other)?)
    }

    /// Euclidean orthogonal complement.
    pub fn orthogonal_complement(&self) -> Result<Self> {
        if self.dim() == 0 {
            return Ok(Subspace::full(self.ambient_dim()));
        }
        Ok(Subspace { basis: S::nullspace(&self.basis.transpose())? })
    }
}

pub fn inertia<S: Scalar>(form: &SymForm<S>) -> Result<Inertia> {
    let i = S::inertia_of(form.mat())?;
    i.check(form.dim())?;
    Ok(i)
}

/// Inertia of a square matrix assumed symmetric.
pub fn inertia_mat<S: Scalar>(m: &Mat<S>) -> Result<Inertia> {
    inertia(&SymForm::new(m.clone())?)
}

pub fn kernel_basis<S: Scalar>(form: &SymForm<S>) -> Result<Subspace<S>> {
    let k = S::nullspace(form.mat())?;
    Ok(Subspace { basis: k })
}

pub fn restrict<S: Scalar>(form: &SymForm<S>, sub: &Subspace<S>) -> Result<SymForm<S>> {
    if sub.ambient_dim() != form.dim() {
        return Err(Error::DimensionMismatch(format!(
            "restricting a {}-dim form to a subspace of {}",
            form.dim(),
            sub.ambient_dim()
        )));
    }
    pullback(form, sub.basis())
}

pub fn pullback<S: Scalar>(form: &SymForm<S>, map: &Mat<S>) -> Result<SymForm<S>> {
    if map.rows() != form.dim() {
        return Err(Error::DimensionMismatch(format!(
            "pullback of a {}-dim form by a map with {} rows",
            form.dim(),
            map.rows()
        )));
    }
    SymForm::new(map.transpose().mul(form.mat()).mul(map))
}

/// `dim(W^⊥ ∩ V) − dim(W ∩ V^⊥)` for the standard inner product.
pub fn relative_dimension<S: Scalar>(v: &Subspace<S>, w: &Subspace<S>) -> Result<i64> {
    if v.ambient_dim() != w.ambient_dim() {
        return Err(Error::DimensionMismatch("subspaces in different ambient spaces".into()));
    }
    let cross = w.basis().transpose().mul(v.basis());
    let r = if cross.rows() == 0 || cross.cols() == 0 { 0 } else { S::rank(&cross)? };
    let wperp_cap_v = v.dim() - r;
    let w_cap_vperp = w.dim() - r;
    Ok(wperp_cap_v as i64 - w_cap_vperp as i64)
}

/// A maximal negative subspace of the form.
pub fn negative_space<S: Scalar>(form: &SymForm<S>) -> Result<Subspace<S>> {
    Ok(Subspace { basis: S::negative_subspace(form.mat())? })
}

/// Relative index `dim_W(V⁻(B))`.
pub fn relative_index<S: Scalar>(form: &SymForm<S>, w: &Subspace<S>) -> Result<i64> {
    relative_dimension(&negative_space(form)?, w)
}

/// `n⁻(B|W^⊥_B) − n⁺(B|W)` with `W^⊥_B = {x : B(x, w) = 0 ∀ w ∈ W}`.
///
/// Equals `relative_index` when `B` is nondegenerate.
pub fn relative_index_via_orthogonal<S: Scalar>(form: &SymForm<S>, w: &Subspace<S>) -> Result<i64> {
    let n = form.dim();
    let perp = if w.dim() == 0 {
        Subspace::full(n)
    } else {
        Subspace::new(S::nullspace(&w.basis().transpose().mul(form.mat()))?)?
    };
    let neg = inertia(&restrict(form, &perp)?)?.n_minus as i64;
    let pos = inertia(&restrict(form, w)?)?.n_plus as i64;
    Ok(neg - pos)
}
