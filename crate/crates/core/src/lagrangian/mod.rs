//! Symplectic spaces, Lagrangian frames, charts of the Lagrangian Grassmannian and
//! the `L₀`-Maslov index of sampled and polynomial Lagrangian paths.

pub mod analytic;
pub mod sampled;

use crate::error::{Error, Result};
use crate::forms::{inertia, Subspace, SymForm};
use crate::linalg::{orthonormal_basis, sigma_min};
use crate::matrix::Mat;
use crate::scalar::Scalar;
use rand::Rng;

pub use analytic::{maslov_analytic, AnalyticPath, AnalyticReport};
pub use sampled::{maslov_continuous, partition, MaslovReport, SampledPath, Segment};

/// Which inertia count the Maslov jump rule uses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// `n̄⁺ = n⁺ + n₀`
    #[default]
    ExtendedCoindex,
    /// `n⁺`
    Coindex,
}

impl Convention {
    pub fn count(&self, i: &crate::forms::Inertia) -> i64 {
        match self {
            Convention::ExtendedCoindex => i.ext_coindex as i64,
            Convention::Coindex => i.n_plus as i64,
        }
    }
}

/// Knobs shared by the Maslov routines.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaslovOptions {
    pub seed: u64,
    pub convention: Convention,
    /// Minimal transversality margin for float charts.
    pub tau: f64,
    /// Maximal number of segment bisections.
    pub max_depth: usize,
}

impl Default for MaslovOptions {
    fn default() -> Self {
        MaslovOptions { seed: 0x5eed, convention: Convention::ExtendedCoindex, tau: 1e-6, max_depth: 40 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticSpace<S> {
    omega: Mat<S>,
}

impl<S: Scalar> SymplecticSpace<S> {
    pub fn new(omega: Mat<S>) -> Result<Self> {
        if !omega.is_square() || omega.rows() % 2 != 0 || omega.rows() == 0 {
            return Err(Error::DimensionMismatch("symplectic form must be square of even size".into()));
        }
        let asym = omega.add(&omega.transpose()).max_abs();
        let skew = if S::EXACT { asym == 0.0 && omega.add(&omega.transpose()).is_zero() } else { asym <= 1e-12 * omega.max_abs().max(1.0) };
        if !skew {
            return Err(Error::NotSymplectic(asym));
        }
        if S::rank(&omega)? != omega.rows() {
            return Err(Error::NotSymplectic(0.0));
        }
        Ok(SymplecticSpace { omega })
    }

    /// `ω₀ = [[0, I], [−I, 0]]`
    pub fn standard(n: usize) -> Self {
        let g = Mat::identity(n);
        Self::from_metric(&g).expect("identity metric")
    }

    /// `ω_g = [[0, g], [−g, 0]]`
    pub fn from_metric(g: &Mat<S>) -> Result<Self> {
        let n = g.rows();
        let mut o = Mat::zeros(2 * n, 2 * n);
        o.set_block(0, n, g);
        o.set_block(n, 0, &g.neg());
        Self::new(o)
    }

    pub fn dim(&self) -> usize {
        self.omega.rows()
    }

    pub fn n(&self) -> usize {
        self.omega.rows() / 2
    }

    pub fn omega(&self) -> &Mat<S> {
        &self.omega
    }

    pub fn negated(&self) -> Self {
        SymplecticSpace { omega: self.omega.neg() }
    }

    pub fn direct_sum(&self, o: &Self) -> Self {
        SymplecticSpace { omega: self.omega.block_diag(&o.omega) }
    }

    /// `uᵀ ω v` for column blocks `u`, `v`.
    pub fn pairing(&self, u: &Mat<S>, v: &Mat<S>) -> Mat<S> {
        u.transpose().mul(&self.omega).mul(v)
    }

    pub fn is_symplectic_map(&self, phi: &Mat<S>) -> bool {
        if phi.rows() != self.dim() || phi.cols() != self.dim() {
            return false;
        }
        let d = self.pairing(phi, phi).sub(&self.omega);
        if S::EXACT {
            d.is_zero()
        } else {
            d.max_abs() <= 1e-8 * phi.max_abs().powi(2).max(1.0) * self.omega.max_abs()
        }
    }

    fn isotropic(&self, f: &Mat<S>) -> bool {
        let p = self.pairing(f, f);
        if S::EXACT {
            p.is_zero()
        } else {
            p.max_abs() <= 1e-8 * f.max_abs().powi(2).max(1.0) * self.omega.max_abs()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LagrangianFrame<S> {
    space: SymplecticSpace<S>,
    frame: Mat<S>,
}

impl<S: Scalar> LagrangianFrame<S> {
    pub fn new(space: &SymplecticSpace<S>, frame: Mat<S>) -> Result<Self> {
        if frame.rows() != space.dim() || frame.cols() != space.n() {
            return Err(Error::DimensionMismatch(format!(
                "Lagrangian frame must be {}x{}, got {}x{}",
                space.dim(),
                space.n(),
                frame.rows(),
                frame.cols()
            )));
        }
        if S::rank(&frame)? != space.n() {
            return Err(Error::NotIsotropic("frame is rank deficient".into()));
        }
        if !space.isotropic(&frame) {
            return Err(Error::NotIsotropic(format!("ω restricted to frame has size {:e}", space.pairing(&frame, &frame).max_abs())));
        }
        Ok(LagrangianFrame { space: space.clone(), frame })
    }

    pub fn space(&self) -> &SymplecticSpace<S> {
        &self.space
    }

    pub fn frame(&self) -> &Mat<S> {
        &self.frame
    }

    pub fn n(&self) -> usize {
        self.space.n()
    }

    pub fn subspace(&self) -> Subspace<S> {
        Subspace::new(self.frame.clone()).expect("full rank frame")
    }

    pub fn intersection_dim(&self, o: &Self) -> Result<usize> {
        Ok(2 * self.n() - S::rank(&self.frame.hstack(&o.frame))?)
    }

    pub fn is_transversal(&self, o: &Self) -> Result<bool> {
        Ok(self.intersection_dim(o)? == 0)
    }

    pub fn same_as(&self, o: &Self) -> Result<bool> {
        Ok(self.intersection_dim(o)? == self.n())
    }

    /// Smallest singular value of the concatenated orthonormal frames.
    pub fn margin(&self, o: &Self) -> f64 {
        sigma_min(&orthonormal_basis(&self.frame.to_f64()).hstack(&orthonormal_basis(&o.frame.to_f64())))
    }

    /// Spectral-norm distance of the orthogonal projections.
    pub fn dist(&self, o: &Self) -> f64 {
        let p = |f: &Mat<S>| {
            let q = orthonormal_basis(&f.to_f64());
            q.mul(&q.transpose())
        };
        p(&self.frame).sub(&p(&o.frame)).norm2()
    }

    pub fn transform(&self, phi: &Mat<S>) -> Result<Self> {
        if !self.space.is_symplectic_map(phi) {
            return Err(Error::NotSymplectic(self.space.pairing(phi, phi).sub(self.space.omega()).max_abs()));
        }
        LagrangianFrame::new(&self.space, phi.mul(&self.frame))
    }

    /// Same subspace viewed in the space with form `−ω`.
    pub fn with_negated_form(&self) -> Self {
        LagrangianFrame { space: self.space.negated(), frame: self.frame.clone() }
    }

    pub fn direct_sum(&self, o: &Self) -> Self {
        LagrangianFrame { space: self.space.direct_sum(&o.space), frame: self.frame.block_diag(&o.frame) }
    }
}

/// A Lagrangian complement `C` of `L₀` with `AᵀωC = I`.
pub fn complement<S: Scalar>(l0: &LagrangianFrame<S>) -> Result<Mat<S>> {
    let a = l0.frame();
    let om = l0.space().omega();
    let n = l0.n();
    let c0 = S::solve_min_norm(&a.transpose().mul(om), &Mat::identity(n))?
        .ok_or_else(|| Error::InvariantViolation("Lagrangian frame not dual to any complement".into()))?;
    let w = c0.transpose().mul(om).mul(&c0);
    Ok(c0.add(&a.mul(&w).scale(&S::from_rational(&crate::scalar::rat(1, 2)))))
}

/// The graph Lagrangian `span(C + A·S)` over a complement `C` of `L₀ = span A`.
pub fn graph_lagrangian<S: Scalar>(l0: &LagrangianFrame<S>, c: &Mat<S>, s: &Mat<S>) -> Result<LagrangianFrame<S>> {
    LagrangianFrame::new(l0.space(), c.add(&l0.frame().mul(s)))
}

pub(crate) fn random_symmetric<S: Scalar, R: Rng + ?Sized>(rng: &mut R, n: usize, scale: f64) -> Mat<S> {
    let mut s = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = if S::EXACT { S::sample_small(rng) } else { S::from_f64(scale * rng.gen_range(-1.0..1.0)) };
            s[(i, j)] = v.clone();
            s[(j, i)] = v;
        }
    }
    s
}

/// Some Lagrangian subspace, by symplectic Gram–Schmidt on the standard basis.
pub fn any_lagrangian<S: Scalar>(space: &SymplecticSpace<S>) -> Result<LagrangianFrame<S>> {
    let d = space.dim();
    let om = space.omega();
    let w = |u: &[S], v: &[S]| Mat::dot(u, &om.mul(&Mat::column_vector(v)).col(0));
    let mut pool: Vec<Vec<S>> = (0..d).map(|i| Mat::<S>::identity(d).col(i)).collect();
    let mut xs = Vec::new();
    while xs.len() < space.n() {
        let x = pool.remove(0);
        let Some(pos) = pool.iter().position(|y| !w(&x, y).is_zero()) else {
            return Err(Error::NotSymplectic(0.0));
        };
        let y0 = pool.remove(pos);
        let c = w(&x, &y0).inv().expect("nonzero pairing");
        let y: Vec<S> = y0.iter().map(|v| v.clone() * c.clone()).collect();
        pool = pool
            .into_iter()
            .map(|u| {
                let a = w(&u, &y);
                let b = w(&u, &x);
                u.iter()
                    .zip(&x)
                    .zip(&y)
                    .map(|((ui, xi), yi)| ui.clone() - a.clone() * xi.clone() + b.clone() * yi.clone())
                    .collect::<Vec<S>>()
            })
            .filter(|u| u.iter().any(|v| !v.is_zero()))
            .collect();
        xs.push(x);
    }
    let frame = Mat::from_fn(d, space.n(), |i, j| xs[j][i].clone());
    LagrangianFrame::new(space, frame)
}

/// A Lagrangian transversal to every listed one, with float margin at least `tau`.
pub fn transversal_lagrangian<S: Scalar, R: Rng + ?Sized>(
    space: &SymplecticSpace<S>,
    avoid: &[&LagrangianFrame<S>],
    rng: &mut R,
    tau: f64,
) -> Result<LagrangianFrame<S>> {
    if avoid.is_empty() {
        return any_lagrangian(space);
    }
    let base = any_lagrangian(space)?;
    let c = complement(&base)?;
    for attempt in 0..64 {
        let s = random_symmetric::<S, R>(rng, space.n(), 1.0 + attempt as f64 / 8.0);
        let cand = graph_lagrangian(&base, &c, &s)?;
        if accept(&cand, avoid, tau)? {
            return Ok(cand);
        }
    }
    Err(Error::RefinementExhausted("no transversal Lagrangian found".into()))
}

/// A random symplectic map of `space`: shears `[[I, S], [0, I]]`, `[[I, 0], [S, I]]` written in a
/// symplectic basis `[A C]` adapted to some Lagrangian.
pub fn random_symplectic<S: Scalar, R: Rng + ?Sized>(space: &SymplecticSpace<S>, rng: &mut R, shears: usize) -> Result<Mat<S>> {
    let n = space.n();
    let l = any_lagrangian(space)?;
    let basis = l.frame().hstack(&complement(&l)?);
    let binv = S::inverse(&basis).ok_or(Error::Singular)?;
    let mut t = Mat::identity(2 * n);
    for k in 0..shears {
        let mut e = Mat::identity(2 * n);
        let s = random_symmetric::<S, R>(rng, n, 1.0);
        if k % 2 == 0 {
            e.set_block(0, n, &s);
        } else {
            e.set_block(n, 0, &s);
        }
        t = e.mul(&t);
    }
    let phi = basis.mul(&t).mul(&binv);
    if !space.is_symplectic_map(&phi) {
        return Err(Error::InvariantViolation("shear product is not symplectic".into()));
    }
    Ok(phi)
}

fn accept<S: Scalar>(cand: &LagrangianFrame<S>, avoid: &[&LagrangianFrame<S>], tau: f64) -> Result<bool> {
    for l in avoid {
        if S::EXACT {
            if !cand.is_transversal(l)? {
                return Ok(false);
            }
        } else if cand.margin(l) < tau {
            return Ok(false);
        }
    }
    Ok(true)
}

fn chart_parts<S: Scalar>(
    l0: &LagrangianFrame<S>,
    l1: &LagrangianFrame<S>,
    f: &Mat<S>,
) -> Result<(Mat<S>, Mat<S>, Mat<S>)> {
    let n = l0.n();
    let g = l0.frame().hstack(l1.frame());
    let ginv = S::inverse(&g).ok_or_else(|| Error::NotTransversal("L0 and L1 intersect".into()))?;
    let pq = ginv.mul(f);
    let p = pq.submatrix(0, 0, n, f.cols());
    let q = pq.submatrix(n, 0, n, f.cols());
    let k = l1.frame().transpose().mul(l0.space().omega()).mul(l0.frame());
    Ok((p, q, k))
}

/// The form `ω(T·,·)` on `L₀` where `L` is the graph of `T: L₀ → L₁`.
pub fn chart<S: Scalar>(l0: &LagrangianFrame<S>, l1: &LagrangianFrame<S>, l: &LagrangianFrame<S>) -> Result<SymForm<S>> {
    let (p, q, k) = chart_parts(l0, l1, l.frame())?;
    let pinv = S::inverse(&p).ok_or_else(|| Error::NotTransversal("L and L1 intersect".into()))?;
    let m = pinv.transpose().mul(&q.transpose()).mul(&k);
    let form = SymForm::new(m)?;
    if S::EXACT {
        let n0 = inertia(&form)?.n_zero;
        if n0 != l.intersection_dim(l0)? {
            return Err(Error::InvariantViolation("chart kernel differs from L ∩ L0".into()));
        }
    }
    Ok(form)
}

/// `Qᵀ C ᵀωA P`, congruent to the chart form through `P`; defined even when `P` is singular.
pub fn chart_cogredient<S: Scalar>(l0: &LagrangianFrame<S>, l1: &LagrangianFrame<S>, f: &Mat<S>) -> Result<Mat<S>> {
    let (p, q, k) = chart_parts(l0, l1, f)?;
    Ok(q.transpose().mul(&k).mul(&p))
}
