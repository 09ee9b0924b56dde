//! Maslov index of pairs, Kashiwara triple index, Hörmander four-fold index and the
//! Conley–Zehnder index of symplectic paths.

pub mod symplectic;

use crate::error::{Error, Result};
use crate::forms::{inertia, inertia_mat};
use crate::lagrangian::sampled::Provider;
use crate::lagrangian::{
    chart, complement, graph_lagrangian, maslov_continuous, partition, transversal_lagrangian, LagrangianFrame, MaslovOptions, MaslovReport,
    SampledPath, SymplecticSpace,
};
use crate::matrix::Mat;
use crate::scalar::Scalar;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::sync::Arc;

pub use symplectic::{conley_zehnder, cz_comparison, CzComparison, SymplecticPath};

/// `(V², ω ⊕ (−ω))` with its diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct DoubledSpace<S> {
    base: SymplecticSpace<S>,
    doubled: SymplecticSpace<S>,
}

impl<S: Scalar> DoubledSpace<S> {
    pub fn new(base: &SymplecticSpace<S>) -> Self {
        DoubledSpace { base: base.clone(), doubled: base.direct_sum(&base.negated()) }
    }

    pub fn base(&self) -> &SymplecticSpace<S> {
        &self.base
    }

    pub fn doubled(&self) -> &SymplecticSpace<S> {
        &self.doubled
    }

    /// `Δ = span [I; I]`
    pub fn diagonal(&self) -> LagrangianFrame<S> {
        let i = Mat::identity(self.base.dim());
        LagrangianFrame::new(&self.doubled, i.vstack(&i)).expect("diagonal is Lagrangian")
    }

    /// `L₁ ⊕ L₂`
    pub fn embed(&self, l1: &LagrangianFrame<S>, l2: &LagrangianFrame<S>) -> Result<LagrangianFrame<S>> {
        if l1.space() != &self.base || l2.space() != &self.base {
            return Err(Error::DimensionMismatch("Lagrangians not in the base space".into()));
        }
        LagrangianFrame::new(&self.doubled, l1.frame().block_diag(l2.frame()))
    }

    /// `Gr Φ = {(x, Φx)}`
    pub fn graph(&self, phi: &Mat<S>) -> Result<LagrangianFrame<S>> {
        if !self.base.is_symplectic_map(phi) {
            return Err(Error::NotSymplectic(self.base.pairing(phi, phi).sub(self.base.omega()).max_abs()));
        }
        LagrangianFrame::new(&self.doubled, Mat::identity(self.base.dim()).vstack(phi))
    }
}

fn same_times<S: Scalar>(p: &SampledPath<S>, q: &SampledPath<S>) -> Result<()> {
    let (a, b) = (p.samples(), q.samples());
    if a.len() != b.len() || a.iter().zip(b).any(|(x, y)| x.0 != y.0) {
        return Err(Error::DimensionMismatch("paths sampled at different parameters".into()));
    }
    Ok(())
}

/// Pointwise combination of two sampled paths, refinable when both carry providers.
pub(crate) fn zip_paths<S: Scalar>(
    p: &SampledPath<S>,
    q: &SampledPath<S>,
    f: impl Fn(&LagrangianFrame<S>, &LagrangianFrame<S>) -> Result<LagrangianFrame<S>> + Send + Sync + 'static,
) -> Result<SampledPath<S>> {
    same_times(p, q)?;
    let samples: Result<Vec<_>> =
        p.samples().iter().zip(q.samples()).map(|((t, x), (_, y))| f(x, y).map(|z| (*t, z))).collect();
    match (p.provider(), q.provider()) {
        (Some(pp), Some(qp)) => {
            let (pp, qp) = (pp.clone(), qp.clone());
            let (a, b) = p.interval();
            let prov: Provider<S> = Arc::new(move |t| f(&pp(t)?, &qp(t)?));
            let n = p.samples().len().saturating_sub(1);
            SampledPath::from_provider(prov, a, b, n)
        }
        _ => SampledPath::from_samples(samples?),
    }
}

/// `μ(γ₁, γ₂) = μ_Δ(γ₁ ⊕ γ₂)` in the doubled space.
pub fn pair_maslov<S: Scalar>(g1: &SampledPath<S>, g2: &SampledPath<S>, opts: &MaslovOptions) -> Result<MaslovReport> {
    let base = g1.samples()[0].1.space().clone();
    if g2.samples()[0].1.space() != &base {
        return Err(Error::DimensionMismatch("pair of paths in different spaces".into()));
    }
    let d = DoubledSpace::new(&base);
    let dd = d.clone();
    let doubled = zip_paths(g1, g2, move |x, y| dd.embed(x, y))?;
    maslov_continuous(&doubled, &d.diagonal(), opts)
}

/// `μ_{L₀}(t ↦ ψ(t)⁻¹ γ₁(t))` where `γ₂(t) = ψ(t) L₀`.
pub fn pair_maslov_lifted<S: Scalar>(
    g1: &SampledPath<S>,
    lift: &SymplecticPath<S>,
    l0: &LagrangianFrame<S>,
    opts: &MaslovOptions,
) -> Result<MaslovReport> {
    let pulled = lift.pull_back(g1)?;
    maslov_continuous(&pulled, l0, opts)
}

/// Signature of `ω(x₁,x₂) + ω(x₂,x₃) + ω(x₃,x₁)` on `L₁ ⊕ L₂ ⊕ L₃`.
pub fn kashiwara_triple<S: Scalar>(l1: &LagrangianFrame<S>, l2: &LagrangianFrame<S>, l3: &LagrangianFrame<S>) -> Result<i64> {
    let sp = l1.space();
    if l2.space() != sp || l3.space() != sp {
        return Err(Error::DimensionMismatch("triple in different spaces".into()));
    }
    let n = sp.n();
    let mut m = Mat::zeros(3 * n, 3 * n);
    let fr = [l1.frame(), l2.frame(), l3.frame()];
    for (i, j) in [(0, 1), (1, 2), (2, 0)] {
        m.set_block(i * n, j * n, &sp.pairing(fr[i], fr[j]));
    }
    let sym = m.add(&m.transpose());
    Ok(inertia_mat(&sym)?.signature)
}

/// Count of the chart over `(L, K)` at `X` under the convention of `opts`.
fn count_in<S: Scalar>(l: &LagrangianFrame<S>, k: &LagrangianFrame<S>, x: &LagrangianFrame<S>, opts: &MaslovOptions) -> Result<i64> {
    Ok(opts.convention.count(&inertia(&chart(l, k, x)?)?))
}

/// `μ_{L₁}(γ) − μ_{L₀}(γ)` for the chart-straight path `γ` from `L₀'` to `L₁'` inside `Λ₀(K)`.
fn fourfold_via<S: Scalar>(
    k: &LagrangianFrame<S>,
    l0: &LagrangianFrame<S>,
    l1: &LagrangianFrame<S>,
    l0p: &LagrangianFrame<S>,
    l1p: &LagrangianFrame<S>,
    opts: &MaslovOptions,
) -> Result<i64> {
    let mu = |l: &LagrangianFrame<S>| -> Result<i64> { Ok(count_in(l, k, l1p, opts)? - count_in(l, k, l0p, opts)?) };
    Ok(mu(l1)? - mu(l0)?)
}

/// Transversal used by the four-fold index, with a float margin suited to `S`.
fn fourfold_transversal<S: Scalar>(quad: [&LagrangianFrame<S>; 4], rng: &mut ChaCha8Rng, opts: &MaslovOptions) -> Result<LagrangianFrame<S>> {
    let tau = if S::EXACT { 0.0 } else { opts.tau.max(1e-3) };
    transversal_lagrangian(quad[0].space(), &quad, rng, tau)
}

/// Hörmander four-fold index `q(L₀, L₁; L₀', L₁') = μ_{L₁}(γ) − μ_{L₀}(γ)` for any `γ` from `L₀'` to `L₁'`.
///
/// `γ` is the straight segment in the chart of a Lagrangian `K` transversal to all four, where both
/// indices reduce to chart count differences. A second independent `K` must give the same value.
pub fn hormander_fourfold<S: Scalar>(
    l0: &LagrangianFrame<S>,
    l1: &LagrangianFrame<S>,
    l0p: &LagrangianFrame<S>,
    l1p: &LagrangianFrame<S>,
    opts: &MaslovOptions,
) -> Result<i64> {
    let sp = l0.space();
    if [l1, l0p, l1p].iter().any(|l| l.space() != sp) {
        return Err(Error::DimensionMismatch("four-fold arguments in different spaces".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x4f0f);
    let quad = [l0, l1, l0p, l1p];
    let k1 = fourfold_transversal(quad, &mut rng, opts)?;
    let k2 = fourfold_transversal(quad, &mut rng, opts)?;
    let v1 = fourfold_via(&k1, l0, l1, l0p, l1p, opts)?;
    let v2 = fourfold_via(&k2, l0, l1, l0p, l1p, opts)?;
    if v1 != v2 {
        return Err(Error::InvariantViolation(format!("four-fold index depends on the connecting path ({v1} vs {v2})")));
    }
    Ok(v1)
}

/// `q̄(L₀, L₁, L₂) = q(L₀, L₁; L₂, L₀)`
pub fn qbar<S: Scalar>(
    l0: &LagrangianFrame<S>,
    l1: &LagrangianFrame<S>,
    l2: &LagrangianFrame<S>,
    opts: &MaslovOptions,
) -> Result<i64> {
    hormander_fourfold(l0, l1, l2, l0, opts)
}

/// Provider of `t ↦ span(J + K·S(t))`, `S(t) = (1 − t)·S_A + t·S_B` on `[0, 1]`, the straight
/// segment from `A` to `B` in the chart of `Λ₀(K)`.
pub fn chart_interpolation<S: Scalar>(
    k: &LagrangianFrame<S>,
    a: &LagrangianFrame<S>,
    b: &LagrangianFrame<S>,
) -> Result<Provider<S>> {
    let j = complement(k)?;
    let basis = j.hstack(k.frame());
    let binv = S::inverse(&basis).ok_or(Error::Singular)?;
    let n = k.n();
    let coords = |l: &LagrangianFrame<S>| -> Result<Mat<S>> {
        let xy = binv.mul(l.frame());
        let x = S::inverse(&xy.submatrix(0, 0, n, n)).ok_or_else(|| Error::NotTransversal("endpoint meets K".into()))?;
        Ok(xy.submatrix(n, 0, n, n).mul(&x))
    };
    let (sa, sb) = (coords(a)?, coords(b)?);
    let (k, j) = (k.clone(), j);
    Ok(Arc::new(move |t: f64| {
        let tt = S::from_f64(t);
        let s = sa.scale(&(S::one() - tt.clone())).add(&sb.scale(&tt));
        graph_lagrangian(&k, &j, &s.symmetrized())
    }))
}

/// `q(L₀, L₁; L₀', L₁')` from two sampled Maslov indices along a chart segment.
pub fn hormander_fourfold_sampled<S: Scalar>(
    l0: &LagrangianFrame<S>,
    l1: &LagrangianFrame<S>,
    l0p: &LagrangianFrame<S>,
    l1p: &LagrangianFrame<S>,
    samples: usize,
    opts: &MaslovOptions,
) -> Result<i64> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5a3d);
    let k = fourfold_transversal([l0, l1, l0p, l1p], &mut rng, opts)?;
    let path = SampledPath::from_provider(chart_interpolation(&k, l0p, l1p)?, 0.0, 1.0, samples)?;
    Ok(maslov_continuous(&path, l1, opts)?.value - maslov_continuous(&path, l0, opts)?.value)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FourfoldReconstruction {
    /// `−Σ q(L₀, Lᵢ; γ(tᵢ₋₁), γ(tᵢ))`
    pub via_q: i64,
    /// `Σ [q̄(L₀, Lᵢ, γ(tᵢ)) − q̄(L₀, Lᵢ, γ(tᵢ₋₁))]`
    pub via_qbar: i64,
    pub segments: usize,
}

/// `μ_{L₀}(γ)` rebuilt from four-fold indices over a transversal partition of the path.
pub fn maslov_from_fourfold<S: Scalar>(
    path: &SampledPath<S>,
    l0: &LagrangianFrame<S>,
    opts: &MaslovOptions,
) -> Result<FourfoldReconstruction> {
    let (segments, _) = partition(path, l0, opts)?;
    let mut via_q = 0;
    let mut via_qbar = 0;
    for s in &segments {
        via_q -= hormander_fourfold(l0, &s.transversal, &s.start, &s.end, opts)?;
        via_qbar += qbar(l0, &s.transversal, &s.end, opts)? - qbar(l0, &s.transversal, &s.start, opts)?;
    }
    Ok(FourfoldReconstruction { via_q, via_qbar, segments: segments.len() })
}
