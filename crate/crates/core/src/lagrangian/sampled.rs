//! Maslov index of a sampled Lagrangian path by chart bookkeeping over segments.

use super::{chart, complement, graph_lagrangian, random_symmetric, LagrangianFrame, MaslovOptions};
use crate::error::{Error, Result};
use crate::forms::inertia;
use crate::scalar::Scalar;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::sync::Arc;

/// Evaluates the path at an arbitrary parameter, used to refine segments.
pub type Provider<S> = Arc<dyn Fn(f64) -> Result<LagrangianFrame<S>> + Send + Sync>;

#[derive(Clone)]
pub struct SampledPath<S> {
    samples: Vec<(f64, LagrangianFrame<S>)>,
    provider: Option<Provider<S>>,
}

impl<S: Scalar> std::fmt::Debug for SampledPath<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SampledPath")
            .field("samples", &self.samples.len())
            .field("provider", &self.provider.is_some())
            .finish()
    }
}

impl<S: Scalar> SampledPath<S> {
    pub fn from_samples(samples: Vec<(f64, LagrangianFrame<S>)>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::DimensionMismatch("empty sample list".into()));
        }
        if samples.windows(2).any(|w| w[1].0 < w[0].0) {
            return Err(Error::DimensionMismatch("sample times must be nondecreasing".into()));
        }
        let sp = samples[0].1.space();
        if samples.iter().any(|s| s.1.space() != sp) {
            return Err(Error::DimensionMismatch("samples live in different symplectic spaces".into()));
        }
        Ok(SampledPath { samples, provider: None })
    }

    /// Uniform initial grid of `n + 1` points on `[a, b]`, refined on demand.
    pub fn from_provider(provider: Provider<S>, a: f64, b: f64, n: usize) -> Result<Self> {
        let n = n.max(1);
        let samples: Result<Vec<_>> =
            (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).map(|t| provider(t).map(|f| (t, f))).collect();
        let mut p = Self::from_samples(samples?)?;
        p.provider = Some(provider);
        Ok(p)
    }

    pub fn samples(&self) -> &[(f64, LagrangianFrame<S>)] {
        &self.samples
    }

    pub fn provider(&self) -> Option<&Provider<S>> {
        self.provider.as_ref()
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.samples[0].0, self.samples[self.samples.len() - 1].0)
    }

    /// Pointwise image under a map of frames, dropping the provider.
    pub fn map_frames(&self, f: impl Fn(&LagrangianFrame<S>) -> Result<LagrangianFrame<S>>) -> Result<Self> {
        let s: Result<Vec<_>> = self.samples.iter().map(|(t, l)| f(l).map(|x| (*t, x))).collect();
        Self::from_samples(s?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MaslovReport {
    pub value: i64,
    pub segments: usize,
    pub refinements: usize,
}

fn segment_transversal<S: Scalar>(
    l0: &LagrangianFrame<S>,
    c: &crate::matrix::Mat<S>,
    f0: &LagrangianFrame<S>,
    f1: &LagrangianFrame<S>,
    rng: &mut ChaCha8Rng,
    tau: f64,
) -> Result<Option<LagrangianFrame<S>>> {
    let need = tau.max(2.0 * f0.dist(f1));
    for _ in 0..32 {
        let s = random_symmetric::<S, _>(rng, l0.n(), 1.0);
        let cand = graph_lagrangian(l0, c, &s)?;
        if cand.margin(f0) < need || cand.margin(f1) < need || cand.margin(l0) < tau {
            continue;
        }
        if S::EXACT && (!cand.is_transversal(f0)? || !cand.is_transversal(f1)?) {
            continue;
        }
        return Ok(Some(cand));
    }
    Ok(None)
}

/// A piece `[t0, t1]` of a sampled path together with a Lagrangian transversal to both ends.
#[derive(Clone, Debug)]
pub struct Segment<S> {
    pub t0: f64,
    pub t1: f64,
    pub start: LagrangianFrame<S>,
    pub end: LagrangianFrame<S>,
    pub transversal: LagrangianFrame<S>,
}

/// Refines the samples until each consecutive pair admits a common transversal
/// chart over `L₀`; returns the segments and the number of inserted samples.
pub fn partition<S: Scalar>(
    path: &SampledPath<S>,
    l0: &LagrangianFrame<S>,
    opts: &MaslovOptions,
) -> Result<(Vec<Segment<S>>, usize)> {
    if path.samples[0].1.space() != l0.space() {
        return Err(Error::DimensionMismatch("path and L0 in different spaces".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let c = complement(l0)?;
    let mut samples = path.samples.clone();
    let (a, b) = path.interval();
    let min_width = (b - a) / 2f64.powi(opts.max_depth as i32);
    let mut segments = Vec::new();
    let mut refinements = 0;
    let mut i = 0;
    while i + 1 < samples.len() {
        let (t0, f0) = (samples[i].0, &samples[i].1);
        let (t1, f1) = (samples[i + 1].0, &samples[i + 1].1);
        if let Some(l1) = segment_transversal(l0, &c, f0, f1, &mut rng, opts.tau)? {
            segments.push(Segment { t0, t1, start: f0.clone(), end: f1.clone(), transversal: l1 });
            i += 1;
            continue;
        }
        let Some(prov) = &path.provider else {
            return Err(Error::RefinementExhausted(format!("no common transversal on [{t0}, {t1}] and no provider")));
        };
        if t1 - t0 <= min_width {
            return Err(Error::RefinementExhausted(format!("segment [{t0}, {t1}] below minimal width")));
        }
        let tm = 0.5 * (t0 + t1);
        let fm = prov(tm)?;
        samples.insert(i + 1, (tm, fm));
        refinements += 1;
    }
    Ok((segments, refinements))
}

/// `Σ_i [n̄⁺ φ_{L₀,L₁⁽ⁱ⁾}(F_{i+1}) − n̄⁺ φ_{L₀,L₁⁽ⁱ⁾}(F_i)]` with a segment-wise common transversal `L₁⁽ⁱ⁾`.
pub fn maslov_continuous<S: Scalar>(
    path: &SampledPath<S>,
    l0: &LagrangianFrame<S>,
    opts: &MaslovOptions,
) -> Result<MaslovReport> {
    let (segments, refinements) = partition(path, l0, opts)?;
    let count = |l1: &LagrangianFrame<S>, f: &LagrangianFrame<S>| -> Result<i64> {
        Ok(opts.convention.count(&inertia(&chart(l0, l1, f)?)?))
    };
    let mut value = 0i64;
    for s in &segments {
        value += count(&s.transversal, &s.end)? - count(&s.transversal, &s.start)?;
    }
    Ok(MaslovReport { value, segments: segments.len(), refinements })
}
