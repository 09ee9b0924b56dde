//! Paths in the symplectic group and their Conley–Zehnder index.

use super::{hormander_fourfold, DoubledSpace};
use crate::error::{Error, Result};
use crate::lagrangian::sampled::Provider;
use crate::lagrangian::{maslov_continuous, LagrangianFrame, MaslovOptions, MaslovReport, SampledPath, SymplecticSpace};
use crate::matrix::Mat;
use crate::scalar::Scalar;
use serde::Serialize;
use std::sync::Arc;

pub type MatProvider<S> = Arc<dyn Fn(f64) -> Result<Mat<S>> + Send + Sync>;

#[derive(Clone)]
pub struct SymplecticPath<S> {
    space: SymplecticSpace<S>,
    samples: Vec<(f64, Mat<S>)>,
    provider: Option<MatProvider<S>>,
}

impl<S: Scalar> std::fmt::Debug for SymplecticPath<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SymplecticPath")
            .field("samples", &self.samples.len())
            .field("provider", &self.provider.is_some())
            .finish()
    }
}

fn check_symplectic<S: Scalar>(space: &SymplecticSpace<S>, phi: &Mat<S>) -> Result<()> {
    if phi.rows() != space.dim() || phi.cols() != space.dim() {
        return Err(Error::DimensionMismatch("symplectic matrix has the wrong size".into()));
    }
    let d = space.pairing(phi, phi).sub(space.omega());
    let ok = if S::EXACT { d.is_zero() } else { d.max_abs() <= 1e-9 * phi.max_abs().powi(2).max(1.0) };
    if ok {
        Ok(())
    } else {
        Err(Error::NotSymplectic(d.max_abs()))
    }
}

impl<S: Scalar> SymplecticPath<S> {
    pub fn from_samples(space: &SymplecticSpace<S>, samples: Vec<(f64, Mat<S>)>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::DimensionMismatch("empty sample list".into()));
        }
        if samples.windows(2).any(|w| w[1].0 < w[0].0) {
            return Err(Error::DimensionMismatch("sample times must be nondecreasing".into()));
        }
        for (_, m) in &samples {
            check_symplectic(space, m)?;
        }
        Ok(SymplecticPath { space: space.clone(), samples, provider: None })
    }

    /// Uniform grid of `n + 1` points on `[a, b]`; every later evaluation is checked too.
    pub fn from_provider(space: &SymplecticSpace<S>, provider: MatProvider<S>, a: f64, b: f64, n: usize) -> Result<Self> {
        let n = n.max(1);
        let sp = space.clone();
        let checked: MatProvider<S> = Arc::new(move |t| {
            let m = provider(t)?;
            check_symplectic(&sp, &m)?;
            Ok(m)
        });
        let samples: Result<Vec<_>> =
            (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).map(|t| checked(t).map(|m| (t, m))).collect();
        let mut p = Self::from_samples(space, samples?)?;
        p.provider = Some(checked);
        Ok(p)
    }

    pub fn space(&self) -> &SymplecticSpace<S> {
        &self.space
    }

    pub fn samples(&self) -> &[(f64, Mat<S>)] {
        &self.samples
    }

    pub fn start(&self) -> &Mat<S> {
        &self.samples[0].1
    }

    pub fn end(&self) -> &Mat<S> {
        &self.samples[self.samples.len() - 1].1
    }

    pub fn is_loop(&self) -> bool {
        let d = self.start().sub(self.end());
        if S::EXACT {
            d.is_zero()
        } else {
            d.max_abs() <= 1e-9 * self.start().max_abs().max(1.0)
        }
    }

    /// `Φ⁻¹ = ω⁻¹ Φᵀ ω`
    pub fn sym_inverse(&self, phi: &Mat<S>) -> Result<Mat<S>> {
        let oinv = S::inverse(self.space.omega()).ok_or(Error::Singular)?;
        Ok(oinv.mul(&phi.transpose()).mul(self.space.omega()))
    }

    fn lagrangian_path(
        &self,
        f: impl Fn(f64, &Mat<S>) -> Result<LagrangianFrame<S>> + Send + Sync + 'static,
    ) -> Result<SampledPath<S>> {
        match &self.provider {
            Some(p) => {
                let p = p.clone();
                let prov: Provider<S> = Arc::new(move |t| f(t, &p(t)?));
                let (a, b) = (self.samples[0].0, self.samples[self.samples.len() - 1].0);
                SampledPath::from_provider(prov, a, b, self.samples.len() - 1)
            }
            None => {
                let s: Result<Vec<_>> = self.samples.iter().map(|(t, m)| f(*t, m).map(|l| (*t, l))).collect();
                SampledPath::from_samples(s?)
            }
        }
    }

    /// `t ↦ Gr Φ(t)` in the doubled space.
    pub fn graph_path(&self) -> Result<SampledPath<S>> {
        let d = DoubledSpace::new(&self.space);
        self.lagrangian_path(move |_, m| d.graph(m))
    }

    /// `t ↦ Φ(t) ℓ₀`
    pub fn act(&self, ell0: &LagrangianFrame<S>) -> Result<SampledPath<S>> {
        let l = ell0.clone();
        self.lagrangian_path(move |_, m| LagrangianFrame::new(l.space(), m.mul(l.frame())))
    }

    /// `t ↦ Φ(t)⁻¹ γ(t)` for a path sampled at the same parameters.
    pub fn pull_back(&self, g: &SampledPath<S>) -> Result<SampledPath<S>> {
        let me = self.clone();
        let pull = move |m: &Mat<S>, l: &LagrangianFrame<S>| -> Result<LagrangianFrame<S>> {
            LagrangianFrame::new(l.space(), me.sym_inverse(m)?.mul(l.frame()))
        };
        match (&self.provider, g.provider()) {
            (Some(p), Some(q)) => {
                let (p, q, pull) = (p.clone(), q.clone(), pull.clone());
                let prov: Provider<S> = Arc::new(move |t| pull(&p(t)?, &q(t)?));
                let (a, b) = g.interval();
                if self.samples.len() != g.samples().len() || (a, b) != (self.samples[0].0, self.samples[self.samples.len() - 1].0) {
                    return Err(Error::DimensionMismatch("paths sampled at different parameters".into()));
                }
                SampledPath::from_provider(prov, a, b, self.samples.len() - 1)
            }
            _ => {
                if self.samples.len() != g.samples().len() || self.samples.iter().zip(g.samples()).any(|(x, y)| x.0 != y.0) {
                    return Err(Error::DimensionMismatch("paths sampled at different parameters".into()));
                }
                let s: Result<Vec<_>> =
                    self.samples.iter().zip(g.samples()).map(|((t, m), (_, l))| pull(m, l).map(|x| (*t, x))).collect();
                SampledPath::from_samples(s?)
            }
        }
    }
}

/// `μ_Δ(t ↦ Gr Φ(t))`
pub fn conley_zehnder<S: Scalar>(phi: &SymplecticPath<S>, opts: &MaslovOptions) -> Result<MaslovReport> {
    let d = DoubledSpace::new(phi.space());
    maslov_continuous(&phi.graph_path()?, &d.diagonal(), opts)
}

/// The three terms of `i(Φ) + μ_{L₀}(Φ ℓ₀) = q(Δ, L₀ ⊕ ℓ₀; Gr Φ(a)⁻¹, Gr Φ(b)⁻¹)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CzComparison {
    pub cz: i64,
    pub mu_beta: i64,
    pub correction: i64,
    pub is_loop: bool,
}

impl CzComparison {
    pub fn holds(&self) -> bool {
        self.cz + self.mu_beta == self.correction
    }
}

pub fn cz_comparison<S: Scalar>(
    phi: &SymplecticPath<S>,
    l0: &LagrangianFrame<S>,
    ell0: &LagrangianFrame<S>,
    opts: &MaslovOptions,
) -> Result<CzComparison> {
    let d = DoubledSpace::new(phi.space());
    let cz = conley_zehnder(phi, opts)?.value;
    let mu_beta = maslov_continuous(&phi.act(ell0)?, l0, opts)?.value;
    let ga = d.graph(&phi.sym_inverse(phi.start())?)?;
    let gb = d.graph(&phi.sym_inverse(phi.end())?)?;
    let correction = hormander_fourfold(&d.diagonal(), &d.embed(l0, ell0)?, &ga, &gb, opts)?;
    Ok(CzComparison { cz, mu_beta, correction, is_loop: phi.is_loop() })
}

/// `t ↦ exp(t·ω⁻¹H)` for symmetric `H`, a one-parameter subgroup of the symplectic group.
pub fn hamiltonian_flow(space: &SymplecticSpace<f64>, h: &Mat<f64>) -> Result<MatProvider<f64>> {
    if !h.is_square() || h.rows() != space.dim() {
        return Err(Error::DimensionMismatch("Hamiltonian has the wrong size".into()));
    }
    let oinv = f64::inverse(space.omega()).ok_or(Error::Singular)?;
    let x = oinv.mul(&h.symmetrized()).to_dmatrix();
    Ok(Arc::new(move |t: f64| Ok(Mat::from_dmatrix(&(&x * t).exp()))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indices::{pair_maslov, pair_maslov_lifted};
    use crate::lagrangian::{any_lagrangian, random_symplectic};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_sym(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> Mat<f64> {
        let mut h = Mat::zeros(d, d);
        for i in 0..d {
            for j in 0..=i {
                let v = scale * rng.gen_range(-1.0..1.0);
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
        h
    }

    fn flow_path(sp: &SymplecticSpace<f64>, h: &Mat<f64>, start: &Mat<f64>) -> SymplecticPath<f64> {
        let f = hamiltonian_flow(sp, h).unwrap();
        let s = start.clone();
        let prov: MatProvider<f64> = Arc::new(move |t| Ok(f(t)?.mul(&s)));
        SymplecticPath::from_provider(sp, prov, 0.0, 1.0, 48).unwrap()
    }

    fn random_lagrangian(sp: &SymplecticSpace<f64>, rng: &mut ChaCha8Rng) -> LagrangianFrame<f64> {
        any_lagrangian(sp).unwrap().transform(&random_symplectic(sp, rng, 3).unwrap()).unwrap()
    }

    #[test]
    fn pair_index_reductions() {
        let o = MaslovOptions::default();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for n in 1..=2 {
            let sp = SymplecticSpace::<f64>::standard(n);
            for _ in 0..4 {
                let l0 = random_lagrangian(&sp, &mut rng);
                let a = random_lagrangian(&sp, &mut rng);
                let g1 = flow_path(&sp, &random_sym(&mut rng, 2 * n, 4.0), &Mat::identity(2 * n)).act(&a).unwrap();
                let c = l0.clone();
                let g2 = SampledPath::from_provider(Arc::new(move |_| Ok(c.clone())), 0.0, 1.0, 48).unwrap();
                let single = maslov_continuous(&g1, &l0, &o).unwrap().value;
                assert_eq!(pair_maslov(&g1, &g2, &o).unwrap().value, single);
                assert_eq!(pair_maslov(&g2, &g1, &o).unwrap().value, -single);
            }
        }
    }

    #[test]
    fn pair_index_equals_lifted_value_for_two_liftings() {
        let o = MaslovOptions::default();
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for n in 1..=2 {
            let sp = SymplecticSpace::<f64>::standard(n);
            let mut x = Mat::identity(n);
            x = x.vstack(&Mat::zeros(n, n));
            let l0 = LagrangianFrame::new(&sp, x).unwrap();
            for _ in 0..3 {
                let a = random_lagrangian(&sp, &mut rng);
                let g1 = flow_path(&sp, &random_sym(&mut rng, 2 * n, 3.0), &Mat::identity(2 * n)).act(&a).unwrap();
                let psi = flow_path(&sp, &random_sym(&mut rng, 2 * n, 3.0), &random_symplectic(&sp, &mut rng, 2).unwrap());
                let g2 = psi.act(&l0).unwrap();
                let doubled = pair_maslov(&g1, &g2, &o).unwrap().value;
                assert_eq!(pair_maslov_lifted(&g1, &psi, &l0, &o).unwrap().value, doubled);
                // ψ'(t) = ψ(t)·[[I, tS], [0, I]] also lifts γ₂
                let s = random_sym(&mut rng, n, 2.0);
                let p2 = psi.clone();
                let prov: MatProvider<f64> = Arc::new(move |t| {
                    let mut shear = Mat::identity(2 * n);
                    shear.set_block(0, n, &s.scale(&t));
                    let m = p2.provider.as_ref().expect("provider")(t)?;
                    Ok(m.mul(&shear))
                });
                let psi2 = SymplecticPath::from_provider(&sp, prov, 0.0, 1.0, 48).unwrap();
                assert_eq!(pair_maslov_lifted(&g1, &psi2, &l0, &o).unwrap().value, doubled);
            }
        }
    }

    #[test]
    fn interchange_of_base_points() {
        let o = MaslovOptions::default();
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        for n in 1..=2 {
            let sp = SymplecticSpace::<f64>::standard(n);
            for _ in 0..4 {
                let (a, b) = (random_lagrangian(&sp, &mut rng), random_lagrangian(&sp, &mut rng));
                let g1 = flow_path(&sp, &random_sym(&mut rng, 2 * n, 4.0), &Mat::identity(2 * n)).act(&a).unwrap();
                let g2 = flow_path(&sp, &random_sym(&mut rng, 2 * n, 4.0), &Mat::identity(2 * n)).act(&b).unwrap();
                let end = |p: &SampledPath<f64>, last: bool| {
                    let s = p.samples();
                    if last { s[s.len() - 1].1.clone() } else { s[0].1.clone() }
                };
                let mu = |p: &SampledPath<f64>, l: &LagrangianFrame<f64>| maslov_continuous(p, l, &o).unwrap().value;
                let lhs = mu(&g2, &end(&g1, false)) - mu(&g2, &end(&g1, true));
                let rhs = mu(&g1, &end(&g2, true)) - mu(&g1, &end(&g2, false));
                assert_eq!(lhs, rhs);
            }
        }
    }

    fn rotation_loop(sp: &SymplecticSpace<f64>, windings: &[i64], conj: &Mat<f64>, wobble: &Mat<f64>) -> SymplecticPath<f64> {
        let n = sp.n();
        let mut h = Mat::zeros(2 * n, 2 * n);
        for (i, k) in windings.iter().enumerate() {
            h[(i, i)] = 2.0 * PI * *k as f64;
            h[(n + i, n + i)] = 2.0 * PI * *k as f64;
        }
        let u = hamiltonian_flow(sp, &h).unwrap();
        let w = hamiltonian_flow(sp, wobble).unwrap();
        let c = conj.clone();
        let cinv = f64::inverse(conj).unwrap();
        let prov: MatProvider<f64> = Arc::new(move |t| Ok(c.mul(&u(t)?).mul(&cinv).mul(&w((2.0 * PI * t).sin())?)));
        SymplecticPath::from_provider(sp, prov, 0.0, 1.0, 64).unwrap()
    }

    #[test]
    fn constant_identity_has_zero_index() {
        let sp = SymplecticSpace::<f64>::standard(2);
        let prov: MatProvider<f64> = Arc::new(|_| Ok(Mat::identity(4)));
        let p = SymplecticPath::from_provider(&sp, prov, 0.0, 1.0, 4).unwrap();
        assert_eq!(conley_zehnder(&p, &MaslovOptions::default()).unwrap().value, 0);
    }

    #[test]
    fn planar_rotation_loop() {
        let o = MaslovOptions::default();
        let sp = SymplecticSpace::<f64>::standard(1);
        let p = rotation_loop(&sp, &[1], &Mat::identity(2), &Mat::zeros(2, 2));
        let cz = conley_zehnder(&p, &o).unwrap().value;
        assert_eq!(cz, 2);
        for th in [0.0, 0.4, 1.3, 2.9] {
            let l0 = LagrangianFrame::new(&sp, Mat::from_rows(vec![vec![f64::cos(th)], vec![f64::sin(th)]]).unwrap()).unwrap();
            assert_eq!(maslov_continuous(&p.act(&l0).unwrap(), &l0, &o).unwrap().value, -cz);
        }
    }

    #[test]
    fn loop_relation_on_random_loops() {
        let o = MaslovOptions::default();
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for n in 1..=2 {
            let sp = SymplecticSpace::<f64>::standard(n);
            for _ in 0..3 {
                let w: Vec<i64> = (0..n).map(|_| rng.gen_range(-2..=2)).collect();
                let conj = random_symplectic(&sp, &mut rng, 2).unwrap();
                let p = rotation_loop(&sp, &w, &conj, &random_sym(&mut rng, 2 * n, 0.8));
                let (l0, ell0) = (random_lagrangian(&sp, &mut rng), random_lagrangian(&sp, &mut rng));
                let c = cz_comparison(&p, &l0, &ell0, &o).unwrap();
                assert!(c.is_loop);
                assert_eq!(c.correction, 0);
                assert_eq!(c.cz, -c.mu_beta);
                assert_eq!(c.cz, 2 * w.iter().sum::<i64>());
            }
        }
    }

    #[test]
    fn comparison_identity_on_open_paths() {
        let o = MaslovOptions::default();
        let mut rng = ChaCha8Rng::seed_from_u64(59);
        for n in 1..=2 {
            let sp = SymplecticSpace::<f64>::standard(n);
            for _ in 0..4 {
                let start = random_symplectic(&sp, &mut rng, 3).unwrap();
                let p = flow_path(&sp, &random_sym(&mut rng, 2 * n, 5.0), &start);
                let (l0, ell0) = (random_lagrangian(&sp, &mut rng), random_lagrangian(&sp, &mut rng));
                let c = cz_comparison(&p, &l0, &ell0, &o).unwrap();
                assert!(!c.is_loop);
                assert!(c.holds(), "{c:?}");
            }
        }
    }

    #[test]
    fn non_symplectic_samples_are_rejected() {
        let sp = SymplecticSpace::<f64>::standard(1);
        let m = Mat::from_rows(vec![vec![2.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(SymplecticPath::from_samples(&sp, vec![(0.0, m)]), Err(Error::NotSymplectic(_))));
    }
}
