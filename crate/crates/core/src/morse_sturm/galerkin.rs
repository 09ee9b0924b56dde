//! Sine-basis Galerkin reduction of the index form, the generalized Morse index and the
//! spectral index, with the λ-shooting route through `ℓ(λ) = Φ_λ(1)L₀`.

use super::conjugate::{charted_table, cycle_angles, locate_zeros, ZERO_TOL};
use super::flow::integrate_flow;
use super::problem::{Curvature, MorseSturmProblem};
use crate::error::{Error, Result};
use crate::forms::{inertia_mat, Inertia};
use crate::matrix::Mat;
use crate::psig::affine::{affine_crossing, power_kernel};
use crate::psig::flow::CrossingLocation;
use crate::psig::{jump_decomposition, partial_signatures, SignatureTable, TaylorPath};
use crate::scalar::{float_policy, with_float_policy};
use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

pub const DEFAULT_GALERKIN_N: usize = 16;
const LAMBDA_SCAN_POINTS: usize = 600;
const LAMBDA_SENS_ORDER: usize = 6;
const GL_NODES: usize = 8;

/// Gauss–Legendre rule on `[0, 1]` by the Golub–Welsch eigenproblem.
fn gauss_legendre(m: usize) -> Vec<(f64, f64)> {
    let mut j = DMatrix::zeros(m, m);
    for k in 1..m {
        let b = k as f64 / ((4 * k * k - 1) as f64).sqrt();
        j[(k, k - 1)] = b;
        j[(k - 1, k)] = b;
    }
    let e = SymmetricEigen::new(j);
    let mut out: Vec<(f64, f64)> =
        (0..m).map(|i| (0.5 * (e.eigenvalues[i] + 1.0), e.eigenvectors[(0, i)].powi(2))).collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// Galerkin matrices on `span{e_i √2 sin(kπs)}`, index `i·N + (k − 1)`.
#[derive(Clone, Debug)]
pub struct GalerkinSystem {
    pub n_modes: usize,
    /// `∫ g(V′, W′)`
    pub stiffness: Mat<f64>,
    /// `∫ g(V, W)`
    pub gram: Mat<f64>,
    /// `∫ g(R V, W)`
    pub potential: Mat<f64>,
}

impl GalerkinSystem {
    pub fn new(prob: &MorseSturmProblem, n_modes: usize) -> Self {
        let nn = n_modes;
        let freq = Mat::diag(&(1..=nn).map(|k| (k * k) as f64 * PI * PI).collect::<Vec<_>>());
        let stiffness = prob.g.kron(&freq);
        let gram = prob.g.kron(&Mat::identity(nn));
        let potential = match &prob.r {
            Curvature::Constant(r) => prob.g.mul(r).symmetrized().kron(&Mat::identity(nn)),
            _ => {
                let d = prob.n * nn;
                let mut acc = DMatrix::<f64>::zeros(d, d);
                let rule = gauss_legendre(GL_NODES);
                let panels = 4 * nn;
                for p in 0..panels {
                    for &(x, w) in &rule {
                        let s = (p as f64 + x) / panels as f64;
                        let w = w / panels as f64;
                        let gr = prob.g.mul(&prob.r.at(s)).symmetrized();
                        let phi: Vec<f64> = (1..=nn).map(|k| 2f64.sqrt() * (k as f64 * PI * s).sin()).collect();
                        for i in 0..prob.n {
                            for j in 0..prob.n {
                                let c = gr[(i, j)] * w;
                                if c == 0.0 {
                                    continue;
                                }
                                for k in 0..nn {
                                    for l in 0..nn {
                                        acc[(i * nn + k, j * nn + l)] += c * phi[k] * phi[l];
                                    }
                                }
                            }
                        }
                    }
                }
                Mat::from_dmatrix(&acc).symmetrized()
            }
        };
        GalerkinSystem { n_modes, stiffness, gram, potential }
    }

    /// The index form `I₀ = 𝒮₁`.
    pub fn index_form(&self) -> Mat<f64> {
        self.stiffness.add(&self.potential)
    }

    /// `I_λ = I₀ − λĝ`.
    pub fn pencil_at(&self, lambda: f64) -> Mat<f64> {
        self.index_form().sub(&self.gram.scale(&lambda))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GalerkinLevel {
    pub n_modes: usize,
    pub value: i64,
    pub kernel_dim: usize,
    pub ext_coindex_start: usize,
    pub ext_coindex_end: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct MorseIndexReport {
    pub value: i64,
    pub levels: [GalerkinLevel; 2],
}

fn endpoint_index(start: &Inertia, end: &Inertia, n_modes: usize) -> GalerkinLevel {
    let sf = end.ext_coindex as i64 - start.ext_coindex as i64;
    GalerkinLevel {
        n_modes,
        value: end.n_zero as i64 - sf,
        kernel_dim: end.n_zero,
        ext_coindex_start: start.ext_coindex,
        ext_coindex_end: end.ext_coindex,
    }
}

fn check_modes(n_modes: usize) -> Result<()> {
    if n_modes < 4 {
        return Err(Error::DimensionMismatch(format!("Galerkin dimension {n_modes} below 4")));
    }
    Ok(())
}

/// `dim Ker 𝒮₁ − [n̄⁺(𝒮₁) − n̄⁺(𝒮₀)]` at `N` and `2N`.
pub fn morse_index_galerkin(prob: &MorseSturmProblem, n_modes: usize) -> Result<MorseIndexReport> {
    check_modes(n_modes)?;
    let level = |nn: usize| -> Result<GalerkinLevel> {
        let sys = GalerkinSystem::new(prob, nn);
        Ok(endpoint_index(&inertia_mat(&sys.stiffness)?, &inertia_mat(&sys.index_form())?, nn))
    };
    let (a, b) = (level(n_modes)?, level(2 * n_modes)?);
    if a.value != b.value {
        return Err(Error::NotStabilized(a.value, b.value));
    }
    Ok(MorseIndexReport { value: a.value, levels: [a, b] })
}

fn opposite(a: &SignatureTable, b: &SignatureTable) -> bool {
    a.dims() == b.dims() && a.levels.iter().zip(&b.levels).all(|(x, y)| x.inertia == y.inertia.negated())
}

/// One real eigenvalue of the Galerkin pencil `I₀ − λĝ` in `[−M₀, 0]`.
#[derive(Clone, Debug, Serialize)]
pub struct EigenTerm {
    pub lambda: f64,
    pub h_dim: usize,
    /// `σ(ĝ|H_λ)` for `λ < 0`, `n⁺(ĝ|H₀) − n⁺(I₀|H₀)` for `λ = 0`.
    pub term: i64,
    /// Flow contribution of the pencil at `λ`, from its partial signatures.
    pub flow_contribution: i64,
    pub galerkin_table: SignatureTable,
    pub shooting_table: Option<SignatureTable>,
    pub dims_match: Option<bool>,
    pub signs_opposite: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ShootingCrossing {
    pub lambda: f64,
    pub location: CrossingLocation,
    pub table: SignatureTable,
    pub contribution: i64,
    pub chart: &'static str,
    pub sensitivity_defect: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralIndexReport {
    pub value: i64,
    pub levels: [GalerkinLevel; 2],
    pub m0: f64,
    pub eigen_terms: Vec<EigenTerm>,
    pub eigen_total: i64,
    pub shooting_value: i64,
    pub shooting: Vec<ShootingCrossing>,
    pub unmatched_eigenvalues: Vec<f64>,
}

fn real_pencil_eigenvalues(sys: &GalerkinSystem) -> Result<Vec<f64>> {
    let ginv = sys.gram.inverse().ok_or(Error::Singular)?;
    let m = ginv.mul(&sys.index_form()).to_dmatrix();
    let scale = m.norm().max(1.0);
    let mut re: Vec<f64> = m
        .complex_eigenvalues()
        .iter()
        .filter(|z| z.im.abs() <= 1e-8 * scale)
        .map(|z| z.re)
        .collect();
    re.sort_by(f64::total_cmp);
    let mut groups: Vec<Vec<f64>> = Vec::new();
    for x in re {
        match groups.last_mut() {
            Some(gp) if (x - gp[gp.len() - 1]).abs() <= 1e-6 * x.abs().max(1.0) => gp.push(x),
            _ => groups.push(vec![x]),
        }
    }
    Ok(groups
        .into_iter()
        .map(|g| {
            let mean = g.iter().sum::<f64>() / g.len() as f64;
            if mean.abs() <= 1e-8 * scale {
                0.0
            } else {
                mean
            }
        })
        .collect())
}

fn restricted_inertia(m: &Mat<f64>, h: &Mat<f64>) -> Result<Inertia> {
    inertia_mat(&h.transpose().mul(m).mul(h))
}

fn eigen_term(sys: &GalerkinSystem, lambda: f64, spectrum: &[f64]) -> Result<EigenTerm> {
    let i0 = sys.index_form();
    let ginv = sys.gram.inverse().ok_or(Error::Singular)?;
    let d = i0.rows();
    let op = ginv.mul(&i0).sub(&Mat::identity(d).scale(&lambda));
    let h = power_kernel(&op)?;
    if h.dim() == 0 {
        return Err(Error::InconsistentEigendata(format!("no generalized eigenvectors at λ = {lambda}")));
    }
    let kpath = sys.gram.neg();
    if lambda == 0.0 {
        let term = restricted_inertia(&sys.gram, h.basis())?.n_plus as i64
            - restricted_inertia(&i0, h.basis())?.n_plus as i64;
        let path = TaylorPath::new(0.0, vec![i0.clone(), kpath])?.padded(d + 1);
        let table = partial_signatures(&path)?;
        let left = jump_decomposition(&table).sf_left;
        return Ok(EigenTerm {
            lambda,
            h_dim: h.dim(),
            term,
            flow_contribution: left,
            galerkin_table: table,
            shooting_table: None,
            dims_match: None,
            signs_opposite: None,
        });
    }
    let term = restricted_inertia(&sys.gram, h.basis())?.signature;
    let near = |c: f64| spectrum.iter().any(|&x| (x - c).abs() <= 1e-6 * x.abs().max(1.0));
    let base = [0.0, 0.5, 0.25, 0.75, 0.125]
        .iter()
        .map(|f| f * lambda)
        .find(|&c| !near(c))
        .ok_or_else(|| Error::InconsistentEigendata("no regular base point for the pencil".into()))?;
    let cr = affine_crossing(&sys.pencil_at(base), &kpath, &(lambda - base))?;
    Ok(EigenTerm {
        lambda,
        h_dim: h.dim(),
        term,
        flow_contribution: cr.sf_across,
        galerkin_table: cr.table,
        shooting_table: None,
        dims_match: None,
        signs_opposite: None,
    })
}

fn shooting_crossings(prob: &MorseSturmProblem, m0: f64) -> Result<Vec<ShootingCrossing>> {
    let policy = float_policy();
    let f = move |l: f64| -> Result<f64> {
        with_float_policy(policy, || Ok(cycle_angles(&integrate_flow(prob, l, 0)?.phi(1.0)?)[0]))
    };
    if f(-m0)? <= ZERO_TOL {
        return Err(Error::M0TooSmall);
    }
    let roots = locate_zeros(&f, -m0, 0.0, LAMBDA_SCAN_POINTS)?;
    let seed = crate::lagrangian::MaslovOptions::default().seed;
    roots
        .par_iter()
        .enumerate()
        .map(|(i, &l0)| {
            with_float_policy(policy, || {
                let flow = integrate_flow(prob, l0, LAMBDA_SENS_ORDER)?;
                let jets = flow.taylor_at(1.0)?;
                let rich = super::flow::richardson_sensitivity(prob, l0, 1.0, 1e-3 * l0.abs().max(1.0))?;
                let sensitivity_defect = rich.sub(&jets[1]).max_abs() / jets[1].max_abs().max(1.0);
                let ct = charted_table(&prob.g, l0, &jets, seed ^ (i as u64 + 101))?;
                let location = if l0 == 0.0 { CrossingLocation::End } else { CrossingLocation::Interior };
                let j = jump_decomposition(&ct.table);
                let contribution = if location == CrossingLocation::End { j.sf_left } else { j.sf_across };
                Ok(ShootingCrossing { lambda: l0, location, table: ct.table, contribution, chart: ct.chart, sensitivity_defect })
            })
        })
        .collect()
}

/// `dim Ker I₀ − sf(I_λ, [−M₀, 0])` at `N` and `2N`, with the eigenvalue decomposition and the
/// shooting route over `ℓ(λ)`.
pub fn spectral_index(prob: &MorseSturmProblem, n_modes: usize, m0: Option<f64>) -> Result<SpectralIndexReport> {
    check_modes(n_modes)?;
    let sup = prob.sup_norm();
    let m0 = m0.unwrap_or(sup + 1.0);
    if m0 <= sup {
        return Err(Error::M0TooSmall);
    }
    let level = |nn: usize| -> Result<(GalerkinSystem, GalerkinLevel)> {
        let sys = GalerkinSystem::new(prob, nn);
        let lv = endpoint_index(&inertia_mat(&sys.pencil_at(-m0))?, &inertia_mat(&sys.index_form())?, nn);
        Ok((sys, lv))
    };
    let (sys, a) = level(n_modes)?;
    let (_, b) = level(2 * n_modes)?;
    if a.value != b.value {
        return Err(Error::NotStabilized(a.value, b.value));
    }
    let spectrum = real_pencil_eigenvalues(&sys)?;
    if spectrum.iter().any(|&l| l <= -m0) {
        return Err(Error::M0TooSmall);
    }
    let policy = float_policy();
    let in_range: Vec<f64> = spectrum.iter().cloned().filter(|&l| l <= 0.0).collect();
    let terms: Result<Vec<EigenTerm>> =
        in_range.par_iter().map(|&l| with_float_policy(policy, || eigen_term(&sys, l, &spectrum))).collect();
    let mut terms = terms?;
    let eigen_total: i64 = terms.iter().map(|t| t.term).sum();
    let kernel_term = a.kernel_dim as i64;
    for t in &terms {
        let expected = if t.lambda == 0.0 { kernel_term - t.flow_contribution } else { -t.flow_contribution };
        if t.term != expected {
            return Err(Error::InconsistentEigendata(format!(
                "term {} at λ = {} differs from the pencil flow {}",
                t.term, t.lambda, expected
            )));
        }
    }
    if !terms.iter().any(|t| t.lambda == 0.0) && a.kernel_dim != 0 {
        return Err(Error::InconsistentEigendata("kernel of I₀ without a zero eigenvalue".into()));
    }
    if eigen_total != a.value {
        return Err(Error::InconsistentEigendata(format!("eigen terms sum to {eigen_total}, index is {}", a.value)));
    }
    let shooting = shooting_crossings(prob, m0)?;
    let shooting_value = shooting.iter().map(|c| c.contribution).sum();
    let mut unmatched = Vec::new();
    for t in terms.iter_mut() {
        let hit = shooting.iter().find(|c| (c.lambda - t.lambda).abs() <= 1e-6 * t.lambda.abs().max(1.0));
        match hit {
            Some(c) => {
                t.dims_match = Some(c.table.dims() == t.galerkin_table.dims());
                t.signs_opposite = Some(opposite(&c.table, &t.galerkin_table));
                t.shooting_table = Some(c.table.clone());
            }
            None => unmatched.push(t.lambda),
        }
    }
    for c in &shooting {
        if !terms.iter().any(|t| (c.lambda - t.lambda).abs() <= 1e-6 * t.lambda.abs().max(1.0)) {
            unmatched.push(c.lambda);
        }
    }
    Ok(SpectralIndexReport {
        value: a.value,
        levels: [a, b],
        m0,
        eigen_terms: terms,
        eigen_total,
        shooting_value,
        shooting,
        unmatched_eigenvalues: unmatched,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iso(n: usize, r: f64) -> MorseSturmProblem {
        MorseSturmProblem::constant(Mat::identity(n), Mat::identity(n).scale(&r), "iso").unwrap()
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let rule = gauss_legendre(8);
        for p in 0..16 {
            let q: f64 = rule.iter().map(|(x, w)| w * x.powi(p)).sum();
            assert!((q - 1.0 / (p + 1) as f64).abs() < 1e-14, "degree {p}");
        }
    }

    #[test]
    fn quadrature_reproduces_constant_potential() {
        let g = Mat::diag(&[1.0, -1.0]);
        let r = Mat::diag(&[-3.0, 5.0]);
        let c = MorseSturmProblem::constant(g.clone(), r.clone(), "c").unwrap();
        let knots = vec![0.0, 0.5, 1.0];
        let s = MorseSturmProblem::new(g, Curvature::Samples(super::super::MatSpline::new(knots, vec![r; 3]).unwrap()), "s").unwrap();
        let a = GalerkinSystem::new(&c, 6);
        let b = GalerkinSystem::new(&s, 6);
        assert!(a.potential.sub(&b.potential).max_abs() < 1e-12);
    }

    #[test]
    fn morse_index_examples() {
        assert_eq!(morse_index_galerkin(&iso(2, 0.0), 8).unwrap().value, 0);
        assert_eq!(morse_index_galerkin(&iso(3, -(2.5 * PI).powi(2)), 16).unwrap().value, 6);
        let r = morse_index_galerkin(&iso(2, -PI * PI), 8).unwrap();
        assert_eq!(r.value, 2);
        assert_eq!(r.levels[0].kernel_dim, 2);
        assert_eq!(r.levels[0].ext_coindex_end, r.levels[0].ext_coindex_start);
    }

    #[test]
    fn morse_index_rejects_tiny_basis() {
        assert!(morse_index_galerkin(&iso(1, 0.0), 3).is_err());
    }

    #[test]
    fn spectral_index_examples() {
        let flat = spectral_index(&iso(2, 0.0), 8, None).unwrap();
        assert_eq!((flat.value, flat.shooting_value, flat.eigen_terms.len()), (0, 0, 0));

        let s = spectral_index(&iso(2, -PI * PI), 8, None).unwrap();
        assert_eq!(s.value, 2);
        assert_eq!(s.eigen_terms.len(), 1);
        assert_eq!(s.eigen_terms[0].lambda, 0.0);
        assert_eq!(s.eigen_terms[0].term, 2);
        assert_eq!(s.shooting_value, 2);

        let s = spectral_index(&iso(2, -(2.5 * PI).powi(2)), 16, None).unwrap();
        assert_eq!(s.value, 4);
        let lams: Vec<f64> = s.eigen_terms.iter().map(|t| t.lambda).collect();
        let expect = [PI * PI * (1.0 - 6.25), PI * PI * (4.0 - 6.25)];
        assert_eq!(lams.len(), 2);
        for (l, e) in lams.iter().zip(expect) {
            assert!((l - e).abs() < 1e-8);
        }
        assert!(s.eigen_terms.iter().all(|t| t.term == 2));
        assert_eq!(s.shooting_value, 4);
        assert!(s.eigen_terms.iter().all(|t| t.dims_match == Some(true) && t.signs_opposite == Some(true)));
        assert!(s.unmatched_eigenvalues.is_empty());
        assert!(s.shooting.iter().all(|c| c.sensitivity_defect < 1e-5));
    }

    #[test]
    fn indefinite_metric_negative_eigenvalue_term() {
        let g = Mat::diag(&[1.0, -1.0]);
        let r = Mat::diag(&[-(2.5 * PI).powi(2), -(1.5 * PI).powi(2)]);
        let p = MorseSturmProblem::constant(g, r, "lorentz").unwrap();
        assert_eq!(morse_index_galerkin(&p, 16).unwrap().value, 1);
        let s = spectral_index(&p, 16, None).unwrap();
        assert_eq!(s.value, 1);
        assert_eq!(s.shooting_value, 1);
        let timelike = s.eigen_terms.iter().find(|t| (t.lambda + 1.25 * PI * PI).abs() < 1e-8).unwrap();
        assert_eq!(timelike.term, -1);
        assert!(s.eigen_terms.iter().all(|t| t.signs_opposite == Some(true)));
    }

    #[test]
    fn small_m0_is_rejected() {
        assert!(matches!(spectral_index(&iso(1, -4.0), 8, Some(3.0)), Err(Error::M0TooSmall)));
    }
}
