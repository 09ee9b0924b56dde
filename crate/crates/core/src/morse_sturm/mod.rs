//! Morse–Sturm systems: Jacobi flow, conjugate instants and the three geodesic indices.

pub mod conjugate;
pub mod flow;
pub mod galerkin;
pub mod problem;

pub use conjugate::{
    bifurcation_flags, conjugate_instants, conjugate_partial_signatures, geodesic_maslov, BifurcationFlag, ConjugateInstant,
    GeodesicMaslov, InstantLocation,
};
pub use flow::{integrate_flow, JacobiFlow};
pub use galerkin::{
    morse_index_galerkin, spectral_index, EigenTerm, GalerkinSystem, MorseIndexReport, ShootingCrossing, SpectralIndexReport,
    DEFAULT_GALERKIN_N,
};
pub use problem::{Curvature, MatSpline, MorseSturmProblem};

use crate::error::Result;
use crate::forms::inertia_mat;
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub check: String,
    pub pass: bool,
    pub detail: String,
}

impl Verdict {
    fn new(check: &str, pass: bool, detail: String) -> Self {
        Verdict { check: check.into(), pass, detail }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GeodesicIndexReport {
    pub label: String,
    pub n: usize,
    pub i_maslov: i64,
    pub i_morse: i64,
    pub i_spectral: i64,
    pub i_spectral_shooting: i64,
    pub instants: Vec<ConjugateInstant>,
    pub galerkin_dims: [usize; 2],
    pub m0: f64,
    pub maslov: GeodesicMaslov,
    pub morse: MorseIndexReport,
    pub spectral: SpectralIndexReport,
    pub verdicts: Vec<Verdict>,
    pub holds: bool,
}

impl GeodesicIndexReport {
    pub fn all_checks_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }
}

/// Runs the three index computations and the per-eigenvalue comparisons.
pub fn verify_index_theorem(prob: &MorseSturmProblem, n_modes: usize, m0: Option<f64>) -> Result<GeodesicIndexReport> {
    let maslov = geodesic_maslov(prob)?;
    let morse = morse_index_galerkin(prob, n_modes)?;
    let spectral = spectral_index(prob, n_modes, m0)?;
    let (a, b, c) = (maslov.value, morse.value, spectral.value);
    let holds = a == b && b == c;
    let mut verdicts = vec![
        Verdict::new("index theorem", holds, format!("maslov {a}, morse {b}, spectral {c}")),
        Verdict::new(
            "initial instant",
            maslov.mu_tail == maslov.mu_full + inertia_mat(&prob.g)?.n_minus as i64,
            format!("μ[ε,1] = {}, μ[0,1] = {}, ε = {}", maslov.mu_tail, maslov.mu_full, maslov.epsilon),
        ),
        Verdict::new(
            "shooting route",
            spectral.shooting_value == a,
            format!("μ of ℓ on [−M0, 0] = {}", spectral.shooting_value),
        ),
        Verdict::new(
            "eigenvalue decomposition",
            spectral.eigen_total == c,
            format!("Σ terms = {}", spectral.eigen_total),
        ),
    ];
    let matched: Vec<&EigenTerm> = spectral.eigen_terms.iter().filter(|t| t.shooting_table.is_some()).collect();
    verdicts.push(Verdict::new(
        "kernel dimensions per eigenvalue",
        matched.iter().all(|t| t.dims_match == Some(true)),
        format!("{} matched eigenvalues", matched.len()),
    ));
    verdicts.push(Verdict::new(
        "opposite partial signatures per eigenvalue",
        matched.iter().all(|t| t.signs_opposite == Some(true)),
        format!("{} matched eigenvalues", matched.len()),
    ));
    if !spectral.unmatched_eigenvalues.is_empty() {
        verdicts.push(Verdict::new(
            "Galerkin eigenvalues resolved",
            true,
            format!("unmatched at N = {}: {:?}", n_modes, spectral.unmatched_eigenvalues),
        ));
    }
    if inertia_mat(&prob.g)?.n_minus == 0 {
        let mult: usize = maslov.instants.iter().map(|c| c.multiplicity).sum();
        verdicts.push(Verdict::new("sum of multiplicities", mult as i64 == a, format!("Σ mul = {mult}")));
    }
    Ok(GeodesicIndexReport {
        label: prob.label.clone(),
        n: prob.n,
        i_maslov: a,
        i_morse: b,
        i_spectral: c,
        i_spectral_shooting: spectral.shooting_value,
        instants: maslov.instants.clone(),
        galerkin_dims: [n_modes, 2 * n_modes],
        m0: spectral.m0,
        maslov,
        morse,
        spectral,
        verdicts,
        holds,
    })
}
