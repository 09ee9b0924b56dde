#![allow(dead_code)]

use maslovkit::lagrangian::{any_lagrangian, random_symplectic, LagrangianFrame, SymplecticSpace};
use maslovkit::matpoly::MatPoly;
use maslovkit::poly::count_roots;
use maslovkit::scalar::rat;
use maslovkit::{Mat, Rational, Scalar};
use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::io::Write;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Writes straight to the process stdout so the line survives test output capture.
pub fn report(criterion: usize, pass: bool, detail: &str) {
    let line = format!("criterion {criterion:>2}: {} {detail}\n", if pass { "PASS" } else { "FAIL" });
    let mut out = std::io::stdout().lock();
    out.write_all(line.as_bytes()).unwrap();
    out.flush().unwrap();
}

/// Named sub-checks of one criterion.
#[derive(Default)]
pub struct Tally {
    checks: Vec<(String, usize, usize)>,
}

impl Tally {
    pub fn check(&mut self, name: &str, ok: bool) {
        match self.checks.iter_mut().find(|c| c.0 == name) {
            Some(c) => {
                c.1 += ok as usize;
                c.2 += 1;
            }
            None => self.checks.push((name.to_string(), ok as usize, 1)),
        }
    }

    pub fn passed(&self, name: &str) -> bool {
        self.checks.iter().any(|c| c.0 == name && c.1 == c.2)
    }

    pub fn count(&self, name: &str) -> (usize, usize) {
        self.checks.iter().find(|c| c.0 == name).map_or((0, 0), |c| (c.1, c.2))
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.1 == c.2)
    }

    pub fn summary(&self) -> String {
        self.checks.iter().map(|(n, ok, all)| format!("{n} {ok}/{all}")).collect::<Vec<_>>().join(", ")
    }

    pub fn failures(&self) -> Vec<String> {
        self.checks.iter().filter(|c| c.1 != c.2).map(|c| format!("{} {}/{}", c.0, c.1, c.2)).collect()
    }

    /// Prints the criterion line and fails the test if any sub-check failed.
    pub fn finish(&self, criterion: usize) {
        report(criterion, self.all_pass(), &self.summary());
        assert!(self.all_pass(), "criterion {criterion}: {:?}", self.failures());
    }
}

pub fn small(rng: &mut ChaCha8Rng) -> Rational {
    rat(rng.gen_range(-4..=4), rng.gen_range(1..=3))
}

pub fn nonzero(rng: &mut ChaCha8Rng) -> Rational {
    loop {
        let r = small(rng);
        if !r.is_zero() {
            return r;
        }
    }
}

pub fn sym(rng: &mut ChaCha8Rng, n: usize) -> Mat<Rational> {
    let mut m = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = small(rng);
            m[(i, j)] = v.clone();
            m[(j, i)] = v;
        }
    }
    m
}

pub fn general(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Mat<Rational> {
    let rows = (0..r).map(|_| (0..c).map(|_| small(rng)).collect()).collect();
    Mat::from_rows(rows).unwrap()
}

pub fn invertible(rng: &mut ChaCha8Rng, n: usize) -> Mat<Rational> {
    loop {
        let m = general(rng, n, n);
        if !det(&m).is_zero() {
            return m;
        }
    }
}

/// Symmetric matrix `Cᵀ diag(d) C` with `zeros` vanishing entries in `d`.
pub fn sym_with_kernel(rng: &mut ChaCha8Rng, n: usize, zeros: usize) -> Mat<Rational> {
    let c = invertible(rng, n);
    let d: Vec<Rational> = (0..n).map(|i| if i < zeros { Rational::zero() } else { nonzero(rng) }).collect();
    c.transpose().mul(&Mat::diag(&d)).mul(&c)
}

/// Determinant by cofactor-free fraction elimination, written independently of the library.
pub fn det(m: &Mat<Rational>) -> Rational {
    let n = m.rows();
    let mut a = m.to_rows();
    let mut d = Rational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !a[r][c].is_zero()) else {
            return Rational::zero();
        };
        if p != c {
            a.swap(p, c);
            d = -d;
        }
        let piv = a[c][c].clone();
        d *= piv.clone();
        for r in c + 1..n {
            let f = a[r][c].clone() / piv.clone();
            if f.is_zero() {
                continue;
            }
            for k in c..n {
                let v = a[c][k].clone() * f.clone();
                a[r][k] -= v;
            }
        }
    }
    d
}

/// Characteristic polynomial coefficients, low degree first (Faddeev–LeVerrier).
pub fn charpoly(a: &Mat<Rational>) -> Vec<Rational> {
    let n = a.rows();
    let mut c = vec![Rational::zero(); n + 1];
    c[n] = Rational::one();
    let mut m = Mat::<Rational>::zeros(n, n);
    for k in 1..=n {
        m = a.mul(&m).add(&Mat::identity(n).scale(&c[n - k + 1]));
        let am = a.mul(&m);
        c[n - k] = -am.trace() / Rational::from_integer((k as i64).into());
    }
    c
}

fn sign_changes(c: &[Rational]) -> usize {
    let signs: Vec<bool> = c.iter().filter(|x| !x.is_zero()).map(|x| x.is_positive()).collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// `(n⁺, n⁻, n₀)` of a symmetric matrix from Descartes' rule on its real-rooted characteristic polynomial.
pub fn oracle_inertia(a: &Mat<Rational>) -> (usize, usize, usize) {
    if a.rows() == 0 {
        return (0, 0, 0);
    }
    let c = charpoly(a);
    let n0 = c.iter().position(|x| !x.is_zero()).unwrap();
    let c = &c[n0..];
    let alt: Vec<Rational> = c.iter().enumerate().map(|(i, x)| if i % 2 == 0 { x.clone() } else { -x.clone() }).collect();
    (sign_changes(c), sign_changes(&alt), n0)
}

pub fn ext_coindex(a: &Mat<Rational>) -> i64 {
    let (p, _, z) = oracle_inertia(a);
    (p + z) as i64
}

pub fn coindex(a: &Mat<Rational>) -> i64 {
    oracle_inertia(a).0 as i64
}

/// Largest `2^{-j}` such that `t0` is the only root of `det P` in `[t0 − ε, t0 + ε]`.
pub fn isolating_radius(p: &MatPoly<Rational>, t0: &Rational) -> Rational {
    let d = p.det_poly();
    assert!(!d.is_zero(), "degeneracy is not isolated");
    let sq = d.squarefree();
    let seq = if sq.degree().unwrap_or(0) == 0 { vec![sq.clone()] } else { sq.sturm() };
    let mut eps = Rational::one();
    loop {
        let lo = t0 - &eps;
        let hi = t0 + &eps;
        let inside = count_roots(&seq, &lo, &hi) + usize::from(sq.eval(&lo).is_zero());
        let at_t0 = usize::from(sq.eval(t0).is_zero());
        if inside == at_t0 {
            return eps;
        }
        eps /= Rational::from_integer(2.into());
    }
}

/// `(left, right)` one-sided jumps of `f(P(t))` at `t0`, measured at a certified radius.
pub fn sweep(p: &MatPoly<Rational>, t0: &Rational, f: impl Fn(&Mat<Rational>) -> i64) -> (i64, i64) {
    let eps = isolating_radius(p, t0);
    let (l, c, r) = (f(&p.eval(&(t0 - &eps))), f(&p.eval(t0)), f(&p.eval(&(t0 + &eps))));
    (c - l, r - c)
}

/// Orthogonal rational matrix from the Cayley transform of a random skew matrix.
pub fn orthogonal(rng: &mut ChaCha8Rng, n: usize) -> Mat<Rational> {
    let mut s = Mat::<Rational>::zeros(n, n);
    for i in 0..n {
        for j in 0..i {
            let v = small(rng);
            s[(i, j)] = v.clone();
            s[(j, i)] = -v;
        }
    }
    let id = Mat::identity(n);
    let inv = Rational::inverse(&id.add(&s)).expect("I + S is invertible for skew S");
    id.sub(&s).mul(&inv)
}

pub fn random_lagrangian<S: Scalar>(sp: &SymplecticSpace<S>, rng: &mut ChaCha8Rng) -> LagrangianFrame<S> {
    any_lagrangian(sp).unwrap().transform(&random_symplectic(sp, rng, 3).unwrap()).unwrap()
}

pub fn random_sym_f64(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> Mat<f64> {
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
