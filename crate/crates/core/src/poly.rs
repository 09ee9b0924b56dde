//! Univariate polynomials over the rationals with Sturm-sequence root isolation.

use crate::scalar::Rational;
use num_traits::{One, Signed, Zero};
use std::fmt;

#[derive(Clone, PartialEq, Eq)]
pub struct Poly {
    c: Vec<Rational>,
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self.c.iter().map(|x| x.to_string()).collect();
        write!(f, "Poly[{}]", terms.join(", "))
    }
}

impl Poly {
    pub fn new(mut c: Vec<Rational>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        Poly { c }
    }

    pub fn zero() -> Self {
        Poly { c: vec![] }
    }

    pub fn constant(v: Rational) -> Self {
        Poly::new(vec![v])
    }

    pub fn from_i64(c: &[i64]) -> Self {
        Poly::new(c.iter().map(|&x| Rational::from_integer(x.into())).collect())
    }

    /// `t - r`
    pub fn linear_root(r: &Rational) -> Self {
        Poly::new(vec![-r.clone(), Rational::one()])
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.c
    }

    pub fn coeff(&self, k: usize) -> Rational {
        self.c.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        if self.c.is_empty() {
            None
        } else {
            Some(self.c.len() - 1)
        }
    }

    pub fn lc(&self) -> Rational {
        self.c.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for a in self.c.iter().rev() {
            acc = acc * x + a;
        }
        acc
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for a in self.c.iter().rev() {
            acc = acc * x + crate::scalar::rat_to_f64(a);
        }
        acc
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.c.len().max(o.c.len());
        Poly::new((0..n).map(|k| self.coeff(k) + o.coeff(k)).collect())
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        let n = self.c.len().max(o.c.len());
        Poly::new((0..n).map(|k| self.coeff(k) - o.coeff(k)).collect())
    }

    pub fn neg(&self) -> Poly {
        Poly::new(self.c.iter().map(|x| -x).collect())
    }

    pub fn scale(&self, s: &Rational) -> Poly {
        Poly::new(self.c.iter().map(|x| x * s).collect())
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Rational::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn divrem(&self, d: &Poly) -> (Poly, Poly) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let dd = d.c.len() - 1;
        let lc = d.lc();
        let mut r = self.c.clone();
        if r.len() <= dd {
            return (Poly::zero(), self.clone());
        }
        let mut q = vec![Rational::zero(); r.len() - dd];
        for k in (0..q.len()).rev() {
            let f = &r[k + dd] / &lc;
            if !f.is_zero() {
                for (j, b) in d.c.iter().enumerate() {
                    r[k + j] -= &f * b;
                }
            }
            q[k] = f;
        }
        r.truncate(dd);
        (Poly::new(q), Poly::new(r))
    }

    pub fn rem(&self, d: &Poly) -> Poly {
        self.divrem(d).1
    }

    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let lc = self.lc();
        Poly::new(self.c.iter().map(|x| x / &lc).collect())
    }

    pub fn gcd(&self, o: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r.monic();
        }
        a.monic()
    }

    /// Returns `(g, s)` with `s * self ≡ g (mod m)` and `g = gcd(self, m)` monic.
    pub fn gcd_cofactor(&self, m: &Poly) -> (Poly, Poly) {
        let (mut r0, mut r1) = (self.clone(), m.clone());
        let (mut s0, mut s1) = (Poly::constant(Rational::one()), Poly::zero());
        while !r1.is_zero() {
            let (q, r) = r0.divrem(&r1);
            let s = s0.sub(&q.mul(&s1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s;
        }
        let lc = r0.lc();
        let inv = Rational::one() / lc;
        (r0.scale(&inv), s0.scale(&inv))
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, a)| a * Rational::from_integer((k as i64).into()))
                .collect(),
        )
    }

    pub fn squarefree(&self) -> Poly {
        if self.degree().unwrap_or(0) == 0 {
            return self.monic();
        }
        let g = self.gcd(&self.derivative());
        self.divrem(&g).0.monic()
    }

    /// Multiplicity of `r` as a root.
    pub fn root_multiplicity(&self, r: &Rational) -> usize {
        let mut p = self.clone();
        let lin = Poly::linear_root(r);
        let mut m = 0;
        while !p.is_zero() && p.eval(r).is_zero() {
            p = p.divrem(&lin).0;
            m += 1;
        }
        m
    }

    pub fn sturm(&self) -> Vec<Poly> {
        let mut seq = vec![self.clone(), self.derivative()];
        loop {
            let n = seq.len();
            if seq[n - 1].is_zero() {
                seq.pop();
                break;
            }
            let r = seq[n - 2].rem(&seq[n - 1]);
            if r.is_zero() {
                break;
            }
            seq.push(r.neg());
        }
        seq
    }

    /// Interpolating polynomial through `(x_i, y_i)` with distinct nodes.
    pub fn interpolate(xs: &[Rational], ys: &[Rational]) -> Poly {
        let n = xs.len();
        let mut dd = ys.to_vec();
        for j in 1..n {
            for i in (j..n).rev() {
                dd[i] = (&dd[i] - &dd[i - 1]) / (&xs[i] - &xs[i - j]);
            }
        }
        let mut p = Poly::constant(dd[n - 1].clone());
        for i in (0..n - 1).rev() {
            p = p.mul(&Poly::linear_root(&xs[i])).add(&Poly::constant(dd[i].clone()));
        }
        p
    }
}

fn sign_changes(seq: &[Poly], x: &Rational) -> usize {
    let mut last = 0i32;
    let mut count = 0;
    for p in seq {
        let v = p.eval(x);
        let s = if v.is_zero() {
            0
        } else if v.is_positive() {
            1
        } else {
            -1
        };
        if s != 0 {
            if last != 0 && s != last {
                count += 1;
            }
            last = s;
        }
    }
    count
}

/// Number of distinct real roots in the half-open interval `(a, b]`.
pub fn count_roots(sturm: &[Poly], a: &Rational, b: &Rational) -> usize {
    sign_changes(sturm, a).saturating_sub(sign_changes(sturm, b))
}

/// An isolated real root of a squarefree rational polynomial.
#[derive(Clone, Debug)]
pub enum RealRoot {
    Exact(Rational),
    Isolated { poly: Poly, lo: Rational, hi: Rational },
}

impl RealRoot {
    pub fn approx(&self) -> f64 {
        match self {
            RealRoot::Exact(r) => crate::scalar::rat_to_f64(r),
            RealRoot::Isolated { poly, lo, hi } => {
                let (lo, hi) = refine_interval(poly, lo.clone(), hi.clone(), 80);
                crate::scalar::rat_to_f64(&((lo + hi) / Rational::from_integer(2.into())))
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            RealRoot::Exact(r) => r.to_string(),
            RealRoot::Isolated { poly, lo, hi } => {
                format!("root of {:?} in ({}, {}) ~ {:.15}", poly, lo, hi, self.approx())
            }
        }
    }
}

/// Bisects an isolating interval with a sign change `iters` times.
pub fn refine_interval(p: &Poly, mut lo: Rational, mut hi: Rational, iters: usize) -> (Rational, Rational) {
    let two = Rational::from_integer(2.into());
    let slo = p.eval(&lo).is_positive();
    for _ in 0..iters {
        let mid = (&lo + &hi) / &two;
        let v = p.eval(&mid);
        if v.is_zero() {
            return (mid.clone(), mid);
        }
        if v.is_positive() == slo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

/// Isolates all real roots of `p` in the closed interval `[a, b]`, sorted increasingly.
pub fn real_roots(p: &Poly, a: &Rational, b: &Rational) -> Vec<RealRoot> {
    let p = p.squarefree();
    if p.degree().unwrap_or(0) == 0 {
        return vec![];
    }
    let sturm = p.sturm();
    let mut out = Vec::new();
    let mut lo = a.clone();
    let mut hi = b.clone();
    let two = Rational::from_integer(2.into());
    let mut delta = (b - a) / Rational::from_integer(4.into());
    if p.eval(a).is_zero() {
        out.push((a.clone(), RealRoot::Exact(a.clone())));
        lo = a + separation(&p, &sturm, a, &mut delta.clone());
    }
    let mut tail = None;
    if p.eval(b).is_zero() && b > a {
        tail = Some(RealRoot::Exact(b.clone()));
        hi = b - separation(&p, &sturm, b, &mut delta);
    }
    let mut stack = vec![(lo, hi)];
    let mut found: Vec<(Rational, RealRoot)> = Vec::new();
    while let Some((l, h)) = stack.pop() {
        if l >= h {
            continue;
        }
        let c = count_roots(&sturm, &l, &h);
        if c == 0 {
            continue;
        }
        if c == 1 {
            found.push((l.clone(), RealRoot::Isolated { poly: p.clone(), lo: l, hi: h }));
            continue;
        }
        let mid = (&l + &h) / &two;
        if p.eval(&mid).is_zero() {
            let mut d = (&h - &l) / Rational::from_integer(4.into());
            let s = separation(&p, &sturm, &mid, &mut d);
            found.push((mid.clone(), RealRoot::Exact(mid.clone())));
            stack.push((l, &mid - &s));
            stack.push((&mid + &s, h));
        } else {
            stack.push((l, mid.clone()));
            stack.push((mid, h));
        }
    }
    found.sort_by(|x, y| x.0.cmp(&y.0));
    out.extend(found);
    let mut roots: Vec<RealRoot> = out.into_iter().map(|x| x.1).collect();
    if let Some(t) = tail {
        roots.push(t);
    }
    roots
}

/// Finds `d > 0` with `r` the only root of `p` in `[r - d, r + d]` and `p(r ± d) ≠ 0`.
fn separation(p: &Poly, sturm: &[Poly], r: &Rational, d: &mut Rational) -> Rational {
    let two = Rational::from_integer(2.into());
    loop {
        let l = r - &*d;
        let h = r + &*d;
        if !p.eval(&l).is_zero() && !p.eval(&h).is_zero() && count_roots(sturm, &l, &h) == 1 {
            return d.clone();
        }
        *d = &*d / &two;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn division_roundtrip() {
        let a = Poly::from_i64(&[1, 2, 3, 4]);
        let b = Poly::from_i64(&[1, -1]);
        let (qq, r) = a.divrem(&b);
        assert_eq!(qq.mul(&b).add(&r), a);
    }

    #[test]
    fn roots_of_cubic_with_rational_and_irrational_roots() {
        // (t - 1/2)(t^2 - 2)
        let p = Poly::linear_root(&q(1, 2)).mul(&Poly::from_i64(&[-2, 0, 1]));
        let roots = real_roots(&p, &q(-3, 1), &q(3, 1));
        assert_eq!(roots.len(), 3);
        let approx: Vec<f64> = roots.iter().map(|r| r.approx()).collect();
        assert!((approx[0] + 2f64.sqrt()).abs() < 1e-12);
        assert!((approx[1] - 0.5).abs() < 1e-15);
        assert!((approx[2] - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn endpoint_roots_are_exact() {
        let p = Poly::from_i64(&[0, -1, 0, 1]); // t^3 - t
        let roots = real_roots(&p, &q(-1, 1), &q(1, 1));
        assert_eq!(roots.len(), 3);
        assert!(matches!(roots[0], RealRoot::Exact(ref r) if *r == q(-1, 1)));
        assert!(matches!(roots[2], RealRoot::Exact(ref r) if *r == q(1, 1)));
    }

    #[test]
    fn interpolation_recovers_polynomial() {
        let p = Poly::from_i64(&[3, 0, -2, 5]);
        let xs: Vec<Rational> = (0..4).map(|i| q(i, 1)).collect();
        let ys: Vec<Rational> = xs.iter().map(|x| p.eval(x)).collect();
        assert_eq!(Poly::interpolate(&xs, &ys), p);
    }

    #[test]
    fn cofactor_inverse() {
        let m = Poly::from_i64(&[-2, 0, 1]);
        let e = Poly::from_i64(&[1, 1]);
        let (g, s) = e.gcd_cofactor(&m);
        assert_eq!(g, Poly::from_i64(&[1]));
        assert_eq!(s.mul(&e).rem(&m), Poly::from_i64(&[1]));
    }
}
