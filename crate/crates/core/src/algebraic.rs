//! Exact real algebraic numbers `e(α)` with `α` a root of a squarefree rational
//! polynomial isolated in a rational interval.
//!
//! Zero tests use `gcd(e, m)` plus a sign check at the interval ends; signs of nonzero
//! elements come from bisecting the isolating interval until `e` has no root in it.

use crate::poly::{count_roots, Poly, RealRoot};
use crate::scalar::{rat_to_f64, Rational, Scalar};
use num_traits::{Signed, Zero};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex};

#[derive(Debug)]
pub struct NumberField {
    modulus: Poly,
    interval: Mutex<(Rational, Rational)>,
}

impl NumberField {
    pub fn modulus(&self) -> &Poly {
        &self.modulus
    }

    pub fn interval(&self) -> (Rational, Rational) {
        self.interval.lock().expect("interval lock").clone()
    }

    fn bisect(&self) {
        let mut g = self.interval.lock().expect("interval lock");
        let (lo, hi) = g.clone();
        let mid = (&lo + &hi) / Rational::from_integer(2.into());
        let slo = self.modulus.eval(&lo).is_positive();
        let v = self.modulus.eval(&mid);
        if Zero::is_zero(&v) {
            // the modulus is squarefree with a single root here; keep the open interval
            let q = (&mid - &lo) / Rational::from_integer(2.into());
            *g = (&mid - &q, &mid + &q);
        } else if v.is_positive() == slo {
            *g = (mid, hi);
        } else {
            *g = (lo, mid);
        }
    }
}

/// A real algebraic number, rational or expressed in a number field.
#[derive(Clone)]
pub enum Real {
    Rat(Rational),
    Alg(Arc<NumberField>, Poly),
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Real::Rat(r) => write!(f, "{r}"),
            Real::Alg(_, e) => write!(f, "alg({:?}) ~ {}", e, self.to_f64()),
        }
    }
}

impl Real {
    /// The root `α` itself as an element of its own field, or a rational.
    pub fn from_root(root: &RealRoot) -> Real {
        match root {
            RealRoot::Exact(r) => Real::Rat(r.clone()),
            RealRoot::Isolated { poly, lo, hi } => {
                if Zero::is_zero(&poly.eval(hi)) {
                    return Real::Rat(hi.clone());
                }
                if poly.degree() == Some(1) {
                    let c = poly.coeffs();
                    return Real::Rat(-&c[0] / &c[1]);
                }
                let field = Arc::new(NumberField {
                    modulus: poly.monic(),
                    interval: Mutex::new((lo.clone(), hi.clone())),
                });
                Real::Alg(field, Poly::new(vec![<Rational as Zero>::zero(), Rational::from_integer(1.into())]))
            }
        }
    }

    fn norm(field: &Arc<NumberField>, e: Poly) -> Real {
        let e = e.rem(&field.modulus);
        if e.degree().unwrap_or(0) == 0 {
            Real::Rat(e.coeff(0))
        } else {
            Real::Alg(field.clone(), e)
        }
    }

    fn lift(self, field: &Arc<NumberField>) -> Poly {
        match self {
            Real::Rat(r) => Poly::constant(r),
            Real::Alg(f, e) => {
                assert!(Arc::ptr_eq(&f, field), "mixing elements of different number fields");
                e
            }
        }
    }

    fn field_of(a: &Real, b: &Real) -> Option<Arc<NumberField>> {
        match (a, b) {
            (Real::Alg(f, _), _) | (_, Real::Alg(f, _)) => Some(f.clone()),
            _ => None,
        }
    }

    fn zero_at_root(field: &NumberField, e: &Poly) -> bool {
        let g = e.gcd(&field.modulus);
        if g.degree().unwrap_or(0) == 0 {
            return false;
        }
        let (lo, hi) = field.interval();
        let a = g.eval(&lo);
        let b = g.eval(&hi);
        a.is_positive() != b.is_positive()
    }
}

impl PartialEq for Real {
    fn eq(&self, o: &Real) -> bool {
        (self.clone() - o.clone()).is_zero()
    }
}

impl Add for Real {
    type Output = Real;
    fn add(self, o: Real) -> Real {
        match Real::field_of(&self, &o) {
            None => match (self, o) {
                (Real::Rat(a), Real::Rat(b)) => Real::Rat(a + b),
                _ => unreachable!(),
            },
            Some(f) => {
                let e = self.lift(&f).add(&o.lift(&f));
                Real::norm(&f, e)
            }
        }
    }
}

impl Sub for Real {
    type Output = Real;
    fn sub(self, o: Real) -> Real {
        self + (-o)
    }
}

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        match self {
            Real::Rat(a) => Real::Rat(-a),
            Real::Alg(f, e) => Real::Alg(f, e.neg()),
        }
    }
}

impl Mul for Real {
    type Output = Real;
    fn mul(self, o: Real) -> Real {
        match Real::field_of(&self, &o) {
            None => match (self, o) {
                (Real::Rat(a), Real::Rat(b)) => Real::Rat(a * b),
                _ => unreachable!(),
            },
            Some(f) => {
                let e = self.lift(&f).mul(&o.lift(&f));
                Real::norm(&f, e)
            }
        }
    }
}

impl Scalar for Real {
    const EXACT: bool = true;

    fn zero() -> Self {
        Real::Rat(<Rational as Zero>::zero())
    }
    fn one() -> Self {
        Real::Rat(Rational::from_integer(1.into()))
    }
    fn from_i64(v: i64) -> Self {
        Real::Rat(Rational::from_integer(v.into()))
    }
    fn from_rational(r: &Rational) -> Self {
        Real::Rat(r.clone())
    }
    fn from_f64(v: f64) -> Self {
        Real::Rat(Rational::from_float(v).expect("finite float"))
    }
    fn to_f64(&self) -> f64 {
        match self {
            Real::Rat(r) => rat_to_f64(r),
            Real::Alg(f, e) => {
                for _ in 0..200 {
                    let (lo, hi) = f.interval();
                    if rat_to_f64(&(&hi - &lo)) < 1e-40 {
                        break;
                    }
                    f.bisect();
                }
                let (lo, hi) = f.interval();
                rat_to_f64(&e.eval(&((lo + hi) / Rational::from_integer(2.into()))))
            }
        }
    }
    fn is_zero(&self) -> bool {
        match self {
            Real::Rat(r) => Zero::is_zero(r),
            Real::Alg(f, e) => Real::zero_at_root(f, e),
        }
    }
    fn signum(&self) -> i32 {
        match self {
            Real::Rat(r) => Scalar::signum(r),
            Real::Alg(f, e) => {
                if Real::zero_at_root(f, e) {
                    return 0;
                }
                let sq = e.squarefree();
                let sturm = sq.sturm();
                loop {
                    let (lo, hi) = f.interval();
                    let vlo = e.eval(&lo);
                    if !Zero::is_zero(&vlo) && count_roots(&sturm, &lo, &hi) == 0 {
                        return if vlo.is_positive() { 1 } else { -1 };
                    }
                    f.bisect();
                }
            }
        }
    }
    fn inv(&self) -> Option<Self> {
        match self {
            Real::Rat(r) => r.inv().map(Real::Rat),
            Real::Alg(f, e) => {
                if Real::zero_at_root(f, e) {
                    return None;
                }
                let g = e.gcd(&f.modulus);
                let reduced = f.modulus.divrem(&g).0;
                let (one, s) = e.rem(&reduced).gcd_cofactor(&reduced);
                debug_assert_eq!(one.degree(), Some(0));
                Some(Real::norm(f, s))
            }
        }
    }
    fn describe(&self) -> String {
        match self {
            Real::Rat(r) => r.to_string(),
            Real::Alg(f, e) => {
                let (lo, hi) = f.interval();
                format!("{:?} at root of {:?} in ({}, {}) ~ {}", e, f.modulus, lo, hi, self.to_f64())
            }
        }
    }
}
