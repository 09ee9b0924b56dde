//! Scalar fields: exact rationals, real algebraic numbers and `f64` with a tolerance policy.

use crate::error::{Error, Result};
use crate::forms::Inertia;
use crate::linalg;
use crate::matrix::Mat;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use std::cell::Cell;
use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_to_f64(r: &Rational) -> f64 {
    ToPrimitive::to_f64(r).unwrap_or_else(|| {
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Parses `"p/q"`, `"p"` or a decimal literal into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| Error::Parse(format!("bad numerator in {s:?}")))?;
        let d: BigInt = d.trim().parse().map_err(|_| Error::Parse(format!("bad denominator in {s:?}")))?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(n, d));
    }
    if let Ok(n) = s.parse::<BigInt>() {
        return Ok(Rational::from_integer(n));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s),
    };
    if let Some((ip, fp)) = body.split_once('.') {
        if !fp.is_empty() && fp.chars().all(|c| c.is_ascii_digit()) && ip.chars().all(|c| c.is_ascii_digit()) {
            let digits: BigInt = format!("{ip}{fp}").parse().map_err(|_| Error::Parse(s.into()))?;
            let den = num_traits::pow(BigInt::from(10), fp.len());
            let r = Rational::new(digits, den);
            return Ok(if neg { -r } else { r });
        }
    }
    Err(Error::Parse(format!("not a rational literal: {s:?}")))
}

/// A field with the operations needed by the form algebra.
///
/// Exact fields inherit elimination-based linear algebra; `f64` overrides it with
/// SVD/eigen routines governed by the thread-local [`FloatPolicy`].
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn from_f64(v: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn is_zero(&self) -> bool;
    fn signum(&self) -> i32;
    fn inv(&self) -> Option<Self>;

    fn div(&self, o: &Self) -> Option<Self> {
        o.inv().map(|i| self.clone() * i)
    }

    fn describe(&self) -> String {
        format!("{:?}", self)
    }

    /// A small random element: dyadic rationals for exact fields, uniform in `[-1, 1]` for floats.
    fn sample_small<R: Rng + ?Sized>(rng: &mut R) -> Self {
        if Self::EXACT {
            let n = rng.gen_range(-4i64..=4);
            let d = [1i64, 1, 2, 3][rng.gen_range(0..4)];
            Self::from_rational(&rat(n, d))
        } else {
            Self::from_f64(rng.gen_range(-1.0..1.0))
        }
    }

    fn inertia_of(m: &Mat<Self>) -> Result<Inertia> {
        linalg::exact_inertia(m)
    }

    fn nullspace(m: &Mat<Self>) -> Result<Mat<Self>> {
        Ok(linalg::exact_nullspace(m))
    }

    fn rank(m: &Mat<Self>) -> Result<usize> {
        Ok(linalg::rref(m).1.len())
    }

    /// Returns `X` such that the columns of `m·X` form a basis of the column space of `m`.
    fn colspace_selector(m: &Mat<Self>) -> Result<Mat<Self>> {
        Ok(linalg::exact_colspace_selector(m))
    }

    /// Minimum-norm solution of `a·x = b`, or `None` when inconsistent.
    fn solve_min_norm(a: &Mat<Self>, b: &Mat<Self>) -> Result<Option<Mat<Self>>> {
        Ok(linalg::exact_solve_min_norm(a, b))
    }

    /// Basis of a maximal negative subspace of a symmetric matrix.
    fn negative_subspace(m: &Mat<Self>) -> Result<Mat<Self>> {
        Ok(linalg::exact_negative_subspace(m))
    }

    fn det(m: &Mat<Self>) -> Self {
        linalg::exact_det(m)
    }

    fn inverse(m: &Mat<Self>) -> Option<Mat<Self>> {
        linalg::exact_inverse(m)
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn from_f64(v: f64) -> Self {
        Rational::from_float(v).expect("finite float")
    }
    fn to_f64(&self) -> f64 {
        rat_to_f64(self)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn signum(&self) -> i32 {
        if Zero::is_zero(self) {
            0
        } else if self.is_positive() {
            1
        } else {
            -1
        }
    }
    fn inv(&self) -> Option<Self> {
        if Zero::is_zero(self) {
            None
        } else {
            Some(self.recip())
        }
    }
    fn describe(&self) -> String {
        self.to_string()
    }
}

/// Tolerance policy for floating-point rank and inertia decisions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FloatPolicy {
    pub rel_tol: f64,
    pub strict: bool,
}

impl Default for FloatPolicy {
    fn default() -> Self {
        FloatPolicy { rel_tol: 1e-9, strict: false }
    }
}

thread_local! {
    static POLICY: Cell<FloatPolicy> = Cell::new(FloatPolicy::default());
}

pub fn float_policy() -> FloatPolicy {
    POLICY.with(|p| p.get())
}

/// Runs `f` with a temporary float policy on the current thread.
pub fn with_float_policy<T>(policy: FloatPolicy, f: impl FnOnce() -> T) -> T {
    let old = POLICY.with(|p| p.replace(policy));
    let out = f();
    POLICY.with(|p| p.set(old));
    out
}

/// Zero threshold for values measured against a scale `smax`.
pub fn float_tol(smax: f64) -> f64 {
    float_policy().rel_tol * smax.max(1.0)
}

/// Classifies `|v|` against `tol`, raising on the ambiguous band in strict mode.
pub(crate) fn is_negligible(v: f64, tol: f64) -> Result<bool> {
    let a = v.abs();
    if a <= tol {
        return Ok(true);
    }
    let p = float_policy();
    if p.strict && a < 10.0 * tol {
        return Err(Error::AmbiguousRank { value: a, tol, band: 10.0 * tol });
    }
    Ok(false)
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_rational(r: &Rational) -> Self {
        rat_to_f64(r)
    }
    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn signum(&self) -> i32 {
        if *self > 0.0 {
            1
        } else if *self < 0.0 {
            -1
        } else {
            0
        }
    }
    fn inv(&self) -> Option<Self> {
        if *self == 0.0 {
            None
        } else {
            Some(1.0 / self)
        }
    }
    fn describe(&self) -> String {
        format!("{self}")
    }

    fn inertia_of(m: &Mat<f64>) -> Result<Inertia> {
        linalg::float_inertia(m)
    }
    fn nullspace(m: &Mat<f64>) -> Result<Mat<f64>> {
        linalg::float_nullspace(m)
    }
    fn rank(m: &Mat<f64>) -> Result<usize> {
        linalg::float_rank(m)
    }
    fn colspace_selector(m: &Mat<f64>) -> Result<Mat<f64>> {
        linalg::float_colspace_selector(m)
    }
    fn solve_min_norm(a: &Mat<f64>, b: &Mat<f64>) -> Result<Option<Mat<f64>>> {
        linalg::float_solve_min_norm(a, b)
    }
    fn negative_subspace(m: &Mat<f64>) -> Result<Mat<f64>> {
        linalg::float_negative_subspace(m)
    }
    fn det(m: &Mat<f64>) -> f64 {
        if m.rows() == 0 {
            return 1.0;
        }
        m.to_dmatrix().determinant()
    }
    fn inverse(m: &Mat<f64>) -> Option<Mat<f64>> {
        if m.rows() == 0 {
            return Some(m.clone());
        }
        if float_rank(m).ok()? < m.rows() {
            return None;
        }
        m.to_dmatrix().try_inverse().map(|x| Mat::from_dmatrix(&x))
    }
}

fn float_rank(m: &Mat<f64>) -> Result<usize> {
    linalg::float_rank(m)
}
