//! JSON encodings: matrices as arrays of rows, exact scalars as `"p/q"` strings, floats as numbers.

use crate::error::{Error, Result};
use crate::lagrangian::{LagrangianFrame, SymplecticSpace};
use crate::matpoly::MatPoly;
use crate::matrix::Mat;
use crate::morse_sturm::{Curvature, MatSpline, MorseSturmProblem};
use crate::psig::{PolyPath, TaylorPath};
use crate::scalar::{parse_rational, Rational, Scalar};
use serde_json::{Map, Value};

/// Scalars that can be read from and written to JSON.
pub trait IoScalar: Scalar + Send + Sync + 'static {
    fn parse(v: &Value) -> Result<Self>;
    fn emit(&self) -> Value;
}

impl IoScalar for Rational {
    fn parse(v: &Value) -> Result<Self> {
        match v {
            Value::String(s) => parse_rational(s),
            Value::Number(n) => {
                if let Some(i) = n.as_i64() {
                    return Ok(Rational::from_integer(i.into()));
                }
                parse_rational(&n.to_string()).or_else(|_| {
                    n.as_f64().map(Rational::from_f64).ok_or_else(|| Error::Parse(format!("bad number {n}")))
                })
            }
            _ => Err(Error::Parse(format!("expected a scalar, got {v}"))),
        }
    }
    fn emit(&self) -> Value {
        Value::String(self.to_string())
    }
}

impl IoScalar for f64 {
    fn parse(v: &Value) -> Result<Self> {
        match v {
            Value::Number(n) => n.as_f64().ok_or_else(|| Error::Parse(format!("bad number {n}"))),
            Value::String(s) => Ok(parse_rational(s)?.to_f64()),
            _ => Err(Error::Parse(format!("expected a scalar, got {v}"))),
        }
    }
    fn emit(&self) -> Value {
        serde_json::Number::from_f64(*self).map_or(Value::Null, Value::Number)
    }
}

pub fn obj(v: &Value) -> Result<&Map<String, Value>> {
    v.as_object().ok_or_else(|| Error::Parse("expected a JSON object".into()))
}

pub fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    obj(v)?.get(key).ok_or_else(|| Error::Parse(format!("missing field {key:?}")))
}

pub fn array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| Error::Parse(format!("{what} must be an array")))
}

pub fn parse_f64(v: &Value) -> Result<f64> {
    <f64 as IoScalar>::parse(v)
}

pub fn parse_usize(v: &Value) -> Result<usize> {
    v.as_u64().map(|x| x as usize).ok_or_else(|| Error::Parse(format!("expected a nonnegative integer, got {v}")))
}

pub fn parse_matrix<S: IoScalar>(v: &Value) -> Result<Mat<S>> {
    let rows = array(v, "matrix")?;
    let parsed: Result<Vec<Vec<S>>> =
        rows.iter().map(|r| array(r, "matrix row")?.iter().map(S::parse).collect()).collect();
    let parsed = parsed?;
    if parsed.is_empty() {
        return Ok(Mat::zeros(0, 0));
    }
    Mat::from_rows(parsed).map_err(|e| Error::Parse(e.to_string()))
}

pub fn emit_matrix<S: IoScalar>(m: &Mat<S>) -> Value {
    Value::Array(m.to_rows().iter().map(|r| Value::Array(r.iter().map(|x| x.emit()).collect())).collect())
}

/// Matrix of coefficient lists, low degree first.
pub fn parse_matpoly<S: IoScalar>(v: &Value) -> Result<MatPoly<S>> {
    let rows = array(v, "polynomial matrix")?;
    let entries: Result<Vec<Vec<Vec<S>>>> = rows
        .iter()
        .map(|r| {
            array(r, "polynomial row")?
                .iter()
                .map(|e| array(e, "coefficient list")?.iter().map(S::parse).collect())
                .collect()
        })
        .collect();
    MatPoly::from_entries(&entries?).map_err(|e| Error::Parse(e.to_string()))
}

pub fn parse_interval<S: IoScalar>(v: &Value) -> Result<(S, S)> {
    let iv = array(v, "interval")?;
    if iv.len() != 2 {
        return Err(Error::Parse("interval must have two endpoints".into()));
    }
    Ok((S::parse(&iv[0])?, S::parse(&iv[1])?))
}

pub fn parse_taylor<S: IoScalar>(v: &Value) -> Result<TaylorPath<S>> {
    let t0 = S::parse(field(v, "t0")?)?;
    let coeffs: Result<Vec<Mat<S>>> = array(field(v, "coeffs")?, "coeffs")?.iter().map(parse_matrix).collect();
    TaylorPath::new(t0, coeffs?)
}

pub fn parse_polypath<S: IoScalar>(v: &Value) -> Result<PolyPath<S>> {
    let (a, b) = parse_interval(field(v, "interval")?)?;
    PolyPath::new(a, b, parse_matpoly(field(v, "poly")?)?)
}

pub fn parse_space<S: IoScalar>(v: &Value) -> Result<SymplecticSpace<S>> {
    SymplecticSpace::new(parse_matrix(field(v, "omega")?)?)
}

pub fn parse_frame<S: IoScalar>(space: &SymplecticSpace<S>, v: &Value) -> Result<LagrangianFrame<S>> {
    LagrangianFrame::new(space, parse_matrix(v)?)
}

pub fn parse_frames<S: IoScalar>(space: &SymplecticSpace<S>, v: &Value, count: usize) -> Result<Vec<LagrangianFrame<S>>> {
    let a = array(v, "frames")?;
    if a.len() != count {
        return Err(Error::Parse(format!("expected {count} frames, got {}", a.len())));
    }
    a.iter().map(|f| parse_frame(space, f)).collect()
}

/// `{"n", "g", "R": {"kind": "constant" | "poly" | "samples", …}, "label"}`
pub fn parse_problem(v: &Value) -> Result<MorseSturmProblem> {
    let g: Mat<f64> = parse_matrix(field(v, "g")?)?;
    if let Some(n) = obj(v)?.get("n") {
        if parse_usize(n)? != g.rows() {
            return Err(Error::Parse("field n differs from the size of g".into()));
        }
    }
    let r = field(v, "R")?;
    let kind = field(r, "kind")?.as_str().ok_or_else(|| Error::Parse("R.kind must be a string".into()))?;
    let curvature = match kind {
        "constant" => Curvature::Constant(parse_matrix(field(r, "matrix")?)?),
        "poly" => {
            let c: Result<Vec<Mat<f64>>> = array(field(r, "coeffs")?, "R.coeffs")?.iter().map(parse_matrix).collect();
            let c = c?;
            if c.is_empty() {
                return Err(Error::Parse("R.coeffs is empty".into()));
            }
            Curvature::Poly(c)
        }
        "samples" => {
            let t: Result<Vec<f64>> = array(field(r, "t")?, "R.t")?.iter().map(parse_f64).collect();
            let vals: Result<Vec<Mat<f64>>> = array(field(r, "values")?, "R.values")?.iter().map(parse_matrix).collect();
            Curvature::Samples(MatSpline::new(t?, vals?).map_err(|e| Error::Parse(e.to_string()))?)
        }
        other => return Err(Error::Parse(format!("unknown curvature kind {other:?}"))),
    };
    let label = obj(v)?.get("label").and_then(|l| l.as_str()).unwrap_or("").to_string();
    MorseSturmProblem::new(g, curvature, label)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use serde_json::json;

    #[test]
    fn exact_scalars_round_trip() {
        for v in [json!("3/4"), json!(-2), json!("0.125"), json!(0.5)] {
            let r = Rational::parse(&v).unwrap();
            assert_eq!(Rational::parse(&r.emit()).unwrap(), r);
        }
        assert_eq!(Rational::parse(&json!(0.1)).unwrap(), rat(1, 10));
        assert!(Rational::parse(&json!("1/0")).is_err());
        assert!(Rational::parse(&json!([1])).is_err());
    }

    #[test]
    fn matrices_and_polynomials() {
        let m: Mat<Rational> = parse_matrix(&json!([["1/2", 0], [0, 1]])).unwrap();
        assert_eq!(m[(0, 0)], rat(1, 2));
        assert_eq!(emit_matrix(&m), json!([["1/2", "0"], ["0", "1"]]));
        assert!(parse_matrix::<f64>(&json!([[1, 2], [3]])).is_err());
        let p: MatPoly<Rational> = parse_matpoly(&json!([[[1], [0, 1]], [[0, 1], [0, 0, 0, 1]]])).unwrap();
        assert_eq!(p.degree(), 3);
    }

    #[test]
    fn problem_kinds() {
        let c = parse_problem(&json!({"n": 1, "g": [[1]], "R": {"kind": "constant", "matrix": [[-1]]}, "label": "c"})).unwrap();
        assert_eq!(c.label, "c");
        let p = parse_problem(&json!({"g": [[1]], "R": {"kind": "poly", "coeffs": [[[-1]], [[2]]]}})).unwrap();
        assert!(!p.r.is_constant());
        let s = parse_problem(&json!({"g": [[1]], "R": {"kind": "samples", "t": [0, 0.5, 1], "values": [[[0]], [[1]], [[0]]]}}));
        assert!(s.is_ok());
        assert!(parse_problem(&json!({"n": 2, "g": [[1]], "R": {"kind": "constant", "matrix": [[0]]}})).is_err());
        assert!(parse_problem(&json!({"g": [[1]], "R": {"kind": "spline"}})).is_err());
    }
}
