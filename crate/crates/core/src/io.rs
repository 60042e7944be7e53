//! JSON documents for specs, tuples, discrete data and reduced points.
//!
//! Exact scalars are `["re_num", "re_den", "im_num", "im_den"]` (decimal
//! strings, so arbitrarily large values survive); floating scalars are
//! `[re, im]`. Matrices are row-major nested arrays.

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::jordan::EigenOrdering;
use crate::linalg::Matrix;
use crate::orbits::{OrbitError, OrbitSpec};
use crate::reduction::{Anchors, DiscreteData, FuchsTuple, ReducedPoint, ReductionError};
use crate::scalar::{GaussianRational, Scalar};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed document: {0}")]
    Format(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    /// The document parsed but describes an inadmissible orbit.
    #[error("rejected orbit spec: {0}")]
    Spec(#[from] OrbitError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
}

fn bad(msg: impl Into<String>) -> IoError {
    IoError::Format(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Float,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Float => "float",
        }
    }

    pub fn parse(s: &str) -> Result<Self, IoError> {
        match s {
            "exact" => Ok(Mode::Exact),
            "float" => Ok(Mode::Float),
            other => Err(bad(format!("unknown mode {other:?}"))),
        }
    }
}

/// Scalars with a JSON encoding.
pub trait JsonScalar: Scalar {
    const MODE: Mode;
    fn to_json(&self) -> Value;
    fn from_json(v: &Value) -> Result<Self, IoError>;
}

fn big_int(v: &Value) -> Result<BigInt, IoError> {
    match v {
        Value::String(s) => s.trim().parse().map_err(|_| bad(format!("not an integer: {s:?}"))),
        Value::Number(n) if n.is_i64() => Ok(BigInt::from(n.as_i64().expect("checked"))),
        other => Err(bad(format!("expected an integer string, got {other}"))),
    }
}

fn ratio(num: &Value, den: &Value) -> Result<BigRational, IoError> {
    let den = big_int(den)?;
    if den == BigInt::from(0) {
        return Err(bad("zero denominator"));
    }
    Ok(BigRational::new(big_int(num)?, den))
}

impl JsonScalar for GaussianRational {
    const MODE: Mode = Mode::Exact;

    fn to_json(&self) -> Value {
        json!([
            self.re.numer().to_string(),
            self.re.denom().to_string(),
            self.im.numer().to_string(),
            self.im.denom().to_string()
        ])
    }

    fn from_json(v: &Value) -> Result<Self, IoError> {
        let zero = BigRational::from_integer(BigInt::from(0));
        match v {
            Value::Number(_) => Ok(Complex::new(BigRational::from_integer(big_int(v)?), zero)),
            // shorthand for a real rational: "p" or "p/q"
            Value::String(s) => {
                let (num, den) = s.split_once('/').unwrap_or((s, "1"));
                Ok(Complex::new(ratio(&json!(num), &json!(den))?, zero))
            }
            _ => match v.as_array().map(Vec::as_slice) {
                Some([a, b, c, d]) => Ok(Complex::new(ratio(a, b)?, ratio(c, d)?)),
                _ => Err(bad(format!("exact scalar must be four integer strings, an integer or \"p/q\", got {v}"))),
            },
        }
    }
}

impl JsonScalar for Complex64 {
    const MODE: Mode = Mode::Float;

    fn to_json(&self) -> Value {
        json!([self.re, self.im])
    }

    fn from_json(v: &Value) -> Result<Self, IoError> {
        let part = |x: &Value| x.as_f64().ok_or_else(|| bad(format!("expected a number, got {x}")));
        match v.as_array().map(Vec::as_slice) {
            Some([re, im]) => Ok(Complex64::new(part(re)?, part(im)?)),
            _ => Err(bad(format!("float scalar must be [re, im], got {v}"))),
        }
    }
}

fn field<'a>(obj: &'a Value, key: &str) -> Result<&'a Value, IoError> {
    obj.get(key).ok_or_else(|| bad(format!("missing field {key:?}")))
}

fn array<'a>(v: &'a Value, what: &str) -> Result<&'a [Value], IoError> {
    v.as_array().map(Vec::as_slice).ok_or_else(|| bad(format!("{what} must be an array")))
}

fn usize_of(v: &Value, what: &str) -> Result<usize, IoError> {
    v.as_u64().map(|x| x as usize).ok_or_else(|| bad(format!("{what} must be a non-negative integer")))
}

fn check_mode<S: JsonScalar>(doc: &Value) -> Result<(), IoError> {
    match doc.get("mode").and_then(Value::as_str) {
        None => Ok(()),
        Some(s) if Mode::parse(s)? == S::MODE => Ok(()),
        Some(s) => Err(bad(format!("document mode {s:?} does not match {:?}", S::MODE.as_str()))),
    }
}

pub fn scalars_to_json<S: JsonScalar>(v: &[S]) -> Value {
    Value::Array(v.iter().map(JsonScalar::to_json).collect())
}

pub fn scalars_from_json<S: JsonScalar>(v: &Value) -> Result<Vec<S>, IoError> {
    array(v, "scalar list")?.iter().map(S::from_json).collect()
}

pub fn matrix_to_json<S: JsonScalar>(a: &Matrix<S>) -> Value {
    Value::Array(a.rows().iter().map(|r| scalars_to_json(r)).collect())
}

pub fn matrix_from_json<S: JsonScalar>(v: &Value) -> Result<Matrix<S>, IoError> {
    let rows = array(v, "matrix")?.iter().map(scalars_from_json).collect::<Result<Vec<_>, _>>()?;
    Matrix::from_rows(rows).map_err(|e| bad(format!("matrix: {e}")))
}

fn matrices_from_json<S: JsonScalar>(v: &Value) -> Result<Vec<Matrix<S>>, IoError> {
    array(v, "matrix list")?.iter().map(matrix_from_json).collect()
}

pub fn spec_to_json<S: JsonScalar>(spec: &OrbitSpec<S>) -> Value {
    let eigs: Vec<Value> = spec.eigs().iter().map(|(l, k)| json!([l.to_json(), k])).collect();
    json!({ "m": spec.dim(), "eigs": eigs })
}

pub fn spec_from_json<S: JsonScalar>(v: &Value, tol: f64) -> Result<OrbitSpec<S>, IoError> {
    let m = usize_of(field(v, "m")?, "m")?;
    let eigs = array(field(v, "eigs")?, "eigs")?
        .iter()
        .map(|pair| match pair.as_array().map(Vec::as_slice) {
            Some([l, k]) => Ok((S::from_json(l)?, usize_of(k, "multiplicity")?)),
            _ => Err(bad("each eigenvalue entry must be [scalar, multiplicity]")),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(OrbitSpec::new(m, eigs, tol)?)
}

/// A list of specs, either bare or wrapped as `{"specs": [...]}`.
pub fn specs_from_json<S: JsonScalar>(v: &Value, tol: f64) -> Result<Vec<OrbitSpec<S>>, IoError> {
    let list = v.get("specs").unwrap_or(v);
    array(list, "specs")?.iter().map(|s| spec_from_json(s, tol)).collect()
}

fn specs_to_json<S: JsonScalar>(specs: &[OrbitSpec<S>]) -> Value {
    Value::Array(specs.iter().map(spec_to_json).collect())
}

pub fn tuple_to_json<S: JsonScalar>(tuple: &FuchsTuple<S>) -> Value {
    let mut doc = Map::new();
    doc.insert("mode".into(), json!(S::MODE.as_str()));
    doc.insert("m".into(), json!(tuple.dim()));
    doc.insert("specs".into(), specs_to_json(tuple.specs()));
    doc.insert("matrices".into(), Value::Array(tuple.matrices().iter().map(matrix_to_json).collect()));
    if let Some(p) = &tuple.poles {
        doc.insert("poles".into(), scalars_to_json(p));
    }
    Value::Object(doc)
}

/// Parses shapes and specs only; membership and momentum are left to the
/// caller (see [`FuchsTuple::new`]).
pub fn tuple_from_json<S: JsonScalar>(doc: &Value, tol: f64) -> Result<FuchsTuple<S>, IoError> {
    check_mode::<S>(doc)?;
    let specs = specs_from_json(field(doc, "specs")?, tol)?;
    let matrices = matrices_from_json(field(doc, "matrices")?)?;
    let poles = doc.get("poles").filter(|p| !p.is_null()).map(scalars_from_json).transpose()?;
    if let Some(m) = doc.get("m") {
        let m = usize_of(m, "m")?;
        if matrices.first().is_some_and(|a| a.dim() != m) {
            return Err(bad("field m disagrees with the matrix size"));
        }
    }
    Ok(FuchsTuple::from_parts_unchecked(specs, matrices, poles)?)
}

pub fn discrete_to_json<S: JsonScalar>(data: &DiscreteData<S>) -> Value {
    let a = data.anchors;
    json!({
        "anchors": [a.row_sum, a.upper, a.lower],
        "lambda": data.lambda.to_json(),
        "ordering_up": scalars_to_json(data.ordering_up.slots()),
        "ordering_low": scalars_to_json(data.ordering_low.slots()),
    })
}

/// Every field is optional; missing ones take the defaults of
/// [`DiscreteData::default_for`] relative to the chosen anchors.
pub fn discrete_from_json<S: JsonScalar>(
    v: &Value,
    specs: &[OrbitSpec<S>],
    tol: f64,
) -> Result<DiscreteData<S>, IoError> {
    let defaults = DiscreteData::default_for(specs)?;
    let anchors = match v.get("anchors") {
        None | Some(Value::Null) => defaults.anchors,
        Some(a) => match array(a, "anchors")? {
            [r, u, l] => Anchors {
                row_sum: usize_of(r, "anchor")?,
                upper: usize_of(u, "anchor")?,
                lower: usize_of(l, "anchor")?,
            },
            _ => return Err(bad("anchors must list three indices [row_sum, upper, lower]")),
        },
    };
    if [anchors.row_sum, anchors.upper, anchors.lower].iter().any(|&i| i >= specs.len()) {
        return Err(bad(format!("anchor index out of range for {} orbits", specs.len())));
    }
    let lambda = match v.get("lambda") {
        None | Some(Value::Null) => specs[anchors.row_sum].eigs()[0].0.clone(),
        Some(l) => S::from_json(l)?,
    };
    let slots = |key: &str, spec: &OrbitSpec<S>| -> Result<Vec<S>, IoError> {
        match v.get(key) {
            None | Some(Value::Null) => Ok(EigenOrdering::listing(spec).slots().to_vec()),
            Some(s) => scalars_from_json(s),
        }
    };
    let up = slots("ordering_up", &specs[anchors.upper])?;
    let low = slots("ordering_low", &specs[anchors.lower])?;
    Ok(DiscreteData::new(specs, anchors, lambda, up, low, tol)?)
}

pub fn reduced_to_json<S: JsonScalar>(point: &ReducedPoint<S>) -> Value {
    json!({
        "mode": S::MODE.as_str(),
        "m": point.a_hat.dim() + 1,
        "a_hat": matrix_to_json(&point.a_hat),
        "tail": Value::Array(point.tail.iter().map(matrix_to_json).collect()),
        "specs": specs_to_json(&point.specs),
        "discrete_data": discrete_to_json(&point.data),
    })
}

/// Parses and validates a reduced point.
pub fn reduced_from_json<S: JsonScalar>(doc: &Value, tol: f64) -> Result<ReducedPoint<S>, IoError> {
    check_mode::<S>(doc)?;
    let specs = specs_from_json(field(doc, "specs")?, tol)?;
    let data = discrete_from_json(doc.get("discrete_data").unwrap_or(&Value::Null), &specs, tol)?;
    let a_hat = matrix_from_json(field(doc, "a_hat")?)?;
    let tail = matrices_from_json(field(doc, "tail")?)?;
    Ok(ReducedPoint::new(a_hat, tail, specs, data, tol)?)
}

/// The mode declared by a document; defaults to exact.
pub fn document_mode(doc: &Value) -> Result<Mode, IoError> {
    doc.get("mode").and_then(Value::as_str).map_or(Ok(Mode::Exact), Mode::parse)
}

/// A tuple in either arithmetic mode.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyTuple {
    Exact(FuchsTuple<GaussianRational>),
    Float(FuchsTuple<Complex64>),
}

impl AnyTuple {
    pub fn from_json(doc: &Value, tol: f64) -> Result<Self, IoError> {
        Ok(match document_mode(doc)? {
            Mode::Exact => AnyTuple::Exact(tuple_from_json(doc, tol)?),
            Mode::Float => AnyTuple::Float(tuple_from_json(doc, tol)?),
        })
    }

    pub fn to_json(&self) -> Value {
        match self {
            AnyTuple::Exact(t) => tuple_to_json(t),
            AnyTuple::Float(t) => tuple_to_json(t),
        }
    }
}

/// A reduced point in either arithmetic mode.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyReduced {
    Exact(ReducedPoint<GaussianRational>),
    Float(ReducedPoint<Complex64>),
}

impl AnyReduced {
    pub fn from_json(doc: &Value, tol: f64) -> Result<Self, IoError> {
        Ok(match document_mode(doc)? {
            Mode::Exact => AnyReduced::Exact(reduced_from_json(doc, tol)?),
            Mode::Float => AnyReduced::Float(reduced_from_json(doc, tol)?),
        })
    }

    pub fn to_json(&self) -> Value {
        match self {
            AnyReduced::Exact(p) => reduced_to_json(p),
            AnyReduced::Float(p) => reduced_to_json(p),
        }
    }
}

/// Pretty JSON with a trailing newline; object keys come out sorted, so
/// equal documents serialize to identical bytes.
pub fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values always serialize");
    s.push('\n');
    s
}
