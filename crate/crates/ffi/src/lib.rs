//! C ABI over `symcoord`. Objects cross the boundary as opaque handles and
//! JSON strings in the core crate's document format. Every function returns a
//! [`SymcoordStatus`]; on failure [`symcoord_last_error`] describes it.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use symcoord::io::{
    discrete_from_json, reduced_from_json, reduced_to_json, tuple_from_json, AnyReduced, AnyTuple, IoError,
    JsonScalar, Mode,
};
use symcoord::orbits::random_specs;
use symcoord::reduction::{lift, reduce, sample_tuple, DiscreteData, FuchsTuple, ReducedPoint, ReductionError};
use symcoord::scalar::GaussianRational;
use symcoord::symplectic::{verify_pullback, SymplecticError};

/// Exact Gaussian-rational arithmetic.
pub const SYMCOORD_MODE_EXACT: u32 = 0;
/// Complex double arithmetic.
pub const SYMCOORD_MODE_FLOAT: u32 = 1;

const DEFAULT_FLOAT_TOL: f64 = 1e-10;
const SAMPLE_ATTEMPTS: usize = 50;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymcoordStatus {
    Ok = 0,
    NullArgument = 1,
    /// Malformed JSON, wrong shapes, or an unknown mode.
    Parse = 2,
    /// An orbit spec or spec combination that admits no tuple.
    Rejected = 3,
    /// The point violates a domain condition of the coordinates.
    OutsideDomain = 4,
    /// A membership, momentum or identity check failed.
    Verification = 5,
    Panic = 6,
}

/// A validated tuple on the zero-momentum level.
pub struct SymcoordTuple {
    inner: AnyTuple,
    tol: f64,
}

/// A validated point of the reduced space.
pub struct SymcoordReduced {
    inner: AnyReduced,
    tol: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(SymcoordStatus, String);

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Spec(_) => Failure(SymcoordStatus::Rejected, e.to_string()),
            IoError::Reduction(r) => r.into(),
            other => Failure(SymcoordStatus::Parse, other.to_string()),
        }
    }
}

impl From<ReductionError> for Failure {
    fn from(e: ReductionError) -> Self {
        let status = match &e {
            e if e.domain_condition().is_some() => SymcoordStatus::OutsideDomain,
            ReductionError::Orbit(_) | ReductionError::TraceCondition => SymcoordStatus::Rejected,
            ReductionError::InvalidTuple(_) => SymcoordStatus::Parse,
            _ => SymcoordStatus::Verification,
        };
        Failure(status, e.to_string())
    }
}

impl From<SymplecticError> for Failure {
    fn from(e: SymplecticError) -> Self {
        match e {
            SymplecticError::Reduction(r) | SymplecticError::StepThroughBoundary(r) => r.into(),
            other => Failure(SymcoordStatus::Verification, other.to_string()),
        }
    }
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nuls removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SymcoordStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SymcoordStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal panic: {msg}"));
            SymcoordStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(SymcoordStatus::NullArgument, format!("{what} is null"))
}

/// # Safety
/// `p` is null or a valid NUL-terminated string.
unsafe fn json_arg(p: *const c_char, what: &str) -> Result<Value, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    let text = CStr::from_ptr(p).to_str().map_err(|_| Failure(SymcoordStatus::Parse, format!("{what} is not UTF-8")))?;
    serde_json::from_str(text).map_err(|e| Failure(SymcoordStatus::Parse, format!("{what}: {e}")))
}

/// # Safety
/// `p` is null or a valid NUL-terminated string.
unsafe fn optional_json(p: *const c_char, what: &str) -> Result<Value, Failure> {
    if p.is_null() {
        Ok(Value::Null)
    } else {
        json_arg(p, what)
    }
}

/// # Safety
/// `out` is null or valid for writes.
unsafe fn put<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

/// # Safety
/// `out` is valid for writes.
unsafe fn put_string(out: *mut *mut c_char, doc: &Value) {
    let text = serde_json::to_string(doc).expect("values always serialize");
    *out = CString::new(text).expect("JSON has no interior nuls").into_raw();
}

fn tol_for(mode: Mode, tol: f64) -> f64 {
    match mode {
        Mode::Exact => 0.0,
        Mode::Float if tol > 0.0 => tol,
        Mode::Float => DEFAULT_FLOAT_TOL,
    }
}

fn mode_of(tuple: &AnyTuple) -> Mode {
    match tuple {
        AnyTuple::Exact(_) => Mode::Exact,
        AnyTuple::Float(_) => Mode::Float,
    }
}

fn validated<S: JsonScalar>(doc: &Value, tol: f64) -> Result<FuchsTuple<S>, Failure> {
    let t: FuchsTuple<S> = tuple_from_json(doc, tol)?;
    Ok(FuchsTuple::new(t.specs().to_vec(), t.matrices().to_vec(), t.poles.clone(), tol)?)
}

fn discrete<S: JsonScalar>(doc: &Value, tuple: &FuchsTuple<S>, tol: f64) -> Result<DiscreteData<S>, Failure> {
    Ok(discrete_from_json(doc, tuple.specs(), tol)?)
}

fn sample<S: JsonScalar>(m: usize, n: usize, seed: u64, tol: f64) -> Result<FuchsTuple<S>, Failure> {
    if m < 2 || n < 3 {
        return Err(Failure(SymcoordStatus::Rejected, format!("need m >= 2 and N >= 3, got m = {m}, N = {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let specs = random_specs(m, n, &[], &mut rng);
    let data = DiscreteData::default_for(&specs)?;
    sample_tuple(&specs, &data, &mut rng, SAMPLE_ATTEMPTS, tol).map_err(|e| match e {
        ReductionError::LiftedOffOrbit { .. } => Failure(SymcoordStatus::Rejected, e.to_string()),
        other => other.into(),
    })
}

fn reduce_with<S: JsonScalar>(tuple: &FuchsTuple<S>, data: &Value, tol: f64) -> Result<ReducedPoint<S>, Failure> {
    Ok(reduce(tuple, &discrete(data, tuple, tol)?, tol)?)
}

fn verify_with<S: JsonScalar>(tuple: &FuchsTuple<S>, data: &Value, trials: usize, seed: u64, tol: f64) -> Result<Value, Failure> {
    let data = discrete(data, tuple, tol)?;
    let report = verify_pullback(tuple, &data, trials, &mut ChaCha8Rng::seed_from_u64(seed), tol)?;
    let mut doc = report.to_json();
    doc["passed"] = Value::Bool(report.passed());
    Ok(doc)
}

/// Message of the last failure on this thread, or null. The pointer stays
/// valid until the next failing call into this library on the same thread.
#[no_mangle]
pub extern "C" fn symcoord_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Frees a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` is null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn symcoord_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// `N·m(m−1) − 2(m²−1)`, the dimension of the reduced space.
#[no_mangle]
pub extern "C" fn symcoord_reduced_dimension(m: usize, n: usize) -> i64 {
    symcoord::reduction::reduced_dimension(m, n)
}

/// Parses a tuple document and checks orbit membership and zero momentum.
/// `tol` applies in float mode; a non-positive value selects the default.
///
/// # Safety
/// `json` is a NUL-terminated string; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn symcoord_tuple_from_json(json: *const c_char, tol: f64, out: *mut *mut SymcoordTuple) -> SymcoordStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let doc = json_arg(json, "json")?;
        let mode = symcoord::io::document_mode(&doc)?;
        let tol = tol_for(mode, tol);
        let inner = match mode {
            Mode::Exact => AnyTuple::Exact(validated(&doc, tol)?),
            Mode::Float => AnyTuple::Float(validated(&doc, tol)?),
        };
        put(out, SymcoordTuple { inner, tol });
        Ok(())
    })
}

/// Draws a random tuple with `m×m` matrices and `n` orbits; deterministic in
/// `seed`.
///
/// # Safety
/// `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn symcoord_tuple_sample(
    mode: u32,
    m: usize,
    n: usize,
    seed: u64,
    out: *mut *mut SymcoordTuple,
) -> SymcoordStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = match mode {
            SYMCOORD_MODE_EXACT => AnyTuple::Exact(sample::<GaussianRational>(m, n, seed, 0.0)?),
            SYMCOORD_MODE_FLOAT => AnyTuple::Float(sample::<Complex64>(m, n, seed, DEFAULT_FLOAT_TOL)?),
            other => return Err(Failure(SymcoordStatus::Parse, format!("unknown mode {other}"))),
        };
        let tol = tol_for(mode_of(&inner), 0.0);
        put(out, SymcoordTuple { inner, tol });
        Ok(())
    })
}

/// Serializes a tuple; free the result with [`symcoord_string_free`].
///
/// # Safety
/// `tuple` is a live handle; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn symcoord_tuple_to_json(tuple: *const SymcoordTuple, out: *mut *mut c_char) -> SymcoordStatus {
    guard(|| {
        let tuple = tuple.as_ref().ok_or_else(|| null("tuple"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        put_string(out, &tuple.inner.to_json());
        Ok(())
    })
}

/// # Safety
/// `tuple` is null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn symcoord_tuple_free(tuple: *mut SymcoordTuple) {
    if !tuple.is_null() {
        drop(Box::from_raw(tuple));
    }
}

/// Reduced coordinates of a tuple. `discrete_json` may be null for the
/// default anchors, eigenvalue and orderings; missing fields take defaults.
///
/// # Safety
/// `tuple` is a live handle; `discrete_json` is null or NUL-terminated; `out`
/// is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn symcoord_reduce(
    tuple: *const SymcoordTuple,
    discrete_json: *const c_char,
    out: *mut *mut SymcoordReduced,
) -> SymcoordStatus {
    guard(|| {
        let tuple = tuple.as_ref().ok_or_else(|| null("tuple"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let data = optional_json(discrete_json, "discrete_json")?;
        let inner = match &tuple.inner {
            AnyTuple::Exact(t) => AnyReduced::Exact(reduce_with(t, &data, tuple.tol)?),
            AnyTuple::Float(t) => AnyReduced::Float(reduce_with(t, &data, tuple.tol)?),
        };
        put(out, SymcoordReduced { inner, tol: tuple.tol });
        Ok(())
    })
}

/// The tuple in section form over a reduced point.
///
/// # Safety
/// `point` is a live handle; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn symcoord_lift(point: *const SymcoordReduced, out: *mut *mut SymcoordTuple) -> SymcoordStatus {
    guard(|| {
        let point = point.as_ref().ok_or_else(|| null("point"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = match &point.inner {
            AnyReduced::Exact(p) => AnyTuple::Exact(lift(p, point.tol)?),
            AnyReduced::Float(p) => AnyTuple::Float(lift(p, point.tol)?),
        };
        put(out, SymcoordTuple { inner, tol: point.tol });
        Ok(())
    })
}

/// Parses and validates a reduced point document.
///
/// # Safety
/// `json` is a NUL-terminated string; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn symcoord_reduced_from_json(
    json: *const c_char,
    tol: f64,
    out: *mut *mut SymcoordReduced,
) -> SymcoordStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let doc = json_arg(json, "json")?;
        let mode = symcoord::io::document_mode(&doc)?;
        let tol = tol_for(mode, tol);
        let inner = match mode {
            Mode::Exact => AnyReduced::Exact(reduced_from_json(&doc, tol)?),
            Mode::Float => AnyReduced::Float(reduced_from_json(&doc, tol)?),
        };
        put(out, SymcoordReduced { inner, tol });
        Ok(())
    })
}

/// Serializes a reduced point; free the result with [`symcoord_string_free`].
///
/// # Safety
/// `point` is a live handle; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn symcoord_reduced_to_json(point: *const SymcoordReduced, out: *mut *mut c_char) -> SymcoordStatus {
    guard(|| {
        let point = point.as_ref().ok_or_else(|| null("point"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let doc = match &point.inner {
            AnyReduced::Exact(p) => reduced_to_json(p),
            AnyReduced::Float(p) => reduced_to_json(p),
        };
        put_string(out, &doc);
        Ok(())
    })
}

/// # Safety
/// `point` is null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn symcoord_reduced_free(point: *mut SymcoordReduced) {
    if !point.is_null() {
        drop(Box::from_raw(point));
    }
}

/// Runs the pullback identity checks on `trials` random tangent pairs and
/// writes the JSON report to `report`, also when the identities fail (status
/// `Verification`).
///
/// # Safety
/// `tuple` is a live handle; `discrete_json` is null or NUL-terminated;
/// `report` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn symcoord_verify_pullback(
    tuple: *const SymcoordTuple,
    discrete_json: *const c_char,
    trials: usize,
    seed: u64,
    report: *mut *mut c_char,
) -> SymcoordStatus {
    guard(|| {
        let tuple = tuple.as_ref().ok_or_else(|| null("tuple"))?;
        if report.is_null() {
            return Err(null("report"));
        }
        if trials == 0 {
            return Err(Failure(SymcoordStatus::Rejected, "trials must be at least 1".into()));
        }
        let data = optional_json(discrete_json, "discrete_json")?;
        let doc = match &tuple.inner {
            AnyTuple::Exact(t) => verify_with(t, &data, trials, seed, tuple.tol)?,
            AnyTuple::Float(t) => verify_with(t, &data, trials, seed, tuple.tol)?,
        };
        let passed = doc["passed"] == Value::Bool(true);
        put_string(report, &doc);
        if passed {
            Ok(())
        } else {
            Err(Failure(SymcoordStatus::Verification, "pullback identities failed".into()))
        }
    })
}
