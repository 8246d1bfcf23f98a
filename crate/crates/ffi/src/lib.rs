//! C ABI over `reynolds`.
//!
//! Objects cross the boundary as opaque handles that the caller frees with the
//! matching `*_free` function. Every fallible call returns a [`ReynoldsStatus`]
//! and writes its result through an out pointer; on failure the message is
//! available from [`reynolds_last_error`] on the same thread. Strings returned
//! by the library are released with [`reynolds_string_free`].

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::ffi::{c_char, CStr, CString};
use std::ptr;
use std::sync::Arc;

use reynolds::algebra::{parse_algebra, BaseAlgebra};
use reynolds::expr;
use reynolds::identities::SeriesModel;
use reynolds::volterra::KernelSpec;
use reynolds::{Error, SeparableKernel, Series, TensorSeries};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReynoldsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Invalid = 3,
    Syntax = 4,
    NoTrustedDerivative = 5,
    NonInvertible = 6,
    OrderExceeded = 7,
    PreconditionViolated = 8,
    IndexOverflow = 9,
    AlgebraMismatch = 10,
    Unsupported = 11,
    Panic = 12,
}

impl From<&Error> for ReynoldsStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::NoTrustedDerivative => ReynoldsStatus::NoTrustedDerivative,
            Error::NonInvertible(_) | Error::LogConstantTerm(_) => ReynoldsStatus::NonInvertible,
            Error::OrderExceeded { .. } => ReynoldsStatus::OrderExceeded,
            Error::PreconditionViolated(_) => ReynoldsStatus::PreconditionViolated,
            Error::IndexOverflow { .. } | Error::EmbeddingUndefined(_) => ReynoldsStatus::IndexOverflow,
            Error::AlgebraMismatch(..) => ReynoldsStatus::AlgebraMismatch,
            Error::Syntax { .. } => ReynoldsStatus::Syntax,
            Error::MissingOperator(_) | Error::UnsupportedNode(_) => ReynoldsStatus::Unsupported,
            Error::UnboundSymbol(_) | Error::Invalid(_) => ReynoldsStatus::Invalid,
        }
    }
}

/// A truncated power series.
pub struct ReynoldsSeries(Series);

/// A separable Volterra kernel.
pub struct ReynoldsKernel(SeparableKernel);

/// A base algebra.
pub struct ReynoldsAlgebra(Arc<dyn BaseAlgebra>);

/// An element of the free operated algebra over a base algebra.
pub struct ReynoldsTensor(TensorSeries);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(ReynoldsStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure((&e).into(), e.to_string())
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn guard<T>(out: *mut T, f: impl FnOnce() -> Outcome<T>) -> ReynoldsStatus {
    if out.is_null() {
        set_error("null out pointer".into());
        return ReynoldsStatus::NullPointer;
    }
    match std::panic::catch_unwind(std::panic::AssertUnwindSafe(f)) {
        Ok(Ok(v)) => {
            unsafe { out.write(v) };
            clear_error();
            ReynoldsStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            ReynoldsStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Outcome<&'a T> {
    p.as_ref()
        .ok_or_else(|| Failure(ReynoldsStatus::NullPointer, format!("null {what}")))
}

unsafe fn text<'a>(p: *const c_char) -> Outcome<&'a str> {
    if p.is_null() {
        return Err(Failure(ReynoldsStatus::NullPointer, "null string".into()));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure(ReynoldsStatus::InvalidUtf8, e.to_string()))
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

fn c_string(s: String) -> *mut c_char {
    CString::new(s).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

/// The message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn reynolds_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn reynolds_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a coefficient array such as `["0", "1", "-1/2"]`; the order is its length minus one.
///
/// # Safety
/// `json` must be a valid C string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn reynolds_series_from_json(
    json: *const c_char,
    out: *mut *mut ReynoldsSeries,
) -> ReynoldsStatus {
    guard(out, || Ok(boxed(ReynoldsSeries(Series::from_json(text(json)?)?))))
}

/// # Safety
/// `s` must be a live series handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn reynolds_series_to_json(s: *const ReynoldsSeries, out: *mut *mut c_char) -> ReynoldsStatus {
    guard(out, || Ok(c_string(borrow(s, "series")?.0.to_json())))
}

/// # Safety
/// `s` must be a live series handle.
#[no_mangle]
pub unsafe extern "C" fn reynolds_series_ord(s: *const ReynoldsSeries) -> usize {
    s.as_ref().map_or(0, |s| s.0.ord())
}

/// # Safety
/// `a`, `b` must be live series handles and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn reynolds_series_mul(
    a: *const ReynoldsSeries,
    b: *const ReynoldsSeries,
    out: *mut *mut ReynoldsSeries,
) -> ReynoldsStatus {
    guard(out, || {
        let (a, b) = (borrow(a, "series")?, borrow(b, "series")?);
        Ok(boxed(ReynoldsSeries(&a.0 * &b.0)))
    })
}

/// # Safety
/// `s` must be null or a handle from this library, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn reynolds_series_free(s: *mut ReynoldsSeries) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Builds a kernel from a spec such as `exp`, `cauchy` or `k=inv(1+x),h=1`,
/// trusted to order `ord`.
///
/// # Safety
/// `spec` must be a valid C string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn reynolds_kernel_parse(
    spec: *const c_char,
    ord: usize,
    out: *mut *mut ReynoldsKernel,
) -> ReynoldsStatus {
    guard(out, || Ok(boxed(ReynoldsKernel(KernelSpec::parse(text(spec)?)?.build(ord)?))))
}

/// # Safety
/// `k` and `f` must be live handles and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn reynolds_kernel_apply_p(
    k: *const ReynoldsKernel,
    f: *const ReynoldsSeries,
    out: *mut *mut ReynoldsSeries,
) -> ReynoldsStatus {
    guard(out, || {
        let (k, f) = (borrow(k, "kernel")?, borrow(f, "series")?);
        Ok(boxed(ReynoldsSeries(k.0.apply_p(&f.0))))
    })
}

/// # Safety
/// `k` and `f` must be live handles and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn reynolds_kernel_apply_d(
    k: *const ReynoldsKernel,
    f: *const ReynoldsSeries,
    out: *mut *mut ReynoldsSeries,
) -> ReynoldsStatus {
    guard(out, || {
        let (k, f) = (borrow(k, "kernel")?, borrow(f, "series")?);
        Ok(boxed(ReynoldsSeries(k.0.apply_d(&f.0)?)))
    })
}

/// Evaluates an expression in `x`, `lambda`, `P` and `D` under the kernel,
/// with no free symbols, and returns the series as JSON.
///
/// # Safety
/// `k` must be a live handle, `expression` a valid C string and `out` a
/// writable pointer.
#[no_mangle]
pub unsafe extern "C" fn reynolds_kernel_eval(
    k: *const ReynoldsKernel,
    expression: *const c_char,
    out: *mut *mut c_char,
) -> ReynoldsStatus {
    guard(out, || {
        let k = borrow(k, "kernel")?;
        let e = expr::parse(text(expression)?)?;
        let value = expr::eval(&e, &SeriesModel::volterra(&k.0), &BTreeMap::new())?;
        Ok(c_string(value.to_json()))
    })
}

/// # Safety
/// `k` must be null or a handle from this library, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn reynolds_kernel_free(k: *mut ReynoldsKernel) {
    if !k.is_null() {
        drop(Box::from_raw(k));
    }
}

/// Builds a base algebra from a descriptor such as `poly` or `scalar:mu=2/3`.
///
/// # Safety
/// `descriptor` must be a valid C string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn reynolds_algebra_parse(
    descriptor: *const c_char,
    out: *mut *mut ReynoldsAlgebra,
) -> ReynoldsStatus {
    guard(out, || Ok(boxed(ReynoldsAlgebra(parse_algebra(text(descriptor)?)?))))
}

/// # Safety
/// `a` must be null or a handle from this library, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn reynolds_algebra_free(a: *mut ReynoldsAlgebra) {
    if !a.is_null() {
        drop(Box::from_raw(a));
    }
}

/// Parses a tensor from its JSON form. The header's algebra must match `alg`.
///
/// # Safety
/// `json` must be a valid C string, `alg` a live handle and `out` a writable
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn reynolds_tensor_from_json(
    json: *const c_char,
    alg: *const ReynoldsAlgebra,
    out: *mut *mut ReynoldsTensor,
) -> ReynoldsStatus {
    guard(out, || {
        let alg = borrow(alg, "algebra")?;
        Ok(boxed(ReynoldsTensor(TensorSeries::from_json(text(json)?, alg.0.clone())?)))
    })
}

/// # Safety
/// `t` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn reynolds_tensor_to_json(t: *const ReynoldsTensor, out: *mut *mut c_char) -> ReynoldsStatus {
    guard(out, || Ok(c_string(borrow(t, "tensor")?.0.to_json())))
}

/// # Safety
/// `a`, `b` must be live handles and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn reynolds_tensor_diamond(
    a: *const ReynoldsTensor,
    b: *const ReynoldsTensor,
    out: *mut *mut ReynoldsTensor,
) -> ReynoldsStatus {
    guard(out, || {
        let (a, b) = (borrow(a, "tensor")?, borrow(b, "tensor")?);
        Ok(boxed(ReynoldsTensor(a.0.diamond(&b.0)?)))
    })
}

/// # Safety
/// `t` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn reynolds_tensor_p(t: *const ReynoldsTensor, out: *mut *mut ReynoldsTensor) -> ReynoldsStatus {
    guard(out, || Ok(boxed(ReynoldsTensor(borrow(t, "tensor")?.0.reynolds_p()))))
}

/// # Safety
/// `t` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn reynolds_tensor_d(t: *const ReynoldsTensor, out: *mut *mut ReynoldsTensor) -> ReynoldsStatus {
    guard(out, || Ok(boxed(ReynoldsTensor(borrow(t, "tensor")?.0.deriv_d()?))))
}

/// # Safety
/// `t` must be null or a handle from this library, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn reynolds_tensor_free(t: *mut ReynoldsTensor) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}
