//! C interface to `affval`.
//!
//! Every function returns an [`AffvalStatus`]; results are written through
//! out-pointers. Bodies and tensors are opaque handles released with their
//! `_free` functions. After a failure, [`affval_last_error`] describes it.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use affval::bodies::io::parse_body;
use affval::bodies::{ConvexBody, Ellipsoid, Polytope};
use affval::classical::projection_body;
use affval::rep_theory::{schur_eval, Partition};
use affval::symtensor::{MixedTensor, Variance};
use affval::tensor_val::{phi_pq, psi_pq, EvalOptions};
use affval::Error;
use nalgebra::DMatrix;

/// Status codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AffvalStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    DimensionMismatch = 3,
    OriginNotInterior = 4,
    Degenerate = 5,
    Unsupported = 6,
    Numerical = 7,
    Io = 8,
    Parse = 9,
    Panic = 10,
}

/// Opaque convex body.
pub struct AffvalBody(ConvexBody);

/// Opaque tensor in `Sym^p ⊗ Sym^q`.
pub struct AffvalTensor(MixedTensor);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> AffvalStatus {
    match e {
        Error::DimensionMismatch { .. } | Error::DegreeMismatch { .. } | Error::VarianceMismatch(_) => {
            AffvalStatus::DimensionMismatch
        }
        Error::OriginNotInterior => AffvalStatus::OriginNotInterior,
        Error::Degenerate(_) | Error::Singular { .. } => AffvalStatus::Degenerate,
        Error::Unsupported(_) | Error::SizeCap(_) => AffvalStatus::Unsupported,
        Error::CurvatureUndefined { .. } | Error::DecompositionFailed(_) | Error::RejectionExhausted(_) => {
            AffvalStatus::Numerical
        }
        Error::Io { .. } => AffvalStatus::Io,
        Error::Parse { .. } => AffvalStatus::Parse,
        Error::InvalidInput(_) | Error::InadmissibleFunction(_) => AffvalStatus::InvalidInput,
    }
}

struct Failure(AffvalStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(AffvalStatus::NullPointer, format!("{what} is null"))
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> AffvalStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            AffvalStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            AffvalStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn body<'a>(b: *const AffvalBody) -> Result<&'a ConvexBody, Failure> {
    b.as_ref().map(|b| &b.0).ok_or_else(|| null("body"))
}

unsafe fn tensor<'a>(t: *const AffvalTensor) -> Result<&'a MixedTensor, Failure> {
    t.as_ref().map(|t| &t.0).ok_or_else(|| null("tensor"))
}

unsafe fn put_body(out: *mut *mut AffvalBody, b: ConvexBody) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    out.write(Box::into_raw(Box::new(AffvalBody(b))));
    Ok(())
}

/// Message describing the last failure on this thread, or null. Valid until
/// the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn affval_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn affval_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Convex hull of `count` points of dimension `n`, stored row by row.
///
/// # Safety
/// `vertices` must point to `count * n` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn affval_body_polytope(
    vertices: *const f64,
    count: usize,
    n: usize,
    out: *mut *mut AffvalBody,
) -> AffvalStatus {
    guard(|| {
        if n == 0 {
            return Err(Failure(AffvalStatus::InvalidInput, "dimension must be positive".into()));
        }
        let v = slice(vertices, count * n, "vertices")?;
        let pts = v.chunks(n).map(<[f64]>::to_vec).collect();
        put_body(out, Polytope::from_vertices(pts)?.into())
    })
}

/// The ellipsoid `{x : xᵀQx ≤ 1}` for a row-major symmetric positive
/// definite `n × n` matrix `Q`.
///
/// # Safety
/// `q` must point to `n * n` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn affval_body_ellipsoid(q: *const f64, n: usize, out: *mut *mut AffvalBody) -> AffvalStatus {
    guard(|| {
        let v = slice(q, n * n, "q")?;
        put_body(out, Ellipsoid::new(DMatrix::from_row_slice(n, n, v))?.into())
    })
}

/// Reads a JSON body specification.
///
/// # Safety
/// `path` must be a nul-terminated string and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn affval_body_from_file(path: *const c_char, out: *mut *mut AffvalBody) -> AffvalStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        let p = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| Failure(AffvalStatus::InvalidInput, "path is not UTF-8".into()))?;
        put_body(out, parse_body(Path::new(p))?)
    })
}

/// Releases a body. Null is ignored.
///
/// # Safety
/// `b` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn affval_body_free(b: *mut AffvalBody) {
    if !b.is_null() {
        drop(Box::from_raw(b));
    }
}

/// # Safety
/// `b` must be a valid body and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn affval_body_dim(b: *const AffvalBody, out: *mut usize) -> AffvalStatus {
    guard(|| write(out, body(b)?.dim(), "out"))
}

/// # Safety
/// `b` must be a valid body and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn affval_body_volume(b: *const AffvalBody, out: *mut f64) -> AffvalStatus {
    guard(|| write(out, body(b)?.volume()?, "out"))
}

fn check_len(expected: usize, found: usize) -> Result<(), Failure> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found }.into());
    }
    Ok(())
}

/// `h_K(ξ)`.
///
/// # Safety
/// `xi` must point to `n` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn affval_body_support(
    b: *const AffvalBody,
    xi: *const f64,
    n: usize,
    out: *mut f64,
) -> AffvalStatus {
    guard(|| {
        let k = body(b)?;
        check_len(k.dim(), n)?;
        write(out, k.support(slice(xi, n, "xi")?), "out")
    })
}

/// Support function of the projection body of a polytope.
///
/// # Safety
/// `x` must point to `n` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn affval_projection_body_support(
    b: *const AffvalBody,
    x: *const f64,
    n: usize,
    out: *mut f64,
) -> AffvalStatus {
    guard(|| {
        let k = body(b)?;
        check_len(k.dim(), n)?;
        let p = k
            .as_polytope()
            .ok_or_else(|| Failure(AffvalStatus::Unsupported, "projection bodies need a polytope".into()))?;
        write(out, projection_body(p).support(slice(x, n, "x")?), "out")
    })
}

/// Tensor from row-major coefficients: one row per monomial of degree `p`,
/// one column per monomial of degree `q`, both in graded lexicographic
/// order. `covector_first` selects `Sym^p V* ⊗ Sym^q V` (for `Φ`) over
/// `Sym^p V ⊗ Sym^q V*` (for `Ψ`).
///
/// # Safety
/// `coeffs` must point to `len` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn affval_tensor_new(
    n: usize,
    p: usize,
    q: usize,
    covector_first: bool,
    coeffs: *const f64,
    len: usize,
    out: *mut *mut AffvalTensor,
) -> AffvalStatus {
    guard(|| {
        let first = if covector_first { Variance::Covector } else { Variance::Vector };
        let t = MixedTensor::from_flat(n, p, q, first, slice(coeffs, len, "coeffs")?)?;
        write(out, Box::into_raw(Box::new(AffvalTensor(t))), "out")
    })
}

/// The identity of `V* ⊗ V`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn affval_tensor_identity(n: usize, out: *mut *mut AffvalTensor) -> AffvalStatus {
    guard(|| write(out, Box::into_raw(Box::new(AffvalTensor(MixedTensor::identity(n)))), "out"))
}

/// Releases a tensor. Null is ignored.
///
/// # Safety
/// `t` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn affval_tensor_free(t: *mut AffvalTensor) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Number of coefficients of a tensor.
///
/// # Safety
/// `t` must be a valid tensor and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn affval_tensor_len(t: *const AffvalTensor, out: *mut usize) -> AffvalStatus {
    guard(|| write(out, tensor(t)?.flat().len(), "out"))
}

unsafe fn evaluate(
    b: *const AffvalBody,
    t: *const AffvalTensor,
    value: *mut f64,
    error_estimate: *mut f64,
    psi: bool,
) -> AffvalStatus {
    guard(|| {
        let (k, t) = (body(b)?, tensor(t)?);
        let opts = EvalOptions::default();
        let r = if psi { psi_pq(k, t, &opts)? } else { phi_pq(k, t, &opts)? };
        write(value, r.value, "value")?;
        if !error_estimate.is_null() {
            error_estimate.write(r.error_estimate);
        }
        Ok(())
    })
}

/// `h_{Φ^{p,q}K}(φ)` with default quadrature settings. `error_estimate`
/// may be null.
///
/// # Safety
/// Handles must be valid and `value` writable.
#[no_mangle]
pub unsafe extern "C" fn affval_phi_pq(
    b: *const AffvalBody,
    phi: *const AffvalTensor,
    value: *mut f64,
    error_estimate: *mut f64,
) -> AffvalStatus {
    evaluate(b, phi, value, error_estimate, false)
}

/// `h_{Ψ^{p,q}K}(ψ)`; see [`affval_phi_pq`].
///
/// # Safety
/// Handles must be valid and `value` writable.
#[no_mangle]
pub unsafe extern "C" fn affval_psi_pq(
    b: *const AffvalBody,
    psi: *const AffvalTensor,
    value: *mut f64,
    error_estimate: *mut f64,
) -> AffvalStatus {
    evaluate(b, psi, value, error_estimate, true)
}

/// Schur polynomial `s_λ(x)`.
///
/// # Safety
/// `lambda` must point to `parts` values, `x` to `n` doubles, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn affval_schur_eval(
    lambda: *const usize,
    parts: usize,
    x: *const f64,
    n: usize,
    out: *mut f64,
) -> AffvalStatus {
    guard(|| {
        let lambda = Partition::new(slice(lambda, parts, "lambda")?.to_vec())?;
        write(out, schur_eval(&lambda, slice(x, n, "x")?)?, "out")
    })
}
