//! C ABI over the `slicematch` library.
//!
//! Measures and orthogonal matrices are opaque heap handles created by
//! `sm_*_new`-style constructors and released with the matching `_free`.
//! Every fallible call returns an [`SmStatus`]; on failure a message is
//! available from [`sm_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use slicematch::slicing::domain;
use slicematch::{
    apply_operator, register_scale_shift, sample_haar_orthogonal, sliced_residual, stream_rng, sw2, w2_exact,
    DiscreteMeasure, DistanceKind, Error, OrthoMatrix, Sw2Config,
};

/// Opaque discrete probability measure.
pub struct SmMeasure(DiscreteMeasure);

/// Opaque n×n orthogonal matrix.
pub struct SmOrtho(OrthoMatrix);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    InvalidMeasure = 4,
    NotOrthogonal = 5,
    Unsupported = 6,
    Degenerate = 7,
    BufferTooSmall = 8,
    Internal = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmDistance {
    W2 = 0,
    Sw2 = 1,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SmStatus {
    match e {
        Error::DimensionMismatch { .. } => SmStatus::DimensionMismatch,
        Error::InvalidMeasure(_) => SmStatus::InvalidMeasure,
        Error::NotOrthogonal(_) => SmStatus::NotOrthogonal,
        Error::Unsupported(_) => SmStatus::Unsupported,
        Error::Degenerate(_) => SmStatus::Degenerate,
        Error::InvalidDirection(_)
        | Error::QuantileOutOfRange(_)
        | Error::InvalidArgument(_)
        | Error::Parse(_)
        | Error::Image(_)
        | Error::Io(_) => SmStatus::InvalidArgument,
    }
}

struct Fail(SmStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(SmStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SmStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            SmStatus::Internal
        }
    }
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn copy_out(src: &[f64], out: *mut f64, capacity: usize) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output buffer"));
    }
    if capacity < src.len() {
        return Err(Fail(
            SmStatus::BufferTooSmall,
            format!("buffer holds {capacity} values, need {}", src.len()),
        ));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), out, src.len());
    Ok(())
}

/// Message for the last failed call on this thread, or null.
///
/// The string stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Builds a measure from `len` atoms of dimension `dim` (row-major `points`).
///
/// `weights` may be null for uniform weights.
///
/// # Safety
/// `points` must hold `len * dim` values and `weights`, if non-null, `len` values.
#[no_mangle]
pub unsafe extern "C" fn sm_measure_new(
    dim: usize,
    len: usize,
    points: *const f64,
    weights: *const f64,
    out: *mut *mut SmMeasure,
) -> SmStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        if points.is_null() {
            return Err(null("points"));
        }
        let coords = slice::from_raw_parts(points, len * dim).to_vec();
        let m = if weights.is_null() {
            DiscreteMeasure::uniform_flat(dim, coords)?
        } else {
            DiscreteMeasure::from_flat(dim, coords, slice::from_raw_parts(weights, len).to_vec())?
        };
        *out = Box::into_raw(Box::new(SmMeasure(m)));
        Ok(())
    })
}

/// # Safety
/// `m` must come from this library and not be used afterwards; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn sm_measure_free(m: *mut SmMeasure) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Number of atoms, or 0 for null.
///
/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sm_measure_len(m: *const SmMeasure) -> usize {
    m.as_ref().map_or(0, |m| m.0.len())
}

/// Dimension, or 0 for null.
///
/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sm_measure_dim(m: *const SmMeasure) -> usize {
    m.as_ref().map_or(0, |m| m.0.dim())
}

/// Copies the row-major coordinates (`len * dim` values) into `out`.
///
/// # Safety
/// `out` must be writable for `capacity` values.
#[no_mangle]
pub unsafe extern "C" fn sm_measure_points(m: *const SmMeasure, out: *mut f64, capacity: usize) -> SmStatus {
    guard(|| copy_out(handle(m, "measure")?.0.flat_points(), out, capacity))
}

/// # Safety
/// `out` must be writable for `capacity` values.
#[no_mangle]
pub unsafe extern "C" fn sm_measure_weights(m: *const SmMeasure, out: *mut f64, capacity: usize) -> SmStatus {
    guard(|| copy_out(handle(m, "measure")?.0.weights(), out, capacity))
}

/// Mean (`dim` values) and second moment.
///
/// # Safety
/// `mean_out` must be writable for `dim` values and `m2_out` for one.
#[no_mangle]
pub unsafe extern "C" fn sm_measure_moments(m: *const SmMeasure, mean_out: *mut f64, m2_out: *mut f64) -> SmStatus {
    guard(|| {
        let m = handle(m, "measure")?;
        let moments = m.0.moments();
        copy_out(&moments.mean, mean_out, m.0.dim())?;
        *out_ref(m2_out, "m2_out")? = moments.second_moment;
        Ok(())
    })
}

/// Haar-random n×n orthogonal matrix, the same one `slicematch make-ortho` prints for this seed.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sm_ortho_haar(n: usize, seed: u64, out: *mut *mut SmOrtho) -> SmStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        if n == 0 {
            return Err(Fail(SmStatus::InvalidArgument, "dimension must be at least 1".into()));
        }
        let p = sample_haar_orthogonal(&mut stream_rng(seed, domain::MAKE_ORTHO, 0), n);
        *out = Box::into_raw(Box::new(SmOrtho(p)));
        Ok(())
    })
}

/// Validated orthogonal matrix from `n * n` row-major values.
///
/// # Safety
/// `rows` must hold `n * n` values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sm_ortho_from_rows(n: usize, rows: *const f64, out: *mut *mut SmOrtho) -> SmStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        if rows.is_null() {
            return Err(null("rows"));
        }
        let flat = slice::from_raw_parts(rows, n * n);
        let rows: Vec<Vec<f64>> = flat.chunks_exact(n.max(1)).map(<[f64]>::to_vec).collect();
        *out = Box::into_raw(Box::new(SmOrtho(OrthoMatrix::from_rows(&rows)?)));
        Ok(())
    })
}

/// # Safety
/// `p` must come from this library and not be used afterwards; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn sm_ortho_free(p: *mut SmOrtho) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// # Safety
/// `p` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sm_ortho_dim(p: *const SmOrtho) -> usize {
    p.as_ref().map_or(0, |p| p.0.dim())
}

/// Copies the matrix row-major (`n * n` values) into `out`.
///
/// # Safety
/// `out` must be writable for `capacity` values.
#[no_mangle]
pub unsafe extern "C" fn sm_ortho_rows(p: *const SmOrtho, out: *mut f64, capacity: usize) -> SmStatus {
    guard(|| {
        let flat: Vec<f64> = handle(p, "matrix")?.0.rows().concat();
        copy_out(&flat, out, capacity)
    })
}

/// `U(σ, μ, P)`, returned as a new measure handle.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sm_apply_operator(
    sigma: *const SmMeasure,
    mu: *const SmMeasure,
    p: *const SmOrtho,
    out: *mut *mut SmMeasure,
) -> SmStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let u = apply_operator(&handle(sigma, "sigma")?.0, &handle(mu, "mu")?.0, &handle(p, "matrix")?.0)?;
        *out = Box::into_raw(Box::new(SmMeasure(u)));
        Ok(())
    })
}

/// `Σᵢ W₂²(σ^{θᵢ}, μ^{θᵢ})` over the columns of P.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sm_sliced_residual(
    sigma: *const SmMeasure,
    mu: *const SmMeasure,
    p: *const SmOrtho,
    out: *mut f64,
) -> SmStatus {
    guard(|| {
        let v = sliced_residual(&handle(sigma, "sigma")?.0, &handle(mu, "mu")?.0, &handle(p, "matrix")?.0)?;
        *out_ref(out, "out")? = v;
        Ok(())
    })
}

/// Exact `W₂` between equal-size uniform clouds.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sm_w2_exact(a: *const SmMeasure, b: *const SmMeasure, out: *mut f64) -> SmStatus {
    guard(|| {
        let v = w2_exact(&handle(a, "a")?.0, &handle(b, "b")?.0)?;
        *out_ref(out, "out")? = v;
        Ok(())
    })
}

/// Monte-Carlo `SW₂` and its standard error; `std_error_out` may be null.
///
/// # Safety
/// Handles must be live and `value_out` writable.
#[no_mangle]
pub unsafe extern "C" fn sm_sw2(
    a: *const SmMeasure,
    b: *const SmMeasure,
    num_directions: usize,
    seed: u64,
    value_out: *mut f64,
    std_error_out: *mut f64,
) -> SmStatus {
    guard(|| {
        let est = sw2(&handle(a, "a")?.0, &handle(b, "b")?.0, num_directions, seed)?;
        *out_ref(value_out, "value_out")? = est.value;
        if let Some(se) = std_error_out.as_mut() {
            *se = est.std_error;
        }
        Ok(())
    })
}

/// Closed-form `S(x) = a x + b` registering σ onto η.
///
/// `num_directions` and `seed` are read only for [`SmDistance::Sw2`].
/// `degenerate_out` may be null; it is set when the scale is not positive.
///
/// # Safety
/// Handles must be live, `a_out` writable and `b_out` writable for `dim` values.
#[no_mangle]
pub unsafe extern "C" fn sm_register_scale_shift(
    sigma: *const SmMeasure,
    eta: *const SmMeasure,
    distance: SmDistance,
    num_directions: usize,
    seed: u64,
    a_out: *mut f64,
    b_out: *mut f64,
    degenerate_out: *mut bool,
) -> SmStatus {
    guard(|| {
        let sigma = &handle(sigma, "sigma")?.0;
        let eta = &handle(eta, "eta")?.0;
        let cfg = Sw2Config { num_directions, seed };
        let report = match distance {
            SmDistance::W2 => register_scale_shift(sigma, eta, DistanceKind::W2, None)?,
            SmDistance::Sw2 => register_scale_shift(sigma, eta, DistanceKind::SW2, Some(&cfg))?,
        };
        let map = report.scale_shift().expect("scale-shift report");
        *out_ref(a_out, "a_out")? = map.a;
        copy_out(&map.b, b_out, sigma.dim())?;
        if let Some(d) = degenerate_out.as_mut() {
            *d = report.degenerate;
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CStr;

    #[test]
    fn errors_map_to_statuses() {
        assert_eq!(status_of(&Error::Unsupported("x".into())), SmStatus::Unsupported);
        assert_eq!(status_of(&Error::Degenerate("x".into())), SmStatus::Degenerate);
        assert_eq!(status_of(&Error::NotOrthogonal(1.0)), SmStatus::NotOrthogonal);
        assert_eq!(
            status_of(&Error::DimensionMismatch { expected: 2, found: 3 }),
            SmStatus::DimensionMismatch
        );
    }

    #[test]
    fn panics_become_internal_status() {
        let status = guard(|| panic!("boom"));
        assert_eq!(status, SmStatus::Internal);
        let msg = unsafe { CStr::from_ptr(sm_last_error_message()) };
        assert_eq!(msg.to_str().unwrap(), "internal panic");
    }
}
