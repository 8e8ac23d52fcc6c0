//! C ABI over `dpp-core`.
//!
//! Ensembles are passed as JSON strings in the same schema as the `spec`
//! field of an experiment config, e.g.
//! `{"kind": "ginibre-product", "n": 4, "signs": "-+"}`.
//! Every entry point returns a [`DppStatus`]; on failure the message is
//! available from [`dpp_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use dpp_core::radial::{finite_n_cdf_exact, LimitLaw};
use dpp_core::weights::{moment_ratio, KernelModel};
use dpp_core::{ensembles::sample_product_eigenvalues, EnsembleSpec, Error, SeedStream};
use num_complex::Complex64;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DppStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidSpec = 3,
    OutOfRange = 4,
    Unsupported = 5,
    Numerical = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// Kernel of one ensemble.
pub struct DppKernelModel(KernelModel);

/// Large-size squared-radius law of one ensemble.
pub struct DppLimitLaw(LimitLaw);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> DppStatus {
    match e {
        Error::InvalidSpec(_) | Error::Parse(_) | Error::DimensionMismatch(_) => DppStatus::InvalidSpec,
        Error::OutOfRange { .. } | Error::DomainError { .. } => DppStatus::OutOfRange,
        Error::Unsupported(_) => DppStatus::Unsupported,
        _ => DppStatus::Numerical,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (DppStatus, String)>) -> DppStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DppStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            DppStatus::Panic
        }
    }
}

fn lift<T>(r: dpp_core::Result<T>) -> Result<T, (DppStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (DppStatus, String) {
    (DppStatus::NullPointer, format!("{what} is NULL"))
}

unsafe fn parse_spec(json: *const c_char) -> Result<EnsembleSpec, (DppStatus, String)> {
    if json.is_null() {
        return Err(null("spec_json"));
    }
    let text = CStr::from_ptr(json)
        .to_str()
        .map_err(|e| (DppStatus::InvalidUtf8, e.to_string()))?;
    let spec: EnsembleSpec = serde_json::from_str(text).map_err(|e| (DppStatus::InvalidSpec, e.to_string()))?;
    lift(spec.validate())
}

unsafe fn write_out<T>(ptr: *mut T, value: T, what: &str) -> Result<(), (DppStatus, String)> {
    if ptr.is_null() {
        return Err(null(what));
    }
    ptr.write(value);
    Ok(())
}

/// Message of the most recent failure on this thread. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn dpp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dpp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `spec_json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn dpp_kernel_model_new(spec_json: *const c_char, out: *mut *mut DppKernelModel) -> DppStatus {
    guard(|| {
        let spec = parse_spec(spec_json)?;
        let model = lift(KernelModel::new(&spec))?;
        write_out(out, Box::into_raw(Box::new(DppKernelModel(model))), "out")
    })
}

/// # Safety
/// `model` must come from [`dpp_kernel_model_new`] and not be used after
/// this call. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn dpp_kernel_model_free(model: *mut DppKernelModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// `K(x, y)` written to `out_re`, `out_im`.
///
/// # Safety
/// `model` must be a live handle; output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn dpp_kernel(
    model: *const DppKernelModel,
    x_re: f64,
    x_im: f64,
    y_re: f64,
    y_im: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> DppStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        let k = lift(m.0.kernel(Complex64::new(x_re, x_im), Complex64::new(y_re, y_im)))?;
        write_out(out_re, k.re, "out_re")?;
        write_out(out_im, k.im, "out_im")
    })
}

/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dpp_one_point_density(
    model: *const DppKernelModel,
    z_re: f64,
    z_im: f64,
    out: *mut f64,
) -> DppStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        let v = lift(m.0.one_point_density(Complex64::new(z_re, z_im)))?;
        write_out(out, v, "out")
    })
}

/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dpp_two_point_density(
    model: *const DppKernelModel,
    x_re: f64,
    x_im: f64,
    y_re: f64,
    y_im: f64,
    out: *mut f64,
) -> DppStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        let v = lift(m.0.two_point_density(Complex64::new(x_re, x_im), Complex64::new(y_re, y_im)))?;
        write_out(out, v, "out")
    })
}

/// `m_a / m_0` in closed form.
///
/// # Safety
/// `spec_json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dpp_moment_ratio(spec_json: *const c_char, a: usize, out: *mut f64) -> DppStatus {
    guard(|| {
        let spec = parse_spec(spec_json)?;
        write_out(out, lift(moment_ratio(&spec, a))?, "out")
    })
}

/// # Safety
/// `spec_json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dpp_limit_law_new(spec_json: *const c_char, out: *mut *mut DppLimitLaw) -> DppStatus {
    guard(|| {
        let spec = parse_spec(spec_json)?;
        let law = lift(LimitLaw::new(&spec))?;
        write_out(out, Box::into_raw(Box::new(DppLimitLaw(law))), "out")
    })
}

/// # Safety
/// `law` must come from [`dpp_limit_law_new`] and not be used after this
/// call. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn dpp_limit_law_free(law: *mut DppLimitLaw) {
    if !law.is_null() {
        drop(Box::from_raw(law));
    }
}

/// `φ(u)` for `u ∈ [0, 1)`.
///
/// # Safety
/// `law` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dpp_limit_phi(law: *const DppLimitLaw, u: f64, out: *mut f64) -> DppStatus {
    guard(|| {
        let l = law.as_ref().ok_or_else(|| null("law"))?;
        write_out(out, lift(l.0.phi(u))?, "out")
    })
}

/// Limiting CDF of `|z|²`.
///
/// # Safety
/// `law` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dpp_limit_cdf(law: *const DppLimitLaw, t: f64, out: *mut f64) -> DppStatus {
    guard(|| {
        let l = law.as_ref().ok_or_else(|| null("law"))?;
        write_out(out, l.0.cdf(t), "out")
    })
}

/// Exact finite-size CDF of `|z|²`; `scaled` is 0 or 1.
///
/// # Safety
/// `spec_json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dpp_finite_n_cdf(spec_json: *const c_char, t: f64, scaled: bool, out: *mut f64) -> DppStatus {
    guard(|| {
        let spec = parse_spec(spec_json)?;
        write_out(out, lift(finite_n_cdf_exact(&spec, t, scaled))?, "out")
    })
}

/// Eigenvalues of one draw from stream `(seed, index)`. Writes up to
/// `capacity` values into `re` and `im` and the point count into `count`;
/// returns `BufferTooSmall` (with `count` set) when `capacity` is too small.
///
/// # Safety
/// `re` and `im` must each hold `capacity` doubles; `count` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dpp_sample_eigenvalues(
    spec_json: *const c_char,
    scaled: bool,
    seed: u64,
    index: u64,
    re: *mut f64,
    im: *mut f64,
    capacity: usize,
    count: *mut usize,
) -> DppStatus {
    guard(|| {
        let spec = parse_spec(spec_json)?;
        if count.is_null() {
            return Err(null("count"));
        }
        let n = spec.point_count();
        count.write(n);
        if capacity < n {
            return Err((
                DppStatus::BufferTooSmall,
                format!("need room for {n} eigenvalues, capacity is {capacity}"),
            ));
        }
        if re.is_null() || im.is_null() {
            return Err(null("output buffer"));
        }
        let draw = lift(sample_product_eigenvalues(&spec, scaled, SeedStream::new(seed, index)))?;
        let re = std::slice::from_raw_parts_mut(re, n);
        let im = std::slice::from_raw_parts_mut(im, n);
        for (i, z) in draw.eigenvalues.iter().enumerate() {
            re[i] = z.re;
            im[i] = z.im;
        }
        Ok(())
    })
}
