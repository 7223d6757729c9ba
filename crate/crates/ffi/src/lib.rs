//! C ABI over `hedgefw`.
//!
//! Every fallible function returns an [`HfwStatus`]; on failure a message is
//! available from [`hfw_last_error_message`] on the same thread. Objects are
//! opaque handles created by `*_new`/`*_generate`/`hfw_run`/`hfw_cv_lasso`
//! and released with the matching `*_free`. Output buffers are caller-owned
//! and must have exactly the documented length.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;

use hedgefw::baseline::{cv_lasso, lambda_path, CvResult};
use hedgefw::datagen::{gen_instance, Design, SyntheticSpec};
use hedgefw::metrics::prediction_error;
use hedgefw::{
    default_grid, run_hedge_fw, CandidateGrid, Error, FwConfig, GroundTruth, HedgeConfig, HedgeFwOutput, Matrix,
    RegressionInstance,
};

/// Status code returned by every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HfwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    NonFinite = 4,
    DegenerateDesign = 5,
    Numerical = 6,
    Io = 7,
    Panic = 8,
}

/// Design family for [`hfw_instance_generate`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HfwDesign {
    GaussianIid = 0,
    ToeplitzCorrelated = 1,
}

/// A regression instance, optionally with the ground truth it was drawn from.
pub struct HfwInstance {
    inner: RegressionInstance,
    truth: Option<GroundTruth>,
}

/// Output of a Hedge-FW run.
pub struct HfwHedgeResult {
    inner: HedgeFwOutput,
}

/// Output of cross-validated LASSO.
pub struct HfwCvResult {
    inner: CvResult,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(HfwStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::DimensionMismatch { .. } => HfwStatus::DimensionMismatch,
            Error::NonFiniteEntry { .. } | Error::NonFiniteValue { .. } | Error::NonFiniteObservation { .. } => {
                HfwStatus::NonFinite
            }
            Error::DegenerateDesign => HfwStatus::DegenerateDesign,
            Error::OutsideBall { .. } | Error::InfeasibleIterate { .. } | Error::NoObservations => HfwStatus::Numerical,
            Error::Io(_) => HfwStatus::Io,
            _ => HfwStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn fail(status: HfwStatus, msg: impl Into<String>) -> Failure {
    Failure(status, msg.into())
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> HfwStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_last_error("");
            HfwStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_last_error(&format!("internal panic: {msg}"));
            HfwStatus::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| fail(HfwStatus::NullPointer, format!("{what} is null")))
}

unsafe fn input<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(HfwStatus::NullPointer, format!("{what} is null")));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn write_out(src: &[f64], out: *mut f64, len: usize, what: &str) -> Result<(), Failure> {
    if len != src.len() {
        return Err(fail(
            HfwStatus::DimensionMismatch,
            format!("{what} needs length {}, got {len}", src.len()),
        ));
    }
    if src.is_empty() {
        return Ok(());
    }
    if out.is_null() {
        return Err(fail(HfwStatus::NullPointer, format!("{what} buffer is null")));
    }
    slice::from_raw_parts_mut(out, len).copy_from_slice(src);
    Ok(())
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(fail(HfwStatus::NullPointer, "output handle pointer is null"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hfw_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => c"",
    };
    VERSION.as_ptr()
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call into the library on this
/// thread.
#[no_mangle]
pub extern "C" fn hfw_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Copies a row-major `n x p` design and a length-`n` response into a new
/// instance.
///
/// # Safety
/// `x` must point to `n * p` doubles, `y` to `n`, `out` to writable storage.
#[no_mangle]
pub unsafe extern "C" fn hfw_instance_new(
    x: *const f64,
    y: *const f64,
    n: usize,
    p: usize,
    out: *mut *mut HfwInstance,
) -> HfwStatus {
    guard(|| {
        let len = n
            .checked_mul(p)
            .ok_or_else(|| fail(HfwStatus::InvalidArgument, "n * p overflows"))?;
        let x = input(x, len, "x")?;
        let y = input(y, n, "y")?;
        let inner = RegressionInstance::new(Matrix::new(n, p, x.to_vec())?, y.to_vec())?;
        store(out, HfwInstance { inner, truth: None })
    })
}

/// Draws a synthetic instance. `rho` is ignored for the i.i.d. design.
///
/// # Safety
/// `out` must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn hfw_instance_generate(
    n: usize,
    p: usize,
    s0: usize,
    sigma: f64,
    design: HfwDesign,
    rho: f64,
    seed: u64,
    out: *mut *mut HfwInstance,
) -> HfwStatus {
    guard(|| {
        let design = match design {
            HfwDesign::GaussianIid => Design::GaussianIid,
            HfwDesign::ToeplitzCorrelated => Design::ToeplitzCorrelated { rho },
        };
        let spec = SyntheticSpec {
            n,
            p,
            s0,
            sigma,
            design,
            seed,
        };
        let (inner, truth) = gen_instance(&spec)?;
        store(
            out,
            HfwInstance {
                inner,
                truth: Some(truth),
            },
        )
    })
}

/// Number of observations; 0 for a null handle.
///
/// # Safety
/// `inst` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hfw_instance_n(inst: *const HfwInstance) -> usize {
    inst.as_ref().map_or(0, |i| i.inner.n())
}

/// Number of features; 0 for a null handle.
///
/// # Safety
/// `inst` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hfw_instance_p(inst: *const HfwInstance) -> usize {
    inst.as_ref().map_or(0, |i| i.inner.p())
}

/// Copies the response into `out` (length `n`).
///
/// # Safety
/// `inst` must be a live handle and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn hfw_instance_y(inst: *const HfwInstance, out: *mut f64, len: usize) -> HfwStatus {
    guard(|| write_out(as_ref(inst, "instance")?.inner.y(), out, len, "y"))
}

/// Copies the generating coefficient vector into `out` (length `p`). Fails
/// with `INVALID_ARGUMENT` for instances built from caller data.
///
/// # Safety
/// `inst` must be a live handle and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn hfw_instance_true_beta(inst: *const HfwInstance, out: *mut f64, len: usize) -> HfwStatus {
    guard(|| {
        let truth = as_ref(inst, "instance")?
            .truth
            .as_ref()
            .ok_or_else(|| fail(HfwStatus::InvalidArgument, "instance has no ground truth"))?;
        write_out(truth.beta(), out, len, "true beta")
    })
}

/// # Safety
/// `inst` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hfw_instance_free(inst: *mut HfwInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Writes the default geometric radius grid of `size` points into `out`.
///
/// # Safety
/// `inst` must be a live handle and `out` must hold `size` doubles.
#[no_mangle]
pub unsafe extern "C" fn hfw_default_grid(inst: *const HfwInstance, size: usize, out: *mut f64) -> HfwStatus {
    guard(|| {
        let grid = default_grid(&as_ref(inst, "instance")?.inner, size)?;
        write_out(grid.radii(), out, size, "grid")
    })
}

/// Runs Hedge over stochastic Frank-Wolfe experts, one per radius. A
/// non-positive `eta` selects `sqrt(8 ln G / n)`; `dirac_tolerance` is
/// checked but only used later by [`hfw_result_select`].
///
/// # Safety
/// `inst` must be a live handle, `radii` must hold `num_radii` doubles and
/// `out` must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn hfw_run(
    inst: *const HfwInstance,
    radii: *const f64,
    num_radii: usize,
    eta: f64,
    k_step: f64,
    out: *mut *mut HfwHedgeResult,
) -> HfwStatus {
    guard(|| {
        let inst = &as_ref(inst, "instance")?.inner;
        let grid = CandidateGrid::new(input(radii, num_radii, "radii")?.to_vec())?;
        let eta = if eta > 0.0 {
            eta
        } else {
            HedgeConfig::tuned_eta(grid.len(), inst.n())
        };
        let cfg = HedgeConfig::new(eta, HedgeConfig::DEFAULT_DIRAC_TOLERANCE)?;
        let inner = run_hedge_fw(inst, &grid, &cfg, &FwConfig::new(k_step)?)?;
        store(out, HfwHedgeResult { inner })
    })
}

/// Number of experts; 0 for a null handle.
///
/// # Safety
/// `res` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hfw_result_num_experts(res: *const HfwHedgeResult) -> usize {
    res.as_ref().map_or(0, |r| r.inner.num_experts())
}

/// Learning rate actually used; NaN for a null handle.
///
/// # Safety
/// `res` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hfw_result_eta(res: *const HfwHedgeResult) -> f64 {
    res.as_ref().map_or(f64::NAN, |r| r.inner.eta)
}

/// Final weights (length G).
///
/// # Safety
/// `res` must be a live handle and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn hfw_result_weights(res: *const HfwHedgeResult, out: *mut f64, len: usize) -> HfwStatus {
    guard(|| write_out(&as_ref(res, "result")?.inner.weights, out, len, "weights"))
}

/// Natural logs of the final weights (length G).
///
/// # Safety
/// `res` must be a live handle and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn hfw_result_log_weights(res: *const HfwHedgeResult, out: *mut f64, len: usize) -> HfwStatus {
    guard(|| write_out(&as_ref(res, "result")?.inner.log_weights, out, len, "log weights"))
}

/// Cumulative prequential loss per expert (length G).
///
/// # Safety
/// `res` must be a live handle and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn hfw_result_cumulative_loss(
    res: *const HfwHedgeResult,
    out: *mut f64,
    len: usize,
) -> HfwStatus {
    guard(|| {
        write_out(
            &as_ref(res, "result")?.inner.cumulative_loss,
            out,
            len,
            "cumulative loss",
        )
    })
}

/// Final iterate of expert `expert` (length p).
///
/// # Safety
/// `res` must be a live handle and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn hfw_result_iterate(
    res: *const HfwHedgeResult,
    expert: usize,
    out: *mut f64,
    len: usize,
) -> HfwStatus {
    guard(|| {
        let r = &as_ref(res, "result")?.inner;
        let b = r.iterates.get(expert).ok_or_else(|| {
            fail(
                HfwStatus::InvalidArgument,
                format!("expert {expert} out of range (G = {})", r.num_experts()),
            )
        })?;
        write_out(b, out, len, "iterate")
    })
}

/// Weight-averaged iterate (length p).
///
/// # Safety
/// `res` must be a live handle and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn hfw_result_aggregate(res: *const HfwHedgeResult, out: *mut f64, len: usize) -> HfwStatus {
    guard(|| write_out(&as_ref(res, "result")?.inner.aggregate(), out, len, "aggregate"))
}

/// Iterate of the highest-weight expert (length p). `out_expert` and
/// `out_is_dirac` may be null.
///
/// # Safety
/// `res` must be a live handle, `out` must hold `len` doubles, and the
/// optional pointers must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn hfw_result_select(
    res: *const HfwHedgeResult,
    dirac_tolerance: f64,
    out: *mut f64,
    len: usize,
    out_expert: *mut usize,
    out_is_dirac: *mut bool,
) -> HfwStatus {
    guard(|| {
        let sel = as_ref(res, "result")?.inner.select(dirac_tolerance)?;
        write_out(&sel.beta, out, len, "selected iterate")?;
        if !out_expert.is_null() {
            *out_expert = sel.expert;
        }
        if !out_is_dirac.is_null() {
            *out_is_dirac = sel.is_dirac;
        }
        Ok(())
    })
}

/// # Safety
/// `res` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hfw_result_free(res: *mut HfwHedgeResult) {
    if !res.is_null() {
        drop(Box::from_raw(res));
    }
}

/// k-fold cross-validated LASSO over the default geometric lambda path of
/// `path_size` points.
///
/// # Safety
/// `inst` must be a live handle and `out` must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn hfw_cv_lasso(
    inst: *const HfwInstance,
    path_size: usize,
    folds: usize,
    seed: u64,
    out: *mut *mut HfwCvResult,
) -> HfwStatus {
    guard(|| {
        let inst = &as_ref(inst, "instance")?.inner;
        let path = lambda_path(inst, path_size)?;
        let inner = cv_lasso(inst, &path, folds, seed)?;
        store(out, HfwCvResult { inner })
    })
}

/// Selected penalty; NaN for a null handle.
///
/// # Safety
/// `res` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hfw_cv_best_lambda(res: *const HfwCvResult) -> f64 {
    res.as_ref().map_or(f64::NAN, |r| r.inner.best_lambda)
}

/// Refit coefficients at the selected penalty (length p).
///
/// # Safety
/// `res` must be a live handle and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn hfw_cv_beta(res: *const HfwCvResult, out: *mut f64, len: usize) -> HfwStatus {
    guard(|| write_out(&as_ref(res, "cv result")?.inner.final_beta, out, len, "cv beta"))
}

/// # Safety
/// `res` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hfw_cv_free(res: *mut HfwCvResult) {
    if !res.is_null() {
        drop(Box::from_raw(res));
    }
}

/// `||X (b - beta)||_2 / sqrt(n)` against the instance's ground truth.
///
/// # Safety
/// `inst` must be a live handle, `beta` must hold `len` doubles and `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn hfw_prediction_error(
    inst: *const HfwInstance,
    beta: *const f64,
    len: usize,
    out: *mut f64,
) -> HfwStatus {
    guard(|| {
        let inst = as_ref(inst, "instance")?;
        let truth = inst
            .truth
            .as_ref()
            .ok_or_else(|| fail(HfwStatus::InvalidArgument, "instance has no ground truth"))?;
        let b = input(beta, len, "beta")?;
        let v = prediction_error(&inst.inner, truth, b)?;
        if out.is_null() {
            return Err(fail(HfwStatus::NullPointer, "out is null"));
        }
        *out = v;
        Ok(())
    })
}

/// Not part of the C header: lets the tests check that panics are contained.
#[doc(hidden)]
pub fn __guarded_panic() -> HfwStatus {
    guard(|| panic!("boom"))
}
