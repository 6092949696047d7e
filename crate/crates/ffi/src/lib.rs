//! C interface to the constrained K-means solver.
//!
//! Every fallible function returns a [`CkStatus`]. On failure the message is
//! kept per thread and can be read with [`ck_last_error`] until the next call
//! on the same thread. Handles are opaque and owned by the caller, who frees
//! them with the matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ckmeans::admm::run;
use ckmeans::oracle::brute_force_solve;
use ckmeans::{ConstraintSet, DataMatrix, Error, SolveResult, SolverConfig};

/// Result codes of the C interface.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CkStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Dimension = 3,
    Index = 4,
    TooLarge = 5,
    Io = 6,
    Panic = 7,
}

impl From<&Error> for CkStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Dimension { .. } => CkStatus::Dimension,
            Error::Index { .. } => CkStatus::Index,
            Error::TooLarge { .. } => CkStatus::TooLarge,
            Error::Io(_) => CkStatus::Io,
            Error::Validation(_) | Error::Ingestion { .. } => CkStatus::InvalidArgument,
        }
    }
}

/// Points of one problem instance.
pub struct CkData(DataMatrix);

/// Cluster sizes plus must-link and cannot-link pairs.
#[derive(Default)]
pub struct CkConstraints {
    sizes: Option<Vec<usize>>,
    must: Vec<(usize, usize)>,
    cannot: Vec<(usize, usize)>,
}

/// Outcome of one solve.
pub struct CkResult(SolveResult);

/// Solver settings. Obtain defaults from [`ck_config_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CkConfig {
    pub rho: f64,
    pub max_iters: usize,
    pub cg_tol: f64,
    pub seed: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    let c = CString::new(text).expect("nul bytes removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

fn fail(status: CkStatus, msg: impl Into<String>) -> CkStatus {
    set_error(msg);
    status
}

/// Runs `body` with the error slot cleared, turning library errors and
/// panics into status codes.
fn guard(body: impl FnOnce() -> Result<(), CkStatus>) -> CkStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => CkStatus::Ok,
        Ok(Err(status)) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(CkStatus::Panic, format!("panic: {msg}"))
        }
    }
}

fn lib_err(e: Error) -> CkStatus {
    let status = CkStatus::from(&e);
    fail(status, e.to_string())
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), CkStatus> {
    if p.is_null() {
        Err(fail(CkStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

/// Message of the last failure on this thread, or null. The pointer stays
/// valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn ck_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn ck_status_str(status: CkStatus) -> *const c_char {
    let s: &'static CStr = match status {
        CkStatus::Ok => c"ok",
        CkStatus::NullPointer => c"null pointer",
        CkStatus::InvalidArgument => c"invalid argument",
        CkStatus::Dimension => c"dimension mismatch",
        CkStatus::Index => c"index out of range",
        CkStatus::TooLarge => c"search space too large",
        CkStatus::Io => c"i/o error",
        CkStatus::Panic => c"internal panic",
    };
    s.as_ptr()
}

#[no_mangle]
pub extern "C" fn ck_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn ck_config_default() -> CkConfig {
    let d = SolverConfig::default();
    CkConfig {
        rho: d.rho,
        max_iters: d.max_outer_iters,
        cg_tol: d.cg_tol,
        seed: d.seed,
    }
}

/// Copies `n` points of dimension `d` stored row by row.
///
/// # Safety
/// `values` must point to `n * d` readable doubles and `out` to writable
/// storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn ck_data_new(values: *const f64, n: usize, d: usize, out: *mut *mut CkData) -> CkStatus {
    guard(|| {
        non_null(values, "values")?;
        non_null(out, "out")?;
        let len = n
            .checked_mul(d)
            .ok_or_else(|| fail(CkStatus::InvalidArgument, "n * d overflows"))?;
        if len == 0 {
            return Err(fail(CkStatus::InvalidArgument, "n and d must be at least 1"));
        }
        let flat = std::slice::from_raw_parts(values, len);
        let points: Vec<&[f64]> = flat.chunks_exact(d).collect();
        let data = DataMatrix::from_points(&points).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(CkData(data)));
        Ok(())
    })
}

/// # Safety
/// `data` must be null or a handle from [`ck_data_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ck_data_free(data: *mut CkData) {
    if !data.is_null() {
        drop(Box::from_raw(data));
    }
}

/// Empty constraint set.
#[no_mangle]
pub extern "C" fn ck_constraints_new() -> *mut CkConstraints {
    Box::into_raw(Box::default())
}

/// # Safety
/// `cs` must be null or a handle from [`ck_constraints_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ck_constraints_free(cs: *mut CkConstraints) {
    if !cs.is_null() {
        drop(Box::from_raw(cs));
    }
}

/// Requires cluster `j` to hold exactly `sizes[j]` points.
///
/// # Safety
/// `cs` must be a live handle and `sizes` must point to `k` readable values.
#[no_mangle]
pub unsafe extern "C" fn ck_constraints_set_sizes(cs: *mut CkConstraints, sizes: *const usize, k: usize) -> CkStatus {
    guard(|| {
        non_null(cs, "constraints")?;
        non_null(sizes, "sizes")?;
        (*cs).sizes = Some(std::slice::from_raw_parts(sizes, k).to_vec());
        Ok(())
    })
}

/// # Safety
/// `cs` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ck_constraints_add_must_link(cs: *mut CkConstraints, a: usize, b: usize) -> CkStatus {
    guard(|| {
        non_null(cs, "constraints")?;
        (*cs).must.push((a, b));
        Ok(())
    })
}

/// # Safety
/// `cs` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ck_constraints_add_cannot_link(cs: *mut CkConstraints, a: usize, b: usize) -> CkStatus {
    guard(|| {
        non_null(cs, "constraints")?;
        (*cs).cannot.push((a, b));
        Ok(())
    })
}

unsafe fn constraint_set(cs: *const CkConstraints) -> ConstraintSet {
    match cs.as_ref() {
        Some(c) => ConstraintSet::new(c.sizes.clone(), &c.must, &c.cannot),
        None => ConstraintSet::unconstrained(),
    }
}

/// Solves the instance. `constraints` and `config` may be null for none and
/// defaults. A run that stops without converging still returns `CK_STATUS_OK`;
/// check [`ck_result_converged`].
///
/// # Safety
/// Non-null pointers must be live handles or readable values; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn ck_solve(
    data: *const CkData,
    k: usize,
    constraints: *const CkConstraints,
    config: *const CkConfig,
    out: *mut *mut CkResult,
) -> CkStatus {
    guard(|| {
        non_null(data, "data")?;
        non_null(out, "out")?;
        let mut cfg = SolverConfig::default();
        if let Some(c) = config.as_ref() {
            cfg.rho = c.rho;
            cfg.max_outer_iters = c.max_iters;
            cfg.cg_tol = c.cg_tol;
            cfg.seed = c.seed;
        }
        cfg.validate().map_err(lib_err)?;
        let cs = constraint_set(constraints);
        let result = run(&(*data).0, k, &cs, &cfg).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(CkResult(result)));
        Ok(())
    })
}

/// Exhaustive optimum over all `k^n` labellings, refused above `limit`.
/// `*found` is false when no labelling meets the constraints.
///
/// # Safety
/// `data` must be a live handle, `constraints` null or a live handle, and
/// `objective`, `found` writable.
#[no_mangle]
pub unsafe extern "C" fn ck_oracle(
    data: *const CkData,
    k: usize,
    constraints: *const CkConstraints,
    limit: u64,
    objective: *mut f64,
    found: *mut bool,
) -> CkStatus {
    guard(|| {
        non_null(data, "data")?;
        non_null(objective, "objective")?;
        non_null(found, "found")?;
        let cs = constraint_set(constraints);
        let res = brute_force_solve(&(*data).0, k, &cs, u128::from(limit)).map_err(lib_err)?;
        *found = res.best_objective.is_some();
        *objective = res.best_objective.unwrap_or(f64::NAN);
        Ok(())
    })
}

/// # Safety
/// `result` must be null or a handle from [`ck_solve`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ck_result_free(result: *mut CkResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Number of labels, i.e. points. Zero for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ck_result_len(result: *const CkResult) -> usize {
    result.as_ref().map_or(0, |r| r.0.labels.len())
}

/// Copies the cluster label of every point into `labels`.
///
/// # Safety
/// `result` must be a live handle and `labels` must have room for `len` values.
#[no_mangle]
pub unsafe extern "C" fn ck_result_labels(result: *const CkResult, labels: *mut usize, len: usize) -> CkStatus {
    guard(|| {
        non_null(result, "result")?;
        non_null(labels, "labels")?;
        let src = &(*result).0.labels;
        if len < src.len() {
            return Err(fail(
                CkStatus::Dimension,
                format!("label buffer holds {len}, need {}", src.len()),
            ));
        }
        ptr::copy_nonoverlapping(src.as_ptr(), labels, src.len());
        Ok(())
    })
}

/// Clustering objective of the labels. NaN for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ck_result_objective(result: *const CkResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.0.objective)
}

/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ck_result_converged(result: *const CkResult) -> bool {
    result.as_ref().is_some_and(|r| r.0.converged)
}

/// Whether the labels meet every constraint.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ck_result_feasible(result: *const CkResult) -> bool {
    result.as_ref().is_some_and(|r| r.0.feasible())
}

/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ck_result_iterations(result: *const CkResult) -> usize {
    result.as_ref().map_or(0, |r| r.0.iterations)
}
