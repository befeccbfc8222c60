//! C ABI for the hypca pipeline: opaque handles, integer status codes, and
//! a thread-local last-error message.
//!
//! Every function is panic-safe (panics become `HYPCA_STATUS_INTERNAL`) and
//! null-safe (null pointers become `HYPCA_STATUS_NULL_ARGUMENT`). Handles
//! are created and released only by this library; freeing a handle twice or
//! using it after free is undefined behavior, as in any C API.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use hypca::cube::{generate_synthetic, load_cube, save_cube, HyperCube};
use hypca::exec::{ExecMode, ExecPlan};
use hypca::jacobi::{EigenDecomposition, JacobiConfig, PivotStrategy};
use hypca::pipeline::{self, PipelineConfig};
use hypca::stages::{explained_variance, Projection};
use hypca::Error;

/// Result codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HypcaStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    Io = 3,
    NotConverged = 4,
    Internal = 5,
}

/// Pivot strategies of the eigensolver.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HypcaStrategy {
    Classical = 0,
    Cyclic = 1,
    Parallel = 2,
}

/// Opaque hyperspectral cube handle.
pub struct HypcaCube {
    inner: HyperCube,
}

/// Opaque reduction result: eigenpairs plus projected scores.
pub struct HypcaReduction {
    eigen: EigenDecomposition,
    projection: Projection,
}

thread_local! {
    static LAST_ERROR: RefCell<Vec<u8>> = const { RefCell::new(Vec::new()) };
}

fn set_error(msg: &str) {
    LAST_ERROR.with(|slot| {
        let mut bytes = slot.borrow_mut();
        bytes.clear();
        bytes.extend_from_slice(msg.as_bytes());
        bytes.push(0);
    });
}

fn status_of(err: &Error) -> HypcaStatus {
    match err {
        Error::Io { .. } | Error::SizeMismatch { .. } => HypcaStatus::Io,
        Error::NotConverged { .. } => HypcaStatus::NotConverged,
        _ => HypcaStatus::InvalidArgument,
    }
}

fn fail(err: &Error) -> HypcaStatus {
    set_error(&err.to_string());
    status_of(err)
}

fn fail_msg(status: HypcaStatus, msg: &str) -> HypcaStatus {
    set_error(msg);
    status
}

fn guarded(body: impl FnOnce() -> HypcaStatus) -> HypcaStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => fail_msg(HypcaStatus::Internal, "internal panic"),
    }
}

/// # Safety
/// `ptr` must be a valid NUL-terminated UTF-8 string.
unsafe fn path_arg(ptr: *const c_char) -> Result<PathBuf, HypcaStatus> {
    if ptr.is_null() {
        return Err(fail_msg(HypcaStatus::NullArgument, "null path argument"));
    }
    match CStr::from_ptr(ptr).to_str() {
        Ok(s) => Ok(PathBuf::from(s)),
        Err(_) => Err(fail_msg(
            HypcaStatus::InvalidArgument,
            "path is not valid UTF-8",
        )),
    }
}

fn plan_for(workers: usize) -> Result<ExecPlan, HypcaStatus> {
    if workers == 0 {
        return Ok(ExecPlan::default_parallel());
    }
    ExecPlan::new(workers, ExecMode::Deterministic).map_err(|e| fail(&e))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hypca_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copies the calling thread's last error message into `buf` (truncated to
/// `cap` bytes, always NUL-terminated when `cap > 0`) and returns the full
/// message length including the NUL. Returns 0 when no error is recorded.
///
/// # Safety
/// `buf` must point to at least `cap` writable bytes, or be null with
/// `cap == 0` to query the required length.
#[no_mangle]
pub unsafe extern "C" fn hypca_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let bytes = slot.borrow();
        if bytes.is_empty() {
            return 0;
        }
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap);
            std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            // Guarantee termination even when truncating.
            *buf.add(n - 1) = 0;
        }
        bytes.len()
    })
}

/// Generates a synthetic cube from the builtin signature library.
/// `workers = 0` means "all hardware threads". `snr_db = INFINITY` disables
/// noise. On success `*out` owns the new handle.
///
/// # Safety
/// `out` must be a valid pointer to a cube-handle slot.
#[no_mangle]
pub unsafe extern "C" fn hypca_cube_synthetic(
    width: usize,
    height: usize,
    bands: usize,
    endmembers: usize,
    snr_db: f64,
    seed: u64,
    workers: usize,
    out: *mut *mut HypcaCube,
) -> HypcaStatus {
    guarded(|| {
        if out.is_null() {
            return fail_msg(HypcaStatus::NullArgument, "null output handle");
        }
        let plan = match plan_for(workers) {
            Ok(p) => p,
            Err(s) => return s,
        };
        let library = endmembers.max(10);
        let result = hypca::cube::builtin_signatures(bands, library, seed).and_then(|sigs| {
            generate_synthetic(&sigs, width, height, endmembers, snr_db, seed, &plan)
        });
        match result {
            Ok(scene) => {
                *out = Box::into_raw(Box::new(HypcaCube { inner: scene.cube }));
                HypcaStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Loads a cube from a header sidecar and raw data file.
///
/// # Safety
/// `header_path` and `data_path` must be valid NUL-terminated strings and
/// `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn hypca_cube_load(
    header_path: *const c_char,
    data_path: *const c_char,
    out: *mut *mut HypcaCube,
) -> HypcaStatus {
    guarded(|| {
        if out.is_null() {
            return fail_msg(HypcaStatus::NullArgument, "null output handle");
        }
        let (hdr, raw) = match (path_arg(header_path), path_arg(data_path)) {
            (Ok(h), Ok(r)) => (h, r),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        match load_cube(&hdr, &raw) {
            Ok(cube) => {
                *out = Box::into_raw(Box::new(HypcaCube { inner: cube }));
                HypcaStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Writes a cube as a header sidecar plus raw data file.
///
/// # Safety
/// `cube` must be a live handle; the paths must be valid NUL-terminated
/// strings.
#[no_mangle]
pub unsafe extern "C" fn hypca_cube_save(
    cube: *const HypcaCube,
    header_path: *const c_char,
    data_path: *const c_char,
) -> HypcaStatus {
    guarded(|| {
        let Some(cube) = cube.as_ref() else {
            return fail_msg(HypcaStatus::NullArgument, "null cube handle");
        };
        let (hdr, raw) = match (path_arg(header_path), path_arg(data_path)) {
            (Ok(h), Ok(r)) => (h, r),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        match save_cube(&cube.inner, &hdr, &raw) {
            Ok(()) => HypcaStatus::Ok,
            Err(e) => fail(&e),
        }
    })
}

/// # Safety
/// `cube` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn hypca_cube_width(cube: *const HypcaCube) -> usize {
    cube.as_ref().map_or(0, |c| c.inner.width())
}

/// # Safety
/// `cube` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn hypca_cube_height(cube: *const HypcaCube) -> usize {
    cube.as_ref().map_or(0, |c| c.inner.height())
}

/// # Safety
/// `cube` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn hypca_cube_bands(cube: *const HypcaCube) -> usize {
    cube.as_ref().map_or(0, |c| c.inner.bands())
}

/// # Safety
/// `cube` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn hypca_cube_pixels(cube: *const HypcaCube) -> usize {
    cube.as_ref().map_or(0, |c| c.inner.pixels())
}

/// Releases a cube handle. Null is a no-op.
///
/// # Safety
/// `cube` must be a handle returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hypca_cube_free(cube: *mut HypcaCube) {
    if !cube.is_null() {
        drop(Box::from_raw(cube));
    }
}

/// Runs mean-centering, covariance, the Jacobi eigensolver and projection
/// of the first `pcs` components. `epsilon_rel <= 0` selects the default
/// stop factor; `max_sweeps = 0` the default sweep budget; `workers = 0`
/// all hardware threads.
///
/// # Safety
/// `cube` must be a live handle and `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn hypca_reduce(
    cube: *const HypcaCube,
    pcs: usize,
    strategy: HypcaStrategy,
    epsilon_rel: f64,
    max_sweeps: usize,
    workers: usize,
    out: *mut *mut HypcaReduction,
) -> HypcaStatus {
    guarded(|| {
        let Some(cube) = cube.as_ref() else {
            return fail_msg(HypcaStatus::NullArgument, "null cube handle");
        };
        if out.is_null() {
            return fail_msg(HypcaStatus::NullArgument, "null output handle");
        }
        let plan = match plan_for(workers) {
            Ok(p) => p,
            Err(s) => return s,
        };
        let defaults = JacobiConfig::default();
        let cfg = PipelineConfig {
            jacobi: JacobiConfig {
                strategy: match strategy {
                    HypcaStrategy::Classical => PivotStrategy::Classical,
                    HypcaStrategy::Cyclic => PivotStrategy::Cyclic,
                    HypcaStrategy::Parallel => PivotStrategy::Parallel,
                },
                epsilon_rel: if epsilon_rel > 0.0 {
                    epsilon_rel
                } else {
                    defaults.epsilon_rel
                },
                max_sweeps: if max_sweeps > 0 {
                    max_sweeps
                } else {
                    defaults.max_sweeps
                },
                ..defaults
            },
            ..PipelineConfig::default()
        };
        match pipeline::run(&cube.inner, pcs, &cfg, &plan) {
            Ok((output, _timings)) => {
                *out = Box::into_raw(Box::new(HypcaReduction {
                    eigen: output.eigen,
                    projection: output.projection,
                }));
                HypcaStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Band count of the decomposition (the length of the eigenvalue array).
///
/// # Safety
/// `red` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn hypca_reduction_dim(red: *const HypcaReduction) -> usize {
    red.as_ref().map_or(0, |r| r.eigen.dim())
}

/// Number of projected components held by the reduction.
///
/// # Safety
/// `red` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn hypca_reduction_components(red: *const HypcaReduction) -> usize {
    red.as_ref().map_or(0, |r| r.projection.components)
}

/// Sweeps the eigensolver used.
///
/// # Safety
/// `red` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn hypca_reduction_sweeps(red: *const HypcaReduction) -> usize {
    red.as_ref().map_or(0, |r| r.eigen.sweeps_used)
}

/// Copies the descending eigenvalues into `buf`; `len` must be at least
/// the decomposition dimension.
///
/// # Safety
/// `red` must be a live handle; `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn hypca_reduction_eigenvalues(
    red: *const HypcaReduction,
    buf: *mut f64,
    len: usize,
) -> HypcaStatus {
    guarded(|| {
        let Some(red) = red.as_ref() else {
            return fail_msg(HypcaStatus::NullArgument, "null reduction handle");
        };
        if buf.is_null() {
            return fail_msg(HypcaStatus::NullArgument, "null buffer");
        }
        let values = red.eigen.eigenvalues();
        if len < values.len() {
            return fail_msg(
                HypcaStatus::InvalidArgument,
                "buffer shorter than the eigenvalue count",
            );
        }
        std::ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
        HypcaStatus::Ok
    })
}

/// Copies one component's scores (pixel-major within the component) into
/// `buf`; `len` must be at least the pixel count.
///
/// # Safety
/// `red` must be a live handle; `buf` must point to `len` writable floats.
#[no_mangle]
pub unsafe extern "C" fn hypca_reduction_scores(
    red: *const HypcaReduction,
    component: usize,
    buf: *mut f32,
    len: usize,
) -> HypcaStatus {
    guarded(|| {
        let Some(red) = red.as_ref() else {
            return fail_msg(HypcaStatus::NullArgument, "null reduction handle");
        };
        if buf.is_null() {
            return fail_msg(HypcaStatus::NullArgument, "null buffer");
        }
        if component >= red.projection.components {
            return fail_msg(HypcaStatus::InvalidArgument, "component out of range");
        }
        let scores = red.projection.component(component);
        if len < scores.len() {
            return fail_msg(
                HypcaStatus::InvalidArgument,
                "buffer shorter than the pixel count",
            );
        }
        std::ptr::copy_nonoverlapping(scores.as_ptr(), buf, scores.len());
        HypcaStatus::Ok
    })
}

/// Fraction of total variance captured by the first `pcs` components.
///
/// # Safety
/// `red` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hypca_reduction_explained_variance(
    red: *const HypcaReduction,
    pcs: usize,
    out: *mut f64,
) -> HypcaStatus {
    guarded(|| {
        let Some(red) = red.as_ref() else {
            return fail_msg(HypcaStatus::NullArgument, "null reduction handle");
        };
        if out.is_null() {
            return fail_msg(HypcaStatus::NullArgument, "null output");
        }
        match explained_variance(&red.eigen, pcs) {
            Ok(v) => {
                *out = v;
                HypcaStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Releases a reduction handle. Null is a no-op.
///
/// # Safety
/// `red` must be a handle returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hypca_reduction_free(red: *mut HypcaReduction) {
    if !red.is_null() {
        drop(Box::from_raw(red));
    }
}
