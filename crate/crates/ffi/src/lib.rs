//! C ABI for `locspec`.
//!
//! Data and results live behind opaque handles that must be released with their `_free`
//! function. Every entry point returns an [`LsStatus`]; on failure a description is
//! available from [`ls_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use locspec::baselines::nn_rank;
use locspec::datasets::{extract_patches, load_pgm};
use locspec::kernel::Bandwidth;
use locspec::linalg::DenseMatrix;
use locspec::pipeline::{find_similarities, SearchOutcome, SearchParams};
use locspec::scoring::ScoreMode;
use locspec::solver::{SolverConfig, SolverMethod};
use locspec::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    OutOfRange = 3,
    /// Eigen-residual or other numerical check failed.
    Numerical = 4,
    /// Malformed input bytes (PGM or CSV).
    Parse = 5,
    /// A Rust panic was caught at the boundary.
    Internal = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LsMode {
    Magnitude = 0,
    Signed = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LsMethod {
    Auto = 0,
    Dense = 1,
    Randomized = 2,
}

/// Search parameters. Start from `ls_params_default()`.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct LsParams {
    /// Kernel bandwidth; zero, negative or NaN selects the median heuristic.
    pub epsilon: f64,
    pub k: usize,
    pub l: usize,
    pub oversampling: usize,
    pub power_iterations: usize,
    pub seed: u64,
    pub mode: LsMode,
    pub method: LsMethod,
    pub weight_eigenvalues: bool,
}

/// Opaque data matrix, one point per row.
pub struct LsData {
    matrix: DenseMatrix,
}

/// Opaque search result.
pub struct LsResult {
    outcome: SearchOutcome,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> LsStatus {
    match e {
        Error::IndexOutOfRange { .. } => LsStatus::OutOfRange,
        Error::ResidualTooLarge { .. } => LsStatus::Numerical,
        Error::Pgm(_) | Error::Csv(_) | Error::Io(_) => LsStatus::Parse,
        _ => LsStatus::InvalidArgument,
    }
}

fn fail(status: LsStatus, message: impl Into<String>) -> LsStatus {
    set_error(message.into());
    status
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), LsStatus>) -> LsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LsStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(LsStatus::Internal, "internal panic"),
    }
}

fn check<T>(r: locspec::Result<T>) -> Result<T, LsStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), LsStatus> {
    if p.is_null() {
        Err(fail(LsStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

impl LsParams {
    fn to_search(self) -> SearchParams {
        let bandwidth = if self.epsilon > 0.0 && self.epsilon.is_finite() {
            Bandwidth::Fixed(self.epsilon)
        } else {
            Bandwidth::MedianHeuristic
        };
        SearchParams {
            bandwidth,
            k: self.k,
            solver: SolverConfig {
                eigenpairs: self.l,
                oversampling: self.oversampling,
                power_iterations: self.power_iterations,
                seed: self.seed,
                method: match self.method {
                    LsMethod::Auto => SolverMethod::Auto,
                    LsMethod::Dense => SolverMethod::Dense,
                    LsMethod::Randomized => SolverMethod::Randomized,
                },
            },
            mode: match self.mode {
                LsMode::Magnitude => ScoreMode::Magnitude,
                LsMode::Signed => ScoreMode::Signed,
            },
            weight_eigenvalues: self.weight_eigenvalues,
            kernel_mode: None,
        }
    }
}

/// Default parameters: median bandwidth, k = 3, l = 15, p = 10, q = 10, seed 0, magnitude
/// mode, automatic method.
#[no_mangle]
pub extern "C" fn ls_params_default() -> LsParams {
    let s = SolverConfig::new(15);
    LsParams {
        epsilon: 0.0,
        k: 3,
        l: s.eigenpairs,
        oversampling: s.oversampling,
        power_iterations: s.power_iterations,
        seed: s.seed,
        mode: LsMode::Magnitude,
        method: LsMethod::Auto,
        weight_eigenvalues: false,
    }
}

/// Copies a row-major `rows × cols` matrix into a new data handle.
///
/// # Safety
/// `values` must point to `rows * cols` readable doubles and `out` to writable storage.
#[no_mangle]
pub unsafe extern "C" fn ls_data_new(
    values: *const f64,
    rows: usize,
    cols: usize,
    out: *mut *mut LsData,
) -> LsStatus {
    guard(|| {
        non_null(out, "out")?;
        non_null(values, "values")?;
        let len = rows
            .checked_mul(cols)
            .ok_or_else(|| fail(LsStatus::InvalidArgument, "rows * cols overflows"))?;
        let data = std::slice::from_raw_parts(values, len).to_vec();
        let matrix = check(DenseMatrix::from_row_major(rows, cols, data))?;
        *out = Box::into_raw(Box::new(LsData { matrix }));
        Ok(())
    })
}

/// Parses a P2/P5 graymap and builds one row per 3×3 patch (row-major patch order).
/// The patch grid size is written to `out_grid_height` and `out_grid_width`.
///
/// # Safety
/// `bytes` must point to `len` readable bytes; the out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn ls_data_from_pgm_patches(
    bytes: *const u8,
    len: usize,
    out_grid_height: *mut usize,
    out_grid_width: *mut usize,
    out: *mut *mut LsData,
) -> LsStatus {
    guard(|| {
        non_null(bytes, "bytes")?;
        non_null(out, "out")?;
        non_null(out_grid_height, "out_grid_height")?;
        non_null(out_grid_width, "out_grid_width")?;
        let img = check(load_pgm(std::slice::from_raw_parts(bytes, len)))?;
        let (matrix, grid) = check(extract_patches(&img, 3))?;
        *out_grid_height = grid.out_height();
        *out_grid_width = grid.out_width();
        *out = Box::into_raw(Box::new(LsData { matrix }));
        Ok(())
    })
}

/// Number of points (rows), or 0 for a null handle.
///
/// # Safety
/// `data` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn ls_data_rows(data: *const LsData) -> usize {
    data.as_ref().map_or(0, |d| d.matrix.rows())
}

/// # Safety
/// `data` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ls_data_free(data: *mut LsData) {
    if !data.is_null() {
        drop(Box::from_raw(data));
    }
}

/// Scores every point against row `reference`.
///
/// # Safety
/// `data` must be a live handle, `params` readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ls_search(
    data: *const LsData,
    reference: usize,
    params: *const LsParams,
    out: *mut *mut LsResult,
) -> LsStatus {
    guard(|| {
        non_null(data, "data")?;
        non_null(params, "params")?;
        non_null(out, "out")?;
        let outcome = check(find_similarities(
            &(*data).matrix,
            reference,
            &(*params).to_search(),
        ))?;
        *out = Box::into_raw(Box::new(LsResult { outcome }));
        Ok(())
    })
}

/// Number of scores (points), or 0 for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ls_result_len(result: *const LsResult) -> usize {
    result.as_ref().map_or(0, |r| r.outcome.scores.len())
}

/// Bandwidth actually used, or NaN for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ls_result_epsilon(result: *const LsResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.outcome.epsilon)
}

/// Largest eigen-residual `‖A u − λ u‖₂`, or NaN for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ls_result_residual(result: *const LsResult) -> f64 {
    result
        .as_ref()
        .map_or(f64::NAN, |r| r.outcome.basis.residual)
}

unsafe fn copy_out<T: Copy>(src: &[T], dst: *mut T, len: usize) -> Result<(), LsStatus> {
    non_null(dst, "out")?;
    if len < src.len() {
        return Err(fail(
            LsStatus::InvalidArgument,
            format!("buffer holds {len} values, {} needed", src.len()),
        ));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), dst, src.len());
    Ok(())
}

/// Copies all `ls_result_len` scores into `out` (capacity `len`).
///
/// # Safety
/// `result` must be a live handle and `out` writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ls_result_scores(
    result: *const LsResult,
    out: *mut f64,
    len: usize,
) -> LsStatus {
    guard(|| {
        non_null(result, "result")?;
        copy_out(&(*result).outcome.scores.values, out, len)
    })
}

/// Copies the `ls_result_len - 1` non-reference indices, most similar first.
///
/// # Safety
/// `result` must be a live handle and `out` writable for `len` values.
#[no_mangle]
pub unsafe extern "C" fn ls_result_order(
    result: *const LsResult,
    out: *mut usize,
    len: usize,
) -> LsStatus {
    guard(|| {
        non_null(result, "result")?;
        copy_out(&(*result).outcome.ranking.order, out, len)
    })
}

/// Number of eigenvalues computed (`l`), or 0 for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ls_result_eigenvalue_count(result: *const LsResult) -> usize {
    result.as_ref().map_or(0, |r| r.outcome.basis.len())
}

/// Copies the eigenvalues, largest first.
///
/// # Safety
/// `result` must be a live handle and `out` writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ls_result_eigenvalues(
    result: *const LsResult,
    out: *mut f64,
    len: usize,
) -> LsStatus {
    guard(|| {
        non_null(result, "result")?;
        copy_out(&(*result).outcome.basis.values, out, len)
    })
}

/// 1-based rank of `target` (1 = most similar).
///
/// # Safety
/// `result` must be a live handle and `out_rank` writable.
#[no_mangle]
pub unsafe extern "C" fn ls_result_rank_of(
    result: *const LsResult,
    target: usize,
    out_rank: *mut usize,
) -> LsStatus {
    guard(|| {
        non_null(result, "result")?;
        non_null(out_rank, "out_rank")?;
        *out_rank = check((*result).outcome.ranking.rank_of(target))?;
        Ok(())
    })
}

/// # Safety
/// `result` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ls_result_free(result: *mut LsResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Rank of `target` among all points ordered by Euclidean distance to `reference`.
///
/// # Safety
/// `data` must be a live handle and `out_rank` writable.
#[no_mangle]
pub unsafe extern "C" fn ls_nn_rank(
    data: *const LsData,
    reference: usize,
    target: usize,
    out_rank: *mut usize,
) -> LsStatus {
    guard(|| {
        non_null(data, "data")?;
        non_null(out_rank, "out_rank")?;
        let ranking = check(nn_rank(&(*data).matrix, reference))?;
        *out_rank = check(ranking.rank_of(target))?;
        Ok(())
    })
}

/// Message for the most recent failure on this thread, or null if none. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ls_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ls_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
