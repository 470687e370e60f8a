//! C ABI over the tree-growth and verification library: opaque handles for
//! sequences and trees, integer status codes, and a thread-local last-error
//! message. Every entry point catches panics; no Rust type crosses the
//! boundary.

// Entry points null-check every pointer before use; validity of non-null
// pointers is the usual C-ABI contract and cannot be expressed in the
// signature without making the whole header unsafe-annotated.
#![allow(clippy::not_unsafe_ptr_arg_deref)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use wrtlab::rng::master_rng;
use wrtlab::sequences::{BetaCoupling, FitnessSequence, WeightSequence};
use wrtlab::trees::PlaneTree;
use wrtlab::{limits, oracle, stats, trees};

/// Status code returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WrtStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    OutOfRange = 3,
    Domain = 4,
    NonConvergent = 5,
    Refused = 6,
    InsufficientData = 7,
    BufferTooSmall = 8,
    Internal = 9,
    Panic = 10,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<Vec<u8>>) {
    let msg = CString::new(msg).unwrap_or_else(|_| CString::new("invalid error text").unwrap());
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_for(err: &wrtlab::Error) -> WrtStatus {
    use wrtlab::Error::*;
    set_error(err.to_string());
    match err {
        Parameter(_) | Config(_) => WrtStatus::InvalidArgument,
        InsufficientData(_) => WrtStatus::InsufficientData,
        Range(_) => WrtStatus::OutOfRange,
        Domain(_) | DegenerateCoupling(_) => WrtStatus::Domain,
        NonConvergent(_) => WrtStatus::NonConvergent,
        Refused(_) => WrtStatus::Refused,
        Io(_) | Json(_) => WrtStatus::Internal,
    }
}

fn guarded(f: impl FnOnce() -> WrtStatus + std::panic::UnwindSafe) -> WrtStatus {
    match catch_unwind(f) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic across the C boundary".to_string());
            set_error(msg);
            WrtStatus::Panic
        }
    }
}

/// Opaque weight-sequence handle.
pub struct WrtWeights(WeightSequence);
/// Opaque fitness-sequence handle.
pub struct WrtFitness(FitnessSequence);
/// Opaque tree handle.
pub struct WrtTree(PlaneTree);

/// Last error message of the current thread, as a fresh C string; the caller
/// frees it with wrt_string_free. Null when no error was recorded.
#[no_mangle]
pub extern "C" fn wrt_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| match &*e.borrow() {
        Some(msg) => msg.clone().into_raw(),
        None => std::ptr::null_mut(),
    })
}

/// Free a string returned by this library.
///
/// # Safety
/// `s` must be a pointer previously returned by wrt_last_error_message (or
/// null).
#[no_mangle]
pub unsafe extern "C" fn wrt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Static library version string (not to be freed).
#[no_mangle]
pub extern "C" fn wrt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

macro_rules! nonnull {
    ($ptr:expr) => {
        match unsafe { $ptr.as_ref() } {
            Some(r) => r,
            None => {
                set_error("null argument");
                return WrtStatus::NullArgument;
            }
        }
    };
}

fn emit<T>(out: *mut T, value: T) -> WrtStatus {
    if out.is_null() {
        set_error("null output pointer");
        return WrtStatus::NullArgument;
    }
    unsafe { out.write(value) };
    WrtStatus::Ok
}

// ---- sequences -------------------------------------------------------------

/// Weights with W_n = c * n^gamma exactly.
#[no_mangle]
pub extern "C" fn wrt_weights_power(
    gamma: f64,
    c: f64,
    n_max: usize,
    out: *mut *mut WrtWeights,
) -> WrtStatus {
    guarded(AssertUnwindSafe(|| {
        match WeightSequence::power(gamma, c, n_max) {
            Ok(w) => emit(out, Box::into_raw(Box::new(WrtWeights(w)))),
            Err(e) => status_for(&e),
        }
    }))
}

/// Random weights of the Beta-product representation for the given fitness,
/// sampled from the seed.
#[no_mangle]
pub extern "C" fn wrt_weights_beta_sampled(
    fitness: *const WrtFitness,
    n_max: usize,
    seed: u64,
    out: *mut *mut WrtWeights,
) -> WrtStatus {
    let fitness = nonnull!(fitness);
    guarded(AssertUnwindSafe(|| {
        let mut rng = master_rng(seed);
        let run =
            BetaCoupling::sample(&fitness.0, n_max.max(2), &mut rng).and_then(|c| c.weights());
        match run {
            Ok(w) => emit(out, Box::into_raw(Box::new(WrtWeights(w)))),
            Err(e) => status_for(&e),
        }
    }))
}

/// # Safety
/// `w` must be a pointer returned by a wrt_weights_* constructor (or null).
#[no_mangle]
pub unsafe extern "C" fn wrt_weights_free(w: *mut WrtWeights) {
    if !w.is_null() {
        drop(Box::from_raw(w));
    }
}

#[no_mangle]
pub extern "C" fn wrt_weights_len(w: *const WrtWeights) -> usize {
    match unsafe { w.as_ref() } {
        Some(w) => w.0.len(),
        None => 0,
    }
}

/// w_n for 1-based n.
#[no_mangle]
pub extern "C" fn wrt_weights_value(w: *const WrtWeights, n: usize, out: *mut f64) -> WrtStatus {
    let w = nonnull!(w);
    if n == 0 || n > w.0.len() {
        set_error("index out of range");
        return WrtStatus::OutOfRange;
    }
    emit(out, w.0.w(n))
}

/// W_n for 1-based n.
#[no_mangle]
pub extern "C" fn wrt_weights_cumulative(
    w: *const WrtWeights,
    n: usize,
    out: *mut f64,
) -> WrtStatus {
    let w = nonnull!(w);
    if n == 0 || n > w.0.len() {
        set_error("index out of range");
        return WrtStatus::OutOfRange;
    }
    emit(out, w.0.cum_w(n))
}

/// Fitness a_1 = a, a_n = b for n >= 2.
#[no_mangle]
pub extern "C" fn wrt_fitness_constant(
    a: f64,
    b: f64,
    n_max: usize,
    out: *mut *mut WrtFitness,
) -> WrtStatus {
    guarded(AssertUnwindSafe(|| {
        match FitnessSequence::constant(a, b, n_max) {
            Ok(f) => emit(out, Box::into_raw(Box::new(WrtFitness(f)))),
            Err(e) => status_for(&e),
        }
    }))
}

/// Fitness (a, pattern, pattern, ...) repeating after the first term.
#[no_mangle]
pub extern "C" fn wrt_fitness_periodic(
    a: f64,
    pattern: *const f64,
    pattern_len: usize,
    n_max: usize,
    out: *mut *mut WrtFitness,
) -> WrtStatus {
    if pattern.is_null() {
        set_error("null pattern");
        return WrtStatus::NullArgument;
    }
    let pattern = unsafe { std::slice::from_raw_parts(pattern, pattern_len) };
    guarded(AssertUnwindSafe(|| {
        match FitnessSequence::periodic(a, pattern, n_max) {
            Ok(f) => emit(out, Box::into_raw(Box::new(WrtFitness(f)))),
            Err(e) => status_for(&e),
        }
    }))
}

/// # Safety
/// `f` must be a pointer returned by a wrt_fitness_* constructor (or null).
#[no_mangle]
pub unsafe extern "C" fn wrt_fitness_free(f: *mut WrtFitness) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

// ---- growth ----------------------------------------------------------------

/// Grow a weighted recursive tree with n vertices from the seed.
#[no_mangle]
pub extern "C" fn wrt_grow_wrt(
    weights: *const WrtWeights,
    n: usize,
    seed: u64,
    out: *mut *mut WrtTree,
) -> WrtStatus {
    let weights = nonnull!(weights);
    guarded(AssertUnwindSafe(|| {
        let mut rng = master_rng(seed);
        match trees::grow_wrt(&weights.0, n, &mut rng) {
            Ok((tree, _)) => emit(out, Box::into_raw(Box::new(WrtTree(tree)))),
            Err(e) => status_for(&e),
        }
    }))
}

/// Grow a preferential-attachment tree with n vertices from the seed.
#[no_mangle]
pub extern "C" fn wrt_grow_pat(
    fitness: *const WrtFitness,
    n: usize,
    seed: u64,
    out: *mut *mut WrtTree,
) -> WrtStatus {
    let fitness = nonnull!(fitness);
    guarded(AssertUnwindSafe(|| {
        let mut rng = master_rng(seed);
        match trees::grow_pat(&fitness.0, n, &mut rng) {
            Ok((tree, _)) => emit(out, Box::into_raw(Box::new(WrtTree(tree)))),
            Err(e) => status_for(&e),
        }
    }))
}

/// # Safety
/// `t` must be a pointer returned by a wrt_grow_* function (or null).
#[no_mangle]
pub unsafe extern "C" fn wrt_tree_free(t: *mut WrtTree) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

// ---- tree queries ------------------------------------------------------------

#[no_mangle]
pub extern "C" fn wrt_tree_len(t: *const WrtTree) -> usize {
    match unsafe { t.as_ref() } {
        Some(t) => t.0.len(),
        None => 0,
    }
}

/// Parent of the 1-based vertex i; the root reports 0.
#[no_mangle]
pub extern "C" fn wrt_tree_parent(t: *const WrtTree, i: usize, out: *mut usize) -> WrtStatus {
    let t = nonnull!(t);
    match t.0.parent(i) {
        Ok(p) => emit(out, p.unwrap_or(0)),
        Err(e) => status_for(&e),
    }
}

/// Height of the tree (maximal vertex height).
#[no_mangle]
pub extern "C" fn wrt_tree_height(t: *const WrtTree, out: *mut usize) -> WrtStatus {
    let t = nonnull!(t);
    emit(out, trees::height(&t.0))
}

/// Copy all out-degrees (arrival order) into a caller buffer of length at
/// least wrt_tree_len.
#[no_mangle]
pub extern "C" fn wrt_tree_degrees(t: *const WrtTree, buf: *mut u32, buf_len: usize) -> WrtStatus {
    let t = nonnull!(t);
    if buf.is_null() {
        set_error("null buffer");
        return WrtStatus::NullArgument;
    }
    if buf_len < t.0.len() {
        set_error("buffer shorter than the tree");
        return WrtStatus::BufferTooSmall;
    }
    let degrees = trees::degrees(&t.0);
    unsafe { std::ptr::copy_nonoverlapping(degrees.as_ptr(), buf, degrees.len()) };
    WrtStatus::Ok
}

/// Copy all vertex heights (arrival order) into a caller buffer of length at
/// least wrt_tree_len.
#[no_mangle]
pub extern "C" fn wrt_tree_heights(t: *const WrtTree, buf: *mut u32, buf_len: usize) -> WrtStatus {
    let t = nonnull!(t);
    if buf.is_null() {
        set_error("null buffer");
        return WrtStatus::NullArgument;
    }
    if buf_len < t.0.len() {
        set_error("buffer shorter than the tree");
        return WrtStatus::BufferTooSmall;
    }
    let heights = trees::heights(&t.0);
    unsafe { std::ptr::copy_nonoverlapping(heights.as_ptr(), buf, heights.len()) };
    WrtStatus::Ok
}

/// Most recent common ancestor of 1-based vertices i and j.
#[no_mangle]
pub extern "C" fn wrt_tree_mrca(
    t: *const WrtTree,
    i: usize,
    j: usize,
    out: *mut usize,
) -> WrtStatus {
    let t = nonnull!(t);
    match trees::mrca(&t.0, i, j) {
        Ok(m) => emit(out, m),
        Err(e) => status_for(&e),
    }
}

/// Ultrametric distance exp(-height(mrca)); zero on the diagonal.
#[no_mangle]
pub extern "C" fn wrt_tree_d_exp(
    t: *const WrtTree,
    i: usize,
    j: usize,
    out: *mut f64,
) -> WrtStatus {
    let t = nonnull!(t);
    match trees::d_exp(&t.0, i, j) {
        Ok(d) => emit(out, d),
        Err(e) => status_for(&e),
    }
}

/// Profile counts per height level. Writes up to buf_len entries when buf is
/// non-null and always reports the required length through out_len (two-call
/// pattern).
#[no_mangle]
pub extern "C" fn wrt_tree_profile(
    t: *const WrtTree,
    buf: *mut u64,
    buf_len: usize,
    out_len: *mut usize,
) -> WrtStatus {
    let t = nonnull!(t);
    let prof = stats::profile(&t.0);
    let status = emit(out_len, prof.counts.len());
    if status != WrtStatus::Ok {
        return status;
    }
    if buf.is_null() {
        return WrtStatus::Ok;
    }
    if buf_len < prof.counts.len() {
        set_error("buffer shorter than the profile");
        return WrtStatus::BufferTooSmall;
    }
    unsafe { std::ptr::copy_nonoverlapping(prof.counts.as_ptr(), buf, prof.counts.len()) };
    WrtStatus::Ok
}

// ---- analysis ----------------------------------------------------------------

/// Rate function 1 + gamma (e^z - 1 - z e^z).
#[no_mangle]
pub extern "C" fn wrt_f_gamma(gamma: f64, z: f64) -> f64 {
    stats::f_gamma(gamma, z)
}

/// Positive root of the rate function; gamma e^{z_+} is the height constant.
#[no_mangle]
pub extern "C" fn wrt_solve_z_plus(gamma: f64, out: *mut f64) -> WrtStatus {
    guarded(AssertUnwindSafe(|| match stats::solve_z_plus(gamma) {
        Ok(z) => emit(out, z),
        Err(e) => status_for(&e),
    }))
}

/// Leading Gaussian profile term at level k.
#[no_mangle]
pub extern "C" fn wrt_gaussian_profile_prediction(n: usize, gamma: f64, k: usize) -> f64 {
    stats::gaussian_profile_prediction(n, gamma, k)
}

/// q-th moment of Beta(a, b), with Beta(a, 0) the point mass at 1.
#[no_mangle]
pub extern "C" fn wrt_beta_moment(a: f64, b: f64, q: u32, out: *mut f64) -> WrtStatus {
    guarded(AssertUnwindSafe(|| match limits::beta_moment(a, b, q) {
        Ok(v) => emit(out, v),
        Err(e) => status_for(&e),
    }))
}

/// p-th moment of the generalized Mittag-Leffler law ML(alpha, theta).
#[no_mangle]
pub extern "C" fn wrt_ml_moment(alpha: f64, theta: f64, p: u32, out: *mut f64) -> WrtStatus {
    guarded(AssertUnwindSafe(|| match limits::ml_moment(alpha, theta, p) {
        Ok(v) => emit(out, v),
        Err(e) => status_for(&e),
    }))
}

/// p-th moment of the k-th value of the limiting degree chain for constant
/// fitness (a, b, b, ...).
#[no_mangle]
pub extern "C" fn wrt_limit_chain_moment_constant(
    a: f64,
    b: f64,
    k: usize,
    p: u32,
    out: *mut f64,
) -> WrtStatus {
    guarded(AssertUnwindSafe(|| {
        let spec = limits::LimitChainSpec::Constant { a, b };
        match limits::limit_chain_moment(&spec, k, p, 0) {
            Ok(v) => emit(out, v),
            Err(e) => status_for(&e),
        }
    }))
}

/// Result of the exact representation certificate.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct WrtTheorem1Report {
    pub trace_count: usize,
    pub max_abs_diff: f64,
    pub pat_total: f64,
    pub mixture_total: f64,
    /// 1 when the certificate passes, 0 otherwise.
    pub pass: i32,
}

/// Sweep all traces of n-vertex trees (n <= 6) and certify that the
/// attachment law coincides with the Beta-product mixture.
#[no_mangle]
pub extern "C" fn wrt_certify_theorem1(
    fitness: *const WrtFitness,
    n: usize,
    out: *mut WrtTheorem1Report,
) -> WrtStatus {
    let fitness = nonnull!(fitness);
    guarded(AssertUnwindSafe(|| {
        match oracle::certify_theorem1(&fitness.0, n) {
            Ok(r) => emit(
                out,
                WrtTheorem1Report {
                    trace_count: r.trace_count,
                    max_abs_diff: r.max_abs_diff,
                    pat_total: r.pat_total,
                    mixture_total: r.mixture_total,
                    pass: r.pass as i32,
                },
            ),
            Err(e) => status_for(&e),
        }
    }))
}
