//! C ABI over `opuc`.
//!
//! Sequences live behind the opaque [`OpucSequence`] handle. Every fallible
//! call returns an [`OpucStatus`]; on failure a message is kept per thread
//! and can be copied out with [`opuc_last_error_message`]. Output pointers
//! are written only on success. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use opuc::analysis::{self, AnalysisError, Khrushchev, QuadOptions};
use opuc::poly::{Complex, ComplexPoly};
use opuc::schur::{self, CaratheodoryModel, SchurError, Termination};
use opuc::verblunsky::VerblunskySequence;

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpucStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidSequence = 3,
    Ambiguous = 4,
    Numeric = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// Opaque handle to a validated coefficient sequence.
pub struct OpucSequence {
    inner: VerblunskySequence,
}

/// Scalars of a Szego identity check.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OpucSzegoSummary {
    pub lhs: f64,
    pub rhs: f64,
    pub rel_error: f64,
    pub epsilon: f64,
    pub log_integral: f64,
    pub pole_factor: f64,
    /// Poles counted with multiplicity.
    pub pole_count: usize,
    pub quad_points: usize,
    pub classical_start: usize,
}

/// How a coefficient recovery ended.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpucTermination {
    /// `max_n` coefficients were produced.
    None = 0,
    /// The last coefficient has modulus within the guard of 1.
    UnitModulus = 1,
    /// The current Schur iterate has a pole at 0.
    PoleAtZero = 2,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn fail(status: OpucStatus, msg: impl Into<String>) -> OpucStatus {
    set_error(msg);
    status
}

fn from_analysis(e: AnalysisError) -> OpucStatus {
    let status = match e {
        AnalysisError::Ambiguous(_) => OpucStatus::Ambiguous,
        AnalysisError::BelowClassicalStart { .. } => OpucStatus::InvalidArgument,
        _ => OpucStatus::Numeric,
    };
    fail(status, e.to_string())
}

fn from_schur(e: SchurError) -> OpucStatus {
    let status = match e {
        SchurError::ZeroDenominator | SchurError::VanishingAtZero => OpucStatus::InvalidArgument,
        _ => OpucStatus::Numeric,
    };
    fail(status, e.to_string())
}

fn guarded(body: impl FnOnce() -> OpucStatus) -> OpucStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => {
            if status == OpucStatus::Ok {
                set_error("");
            }
            status
        }
        Err(_) => fail(OpucStatus::Panic, "internal panic"),
    }
}

/// # Safety
/// `re` and `im` must each point to `len` readable doubles (or be null when
/// `len` is 0).
unsafe fn read_complex(re: *const f64, im: *const f64, len: usize) -> Result<Vec<Complex>, OpucStatus> {
    if len == 0 {
        return Ok(Vec::new());
    }
    if re.is_null() || im.is_null() {
        return Err(fail(OpucStatus::NullPointer, "coefficient array is null"));
    }
    let (re, im) = (std::slice::from_raw_parts(re, len), std::slice::from_raw_parts(im, len));
    Ok(re.iter().zip(im).map(|(&a, &b)| Complex::new(a, b)).collect())
}

fn sequence<'a>(seq: *const OpucSequence) -> Result<&'a VerblunskySequence, OpucStatus> {
    // SAFETY: non-null handles come from `opuc_sequence_new` and are live
    // until `opuc_sequence_free`.
    unsafe { seq.as_ref() }
        .map(|s| &s.inner)
        .ok_or_else(|| fail(OpucStatus::NullPointer, "sequence handle is null"))
}

macro_rules! tri {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(status) => return status,
        }
    };
}

/// Builds a sequence from `len` coefficients `re[j] + i im[j]`. Coefficients
/// within `guard_unit` of the unit circle are rejected.
///
/// # Safety
/// `re` and `im` must point to `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn opuc_sequence_new(
    re: *const f64,
    im: *const f64,
    len: usize,
    guard_unit: f64,
    out: *mut *mut OpucSequence,
) -> OpucStatus {
    guarded(|| {
        if out.is_null() {
            return fail(OpucStatus::NullPointer, "out is null");
        }
        let alphas = tri!(read_complex(re, im, len));
        match VerblunskySequence::with_guard(alphas, guard_unit) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(OpucSequence { inner }));
                OpucStatus::Ok
            }
            Err(e) => fail(OpucStatus::InvalidSequence, e.to_string()),
        }
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `seq` must come from `opuc_sequence_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn opuc_sequence_free(seq: *mut OpucSequence) {
    if !seq.is_null() {
        drop(Box::from_raw(seq));
    }
}

/// Stored length, or 0 for a null handle.
///
/// # Safety
/// `seq` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn opuc_sequence_len(seq: *const OpucSequence) -> usize {
    seq.as_ref().map_or(0, |s| s.inner.len())
}

/// One plus the last index with `|alpha| > 1`, or 0 for a null handle.
///
/// # Safety
/// `seq` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn opuc_sequence_classical_start(seq: *const OpucSequence) -> usize {
    seq.as_ref().map_or(0, |s| s.inner.classical_start())
}

/// Checks the Szego identity. `quad_tol <= 0` or `max_points == 0` select the
/// defaults. The disk guard is the sequence's guard.
///
/// # Safety
/// `seq` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn opuc_szego_verify(
    seq: *const OpucSequence,
    quad_tol: f64,
    max_points: usize,
    out: *mut OpucSzegoSummary,
) -> OpucStatus {
    guarded(|| {
        let s = tri!(sequence(seq));
        if out.is_null() {
            return fail(OpucStatus::NullPointer, "out is null");
        }
        let mut quad = QuadOptions::default();
        if quad_tol > 0.0 {
            quad.tol = quad_tol;
        }
        if max_points > 0 {
            quad.max_points = max_points;
        }
        match analysis::szego_verify(s, quad, s.guard_unit()) {
            Ok(r) => {
                *out = OpucSzegoSummary {
                    lhs: r.lhs,
                    rhs: r.rhs,
                    rel_error: r.rel_error,
                    epsilon: r.epsilon,
                    log_integral: r.log_integral,
                    pole_factor: r.pole_factor,
                    pole_count: r.poles.iter().map(|p| p.multiplicity).sum(),
                    quad_points: r.quad_points,
                    classical_start: r.classical_start,
                };
                OpucStatus::Ok
            }
            Err(e) => from_analysis(e),
        }
    })
}

/// Poles of `F` in the disk, each repeated by multiplicity. `*count` receives
/// the number of poles; when it exceeds `capacity` nothing is written to the
/// buffers and `BufferTooSmall` is returned, so a call with capacity 0 sizes
/// the buffers.
///
/// # Safety
/// `re` and `im` must hold `capacity` doubles; `count` must be writable.
#[no_mangle]
pub unsafe extern "C" fn opuc_poles(
    seq: *const OpucSequence,
    re: *mut f64,
    im: *mut f64,
    capacity: usize,
    count: *mut usize,
) -> OpucStatus {
    guarded(|| {
        let s = tri!(sequence(seq));
        if count.is_null() {
            return fail(OpucStatus::NullPointer, "count is null");
        }
        let poles = match analysis::pole_set(s, s.guard_unit()) {
            Ok(p) => p.listed(),
            Err(e) => return from_analysis(e),
        };
        *count = poles.len();
        if poles.len() > capacity {
            return fail(OpucStatus::BufferTooSmall, format!("{} poles, capacity {capacity}", poles.len()));
        }
        if !poles.is_empty() && (re.is_null() || im.is_null()) {
            return fail(OpucStatus::NullPointer, "pole buffer is null");
        }
        for (k, p) in poles.iter().enumerate() {
            *re.add(k) = p.re;
            *im.add(k) = p.im;
        }
        OpucStatus::Ok
    })
}

/// `F(z)` from the cleared rational form.
///
/// # Safety
/// `seq` must be a live handle; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn opuc_eval_caratheodory(
    seq: *const OpucSequence,
    z_re: f64,
    z_im: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> OpucStatus {
    guarded(|| {
        let s = tri!(sequence(seq));
        if out_re.is_null() || out_im.is_null() {
            return fail(OpucStatus::NullPointer, "output is null");
        }
        let model = match CaratheodoryModel::new(s) {
            Ok(m) => m,
            Err(e) => return from_schur(e),
        };
        match model.eval_caratheodory(Complex::new(z_re, z_im)) {
            Ok(v) => {
                *out_re = v.re;
                *out_im = v.im;
                OpucStatus::Ok
            }
            Err(e) => from_schur(e),
        }
    })
}

/// `Re F(e^{i theta})` by Khrushchev's formula split at `n >= N`.
///
/// # Safety
/// `seq` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn opuc_re_f_khrushchev(
    seq: *const OpucSequence,
    n: usize,
    theta: f64,
    out: *mut f64,
) -> OpucStatus {
    guarded(|| {
        let s = tri!(sequence(seq));
        if out.is_null() {
            return fail(OpucStatus::NullPointer, "out is null");
        }
        match Khrushchev::new(s, n).and_then(|k| k.re_f(theta)) {
            Ok(v) => {
                *out = v;
                OpucStatus::Ok
            }
            Err(e) => from_analysis(e),
        }
    })
}

/// Moments `c_1 .. c_order` of `Psi_m^* / Phi_m^*` into `re`/`im` (length
/// `order`), with the root-test growth rate and `1 / min |pole|`.
///
/// # Safety
/// `seq` must be a live handle; buffers must hold `order` doubles; the rate
/// pointers may be null.
#[no_mangle]
pub unsafe extern "C" fn opuc_moments(
    seq: *const OpucSequence,
    m: usize,
    order: usize,
    re: *mut f64,
    im: *mut f64,
    growth_rate: *mut f64,
    predicted_rate: *mut f64,
) -> OpucStatus {
    guarded(|| {
        let s = tri!(sequence(seq));
        if order > 0 && (re.is_null() || im.is_null()) {
            return fail(OpucStatus::NullPointer, "moment buffer is null");
        }
        let r = match analysis::moments(s, m, order, s.guard_unit()) {
            Ok(r) => r,
            Err(e) => return from_analysis(e),
        };
        for (k, c) in r.moments.iter().enumerate() {
            *re.add(k) = c.re;
            *im.add(k) = c.im;
        }
        if !growth_rate.is_null() {
            *growth_rate = r.growth_rate;
        }
        if !predicted_rate.is_null() {
            *predicted_rate = r.predicted_rate;
        }
        OpucStatus::Ok
    })
}

/// Verblunsky coefficients of `F = num / den` (coefficients lowest degree
/// first). Up to `capacity` coefficients are written; `*count` receives how
/// many were produced and `*termination` how the recursion ended.
///
/// # Safety
/// Input arrays must hold their stated lengths; output buffers `capacity`
/// doubles; `count` and `termination` writable.
#[no_mangle]
pub unsafe extern "C" fn opuc_recover(
    num_re: *const f64,
    num_im: *const f64,
    num_len: usize,
    den_re: *const f64,
    den_im: *const f64,
    den_len: usize,
    max_n: usize,
    guard: f64,
    alpha_re: *mut f64,
    alpha_im: *mut f64,
    capacity: usize,
    count: *mut usize,
    termination: *mut OpucTermination,
) -> OpucStatus {
    guarded(|| {
        if count.is_null() || termination.is_null() {
            return fail(OpucStatus::NullPointer, "count or termination is null");
        }
        if max_n > capacity {
            return fail(OpucStatus::BufferTooSmall, format!("max_n {max_n} exceeds capacity {capacity}"));
        }
        if max_n > 0 && (alpha_re.is_null() || alpha_im.is_null()) {
            return fail(OpucStatus::NullPointer, "coefficient buffer is null");
        }
        let num = tri!(read_complex(num_re, num_im, num_len));
        let den = tri!(read_complex(den_re, den_im, den_len));
        if num.is_empty() || den.is_empty() {
            return fail(OpucStatus::InvalidArgument, "numerator and denominator need coefficients");
        }
        let r = match schur::recover_from_parts(ComplexPoly::new(num), ComplexPoly::new(den), max_n, guard) {
            Ok(r) => r,
            Err(e) => return from_schur(e),
        };
        for (k, a) in r.alphas.iter().enumerate() {
            *alpha_re.add(k) = a.re;
            *alpha_im.add(k) = a.im;
        }
        *count = r.alphas.len();
        *termination = match r.termination {
            None => OpucTermination::None,
            Some(Termination::UnitModulus { .. }) => OpucTermination::UnitModulus,
            Some(Termination::PoleAtZero { .. }) => OpucTermination::PoleAtZero,
        };
        OpucStatus::Ok
    })
}

/// Copies this thread's last error message, NUL-terminated and truncated to
/// `len` bytes, into `buf`. Returns the untruncated length plus one, so a
/// call with `len` 0 sizes the buffer. Empty after a successful call.
///
/// # Safety
/// `buf` must be null or hold `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn opuc_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len() + 1
    })
}
