//! C ABI over the core library.
//!
//! Every fallible function returns a [`NocupStatus`] and writes its result
//! through an out-pointer. On failure `nocup_last_error` describes the most
//! recent error on the calling thread. Handles are opaque and owned by the
//! caller until passed to the matching `_free`. Strings returned by the
//! library are released with `nocup_string_free`.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::ffi::{c_char, CStr, CString};
use std::ptr;
use std::sync::Arc;

use nocup::cupping::{psi_run, PsiConfig, PsiError, PsiRun, Schedule};
use nocup::hyperint::HyperInt;
use nocup::machine::{Enumeration, DEFAULT_CAP};
use nocup::ordinals::{fund_seq, norm, FundSource, OrdError, OrdinalCnf};
use nocup::trace;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NocupStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    CapExceeded = 4,
    GammaDiverged = 5,
    NotSlim = 6,
    OutOfRange = 7,
    Failed = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NocupSchedule {
    Tower = 0,
    Scaled = 1,
}

pub struct NocupHyperInt(HyperInt);

pub struct NocupOrdinal(OrdinalCnf);

pub struct NocupPsiRun {
    run: PsiRun,
    config: PsiConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn fail(status: NocupStatus, message: impl ToString) -> NocupStatus {
    let text = CString::new(message.to_string().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
    status
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, NocupStatus> {
    if s.is_null() {
        return Err(fail(NocupStatus::NullPointer, "null string"));
    }
    CStr::from_ptr(s).to_str().map_err(|e| fail(NocupStatus::InvalidUtf8, e))
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

fn ordering_code(o: Ordering) -> i32 {
    match o {
        Ordering::Less => -1,
        Ordering::Equal => 0,
        Ordering::Greater => 1,
    }
}

fn ord_status(e: &OrdError) -> NocupStatus {
    match e {
        OrdError::Parse { .. } => NocupStatus::Parse,
        OrdError::NotSLim(_) => NocupStatus::NotSlim,
        _ => NocupStatus::Failed,
    }
}

macro_rules! out_ptr {
    ($p:expr) => {
        if $p.is_null() {
            return fail(NocupStatus::NullPointer, "null out-pointer");
        }
    };
}

/// Message of the last failure on this thread; empty if none. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn nocup_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn nocup_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses `E:<digits>` or `T:<height>:<digits>`.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nocup_hyperint_parse(text: *const c_char, out: *mut *mut NocupHyperInt) -> NocupStatus {
    out_ptr!(out);
    let text = match read_str(text) {
        Ok(t) => t,
        Err(s) => return s,
    };
    match text.parse::<HyperInt>() {
        Ok(h) => {
            *out = Box::into_raw(Box::new(NocupHyperInt(h)));
            NocupStatus::Ok
        }
        Err(e) => fail(NocupStatus::Parse, e),
    }
}

#[no_mangle]
pub extern "C" fn nocup_hyperint_from_u64(v: u64) -> *mut NocupHyperInt {
    Box::into_raw(Box::new(NocupHyperInt(HyperInt::from(v))))
}

/// `2_k^m`.
///
/// # Safety
/// `m` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn nocup_hyperint_tower(k: u64, m: *const NocupHyperInt) -> *mut NocupHyperInt {
    match m.as_ref() {
        Some(m) => Box::into_raw(Box::new(NocupHyperInt(HyperInt::tower(k, &m.0)))),
        None => {
            fail(NocupStatus::NullPointer, "null handle");
            ptr::null_mut()
        }
    }
}

/// Writes -1, 0 or 1 to `out`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nocup_hyperint_compare(
    a: *const NocupHyperInt,
    b: *const NocupHyperInt,
    out: *mut i32,
) -> NocupStatus {
    out_ptr!(out);
    match (a.as_ref(), b.as_ref()) {
        (Some(a), Some(b)) => {
            *out = ordering_code(a.0.cmp(&b.0));
            NocupStatus::Ok
        }
        _ => fail(NocupStatus::NullPointer, "null handle"),
    }
}

/// Text form; free with `nocup_string_free`. Null on a null handle.
///
/// # Safety
/// `h` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn nocup_hyperint_to_string(h: *const NocupHyperInt) -> *mut c_char {
    match h.as_ref() {
        Some(h) => to_c_string(h.0.to_string()),
        None => ptr::null_mut(),
    }
}

/// # Safety
/// `h` must come from this library or be null; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn nocup_hyperint_free(h: *mut NocupHyperInt) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Parses an ordinal such as `w^(w + 1) + 3`.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nocup_ordinal_parse(text: *const c_char, out: *mut *mut NocupOrdinal) -> NocupStatus {
    out_ptr!(out);
    let text = match read_str(text) {
        Ok(t) => t,
        Err(s) => return s,
    };
    match text.parse::<OrdinalCnf>() {
        Ok(o) => {
            *out = Box::into_raw(Box::new(NocupOrdinal(o)));
            NocupStatus::Ok
        }
        Err(e) => fail(ord_status(&e), e),
    }
}

/// # Safety
/// `o` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nocup_ordinal_norm(o: *const NocupOrdinal, out: *mut u64) -> NocupStatus {
    out_ptr!(out);
    match o.as_ref() {
        Some(o) => {
            *out = norm(&o.0);
            NocupStatus::Ok
        }
        None => fail(NocupStatus::NullPointer, "null handle"),
    }
}

/// Writes -1, 0 or 1 to `out`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nocup_ordinal_compare(
    a: *const NocupOrdinal,
    b: *const NocupOrdinal,
    out: *mut i32,
) -> NocupStatus {
    out_ptr!(out);
    match (a.as_ref(), b.as_ref()) {
        (Some(a), Some(b)) => {
            *out = ordering_code(a.0.cmp(&b.0));
            NocupStatus::Ok
        }
        _ => fail(NocupStatus::NullPointer, "null handle"),
    }
}

/// The `k`-th member of the fundamental sequence of `source`, which is an
/// ordinal of the form `w^b` or the text `e0`.
///
/// # Safety
/// `source` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nocup_ordinal_fundseq(
    source: *const c_char,
    k: u64,
    out: *mut *mut NocupOrdinal,
) -> NocupStatus {
    out_ptr!(out);
    let text = match read_str(source) {
        Ok(t) => t,
        Err(s) => return s,
    };
    let result = text.parse::<FundSource>().and_then(|src| fund_seq(&src, k));
    match result {
        Ok(o) => {
            *out = Box::into_raw(Box::new(NocupOrdinal(o)));
            NocupStatus::Ok
        }
        Err(e) => fail(ord_status(&e), e),
    }
}

/// # Safety
/// `o` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn nocup_ordinal_to_string(o: *const NocupOrdinal) -> *mut c_char {
    match o.as_ref() {
        Some(o) => to_c_string(o.0.to_string()),
        None => ptr::null_mut(),
    }
}

/// # Safety
/// `o` must come from this library or be null; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn nocup_ordinal_free(o: *mut NocupOrdinal) {
    if !o.is_null() {
        drop(Box::from_raw(o));
    }
}

/// Runs Ψ for iterations `0..=n` over the default catalog with initial
/// `C = {subject}`. `gamma` is a builtin name or a decimal index; `cap` of 0
/// selects the default cap.
///
/// # Safety
/// `gamma` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nocup_psi_run(
    gamma: *const c_char,
    subject: u64,
    schedule: NocupSchedule,
    n: u64,
    cap: u64,
    out: *mut *mut NocupPsiRun,
) -> NocupStatus {
    out_ptr!(out);
    let gamma = match read_str(gamma) {
        Ok(t) => t,
        Err(s) => return s,
    };
    let machines = Arc::new(Enumeration::default());
    let gamma = match machines.resolve(gamma) {
        Ok(g) => g,
        Err(e) => return fail(NocupStatus::Parse, e),
    };
    let mut config = PsiConfig::scaled(gamma);
    config.initial = nocup::machine::MachineIndex(subject);
    config.cap = if cap == 0 { DEFAULT_CAP } else { cap };
    if schedule == NocupSchedule::Tower {
        config.schedule = Schedule::Tower;
    }
    match psi_run(machines, config.clone(), n) {
        Ok(run) => {
            *out = Box::into_raw(Box::new(NocupPsiRun { run, config }));
            NocupStatus::Ok
        }
        Err(e) => {
            let status = match e {
                PsiError::CapExceeded { .. } => NocupStatus::CapExceeded,
                PsiError::GammaDiverged(_) => NocupStatus::GammaDiverged,
                _ => NocupStatus::Failed,
            };
            fail(status, e)
        }
    }
}

/// Number of completed iterations.
///
/// # Safety
/// `run` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn nocup_psi_run_len(run: *const NocupPsiRun) -> u64 {
    run.as_ref().map_or(0, |r| r.run.state.m_table.len() as u64)
}

/// `Ψ(l)` as a new handle.
///
/// # Safety
/// `run` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nocup_psi_run_value(
    run: *const NocupPsiRun,
    l: u64,
    out: *mut *mut NocupHyperInt,
) -> NocupStatus {
    out_ptr!(out);
    let Some(run) = run.as_ref() else {
        return fail(NocupStatus::NullPointer, "null handle");
    };
    match run.run.state.m_table.get(l as usize) {
        Some(v) => {
            *out = Box::into_raw(Box::new(NocupHyperInt(v.clone())));
            NocupStatus::Ok
        }
        None => fail(NocupStatus::OutOfRange, format!("no iteration {l}")),
    }
}

/// The trace as JSON lines; free with `nocup_string_free`.
///
/// # Safety
/// `run` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn nocup_psi_run_trace(run: *const NocupPsiRun) -> *mut c_char {
    match run.as_ref() {
        Some(r) => to_c_string(trace::render("psi", &r.config, &r.run.trace)),
        None => ptr::null_mut(),
    }
}

/// # Safety
/// `run` must come from this library or be null; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn nocup_psi_run_free(run: *mut NocupPsiRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}
