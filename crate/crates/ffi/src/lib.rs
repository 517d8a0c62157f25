//! C ABI over the bound solvers and the analytic work ledger.
//!
//! Conventions: fallible scalar functions return a [`QsdtStatus`] and write
//! their result through an out pointer. The ledger is an opaque handle
//! created with [`qsdt_ledger_new`] and released with [`qsdt_ledger_free`];
//! strings returned by [`qsdt_ledger_to_json`] are released with
//! [`qsdt_string_free`]. No function stores a pointer past its own call, and
//! all of them are safe to use from multiple threads on distinct handles.
//!
//! The matching header is generated into `OUT_DIR/qsd_thermo.h` at build
//! time.

use std::ffi::{c_char, CStr, CString};

use qsd_thermo::bounds::{self, Accuracy, BoundsError};
use qsd_thermo::cycle::{self, CycleParams, WorkLedger};

/// Result of a fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QsdtStatus {
    /// The call succeeded and the out parameter holds the result.
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// An input was outside its documented domain.
    InvalidArgument = 2,
    /// An internal solver failed to reach its residual target.
    NoConvergence = 3,
}

/// Selects one entry of the work ledger.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QsdtLedgerField {
    W1 = 0,
    W2 = 1,
    W3 = 2,
    W4 = 3,
    W5 = 4,
    WMeas = 5,
    WReset = 6,
    P0 = 7,
    V1 = 8,
    V2 = 9,
    C = 10,
    Total = 11,
}

/// Opaque work-ledger handle.
pub struct QsdtLedger {
    ledger: WorkLedger,
}

fn bounds_status(err: &BoundsError) -> QsdtStatus {
    match err {
        BoundsError::NoConvergence { .. } => QsdtStatus::NoConvergence,
        BoundsError::Row { source, .. } => bounds_status(source),
        _ => QsdtStatus::InvalidArgument,
    }
}

/// Writes `value` through `out`, reporting a null pointer instead of
/// dereferencing one.
unsafe fn write_out(out: *mut f64, value: f64) -> QsdtStatus {
    if out.is_null() {
        return QsdtStatus::NullPointer;
    }
    unsafe { *out = value };
    QsdtStatus::Ok
}

unsafe fn write_result(
    out: *mut f64,
    result: Result<f64, BoundsError>,
) -> QsdtStatus {
    match result {
        Ok(value) => unsafe { write_out(out, value) },
        Err(err) => bounds_status(&err),
    }
}

/// Binary entropy of `p`, in bits. `p` must lie in [0, 1].
///
/// # Safety
///
/// `out` must be null or valid for writing one `double`.
#[no_mangle]
pub unsafe extern "C" fn qsdt_binary_entropy(p: f64, out: *mut f64) -> QsdtStatus {
    unsafe { write_result(out, bounds::binary_entropy(p)) }
}

/// Upper preimage of the binary entropy: the p in [1/2, 1] with H(p) = `h`.
/// `h` must lie in [0, 1].
///
/// # Safety
///
/// `out` must be null or valid for writing one `double`.
#[no_mangle]
pub unsafe extern "C" fn qsdt_inverse_binary_entropy_upper(h: f64, out: *mut f64) -> QsdtStatus {
    unsafe { write_result(out, bounds::inverse_binary_entropy_upper(h).map(|p| p.get())) }
}

/// Best readout accuracy compatible with the second law for two pure states
/// at overlap angle `theta` in [0, pi/2] radians.
///
/// # Safety
///
/// `out` must be null or valid for writing one `double`.
#[no_mangle]
pub unsafe extern "C" fn qsdt_delta_th(theta: f64, out: *mut f64) -> QsdtStatus {
    unsafe { write_result(out, bounds::delta_th(theta).map(|d| d.get())) }
}

/// Best accuracy of an unambiguous-style quantum measurement at overlap
/// angle `theta` in [0, pi/2] radians.
///
/// # Safety
///
/// `out` must be null or valid for writing one `double`.
#[no_mangle]
pub unsafe extern "C" fn qsdt_delta_qi(theta: f64, out: *mut f64) -> QsdtStatus {
    unsafe { write_result(out, bounds::delta_qi(theta).map(|d| d.get())) }
}

/// Accuracy at which the gas-memory mutual information exhausts the memory
/// entropy; agrees with `qsdt_delta_th` to 1e-10.
///
/// # Safety
///
/// `out` must be null or valid for writing one `double`.
#[no_mangle]
pub unsafe extern "C" fn qsdt_delta_hol(theta: f64, out: *mut f64) -> QsdtStatus {
    unsafe { write_result(out, bounds::delta_hol(theta).map(|d| d.get())) }
}

/// Builds the analytic work ledger for one cycle. Returns null if any
/// parameter is outside its domain (`n_particles`, `volume`, `temperature`,
/// `boltzmann` positive and finite; `theta` in [0, pi/2]; `delta` in [0, 1]).
///
/// # Safety
///
/// The returned pointer must be released with `qsdt_ledger_free`.
#[no_mangle]
pub unsafe extern "C" fn qsdt_ledger_new(
    n_particles: f64,
    volume: f64,
    temperature: f64,
    boltzmann: f64,
    theta: f64,
    delta: f64,
) -> *mut QsdtLedger {
    let Ok(delta) = Accuracy::new(delta) else {
        return std::ptr::null_mut();
    };
    let Ok(params) = CycleParams::new(n_particles, volume, temperature, boltzmann, theta, delta)
    else {
        return std::ptr::null_mut();
    };
    Box::into_raw(Box::new(QsdtLedger { ledger: cycle::ledger(&params) }))
}

/// Releases a ledger handle. Null is ignored.
///
/// # Safety
///
/// `ledger` must be null or a pointer returned by `qsdt_ledger_new` that has
/// not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn qsdt_ledger_free(ledger: *mut QsdtLedger) {
    if !ledger.is_null() {
        drop(unsafe { Box::from_raw(ledger) });
    }
}

/// Reads one ledger entry.
///
/// # Safety
///
/// `ledger` must be null or a live pointer from `qsdt_ledger_new`; `out`
/// must be null or valid for writing one `double`; `field` must be one of
/// the declared `QsdtLedgerField` values.
#[no_mangle]
pub unsafe extern "C" fn qsdt_ledger_get(
    ledger: *const QsdtLedger,
    field: QsdtLedgerField,
    out: *mut f64,
) -> QsdtStatus {
    if ledger.is_null() {
        return QsdtStatus::NullPointer;
    }
    let ledger = unsafe { &(*ledger).ledger };
    let value = match field {
        QsdtLedgerField::W1 => ledger.w1,
        QsdtLedgerField::W2 => ledger.w2,
        QsdtLedgerField::W3 => ledger.w3,
        QsdtLedgerField::W4 => ledger.w4,
        QsdtLedgerField::W5 => ledger.w5,
        QsdtLedgerField::WMeas => ledger.w_meas,
        QsdtLedgerField::WReset => ledger.w_reset,
        QsdtLedgerField::P0 => ledger.p0,
        QsdtLedgerField::V1 => ledger.v1,
        QsdtLedgerField::V2 => ledger.v2,
        QsdtLedgerField::C => ledger.c,
        QsdtLedgerField::Total => ledger.total,
    };
    unsafe { write_out(out, value) }
}

/// Serializes the ledger to a JSON object. Returns null if `ledger` is
/// null. The string is NUL-terminated UTF-8.
///
/// # Safety
///
/// `ledger` must be null or a live pointer from `qsdt_ledger_new`. The
/// returned string must be released with `qsdt_string_free`.
#[no_mangle]
pub unsafe extern "C" fn qsdt_ledger_to_json(ledger: *const QsdtLedger) -> *mut c_char {
    if ledger.is_null() {
        return std::ptr::null_mut();
    }
    let text = serde_json::to_string(unsafe { &(*ledger).ledger }).expect("plain floats");
    CString::new(text).expect("no interior NUL").into_raw()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
///
/// `s` must be null or a pointer returned by `qsdt_ledger_to_json` that has
/// not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn qsdt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Library version as a static NUL-terminated string; do not free.
#[no_mangle]
pub extern "C" fn qsdt_version() -> *const c_char {
    static VERSION: &CStr = {
        // concat! keeps this in sync with Cargo.toml
        match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
            Ok(v) => v,
            Err(_) => panic!("version contains NUL"),
        }
    };
    VERSION.as_ptr()
}
