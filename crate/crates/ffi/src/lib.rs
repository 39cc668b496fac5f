//! C ABI for the congruence-speed library.
//!
//! Every fallible call returns a [`TcsStatus`] and writes its result through
//! an out-pointer. On failure, [`tcs_last_error`] describes what went wrong.
//! Big integers cross the boundary as NUL-terminated decimal strings; strings
//! returned by the library are released with [`tcs_string_free`]. Profiles are
//! opaque [`TcsProfile`] handles released with [`tcs_profile_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use congruence_speed::arith::parse_decimal;
use congruence_speed::classes::{min_base, min_base_class, speed_by_formula};
use congruence_speed::decadic::root_residue;
use congruence_speed::primes::{is_prime, smallest_prime_with_speed};
use congruence_speed::speed::{
    constant_speed, speed_at_height, speed_profile, ConstantSpeed, Frozen, SpeedProfile, TetrationBase,
};
use congruence_speed::Error;

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TcsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    PrecisionExhausted = 3,
    BudgetExhausted = 4,
    OutOfRange = 5,
    Internal = 6,
    Panic = 7,
}

impl From<&Error> for TcsStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::PrecisionExhausted { .. } => TcsStatus::PrecisionExhausted,
            Error::BudgetExhausted { .. } => TcsStatus::BudgetExhausted,
            Error::Cache(_) | Error::Invariant(_) | Error::FixtureMismatch { .. } => TcsStatus::Internal,
            _ => TcsStatus::InvalidArgument,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(status: TcsStatus, msg: impl Into<String>) -> TcsStatus {
    set_last_error(msg);
    status
}

/// Run `f`, turning library errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), TcsStatus>) -> TcsStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TcsStatus::Ok,
        Ok(Err(status)) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(TcsStatus::Panic, msg)
        }
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, TcsStatus>;
}

impl<T> OrStatus<T> for congruence_speed::Result<T> {
    fn or_status(self) -> Result<T, TcsStatus> {
        self.map_err(|e| fail(TcsStatus::from(&e), e.to_string()))
    }
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, TcsStatus> {
    if s.is_null() {
        return Err(fail(TcsStatus::NullPointer, "string argument is null"));
    }
    unsafe { CStr::from_ptr(s) }
        .to_str()
        .map_err(|_| fail(TcsStatus::InvalidArgument, "string argument is not UTF-8"))
}

unsafe fn read_base(s: *const c_char) -> Result<TetrationBase, TcsStatus> {
    let s = unsafe { read_str(s)? };
    TetrationBase::new(parse_decimal(s).or_status()?).or_status()
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), TcsStatus> {
    if out.is_null() {
        return Err(fail(TcsStatus::NullPointer, "output pointer is null"));
    }
    unsafe { out.write(value) };
    Ok(())
}

unsafe fn write_string(out: *mut *mut c_char, value: String) -> Result<(), TcsStatus> {
    let c = CString::new(value).map_err(|_| fail(TcsStatus::Internal, "interior NUL in output"))?;
    unsafe { write(out, c.into_raw()) }
}

/// ABI version as `major * 10000 + minor * 100 + patch`.
#[no_mangle]
pub extern "C" fn tcs_ffi_version() -> u32 {
    100
}

/// Message for the last failed call on this thread, or NULL.
///
/// The pointer stays valid until the next `tcs_*` call on the same thread.
#[no_mangle]
pub extern "C" fn tcs_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Release a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn tcs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Constant congruence speed `V(a)` of the decimal integer `a`.
///
/// # Safety
/// `a` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tcs_constant_speed(a: *const c_char, out: *mut u64) -> TcsStatus {
    guard(|| {
        let a = unsafe { read_base(a)? };
        let v = constant_speed(&a).or_status()?;
        unsafe { write(out, v) }
    })
}

/// `V(a, b)` computed modulo `10^digits`.
///
/// # Safety
/// `a` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tcs_speed_at_height(a: *const c_char, b: u64, digits: u32, out: *mut u64) -> TcsStatus {
    guard(|| {
        let a = unsafe { read_base(a)? };
        let v = speed_at_height(&a, b, digits).or_status()?;
        unsafe { write(out, v) }
    })
}

/// `V(a)` from the closed form, confirmed by class membership.
///
/// # Safety
/// `a` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tcs_speed_by_formula(a: *const c_char, out: *mut u64) -> TcsStatus {
    guard(|| {
        let a = unsafe { read_base(a)? };
        let v = speed_by_formula(&a).or_status()?;
        unsafe { write(out, v) }
    })
}

/// Smallest base with constant speed `n`, as a decimal string.
///
/// # Safety
/// `out` must be writable; free the result with `tcs_string_free`.
#[no_mangle]
pub unsafe extern "C" fn tcs_min_base(n: u64, out: *mut *mut c_char) -> TcsStatus {
    guard(|| {
        let v = min_base(n).or_status()?;
        unsafe { write_string(out, v.to_string()) }
    })
}

/// Smallest base with last digit `s1` and constant speed `n >= 2`.
///
/// # Safety
/// `out` must be writable; free the result with `tcs_string_free`.
#[no_mangle]
pub unsafe extern "C" fn tcs_min_base_class(s1: u32, n: u64, out: *mut *mut c_char) -> TcsStatus {
    guard(|| {
        let v = min_base_class(s1, n).or_status()?;
        unsafe { write_string(out, v.to_string()) }
    })
}

/// Root `i` (1 to 13) of `y^5 = y` modulo `10^digits`, zero padded to `digits` characters.
///
/// # Safety
/// `out` must be writable; free the result with `tcs_string_free`.
#[no_mangle]
pub unsafe extern "C" fn tcs_root_residue(i: u32, digits: u32, out: *mut *mut c_char) -> TcsStatus {
    guard(|| {
        if digits == 0 {
            return Err(fail(TcsStatus::OutOfRange, "digits must be positive"));
        }
        let r = root_residue(i, digits).map_err(|e| fail(TcsStatus::OutOfRange, e.to_string()))?;
        unsafe { write_string(out, r.to_padded_string()) }
    })
}

/// Primality of the decimal integer `x`: exact below 2^64, Baillie–PSW above.
///
/// # Safety
/// `x` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tcs_is_prime(x: *const c_char, out: *mut bool) -> TcsStatus {
    guard(|| {
        let x = parse_decimal(unsafe { read_str(x)? }).or_status()?;
        unsafe { write(out, is_prime(&x)) }
    })
}

/// Smallest prime with constant speed `n`, testing at most `budget` candidates.
///
/// # Safety
/// `out` must be writable; free the result with `tcs_string_free`.
#[no_mangle]
pub unsafe extern "C" fn tcs_smallest_prime_with_speed(n: u64, budget: u64, out: *mut *mut c_char) -> TcsStatus {
    guard(|| {
        let r = smallest_prime_with_speed(n, budget).or_status()?;
        unsafe { write_string(out, r.q.to_string()) }
    })
}

/// Per-height speeds of one base; opaque to C.
pub struct TcsProfile {
    inner: SpeedProfile,
}

/// Build the speed profile of `a` for heights `1..=max_height` modulo `10^digits`.
///
/// # Safety
/// `a` must be a NUL-terminated string; `out` must be writable. Release the
/// handle with `tcs_profile_free`.
#[no_mangle]
pub unsafe extern "C" fn tcs_profile_new(
    a: *const c_char,
    max_height: u64,
    digits: u32,
    out: *mut *mut TcsProfile,
) -> TcsStatus {
    guard(|| {
        let a = unsafe { read_base(a)? };
        let inner = speed_profile(&a, max_height, digits).or_status()?;
        unsafe { write(out, Box::into_raw(Box::new(TcsProfile { inner }))) }
    })
}

/// Release a profile. NULL is ignored.
///
/// # Safety
/// `p` must come from `tcs_profile_new` and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn tcs_profile_free(p: *mut TcsProfile) {
    if !p.is_null() {
        drop(unsafe { Box::from_raw(p) });
    }
}

unsafe fn profile_ref<'a>(p: *const TcsProfile) -> Result<&'a SpeedProfile, TcsStatus> {
    if p.is_null() {
        return Err(fail(TcsStatus::NullPointer, "profile handle is null"));
    }
    Ok(unsafe { &(*p).inner })
}

/// Number of heights in the profile (0 for NULL).
///
/// # Safety
/// `p` must be NULL or a live profile handle.
#[no_mangle]
pub unsafe extern "C" fn tcs_profile_len(p: *const TcsProfile) -> usize {
    if p.is_null() {
        0
    } else {
        unsafe { (*p).inner.entries.len() }
    }
}

/// `V(a, b)` for height `b` (1-based). `PrecisionExhausted` when unresolved.
///
/// # Safety
/// `p` must be a live profile handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tcs_profile_speed(p: *const TcsProfile, b: u64, out: *mut u64) -> TcsStatus {
    guard(|| {
        let profile = unsafe { profile_ref(p)? };
        let entry = b
            .checked_sub(1)
            .and_then(|i| profile.entries.get(i as usize))
            .ok_or_else(|| fail(TcsStatus::OutOfRange, format!("height {b} outside the profile")))?;
        let v = entry.speed.ok_or_else(|| {
            fail(TcsStatus::PrecisionExhausted, format!("V(a, {b}) unresolved at {} digits", profile.precision_digits))
        })?;
        unsafe { write(out, v) }
    })
}

/// Frozen digit count `ν(b)`. `PrecisionExhausted` when only a lower bound is known.
///
/// # Safety
/// `p` must be a live profile handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tcs_profile_frozen(p: *const TcsProfile, b: u64, out: *mut u64) -> TcsStatus {
    guard(|| {
        let profile = unsafe { profile_ref(p)? };
        let entry = b
            .checked_sub(1)
            .and_then(|i| profile.entries.get(i as usize))
            .ok_or_else(|| fail(TcsStatus::OutOfRange, format!("height {b} outside the profile")))?;
        match entry.frozen {
            Frozen::Exact(d) => unsafe { write(out, d) },
            Frozen::AtLeast(d) => Err(fail(TcsStatus::PrecisionExhausted, format!("ν({b}) >= {d}"))),
            Frozen::Unbounded => Err(fail(TcsStatus::OutOfRange, "every digit is frozen for a = 1")),
        }
    })
}

/// Constant speed if the profile itself settles it; `PrecisionExhausted` otherwise.
///
/// # Safety
/// `p` must be a live profile handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tcs_profile_constant_speed(p: *const TcsProfile, out: *mut u64) -> TcsStatus {
    guard(|| {
        let profile = unsafe { profile_ref(p)? };
        match profile.constant_speed {
            ConstantSpeed::Zero => unsafe { write(out, 0) },
            ConstantSpeed::Stable { value, .. } => unsafe { write(out, value) },
            ConstantSpeed::Unresolved => {
                Err(fail(TcsStatus::PrecisionExhausted, "profile too short to settle the constant speed"))
            }
        }
    })
}
