//! C ABI over `nilsol`.
//!
//! Conventions:
//! * every function returns a [`NilsolStatus`]; results go through out-pointers;
//! * handles are opaque and released with their `_free` function;
//! * strings returned through `char **` are UTF-8 JSON owned by the caller and
//!   released with [`nilsol_string_free`];
//! * after a non-OK status, [`nilsol_last_error`] describes the failure on the
//!   calling thread until the next call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use num_complex::Complex64;
use num_rational::Rational64;
use serde::Serialize;

use nilsol::counting::{sol_set, SubsetOfZN};
use nilsol::error::Error;
use nilsol::extremal::{self, Degeneracy, SearchBudget};
use nilsol::forms::LinearFormSystem;
use nilsol::gowers::gowers_norm_of;
use nilsol::harness;
use nilsol::io;
use nilsol::nil::{shared, ModelRef};
use nilsol::periodic::build_periodic_irrational;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NilsolStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Precondition = 4,
    BudgetExceeded = 5,
    Timeout = 6,
    Internal = 7,
    Panic = 8,
}

/// A system of linear forms.
pub struct NilsolSystem(LinearFormSystem);

/// A subset of Z/N.
pub struct NilsolSet(SubsetOfZN);

/// A filtered nilmanifold model.
pub struct NilsolModel(ModelRef);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Failure(NilsolStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::BudgetExceeded { .. } => NilsolStatus::BudgetExceeded,
            Error::Timeout { .. } => NilsolStatus::Timeout,
            Error::Parse(_) | Error::Json(_) | Error::Csv(_) => NilsolStatus::Parse,
            Error::Internal(_) => NilsolStatus::Internal,
            Error::Precondition(_) | Error::Divisibility { .. } | Error::LevelViolation { .. } | Error::NotInGroup(_) => {
                NilsolStatus::Precondition
            }
            _ => NilsolStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn guard(f: impl FnOnce() -> Outcome) -> NilsolStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            NilsolStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside nilsol".into());
            NilsolStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(NilsolStatus::NullPointer, format!("{what} is null"))
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(NilsolStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn write_json(out: &mut *mut c_char, value: impl Serialize) -> Outcome {
    let text = serde_json::to_string(&value).map_err(|e| Failure::from(Error::from(e)))?;
    *out = CString::new(text).map_err(|e| Failure(NilsolStatus::Internal, e.to_string()))?.into_raw();
    Ok(())
}

fn budget(ms: u64) -> SearchBudget {
    if ms == 0 {
        SearchBudget::default()
    } else {
        SearchBudget::with_time_ms(ms)
    }
}

fn ratio(num: i64, den: i64) -> Result<Rational64, Failure> {
    if den <= 0 || num < 0 {
        return Err(Failure(NilsolStatus::InvalidArgument, format!("alpha must be a nonnegative fraction, got {num}/{den}")));
    }
    Ok(Rational64::new(num, den))
}

/// Message for the last failed call on this thread; empty after success.
/// The pointer stays valid until the next nilsol call on the same thread.
#[no_mangle]
pub extern "C" fn nilsol_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn nilsol_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a system from JSON: `{"forms": [[...], ...], "name": ...}`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nilsol_system_from_json(json: *const c_char, out: *mut *mut NilsolSystem) -> NilsolStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let system = LinearFormSystem::from_json(read_str(json, "json")?)?;
        *out = Box::into_raw(Box::new(NilsolSystem(system)));
        Ok(())
    })
}

/// Builds a system from a row-major `t x d` coefficient matrix.
///
/// # Safety
/// `coefficients` must point to `t * d` values and `out` be valid.
#[no_mangle]
pub unsafe extern "C" fn nilsol_system_new(
    coefficients: *const i64,
    t: usize,
    d: usize,
    out: *mut *mut NilsolSystem,
) -> NilsolStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let len = t.checked_mul(d).ok_or_else(|| Failure(NilsolStatus::InvalidArgument, "t * d overflows".into()))?;
        let flat = slice(coefficients, len, "coefficients")?;
        let rows = if d == 0 { Vec::new() } else { flat.chunks(d).map(<[i64]>::to_vec).collect() };
        *out = Box::into_raw(Box::new(NilsolSystem(LinearFormSystem::new(rows)?)));
        Ok(())
    })
}

/// The k-term arithmetic progression `(n1 + j n2)_{j < k}`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn nilsol_system_arithmetic_progression(k: usize, out: *mut *mut NilsolSystem) -> NilsolStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        if k == 0 {
            return Err(Failure(NilsolStatus::InvalidArgument, "k must be positive".into()));
        }
        *out = Box::into_raw(Box::new(NilsolSystem(LinearFormSystem::arithmetic_progression(k))));
        Ok(())
    })
}

/// # Safety
/// `system` must come from this library and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn nilsol_system_free(system: *mut NilsolSystem) {
    if !system.is_null() {
        drop(Box::from_raw(system));
    }
}

/// Kernel presentation of the system's image, as JSON.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn nilsol_kernelize(system: *const NilsolSystem, json_out: *mut *mut c_char) -> NilsolStatus {
    guard(|| {
        let system = borrow(system, "system")?;
        let out = out_ptr(json_out, "json_out")?;
        write_json(out, system.0.kernelize()?)
    })
}

/// A subset of Z/modulus from its members (duplicates rejected).
///
/// # Safety
/// `members` must point to `len` values and `out` be valid.
#[no_mangle]
pub unsafe extern "C" fn nilsol_set_new(modulus: u64, members: *const u64, len: usize, out: *mut *mut NilsolSet) -> NilsolStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let set = SubsetOfZN::new(modulus, slice(members, len, "members")?.to_vec())?;
        *out = Box::into_raw(Box::new(NilsolSet(set)));
        Ok(())
    })
}

/// # Safety
/// `set` must be valid; `len` receives the number of members.
#[no_mangle]
pub unsafe extern "C" fn nilsol_set_len(set: *const NilsolSet, len: *mut usize) -> NilsolStatus {
    guard(|| {
        *out_ptr(len, "len")? = borrow(set, "set")?.0.len();
        Ok(())
    })
}

/// # Safety
/// `set` must come from this library and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn nilsol_set_free(set: *mut NilsolSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Exact normalized solution count of `set` for `system`, as `num / den`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn nilsol_sol_set(
    system: *const NilsolSystem,
    set: *const NilsolSet,
    num: *mut i64,
    den: *mut i64,
) -> NilsolStatus {
    guard(|| {
        let value = sol_set(&borrow(set, "set")?.0, &borrow(system, "system")?.0)?;
        *out_ptr(num, "num")? = *value.numer();
        *out_ptr(den, "den")? = *value.denom();
        Ok(())
    })
}

/// `||f||_{U^d}` for `f = re + i im` on Z/n; `im` may be null for real input.
///
/// # Safety
/// `re` (and `im` when non-null) must point to `n` values; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn nilsol_gowers_norm(re: *const f64, im: *const f64, n: usize, d: u32, out: *mut f64) -> NilsolStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let re = slice(re, n, "re")?;
        let values: Vec<Complex64> = if im.is_null() {
            re.iter().map(|&x| Complex64::new(x, 0.0)).collect()
        } else {
            re.iter().zip(slice(im, n, "im")?).map(|(&a, &b)| Complex64::new(a, b)).collect()
        };
        *out = gowers_norm_of(&values, d)?;
        Ok(())
    })
}

/// Exact `m(alpha, n)` for `alpha = alpha_num / alpha_den`; `budget_ms = 0`
/// means no time limit. Writes the result JSON.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn nilsol_min_sol_exact(
    system: *const NilsolSystem,
    alpha_num: i64,
    alpha_den: i64,
    n: u64,
    budget_ms: u64,
    json_out: *mut *mut c_char,
) -> NilsolStatus {
    guard(|| {
        let system = borrow(system, "system")?;
        let out = out_ptr(json_out, "json_out")?;
        write_json(out, extremal::min_sol_exact(&system.0, ratio(alpha_num, alpha_den)?, n, &budget(budget_ms))?)
    })
}

/// Exact `M(alpha, n)`; see [`nilsol_min_sol_exact`].
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn nilsol_max_sol_exact(
    system: *const NilsolSystem,
    alpha_num: i64,
    alpha_den: i64,
    n: u64,
    budget_ms: u64,
    json_out: *mut *mut c_char,
) -> NilsolStatus {
    guard(|| {
        let system = borrow(system, "system")?;
        let out = out_ptr(json_out, "json_out")?;
        write_json(out, extremal::max_sol_exact(&system.0, ratio(alpha_num, alpha_den)?, n, &budget(budget_ms))?)
    })
}

/// Exact largest density of a subset of Z/n free of every configuration of
/// `system`; `weak != 0` ignores constant configurations.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn nilsol_max_free_exact(
    system: *const NilsolSystem,
    n: u64,
    weak: i32,
    budget_ms: u64,
    json_out: *mut *mut c_char,
) -> NilsolStatus {
    guard(|| {
        let system = borrow(system, "system")?;
        let out = out_ptr(json_out, "json_out")?;
        let degeneracy = if weak != 0 { Degeneracy::Weak } else { Degeneracy::Strict };
        write_json(
            out,
            extremal::max_free_density_exact(std::slice::from_ref(&system.0), n, degeneracy, &budget(budget_ms))?,
        )
    })
}

/// A built-in model (`heisenberg-lcs`, `heisenberg-deg3`, `torus:m=M,s=S`)
/// or a path to a model JSON file.
///
/// # Safety
/// `name` must be NUL-terminated and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn nilsol_model_load(name: *const c_char, out: *mut *mut NilsolModel) -> NilsolStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let model = io::load_model(read_str(name, "name")?)?;
        *out = Box::into_raw(Box::new(NilsolModel(shared(model))));
        Ok(())
    })
}

/// # Safety
/// `model` must come from this library and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn nilsol_model_free(model: *mut NilsolModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// A q-periodic, A-irrational polynomial sequence; writes its Taylor
/// coefficients (exact rationals) and verification flags as JSON.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn nilsol_build_periodic(
    model: *const NilsolModel,
    q: u64,
    a: u64,
    seed: u64,
    json_out: *mut *mut c_char,
) -> NilsolStatus {
    guard(|| {
        let model = borrow(model, "model")?;
        let out = out_ptr(json_out, "json_out")?;
        let built = build_periodic_irrational(model.0.clone(), q, a, seed)?;
        write_json(
            out,
            serde_json::json!({
                "taylor": built.sequence.to_report()?,
                "stages": built.stages,
                "periodic": built.periodic,
                "irrational": built.irrational,
            }),
        )
    })
}

/// Runs an acceptance experiment by id or number and writes its report.
/// A failing experiment still returns OK; inspect `"passed"`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn nilsol_reproduce(id: *const c_char, json_out: *mut *mut c_char) -> NilsolStatus {
    guard(|| {
        let out = out_ptr(json_out, "json_out")?;
        write_json(out, harness::reproduce(read_str(id, "id")?)?)
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nilsol_version() -> *const c_char {
    static VERSION: &[u8] = concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes();
    VERSION.as_ptr().cast()
}
