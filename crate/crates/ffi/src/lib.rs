//! C ABI over `drbandit`.
//!
//! Objects cross the boundary as opaque handles created by `*_parse` or
//! `drb_run_experiment` and released with the matching `*_free`. Every
//! fallible call returns a [`DrbStatus`]; on failure a message is kept per
//! thread and read back with [`drb_last_error`]. Panics never unwind into C.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use drbandit::dist::{parse_arms, ArmModel, FiniteCdf};
use drbandit::harness::{self, parse_kv, AggregateResult, ExperimentConfig};
use drbandit::policy::PolicyKind;
use drbandit::riskmetric::{choquet, eval_h, DistortionSpec};
use drbandit::simplex::oracle_continuous;
use drbandit::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DrbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidArgument = 4,
    Config = 5,
    Io = 6,
    BufferTooSmall = 7,
    OutOfRange = 8,
    Panic = 9,
}

/// Policy of a result row.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DrbPolicy {
    Etc = 0,
    Ucb = 1,
    CeUcb = 2,
    Uniform = 3,
}

impl From<PolicyKind> for DrbPolicy {
    fn from(p: PolicyKind) -> Self {
        match p {
            PolicyKind::Etc => DrbPolicy::Etc,
            PolicyKind::Ucb => DrbPolicy::Ucb,
            PolicyKind::CeUcb => DrbPolicy::CeUcb,
            PolicyKind::Uniform => DrbPolicy::Uniform,
        }
    }
}

/// One aggregated checkpoint of one policy.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct DrbRow {
    pub sweep_param: f64,
    pub policy: u32,
    pub checkpoint: u64,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub std_error: f64,
    pub seed: u64,
}

/// A parsed distortion riskmetric.
pub struct DrbSpec(DistortionSpec);

/// A parsed list of arm distributions.
pub struct DrbArms(Vec<ArmModel>);

/// Output of an experiment run.
pub struct DrbResult(AggregateResult);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> DrbStatus {
    match e {
        Error::Parse(_) => DrbStatus::Parse,
        Error::Config(_) | Error::HorizonTooSmall { .. } | Error::GapUndefined => DrbStatus::Config,
        Error::Io(_) => DrbStatus::Io,
        Error::Trial { source, .. } => status_of(source),
        _ => DrbStatus::InvalidArgument,
    }
}

struct Fail(DrbStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

/// Runs `f`, records any failure and converts panics into `Panic`.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> DrbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DrbStatus::Ok,
        Ok(Err(Fail(code, msg))) => {
            set_error(msg);
            code
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            DrbStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(DrbStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(DrbStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn obj<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

/// Message of the last failure on this thread, or null if none.
///
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn drb_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn drb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a riskmetric token such as `gini`, `cvar:0.5` or `dualpower:2`.
///
/// # Safety
/// `token` must be a nul-terminated string and `out_spec` writable.
#[no_mangle]
pub unsafe extern "C" fn drb_spec_parse(token: *const c_char, out_spec: *mut *mut DrbSpec) -> DrbStatus {
    guard(|| {
        let slot = out(out_spec, "out_spec")?;
        let spec: DistortionSpec = str_arg(token, "token")?.parse()?;
        *slot = Box::into_raw(Box::new(DrbSpec(spec)));
        Ok(())
    })
}

/// Releases a spec. Null is ignored.
///
/// # Safety
/// `spec` must come from [`drb_spec_parse`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn drb_spec_free(spec: *mut DrbSpec) {
    if !spec.is_null() {
        drop(Box::from_raw(spec));
    }
}

/// Distortion function `h(u)` for `u` in `[0, 1]`.
///
/// # Safety
/// `spec` must be a live handle and `out_value` writable.
#[no_mangle]
pub unsafe extern "C" fn drb_spec_h(spec: *const DrbSpec, u: f64, out_value: *mut f64) -> DrbStatus {
    guard(|| {
        let spec = obj(spec, "spec")?;
        let slot = out(out_value, "out_value")?;
        if !(0.0..=1.0).contains(&u) {
            return Err(Fail(DrbStatus::OutOfRange, format!("u = {u} outside [0, 1]")));
        }
        *slot = eval_h(&spec.0, u);
        Ok(())
    })
}

/// Hölder constant and exponent of a riskmetric.
///
/// # Safety
/// `spec` must be a live handle; both outputs writable.
#[no_mangle]
pub unsafe extern "C" fn drb_spec_holder(spec: *const DrbSpec, out_l: *mut f64, out_q: *mut f64) -> DrbStatus {
    guard(|| {
        let spec = obj(spec, "spec")?;
        *out(out_l, "out_l")? = spec.0.holder_l;
        *out(out_q, "out_q")? = spec.0.holder_q;
        Ok(())
    })
}

/// Riskmetric of a finite distribution given by `n` atoms and masses.
///
/// # Safety
/// `values` and `masses` must point to `n` doubles each.
#[no_mangle]
pub unsafe extern "C" fn drb_choquet(
    spec: *const DrbSpec,
    values: *const f64,
    masses: *const f64,
    n: usize,
    out_value: *mut f64,
) -> DrbStatus {
    guard(|| {
        let spec = obj(spec, "spec")?;
        let slot = out(out_value, "out_value")?;
        if n > 0 && (values.is_null() || masses.is_null()) {
            return Err(null("values or masses"));
        }
        let (xs, ms) = if n == 0 {
            (&[][..], &[][..])
        } else {
            (std::slice::from_raw_parts(values, n), std::slice::from_raw_parts(masses, n))
        };
        let cdf = FiniteCdf::from_masses(xs.iter().copied().zip(ms.iter().copied()))?;
        *slot = choquet(&spec.0, &cdf)?;
        Ok(())
    })
}

/// Parses arms such as `bern:0.4,bern:0.9`.
///
/// # Safety
/// `text` must be a nul-terminated string and `out_arms` writable.
#[no_mangle]
pub unsafe extern "C" fn drb_arms_parse(text: *const c_char, out_arms: *mut *mut DrbArms) -> DrbStatus {
    guard(|| {
        let slot = out(out_arms, "out_arms")?;
        let arms = parse_arms(str_arg(text, "text")?)?;
        *slot = Box::into_raw(Box::new(DrbArms(arms)));
        Ok(())
    })
}

/// Number of arms, or 0 for a null handle.
///
/// # Safety
/// `arms` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn drb_arms_count(arms: *const DrbArms) -> usize {
    arms.as_ref().map_or(0, |a| a.0.len())
}

/// Releases arms. Null is ignored.
///
/// # Safety
/// `arms` must come from [`drb_arms_parse`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn drb_arms_free(arms: *mut DrbArms) {
    if !arms.is_null() {
        drop(Box::from_raw(arms));
    }
}

/// Optimal mixture over the simplex. `weights` receives one entry per arm
/// and must hold at least `capacity` doubles; `BufferTooSmall` is returned
/// when `capacity` is below the arm count.
///
/// # Safety
/// Handles must be live; `weights` must point to `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn drb_oracle(
    spec: *const DrbSpec,
    arms: *const DrbArms,
    resolution: f64,
    weights: *mut f64,
    capacity: usize,
    out_value: *mut f64,
) -> DrbStatus {
    guard(|| {
        let spec = obj(spec, "spec")?;
        let arms = obj(arms, "arms")?;
        let value = out(out_value, "out_value")?;
        let k = arms.0.len();
        if weights.is_null() {
            return Err(null("weights"));
        }
        if capacity < k {
            return Err(Fail(DrbStatus::BufferTooSmall, format!("need {k} weights, have {capacity}")));
        }
        let cdfs: Vec<FiniteCdf> = arms.0.iter().map(ArmModel::to_cdf).collect();
        let o = oracle_continuous(&spec.0, &cdfs, resolution)?;
        std::slice::from_raw_parts_mut(weights, k).copy_from_slice(o.weights.as_slice());
        *value = o.value;
        Ok(())
    })
}

/// Runs a Monte-Carlo experiment described by `key = value` lines, using
/// the same keys as the command-line config file. Missing keys keep their
/// defaults.
///
/// # Safety
/// `config` must be a nul-terminated string and `out_result` writable.
#[no_mangle]
pub unsafe extern "C" fn drb_run_experiment(config: *const c_char, out_result: *mut *mut DrbResult) -> DrbStatus {
    guard(|| {
        let slot = out(out_result, "out_result")?;
        let mut cfg = ExperimentConfig::default();
        let pairs = parse_kv(str_arg(config, "config")?)?;
        cfg.apply_all(pairs.iter().map(|(k, v)| (k.as_str(), v.as_str())))?;
        cfg.validate()?;
        let res = harness::run_experiment(&cfg)?;
        *slot = Box::into_raw(Box::new(DrbResult(res)));
        Ok(())
    })
}

/// Number of rows in a result, or 0 for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn drb_result_row_count(result: *const DrbResult) -> usize {
    result.as_ref().map_or(0, |r| r.0.rows.len())
}

/// Copies row `index` into `out_row`. `policy` holds a [`DrbPolicy`] value.
///
/// # Safety
/// `result` must be a live handle and `out_row` writable.
#[no_mangle]
pub unsafe extern "C" fn drb_result_row(result: *const DrbResult, index: usize, out_row: *mut DrbRow) -> DrbStatus {
    guard(|| {
        let r = obj(result, "result")?;
        let slot = out(out_row, "out_row")?;
        let row = r.0.rows.get(index).ok_or_else(|| {
            Fail(DrbStatus::OutOfRange, format!("row {index} of {}", r.0.rows.len()))
        })?;
        *slot = DrbRow {
            sweep_param: row.sweep_param,
            policy: DrbPolicy::from(row.policy) as u32,
            checkpoint: row.checkpoint,
            mean: row.mean,
            min: row.min,
            max: row.max,
            std_error: row.stderr,
            seed: row.seed,
        };
        Ok(())
    })
}

/// Writes the result as CSV. `out_len` always receives the byte length
/// without the terminating nul. A null `buf` queries the length only;
/// otherwise `BufferTooSmall` is returned unless `capacity > *out_len`.
///
/// # Safety
/// `result` must be live; `buf` null or pointing to `capacity` bytes.
#[no_mangle]
pub unsafe extern "C" fn drb_result_to_csv(
    result: *const DrbResult,
    buf: *mut c_char,
    capacity: usize,
    out_len: *mut usize,
) -> DrbStatus {
    guard(|| {
        let r = obj(result, "result")?;
        let len = out(out_len, "out_len")?;
        let text = harness::to_csv(&r.0)?;
        *len = text.len();
        if buf.is_null() {
            return Ok(());
        }
        if capacity <= text.len() {
            return Err(Fail(
                DrbStatus::BufferTooSmall,
                format!("need {} bytes, have {capacity}", text.len() + 1),
            ));
        }
        ptr::copy_nonoverlapping(text.as_ptr(), buf.cast::<u8>(), text.len());
        *buf.add(text.len()) = 0;
        Ok(())
    })
}

/// Releases a result. Null is ignored.
///
/// # Safety
/// `result` must come from [`drb_run_experiment`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn drb_result_free(result: *mut DrbResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}
