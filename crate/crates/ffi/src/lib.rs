//! C interface to the laboratory.
//!
//! Every call returns a [`DslabStatus`]. On failure a message is kept per
//! thread and can be read with [`dslab_last_error_message`]. Objects are
//! opaque handles released by their matching `_free` function. Strings are
//! copied into caller buffers: the required size, NUL included, is stored
//! in `needed`, and a short buffer yields `DSLAB_BUFFER_TOO_SMALL`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use dslab_core::cli::report_from_args;
use dslab_core::means::named_kernel;
use dslab_core::systems::{system_values, SystemId};
use dslab_core::verification::{ExperimentReport, Verdict};
use dslab_core::weights::WeightSequence;
use dslab_core::DslabError;

/// Outcome of a call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DslabStatus {
    DslabOk = 0,
    DslabDomainError = 1,
    DslabResolutionError = 2,
    DslabDegenerateWeights = 3,
    DslabModeError = 4,
    DslabParseError = 5,
    DslabIoError = 6,
    DslabNullPointer = 7,
    DslabInvalidUtf8 = 8,
    DslabBufferTooSmall = 9,
    DslabPanic = 10,
}

/// Walsh–Paley ordering.
pub const DSLAB_SYSTEM_WALSH_PALEY: u32 = 0;
/// Walsh–Kaczmarz ordering.
pub const DSLAB_SYSTEM_WALSH_KACZMARZ: u32 = 1;

/// Verdict codes written by [`dslab_report_verdict`].
pub const DSLAB_VERDICT_PASS: i32 = 0;
pub const DSLAB_VERDICT_FAIL: i32 = 1;
pub const DSLAB_VERDICT_INCONCLUSIVE: i32 = 2;

/// A weight sequence.
pub struct DslabWeights(WeightSequence);

/// An experiment report.
pub struct DslabReport(ExperimentReport);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &DslabError) -> DslabStatus {
    match e {
        DslabError::Domain(_) => DslabStatus::DslabDomainError,
        DslabError::Resolution { .. } => DslabStatus::DslabResolutionError,
        DslabError::DegenerateWeights { .. } => DslabStatus::DslabDegenerateWeights,
        DslabError::Mode(_) => DslabStatus::DslabModeError,
        DslabError::Parse(_) => DslabStatus::DslabParseError,
        DslabError::Io(_) => DslabStatus::DslabIoError,
    }
}

enum Failure {
    Core(DslabError),
    Status(DslabStatus, String),
}

impl From<DslabError> for Failure {
    fn from(e: DslabError) -> Self {
        Failure::Core(e)
    }
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> DslabStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error(String::new());
            DslabStatus::DslabOk
        }
        Ok(Err(Failure::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            DslabStatus::DslabPanic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure::Status(DslabStatus::DslabNullPointer, format!("{what} is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Status(DslabStatus::DslabInvalidUtf8, format!("{what} is not UTF-8")))
}

fn system(code: u32) -> Result<SystemId, Failure> {
    match code {
        DSLAB_SYSTEM_WALSH_PALEY => Ok(SystemId::WalshPaley),
        DSLAB_SYSTEM_WALSH_KACZMARZ => Ok(SystemId::WalshKaczmarz),
        other => Err(Failure::Status(
            DslabStatus::DslabParseError,
            format!("unknown system code {other}"),
        )),
    }
}

unsafe fn copy_out(s: &str, buf: *mut c_char, len: usize, needed: *mut usize) -> Result<(), Failure> {
    let size = s.len() + 1;
    if !needed.is_null() {
        *needed = size;
    }
    if buf.is_null() || len < size {
        return Err(Failure::Status(
            DslabStatus::DslabBufferTooSmall,
            format!("buffer holds {len} bytes, {size} needed"),
        ));
    }
    ptr::copy_nonoverlapping(s.as_ptr(), buf.cast::<u8>(), s.len());
    *buf.add(s.len()) = 0;
    Ok(())
}

unsafe fn fill<T: Copy>(values: &[T], out: *mut T, len: usize) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    if len < values.len() {
        return Err(Failure::Status(
            DslabStatus::DslabBufferTooSmall,
            format!("buffer holds {len} values, {} needed", values.len()),
        ));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
    Ok(())
}

/// Size in bytes, NUL included, of the calling thread's last error message.
#[no_mangle]
pub extern "C" fn dslab_last_error_length() -> usize {
    LAST_ERROR.with(|e| e.borrow().len() + 1)
}

/// Copies the calling thread's last error message into `buf`.
///
/// # Safety
/// `buf` must be writable for `len` bytes; `needed` may be null.
#[no_mangle]
pub unsafe extern "C" fn dslab_last_error_message(buf: *mut c_char, len: usize, needed: *mut usize) -> DslabStatus {
    let msg = LAST_ERROR.with(|e| e.borrow().clone());
    let size = msg.len() + 1;
    if !needed.is_null() {
        *needed = size;
    }
    if buf.is_null() || len < size {
        return DslabStatus::DslabBufferTooSmall;
    }
    ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), msg.len());
    *buf.add(msg.len()) = 0;
    DslabStatus::DslabOk
}

/// Builds weights from a preset such as `"cesaro:1/2"`.
///
/// # Safety
/// `preset` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dslab_weights_new(preset: *const c_char, out: *mut *mut DslabWeights) -> DslabStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let q = WeightSequence::preset(text(preset, "preset")?)?;
        *out = Box::into_raw(Box::new(DslabWeights(q)));
        Ok(())
    })
}

/// Releases weights. Null is ignored.
///
/// # Safety
/// `weights` must come from [`dslab_weights_new`] and not be used again.
#[no_mangle]
pub unsafe extern "C" fn dslab_weights_free(weights: *mut DslabWeights) {
    if !weights.is_null() {
        drop(Box::from_raw(weights));
    }
}

/// `q_k` as a double.
///
/// # Safety
/// `weights` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dslab_weights_q(weights: *const DslabWeights, k: usize, out: *mut f64) -> DslabStatus {
    guard(|| {
        let w = weights.as_ref().ok_or_else(|| null("weights"))?;
        let v = w.0.q_f64(k)?;
        *out.as_mut().ok_or_else(|| null("out"))? = v;
        Ok(())
    })
}

/// `Q_n = q_0 + … + q_{n-1}` as a double.
///
/// # Safety
/// `weights` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dslab_weights_mass(weights: *const DslabWeights, n: usize, out: *mut f64) -> DslabStatus {
    guard(|| {
        let w = weights.as_ref().ok_or_else(|| null("weights"))?;
        let v = w.0.big_q_f64(n)?;
        *out.as_mut().ok_or_else(|| null("out"))? = v;
        Ok(())
    })
}

/// `Q_n` as an exact rational string `"num/den"`.
///
/// # Safety
/// `weights` must be a live handle; `buf` writable for `len` bytes;
/// `needed` may be null.
#[no_mangle]
pub unsafe extern "C" fn dslab_weights_mass_exact(
    weights: *const DslabWeights,
    n: usize,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> DslabStatus {
    guard(|| {
        let w = weights.as_ref().ok_or_else(|| null("weights"))?;
        let v = w.0.big_q_rational(n)?;
        copy_out(&dslab_core::scalar::format_rational(&v), buf, len, needed)
    })
}

/// Values `±1` of the `n`-th system function at the `2^resolution` cells.
///
/// # Safety
/// `out` must be writable for `len` values.
#[no_mangle]
pub unsafe extern "C" fn dslab_system_values(
    system_code: u32,
    n: u64,
    resolution: u32,
    out: *mut i8,
    len: usize,
) -> DslabStatus {
    guard(|| {
        let values = system_values(system(system_code)?, n, resolution)?;
        fill(&values, out, len)
    })
}

/// Kernel values in floating point. `kind` is `dirichlet`, `fejer`,
/// `cesaro:α`, `norlund` (needs `weights`) or a mean name; `weights` may
/// be null otherwise.
///
/// # Safety
/// `kind` must be a NUL-terminated string, `weights` null or a live
/// handle, and `out` writable for `len` values.
#[no_mangle]
pub unsafe extern "C" fn dslab_kernel_values(
    kind: *const c_char,
    n: u64,
    system_code: u32,
    resolution: u32,
    weights: *const DslabWeights,
    out: *mut f64,
    len: usize,
) -> DslabStatus {
    guard(|| {
        let kind = text(kind, "kind")?;
        let q = weights.as_ref().map(|w| &w.0);
        let k = named_kernel::<f64>(kind, n, system(system_code)?, resolution, q)?;
        fill(k.values(), out, len)
    })
}

/// Runs a `dslab` subcommand, e.g. `{"blowup2", "--p", "2/5"}`.
///
/// # Safety
/// `argv` must hold `argc` NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dslab_run(argc: usize, argv: *const *const c_char, out: *mut *mut DslabReport) -> DslabStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if argc > 0 && argv.is_null() {
            return Err(null("argv"));
        }
        let args = (0..argc)
            .map(|i| text(*argv.add(i), "argument").map(str::to_string))
            .collect::<Result<Vec<_>, _>>()?;
        let report = report_from_args(args)?;
        *out = Box::into_raw(Box::new(DslabReport(report)));
        Ok(())
    })
}

/// Releases a report. Null is ignored.
///
/// # Safety
/// `report` must come from [`dslab_run`] and not be used again.
#[no_mangle]
pub unsafe extern "C" fn dslab_report_free(report: *mut DslabReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Writes one of the `DSLAB_VERDICT_*` codes.
///
/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dslab_report_verdict(report: *const DslabReport, out: *mut i32) -> DslabStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        let code = match r.0.verdict {
            Verdict::Pass => DSLAB_VERDICT_PASS,
            Verdict::Fail => DSLAB_VERDICT_FAIL,
            Verdict::Inconclusive => DSLAB_VERDICT_INCONCLUSIVE,
        };
        *out.as_mut().ok_or_else(|| null("out"))? = code;
        Ok(())
    })
}

/// The report's CSV table.
///
/// # Safety
/// `report` must be a live handle; `buf` writable for `len` bytes;
/// `needed` may be null.
#[no_mangle]
pub unsafe extern "C" fn dslab_report_csv(
    report: *const DslabReport,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> DslabStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        copy_out(&r.0.to_csv(), buf, len, needed)
    })
}

/// The report's JSON summary.
///
/// # Safety
/// As for [`dslab_report_csv`].
#[no_mangle]
pub unsafe extern "C" fn dslab_report_json(
    report: *const DslabReport,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> DslabStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        copy_out(&r.0.to_json(), buf, len, needed)
    })
}
