//! C ABI over the staging pipeline.
//!
//! Every entry point takes UTF-8 source text, runs the front end plus
//! whatever the call asks for, and hands back an opaque result handle.
//! The handle owns two NUL-terminated strings: the output text and a
//! diagnostic. Calls never unwind across the boundary and never touch
//! the caller's stack budget; the work runs on a dedicated thread.
//!
//! Status codes: `StagecStatus::Ok` means `stagec_result_output` holds
//! the answer; `Rejected` means the program was refused and
//! `stagec_result_error` says why; `Usage` covers null or non-UTF-8
//! arguments and unknown declaration names; `Panic` reports an internal
//! crash that was contained.

use stagec::elab;
use stagec::fuel::Fuel;
use stagec::lex;
use stagec::nbe;
use stagec::obj;
use stagec::parse;
use stagec::pretty;
use stagec::span::{render, Span};
use stagec::stage;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Outcome of an FFI call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum StagecStatus {
    /// The call succeeded; the result holds output text.
    Ok = 0,
    /// The input program was rejected; the result holds a diagnostic.
    Rejected = 1,
    /// Null pointer, malformed UTF-8, or an unknown declaration name.
    Usage = 2,
    /// An internal panic was caught; the result holds its message.
    Panic = 3,
}

/// Opaque result handle owning the output and diagnostic strings.
pub struct StagecResult {
    output: CString,
    error: CString,
}

impl StagecResult {
    fn ok(text: String) -> (StagecStatus, StagecResult) {
        (
            StagecStatus::Ok,
            StagecResult {
                output: lossy_cstring(text),
                error: CString::default(),
            },
        )
    }

    fn err(status: StagecStatus, msg: String) -> (StagecStatus, StagecResult) {
        (
            status,
            StagecResult {
                output: CString::default(),
                error: lossy_cstring(msg),
            },
        )
    }
}

/// Interior NULs cannot reach C; replace them rather than fail the call.
fn lossy_cstring(s: String) -> CString {
    CString::new(s.replace('\0', "\u{fffd}")).expect("NUL-free by construction")
}

fn fuel_of(steps: u64) -> Fuel {
    if steps == 0 {
        Fuel::unlimited()
    } else {
        Fuel::limited(steps)
    }
}

/// Reads a required C string argument.
///
/// # Safety
/// `p` must be null or point to a NUL-terminated string.
unsafe fn arg(p: *const c_char) -> Result<String, String> {
    if p.is_null() {
        return Err("null pointer argument".to_string());
    }
    CStr::from_ptr(p)
        .to_str()
        .map(|s| s.to_string())
        .map_err(|_| "argument is not valid UTF-8".to_string())
}

/// Front end over a source string, with `<input>`-relative diagnostics.
fn front(fuel: &Fuel, src: &str) -> Result<stagec::core::Program, String> {
    let diag = |span: Span, msg: &str| render("<input>", src, span, msg);
    let toks = lex::tokenize(src).map_err(|e| diag(e.span, &e.msg))?;
    let decls = parse::parse_program(toks, src.len()).map_err(|e| diag(e.span, &e.msg))?;
    elab::elab_program(fuel, &decls).map_err(|e| diag(e.span, &e.kind.to_string()))
}

/// Runs `job` on its own wide-stack thread and contains panics.
fn contained(job: impl FnOnce() -> (StagecStatus, StagecResult) + Send) -> (StagecStatus, StagecResult) {
    let run = || {
        catch_unwind(AssertUnwindSafe(job)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "internal panic".to_string());
            StagecResult::err(StagecStatus::Panic, msg)
        })
    };
    std::thread::scope(|scope| {
        std::thread::Builder::new()
            .name("stagec-ffi".to_string())
            .stack_size(64 * 1024 * 1024)
            .spawn_scoped(scope, run)
            .map(|h| {
                h.join().unwrap_or_else(|_| {
                    StagecResult::err(StagecStatus::Panic, "worker thread died".to_string())
                })
            })
            .unwrap_or_else(|e| {
                StagecResult::err(StagecStatus::Panic, format!("cannot spawn worker: {e}"))
            })
    })
}

fn deliver(out: *mut *mut StagecResult, pair: (StagecStatus, StagecResult)) -> StagecStatus {
    let (status, result) = pair;
    // A null out pointer still yields the status; the text is dropped.
    if !out.is_null() {
        unsafe { *out = Box::into_raw(Box::new(result)) };
    }
    status
}

/// Type checks `source`. On success the output is a one-line summary.
///
/// # Safety
/// `source` must be null or NUL-terminated; `out`, when non-null, must
/// point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn stagec_check(
    source: *const c_char,
    fuel_steps: u64,
    out: *mut *mut StagecResult,
) -> StagecStatus {
    let src = match arg(source) {
        Ok(s) => s,
        Err(e) => return deliver(out, StagecResult::err(StagecStatus::Usage, e)),
    };
    deliver(
        out,
        contained(move || {
            let fuel = fuel_of(fuel_steps);
            match front(&fuel, &src) {
                Ok(prog) => {
                    StagecResult::ok(format!("checked {} declarations", prog.decls.len()))
                }
                Err(e) => StagecResult::err(StagecStatus::Rejected, e),
            }
        }),
    )
}

/// Runs all stage-1 computation in `source` and returns the residual
/// object program, or just `main_decl`'s staged body when that is
/// non-null. With `verify`, the output is re-checked by the standalone
/// object checker first.
///
/// # Safety
/// As for [`stagec_check`]; `main_decl` may be null.
#[no_mangle]
pub unsafe extern "C" fn stagec_stage(
    source: *const c_char,
    main_decl: *const c_char,
    verify: bool,
    fuel_steps: u64,
    out: *mut *mut StagecResult,
) -> StagecStatus {
    let src = match arg(source) {
        Ok(s) => s,
        Err(e) => return deliver(out, StagecResult::err(StagecStatus::Usage, e)),
    };
    let main = if main_decl.is_null() {
        None
    } else {
        match arg(main_decl) {
            Ok(s) => Some(s),
            Err(e) => return deliver(out, StagecResult::err(StagecStatus::Usage, e)),
        }
    };
    deliver(
        out,
        contained(move || {
            let fuel = fuel_of(fuel_steps);
            let prog = match front(&fuel, &src) {
                Ok(p) => p,
                Err(e) => return StagecResult::err(StagecStatus::Rejected, e),
            };
            let (obj_prog, _) = match stage::stage_program(&fuel, &prog) {
                Ok(r) => r,
                Err(e) => return StagecResult::err(StagecStatus::Rejected, e.to_string()),
            };
            if verify {
                if let Err(e) = obj::check_program(&fuel, &obj_prog) {
                    return StagecResult::err(
                        StagecStatus::Rejected,
                        format!("verification failed: {e}"),
                    );
                }
            }
            match main {
                None => StagecResult::ok(obj::obj_program_to_string(&obj_prog)),
                Some(name) => {
                    let Some((idx, d)) = obj_prog.decl(&name) else {
                        return StagecResult::err(
                            StagecStatus::Usage,
                            format!("no staged declaration `{name}`"),
                        );
                    };
                    let Some(body) = d.body.as_ref() else {
                        return StagecResult::err(
                            StagecStatus::Usage,
                            format!("`{name}` is an assumption"),
                        );
                    };
                    let names: Vec<stagec::core::Name> =
                        obj_prog.decls[..idx].iter().map(|d| d.name.clone()).collect();
                    StagecResult::ok(obj::obj_to_string(&names, body))
                }
            }
        }),
    )
}

/// Prints the normal form of `decl`'s body.
///
/// # Safety
/// As for [`stagec_check`]; `decl` must be non-null.
#[no_mangle]
pub unsafe extern "C" fn stagec_nf(
    source: *const c_char,
    decl: *const c_char,
    fuel_steps: u64,
    out: *mut *mut StagecResult,
) -> StagecStatus {
    let (src, name) = match (arg(source), arg(decl)) {
        (Ok(s), Ok(d)) => (s, d),
        (Err(e), _) | (_, Err(e)) => {
            return deliver(out, StagecResult::err(StagecStatus::Usage, e))
        }
    };
    deliver(
        out,
        contained(move || {
            let fuel = fuel_of(fuel_steps);
            let prog = match front(&fuel, &src) {
                Ok(p) => p,
                Err(e) => return StagecResult::err(StagecStatus::Rejected, e),
            };
            let Some((idx, d)) = prog.decl(&name) else {
                return StagecResult::err(
                    StagecStatus::Usage,
                    format!("no declaration `{name}`"),
                );
            };
            let Some(body) = d.body.as_ref() else {
                return StagecResult::err(
                    StagecStatus::Usage,
                    format!("`{name}` is an assumption"),
                );
            };
            let run = || -> Result<String, nbe::NbeError> {
                let mut env = nbe::program_env(&fuel, &prog)?;
                env.truncate(idx);
                let term = nbe::nf(&fuel, &env, idx, body)?;
                let names: Vec<stagec::core::Name> =
                    prog.decls[..idx].iter().map(|d| d.name.clone()).collect();
                Ok(pretty::term_to_string(&names, &term))
            };
            match run() {
                Ok(text) => StagecResult::ok(text),
                Err(e) => StagecResult::err(StagecStatus::Rejected, e.to_string()),
            }
        }),
    )
}

/// The output text of a result, NUL-terminated, owned by the handle.
/// Null handles yield an empty string.
///
/// # Safety
/// `r` must be null or a handle from this library that has not been
/// freed.
#[no_mangle]
pub unsafe extern "C" fn stagec_result_output(r: *const StagecResult) -> *const c_char {
    static EMPTY: &[u8] = b"\0";
    match r.as_ref() {
        Some(res) => res.output.as_ptr(),
        None => EMPTY.as_ptr().cast(),
    }
}

/// The diagnostic text of a result; empty when the call succeeded.
///
/// # Safety
/// As for [`stagec_result_output`].
#[no_mangle]
pub unsafe extern "C" fn stagec_result_error(r: *const StagecResult) -> *const c_char {
    static EMPTY: &[u8] = b"\0";
    match r.as_ref() {
        Some(res) => res.error.as_ptr(),
        None => EMPTY.as_ptr().cast(),
    }
}

/// Frees a result handle. Null is a no-op; freeing twice is undefined.
///
/// # Safety
/// `r` must be null or a handle from this library that has not been
/// freed.
#[no_mangle]
pub unsafe extern "C" fn stagec_result_free(r: *mut StagecResult) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// The library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn stagec_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
