//! C ABI over `autonomy_lab`.
//!
//! Objects are opaque handles created by `al_*_new` style functions and
//! released with the matching `al_*_free`. Every fallible function returns an
//! [`AlStatus`]; on failure a description is kept per thread and can be read
//! with [`al_last_error_message`]. Panics never cross the boundary, they are
//! reported as [`AlStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use autonomy_lab::automata::{
    eca_evolve, from_standard_text, tm_run_bounded, EcaRow, EcaRule, RunOutcome, TuringMachine, Verdict,
};
use autonomy_lab::embedding::embedding_equivalence_check;
use autonomy_lab::experiments::{parse_config, run_experiment};
use autonomy_lab::info::{compress_bound, empirical_entropy};
use autonomy_lab::seeds::rng_for;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    Runtime = 3,
    BufferTooSmall = 4,
    Panic = 5,
}

/// An elementary cellular automaton row together with its rule.
pub struct AlEca {
    rule: EcaRule,
    row: EcaRow,
    t: u64,
}

/// A Turing machine with its input word.
pub struct AlMachine {
    tm: TuringMachine,
}

thread_local! {
    static LAST_ERROR: RefCell<Vec<u8>> = const { RefCell::new(Vec::new()) };
}

fn set_error(msg: &str) {
    LAST_ERROR.with(|e| {
        let mut e = e.borrow_mut();
        e.clear();
        e.extend(msg.bytes().filter(|&b| b != 0));
    });
}

struct Failure(AlStatus, String);

impl Failure {
    fn invalid(e: impl std::fmt::Display) -> Self {
        Failure(AlStatus::InvalidArgument, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> AlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            AlStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&format!("internal panic: {msg}"));
            AlStatus::Panic
        }
    }
}

fn non_null<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    // SAFETY: the caller passes either null or a pointer obtained from this
    // library (or to a live value of type T).
    unsafe { p.as_ref() }.ok_or_else(|| Failure(AlStatus::NullArgument, format!("`{name}` is null")))
}

fn non_null_mut<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    // SAFETY: as in `non_null`, and the caller guarantees exclusive access.
    unsafe { p.as_mut() }.ok_or_else(|| Failure(AlStatus::NullArgument, format!("`{name}` is null")))
}

fn c_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(AlStatus::NullArgument, format!("`{name}` is null")));
    }
    // SAFETY: non-null and NUL-terminated by contract.
    unsafe { CStr::from_ptr(p) }.to_str().map_err(|_| Failure::invalid(format!("`{name}` is not UTF-8")))
}

fn slice<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure(AlStatus::NullArgument, format!("`{name}` is null")));
    }
    // SAFETY: the caller guarantees `len` readable elements at `p`.
    Ok(unsafe { std::slice::from_raw_parts(p, len) })
}

fn put<T>(out: *mut T, value: T, name: &str) -> Result<(), Failure> {
    *non_null_mut(out, name)? = value;
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn al_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Bytes needed to hold the last error message, including the terminator.
#[no_mangle]
pub extern "C" fn al_last_error_length() -> usize {
    LAST_ERROR.with(|e| e.borrow().len() + 1)
}

/// Copies the calling thread's last error message into `buf` as a
/// NUL-terminated string. The message is empty after a successful call.
///
/// # Safety
/// `buf` must point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn al_last_error_message(buf: *mut c_char, len: usize) -> AlStatus {
    let msg = LAST_ERROR.with(|e| e.borrow().clone());
    if buf.is_null() {
        return AlStatus::NullArgument;
    }
    if len < msg.len() + 1 {
        return AlStatus::BufferTooSmall;
    }
    // SAFETY: `buf` holds at least msg.len() + 1 bytes.
    unsafe {
        std::ptr::copy_nonoverlapping(msg.as_ptr().cast(), buf, msg.len());
        *buf.add(msg.len()) = 0;
    }
    AlStatus::Ok
}

/// New automaton with a seeded uniform random row.
///
/// # Safety
/// `out` must be a valid pointer to write the handle to.
#[no_mangle]
pub unsafe extern "C" fn al_eca_new(rule: u32, width: usize, seed: u64, out: *mut *mut AlEca) -> AlStatus {
    guard(|| {
        let rule = EcaRule::new(rule).map_err(Failure::invalid)?;
        let row = EcaRow::random(width, &mut rng_for(seed, &[])).map_err(Failure::invalid)?;
        put(out, Box::into_raw(Box::new(AlEca { rule, row, t: 0 })), "out")
    })
}

/// New automaton from explicit cells, one byte per cell (non-zero is live).
///
/// # Safety
/// `cells` must point to `width` readable bytes and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn al_eca_from_cells(
    rule: u32,
    cells: *const u8,
    width: usize,
    out: *mut *mut AlEca,
) -> AlStatus {
    guard(|| {
        let rule = EcaRule::new(rule).map_err(Failure::invalid)?;
        let bits: Vec<bool> = slice(cells, width, "cells")?.iter().map(|&c| c != 0).collect();
        let row = EcaRow::from_bits(&bits).map_err(Failure::invalid)?;
        put(out, Box::into_raw(Box::new(AlEca { rule, row, t: 0 })), "out")
    })
}

/// Advances the automaton by `steps` synchronous updates.
///
/// # Safety
/// `eca` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn al_eca_step(eca: *mut AlEca, steps: u64) -> AlStatus {
    guard(|| {
        let h = non_null_mut(eca, "eca")?;
        h.row = eca_evolve(&h.row, &h.rule, steps);
        h.t = h.t.saturating_add(steps);
        Ok(())
    })
}

/// Row width and elapsed steps.
///
/// # Safety
/// `eca` must be a live handle; outputs may be null when not wanted.
#[no_mangle]
pub unsafe extern "C" fn al_eca_info(eca: *const AlEca, width: *mut usize, t: *mut u64) -> AlStatus {
    guard(|| {
        let h = non_null(eca, "eca")?;
        if !width.is_null() {
            put(width, h.row.width(), "width")?;
        }
        if !t.is_null() {
            put(t, h.t, "t")?;
        }
        Ok(())
    })
}

/// Writes the cells as 0/1 bytes. `len` must be at least the width.
///
/// # Safety
/// `eca` must be a live handle and `buf` must point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn al_eca_cells(eca: *const AlEca, buf: *mut u8, len: usize) -> AlStatus {
    guard(|| {
        let h = non_null(eca, "eca")?;
        let w = h.row.width();
        if len < w {
            return Err(Failure(AlStatus::BufferTooSmall, format!("need {w} bytes, got {len}")));
        }
        if buf.is_null() {
            return Err(Failure(AlStatus::NullArgument, "`buf` is null".into()));
        }
        // SAFETY: `buf` holds at least `w` bytes.
        let out = unsafe { std::slice::from_raw_parts_mut(buf, w) };
        for (o, b) in out.iter_mut().zip(h.row.bits()) {
            *o = u8::from(b);
        }
        Ok(())
    })
}

/// Releases an automaton. Null is ignored.
///
/// # Safety
/// `eca` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn al_eca_free(eca: *mut AlEca) {
    if !eca.is_null() {
        // SAFETY: created by Box::into_raw in this library.
        drop(unsafe { Box::from_raw(eca) });
    }
}

/// Parses a machine in the compact `1RB1LB_1LA1RZ` notation (blank tape).
///
/// # Safety
/// `text` must be NUL-terminated and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn al_tm_from_text(text: *const c_char, out: *mut *mut AlMachine) -> AlStatus {
    guard(|| {
        let tm = from_standard_text(c_str(text, "text")?).map_err(Failure::invalid)?;
        put(out, Box::into_raw(Box::new(AlMachine { tm })), "out")
    })
}

/// Runs at most `budget` steps on the blank tape. `halted` tells whether the
/// machine stopped; `steps` and `accepted` are only meaningful if it did.
///
/// # Safety
/// `machine` must be a live handle and the outputs valid.
#[no_mangle]
pub unsafe extern "C" fn al_tm_run(
    machine: *const AlMachine,
    budget: u64,
    halted: *mut bool,
    steps: *mut u64,
    accepted: *mut bool,
) -> AlStatus {
    guard(|| {
        let m = non_null(machine, "machine")?;
        let (h, s, a) = match tm_run_bounded(&m.tm, &[], budget).map_err(Failure::invalid)? {
            RunOutcome::Halted { at_step, verdict } => (true, at_step, verdict == Verdict::Accept),
            RunOutcome::OutOfBudget { .. } => (false, budget, false),
        };
        put(halted, h, "halted")?;
        put(steps, s, "steps")?;
        put(accepted, a, "accepted")
    })
}

/// Runs the machine as an agent on a tape environment in lockstep with
/// direct simulation for up to `budget` steps.
///
/// # Safety
/// `machine` must be a live handle and the outputs valid.
#[no_mangle]
pub unsafe extern "C" fn al_tm_embedding_check(
    machine: *const AlMachine,
    budget: u64,
    passed: *mut bool,
    steps_checked: *mut u64,
) -> AlStatus {
    guard(|| {
        let m = non_null(machine, "machine")?;
        let report = embedding_equivalence_check(&m.tm, &[], budget).map_err(Failure::invalid)?;
        put(passed, report.passed, "passed")?;
        put(steps_checked, report.steps_checked, "steps_checked")
    })
}

/// Releases a machine. Null is ignored.
///
/// # Safety
/// `machine` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn al_tm_free(machine: *mut AlMachine) {
    if !machine.is_null() {
        // SAFETY: created by Box::into_raw in this library.
        drop(unsafe { Box::from_raw(machine) });
    }
}

/// Compressed length in bits of `len` bytes under the built-in coder.
///
/// # Safety
/// `data` must point to `len` readable bytes (may be null when `len` is 0).
#[no_mangle]
pub unsafe extern "C" fn al_compress_bound(data: *const u8, len: usize, bits: *mut u64) -> AlStatus {
    guard(|| put(bits, compress_bound(slice(data, len, "data")?), "bits"))
}

/// Plug-in Shannon entropy in bits of a symbol sequence.
///
/// # Safety
/// `symbols` must point to `len` readable values.
#[no_mangle]
pub unsafe extern "C" fn al_entropy_u32(symbols: *const u32, len: usize, bits: *mut f64) -> AlStatus {
    guard(|| {
        let h = empirical_entropy(slice(symbols, len, "symbols")?).map_err(Failure::invalid)?;
        put(bits, h, "bits")
    })
}

/// Runs the experiment described by a config file into `out_dir`. Config
/// problems give `InvalidArgument`, failures during the run `Runtime`.
///
/// # Safety
/// Both paths must be NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn al_run_experiment(config_path: *const c_char, out_dir: *const c_char, seed: u64) -> AlStatus {
    guard(|| {
        let config = parse_config(Path::new(c_str(config_path, "config_path")?)).map_err(Failure::invalid)?;
        run_experiment(&config, Path::new(c_str(out_dir, "out_dir")?), seed)
            .map_err(|e| Failure(AlStatus::Runtime, e.to_string()))?;
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn last_error() -> String {
        let mut buf = vec![0 as c_char; al_last_error_length()];
        assert_eq!(unsafe { al_last_error_message(buf.as_mut_ptr(), buf.len()) }, AlStatus::Ok);
        unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
    }

    #[test]
    fn errors_are_reported_per_call() {
        let mut h: *mut AlEca = std::ptr::null_mut();
        assert_eq!(unsafe { al_eca_new(300, 16, 1, &mut h) }, AlStatus::InvalidArgument);
        assert!(h.is_null());
        assert!(last_error().contains("300"));
        assert_eq!(unsafe { al_eca_new(30, 16, 1, &mut h) }, AlStatus::Ok);
        assert_eq!(last_error(), "");
        unsafe { al_eca_free(h) };
    }

    #[test]
    fn small_error_buffer() {
        unsafe { al_eca_step(std::ptr::null_mut(), 1) };
        let mut buf = [0 as c_char; 2];
        assert_eq!(unsafe { al_last_error_message(buf.as_mut_ptr(), buf.len()) }, AlStatus::BufferTooSmall);
    }

    #[test]
    fn version_matches() {
        let v = unsafe { CStr::from_ptr(al_version()) };
        assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}
