//! C ABI over the `subdyn` library.
//!
//! Substitutions live behind an opaque handle. Every fallible call returns a
//! [`SubdynStatus`]; on failure a message is available from
//! [`subdyn_last_error_message`] on the same thread. Strings handed out by the
//! library are NUL-terminated UTF-8 and must be released with
//! [`subdyn_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use subdyn::cli::{classification_json, coincidence_json, parse_substitution_spec};
use subdyn::coincidence::find_strong_coincidence;
use subdyn::numeration::{decode_path, encode_u64, PathRepresentation, PrefixGraph};
use subdyn::spectral::classify;
use subdyn::word::{FixedPointStream, Substitution};

/// Opaque handle to a parsed substitution.
pub struct SubdynSubstitution {
    inner: Substitution,
    graph: PrefixGraph,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SubdynStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidInput = 3,
    Overflow = 4,
    Panic = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

/// Runs `f`, converting errors and panics into status codes.
fn guard<F: FnOnce() -> Result<(), (SubdynStatus, String)>>(f: F) -> SubdynStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SubdynStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SubdynStatus::Panic
        }
    }
}

type Failure = (SubdynStatus, String);

fn input(e: impl ToString) -> Failure {
    (SubdynStatus::InvalidInput, e.to_string())
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err((SubdynStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (SubdynStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn handle<'a>(p: *const SubdynSubstitution) -> Result<&'a SubdynSubstitution, Failure> {
    p.as_ref().ok_or((SubdynStatus::NullPointer, "substitution handle is null".into()))
}

unsafe fn emit(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    if out.is_null() {
        return Err((SubdynStatus::NullPointer, "output pointer is null".into()));
    }
    let c = CString::new(s).map_err(|_| input("output contains NUL"))?;
    *out = c.into_raw();
    Ok(())
}

fn char_of(code: u32) -> Result<char, Failure> {
    char::from_u32(code).ok_or_else(|| input(format!("{code:#x} is not a Unicode scalar value")))
}

/// Parses a substitution in the `letter -> word` text format.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn subdyn_substitution_parse(text: *const c_char, out: *mut *mut SubdynSubstitution) -> SubdynStatus {
    guard(|| {
        let text = read_str(text, "text")?;
        if out.is_null() {
            return Err((SubdynStatus::NullPointer, "output pointer is null".into()));
        }
        let spec = parse_substitution_spec(text).map_err(input)?;
        let graph = PrefixGraph::new(&spec.substitution);
        *out = Box::into_raw(Box::new(SubdynSubstitution { inner: spec.substitution, graph }));
        Ok(())
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `sub` must come from [`subdyn_substitution_parse`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn subdyn_substitution_free(sub: *mut SubdynSubstitution) {
    if !sub.is_null() {
        drop(Box::from_raw(sub));
    }
}

/// Alphabet size, or 0 for a null handle.
///
/// # Safety
/// `sub` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn subdyn_substitution_size(sub: *const SubdynSubstitution) -> usize {
    sub.as_ref().map_or(0, |s| s.inner.size())
}

/// Spectral classification as a JSON document.
///
/// # Safety
/// `sub` must be a live handle and `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn subdyn_classify_json(
    sub: *const SubdynSubstitution,
    tolerance: f64,
    out_json: *mut *mut c_char,
) -> SubdynStatus {
    guard(|| {
        let s = handle(sub)?;
        if !(tolerance > 0.0) {
            return Err(input("tolerance must be positive"));
        }
        let r = classify(&s.inner, tolerance).map_err(input)?;
        emit(out_json, classification_json(&r).to_string())
    })
}

/// Length-`length` prefix of the fixed point (of least period) at `seed`.
///
/// # Safety
/// `sub` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn subdyn_expand(
    sub: *const SubdynSubstitution,
    seed: u32,
    length: usize,
    out: *mut *mut c_char,
) -> SubdynStatus {
    guard(|| {
        let s = handle(sub)?;
        let seed = s.inner.alphabet().index_of(char_of(seed)?).map_err(input)?;
        let mut x = FixedPointStream::from_seed(&s.inner, seed).map_err(input)?;
        let w = s.inner.alphabet().render(x.expand(length));
        emit(out, w)
    })
}

/// Path representing `value` from vertex `start`, in the text form `a: a.e.a`.
///
/// # Safety
/// `sub` must be a live handle and `out_path` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn subdyn_encode(
    sub: *const SubdynSubstitution,
    start: u32,
    value: u64,
    out_path: *mut *mut c_char,
) -> SubdynStatus {
    guard(|| {
        let s = handle(sub)?;
        let start = s.inner.alphabet().index_of(char_of(start)?).map_err(input)?;
        let p = encode_u64(&s.graph, start, value).map_err(input)?;
        emit(out_path, p.render(s.inner.alphabet()))
    })
}

/// Value of a path given in text form. Writes the value to `out_value`
/// when it fits in 64 bits, and its decimal form to `out_decimal` if that
/// pointer is not null.
///
/// # Safety
/// `sub` must be a live handle, `path` a NUL-terminated string, `out_value`
/// valid, and `out_decimal` null or valid.
#[no_mangle]
pub unsafe extern "C" fn subdyn_decode(
    sub: *const SubdynSubstitution,
    path: *const c_char,
    out_value: *mut u64,
    out_decimal: *mut *mut c_char,
) -> SubdynStatus {
    guard(|| {
        let s = handle(sub)?;
        let text = read_str(path, "path")?;
        if out_value.is_null() {
            return Err((SubdynStatus::NullPointer, "output pointer is null".into()));
        }
        let p = PathRepresentation::parse(text, s.inner.alphabet()).map_err(input)?;
        let d = decode_path(&s.graph, &p, None).map_err(input)?;
        let decimal = d.value.to_string();
        if !out_decimal.is_null() {
            emit(out_decimal, decimal.clone())?;
        }
        *out_value = decimal
            .parse::<u64>()
            .map_err(|_| (SubdynStatus::Overflow, format!("value {decimal} does not fit in 64 bits")))?;
        Ok(())
    })
}

/// Strong coincidence search between the period-1 fixed points at `a` and
/// `b`, as a JSON document.
///
/// # Safety
/// `sub` must be a live handle and `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn subdyn_coincide_json(
    sub: *const SubdynSubstitution,
    a: u32,
    b: u32,
    horizon: usize,
    out_json: *mut *mut c_char,
) -> SubdynStatus {
    guard(|| {
        let s = handle(sub)?;
        let alpha = s.inner.alphabet();
        let la = alpha.index_of(char_of(a)?).map_err(input)?;
        let lb = alpha.index_of(char_of(b)?).map_err(input)?;
        let mut x = FixedPointStream::new(&s.inner, la, 1).map_err(input)?;
        let mut y = FixedPointStream::new(&s.inner, lb, 1).map_err(input)?;
        let v = find_strong_coincidence(&mut x, &mut y, horizon).map_err(input)?;
        emit(out_json, coincidence_json(alpha, la, lb, &v).to_string())
    })
}

/// Releases a string returned by this library; null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn subdyn_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failure on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn subdyn_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}
