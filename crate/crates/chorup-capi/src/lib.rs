//! C bindings for the choreography workbench.
//!
//! The interface is handle-based: `chorup_program_parse` returns an opaque
//! program that later calls borrow, every returned string is owned by the
//! caller and released with `chorup_string_free`, and failures leave a
//! message retrievable via `chorup_last_error` on the calling thread. The
//! canonical prototypes live in `include/chorup.h`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

use chorup::ast::GlobalState;
use chorup::connect::connected;
use chorup::pretty::{pretty_dpoc, PrettyMode};
use chorup::project::project;
use chorup::{parse_dioc, DiocProgram, Role};

pub const CHORUP_OK: i32 = 0;
pub const CHORUP_ERR_UTF8: i32 = 1;
pub const CHORUP_ERR_PARSE: i32 = 2;
pub const CHORUP_ERR_CHECK: i32 = 3;
pub const CHORUP_ERR_ARG: i32 = 4;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " "))
        .unwrap_or_else(|_| CString::new("invalid error text").unwrap());
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// An owned, parsed choreography. Opaque to C callers.
pub struct ChorupProgram {
    program: DiocProgram,
}

unsafe fn str_arg<'a>(ptr: *const c_char) -> Result<&'a str, i32> {
    if ptr.is_null() {
        set_error("null pointer argument".into());
        return Err(CHORUP_ERR_ARG);
    }
    match unsafe { CStr::from_ptr(ptr) }.to_str() {
        Ok(s) => Ok(s),
        Err(_) => {
            set_error("argument is not valid UTF-8".into());
            Err(CHORUP_ERR_UTF8)
        }
    }
}

fn give_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " "))
        .map(CString::into_raw)
        .unwrap_or(ptr::null_mut())
}

/// Parse a choreography from UTF-8 source. On success stores a new handle in
/// `out` and returns `CHORUP_OK`; otherwise returns an error code and leaves
/// a message for `chorup_last_error`.
///
/// # Safety
/// `src` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn chorup_program_parse(
    src: *const c_char,
    out: *mut *mut ChorupProgram,
) -> i32 {
    clear_error();
    if out.is_null() {
        set_error("null output pointer".into());
        return CHORUP_ERR_ARG;
    }
    let text = match unsafe { str_arg(src) } {
        Ok(t) => t,
        Err(code) => return code,
    };
    match parse_dioc(text) {
        Ok(program) => {
            let handle = Box::new(ChorupProgram { program });
            unsafe { *out = Box::into_raw(handle) };
            CHORUP_OK
        }
        Err(e) => {
            set_error(e.to_string());
            CHORUP_ERR_PARSE
        }
    }
}

/// Release a program handle. Null is a no-op.
///
/// # Safety
/// `program` must be null or a handle from `chorup_program_parse` that has
/// not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn chorup_program_free(program: *mut ChorupProgram) {
    if !program.is_null() {
        drop(unsafe { Box::from_raw(program) });
    }
}

/// Check well-annotation and connectedness. Returns `CHORUP_OK` when both
/// hold, `CHORUP_ERR_CHECK` (with a message) otherwise.
///
/// # Safety
/// `program` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn chorup_check(program: *const ChorupProgram) -> i32 {
    clear_error();
    let Some(handle) = (unsafe { program.as_ref() }) else {
        set_error("null program handle".into());
        return CHORUP_ERR_ARG;
    };
    if let Err(errors) = chorup::well_annotated(&handle.program.proc) {
        let msgs: Vec<String> = errors.iter().map(|e| e.to_string()).collect();
        set_error(msgs.join("; "));
        return CHORUP_ERR_CHECK;
    }
    if let Err(e) = connected(&handle.program.proc) {
        set_error(e.to_string());
        return CHORUP_ERR_CHECK;
    }
    CHORUP_OK
}

/// The program's roles as a newline-separated string (sorted). Returns null
/// on error; free the result with `chorup_string_free`.
///
/// # Safety
/// `program` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn chorup_roles(program: *const ChorupProgram) -> *mut c_char {
    clear_error();
    let Some(handle) = (unsafe { program.as_ref() }) else {
        set_error("null program handle".into());
        return ptr::null_mut();
    };
    let roles = chorup::roles(&handle.program.proc);
    let names: Vec<&str> = roles.iter().map(|r| r.as_str()).collect();
    give_string(names.join("\n"))
}

/// Project the program onto one role and render the process. Returns null
/// on error; free the result with `chorup_string_free`.
///
/// # Safety
/// `program` must be a live handle and `role` a valid string.
#[no_mangle]
pub unsafe extern "C" fn chorup_project_role(
    program: *const ChorupProgram,
    role: *const c_char,
) -> *mut c_char {
    clear_error();
    let Some(handle) = (unsafe { program.as_ref() }) else {
        set_error("null program handle".into());
        return ptr::null_mut();
    };
    let role = match unsafe { str_arg(role) } {
        Ok(r) => r,
        Err(_) => return ptr::null_mut(),
    };
    let role = Role::new(role);
    if !chorup::roles(&handle.program.proc).contains(&role) {
        set_error(format!("role {role} does not occur in the program"));
        return ptr::null_mut();
    }
    let net = project(&handle.program.proc, &GlobalState::new(), &[]);
    match net.0.get(&role) {
        Some((proc, _)) => give_string(pretty_dpoc(proc, PrettyMode::Display)),
        None => {
            set_error(format!("projection has no entry for {role}"));
            ptr::null_mut()
        }
    }
}

/// The message of the most recent failure on this thread, or null. The
/// returned pointer stays valid until the next failing call on the thread;
/// do not free it.
#[no_mangle]
pub extern "C" fn chorup_last_error() -> *const c_char {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        Some(c) => c.as_ptr(),
        None => ptr::null(),
    })
}

/// Free a string returned by this library. Null is a no-op.
///
/// # Safety
/// `s` must be null or an unfreed string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn chorup_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

/// The library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn chorup_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CString;

    fn parse(src: &str) -> *mut ChorupProgram {
        let c = CString::new(src).unwrap();
        let mut out: *mut ChorupProgram = ptr::null_mut();
        let code = unsafe { chorup_program_parse(c.as_ptr(), &mut out) };
        assert_eq!(code, CHORUP_OK);
        out
    }

    fn take_string(p: *mut c_char) -> String {
        assert!(!p.is_null());
        let s = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string();
        unsafe { chorup_string_free(p) };
        s
    }

    #[test]
    fn parse_check_project_roundtrip() {
        let p = parse("o : A(5) -> B(x)");
        assert_eq!(unsafe { chorup_check(p) }, CHORUP_OK);
        let roles = take_string(unsafe { chorup_roles(p) });
        assert_eq!(roles, "A\nB");
        let text = take_string(unsafe { chorup_project_role(p, c"B".as_ptr()) });
        assert!(text.contains("from A"), "{text}");
        unsafe { chorup_program_free(p) };
    }

    #[test]
    fn parse_error_sets_message() {
        let c = CString::new("o : A(5 -> B(x)").unwrap();
        let mut out: *mut ChorupProgram = ptr::null_mut();
        let code = unsafe { chorup_program_parse(c.as_ptr(), &mut out) };
        assert_eq!(code, CHORUP_ERR_PARSE);
        assert!(out.is_null());
        let err = chorup_last_error();
        assert!(!err.is_null());
        let msg = unsafe { CStr::from_ptr(err) }.to_str().unwrap();
        assert!(!msg.is_empty());
    }

    #[test]
    fn disconnected_program_fails_check() {
        let p = parse("a : A(1) -> B(x); c : C(2) -> D(y)");
        assert_eq!(unsafe { chorup_check(p) }, CHORUP_ERR_CHECK);
        let err = chorup_last_error();
        let msg = unsafe { CStr::from_ptr(err) }.to_str().unwrap();
        assert!(msg.contains("share"), "{msg}");
        unsafe { chorup_program_free(p) };
    }

    #[test]
    fn unknown_role_is_an_error() {
        let p = parse("o : A(5) -> B(x)");
        let out = unsafe { chorup_project_role(p, c"Z".as_ptr()) };
        assert!(out.is_null());
        unsafe { chorup_program_free(p) };
    }

    #[test]
    fn version_is_a_c_string() {
        let v = unsafe { CStr::from_ptr(chorup_version()) };
        assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}
