//! C ABI over the `spin7` crate.
//!
//! Every fallible call returns a [`Spin7Status`] and writes its result through
//! an out-pointer. On failure the message is available from
//! [`spin7_last_error_message`] on the same thread. Strings returned by the
//! library are released with [`spin7_string_free`]; handles with their own
//! `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::OnceLock;

use spin7::forms::{cayley_form, hodge_star, inner, wedge, KForm};
use spin7::index::{example_vdim, index_su2, ExampleGluingData};
use spin7::lattice::{energy, gradient_descent, picard_iterate, GaugeField, Group, LatticeSpec};
use spin7::split::project7_formula;

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Spin7Status {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidUtf8 = 3,
    ComputationFailed = 4,
    Panic = 5,
}

/// Solver selector for [`spin7_field_solve`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Spin7Method {
    GradientDescent = 0,
    Picard = 1,
}

/// Opaque differential form.
pub struct Spin7Form {
    inner: KForm,
}

/// Opaque lattice gauge field.
pub struct Spin7Field {
    inner: GaugeField,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn guard(f: impl FnOnce() -> Result<(), (Spin7Status, String)>) -> Spin7Status {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => Spin7Status::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            Spin7Status::Panic
        }
    }
}

fn computation(e: spin7::Error) -> (Spin7Status, String) {
    let status = match e {
        spin7::Error::InvalidInput(_)
        | spin7::Error::InvalidLattice(_)
        | spin7::Error::GradeMismatch { .. }
        | spin7::Error::InconsistentCharacteristicNumbers(_) => Spin7Status::InvalidArgument,
        _ => Spin7Status::ComputationFailed,
    };
    (status, e.to_string())
}

fn null(what: &str) -> (Spin7Status, String) {
    (Spin7Status::NullPointer, format!("{what} is null"))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), (Spin7Status, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn to_c_string(s: String) -> Result<*mut c_char, (Spin7Status, String)> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| (Spin7Status::ComputationFailed, "string contains a nul byte".into()))
}

unsafe fn form_ref<'a>(f: *const Spin7Form, what: &str) -> Result<&'a KForm, (Spin7Status, String)> {
    f.as_ref().map(|f| &f.inner).ok_or_else(|| null(what))
}

unsafe fn field_ref<'a>(f: *const Spin7Field, what: &str) -> Result<&'a GaugeField, (Spin7Status, String)> {
    f.as_ref().map(|f| &f.inner).ok_or_else(|| null(what))
}

fn boxed_form(inner: KForm) -> *mut Spin7Form {
    Box::into_raw(Box::new(Spin7Form { inner }))
}

fn boxed_field(inner: GaugeField) -> *mut Spin7Field {
    Box::into_raw(Box::new(Spin7Field { inner }))
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn spin7_version() -> *const c_char {
    static VERSION: OnceLock<CString> = OnceLock::new();
    VERSION
        .get_or_init(|| CString::new(spin7::VERSION).expect("version has no nul byte"))
        .as_ptr()
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next library call on this thread; do not free.
#[no_mangle]
pub extern "C" fn spin7_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn spin7_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// The Cayley 4-form.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn spin7_form_cayley(out: *mut *mut Spin7Form) -> Spin7Status {
    guard(|| write_out(out, boxed_form(cayley_form()), "out"))
}

/// Parses a form from its JSON description `{"grade": k, "terms": [...]}`.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn spin7_form_from_json(json: *const c_char, out: *mut *mut Spin7Form) -> Spin7Status {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|_| (Spin7Status::InvalidUtf8, "json is not UTF-8".to_string()))?;
        let form: KForm = serde_json::from_str(text)
            .map_err(|e| (Spin7Status::InvalidArgument, format!("malformed form: {e}")))?;
        write_out(out, boxed_form(form), "out")
    })
}

/// JSON description of a form; free with [`spin7_string_free`].
///
/// # Safety
/// `form` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn spin7_form_to_json(form: *const Spin7Form, out: *mut *mut c_char) -> Spin7Status {
    guard(|| {
        let f = form_ref(form, "form")?;
        let s = serde_json::to_string(f).map_err(|e| (Spin7Status::ComputationFailed, e.to_string()))?;
        write_out(out, to_c_string(s)?, "out")
    })
}

/// # Safety
/// `form` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn spin7_form_grade(form: *const Spin7Form, out: *mut usize) -> Spin7Status {
    guard(|| write_out(out, form_ref(form, "form")?.grade(), "out"))
}

/// `√⟨a, a⟩` in the flat metric.
///
/// # Safety
/// `form` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn spin7_form_norm(form: *const Spin7Form, out: *mut f64) -> Spin7Status {
    guard(|| {
        let f = form_ref(form, "form")?;
        write_out(out, inner(f, f).map_err(computation)?.sqrt(), "out")
    })
}

/// # Safety
/// `a`, `b` must be live handles; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn spin7_form_wedge(
    a: *const Spin7Form,
    b: *const Spin7Form,
    out: *mut *mut Spin7Form,
) -> Spin7Status {
    guard(|| {
        let w = wedge(form_ref(a, "a")?, form_ref(b, "b")?).map_err(computation)?;
        write_out(out, boxed_form(w), "out")
    })
}

/// # Safety
/// `a` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn spin7_form_hodge_star(a: *const Spin7Form, out: *mut *mut Spin7Form) -> Spin7Status {
    guard(|| write_out(out, boxed_form(hodge_star(form_ref(a, "a")?)), "out"))
}

/// Norms of the Λ²₇ and Λ²₂₁ components of a 2-form.
///
/// # Safety
/// `a` must be a live handle; `p7_norm` and `p21_norm` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn spin7_form_split_norms(
    a: *const Spin7Form,
    p7_norm: *mut f64,
    p21_norm: *mut f64,
) -> Spin7Status {
    guard(|| {
        if p7_norm.is_null() || p21_norm.is_null() {
            return Err(null("output"));
        }
        let a = form_ref(a, "a")?;
        let p7 = project7_formula(a).map_err(computation)?;
        let p21 = a.sub(&p7).map_err(computation)?;
        p7_norm.write(inner(&p7, &p7).map_err(computation)?.sqrt());
        p21_norm.write(inner(&p21, &p21).map_err(computation)?.sqrt());
        Ok(())
    })
}

/// Releases a form handle. Null is ignored.
///
/// # Safety
/// `form` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn spin7_form_free(form: *mut Spin7Form) {
    if !form.is_null() {
        drop(Box::from_raw(form));
    }
}

/// SU(2) index from `⟨p₁c₂, [M]⟩` and `⟨c₂², [M]⟩`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn spin7_index_su2(p1_c2: i64, c2_sq: i64, out: *mut i64) -> Spin7Status {
    guard(|| {
        let v = index_su2(p1_c2, c2_sq).map_err(computation)?;
        let v = i64::try_from(v).map_err(|_| (Spin7Status::ComputationFailed, "index overflows i64".into()))?;
        write_out(out, v, "out")
    })
}

/// Virtual dimension of the glued example with twists `k`, `l`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn spin7_example_vdim(k: i64, l: i64, out: *mut i64) -> Spin7Status {
    guard(|| {
        let v = example_vdim(ExampleGluingData { k, l }).map_err(computation)?;
        let v = i64::try_from(v).map_err(|_| (Spin7Status::ComputationFailed, "dimension overflows i64".into()))?;
        write_out(out, v, "out")
    })
}

fn group_from_tag(tag: u8) -> Result<Group, (Spin7Status, String)> {
    Group::from_tag(tag).map_err(|e| (Spin7Status::InvalidArgument, e.to_string()))
}

/// Seeded random field on `(ℤ/n)⁸` with unit spacing; `group` is 0 for U(1), 1 for SU(2).
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn spin7_field_random(
    n: usize,
    group: u8,
    seed: u64,
    amp: f64,
    out: *mut *mut Spin7Field,
) -> Spin7Status {
    guard(|| {
        let spec = LatticeSpec::new(n, 1.0, group_from_tag(group)?).map_err(computation)?;
        if !(amp >= 0.0 && amp.is_finite()) {
            return Err((Spin7Status::InvalidArgument, format!("amplitude {amp} must be non-negative")));
        }
        write_out(out, boxed_field(GaugeField::random(spec, seed, amp)), "out")
    })
}

/// Number of `f64` entries in a field.
///
/// # Safety
/// `field` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn spin7_field_len(field: *const Spin7Field, out: *mut usize) -> Spin7Status {
    guard(|| write_out(out, field_ref(field, "field")?.data().len(), "out"))
}

/// Copies the field entries into `buf`, which holds `len` values.
///
/// # Safety
/// `field` must be a live handle; `buf` must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn spin7_field_copy_data(field: *const Spin7Field, buf: *mut f64, len: usize) -> Spin7Status {
    guard(|| {
        let data = field_ref(field, "field")?.data();
        if buf.is_null() {
            return Err(null("buf"));
        }
        if len != data.len() {
            return Err((
                Spin7Status::InvalidArgument,
                format!("buffer holds {len} values, field has {}", data.len()),
            ));
        }
        ptr::copy_nonoverlapping(data.as_ptr(), buf, len);
        Ok(())
    })
}

/// `Σ ‖π₇F‖²` of a field.
///
/// # Safety
/// `field` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn spin7_field_energy(field: *const Spin7Field, out: *mut f64) -> Spin7Status {
    guard(|| {
        let a = field_ref(field, "field")?;
        write_out(out, energy(a.spec(), a).map_err(computation)?, "out")
    })
}

/// Runs a solver from `start`. Writes the final field and the JSON report;
/// free the report with [`spin7_string_free`].
///
/// # Safety
/// `start` must be a live handle; `out_field` and `out_report` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn spin7_field_solve(
    start: *const Spin7Field,
    method: Spin7Method,
    max_steps: usize,
    tol: f64,
    out_field: *mut *mut Spin7Field,
    out_report: *mut *mut c_char,
) -> Spin7Status {
    guard(|| {
        if out_field.is_null() || out_report.is_null() {
            return Err(null("output"));
        }
        let a0 = field_ref(start, "start")?;
        let (a, report) = match method {
            Spin7Method::GradientDescent => gradient_descent(a0.spec(), a0, max_steps, tol),
            Spin7Method::Picard => picard_iterate(a0.spec(), a0, max_steps, tol),
        }
        .map_err(computation)?;
        let json = serde_json::to_string(&report).map_err(|e| (Spin7Status::ComputationFailed, e.to_string()))?;
        let json = to_c_string(json)?;
        out_field.write(boxed_field(a));
        out_report.write(json);
        Ok(())
    })
}

/// Releases a field handle. Null is ignored.
///
/// # Safety
/// `field` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn spin7_field_free(field: *mut Spin7Field) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}
