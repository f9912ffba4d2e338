//! C ABI over the hyperlab verifier.
//!
//! Every function returns an [`HlStatus`]; on failure the message is
//! available from [`hl_last_error_message`] on the same thread. Handles are
//! opaque and must be released with their `_free` function. Strings handed
//! out by the library are released with [`hl_string_free`].

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hyperlab::catalog::ModelSpec;
use hyperlab::cli::{parse_checks, PartialTolerances};
use hyperlab::hypersurface::ChartMap;
use hyperlab::theorem_lab::scan_products;
use hyperlab::verifier::{run_suite, Status, SuiteConfig, VerificationReport};
use hyperlab::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    InvalidSpec = 4,
    Numeric = 5,
    Unsupported = 6,
    Panic = 7,
}

/// A model instantiated from its spec.
pub struct HlModel {
    spec: ModelSpec,
    chart: ChartMap,
}

/// A finished verification report.
pub struct HlReport {
    report: VerificationReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: HlStatus, msg: impl Into<String>) -> HlStatus {
    set_error(msg);
    status
}

fn from_error(e: Error) -> HlStatus {
    let status = match e {
        Error::Argument(_) | Error::Config(_) => HlStatus::InvalidArgument,
        Error::Spec(_) => HlStatus::InvalidSpec,
        Error::Unsupported(_) => HlStatus::Unsupported,
        Error::Singularity(_) | Error::Immersion { .. } | Error::Precondition { .. } => HlStatus::Numeric,
    };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> HlStatus) -> HlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(HlStatus::Panic, "internal panic"),
    }
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, HlStatus> {
    if p.is_null() {
        return Err(fail(HlStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(HlStatus::InvalidUtf8, "string argument is not UTF-8"))
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> HlStatus {
    match CString::new(s) {
        Ok(c) => {
            *out = c.into_raw();
            HlStatus::Ok
        }
        Err(_) => fail(HlStatus::InvalidArgument, "output contains a NUL byte"),
    }
}

fn make_model(spec: ModelSpec) -> Result<Box<HlModel>, HlStatus> {
    spec.validate().map_err(from_error)?;
    let chart = spec.instantiate().map_err(from_error)?;
    Ok(Box::new(HlModel { spec, chart }))
}

/// Message of the last failure on this thread, or null. Valid until the
/// next call into the library from this thread.
#[no_mangle]
pub extern "C" fn hl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn hl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a catalog model by name. `params_json` may be null or a JSON
/// object of numeric overrides such as `{"r": 0.8, "c": 1}`.
///
/// # Safety
/// `name` must be a NUL-terminated string, `params_json` null or
/// NUL-terminated, and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hl_model_from_name(
    name: *const c_char,
    params_json: *const c_char,
    out: *mut *mut HlModel,
) -> HlStatus {
    guard(|| {
        if out.is_null() {
            return fail(HlStatus::NullPointer, "null output pointer");
        }
        let name = match read_str(name) {
            Ok(s) => s,
            Err(s) => return s,
        };
        let params: BTreeMap<String, f64> = if params_json.is_null() {
            BTreeMap::new()
        } else {
            let text = match read_str(params_json) {
                Ok(s) => s,
                Err(s) => return s,
            };
            match serde_json::from_str(text) {
                Ok(p) => p,
                Err(e) => return fail(HlStatus::InvalidArgument, format!("params: {e}")),
            }
        };
        let spec = match ModelSpec::from_name(name, &params) {
            Ok(s) => s,
            Err(e) => return from_error(e),
        };
        match make_model(spec) {
            Ok(m) => {
                *out = Box::into_raw(m);
                HlStatus::Ok
            }
            Err(s) => s,
        }
    })
}

/// Builds a model from a JSON record with a `kind` field.
///
/// # Safety
/// `spec_json` must be NUL-terminated and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hl_model_from_json(spec_json: *const c_char, out: *mut *mut HlModel) -> HlStatus {
    guard(|| {
        if out.is_null() {
            return fail(HlStatus::NullPointer, "null output pointer");
        }
        let text = match read_str(spec_json) {
            Ok(s) => s,
            Err(s) => return s,
        };
        let spec: ModelSpec = match serde_json::from_str(text) {
            Ok(s) => s,
            Err(e) => return fail(HlStatus::InvalidSpec, format!("model record: {e}")),
        };
        match make_model(spec) {
            Ok(m) => {
                *out = Box::into_raw(m);
                HlStatus::Ok
            }
            Err(s) => s,
        }
    })
}

/// Hypersurface dimension of a model, or 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hl_model_dim(model: *const HlModel) -> usize {
    model.as_ref().map_or(0, |m| m.spec.dim())
}

/// Writes the model id (e.g. `torus(R=2,r=1)`) to `out`.
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hl_model_id(model: *const HlModel, out: *mut *mut c_char) -> HlStatus {
    guard(|| match (model.as_ref(), out.is_null()) {
        (Some(m), false) => write_string(out, m.spec.id()),
        _ => fail(HlStatus::NullPointer, "null model or output pointer"),
    })
}

/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hl_model_free(model: *mut HlModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Runs the verification suite on `grid_len` per-axis resolutions (one
/// value broadcasts). `config_json` may be null or an object with optional
/// `jet_order`, `checks` (array of names) and `tolerances`.
///
/// # Safety
/// `model` must be a live handle, `grid` must point to `grid_len` values,
/// `config_json` null or NUL-terminated, and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hl_verify(
    model: *const HlModel,
    grid: *const usize,
    grid_len: usize,
    config_json: *const c_char,
    out: *mut *mut HlReport,
) -> HlStatus {
    guard(|| {
        let Some(model) = model.as_ref() else {
            return fail(HlStatus::NullPointer, "null model");
        };
        if out.is_null() || grid.is_null() {
            return fail(HlStatus::NullPointer, "null grid or output pointer");
        }
        if grid_len == 0 {
            return fail(HlStatus::InvalidArgument, "empty grid");
        }
        let grid = std::slice::from_raw_parts(grid, grid_len).to_vec();
        if let Err(e) = hyperlab::quadrature::expand_resolution(&grid, model.spec.dim()) {
            return from_error(e);
        }
        let mut config = SuiteConfig::default();
        if !config_json.is_null() {
            let text = match read_str(config_json) {
                Ok(s) => s,
                Err(s) => return s,
            };
            if let Err(s) = apply_config(&mut config, text) {
                return s;
            }
        }
        let report = run_suite(&model.chart, &model.spec.id(), &grid, &config);
        *out = Box::into_raw(Box::new(HlReport { report }));
        HlStatus::Ok
    })
}

fn apply_config(config: &mut SuiteConfig, text: &str) -> Result<(), HlStatus> {
    let bad = |m: String| fail(HlStatus::InvalidArgument, m);
    let v: serde_json::Value = serde_json::from_str(text).map_err(|e| bad(format!("config: {e}")))?;
    let obj = v.as_object().ok_or_else(|| bad("config must be a JSON object".into()))?;
    for (k, v) in obj {
        match k.as_str() {
            "jet_order" => {
                let n = v.as_u64().ok_or_else(|| bad("jet_order must be an integer".into()))? as usize;
                if !(3..=4).contains(&n) {
                    return Err(bad(format!("jet order must be 3 or 4, got {n}")));
                }
                config.jet_order = n;
            }
            "checks" => {
                let names: Vec<String> =
                    serde_json::from_value(v.clone()).map_err(|e| bad(format!("checks: {e}")))?;
                config.checks = parse_checks(&names).map_err(from_error)?;
            }
            "tolerances" => {
                let t: PartialTolerances =
                    serde_json::from_value(v.clone()).map_err(|e| bad(format!("tolerances: {e}")))?;
                let d = &mut config.tolerances;
                d.pointwise = t.pointwise.unwrap_or(d.pointwise);
                d.fourth_order = t.fourth_order.unwrap_or(d.fourth_order);
                d.integral_floor = t.integral_floor.unwrap_or(d.integral_floor);
                d.integral_factor = t.integral_factor.unwrap_or(d.integral_factor);
                d.biconservative = t.biconservative.unwrap_or(d.biconservative);
                d.validate().map_err(from_error)?;
            }
            other => return Err(bad(format!("unknown config key `{other}`"))),
        }
    }
    Ok(())
}

/// 1 when no check failed or errored, 0 otherwise (also for null).
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hl_report_passed(report: *const HlReport) -> c_int {
    report.as_ref().map_or(0, |r| {
        r.report.checks.iter().all(|c| matches!(c.status, Status::Pass | Status::Skip)) as c_int
    })
}

/// Number of check rows.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hl_report_len(report: *const HlReport) -> usize {
    report.as_ref().map_or(0, |r| r.report.checks.len())
}

/// Writes the report as JSON to `out`.
///
/// # Safety
/// `report` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hl_report_to_json(report: *const HlReport, out: *mut *mut c_char) -> HlStatus {
    guard(|| match (report.as_ref(), out.is_null()) {
        (Some(r), false) => match r.report.to_json() {
            Ok(s) => write_string(out, s),
            Err(e) => from_error(e),
        },
        _ => fail(HlStatus::NullPointer, "null report or output pointer"),
    })
}

/// # Safety
/// `report` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hl_report_free(report: *mut HlReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Product-sphere scan as a JSON array of rows.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hl_scan_products_json(
    m: usize,
    m1: usize,
    r1_min: f64,
    r1_max: f64,
    step: f64,
    out: *mut *mut c_char,
) -> HlStatus {
    guard(|| {
        if out.is_null() {
            return fail(HlStatus::NullPointer, "null output pointer");
        }
        match scan_products(m, m1, r1_min, r1_max, step) {
            Ok(rows) => match serde_json::to_string(&rows) {
                Ok(s) => write_string(out, s),
                Err(e) => fail(HlStatus::InvalidArgument, e.to_string()),
            },
            Err(e) => from_error(e),
        }
    })
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
