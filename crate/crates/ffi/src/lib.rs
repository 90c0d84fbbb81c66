//! C ABI over the contact-triple library.
//!
//! Objects are exposed as opaque handles built from JSON documents and
//! released with the matching `ct_*_free`. Every fallible call
//! returns a [`CtStatus`]; on failure a message for the calling thread is
//! available from [`ct_last_error`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use contact_triple::dynamics::contact_field;
use contact_triple::integrate::Trajectory;
use contact_triple::output::{write_trajectory, Format};
use contact_triple::scenario::{section_from_json, ScenarioConfig};
use contact_triple::verify::{verify, Suite};
use contact_triple::{ChartId, ContactCoords, Error, ScalarSection, SectionKind};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Io = 4,
    Expression = 5,
    Domain = 6,
    Chart = 7,
    Singular = 8,
    NoConvergence = 9,
    StepUnderflow = 10,
    Degenerate = 11,
    CheckFailed = 12,
    Panic = 13,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CtSide {
    Hamiltonian = 0,
    Lagrangian = 1,
    Herglotz = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CtFormat {
    Csv = 0,
    Json = 1,
}

/// Opaque scalar section (Hamiltonian, Lagrangian or Herglotz).
pub struct CtSection {
    inner: ScalarSection,
}

/// Opaque integrated trajectory.
pub struct CtTrajectory {
    inner: Trajectory,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn status_of(e: &Error) -> CtStatus {
    match e {
        Error::NotInOverlap { .. } | Error::UnknownChart(_) | Error::ChartMismatch(..) | Error::ChartExhausted { .. } => {
            CtStatus::Chart
        }
        Error::BasePointMismatch(_) | Error::DimensionMismatch { .. } | Error::KindMismatch { .. } => {
            CtStatus::InvalidArgument
        }
        Error::Syntax { .. } | Error::UnknownSymbol(_) | Error::Unbound(_) => CtStatus::Expression,
        Error::Domain(_) => CtStatus::Domain,
        Error::SingularHessian { .. } => CtStatus::Singular,
        Error::NoConvergence { .. } => CtStatus::NoConvergence,
        Error::StepUnderflow { .. } => CtStatus::StepUnderflow,
        Error::Degenerate { .. } => CtStatus::Degenerate,
        Error::Config { .. } => CtStatus::Config,
        Error::Io(_) => CtStatus::Io,
    }
}

struct Fail(CtStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(CtStatus::NullPointer, format!("`{what}` is null"))
}

/// Runs `body`, recording failures and containing panics.
fn guard(body: impl FnOnce() -> Result<(), Fail>) -> CtStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            CtStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            CtStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(CtStatus::InvalidArgument, format!("`{what}` is not UTF-8")))
}

unsafe fn slice_arg<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn ct_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ct_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a section from a JSON document of the form
/// `{"bundle": {...}, "side": "...", "<side>": {"builtin" | "expr": ..., "params": {...}}}`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out_section` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ct_section_from_json(json: *const c_char, out_section: *mut *mut CtSection) -> CtStatus {
    guard(|| {
        let text = str_arg(json, "json")?;
        let slot = out(out_section, "out_section")?;
        let inner = section_from_json(text)?;
        *slot = Box::into_raw(Box::new(CtSection { inner }));
        Ok(())
    })
}

/// # Safety
/// `section` must come from [`ct_section_from_json`] and not be used again.
#[no_mangle]
pub unsafe extern "C" fn ct_section_free(section: *mut CtSection) {
    if !section.is_null() {
        drop(Box::from_raw(section));
    }
}

/// Base dimension `n`; sections take `2n + 1` arguments. Zero for null.
///
/// # Safety
/// `section` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ct_section_dim(section: *const CtSection) -> usize {
    section.as_ref().map_or(0, |s| s.inner.dim())
}

/// # Safety
/// `section` must be a live handle and `out_side` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ct_section_side(section: *const CtSection, out_side: *mut CtSide) -> CtStatus {
    guard(|| {
        let s = section.as_ref().ok_or_else(|| null("section"))?;
        *out(out_side, "out_side")? = match s.inner.kind() {
            SectionKind::Hamiltonian => CtSide::Hamiltonian,
            SectionKind::Lagrangian => CtSide::Lagrangian,
            SectionKind::Herglotz => CtSide::Herglotz,
        };
        Ok(())
    })
}

/// Value and, if `out_grad` is non-null, gradient (length `nargs`) at the
/// charted point `args`.
///
/// # Safety
/// `args` must hold `nargs` doubles and `out_grad` room for `nargs` doubles.
#[no_mangle]
pub unsafe extern "C" fn ct_section_eval(
    section: *const CtSection,
    chart: usize,
    args: *const f64,
    nargs: usize,
    out_value: *mut f64,
    out_grad: *mut f64,
) -> CtStatus {
    guard(|| {
        let s = section.as_ref().ok_or_else(|| null("section"))?;
        let args = slice_arg(args, nargs, "args")?;
        let want = 2 * s.inner.dim() + 1;
        if nargs != want {
            return Err(Error::DimensionMismatch { expected: want, actual: nargs }.into());
        }
        let value = out(out_value, "out_value")?;
        let jet = s.inner.jet_at(ChartId(chart), args)?;
        *value = jet.value();
        if !out_grad.is_null() {
            std::slice::from_raw_parts_mut(out_grad, nargs).copy_from_slice(jet.grad());
        }
        Ok(())
    })
}

/// Contact Hamiltonian vector field at `(x, p, z)`; `x`, `p`, `out_xdot`
/// and `out_pdot` have the section's dimension.
///
/// # Safety
/// All array pointers must be valid for `ct_section_dim(section)` doubles.
#[no_mangle]
pub unsafe extern "C" fn ct_contact_field(
    section: *const CtSection,
    chart: usize,
    x: *const f64,
    p: *const f64,
    z: f64,
    out_xdot: *mut f64,
    out_pdot: *mut f64,
    out_zdot: *mut f64,
) -> CtStatus {
    guard(|| {
        let s = section.as_ref().ok_or_else(|| null("section"))?;
        let n = s.inner.dim();
        let u = ContactCoords::new(ChartId(chart), slice_arg(x, n, "x")?.to_vec(), slice_arg(p, n, "p")?.to_vec(), z);
        if out_xdot.is_null() || out_pdot.is_null() {
            return Err(null("out_xdot/out_pdot"));
        }
        let zdot = out(out_zdot, "out_zdot")?;
        let f = contact_field(&s.inner, &u)?;
        std::slice::from_raw_parts_mut(out_xdot, n).copy_from_slice(&f.xdot);
        std::slice::from_raw_parts_mut(out_pdot, n).copy_from_slice(&f.pdot);
        *zdot = f.zdot;
        Ok(())
    })
}

/// Integrates the scenario described by a JSON config (same schema as the
/// CLI's `run --config`). Nothing is written to disk.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out_trajectory` valid.
#[no_mangle]
pub unsafe extern "C" fn ct_scenario_run(json: *const c_char, out_trajectory: *mut *mut CtTrajectory) -> CtStatus {
    guard(|| {
        let text = str_arg(json, "json")?;
        let slot = out(out_trajectory, "out_trajectory")?;
        let inner = ScenarioConfig::from_json(text)?.integrate()?;
        *slot = Box::into_raw(Box::new(CtTrajectory { inner }));
        Ok(())
    })
}

/// # Safety
/// `trajectory` must come from [`ct_scenario_run`] and not be used again.
#[no_mangle]
pub unsafe extern "C" fn ct_trajectory_free(trajectory: *mut CtTrajectory) {
    if !trajectory.is_null() {
        drop(Box::from_raw(trajectory));
    }
}

/// Number of samples; zero for null.
///
/// # Safety
/// `trajectory` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ct_trajectory_len(trajectory: *const CtTrajectory) -> usize {
    trajectory.as_ref().map_or(0, |t| t.inner.samples.len())
}

/// Length of each sample's state vector, `2n + 1`; zero for null.
///
/// # Safety
/// `trajectory` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ct_trajectory_width(trajectory: *const CtTrajectory) -> usize {
    trajectory.as_ref().map_or(0, |t| 2 * t.inner.dim + 1)
}

/// Copies sample `index` into `out_s`, `out_chart` and `out_state` (room for
/// `ct_trajectory_width` doubles).
///
/// # Safety
/// Pointers must be valid; `out_state` must hold the state width.
#[no_mangle]
pub unsafe extern "C" fn ct_trajectory_sample(
    trajectory: *const CtTrajectory,
    index: usize,
    out_s: *mut f64,
    out_chart: *mut usize,
    out_state: *mut f64,
) -> CtStatus {
    guard(|| {
        let t = trajectory.as_ref().ok_or_else(|| null("trajectory"))?;
        let sample = t
            .inner
            .samples
            .get(index)
            .ok_or_else(|| Fail(CtStatus::InvalidArgument, format!("sample {index} out of range")))?;
        if out_state.is_null() {
            return Err(null("out_state"));
        }
        *out(out_s, "out_s")? = sample.s;
        *out(out_chart, "out_chart")? = sample.chart.0;
        std::slice::from_raw_parts_mut(out_state, sample.state.len()).copy_from_slice(&sample.state);
        Ok(())
    })
}

/// Number of chart-switch events; zero for null.
///
/// # Safety
/// `trajectory` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ct_trajectory_event_count(trajectory: *const CtTrajectory) -> usize {
    trajectory.as_ref().map_or(0, |t| t.inner.events.len())
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ct_trajectory_event(
    trajectory: *const CtTrajectory,
    index: usize,
    out_s: *mut f64,
    out_from: *mut usize,
    out_to: *mut usize,
) -> CtStatus {
    guard(|| {
        let t = trajectory.as_ref().ok_or_else(|| null("trajectory"))?;
        let e = t
            .inner
            .events
            .get(index)
            .ok_or_else(|| Fail(CtStatus::InvalidArgument, format!("event {index} out of range")))?;
        *out(out_s, "out_s")? = e.s;
        *out(out_from, "out_from")? = e.from.0;
        *out(out_to, "out_to")? = e.to.0;
        Ok(())
    })
}

/// Writes the trajectory as CSV (plus `<name>.events.csv`) or JSON;
/// `format` is a [`CtFormat`] value.
///
/// # Safety
/// `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ct_trajectory_write(
    trajectory: *const CtTrajectory,
    path: *const c_char,
    format: u32,
) -> CtStatus {
    guard(|| {
        let t = trajectory.as_ref().ok_or_else(|| null("trajectory"))?;
        let path = str_arg(path, "path")?;
        let format = match format {
            f if f == CtFormat::Csv as u32 => Format::Csv,
            f if f == CtFormat::Json as u32 => Format::Json,
            f => return Err(Fail(CtStatus::InvalidArgument, format!("unknown format {f}"))),
        };
        write_trajectory(&t.inner, Path::new(path), format)?;
        Ok(())
    })
}

/// Runs a verification suite (`all`, `diagrams`, `homogeneity`, `moebius`,
/// `legendre`). Returns [`CtStatus::CheckFailed`] with the report as the
/// error message if any check fails.
///
/// # Safety
/// `suite` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ct_verify(suite: *const c_char) -> CtStatus {
    guard(|| {
        let suite: Suite = str_arg(suite, "suite")?.parse()?;
        let report = verify(suite);
        if report.passed {
            Ok(())
        } else {
            Err(Fail(CtStatus::CheckFailed, report.to_string()))
        }
    })
}
