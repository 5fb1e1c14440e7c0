//! C ABI over the treewave solver.
//!
//! Trajectories are opaque handles. Every fallible call returns a [`TwStatus`];
//! on failure the message is available from [`tw_last_error_message`] on the
//! same thread. Strings handed out by the library are freed with
//! [`tw_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use treewave::energy::energies;
use treewave::experiment::{prepare, ExperimentConfig, InitialSpec};
use treewave::io::tree_function_to_json;
use treewave::verify::{verify_suite, VerifyConfig};
use treewave::wave::{SolverMode, WaveTrajectory};
use treewave::{Error, QSurd, Scalar, ScalarMode, VertexAddress};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Truncation = 3,
    Domain = 4,
    Mode = 5,
    Parse = 6,
    Io = 7,
    Internal = 8,
}

/// Energies at one time step, as doubles.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TwEnergy {
    pub kinetic: f64,
    pub potential: f64,
    pub total: f64,
    pub gap: f64,
}

enum Inner {
    Exact(WaveTrajectory<QSurd>),
    Float(WaveTrajectory<f64>),
}

/// A solved trajectory `u(n)` for `|n| ≤ steps`.
pub struct TwTrajectory(Inner);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(TwStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Parameter(_) | Error::Usage { .. } | Error::Arithmetic(_) => {
                TwStatus::InvalidArgument
            }
            Error::Truncation(_) => TwStatus::Truncation,
            Error::Domain(_) => TwStatus::Domain,
            Error::Mode(_) => TwStatus::Mode,
            Error::Parse(_) | Error::Json(_) => TwStatus::Parse,
            Error::Io(_) => TwStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(TwStatus::NullPointer, format!("`{what}` is null"))
}

/// Runs `body`, records any error and converts panics to `Internal`.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> TwStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => TwStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            TwStatus::Internal
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(TwStatus::Parse, format!("`{what}` is not UTF-8")))
}

unsafe fn handle<'a>(p: *const TwTrajectory) -> Result<&'a TwTrajectory, Failure> {
    p.as_ref().ok_or_else(|| null("trajectory"))
}

unsafe fn write_string(out: *mut *mut c_char, s: String, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    let c =
        CString::new(s).map_err(|_| Failure(TwStatus::Internal, "string contains nul".into()))?;
    *out = c.into_raw();
    Ok(())
}

/// Message for the last failed call on this thread, or null. Owned by the
/// library and valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn tw_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Frees a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn tw_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Solves for `|n| ≤ steps` on `T_q`.
///
/// `mode` is `exact` or `float`, `solver` is `closed` or `recurrence` and
/// `initial` is `delta-f`, `delta-g`, `random[:R]` or a JSON object. A
/// `truncation_radius` of 0 picks `steps + data radius + 2`.
///
/// # Safety
/// String arguments must be nul-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tw_trajectory_solve(
    q: u32,
    steps: u32,
    mode: *const c_char,
    solver: *const c_char,
    initial: *const c_char,
    seed: u64,
    truncation_radius: u32,
    out: *mut *mut TwTrajectory,
) -> TwStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let config = ExperimentConfig {
            q,
            steps,
            mode: text(mode, "mode")?.parse()?,
            initial: InitialSpec::parse(text(initial, "initial")?)?,
            radius: (truncation_radius > 0).then_some(truncation_radius),
            seed,
            ..ExperimentConfig::default()
        };
        let solver: SolverMode = text(solver, "solver")?.parse()?;
        let inner = match config.mode {
            ScalarMode::Exact => Inner::Exact(prepare(&config, solver)?),
            ScalarMode::Float64 => Inner::Float(prepare(&config, solver)?),
        };
        *out = Box::into_raw(Box::new(TwTrajectory(inner)));
        Ok(())
    })
}

/// # Safety
/// `t` must come from [`tw_trajectory_solve`] and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn tw_trajectory_free(t: *mut TwTrajectory) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Branching number and the solved time range `[lo, hi]`.
///
/// # Safety
/// `t` must be a live handle; output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn tw_trajectory_info(
    t: *const TwTrajectory,
    q: *mut u32,
    lo: *mut i64,
    hi: *mut i64,
) -> TwStatus {
    guard(|| {
        let t = handle(t)?;
        if q.is_null() || lo.is_null() || hi.is_null() {
            return Err(null("output"));
        }
        let (tq, r) = match &t.0 {
            Inner::Exact(u) => (u.q(), u.range()),
            Inner::Float(u) => (u.q(), u.range()),
        };
        *q = tq;
        *lo = *r.start();
        *hi = *r.end();
        Ok(())
    })
}

fn value_at<S: Scalar>(u: &WaveTrajectory<S>, n: i64, vertex: &str) -> Result<S, Failure> {
    let x = VertexAddress::parse(u.q(), vertex)?;
    Ok(u.snapshot(n)?.get(&x))
}

/// `u(n)` at a vertex given as comma-separated labels (`""` is the origin).
///
/// # Safety
/// `t` must be a live handle, `vertex` nul-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tw_trajectory_value(
    t: *const TwTrajectory,
    n: i64,
    vertex: *const c_char,
    out: *mut f64,
) -> TwStatus {
    guard(|| {
        let t = handle(t)?;
        let vertex = text(vertex, "vertex")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = match &t.0 {
            Inner::Exact(u) => value_at(u, n, vertex)?.to_f64(),
            Inner::Float(u) => value_at(u, n, vertex)?,
        };
        Ok(())
    })
}

/// Exact `u(n)(x) = a + b√q` as two fraction strings. `Mode` for float trajectories.
///
/// # Safety
/// As [`tw_trajectory_value`]; free both strings with [`tw_string_free`].
#[no_mangle]
pub unsafe extern "C" fn tw_trajectory_value_exact(
    t: *const TwTrajectory,
    n: i64,
    vertex: *const c_char,
    a_out: *mut *mut c_char,
    b_out: *mut *mut c_char,
) -> TwStatus {
    guard(|| {
        let t = handle(t)?;
        let vertex = text(vertex, "vertex")?;
        let Inner::Exact(u) = &t.0 else {
            return Err(Failure(
                TwStatus::Mode,
                "exact values need an exact trajectory".into(),
            ));
        };
        if a_out.is_null() || b_out.is_null() {
            return Err(null("output"));
        }
        let v = value_at(u, n, vertex)?;
        write_string(a_out, v.a().to_string(), "a_out")?;
        write_string(b_out, v.b().to_string(), "b_out")
    })
}

/// Kinetic, potential and total energy and their difference at step `n`.
/// Needs `n ± 1` inside the solved range.
///
/// # Safety
/// `t` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tw_trajectory_energy(
    t: *const TwTrajectory,
    n: i64,
    out: *mut TwEnergy,
) -> TwStatus {
    guard(|| {
        let t = handle(t)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = match &t.0 {
            Inner::Exact(u) => {
                let e = energies(u, n)?;
                TwEnergy {
                    kinetic: e.kinetic.to_f64(),
                    potential: e.potential.to_f64(),
                    total: e.total.to_f64(),
                    gap: e.gap.to_f64(),
                }
            }
            Inner::Float(u) => {
                let e = energies(u, n)?;
                TwEnergy {
                    kinetic: e.kinetic,
                    potential: e.potential,
                    total: e.total,
                    gap: e.gap,
                }
            }
        };
        Ok(())
    })
}

/// Snapshot `u(n)` as JSON (`{"q", "entries": [{"vertex", "value"}]}`).
///
/// # Safety
/// `t` must be a live handle and `out` writable; free with [`tw_string_free`].
#[no_mangle]
pub unsafe extern "C" fn tw_trajectory_snapshot_json(
    t: *const TwTrajectory,
    n: i64,
    out: *mut *mut c_char,
) -> TwStatus {
    guard(|| {
        let t = handle(t)?;
        let json = match &t.0 {
            Inner::Exact(u) => tree_function_to_json(u.snapshot(n)?),
            Inner::Float(u) => tree_function_to_json(u.snapshot(n)?),
        };
        write_string(out, json.to_string(), "out")
    })
}

/// Runs the seeded property suite for one `q`; `failed` receives the number of failed checks.
///
/// # Safety
/// `failed` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tw_verify(q: u32, seed: u64, failed: *mut u32) -> TwStatus {
    guard(|| {
        if failed.is_null() {
            return Err(null("failed"));
        }
        let report = verify_suite(&VerifyConfig {
            qs: vec![q],
            seed,
            ..VerifyConfig::default()
        });
        *failed = report.failures().count() as u32;
        Ok(())
    })
}
