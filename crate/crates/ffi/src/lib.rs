//! C ABI for the wave-packet dynamics library.
//!
//! Conventions:
//! - Opaque handles (`SwpModel`, `SwpTrajectory`, `SwpExpectations`) are
//!   created by `swp_*_new`/`swp_*_run` functions and released with the
//!   matching `swp_*_free`. Constructors return null on failure.
//! - Functions that can fail return an [`SwpStatus`] code; the most recent
//!   error message is available through [`swp_last_error_message`].
//! - Matrices cross the boundary as row-major `d * d` buffers; state rows use
//!   the flat layout `(q, p, A upper triangle, Bn upper triangle)`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nalgebra::{DMatrix, DVector};
use swpdyn::dynamics::{ModelConfig, ReducedState};
use swpdyn::egorov::{egorov_expectations, sample_ensemble, ExpectationSeries};
use swpdyn::integrators::{
    propagate_classical, propagate_reduced, ClassicalState, IntegratorSpec, Method, Trajectory,
};
use swpdyn::multi_index::MultiIndex;
use swpdyn::packet::{normalizing_delta, PacketParams};
use swpdyn::potential::{PolynomialPotential, PotentialTerm};
use swpdyn::siegel::SiegelPoint;

/// Status codes returned by fallible entry points.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwpStatus {
    Ok = 0,
    InvalidArgument = 1,
    NumericalFailure = 2,
    ConfigError = 3,
    IoError = 4,
    Panic = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<(SwpStatus, String)> =
        const { RefCell::new((SwpStatus::Ok, String::new())) };
}

fn set_error(msg: impl Into<String>) {
    set_error_with(SwpStatus::InvalidArgument, msg);
}

fn set_error_with(status: SwpStatus, msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = (status, msg.into()));
}

fn status_of(err: &swpdyn::Error) -> SwpStatus {
    use swpdyn::Error as E;
    match err {
        E::InvalidArgument { .. } | E::DimensionMismatch { .. } => SwpStatus::InvalidArgument,
        E::Config { .. } => SwpStatus::ConfigError,
        E::Io(_) => SwpStatus::IoError,
        E::Propagation { source, .. } => status_of(source),
        _ => SwpStatus::NumericalFailure,
    }
}

/// Copy the most recent error message into `buf` (NUL-terminated, truncated
/// to `len`). Returns the full message length in bytes.
///
/// # Safety
/// `buf` must point to `len` writable bytes (or be null to query the length).
#[no_mangle]
pub unsafe extern "C" fn swp_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let guard = e.borrow();
        let bytes = guard.1.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Model handle: hbar, mass, packet index, and potential.
pub struct SwpModel {
    cfg: ModelConfig,
}

/// Build a model.
///
/// `n_entries` holds the `dim` multi-index entries. The potential is the sum
/// of `n_terms` monomials: term `k` has coefficient `coeffs[k]` and exponents
/// `exponents[k * dim .. (k + 1) * dim]`.
///
/// # Safety
/// `n_entries` must point to `dim` readable `u32`, `coeffs` to `n_terms`
/// readable `f64`, and `exponents` to `n_terms * dim` readable `u32`.
#[no_mangle]
pub unsafe extern "C" fn swp_model_new(
    hbar: f64,
    mass: f64,
    dim: usize,
    n_entries: *const u32,
    n_terms: usize,
    coeffs: *const f64,
    exponents: *const u32,
) -> *mut SwpModel {
    if dim == 0 || n_entries.is_null() || (n_terms > 0 && (coeffs.is_null() || exponents.is_null()))
    {
        set_error("null or empty model arguments");
        return ptr::null_mut();
    }
    let entries: Vec<usize> = std::slice::from_raw_parts(n_entries, dim)
        .iter()
        .map(|&e| e as usize)
        .collect();
    let coeffs = std::slice::from_raw_parts(coeffs, n_terms);
    let exps = std::slice::from_raw_parts(exponents, n_terms * dim);
    let terms: Vec<PotentialTerm> = (0..n_terms)
        .map(|k| PotentialTerm {
            coeff: coeffs[k],
            exponents: exps[k * dim..(k + 1) * dim].to_vec(),
        })
        .collect();
    let build = || -> swpdyn::Result<SwpModel> {
        let n = MultiIndex::new(entries.clone())?;
        let potential = PolynomialPotential::new(terms.clone(), dim)?;
        Ok(SwpModel {
            cfg: ModelConfig::new(hbar, mass, n, potential)?,
        })
    };
    match build() {
        Ok(model) => Box::into_raw(Box::new(model)),
        Err(e) => {
            set_error_with(status_of(&e), e.to_string());
            ptr::null_mut()
        }
    }
}

/// Release a model handle.
///
/// # Safety
/// `model` must come from [`swp_model_new`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn swp_model_free(model: *mut SwpModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Trajectory handle: rows of `(t, flat state, energy)`.
pub struct SwpTrajectory {
    times: Vec<f64>,
    rows: Vec<Vec<f64>>,
    energies: Vec<f64>,
}

impl SwpTrajectory {
    fn from_classical(traj: Trajectory<ClassicalState>) -> Self {
        SwpTrajectory {
            times: traj.times,
            rows: traj
                .states
                .iter()
                .map(|s| s.q.iter().chain(s.p.iter()).copied().collect())
                .collect(),
            energies: traj.energies,
        }
    }

    fn from_reduced(traj: Trajectory<ReducedState>) -> Self {
        SwpTrajectory {
            times: traj.times,
            rows: traj.states.iter().map(|s| s.to_flat()).collect(),
            energies: traj.energies,
        }
    }
}

unsafe fn read_matrix(dim: usize, data: *const f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(dim, dim, std::slice::from_raw_parts(data, dim * dim))
}

unsafe fn read_vector(dim: usize, data: *const f64) -> DVector<f64> {
    DVector::from_column_slice(std::slice::from_raw_parts(data, dim))
}

/// Integrate the classical system with Störmer-Verlet.
///
/// # Safety
/// `model` must be a live model handle; `q0` and `p0` must point to `dim`
/// readable doubles.
#[no_mangle]
pub unsafe extern "C" fn swp_classical_run(
    model: *const SwpModel,
    q0: *const f64,
    p0: *const f64,
    dt: f64,
    t_final: f64,
) -> *mut SwpTrajectory {
    let Some(model) = model.as_ref() else {
        set_error("null model");
        return ptr::null_mut();
    };
    if q0.is_null() || p0.is_null() {
        set_error("null initial state");
        return ptr::null_mut();
    }
    let d = model.cfg.dim();
    let q = read_vector(d, q0);
    let p = read_vector(d, p0);
    let run = catch_unwind(AssertUnwindSafe(|| -> swpdyn::Result<SwpTrajectory> {
        let spec = IntegratorSpec::new(Method::StormerVerlet, dt, t_final)?;
        Ok(SwpTrajectory::from_classical(propagate_classical(
            &model.cfg, &spec, q, p,
        )?))
    }));
    unwrap_handle(run)
}

/// Integrate the reduced packet system with the variational splitting
/// (`use_rk4 != 0` selects the RK4 reference integrator instead).
///
/// # Safety
/// `model` must be a live model handle; `q0`, `p0` must point to `dim`
/// doubles and `a0`, `b0` to row-major `dim * dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn swp_reduced_run(
    model: *const SwpModel,
    q0: *const f64,
    p0: *const f64,
    a0: *const f64,
    b0: *const f64,
    dt: f64,
    t_final: f64,
    use_rk4: i32,
) -> *mut SwpTrajectory {
    let Some(model) = model.as_ref() else {
        set_error("null model");
        return ptr::null_mut();
    };
    if q0.is_null() || p0.is_null() || a0.is_null() || b0.is_null() {
        set_error("null initial state");
        return ptr::null_mut();
    }
    let d = model.cfg.dim();
    let q = read_vector(d, q0);
    let p = read_vector(d, p0);
    let a = read_matrix(d, a0);
    let b = read_matrix(d, b0);
    let run = catch_unwind(AssertUnwindSafe(|| -> swpdyn::Result<SwpTrajectory> {
        let method = if use_rk4 != 0 {
            Method::Rk4
        } else {
            Method::VariationalSplitting
        };
        let spec = IntegratorSpec::new(method, dt, t_final)?;
        let initial = ReducedState::from_siegel(q, p, a, b, &model.cfg.n)?;
        Ok(SwpTrajectory::from_reduced(propagate_reduced(
            &model.cfg, &spec, initial,
        )?))
    }));
    unwrap_handle(run)
}

fn unwrap_handle<T>(
    run: std::thread::Result<swpdyn::Result<T>>,
) -> *mut T {
    match run {
        Ok(Ok(value)) => Box::into_raw(Box::new(value)),
        Ok(Err(e)) => {
            set_error_with(status_of(&e), e.to_string());
            ptr::null_mut()
        }
        Err(_) => {
            set_error_with(SwpStatus::Panic, "internal panic");
            ptr::null_mut()
        }
    }
}

/// Number of recorded rows.
///
/// # Safety
/// `traj` must be a live trajectory handle.
#[no_mangle]
pub unsafe extern "C" fn swp_trajectory_len(traj: *const SwpTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.times.len())
}

/// Length of one flat state row.
///
/// # Safety
/// `traj` must be a live trajectory handle.
#[no_mangle]
pub unsafe extern "C" fn swp_trajectory_state_len(traj: *const SwpTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.rows.first().map_or(0, Vec::len))
}

/// Time of row `i` (NaN when out of range).
///
/// # Safety
/// `traj` must be a live trajectory handle.
#[no_mangle]
pub unsafe extern "C" fn swp_trajectory_time(traj: *const SwpTrajectory, i: usize) -> f64 {
    traj.as_ref()
        .and_then(|t| t.times.get(i).copied())
        .unwrap_or(f64::NAN)
}

/// Energy recorded at row `i` (NaN when out of range).
///
/// # Safety
/// `traj` must be a live trajectory handle.
#[no_mangle]
pub unsafe extern "C" fn swp_trajectory_energy(traj: *const SwpTrajectory, i: usize) -> f64 {
    traj.as_ref()
        .and_then(|t| t.energies.get(i).copied())
        .unwrap_or(f64::NAN)
}

/// Copy the flat state of row `i` into `out`.
///
/// # Safety
/// `traj` must be a live trajectory handle and `out` must point to
/// `swp_trajectory_state_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn swp_trajectory_state(
    traj: *const SwpTrajectory,
    i: usize,
    out: *mut f64,
) -> SwpStatus {
    let Some(t) = traj.as_ref() else {
        set_error("null trajectory");
        return SwpStatus::InvalidArgument;
    };
    let Some(row) = t.rows.get(i) else {
        set_error(format!("row {i} out of range ({} rows)", t.rows.len()));
        return SwpStatus::InvalidArgument;
    };
    if out.is_null() {
        set_error("null output buffer");
        return SwpStatus::InvalidArgument;
    }
    ptr::copy_nonoverlapping(row.as_ptr(), out, row.len());
    SwpStatus::Ok
}

/// Release a trajectory handle.
///
/// # Safety
/// `traj` must come from a `swp_*_run` call and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn swp_trajectory_free(traj: *mut SwpTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Expectation-series handle from an ensemble run.
pub struct SwpExpectations {
    series: ExpectationSeries,
}

/// Sample the packet's phase-space density and propagate the ensemble,
/// recording self-normalized expectation values. The packet norm is fixed by
/// solving for the appropriate `delta` internally.
///
/// # Safety
/// `model` must be a live model handle; `q0`, `p0` must point to `dim`
/// doubles and `a0`, `b0` to row-major `dim * dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn swp_egorov_run(
    model: *const SwpModel,
    q0: *const f64,
    p0: *const f64,
    a0: *const f64,
    b0: *const f64,
    samples: usize,
    seed: u64,
    dt: f64,
    t_final: f64,
) -> *mut SwpExpectations {
    let Some(model) = model.as_ref() else {
        set_error("null model");
        return ptr::null_mut();
    };
    if q0.is_null() || p0.is_null() || a0.is_null() || b0.is_null() {
        set_error("null initial state");
        return ptr::null_mut();
    }
    let d = model.cfg.dim();
    let q = read_vector(d, q0);
    let p = read_vector(d, p0);
    let a = read_matrix(d, a0);
    let b = read_matrix(d, b0);
    let run = catch_unwind(AssertUnwindSafe(|| -> swpdyn::Result<SwpExpectations> {
        let siegel = SiegelPoint::new(a, b)?;
        let delta = normalizing_delta(siegel.b(), model.cfg.hbar);
        let y = PacketParams::new(q, p, siegel, 0.0, delta)?;
        let ensemble = sample_ensemble(&model.cfg, &y, samples, seed)?;
        let spec = IntegratorSpec::new(Method::StormerVerlet, dt, t_final)?;
        Ok(SwpExpectations {
            series: egorov_expectations(&model.cfg, &ensemble, &spec)?,
        })
    }));
    unwrap_handle(run)
}

/// Number of recorded times.
///
/// # Safety
/// `e` must be a live expectations handle.
#[no_mangle]
pub unsafe extern "C" fn swp_expectations_len(e: *const SwpExpectations) -> usize {
    e.as_ref().map_or(0, |e| e.series.times.len())
}

/// Time of record `i`.
///
/// # Safety
/// `e` must be a live expectations handle.
#[no_mangle]
pub unsafe extern "C" fn swp_expectations_time(e: *const SwpExpectations, i: usize) -> f64 {
    e.as_ref()
        .and_then(|e| e.series.times.get(i).copied())
        .unwrap_or(f64::NAN)
}

/// Mean position component `axis` at record `i`.
///
/// # Safety
/// `e` must be a live expectations handle.
#[no_mangle]
pub unsafe extern "C" fn swp_expectations_mean_x(
    e: *const SwpExpectations,
    i: usize,
    axis: usize,
) -> f64 {
    e.as_ref()
        .and_then(|e| e.series.mean_q.get(i))
        .and_then(|v| v.get(axis).copied())
        .unwrap_or(f64::NAN)
}

/// Mean momentum component `axis` at record `i`.
///
/// # Safety
/// `e` must be a live expectations handle.
#[no_mangle]
pub unsafe extern "C" fn swp_expectations_mean_p(
    e: *const SwpExpectations,
    i: usize,
    axis: usize,
) -> f64 {
    e.as_ref()
        .and_then(|e| e.series.mean_p.get(i))
        .and_then(|v| v.get(axis).copied())
        .unwrap_or(f64::NAN)
}

/// Mean classical energy at record `i`.
///
/// # Safety
/// `e` must be a live expectations handle.
#[no_mangle]
pub unsafe extern "C" fn swp_expectations_mean_energy(
    e: *const SwpExpectations,
    i: usize,
) -> f64 {
    e.as_ref()
        .and_then(|e| e.series.mean_energy.get(i).copied())
        .unwrap_or(f64::NAN)
}

/// Effective sample size at record `i`.
///
/// # Safety
/// `e` must be a live expectations handle.
#[no_mangle]
pub unsafe extern "C" fn swp_expectations_ess(e: *const SwpExpectations, i: usize) -> f64 {
    e.as_ref()
        .and_then(|e| e.series.effective_samples.get(i).copied())
        .unwrap_or(f64::NAN)
}

/// Release an expectations handle.
///
/// # Safety
/// `e` must come from [`swp_egorov_run`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn swp_expectations_free(e: *mut SwpExpectations) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

/// Parse a configuration file (same flat key = value format as the CLI) and
/// return the model it describes.
///
/// # Safety
/// `text` must be a NUL-terminated UTF-8 string.
#[no_mangle]
pub unsafe extern "C" fn swp_model_from_config(text: *const c_char) -> *mut SwpModel {
    if text.is_null() {
        set_error("null config text");
        return ptr::null_mut();
    }
    let Ok(text) = CStr::from_ptr(text).to_str() else {
        set_error("config text is not valid UTF-8");
        return ptr::null_mut();
    };
    match swpdyn::ExperimentConfig::parse(text) {
        Ok(cfg) => Box::into_raw(Box::new(SwpModel { cfg: cfg.model })),
        Err(e) => {
            set_error_with(status_of(&e), e.to_string());
            ptr::null_mut()
        }
    }
}

/// Status code of the most recent failure recorded by this thread.
#[no_mangle]
pub extern "C" fn swp_last_error_status() -> SwpStatus {
    LAST_ERROR.with(|e| e.borrow().0)
}
