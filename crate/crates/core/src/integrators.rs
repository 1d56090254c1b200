//! Fixed-step time integrators: Störmer-Verlet for the classical system, the
//! variational splitting for the packet systems, and an RK4 reference.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::dynamics::{
    classical_energy, corrected_potential_grad, full_field, full_hamiltonian, reduced_field,
    reduced_hamiltonian, ModelConfig, ReducedState,
};
use crate::error::{Error, Result};
use crate::packet::{lambda_matrix, PacketParams};
use crate::siegel::SiegelPoint;

/// Time-stepping method selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    StormerVerlet,
    VariationalSplitting,
    Rk4,
}

impl Method {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "stormer_verlet" => Ok(Method::StormerVerlet),
            "variational_splitting" => Ok(Method::VariationalSplitting),
            "rk4" => Ok(Method::Rk4),
            other => Err(Error::invalid(format!("unknown integrator method {other:?}"))),
        }
    }
}

/// Fixed-step integration request.
#[derive(Debug, Clone, Copy)]
pub struct IntegratorSpec {
    pub method: Method,
    pub dt: f64,
    pub t_final: f64,
}

impl IntegratorSpec {
    pub fn new(method: Method, dt: f64, t_final: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::invalid("dt must be positive"));
        }
        if !(t_final >= 0.0) || !t_final.is_finite() {
            return Err(Error::invalid("t_final must be non-negative"));
        }
        Ok(IntegratorSpec {
            method,
            dt,
            t_final,
        })
    }

    /// Number of steps of the fixed-step loop.
    pub fn steps(&self) -> usize {
        (self.t_final / self.dt + 1e-9).floor() as usize
    }
}

/// One Störmer-Verlet step of the classical system.
pub fn stormer_verlet_step(
    cfg: &ModelConfig,
    q: &DVector<f64>,
    p: &DVector<f64>,
    dt: f64,
) -> (DVector<f64>, DVector<f64>) {
    let p_half = p - cfg.potential.gradient(q) * (dt / 2.0);
    let q_new = q + &p_half * (dt / cfg.mass);
    let p_new = &p_half - cfg.potential.gradient(&q_new) * (dt / 2.0);
    (q_new, p_new)
}

/// Exact kinetic flow of the width parameter: the Möbius/Riccati update
/// `C -> (C^{-1} + (tau/m) I)^{-1}` of `C = A + iB`.
fn moebius_update(c: &DMatrix<Complex64>, tau_over_m: f64) -> Result<DMatrix<Complex64>> {
    let d = c.nrows();
    let c_inv = c
        .clone_owned()
        .try_inverse()
        .ok_or_else(|| Error::numerical("width matrix C = A + iB is singular"))?;
    let shifted = c_inv + DMatrix::from_diagonal_element(d, d, Complex64::new(tau_over_m, 0.0));
    shifted
        .try_inverse()
        .ok_or_else(|| Error::numerical("Möbius denominator 1 + tau C / m is singular"))
}

fn split_complex(c: &DMatrix<Complex64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let a = crate::linalg::symmetrize(&c.map(|z| z.re));
    let b = crate::linalg::symmetrize(&c.map(|z| z.im));
    (a, b)
}

fn splitting_supported(cfg: &ModelConfig) -> Result<()> {
    if cfg.dim() == 1 || cfg.n.is_uniform() {
        Ok(())
    } else {
        Err(Error::invalid(
            "variational splitting needs d = 1 or a uniform multi-index; use rk4",
        ))
    }
}

fn splitting_step_inner(
    cfg: &ModelConfig,
    s: &ReducedState,
    dt: f64,
    corrections: bool,
) -> Result<ReducedState> {
    splitting_supported(cfg)?;
    let scale = 2.0 * cfg.n.get(0) as f64 + 1.0;
    let half = dt / 2.0;

    let kick = |q: &DVector<f64>, p: &DVector<f64>, b: &DMatrix<f64>| -> Result<DVector<f64>> {
        let grad = if corrections {
            corrected_potential_grad(cfg, q, b)?
        } else {
            cfg.potential.gradient(q)
        };
        Ok(p - grad * half)
    };

    // Potential half-flow: q and Bn frozen, constant right-hand sides.
    let b = &s.bn * scale;
    let p1 = kick(&s.q, &s.p, &b)?;
    let a1 = &s.a - cfg.potential.hessian(&s.q) * half;

    // Kinetic full-flow: drift plus the exact Möbius width update.
    let q2 = &s.q + &p1 * (dt / cfg.mass);
    let c = DMatrix::from_fn(s.dim(), s.dim(), |i, j| Complex64::new(a1[(i, j)], b[(i, j)]));
    let c2 = moebius_update(&c, dt / cfg.mass)?;
    let (a2, b2) = split_complex(&c2);
    let bn2 = &b2 / scale;

    // Potential half-flow at the new point.
    let p3 = kick(&q2, &p1, &b2)?;
    let a3 = &a2 - cfg.potential.hessian(&q2) * half;

    ReducedState::new(q2, p3, a3, bn2)
}

/// One Strang step `Phi^V_{dt/2} . Phi^T_dt . Phi^V_{dt/2}` of the reduced
/// system, with exact potential and kinetic subflows.
pub fn splitting_step(cfg: &ModelConfig, s: &ReducedState, dt: f64) -> Result<ReducedState> {
    splitting_step_inner(cfg, s, dt, true)
}

/// The splitting step with the order-hbar potential correction disabled; its
/// `(q, p)` component is exactly the Störmer-Verlet update.
pub fn splitting_step_classical_limit(
    cfg: &ModelConfig,
    s: &ReducedState,
    dt: f64,
) -> Result<ReducedState> {
    splitting_step_inner(cfg, s, dt, false)
}

/// One Strang step of the full parameter system, additionally carrying the
/// phase and norm variables. Inside the kinetic flow, `phi` and `delta`
/// integrate `p^2/2m - (hbar/2m) tr(Lambda B(t))` and `(hbar/2m) tr A(t)`
/// along the Möbius solution with a two-point Gauss rule; the potential
/// half-flows contribute `-V(q)` to `phi` exactly.
pub fn splitting_step_full(cfg: &ModelConfig, y: &PacketParams, dt: f64) -> Result<PacketParams> {
    splitting_supported(cfg)?;
    let half = dt / 2.0;
    let lam = lambda_matrix(&cfg.n);
    let m = cfg.mass;

    // Potential half-flow.
    let b1 = y.siegel.b().clone_owned();
    let p1 = &y.p - corrected_potential_grad(cfg, &y.q, &b1)? * half;
    let a1 = y.siegel.a() - cfg.potential.hessian(&y.q) * half;
    let phi1 = y.phi - cfg.potential.eval(&y.q) * half;

    // Kinetic full-flow.
    let q2 = &y.q + &p1 * (dt / m);
    let c = DMatrix::from_fn(y.dim(), y.dim(), |i, j| Complex64::new(a1[(i, j)], b1[(i, j)]));
    let gauss = [
        dt * (0.5 - 0.5 / 3.0_f64.sqrt()),
        dt * (0.5 + 0.5 / 3.0_f64.sqrt()),
    ];
    let mut trace_lb = 0.0;
    let mut trace_a = 0.0;
    for t in gauss {
        let ct = moebius_update(&c, t / m)?;
        let (at, bt) = split_complex(&ct);
        trace_lb += (&lam * bt).trace() * (dt / 2.0);
        trace_a += at.trace() * (dt / 2.0);
    }
    let phi2 = phi1 + dt * p1.dot(&p1) / (2.0 * m) - cfg.hbar / (2.0 * m) * trace_lb;
    let delta2 = y.delta + cfg.hbar / (2.0 * m) * trace_a;
    let c2 = moebius_update(&c, dt / m)?;
    let (a2, b2) = split_complex(&c2);

    // Potential half-flow at the new point.
    let p3 = &p1 - corrected_potential_grad(cfg, &q2, &b2)? * half;
    let a3 = &a2 - cfg.potential.hessian(&q2) * half;
    let phi3 = phi2 - cfg.potential.eval(&q2) * half;

    PacketParams::new(q2, p3, SiegelPoint::new(a3, b2)?, phi3, delta2)
}

/// Classical fourth-order Runge-Kutta step on flat coordinates.
pub fn rk4_step(
    field: impl Fn(&[f64]) -> Result<Vec<f64>>,
    state: &[f64],
    dt: f64,
) -> Result<Vec<f64>> {
    let axpy = |base: &[f64], coeff: f64, rate: &[f64]| -> Vec<f64> {
        base.iter()
            .zip(rate.iter())
            .map(|(s, r)| s + coeff * r)
            .collect()
    };
    let k1 = field(state)?;
    let k2 = field(&axpy(state, dt / 2.0, &k1))?;
    let k3 = field(&axpy(state, dt / 2.0, &k2))?;
    let k4 = field(&axpy(state, dt, &k3))?;
    let out: Vec<f64> = (0..state.len())
        .map(|i| state[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::numerical("RK4 produced a non-finite state"));
    }
    Ok(out)
}

/// Recorded trajectory of a fixed-step run.
#[derive(Debug, Clone)]
pub struct Trajectory<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
    pub energies: Vec<f64>,
    /// Squared packet norms; empty when the state does not carry `delta`.
    pub norms: Vec<f64>,
}

impl<S> Trajectory<S> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Classical phase-space state.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalState {
    pub q: DVector<f64>,
    pub p: DVector<f64>,
}

/// Propagate the classical system with Störmer-Verlet (or RK4 as reference).
pub fn propagate_classical(
    cfg: &ModelConfig,
    spec: &IntegratorSpec,
    q0: DVector<f64>,
    p0: DVector<f64>,
) -> Result<Trajectory<ClassicalState>> {
    let d = cfg.dim();
    if q0.len() != d || p0.len() != d {
        return Err(Error::dimension("initial state does not match model"));
    }
    let steps = spec.steps();
    let mut traj = Trajectory {
        times: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(steps + 1),
        energies: Vec::with_capacity(steps + 1),
        norms: Vec::new(),
    };
    let mut state = ClassicalState { q: q0, p: p0 };
    traj.times.push(0.0);
    traj.energies.push(classical_energy(cfg, &state.q, &state.p));
    traj.states.push(state.clone());
    for k in 0..steps {
        let t = (k + 1) as f64 * spec.dt;
        match spec.method {
            Method::StormerVerlet => {
                let (q, p) = stormer_verlet_step(cfg, &state.q, &state.p, spec.dt);
                state = ClassicalState { q, p };
            }
            Method::Rk4 => {
                let mut flat: Vec<f64> = state.q.iter().chain(state.p.iter()).copied().collect();
                flat = rk4_step(
                    |z| {
                        let q = DVector::from_column_slice(&z[..d]);
                        let p = DVector::from_column_slice(&z[d..]);
                        let (dq, dp) = crate::dynamics::classical_field(cfg, &q, &p);
                        Ok(dq.iter().chain(dp.iter()).copied().collect())
                    },
                    &flat,
                    spec.dt,
                )
                .map_err(|e| e.at_time(t))?;
                state = ClassicalState {
                    q: DVector::from_column_slice(&flat[..d]),
                    p: DVector::from_column_slice(&flat[d..]),
                };
            }
            Method::VariationalSplitting => {
                return Err(Error::invalid(
                    "variational splitting applies to packet states, not classical ones",
                ));
            }
        }
        traj.times.push(t);
        traj.energies.push(classical_energy(cfg, &state.q, &state.p));
        traj.states.push(state.clone());
    }
    Ok(traj)
}

/// Propagate the reduced packet system. `VariationalSplitting` falls back to
/// RK4 when no closed kinetic flow exists (d > 1 with non-uniform index).
pub fn propagate_reduced(
    cfg: &ModelConfig,
    spec: &IntegratorSpec,
    initial: ReducedState,
) -> Result<Trajectory<ReducedState>> {
    if initial.dim() != cfg.dim() {
        return Err(Error::dimension("initial state does not match model"));
    }
    let use_splitting = match spec.method {
        Method::VariationalSplitting => {
            if splitting_supported(cfg).is_ok() {
                true
            } else {
                log::warn!("non-uniform index in d > 1: falling back to RK4");
                false
            }
        }
        Method::Rk4 => false,
        Method::StormerVerlet => {
            return Err(Error::invalid(
                "Störmer-Verlet applies to the classical system; use variational_splitting or rk4",
            ));
        }
    };
    let d = cfg.dim();
    let steps = spec.steps();
    let mut traj = Trajectory {
        times: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(steps + 1),
        energies: Vec::with_capacity(steps + 1),
        norms: Vec::new(),
    };
    let mut state = initial;
    traj.times.push(0.0);
    traj.energies.push(reduced_hamiltonian(cfg, &state)?);
    traj.states.push(state.clone());
    for k in 0..steps {
        let t = (k + 1) as f64 * spec.dt;
        state = if use_splitting {
            splitting_step(cfg, &state, spec.dt).map_err(|e| e.at_time(t))?
        } else {
            let flat = rk4_step(
                |z| {
                    let s = ReducedState::from_flat(d, z)?;
                    Ok(reduced_field(cfg, &s)?.to_flat())
                },
                &state.to_flat(),
                spec.dt,
            )
            .map_err(|e| e.at_time(t))?;
            ReducedState::from_flat(d, &flat).map_err(|e| e.at_time(t))?
        };
        traj.times.push(t);
        traj.energies.push(reduced_hamiltonian(cfg, &state).map_err(|e| e.at_time(t))?);
        traj.states.push(state.clone());
    }
    Ok(traj)
}

/// Propagate the full parameter system, recording energy and packet norm.
pub fn propagate_full(
    cfg: &ModelConfig,
    spec: &IntegratorSpec,
    initial: PacketParams,
) -> Result<Trajectory<PacketParams>> {
    if initial.dim() != cfg.dim() {
        return Err(Error::dimension("initial state does not match model"));
    }
    let use_splitting = match spec.method {
        Method::VariationalSplitting => {
            splitting_supported(cfg)?;
            true
        }
        Method::Rk4 => false,
        Method::StormerVerlet => {
            return Err(Error::invalid(
                "Störmer-Verlet applies to the classical system; use variational_splitting or rk4",
            ));
        }
    };
    let d = cfg.dim();
    let steps = spec.steps();
    let mut traj = Trajectory {
        times: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(steps + 1),
        energies: Vec::with_capacity(steps + 1),
        norms: Vec::with_capacity(steps + 1),
    };
    let mut state = initial;
    traj.times.push(0.0);
    traj.energies.push(full_hamiltonian(cfg, &state)?);
    traj.norms.push(state.norm_squared(cfg.hbar));
    traj.states.push(state.clone());
    for k in 0..steps {
        let t = (k + 1) as f64 * spec.dt;
        state = if use_splitting {
            splitting_step_full(cfg, &state, spec.dt).map_err(|e| e.at_time(t))?
        } else {
            let flat = rk4_step(
                |z| {
                    let y = PacketParams::from_flat(d, z)?;
                    Ok(full_field(cfg, &y)?.to_flat())
                },
                &state.to_flat(),
                spec.dt,
            )
            .map_err(|e| e.at_time(t))?;
            PacketParams::from_flat(d, &flat).map_err(|e| e.at_time(t))?
        };
        traj.times.push(t);
        traj.energies
            .push(full_hamiltonian(cfg, &state).map_err(|e| e.at_time(t))?);
        traj.norms.push(state.norm_squared(cfg.hbar));
        traj.states.push(state.clone());
    }
    Ok(traj)
}
