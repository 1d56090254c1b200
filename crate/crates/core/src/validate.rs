//! Cross-module verification suites: quadrature identities, conservation
//! laws, Hamiltonian-structure consistency, the Wigner-transform oracle, and
//! integrator-order checks. The CLI `validate` subcommand and the acceptance
//! tests both run these.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{
    full_field, full_hamiltonian, reduced_field, reduced_hamiltonian, ModelConfig, ReducedState,
    ReducedTangent,
};
use crate::error::Result;
use crate::fd;
use crate::geometry::{omega_n, omega_reduced, omega_reduced_matrix};
use crate::grid::{derivative_1d, eval_packet_grid, inner_product, Grid};
use crate::integrators::{
    propagate_full, rk4_step, splitting_step, splitting_step_classical_limit, stormer_verlet_step,
    IntegratorSpec, Method,
};
use crate::multi_index::MultiIndex;
use crate::packet::{normalizing_delta, PacketParams, TangentVector};
use crate::potential::PolynomialPotential;

/// Outcome of one named check: the worst measured value against its bound.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckResult {
    fn new(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        let pass = measured.is_finite() && measured <= tolerance;
        CheckResult {
            name: name.into(),
            measured,
            tolerance,
            pass,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "[{}] {}: measured {:.3e}, tolerance {:.3e}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.tolerance
        )
    }
}

/// Deliberate faults for validator sensitivity tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fault {
    None,
    /// Replace the `hbar/4` coefficient of the corrected-potential gradient.
    CorrectedPotentialCoeff(f64),
}

fn escape_cfg(hbar: f64, n: usize) -> ModelConfig {
    ModelConfig::new(
        hbar,
        1.0,
        MultiIndex::scalar(n),
        PolynomialPotential::cubic_well(),
    )
    .expect("static parameters")
}

fn normalized_packet_1d(hbar: f64, q: f64, p: f64, a: f64, b: f64, phi: f64) -> PacketParams {
    let delta = normalizing_delta(&DMatrix::from_element(1, 1, b), hbar);
    PacketParams::scalar(q, p, a, b, phi, delta).expect("valid packet")
}

/// Packet/quadrature identities: orthonormality, center moments, and the
/// squared-width identity `<(x-q)^2> = (hbar/2)(2n+1)/B`.
pub fn packet_quadrature_suite() -> Result<Vec<CheckResult>> {
    let hbar = 0.05;
    let (q0, p0, a0, b0) = (0.25, 1.0, 0.3, 1.2);
    let y = normalized_packet_1d(hbar, q0, p0, a0, b0, 0.0);
    let top = MultiIndex::scalar(10);
    let grid = Grid::for_packet(&y, &top, hbar, 8192)?;
    let states: Vec<Vec<num_complex::Complex64>> = (0..=10)
        .map(|n| eval_packet_grid(&y, &MultiIndex::scalar(n), hbar, grid.points()))
        .collect::<Result<_>>()?;

    let mut worst_orth = 0.0_f64;
    for m in 0..=10usize {
        for n in 0..=10usize {
            let ip = inner_product(&states[m], &states[n], &grid)?;
            let target = if m == n { 1.0 } else { 0.0 };
            worst_orth = worst_orth.max((ip.re - target).abs()).max(ip.im.abs());
        }
    }

    let dx = grid.spacing_1d();
    let coords = grid.coords_1d();
    let mut worst_x = 0.0_f64;
    let mut worst_p = 0.0_f64;
    let mut worst_width = 0.0_f64;
    for (n, f) in states.iter().enumerate() {
        let xf: Vec<_> = coords.iter().zip(f.iter()).map(|(x, v)| v * *x).collect();
        let mean_x = inner_product(f, &xf, &grid)?.re;
        worst_x = worst_x.max((mean_x - q0).abs());

        let df = derivative_1d(f, dx);
        let pf: Vec<_> = df
            .iter()
            .map(|v| v * num_complex::Complex64::new(0.0, -hbar))
            .collect();
        let mean_p = inner_product(f, &pf, &grid)?.re;
        worst_p = worst_p.max((mean_p - p0).abs());

        let x2f: Vec<_> = coords
            .iter()
            .zip(f.iter())
            .map(|(x, v)| v * (x - q0) * (x - q0))
            .collect();
        let mean_x2 = inner_product(f, &x2f, &grid)?.re;
        let target = hbar / 2.0 * (2.0 * n as f64 + 1.0) / b0;
        worst_width = worst_width.max((mean_x2 - target).abs());
    }

    Ok(vec![
        CheckResult::new("orthonormality <chi_m, chi_n> (m,n <= 10)", worst_orth, 1e-8),
        CheckResult::new("position expectation <x> = q", worst_x, 1e-6),
        CheckResult::new("momentum expectation <p> = p", worst_p, 1e-6),
        CheckResult::new("width identity <(x-q)^2> = (hbar/2)(2n+1)/B", worst_width, 1e-7),
    ])
}

/// Conservation checks: packet norm and momentum map along full-system RK4
/// runs, and reduced-energy drift of the splitting integrator.
pub fn conservation_suite() -> Result<Vec<CheckResult>> {
    let mut results = Vec::new();

    // Norm and momentum map along RK4, dt = 1e-3, t <= 1.
    let mut worst_norm = 0.0_f64;
    let mut worst_j = 0.0_f64;
    for (hbar, n) in [(0.05, 1usize), (0.05, 5), (0.025, 10)] {
        let cfg = escape_cfg(hbar, n);
        let y0 = normalized_packet_1d(hbar, 0.25, 1.0, 0.0, 1.0, 0.0);
        let spec = IntegratorSpec::new(Method::Rk4, 1e-3, 1.0)?;
        let traj = propagate_full(&cfg, &spec, y0)?;
        let n0 = traj.norms[0];
        for nk in &traj.norms {
            worst_norm = worst_norm.max((nk - n0).abs());
            worst_j = worst_j.max((-hbar * nk - (-hbar * n0)).abs());
        }
    }
    results.push(CheckResult::new(
        "norm N(B, delta) constant along full RK4 flow",
        worst_norm,
        1e-9,
    ));
    results.push(CheckResult::new(
        "momentum map -hbar N constant along full RK4 flow",
        worst_j,
        1e-9,
    ));

    // Reduced-energy drift of the splitting over one period, dt = 1e-3.
    let mut worst_drift = 0.0_f64;
    for hbar in [0.05, 0.025, 0.01] {
        for n in 0..=5usize {
            let cfg = escape_cfg(hbar, n);
            let mut s = ReducedState::scalar(0.25, 1.0, 0.0, 1.0 / (2.0 * n as f64 + 1.0))?;
            let h0 = reduced_hamiltonian(&cfg, &s)?;
            for _ in 0..3390 {
                s = splitting_step(&cfg, &s, 1e-3)?;
                worst_drift = worst_drift.max((reduced_hamiltonian(&cfg, &s)? - h0).abs());
            }
        }
    }
    results.push(CheckResult::new(
        "splitting energy drift over one period (n <= 5, hbar <= 0.05)",
        worst_drift,
        1e-4,
    ));
    Ok(results)
}

fn random_full_tangent(rng: &mut ChaCha8Rng) -> TangentVector {
    TangentVector::from_flat(
        1,
        &(0..crate::packet::flat_len(1))
            .map(|_| rng.random_range(-1.0..1.0))
            .collect::<Vec<_>>(),
    )
    .expect("basis length")
}

/// Hamiltonian-structure consistency: `Omega(X_H, v) = dH(v)` with
/// finite-difference differentials, on both the full and reduced systems.
pub fn hamiltonian_consistency_suite(fault: Fault) -> Result<Vec<CheckResult>> {
    let hbar = 0.05;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_full = 0.0_f64;
    let mut worst_reduced = 0.0_f64;

    for _ in 0..50 {
        let n = rng.random_range(0..=6usize);
        let cfg = escape_cfg(hbar, n);
        let y = {
            let b = rng.random_range(0.5..2.0);
            let delta_off = rng.random_range(-0.01..0.01);
            let delta = normalizing_delta(&DMatrix::from_element(1, 1, b), hbar) + delta_off;
            PacketParams::scalar(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                b,
                rng.random_range(-1.0..1.0),
                delta,
            )?
        };
        let mut x = full_field(&cfg, &y)?;
        if let Fault::CorrectedPotentialCoeff(coeff) = fault {
            let bn = crate::packet::b_n_matrix(y.siegel.b(), &cfg.n)?;
            let bn_inv = bn.clone().try_inverse().expect("positive definite");
            x.dp = -(cfg.potential.gradient(&y.q)
                + cfg.potential.third_contract(&y.q, &bn_inv) * coeff);
        }
        let v = random_full_tangent(&mut rng);
        let dh = fd::directional(
            |t| full_hamiltonian(&cfg, &y.shifted(&v, t).expect("small shift")).expect("H"),
            fd::DEFAULT_STEP,
        );
        let om = omega_n(&cfg, &y, &x, &v)?;
        worst_full = worst_full.max((om - dh).abs() / dh.abs().max(1e-9));

        let s = ReducedState::from_siegel(
            y.q.clone(),
            y.p.clone(),
            y.siegel.a().clone_owned(),
            y.siegel.b().clone_owned(),
            &cfg.n,
        )?;
        let mut xr = reduced_field(&cfg, &s)?;
        if let Fault::CorrectedPotentialCoeff(coeff) = fault {
            let bn_inv = s.bn.clone().try_inverse().expect("positive definite");
            xr.dp = -(cfg.potential.gradient(&s.q)
                + cfg.potential.third_contract(&s.q, &bn_inv) * coeff);
        }
        let vr = ReducedTangent::from_flat(
            1,
            &(0..4).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<_>>(),
        )?;
        let dh = fd::directional(
            |t| {
                reduced_hamiltonian(&cfg, &s.shifted(&vr, t).expect("small shift")).expect("H")
            },
            fd::DEFAULT_STEP,
        );
        let om = omega_reduced(&cfg, &s, &xr, &vr)?;
        worst_reduced = worst_reduced.max((om - dh).abs() / dh.abs().max(1e-9));
    }

    Ok(vec![
        CheckResult::new(
            "full system: Omega(X_H, v) = dH(v), relative",
            worst_full,
            1e-6,
        ),
        CheckResult::new(
            "reduced system: Omega(X_H, v) = dH(v), relative",
            worst_reduced,
            1e-6,
        ),
    ])
}

/// Sampled Wigner density against the direct numerical Wigner transform on a
/// 60 x 60 phase-space grid for n <= 4, hbar = 0.05.
pub fn wigner_oracle_suite() -> Result<Vec<CheckResult>> {
    let hbar = 0.05;
    let mut worst = 0.0_f64;
    for n in 0..=4usize {
        let cfg = escape_cfg(hbar, n);
        let y = normalized_packet_1d(hbar, 0.25, 1.0, 0.0, 1.0, 0.0);
        let r = (hbar * (2.0 * n as f64 + 1.0)).sqrt() * 4.0;
        let xs: Vec<f64> = (0..60).map(|i| 0.25 - r + 2.0 * r * i as f64 / 59.0).collect();
        let xis: Vec<f64> = (0..60).map(|i| 1.0 - r + 2.0 * r * i as f64 / 59.0).collect();
        let numeric = crate::egorov::wigner_transform_1d(&cfg, &y, &xs, &xis, 4096)?;
        for (i, &x) in xs.iter().enumerate() {
            for (j, &xi) in xis.iter().enumerate() {
                let z = DVector::from_column_slice(&[x, xi]);
                let (g, w) = crate::egorov::wigner_weight(&cfg, &y, &z)?;
                worst = worst.max((numeric[(i, j)] - g * w).abs());
            }
        }
    }
    Ok(vec![CheckResult::new(
        "sampled Wigner density vs numerical transform (n <= 4)",
        worst,
        1e-4,
    )])
}

/// Integrator-order and structure checks: RK4 convergence order, splitting
/// symplecticity, and the classical (hbar -> 0) limit of the splitting.
pub fn integrator_suite() -> Result<Vec<CheckResult>> {
    let mut results = Vec::new();

    // RK4: halving dt shrinks the endpoint error ~16x.
    {
        let cfg = escape_cfg(0.05, 3);
        let s0 = ReducedState::scalar(0.25, 1.0, 0.0, 1.0 / 7.0)?;
        let endpoint = |dt: f64| -> Result<Vec<f64>> {
            let mut flat = s0.to_flat();
            for _ in 0..(1.0 / dt).round() as usize {
                flat = rk4_step(
                    |z| Ok(reduced_field(&cfg, &ReducedState::from_flat(1, z)?)?.to_flat()),
                    &flat,
                    dt,
                )?;
            }
            Ok(flat)
        };
        let reference = endpoint(1.25e-4)?;
        let err = |flat: &[f64]| -> f64 {
            flat.iter()
                .zip(reference.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        };
        let e1 = err(&endpoint(0.02)?);
        let e2 = err(&endpoint(0.01)?);
        let order = (e1 / e2).log2();
        results.push(CheckResult::new(
            "RK4 convergence order deviation from 4",
            (order - 4.0).abs(),
            0.5,
        ));
    }

    // Symplecticity of one splitting step: DPhi^T Omega(Phi(s)) DPhi = Omega(s).
    {
        let mut worst = 0.0_f64;
        let dt = 0.01;
        let h = fd::DEFAULT_STEP;
        for (hbar, n, state) in [
            (0.05, 1usize, ReducedState::scalar(0.25, 1.0, 0.0, 1.0 / 3.0)?),
            (0.05, 5, ReducedState::scalar(0.25, 1.0, 0.0, 1.0 / 11.0)?),
            (0.025, 3, ReducedState::scalar(-0.4, 0.3, 0.5, 0.9 / 7.0)?),
        ] {
            let cfg = escape_cfg(hbar, n);
            let flat0 = state.to_flat();
            let dim = flat0.len();
            let step_flat = |z: &[f64]| -> Vec<f64> {
                splitting_step(&cfg, &ReducedState::from_flat(1, z).expect("state"), dt)
                    .expect("step")
                    .to_flat()
            };
            // Finite-difference Jacobian, column by column.
            let mut jac = DMatrix::<f64>::zeros(dim, dim);
            for c in 0..dim {
                for r in 0..dim {
                    let g = |t: f64| {
                        let mut z = flat0.clone();
                        z[c] += t;
                        step_flat(&z)[r]
                    };
                    jac[(r, c)] = fd::directional(g, h);
                }
            }
            let omega0 = omega_reduced_matrix(&cfg, &state)?;
            let stepped = splitting_step(&cfg, &state, dt)?;
            let omega1 = omega_reduced_matrix(&cfg, &stepped)?;
            let defect = jac.transpose() * omega1 * &jac - omega0;
            worst = worst.max(defect.amax());
        }
        results.push(CheckResult::new(
            "splitting step preserves reduced symplectic form",
            worst,
            1e-6,
        ));
    }

    // Classical limit: corrections off, (q, p) matches Störmer-Verlet.
    {
        let cfg = escape_cfg(0.05, 4);
        let mut s = ReducedState::scalar(0.25, 1.0, 0.0, 1.0 / 9.0)?;
        let mut q = DVector::from_element(1, 0.25);
        let mut p = DVector::from_element(1, 1.0);
        let mut worst = 0.0_f64;
        for _ in 0..339 {
            s = splitting_step_classical_limit(&cfg, &s, 0.01)?;
            let (qn, pn) = stormer_verlet_step(&cfg, &q, &p, 0.01);
            q = qn;
            p = pn;
            worst = worst.max((s.q[0] - q[0]).abs()).max((s.p[0] - p[0]).abs());
        }
        results.push(CheckResult::new(
            "splitting classical limit equals Störmer-Verlet",
            worst,
            1e-14,
        ));
    }

    Ok(results)
}

/// Run every suite, printing one line per check. Returns all results.
pub fn run_all() -> Result<Vec<CheckResult>> {
    let mut all = Vec::new();
    all.extend(packet_quadrature_suite()?);
    all.extend(conservation_suite()?);
    all.extend(hamiltonian_consistency_suite(Fault::None)?);
    all.extend(wigner_oracle_suite()?);
    all.extend(integrator_suite()?);
    Ok(all)
}

/// Norm-constancy helper used by conservation tests: max |N(t) - N(0)| along
/// a full-system RK4 trajectory.
pub fn norm_drift_full_rk4(cfg: &ModelConfig, y0: PacketParams, dt: f64, t_final: f64) -> Result<f64> {
    let spec = IntegratorSpec::new(Method::Rk4, dt, t_final)?;
    let traj = propagate_full(cfg, &spec, y0)?;
    let n0 = traj.norms[0];
    Ok(traj
        .norms
        .iter()
        .map(|n| (n - n0).abs())
        .fold(0.0, f64::max))
}
