//! Experiment orchestration: the classical / semiclassical / phase-space
//! comparison runs and their artifact files.

use std::path::PathBuf;

use crate::config::ExperimentConfig;
use crate::dynamics::ReducedState;
use crate::egorov::{egorov_expectations, sample_ensemble, ExpectationSeries};
use crate::error::Result;
use crate::grid::{eval_packet_grid, write_samples_csv, Grid};
use crate::integrators::{
    propagate_classical, propagate_reduced, ClassicalState, IntegratorSpec, Method, Trajectory,
};
use crate::output::{
    to_file, write_classical_csv, write_energies_csv, write_expectations_csv, write_reduced_csv,
    write_svg_plot, Curve,
};

/// Run the classical leg with Störmer-Verlet and write `classical.csv`.
pub fn run_classical(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let traj = classical_trajectory(cfg)?;
    to_file(&cfg.output_dir, "classical.csv", |w| {
        write_classical_csv(w, &traj)
    })?;
    Ok(vec![cfg.output_dir.join("classical.csv")])
}

/// Run the reduced packet leg and write `semiclassical.csv`.
pub fn run_semiclassical(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let traj = reduced_trajectory(cfg)?;
    to_file(&cfg.output_dir, "semiclassical.csv", |w| {
        write_reduced_csv(w, &traj)
    })?;
    Ok(vec![cfg.output_dir.join("semiclassical.csv")])
}

/// Run the ensemble leg and write `egorov.csv`.
pub fn run_egorov(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let series = egorov_series(cfg)?;
    to_file(&cfg.output_dir, "egorov.csv", |w| {
        write_expectations_csv(w, &series)
    })?;
    Ok(vec![cfg.output_dir.join("egorov.csv")])
}

/// Evaluate the initial packet on its quadrature grid and write `packet.csv`.
pub fn run_packet_eval(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let y = cfg.initial_packet()?;
    let grid = Grid::for_packet(&y, &cfg.model.n, cfg.model.hbar, 4096)?;
    let samples = eval_packet_grid(&y, &cfg.model.n, cfg.model.hbar, grid.points())?;
    to_file(&cfg.output_dir, "packet.csv", |w| {
        write_samples_csv(w, &grid, &samples)
    })?;
    Ok(vec![cfg.output_dir.join("packet.csv")])
}

/// Run all three legs, write the four CSV artifacts, and (optionally) the
/// phase-space and energy SVG plots.
pub fn run_compare(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let classical = classical_trajectory(cfg)?;
    let reduced = reduced_trajectory(cfg)?;
    let egorov = egorov_series(cfg)?;

    let mut files = Vec::new();
    let out = &cfg.output_dir;
    to_file(out, "classical.csv", |w| write_classical_csv(w, &classical))?;
    files.push(out.join("classical.csv"));
    to_file(out, "semiclassical.csv", |w| write_reduced_csv(w, &reduced))?;
    files.push(out.join("semiclassical.csv"));
    to_file(out, "egorov.csv", |w| write_expectations_csv(w, &egorov))?;
    files.push(out.join("egorov.csv"));
    to_file(out, "energies.csv", |w| {
        write_energies_csv(w, &classical, &reduced, Some(&egorov))
    })?;
    files.push(out.join("energies.csv"));

    if cfg.plots {
        to_file(out, "phase_space.svg", |w| {
            write_svg_plot(
                w,
                "Phase space: classical vs semiclassical vs ensemble means",
                "q",
                "p",
                &[
                    Curve {
                        label: "classical",
                        color: "#2244bb",
                        dash: Some("2 3"),
                        points: classical
                            .states
                            .iter()
                            .map(|s: &ClassicalState| (s.q[0], s.p[0]))
                            .collect(),
                    },
                    Curve {
                        label: "semiclassical",
                        color: "#bb2222",
                        dash: None,
                        points: reduced.states.iter().map(|s| (s.q[0], s.p[0])).collect(),
                    },
                    Curve {
                        label: "egorov",
                        color: "#22aa44",
                        dash: Some("7 4"),
                        points: egorov
                            .times
                            .iter()
                            .enumerate()
                            .map(|(k, _)| (egorov.mean_q[k][0], egorov.mean_p[k][0]))
                            .collect(),
                    },
                ],
            )
        })?;
        files.push(out.join("phase_space.svg"));
        to_file(out, "energy.svg", |w| {
            write_svg_plot(
                w,
                "Total energy along each run",
                "t",
                "energy",
                &[
                    Curve {
                        label: "classical",
                        color: "#2244bb",
                        dash: Some("2 3"),
                        points: classical
                            .times
                            .iter()
                            .zip(classical.energies.iter())
                            .map(|(&t, &e)| (t, e))
                            .collect(),
                    },
                    Curve {
                        label: "semiclassical",
                        color: "#bb2222",
                        dash: None,
                        points: reduced
                            .times
                            .iter()
                            .zip(reduced.energies.iter())
                            .map(|(&t, &e)| (t, e))
                            .collect(),
                    },
                    Curve {
                        label: "egorov",
                        color: "#22aa44",
                        dash: Some("7 4"),
                        points: egorov
                            .times
                            .iter()
                            .zip(egorov.mean_energy.iter())
                            .map(|(&t, &e)| (t, e))
                            .collect(),
                    },
                ],
            )
        })?;
        files.push(out.join("energy.svg"));
    }
    Ok(files)
}

fn classical_trajectory(cfg: &ExperimentConfig) -> Result<Trajectory<ClassicalState>> {
    let spec = IntegratorSpec::new(
        Method::StormerVerlet,
        cfg.integrator.dt,
        cfg.integrator.t_final,
    )?;
    propagate_classical(&cfg.model, &spec, cfg.q0.clone(), cfg.p0.clone())
}

fn reduced_trajectory(cfg: &ExperimentConfig) -> Result<Trajectory<ReducedState>> {
    let method = match cfg.integrator.method {
        Method::StormerVerlet => Method::VariationalSplitting,
        m => m,
    };
    let spec = IntegratorSpec::new(method, cfg.integrator.dt, cfg.integrator.t_final)?;
    propagate_reduced(&cfg.model, &spec, cfg.initial_reduced()?)
}

fn egorov_series(cfg: &ExperimentConfig) -> Result<ExpectationSeries> {
    let y = cfg.initial_packet()?;
    let ensemble = sample_ensemble(&cfg.model, &y, cfg.egorov_samples, cfg.egorov_seed)?;
    let spec = IntegratorSpec::new(
        Method::StormerVerlet,
        cfg.integrator.dt,
        cfg.integrator.t_final,
    )?;
    egorov_expectations(&cfg.model, &ensemble, &spec)
}
