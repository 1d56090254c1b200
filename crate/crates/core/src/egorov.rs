//! Phase-space reference engine: signed Wigner sampling of packet initial
//! states, ensemble propagation under the classical flow, and self-normalized
//! expectation estimators.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::dynamics::ModelConfig;
use crate::error::{Error, Result};
use crate::grid::eval_packet_grid;
use crate::integrators::{IntegratorSpec, Method};
use crate::packet::PacketParams;
use crate::siegel::{symplectic_from_siegel, symplectic_inverse_apply};

/// Points beyond this phase-space radius are flagged divergent and excluded.
pub const DIVERGENCE_RADIUS: f64 = 1e6;

/// Chunk size for the deterministic parallel reduction.
const CHUNK: usize = 8192;

/// Laguerre polynomial `L_n(x)` by the three-term recurrence
/// `(k+1) L_{k+1} = (2k+1-x) L_k - k L_{k-1}`.
pub fn laguerre(n: usize, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = 1.0 - x;
    for k in 1..n {
        let next = ((2.0 * k as f64 + 1.0 - x) * cur - k as f64 * prev) / (k as f64 + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Gaussian envelope and signed Laguerre weight of the packet's Wigner
/// function at a phase-space point `z = (x, xi)`.
///
/// With `S` the symplectic matrix of the packet width and `w = S^{-1}(z - (q, p))`,
/// the envelope is `g(z) = (pi hbar)^{-d} exp(-|w|^2 / hbar)` and the weight is
/// `prod_j (-1)^{n_j} L_{n_j}(2 (w_j^2 + w_{j+d}^2) / hbar)`, so that the Wigner
/// function is `W_n(z) = g(z) * weight(z)`.
pub fn wigner_weight(cfg: &ModelConfig, y: &PacketParams, z: &DVector<f64>) -> Result<(f64, f64)> {
    check_normalized(cfg, y)?;
    let d = cfg.dim();
    if z.len() != 2 * d {
        return Err(Error::dimension("phase-space point must have length 2d"));
    }
    let mut centered = z.clone_owned();
    for i in 0..d {
        centered[i] -= y.q[i];
        centered[d + i] -= y.p[i];
    }
    let w = symplectic_inverse_apply(&y.siegel, &centered)?;
    Ok((gaussian_envelope(cfg.hbar, d, &w), laguerre_weight(cfg, &w)))
}

fn gaussian_envelope(hbar: f64, d: usize, w: &DVector<f64>) -> f64 {
    (std::f64::consts::PI * hbar).powi(-(d as i32)) * (-w.dot(w) / hbar).exp()
}

fn laguerre_weight(cfg: &ModelConfig, w: &DVector<f64>) -> f64 {
    let d = cfg.dim();
    let mut weight = 1.0;
    for j in 0..d {
        let nj = cfg.n.get(j);
        let r2 = w[j] * w[j] + w[d + j] * w[d + j];
        let sign = if nj % 2 == 0 { 1.0 } else { -1.0 };
        weight *= sign * laguerre(nj, 2.0 * r2 / cfg.hbar);
    }
    weight
}

fn check_normalized(cfg: &ModelConfig, y: &PacketParams) -> Result<()> {
    let n2 = y.norm_squared(cfg.hbar);
    if (n2 - 1.0).abs() > 1e-8 {
        return Err(Error::invalid(format!(
            "packet must be normalized for phase-space sampling (norm^2 = {n2})"
        )));
    }
    Ok(())
}

/// Signed-weight phase-space samples of a packet's Wigner distribution.
#[derive(Debug, Clone)]
pub struct WeightedEnsemble {
    pub points: Vec<DVector<f64>>,
    pub weights: Vec<f64>,
    pub seed: u64,
}

impl WeightedEnsemble {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Self-normalized mean of an observable with its delta-method standard
    /// error.
    pub fn weighted_moment(&self, f: impl Fn(&DVector<f64>) -> f64) -> (f64, f64) {
        let values: Vec<f64> = self.points.iter().map(f).collect();
        let sum_w: f64 = self.weights.iter().sum();
        let mean = self
            .weights
            .iter()
            .zip(values.iter())
            .map(|(w, v)| w * v)
            .sum::<f64>()
            / sum_w;
        let var = self
            .weights
            .iter()
            .zip(values.iter())
            .map(|(w, v)| (w * (v - mean)).powi(2))
            .sum::<f64>()
            / (sum_w * sum_w);
        (mean, var.sqrt())
    }

    /// `(sum w)^2 / sum w^2`, the effective number of samples.
    pub fn effective_sample_size(&self) -> f64 {
        let sum: f64 = self.weights.iter().sum();
        let sum2: f64 = self.weights.iter().map(|w| w * w).sum();
        sum * sum / sum2
    }
}

/// Draw `count` phase-space points for the packet's Wigner distribution.
///
/// The `w`-coordinates are centered Gaussians with per-component variance
/// `hbar/2`, mapped through `z = (q, p) + S w`; each sample stores its signed
/// Laguerre weight. Deterministic for a given seed.
pub fn sample_ensemble(
    cfg: &ModelConfig,
    y: &PacketParams,
    count: usize,
    seed: u64,
) -> Result<WeightedEnsemble> {
    check_normalized(cfg, y)?;
    if count == 0 {
        return Err(Error::invalid("sample count must be at least 1"));
    }
    let d = cfg.dim();
    let s = symplectic_from_siegel(&y.siegel)?;
    let mut center = DVector::<f64>::zeros(2 * d);
    center.rows_mut(0, d).copy_from(&y.q);
    center.rows_mut(d, d).copy_from(&y.p);

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let sigma = (cfg.hbar / 2.0).sqrt();
    let mut points = Vec::with_capacity(count);
    let mut weights = Vec::with_capacity(count);
    for _ in 0..count {
        let w = DVector::from_fn(2 * d, |_, _| {
            sigma * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng)
        });
        points.push(&center + &s * &w);
        weights.push(laguerre_weight(cfg, &w));
    }
    let mean_weight = weights.iter().sum::<f64>() / count as f64;
    if mean_weight <= 0.0 {
        log::warn!(
            "ensemble mean weight {mean_weight:.3} is not positive; the sample count is too small \
             for index {} at hbar = {}",
            cfg.n,
            cfg.hbar
        );
    }
    Ok(WeightedEnsemble {
        points,
        weights,
        seed,
    })
}

/// Self-normalized expectation values along the classically propagated
/// ensemble.
#[derive(Debug, Clone)]
pub struct ExpectationSeries {
    pub times: Vec<f64>,
    pub mean_q: Vec<DVector<f64>>,
    pub mean_p: Vec<DVector<f64>>,
    pub stderr_q: Vec<DVector<f64>>,
    pub stderr_p: Vec<DVector<f64>>,
    pub mean_energy: Vec<f64>,
    pub effective_samples: Vec<f64>,
    /// Trajectories excluded after leaving the divergence radius.
    pub excluded: usize,
}

struct PartialSums {
    w: f64,
    w2: f64,
    wq: DVector<f64>,
    wp: DVector<f64>,
    w2q: DVector<f64>,
    w2p: DVector<f64>,
    w2q2: DVector<f64>,
    w2p2: DVector<f64>,
    we: f64,
    excluded: usize,
}

impl PartialSums {
    fn zero(d: usize) -> Self {
        PartialSums {
            w: 0.0,
            w2: 0.0,
            wq: DVector::zeros(d),
            wp: DVector::zeros(d),
            w2q: DVector::zeros(d),
            w2p: DVector::zeros(d),
            w2q2: DVector::zeros(d),
            w2p2: DVector::zeros(d),
            we: 0.0,
            excluded: 0,
        }
    }

    fn absorb(&mut self, other: PartialSums) {
        self.w += other.w;
        self.w2 += other.w2;
        self.wq += other.wq;
        self.wp += other.wp;
        self.w2q += other.w2q;
        self.w2p += other.w2p;
        self.w2q2 += other.w2q2;
        self.w2p2 += other.w2p2;
        self.we += other.we;
        self.excluded += other.excluded;
    }
}

/// Propagate the ensemble with Störmer-Verlet under the classical flow and
/// record self-normalized means of position, momentum, and classical energy.
///
/// Points are partitioned into fixed chunks with an ordered reduction, so the
/// result is bit-identical for a given ensemble regardless of thread count.
pub fn egorov_expectations(
    cfg: &ModelConfig,
    ensemble: &WeightedEnsemble,
    spec: &IntegratorSpec,
) -> Result<ExpectationSeries> {
    if spec.method != Method::StormerVerlet {
        return Err(Error::invalid(
            "ensemble propagation uses the Störmer-Verlet method",
        ));
    }
    let d = cfg.dim();
    let count = ensemble.len();
    if count == 0 {
        return Err(Error::invalid("empty ensemble"));
    }

    // Flat per-point state: (q, p) pairs, plus an alive flag.
    let mut states: Vec<(DVector<f64>, DVector<f64>)> = ensemble
        .points
        .iter()
        .map(|z| (z.rows(0, d).clone_owned(), z.rows(d, d).clone_owned()))
        .collect();
    let mut alive = vec![true; count];

    let steps = spec.steps();
    let mut series = ExpectationSeries {
        times: Vec::with_capacity(steps + 1),
        mean_q: Vec::with_capacity(steps + 1),
        mean_p: Vec::with_capacity(steps + 1),
        stderr_q: Vec::with_capacity(steps + 1),
        stderr_p: Vec::with_capacity(steps + 1),
        mean_energy: Vec::with_capacity(steps + 1),
        effective_samples: Vec::with_capacity(steps + 1),
        excluded: 0,
    };

    let record = |series: &mut ExpectationSeries,
                  t: f64,
                  states: &[(DVector<f64>, DVector<f64>)],
                  alive: &[bool]|
     -> Result<()> {
        let totals = states
            .par_chunks(CHUNK)
            .zip(ensemble.weights.par_chunks(CHUNK))
            .zip(alive.par_chunks(CHUNK))
            .map(|((chunk, weights), alive)| {
                let mut acc = PartialSums::zero(d);
                for ((qp, &w), &ok) in chunk.iter().zip(weights.iter()).zip(alive.iter()) {
                    if !ok {
                        acc.excluded += 1;
                        continue;
                    }
                    let (q, p) = qp;
                    acc.w += w;
                    acc.w2 += w * w;
                    acc.we += w * crate::dynamics::classical_energy(cfg, q, p);
                    for i in 0..d {
                        acc.wq[i] += w * q[i];
                        acc.wp[i] += w * p[i];
                        acc.w2q[i] += w * w * q[i];
                        acc.w2p[i] += w * w * p[i];
                        acc.w2q2[i] += w * w * q[i] * q[i];
                        acc.w2p2[i] += w * w * p[i] * p[i];
                    }
                }
                acc
            })
            .collect::<Vec<_>>()
            .into_iter()
            .fold(PartialSums::zero(d), |mut a, b| {
                a.absorb(b);
                a
            });
        if totals.w <= 0.0 {
            return Err(Error::numerical(format!(
                "self-normalization denominator {:.3e} is not positive at t = {t}; \
                 more samples are needed for this index",
                totals.w
            )));
        }
        let ratio_err = |w2v2: f64, w2v: f64, mean: f64| -> f64 {
            let var = (w2v2 - 2.0 * mean * w2v + mean * mean * totals.w2) / (totals.w * totals.w);
            var.max(0.0).sqrt()
        };
        let mean_q = &totals.wq / totals.w;
        let mean_p = &totals.wp / totals.w;
        series.stderr_q.push(DVector::from_fn(d, |i, _| {
            ratio_err(totals.w2q2[i], totals.w2q[i], mean_q[i])
        }));
        series.stderr_p.push(DVector::from_fn(d, |i, _| {
            ratio_err(totals.w2p2[i], totals.w2p[i], mean_p[i])
        }));
        series.times.push(t);
        series.mean_q.push(mean_q);
        series.mean_p.push(mean_p);
        series.mean_energy.push(totals.we / totals.w);
        series
            .effective_samples
            .push(totals.w * totals.w / totals.w2);
        series.excluded = totals.excluded;
        Ok(())
    };

    record(&mut series, 0.0, &states, &alive)?;
    for k in 0..steps {
        let t = (k + 1) as f64 * spec.dt;
        let dt = spec.dt;
        states
            .par_chunks_mut(CHUNK)
            .zip(alive.par_chunks_mut(CHUNK))
            .for_each(|(chunk, alive)| {
                let mut grad = DVector::<f64>::zeros(d);
                for (qp, ok) in chunk.iter_mut().zip(alive.iter_mut()) {
                    if !*ok {
                        continue;
                    }
                    // In-place Störmer-Verlet kick-drift-kick (allocation-free;
                    // checked against `stormer_verlet_step` bit for bit).
                    let (q, p) = qp;
                    cfg.potential.gradient_into(q, &mut grad);
                    for i in 0..d {
                        p[i] -= grad[i] * (dt / 2.0);
                    }
                    for i in 0..d {
                        q[i] += p[i] * (dt / cfg.mass);
                    }
                    cfg.potential.gradient_into(q, &mut grad);
                    for i in 0..d {
                        p[i] -= grad[i] * (dt / 2.0);
                    }
                    if q.norm_squared() + p.norm_squared() > DIVERGENCE_RADIUS * DIVERGENCE_RADIUS
                    {
                        *ok = false;
                    }
                }
            });
        record(&mut series, t, &states, &alive).map_err(|e| e.at_time(t))?;
    }
    if series.excluded > 0 {
        log::warn!(
            "{} of {} trajectories diverged beyond |z| = {DIVERGENCE_RADIUS:.0e} and were excluded",
            series.excluded,
            count
        );
    }
    Ok(series)
}

/// Numerical Wigner transform of a grid-evaluated packet (d = 1):
/// `W(x, xi) = (2 pi hbar)^{-1} Int conj(psi)(x + s/2) psi(x - s/2) e^{i s xi / hbar} ds`.
///
/// Serves as the convention-pinning oracle for [`wigner_weight`].
pub fn wigner_transform_1d(
    cfg: &ModelConfig,
    y: &PacketParams,
    xs: &[f64],
    xis: &[f64],
    s_samples: usize,
) -> Result<DMatrix<f64>> {
    if cfg.dim() != 1 {
        return Err(Error::invalid("the Wigner transform oracle is 1-D"));
    }
    check_normalized(cfg, y)?;
    let hbar = cfg.hbar;
    let b_min = crate::linalg::sym_eigenvalues(y.siegel.b()).min();
    let packet_width = 12.0 * (hbar / b_min).sqrt() * (1.0 + (cfg.n.total() as f64).sqrt());
    let x_span = xs
        .iter()
        .map(|x| (x - y.q[0]).abs())
        .fold(0.0_f64, f64::max);
    let s_max = 2.0 * (packet_width + x_span);
    let ds = 2.0 * s_max / (s_samples - 1) as f64;
    let svals: Vec<f64> = (0..s_samples).map(|i| -s_max + i as f64 * ds).collect();

    let mut out = DMatrix::<f64>::zeros(xs.len(), xis.len());
    let rows: Vec<Vec<f64>> = xs
        .par_iter()
        .map(|&x| {
            let plus: Vec<DVector<f64>> = svals
                .iter()
                .map(|s| DVector::from_element(1, x + s / 2.0))
                .collect();
            let minus: Vec<DVector<f64>> = svals
                .iter()
                .map(|s| DVector::from_element(1, x - s / 2.0))
                .collect();
            let fp = eval_packet_grid(y, &cfg.n, hbar, &plus).expect("grid evaluation");
            let fm = eval_packet_grid(y, &cfg.n, hbar, &minus).expect("grid evaluation");
            let prod: Vec<Complex64> = fp
                .iter()
                .zip(fm.iter())
                .map(|(a, b)| a.conj() * b)
                .collect();
            xis.iter()
                .map(|&xi| {
                    let mut acc = Complex64::ZERO;
                    for (i, s) in svals.iter().enumerate() {
                        let phase = Complex64::new(0.0, s * xi / hbar).exp();
                        let w = if i == 0 || i == s_samples - 1 { 0.5 } else { 1.0 };
                        acc += prod[i] * phase * w;
                    }
                    (acc * ds).re / (2.0 * std::f64::consts::PI * hbar)
                })
                .collect()
        })
        .collect();
    for (i, row) in rows.into_iter().enumerate() {
        for (j, v) in row.into_iter().enumerate() {
            out[(i, j)] = v;
        }
    }
    Ok(out)
}
