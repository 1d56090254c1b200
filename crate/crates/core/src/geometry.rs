//! The one-form, symplectic forms, and momentum map of the parameter
//! manifold, evaluated as explicit multilinear maps.

use nalgebra::{DMatrix, DVector};

use crate::dynamics::{invert_spd, ModelConfig, ReducedState, ReducedTangent};
use crate::error::Result;
use crate::packet::{b_n_matrix, bn_differential, norm_squared, PacketParams, TangentVector};

/// One-form
/// `Theta^(n)(v) = N(B, delta) (p . dq - (hbar/4) tr((B^(n))^{-1} dA) - dphi)`.
pub fn theta_n(cfg: &ModelConfig, y: &PacketParams, v: &TangentVector) -> Result<f64> {
    let bn = b_n_matrix(y.siegel.b(), &cfg.n)?;
    let bn_inv = invert_spd(&bn)?;
    let n_factor = norm_squared(y.siegel.b(), y.delta, cfg.hbar);
    Ok(n_factor * (y.p.dot(&v.dq) - cfg.hbar / 4.0 * (&bn_inv * &v.da).trace() - v.dphi))
}

/// Components of a tangent vector that enter the symplectic form.
struct OmegaSlots {
    dq: DVector<f64>,
    dp: DVector<f64>,
    da: DMatrix<f64>,
    dbn_inv: DMatrix<f64>,
    dphi: f64,
    ddelta: f64,
    trace_a: f64,
    trace_bn: f64,
}

fn omega_slots(
    cfg: &ModelConfig,
    y: &PacketParams,
    bn_inv: &DMatrix<f64>,
    v: &TangentVector,
) -> Result<OmegaSlots> {
    let dbn = bn_differential(y.siegel.b(), &cfg.n, &v.db)?;
    let dbn_inv = -(bn_inv * &dbn * bn_inv);
    Ok(OmegaSlots {
        dq: v.dq.clone(),
        dp: v.dp.clone(),
        da: v.da.clone(),
        dbn_inv,
        dphi: v.dphi,
        ddelta: v.ddelta,
        trace_a: (bn_inv * &v.da).trace(),
        trace_bn: (bn_inv * dbn).trace(),
    })
}

/// Symplectic form `Omega^(n)(u, v)` on the full parameter manifold.
///
/// All eight wedge terms of the pulled-back form, with the differentials of
/// `B^(n)` and its inverse evaluated from `dB` through the chain rule.
pub fn omega_n(
    cfg: &ModelConfig,
    y: &PacketParams,
    u: &TangentVector,
    v: &TangentVector,
) -> Result<f64> {
    let bn = b_n_matrix(y.siegel.b(), &cfg.n)?;
    let bn_inv = invert_spd(&bn)?;
    let a = omega_slots(cfg, y, &bn_inv, u)?;
    let b = omega_slots(cfg, y, &bn_inv, v)?;
    let hbar = cfg.hbar;
    let p = &y.p;

    let wedge = |fa: f64, fb: f64, ga: f64, gb: f64| fa * gb - fb * ga;

    let mut total = 0.0;
    // dq_i ^ dp_i
    total += a.dq.dot(&b.dp) - b.dq.dot(&a.dp);
    // -(p_i/2) dq_i ^ tr(Bn^{-1} dBn)
    total += -0.5 * wedge(p.dot(&a.dq), p.dot(&b.dq), a.trace_bn, b.trace_bn);
    // -(2 p_i / hbar) dq_i ^ ddelta
    total += -2.0 / hbar * wedge(p.dot(&a.dq), p.dot(&b.dq), a.ddelta, b.ddelta);
    // -(hbar/4) dA_ij ^ d(Bn^{-1})_ij
    total += -hbar / 4.0
        * ((a.da.component_mul(&b.dbn_inv)).sum() - (b.da.component_mul(&a.dbn_inv)).sum());
    // +(hbar/8) tr(Bn^{-1} dA) ^ tr(Bn^{-1} dBn)
    total += hbar / 8.0 * wedge(a.trace_a, b.trace_a, a.trace_bn, b.trace_bn);
    // +(1/2) tr(Bn^{-1} dA) ^ ddelta
    total += 0.5 * wedge(a.trace_a, b.trace_a, a.ddelta, b.ddelta);
    // -(1/2) tr(Bn^{-1} dBn) ^ dphi
    total += -0.5 * wedge(a.trace_bn, b.trace_bn, a.dphi, b.dphi);
    // +(2/hbar) dphi ^ ddelta
    total += 2.0 / hbar * wedge(a.dphi, b.dphi, a.ddelta, b.ddelta);

    Ok(norm_squared(y.siegel.b(), y.delta, cfg.hbar) * total)
}

/// Reduced symplectic form
/// `dq_i ^ dp_i + (hbar/4) d(B^(n))^{-1}_jk ^ dA_jk` on T*R^d x Sigma_d.
pub fn omega_reduced(
    cfg: &ModelConfig,
    s: &ReducedState,
    u: &ReducedTangent,
    v: &ReducedTangent,
) -> Result<f64> {
    let bn_inv = invert_spd(&s.bn)?;
    let du_inv = -(&bn_inv * &u.dbn * &bn_inv);
    let dv_inv = -(&bn_inv * &v.dbn * &bn_inv);
    let mut total = u.dq.dot(&v.dp) - v.dq.dot(&u.dp);
    total += cfg.hbar / 4.0
        * ((du_inv.component_mul(&v.da)).sum() - (dv_inv.component_mul(&u.da)).sum());
    Ok(total)
}

/// Momentum map of the phase-shift circle action: `J(y) = -hbar N(B, delta)`.
pub fn momentum_map(cfg: &ModelConfig, y: &PacketParams) -> f64 {
    -cfg.hbar * norm_squared(y.siegel.b(), y.delta, cfg.hbar)
}

/// Basis of tangent vectors matching the flat coordinate layout
/// `(q, p, A upper, B upper, phi, delta)`.
pub fn full_basis(d: usize) -> Vec<TangentVector> {
    let len = crate::packet::flat_len(d);
    (0..len)
        .map(|k| {
            let mut flat = vec![0.0; len];
            flat[k] = 1.0;
            TangentVector::from_flat(d, &flat).expect("basis construction")
        })
        .collect()
}

/// Basis of reduced tangent vectors matching `(q, p, A upper, Bn upper)`.
pub fn reduced_basis(d: usize) -> Vec<ReducedTangent> {
    let len = crate::dynamics::reduced_flat_len(d);
    (0..len)
        .map(|k| {
            let mut flat = vec![0.0; len];
            flat[k] = 1.0;
            ReducedTangent::from_flat(d, &flat).expect("basis construction")
        })
        .collect()
}

/// Matrix of `Omega^(n)` at `y` in the [`full_basis`] coordinates.
pub fn omega_n_matrix(cfg: &ModelConfig, y: &PacketParams) -> Result<DMatrix<f64>> {
    let basis = full_basis(cfg.dim());
    let m = basis.len();
    let mut out = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        for j in (i + 1)..m {
            let val = omega_n(cfg, y, &basis[i], &basis[j])?;
            out[(i, j)] = val;
            out[(j, i)] = -val;
        }
    }
    Ok(out)
}

/// Matrix of the reduced form at `s` in the [`reduced_basis`] coordinates.
pub fn omega_reduced_matrix(cfg: &ModelConfig, s: &ReducedState) -> Result<DMatrix<f64>> {
    let basis = reduced_basis(cfg.dim());
    let m = basis.len();
    let mut out = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        for j in (i + 1)..m {
            let val = omega_reduced(cfg, s, &basis[i], &basis[j])?;
            out[(i, j)] = val;
            out[(j, i)] = -val;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{full_field, reduced_field};
    use crate::fd;
    use crate::multi_index::MultiIndex;
    use crate::packet::normalizing_delta;
    use crate::potential::PolynomialPotential;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};

    fn cfg_1d(hbar: f64, n: usize) -> ModelConfig {
        ModelConfig::new(
            hbar,
            1.0,
            MultiIndex::scalar(n),
            PolynomialPotential::cubic_well(),
        )
        .unwrap()
    }

    fn normalized_packet(hbar: f64, q: f64, p: f64, a: f64, b: f64) -> PacketParams {
        let delta = normalizing_delta(&DMatrix::from_element(1, 1, b), hbar);
        PacketParams::scalar(q, p, a, b, 0.0, delta).unwrap()
    }

    fn random_tangent(rng: &mut impl Rng) -> TangentVector {
        TangentVector::from_flat(
            1,
            &(0..crate::packet::flat_len(1))
                .map(|_| rng.random_range(-1.0..1.0))
                .collect::<Vec<_>>(),
        )
        .unwrap()
    }

    #[test]
    fn theta_components() {
        let cfg = cfg_1d(0.05, 1);
        let y = normalized_packet(0.05, 0.3, 0.8, 0.2, 1.0);

        // Directions theta does not see.
        for k in [1usize, 3, 5] {
            let mut flat = vec![0.0; crate::packet::flat_len(1)];
            flat[k] = 1.0; // dp, dB, ddelta slots
            let v = TangentVector::from_flat(1, &flat).unwrap();
            assert_abs_diff_eq!(theta_n(&cfg, &y, &v).unwrap(), 0.0, epsilon = 1e-15);
        }

        // Unit dq reads off the momentum on a normalized packet.
        let mut v = TangentVector::zero(1);
        v.dq[0] = 1.0;
        assert_relative_eq!(theta_n(&cfg, &y, &v).unwrap(), 0.8, epsilon = 1e-12);

        // Unit dA against (B^(1))^{-1} = 3.
        let mut v = TangentVector::zero(1);
        v.da[(0, 0)] = 1.0;
        assert_relative_eq!(
            theta_n(&cfg, &y, &v).unwrap(),
            -(0.05 / 4.0) * 3.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn omega_antisymmetry_and_canonical_pair() {
        let cfg = cfg_1d(0.05, 2);
        let y = normalized_packet(0.05, -0.2, 0.5, 0.1, 1.4);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let u = random_tangent(&mut rng);
            let v = random_tangent(&mut rng);
            let uv = omega_n(&cfg, &y, &u, &v).unwrap();
            let vu = omega_n(&cfg, &y, &v, &u).unwrap();
            assert_relative_eq!(uv, -vu, epsilon = 1e-13);
            assert_abs_diff_eq!(omega_n(&cfg, &y, &u, &u).unwrap(), 0.0, epsilon = 1e-13);
        }

        let mut u = TangentVector::zero(1);
        u.dq[0] = 1.0;
        let mut v = TangentVector::zero(1);
        v.dp[0] = 1.0;
        assert_relative_eq!(omega_n(&cfg, &y, &u, &v).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn omega_is_minus_d_theta() {
        // Finite-difference exterior derivative on random 2-planes:
        // dTheta(u, v) = D_u[Theta(v)] - D_v[Theta(u)] for constant u, v.
        let cfg = cfg_1d(0.05, 2);
        let y = normalized_packet(0.05, 0.3, -0.4, 0.2, 1.3);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let u = random_tangent(&mut rng);
            let v = random_tangent(&mut rng);
            let h = fd::DEFAULT_STEP;
            let du = fd::directional(
                |t| theta_n(&cfg, &y.shifted(&u, t).unwrap(), &v).unwrap(),
                h,
            );
            let dv = fd::directional(
                |t| theta_n(&cfg, &y.shifted(&v, t).unwrap(), &u).unwrap(),
                h,
            );
            let d_theta = du - dv;
            let om = omega_n(&cfg, &y, &u, &v).unwrap();
            assert_relative_eq!(om, -d_theta, epsilon = 1e-5, max_relative = 1e-5);
        }
    }

    #[test]
    fn omega_reduced_examples() {
        let cfg = cfg_1d(0.05, 1);
        let s = ReducedState::scalar(0.25, 1.0, 0.0, 1.0 / 3.0).unwrap();

        let mut u = ReducedTangent::zero(1);
        u.dq[0] = 1.0;
        let mut v = ReducedTangent::zero(1);
        v.dp[0] = 1.0;
        assert_relative_eq!(omega_reduced(&cfg, &s, &u, &v).unwrap(), 1.0);

        // u = unit dA, v = unit dB ~ dBn = 1/(2n+1): value (hbar/4)(2n+1)/B^2.
        let mut u = ReducedTangent::zero(1);
        u.da[(0, 0)] = 1.0;
        let mut v = ReducedTangent::zero(1);
        v.dbn[(0, 0)] = 1.0 / 3.0;
        assert_relative_eq!(
            omega_reduced(&cfg, &s, &u, &v).unwrap(),
            0.05 / 4.0 * 3.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn hamiltonian_field_satisfies_omega_relation() {
        // Omega^(n)(X_H, v) = dH(v) and the reduced counterpart.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let cfg = cfg_1d(0.05, 3);
        for _ in 0..10 {
            let y = normalized_packet(
                0.05,
                rng.random_range(-0.5..0.5),
                rng.random_range(-1.0..1.0),
                rng.random_range(-0.5..0.5),
                rng.random_range(0.6..1.6),
            );
            let x = full_field(&cfg, &y).unwrap();
            for _ in 0..5 {
                let v = random_tangent(&mut rng);
                let dh = fd::directional(
                    |t| {
                        crate::dynamics::full_hamiltonian(&cfg, &y.shifted(&v, t).unwrap())
                            .unwrap()
                    },
                    fd::DEFAULT_STEP,
                );
                let om = omega_n(&cfg, &y, &x, &v).unwrap();
                assert_relative_eq!(om, dh, max_relative = 1e-6);
            }

            let s = ReducedState::from_siegel(
                y.q.clone(),
                y.p.clone(),
                y.siegel.a().clone_owned(),
                y.siegel.b().clone_owned(),
                &cfg.n,
            )
            .unwrap();
            let xr = reduced_field(&cfg, &s).unwrap();
            for _ in 0..5 {
                let v = ReducedTangent::from_flat(
                    1,
                    &(0..4).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<_>>(),
                )
                .unwrap();
                let dh = fd::directional(
                    |t| {
                        crate::dynamics::reduced_hamiltonian(&cfg, &s.shifted(&v, t).unwrap())
                            .unwrap()
                    },
                    fd::DEFAULT_STEP,
                );
                let om = omega_reduced(&cfg, &s, &xr, &v).unwrap();
                assert_relative_eq!(om, dh, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn phase_shift_leaves_forms_invariant() {
        let cfg = cfg_1d(0.05, 2);
        let y = normalized_packet(0.05, 0.1, 0.9, -0.3, 1.1);
        let mut shifted = y.clone();
        shifted.phi += cfg.hbar * 17.3;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        for _ in 0..10 {
            let u = random_tangent(&mut rng);
            let v = random_tangent(&mut rng);
            assert_relative_eq!(
                theta_n(&cfg, &y, &u).unwrap(),
                theta_n(&cfg, &shifted, &u).unwrap(),
                epsilon = 1e-13
            );
            assert_relative_eq!(
                omega_n(&cfg, &y, &u, &v).unwrap(),
                omega_n(&cfg, &shifted, &u, &v).unwrap(),
                epsilon = 1e-13
            );
        }
    }

    #[test]
    fn theta_recurrence_in_the_index() {
        // Raising one index entry shifts the one-form by
        // -(hbar/2) N (B^{-1/2} dA B^{-1/2})_jj, here in d = 1.
        let hbar = 0.05;
        let y = normalized_packet(hbar, 0.1, -0.7, 0.4, 1.3);
        let b = y.siegel.b()[(0, 0)];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(40);
        for n in [0usize, 1, 4] {
            let cfg_lo = cfg_1d(hbar, n);
            let cfg_hi = cfg_1d(hbar, n + 1);
            for _ in 0..5 {
                let v = random_tangent(&mut rng);
                let lo = theta_n(&cfg_lo, &y, &v).unwrap();
                let hi = theta_n(&cfg_hi, &y, &v).unwrap();
                let expected_shift = -hbar / 2.0 * v.da[(0, 0)] / b;
                assert_relative_eq!(hi - lo, expected_shift, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn momentum_map_examples() {
        let cfg = cfg_1d(0.05, 1);
        let y = normalized_packet(0.05, 0.0, 0.0, 0.0, 1.0);
        assert_relative_eq!(momentum_map(&cfg, &y), -0.05, epsilon = 1e-14);

        let mut far = y.clone();
        far.delta = 5.0;
        let j = momentum_map(&cfg, &far);
        assert!(j < 0.0 && j.abs() < 1e-80, "norm decays to zero from below, got {j:e}");
    }

    #[test]
    fn pullback_of_reduced_form_matches_on_level_set() {
        // Tangents constrained to the N = 1 level set (ddelta chosen so dN = 0)
        // reproduce the reduced form of the projected vectors.
        let cfg = cfg_1d(0.05, 2);
        let y = normalized_packet(0.05, 0.2, -0.6, 0.4, 0.9);
        let b = y.siegel.b()[(0, 0)];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for _ in 0..15 {
            let mut u = random_tangent(&mut rng);
            let mut v = random_tangent(&mut rng);
            // dN = 0 <=> ddelta = -(hbar/4) tr(B^{-1} dB)
            u.ddelta = -cfg.hbar / 4.0 * u.db[(0, 0)] / b;
            v.ddelta = -cfg.hbar / 4.0 * v.db[(0, 0)] / b;
            let full = omega_n(&cfg, &y, &u, &v).unwrap();

            let s = ReducedState::from_siegel(
                y.q.clone(),
                y.p.clone(),
                y.siegel.a().clone_owned(),
                y.siegel.b().clone_owned(),
                &cfg.n,
            )
            .unwrap();
            let project = |w: &TangentVector| ReducedTangent {
                dq: w.dq.clone(),
                dp: w.dp.clone(),
                da: w.da.clone(),
                dbn: bn_differential(y.siegel.b(), &cfg.n, &w.db).unwrap(),
            };
            let reduced = omega_reduced(&cfg, &s, &project(&u), &project(&v)).unwrap();
            assert_relative_eq!(full, reduced, epsilon = 1e-8, max_relative = 1e-8);
        }
    }

    #[test]
    fn reduced_form_is_closed() {
        // Finite-difference exterior derivative of the reduced two-form on
        // random 3-planes vanishes.
        let cfg = cfg_1d(0.05, 1);
        let s = ReducedState::scalar(0.3, -0.2, 0.5, 0.8).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        for _ in 0..10 {
            let rand_red = |rng: &mut rand_chacha::ChaCha8Rng| {
                ReducedTangent::from_flat(
                    1,
                    &(0..4).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<_>>(),
                )
                .unwrap()
            };
            let u = rand_red(&mut rng);
            let v = rand_red(&mut rng);
            let w = rand_red(&mut rng);
            let h = fd::DEFAULT_STEP;
            let term = |a: &ReducedTangent, b: &ReducedTangent, c: &ReducedTangent| {
                fd::directional(
                    |t| omega_reduced(&cfg, &s.shifted(a, t).unwrap(), b, c).unwrap(),
                    h,
                )
            };
            let d_omega = term(&u, &v, &w) - term(&v, &u, &w) + term(&w, &u, &v);
            assert_abs_diff_eq!(d_omega, 0.0, epsilon = 1e-5);
        }
    }
}
