//! Hamiltonians, corrected potentials, and the classical, full, and reduced
//! parameter vector fields.
//!
//! Width rates use closed anticommutator forms in the evolved matrix `Bn`.
//! These are the exact Hamiltonian rates whenever `B` commutes with the index
//! matrix `Lambda`, which covers d = 1 and uniform multi-indices. Non-uniform
//! indices in d > 1 are supported through Newton-based recovery of `B` but
//! are experimental: there the `A` rate is no longer exactly energy
//! conserving.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::multi_index::MultiIndex;
use crate::packet::{
    self, b_n_matrix, bn_differential_inverse, lambda_matrix, recover_b_from_bn, PacketParams,
    TangentVector,
};
use crate::potential::PolynomialPotential;

/// Model data shared by every run: hbar, mass, packet index, and potential.
#[derive(Debug, Clone)]
pub struct ModelConfig {
    pub hbar: f64,
    pub mass: f64,
    pub n: MultiIndex,
    pub potential: PolynomialPotential,
}

impl ModelConfig {
    pub fn new(hbar: f64, mass: f64, n: MultiIndex, potential: PolynomialPotential) -> Result<Self> {
        if !(hbar > 0.0) || !hbar.is_finite() {
            return Err(Error::invalid("hbar must be positive"));
        }
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::invalid("mass must be positive"));
        }
        if n.dim() != potential.dim() {
            return Err(Error::dimension(
                "multi-index and potential dimensions differ",
            ));
        }
        Ok(ModelConfig {
            hbar,
            mass,
            n,
            potential,
        })
    }

    pub fn dim(&self) -> usize {
        self.n.dim()
    }
}

/// State of the reduced system on T*R^d x Sigma_d, carrying the evolved
/// index-dependent width matrix `Bn` rather than `B` itself.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedState {
    pub q: DVector<f64>,
    pub p: DVector<f64>,
    pub a: DMatrix<f64>,
    pub bn: DMatrix<f64>,
}

impl ReducedState {
    pub fn new(q: DVector<f64>, p: DVector<f64>, a: DMatrix<f64>, bn: DMatrix<f64>) -> Result<Self> {
        let d = q.len();
        if p.len() != d || a.shape() != (d, d) || bn.shape() != (d, d) {
            return Err(Error::dimension("reduced state pieces disagree in size"));
        }
        let a = linalg::symmetrize(&a);
        let bn = linalg::symmetrize(&bn);
        linalg::check_spd(&bn)?;
        Ok(ReducedState { q, p, a, bn })
    }

    pub fn scalar(q: f64, p: f64, a: f64, bn: f64) -> Result<Self> {
        Self::new(
            DVector::from_element(1, q),
            DVector::from_element(1, p),
            DMatrix::from_element(1, 1, a),
            DMatrix::from_element(1, 1, bn),
        )
    }

    /// Initial reduced state from packet width data `(A, B)` and index `n`.
    pub fn from_siegel(
        q: DVector<f64>,
        p: DVector<f64>,
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        n: &MultiIndex,
    ) -> Result<Self> {
        let bn = b_n_matrix(&b, n)?;
        Self::new(q, p, a, bn)
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    /// Width matrix `B` recovered from the evolved `Bn`.
    pub fn b_matrix(&self, n: &MultiIndex) -> Result<DMatrix<f64>> {
        recover_b_from_bn(&self.bn, n)
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(reduced_flat_len(self.dim()));
        out.extend(self.q.iter());
        out.extend(self.p.iter());
        packet::push_upper(&mut out, &self.a);
        packet::push_upper(&mut out, &self.bn);
        out
    }

    pub fn from_flat(d: usize, flat: &[f64]) -> Result<Self> {
        if flat.len() != reduced_flat_len(d) {
            return Err(Error::dimension("flat reduced state has wrong length"));
        }
        let mut at = flat.iter().copied();
        let q = DVector::from_iterator(d, at.by_ref().take(d));
        let p = DVector::from_iterator(d, at.by_ref().take(d));
        let a = packet::pop_upper(d, &mut at);
        let bn = packet::pop_upper(d, &mut at);
        Self::new(q, p, a, bn)
    }

    pub fn shifted(&self, v: &ReducedTangent, t: f64) -> Result<Self> {
        Self::new(
            &self.q + &v.dq * t,
            &self.p + &v.dp * t,
            &self.a + &v.da * t,
            &self.bn + &v.dbn * t,
        )
    }
}

/// Tangent vector (or rate of change) of a reduced state.
#[derive(Debug, Clone)]
pub struct ReducedTangent {
    pub dq: DVector<f64>,
    pub dp: DVector<f64>,
    pub da: DMatrix<f64>,
    pub dbn: DMatrix<f64>,
}

impl ReducedTangent {
    pub fn zero(d: usize) -> Self {
        ReducedTangent {
            dq: DVector::zeros(d),
            dp: DVector::zeros(d),
            da: DMatrix::zeros(d, d),
            dbn: DMatrix::zeros(d, d),
        }
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(reduced_flat_len(self.dq.len()));
        out.extend(self.dq.iter());
        out.extend(self.dp.iter());
        packet::push_upper(&mut out, &self.da);
        packet::push_upper(&mut out, &self.dbn);
        out
    }

    pub fn from_flat(d: usize, flat: &[f64]) -> Result<Self> {
        if flat.len() != reduced_flat_len(d) {
            return Err(Error::dimension("flat reduced tangent has wrong length"));
        }
        let mut at = flat.iter().copied();
        let dq = DVector::from_iterator(d, at.by_ref().take(d));
        let dp = DVector::from_iterator(d, at.by_ref().take(d));
        let da = packet::pop_upper(d, &mut at);
        let dbn = packet::pop_upper(d, &mut at);
        Ok(ReducedTangent { dq, dp, da, dbn })
    }
}

/// Flat coordinate length of the reduced state space.
pub fn reduced_flat_len(d: usize) -> usize {
    2 * d + d * (d + 1)
}

/// Corrected potential `V(q) + (hbar/4) tr((B^(n))^{-1} D^2 V(q))`.
pub fn corrected_potential(cfg: &ModelConfig, q: &DVector<f64>, b: &DMatrix<f64>) -> Result<f64> {
    let bn = b_n_matrix(b, &cfg.n)?;
    let bn_inv = invert_spd(&bn)?;
    Ok(cfg.potential.eval(q) + cfg.hbar / 4.0 * (&bn_inv * cfg.potential.hessian(q)).trace())
}

/// Gradient of the corrected potential in `q` with the width matrix frozen.
pub fn corrected_potential_grad(
    cfg: &ModelConfig,
    q: &DVector<f64>,
    b: &DMatrix<f64>,
) -> Result<DVector<f64>> {
    let bn = b_n_matrix(b, &cfg.n)?;
    let bn_inv = invert_spd(&bn)?;
    Ok(cfg.potential.gradient(q) + cfg.potential.third_contract(q, &bn_inv) * (cfg.hbar / 4.0))
}

/// Classical Hamiltonian vector field `(p/m, -grad V(q))`.
pub fn classical_field(cfg: &ModelConfig, q: &DVector<f64>, p: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
    (p / cfg.mass, -cfg.potential.gradient(q))
}

/// Classical energy `p^2/(2m) + V(q)`.
pub fn classical_energy(cfg: &ModelConfig, q: &DVector<f64>, p: &DVector<f64>) -> f64 {
    p.dot(p) / (2.0 * cfg.mass) + cfg.potential.eval(q)
}

/// Reduced Hamiltonian
/// `p^2/2m + (hbar/4m) tr((B^(n))^{-1}(A^2 + B^2)) + V_corrected(q, B)`.
pub fn reduced_hamiltonian(cfg: &ModelConfig, s: &ReducedState) -> Result<f64> {
    let b = s.b_matrix(&cfg.n)?;
    let bn_inv = invert_spd(&s.bn)?;
    let width_energy = (&bn_inv * (&s.a * &s.a + &b * &b)).trace();
    Ok(s.p.dot(&s.p) / (2.0 * cfg.mass)
        + cfg.hbar / (4.0 * cfg.mass) * width_energy
        + cfg.potential.eval(&s.q)
        + cfg.hbar / 4.0 * (&bn_inv * cfg.potential.hessian(&s.q)).trace())
}

/// Full Hamiltonian `H^(n) = N(B, delta) * [reduced Hamiltonian terms]`.
pub fn full_hamiltonian(cfg: &ModelConfig, y: &PacketParams) -> Result<f64> {
    let bn = b_n_matrix(y.siegel.b(), &cfg.n)?;
    let bn_inv = invert_spd(&bn)?;
    let a = y.siegel.a();
    let b = y.siegel.b();
    let bracket = y.p.dot(&y.p) / (2.0 * cfg.mass)
        + cfg.hbar / (4.0 * cfg.mass) * (&bn_inv * (a * a + b * b)).trace()
        + cfg.potential.eval(&y.q)
        + cfg.hbar / 4.0 * (&bn_inv * cfg.potential.hessian(&y.q)).trace();
    Ok(y.norm_squared(cfg.hbar) * bracket)
}

/// Right-hand side of the reduced system:
/// `qdot = p/m`, `pdot = -grad V_corrected`,
/// `Adot = -(1/m)(A^2 - (B^(n) L B + B L B^(n))/2) - D^2 V(q)`,
/// `Bndot = -(1/m)(A B^(n) + B^(n) A)`.
pub fn reduced_field(cfg: &ModelConfig, s: &ReducedState) -> Result<ReducedTangent> {
    let b = s.b_matrix(&cfg.n)?;
    let lam = lambda_matrix(&cfg.n);
    let dq = &s.p / cfg.mass;
    let dp = -corrected_potential_grad(cfg, &s.q, &b)?;
    let cross = (&s.bn * &lam * &b + &b * &lam * &s.bn) * 0.5;
    let da = linalg::symmetrize(&((&s.a * &s.a - cross) * (-1.0 / cfg.mass)))
        - cfg.potential.hessian(&s.q);
    let dbn = linalg::symmetrize(&((&s.a * &s.bn + &s.bn * &s.a) * (-1.0 / cfg.mass)));
    Ok(ReducedTangent { dq, dp, da, dbn })
}

/// Right-hand side of the full parameter system. The `(q, p, A, Bn)` part
/// agrees with [`reduced_field`]; the returned `db` is the rate of `B` itself,
/// obtained from the `Bn` rate through the inverse differential of
/// `B -> B^(n)`. Additionally
/// `phidot = p^2/2m - V(q) - (hbar/2m) tr(Lambda B)` and
/// `deltadot = (hbar/2m) tr A`.
pub fn full_field(cfg: &ModelConfig, y: &PacketParams) -> Result<TangentVector> {
    let b = y.siegel.b().clone_owned();
    let bn = b_n_matrix(&b, &cfg.n)?;
    let reduced = reduced_field(
        cfg,
        &ReducedState::new(y.q.clone_owned(), y.p.clone_owned(), y.siegel.a().clone_owned(), bn)?,
    )?;
    let db = if cfg.n.is_uniform() {
        &reduced.dbn * (2.0 * cfg.n.get(0) as f64 + 1.0)
    } else {
        bn_differential_inverse(&b, &cfg.n, &reduced.dbn)?
    };
    let lam = lambda_matrix(&cfg.n);
    let dphi = y.p.dot(&y.p) / (2.0 * cfg.mass)
        - cfg.potential.eval(&y.q)
        - cfg.hbar / (2.0 * cfg.mass) * (&lam * &b).trace();
    let ddelta = cfg.hbar / (2.0 * cfg.mass) * y.siegel.a().trace();
    Ok(TangentVector::new(
        reduced.dq,
        reduced.dp,
        reduced.da,
        db,
        dphi,
        ddelta,
    ))
}

/// Analytic differential of the reduced Hamiltonian along a tangent vector.
///
/// Used to verify energy conservation of the exact reduced flow without
/// finite differencing: `dH(reduced_field) = 0` up to roundoff.
pub fn d_reduced_hamiltonian(cfg: &ModelConfig, s: &ReducedState, v: &ReducedTangent) -> Result<f64> {
    let b = s.b_matrix(&cfg.n)?;
    let bn_inv = invert_spd(&s.bn)?;
    let hess = cfg.potential.hessian(&s.q);

    // q and p slots.
    let grad_q = cfg.potential.gradient(&s.q)
        + cfg.potential.third_contract(&s.q, &bn_inv) * (cfg.hbar / 4.0);
    let mut total = grad_q.dot(&v.dq) + s.p.dot(&v.dp) / cfg.mass;

    // A slot: (hbar/4m) tr(Bn^{-1} (A dA + dA A)).
    total += cfg.hbar / (4.0 * cfg.mass) * (&bn_inv * (&s.a * &v.da + &v.da * &s.a)).trace();

    // B depends on Bn: (hbar/4m) tr(Bn^{-1} (B dB + dB B)).
    let db = if cfg.n.is_uniform() {
        &v.dbn * (2.0 * cfg.n.get(0) as f64 + 1.0)
    } else {
        bn_differential_inverse(&b, &cfg.n, &v.dbn)?
    };
    total += cfg.hbar / (4.0 * cfg.mass) * (&bn_inv * (&b * &db + &db * &b)).trace();

    // Explicit Bn^{-1} dependence: tr(dBn^{-1} M) with dBn^{-1} = -Bn^{-1} dBn Bn^{-1}.
    let m = (&s.a * &s.a + &b * &b) * (cfg.hbar / (4.0 * cfg.mass)) + hess * (cfg.hbar / 4.0);
    let dbn_inv = -(&bn_inv * &v.dbn * &bn_inv);
    total += (dbn_inv * m).trace();
    Ok(total)
}

pub(crate) fn invert_spd(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    m.clone_owned()
        .try_inverse()
        .map(|inv| linalg::symmetrize(&inv))
        .ok_or_else(|| Error::numerical("singular width matrix"))
}
