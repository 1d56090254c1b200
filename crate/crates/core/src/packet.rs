//! Wave-packet parameter points, index-dependent width matrices, and norms.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::multi_index::MultiIndex;
use crate::siegel::SiegelPoint;

/// Full parameter point `y = (q, p, A, B, phi, delta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PacketParams {
    pub q: DVector<f64>,
    pub p: DVector<f64>,
    pub siegel: SiegelPoint,
    pub phi: f64,
    pub delta: f64,
}

impl PacketParams {
    pub fn new(
        q: DVector<f64>,
        p: DVector<f64>,
        siegel: SiegelPoint,
        phi: f64,
        delta: f64,
    ) -> Result<Self> {
        if q.len() != siegel.dim() || p.len() != siegel.dim() {
            return Err(Error::dimension(
                "position/momentum length must match Siegel dimension",
            ));
        }
        Ok(PacketParams {
            q,
            p,
            siegel,
            phi,
            delta,
        })
    }

    /// One-dimensional packet from scalars.
    pub fn scalar(q: f64, p: f64, a: f64, b: f64, phi: f64, delta: f64) -> Result<Self> {
        Self::new(
            DVector::from_element(1, q),
            DVector::from_element(1, p),
            SiegelPoint::scalar(a, b)?,
            phi,
            delta,
        )
    }

    pub fn dim(&self) -> usize {
        self.siegel.dim()
    }

    /// Squared L2 norm of every packet sharing these parameters:
    /// `N(B, delta) = sqrt((pi hbar)^d / det B) exp(-2 delta / hbar)`.
    pub fn norm_squared(&self, hbar: f64) -> f64 {
        norm_squared(self.siegel.b(), self.delta, hbar)
    }

    /// Same packet with `delta` replaced so the norm is one.
    pub fn normalized(&self, hbar: f64) -> Self {
        let mut y = self.clone();
        y.delta = normalizing_delta(self.siegel.b(), hbar);
        y
    }
}

pub fn norm_squared(b: &DMatrix<f64>, delta: f64, hbar: f64) -> f64 {
    let d = b.nrows() as i32;
    ((PI * hbar).powi(d) / b.determinant()).sqrt() * (-2.0 * delta / hbar).exp()
}

/// The `delta` solving `N(B, delta) = 1`, i.e. `(hbar/4) ln((pi hbar)^d / det B)`.
pub fn normalizing_delta(b: &DMatrix<f64>, hbar: f64) -> f64 {
    let d = b.nrows() as i32;
    hbar / 4.0 * ((PI * hbar).powi(d) / b.determinant()).ln()
}

/// Diagonal matrix `diag(2 n_j + 1)`.
pub fn lambda_matrix(n: &MultiIndex) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_iterator(
        n.dim(),
        n.entries().iter().map(|&e| 2.0 * e as f64 + 1.0),
    ))
}

/// Inverse of a diagonal matrix, inverting diagonal entries only.
fn diag_inverse(m: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_diagonal(&m.diagonal().map(|x| 1.0 / x))
}

/// Index-dependent width matrix `B^{1/2} diag(2 n_j + 1)^{-1} B^{1/2}`.
pub fn b_n_matrix(b: &DMatrix<f64>, n: &MultiIndex) -> Result<DMatrix<f64>> {
    if b.nrows() != n.dim() {
        return Err(Error::dimension("B and multi-index dimensions differ"));
    }
    let s = linalg::sqrt_spd(b)?;
    let lam_inv = diag_inverse(&lambda_matrix(n));
    Ok(linalg::symmetrize(&(&s * lam_inv * &s)))
}

/// Inverse of [`b_n_matrix`]: the unique positive definite `B` with
/// `B^{1/2} Lambda^{-1} B^{1/2} = Bn`.
///
/// Uniform indices use the closed form `(2 nbar + 1) Bn`; otherwise a Newton
/// iteration on the square-root factor, started from the commuting-case guess
/// `Lambda^{1/2} Bn Lambda^{1/2}`.
pub fn recover_b_from_bn(bn: &DMatrix<f64>, n: &MultiIndex) -> Result<DMatrix<f64>> {
    if bn.nrows() != n.dim() {
        return Err(Error::dimension("Bn and multi-index dimensions differ"));
    }
    linalg::check_spd(bn)?;
    if n.is_uniform() {
        let scale = 2.0 * n.get(0) as f64 + 1.0;
        return Ok(bn * scale);
    }

    const MAX_ITERATIONS: usize = 100;
    const RESIDUAL_TOLERANCE: f64 = 1e-12;

    let lam = lambda_matrix(n);
    let lam_inv = diag_inverse(&lam);
    let lam_sqrt = DMatrix::from_diagonal(&lam.diagonal().map(f64::sqrt));
    // Initial guess exact when B and Lambda commute.
    let guess = linalg::symmetrize(&(&lam_sqrt * bn * &lam_sqrt));
    let mut s = linalg::sqrt_spd(&guess)?;
    let mut residual = f64::INFINITY;
    for _ in 0..MAX_ITERATIONS {
        let f = linalg::symmetrize(&(&s * &lam_inv * &s)) - bn;
        residual = f.norm();
        if residual <= RESIDUAL_TOLERANCE {
            let b = linalg::symmetrize(&(&s * &s));
            linalg::check_spd(&b)?;
            return Ok(b);
        }
        // Solve dS (Lambda^{-1} S) + (S Lambda^{-1}) dS = -F for the update.
        let step = linalg::solve_sylvester(&(&lam_inv * &s), &(&s * &lam_inv), &(-f))?;
        s = linalg::symmetrize(&(&s + step));
    }
    Err(Error::NoConvergence {
        solver: "width-matrix recovery Newton",
        iterations: MAX_ITERATIONS,
        residual,
    })
}

/// Differential of the map `B -> B^(n)` applied to a symmetric perturbation.
pub fn bn_differential(b: &DMatrix<f64>, n: &MultiIndex, db: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let s = linalg::sqrt_spd(b)?;
    let lam_inv = diag_inverse(&lambda_matrix(n));
    // dS solves dS S + S dS = dB.
    let ds = linalg::solve_sylvester(&s, &s, db)?;
    Ok(linalg::symmetrize(&(&ds * &lam_inv * &s + &s * &lam_inv * &ds)))
}

/// Inverse differential: the symmetric `dB` mapping to a given `dBn`.
pub fn bn_differential_inverse(
    b: &DMatrix<f64>,
    n: &MultiIndex,
    dbn: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let s = linalg::sqrt_spd(b)?;
    let lam_inv = diag_inverse(&lambda_matrix(n));
    // dS solves dS (Lambda^{-1} S) + (S Lambda^{-1}) dS = dBn, then dB = dS S + S dS.
    let ds = linalg::solve_sylvester(&(&lam_inv * &s), &(&s * &lam_inv), dbn)?;
    Ok(linalg::symmetrize(&(&ds * &s + &s * &ds)))
}

/// Tangent vector at a parameter point; matrix parts are symmetrized.
#[derive(Debug, Clone)]
pub struct TangentVector {
    pub dq: DVector<f64>,
    pub dp: DVector<f64>,
    pub da: DMatrix<f64>,
    pub db: DMatrix<f64>,
    pub dphi: f64,
    pub ddelta: f64,
}

impl TangentVector {
    pub fn new(
        dq: DVector<f64>,
        dp: DVector<f64>,
        da: DMatrix<f64>,
        db: DMatrix<f64>,
        dphi: f64,
        ddelta: f64,
    ) -> Self {
        TangentVector {
            dq,
            dp,
            da: linalg::symmetrize(&da),
            db: linalg::symmetrize(&db),
            dphi,
            ddelta,
        }
    }

    pub fn zero(d: usize) -> Self {
        TangentVector {
            dq: DVector::zeros(d),
            dp: DVector::zeros(d),
            da: DMatrix::zeros(d, d),
            db: DMatrix::zeros(d, d),
            dphi: 0.0,
            ddelta: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.dq.len()
    }

    /// Flat coordinates `(q, p, A upper, B upper, phi, delta)` with the
    /// symmetric matrices stored as upper triangles in row-major order.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(flat_len(self.dim()));
        out.extend(self.dq.iter());
        out.extend(self.dp.iter());
        push_upper(&mut out, &self.da);
        push_upper(&mut out, &self.db);
        out.push(self.dphi);
        out.push(self.ddelta);
        out
    }

    pub fn from_flat(d: usize, flat: &[f64]) -> Result<Self> {
        if flat.len() != flat_len(d) {
            return Err(Error::dimension("flat tangent has wrong length"));
        }
        let mut at = flat.iter().copied();
        let dq = DVector::from_iterator(d, at.by_ref().take(d));
        let dp = DVector::from_iterator(d, at.by_ref().take(d));
        let da = pop_upper(d, &mut at);
        let db = pop_upper(d, &mut at);
        let dphi = at.next().unwrap();
        let ddelta = at.next().unwrap();
        Ok(TangentVector {
            dq,
            dp,
            da,
            db,
            dphi,
            ddelta,
        })
    }
}

/// Length of the flat coordinate vector for the full parameter space.
pub fn flat_len(d: usize) -> usize {
    2 * d + d * (d + 1) + 2
}

pub(crate) fn push_upper(out: &mut Vec<f64>, m: &DMatrix<f64>) {
    let d = m.nrows();
    for i in 0..d {
        for j in i..d {
            out.push(m[(i, j)]);
        }
    }
}

pub(crate) fn pop_upper(d: usize, it: &mut impl Iterator<Item = f64>) -> DMatrix<f64> {
    let mut m = DMatrix::<f64>::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let v = it.next().unwrap();
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

impl PacketParams {
    /// Flat coordinates matching [`TangentVector::to_flat`].
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(flat_len(self.dim()));
        out.extend(self.q.iter());
        out.extend(self.p.iter());
        push_upper(&mut out, self.siegel.a());
        push_upper(&mut out, self.siegel.b());
        out.push(self.phi);
        out.push(self.delta);
        out
    }

    pub fn from_flat(d: usize, flat: &[f64]) -> Result<Self> {
        if flat.len() != flat_len(d) {
            return Err(Error::dimension("flat state has wrong length"));
        }
        let mut at = flat.iter().copied();
        let q = DVector::from_iterator(d, at.by_ref().take(d));
        let p = DVector::from_iterator(d, at.by_ref().take(d));
        let a = pop_upper(d, &mut at);
        let b = pop_upper(d, &mut at);
        let phi = at.next().unwrap();
        let delta = at.next().unwrap();
        PacketParams::new(q, p, SiegelPoint::new(a, b)?, phi, delta)
    }

    /// Shift the parameter point along a tangent vector.
    pub fn shifted(&self, v: &TangentVector, t: f64) -> Result<Self> {
        PacketParams::new(
            &self.q + &v.dq * t,
            &self.p + &v.dp * t,
            SiegelPoint::new(
                self.siegel.a() + &v.da * t,
                self.siegel.b() + &v.db * t,
            )?,
            self.phi + v.dphi * t,
            self.delta + v.ddelta * t,
        )
    }
}
