//! The Siegel upper half space and the (Q, P) matrix parametrization.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg;

/// Residual tolerance for the (Q, P) compatibility relations.
pub const QP_TOLERANCE: f64 = 1e-10;

/// A point `A + iB` of the Siegel upper half space: `A`, `B` real symmetric
/// d x d, `B` positive definite. Inputs are symmetrized on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SiegelPoint {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
}

impl SiegelPoint {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>) -> Result<Self> {
        if !a.is_square() || a.shape() != b.shape() {
            return Err(Error::dimension(format!(
                "Siegel point needs square matrices of equal size, got {:?} and {:?}",
                a.shape(),
                b.shape()
            )));
        }
        let a = linalg::symmetrize(&a);
        let b = linalg::symmetrize(&b);
        linalg::check_spd(&b)?;
        Ok(SiegelPoint { a, b })
    }

    /// One-dimensional point from scalars.
    pub fn scalar(a: f64, b: f64) -> Result<Self> {
        Self::new(
            DMatrix::from_element(1, 1, a),
            DMatrix::from_element(1, 1, b),
        )
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    /// The complex matrix A + iB.
    pub fn to_complex(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.dim(), self.dim(), |i, j| {
            Complex64::new(self.a[(i, j)], self.b[(i, j)])
        })
    }
}

/// Hagedorn's (Q, P) parametrization of a Siegel point.
#[derive(Debug, Clone)]
pub struct HagedornQP {
    q: DMatrix<Complex64>,
    p: DMatrix<Complex64>,
}

impl HagedornQP {
    /// Build from matrices, enforcing the two compatibility relations
    /// `Q^T P - P^T Q = 0` and `Q* P - P* Q = 2i I`.
    pub fn new(q: DMatrix<Complex64>, p: DMatrix<Complex64>) -> Result<Self> {
        let d = q.nrows();
        if !q.is_square() || q.shape() != p.shape() {
            return Err(Error::dimension("Hagedorn pair needs equal square matrices"));
        }
        let sym = (q.transpose() * &p - p.transpose() * &q).norm();
        let two_i = DMatrix::from_diagonal_element(d, d, Complex64::new(0.0, 2.0));
        let comm = (q.adjoint() * &p - p.adjoint() * &q - two_i).norm();
        if sym > QP_TOLERANCE || comm > QP_TOLERANCE {
            return Err(Error::numerical(format!(
                "Hagedorn relations violated: |Q^T P - P^T Q| = {sym:.3e}, |Q* P - P* Q - 2iI| = {comm:.3e}"
            )));
        }
        Ok(HagedornQP { q, p })
    }

    pub fn q(&self) -> &DMatrix<Complex64> {
        &self.q
    }

    pub fn p(&self) -> &DMatrix<Complex64> {
        &self.p
    }

    /// Recover the Siegel point as P Q^{-1}.
    pub fn to_siegel(&self) -> Result<SiegelPoint> {
        let qinv = self
            .q
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::numerical("Q is singular"))?;
        let c = &self.p * qinv;
        SiegelPoint::new(c.map(|z| z.re), c.map(|z| z.im))
    }
}

/// Canonical (Q, P) representative of a Siegel point with unitary factor fixed
/// to the identity: `Q = B^{-1/2}`, `P = (A + iB) B^{-1/2}`.
pub fn qp_from_siegel(s: &SiegelPoint) -> Result<HagedornQP> {
    let b_inv_sqrt = linalg::inv_sqrt_spd(s.b())?;
    let q = b_inv_sqrt.map(|x| Complex64::new(x, 0.0));
    let p = s.to_complex() * &q;
    HagedornQP::new(q, p)
}

/// Symplectic 2d x 2d matrix associated with the canonical (Q, P) pair:
/// rows [[Re Q, Im Q], [Re P, Im P]] = [[B^{-1/2}, 0], [A B^{-1/2}, B^{1/2}]].
pub fn symplectic_from_siegel(s: &SiegelPoint) -> Result<DMatrix<f64>> {
    let d = s.dim();
    let b_inv_sqrt = linalg::inv_sqrt_spd(s.b())?;
    let b_sqrt = linalg::sqrt_spd(s.b())?;
    let ab = s.a() * &b_inv_sqrt;
    let mut m = DMatrix::<f64>::zeros(2 * d, 2 * d);
    m.view_mut((0, 0), (d, d)).copy_from(&b_inv_sqrt);
    m.view_mut((d, 0), (d, d)).copy_from(&ab);
    m.view_mut((d, d), (d, d)).copy_from(&b_sqrt);
    Ok(m)
}

/// Inverse of [`symplectic_from_siegel`] applied to a phase-space vector.
pub fn symplectic_inverse_apply(s: &SiegelPoint, z: &DVector<f64>) -> Result<DVector<f64>> {
    let d = s.dim();
    if z.len() != 2 * d {
        return Err(Error::dimension("phase-space vector has wrong length"));
    }
    let b_sqrt = linalg::sqrt_spd(s.b())?;
    let b_inv_sqrt = linalg::inv_sqrt_spd(s.b())?;
    let x = z.rows(0, d).clone_owned();
    let xi = z.rows(d, d).clone_owned();
    // [[B^{1/2}, 0], [-B^{-1/2} A, B^{-1/2}]]
    let top = &b_sqrt * &x;
    let bottom = &b_inv_sqrt * (&xi - s.a() * &x);
    let mut w = DVector::<f64>::zeros(2 * d);
    w.rows_mut(0, d).copy_from(&top);
    w.rows_mut(d, d).copy_from(&bottom);
    Ok(w)
}
