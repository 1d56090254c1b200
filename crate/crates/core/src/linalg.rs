//! Small-matrix helpers built on symmetric eigendecompositions.
//!
//! Everything here targets the d x d (d <= 3 in practice) real symmetric
//! matrices that parametrize wave-packet widths, so dense eigensolvers and
//! Kronecker-product linear solves are the right tools.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Smallest eigenvalue a matrix may have and still count as positive definite.
pub const SPD_TOLERANCE: f64 = 1e-12;

/// Force exact symmetry by averaging with the transpose.
pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn sym_eigenvalues(m: &DMatrix<f64>) -> DVector<f64> {
    let mut ev = m.clone_owned().symmetric_eigen().eigenvalues;
    ev.as_mut_slice().sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Check that `m` is symmetric positive definite within [`SPD_TOLERANCE`].
pub fn check_spd(m: &DMatrix<f64>) -> Result<()> {
    let min = sym_eigenvalues(m).min();
    if min <= SPD_TOLERANCE {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: min,
        });
    }
    Ok(())
}

/// Apply `f` to the eigenvalues of a symmetric matrix: V f(D) V^T.
pub fn sym_map(m: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let eig = symmetrize(m).symmetric_eigen();
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(f));
    symmetrize(&(&eig.eigenvectors * d * eig.eigenvectors.transpose()))
}

/// Principal square root of a symmetric positive definite matrix.
pub fn sqrt_spd(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_spd(m)?;
    Ok(sym_map(m, f64::sqrt))
}

/// Inverse square root of a symmetric positive definite matrix.
pub fn inv_sqrt_spd(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_spd(m)?;
    Ok(sym_map(m, |x| 1.0 / x.sqrt()))
}

/// Solve the Sylvester-type equation `X L + R X = C` for `X` by vectorizing
/// into a (d^2 x d^2) Kronecker system. Sized for the tiny matrices used here.
pub fn solve_sylvester(l: &DMatrix<f64>, r: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let d = l.nrows();
    let n = d * d;
    // vec(X L) = (L^T kron I) vec(X); vec(R X) = (I kron R) vec(X)
    let mut a = DMatrix::<f64>::zeros(n, n);
    let id = DMatrix::<f64>::identity(d, d);
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for m in 0..d {
                    // column-major vec: index (row, col) -> col * d + row
                    a[(j * d + i, m * d + k)] +=
                        l[(m, j)] * id[(k, i)] + id[(j, m)] * r[(i, k)];
                }
            }
        }
    }
    let rhs = DVector::from_column_slice(c.as_slice());
    let sol = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::numerical("singular Sylvester system"))?;
    Ok(DMatrix::from_column_slice(d, d, sol.as_slice()))
}

/// Frobenius norm of the difference of two matrices.
pub fn frobenius_distance(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn random_spd(d: usize, seed: u64) -> DMatrix<f64> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let m = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
        &m * m.transpose() + DMatrix::identity(d, d) * 0.5
    }

    #[test]
    fn sqrt_squares_back() {
        let m = random_spd(3, 1);
        let s = sqrt_spd(&m).unwrap();
        assert_relative_eq!(&s * &s, m, epsilon = 1e-12);
    }

    #[test]
    fn inv_sqrt_is_inverse_of_sqrt() {
        let m = random_spd(2, 2);
        let s = sqrt_spd(&m).unwrap();
        let si = inv_sqrt_spd(&m).unwrap();
        assert_relative_eq!(&s * &si, DMatrix::identity(2, 2), epsilon = 1e-12);
    }

    #[test]
    fn rejects_indefinite() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -0.5]);
        assert!(check_spd(&m).is_err());
    }

    #[test]
    fn sylvester_solves_known_system() {
        // Non-symmetric factors so index transpositions cannot hide.
        let l = random_spd(3, 3) * DMatrix::from_fn(3, 3, |i, j| ((i * 3 + j) as f64).sin() + 1.5);
        let r = DMatrix::from_fn(3, 3, |i, j| ((2 * i + j) as f64).cos()) + random_spd(3, 4);
        let x = DMatrix::from_fn(3, 3, |i, j| (i + 2 * j) as f64 * 0.1 - 0.2);
        let c = &x * &l + &r * &x;
        let sol = solve_sylvester(&l, &r, &c).unwrap();
        assert_relative_eq!(sol, x, epsilon = 1e-9);
    }
}
