//! Polynomial potentials with exact derivatives up to third order.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// One monomial `coeff * x^exponents`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialTerm {
    pub coeff: f64,
    pub exponents: Vec<u32>,
}

/// Potential `V(x) = sum_alpha c_alpha x^alpha` over R^d.
///
/// The dynamics requires V bounded below (callers assert this); the
/// constructor only warns when the top-degree 1-D coefficient is negative.
/// Growth conditions on higher derivatives hold for every polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialPotential {
    terms: Vec<PotentialTerm>,
    dim: usize,
}

impl PolynomialPotential {
    pub fn new(terms: Vec<PotentialTerm>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("potential dimension must be positive"));
        }
        for t in &terms {
            if t.exponents.len() != dim {
                return Err(Error::dimension(format!(
                    "term exponents {:?} do not match dimension {dim}",
                    t.exponents
                )));
            }
            if !t.coeff.is_finite() {
                return Err(Error::invalid("non-finite coefficient"));
            }
        }
        if dim == 1 {
            if let Some(top) = terms.iter().max_by_key(|t| t.exponents[0]) {
                if top.coeff < 0.0 {
                    log::warn!(
                        "top-degree coefficient {} is negative; potential is unbounded below",
                        top.coeff
                    );
                }
            }
        }
        Ok(PolynomialPotential { terms, dim })
    }

    /// 1-D polynomial from coefficients of ascending powers x^1, x^2, ...
    /// (no constant term).
    pub fn from_coeffs_1d(coeffs: &[f64]) -> Result<Self> {
        let terms = coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0.0)
            .map(|(k, &c)| PotentialTerm {
                coeff: c,
                exponents: vec![k as u32 + 1],
            })
            .collect();
        Self::new(terms, 1)
    }

    /// The cubic well with quartic confinement used in the escape experiment:
    /// `V(x) = 2 x^2 + x^3 + 0.1 x^4`.
    pub fn cubic_well() -> Self {
        Self::from_coeffs_1d(&[0.0, 2.0, 1.0, 0.1]).expect("static coefficients")
    }

    /// `V(x) = 2 x^2`, the quadratic reference case.
    pub fn quadratic_well() -> Self {
        Self::from_coeffs_1d(&[0.0, 2.0]).expect("static coefficients")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[PotentialTerm] {
        &self.terms
    }

    pub fn eval(&self, q: &DVector<f64>) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coeff * monomial(q, &t.exponents))
            .sum()
    }

    pub fn gradient(&self, q: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim);
        self.gradient_into(q, &mut out);
        out
    }

    /// Allocation-free gradient for hot loops (ensemble propagation).
    pub fn gradient_into(&self, q: &DVector<f64>, out: &mut DVector<f64>) {
        for l in 0..self.dim {
            out[l] = self
                .terms
                .iter()
                .map(|t| t.coeff * monomial_derivative(q, &t.exponents, &[l]))
                .sum();
        }
    }

    pub fn hessian(&self, q: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |j, k| {
            self.terms
                .iter()
                .map(|t| t.coeff * monomial_derivative(q, &t.exponents, &[j, k]))
                .sum()
        })
    }

    /// Contraction of the third derivative with a symmetric matrix:
    /// `out_l = sum_{jk} M_{jk} d^3 V / dx_j dx_k dx_l`.
    pub fn third_contract(&self, q: &DVector<f64>, m: &DMatrix<f64>) -> DVector<f64> {
        DVector::from_fn(self.dim, |l, _| {
            let mut acc = 0.0;
            for j in 0..self.dim {
                for k in 0..self.dim {
                    if m[(j, k)] == 0.0 {
                        continue;
                    }
                    acc += m[(j, k)]
                        * self
                            .terms
                            .iter()
                            .map(|t| t.coeff * monomial_derivative(q, &t.exponents, &[j, k, l]))
                            .sum::<f64>();
                }
            }
            acc
        })
    }
}

fn monomial(q: &DVector<f64>, exponents: &[u32]) -> f64 {
    exponents
        .iter()
        .enumerate()
        .map(|(i, &e)| q[i].powi(e as i32))
        .product()
}

/// Exact partial derivative of a monomial with respect to the listed axes.
/// Allocation-free: differentiates axis counts on the fly.
fn monomial_derivative(q: &DVector<f64>, exponents: &[u32], axes: &[usize]) -> f64 {
    let mut factor = 1.0;
    let mut product = 1.0;
    for (i, &e) in exponents.iter().enumerate() {
        let mut rem = e as i64;
        for &ax in axes {
            if ax == i {
                if rem == 0 {
                    return 0.0;
                }
                factor *= rem as f64;
                rem -= 1;
            }
        }
        product *= q[i].powi(rem as i32);
    }
    factor * product
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::{Rng, SeedableRng};

    fn at(x: f64) -> DVector<f64> {
        DVector::from_element(1, x)
    }

    #[test]
    fn cubic_well_values() {
        let v = PolynomialPotential::cubic_well();
        assert_eq!(v.eval(&at(0.0)), 0.0);
        assert_relative_eq!(v.eval(&at(0.25)), 0.141015625, epsilon = 1e-15);
        // Local maximum of the well barrier.
        assert_abs_diff_eq!(v.eval(&at(-1.73444)), 1.70386, epsilon = 1e-4);
        assert_abs_diff_eq!(v.gradient(&at(-1.73444))[0], 0.0, epsilon = 1e-4);
    }

    #[test]
    fn cubic_well_derivatives_at_quarter() {
        let v = PolynomialPotential::cubic_well();
        let q = at(0.25);
        assert_relative_eq!(v.gradient(&q)[0], 1.19375, epsilon = 1e-15);
        assert_relative_eq!(v.hessian(&q)[(0, 0)], 5.575, epsilon = 1e-15);
        let third = v.third_contract(&q, &DMatrix::from_element(1, 1, 1.0));
        assert_relative_eq!(third[0], 6.6, epsilon = 1e-15);
        let scaled = v.third_contract(&q, &DMatrix::from_element(1, 1, 3.0));
        assert_relative_eq!(scaled[0], 19.8, epsilon = 1e-12);
    }

    #[test]
    fn quadratic_has_no_third_derivative() {
        let v = PolynomialPotential::quadratic_well();
        for x in [-2.0, 0.0, 0.7, 3.1] {
            let t = v.third_contract(&at(x), &DMatrix::from_element(1, 1, 5.0));
            assert_eq!(t[0], 0.0);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let v = PolynomialPotential::new(
            vec![
                PotentialTerm {
                    coeff: 0.8,
                    exponents: vec![2, 0],
                },
                PotentialTerm {
                    coeff: -0.3,
                    exponents: vec![1, 2],
                },
                PotentialTerm {
                    coeff: 0.05,
                    exponents: vec![0, 4],
                },
                PotentialTerm {
                    coeff: 0.2,
                    exponents: vec![3, 1],
                },
            ],
            2,
        )
        .unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let h = 1e-5;
        for _ in 0..100 {
            let q = DVector::from_fn(2, |_, _| rng.random_range(-1.5..1.5));
            // gradient vs central differences of eval
            for l in 0..2 {
                let mut qp = q.clone();
                let mut qm = q.clone();
                qp[l] += h;
                qm[l] -= h;
                let fd = (v.eval(&qp) - v.eval(&qm)) / (2.0 * h);
                let refv = v.gradient(&q)[l];
                let scale = refv.abs().max(1.0);
                assert!((fd - refv).abs() / scale < 1e-7);
            }
            // hessian vs central differences of gradient
            for l in 0..2 {
                let mut qp = q.clone();
                let mut qm = q.clone();
                qp[l] += h;
                qm[l] -= h;
                let fd = (v.gradient(&qp) - v.gradient(&qm)) / (2.0 * h);
                for j in 0..2 {
                    let refv = v.hessian(&q)[(j, l)];
                    let scale = refv.abs().max(1.0);
                    assert!((fd[j] - refv).abs() / scale < 1e-7);
                }
            }
            // third contraction vs directional differences of the hessian
            let m = {
                let raw = DMatrix::from_fn(2, 2, |_, _| rng.random_range(-1.0..1.0));
                crate::linalg::symmetrize(&raw)
            };
            let t = v.third_contract(&q, &m);
            for l in 0..2 {
                let mut qp = q.clone();
                let mut qm = q.clone();
                qp[l] += h;
                qm[l] -= h;
                let dh = (v.hessian(&qp) - v.hessian(&qm)) / (2.0 * h);
                let fd: f64 = (0..2)
                    .flat_map(|j| (0..2).map(move |k| (j, k)))
                    .map(|(j, k)| m[(j, k)] * dh[(j, k)])
                    .sum();
                let scale = t[l].abs().max(1.0);
                assert!((fd - t[l]).abs() / scale < 1e-7);
            }
        }
    }
}
