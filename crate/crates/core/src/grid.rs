//! Grid evaluation of wave packets and quadrature-based inner products.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg;
use crate::multi_index::MultiIndex;
use crate::packet::PacketParams;

/// Quadrature grid: sample points with trapezoidal weights.
#[derive(Debug, Clone)]
pub struct Grid {
    points: Vec<DVector<f64>>,
    weights: Vec<f64>,
}

impl Grid {
    /// Uniform one-dimensional grid over `[center - half_width, center + half_width]`.
    pub fn uniform_1d(center: f64, half_width: f64, len: usize) -> Result<Self> {
        if len < 2 || !half_width.is_finite() || half_width <= 0.0 {
            return Err(Error::invalid("grid needs len >= 2 and positive width"));
        }
        let dx = 2.0 * half_width / (len - 1) as f64;
        let points = (0..len)
            .map(|i| DVector::from_element(1, center - half_width + i as f64 * dx))
            .collect();
        let mut weights = vec![dx; len];
        weights[0] = dx / 2.0;
        weights[len - 1] = dx / 2.0;
        Ok(Grid { points, weights })
    }

    /// Grid adapted to a packet: centered at `q` with half-width
    /// `12 sqrt(hbar * lambda_max(B^{-1})) (1 + sqrt(|n|))`, wide enough that
    /// excited states decay below quadrature resolution at the boundary.
    pub fn for_packet(y: &PacketParams, n: &MultiIndex, hbar: f64, len: usize) -> Result<Self> {
        if y.dim() != 1 {
            return Err(Error::invalid("quadrature grids are one-dimensional"));
        }
        let b_min = linalg::sym_eigenvalues(y.siegel.b()).min();
        let half = 12.0 * (hbar / b_min).sqrt() * (1.0 + (n.total() as f64).sqrt());
        Self::uniform_1d(y.q[0], half, len)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Spacing of a uniform 1-D grid.
    pub fn spacing_1d(&self) -> f64 {
        self.points[1][0] - self.points[0][0]
    }

    /// 1-D coordinates as a plain vector.
    pub fn coords_1d(&self) -> Vec<f64> {
        self.points.iter().map(|x| x[0]).collect()
    }
}

/// Evaluate the ground-state packet at a single point.
fn eval_ground(y: &PacketParams, hbar: f64, x: &DVector<f64>) -> Complex64 {
    let dx = x - &y.q;
    let c = y.siegel.to_complex();
    let quad = {
        let cdx = &c * dx.map(|v| Complex64::new(v, 0.0));
        let mut acc = Complex64::ZERO;
        for i in 0..dx.len() {
            acc += Complex64::new(dx[i], 0.0) * cdx[i];
        }
        acc * 0.5
    };
    let linear = Complex64::new(y.p.dot(&dx), 0.0);
    let phase = Complex64::new(y.phi, y.delta);
    ((quad + linear + phase) * Complex64::new(0.0, 1.0 / hbar)).exp()
}

/// Evaluate the packet indexed by `n` on a list of points.
///
/// The ground state is evaluated in closed form; excited states follow from
/// the three-term recurrence obtained by expressing the position operator in
/// ladder form,
/// `chi_{m+e_j} = [sqrt(2/hbar) (B^{1/2}(x-q))_j chi_m - sqrt(m_j) chi_{m-e_j}] / sqrt(m_j+1)`,
/// applied |n| times axis by axis.
pub fn eval_packet_grid(
    y: &PacketParams,
    n: &MultiIndex,
    hbar: f64,
    points: &[DVector<f64>],
) -> Result<Vec<Complex64>> {
    if hbar <= 0.0 {
        return Err(Error::invalid("hbar must be positive"));
    }
    if n.dim() != y.dim() {
        return Err(Error::dimension("multi-index and packet dimensions differ"));
    }
    if let Some(bad) = points.iter().find(|x| x.iter().any(|v| !v.is_finite())) {
        return Err(Error::invalid(format!("non-finite grid point {bad:?}")));
    }

    let d = y.dim();
    let b_sqrt = linalg::sqrt_spd(y.siegel.b())?;
    let scale = (2.0 / hbar).sqrt();
    // ladder_factor[k][j] = sqrt(2/hbar) * (B^{1/2} (x_k - q))_j
    let ladder_factor: Vec<DVector<f64>> = points
        .iter()
        .map(|x| (&b_sqrt * (x - &y.q)) * scale)
        .collect();

    let mut cur: Vec<Complex64> = points.iter().map(|x| eval_ground(y, hbar, x)).collect();
    if cur.iter().any(|v| !v.is_finite()) {
        return Err(Error::numerical(
            "packet evaluation overflowed; normalize delta before evaluating",
        ));
    }
    for j in 0..d {
        let mut prev: Vec<Complex64> = vec![Complex64::ZERO; points.len()];
        for k in 0..n.get(j) {
            let up_scale = 1.0 / ((k + 1) as f64).sqrt();
            let down = (k as f64).sqrt();
            let next: Vec<Complex64> = (0..points.len())
                .map(|i| (ladder_factor[i][j] * cur[i] - down * prev[i]) * up_scale)
                .collect();
            prev = std::mem::replace(&mut cur, next);
        }
    }
    Ok(cur)
}

/// Trapezoidal approximation of the L2 inner product `<f, g>` (conjugate-linear
/// in the first slot).
pub fn inner_product(f: &[Complex64], g: &[Complex64], grid: &Grid) -> Result<Complex64> {
    if f.len() != grid.len() || g.len() != grid.len() {
        return Err(Error::dimension(format!(
            "sample lengths {} and {} do not match grid length {}",
            f.len(),
            g.len(),
            grid.len()
        )));
    }
    Ok(grid
        .weights
        .iter()
        .zip(f.iter().zip(g.iter()))
        .map(|(&w, (a, b))| a.conj() * b * w)
        .sum())
}

/// Sixth-order central first derivative of grid samples; endpoints are left
/// zero, which is harmless for packets that have decayed at the boundary.
pub fn derivative_1d(f: &[Complex64], dx: f64) -> Vec<Complex64> {
    let n = f.len();
    let mut out = vec![Complex64::ZERO; n];
    if n < 7 {
        return out;
    }
    let inv = 1.0 / (60.0 * dx);
    for i in 3..n - 3 {
        out[i] = (-f[i - 3] + 9.0 * f[i - 2] - 45.0 * f[i - 1] + 45.0 * f[i + 1]
            - 9.0 * f[i + 2]
            + f[i + 3])
            * inv;
    }
    out
}

/// Write grid samples as CSV with columns `x..., re, im, abs2`.
pub fn write_samples_csv<W: std::io::Write>(
    mut w: W,
    grid: &Grid,
    samples: &[Complex64],
) -> Result<()> {
    if samples.len() != grid.len() {
        return Err(Error::dimension("samples do not match grid"));
    }
    let d = grid.points[0].len();
    let xcols: Vec<String> = if d == 1 {
        vec!["x".to_string()]
    } else {
        (1..=d).map(|i| format!("x{i}")).collect()
    };
    writeln!(w, "{},re,im,abs2", xcols.join(","))?;
    for (x, v) in grid.points.iter().zip(samples.iter()) {
        let coords: Vec<String> = x.iter().map(|c| crate::output::fmt_f64(*c)).collect();
        writeln!(
            w,
            "{},{},{},{}",
            coords.join(","),
            crate::output::fmt_f64(v.re),
            crate::output::fmt_f64(v.im),
            crate::output::fmt_f64(v.norm_sqr())
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::packet::normalizing_delta;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use nalgebra::DMatrix;

    fn packet_1d(hbar: f64, a: f64, b: f64) -> PacketParams {
        let delta = normalizing_delta(&DMatrix::from_element(1, 1, b), hbar);
        PacketParams::scalar(0.0, 0.0, a, b, 0.0, delta).unwrap()
    }

    #[test]
    fn ground_state_at_center() {
        // chi_0(q) = exp{(i/hbar)(phi + i delta)}
        let hbar = 0.5;
        let y = PacketParams::scalar(0.3, 0.9, 0.2, 1.1, 0.4, 0.07).unwrap();
        let v = eval_packet_grid(
            &y,
            &MultiIndex::scalar(0),
            hbar,
            &[DVector::from_element(1, 0.3)],
        )
        .unwrap()[0];
        let expect = (Complex64::new(y.phi, y.delta) * Complex64::new(0.0, 1.0 / hbar)).exp();
        assert_relative_eq!(v.re, expect.re, epsilon = 1e-14);
        assert_relative_eq!(v.im, expect.im, epsilon = 1e-14);
    }

    #[test]
    fn first_excited_over_ground_is_scaled_coordinate() {
        // hbar = 1, B = 1: chi_1 / chi_0 = sqrt(2) x
        let y = packet_1d(1.0, 0.0, 1.0);
        let pts: Vec<DVector<f64>> = [-1.3, -0.4, 0.2, 0.9]
            .iter()
            .map(|&x| DVector::from_element(1, x))
            .collect();
        let c0 = eval_packet_grid(&y, &MultiIndex::scalar(0), 1.0, &pts).unwrap();
        let c1 = eval_packet_grid(&y, &MultiIndex::scalar(1), 1.0, &pts).unwrap();
        for (i, x) in pts.iter().enumerate() {
            let ratio = c1[i] / c0[i];
            assert_relative_eq!(ratio.re, 2.0_f64.sqrt() * x[0], epsilon = 1e-12);
            assert_abs_diff_eq!(ratio.im, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn norms_are_preserved_by_raising() {
        let hbar = 0.05;
        let y = packet_1d(hbar, 0.0, 1.0);
        for n in [0usize, 1, 4, 10] {
            let idx = MultiIndex::scalar(n);
            let grid = Grid::for_packet(&y, &idx, hbar, 4096).unwrap();
            let f = eval_packet_grid(&y, &idx, hbar, grid.points()).unwrap();
            let nrm = inner_product(&f, &f, &grid).unwrap();
            assert_relative_eq!(nrm.re, 1.0, epsilon = 1e-8);
            assert_abs_diff_eq!(nrm.im, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn excited_states_are_orthogonal() {
        let hbar = 0.05;
        let y = packet_1d(hbar, 0.4, 1.3);
        let idx10 = MultiIndex::scalar(10);
        let grid = Grid::for_packet(&y, &idx10, hbar, 4096).unwrap();
        let states: Vec<Vec<Complex64>> = (0..=10)
            .map(|n| eval_packet_grid(&y, &MultiIndex::scalar(n), hbar, grid.points()).unwrap())
            .collect();
        for m in 0..=10usize {
            for n in 0..=10usize {
                let ip = inner_product(&states[m], &states[n], &grid).unwrap();
                let expect = if m == n { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(ip.re, expect, epsilon = 1e-8);
                assert_abs_diff_eq!(ip.im, 0.0, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn centered_first_moment_vanishes() {
        // <chi_n, (x - q) chi_n> = 0
        let hbar = 0.05;
        let y = packet_1d(hbar, -0.2, 0.8);
        let idx = MultiIndex::scalar(3);
        let grid = Grid::for_packet(&y, &idx, hbar, 4096).unwrap();
        let f = eval_packet_grid(&y, &idx, hbar, grid.points()).unwrap();
        let xf: Vec<Complex64> = grid
            .points()
            .iter()
            .zip(f.iter())
            .map(|(x, v)| v * (x[0] - y.q[0]))
            .collect();
        let ip = inner_product(&f, &xf, &grid).unwrap();
        assert_abs_diff_eq!(ip.re, 0.0, epsilon = 1e-8);
        assert_abs_diff_eq!(ip.im, 0.0, epsilon = 1e-8);
    }

    #[test]
    fn three_term_identity_links_neighbors() {
        // sqrt(2/hbar) B^{1/2}(x-q) chi_n = sqrt(n) chi_{n-1} + sqrt(n+1) chi_{n+1}:
        // raising then lowering is the identity on grid values.
        let hbar = 0.05;
        let y = packet_1d(hbar, 0.3, 1.2);
        let grid = Grid::for_packet(&y, &MultiIndex::scalar(6), hbar, 2048).unwrap();
        let pts = grid.points();
        for n in [1usize, 2, 5] {
            let lo = eval_packet_grid(&y, &MultiIndex::scalar(n - 1), hbar, pts).unwrap();
            let mid = eval_packet_grid(&y, &MultiIndex::scalar(n), hbar, pts).unwrap();
            let hi = eval_packet_grid(&y, &MultiIndex::scalar(n + 1), hbar, pts).unwrap();
            let b_sqrt = y.siegel.b()[(0, 0)].sqrt();
            for i in 0..pts.len() {
                let lhs = (2.0 / hbar).sqrt() * b_sqrt * (pts[i][0] - y.q[0]) * mid[i];
                let rhs = (n as f64).sqrt() * lo[i] + ((n + 1) as f64).sqrt() * hi[i];
                let denom = lhs.norm().max(1e-30);
                assert!(
                    (lhs - rhs).norm() / denom < 1e-10 || lhs.norm() < 1e-20,
                    "identity violated at point {i} for n = {n}"
                );
            }
        }
    }

    #[test]
    fn mismatched_grid_is_an_error() {
        let grid = Grid::uniform_1d(0.0, 1.0, 8).unwrap();
        let f = vec![Complex64::ZERO; 8];
        let g = vec![Complex64::ZERO; 7];
        assert!(inner_product(&f, &g, &grid).is_err());
    }

    #[test]
    fn overflow_is_reported() {
        // Gigantic negative delta inflates exp(delta-part) past f64 range.
        let y = PacketParams::scalar(0.0, 0.0, 0.0, 1.0, 0.0, -1e6).unwrap();
        let r = eval_packet_grid(
            &y,
            &MultiIndex::scalar(0),
            0.01,
            &[DVector::from_element(1, 0.0)],
        );
        assert!(r.is_err());
    }
}
