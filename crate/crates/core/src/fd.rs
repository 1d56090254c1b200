//! Finite-difference stencils used by the verification oracles.

/// Default step for directional derivatives.
pub const DEFAULT_STEP: f64 = 1e-4;

/// Fourth-order central directional derivative of `g` at 0.
pub fn directional<F: Fn(f64) -> f64>(g: F, h: f64) -> f64 {
    (8.0 * (g(h) - g(-h)) - (g(2.0 * h) - g(-2.0 * h))) / (12.0 * h)
}

/// Second-order central directional derivative of `g` at 0.
pub fn directional_2nd<F: Fn(f64) -> f64>(g: F, h: f64) -> f64 {
    (g(h) - g(-h)) / (2.0 * h)
}
