//! Hamiltonian dynamics of semiclassical (Gaussian-generated) wave packets.
//!
//! The crate implements the parameter dynamics of wave packets
//! `chi_n(q, p, A, B, phi, delta; x)` indexed by a multi-index `n`: the
//! packet evaluation and quadrature machinery, the corrected-potential
//! Hamiltonians and their vector fields on the full and reduced parameter
//! manifolds, the symplectic forms tying them together, structure-preserving
//! integrators, and a signed-Wigner phase-space reference method for
//! expectation values.

pub mod config;
pub mod dynamics;
pub mod egorov;
pub mod error;
pub mod experiment;
pub mod fd;
pub mod geometry;
pub mod grid;
pub mod integrators;
pub mod linalg;
pub mod multi_index;
pub mod output;
pub mod packet;
pub mod potential;
pub mod siegel;
pub mod validate;

pub use config::ExperimentConfig;
pub use dynamics::{ModelConfig, ReducedState, ReducedTangent};
pub use error::{Error, Result};
pub use integrators::{IntegratorSpec, Method, Trajectory};
pub use multi_index::MultiIndex;
pub use packet::{PacketParams, TangentVector};
pub use potential::{PolynomialPotential, PotentialTerm};
pub use siegel::{HagedornQP, SiegelPoint};
