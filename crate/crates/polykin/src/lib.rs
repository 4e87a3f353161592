//! Kinetic-theory toolkit for a polyatomic gas whose molecules carry an
//! internal energy variable `I` alongside the velocity `v`.
//!
//! The crate provides, in thermal units throughout:
//!
//! * the phase-space model: gas parameters, the global Maxwellian
//!   `M(v, I) ∝ I^{δ/2-1} e^{-|v|²/2 - I}`, the polynomial weight
//!   `w = (1 + |v| + √I)^β`, and the energy-based transition function `B`
//!   ([`model`]);
//! * the Borgnakke-Larsen post-collision transform together with exact
//!   sampling of its angular/energy-split measure ([`collision`]);
//! * deterministic phase-space quadrature and seeded importance-sampling
//!   Monte Carlo over `(v, I)` ([`quadrature`]);
//! * scalar functionals of a distribution: collision frequency, conserved
//!   moments, relative entropy and its quadratic/linear split, weighted sup
//!   norms and the Boltzmann `H` integral ([`functionals`]);
//! * the linearized collision operator: the closed-form loss kernel `k₁`,
//!   Monte-Carlo application of the gain part `K₂`, and numerical probes of
//!   the weighted kernel bounds ([`linearized`]);
//! * Monte-Carlo evaluation of the quadratic forms `Γ₊`, `Γ₋` and the loss
//!   operator `R(f)` with its lower-bound probe ([`nonlinear`]);
//! * a direct-simulation Monte Carlo particle solver on the unit 3-torus
//!   with majorant (no-time-counter) collision sampling and per-step
//!   conservation/entropy diagnostics ([`dsmc`]).
//!
//! Everything that consumes randomness takes an explicit seed and derives
//! independent substreams, so results are reproducible bit for bit and do
//! not depend on how work is spread across threads.
//!
//! ```
//! use polykin::{GasParams, MicroState};
//! use polykin::functionals::collision_frequency;
//! use polykin::quadrature::PhaseGrid;
//!
//! let gas = GasParams::maxwell_defaults();
//! let grid = PhaseGrid::new(10.0, 30.0, 24, 24).unwrap();
//! // For α = 0 the collision frequency closes to c₂(|v|²/4 + 3/4 + I + 1).
//! let nu = collision_frequency(&gas, &MicroState::origin(), &grid);
//! assert!((nu - 28.0 * std::f64::consts::PI / 15.0).abs() < 1e-4);
//! ```

pub mod collision;
pub mod dsmc;
mod error;
pub mod functionals;
pub mod linearized;
pub mod model;
pub mod nonlinear;
pub mod quadrature;
pub mod rng;
pub mod stats;

pub use error::Error;
pub use model::{GasParams, MicroState, PairState};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
