//! Phase-space model: gas parameters, one- and two-particle states, the
//! global Maxwellian with internal energy, the polynomial weight, and the
//! energy-based transition function.
//!
//! A molecule is a point `(v, I)` with velocity `v ∈ ℝ³` and internal
//! energy `I ≥ 0`, both in thermal units (unit reference temperature, zero
//! bulk velocity). The number of internal degrees of freedom `δ ≥ 2` may be
//! non-integer.

use nalgebra::Vector3;
use statrs::function::gamma::ln_gamma;

use crate::{Error, Result};

/// Physical model constants.
///
/// * `delta`: internal degrees of freedom, `δ ≥ 2`;
/// * `alpha`: potential exponent in the transition function, `0 ≤ α < 2`;
/// * `c_b`: multiplicative constant of the transition function, `C > 0`;
/// * `beta`: exponent of the sup-norm weight, `β > 7`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasParams {
    delta: f64,
    alpha: f64,
    c_b: f64,
    beta: f64,
}

impl GasParams {
    pub fn new(delta: f64, alpha: f64, c_b: f64, beta: f64) -> Result<Self> {
        if !(delta.is_finite() && delta >= 2.0) {
            return Err(Error::InvalidParam {
                name: "delta",
                value: delta,
                constraint: "delta >= 2",
            });
        }
        if !(alpha.is_finite() && (0.0..2.0).contains(&alpha)) {
            return Err(Error::InvalidParam {
                name: "alpha",
                value: alpha,
                constraint: "0 <= alpha < 2",
            });
        }
        if !(c_b.is_finite() && c_b > 0.0) {
            return Err(Error::InvalidParam {
                name: "c_b",
                value: c_b,
                constraint: "c_b > 0",
            });
        }
        if !(beta.is_finite() && beta > 7.0) {
            return Err(Error::InvalidParam {
                name: "beta",
                value: beta,
                constraint: "beta > 7",
            });
        }
        Ok(Self {
            delta,
            alpha,
            c_b,
            beta,
        })
    }

    /// Maxwell gas defaults: `δ = 2`, `α = 0`, `C = 1`, `β = 8`.
    pub fn maxwell_defaults() -> Self {
        Self::new(2.0, 0.0, 1.0, 8.0).expect("defaults satisfy the invariants")
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn c_b(&self) -> f64 {
        self.c_b
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `δ/2 − 1`, the exponent of the internal-energy factor `I^{δ/2−1}`.
    pub(crate) fn i_exponent(&self) -> f64 {
        0.5 * self.delta - 1.0
    }

    /// `ln Γ(δ/2)`.
    pub(crate) fn ln_gamma_half_delta(&self) -> f64 {
        ln_gamma(0.5 * self.delta)
    }

    /// The global equilibrium density
    /// `M(v, I) = I^{δ/2−1} e^{−|v|²/2 − I} / ((2π)^{3/2} Γ(δ/2))`.
    ///
    /// Normalized to unit mass over `ℝ³ × ℝ₊`; its `v`-marginal is standard
    /// normal per component and its `I`-marginal is Gamma(δ/2, 1).
    pub fn maxwellian(&self, s: &MicroState) -> f64 {
        self.maxwellian_t(1.0, s)
    }

    /// Scaled equilibrium family at temperature `T`:
    /// `M_T(v, I) = I^{δ/2−1} e^{−|v|²/(2T) − I/T} / ((2πT)^{3/2} Γ(δ/2) T^{δ/2})`.
    ///
    /// `maxwellian_t(1.0, s)` is the reference Maxwellian; other members are
    /// the equilibria reached by energy-conserving collisions from
    /// non-unit-temperature initial data.
    pub fn maxwellian_t(&self, temperature: f64, s: &MicroState) -> f64 {
        let t = temperature;
        let a = self.i_exponent();
        // 0^0 = 1 covers δ = 2 at I = 0; powf(0, a > 0) = 0 covers δ > 2.
        let ipow = if a == 0.0 { 1.0 } else { s.i_energy.powf(a) };
        let ln_norm =
            1.5 * (std::f64::consts::TAU * t).ln() + self.ln_gamma_half_delta() + 0.5 * self.delta * t.ln();
        ipow * (-0.5 * s.v.norm_squared() / t - s.i_energy / t - ln_norm).exp()
    }

    /// `√M(v, I)`, evaluated without forming `M` first.
    pub fn sqrt_maxwellian(&self, s: &MicroState) -> f64 {
        let a = 0.5 * self.i_exponent();
        let ipow = if a == 0.0 { 1.0 } else { s.i_energy.powf(a) };
        let ln_norm = 0.75 * std::f64::consts::TAU.ln() + 0.5 * self.ln_gamma_half_delta();
        ipow * (-0.25 * s.v.norm_squared() - 0.5 * s.i_energy - ln_norm).exp()
    }

    /// The Maxwellian with its `I^{δ/2−1}` factor stripped:
    /// `m(v, I) = e^{−|v|²/2 − I} / ((2π)^{3/2} Γ(δ/2))`, so `M = I^{δ/2−1} m`.
    ///
    /// The product `m m_*` is invariant under the collision transform (it
    /// depends on the pair only through conserved quantities), which makes
    /// `m` the numerically convenient factorization inside gain-term
    /// integrands.
    pub(crate) fn reduced_maxwellian(&self, s: &MicroState) -> f64 {
        let ln_norm = 1.5 * std::f64::consts::TAU.ln() + self.ln_gamma_half_delta();
        (-0.5 * s.v.norm_squared() - s.i_energy - ln_norm).exp()
    }

    /// The sup-norm weight `w(v, I) = (1 + |v| + √I)^β ≥ 1`.
    pub fn weight(&self, s: &MicroState) -> f64 {
        (1.0 + s.v.norm() + s.i_energy.sqrt()).powf(self.beta)
    }

    /// Transition function `B = C (|v − v_*|²/4 + I + I_*)^{(2−α)/2}`.
    ///
    /// Depends on the pair only through its total energy in the
    /// center-of-mass frame, so it is symmetric in the two particles and
    /// invariant under a common velocity translation. Vanishes only for the
    /// fully degenerate pair (zero relative speed, zero internal energies).
    pub fn transition_b(&self, p: &PairState) -> f64 {
        self.c_b * p.total_energy().powf(0.5 * (2.0 - self.alpha))
    }
}

/// One-particle phase point `(v, I)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MicroState {
    /// Velocity, thermal units.
    pub v: Vector3<f64>,
    /// Internal energy `I ≥ 0`.
    pub i_energy: f64,
}

impl MicroState {
    pub fn new(v: Vector3<f64>, i_energy: f64) -> Self {
        debug_assert!(v.iter().all(|c| c.is_finite()) && i_energy >= 0.0);
        Self { v, i_energy }
    }

    pub fn from_parts(vx: f64, vy: f64, vz: f64, i_energy: f64) -> Self {
        Self::new(Vector3::new(vx, vy, vz), i_energy)
    }

    /// The rest state `v = 0`, `I = 0`.
    pub fn origin() -> Self {
        Self::new(Vector3::zeros(), 0.0)
    }

    pub fn speed(&self) -> f64 {
        self.v.norm()
    }

    /// Kinetic plus internal energy `|v|²/2 + I`, the scalar collision
    /// invariant alongside mass and momentum.
    pub fn total_energy(&self) -> f64 {
        0.5 * self.v.norm_squared() + self.i_energy
    }

    pub fn is_valid(&self) -> bool {
        self.v.iter().all(|c| c.is_finite()) && self.i_energy.is_finite() && self.i_energy >= 0.0
    }
}

/// An unordered particle pair entering (or leaving) a collision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairState {
    pub a: MicroState,
    pub b: MicroState,
}

impl PairState {
    pub fn new(a: MicroState, b: MicroState) -> Self {
        Self { a, b }
    }

    /// Relative velocity `u = v − v_*`.
    pub fn relative_velocity(&self) -> Vector3<f64> {
        self.a.v - self.b.v
    }

    /// Center-of-mass velocity `G = (v + v_*)/2`.
    pub fn center_of_mass(&self) -> Vector3<f64> {
        0.5 * (self.a.v + self.b.v)
    }

    /// Total redistributable energy `E = |u|²/4 + I + I_*` in the
    /// center-of-mass frame; conserved by the collision transform.
    pub fn total_energy(&self) -> f64 {
        0.25 * self.relative_velocity().norm_squared() + self.a.i_energy + self.b.i_energy
    }
}
