//! The Borgnakke-Larsen collision transform and exact sampling of its
//! angular/energy-split measure.
//!
//! A collision of a pair with total center-of-mass energy
//! `E = |u|²/4 + I + I_*` is parameterized by a scattering direction
//! `ω ∈ S²`, a kinetic fraction `R ∈ [0, 1]` and an internal split
//! `r ∈ [0, 1]`:
//!
//! * post-collision relative speed `|u'| = 2√(RE)` along `ω`,
//! * internal energies `I' = r(1−R)E` and `I'_* = (1−r)(1−R)E`.
//!
//! Momentum and total energy are conserved by construction. The collision
//! measure weights the parameters by
//! `(r(1−r))^{δ/2−1} (1−R)^{δ−1} R^{1/2} dω dR dr`, i.e. `ω` uniform,
//! `R ~ Beta(3/2, δ)` and `r ~ Beta(δ/2, δ/2)` after normalization; the
//! total mass of that measure is [`collision_rate_factor`].

use nalgebra::Vector3;
use rand::Rng;
use rand_distr::{Beta, Distribution, StandardNormal};
use statrs::function::gamma::ln_gamma;

use crate::model::{GasParams, MicroState, PairState};
use crate::{Error, Result};

/// Borgnakke-Larsen collision parameters `(ω, R, r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollisionAngles {
    /// Scattering direction, unit vector.
    pub omega: Vector3<f64>,
    /// Kinetic-energy fraction `R ∈ [0, 1]`.
    pub big_r: f64,
    /// Internal-energy split `r ∈ [0, 1]`.
    pub small_r: f64,
}

impl CollisionAngles {
    pub fn new(omega: Vector3<f64>, big_r: f64, small_r: f64) -> Result<Self> {
        if (omega.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParam {
                name: "omega",
                value: omega.norm(),
                constraint: "|omega| = 1 within 1e-12",
            });
        }
        if !(0.0..=1.0).contains(&big_r) {
            return Err(Error::InvalidParam {
                name: "big_r",
                value: big_r,
                constraint: "0 <= R <= 1",
            });
        }
        if !(0.0..=1.0).contains(&small_r) {
            return Err(Error::InvalidParam {
                name: "small_r",
                value: small_r,
                constraint: "0 <= r <= 1",
            });
        }
        Ok(Self {
            omega,
            big_r,
            small_r,
        })
    }
}

/// Apply the Borgnakke-Larsen transform to a pair.
///
/// The center of mass `G` is computed once and reused for both outgoing
/// velocities, so momentum is conserved to the last bit pair-wise and total
/// energy to a few ulp. `E = 0` maps to the rest pair at `G` with zero
/// internal energies.
pub fn apply_collision(p: &PairState, c: &CollisionAngles) -> PairState {
    let g = p.center_of_mass();
    let e = p.total_energy();
    let half_u_prime = c.omega * (c.big_r * e).sqrt();
    let e_int = (1.0 - c.big_r) * e;
    PairState::new(
        MicroState::new(g + half_u_prime, c.small_r * e_int),
        MicroState::new(g - half_u_prime, (1.0 - c.small_r) * e_int),
    )
}

/// Exact sampler for the normalized collision measure, caching the two Beta
/// distributions for a fixed `δ`.
#[derive(Debug, Clone)]
pub struct AngleSampler {
    kinetic_fraction: Beta<f64>,
    internal_split: Beta<f64>,
}

impl AngleSampler {
    pub fn new(params: &GasParams) -> Self {
        let d = params.delta();
        Self {
            kinetic_fraction: Beta::new(1.5, d).expect("valid shape pair (3/2, delta)"),
            internal_split: Beta::new(0.5 * d, 0.5 * d).expect("valid shape pair (delta/2, delta/2)"),
        }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> CollisionAngles {
        CollisionAngles {
            omega: sample_unit_sphere(rng),
            big_r: self.kinetic_fraction.sample(rng),
            small_r: self.internal_split.sample(rng),
        }
    }
}

/// Draw `(ω, R, r)` from the normalized collision measure: `ω` uniform on
/// the sphere, `R ~ Beta(3/2, δ)`, `r ~ Beta(δ/2, δ/2)`, independently.
///
/// For bulk sampling at fixed `δ` prefer [`AngleSampler`], which this
/// delegates to.
pub fn sample_angles(params: &GasParams, rng: &mut impl Rng) -> CollisionAngles {
    AngleSampler::new(params).sample(rng)
}

/// Uniform direction via a normalized 3-D Gaussian draw.
fn sample_unit_sphere(rng: &mut impl Rng) -> Vector3<f64> {
    loop {
        let g = Vector3::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        );
        let n = g.norm();
        if n > 1e-150 {
            return g / n;
        }
    }
}

/// Total mass of the angular/energy-split measure,
/// `c_δ = 4π · Β(δ/2, δ/2) · Β(3/2, δ)`.
///
/// With it the loss rate of a pair is `c_δ B(pair)` and integrals against
/// the normalized measure pick up a single factor of `c_δ`.
pub fn collision_rate_factor(params: &GasParams) -> f64 {
    let d = params.delta();
    let ln_beta_rr = 2.0 * ln_gamma(0.5 * d) - ln_gamma(d);
    let ln_beta_big_r = ln_gamma(1.5) + ln_gamma(d) - ln_gamma(1.5 + d);
    2.0 * std::f64::consts::TAU * (ln_beta_rr + ln_beta_big_r).exp()
}
