//! The linearized collision operator around the global Maxwellian.
//!
//! Writing `F = M + √M f`, the linear part is `Lf = ν f − Kf` with
//! `K = K₂ − K₁`. The loss kernel collapses in the Borgnakke-Larsen
//! parameterization to the closed form
//! `k₁(v, v_*, I, I_*) = c_δ B(v, v_*, I, I_*) √(M M_*)`, so `K₁` is a
//! deterministic quadrature. The gain part `K₂` has no pointwise kernel
//! formula amenable to tabulation (it lives on the collision manifold), so
//! it is applied to test functions by Monte Carlo over
//! `(ω, R, r, v_*, I_*)` with post-collision states from the exact
//! transform. Probes of the weighted kernel bounds combine both
//! applications on the bound's own test function.

use rayon::prelude::*;

use crate::collision::{apply_collision, collision_rate_factor, AngleSampler};
use crate::model::{GasParams, MicroState, PairState};
use crate::quadrature::{GridFunction, McConfig, McEstimate, MixtureProposal, PhaseGrid, Proposal};
use crate::rng::{substream, tag};
use crate::stats::KahanSum;
use crate::{Error, Result};
use std::sync::Arc;

/// Argument pair `(v, I), (v_*, I_*)` of a kernel evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelPoint {
    pub s: MicroState,
    pub s_star: MicroState,
}

/// The loss kernel `k₁ = c_δ B √(M M_*)`; nonnegative and symmetric.
pub fn kernel_k1(params: &GasParams, kp: &KernelPoint) -> f64 {
    collision_rate_factor(params)
        * params.transition_b(&PairState::new(kp.s, kp.s_star))
        * params.sqrt_maxwellian(&kp.s)
        * params.sqrt_maxwellian(&kp.s_star)
}

/// `(K₁ φ)(s) = ∫ k₁(s, ·) φ(·) dv_* dI_*` by grid quadrature.
pub fn apply_k1(params: &GasParams, phi: &GridFunction, s: &MicroState) -> f64 {
    let values = phi.values();
    let sqrt_m_s = params.sqrt_maxwellian(s);
    let c_delta = collision_rate_factor(params);
    phi.grid().integrate_fn_indexed(|idx, star| {
        c_delta
            * params.transition_b(&PairState::new(*s, *star))
            * sqrt_m_s
            * params.sqrt_maxwellian(star)
            * values[idx]
    })
}

/// One Monte-Carlo sample of the `K₂` integrand at `s`, given a partner
/// state and collision angles.
///
/// In terms of the reduced Maxwellian `m` (with `M = I^{δ/2−1} m`), the
/// gain integrand reads
/// `B · I^{a/2} I_*^a · [ m' √(m'_*) (I'_*)^{−a/2} φ'_* + m'_* √(m') (I')^{−a/2} φ' ] / √(m)`
/// with `a = δ/2 − 1`; the negative internal-energy powers at the primes
/// are integrable against the split measure and give finite variance.
fn k2_sample(
    params: &GasParams,
    phi: &GridFunction,
    s: &MicroState,
    partner: &MicroState,
    angles: &crate::collision::CollisionAngles,
) -> f64 {
    let a = params.delta() * 0.5 - 1.0;
    let pair = PairState::new(*s, *partner);
    let b = params.transition_b(&pair);
    if b == 0.0 {
        return 0.0;
    }
    let post = apply_collision(&pair, angles);
    let m_prime = params.reduced_maxwellian(&post.a);
    let m_prime_star = params.reduced_maxwellian(&post.b);
    let phi_prime = phi.eval(&post.a);
    let phi_prime_star = phi.eval(&post.b);

    let (i_pow_front, i_pow_star, inv_prime, inv_prime_star) = if a == 0.0 {
        (1.0, 1.0, 1.0, 1.0)
    } else {
        // The split parameters are continuous, so an exactly vanishing
        // post-collision energy is a measure-zero draw; skip it rather
        // than divide by zero.
        if post.a.i_energy == 0.0 || post.b.i_energy == 0.0 {
            return 0.0;
        }
        (
            s.i_energy.powf(0.5 * a),
            partner.i_energy.powf(a),
            post.a.i_energy.powf(-0.5 * a),
            post.b.i_energy.powf(-0.5 * a),
        )
    };
    let gain = m_prime * m_prime_star.sqrt() * inv_prime_star * phi_prime_star
        + m_prime_star * m_prime.sqrt() * inv_prime * phi_prime;
    b * i_pow_front * i_pow_star * gain / params.reduced_maxwellian(s).sqrt()
}

/// Monte-Carlo estimate of `(K₂ φ)(s)`.
///
/// Partners `(v_*, I_*)` come from the standard heavy-tailed proposal;
/// `(ω, R, r)` from the exact collision measure, contributing the factor
/// `c_δ`. For `δ > 2` the estimate vanishes identically at `I = 0`, where
/// the `I^{δ/2−1}` prefactor of the gain term is zero.
pub fn apply_k2(
    params: &GasParams,
    phi: &GridFunction,
    s: &MicroState,
    mc: &McConfig,
) -> Result<McEstimate> {
    let proposal = MixtureProposal::standard();
    let sampler = AngleSampler::new(params);
    let c_delta = collision_rate_factor(params);
    mc_pair_estimate(mc, |rng| {
        let partner = proposal.sample(rng);
        let angles = sampler.sample(rng);
        let x = c_delta * k2_sample(params, phi, s, &partner, &angles) / proposal.density(&partner);
        (x, partner)
    })
}

/// Shared shard loop for pair-sampled estimates (partner + angles per draw).
pub(crate) fn mc_pair_estimate<G>(mc: &McConfig, draw: G) -> Result<McEstimate>
where
    G: Fn(&mut crate::rng::SubRng) -> (f64, MicroState) + Sync,
{
    const SHARD: usize = 1 << 14;
    let n = mc.n_samples;
    if n == 0 {
        return Err(Error::InvalidParam {
            name: "n_samples",
            value: 0.0,
            constraint: "n_samples >= 1",
        });
    }
    let n_shards = n.div_ceil(SHARD);
    let shards: Vec<Result<(f64, f64)>> = (0..n_shards)
        .into_par_iter()
        .map(|shard| {
            let mut rng = substream(mc.seed, &[tag::PROBE, shard as u64]);
            let len = SHARD.min(n - shard * SHARD);
            let mut sum = KahanSum::new();
            let mut sum_sq = KahanSum::new();
            for _ in 0..len {
                let (x, at) = draw(&mut rng);
                if !x.is_finite() {
                    return Err(Error::NonFiniteSample { at, value: x });
                }
                sum.add(x);
                sum_sq.add(x * x);
            }
            Ok((sum.value(), sum_sq.value()))
        })
        .collect();
    let mut sum = KahanSum::new();
    let mut sum_sq = KahanSum::new();
    for r in shards {
        let (a, b) = r?;
        sum.add(a);
        sum_sq.add(b);
    }
    let nf = n as f64;
    let mean = sum.value() / nf;
    let var = ((sum_sq.value() - nf * mean * mean) / (nf - 1.0).max(1.0)).max(0.0);
    Ok(McEstimate {
        mean,
        std_error: (var / nf).sqrt(),
        n_samples: n,
    })
}

/// One row of a kernel-bound probe.
#[derive(Debug, Clone, Copy)]
pub struct BoundProbeRow {
    pub state: MicroState,
    pub bound_product: f64,
    pub std_error: f64,
}

/// Probe of the weighted kernel bound: for each scan state `s` evaluates
///
/// `A(s) = [(K₁ + K₂) φ_s](s) · (1 + |v| + I^{1/4})`,
/// `φ_s(v_*, I_*) = e^{ε|v−v_*|²} (1 + I_*)^m · w(s)/w(v_*, I_*)`,
///
/// which realizes `∫ (k₁ + k₂)(s, ·) w(s)/w(·) e^{ε|v−v_*|²} (1+I_*)^m`
/// because both kernels are nonnegative. Valid for `0 ≤ ε ≤ 1/64` and
/// `0 ≤ m ≤ 1/8`; the product staying bounded along the scan is the
/// numerical content of the kernel estimate.
pub fn kernel_bound_probe(
    params: &GasParams,
    eps: f64,
    m_pow: f64,
    scan: &[MicroState],
    grid: &Arc<PhaseGrid>,
    mc: &McConfig,
) -> Result<Vec<BoundProbeRow>> {
    if !(0.0..=1.0 / 64.0).contains(&eps) {
        return Err(Error::InvalidParam {
            name: "eps",
            value: eps,
            constraint: "0 <= eps <= 1/64",
        });
    }
    if !(0.0..=0.125).contains(&m_pow) {
        return Err(Error::InvalidParam {
            name: "m",
            value: m_pow,
            constraint: "0 <= m <= 1/8",
        });
    }
    scan.iter()
        .enumerate()
        .map(|(idx, s)| {
            let w_s = params.weight(s);
            let phi = GridFunction::from_fn(grid, |star| {
                let dv2 = (s.v - star.v).norm_squared();
                (eps * dv2).exp() * (1.0 + star.i_energy).powf(m_pow) * w_s / params.weight(star)
            });
            let loss = apply_k1(params, &phi, s);
            let state_mc = McConfig::new(mc.n_samples, mc.seed.wrapping_add(idx as u64));
            let gain = apply_k2(params, &phi, s, &state_mc)?;
            let envelope = 1.0 + s.speed() + s.i_energy.powf(0.25);
            Ok(BoundProbeRow {
                state: *s,
                bound_product: (loss + gain.mean) * envelope,
                std_error: gain.std_error * envelope,
            })
        })
        .collect()
}

/// `∫ |k₁(s, ·) w(s)/w(·)|² dv_* dI_*` for each scan state.
///
/// The integrand concentrates in a layer of width `~1/(2β)` around
/// `v_* = 0`, `I_* = 0` (the squared weight ratio), far below what the
/// tensor phase grid resolves, so this uses a dedicated spherical rule
/// around the `v_*` origin: radially graded nodes `r = r_max u⁴`,
/// Gauss-Legendre in the polar cosine against the direction of `v`, and
/// the same graded mesh in `I_*`. The grid argument supplies the domain
/// bounds and the base resolution (`2 n_v` radial and energy nodes);
/// doubling the grid doubles the rule.
pub fn k1_l2_scan(
    params: &GasParams,
    scan: &[MicroState],
    grid: &PhaseGrid,
) -> Vec<(MicroState, f64)> {
    let n_r = 2 * grid.n_v().max(48);
    let n_i = 2 * grid.n_i().max(48);
    let n_mu = 24;
    let r_max = grid.v_max();
    let i_max = grid.i_max();
    let (mu_nodes, mu_weights) = crate::quadrature::gauss_legendre(n_mu);
    let c_delta = collision_rate_factor(params);
    let graded = |k: usize, n: usize, top: f64| {
        let u = (k as f64 + 0.5) / n as f64;
        (top * u.powi(4), top * 4.0 * u.powi(3) / n as f64)
    };

    scan.par_iter()
        .map(|s| {
            let w_s = params.weight(s);
            let speed = s.speed();
            let m_s = params.maxwellian(s);
            let mut total = KahanSum::new();
            for kr in 0..n_r {
                let (r, wr) = graded(kr, n_r, r_max);
                for (mu, wmu) in mu_nodes.iter().zip(&mu_weights) {
                    // |v - v_*|² with v_* at radius r, polar cosine mu to v.
                    let u2 = speed * speed - 2.0 * speed * r * mu + r * r;
                    for ki in 0..n_i {
                        let (i_star, wi) = graded(ki, n_i, i_max);
                        let b = params.c_b()
                            * (0.25 * u2 + s.i_energy + i_star).powf(0.5 * (2.0 - params.alpha()));
                        let star = MicroState::from_parts(r, 0.0, 0.0, i_star);
                        let m_star = params.maxwellian_t(1.0, &star);
                        let k1 = c_delta * b * (m_s * m_star).sqrt();
                        let kw = k1 * w_s / (1.0 + r + i_star.sqrt()).powf(params.beta());
                        total.add(wr * wmu * wi * kw * kw * r * r);
                    }
                }
            }
            (*s, std::f64::consts::TAU * total.value())
        })
        .collect()
}
