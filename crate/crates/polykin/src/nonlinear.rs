//! The quadratic collision forms around the Maxwellian:
//! `Γ₊(f,f) = Q₊(√M f, √M f)/√M`, `Γ₋(f,f) = Q₋(√M f, √M f)/√M`, and the
//! combined loss operator `R(f) = ν + c_δ ∫ B √M_* f_* dv_* dI_*`, together
//! with the ratio probes for their pointwise bounds.
//!
//! Test functions `f` live on a [`PhaseGrid`](crate::quadrature::PhaseGrid)
//! and are interpolated
//! multilinearly at post-collision states; values outside the truncation
//! are 0, a bias controlled by the weight decay for `β > 7`.

use crate::collision::{apply_collision, collision_rate_factor, AngleSampler};
use crate::functionals::collision_frequency;
use crate::model::{GasParams, MicroState, PairState};
use crate::quadrature::{GridFunction, McConfig, McEstimate, MixtureProposal, Proposal};
use crate::{Error, Result};

/// Monte-Carlo estimate of `Γ₊(f, f)(s)`.
///
/// In reduced-Maxwellian form the integrand is
/// `B · I^{a/2} I_*^a (I' I'_*)^{−a/2} √(m_*) f' f'_*`, `a = δ/2 − 1`:
/// the `1/√m(s)` of the definition cancels against
/// `√(m' m'_*) = √(m m_*)` (the product is conserved by collisions).
pub fn apply_gamma_plus(
    params: &GasParams,
    f: &GridFunction,
    s: &MicroState,
    mc: &McConfig,
) -> Result<McEstimate> {
    let proposal = MixtureProposal::standard();
    let sampler = AngleSampler::new(params);
    let c_delta = collision_rate_factor(params);
    let a = params.delta() * 0.5 - 1.0;
    let i_pow_front = if a == 0.0 { 1.0 } else { s.i_energy.powf(0.5 * a) };

    crate::linearized::mc_pair_estimate(mc, |rng| {
        let partner = proposal.sample(rng);
        let pair = PairState::new(*s, partner);
        let b = params.transition_b(&pair);
        if b == 0.0 {
            return (0.0, partner);
        }
        let post = apply_collision(&pair, &sampler.sample(rng));
        let f_prime = f.eval(&post.a);
        let f_prime_star = f.eval(&post.b);
        if f_prime == 0.0 || f_prime_star == 0.0 {
            return (0.0, partner);
        }
        let (i_pow_star, inv_primes) = if a == 0.0 {
            (1.0, 1.0)
        } else {
            // Measure-zero draw; skip rather than divide by zero.
            if post.a.i_energy == 0.0 || post.b.i_energy == 0.0 {
                return (0.0, partner);
            }
            (
                partner.i_energy.powf(a),
                (post.a.i_energy * post.b.i_energy).powf(-0.5 * a),
            )
        };
        let x = c_delta
            * b
            * i_pow_front
            * i_pow_star
            * inv_primes
            * params.reduced_maxwellian(&partner).sqrt()
            * f_prime
            * f_prime_star
            / proposal.density(&partner);
        (x, partner)
    })
}

/// `Γ₋(f, f)(s) = f(s) · c_δ ∫ B(s, ·) √M(·) f(·) dv_* dI_*` by quadrature.
pub fn apply_gamma_minus(params: &GasParams, f: &GridFunction, s: &MicroState) -> f64 {
    f.eval(s) * perturbation_loss(params, f, s)
}

/// The combined loss operator `R(f)(s) = ν(s) + c_δ ∫ B(s, ·) √M(·) f(·)`.
///
/// For `F = M + √M f ≥ 0` this is the total loss rate seen by the
/// reformulated equation; it stays above `ν/2` whenever the perturbation is
/// moderate.
pub fn r_operator(params: &GasParams, f: &GridFunction, s: &MicroState) -> f64 {
    collision_frequency(params, s, f.grid()) + perturbation_loss(params, f, s)
}

/// The perturbation part of [`r_operator`],
/// `c_δ ∫ B(s, ·) √M(·) f(·) dv_* dI_*`, for callers that already hold
/// `ν(s)`.
pub fn perturbation_loss(params: &GasParams, f: &GridFunction, s: &MicroState) -> f64 {
    let c_delta = collision_rate_factor(params);
    let values = f.values();
    c_delta
        * f.grid().integrate_fn_indexed(|idx, star| {
            params.transition_b(&PairState::new(*s, *star))
                * params.sqrt_maxwellian(star)
                * values[idx]
        })
}

/// Per-state values of the gain-bound ratio
///
/// `|w(s) Γ₊(f,f)(s)| (1 + |v| + I^{1/4}) / (‖wf‖_∞ [∫ (1+|v_*|+√I_*)^{−2β+8} |w f|² dv_* dI_*]^{1/2})`.
///
/// Both sides are quadratic in `f`, so the ratio is scale invariant; its
/// boundedness across test functions is the content of the pointwise gain
/// estimate.
pub fn gain_ratio_table(
    params: &GasParams,
    f: &GridFunction,
    scan: &[MicroState],
    mc: &McConfig,
) -> Result<Vec<(MicroState, f64)>> {
    let sup_wf = crate::functionals::weighted_sup_norm(f, params);
    if sup_wf == 0.0 {
        return Err(Error::DegenerateProbe("gain ratio needs ‖wf‖∞ > 0"));
    }
    let values = f.values();
    let weighted_l2 = f
        .grid()
        .integrate_fn_indexed(|idx, star| {
            let decay = (1.0 + star.speed() + star.i_energy.sqrt()).powf(-2.0 * params.beta() + 8.0);
            let wf = params.weight(star) * values[idx];
            decay * wf * wf
        })
        .sqrt();
    if weighted_l2 == 0.0 {
        return Err(Error::DegenerateProbe("gain ratio needs a nonzero weighted L2 norm"));
    }
    scan.iter()
        .enumerate()
        .map(|(idx, s)| {
            let state_mc = McConfig::new(mc.n_samples, mc.seed.wrapping_add(idx as u64));
            let gain = apply_gamma_plus(params, f, s, &state_mc)?;
            let envelope = 1.0 + s.speed() + s.i_energy.powf(0.25);
            let ratio = (params.weight(s) * gain.mean).abs() * envelope / (sup_wf * weighted_l2);
            Ok((*s, ratio))
        })
        .collect()
}

/// Sup over the scan of the gain-bound ratio; see [`gain_ratio_table`].
pub fn gain_estimate_ratio(
    params: &GasParams,
    f: &GridFunction,
    scan: &[MicroState],
    mc: &McConfig,
) -> Result<f64> {
    Ok(gain_ratio_table(params, f, scan, mc)?
        .into_iter()
        .fold(0.0f64, |acc, (_, r)| acc.max(r)))
}

/// Sup over the scan of `|w (Γ₊ − Γ₋)(f,f)(s)| / (ν(s) ‖wf‖_∞²)`, the
/// ratio bounding the full quadratic form by the collision frequency.
pub fn nonlinear_nu_ratio(
    params: &GasParams,
    f: &GridFunction,
    scan: &[MicroState],
    mc: &McConfig,
) -> Result<f64> {
    let sup_wf = crate::functionals::weighted_sup_norm(f, params);
    if sup_wf == 0.0 {
        return Err(Error::DegenerateProbe("nu ratio needs ‖wf‖∞ > 0"));
    }
    let mut sup = 0.0f64;
    for (idx, s) in scan.iter().enumerate() {
        let state_mc = McConfig::new(mc.n_samples, mc.seed.wrapping_add(idx as u64));
        let gain = apply_gamma_plus(params, f, s, &state_mc)?;
        let loss = apply_gamma_minus(params, f, s);
        let nu = collision_frequency(params, s, f.grid());
        let ratio = (params.weight(s) * (gain.mean - loss)).abs() / (nu * sup_wf * sup_wf);
        sup = sup.max(ratio);
    }
    Ok(sup)
}
