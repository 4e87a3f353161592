//! Distributional checks of the collision machinery: the (R, r) sampling
//! measure against its product law, and the Maxwellian as the fixed point
//! of B-weighted collisions (detailed balance).

use polykin::collision::{apply_collision, AngleSampler};
use polykin::rng::substream;
use polykin::stats::{chi_square_statistic, ks_statistic};
use polykin::{GasParams, MicroState, PairState};
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::beta::beta_reg;

/// Joint 20x20 histogram of (R, r) against the product of the two Beta
/// laws, chi-square at significance 0.001 with 1e6 draws.
#[test]
fn joint_measure_matches_product_density() {
    let n_draws = 1_000_000usize;
    let bins = 20usize;
    for delta in [2.0, 3.0] {
        let params = GasParams::new(delta, 0.0, 1.0, 8.0).unwrap();
        let sampler = AngleSampler::new(&params);
        let mut rng = substream(2_000 + delta as u64, &[0]);
        let mut observed = vec![0.0f64; bins * bins];
        for _ in 0..n_draws {
            let c = sampler.sample(&mut rng);
            let bi = ((c.big_r * bins as f64) as usize).min(bins - 1);
            let bj = ((c.small_r * bins as f64) as usize).min(bins - 1);
            observed[bi * bins + bj] += 1.0;
        }

        // Expected counts from the exact Beta CDFs over the bin edges.
        let edge = |k: usize| k as f64 / bins as f64;
        let big_mass: Vec<f64> = (0..bins)
            .map(|k| beta_reg(1.5, delta, edge(k + 1)) - beta_reg(1.5, delta, edge(k)))
            .collect();
        let small_mass: Vec<f64> = (0..bins)
            .map(|k| {
                beta_reg(0.5 * delta, 0.5 * delta, edge(k + 1))
                    - beta_reg(0.5 * delta, 0.5 * delta, edge(k))
            })
            .collect();
        let expected: Vec<f64> = (0..bins * bins)
            .map(|idx| n_draws as f64 * big_mass[idx / bins] * small_mass[idx % bins])
            .collect();

        let stat = chi_square_statistic(&observed, &expected);
        let dof = (bins * bins - 1) as f64;
        let critical = ChiSquared::new(dof).unwrap().inverse_cdf(0.999);
        assert!(
            stat < critical,
            "delta = {delta}: chi-square {stat:.1} exceeds the 0.001-level critical value {critical:.1}"
        );
    }
}

/// Detailed balance at equilibrium: among pairs drawn from M ⊗ M and
/// accepted with probability ∝ B, the post-collision one-particle states
/// have exactly the law of the pre-collision ones: the gain and loss
/// sides of Q(M, M) = 0 seen sample by sample. (That common law is the
/// collision-frequency-tilted Maxwellian ν·M/⟨ν⟩, not M itself: colliding
/// particles are biased toward high collision rates. The untilted
/// Maxwellian invariance of the full ensemble is covered by the DSMC
/// equilibrium tests.)
#[test]
fn colliding_pairs_keep_their_law() {
    let delta = 2.0;
    let params = GasParams::new(delta, 0.0, 1.0, 8.0).unwrap();
    let sampler = AngleSampler::new(&params);
    let gamma = Gamma::new(0.5 * delta, 1.0).unwrap();
    let mut rng = substream(77_311, &[1]);

    let draw_state = |rng: &mut polykin::rng::SubRng| {
        MicroState::from_parts(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
            gamma.sample(rng),
        )
    };

    // Majorant for the thinning from a pre-scan, inflated; clamped
    // candidates are counted and must stay negligible.
    let mut b_cap = 0.0f64;
    for _ in 0..10_000 {
        let pair = PairState::new(draw_state(&mut rng), draw_state(&mut rng));
        b_cap = b_cap.max(params.transition_b(&pair));
    }
    b_cap *= 2.0;

    let target = 100_000usize;
    let mut pre_speeds = Vec::with_capacity(target);
    let mut pre_internals = Vec::with_capacity(target);
    let mut post_speeds = Vec::with_capacity(target);
    let mut post_internals = Vec::with_capacity(target);
    let mut clamped = 0u64;
    while post_speeds.len() < target {
        let pair = PairState::new(draw_state(&mut rng), draw_state(&mut rng));
        let b = params.transition_b(&pair);
        if b > b_cap {
            clamped += 1;
        }
        if rng.random::<f64>() * b_cap < b {
            let post = apply_collision(&pair, &sampler.sample(&mut rng));
            pre_speeds.push(pair.a.speed());
            pre_internals.push(pair.a.i_energy);
            post_speeds.push(post.a.speed());
            post_internals.push(post.a.i_energy);
        }
    }
    assert!(clamped < 20, "majorant clamped {clamped} times");

    for v in [
        &mut pre_speeds,
        &mut pre_internals,
        &mut post_speeds,
        &mut post_internals,
    ] {
        v.sort_by(f64::total_cmp);
    }

    // Post must match pre in law (two-sample KS)...
    let d_speed = polykin::stats::ks_two_sample(&post_speeds, &pre_speeds);
    let d_internal = polykin::stats::ks_two_sample(&post_internals, &pre_internals);
    assert!(
        d_speed < 0.01 && d_internal < 0.01,
        "post-collision law drifted from pre-collision: speed {d_speed:.4}, I {d_internal:.4}"
    );

    // ...and both match the analytic tilted marginal. For δ = 2, α = 0 the
    // I-marginal of ν·M/⟨ν⟩ is (I + 5/2) e^{-I} / (7/2).
    let tilted_i_cdf = |x: f64| {
        if x <= 0.0 {
            0.0
        } else {
            1.0 - (-x).exp() * (x + 3.5) / 3.5
        }
    };
    let ks_pre = ks_statistic(&pre_internals, tilted_i_cdf);
    let ks_post = ks_statistic(&post_internals, tilted_i_cdf);
    assert!(
        ks_pre < 0.01 && ks_post < 0.01,
        "tilted I-marginal mismatch: pre {ks_pre:.4}, post {ks_post:.4}"
    );
}
