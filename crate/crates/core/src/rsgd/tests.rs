use super::*;
use crate::model::{
    generate_patterns, pattern_energy, random_weights, sign, NetworkKind, Topology,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

fn perceptron(n: usize) -> Topology {
    Topology::new(n, 1, NetworkKind::Perceptron).unwrap()
}

fn config(y: usize, minibatch: usize) -> SgdConfig {
    SgdConfig {
        y,
        minibatch,
        eta: 1.0,
        eta_prime: 0.1,
        gamma0: 0.1,
        dgamma: 0.01,
        max_epochs: 10_000,
        variant: InteractionVariant::Standard,
    }
}

/// With η=4, one replica, singleton batches and odd-integer shadows, a
/// gradient step is exactly the clipped perceptron rule 𝒲 += 2ξ·Θ(−Δ),
/// and shadows stay odd integers (no sign ambiguity ever arises).
#[test]
fn singleton_batches_reduce_to_clipped_perceptron() {
    let topo = perceptron(15);
    let patterns = generate_patterns(topo, 0.4, 11).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(3);
    let row: Vec<f64> = (0..topo.n()).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect();
    let mut state = RsgdState::from_shadow(topo, vec![row.clone()], 4.0);
    let mut shadow_ref = row;

    for step in 0..200 {
        let mu = step % patterns.len();
        // reference rule on the reference shadow copy
        let w_signs: Vec<f64> = shadow_ref
            .iter()
            .map(|&v| if v >= 0.0 { 1.0 } else { -1.0 })
            .collect();
        let delta: f64 = (0..topo.n())
            .map(|i| w_signs[i] * patterns.input(mu, 0, i) as f64)
            .sum();
        if delta < 0.0 {
            for i in 0..topo.n() {
                shadow_ref[i] += 2.0 * patterns.input(mu, 0, i) as f64;
            }
        }
        state.gradient_step(0, &[mu], &patterns, 4.0);
        assert_eq!(state.shadow[0], shadow_ref, "diverged at step {step}");
        for &v in &state.shadow[0] {
            let int = v as i64;
            assert!(int as f64 == v && int.rem_euclid(2) == 1, "shadow {v} not an odd integer");
        }
    }
}

/// The selected units are exactly the c cheapest violated ones: their number
/// matches c = (1−Δ_out)/2, each is violated, none is costlier than an
/// unselected violated unit, ties resolve to the lowest index, and the
/// pattern energy equals the sum of the selected costs.
#[test]
fn committee_gradient_selects_cheapest_violated_units() {
    let topo = Topology::new(35, 7, NetworkKind::TreeCommittee).unwrap();
    let patterns = generate_patterns(topo, 1.0, 5).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(17);
    let mut touched = 0usize;
    for trial in 0..60 {
        let w = random_weights(topo, &mut rng);
        for mu in 0..patterns.len() {
            let units = pattern_gradient_units(&w, &patterns.patterns[mu], &topo);
            let deltas: Vec<i64> =
                (0..7).map(|k| w.unit_dot(&patterns.patterns[mu], k)).collect();
            let delta_out: i64 = deltas.iter().map(|&d| sign(d)).sum();
            if delta_out > 0 {
                assert!(units.is_empty(), "trial {trial}: satisfied pattern got a gradient");
                continue;
            }
            touched += 1;
            let c = ((1 - delta_out) / 2) as usize;
            assert_eq!(units.len(), c);
            let cost = |k: usize| (1 - deltas[k]) / 2;
            let max_sel = units.iter().map(|&k| cost(k)).max().unwrap();
            for k in 0..7 {
                if units.contains(&k) {
                    assert!(deltas[k] < 0);
                } else if deltas[k] < 0 {
                    assert!(cost(k) >= max_sel);
                    if cost(k) == max_sel {
                        // tie goes to the lowest index
                        assert!(units.iter().all(|&s| cost(s) < max_sel || s < k));
                    }
                }
            }
            let picked: i64 = units.iter().map(|&k| cost(k)).sum();
            assert_eq!(
                pattern_energy(&w, &patterns.patterns[mu], &topo),
                picked,
                "selected costs must reproduce the energy"
            );
        }
    }
    assert!(touched > 50, "test barely exercised the violated branch");
}

#[test]
fn dense_gradient_entries_are_half_inputs() {
    let topo = Topology::new(15, 3, NetworkKind::FullyConnectedCommittee).unwrap();
    let patterns = generate_patterns(topo, 1.0, 2).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(9);
    let w = random_weights(topo, &mut rng);
    for mu in 0..patterns.len() {
        let g = pattern_gradient(&w, &patterns.patterns[mu], &topo);
        let units = pattern_gradient_units(&w, &patterns.patterns[mu], &topo);
        for k in 0..3 {
            for i in 0..5 {
                let expect = if units.contains(&k) {
                    -0.5 * patterns.input(mu, k, i) as f64
                } else {
                    0.0
                };
                assert_eq!(g[k * 5 + i], expect);
            }
        }
    }
}

/// The corrected and continuous-trace couplings vanish on fully aligned
/// replicas; the plain tanh form does not (its known hypercube artifact).
#[test]
fn interaction_variants_at_full_alignment() {
    let y = 5usize;
    let gamma = 0.3;
    for w in [-1i64, 1] {
        let t = y as i64 * w;
        let plain = interaction_term(t, w, gamma, y, InteractionVariant::Standard);
        let corrected = interaction_term(t, w, gamma, y, InteractionVariant::HypercubeCorrected);
        let cont = interaction_term(t, w, gamma, y, InteractionVariant::ContinuousTrace);
        let expect_plain = (gamma * t as f64).tanh() - w as f64;
        assert!((plain - expect_plain).abs() < 1e-15);
        assert!(plain.abs() > 0.05, "plain coupling should not vanish at alignment");
        assert!(corrected.abs() < 1e-15);
        assert!(cont.abs() < 1e-15);
    }
    // γ=∞ limits: tanh → sign, so plain also vanishes at alignment and the
    // corrected form coincides with it.
    for t in [-3i64, -1, 0, 1, 3] {
        for w in [-1i64, 1] {
            let plain = interaction_term(t, w, f64::INFINITY, 3, InteractionVariant::Standard);
            let corr =
                interaction_term(t, w, f64::INFINITY, 3, InteractionVariant::HypercubeCorrected);
            let expect = if t == 0 { 0.0 } else { sign(t) as f64 } - w as f64;
            assert_eq!(plain, expect);
            assert_eq!(corr, expect);
        }
    }
}

/// A disabled coupling (η′=0) makes the interaction step a no-op and leaves
/// a replica's trajectory identical to a standalone single-replica run fed
/// the same minibatches.
#[test]
fn zero_coupling_decouples_replicas() {
    let topo = perceptron(21);
    let patterns = generate_patterns(topo, 0.5, 4).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(8);
    let row: Vec<f64> =
        (0..21).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect();
    let mut pair = RsgdState::from_shadow(topo, vec![row.clone(), row.clone()], 1.0);
    let mut solo = RsgdState::from_shadow(topo, vec![row], 1.0);
    let batches: Vec<Vec<usize>> = (0..40)
        .map(|s| vec![s % patterns.len(), (3 * s + 1) % patterns.len()])
        .collect();
    for batch in &batches {
        pair.gradient_step(0, batch, &patterns, 1.0);
        pair.interaction_step(0, 0.0, 0.4, InteractionVariant::Standard);
        // replica 1 of the pair gets a different stream of batches
        pair.gradient_step(1, &batch[1..], &patterns, 1.0);
        pair.interaction_step(1, 0.0, 0.4, InteractionVariant::Standard);
        solo.gradient_step(0, batch, &patterns, 1.0);
    }
    assert_eq!(pair.shadow[0], solo.shadow[0]);
    assert_eq!(pair.replicas[0].to_signs(), solo.replicas[0].to_signs());
}

/// Rescaling (η, η′, initial shadows) by a common factor leaves the binary
/// trajectory unchanged (a power of two makes the check bit-exact).
#[test]
fn binary_trajectory_is_scale_invariant() {
    let topo = Topology::new(27, 3, NetworkKind::FullyConnectedCommittee).unwrap();
    let patterns = generate_patterns(topo, 0.4, 6).unwrap();
    let kappa = 4.0;
    let mut base = config(3, 4);
    base.eta_prime = 0.3;
    let mut scaled = base;
    scaled.eta = base.eta * kappa;
    scaled.eta_prime = base.eta_prime * kappa;
    let r1 = run_rsgd(&patterns, &base, 99).unwrap();
    let r2 = run_rsgd(&patterns, &scaled, 99).unwrap();
    assert_eq!(r1.status, r2.status);
    assert_eq!(r1.iterations, r2.iterations);
    assert_eq!(r1.trace, r2.trace);
    assert_eq!(r1.solution_hash, r2.solution_hash);
}

#[test]
fn solves_small_perceptron_and_is_deterministic() {
    let topo = perceptron(101);
    let patterns = generate_patterns(topo, 0.3, 1).unwrap();
    let cfg = config(3, 5);
    let r1 = run_rsgd(&patterns, &cfg, 42).unwrap();
    assert_eq!(r1.status, RunStatus::Solved, "should reach zero training error");
    assert!(r1.solution_hash.is_some());
    let last = r1.trace.last().unwrap();
    assert_eq!(last["min_error"], 0.0);
    let r2 = run_rsgd(&patterns, &cfg, 42).unwrap();
    assert_eq!(serde_json::to_string(&r1).unwrap(), serde_json::to_string(&r2).unwrap());
}

#[test]
fn rejects_bad_configs() {
    let topo = perceptron(15);
    let patterns = generate_patterns(topo, 0.3, 1).unwrap();
    for bad in [
        SgdConfig { y: 0, ..config(3, 5) },
        SgdConfig { minibatch: 0, ..config(3, 5) },
        SgdConfig { eta: 0.0, ..config(3, 5) },
        SgdConfig { eta_prime: -0.1, ..config(3, 5) },
        SgdConfig { max_epochs: 0, ..config(3, 5) },
    ] {
        assert!(run_rsgd(&patterns, &bad, 1).is_err());
    }
}
