use super::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

fn tree(n: usize, k: usize) -> Topology {
    Topology::new(n, k, NetworkKind::TreeCommittee).unwrap()
}

fn perceptron(n: usize) -> Topology {
    Topology::new(n, 1, NetworkKind::Perceptron).unwrap()
}

/// Reference output evaluation straight from the sign vectors.
fn naive_output(w: &WeightConfig, p: &Pattern, t: &Topology) -> i64 {
    let ws = w.to_signs();
    let ps = p.to_signs();
    let fan_in = t.fan_in();
    let mut total = 0i64;
    for k in 0..t.units() {
        let dot: i64 = (0..fan_in)
            .map(|i| ws[k * fan_in + i] as i64 * ps[k * fan_in + i] as i64)
            .sum();
        total += sign(dot);
    }
    sign(total)
}

/// Minimum number of flips until the pattern is satisfied, by exhaustive
/// search over all flip subsets. Only for N ≤ ~16.
fn brute_min_flips(w: &WeightConfig, p: &Pattern, t: &Topology) -> i64 {
    let n = t.n();
    let mut best = n as u32 + 1;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() >= best {
            continue;
        }
        let mut wf = w.clone();
        for j in 0..n {
            if mask & (1 << j) != 0 {
                wf.flip(j);
            }
        }
        if network_output(&wf, p, t) == 1 {
            best = mask.count_ones();
        }
    }
    best as i64
}

#[test]
fn topology_invariants_enforced() {
    assert!(Topology::new(9, 3, NetworkKind::TreeCommittee).is_ok());
    // even number of units
    assert!(Topology::new(8, 2, NetworkKind::TreeCommittee).is_err());
    // even fan-in
    assert!(Topology::new(6, 3, NetworkKind::TreeCommittee).is_err());
    assert!(Topology::new(6, 3, NetworkKind::TreeCommittee).is_err());
    assert!(Topology::new(5, 5, NetworkKind::Perceptron).is_err());
    // relaxed constructor admits even fan-in for enumeration tests
    assert!(Topology::new_relaxed(6, 1, NetworkKind::Perceptron).is_ok());
}

#[test]
fn output_matches_definition_exhaustively() {
    let t = tree(9, 3);
    let mut rng = ChaCha12Rng::seed_from_u64(7);
    let pats = generate_patterns(t, 5.0 / 9.0, 3).unwrap();
    assert_eq!(pats.len(), 5);
    for _ in 0..1 {
        for bits in 0u32..(1 << 9) {
            let signs: Vec<i8> = (0..9)
                .map(|j| if bits & (1 << j) != 0 { -1 } else { 1 })
                .collect();
            let w = WeightConfig::from_signs(t, &signs).unwrap();
            for p in &pats.patterns {
                assert_eq!(network_output(&w, p, &t), naive_output(&w, p, &t));
            }
        }
    }
    // also spot-check a fully-connected instance
    let tfc = Topology::new(9, 3, NetworkKind::FullyConnectedCommittee).unwrap();
    let pats = generate_patterns(tfc, 0.5, 11).unwrap();
    let w = random_weights(tfc, &mut rng);
    for p in &pats.patterns {
        assert_eq!(network_output(&w, p, &tfc), naive_output(&w, p, &tfc));
    }
}

#[test]
fn single_layer_energy_examples() {
    let t = perceptron(5);
    let w = WeightConfig::from_signs(t, &[1, 1, 1, 1, 1]).unwrap();
    let sat = Pattern::from_signs(t, &[1, -1, 1, 1, 1]).unwrap();
    assert_eq!(pattern_energy(&w, &sat, &t), 0);
    let hard = Pattern::from_signs(t, &[-1, -1, -1, -1, -1]).unwrap();
    // Δ_out = −5: three flips needed
    assert_eq!(pattern_energy(&w, &hard, &t), 3);
    assert_eq!(brute_min_flips(&w, &hard, &t), 3);
}

#[test]
fn committee_energy_example() {
    // unit fields (−3, −1, +3): Δ_out = −1, cheapest repair costs (1, 2)
    let t = tree(9, 3);
    let w = WeightConfig::from_signs(t, &[1; 9]).unwrap();
    let p = Pattern::from_signs(t, &[-1, -1, -1, -1, -1, 1, 1, 1, 1]).unwrap();
    assert_eq!(pattern_energy(&w, &p, &t), 1);
    assert_eq!(brute_min_flips(&w, &p, &t), 1);
}

#[test]
fn energy_is_minimal_flip_count() {
    let cases = [tree(15, 3), tree(9, 3), perceptron(9), perceptron(15)];
    let mut rng = ChaCha12Rng::seed_from_u64(21);
    for t in cases {
        let pats = generate_patterns(t, 4.0 / t.n() as f64, 5).unwrap();
        for _ in 0..25 {
            let w = random_weights(t, &mut rng);
            for p in &pats.patterns {
                assert_eq!(
                    pattern_energy(&w, p, &t),
                    brute_min_flips(&w, p, &t),
                    "t={:?}",
                    t
                );
            }
        }
    }
}

#[test]
fn total_energy_sums_patterns_and_vanishes_on_planted() {
    let t = tree(15, 3);
    let mut rng = ChaCha12Rng::seed_from_u64(2);
    let teacher = random_weights(t, &mut rng);
    // Patterns generated *by* the teacher are all satisfied by it.
    let raw = generate_patterns(t, 1.0, 9).unwrap();
    let planted: Vec<Pattern> = raw
        .patterns
        .iter()
        .map(|p| {
            let mut q = p.clone();
            if network_output(&teacher, p, &t) == -1 {
                for j in 0..t.n() {
                    q.flip(j);
                }
            }
            q
        })
        .collect();
    let planted = PatternSet {
        topology: t,
        alpha: raw.alpha,
        seed: raw.seed,
        patterns: planted,
    };
    assert_eq!(total_energy(&teacher, &planted), 0);
    assert_eq!(error_count(&teacher, &planted), 0);

    let w = random_weights(t, &mut rng);
    let by_hand: i64 = planted
        .patterns
        .iter()
        .map(|p| pattern_energy(&w, p, &t))
        .sum();
    assert_eq!(total_energy(&w, &planted), by_hand);

    let empty = PatternSet {
        topology: t,
        alpha: 1.0,
        seed: 0,
        patterns: vec![],
    };
    assert_eq!(total_energy(&w, &empty), 0);
}

#[test]
fn energy_shift_matches_recomputation() {
    let mut rng = ChaCha12Rng::seed_from_u64(33);
    for t in [tree(15, 3), perceptron(15), tree(9, 3)] {
        let pats = generate_patterns(t, 10.0 / t.n() as f64, 17).unwrap();
        for _ in 0..100 {
            let w = random_weights(t, &mut rng);
            let cache = PatternCache::new(&w, &pats);
            assert_eq!(cache.total_energy(), total_energy(&w, &pats));
            for j in 0..t.n() {
                let (k, i) = t.split(j);
                let mut wf = w.clone();
                wf.flip(j);
                for mu in 0..pats.len() {
                    let expected = pattern_energy(&wf, &pats.patterns[mu], &t)
                        - pattern_energy(&w, &pats.patterns[mu], &t);
                    assert_eq!(
                        cache.energy_shift(&pats, &w, mu, k, i),
                        expected,
                        "mu={} k={} i={}",
                        mu,
                        k,
                        i
                    );
                }
                assert_eq!(
                    cache.total_shift(&pats, &w, k, i),
                    total_energy(&wf, &pats) - total_energy(&w, &pats)
                );
            }
        }
    }
}

#[test]
fn cache_updates_match_rebuild() {
    let t = tree(15, 3);
    let pats = generate_patterns(t, 10.0 / 15.0, 123).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(5);
    let mut w = random_weights(t, &mut rng);
    let mut cache = PatternCache::new(&w, &pats);
    for step in 0..200 {
        let j = rand::Rng::gen_range(&mut rng, 0..t.n());
        let (k, i) = t.split(j);
        cache.apply_flip(&pats, &mut w, k, i);
        let fresh = PatternCache::new(&w, &pats);
        assert_eq!(cache, fresh, "diverged at step {}", step);
        for mu in 0..pats.len() {
            for d in &cache.state(mu).deltas {
                assert_eq!(d.rem_euclid(2), 1, "unit field must stay odd");
            }
        }
        // flip back restores the original state exactly
        let before = cache.clone();
        cache.apply_flip(&pats, &mut w, k, i);
        cache.apply_flip(&pats, &mut w, k, i);
        assert_eq!(cache, before);
    }
}

#[test]
fn patterns_reproducible_and_unbiased() {
    let t = perceptron(101);
    let a = generate_patterns(t, 10.0, 42).unwrap();
    let b = generate_patterns(t, 10.0, 42).unwrap();
    assert_eq!(a.patterns, b.patterns);
    let c = generate_patterns(t, 10.0, 43).unwrap();
    assert_ne!(a.patterns, c.patterns);
    assert_eq!(a.len(), 1010);

    let total: i64 = a
        .patterns
        .iter()
        .flat_map(|p| p.to_signs())
        .map(|s| s as i64)
        .sum();
    let count = (a.len() * 101) as f64;
    let mean = total as f64 / count;
    assert!(mean.abs() < 0.02, "entry mean {} outside interval", mean);

    let tfc = Topology::new(15, 3, NetworkKind::FullyConnectedCommittee).unwrap();
    let pats = generate_patterns(tfc, 2.0, 8).unwrap();
    for p in &pats.patterns {
        for i in 0..5 {
            assert_eq!(p.get_ki(0, i), p.get_ki(1, i));
            assert_eq!(p.get_ki(0, i), p.get_ki(2, i));
        }
    }

    assert!(generate_patterns(t, 0.0, 1).is_err());
}

#[test]
fn replica_distance_cases() {
    let t = perceptron(7);
    let a = WeightConfig::from_signs(t, &[1, 1, 1, 1, 1, 1, 1]).unwrap();
    assert_eq!(replica_distance(&a, &a).unwrap(), 0);
    let b = WeightConfig::from_signs(t, &[-1; 7]).unwrap();
    assert_eq!(replica_distance(&a, &b).unwrap(), 14);
    let mut c = a.clone();
    c.flip(3);
    assert_eq!(replica_distance(&a, &c).unwrap(), 2);
    let other = WeightConfig::zeros(perceptron(9));
    assert!(replica_distance(&a, &other).is_err());
}

#[test]
fn pattern_csv_round_trip() {
    let t = Topology::new(15, 3, NetworkKind::FullyConnectedCommittee).unwrap();
    let pats = generate_patterns(t, 1.0, 99).unwrap();
    let path = std::env::temp_dir().join(format!("patterns-rt-{}.csv", std::process::id()));
    save_patterns(&pats, &path).unwrap();
    let loaded = load_patterns(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(loaded.topology, pats.topology);
    assert_eq!(loaded.alpha, pats.alpha);
    assert_eq!(loaded.seed, pats.seed);
    assert_eq!(loaded.patterns, pats.patterns);
}

proptest! {
    #[test]
    fn sign_round_trip_and_dot(signs in proptest::collection::vec(prop_oneof![Just(1i8), Just(-1i8)], 15),
                               other in proptest::collection::vec(prop_oneof![Just(1i8), Just(-1i8)], 15)) {
        let t = tree(15, 3);
        let a = BitVec::from_signs(t, &signs).unwrap();
        let b = BitVec::from_signs(t, &other).unwrap();
        prop_assert_eq!(a.to_signs(), signs.clone());
        for k in 0..3 {
            let naive: i64 = (0..5)
                .map(|i| signs[k * 5 + i] as i64 * other[k * 5 + i] as i64)
                .sum();
            prop_assert_eq!(a.unit_dot(&b, k), naive);
        }
        let ham = signs.iter().zip(&other).filter(|(x, y)| x != y).count() as u64;
        prop_assert_eq!(a.hamming(&b), ham);
    }
}
