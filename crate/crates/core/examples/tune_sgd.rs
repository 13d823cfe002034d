//! Scratch probe for RSGD hyperparameters on the fully-connected committee.

use rekit_core::model::{generate_patterns, NetworkKind, Topology};
use rekit_core::rsgd::{run_rsgd, InteractionVariant, SgdConfig};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let alpha: f64 = args[1].parse().unwrap();
    let eta_prime: f64 = args[2].parse().unwrap();
    let gamma0: f64 = if args[3] == "inf" { f64::INFINITY } else { args[3].parse().unwrap() };
    let dgamma: f64 = args[4].parse().unwrap();
    let max_epochs: usize = args[5].parse().unwrap();
    let seeds: u64 = args[6].parse().unwrap();
    let y: usize = args.get(7).map_or(7, |s| s.parse().unwrap());

    let topology = Topology::new(1605, 5, NetworkKind::FullyConnectedCommittee).unwrap();
    let config = SgdConfig {
        y,
        minibatch: 80,
        eta: 1.0,
        eta_prime,
        gamma0,
        dgamma,
        max_epochs,
        variant: InteractionVariant::Standard,
    };
    for seed in 0..seeds {
        let patterns = generate_patterns(topology, alpha, 2000 + seed).unwrap();
        let t0 = std::time::Instant::now();
        let rec = run_rsgd(&patterns, &config, seed).unwrap();
        let min_err = rec
            .trace
            .iter()
            .filter_map(|tp| tp.get("min_error").copied())
            .fold(f64::INFINITY, f64::min);
        println!(
            "seed {seed}: {:?} epochs {} min_err {} ({:.3}%) time {:.1}s",
            rec.status,
            rec.iterations,
            min_err,
            100.0 * min_err / patterns.len() as f64,
            t0.elapsed().as_secs_f64()
        );
    }
}
