//! Scratch harness for schedule exploration; not part of the toolkit API.

use rekit_core::harness::RunStatus;
use rekit_core::model::{generate_patterns, NetworkKind, Topology};
use rekit_core::rsa::{run_sa, ProposalMode, SaSchedule};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args[1].parse().unwrap();
    let alpha: f64 = args[2].parse().unwrap();
    let y: usize = args[3].parse().unwrap();
    let beta0: f64 = args[4].parse().unwrap();
    let beta_f: f64 = args[5].parse().unwrap();
    let gamma0: f64 = args[6].parse().unwrap();
    let gamma_f: f64 = args[7].parse().unwrap();
    let seeds: u64 = args[8].parse().unwrap();
    let max_iters: u64 = args[9].parse().unwrap();

    let topology = Topology::new(n, 1, NetworkKind::Perceptron).unwrap();
    let schedule = SaSchedule { beta0, beta_f, gamma0, gamma_f };
    for seed in 0..seeds {
        let patterns = generate_patterns(topology, alpha, 1000 + seed).unwrap();
        let t0 = std::time::Instant::now();
        let rec = run_sa(&patterns, y, &schedule, ProposalMode::Biased, seed, max_iters).unwrap();
        println!(
            "seed {seed}: {:?} attempts {} sweeps {:.1} target {:.1} time {:.2}s",
            rec.status,
            rec.iterations,
            rec.iterations as f64 / n as f64,
            0.13 * (n as f64).powf(1.7),
            t0.elapsed().as_secs_f64()
        );
        let _ = rec.status == RunStatus::Solved;
    }
}
