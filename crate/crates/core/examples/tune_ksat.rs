//! Scratch probe for the focusing 4-SAT protocol near the algorithmic threshold.

use rekit_core::ksat::{count_violated, generate_ksat, solve_ksat, KSatProtocol};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args[1].parse().unwrap();
    let alpha: f64 = args[2].parse().unwrap();
    let seeds: u64 = args[3].parse().unwrap();

    let protocol = KSatProtocol::focusing(6.0, 0.01, 0.01, 0.6);
    let mut solved = 0usize;
    for seed in 0..seeds {
        let instance = generate_ksat(n, alpha, 4, 5000 + seed).unwrap();
        let t0 = std::time::Instant::now();
        let outcome = solve_ksat(&instance, &protocol, seed).unwrap();
        let ok = outcome
            .assignment
            .as_ref()
            .map(|a| count_violated(&instance, a).unwrap() == 0)
            .unwrap_or(false);
        if ok {
            solved += 1;
        }
        println!(
            "seed {seed}: {:?} iters {} verified {} time {:.1}s",
            outcome.record.status,
            outcome.record.iterations,
            ok,
            t0.elapsed().as_secs_f64()
        );
    }
    println!("alpha {alpha}: {solved}/{seeds} solved");
}
