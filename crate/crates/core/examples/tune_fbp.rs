//! Scratch probe for fBP ramp parameters on committee and perceptron models.

use rekit_core::fbp::{solve_fbp, FbpProtocol};
use rekit_core::model::{generate_patterns, NetworkKind, Topology};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let kind = NetworkKind::parse(&args[1]).unwrap();
    let n: usize = args[2].parse().unwrap();
    let k: usize = args[3].parse().unwrap();
    let alpha: f64 = args[4].parse().unwrap();
    let y: f64 = args[5].parse().unwrap();
    let gamma_step: f64 = args[6].parse().unwrap();
    let gamma_stop: f64 = args[7].parse().unwrap();
    let damping: f64 = args[8].parse().unwrap();
    let sweeps: usize = args[9].parse().unwrap();
    let seeds: u64 = args[10].parse().unwrap();
    let init_noise: f64 = args.get(11).map_or(1e-3, |s| s.parse().unwrap());
    let verbose = args.get(12).is_some();

    let topology = Topology::new(n, k, kind).unwrap();
    for seed in 0..seeds {
        let patterns = generate_patterns(topology, alpha, 3000 + seed).unwrap();
        let mut protocol = FbpProtocol::focusing(y, 0.0, gamma_step, gamma_stop);
        protocol.damping = damping;
        protocol.sweeps_per_step = sweeps;
        protocol.init_noise = init_noise;
        let t0 = std::time::Instant::now();
        let rec = solve_fbp(&patterns, &protocol, seed).unwrap();
        let h2 = |d: f64| {
            if d <= 0.0 || d >= 1.0 {
                0.0
            } else {
                -d * d.ln() - (1.0 - d) * (1.0 - d).ln()
            }
        };
        let mut neg_le = false;
        let mut above_bound = 0usize;
        for tp in &rec.trace {
            if let (Some(d), Some(le)) = (tp.get("distance"), tp.get("local_entropy")) {
                if *le < 0.0 {
                    neg_le = true;
                }
                if *le > h2(*d) + 1e-9 {
                    above_bound += 1;
                }
                if verbose {
                    println!(
                        "  gamma {:.3} q {:.4} err {:.0} d {:.4} le {:.5} bound {:.5} sw {:.0} conv {:.0}",
                        tp.get("gamma").copied().unwrap_or(f64::NAN),
                        tp.get("q").copied().unwrap_or(f64::NAN),
                        tp.get("error_count").copied().unwrap_or(f64::NAN),
                        d,
                        le,
                        h2(*d),
                        tp.get("sweeps").copied().unwrap_or(f64::NAN),
                        tp.get("converged").copied().unwrap_or(f64::NAN)
                    );
                }
            } else if verbose {
                println!(
                    "  gamma {:.3} q {:.4} err {:.5} (no entropy)",
                    tp.get("gamma").copied().unwrap_or(f64::NAN),
                    tp.get("q").copied().unwrap_or(f64::NAN),
                    tp.get("error_count").copied().unwrap_or(f64::NAN)
                );
            }
        }
        println!(
            "seed {seed}: {:?} sweeps {} steps {} neg_le {} above_bound {} time {:.1}s",
            rec.status,
            rec.iterations,
            rec.trace.len(),
            neg_le,
            above_bound,
            t0.elapsed().as_secs_f64()
        );
    }
}
