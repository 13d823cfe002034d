//! Full criterion-4 style protocol probe: per-sample minimum attempts
//! over a schedule grid, medians per N, interacting vs non-interacting.

use rekit_core::harness::RunStatus;
use rekit_core::model::{generate_patterns, NetworkKind, Topology};
use rekit_core::rsa::{run_sa, ProposalMode, SaSchedule};

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn main() {
    let sizes = [201usize, 401, 801, 1601];
    let samples = 10u64;
    let interacting: Vec<SaSchedule> = [(1.6, 0.3), (1.6, 0.4), (2.5, 0.3), (2.5, 0.4)]
        .iter()
        .map(|&(beta_f, gamma_f)| SaSchedule { beta0: 1.0, beta_f, gamma0: 1.0, gamma_f })
        .collect();
    let plain: Vec<SaSchedule> = [(1.0, 0.4), (1.0, 1.6), (2.0, 0.4), (2.0, 1.6)]
        .iter()
        .map(|&(beta0, beta_f)| SaSchedule { beta0, beta_f, gamma0: 0.0, gamma_f: 0.0 })
        .collect();

    for &n in &sizes {
        let topology = Topology::new(n, 1, NetworkKind::Perceptron).unwrap();
        let cap: u64 = 50_000_000;
        let mut med = Vec::new();
        for (label, grid) in [("int", &interacting), ("non", &plain)] {
            let t0 = std::time::Instant::now();
            let mut minima = Vec::new();
            for sample in 0..samples {
                let patterns = generate_patterns(topology, 0.3, 1000 + sample).unwrap();
                let mut best: Option<u64> = None;
                let mut censored: u64 = 0;
                for (si, schedule) in grid.iter().enumerate() {
                    let seed = sample * 100 + si as u64;
                    let rec = run_sa(&patterns, 3, schedule, ProposalMode::Biased, seed, cap).unwrap();
                    if rec.status == RunStatus::Solved {
                        best = Some(best.map_or(rec.iterations, |b| b.min(rec.iterations)));
                    } else {
                        censored = censored.max(rec.iterations);
                    }
                }
                minima.push(best.unwrap_or(censored) as f64);
                if best.is_none() {
                    eprintln!("  {label} N={n} sample {sample}: censored at {censored}");
                }
            }
            let m = median(minima.clone());
            med.push(m);
            println!(
                "{label} N={n}: median {m:.0} target {:.0} ratio-to-target {:.2} time {:.0}s  minima {:?}",
                0.13 * (n as f64).powf(1.7),
                m / (0.13 * (n as f64).powf(1.7)),
                t0.elapsed().as_secs_f64(),
                minima.iter().map(|x| *x as u64).collect::<Vec<_>>()
            );
        }
        println!("N={n}: non/int ratio {:.2}", med[1] / med[0]);
    }
}
