use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use super::config::{ExperimentConfig, Job, ModelSpec};
use super::fit::{fit_power_law, fit_scaling, fit_stretched, spearman, FitModel};
use super::grid::{grid_search, rank_entries, summarize, GridEntry, GridPoint};
use super::store::{read_record, run_experiment, record_path};
use super::{emit_curves, RunRecord, RunStatus};
use crate::rsa::{ProposalMode, SaSchedule};

fn rsa_job(n: usize, alpha: f64) -> Job {
    Job::Rsa {
        model: ModelSpec { n, k: 1, kind: "perceptron".into(), alpha, pattern_seed: None },
        y: 2,
        schedule: SaSchedule { beta0: 1.0, beta_f: 0.1, gamma0: 0.5, gamma_f: 0.05 },
        mode: ProposalMode::Biased,
        max_iters: 500_000,
    }
}

fn config(dir: PathBuf, job: Job) -> ExperimentConfig {
    ExperimentConfig { name: "t".into(), seeds: vec![1, 2, 3], output: dir, job }
}

#[test]
fn config_toml_round_trip() {
    let c = config(PathBuf::from("runs/x"), rsa_job(21, 0.3));
    let text = c.to_toml_string().unwrap();
    let back = ExperimentConfig::from_toml_str(&text).unwrap();
    assert_eq!(back.to_toml_string().unwrap(), text);
    assert_eq!(back.job.algorithm(), "rsa");
}

#[test]
fn config_validation_rejects_bad_inputs() {
    let good = config(PathBuf::from("runs/x"), rsa_job(21, 0.3));
    let mut c = good.clone();
    c.seeds.clear();
    assert!(c.validate().is_err());
    let mut c = good.clone();
    c.seeds = vec![1, 1];
    assert!(c.validate().is_err());
    let mut c = good.clone();
    c.name = "no/slashes".into();
    assert!(c.validate().is_err());
    let mut c = good.clone();
    if let Job::Rsa { model, .. } = &mut c.job {
        model.kind = "lattice".into();
    }
    assert!(c.validate().is_err());
}

#[test]
fn overrides_follow_dotted_paths() {
    let c = config(PathBuf::from("runs/x"), rsa_job(21, 0.3));
    let c2 = c.with_override("job.schedule.beta0", "2.5").unwrap();
    match c2.job {
        Job::Rsa { schedule, .. } => assert_eq!(schedule.beta0, 2.5),
        _ => unreachable!(),
    }
    let c3 = c.with_override("seeds", "[7, 9]").unwrap();
    assert_eq!(c3.seeds, vec![7, 9]);
    assert!(c.with_override("job.nonsense.x", "1").is_err());
    // overrides must still satisfy validation
    assert!(c.with_override("job.schedule.beta0", "-1.0").is_err());
}

#[test]
fn run_experiment_is_atomic_idempotent_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(dir.path().join("a"), rsa_job(21, 0.3));
    let records = run_experiment(&c, false).unwrap();
    assert_eq!(records.len(), 3);
    assert!(records.iter().all(|r| r.status == RunStatus::Solved));
    assert!(records.iter().all(|r| r.solution_hash.is_some()));
    // no temporary files left behind
    assert!(fs::read_dir(dir.path().join("a"))
        .unwrap()
        .all(|e| e.unwrap().path().extension().unwrap() == "json"));

    // idempotence: existing records are loaded, not recomputed
    let path = record_path(&c, 1);
    let mut doctored = read_record(&path).unwrap();
    doctored.iterations += 12345;
    super::store::write_record(&path, &doctored).unwrap();
    let again = run_experiment(&c, false).unwrap();
    assert_eq!(again[0].iterations, doctored.iterations);

    // force recomputes; a fresh directory gives byte-identical records
    let forced = run_experiment(&c, true).unwrap();
    let c2 = config(dir.path().join("b"), rsa_job(21, 0.3));
    run_experiment(&c2, false).unwrap();
    for seed in [1, 2, 3] {
        assert_eq!(
            fs::read(record_path(&c, seed)).unwrap(),
            fs::read(record_path(&c2, seed)).unwrap()
        );
    }
    assert_eq!(forced[0].solution_hash, records[0].solution_hash);

    // replay: the same (job, seed) reproduces the solved hash
    let replayed = c.job.run(2).unwrap();
    assert_eq!(replayed.solution_hash, records[1].solution_hash);
}

#[test]
fn power_law_fit_recovers_generator() {
    let points: Vec<(f64, f64)> =
        [201.0, 401.0, 801.0, 1601.0, 3201.0].iter().map(|&n| (n, 0.13 * f64::powf(n, 1.7))).collect();
    let fit = fit_power_law(&points).unwrap();
    assert!((fit.a - 0.13).abs() < 1e-9, "a = {}", fit.a);
    assert!((fit.b - 1.7).abs() < 1e-9);
    assert!(fit.residual < 1e-12);

    let mut reversed = points.clone();
    reversed.reverse();
    let fit2 = fit_power_law(&reversed).unwrap();
    assert!((fit.a - fit2.a).abs() < 1e-12);
    assert!((fit.b - fit2.b).abs() < 1e-12);
}

#[test]
fn stretched_fit_recovers_generator() {
    let (a, b, c, d) = (0.2, 1.5, 6.6e-4, 1.1);
    let points: Vec<(f64, f64)> = [200.0, 400.0, 800.0, 1600.0, 2400.0, 3200.0]
        .iter()
        .map(|&n| (n, a * f64::powf(n, b) * (c * f64::powf(n, d)).exp()))
        .collect();
    let fit = fit_stretched(&points).unwrap();
    assert!(fit.residual < 1e-6, "residual = {}", fit.residual);
    assert!((fit.b - b).abs() < 1e-2);
    assert!((fit.d - d).abs() < 1e-2);
}

fn synthetic_record(alg: &str, n: u64, alpha: f64, seed: u64, status: RunStatus, iterations: u64) -> RunRecord {
    RunRecord {
        algorithm: alg.into(),
        params: serde_json::json!({"n": n, "alpha": alpha}),
        seed,
        status,
        iterations,
        solution_hash: if status == RunStatus::Solved { Some("x".into()) } else { None },
        trace: Vec::new(),
    }
}

#[test]
fn fit_scaling_groups_solved_records_by_n() {
    let mut records = Vec::new();
    for n in [1001u64, 2001, 4001, 8001] {
        for seed in 0..4 {
            let iters = (0.13 * f64::powf(n as f64, 1.7)).round() as u64;
            records.push(synthetic_record("rsa", n, 0.3, seed, RunStatus::Solved, iters));
        }
        // unsolved records are excluded from the fit
        records.push(synthetic_record("rsa", n, 0.3, 99, RunStatus::Timeout, 1));
    }
    let report = fit_scaling(&records, FitModel::PowerLaw).unwrap();
    let fit = report.power_law.unwrap();
    assert!((fit.a - 0.13).abs() < 1e-3);
    assert!((fit.b - 1.7).abs() < 1e-3);
    assert_eq!(report.points.len(), 4);
    assert!(report.points.iter().all(|p| p.solved == 4 && p.total == 5));

    // reorder invariance
    let mut shuffled = records.clone();
    shuffled.reverse();
    let report2 = fit_scaling(&shuffled, FitModel::PowerLaw).unwrap();
    assert_eq!(report2.power_law.unwrap().b, fit.b);

    // two N values are not enough
    records.retain(|r| r.params["n"].as_u64().unwrap() <= 2001);
    assert!(fit_scaling(&records, FitModel::PowerLaw).is_err());
}

#[test]
fn spearman_rank_correlation() {
    assert_eq!(spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 80.0]).unwrap(), 1.0);
    assert_eq!(spearman(&[1.0, 2.0, 3.0], &[5.0, 1.0, -2.0]).unwrap(), -1.0);
    let r = spearman(&[1.0, 2.0, 3.0, 4.0, 5.0], &[2.0, 1.0, 4.0, 3.0, 5.0]).unwrap();
    assert!((r - 0.8).abs() < 1e-12);
    assert_eq!(spearman(&[1.0, 2.0, 2.0, 3.0], &[1.0, 5.0, 5.0, 9.0]).unwrap(), 1.0);
    assert!(spearman(&[1.0, 1.0], &[2.0, 3.0]).is_err());
}

#[test]
fn emit_curves_tables() {
    let records = vec![
        synthetic_record("ksat", 100, 9.0, 1, RunStatus::Solved, 10),
        synthetic_record("ksat", 100, 9.0, 2, RunStatus::Timeout, 10),
        synthetic_record("ksat", 100, 9.9, 1, RunStatus::Contradiction, 10),
    ];
    let mut buf = Vec::new();
    emit_curves(&records, "ksat", &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "alpha,runs,solved,success_probability");
    assert_eq!(lines[1], "9,2,1,0.5");
    assert_eq!(lines[2], "9.9,1,0,0");

    // probabilities stay in [0,1]
    for line in &lines[1..] {
        let p: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!((0.0..=1.0).contains(&p));
    }

    // empty input: header only
    let mut buf = Vec::new();
    emit_curves(&[], "rsgd", &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1);

    // mixed kinds rejected
    let mut buf = Vec::new();
    assert!(emit_curves(&records, "rsa", &mut buf).is_err());
    assert!(emit_curves(&records, "volume", &mut buf).is_err());
}

#[test]
fn grid_ranking_prefers_success_then_speed() {
    let entry = |index, success_rate, mean: Option<f64>| GridEntry {
        index,
        overrides: GridPoint::new(),
        runs: 10,
        success_rate,
        mean_iterations: mean,
    };
    let entries = vec![
        entry(0, 0.5, Some(10.0)),
        entry(1, 1.0, Some(500.0)),
        entry(2, 1.0, Some(20.0)),
        entry(3, 0.0, None),
    ];
    let mut shuffled = entries.clone();
    shuffled.swap(0, 2);
    shuffled.swap(1, 3);
    for input in [entries, shuffled] {
        let ranked = rank_entries(input);
        let order: Vec<usize> = ranked.iter().map(|e| e.index).collect();
        assert_eq!(order, vec![2, 1, 0, 3]);
    }

    // summarize is order-independent
    let records = vec![
        synthetic_record("rsa", 10, 0.3, 1, RunStatus::Solved, 100),
        synthetic_record("rsa", 10, 0.3, 2, RunStatus::Timeout, 5),
    ];
    let mut reversed = records.clone();
    reversed.reverse();
    let a = summarize(0, &GridPoint::new(), &records);
    let b = summarize(0, &GridPoint::new(), &reversed);
    assert_eq!(a.success_rate, 0.5);
    assert_eq!(a.mean_iterations, b.mean_iterations);
}

#[test]
fn grid_search_selects_the_feasible_point() {
    let dir = tempfile::tempdir().unwrap();
    let sat = dir.path().join("sat.cnf");
    let unsat = dir.path().join("unsat.cnf");
    fs::write(&sat, "p cnf 2 1\n1 2 0\n").unwrap();
    fs::write(&unsat, "p cnf 1 2\n1 0\n-1 0\n").unwrap();

    let base = ExperimentConfig {
        name: "g".into(),
        seeds: vec![1, 2],
        output: dir.path().join("out"),
        job: Job::Ksat {
            n: 2,
            alpha: 0.5,
            k: 2,
            cnf: Some(sat.clone()),
            protocol: crate::ksat::KSatProtocol {
                damping: 0.0,
                sweeps_per_step: 50,
                ..crate::ksat::KSatProtocol::defaults()
            },
        },
    };
    let point = |path: &PathBuf| {
        let mut p = GridPoint::new();
        p.insert("job.cnf".into(), format!("{:?}", path.display().to_string()));
        p
    };
    let report = grid_search(&base, &[point(&unsat), point(&sat)], false).unwrap();
    assert_eq!(report.ranking[0].index, 1);
    assert_eq!(report.ranking[0].success_rate, 1.0);
    assert_eq!(report.ranking[1].success_rate, 0.0);
    assert!(dir.path().join("out/grid-report.json").exists());

    assert!(grid_search(&base, &[], false).is_err());
}
