use std::fs;
use std::process::Command;

fn re_kit() -> Command {
    Command::new(env!("CARGO_BIN_EXE_re-kit"))
}

#[test]
fn ksat_run_fit_emit_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cnf = dir.path().join("sat.cnf");
    fs::write(&cnf, "p cnf 3 2\n1 2 0\n-2 3 0\n").unwrap();
    let config = dir.path().join("exp.toml");
    fs::write(
        &config,
        format!(
            r#"
name = "demo"
seeds = [1, 2, 3]
output = "records"

[job]
algorithm = "ksat"
n = 3
alpha = 0.667
k = 2
cnf = {cnf:?}

[job.protocol]
damping = 0.5
sweeps_per_step = 200
tol = 1e-8
init_noise = 0.01

[job.protocol.mode]
mode = "bp"
"#,
            cnf = cnf.display().to_string()
        ),
    )
    .unwrap();

    // relative output resolves under the env-var root
    let status = re_kit()
        .args(["ksat", "--config", config.to_str().unwrap()])
        .env("RE_KIT_OUTPUT_ROOT", dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let records_dir = dir.path().join("records");
    assert_eq!(fs::read_dir(&records_dir).unwrap().count(), 3);

    // emit succeeds on the recorded data
    let out_csv = dir.path().join("curve.csv");
    let status = re_kit()
        .args([
            "emit",
            "--records",
            records_dir.to_str().unwrap(),
            "--kind",
            "ksat",
            "--out",
            out_csv.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let text = fs::read_to_string(&out_csv).unwrap();
    assert!(text.starts_with("alpha,runs,solved,success_probability"));

    // wrong subcommand for the config is a clean error
    let status = re_kit()
        .args(["rsa", "--config", config.to_str().unwrap()])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    // fit on too little data errors out
    let status = re_kit()
        .args(["fit", "--records", records_dir.to_str().unwrap()])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn unsolvable_run_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cnf = dir.path().join("unsat.cnf");
    fs::write(&cnf, "p cnf 1 2\n1 0\n-1 0\n").unwrap();
    let config = dir.path().join("exp.toml");
    fs::write(
        &config,
        format!(
            r#"
name = "unsat"
seeds = [1]
output = {out:?}

[job]
algorithm = "ksat"
n = 1
alpha = 2.0
k = 1
cnf = {cnf:?}

[job.protocol]
damping = 0.0
sweeps_per_step = 50
tol = 1e-8
init_noise = 0.01

[job.protocol.mode]
mode = "bp"
"#,
            out = dir.path().join("records").display().to_string(),
            cnf = cnf.display().to_string()
        ),
    )
    .unwrap();
    let status = re_kit().args(["ksat", "--config", config.to_str().unwrap()]).status().unwrap();
    assert_eq!(status.code(), Some(1));
}
