use std::path::Path;
use std::process::{Command, Output};

use langcontact::dynamics::iterate;
use langcontact::environment::{reduce_params, GrammarAdvantages, PopulationState};
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_langcontact"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn csv_records(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn learn_is_reproducible_and_seed_sensitive() {
    let args = [
        "learn",
        "--tokens",
        "2000",
        "--n-learners",
        "4",
        "--seed",
        "9",
    ];
    let a = stdout(&args);
    assert_eq!(a, stdout(&args));
    assert_ne!(
        a,
        stdout(&[
            "learn",
            "--tokens",
            "2000",
            "--n-learners",
            "4",
            "--seed",
            "10"
        ])
    );
    let (header, rows) = csv_records(&a);
    assert_eq!(header, ["learner_id", "kind", "iteration", "prob"]);
    // Samples at 0, 100, ..., 2000 for each of four learners.
    assert_eq!(rows.len(), 4 * 21);
    assert_eq!(rows.iter().filter(|r| r[1] == "L2").count(), 2 * 21);
}

#[test]
fn learn_with_no_tokens_gives_a_single_row() {
    let (_, rows) = csv_records(&stdout(&["learn", "--n-learners", "1", "--tokens", "0"]));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][2], "0");
}

#[test]
fn learn_defaults_track_the_asymptote() {
    let (_, rows) = csv_records(&stdout(&["learn", "--n-learners", "40"]));
    let terminal: Vec<f64> = rows
        .iter()
        .filter(|r| r[1] == "L1" && r[2] == "100000")
        .map(|r| r[3].parse().unwrap())
        .collect();
    assert_eq!(terminal.len(), 20);
    let mean = terminal.iter().sum::<f64>() / terminal.len() as f64;
    assert!((mean - 0.5556).abs() < 0.05, "{mean}");
}

#[test]
fn csv_and_json_carry_identical_values() {
    let grid = [
        "orbit",
        "--alpha",
        "0.5,1.5,3",
        "--d-grid",
        "1,4",
        "--sigma-grid",
        "0:1:6",
    ];
    let (header, rows) = csv_records(&stdout(&grid));
    let json: Vec<Value> =
        serde_json::from_str(&stdout(&[&grid[..], &["--format", "json"]].concat())).unwrap();
    assert_eq!(rows.len(), 3 * 2 * 6);
    assert_eq!(rows.len(), json.len());
    for (row, obj) in rows.iter().zip(&json) {
        for (key, cell) in header.iter().zip(row) {
            let v = &obj[key];
            match v {
                Value::Number(n) => {
                    assert_eq!(n.as_f64().unwrap(), cell.parse::<f64>().unwrap(), "{key}")
                }
                Value::String(s) => assert_eq!(s, cell),
                other => panic!("unexpected {other}"),
            }
        }
    }
}

#[test]
fn orbit_rows_follow_grid_order() {
    let (_, rows) = csv_records(&stdout(&[
        "orbit",
        "--alpha",
        "2,1",
        "--d-grid",
        "3",
        "--sigma-grid",
        "0.9,0.1",
    ]));
    let keys: Vec<(&str, &str)> = rows
        .iter()
        .map(|r| (r[0].as_str(), r[2].as_str()))
        .collect();
    assert_eq!(
        keys,
        [
            ("2.0", "0.9"),
            ("2.0", "0.1"),
            ("1.0", "0.9"),
            ("1.0", "0.1")
        ]
    );
    assert_eq!(rows[0][5], "lost");
    assert_eq!(rows[1][5], "retained");
}

#[test]
fn phase_report_for_strong_advantage() {
    let v: Value = serde_json::from_str(&stdout(&[
        "phase", "--alpha", "14", "--D", "1", "--sigma", "0.9",
    ]))
    .unwrap();
    assert_eq!(v["phase"], "retained");
    assert_eq!(v["regime"], "always-retained");
    assert!(v["lambda_plus"].as_f64().unwrap() > 0.0);
    let p = v["equilibrium"]["p"].as_f64().unwrap();
    assert!(p > 0.0 && p < 1.0);
}

#[test]
fn phase_at_a_bifurcation_threshold() {
    // alpha = 2, D = 1 puts sigma_crit at exactly 1.
    let v: Value = serde_json::from_str(&stdout(&[
        "phase", "--alpha", "2", "--D", "1", "--sigma", "0.5",
    ]))
    .unwrap();
    assert_eq!(v["sigma_crit"].as_f64(), Some(1.0));
    assert_eq!(v["regime"], "bifurcation");
}

#[test]
fn exit_codes() {
    assert_eq!(
        run(&["phase", "--alpha", "2", "--D", "1", "--sigma", "1.5"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["phase", "--alpha", "-1", "--D", "1", "--sigma", "0.5"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["learn", "--gamma", "1.5"]).status.code(), Some(2));
    assert_eq!(run(&["orbit", "--alpha", "1:2"]).status.code(), Some(2));
    assert_eq!(run(&["calibrate"]).status.code(), Some(2));
    assert_eq!(
        run(&["calibrate", "--preset", "nowhere"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
    let slow = run(&[
        "phase",
        "--alpha",
        "2",
        "--D",
        "1",
        "--sigma",
        "0.5",
        "--max-iter",
        "3",
    ]);
    assert_eq!(slow.status.code(), Some(3));
}

#[test]
fn sweeps_flag_nonconvergence_without_failing() {
    let (header, rows) = csv_records(&stdout(&[
        "passage",
        "--sigma-grid",
        "0.2",
        "--d-grid",
        "1",
        "--max-gen",
        "3",
    ]));
    assert_eq!(header, ["sigma", "d", "D", "q0", "generations", "status"]);
    assert!(rows
        .iter()
        .all(|r| r[4].is_empty() && r[5] == "non-converged"));

    let (_, rows) = csv_records(&stdout(&[
        "orbit",
        "--alpha",
        "2",
        "--sigma-grid",
        "0.3",
        "--max-iter",
        "2",
    ]));
    assert_eq!(rows[0][6], "non-converged");
}

#[test]
fn passage_time_falls_as_difficulty_grows() {
    let (_, rows) = csv_records(&stdout(&[
        "passage",
        "--sigma-grid",
        "0.6",
        "--d-grid",
        "0.5:20:40",
        "--q0-grid",
        "0.5",
    ]));
    let gens: Vec<usize> = rows.iter().map(|r| r[4].parse().unwrap()).collect();
    assert!(gens.windows(2).all(|w| w[1] <= w[0]), "{gens:?}");
    // With alpha1 = alpha2 = 1 the reduced and raw difficulty coincide.
    assert!(rows.iter().all(|r| r[1] == r[2]));
}

#[test]
fn calibrate_presets_reproduce_published_intervals() {
    let (_, rows) = csv_records(&stdout(&["calibrate", "--preset", "afrikaans"]));
    let got: Vec<(String, String, String)> = rows
        .iter()
        .map(|r| (r[0].clone(), r[1].clone(), r[2].clone()))
        .collect();
    let expected = [
        ("1670", "0.17", "0.34"),
        ("1690", "0.18", "0.35"),
        ("1711", "0.26", "0.52"),
        ("1730", "0.31", "0.63"),
        ("1750", "0.28", "0.56"),
        ("1770", "0.26", "0.53"),
        ("1798", "0.34", "0.68"),
        ("1820", "0.29", "0.59"),
    ];
    assert_eq!(got.len(), expected.len());
    for (g, e) in got.iter().zip(expected) {
        assert_eq!((g.0.as_str(), g.1.as_str(), g.2.as_str()), e);
    }
    let (_, rows) = csv_records(&stdout(&["calibrate", "--preset", "afro_peruvian"]));
    let highs: Vec<&str> = rows.iter().map(|r| r[2].as_str()).collect();
    assert_eq!(highs, ["0.46", "0.49", "0.55", "0.56"]);
}

#[test]
fn calibrate_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("demo.csv");
    let pool_path = dir.path().join("demo.pool");
    std::fs::write(&csv_path, "year,group,count\n1900,A,60\n1900,B+C,40\n").unwrap();
    std::fs::write(&pool_path, "[l2_pool]\nB\n[pooled]\nB+C,0.5\n").unwrap();
    let (_, rows) = csv_records(&stdout(&[
        "calibrate",
        "--demographics",
        csv_path.to_str().unwrap(),
        "--pool",
        pool_path.to_str().unwrap(),
    ]));
    assert_eq!(rows.len(), 1);
    assert_eq!((rows[0][1].as_str(), rows[0][2].as_str()), ("0.1", "0.2"));
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn cohort_writes_both_tables_reproducibly() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.csv");
    let args = |p: &Path| {
        vec![
            "cohort".to_string(),
            "--n-learners".into(),
            "10".into(),
            "--tokens".into(),
            "3000".into(),
            "--generations".into(),
            "4".into(),
            "--output".into(),
            p.to_str().unwrap().into(),
        ]
    };
    let a: Vec<String> = args(&out);
    let a: Vec<&str> = a.iter().map(String::as_str).collect();
    stdout(&a);
    let first = read(&out);
    let det = read(&dir.path().join("run_det.csv"));
    stdout(&a);
    assert_eq!(first, read(&out));
    assert_eq!(det, read(&dir.path().join("run_det.csv")));

    let (header, rows) = csv_records(&first);
    assert_eq!(
        header,
        ["generation", "kind", "learner_id", "terminal_prob"]
    );
    assert_eq!(rows.len(), 10 * 5);

    let (header, rows) = csv_records(&det);
    assert_eq!(header, ["generation", "p_det", "q_det"]);
    let adv = GrammarAdvantages::new(0.25, 0.2).unwrap();
    let params = reduce_params(&adv, 2.0, 0.5).unwrap();
    let expected = iterate(PopulationState { p: 0.99, q: 0.99 }, &params, 4);
    assert_eq!(rows.len(), expected.len());
    for (row, x) in rows.iter().zip(&expected) {
        assert_eq!(row[1].parse::<f64>().unwrap(), x.p);
        assert_eq!(row[2].parse::<f64>().unwrap(), x.q);
    }
}
