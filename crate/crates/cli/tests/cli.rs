//! End-to-end tests of the command-line pipeline against the shipped
//! fixtures.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn servelab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_servelab"))
        .args(args)
        .output()
        .expect("binary must run")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no exit code")
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("missing {name}: {e}"))
}

/// Column lookup in a CSV; panics on unknown columns to keep failures loud.
fn csv_rows(text: &str) -> Vec<std::collections::HashMap<String, String>> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().expect("header").split(',').collect();
    lines
        .map(|line| {
            header
                .iter()
                .zip(line.split(','))
                .map(|(h, v)| (h.to_string(), v.to_string()))
                .collect()
        })
        .collect()
}

fn num(row: &std::collections::HashMap<String, String>, col: &str) -> f64 {
    row[col]
        .parse()
        .unwrap_or_else(|_| panic!("{col} = {:?} is not numeric", row[col]))
}

#[test]
fn ingest_is_deterministic_and_counts_correctly() {
    let tmp = tempfile::tempdir().unwrap();
    let (out1, out2) = (tmp.path().join("a"), tmp.path().join("b"));
    for out in [&out1, &out2] {
        let run = servelab(&[
            "ingest",
            "--input",
            fixture("points_small.csv").to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--min-matches",
            "1",
        ]);
        assert_eq!(
            exit_code(&run),
            0,
            "stderr: {}",
            String::from_utf8_lossy(&run.stderr)
        );
    }
    let a = read(&out1, "counts.csv");
    let b = read(&out2, "counts.csv");
    assert_eq!(a, b, "byte-identical across runs");

    let rows = csv_rows(&a);
    assert_eq!(rows.len(), 2);
    let alice = rows.iter().find(|r| r["player_id"] == "ace_alice").unwrap();
    // 12 points over 3 matches: 7 first-in (3 aces, 2 multi-shot wins, 2
    // losses), 4 second-in (1 ace, 1 multi-shot win, 2 losses), 1 double
    // fault
    assert_eq!(num(alice, "N") as u64, 12);
    assert_eq!(num(alice, "n_x1") as u64, 7);
    assert_eq!(num(alice, "n_x2") as u64, 4);
    assert_eq!(num(alice, "n_f1") as u64, 3);
    assert_eq!(num(alice, "n_k1") as u64, 2);
    assert_eq!(num(alice, "n_f2") as u64, 1);
    assert_eq!(num(alice, "n_k2") as u64, 1);
    assert_eq!(num(alice, "n_matches") as u64, 3);
}

#[test]
fn ingest_default_cutoff_excludes_thin_fixture_players() {
    let tmp = tempfile::tempdir().unwrap();
    let run = servelab(&[
        "ingest",
        "--input",
        fixture("points_small.csv").to_str().unwrap(),
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&run), 0);
    let rows = csv_rows(&read(tmp.path(), "counts.csv"));
    assert!(
        rows.is_empty(),
        "three charted matches is below the default cutoff"
    );
}

#[test]
fn missing_input_file_exits_2_with_path() {
    let tmp = tempfile::tempdir().unwrap();
    let run = servelab(&[
        "ingest",
        "--input",
        "no/such/file.csv",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&run), 2);
    let stderr = String::from_utf8_lossy(&run.stderr);
    assert!(stderr.contains("no/such/file.csv"), "stderr: {stderr}");
}

#[test]
fn config_errors_exit_3() {
    let tmp = tempfile::tempdir().unwrap();
    let counts = fixture("counts_players.csv");
    let cases: Vec<Vec<&str>> = vec![
        vec![
            "estimate",
            "--input",
            counts.to_str().unwrap(),
            "--eps",
            "-1",
        ],
        vec![
            "counterfactual",
            "--input",
            counts.to_str().unwrap(),
            "--prizes",
            "x.json",
            "--best-of",
            "4",
        ],
        vec![
            "bootstrap",
            "--input",
            counts.to_str().unwrap(),
            "--level",
            "1.5",
        ],
        vec![
            "ingest",
            "--input",
            counts.to_str().unwrap(),
            "--min-matches",
            "0",
        ],
        vec![
            "estimate",
            "--input",
            counts.to_str().unwrap(),
            "--no-such-flag",
        ],
    ];
    for mut args in cases {
        args.push("--out");
        args.push(tmp.path().to_str().unwrap());
        // an unknown flag never reaches --out handling; keep it last anyway
        let run = servelab(&args);
        assert_eq!(
            exit_code(&run),
            3,
            "args {args:?}: {}",
            String::from_utf8_lossy(&run.stderr)
        );
    }
}

#[test]
fn estimate_reproduces_the_reference_table() {
    let tmp = tempfile::tempdir().unwrap();
    let run = servelab(&[
        "estimate",
        "--input",
        fixture("counts_players.csv").to_str().unwrap(),
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(
        exit_code(&run),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&run.stderr)
    );

    let fits = csv_rows(&read(tmp.path(), "fits.csv"));
    assert_eq!(fits.len(), 12);
    let federer = fits
        .iter()
        .find(|r| r["player_id"] == "roger_federer")
        .unwrap();
    assert!((num(federer, "delta") - 0.32).abs() < 0.03);
    assert!((num(federer, "lambda") - 2.81).abs() < 0.06);
    assert_eq!(federer["soc_ok"], "true");

    let karlovic = fits
        .iter()
        .find(|r| r["player_id"] == "ivo_karlovic")
        .unwrap();
    assert!((num(karlovic, "delta") - 1.19).abs() < 0.04);

    // stats table pins 15 significant digits (scientific notation)
    let stats = read(tmp.path(), "stats.csv");
    let line = stats
        .lines()
        .find(|l| l.starts_with("roger_federer"))
        .unwrap();
    let x1_field = line.split(',').nth(1).unwrap();
    assert!(
        x1_field.contains('e') && x1_field.len() >= 16,
        "x1 field {x1_field:?} must carry 15 significant digits"
    );
    let x1: f64 = x1_field.parse().unwrap();
    assert!((x1 - 0.618).abs() < 5e-4);

    // bounds classification and plot series come out of the same command
    let bounds = csv_rows(&read(tmp.path(), "bounds.csv"));
    assert_eq!(bounds.len(), 12);
    let federer = bounds
        .iter()
        .find(|r| r["player_id"] == "roger_federer")
        .unwrap();
    assert!((num(federer, "lower") - -0.494).abs() < 0.01);
    assert_eq!(federer["classification"], "LikelyPositive");

    let curves = csv_rows(&read(tmp.path(), "skill_curves.csv"));
    assert_eq!(curves.len(), 12 * 101);
    let map = csv_rows(&read(tmp.path(), "lambda_map.csv"));
    assert_eq!(map.len(), 12 * 160);
}

#[test]
fn empty_counts_yield_empty_tables_and_success() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("counts.csv");
    fs::write(
        &input,
        "player_id,n_matches,N,n_x1,n_x2,n_f1,n_f2,n_k1,n_k2\n",
    )
    .unwrap();
    let run = servelab(&[
        "estimate",
        "--input",
        input.to_str().unwrap(),
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&run), 0);
    assert!(csv_rows(&read(tmp.path(), "fits.csv")).is_empty());
    assert!(csv_rows(&read(tmp.path(), "stats.csv")).is_empty());
}

#[test]
fn estimate_isolates_degenerate_players() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("counts.csv");
    // the second player has equal one-shot rates on both serves, which the
    // identification cannot use; the first player must still come through
    fs::write(
        &input,
        "player_id,n_matches,N,n_x1,n_x2,n_f1,n_f2,n_k1,n_k2\n\
         good_player,30,10000,6180,3604,2565,692,2188,1406\n\
         flat_player,30,10000,6000,3600,1800,1080,1500,900\n",
    )
    .unwrap();
    let run = servelab(&[
        "estimate",
        "--input",
        input.to_str().unwrap(),
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&run), 0);
    let stderr = String::from_utf8_lossy(&run.stderr);
    assert!(stderr.contains("flat_player"), "stderr: {stderr}");
    let fits = csv_rows(&read(tmp.path(), "fits.csv"));
    assert_eq!(fits.len(), 1);
    assert_eq!(fits[0]["player_id"], "good_player");
}

#[test]
fn bounds_subcommand_stands_alone() {
    let tmp = tempfile::tempdir().unwrap();
    let run = servelab(&[
        "bounds",
        "--input",
        fixture("counts_players.csv").to_str().unwrap(),
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(
        exit_code(&run),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&run.stderr)
    );
    let rows = csv_rows(&read(tmp.path(), "bounds.csv"));
    assert_eq!(rows.len(), 12);
    let federer = rows
        .iter()
        .find(|r| r["player_id"] == "roger_federer")
        .unwrap();
    assert!((num(federer, "ratio") - 0.09).abs() < 0.015);
    assert_eq!(federer["lemma1_b"], "true");
    assert_eq!(federer["lemma1_c"], "true");
    // every fixture player keeps a finite lower bound and an upper bound
    for row in &rows {
        assert!(num(row, "lower").is_finite(), "{}", row["player_id"]);
    }
}

#[test]
fn stats_json_mirrors_the_15_digit_csv() {
    let tmp = tempfile::tempdir().unwrap();
    for format in ["csv", "json"] {
        let run = servelab(&[
            "estimate",
            "--input",
            fixture("counts_players.csv").to_str().unwrap(),
            "--out",
            tmp.path().to_str().unwrap(),
            "--format",
            format,
        ]);
        assert_eq!(exit_code(&run), 0);
    }
    let csv_stats = csv_rows(&read(tmp.path(), "stats.csv"));
    let json_stats: serde_json::Value =
        serde_json::from_str(&read(tmp.path(), "stats.json")).unwrap();
    for row in &csv_stats {
        let json_row = json_stats
            .as_array()
            .unwrap()
            .iter()
            .find(|v| v["player_id"] == row["player_id"].as_str())
            .unwrap();
        for col in ["x1", "x2", "f1", "f2", "k1", "k2"] {
            assert_eq!(
                num(row, col),
                json_row[col].as_f64().unwrap(),
                "{} {col}",
                row["player_id"]
            );
        }
    }
}

#[test]
fn counterfactual_matches_reference_and_formats_agree() {
    let tmp = tempfile::tempdir().unwrap();
    let counts = fixture("counts_players.csv");
    let prizes = fixture("usopen2025_prizes.json");
    let base = [
        "counterfactual",
        "--input",
        counts.to_str().unwrap(),
        "--prizes",
        prizes.to_str().unwrap(),
        "--out",
        tmp.path().to_str().unwrap(),
    ];
    let run = servelab(&base);
    assert_eq!(
        exit_code(&run),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&run.stderr)
    );
    let rows = csv_rows(&read(tmp.path(), "counterfactual.csv"));
    assert_eq!(rows.len(), 12);
    let federer = rows
        .iter()
        .find(|r| r["player_id"] == "roger_federer")
        .unwrap();
    assert!((num(federer, "dx2") - -6.01).abs() < 0.3);
    assert!((num(federer, "dpt") - 0.20).abs() < 0.05);
    assert!((num(federer, "dprize") - 13_510.0).abs() < 2_000.0);

    // the JSON emission carries the same numbers
    let mut json_args = base.to_vec();
    json_args.extend(["--format", "json"]);
    let run = servelab(&json_args);
    assert_eq!(exit_code(&run), 0);
    let parsed: serde_json::Value =
        serde_json::from_str(&read(tmp.path(), "counterfactual.json")).unwrap();
    let json_federer = parsed
        .as_array()
        .unwrap()
        .iter()
        .find(|v| v["player_id"] == "roger_federer")
        .unwrap();
    for col in [
        "delta", "dx1", "dx2", "dpt", "dgm", "dset", "dmat", "dprize",
    ] {
        let csv_value = num(federer, col);
        let json_value = json_federer[col].as_f64().unwrap();
        assert_eq!(csv_value, json_value, "{col} differs between formats");
    }
}

#[test]
fn counterfactual_zero_ladder_zeroes_prize_deltas() {
    let tmp = tempfile::tempdir().unwrap();
    let ladder = tmp.path().join("zero.json");
    fs::write(&ladder, r#"{"rounds": 7, "prizes": [0,0,0,0,0,0,0,0]}"#).unwrap();
    let run = servelab(&[
        "counterfactual",
        "--input",
        fixture("counts_players.csv").to_str().unwrap(),
        "--prizes",
        ladder.to_str().unwrap(),
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&run), 0);
    for row in csv_rows(&read(tmp.path(), "counterfactual.csv")) {
        assert_eq!(num(&row, "dprize"), 0.0);
    }
}

#[test]
fn robustness_grid_marks_unsolved_cells() {
    let tmp = tempfile::tempdir().unwrap();
    let run = servelab(&[
        "robustness",
        "--input",
        fixture("counts_players.csv").to_str().unwrap(),
        "--out",
        tmp.path().to_str().unwrap(),
        "--reps",
        "150",
        "--seed",
        "5",
    ]);
    assert_eq!(
        exit_code(&run),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&run.stderr)
    );

    // same seed, same bytes, bootstrapped diagnostic included
    let again = tempfile::tempdir().unwrap();
    let rerun = servelab(&[
        "robustness",
        "--input",
        fixture("counts_players.csv").to_str().unwrap(),
        "--out",
        again.path().to_str().unwrap(),
        "--reps",
        "150",
        "--seed",
        "5",
    ]);
    assert_eq!(exit_code(&rerun), 0);
    for name in [
        "softmax.csv",
        "t_grid_delta.csv",
        "t_grid_lambda.csv",
        "double_fault.csv",
        "gamma_diagnostic.csv",
    ] {
        assert_eq!(read(tmp.path(), name), read(again.path(), name), "{name}");
    }

    let grid = csv_rows(&read(tmp.path(), "t_grid_delta.csv"));
    assert_eq!(grid.len(), 12);
    let sampras = grid
        .iter()
        .find(|r| r["player_id"] == "pete_sampras")
        .unwrap();
    assert_eq!(sampras["t0.50"], "n.a.");
    assert!((num(sampras, "t1.00") - 0.42).abs() < 0.03);
    let opelka = grid
        .iter()
        .find(|r| r["player_id"] == "reilly_opelka")
        .unwrap();
    assert_eq!(opelka["t0.50"], "n.a.");

    let lambda_grid = csv_rows(&read(tmp.path(), "t_grid_lambda.csv"));
    let federer = lambda_grid
        .iter()
        .find(|r| r["player_id"] == "roger_federer")
        .unwrap();
    assert!((num(federer, "t1.50") - 3.17).abs() < 0.08);

    let softmax = csv_rows(&read(tmp.path(), "softmax.csv"));
    assert_eq!(softmax.len(), 12);
    let federer = softmax
        .iter()
        .find(|r| r["player_id"] == "roger_federer")
        .unwrap();
    assert!((num(federer, "lambda") - 2.46).abs() < 0.05);
    // every fixture player has a positive-curvature exponential fit; the
    // solver never needs the degenerate negative branch
    let becker = softmax
        .iter()
        .find(|r| r["player_id"] == "boris_becker")
        .unwrap();
    assert!(num(becker, "lambda") > 0.0);

    let df = csv_rows(&read(tmp.path(), "double_fault.csv"));
    assert_eq!(df.len(), 12);
    let federer = df
        .iter()
        .find(|r| r["player_id"] == "roger_federer")
        .unwrap();
    assert!((num(federer, "gamma") - 0.17).abs() < 0.01);

    let diag = csv_rows(&read(tmp.path(), "gamma_diagnostic.csv"));
    assert_eq!(diag.len(), 24, "12 players x 2 serves");
}

#[test]
fn bootstrap_is_deterministic_and_shaped() {
    let tmp = tempfile::tempdir().unwrap();
    let (out1, out2) = (tmp.path().join("a"), tmp.path().join("b"));
    for out in [&out1, &out2] {
        let run = servelab(&[
            "bootstrap",
            "--input",
            fixture("counts_players.csv").to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--reps",
            "120",
            "--seed",
            "42",
        ]);
        assert_eq!(
            exit_code(&run),
            0,
            "stderr: {}",
            String::from_utf8_lossy(&run.stderr)
        );
    }
    let a = read(&out1, "cis.csv");
    assert_eq!(a, read(&out2, "cis.csv"), "same seed, same bytes");

    let rows = csv_rows(&a);
    assert_eq!(rows.len(), 12 * 6, "six parameters per player");
    let federer_delta = rows
        .iter()
        .find(|r| r["player_id"] == "roger_federer" && r["param"] == "delta")
        .unwrap();
    let (lo, hi) = (num(federer_delta, "lo"), num(federer_delta, "hi"));
    assert!(lo <= 0.42 && hi >= 0.23, "delta CI [{lo}, {hi}]");
    let federer_lambda = rows
        .iter()
        .find(|r| r["player_id"] == "roger_federer" && r["param"] == "lambda")
        .unwrap();
    assert_eq!(
        federer_lambda["significant"], "true",
        "lambda CI excludes 1"
    );
}

#[test]
fn estimate_outputs_are_byte_identical_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let (out1, out2) = (tmp.path().join("a"), tmp.path().join("b"));
    for out in [&out1, &out2] {
        let run = servelab(&[
            "estimate",
            "--input",
            fixture("counts_players.csv").to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(exit_code(&run), 0);
    }
    for name in [
        "stats.csv",
        "fits.csv",
        "bounds.csv",
        "skill_curves.csv",
        "lambda_map.csv",
    ] {
        assert_eq!(
            read(&out1, name),
            read(&out2, name),
            "{name} must be reproducible"
        );
    }
}
