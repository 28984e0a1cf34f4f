use std::path::PathBuf;
use std::process::{Command, Output};

fn stackgame(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stackgame"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn solve_writes_the_firm_table() {
    let o = stackgame(&["solve", "--periods", "1,2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("period,firm_index,quantity,price,profit"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0][..2], ["1", "1"]);
    assert_eq!(rows[2][..2], ["2", "3"]);
    // 17 significant digits
    assert_eq!(rows[0][2], "5.0000000000000000e-1");
    let q: f64 = rows[1][2].parse().unwrap();
    assert!((q - 1.0 / 6.0).abs() <= 1e-16);
    let price: f64 = rows[0][3].parse().unwrap();
    assert!((price - 1.0 / 6.0).abs() <= 1e-15);
}

#[test]
fn csv_round_trips_every_float() {
    let o = stackgame(&["solve", "--family", "sine", "--eps", "0.023", "--periods", "1,3"]);
    let json = stackgame(&[
        "solve", "--family", "sine", "--eps", "0.023", "--periods", "1,3", "--format", "json",
    ]);
    let value: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    for (row, firm) in csv_rows(&stdout(&o)).iter().zip(value["firms"].as_array().unwrap()) {
        let q: f64 = row[2].parse().unwrap();
        assert_eq!(q, firm["quantity"].as_f64().unwrap());
    }
}

#[test]
fn output_is_byte_identical_across_runs_and_thread_counts() {
    let args = ["limits", "--family", "sine", "--eps", "-0.023", "--periods", "1,1", "--grid", "1,9,99,999,3,7"];
    let first = stackgame(&args);
    assert_eq!(first.status.code(), Some(0), "{}", stderr(&first));
    for threads in ["1", "3"] {
        let again = Command::new(env!("CARGO_BIN_EXE_stackgame"))
            .args(args)
            .env("STACKGAME_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(first.stdout, again.stdout);
    }
    let n_t: Vec<String> = csv_rows(&stdout(&first)).iter().map(|r| r[0].clone()).collect();
    assert_eq!(n_t, ["1", "9", "99", "999", "3", "7"]);
}

#[test]
fn model_file_and_inline_flags_agree() {
    let path = scratch("sine.json");
    std::fs::write(&path, r#"{"family":"sine","a":1,"xbar":1,"eps":-0.023,"k":5}"#).unwrap();
    let from_file = stackgame(&["solve", "--model", path.to_str().unwrap(), "--periods", "1,2"]);
    let inline = stackgame(&["solve", "--family", "sine", "--eps", "-0.023", "--k", "5", "--periods", "1,2"]);
    assert_eq!(from_file.status.code(), Some(0));
    assert_eq!(from_file.stdout, inline.stdout);
}

#[test]
fn independence_verdicts() {
    let o = stackgame(&["independence", "--periods", "1", "--suffix", "", "--suffix", "1", "--suffix", "2,1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("verdict=SATISFIED"));
    let o = stackgame(&[
        "independence", "--family", "sine", "--eps", "0.023", "--periods", "1", "--suffix", "",
        "--suffix", "1", "--suffix", "2", "--tol", "1e-3", "--format", "json",
    ]);
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["verdict"], "VIOLATED");
    assert!(report["max_deviation"].as_f64().unwrap() > 0.1);
    assert_eq!(report["quantities"].as_array().unwrap().len(), 3);
}

#[test]
fn infer_recovers_the_competitive_quantity() {
    let o = stackgame(&["infer", "--x", "0.5", "--periods", "1"]);
    assert_eq!(stdout(&o), "x_observed,xbar_c\n5.0000000000000000e-1,1\n");
    let o = stackgame(&["infer", "--x", "0", "--periods", "1"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn figure_with_plot_and_demand_samples() {
    let svg = scratch("fig2.svg");
    let demand = scratch("fig2_demand.csv");
    let o = stackgame(&[
        "figure", "fig2", "--plot", svg.to_str().unwrap(), "--demand-out", demand.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("n,leader_pos,total_pos,leader_neg,total_neg\n"));
    assert_eq!(csv_rows(&stdout(&o)).len(), 20);
    let svg = std::fs::read_to_string(svg).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    let demand = std::fs::read_to_string(demand).unwrap();
    assert!(demand.starts_with("x,price_pos,price_neg\n"));
    let o = stackgame(&["figure", "fig1", "--demand-out", scratch("none.csv").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn oracle_matches_the_closed_form_within_a_step() {
    let o = stackgame(&["oracle", "--periods", "1,1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).contains("converged=true"));
    let rows = csv_rows(&stdout(&o));
    let leader: f64 = rows[0][2].parse().unwrap();
    let follower: f64 = rows[1][2].parse().unwrap();
    assert!((leader - 0.5).abs() <= 2.0 / 2000.0 + 1e-9);
    assert!((follower - 0.25).abs() <= 2.0 / 2000.0 + 1e-9);
}

#[test]
fn exit_codes() {
    // several interior roots and two leaders
    let o = stackgame(&["solve", "--family", "sine", "--eps", "0.00025", "--k", "100", "--periods", "2,2"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));

    let path = scratch("corner.json");
    std::fs::write(
        &path,
        r#"{"family":"heterogeneous","firms":[{"a":1,"xbar_c":1},{"a":1,"xbar_c":0.3}]}"#,
    )
    .unwrap();
    let o = stackgame(&["solve", "--model", path.to_str().unwrap(), "--periods", "1,1"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));

    for args in [
        &["solve", "--periods", "0,1"][..],
        &["solve", "--periods", "1", "--family", "sine", "--eps", "0.5", "--k", "5"],
        &["solve", "--periods", "1", "--model", "/nonexistent/model.json"],
        &["solve", "--unknown-flag"],
        &["figure", "fig9"],
        &["limits", "--periods", "1,1", "--t", "5", "--grid", "1"],
    ] {
        let o = stackgame(args);
        assert_eq!(o.status.code(), Some(4), "{args:?}: {}", stderr(&o));
        assert!(o.stdout.is_empty());
    }

    let o = Command::new(env!("CARGO_BIN_EXE_stackgame"))
        .args(["solve", "--periods", "1"])
        .env("STACKGAME_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(stackgame(&["--help"]).status.code(), Some(0));
}

#[test]
fn quadratic_inline_model() {
    let o = stackgame(&[
        "solve", "--family", "quadratic", "--alpha1", "1", "--alpha2", "2", "--beta1", "0",
        "--beta2", "1", "--periods", "1,3", "--format", "json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let leader = v["firms"][0]["quantity"].as_f64().unwrap();
    // alpha2 = 2 beta2: leader at alpha1 / (alpha2 + beta2 n1 - beta2)
    assert!((leader - 0.5).abs() <= 1e-12);
    let o = stackgame(&["solve", "--family", "quadratic", "--alpha1", "1", "--periods", "1"]);
    assert_eq!(o.status.code(), Some(4));
}
