//! End-to-end tests of the `zecap` binary: spec'd command lines, exit
//! codes, and report determinism.

use std::path::Path;
use std::process::{Command, Output};

fn zecap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zecap"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn check_causal_table1_says_no() {
    let out = zecap(&["check", "gp-table1", "--mode", "causal"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("eq:causPositive: NO"));
}

#[test]
fn check_acausal_stuck_at_one_names_the_pair() {
    let out = zecap(&["check", "stuck-at-one", "--mode", "acausal"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("eq:positive: NO (s=1, s'=1)"));
}

#[test]
fn check_missing_file_exits_two() {
    let out = zecap(&["check", "/nonexistent/channel.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn capacity_cc_states_closed_form() {
    let out = zecap(&[
        "capacity",
        "stuck-at-one",
        "--formula",
        "cc-states",
        "--lambda-budget",
        "0.25",
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("value:     0.750000 bits"));
}

#[test]
fn capacity_deterministic_table1() {
    let out = zecap(&["capacity", "gp-table1", "--formula", "deterministic"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("value:     1.000000 bits"));
}

#[test]
fn capacity_acausal_mod3_warns_about_rhs() {
    let out = zecap(&["capacity", "mod3", "--formula", "acausal"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("positive:  false"));
    assert!(text.contains("capacity:  0.000000 bits"));
    assert!(text.contains("warning"));
}

#[test]
fn codec_plan_tri_parameters() {
    let out = zecap(&["codec", "plan", "tri-2x2x3"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("n1=8 n2=6 nbit=14"));
}

#[test]
fn codec_plan_stuck_at_one_reports_failed_condition() {
    let out = zecap(&["codec", "plan", "stuck-at-one"]);
    assert!(out.status.success(), "verdicts are data, not exit codes");
    assert!(stdout(&out).contains("fails eq:positive"));
}

#[test]
fn codec_verify_tri_exhaustive_is_clean() {
    let out = zecap(&["codec", "verify", "tri-2x2x3", "--exhaustive"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("paths:        32768"));
    assert!(text.contains("violations:   0"));
}

#[test]
fn codec_run_roundtrips_the_bit() {
    for bit in ["0", "1"] {
        let out = zecap(&["codec", "run", "tri-2x2x3", "--bit", bit, "--seed", "5"]);
        assert!(out.status.success());
        assert!(stdout(&out).contains(&format!("decoded: {bit}")));
    }
}

#[test]
fn oracle_verdicts_match_the_ground_truth() {
    let cases = [
        (vec!["oracle", "gp-table1", "--n", "1"], "infeasible"),
        (vec!["oracle", "identity-2", "--n", "1"], "feasible"),
        (vec!["oracle", "stuck-at-one", "--n", "2"], "infeasible"),
    ];
    for (args, want) in cases {
        let out = zecap(&args);
        assert!(out.status.success());
        assert!(
            stdout(&out).contains(&format!("verdict: {want}")),
            "{args:?}: {}",
            stdout(&out)
        );
    }
}

#[test]
fn bins_uniform_type_theta_four() {
    let dir = std::env::temp_dir().join("zecap-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let type_path = dir.join("uniform-k4.json");
    std::fs::write(
        &type_path,
        r#"{ "na": 2, "nb": 2, "counts": [[1, 1], [1, 1]] }"#,
    )
    .unwrap();
    // Theta = ceil(2^{4 (1 - 0.5)}) = 4; covering may legitimately fail at
    // k = 4, but the tool must exit 0 either way.
    let out = zecap(&[
        "bins",
        "--k",
        "4",
        "--type-file",
        type_path.to_str().unwrap(),
        "--eps",
        "0.5",
        "--retries",
        "5",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("theta: 4") || text.contains("no covering family found"));

    // eps large enough for a single bin: zero retries.
    let out = zecap(&[
        "bins",
        "--type-file",
        type_path.to_str().unwrap(),
        "--eps",
        "2.0",
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("theta: 1"));

    let bad = dir.join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let out = zecap(&["bins", "--type-file", bad.to_str().unwrap(), "--eps", "0.5"]);
    assert_eq!(out.status.code(), Some(2));

    // Mismatched --k is a usage error.
    let out = zecap(&[
        "bins",
        "--k",
        "6",
        "--type-file",
        type_path.to_str().unwrap(),
        "--eps",
        "0.5",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn json_reports_are_deterministic() {
    let dir = std::env::temp_dir().join("zecap-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let a = dir.join("report-a.json");
    let b = dir.join("report-b.json");
    for path in [&a, &b] {
        let out = zecap(&[
            "capacity",
            "gp-table2",
            "--formula",
            "causal",
            "--seed",
            "9",
            "--json",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    let parse = |p: &Path| -> serde_json::Value {
        serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
    };
    let ra = parse(&a);
    let rb = parse(&b);
    assert_eq!(ra["payload"], rb["payload"], "payloads must be byte-stable");
    assert_eq!(ra["channel_fingerprint"], rb["channel_fingerprint"]);
    assert_eq!(ra["seed"], rb["seed"]);
}

#[test]
fn channel_files_and_state_restriction_work() {
    let dir = std::env::temp_dir().join("zecap-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("identity.json");
    std::fs::write(
        &path,
        r#"{ "name": "id", "nx": 2, "ns": 1, "ny": 2,
            "support": [[0,0,0],[1,0,1]] }"#,
    )
    .unwrap();
    let out = zecap(&["capacity", path.to_str().unwrap(), "--formula", "shannon"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("value:     1.000000 bits"));

    // Restriction of the second builtin to its {1,2,4} states flips the
    // trap-state verdict.
    let out = zecap(&[
        "check",
        "gp-table2",
        "--keep-states",
        "0,1,3",
        "--mode",
        "nofb",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("gp-table2|s{1,2,4}"));
    assert!(text.contains("eq:suffCondCapWithoutFBZero: NO"));
    assert!(text.contains("bl:suffCondCapWithoutFBPositive: NO"));
}

#[test]
fn oracle_dumps_a_strategy_tree() {
    let dir = std::env::temp_dir().join("zecap-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("strategy.json");
    let out = zecap(&[
        "oracle",
        "tri-2x2x3",
        "--n",
        "1",
        "--dump-strategy",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let tree: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(tree["inputs"].is_array());
}
