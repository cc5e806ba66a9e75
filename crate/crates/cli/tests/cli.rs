//! End-to-end checks of the binary: exit codes, JSON output, and the
//! witness round trip.

use std::path::Path;
use std::process::{Command, Output};

fn teamsem(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_teamsem"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).trim().to_string()
}

fn write_example_model(dir: &Path) {
    std::fs::write(
        dir.join("ex.json"),
        r#"{
            "props": ["p"],
            "worlds": ["w", "v"],
            "edges": [],
            "valuation": {"p": ["v"]},
            "teams": {"T": ["w", "v"]}
        }"#,
    )
    .unwrap();
}

#[test]
fn check_verdicts_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    write_example_model(dir.path());
    let sat = teamsem(
        dir.path(),
        &["check", "--model", "ex.json", "--team", "T", "--formula", "[p <= ~p]"],
    );
    assert_eq!(sat.status.code(), Some(0));
    assert_eq!(stdout(&sat), "SAT");

    let inline = teamsem(
        dir.path(),
        &["check", "--model", "ex.json", "--team-inline", "w,v", "--formula", "[p <= ~p]"],
    );
    assert_eq!(inline.status.code(), Some(0));
    assert_eq!(stdout(&inline), "SAT");

    let unsat = teamsem(
        dir.path(),
        &["check", "--model", "ex.json", "--team-inline", "v", "--formula", "[p <= ~p]"],
    );
    assert_eq!(unsat.status.code(), Some(1));
    assert_eq!(stdout(&unsat), "UNSAT");

    let usage = teamsem(dir.path(), &["check", "--model", "ex.json"]);
    assert_eq!(usage.status.code(), Some(2));

    let bad_formula = teamsem(
        dir.path(),
        &["check", "--model", "ex.json", "--team", "T", "--formula", "[[p <= q] <= r]"],
    );
    assert_eq!(bad_formula.status.code(), Some(2));

    let budget = teamsem(
        dir.path(),
        &[
            "check", "--model", "ex.json", "--team", "T", "--formula", "nab p | nab ~p",
            "--mode", "reference", "--max-steps", "3",
        ],
    );
    assert_eq!(budget.status.code(), Some(3));

    let strict = teamsem(
        dir.path(),
        &["check", "--model", "ex.json", "--team", "T", "--formula", "p", "--semantics", "strict"],
    );
    assert_eq!(strict.status.code(), Some(2));
}

#[test]
fn witness_then_check_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let wrote = teamsem(dir.path(), &["witness", "-n", "2", "--out", "m.json"]);
    assert_eq!(wrote.status.code(), Some(0));
    let check = teamsem(
        dir.path(),
        &["check", "--model", "m.json", "--team", "T", "--formula", "[p1,p2 <= q1,q2]"],
    );
    assert_eq!(check.status.code(), Some(0), "witness team satisfies its atom");
    // Any single removal falsifies the atom.
    let smaller = teamsem(
        dir.path(),
        &[
            "check", "--model", "m.json", "--team-inline", "w0001,w0110,w1011",
            "--formula", "[p1,p2 <= q1,q2]",
        ],
    );
    assert_eq!(smaller.status.code(), Some(1));
}

#[test]
fn json_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    write_example_model(dir.path());
    let args = [
        "--json", "check", "--model", "ex.json", "--team", "T", "--formula", "[p <= ~p]",
    ];
    let first = teamsem(dir.path(), &args);
    let second = teamsem(dir.path(), &args);
    assert_eq!(first.stdout, second.stdout);
    let value: serde_json::Value = serde_json::from_str(&stdout(&first)).unwrap();
    assert_eq!(value["verdict"], "sat");
    assert_eq!(value["team"], serde_json::json!(["w", "v"]));
}

#[test]
fn bisim_and_teambisim() {
    let dir = tempfile::tempdir().unwrap();
    write_example_model(dir.path());
    let not_bisim = teamsem(
        dir.path(),
        &["bisim", "--left", "ex.json", "--left-world", "w", "--right-world", "v", "-k", "0"],
    );
    assert_eq!(not_bisim.status.code(), Some(1));
    let reflexive = teamsem(
        dir.path(),
        &["bisim", "--left", "ex.json", "--left-world", "w", "--right-world", "w", "-k", "3"],
    );
    assert_eq!(reflexive.status.code(), Some(0));
    let teams = teamsem(
        dir.path(),
        &[
            "teambisim", "--left", "ex.json", "--left-team", "T",
            "--right-team-inline", "v", "-k", "0",
        ],
    );
    assert_eq!(teams.status.code(), Some(1));
}

#[test]
fn closure_reports_counterexample() {
    let dir = tempfile::tempdir().unwrap();
    let fail = teamsem(
        dir.path(),
        &[
            "--json", "closure", "--property", "downward", "--formula", "[p <= ~p]",
            "--max-worlds", "2",
        ],
    );
    assert_eq!(fail.status.code(), Some(1));
    let value: serde_json::Value = serde_json::from_str(&stdout(&fail)).unwrap();
    assert_eq!(value["verdict"], "fail");
    assert_eq!(value["counterexample"]["kind"], "downward");

    let pass = teamsem(
        dir.path(),
        &["closure", "--property", "union", "--formula", "nab p", "--max-worlds", "2"],
    );
    assert_eq!(pass.status.code(), Some(0));
}

#[test]
fn game_strategy_and_audit() {
    let dir = tempfile::tempdir().unwrap();
    write_example_model(dir.path());
    let win = teamsem(
        dir.path(),
        &[
            "--json", "game", "--model", "ex.json", "--team", "T", "--formula", "p | ~p",
        ],
    );
    assert_eq!(win.status.code(), Some(0));
    let value: serde_json::Value = serde_json::from_str(&stdout(&win)).unwrap();
    assert_eq!(value["verdict"], "winning");
    assert_eq!(value["strategy"][""], serde_json::json!(["w", "v"]));

    let lose = teamsem(
        dir.path(),
        &["game", "--model", "ex.json", "--team-inline", "w", "--formula", "nab p"],
    );
    assert_eq!(lose.status.code(), Some(1));

    let audit = teamsem(
        dir.path(),
        &["--json", "game", "--audit", "1", "--formula", "nab top"],
    );
    assert_eq!(audit.status.code(), Some(0));
    let value: serde_json::Value = serde_json::from_str(&stdout(&audit)).unwrap();
    assert_eq!(value["audit"], "certificate");

    // Unsupported witness arity surfaces as the budget exit code.
    let too_big = teamsem(dir.path(), &["witness", "-n", "30", "--out", "m.json"]);
    assert_eq!(too_big.status.code(), Some(3));
}

#[test]
fn synthesize_from_manifest() {
    let dir = tempfile::tempdir().unwrap();
    write_example_model(dir.path());
    // The satisfying teams of [p <= ~p] over this model: {} and {w,v}.
    std::fs::write(
        dir.path().join("manifest.json"),
        r#"{
            "k": 0,
            "dialect": "minc",
            "pairs": [
                {"model": "ex.json", "team": "T"}
            ]
        }"#,
    )
    .unwrap();
    let synth = teamsem(
        dir.path(),
        &["--json", "synthesize", "--manifest", "manifest.json"],
    );
    assert_eq!(synth.status.code(), Some(0));
    let value: serde_json::Value = serde_json::from_str(&stdout(&synth)).unwrap();
    let formula = value["formula"].as_str().unwrap();
    // The description must accept T and reject the singletons.
    for (team, expected) in [("w,v", 0), ("w", 1), ("v", 1)] {
        let check = teamsem(
            dir.path(),
            &["check", "--model", "ex.json", "--team-inline", team, "--formula", formula],
        );
        assert_eq!(check.status.code(), Some(expected), "team {team}");
    }
}

#[test]
fn props_suite_runs() {
    let dir = tempfile::tempdir().unwrap();
    let run = teamsem(
        dir.path(),
        &[
            "--json", "props", "--dialect", "mlnab", "--count", "20", "--max-worlds", "2",
            "--seed", "7",
        ],
    );
    assert_eq!(run.status.code(), Some(0));
    let value: serde_json::Value = serde_json::from_str(&stdout(&run)).unwrap();
    assert_eq!(value["verdict"], "pass");
}

#[test]
fn rewrite_directions() {
    let dir = tempfile::tempdir().unwrap();
    let out = teamsem(
        dir.path(),
        &["rewrite", "--formula", "nab p", "--direction", "nabla-to-nedis"],
    );
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "p |! top");
    let out = teamsem(
        dir.path(),
        &["rewrite", "--formula", "p |! q", "--direction", "nedis-to-nabla"],
    );
    assert_eq!(stdout(&out), "(p | q) & (nab p & nab q)");
    let out = teamsem(
        dir.path(),
        &["rewrite", "--formula", "[p <= q]", "--direction", "nabla-to-nedis"],
    );
    assert_eq!(out.status.code(), Some(2));
}
