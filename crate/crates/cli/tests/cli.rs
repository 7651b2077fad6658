use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use socialnet_core::equilibrium::EquilibriumReport;
use socialnet_core::netgame::{induce_graph, parse_dot_edges};
use socialnet_core::{PurchaseProfile, TargetSet};
use tempfile::TempDir;

fn socialnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_socialnet")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        Workspace { dir: TempDir::new().unwrap() }
    }

    fn file(&self, name: &str, contents: &str) -> String {
        let path = self.dir.path().join(name);
        fs::write(&path, contents).unwrap();
        path.to_string_lossy().into_owned()
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn arg(&self, name: &str) -> String {
        self.path(name).to_string_lossy().into_owned()
    }
}

fn game(n: usize, alpha: &str, radius: usize) -> String {
    format!(r#"{{"n": {n}, "alpha": "{alpha}", "R": {radius}, "g": {{"kind": "linear"}}}}"#)
}

fn identity_csv(n: usize) -> String {
    (0..n).map(|i| (0..n).map(|j| if i == j { "1" } else { "0" }).collect::<Vec<_>>().join(",") + "\n").collect()
}

const MONARCHY_4: &str = "eps,0,0,0\n1,eps,0,0\n1,0,eps,0\n1,0,0,eps\n";

/// Best responses from the empty graph return to it after four moves.
const OSCILLATION_4: &str = "1,0,1,0\n1,1,-1,eps\neps,eps,1,eps\n-1,0,0,1\n";

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn enumerate_reports_the_isolated_equilibrium() {
    let w = Workspace::new();
    let g = w.file("game.json", &game(3, "3/2", 1));
    let m = w.file("id.csv", &identity_csv(3));
    let out = socialnet(&["enumerate", "--game", &g, "--matrix", &m, "--out", &w.arg("report.json")]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = fs::read_to_string(w.path("report.json")).unwrap();
    let report: EquilibriumReport = serde_json::from_str(&text).unwrap();
    assert_eq!(report.pne.len(), 1);
    assert_eq!(report.pne[0].profile, PurchaseProfile::empty(3));
    assert_eq!(read_json(&w.path("report.json"))["pne"][0]["cost"]["value"], "0");
    // Re-serializing the parsed report reproduces the file.
    assert_eq!(serde_json::to_string_pretty(&report).unwrap() + "\n", text);
}

#[test]
fn enumerate_exit_codes() {
    let w = Workspace::new();
    let g = w.file("game.json", &game(3, "3/2", 1));
    let bad = w.file("bad.csv", "1+eps+eps,0,0\n0,1,0\n0,0,1\n");
    let out = socialnet(&["enumerate", "--game", &g, "--matrix", &bad]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("1+eps+eps"));

    let g6 = w.file("game6.json", &game(6, "3/2", 2));
    let m6 = w.file("id6.csv", &identity_csv(6));
    let out = socialnet(&["enumerate", "--game", &g6, "--matrix", &m6, "--cap", "4"]);
    assert_eq!(code(&out), 2);

    let out = socialnet(&["enumerate", "--game", &g]);
    assert_eq!(code(&out), 1);
}

#[test]
fn monarchy_dynamics_build_the_star() {
    let w = Workspace::new();
    let g = w.file("game.json", &game(4, "3/2", 1));
    let m = w.file("monarchy.csv", MONARCHY_4);
    let out = socialnet(&[
        "dynamics",
        "--game",
        &g,
        "--matrix",
        &m,
        "--start",
        "empty",
        "--trace",
        &w.arg("trace.json"),
        "--dot",
        &w.arg("topo.dot"),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let dot = fs::read_to_string(w.path("topo.dot")).unwrap();
    for edge in ["0 -- 1", "0 -- 2", "0 -- 3"] {
        assert!(dot.contains(edge), "{dot}");
    }
    let trace = read_json(&w.path("trace.json"));
    assert_eq!(trace["outcome"]["kind"], "converged");
    let last: Vec<TargetSet> = serde_json::from_value(trace["outcome"]["profile"].clone()).unwrap();
    let graph = induce_graph(&PurchaseProfile::new(last).unwrap());
    let edges: Vec<(usize, usize)> = parse_dot_edges(&dot).unwrap().into_iter().map(|e| (e.a, e.b)).collect();
    assert_eq!(edges, graph.edges());
}

#[test]
fn selfish_players_stay_isolated_when_links_are_expensive() {
    let w = Workspace::new();
    let g = w.file("game.json", &game(4, "3/2", 1));
    let m = w.file("id.csv", &identity_csv(4));
    let out = socialnet(&["dynamics", "--game", &g, "--matrix", &m, "--trace", &w.arg("t.json")]);
    assert_eq!(code(&out), 0);
    assert_eq!(read_json(&w.path("t.json"))["steps"].as_array().unwrap().len(), 0);
}

#[test]
fn radius_three_oscillation_is_reported_as_a_cycle() {
    let w = Workspace::new();
    let g = w.file("game.json", &game(4, "2", 3));
    let m = w.file("osc.csv", OSCILLATION_4);
    let out = socialnet(&["dynamics", "--game", &g, "--matrix", &m, "--max-steps", "5", "--trace", &w.arg("t.json")]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    let trace = read_json(&w.path("t.json"));
    assert_eq!(trace["outcome"]["kind"], "cycle");
    assert_eq!(trace["outcome"]["first_seen"], 0);
    assert_eq!(trace["outcome"]["repeat_at"], 4);

    let out = socialnet(&["dynamics", "--game", &g, "--matrix", &m, "--max-steps", "2", "--trace", &w.arg("t2.json")]);
    assert_eq!(code(&out), 4);
    assert_eq!(read_json(&w.path("t2.json"))["outcome"]["kind"], "cutoff");
}

#[test]
fn dynamics_rejects_a_schedule_that_skips_a_player() {
    let w = Workspace::new();
    let g = w.file("game.json", &game(3, "3/2", 1));
    let m = w.file("id.csv", &identity_csv(3));
    let out = socialnet(&["dynamics", "--game", &g, "--matrix", &m, "--schedule", "0,2"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("player 1"));
    let out =
        socialnet(&["dynamics", "--game", &g, "--matrix", &m, "--schedule", "2,1,0", "--trace", &w.arg("t.json")]);
    assert_eq!(code(&out), 0);
}

#[test]
fn dynamics_start_from_a_profile_file() {
    let w = Workspace::new();
    let g = w.file("game.json", &game(3, "3/2", 1));
    let m = w.file("id.csv", &identity_csv(3));
    let start = w.file("start.json", r#"{"n": 3, "strategies": [[1, 2], [], []]}"#);
    let out = socialnet(&["dynamics", "--game", &g, "--matrix", &m, "--start", &start, "--trace", &w.arg("t.json")]);
    assert_eq!(code(&out), 0);
    let trace = read_json(&w.path("t.json"));
    assert_eq!(trace["outcome"]["profile"], serde_json::json!([[], [], []]));
}

#[test]
fn anarchy_monarchy_rows_match_closed_forms() {
    let w = Workspace::new();
    let out = socialnet(&[
        "experiment",
        "anarchy-monarchy",
        "--n",
        "4",
        "--alpha",
        "3/2,3",
        "--csv",
        &w.arg("am.csv"),
        "--out",
        &w.arg("am.json"),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let mut reader = csv::Reader::from_path(w.path("am.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(&rows[0][5], "-3/2");
    assert_eq!(&rows[0][11], "monarchy");
    assert_eq!(&rows[1][5], "3");
    assert_eq!(&rows[1][11], "anarchy");
    assert!(rows.iter().all(|r| &r[12] == "pass"));
}

#[test]
fn cheap_links_break_the_monarchy_closed_form() {
    // With ε self-weights leaves link to each other below α = 1, so the
    // monarchy row at α = 1/2 misses (α−2)(n−1) and the run exits 1.
    let w = Workspace::new();
    let out = socialnet(&[
        "experiment",
        "anarchy-monarchy",
        "--n",
        "4",
        "--alpha",
        "1/2,3/2,3",
        "--csv",
        &w.arg("am.csv"),
        "--out",
        &w.arg("am.json"),
    ]);
    assert_eq!(code(&out), 1);
    let mut reader = csv::Reader::from_path(w.path("am.csv")).unwrap();
    let verdicts: Vec<String> = reader.records().map(|r| r.unwrap()[12].to_string()).collect();
    assert_eq!(verdicts, ["fail", "pass", "pass"]);
}

#[test]
fn windfall_and_ill_will_experiments() {
    let w = Workspace::new();
    let out = socialnet(&["experiment", "windfall", "--n", "3", "--alpha", "3/2"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("non-empty"));

    let out = socialnet(&[
        "experiment",
        "windfall",
        "--n",
        "3",
        "--alpha",
        "3/2",
        "--flip",
        "0,1",
        "--out",
        &w.arg("w.json"),
        "--csv",
        &w.arg("w.csv"),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = read_json(&w.path("w.json"));
    assert_eq!(report["after"]["constructed_cost"]["value"], "-1/2");
    let text = fs::read_to_string(w.path("w.json")).unwrap();
    let parsed: socialnet_core::analysis::WindfallReport = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_string_pretty(&parsed).unwrap() + "\n", text);

    let out = socialnet(&[
        "experiment",
        "ill-will",
        "--n",
        "3",
        "--alpha",
        "1/2",
        "--flip",
        "0,1",
        "--flip",
        "1,0",
        "--out",
        &w.arg("i.json"),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = read_json(&w.path("i.json"));
    assert_eq!(report["before"]["constructed_cost"]["value"], "-9/2");
    assert_eq!(report["after"]["constructed_cost"]["value"], "-3");
}

#[test]
fn verify_lemmas_on_a_passing_grid() {
    let w = Workspace::new();
    let out = socialnet(&[
        "experiment",
        "verify-lemmas",
        "--n",
        "3",
        "--alpha",
        "1,3/2,3",
        "--csv",
        &w.arg("v.csv"),
        "--out",
        &w.arg("v.json"),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let mut reader = csv::Reader::from_path(w.path("v.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| &r[8] == "pass"));
    let verdicts = read_json(&w.path("v.json"));
    assert_eq!(verdicts.as_array().unwrap().len(), rows.len());
}

#[test]
fn verify_lemmas_rejects_unknown_checks() {
    let out = socialnet(&["experiment", "verify-lemmas", "--lemma", "lemma-99"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn classify_names_the_monarch() {
    let w = Workspace::new();
    let m = w.file("m.csv", MONARCHY_4);
    let out = socialnet(&["classify", "--matrix", &m]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["n"], 4);
    assert_eq!(v["archetypes"], serde_json::json!([{"kind": "monarchy", "center": 0}]));
}

#[test]
fn optimum_with_two_hop_reach_is_a_star() {
    let w = Workspace::new();
    let g = w.file("game.json", &game(4, "3/2", 2));
    let out = socialnet(&["optimum", "--game", &g, "--dot", &w.arg("o.dot")]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["cost"]["value"], "-15/2");
    assert_eq!(v["count"], 4);
    assert_eq!(parse_dot_edges(&fs::read_to_string(w.path("o.dot")).unwrap()).unwrap().len(), 3);
}

#[test]
fn identical_runs_give_identical_bytes() {
    let w = Workspace::new();
    let g = w.file("game.json", &game(4, "3/2", 1));
    let m = w.file("m.csv", MONARCHY_4);
    for run in ["a", "b"] {
        let out = socialnet(&[
            "--seed",
            "7",
            "enumerate",
            "--game",
            &g,
            "--matrix",
            &m,
            "--out",
            &w.arg(&format!("{run}.json")),
            "--dot",
            &w.arg(&format!("{run}.dot")),
        ]);
        assert_eq!(code(&out), 0);
        let out = socialnet(&[
            "experiment",
            "verify-lemmas",
            "--n",
            "3",
            "--alpha",
            "3/2",
            "--csv",
            &w.arg(&format!("{run}.csv")),
        ]);
        assert_eq!(code(&out), 0);
    }
    for ext in ["json", "dot", "csv"] {
        assert_eq!(fs::read(w.path(&format!("a.{ext}"))).unwrap(), fs::read(w.path(&format!("b.{ext}"))).unwrap());
    }
}
