use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_ran-slice-opt"));
    // keep the caller's environment from leaking into flag defaults
    for (k, _) in std::env::vars() {
        if k.starts_with("RAN_SLICE_OPT_") {
            c.env_remove(k);
        }
    }
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn ran-slice-opt")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read_csv(path: &Path) -> Vec<csv::StringRecord> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let h = r.headers().unwrap().clone();
    let mut rows = vec![h];
    rows.extend(r.records().map(|r| r.unwrap()));
    rows
}

fn column(rows: &[csv::StringRecord], name: &str) -> usize {
    rows[0].iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

fn out_dir(tmp: &TempDir, name: &str) -> String {
    tmp.path().join(name).display().to_string()
}

#[test]
fn run_both_solvers_writes_outputs_and_heuristic_is_not_cheaper() {
    let tmp = TempDir::new().unwrap();
    let dir = out_dir(&tmp, "o");
    let o = run(&["run", "--slices", "8", "--seed", "3", "--output-dir", &dir]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in [
        "results.csv",
        "metrics.csv",
        "aggregate.csv",
        "scenario.json",
        "placement.json",
        "fig4_server_utilization.csv",
        "fig5_link_utilization.csv",
        "fig6_delay_exact.csv",
        "fig7_delay_heuristic.csv",
        "fig8_tier_occupancy.csv",
        "fig4_server_utilization.svg",
    ] {
        assert!(Path::new(&dir).join(f).exists(), "missing {f}");
    }
    let rows = read_csv(&Path::new(&dir).join("results.csv"));
    let (s, obj, st) = (column(&rows, "solver"), column(&rows, "objective"), column(&rows, "status"));
    let value = |solver: &str| -> f64 {
        rows[1..].iter().find(|r| &r[s] == solver).unwrap()[obj].parse().unwrap()
    };
    assert!(rows[1..].iter().any(|r| &r[s] == "exact" && &r[st] == "optimal"));
    assert!(value("heuristic") >= value("exact") - 1e-9);

    let metrics = read_csv(&Path::new(&dir).join("metrics.csv"));
    for c in [
        "slice_count",
        "solver",
        "replication",
        "avg_server_util",
        "avg_link_util",
        "delay_urllc_s",
        "delay_embb_s",
        "delay_mmtc_s",
        "sla_violations",
        "urllc_fully_at_cs",
        "objective",
        "runtime_s",
        "profile",
        "alpha",
        "seed",
    ] {
        column(&metrics, c);
    }
    assert_eq!(metrics.len(), 3);
}

#[test]
fn zero_slices_is_a_trivial_success() {
    let tmp = TempDir::new().unwrap();
    let dir = out_dir(&tmp, "o");
    let o = run(&["run", "--slices", "0", "--output-dir", &dir]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_csv(&Path::new(&dir).join("results.csv"));
    let obj = column(&rows, "objective");
    for r in &rows[1..] {
        assert_eq!(r[obj].parse::<f64>().unwrap(), 0.0);
    }
}

fn generated_scenario(tmp: &TempDir) -> (String, Value) {
    let dir = out_dir(tmp, "gen");
    let o = run(&["run", "--slices", "6", "--seed", "2", "--solver", "heuristic", "--output-dir", &dir]);
    assert_eq!(code(&o), 0);
    let path = Path::new(&dir).join("scenario.json");
    let v: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    (path.display().to_string(), v)
}

#[test]
fn infeasible_scenario_exits_with_two() {
    let tmp = TempDir::new().unwrap();
    let (_, mut sc) = generated_scenario(&tmp);
    sc["slices"][0]["demands"][0]["rate_mbps"] = Value::from(1e12);
    let path = tmp.path().join("bad.json");
    fs::write(&path, sc.to_string()).unwrap();
    let dir = out_dir(&tmp, "o");
    let o = run(&["run", "--scenario", path.to_str().unwrap(), "--solver", "exact", "--output-dir", &dir]);
    assert_eq!(code(&o), 2, "{}{}", stdout(&o), String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("status=infeasible"));
}

#[test]
fn sweep_writes_one_run_per_replication_and_one_aggregate_per_point() {
    let tmp = TempDir::new().unwrap();
    let dir = out_dir(&tmp, "o");
    let o = run(&["sweep", "--counts", "5,10", "--replications", "2", "--output-dir", &dir]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let runs = read_csv(&Path::new(&dir).join("results.csv"));
    let s = column(&runs, "solver");
    for solver in ["exact", "heuristic"] {
        assert_eq!(runs[1..].iter().filter(|r| &r[s] == solver).count(), 4);
    }
    let agg = read_csv(&Path::new(&dir).join("aggregate.csv"));
    let (m, s, n) = (column(&agg, "metric"), column(&agg, "solver"), column(&agg, "n"));
    let server: Vec<_> = agg[1..].iter().filter(|r| &r[m] == "avg_server_util").collect();
    assert_eq!(server.len(), 4);
    assert_eq!(server.iter().filter(|r| &r[s] == "exact").count(), 2);
    assert!(server.iter().all(|r| &r[n] == "2"));
    let fig = read_csv(&Path::new(&dir).join("fig6_delay_exact.csv"));
    let series = column(&fig, "series");
    assert!(fig[1..].iter().any(|r| &r[series] == "budget_URLLC"));
}

#[test]
fn deterministic_output_is_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let a = out_dir(&tmp, "a");
    let b = out_dir(&tmp, "b");
    for dir in [&a, &b] {
        let o = run(&["sweep", "--counts", "4,8", "--replications", "2", "--deterministic-output", "--output-dir", dir]);
        assert_eq!(code(&o), 0);
    }
    for f in ["results.csv", "metrics.csv", "aggregate.csv", "fig8_tier_occupancy.csv", "fig4_server_utilization.svg"] {
        assert_eq!(
            fs::read(Path::new(&a).join(f)).unwrap(),
            fs::read(Path::new(&b).join(f)).unwrap(),
            "{f} differs"
        );
    }
}

#[test]
fn validate_accepts_solver_output_and_reports_corruption() {
    let tmp = TempDir::new().unwrap();
    let dir = out_dir(&tmp, "o");
    let o = run(&["run", "--slices", "6", "--seed", "4", "--solver", "exact", "--output-dir", &dir]);
    assert_eq!(code(&o), 0);
    let sc = Path::new(&dir).join("scenario.json");
    let pl = Path::new(&dir).join("placement.json");
    let o = run(&["validate", "--placement", pl.to_str().unwrap(), "--scenario", sc.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));

    // Move the first CU to a cell-site server its path does not visit.
    let mut doc: Value = serde_json::from_str(&fs::read_to_string(&pl).unwrap()).unwrap();
    let path = doc["slices"][0]["demands"][0]["path"].as_str().unwrap().to_string();
    let scenario: Value = serde_json::from_str(&fs::read_to_string(&sc).unwrap()).unwrap();
    let off = scenario["topology"]["sites"]
        .as_array()
        .unwrap()
        .iter()
        .find(|s| !path.split('>').any(|p| p == s["id"].as_str().unwrap()))
        .unwrap();
    doc["slices"][0]["servers"]["CU"] = off["servers"][0]["id"].clone();
    let bad = tmp.path().join("bad.json");
    fs::write(&bad, doc.to_string()).unwrap();
    let o = run(&["validate", "--placement", bad.to_str().unwrap(), "--scenario", sc.to_str().unwrap()]);
    assert_ne!(code(&o), 0);
    assert!(stdout(&o).contains("nf_on_path"), "{}", stdout(&o));

    doc["slices"][0]["slice"] = Value::from("no-such-slice");
    fs::write(&bad, doc.to_string()).unwrap();
    let o = run(&["validate", "--placement", bad.to_str().unwrap(), "--scenario", sc.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
}

#[test]
fn export_mps_reports_model_sizes() {
    let tmp = TempDir::new().unwrap();
    let (sc_path, _) = generated_scenario(&tmp);
    let out = tmp.path().join("m.mps");
    let o = run(&["export-mps", "--scenario", &sc_path, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);

    let sc = ran_slice_core::scenario::load_scenario(&fs::read_to_string(&sc_path).unwrap(), None).unwrap();
    let model = ran_slice_core::model::build_model(&sc).unwrap();
    let stats = ran_slice_core::model::model_stats(&model);
    let text = stdout(&o);
    assert!(text.contains(&format!("rows: {}\n", stats.constraints())), "{text}");
    assert!(text.contains(&format!("columns: {} ({} binary", stats.binaries + stats.continuous, stats.binaries)));
    let mps = fs::read_to_string(&out).unwrap();
    assert!(mps.starts_with("NAME") && mps.trim_end().ends_with("ENDATA"));
}

#[test]
fn export_mps_to_unwritable_path_fails() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("missing").join("m.mps");
    let o = run(&["export-mps", "--slices", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
}

#[test]
fn export_mps_of_fifty_slices_is_fast() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("m.mps");
    let start = Instant::now();
    let o = run(&["export-mps", "--slices", "50", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(start.elapsed().as_secs_f64() < 10.0, "took {:?}", start.elapsed());
}

#[test]
fn environment_variables_override_defaults() {
    let tmp = TempDir::new().unwrap();
    let dir = out_dir(&tmp, "o");
    let o = bin()
        .args(["run"])
        .env("RAN_SLICE_OPT_SLICES", "3")
        .env("RAN_SLICE_OPT_SOLVER", "heuristic")
        .env("RAN_SLICE_OPT_OUTPUT_DIR", &dir)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_csv(&Path::new(&dir).join("results.csv"));
    let (n, s) = (column(&rows, "slice_count"), column(&rows, "solver"));
    assert_eq!(rows.len(), 2);
    assert_eq!(&rows[1][n], "3");
    assert_eq!(&rows[1][s], "heuristic");
}

#[test]
fn invalid_alpha_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let o = run(&["run", "--alpha", "1.5", "--output-dir", &out_dir(&tmp, "o")]);
    assert_eq!(code(&o), 1);
}

#[test]
fn gen_topology_round_trips() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("t.json");
    let o = run(&["gen-topology", "--seed", "7", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let g = ran_slice_core::topology::load_topology(&fs::read_to_string(&out).unwrap()).unwrap();
    assert!(!g.sites().is_empty());
    let dir = out_dir(&tmp, "o");
    let o = run(&["run", "--slices", "4", "--topology", out.to_str().unwrap(), "--output-dir", &dir]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}
