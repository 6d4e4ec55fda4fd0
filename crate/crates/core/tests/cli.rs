use std::path::Path;
use std::process::{Command, Output};

fn d3net(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_d3net")).args(args).output().expect("spawn d3net")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn all_to_all_succeeds_and_reports_counts() {
    let o = d3net(&["sim", "-K", "2", "-M", "4", "all2all"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    for line in ["rounds 32", "delays 8", "conflicts 0", "deliveries 1024 of 1024 expected (ok)"] {
        assert!(s.contains(line), "missing `{line}` in\n{s}");
    }
}

#[test]
fn dropping_delays_exits_with_conflict_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = d3net(&["sim", "-K", "2", "-M", "4", "all2all", "--no-delays", "--out", out]);
    assert_eq!(o.status.code(), Some(3));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("conflicts.json")).unwrap()).unwrap();
    assert!(report.to_string().contains("step"));
}

#[test]
fn bad_input_exits_with_two() {
    assert_eq!(d3net(&["sim", "-K", "2", "-M", "3", "all2all"]).status.code(), Some(2));
    assert_eq!(d3net(&["sim", "-K", "2", "-M", "4", "all2one", "--sink", "0.1.1"]).status.code(), Some(2));
    assert_eq!(d3net(&["route", "-K", "2", "-M", "4", "0.0.0", "5.0.0"]).status.code(), Some(2));
}

#[test]
fn wrong_table_exits_with_four() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("t.csv");
    std::fs::write(&table, "i,k_i,ports\n0,1,\"{0,1,4,7}\"\n1,2,\"{8,0,3,5}\"\n").unwrap();
    let o = d3net(&["embed", "-K", "9", "-M", "4", "--kappa", "1,2,5,8", "--table", table.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stdout(&o).contains("table row 1 differs"));
}

#[test]
fn verify_and_embed_checks_pass() {
    let o = d3net(&["verify", "-K", "2", "-M", "4", "--suite", "parallel"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = d3net(&["embed", "-K", "9", "-M", "4", "--kappa", "1,2,5,8", "--check"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("0,1,\"{0,1,4,7}\""));
    assert!(s.contains("PASS embedding check"));
}

#[test]
fn route_prints_header_and_path() {
    let o = d3net(&["route", "-K", "2", "-M", "4", "0.0.0", "1.2.3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("header (3;1,3,2)"));
    let o = d3net(&["route", "-K", "2", "-M", "4", "0.0.1", "1.2.3", "--style", "deflect", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v.is_object());
}

#[test]
fn topo_writes_graph_and_plan() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = d3net(&["topo", "-K", "2", "-M", "4", "--format", "dot", "--out", out]);
    assert_eq!(o.status.code(), Some(0));
    let o = d3net(&["topo", "-K", "2", "-M", "4", "--wiring", "--out", out]);
    assert_eq!(o.status.code(), Some(0));
    assert!(std::fs::read_to_string(dir.path().join("graph.dot")).unwrap().starts_with("graph"));
    let plan = std::fs::read_to_string(dir.path().join("plan.csv")).unwrap();
    assert_eq!(plan.lines().count(), 1 + 2 * 4 * 2);
}

fn sim_bytes(dir: &Path, extra: &[&str]) -> Vec<u8> {
    let mut args = vec!["sim", "-K", "2", "-M", "4", "--out", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = d3net(&args);
    assert!(matches!(o.status.code(), Some(0) | Some(3)));
    std::fs::read(dir.join("metrics.json")).unwrap()
}

#[test]
fn repeated_runs_write_identical_metrics() {
    for extra in [
        &["all2all"][..],
        &["perm", "--perm-seed", "11", "--mode", "queued"],
        &["perm", "--perm-seed", "11", "--mode", "queued", "--discipline", "fifo"],
        &["all2one", "--sink", "1.2.3"],
    ] {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        assert_eq!(sim_bytes(a.path(), extra), sim_bytes(b.path(), extra), "{extra:?}");
    }
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"K": 2, "M": 4, "mode": "queued", "perm_seed": 5}"#).unwrap();
    let o = d3net(&["--config", cfg.to_str().unwrap(), "sim", "perm"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("queued mode"));
    let o = d3net(&["--config", cfg.to_str().unwrap(), "sim", "perm", "-M", "6"]);
    assert!(stdout(&o).contains("D3(2,6)"));

    std::fs::write(&cfg, r#"{"K": 2, "M": 4, "colour": 1}"#).unwrap();
    assert_eq!(d3net(&["--config", cfg.to_str().unwrap(), "sim", "all2all"]).status.code(), Some(1));
}

#[test]
fn permutation_file_is_read() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("perm.txt");
    // swap two drawers of cabinet 0, everything else fixed
    let mut text = String::from("# drawer swap\n");
    for c in 0..2 {
        for d in 0..4 {
            for p in 0..4 {
                let d2 = if c == 0 && d < 2 { 1 - d } else { d };
                text.push_str(&format!("{c}.{d}.{p} -> {c}.{d2}.{p}\n"));
            }
        }
    }
    std::fs::write(&file, text).unwrap();
    let o = d3net(&["sim", "-K", "2", "-M", "4", "perm", "--perm", file.to_str().unwrap(), "--mode", "queued"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("deliveries 32 of 32 expected (ok)"));
}
