use std::path::Path;
use std::process::{Command, Output};

fn stripflow(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stripflow")).current_dir(dir).args(args).output().expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = stripflow(dir, args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn manifest(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

const SPACE: &str = r#"
[space]
kind = "treebolic"
p = 2
q = 2.0
alpha = 0.0
beta = 1.0
k_min = -1
k_max = 1
half_width = 1.0

[discretization]
nodes_per_edge = 5
fiber_nodes = 5
"#;

#[test]
fn file_pipeline_writes_tables_and_manifests() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["space", "build-treebolic", "--p", "2", "--q", "2", "--kmin", "-1", "--kmax", "1", "--out", "sc.json"]);
    ok(d, &["assemble", "--space", "sc.json", "--nodes-per-edge", "5", "--fiber-nodes", "5", "--boundary", "reflecting", "--out", "disc/"]);
    assert!(d.join("disc/stiffness.txt").exists() && d.join("disc/discretization.json").exists());
    ok(d, &["heat", "--disc", "disc/", "--source", "7", "--t", "0.5", "--dt", "0.01", "--scheme", "cn", "--out", "kernel.csv"]);

    let text = std::fs::read_to_string(d.join("kernel.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("node_id,edge_id,s,x,mass,value"));
    assert_eq!(lines.next(), Some("index,index,length,length,measure,per unit measure"));
    let mass: f64 = lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            f[4].parse::<f64>().unwrap() * f[5].parse::<f64>().unwrap()
        })
        .sum();
    assert!((mass - 1.0).abs() < 1e-12, "kernel mass {mass}");

    let m = manifest(&d.join("kernel.manifest.json"));
    assert_eq!(m["tool"], "stripflow");
    assert!(m["inputs"]["disc/"].as_str().unwrap().len() == 64);
    assert_eq!(m["outputs"][0]["path"], "kernel.csv");
    assert!(m["wall_clock_seconds"].as_f64().unwrap() >= 0.0);

    ok(d, &["mc", "ctmc", "--disc", "disc/", "--source", "7", "--t", "0.5", "--paths", "1000", "--seed", "4", "--out", "measure.csv"]);
    let text = std::fs::read_to_string(d.join("measure.csv")).unwrap();
    assert!(text.starts_with("node_id,count,density\nindex,walkers,per unit measure\n"));
    let walkers: u64 = text.lines().skip(2).map(|l| l.split(',').nth(1).unwrap().parse::<u64>().unwrap()).sum();
    assert_eq!(walkers, 1000);
    assert_eq!(manifest(&d.join("measure.manifest.json"))["seed"], 4);
}

#[test]
fn quotient_map_document_has_weight_constants() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["space", "build-treebolic", "--p", "2", "--q", "2", "--kmin", "-1", "--kmax", "1", "--out", "sc.json"]);
    ok(d, &["project", "collapse-fiber", "--space", "sc.json", "--out", "q.json"]);
    let q = manifest(&d.join("q.json"));
    assert_eq!(q["edges"].as_object().unwrap().len(), 6);
    assert!(q["A"]["0"].as_f64().unwrap() > 0.0);
    assert!(d.join("q.target.json").exists());
}

#[test]
fn unknown_task_is_a_validation_error_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "bad.toml", &format!("{SPACE}\n[task]\nname = \"simmer\"\n"));
    let out = stripflow(dir.path(), &["run", "bad.toml"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("task.name") && err.contains("simmer"), "{err}");
}

#[test]
fn schema_violations_report_the_key_path() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "bad.toml", &format!("{SPACE}\n[task]\nname = \"heat\"\n[task.params]\nsource = 3\nt = 0.5\ndt = -1\nsheme = \"cn\"\n"));
    let out = stripflow(dir.path(), &["run", "bad.toml"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("task.params") && err.contains("sheme"), "{err}");
}

#[test]
fn rerun_with_same_seed_gives_identical_digests() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let config = format!("seed = 11\n{SPACE}\n[task]\nname = \"mc\"\n[task.params]\nkind = \"ctmc\"\nsource = 7\nt = 0.5\npaths = 4000\n");
    write(d, "mc.toml", &config);
    ok(d, &["run", "mc.toml", "--out", "a"]);
    ok(d, &["--threads", "2", "run", "mc.toml", "--out", "b"]);
    let a = manifest(&d.join("a/manifest.json"));
    let b = manifest(&d.join("b/manifest.json"));
    assert_eq!(a["seed"], 11);
    assert_eq!(a["config_digest"], b["config_digest"]);
    assert_eq!(a["outputs"][0]["sha256"], b["outputs"][0]["sha256"]);
    assert_eq!(std::fs::read(d.join("a/measure.csv")).unwrap(), std::fs::read(d.join("b/measure.csv")).unwrap());

    write(d, "mc2.toml", &config.replace("seed = 11", "seed = 12"));
    ok(d, &["run", "mc2.toml", "--out", "c"]);
    assert_ne!(manifest(&d.join("c/manifest.json"))["outputs"][0]["sha256"], a["outputs"][0]["sha256"]);
}

#[test]
fn coarse_sde_step_is_a_numerical_error() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "sde.toml", &format!("{SPACE}\n[task]\nname = \"mc\"\n[task.params]\nkind = \"sde\"\nsource = 7\nt = 2.0\npaths = 200\ndt = 0.5\n"));
    let out = stripflow(d, &["run", "sde.toml"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn acceptance_config_prints_a_pass_table() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "accept.toml", "[task]\nname = \"acceptance\"\n[task.params]\ncriteria = [2]\n");
    let stdout = ok(dir.path(), &["run", "accept.toml", "--out", "acc"]);
    assert!(stdout.lines().next().unwrap().starts_with("PASS  2"), "{stdout}");
    assert!(stdout.contains("acceptance: 1 passed, 0 failed"));
    let rows = manifest(&dir.path().join("acc/acceptance.json"));
    assert_eq!(rows[0]["passed"], true);
}

#[test]
fn unknown_criterion_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = stripflow(dir.path(), &["accept", "--criteria", "13"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn circle_resolvent_kernel() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(dir.path(), &["subord", "G", "--fiber", "circle", "--L", "6.28318", "--x", "0", "--y", "1"]);
    let g: f64 = stdout.trim().rsplit(' ').next().unwrap().parse().unwrap();
    assert!(g > 0.0 && g < 1.0);
    let text = std::fs::read_to_string(dir.path().join("out/resolvent.csv")).unwrap();
    assert!(text.starts_with("x,y,distance,value\n"));
}
