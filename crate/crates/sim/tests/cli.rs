use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cv2x-aoi")).args(args).env_remove("CV2X_SIM_OUT").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn same_tree(a: &Path, b: &Path) {
    let mut files = Vec::new();
    collect(a, a, &mut files);
    assert!(!files.is_empty());
    for rel in files {
        assert_eq!(fs::read(a.join(&rel)).unwrap(), fs::read(b.join(&rel)).unwrap(), "{}", rel.display());
    }
}

fn collect(root: &Path, dir: &Path, out: &mut Vec<std::path::PathBuf>) {
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            collect(root, &p, out);
        } else {
            out.push(p.strip_prefix(root).unwrap().to_path_buf());
        }
    }
}

#[test]
fn analytic_with_nobody_selecting_prints_one() {
    let o = cli(&["analytic", "--set", "pi=0", "--set", "nv=5"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "1.0");
    let o = cli(&["analytic", "--set", "nv=5"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn run_twice_gives_identical_files() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [&a, &b] {
        let o = cli(&["run", "--seed", "7", "--set", "sim_duration=3000", "--quiet", "--out", dir.path().to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(o.stdout.is_empty());
    }
    same_tree(a.path(), b.path());
    let summary = fs::read_to_string(a.path().join("summary.csv")).unwrap();
    assert!(summary.lines().nth(1).unwrap().starts_with("7,3000,"));
}

#[test]
fn json_summary_and_env_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_cv2x-aoi"))
        .args(["run", "--set", "sim_duration=500", "--format", "json"])
        .env("CV2X_SIM_OUT", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    let s: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(s["slots"], 500);
}

#[test]
fn overrides_apply_after_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("scenario.toml");
    fs::write(&cfg, "num_vehicles = 9\nrri = 50\nsim_duration = 200\n").unwrap();
    let out = dir.path().join("out");
    let o = cli(&["run", "--config", cfg.to_str().unwrap(), "--set", "nv=4", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["config"]["num_vehicles"], "4");
    assert_eq!(m["config"]["rri"], "50");
}

#[test]
fn config_errors_exit_one() {
    for args in [
        vec!["run", "--set", "rri=33"],
        vec!["run", "--set", "nv=1"],
        vec!["run", "--set", "warp=9"],
        vec!["run", "--set", "rri"],
        vec!["run", "--config", "/nonexistent/x.toml"],
        vec!["run", "--no-such-flag"],
        vec!["table1", "--seeds", "5..1"],
    ] {
        let o = cli(&args);
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(!err.is_empty(), "{args:?}");
        assert_eq!(o.status.code(), Some(1), "{args:?}: {err}");
    }
}

#[test]
fn sweep_is_independent_of_jobs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for (dir, jobs) in [(&a, "1"), (&b, "3")] {
        let o = cli(&[
            "sweep", "--axis", "rri=20,100", "--axis", "mode=oma,noma", "--seeds", "1..2",
            "--set", "nv=8", "--set", "sim_duration=2000", "--jobs", jobs, "--quiet",
            "--out", dir.path().to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    same_tree(a.path(), b.path());
    let runs = fs::read_to_string(a.path().join("runs.csv")).unwrap();
    assert_eq!(runs.lines().count(), 1 + 8);
    assert!(a.path().join("rri-20_mode-noma/seed-2/series.csv").exists());
}

#[test]
fn failed_cells_are_reported_and_the_rest_complete() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("rri-50"), "in the way").unwrap();
    let o = cli(&[
        "sweep", "--axis", "rri=20,50", "--set", "nv=4", "--set", "sim_duration=300", "--quiet",
        "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("1 of 2 sweep runs failed"));
    let runs = fs::read_to_string(dir.path().join("runs.csv")).unwrap();
    let rows: Vec<&str> = runs.lines().skip(1).collect();
    assert!(rows[0].starts_with("20,ok,"));
    assert!(rows[1].starts_with("50,\"error:"));
    assert!(dir.path().join("rri-20/seed-1/summary.csv").exists());
}

#[test]
fn table1_writes_the_grid() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(&["table1", "--seeds", "1..2", "--set", "sim_duration=1000", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = fs::read_to_string(dir.path().join("table1.csv")).unwrap();
    assert_eq!(table.lines().count(), 13);
    assert!(table.contains("30,100,OMA,2,"));
    assert!(stdout(&o).contains("0.91560"));
}

#[test]
fn figure_presets_write_series() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(&["fig-queues", "--set", "sim_duration=500", "--quiet", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("per-type/queue_discipline-single_fifo/seed-1/queues.csv").exists());
    assert!(dir.path().join("by-rri/num_vehicles-50_rri-100/seed-1/series.csv").exists());
    let o = cli(&["fig-aoi", "--set", "sim_duration=300", "--quiet", "--out", dir.path().join("aoi").to_str().unwrap()]);
    assert!(o.status.success());
    assert!(dir.path().join("aoi/num_vehicles-30_rri-50_access_mode-noma/seed-1/series.csv").exists());
}
