use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn beamsched() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_beamsched"));
    c.env_remove("BEAMSCHED_OUT");
    c
}

/// The bundled defaults moved to the 7-beam layout with few iterations.
fn small_config(dir: &Path) -> PathBuf {
    let defaults = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data/default.toml")).unwrap();
    let text = defaults
        .replace("bundled:hex19", "bundled:hex7")
        .replace("monte_carlo_iterations = 100", "monte_carlo_iterations = 3");
    let path = dir.join("small.toml");
    std::fs::write(&path, text).unwrap();
    path
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn validate_accepts_bundled_scenario() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let o = beamsched().args(["validate", "--config"]).arg(&cfg).output().unwrap();
    assert!(o.status.success(), "{o:?}");
    assert!(stdout(&o).contains("7 beams"), "{}", stdout(&o));
}

#[test]
fn usage_errors_exit_with_two() {
    let o = beamsched().arg("run").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = beamsched().args(["run", "--config", "x.toml", "--scheduler", "fifo"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let o = beamsched().args(["validate", "--config"]).arg(tmp.path().join("missing.toml")).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    let bad = tmp.path().join("bad.toml");
    std::fs::write(&bad, "master_seed = \"seven\"\n").unwrap();
    let o = beamsched().args(["validate", "--config"]).arg(&bad).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
}

#[test]
fn too_sparse_cell_fails_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let o = beamsched()
        .args(["run", "--no-traces", "--cluster-size", "2", "--density", "5e-6", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(tmp.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1), "{o:?}");
}

#[test]
fn run_then_report() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let out = tmp.path().join("out");
    let o = beamsched()
        .args(["run", "--scheduler", "both", "--cluster-size", "2", "--threads", "2", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(o.status.success(), "{o:?}");
    assert!(stdout(&o).contains("gsa gain"));
    for policy in ["random", "gsa"] {
        let cell = out.join("cells").join(format!("k2_rho0.0025_{policy}"));
        for f in ["iterations.csv", "frames.csv", "sinr.csv", "user_map.csv"] {
            assert!(cell.join(f).is_file(), "missing {}", cell.join(f).display());
        }
    }
    for f in ["summary.csv", "summary.json", "manifest.json", "gsa_gain.csv", "spectral_efficiency.csv"] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let r = beamsched().env("BEAMSCHED_OUT", &out).arg("report").output().unwrap();
    assert!(r.status.success(), "{r:?}");
    let text = stdout(&r);
    assert!(text.starts_with("cell,iterations,frames"));
    assert_eq!(text.lines().count(), 3);
    // Re-aggregated figures match the live summary.
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    for line in text.lines().skip(1) {
        let eff = line.split(',').nth(3).unwrap();
        assert!(summary.contains(eff), "{eff} not in {summary}");
    }
}

#[test]
fn single_policy_and_env_output_dir() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let out = tmp.path().join("env-out");
    let o = beamsched()
        .env("BEAMSCHED_OUT", &out)
        .args(["run", "--scheduler", "gsa", "--no-traces", "--iterations", "2", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(o.status.success(), "{o:?}");
    let cells: Vec<_> = std::fs::read_dir(out.join("cells")).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(cells.len(), 1);
    assert!(cells[0].to_string_lossy().ends_with("_gsa"));
    assert!(!out.join("cells").join(&cells[0]).join("frames.csv").exists());
}

#[test]
fn dumps_sectors_and_clusters() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let o = beamsched().args(["sectorize", "--iteration", "1", "--config"]).arg(&cfg).output().unwrap();
    assert!(o.status.success(), "{o:?}");
    let text = stdout(&o);
    assert!(text.starts_with("beam,user,lat_deg,lon_deg,x_km,y_km,angle_rad,radius,sector"));
    assert!(text.lines().count() > 7);

    let dir = tmp.path().join("dump");
    let o = beamsched().args(["cluster", "--cluster-size", "3", "--config"]).arg(&cfg).arg("--out").arg(&dir).output().unwrap();
    assert!(o.status.success(), "{o:?}");
    let table = std::fs::read_to_string(dir.join("clusters.csv")).unwrap();
    assert!(table.lines().skip(1).all(|l| l.split(',').nth(2).unwrap().parse::<usize>().unwrap() <= 3));
}
