use std::fs;
use std::process::Command;

fn wpbc() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wpbc"))
}

#[test]
fn region_then_replay_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let status = wpbc()
        .args(["region", "--n-tones", "4", "--targets-db", "0,6", "--seed", "5", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let csv = fs::read_to_string(out.join("region.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "realization,target_db,target_linear,feasible,z_dc_total,z_dc_tag_1,sinr_tag_1,iters,method"
    );
    assert_eq!(lines.count(), 2);
    assert!(out.join("timing.csv").exists());

    let again = dir.path().join("again");
    let o = wpbc()
        .arg("replay")
        .arg(out.join("manifest.json"))
        .arg("--out")
        .arg(&again)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read(out.join("region.csv")).unwrap(), fs::read(again.join("region.csv")).unwrap());
}

#[test]
fn infeasible_sweep_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let status = wpbc()
        .args(["region", "--n-tones", "4", "--targets-db", "60", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
    let csv = fs::read_to_string(dir.path().join("region.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().contains(",false,"));
}

#[test]
fn tampered_output_fails_replay() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let status = wpbc()
        .args(["compare-models", "--n-tones", "2", "--targets-db", "0", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let path = out.join("manifest.json");
    let text = fs::read_to_string(&path).unwrap();
    let mut m: serde_json::Value = serde_json::from_str(&text).unwrap();
    m["outputs"]["compare_models.csv"] = serde_json::Value::String("0".repeat(64));
    fs::write(&path, serde_json::to_string(&m).unwrap()).unwrap();
    let o = wpbc()
        .arg("replay")
        .arg(&path)
        .arg("--out")
        .arg(dir.path().join("again"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("compare_models.csv differs"));
}

#[test]
fn config_file_and_bad_cells() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = wpbc::SystemConfig64::uniform(3, 2, 1.0, 1e-12, 1.0);
    let path = dir.path().join("cfg.json");
    fs::write(&path, serde_json::to_string(&cfg).unwrap()).unwrap();
    let status = wpbc()
        .args(["grid", "--cells", "2x3", "--realizations", "1", "--config"])
        .arg(&path)
        .arg("--out")
        .arg(dir.path().join("g"))
        .status()
        .unwrap();
    assert!(matches!(status.code(), Some(0) | Some(3)));
    let grid = fs::read_to_string(dir.path().join("g/grid.csv")).unwrap();
    assert_eq!(grid.lines().count(), 1 + 4);

    let o = wpbc().args(["grid", "--cells", "3by4"]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("KxN"));
}
