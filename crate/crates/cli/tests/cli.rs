use std::process::Command;

fn linkpred() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_linkpred"));
    c.env("RUST_LOG", "warn");
    c
}

#[test]
fn stats_prints_fixture_row() {
    let out = linkpred()
        .args(["stats", "fixture:triangle"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "dataset,nodes,edges,diameter,queries\ntriangle,3,3,1,3\n"
    );
}

#[test]
fn exit_codes() {
    assert_eq!(
        linkpred()
            .arg("no-such-command")
            .output()
            .unwrap()
            .status
            .code(),
        Some(1)
    );
    let bad_key = linkpred()
        .args(["config", "--set", "bogus=1"])
        .output()
        .unwrap();
    assert_eq!(bad_key.status.code(), Some(1));
    let missing = linkpred()
        .args(["stats", "/nonexistent/edges.txt"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("/nonexistent/edges.txt"));
}

#[test]
fn malformed_edge_list_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.txt");
    std::fs::write(&path, "0 1\n1 x\n").unwrap();
    let out = linkpred().arg("stats").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains(":2:"));
}

#[test]
fn config_file_and_flags_compose() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.conf");
    std::fs::write(
        &cfg,
        "architectures = gcn\nmodes = drnl_only\nmax_epochs = 2\n",
    )
    .unwrap();
    let out = linkpred()
        .arg("--config")
        .arg(&cfg)
        .args(["--seed", "7", "--jobs", "1", "--out"])
        .arg(dir.path())
        .arg("config")
        .output()
        .unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(
        text.contains("seeds = 7\n")
            && text.contains("jobs = 1\n")
            && text.contains("max_epochs = 2\n")
    );

    let run = linkpred()
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .arg("run")
        .output()
        .unwrap();
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    let summary = std::fs::read_to_string(dir.path().join("summary_map.csv")).unwrap();
    assert!(summary.starts_with("dataset,loss,GCN W/o N2V\nplanted-small,bce,"));
}
