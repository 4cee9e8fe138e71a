use std::fs;
use std::process::Command;

fn kronspec() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kronspec"))
}

#[test]
fn generate_then_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let (g, h, out) = (
        dir.path().join("g.txt"),
        dir.path().join("h.txt"),
        dir.path().join("spectra.csv"),
    );
    for (path, model, n) in [(&g, "ws", "10"), (&h, "er", "7")] {
        let status = kronspec()
            .args(["generate", "--model", model, "-n", n, "-d", "0.5", "-s", "4", "-o"])
            .arg(path)
            .status()
            .unwrap();
        assert!(status.success());
    }
    assert!(fs::read_to_string(&g).unwrap().starts_with("10 "));
    let status = kronspec()
        .arg("estimate")
        .arg(&g)
        .arg(&h)
        .arg("-o")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# kronspec "));
    assert_eq!(
        lines.next().unwrap(),
        "rank,exact,sayama_laplacian,normalized_laplacian,ordering,n1,n2"
    );
    assert_eq!(lines.count(), 70);
}

#[test]
fn generate_is_deterministic() {
    let run = || {
        kronspec()
            .args(["generate", "--model", "ba", "-n", "20", "-d", "0.2", "-s", "9"])
            .output()
            .unwrap()
    };
    let (a, b) = (run(), run());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn experiment_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    let out = dir.path().join("bundle");
    fs::write(
        &config,
        r#"{"model": "WS", "orders": [6, 7], "density": 0.5, "runs": 3, "master_seed": 2}"#,
    )
    .unwrap();
    let output = kronspec()
        .arg("experiment")
        .arg(&config)
        .arg("-o")
        .arg(&out)
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["config"]["runs"], 3);
    assert!(out.join("errors_sayama-laplacian.csv").exists());
}

#[test]
fn bad_inputs_exit_nonzero_with_message() {
    let output = kronspec().args(["figure", "fig9"]).output().unwrap();
    assert!(!output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).contains("fig9"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "3 1\n0 7\n").unwrap();
    let output = kronspec().arg("estimate").arg(&bad).arg(&bad).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).starts_with("error: "));
}
