use std::path::Path;
use std::process::Command;

fn commrep(args: &[&str], cwd: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_commrep"))
        .args(args)
        .current_dir(cwd)
        .env("RUST_LOG", "error")
        .output()
        .unwrap()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let ok = commrep(&["synth", "--out", "c.jsonl", "--tokens", "60000"], d);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));

    std::fs::write(d.join("bad.toml"), "inputs = [\"c.jsonl\"]\n[propagation]\nbeta = 1.5\n").unwrap();
    let bad = commrep(&["validate", "--config", "bad.toml"], d);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("beta"));

    std::fs::write(d.join("good.toml"), "inputs = [\"c.jsonl\"]\n").unwrap();
    let over = commrep(&["validate", "--config", "good.toml", "--beta", "2"], d);
    assert_eq!(over.status.code(), Some(1));

    let missing = commrep(&["report", "--config", "good.toml"], d);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("induce"));

    let usage = commrep(&["frobnicate"], d);
    assert_eq!(usage.status.code(), Some(1));

    let resolved = commrep(&["validate", "--config", "good.toml", "--knn", "15"], d);
    assert_eq!(resolved.status.code(), Some(0));
    let text = String::from_utf8_lossy(&resolved.stdout);
    assert!(text.contains("k = 15"), "{text}");
    assert!(text.contains("beta = 0.9"));
}

#[test]
fn staged_run_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(commrep(&["synth", "--out", "c.jsonl", "--tokens", "90000"], d).status.success());
    std::fs::write(d.join("cfg.toml"), "inputs = [\"c.jsonl\"]\n").unwrap();
    let common = ["--config", "cfg.toml", "--out", "o", "--runs", "5", "--workers", "1", "--clusters", "2"];
    for stage in ["ingest", "vectors", "embed", "induce", "compare", "cluster", "misalign", "report"] {
        let mut args = vec![stage];
        args.extend(common);
        let out = commrep(&args, d);
        assert!(out.status.success(), "{stage}: {}", String::from_utf8_lossy(&out.stderr));
    }
    assert!(d.join("o/report/report.txt").is_file());
    let mut args = vec!["all"];
    args.extend(common);
    let again = commrep(&args, d);
    assert_eq!(String::from_utf8_lossy(&again.stdout).matches("(cached)").count(), 8);
}
