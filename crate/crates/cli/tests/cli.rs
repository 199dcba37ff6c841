use std::path::Path;
use std::process::Command;

fn mmshare(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_mmshare")).args(args).output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("exp.toml");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const SMALL: &str = "protocols = [\"non-cs\", \"dcsr\"]\niterations = 200\nz_grid_db = [0.0, 20.0, 40.0]\n";

#[test]
fn run_writes_paired_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    let o = mmshare(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = mmshare_cli::emit::read_csv(std::fs::File::open(out.join("results.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 12);
    assert_eq!(rows.iter().filter(|r| r.stderr.is_some()).count(), 6);
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let run = |name: &str, threads: &str| {
        let out = dir.path().join(name);
        let o = mmshare(&["run", "--config", &cfg, "--mode", "sim", "--seed", "7", "--threads", threads, "--out", out.to_str().unwrap()]);
        assert!(o.status.success());
        std::fs::read(out.join("results.csv")).unwrap()
    };
    let a = run("a", "1");
    assert_eq!(a, run("b", "1"));
    assert_eq!(a, run("c", "3"));
    assert_ne!(a, {
        let out = dir.path().join("d");
        mmshare(&["run", "--config", &cfg, "--mode", "sim", "--seed", "8", "--out", out.to_str().unwrap()]);
        std::fs::read(out.join("results.csv")).unwrap()
    });
}

#[test]
fn refused_analysis_fails_the_run_but_keeps_other_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    let o = mmshare(&["run", "--config", &cfg, "--protocol", "ocst,dcsr", "--mode", "both", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("ocst"));
    let rows = mmshare_cli::emit::read_csv(std::fs::File::open(out.join("results.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 9);
    assert!(out.join("failures.csv").exists());
}

#[test]
fn invalid_config_exits_with_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "rho = 1.2\n");
    let o = mmshare(&["run", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("rho"));
    let o = mmshare(&["run", "--config", dir.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn json_output_and_traces() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{SMALL}format = \"json\"\ntrace = true\nmode = \"sim\"\n"));
    let out = dir.path().join("out");
    let o = mmshare(&["run", "--config", &cfg, "--protocol", "dcsr", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let t = mmshare_cli::emit::read_json(std::fs::File::open(out.join("results.json")).unwrap()).unwrap();
    assert_eq!(t.rows.len(), 3);
    let trace = std::fs::read_dir(&out).unwrap().filter_map(|e| e.ok()).find(|e| e.file_name().to_string_lossy().starts_with("trace_")).unwrap();
    let lines = std::fs::read_to_string(trace.path()).unwrap();
    assert_eq!(lines.lines().count(), 200);
    let first: mmshare::simulator::IterationOutcome = serde_json::from_str(lines.lines().next().unwrap()).unwrap();
    assert!(first.association_distance > 0.0);
}
