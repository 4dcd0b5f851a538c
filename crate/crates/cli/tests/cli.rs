use std::path::Path;
use std::process::{Command, Output};

fn rip(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rip")).args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn gen(dir: &Path, seed: u64) -> std::path::PathBuf {
    let out = dir.join(format!("net{seed}.json"));
    let o = rip(&["gen", "--seed", &seed.to_string(), "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn gen_is_byte_identical() {
    let d = tempfile::tempdir().unwrap();
    let a = gen(d.path(), 5);
    let b = d.path().join("again.json");
    assert!(rip(&["gen", "--seed", "5", "--out", s(&b)]).status.success());
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn solve_writes_a_feasible_solution() {
    let d = tempfile::tempdir().unwrap();
    let net = gen(d.path(), 1);
    let out = d.path().join("sol.json");
    let o = rip(&["solve", "--net", s(&net), "--target-ratio", "1.5", "--mode", "rip", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let sol: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(sol["feasible"], true);
    assert!(sol["total_width_u"].as_f64().unwrap() > 0.0);
}

#[test]
fn infeasible_target_exits_one() {
    let d = tempfile::tempdir().unwrap();
    let net = gen(d.path(), 2);
    let out = d.path().join("sol.json");
    let o = rip(&["solve", "--net", s(&net), "--target-ratio", "0.5", "--mode", "dp", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    let sol: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(sol["feasible"], false);
}

#[test]
fn usage_errors_exit_two() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(rip(&["gen", "--bogus"]).status.code(), Some(2));
    let net = gen(d.path(), 3);
    let out = d.path().join("sol.json");
    let o = rip(&["solve", "--net", s(&net), "--target-ratio", "-1", "--mode", "rip", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    let o = rip(&["sweep", "--nets", s(d.path()), "--strategies", "nope", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_and_compare() {
    let d = tempfile::tempdir().unwrap();
    let nets = d.path().join("nets");
    std::fs::create_dir(&nets).unwrap();
    gen(&nets, 0);
    gen(&nets, 1);
    let run = |name: &str| {
        let csv = d.path().join(name);
        let o = rip(&["sweep", "--nets", s(&nets), "--strategies", "rip,dp", "--out", s(&csv)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        csv
    };
    let a = run("a.csv");
    let b = run("b.csv");
    let strip = |p: &Path| -> Vec<String> {
        std::fs::read_to_string(p)
            .unwrap()
            .lines()
            .map(|l| l.rsplit_once(',').unwrap().0.to_string())
            .collect()
    };
    let rows = strip(&a);
    assert_eq!(rows.len(), 1 + 2 * 2 * 20);
    assert_eq!(rows, strip(&b));
    assert!(d.path().join("a.csv.anchors.json").exists());

    let summary = d.path().join("summary.json");
    let o = rip(&["compare", "--report", s(&a), "--summary", s(&summary)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&summary).unwrap()).unwrap();
    assert_eq!(v["nets"].as_array().unwrap().len(), 2);
    assert!(v["speedup"].as_f64().unwrap() > 0.0);
}
