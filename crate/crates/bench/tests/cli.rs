use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_varint-bench");

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("VARINT_PEXT")
        .output()
        .expect("spawn varint-bench")
}

fn gen(dir: &Path, name: &str, workload: &str, width: &str, count: &str) -> String {
    let path = dir.join(name).to_string_lossy().into_owned();
    let out = run(&[
        "gen", "--workload", workload, "--width", width, "--count", count, "--seed", "42", "--out",
        &path,
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    path
}

#[test]
fn gen_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = gen(dir.path(), "a.sfvi", "w1", "32", "100000");
    let b = gen(dir.path(), "b.sfvi", "w1", "32", "100000");
    let (a, b) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    assert_eq!(a, b);
    assert_eq!(&a[..4], b"SFVI");
    assert_eq!(u64::from_le_bytes(a[8..16].try_into().unwrap()), 100_000);
}

#[test]
fn gen_rejects_unknown_workload() {
    let out = run(&["gen", "--workload", "w9", "--width", "32", "--out", "/tmp/never.sfvi"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_passes_fresh_and_fails_corrupted() {
    let dir = tempfile::tempdir().unwrap();
    let path = gen(dir.path(), "w3.sfvi", "w3", "64", "50000");
    let out = run(&["verify", "--in", &path]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("PASS 50000"));

    let mut bytes = std::fs::read(&path).unwrap();
    let payload = 32;
    // flip the continuation bit of a byte in the middle of the payload
    let i = payload + (bytes.len() - payload) / 2;
    bytes[i] ^= 0x80;
    let bad = dir.path().join("bad.sfvi");
    std::fs::write(&bad, bytes).unwrap();
    let out = run(&["verify", "--in", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("FAIL at byte"), "{text}");
}

#[test]
fn verify_empty_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let path = gen(dir.path(), "e.sfvi", "w2", "32", "0");
    let out = run(&["verify", "--in", &path]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("PASS 0 values"));
}

#[test]
fn bench_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = gen(dir.path(), "w4.sfvi", "w4", "32", "20000");
    let csv = dir.path().join("r.csv");
    let out = run(&[
        "bench",
        "--in",
        &path,
        "--algos",
        "scalar,bulk-sw",
        "--iterations",
        "3",
        "--warmup",
        "1",
        "--csv",
        csv.to_str().unwrap(),
        "--pext",
        "sw",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], varint_bench::CSV_HEADER);
    assert_eq!(lines.len(), 3);
    let checksum = |l: &str| l.rsplit(',').next().unwrap().to_string();
    assert_eq!(checksum(lines[1]), checksum(lines[2]));
    assert!(lines[1].starts_with("scalar,w4,32,20000,3,"));
    assert!(lines[2].contains(",sw,"));
}

#[test]
fn bench_csv_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = gen(dir.path(), "w2.sfvi", "w2", "64", "5000");
    let out = run(&[
        "bench", "--in", &path, "--algos", "scalar", "--iterations", "1", "--csv", "-",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2, "{text}");
    assert!(lines[1].starts_with("scalar,w2,64,5000,1,"));
}

#[test]
fn forced_hardware_without_bmi2_is_environment_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = gen(dir.path(), "w1.sfvi", "w1", "32", "100");
    let out = run(&["bench", "--in", &path, "--iterations", "1", "--pext", "hw"]);
    if leb128_bmi::pext::bmi2_available() {
        assert_eq!(out.status.code(), Some(0));
    } else {
        assert_eq!(out.status.code(), Some(3));
    }
}

#[test]
fn dump_table() {
    let out = run(&["dump-table"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.lines().count(), 64);
    assert!(text.lines().nth(62).unwrap().contains("shift=35"));
}
