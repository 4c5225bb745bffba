use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const EXAMPLE_PUB: &str = "UN-ELGAMAL PUBLIC v1\nn=29\np=29\nm=1\ndoubled=0\nr1=3\nr2=23\n";
const EXAMPLE_CT: &str = "UN-ELGAMAL CT v1\nblocks=9\npad=0\n\
c1=11 c2=26\nc1=11 c2=14\nc1=11 c2=26\nc1=11 c2=18\nc1=11 c2=13\n\
c1=11 c2=10\nc1=11 c2=0\nc1=11 c2=11\nc1=11 c2=1\n";

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_un-elgamal"))
        .current_dir(dir)
        .env_remove("UN_ELGAMAL_EFFORT_CAP")
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn example_keys(dir: &Path) {
    let out = run(
        dir,
        &[
            "keygen", "--exact-p", "29", "--exact-a", "4", "--exact-r1", "3",
            "--insecure-deterministic", "--pub", "k.pub", "--priv", "k.priv",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
}

#[test]
fn worked_example_key_and_ciphertext() {
    let dir = TempDir::new().unwrap();
    example_keys(dir.path());
    assert_eq!(fs::read_to_string(dir.path().join("k.pub")).unwrap(), EXAMPLE_PUB);

    let out = run(
        dir.path(),
        &[
            "encrypt", "--pub", "k.pub", "--message", "ILIKEMATH", "--paper-mode", "--k", "5",
            "--insecure-deterministic", "--out", "ct.txt",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stderr(&out).contains("--paper-mode"));
    assert_eq!(fs::read_to_string(dir.path().join("ct.txt")).unwrap(), EXAMPLE_CT);

    let out = run(dir.path(), &["decrypt", "--priv", "k.priv", "--ct", "ct.txt"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out), "ILIKEMATH\n");
}

#[test]
fn fresh_encryption_round_trips_through_files() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), &["keygen", "--p-bits", "40", "--m", "2", "--pub", "a.pub", "--priv", "a.priv"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stderr(&out).contains("warning"));
    fs::write(dir.path().join("msg.txt"), "attack at dawn").unwrap();

    let out = run(dir.path(), &["encrypt", "--pub", "a.pub", "--message-file", "msg.txt"]);
    assert!(out.status.success(), "{}", stderr(&out));
    fs::write(dir.path().join("ct.txt"), stdout(&out)).unwrap();

    let out = run(dir.path(), &["decrypt", "--priv", "a.priv", "--ct", "ct.txt"]);
    assert_eq!(stdout(&out), "ATTACKATDAWN\n");
}

#[test]
fn doubled_keygen_classifies_as_twice_prime_square() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), &["keygen", "--p-bits", "16", "--m", "2", "--doubled", "--pub", "d.pub", "--priv", "d.priv"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let n = stdout(&out).lines().find_map(|l| l.strip_prefix("n=")).unwrap().to_string();
    let out = run(dir.path(), &["classify", &n]);
    let class = stdout(&out);
    assert!(class.starts_with("cyclic: 2p^m"), "{class}");
    assert!(class.trim_end().ends_with("m=2"), "{class}");
}

#[test]
fn unsupported_character_exits_4() {
    let dir = TempDir::new().unwrap();
    example_keys(dir.path());
    let out = run(dir.path(), &["encrypt", "--pub", "k.pub", "--message", "café"]);
    assert_eq!(out.status.code(), Some(4));
    let err = stderr(&out);
    assert!(err.contains('é') && err.contains("position 3"), "{err}");
}

#[test]
fn truncated_ciphertext_exits_5() {
    let dir = TempDir::new().unwrap();
    example_keys(dir.path());
    let truncated: String = EXAMPLE_CT.lines().take(5).map(|l| format!("{l}\n")).collect();
    fs::write(dir.path().join("ct.txt"), truncated).unwrap();
    let out = run(dir.path(), &["decrypt", "--priv", "k.priv", "--ct", "ct.txt"]);
    assert_eq!(out.status.code(), Some(5));
    assert!(stderr(&out).contains("line 6"), "{}", stderr(&out));
}

#[test]
fn undecodable_block_exits_6() {
    let dir = TempDir::new().unwrap();
    example_keys(dir.path());
    // 11^4 = 25 (mod 29) and 25^-1 = 7, so c2 = 4 decrypts to 28, past Z = 25.
    fs::write(dir.path().join("ct.txt"), "UN-ELGAMAL CT v1\nblocks=1\npad=0\nc1=11 c2=4\n").unwrap();
    let out = run(dir.path(), &["decrypt", "--priv", "k.priv", "--ct", "ct.txt"]);
    assert_eq!(out.status.code(), Some(6), "{}", stderr(&out));
}

#[test]
fn missing_file_exits_3() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), &["decrypt", "--priv", "nope.priv", "--ct", "nope.ct"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn injected_material_needs_insecure_flag() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), &["keygen", "--exact-p", "29", "--pub", "k.pub", "--priv", "k.priv"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(dir.path(), &["keygen", "--p-bits", "16", "--seed", "1", "--pub", "k.pub", "--priv", "k.priv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("k.pub").exists());
}

#[test]
fn dlog_solvers_agree() {
    let dir = TempDir::new().unwrap();
    for alg in ["brute", "bsgs"] {
        let out = run(dir.path(), &["dlog", "--base", "3", "--target", "13", "--n", "17", "--alg", alg]);
        assert!(out.status.success(), "{}", stderr(&out));
        assert_eq!(stdout(&out), format!("x=4 algorithm={alg}\n"));
    }
    // 2 generates a subgroup of order 3 in U(7), which does not contain 3.
    let out = run(dir.path(), &["dlog", "--base", "2", "--target", "3", "--n", "7"]);
    assert_eq!(out.status.code(), Some(7));
    let out = run(dir.path(), &["dlog", "--base", "3", "--target", "5", "--n", "15"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn effort_cap_is_honoured() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), &["--effort-cap", "10", "dlog", "--base", "3", "--target", "13", "--n", "17", "--alg", "brute"]);
    assert_eq!(out.status.code(), Some(8));
    let out = Command::new(env!("CARGO_BIN_EXE_un-elgamal"))
        .env("UN_ELGAMAL_EFFORT_CAP", "2")
        .args(["dlog", "--base", "3", "--target", "13", "--n", "17"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(8));
}

#[test]
fn classify_examples() {
    let dir = TempDir::new().unwrap();
    for (n, expected) in [
        ("29", "cyclic: p^m, p=29, m=1"),
        ("12", "not cyclic"),
        ("4", "cyclic: small"),
        ("18", "cyclic: 2p^m, p=3, m=2"),
        ("2", "cyclic: small"),
        ("8", "not cyclic"),
    ] {
        let out = run(dir.path(), &["classify", n]);
        assert_eq!(stdout(&out).trim_end(), expected, "n = {n}");
    }
    assert_eq!(run(dir.path(), &["classify", "1"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["classify", "abc"]).status.code(), Some(2));
}

fn csv_without_elapsed(csv: &str) -> Vec<String> {
    csv.lines()
        .map(|l| {
            let mut cols: Vec<&str> = l.split(',').collect();
            cols.remove(3);
            cols.join(",")
        })
        .collect()
}

#[test]
fn bench_rows_and_determinism() {
    let dir = TempDir::new().unwrap();
    let args = ["bench", "--p-bits", "12,16,20", "--trials", "5", "--seed", "11", "--out", "b.csv"];
    let out = run(dir.path(), &args);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).starts_with("slope="));
    let first = fs::read_to_string(dir.path().join("b.csv")).unwrap();
    let lines: Vec<&str> = first.lines().collect();
    assert_eq!(lines[0], "group_order,algorithm,bits,elapsed_s,group_ops,solution");
    assert_eq!(lines.len(), 1 + 15);

    run(dir.path(), &args);
    let second = fs::read_to_string(dir.path().join("b.csv")).unwrap();
    assert_eq!(csv_without_elapsed(&first), csv_without_elapsed(&second));

    let out = run(dir.path(), &["bench", "--p-bits", "12", "--trials", "3", "--seed", "1"]);
    assert_eq!(stdout(&out).lines().count(), 4);
    assert!(stderr(&out).contains("slope=n/a"));
}
