//! End-to-end runs of the `accumtest` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use accumtest_core::rng::stream;
use rand::Rng;

fn accumtest(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_accumtest"))
        .args(args)
        .env_remove("ACCUMTEST_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn test_command_examples() {
    let dir = tempfile::tempdir().unwrap();
    let three = write(dir.path(), "three.csv", "p\n0.1\n0.2\n0.3\n");
    let o = accumtest(&["test", "--input", &three, "--method", "forwardstop", "--alpha", "0.25"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("k_hat=3\n"), "{}", stdout(&o));

    let five = write(dir.path(), "five.csv", "p\n0.01\n0.95\n0.02\n0.8\n0.9\n");
    let o = accumtest(&["test", "--input", &five, "--method", "seqstep:C=2", "--alpha", "0.5"]);
    assert!(stdout(&o).contains("k_hat=1\n"), "{}", stdout(&o));

    let empty = write(dir.path(), "empty.csv", "");
    let o = accumtest(&["test", "--input", &empty, "--alpha", "0.1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn test_command_errors_have_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.csv", "p\n0.1\n1.5\n");
    assert_eq!(accumtest(&["test", "--input", &bad, "--alpha", "0.1"]).status.code(), Some(3));
    let ok = write(dir.path(), "ok.csv", "p\n0.1\n");
    assert_eq!(accumtest(&["test", "--input", &ok, "--alpha", "0.1", "--method", "bogus"]).status.code(), Some(2));
    assert_eq!(accumtest(&["test", "--input", &ok, "--alpha", "1.5"]).status.code(), Some(2));
    let missing = dir.path().join("nope.csv").display().to_string();
    let o = accumtest(&["test", "--input", &missing, "--alpha", "0.1"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope.csv"));
}

#[test]
fn masked_input_reports_ground_truth() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "m.csv", "p,is_null\n0.01,0\n0.02,0\n0.9,1\n0.03,0\n");
    let o = accumtest(&["test", "--input", &f, "--method", "seqstep:C=2", "--alpha", "0.5"]);
    let text = stdout(&o);
    assert!(text.contains("k_hat=4\n") && text.contains("fdp=0.25\n") && text.contains("power=1\n"), "{text}");
    assert!(text.contains("mfdp_c=4\n") && text.contains("mfdp=0.125\n"), "{text}");
}

#[test]
fn path_round_trip_reproduces_cutoff() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = stream(99, 0);
    let mut csv = String::from("p\n");
    for i in 0..300 {
        let p: f64 = if i < 60 { rng.random::<f64>() * 0.02 } else { rng.random() };
        csv.push_str(&format!("{p}\n"));
    }
    let input = write(dir.path(), "p.csv", &csv);
    let path_csv = dir.path().join("path.csv").display().to_string();
    for method in ["forwardstop", "hingeexp:C=2", "seqstep+:C=2"] {
        let o = accumtest(&["test", "--input", &input, "--method", method, "--alpha", "0.15", "--output", &path_csv]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let k = stdout(&o).lines().find(|l| l.starts_with("k_hat=")).unwrap().to_string();
        let again = accumtest(&["test", "--input", &path_csv, "--alpha", "0.15"]);
        assert!(stdout(&again).contains(&format!("{k}\n")), "{method}: {k} vs {}", stdout(&again));
        assert!(Path::new(&format!("{path_csv}.manifest.json")).exists());
    }
}

#[test]
fn simulate_is_reproducible_and_replayable() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let args = |d: &Path| {
        vec!["simulate", "--seed", "3", "--n", "300", "--n-nonnull", "30", "--trials", "1"]
            .into_iter()
            .map(String::from)
            .chain(["--out-dir".to_string(), d.display().to_string()])
            .collect::<Vec<_>>()
    };
    for d in [&a, &b] {
        let v = args(d);
        let o = accumtest(&v.iter().map(String::as_str).collect::<Vec<_>>());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["power.csv", "paths.csv", "manifest.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let c = dir.path().join("c");
    let manifest = a.join("manifest.json").display().to_string();
    let o = accumtest(&["replay", "--manifest", &manifest, "--out-dir", &c.display().to_string()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["power.csv", "paths.csv", "manifest.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(c.join(f)).unwrap(), "{f}");
    }
    let header = fs::read_to_string(a.join("power.csv")).unwrap();
    assert!(header.starts_with("method,alpha,mean_power,se_power,mean_fdp,se_fdp\n"));
    // 4 methods x 9 levels
    assert_eq!(header.lines().count(), 37);
}

#[test]
fn simulate_requires_seed_and_valid_grid() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().display().to_string();
    assert_eq!(accumtest(&["simulate", "--out-dir", &d]).status.code(), Some(2));
    let o = accumtest(&["simulate", "--seed", "1", "--alphas", "0.1,1.2", "--trials", "1", "--out-dir", &d]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("1.2"));
}

#[test]
fn no_signal_gives_near_zero_power() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().display().to_string();
    let o = accumtest(&["simulate", "--seed", "5", "--mu2", "0", "--trials", "10", "--out-dir", &d]);
    assert!(o.status.success());
    let text = fs::read_to_string(dir.path().join("power.csv")).unwrap();
    for line in text.lines().skip(1) {
        let power: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert!(power < 0.1, "{line}");
    }
}

fn null_matrix(genes: usize, seed: u64) -> String {
    let mut rng = stream(seed, 0);
    let mut s = String::from("gene_id,C1,C2,C3,L1,L2,L3,H1,H2,H3\n");
    for g in 0..genes {
        s.push_str(&format!("g{g}"));
        for _ in 0..9 {
            s.push_str(&format!(",{}", rng.random::<f64>()));
        }
        s.push('\n');
    }
    s
}

fn discoveries(text: &str) -> Vec<(String, f64, usize)> {
    text.lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].to_string(), f[1].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect()
}

#[test]
fn dosage_on_null_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "null.csv", &null_matrix(500, 4));
    let o = accumtest(&["dosage", "--input", &input, "--alphas", "0,0.1,0.2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = discoveries(&stdout(&o));
    assert_eq!(rows.len(), 8 * 3);
    for chunk in rows.chunks(3) {
        assert_eq!(chunk[0].2, 0, "{chunk:?}");
        assert!(chunk[0].2 <= chunk[1].2 && chunk[1].2 <= chunk[2].2, "{chunk:?}");
    }
    // thread count never changes the table
    let one = accumtest(&["dosage", "--input", &input, "--alphas", "0.1,0.2", "--threads", "1"]);
    let many = accumtest(&["dosage", "--input", &input, "--alphas", "0.1,0.2", "--threads", "4"]);
    assert_eq!(one.stdout, many.stdout);
}

#[test]
fn dosage_reports_missing_group_and_bad_cells() {
    let dir = tempfile::tempdir().unwrap();
    let no_low = write(dir.path(), "nolow.csv", "gene_id,C1,C2,H1,H2\ng,1,2,3,4\n");
    let o = accumtest(&["dosage", "--input", &no_low]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("low"));
    let bad = write(dir.path(), "bad.csv", "gene_id,C1,C2,L1,L2,H1,H2\ng,1,2,3,oops,5,6\n");
    let o = accumtest(&["dosage", "--input", &bad]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("row 2") && err.contains("L2"), "{err}");
}

#[test]
fn power_and_validate_commands() {
    let o = accumtest(&["power", "--curve", "f:0,0.5;1,0.3", "--alpha", "0.8", "--mu", "0.5"]);
    let text = stdout(&o);
    let value = |key: &str| -> f64 { text.lines().find_map(|l| l.strip_prefix(key)).unwrap().parse().unwrap() };
    assert!((value("T=") - 0.5).abs() < 1e-12, "{text}");
    assert!((value("power=") - 2.0 / 3.0).abs() < 1e-12, "{text}");
    let bad = accumtest(&["power", "--curve", "f:0,0.5;1,0", "--alpha", "0.5", "--mu", "0.5"]);
    assert_eq!(bad.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("t*f(t)"));
    let v = accumtest(&["validate"]);
    assert!(v.status.success());
    assert!(stdout(&v).lines().all(|l| !l.starts_with("FAIL")));
}
