use std::path::Path;
use std::process::{Command, Output};

use fastjacobi::vecio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fastjacobi")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

/// The number following `key` in `text`.
fn reported(text: &str, key: &str) -> f64 {
    let rest = &text[text.find(key).unwrap_or_else(|| panic!("{key:?} missing from {text:?}")) + key.len()..];
    rest.split_whitespace().next().unwrap().trim_end_matches(',').parse().unwrap()
}

fn build_phase(dir: &Path, name: &str, a: &str, b: &str, nmax: usize) -> String {
    let path = dir.join(name).to_str().unwrap().to_owned();
    let out = run(&["build-phase", "-a", a, "-b", b, "--nmax", &nmax.to_string(), "-o", &path]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    path
}

#[test]
fn build_phase_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let p1 = build_phase(dir.path(), "a.fjph", "-0.25", "0.3333333333333333", 1024);
    let p2 = build_phase(dir.path(), "b.fjph", "-0.25", "0.3333333333333333", 1024);
    let (x, y) = (std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    assert_eq!(x, y);
    assert_eq!(&x[..4], b"FJPH");
    assert!(x.len() > 100_000 && x.len() < 2_000_000);

    let out = run(&["build-phase", "-a", "0", "-b", "0", "--nmax", "20", "-o", dir.path().join("c").to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let out = run(&["build-phase", "-a", "0.7", "-b", "0", "--nmax", "100", "-o", dir.path().join("c").to_str().unwrap()]);
    assert_eq!(code(&out), 2);
}

#[test]
fn eval_reports_errors_and_flags_rows() {
    let dir = tempfile::tempdir().unwrap();
    let phase = build_phase(dir.path(), "p.fjph", "-0.25", "0.3333333333333333", 1024);

    let out = run(&["eval", "--phase", &phase, "--random", "200", "--seed", "7", "--compare-recurrence"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).lines().count(), 201);
    assert!(reported(&stderr(&out), "max error:") <= 5e-11);

    let out = run(&["eval", "--phase", &phase, "--nu", "0", "--t", "0.5,1.0,4.0", "--compare-recurrence"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "t,nu,value,reference,abs_error,status");
    assert!(rows[1].ends_with(",ok") && rows[2].ends_with(",ok"));
    assert!(rows[3].ends_with(",out_of_range"));
    assert!(reported(&stderr(&out), "max error:") <= 1e-15);

    let out = run(&["eval", "--phase", &phase, "--nu", "40"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "t,nu,value,status\n");

    let out = run(&["eval", "--phase", &phase, "--nu", "300", "--x", "-0.5,0.25,0.9", "--compare-recurrence"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).starts_with("x,nu,"));
    for row in stdout(&out).lines().skip(1) {
        let f: Vec<f64> = row.split(',').take(4).map(|s| s.parse().unwrap()).collect();
        assert!((f[2] - f[3]).abs() <= 1e-11 * f[3].abs().max(1.0), "{row}");
    }
}

#[test]
fn quad_csv_output() {
    let out = run(&["quad", "-a", "0", "-b", "0", "-n", "2"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "# gauss-jacobi a=0 b=0 n=2 kind=standard");
    assert_eq!(rows[1], "node,weight");
    let r = 1.0 / 3f64.sqrt();
    for (row, x) in rows[2..].iter().zip([-r, r]) {
        let (node, weight) = row.split_once(',').unwrap();
        // 17 significant digits
        assert_eq!(node.split_once('e').unwrap().0.trim_start_matches('-').len(), 18);
        assert!((node.parse::<f64>().unwrap() - x).abs() <= 1e-15);
        assert!((weight.parse::<f64>().unwrap() - 1.0).abs() <= 1e-15);
    }

    let out = run(&["quad", "-a", "-0.5", "-b", "-0.5", "-n", "64", "--kind", "modified"]);
    let text = stdout(&out);
    assert!(text.starts_with("# gauss-jacobi a=-0.5 b=-0.5 n=64 kind=modified\n"));
    for (k, row) in text.lines().skip(2).enumerate() {
        let t: f64 = row.split_once(',').unwrap().0.parse().unwrap();
        assert!((t - (2 * k + 1) as f64 * std::f64::consts::PI / 128.0).abs() <= 1e-14);
    }

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rule.csv");
    let out = run(&["quad", "-a", "0", "-b", "-0.4", "-n", "1024", "--verify", "-o", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(reported(&stderr(&out), "max relative weight error:") <= 1e-12);
    assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 1026);

    assert_eq!(code(&run(&["quad", "-a", "-1.5", "-b", "0", "-n", "10"])), 2);
    assert_eq!(code(&run(&["quad", "-a", "0", "-b", "0", "-n", "0"])), 2);
    assert_eq!(code(&run(&["quad", "-a", "0", "-b", "0"])), 2);
}

#[test]
fn transform_files() {
    let dir = tempfile::tempdir().unwrap();
    let phase = build_phase(dir.path(), "p.fjph", "-0.25", "0", 1 << 16);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let path = |s: &str| dir.path().join(s).to_str().unwrap().to_owned();

    let x: Vec<f64> = (0..512).map(|_| rng.random_range(-1.0..1.0)).collect();
    vecio::save_vector(path("x.bin"), &x).unwrap();
    for dir in ["forward", "inverse"] {
        let out = run(&["transform", "--phase", &phase, "--direction", dir, "-i", &path("x.bin"), "-o", &path("y.bin"), "--verify-dense"]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        assert!(reported(&stdout(&out), "max deviation from dense:") <= 1e-11);
        assert_eq!(vecio::load_vector(path("y.bin")).unwrap().len(), 512);
    }

    let n = 1 << 16;
    let alpha: Vec<f64> = (0..n).map(|k| rng.sample::<f64, _>(StandardNormal) / ((k + 1) as f64).powi(2)).collect();
    vecio::save_vector(path("a.bin"), &alpha).unwrap();
    let out = run(&["transform", "--phase", &phase, "-i", &path("a.bin"), "-o", &path("f.bin"), "--round-trip"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(reported(&stdout(&out), "round-trip error:") <= 1e-10);
    let out = run(&["transform", "--phase", &phase, "--direction", "inverse", "-i", &path("f.bin"), "-o", &path("b.bin")]);
    assert_eq!(code(&out), 0);
    let back = vecio::load_vector(path("b.bin")).unwrap();
    assert!(back.iter().zip(&alpha).all(|(p, q)| (p - q).abs() <= 1e-10));

    std::fs::write(path("bad.bin"), [5u8, 0, 0, 0, 0, 0, 0, 0, 1, 2]).unwrap();
    let out = run(&["transform", "--phase", &phase, "-i", &path("bad.bin"), "-o", &path("z.bin")]);
    assert_eq!(code(&out), 2);
    let out = run(&["transform", "--phase", &phase, "-i", &path("x.bin"), "-o", &path("z.bin"), "--eps", "1e-3"]);
    assert_eq!(code(&out), 2);
    let out = run(&["transform", "--phase", &path("missing.fjph"), "-i", &path("x.bin"), "-o", &path("z.bin")]);
    assert_eq!(code(&out), 4);
    std::fs::write(path("junk.fjph"), b"not a phase file").unwrap();
    let out = run(&["transform", "--phase", &path("junk.fjph"), "-i", &path("x.bin"), "-o", &path("z.bin")]);
    assert_eq!(code(&out), 2);
}

#[test]
fn bench_prints_csv() {
    let out = run(&["bench", "--max-n", "1024", "--runs", "1"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("suite,n,median_s,per_item_s"));
    let suites: Vec<&str> = lines.map(|l| l.split(',').next().unwrap()).collect();
    for s in ["construction", "eval", "quad", "transform"] {
        assert!(suites.contains(&s), "{s} missing from {text}");
    }
    let out = run(&["bench", "quad", "--max-n", "1000", "--runs", "3", "--threads", "1"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).lines().count(), 2);
}
