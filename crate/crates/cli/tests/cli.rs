use std::fs;
use std::process::{Command, Output};

fn vftanh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vftanh"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn gen_lut_writes_four_sixteen_line_files() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("rom");
    let out = vftanh(&[
        "gen-lut",
        "--in",
        "s3.12",
        "--group",
        "4",
        "--shuffle",
        "--lut-bits",
        "18",
        "--dir",
        target.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for j in 0..4 {
        let text = fs::read_to_string(target.join(format!("lut{j}.memh"))).unwrap();
        assert_eq!(text.lines().count(), 16);
        assert!(text.lines().all(|l| l.len() == 5));
    }
    let manifest = fs::read_to_string(target.join("manifest.txt")).unwrap();
    assert_eq!(manifest.lines().next(), Some("0 0,7,8,15 u0.18"));
    assert!(!target.join("lut4.memh").exists());
}

#[test]
fn gen_lut_without_shuffle_groups_consecutive_bits() {
    let dir = tempfile::tempdir().unwrap();
    let out = vftanh(&["gen-lut", "--no-shuffle", "--dir", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let manifest = fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
    assert_eq!(manifest.lines().next(), Some("0 0,1,2,3 u0.18"));
}

#[test]
fn invalid_config_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("rom");
    let out = vftanh(&["gen-lut", "--group", "3", "--dir", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!target.exists());
}

#[test]
fn eval_zero_traces_to_zero() {
    let out = vftanh(&["eval", "x=0"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let last = text.lines().last().unwrap();
    assert!(last.starts_with("output") && last.contains(" 0 (s.15:0x0)"), "{last}");
}

#[test]
fn eval_prints_every_stage() {
    let out = vftanh(&["eval", "x=-1.3", "--sub", "ones"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for label in [
        "sign       -",
        "lut0",
        "lut3",
        "f ",
        "denom/2",
        "seed",
        "nr3",
        "output     -0.8617",
    ] {
        assert!(text.contains(label), "missing {label}:\n{text}");
    }
    assert!(text.starts_with("s3.12->s.15"));
}

#[test]
fn eval_out_of_range_is_a_domain_error() {
    let out = vftanh(&["eval", "x=9"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("outside the range"));
}

#[test]
fn table2_prints_six_rows() {
    let out = vftanh(&[
        "table2",
        "--in",
        "s3.12",
        "--out",
        "s.15",
        "--lut-bits",
        "18",
        "--mult-bits",
        "16",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 6);
    let errors: Vec<f64> = rows
        .iter()
        .map(|r| r.split_whitespace().rev().nth(1).unwrap().parse().unwrap())
        .collect();
    let targets = [4.44e-5, 4.44e-5, 2.77e-4, 2.56e-4, 4.32e-5, 4.44e-5];
    for (e, t) in errors.iter().zip(targets) {
        assert!(*e >= t / 2.0 && *e <= t * 2.0, "{e} vs {t}");
    }
}

#[test]
fn csv_report_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("small.csv");
    let out = vftanh(&[
        "sweep",
        "--in",
        "s3.5",
        "--out",
        "s.7",
        "--lut-bits",
        "10",
        "--mult-bits",
        "8",
        "--threshold",
        "-3",
        "--format",
        "csv",
        "-o",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("config,max_abs_error,mean_abs_error,max_error_ulps,worst_input_hex,samples")
    );
    assert!(lines.next().unwrap().ends_with(",512"));
}

#[test]
fn compare_lists_four_methods() {
    let out = vftanh(&[
        "compare",
        "--in",
        "s3.5",
        "--out",
        "s.7",
        "--lut-bits",
        "10",
        "--mult-bits",
        "8",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 5);
    assert!(text.contains("published") && text.contains("pwl knots=") && text.contains("taylor terms=3"));
}

#[test]
fn malformed_format_is_a_usage_error() {
    let out = vftanh(&["sweep", "--in", "x9.9"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("x9.9"));
}

#[test]
fn unknown_subcommand_fails() {
    let out = vftanh(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn identical_argv_gives_identical_output() {
    let args = ["compare", "--variant", "published", "--jobs", "3"];
    let a = vftanh(&args);
    let b = vftanh(&args);
    let c = vftanh(&["compare", "--variant", "published", "--jobs", "1"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);

    let dir = tempfile::tempdir().unwrap();
    let (d1, d2) = (dir.path().join("a"), dir.path().join("b"));
    vftanh(&["gen-lut", "--dir", d1.to_str().unwrap()]);
    vftanh(&["gen-lut", "--dir", d2.to_str().unwrap()]);
    for name in ["lut0.memh", "lut3.memh", "manifest.txt"] {
        assert_eq!(fs::read(d1.join(name)).unwrap(), fs::read(d2.join(name)).unwrap());
    }
}
