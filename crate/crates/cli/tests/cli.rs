use std::path::Path;
use std::process::{Command, Output, Stdio};
use std::io::Write;

fn partlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_partlab")).args(args).output().unwrap()
}

fn spec(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn column(out: &[u8], idx: usize) -> Vec<String> {
    csv::Reader::from_reader(out).records().map(|r| r.unwrap()[idx].to_string()).collect()
}

#[test]
fn coeffs_partition_numbers_and_zero_order() {
    let dir = tempfile::tempdir().unwrap();
    let s = spec(dir.path(), "ip.spec", "family=multiset\ngenerator=integer_partitions\np=1\n");
    let out = partlab(&["coeffs", "--spec", &s, "--N", "10"]);
    assert!(out.status.success());
    assert_eq!(column(&out.stdout, 1), ["1", "1", "2", "3", "5", "7", "11", "15", "22", "30", "42"]);
    let out = partlab(&["coeffs", "--spec", &s, "--N", "0"]);
    assert_eq!(column(&out.stdout, 1), ["1"]);
}

#[test]
fn coeffs_float_mode_tracks_exact() {
    let dir = tempfile::tempdir().unwrap();
    let s = spec(dir.path(), "ew.spec", "family=assembly\ngenerator=ewens(3/2)\n");
    let exact = partlab(&["coeffs", "--spec", &s, "--N", "30", "--l", "2"]);
    let float = partlab(&["coeffs", "--spec", &s, "--N", "30", "--l", "2", "--mode", "float"]);
    for (a, b) in column(&exact.stdout, 2).iter().zip(column(&float.stdout, 2)) {
        let (a, b): (f64, f64) = (a.parse().unwrap(), b.parse().unwrap());
        assert!((a - b).abs() <= 1e-9 * a.abs());
    }
}

#[test]
fn classify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ew = spec(dir.path(), "ew.spec", "family=assembly\ngenerator=ewens(2)\n");
    let out = partlab(&["classify", "--spec", &ew]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("verdict: convergent"));
    let pp = spec(dir.path(), "pp.spec", "family=multiset\ngenerator=plane_partitions\np=1/2\n");
    assert_eq!(partlab(&["classify", "--spec", &pp]).status.code(), Some(3));
    let empty = spec(dir.path(), "empty.spec", "");
    assert_eq!(partlab(&["classify", "--spec", &empty]).status.code(), Some(2));
}

#[test]
fn spec_errors_are_positioned_on_stderr() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_partlab"))
        .args(["coeffs", "--spec", "-"])
        .stdin(Stdio::piped())
        .stderr(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"family=multiset\ngenerator=integer_partitions\np=3/2\n").unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("-:3:3:") && err.contains("p must satisfy 0<p<1"), "{err}");

    let dir = tempfile::tempdir().unwrap();
    let s = spec(dir.path(), "typo.spec", "family=assembly\ngenerator=permutations\nwindw=3\n");
    assert_eq!(partlab(&["coeffs", "--spec", &s, "--N", "3"]).status.code(), Some(2));
    let out = partlab(&["coeffs", "--spec", &s, "--N", "3", "--lenient"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains(":3:1:"));
}

#[test]
fn fdd_tables_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let s = spec(dir.path(), "u.spec", "family=multiset\ngenerator=integer_partitions\np=1/2\n");
    let out = partlab(&["fdd", "--spec", &s, "--n", "3", "--l", "3"]);
    assert!(out.status.success());
    // Uniform on the three partitions of 3.
    assert_eq!(column(&out.stdout, 3), ["1/3", "1/3", "1/3"]);
    let out = partlab(&["fdd", "--spec", &s, "--n", "3", "--prefix", "1,1"]);
    assert_eq!(column(&out.stdout, 1), ["1/3"]);
    assert_eq!(partlab(&["fdd", "--spec", &s, "--n", "3", "--l", "4"]).status.code(), Some(2));
}

#[test]
fn limit_and_tv_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let s = spec(dir.path(), "ew.spec", "family=assembly\ngenerator=ewens(2)\n");
    let out_dir = dir.path().join("lim");
    let out = partlab(&["limit", "--spec", &s, "--rho", "1", "--l", "2", "--tv", "10,20,40", "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let tv: Vec<f64> = column(&std::fs::read(out_dir.join("tv.csv")).unwrap(), 1).iter().map(|v| v.parse().unwrap()).collect();
    assert!(tv[2] < tv[1] && tv[1] < tv[0]);
    let manifest = std::fs::read_to_string(out_dir.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"limit.csv\"") && manifest.contains("\"tv.csv\""));
}

#[test]
fn verify_all_presets_and_limits() {
    let out = partlab(&["verify", "--all-presets", "--n", "15"]);
    assert!(out.status.success());
    assert!(!String::from_utf8_lossy(&out.stdout).contains(",fail,"));
    assert_eq!(partlab(&["verify", "--all-presets", "--n", "41"]).status.code(), Some(2));
}

#[test]
fn cfp_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let s = spec(dir.path(), "p.spec", "family=assembly\ngenerator=permutations\n[cfp]\nn=5\nt_max=200\nseed=4\n");
    assert!(partlab(&["cfp", "balance", "--spec", &s]).status.success());
    let st = partlab(&["cfp", "stationary", "--spec", &s, "--n", "3"]);
    assert_eq!(column(&st.stdout, 1), ["1/6", "1/2", "1/3"]);
    assert_eq!(partlab(&["cfp", "nonsense", "--spec", &s]).status.code(), Some(2));

    let run = |name: &str| {
        let d = dir.path().join(name);
        assert!(partlab(&["cfp", "simulate", "--spec", &s, "--out", d.to_str().unwrap()]).status.success());
        let files: Vec<String> = std::fs::read_dir(&d).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
        assert!(files.contains(&"manifest.json".to_string()));
        (std::fs::read(d.join("occupation.csv")).unwrap(), std::fs::read(d.join("histogram.csv")).unwrap())
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn plots() {
    let dir = tempfile::tempdir().unwrap();
    let s = spec(dir.path(), "osc.spec", "family=assembly\ngenerator=oscillating_demo\nN=60\nwindow=10\n");
    let out_dir = dir.path().join("cls");
    partlab(&["classify", "--spec", &s, "--out", out_dir.to_str().unwrap()]);
    let svg = dir.path().join("r.svg");
    let ok = partlab(&[
        "plot", "--csv", out_dir.join("ratios_c.csv").to_str().unwrap(), "--kind", "ratios",
        "--band", "0.25", "--band", "1", "--out", svg.to_str().unwrap(),
    ]);
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stderr));
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));

    let empty = dir.path().join("e.csv");
    std::fs::write(&empty, "n,tv\n").unwrap();
    assert_eq!(partlab(&["plot", "--csv", empty.to_str().unwrap(), "--kind", "tv", "--out", svg.to_str().unwrap()]).status.code(), Some(2));
    let one = dir.path().join("o.csv");
    std::fs::write(&one, "n,tv\n10,0.5\n").unwrap();
    assert!(partlab(&["plot", "--csv", one.to_str().unwrap(), "--kind", "tv", "--out", svg.to_str().unwrap()]).status.success());
}
