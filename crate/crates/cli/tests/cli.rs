//! End-to-end runs of the `sens` binary.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn sens(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sens")).args(args).output().unwrap()
}

fn sens_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_sens"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn numbers(line: &str) -> Vec<f64> {
    line.split(',').map(|t| t.trim().parse().unwrap()).collect()
}

#[test]
fn neyer_batch_matches_golden_table() {
    let dir = tempfile::tempdir().unwrap();
    let y = golden("ny_y.txt");
    let o = sens(&[
        "batch", "--mlo", ".6", "--mhi", "1.4", "--sg", ".1", "--test", "2", "--reso", ".01", "--n2", "9", "--n3", "0",
        "-Y", p(&y), "--out-dir", p(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let got = std::fs::read_to_string(dir.path().join("runs.txt")).unwrap();
    let want = std::fs::read_to_string(golden("ny_runs.txt")).unwrap();
    assert_eq!(got, want);
    // Row 11 and the last row, as published.
    assert!(got.contains("\n11, 4.28, 0, 1, 4.28, 4.280593, 4.28, B4\n"));
    assert!(got.contains("\n20, 6.74, 1, 1, 6.74, 6.736082, 6.74, II2\n"));
}

#[test]
fn inline_lists_equal_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = sens(&[
        "batch", "--mlo", ".6", "--mhi", "1.4", "--sg", ".1", "--test", "2", "--reso", ".01", "--n2", "9", "--n3", "0",
        "-Y", "0,0,0,0,0,1,0,0,0,0,0,0,1,0,1,0,1,1,1,1", "--out-dir", p(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let want = std::fs::read_to_string(golden("ny_runs.txt")).unwrap();
    assert_eq!(stdout(&o).lines().filter(|l| !l.starts_with("Phase")).collect::<Vec<_>>(), want.lines().collect::<Vec<_>>());
}

#[test]
fn three_pod_batch_matches_golden_and_writes_svg() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("h.svg");
    let o = sens(&[
        "batch", "--mlo", "0", "--mhi", "22", "--sg", "3", "--reso", ".0001", "--n2", "6", "--n3", "15", "--p", ".9",
        "--lam", "1", "-Y", p(&golden("wt_y.txt")), "-X", p(&golden("wt_x.txt")), "--out-dir", p(dir.path()),
        "--svg", p(&svg),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let got = std::fs::read_to_string(dir.path().join("runs.txt")).unwrap();
    assert_eq!(got, std::fs::read_to_string(golden("wt_runs.txt")).unwrap());
    let log = std::fs::read_to_string(dir.path().join("session.jsonl")).unwrap();
    assert_eq!(log, std::fs::read_to_string(golden("wt_session.jsonl")).unwrap());
    let svg = std::fs::read_to_string(svg).unwrap();
    assert!(svg.starts_with("<svg") && svg.matches("class=\"trial\"").count() == 30);
}

#[test]
fn fm_limits_about_a_stress() {
    let o = sens(&["lims", "--session", p(&golden("wt_session.jsonl")), "--method", "fm", "--conf", ".95", "--Q", "8.5"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let row = numbers(out.lines().nth(2).unwrap());
    let want = [6.519019, 8.5, 10.48098, 0.0, 0.036882, 0.20788];
    for (g, w) in row.iter().zip(want) {
        assert!((g - w).abs() < 1e-4, "{row:?}");
    }
}

#[test]
fn lims_defaults_to_fifteen_probabilities() {
    let o = sens(&["lims", "--session", p(&golden("wt_session.jsonl")), "--method", "glm"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 17);
}

#[test]
fn console_minus_one_suspends_by_user() {
    let dir = tempfile::tempdir().unwrap();
    let (s, t) = (dir.path().join("s.jsonl"), dir.path().join("t.txt"));
    let o = sens_stdin(&["run", "--mlo", "0", "--mhi", "22", "--sg", "3", "--session", p(&s), "--table", p(&t)], "-1\n");
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).starts_with("1. Test at X ~ 5.5. Enter X & R: "));
    assert!(t.exists() && s.exists());
}

#[test]
fn console_fix_and_resume() {
    let dir = tempfile::tempdir().unwrap();
    let (s, t) = (dir.path().join("s.jsonl"), dir.path().join("t.txt"));
    let base = ["--session", p(&s), "--table", p(&t)];
    let mut args = vec!["run", "--mlo", ".6", "--mhi", "1.4", "--sg", ".1", "--test", "2", "--reso", ".01"];
    args.extend(base);
    // Enter five pairs (the fifth with the wrong response), then stop.
    let o = sens_stdin(&args, "1 0\n1.2 0\n1.4 0\n0\n1\n");
    assert_eq!(o.status.code(), Some(3), "{}", stdout(&o));
    assert!(stdout(&o).contains("(end of input)"));

    let o = sens(&["fix", "--session", p(&s), "-n", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("4 runs kept"), "{}", stdout(&o));

    let mut args = vec!["resume"];
    args.extend(base);
    let o = sens_stdin(&args, "2.6 0\n");
    assert!(stdout(&o).starts_with("5. Test at X ~ 2.6."), "{}", stdout(&o));
    let o = sens(&["export", "--session", p(&s)]);
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[4], "4, 1.8, 0, 1, 1.8, 1.8, 1.8, B1");
    assert_eq!(lines[5], "5, 2.6, 0, 1, 2.6, 2.6, 2.6, B1");
}

#[test]
fn degenerate_batch_exits_with_degeneracy_code() {
    let dir = tempfile::tempdir().unwrap();
    let y = std::fs::read_to_string(golden("wt_y.txt")).unwrap();
    let y: Vec<&str> = y.split_whitespace().skip(1).collect();
    let o = sens(&[
        "batch", "--mlo", "0", "--mhi", "22", "--sg", "3", "--reso", ".0001", "--n2", "6", "--n3", "15", "--p", ".9",
        "--lam", "1", "-Y", &y.join(","), "--out-dir", p(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stdout(&o).contains("(11, Inf)"));
    let o = sens(&["lims", "--session", p(&dir.path().join("session.jsonl"))]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn bad_arguments_exit_2() {
    assert_eq!(sens(&["batch", "--mlo", "0"]).status.code(), Some(2));
    assert_eq!(sens(&["batch", "--mlo", "5", "--mhi", "1", "--sg", "1", "-Y", "0,1"]).status.code(), Some(2));
    assert_eq!(sens(&["batch", "--mlo", "0", "--mhi", "1", "--sg", "1", "--test", "9", "-Y", "0"]).status.code(), Some(2));
    assert_eq!(sens(&["lims", "--session", "/nonexistent/s.jsonl"]).status.code(), Some(2));
    assert_eq!(sens(&["plot", "--session", p(&golden("wt_session.jsonl")), "--kind", "nine"]).status.code(), Some(2));
}

#[test]
fn plot_series_json_and_svg() {
    let s = golden("wt_session.jsonl");
    let o = sens(&["plot", "--session", p(&s), "--kind", "2", "--P", ".9", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["kind"], "MLE_TRAJECTORY");
    let o = sens(&["plot", "--session", p(&s), "--kind", "response-curve-ci", "--J", "15"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("<svg"));
}

#[test]
fn seeded_simulation_is_repeatable() {
    let args = [
        "sim", "--mlo", "0", "--mhi", "22", "--sg", "3", "--n2", "6", "--n3", "15", "--p", ".9", "--lam", "1", "--reso",
        ".01", "--iseed", "42983",
    ];
    let a = sens(&args);
    let b = sens(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&b));
    assert!(stdout(&a).starts_with("(mu_t, sig_t) = (11, 3) + (0, 0), i_s = 42983\n"));
    let mut sweep = args.to_vec();
    sweep.extend(["--trials", "5"]);
    let o = sens(&sweep);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with(char::is_numeric)).count(), 5);
}
