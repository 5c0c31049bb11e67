use std::fs;
use std::process::{Command, Output};

fn rcqme(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rcqme")).args(args).output().unwrap()
}

const SMALL: [&str; 6] = ["--set", "points=4", "--set", "stop=3", "--set", "methods=rcqme:2,bmr,effsb"];

#[test]
fn sweep_writes_csv_and_is_independent_of_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let one = dir.path().join("one.csv");
    let three = dir.path().join("three.csv");
    for (path, workers) in [(&one, "1"), (&three, "3")] {
        let mut args = vec!["sweep", "--preset", "fig4", "--workers", workers, "--output", path.to_str().unwrap()];
        args.extend(SMALL);
        let out = rcqme(&args);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        assert!(String::from_utf8_lossy(&out.stderr).contains("lambda sweep: 4 points"));
    }
    let a = fs::read(&one).unwrap();
    assert_eq!(a, fs::read(&three).unwrap());
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.starts_with("lambda (Delta),J_rcqme_M2 (Delta^2),J_bmr (Delta^2),J_effsb (Delta^2),flags\n"));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# symmetric coupling sweep\nkind = lambda\npoints = 9\nstop = 2\nmethods = bmr\n").unwrap();
    let out = rcqme(&["sweep", "--config", cfg.to_str().unwrap(), "--set", "points=3"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert_eq!(csv.lines().count(), 4, "flag must override the file");
    assert!(csv.lines().last().unwrap().starts_with("2.0000000000000000e0,"));
}

#[test]
fn exit_codes() {
    assert_eq!(rcqme(&["sweep", "--preset", "fig99"]).status.code(), Some(1));
    assert_eq!(rcqme(&["sweep", "--set", "gamma=-1"]).status.code(), Some(1));
    assert_eq!(rcqme(&["sweep", "--config", "/nonexistent/run.cfg"]).status.code(), Some(1));
    let out = rcqme(&["sweep", "--set", "points=2", "--set", "methods=rcqme:7"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stdout).unwrap().contains(",failed,"));
}

#[test]
fn verify_converge_and_eff_params() {
    let out = rcqme(&["verify"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().all(|l| l.starts_with("[PASS]")), "{text}");

    let out = rcqme(&["converge-m", "--set", "lambda=2", "--set", "m_list=2,3"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 3);

    let out = rcqme(&["eff-params", "--set", "points=3", "--tol", "1e-4", "--m-max", "6"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("lambda (Delta),delta_eff (Delta),f_hot (1)"));
}

#[test]
fn debug_dump() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().join("dump");
    let out = rcqme(&[
        "sweep",
        "--set",
        "lambda=1",
        "--set",
        "points=2",
        "--set",
        "methods=bmr",
        "--dump-debug",
        d.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let h = fs::read_to_string(d.join("hamiltonian.txt")).unwrap();
    assert_eq!(h.lines().count(), 8);
    assert_eq!(h.lines().next().unwrap().split(' ').count(), 8);
    for f in ["coupling_hot.txt", "coupling_cold.txt", "singular_values.txt", "rho_re.txt", "rho_im.txt"] {
        assert!(d.join(f).exists(), "{f}");
    }
}
