use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn wpcn(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wpcn"))
        .current_dir(dir)
        .env_remove("WPCN_SEED")
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn simulate_writes_trace_channels_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = wpcn(dir.path(), &["simulate", "--epochs", "300", "--seed", "7", "--out", "run"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let trace = fs::read_to_string(dir.path().join("run/trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 301);
    assert!(trace.starts_with("epoch,p0,tau0,tau_1"));
    let summary = fs::read_to_string(dir.path().join("run/summary.csv")).unwrap();
    assert!(summary.lines().nth(1).unwrap().starts_with("pf,5,"));
}

#[test]
fn same_seed_same_output_and_replayed_channels_match() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a", "b"] {
        let o = wpcn(dir.path(), &["simulate", "--epochs", "200", "--seed", "3", "--out", name]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let read = |p: &str| fs::read_to_string(dir.path().join(p)).unwrap();
    assert_eq!(read("a/trace.csv"), read("b/trace.csv"));

    let o = wpcn(
        dir.path(),
        &["simulate", "--channels", "a/channels.csv", "--seed", "99", "--out", "c"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(read("a/trace.csv"), read("c/trace.csv"));
}

#[test]
fn config_file_sets_network() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("net.cfg"), "# two users\nK = 2\nP_avg = 0.5\np_c = 1e-5\n").unwrap();
    let o = wpcn(
        dir.path(),
        &["simulate", "--config", "net.cfg", "--epochs", "100", "--mode", "maxsum"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let stdout = String::from_utf8(o.stdout).unwrap();
    let row = stdout.lines().nth(1).unwrap();
    assert!(row.starts_with("maxsum,2,1e-5,0.5,100,"), "{row}");
}

#[test]
fn bad_input_exits_nonzero_with_message() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.cfg"), "K = 2\ncolour = red\n").unwrap();
    let o = wpcn(dir.path(), &["simulate", "--config", "bad.cfg", "--epochs", "10"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));

    fs::write(dir.path().join("neg.cfg"), "P_avg = -1\n").unwrap();
    let o = wpcn(dir.path(), &["simulate", "--config", "neg.cfg", "--epochs", "10"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("P_avg"), "{}", stderr(&o));

    let o = wpcn(dir.path(), &["simulate", "--channels", "missing.csv"]);
    assert!(!o.status.success());
    let o = wpcn(dir.path(), &["simulate", "--epochs", "0"]);
    assert!(!o.status.success());
}

#[test]
fn sweep_writes_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("sweep.cfg"), "values = 0, 2e-5\nK = 3\n").unwrap();
    let o = wpcn(
        dir.path(),
        &["fig1", "--config", "sweep.cfg", "--epochs", "200", "--seed", "1", "--mode", "pf"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("out/fig1.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "p_c,K,mode,sum_rate,jain");
    assert_eq!(csv.lines().count(), 3);
    let svg = fs::read_to_string(dir.path().join("out/fig1.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
}

#[test]
fn oracle_reports_pass_lines() {
    let dir = tempfile::tempdir().unwrap();
    let o = wpcn(
        dir.path(),
        &["oracle", "--instances", "2", "--kkt-epochs", "20", "--pairs", "50"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 3, "{stdout}");
}
