mod common;

use std::fs;
use std::net::UdpSocket;
use std::path::Path;
use std::process::Command;
use std::time::Duration;

use wfslab::cli::run;
use wfslab::osc::{decode, OscArg};

fn wfslab(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(
        std::iter::once("wfslab").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_is_idempotent() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(wfslab(&["generate", "--out", s(&a)]).0, 0);
    assert_eq!(wfslab(&["generate", "--out", s(&b)]).0, 0);
    let ta = common::tree(&a);
    assert_eq!(ta.len(), 6);
    assert_eq!(ta, common::tree(&b));
    let c = tmp.path().join("c");
    wfslab(&[
        "--seed",
        "7",
        "generate",
        "--out",
        s(&c),
        "--participants",
        "2",
    ]);
    assert!(c.join("P01_7.csv").is_file() && c.join("P02_8.csv").is_file());
}

#[test]
fn config_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.ini");
    fs::write(&cfg, "[cohort]\nparticipantz = 6\n").unwrap();
    let (code, _, err) = wfslab(&["--config", s(&cfg), "generate", "--out", s(tmp.path())]);
    assert_eq!(code, 2);
    assert!(err.contains("bad.ini:2:"), "{err}");
    fs::write(&cfg, "[array]\nspeakers_per_side = 1\n").unwrap();
    let (code, _, _) = wfslab(&["--config", s(&cfg), "field", "--source", "0", "0.3"]);
    assert_eq!(code, 2);
    let (code, _, _) = wfslab(&["--config", s(&tmp.path().join("missing.ini")), "generate"]);
    assert_eq!(code, 2);
}

#[test]
fn simulate_and_analyze() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("small.ini");
    fs::write(
        &cfg,
        "[cohort]\nparticipants = 2\nwfs_first = 1\nbase_seed = 40\n",
    )
    .unwrap();
    let logs = tmp.path().join("logs");
    let (code, out, err) = wfslab(&[
        "--config",
        s(&cfg),
        "simulate",
        "--out",
        s(&logs),
        "--tutorial",
    ]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(out.lines().count(), 2);
    assert!(
        out.starts_with("P01 seed=40 first=wfs trials=54 wfs="),
        "{out}"
    );
    assert!(logs.join("P02_41").join("tutorial.csv").is_file());

    let (x, y) = (tmp.path().join("x"), tmp.path().join("y"));
    assert_eq!(
        wfslab(&[
            "analyze",
            "--logs",
            s(&logs),
            "--out",
            s(&x),
            "--k",
            "5",
            "--bins",
            "20"
        ])
        .0,
        0
    );
    assert_eq!(
        wfslab(&[
            "analyze",
            "--logs",
            s(&logs),
            "--out",
            s(&y),
            "--k",
            "5",
            "--bins",
            "20"
        ])
        .0,
        0
    );
    assert_eq!(common::tree(&x), common::tree(&y));
    assert!(fs::read_to_string(x.join("knn_wfs.csv"))
        .unwrap()
        .contains("# bins=20,20"));
}

#[test]
fn field_writes_both_modes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("f");
    let (code, stdout, err) = wfslab(&[
        "field",
        "--source",
        "0.2",
        "-0.3",
        "--listener",
        "0.5",
        "0.5",
        "--bins",
        "12",
        "--out",
        s(&out),
    ]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(stdout.lines().count(), 2);
    for mode in ["static", "user_dependent"] {
        let text = fs::read_to_string(out.join(format!("error_{mode}.csv"))).unwrap();
        assert!(text.contains("# bounds=") && text.contains("# bins=12,12"));
        assert_eq!(
            text.lines().filter(|l| !l.starts_with('#')).count(),
            1 + 144
        );
        assert!(out.join(format!("speakers_{mode}.csv")).is_file());
    }
}

#[test]
fn osc_send_over_loopback() {
    let rx = UdpSocket::bind("127.0.0.1:0").unwrap();
    rx.set_read_timeout(Some(Duration::from_secs(5))).unwrap();
    let endpoint = rx.local_addr().unwrap().to_string();
    let (code, out, err) = wfslab(&[
        "osc-send",
        "--endpoint",
        &endpoint,
        "trajectory",
        "--id",
        "3",
        "0",
        "0",
        "1",
        "-1",
        "2.5",
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("sent 52 bytes"), "{out}");
    let mut buf = [0u8; 256];
    let n = rx.recv(&mut buf).unwrap();
    let m = decode(&buf[..n]).unwrap();
    assert_eq!(m.address, "/source/3/trajectory");
    assert_eq!(m.args[3], OscArg::Float(-1.0));
    assert_eq!(m.args[4], OscArg::Float(2.5));
}

#[test]
fn osc_schema_file_and_dry_run() {
    let tmp = tempfile::tempdir().unwrap();
    let schema = tmp.path().join("schema.txt");
    fs::write(&schema, "position = /source/{id}/xy\n").unwrap();
    let (code, out, _) = wfslab(&[
        "osc-send",
        "--dry-run",
        "--schema",
        s(&schema),
        "position",
        "1",
        "2",
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("/source/1/xy (28 bytes)"));
    assert!(out.contains(
        "2f 73 6f 75 72 63 65 2f 31 2f 78 79 00 00 00 00 2c 66 66 00 3f 80 00 00 40 00 00 00"
    ));
    assert_eq!(
        wfslab(&["osc-send", "--endpoint", "no-port", "position", "1", "2"]).0,
        2
    );
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_wfslab");
    let tmp = tempfile::tempdir().unwrap();
    let st = Command::new(bin)
        .args(["analyze", "--logs", s(tmp.path())])
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(1));
    let st = Command::new(bin)
        .args(["osc-send", "--endpoint", ":::", "position", "1", "2"])
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(2));
    let st = Command::new(bin)
        .args(["osc-send", "--dry-run", "position", "1", "2"])
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(0));
}
