//! End-to-end runs of the `qlogad` binary.

use std::path::Path;
use std::process::Command;

use qlogad::logpipe::{generate_bgl, SyntheticConfig};

fn qlogad(args: &[&str]) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_qlogad"))
        .args(args)
        .env("RUST_LOG", "warn")
        .env("QLOGAD_THREADS", "1")
        .output()
        .expect("binary runs");
    assert!(
        out.status.success(),
        "qlogad {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn parse_train_eval_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("small.log");
    let log = generate_bgl(&SyntheticConfig {
        windows: 60,
        ..SyntheticConfig::default()
    })
    .unwrap();
    std::fs::write(&raw, log.to_text()).unwrap();

    let csv = dir.path().join("small.csv");
    let out = qlogad(&["parse", arg(&raw), "-o", arg(&csv)]);
    assert!(out.contains("6000 lines"), "{out}");
    assert!(csv.exists());

    let cfg = dir.path().join("deeplog.cfg");
    std::fs::write(
        &cfg,
        "name = cli-deeplog\nmodel = deeplog\nvariant = classical\ntop_g = 1\n\
         synthetic_windows = 60\nepochs = 3\nbatch_size = 64\nlr = 0.01\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = qlogad(&["train", arg(&cfg), "-o", arg(&out_dir)]);
    assert!(out.contains("F1="), "{out}");
    let ckpt = out_dir.join("cli-deeplog.ckpt");
    for f in [
        "results.csv",
        "results.txt",
        "loss_cli-deeplog.csv",
        "cli-deeplog.ckpt",
    ] {
        assert!(out_dir.join(f).exists(), "missing {f}");
    }

    let out = qlogad(&["eval", arg(&ckpt), arg(&raw)]);
    assert!(out.contains("tp=") && out.contains("F1="), "{out}");
    let out = qlogad(&["eval", arg(&ckpt), arg(&csv)]);
    assert!(out.contains("F1="), "{out}");

    let out = qlogad(&["report-params", arg(&ckpt)]);
    assert!(
        out.starts_with("DeepLog: ") && out.contains(" bit"),
        "{out}"
    );
}

#[test]
fn bad_input_fails_cleanly() {
    let out = Command::new(env!("CARGO_BIN_EXE_qlogad"))
        .args(["experiment", "rq9"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}
