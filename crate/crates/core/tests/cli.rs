use std::fs;
use std::path::Path;
use std::process::Command;

use rgpo_track::cli::{cmd_plot, parse_csv, CONFIG_USED_FILE, METRICS_FILE};

fn rgpo(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_rgpo"))
        .args(args)
        .env("RGPO_THREADS", "2")
        .output()
        .expect("spawn rgpo")
}

fn run_into(dir: &Path, extra: &[&str]) -> String {
    let out = dir.to_str().unwrap();
    let mut args = vec!["run", "--scenario", "1", "--runs", "2", "--seed", "7", "--out", out];
    args.extend_from_slice(extra);
    let o = rgpo(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    fs::read_to_string(dir.join(METRICS_FILE)).unwrap()
}

#[test]
fn run_is_byte_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let csv_a = run_into(a.path(), &["--tracker", "naive"]);
    let csv_b = run_into(b.path(), &["--tracker", "naive"]);
    assert_eq!(csv_a, csv_b);
    assert!(csv_a.starts_with("k,tracker,rmse_m,p_jam,bias_true_m,bias_est_m,bias_std_m,c_k_mean\n"));
    for svg in ["rmse.svg", "p_jam.svg", "bias.svg", "c_k.svg"] {
        assert!(a.path().join(svg).exists(), "{svg}");
    }
    assert!(a.path().join(CONFIG_USED_FILE).exists());
}

#[test]
fn tracker_flag_selects_columns() {
    let dir = tempfile::tempdir().unwrap();
    let csv = run_into(dir.path(), &["--tracker", "naive", "--tracker", "adaptive"]);
    let table = parse_csv(&csv).unwrap();
    assert_eq!(table.trackers(), vec!["naive".to_string(), "adaptive".to_string()]);
    assert_eq!(table.rows.len(), 200);
}

#[test]
fn plot_reproduces_run_charts() {
    let run = tempfile::tempdir().unwrap();
    run_into(run.path(), &["--tracker", "adaptive", "--tracker", "naive"]);
    let replot = tempfile::tempdir().unwrap();
    let written = cmd_plot(&run.path().join(METRICS_FILE), Some(replot.path())).unwrap();
    assert_eq!(written.len(), 4);
    for p in written {
        let name = p.file_name().unwrap();
        assert_eq!(fs::read(&p).unwrap(), fs::read(run.path().join(name)).unwrap(), "{name:?}");
    }
}

#[test]
fn loe_adds_bound_column() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("loe.cfg");
    fs::write(&cfg, "n_steps = 30\nattack.1.start = 2\nattack.1.end = none\nattack.1.v_po = 5\n").unwrap();
    let o = rgpo(&[
        "loe",
        "--config",
        cfg.to_str().unwrap(),
        "--runs",
        "2",
        "--tracker",
        "naive",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = parse_csv(&fs::read_to_string(dir.path().join(METRICS_FILE)).unwrap()).unwrap();
    assert!(table.has_pcrb);
    let bound: Vec<f64> = table.rows.iter().map(|r| r.pcrb.unwrap()).collect();
    assert!(bound.iter().all(|b| *b > 0.0));
    assert!(bound.windows(2).all(|w| w[1] <= w[0]));
    // Attacks are ignored in loss-of-efficiency mode.
    assert!(table.rows.iter().all(|r| r.bias_true.is_nan()));
    assert!(dir.path().join("loe.svg").exists());
}

#[test]
fn bad_inputs_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "runs = 2\nlambda_2 = 3\n").unwrap();
    let o = rgpo(&["run", "--config", cfg.to_str().unwrap()]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2") && err.contains("lambda_2"), "{err}");

    let missing = dir.path().join("missing.csv");
    fs::write(&missing, "k,tracker,rmse_m,p_jam,bias_true_m,bias_est_m,c_k_mean\n1,naive,1,0,0,0,0\n").unwrap();
    let o = rgpo(&["plot", missing.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("bias_std_m"));

    let empty = dir.path().join("empty.csv");
    fs::write(&empty, "k,tracker,rmse_m,p_jam,bias_true_m,bias_est_m,bias_std_m,c_k_mean\n").unwrap();
    assert!(!rgpo(&["plot", empty.to_str().unwrap()]).status.success());
}
