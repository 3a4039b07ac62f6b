use std::path::{Path, PathBuf};
use std::process::Command;

use mdh_cli::{run, ROLLING_HEADER};

fn mdh(args: &[&str]) -> Result<(String, String), mdh_cli::CliError> {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("mdh").chain(args.iter().copied());
    run(argv, &mut out, &mut err)?;
    Ok((String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap()))
}

fn simulate(dir: &Path, name: &str, args: &[&str]) -> PathBuf {
    let path = dir.join(name);
    let mut argv = vec!["simulate", "-o", path.to_str().unwrap()];
    argv.extend_from_slice(args);
    mdh(&argv).unwrap();
    path
}

#[test]
fn simulate_writes_date_return_csv() {
    let dir = tempfile::tempdir().unwrap();
    let p = simulate(
        dir.path(),
        "ar.csv",
        &["--kind", "ar1", "--params", "0.3", "--length", "50", "--seed", "2"],
    );
    let text = std::fs::read_to_string(p).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "date,return");
    assert_eq!(lines.len(), 51);
    assert!(lines[1].starts_with("2000-01-03,"));
}

#[test]
fn avr_json_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let p = simulate(
        dir.path(),
        "g.csv",
        &["--kind", "garch11", "--params", "0.05,0.1,0.85", "--length", "300"],
    );
    let p = p.to_str().unwrap();
    let a = mdh(&["avr", p, "--B", "99", "--seed", "4", "--json"]).unwrap().0;
    let b = mdh(&["avr", p, "--B", "99", "--seed", "4", "--json"]).unwrap().0;
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["n_boot"], 99);
    assert!(v["p_value"].as_f64().unwrap() > 0.0);
    let c = mdh(&["avr", p, "--B", "99", "--seed", "5", "--json"]).unwrap().0;
    assert_ne!(a, c);
}

#[test]
fn json_file_output_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let p = simulate(dir.path(), "s.csv", &["--kind", "iid", "--length", "120"]);
    let out = dir.path().join("gs.json");
    let (stdout, _) = mdh(&[
        "gs",
        p.to_str().unwrap(),
        "--B",
        "49",
        "--json",
        "-o",
        out.to_str().unwrap(),
    ])
    .unwrap();
    assert_eq!(std::fs::read_to_string(out).unwrap(), stdout);
}

#[test]
fn rolling_csv_header_and_significance_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p = simulate(
        dir.path(),
        "w.csv",
        &[
            "--kind",
            "ar1",
            "--params",
            "0.2",
            "--length",
            "700",
            "--frequency",
            "weekly",
        ],
    );
    let (csv_text, _) = mdh(&[
        "roll",
        p.to_str().unwrap(),
        "--test",
        "avr",
        "--frequency",
        "weekly",
        "--B",
        "99",
    ])
    .unwrap();
    let mut lines = csv_text.lines();
    assert_eq!(lines.next().unwrap(), ROLLING_HEADER.join(","));
    assert_eq!(lines.clone().next().unwrap().split(',').count(), ROLLING_HEADER.len());
    let mut rows = 0;
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let p: f64 = f[4].parse().unwrap();
        let rebuilt = format!("{}", p < 0.05);
        assert_eq!(f[7], rebuilt, "{line}");
        assert_eq!(f[4], mdh_cli::fmt17(p));
        rows += 1;
    }
    assert!(rows >= 8);
}

#[test]
fn roll_under_iid_null_rejects_rarely() {
    let dir = tempfile::tempdir().unwrap();
    let p = simulate(
        dir.path(),
        "iid.csv",
        &["--kind", "iid", "--length", "15000", "--seed", "8"],
    );
    let (csv_text, _) = mdh(&[
        "roll",
        p.to_str().unwrap(),
        "--test",
        "avr",
        "--window-years",
        "1",
        "--B",
        "199",
        "--seed",
        "3",
    ])
    .unwrap();
    let flags: Vec<bool> = csv_text
        .lines()
        .skip(1)
        .filter_map(|l| l.split(',').nth(7)?.parse().ok())
        .collect();
    assert!(flags.len() >= 50);
    let share = flags.iter().filter(|&&f| f).count() as f64 / flags.len() as f64;
    assert!(share <= 0.15, "{share} of {} windows significant", flags.len());
}

#[test]
fn describe_jb_is_calibrated_under_normality() {
    let dir = tempfile::tempdir().unwrap();
    let mut below = 0;
    for seed in 0..40 {
        let p = simulate(
            dir.path(),
            "n.csv",
            &["--kind", "iid", "--length", "500", "--seed", &seed.to_string()],
        );
        let (json, _) = mdh(&["describe", p.to_str().unwrap(), "--json"]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        if v["jarque_bera"].as_f64().unwrap() < 5.99 {
            below += 1;
        }
    }
    assert!(below >= 36, "{below} of 40");
}

#[test]
fn long_and_wide_panels_give_the_same_portfolio() {
    let dir = tempfile::tempdir().unwrap();
    let wide = dir.path().join("wide.csv");
    let long = dir.path().join("long.csv");
    let mut w = String::from("date,A,B\n");
    let mut l = String::from("date,instrument,return\n");
    for i in 0..40 {
        let d = chrono::NaiveDate::from_ymd_opt(2010, 1, 4).unwrap() + chrono::Duration::days(i);
        let a = ((i * 37) % 11) as f64 / 10.0 - 0.5;
        let b = ((i * 53) % 13) as f64 / 10.0 - 0.6;
        if i % 7 == 3 {
            w.push_str(&format!("{d},{a},NA\n"));
        } else {
            w.push_str(&format!("{d},{a},{b}\n"));
            l.push_str(&format!("{d},B,{b}\n"));
        }
        l.push_str(&format!("{d},A,{a}\n"));
    }
    std::fs::write(&wide, w).unwrap();
    std::fs::write(&long, l).unwrap();
    let a = mdh(&["describe", wide.to_str().unwrap(), "--json"]).unwrap().0;
    let b = mdh(&["describe", long.to_str().unwrap(), "--json"]).unwrap().0;
    let (va, vb): (serde_json::Value, serde_json::Value) =
        (serde_json::from_str(&a).unwrap(), serde_json::from_str(&b).unwrap());
    assert_eq!(va["size"], 40);
    for key in ["mean", "std", "skewness", "kurtosis"] {
        let (x, y) = (va[key].as_f64().unwrap(), vb[key].as_f64().unwrap());
        assert!((x - y).abs() < 1e-12, "{key}: {x} vs {y}");
    }
}

#[test]
fn duplicate_rows_are_reported_with_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("dup.csv");
    std::fs::write(
        &p,
        "date,instrument,return\n2010-01-04,A,0.1\n2010-01-05,A,0.2\n2010-01-04,A,0.3\n",
    )
    .unwrap();
    let err = mdh(&["describe", p.to_str().unwrap()]).unwrap_err().to_string();
    assert!(err.contains("lines 2 and 4"), "{err}");
}

#[test]
fn truncated_gs_logs_the_bound() {
    let dir = tempfile::tempdir().unwrap();
    let p = simulate(dir.path(), "t.csv", &["--kind", "iid", "--length", "100"]);
    let (_, err) = mdh(&["gs", p.to_str().unwrap(), "--B", "19", "--max-lag", "5"]).unwrap();
    assert!(err.contains("max_lag = 5"), "{err}");
    let (_, err) = mdh(&["gs", p.to_str().unwrap(), "--B", "19"]).unwrap();
    assert!(err.is_empty());
}

#[test]
fn binary_exits_nonzero_on_errors() {
    let bin = env!("CARGO_BIN_EXE_mdh");
    let missing = Command::new(bin).args(["avr", "/nonexistent/x.csv"]).output().unwrap();
    assert!(!missing.status.success());
    assert!(String::from_utf8_lossy(&missing.stderr).contains("error"));
    let bad = Command::new(bin)
        .args(["simulate", "--kind", "ar1", "--params", "1.5", "--length", "10"])
        .output()
        .unwrap();
    assert!(!bad.status.success());
    assert!(bad.stdout.is_empty());
    let usage = Command::new(bin).args(["avr"]).output().unwrap();
    assert!(!usage.status.success());
}

#[test]
fn failed_run_leaves_no_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("const.csv");
    std::fs::write(
        &p,
        "date,return\n2010-01-04,0.1\n2010-01-05,0.1\n2010-01-06,0.1\n2010-01-07,0.1\n2010-01-08,0.1\n",
    )
    .unwrap();
    let out = dir.path().join("out.json");
    assert!(mdh(&["avr", p.to_str().unwrap(), "-o", out.to_str().unwrap()]).is_err());
    assert!(!out.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}
