use std::fs;
use std::process::{Command, Output};

fn hill(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hill-spectra")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn mathieu_slate_has_one_row_per_even_index() {
    let o = hill(&["slate", "--builtin", "mathieu", "--c", "1", "--K", "64", "--n", "6..40"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 19);
    assert!(lines[0].starts_with("n,bc,lambda_plus_re,lambda_plus_im"));
    assert!(lines[1].starts_with("6,per+,"));
}

#[test]
fn both_parities_when_both_periodic_conditions_are_listed() {
    let o = hill(&["slate", "--builtin", "mathieu", "--K", "32", "--n", "6..12", "--bc", "per+,per-"]);
    assert_eq!(stdout(&o).lines().count(), 8);
}

#[test]
fn tiny_truncation_is_a_config_error() {
    let o = hill(&["slate", "--builtin", "mathieu", "--K", "3"]);
    assert_eq!(o.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(o.stderr.trim_ascii()).unwrap();
    assert_eq!(err["error"], "TruncationTooSmall");
}

#[test]
fn config_errors_exit_two() {
    for args in [
        vec!["slate", "--builtin", "nope"],
        vec!["slate", "--builtin", "mathieu", "--n", "9..3"],
        vec!["slate", "--K", "16"],
        vec!["oracle", "--builtin", "mathieu", "--bc", "sideways"],
        vec!["frobnicate"],
    ] {
        let o = hill(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(serde_json::from_slice::<serde_json::Value>(o.stderr.trim_ascii()).is_ok());
    }
}

#[test]
fn output_is_byte_identical_across_runs() {
    let args = ["slate", "--builtin", "random_weighted", "--seed", "11", "--F", "6", "--K", "24", "--n", "6..14", "--bc", "per+,per-"];
    let a = hill(&args);
    let b = hill(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn out_dir_gets_csv_and_json_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = hill(&["smoothness", "--builtin", "mathieu", "--K", "32", "--n", "2..20", "--bc", "per+,per-", "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["smoothness.csv", "smoothness.json", "smoothness_plot.csv"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("smoothness.json")).unwrap()).unwrap();
    assert_eq!(summary["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(summary["config"]["run"]["k"], 32);
    assert_eq!(summary["result"]["gamma"]["class"], "Exponential");
}

#[test]
fn potential_file_and_matrix_dump() {
    let dir = tempfile::tempdir().unwrap();
    let pf = dir.path().join("pot.json");
    fs::write(&pf, r#"{"coeffs": [[2, 0.0, -0.5], [-2, 0.0, 0.5]]}"#).unwrap();
    let dump = dir.path().join("m.csv");
    let o = hill(&[
        "beta",
        "--potential-file",
        pf.to_str().unwrap(),
        "--K",
        "16",
        "--n",
        "6..8",
        "--dump-matrix",
        dump.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().count(), 3);
    assert_eq!(fs::read_to_string(dump).unwrap().lines().count(), 34);
}

#[test]
fn oracle_rows_match_the_matrix() {
    let o = hill(&["oracle", "--builtin", "mathieu", "--K", "48", "--n", "6..8", "--bc", "per+,dir,neu"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    // two periodic roots at n = 6 and 8, one Dirichlet and one Neumann root at each n
    assert_eq!(text.lines().count(), 1 + 4 + 3 + 3);
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        assert!(cols[6].parse::<f64>().unwrap() <= 1e-7, "{line}");
        assert_eq!(cols[7], "true");
    }
}

#[test]
fn criterion_flags_gasymov() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = hill(&["criterion", "--builtin", "gasymov", "--F", "16", "--K", "40", "--n", "6..20", "--bc", "per+,per-", "--out", out]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("basis failure: true"));
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("criterion.json")).unwrap()).unwrap();
    assert_eq!(summary["result"]["beta_inf"], 0.0);
}
