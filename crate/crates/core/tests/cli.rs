use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gibbs-stein"))
}

#[test]
fn lattice_csv_has_header_and_rows() {
    let out = bin().args(["lattice", "--model", "repelling", "--n", "2..4", "--lambda", "1"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# command=lattice"));
    assert_eq!(lines[1], "n,exact_tv,thm42,closed_form,omega_term,ratio_term,tail_term");
    assert_eq!(lines.len(), 5);
    let row: Vec<f64> = lines[2].split(',').map(|s| s.parse().unwrap()).collect();
    assert_eq!(row[0], 2.0);
    assert!(row[1] <= row[2]);
}

#[test]
fn bounds_json_parses() {
    let out = bin().args(["bounds", "--measure", "poisson:1", "--format", "json"]).output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["command"], "bounds");
    assert!(!v["rows"].as_array().unwrap().is_empty());
}

#[test]
fn verify_passes() {
    let out = bin().args(["verify", "--seed", "7"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn syntax_errors_exit_2() {
    let out = bin().args(["bounds", "--measure", "poisson:x"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn output_file_is_written() {
    let path = std::env::temp_dir().join(format!("gibbs-stein-cli-{}.csv", std::process::id()));
    let out = bin()
        .args(["poisson-sum", "--p", "0.1,0.2,0.3", "-o"])
        .arg(&path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert!(text.contains("lambda,bound_4_5"));
}
