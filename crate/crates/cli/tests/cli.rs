use std::process::{Command, Output};

fn fbound(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fbound"))
        .args(args)
        .env_remove("FBOUND_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn xi_prints_closed_form() {
    let o = fbound(&["xi", "--rank", "2", "--n", "2"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("2/3"));
}

#[test]
fn measure_of_a_cylinder() {
    let o = fbound(&["measure", "--rank", "2", "--cyl", "ab"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("1/12"));
    let o = fbound(&["measure", "--cyl", "B", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["measure"], "1/1");
}

#[test]
fn words_in_both_syntaxes() {
    let a = fbound(&["coeff", "--gamma", "aB", "--cyl", "a", "--format", "json"]);
    let b = fbound(&["coeff", "--gamma", "1,-2", "--cyl", "1", "--format", "json"]);
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b));
    let inverse = fbound(&["measure", "--cyl", "-2", "--format", "json"]);
    assert!(inverse.status.success());
    assert!(stdout(&inverse).contains("1/4"));
    let id = fbound(&["coeff", "--gamma", "e", "--cyl", "a", "--format", "json"]);
    assert!(stdout(&id).contains("1/4"));
}

#[test]
fn parse_errors_exit_two() {
    for args in [
        &["coeff", "--gamma", "aA", "--cyl", "a"][..],
        &["xi", "--n", "two"],
        &["mn-coeff", "--f", "wave:a", "--g", "cyl:b", "--h", "cyl:a", "--n", "2"],
        &["equidist", "--f", "const:1/0", "--g", "chi:a", "--n", "2"],
        &["xi", "--rank", "1", "--n", "2"],
        &["no-such-command"],
    ] {
        assert_eq!(fbound(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn caps_exit_three() {
    assert_eq!(fbound(&["fn-check", "--n", "12", "--cap", "1000"]).status.code(), Some(3));
    assert_eq!(fbound(&["norm", "--n", "1", "--depth", "9"]).status.code(), Some(3));
}

#[test]
fn csv_tables_have_versioned_headers() {
    let o = fbound(&["mn-coeff", "--f", "chi:a", "--g", "cyl:b", "--h", "cyl:a", "--n", "2..6", "--format", "csv"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# fbound-csv v1 mn-coeff"));
    assert_eq!(lines.next(), Some("n,exact_a,exact_b,float,deviation"));
    assert_eq!(lines.count(), 5);

    let o = fbound(&["equidist", "--f", "chi:a", "--g", "chi:a", "--n", "2..14", "--format", "csv"]);
    let text = stdout(&o);
    assert_eq!(text.lines().nth(1), Some("n,value_num,value_den,float,deviation,class"));
    // n = 3 is 1/18
    assert!(text.lines().any(|l| l.starts_with("3,1,18,")));
}

#[test]
fn route_pinned_runs_agree() {
    for route in ["grouped", "enumerated"] {
        let o = fbound(&["mn-coeff", "--f", "chi:a", "--g", "cyl:b", "--h", "cyl:a", "--n", "4..7", "--route", route]);
        assert!(o.status.success(), "{route}");
    }
}

#[test]
fn table_file_functions() {
    let dir = std::env::temp_dir().join(format!("fbound-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("f.txt");
    std::fs::write(&path, "# vertex values\nab 1\naB 1\n").unwrap();
    let spec = format!("table:{}", path.display());
    let o = fbound(&["equidist", "--f", &spec, "--g", "const:1", "--n", "2", "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["entries"][0]["value"], "1/6");
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn cumulative_mass() {
    let o = fbound(&["equidist", "--f", "const:1", "--g", "const:1", "--n", "1", "--cumulative", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["entries"][0]["value"], "5/3");
    assert_eq!(v["limit"], "2/1");
}

#[test]
fn norm_and_cyclicity() {
    let o = fbound(&["norm", "--n", "1..2", "--depth", "2", "--format", "json"]);
    assert!(o.status.success());
    let o = fbound(&["cyclicity", "--nmax", "2", "--depth", "1", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["gram_rank"], 4);
}

#[test]
fn quick_verification_passes_identically_across_widths() {
    let one = fbound(&["verify-all", "--rank", "2", "--quick", "--format", "json", "--threads", "1"]);
    assert_eq!(one.status.code(), Some(0), "{}", String::from_utf8_lossy(&one.stderr));
    let two = Command::new(env!("CARGO_BIN_EXE_fbound"))
        .args(["verify-all", "--rank", "2", "--quick", "--format", "json"])
        .env("FBOUND_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(stdout(&one), stdout(&two));
    let v: serde_json::Value = serde_json::from_str(&stdout(&one)).unwrap();
    let first = &v[0];
    for key in ["claim", "paper_ref", "status", "exact", "float", "tolerance"] {
        assert!(first.get(key).is_some(), "{key}");
    }
}
