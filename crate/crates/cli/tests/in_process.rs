use ramond_cli::{run, EXIT_OK, EXIT_USAGE};

#[test]
fn help_is_not_an_error() {
    let out = run(["ramond", "--help"]);
    assert_eq!(out.code, EXIT_OK);
    assert!(out.stdout.contains("verify-main"));
}

#[test]
fn e8_degree_above_window_is_rejected() {
    let out = run(["ramond", "e8", "--max-degree", "16"]);
    assert_eq!(out.code, EXIT_USAGE);
}

#[test]
fn eval_echoes_command() {
    let out = run(["ramond", "eval", "E4", "--q-order", "1", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["command"], serde_json::json!(["eval", "E4", "--q-order", "1", "--format", "json"]));
    assert_eq!(v["result"]["expression"], "E4");
}
