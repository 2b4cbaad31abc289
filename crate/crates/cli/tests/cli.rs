use std::process::Command;

fn ramond(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_ramond")).args(args).output().expect("binary runs");
    (
        out.status.code().expect("exit code"),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn json(args: &[&str]) -> serde_json::Value {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let (code, out, err) = ramond(&all);
    assert_eq!(code, 0, "{err}");
    serde_json::from_str(&out).unwrap()
}

#[test]
fn eval_normalized_weight_twelve() {
    let (code, out, _) = ramond(&["eval", "(E4^3 - 728*Delta)*etaInvPow(8)", "--q-order", "2"]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "1 + 196732q^2 + O(q^3)");
}

#[test]
fn eval_json_uses_string_rationals() {
    let v = json(&["eval", "CK(E4)", "--q-order", "1", "--z-order", "2"]);
    assert_eq!(v["q_order"], 1);
    let z2 = &v["result"]["value"]["coefficients"][2];
    assert_eq!(z2["quasimodular"], "-1/12*E6 + 1/12*E2*E4");
    assert_eq!(z2["expansion"][1], serde_json::json!({"n": "60", "d": "1"}));
}

#[test]
fn natural_lift_of_zero() {
    let (code, out, _) = ramond(&["eval", "natural(0)", "--z-order", "4"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("weight 0"));
}

#[test]
fn parse_error_exits_with_usage_code() {
    let (code, _, err) = ramond(&["eval", "E4 + * Delta"]);
    assert_eq!(code, 2);
    assert!(err.contains("byte 5"), "{err}");
}

#[test]
fn weight_error_exits_with_usage_code() {
    let (code, _, err) = ramond(&["eval", "CK(E4 + E6)"]);
    assert_eq!(code, 2);
    assert!(err.starts_with("error:"));
}

#[test]
fn unknown_subcommand_is_usage_error() {
    assert_eq!(ramond(&["frobnicate"]).0, 2);
    assert_eq!(ramond(&["suite", "--suite", "nope"]).0, 2);
}

#[test]
fn c_table_csv() {
    let (code, out, _) = ramond(&["c-table", "--fiber-dim", "6", "--j", "1", "--q-order", "1", "--format", "csv"]);
    assert_eq!(code, 0);
    assert_eq!(out, "n,numerator,denominator\n0,1,1\n1,246,1\n");
}

#[test]
fn csv_refused_where_there_is_no_table() {
    let (code, _, err) = ramond(&["anomaly", "--fiber-dim", "6", "--format", "csv"]);
    assert_eq!(code, 2);
    assert!(err.contains("csv"));
}

#[test]
fn anomaly_dim20() {
    let (code, out, _) = ramond(&["anomaly", "--fiber-dim", "20", "--q-order", "2"]);
    assert_eq!(code, 0);
    assert!(out.contains("ch_2(ind D^{V_2}) = 196870*ch_2(ind D) - 4*ch_2(ind D^{V_1})"), "{out}");
}

#[test]
fn phi_basis_weight_twelve() {
    let v = json(&["phi-basis", "--weight", "12", "--fiber-dim", "8", "--q-order", "2"]);
    assert_eq!(v["result"]["dimension"], 2);
    assert_eq!(v["result"]["normalized"][1][2], serde_json::json!({"n": "-16", "d": "1"}));
}

#[test]
fn verify_main_prints_top_component() {
    let (code, out, _) = ramond(&["verify-main", "--fiber-dim", "8", "--max-degree", "16", "--q-order", "6"]);
    assert_eq!(code, 0);
    assert!(out.contains("nu_0/(4!*(4)_4) * (E4^(4) - 240*Delta) * (p1(X)/2)^4"), "{out}");
}

#[test]
fn verify_main_rejects_odd_fiber() {
    assert_eq!(ramond(&["verify-main", "--fiber-dim", "7", "--max-degree", "8"]).0, 2);
}

#[test]
fn sch_renders_symbols() {
    let (code, out, _) = ramond(&["sch", "--fiber-dim", "4", "--max-degree", "4", "--q-order", "1"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("q^0: -1/1440*I(p2)\n"), "{out}");
    assert!(out.trim_end().ends_with("O(q^2)"));
}

#[test]
fn e8_report() {
    let v = json(&["e8", "--q-order", "4", "--max-degree", "12"]);
    assert_eq!(v["status"], "pass");
    let dims: Vec<&str> = v["result"]["character"]["dims"].as_array().unwrap().iter().map(|d| d.as_str().unwrap()).collect();
    assert_eq!(&dims[..4], &["1", "248", "4124", "34752"]);
}

#[test]
fn suite_json_is_deterministic() {
    let a = ramond(&["suite", "--suite", "modforms", "--format", "json"]);
    let b = ramond(&["suite", "--suite", "modforms", "--format", "json"]);
    assert_eq!(a.0, 0);
    assert_eq!(a.1, b.1);
    let v: serde_json::Value = serde_json::from_str(&a.1).unwrap();
    let ids: Vec<&str> = v["result"]["claims"].as_array().unwrap().iter().map(|c| c["id"].as_str().unwrap()).collect();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);
    assert!(ids.contains(&"modforms.c_table_dim6"));
}

#[test]
fn family_suite_passes() {
    let (code, out, _) = ramond(&["suite", "--suite", "family"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("family.main_theorem_dim8_top"));
}
