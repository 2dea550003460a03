use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "data", name].iter().collect();
    p.to_string_lossy().into_owned()
}

/// Exit code, stdout and stderr of the binary.
fn reducts(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_reducts"))
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn reducts_json(args: &[&str]) -> (i32, Value) {
    let mut all = args.to_vec();
    all.push("--json");
    let (code, out, err) = reducts(&all);
    let text = if out.is_empty() { err } else { out };
    (code, serde_json::from_str(&text).unwrap())
}

#[test]
fn ramsey_five_fails_with_a_coloring() {
    let args = ["ramsey", "arrows", "--S", "chain:5", "--H", "chain:3", "--P", "chain:2", "--k", "2"];
    let (code, out, _) = reducts(&args);
    assert_eq!(code, 0);
    assert!(out.starts_with("false"));
    let (code, j) = reducts_json(&args);
    assert_eq!(code, 0);
    assert_eq!(j["holds"], false);
    assert_eq!(j["bad_coloring"]["colors"].as_array().unwrap().len(), 10);
}

#[test]
fn betweenness_csp_is_np_complete() {
    let betw = data("betw.json");
    let args = ["classify", "csp", "--base", "q-order", "--language", &betw];
    let (code, out, _) = reducts(&args);
    assert_eq!(code, 0);
    assert!(out.contains("NPc"), "{out}");
    let (code, j) = reducts_json(&args);
    assert_eq!(code, 0);
    assert_eq!(j["verdict"]["verdict"], "NPc");
}

#[test]
fn neq_is_pp_definable_from_betweenness() {
    let betw = data("betw.json");
    let args = ["define", "pp", "--target", "neq", "--language", &betw];
    let (code, out, _) = reducts(&args);
    assert_eq!(code, 0);
    assert!(out.starts_with("Definable"));
    let (_, j) = reducts_json(&args);
    assert_eq!(j["verdict"], "Definable");
    assert!(j["formula"].as_str().unwrap().contains("Betw"));
}

#[test]
fn human_and_json_verdicts_agree() {
    let lt = data("lt.json");
    let cases: [&[&str]; 4] = [
        &["classify", "cameron", "--language", &lt],
        &["classify", "thomas", "--builtins", "R3", "--base", "graph"],
        &["classify", "equality", "--builtins", "neq", "--base", "equality"],
        &["define", "pp", "--target", "Betw", "--language", &lt],
    ];
    for args in cases {
        let (c1, human, _) = reducts(args);
        let (c2, j) = reducts_json(args);
        assert_eq!(c1, c2);
        let verdict = match &j["verdict"] {
            Value::String(s) => s.clone(),
            v => v.to_string().trim_matches('"').to_string(),
        };
        assert!(human.contains(&verdict), "{human} vs {verdict}");
    }
}

#[test]
fn inconclusive_exits_with_two() {
    let args = [
        "define", "pp", "--target", "Betw", "--builtins", "lt", "--base", "q-order",
        "--closure-steps", "1", "--budget", "1",
    ];
    let (code, j) = reducts_json(&args);
    assert_eq!(code, 2);
    assert_eq!(j["verdict"], "Inconclusive");
    // the same question with room to work is definite
    let (code, j) = reducts_json(&args[..8]);
    assert_eq!(code, 0);
    assert_eq!(j["verdict"], "NotDefinable");
}

#[test]
fn solve_reads_instance_files() {
    let (code, out, _) = reducts(&["solve", &data("cycle.json")]);
    assert_eq!((code, out.trim()), (0, "unsatisfiable"));
    let (code, j) = reducts_json(&["solve", &data("chain.json")]);
    assert_eq!(code, 0);
    assert_eq!(j["satisfiable"], true);
    let a = &j["witness"]["assignment"];
    assert!(a["a"].as_i64() < a["b"].as_i64() && a["b"].as_i64() < a["c"].as_i64());
}

#[test]
fn errors_exit_with_one() {
    let bad = std::env::temp_dir().join("reducts-cli-bad.json");
    std::fs::write(&bad, "{not json").unwrap();
    let (code, _, err) = reducts(&["classify", "cameron", "--language", bad.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("json"), "{err}");
    // caps are named in the message
    let (code, _, err) = reducts(&[
        "ramsey", "arrows", "--S", "chain:9", "--H", "chain:3", "--P", "chain:2", "--k", "2",
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("copies of P"), "{err}");
    assert_eq!(reducts(&["nonsense"]).0, 1);
    // flags are checked before anything runs
    assert_eq!(reducts(&["define", "pp", "--target", "neq"]).0, 1);
    assert_eq!(reducts(&["ramsey", "arrows", "--S", "graph:3:0-0", "--H", "chain:2", "--P", "chain:1", "--k", "2"]).0, 1);
}

#[test]
fn catalog_lists_everything() {
    let (code, j) = reducts_json(&["catalog"]);
    assert_eq!(code, 0);
    let names = |k: &str| -> Vec<String> {
        j[k].as_array()
            .unwrap()
            .iter()
            .map(|e| e["name"].as_str().unwrap().to_string())
            .collect()
    };
    let rels = names("relations");
    for r in ["Betw", "Cycl", "Sep", "E6", "T3", "R3", "R4", "R5", "T", "H", "P3", "Q4", "L"] {
        assert!(rels.iter().any(|n| n == r), "{r}");
    }
    let behs = names("behaviors");
    for b in ["identity", "lex", "dual_pp"] {
        assert!(behs.iter().any(|n| n == b), "{b}");
    }
    let (_, only) = reducts_json(&["catalog", "--filter", "Betw", "--kind", "relations"]);
    assert!(only["behaviors"].as_array().unwrap().is_empty());
    assert!(!only["relations"].as_array().unwrap().is_empty());
}

#[test]
fn verify_interp_reports_both_versions() {
    let (_, plain) = reducts_json(&["verify-interp", "OIT-in-T3"]);
    let (_, fresh) = reducts_json(&["verify-interp", "OIT-in-T3/fresh"]);
    assert_eq!(plain["verified"], false);
    assert_eq!(plain["generic_failures"], 0);
    assert_eq!(fresh["verified"], true);
}

#[test]
fn in_process_run_matches_the_binary() {
    let (code, out) = reducts_cli::run(["reducts", "ramsey", "arrows", "--S", "chain:6", "--H", "chain:3", "--P", "chain:2", "--k", "2"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("true"));
}
