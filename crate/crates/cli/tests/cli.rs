use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

use rsst::simulate::EvalReport;
use rsst::translator::{FeatureStore, FeatureVector};
use rsst_cli::{BuildStats, ConfusablesOutput, DistReport, RectifyOutput, TranslateOutput};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

fn schema(name: &str) -> jsonschema::JSONSchema {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("schemas").join(name);
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::JSONSchema::compile(&doc).expect("valid schema")
}

fn rsst(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rsst")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn lexicon_file(dir: &Path, text: &str) -> String {
    let path = dir.join("lex.tsv");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

/// Validates against the schema, then checks that the typed value
/// re-serializes to the same JSON.
fn round_trip<T: serde::de::DeserializeOwned + serde::Serialize>(text: &str, schema_name: &str) -> T {
    let value: Value = serde_json::from_str(text).unwrap();
    let compiled = schema(schema_name);
    if let Err(errors) = compiled.validate(&value) {
        let msgs: Vec<String> = errors.map(|e| e.to_string()).collect();
        panic!("{schema_name}: {msgs:?}");
    }
    let typed: T = serde_json::from_value(value.clone()).unwrap();
    assert_eq!(serde_json::to_value(&typed).unwrap(), value);
    typed
}

#[test]
fn dist_of_self_is_zero() {
    let o = rsst(&["dist", "⿰ a:12 b:3", "⿰ a:12 b:3"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("d_combined\t0\n"));

    let o = rsst(&["dist", "⿰ a:1 b:2", "⿱ a:1 b:2", "--format", "json"]);
    let r: DistReport = round_trip(&stdout(&o), "dist.schema.json");
    assert_eq!((r.d_tree, r.d_stroke, r.d_combined, r.ed_concat), (1.0, 0, 1.0, 0));

    let o = rsst(&["--alpha", "0.25", "--beta", "2", "dist", "⿰ a:1 b:2", "⿰ a:1 b:3", "--format", "json"]);
    let r: DistReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!((r.d_tree, r.d_combined), (0.25, 2.25));
}

#[test]
fn rectify_member_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let lex = lexicon_file(dir.path(), "A\t⿰ a:1 b:2\nB\t⿱ a:1 b:2\nC\t⿰ a:1 b:3\n");
    let o = rsst(&["rectify", "⿱ x:1 y:2", "--lexicon", &lex]);
    assert!(o.status.success());
    let r: RectifyOutput = round_trip(&stdout(&o), "rectify.schema.json");
    assert!(r.exact_match);
    assert_eq!(r.candidates, vec!["B"]);

    let o = rsst(&["rectify", "⿰ a:1 b:22", "--lexicon", &lex]);
    let r: RectifyOutput = round_trip(&stdout(&o), "rectify.schema.json");
    assert!(!r.exact_match);
    assert_eq!((r.rectified.as_str(), r.distance), ("⿰ :1 :2", 1.5));
}

#[test]
fn translate_uses_feature_files() {
    let dir = tempfile::tempdir().unwrap();
    let lex = lexicon_file(dir.path(), "X\t⿰ a:12 b:3\nY\t⿰ c:12 d:3\n");
    let o = rsst(&["translate", "⿰ a:12 b:3", "--lexicon", &lex]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error[translate]"));

    let mut store = FeatureStore::new(2);
    store.insert("X", FeatureVector::new(vec![1.0, 0.0]).unwrap()).unwrap();
    store.insert("Y", FeatureVector::new(vec![0.0, 1.0]).unwrap()).unwrap();
    let bin = dir.path().join("f.bin");
    store.write_binary(std::fs::File::create(&bin).unwrap()).unwrap();
    let json = dir.path().join("f.json");
    std::fs::write(&json, store.to_json().unwrap()).unwrap();

    for file in [&bin, &json] {
        let f = file.to_str().unwrap();
        let o = rsst(&["translate", "⿰ a:12 b:3", "--lexicon", &lex, "--features", f, "--query", "0.2,0.9"]);
        assert_eq!(stdout(&o), "Y\n", "{}", String::from_utf8_lossy(&o.stderr));
        let o = rsst(&[
            "translate", "⿰ a:12 b:3", "--lexicon", &lex, "--features", f, "--query", "0.9,-0.2", "--format", "json",
        ]);
        let t: TranslateOutput = round_trip(&stdout(&o), "translate.schema.json");
        assert_eq!(t.codepoint, "X");
    }
}

#[test]
fn exit_codes() {
    assert_eq!(rsst(&[]).status.code(), Some(1));
    assert_eq!(rsst(&["dist", "a:1"]).status.code(), Some(1));
    assert_eq!(rsst(&["rectify", "a:1"]).status.code(), Some(1));
    assert_eq!(rsst(&["--alpha", "0", "dist", "a:1", "a:1"]).status.code(), Some(1));
    assert_eq!(rsst(&["--help"]).status.code(), Some(0));

    let o = rsst(&["dist", "⿳ a:1 b:2", "a:1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error[parse]"));

    let dir = tempfile::tempdir().unwrap();
    let bad = lexicon_file(dir.path(), "A\ta:1\nB\ta:9\n");
    let o = rsst(&["build", "--lexicon", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
    assert_eq!(rsst(&["build", "--lexicon", "/nonexistent/lex.tsv"]).status.code(), Some(2));
}

#[test]
fn build_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let lex = lexicon_file(dir.path(), "# comment\nB\t⿱ a:1   b:2\nA\t⿰ a:1 b:2\nC\t⿰ c:1 d:2\n");
    let o = rsst(&["build", "--lexicon", &lex]);
    assert_eq!(stdout(&o), "B\t⿱ a:1 b:2\nA\t⿰ a:1 b:2\nC\t⿰ c:1 d:2\n");

    let out = dir.path().join("canon.tsv");
    let o = rsst(&["build", "--lexicon", &lex, "--out", out.to_str().unwrap(), "--format", "json"]);
    let stats: BuildStats = round_trip(&stdout(&o), "build_stats.schema.json");
    assert_eq!((stats.records, stats.distinct_trees, stats.confusable_characters), (3, 2, 2));
    assert_eq!(stats.stroke_confusable_characters, 3);
    assert_eq!(std::fs::read_to_string(out).unwrap().lines().count(), 3);
}

#[test]
fn confusables_and_labels() {
    let lex = fixtures().join("dan_pair.tsv");
    let lex = lex.to_str().unwrap();
    let o = rsst(&["confusables", "--lexicon", lex]);
    assert_eq!(stdout(&o), "");
    let o = rsst(&["confusables", "--stroke-level", "--lexicon", lex, "--format", "json"]);
    let c: ConfusablesOutput = round_trip(&stdout(&o), "confusables.schema.json");
    assert_eq!(c.groups, vec![vec!["A", "B"]]);

    let o = rsst(&["labels", "--lexicon", lex]);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    let compiled = schema("labels.schema.json");
    for line in &lines {
        assert!(compiled.is_valid(&serde_json::from_str(line).unwrap()));
    }
    assert_eq!(
        lines[0],
        r#"{"codepoint":"A","radical_tokens":["⿰",1,2],"stroke_targets":[[1,2,3,4],[1,2],[3,4]]}"#
    );
    let o = rsst(&["labels", "--explicit", "--lexicon", lex]);
    assert!(stdout(&o).starts_with(r#"{"codepoint":"A","radical_tokens":["⿰","a","b"]"#));
    assert_eq!(rsst(&["labels", "--explicit", "--implicit", "--lexicon", lex]).status.code(), Some(1));
}

#[test]
fn splits() {
    let dir = tempfile::tempdir().unwrap();
    let lex = lexicon_file(
        dir.path(),
        "C1\t⿰ a:1 b:2\nC2\t⿰ a:1 c:3\nC3\t⿱ a:1 ⿰ b:2 b:2\nC4\t⿰ d:4 b:2\nC5\te:5\nC6\t⿱ a:1 f:12\n",
    );
    let o = rsst(&["split", "radical", "--n", "1", "--lexicon", &lex]);
    assert_eq!(stdout(&o), "C1\ttrain\nC3\ttrain\nC2\ttest\nC4\ttest\nC5\ttest\nC6\ttest\n");

    let order = dir.path().join("order.txt");
    std::fs::write(&order, "C6\nC5\nC4\nC3\nC2\nC1\n").unwrap();
    let o = rsst(&["split", "char", "--m", "2", "--n-last", "3", "--alphabet", order.to_str().unwrap(), "--lexicon", &lex]);
    assert_eq!(stdout(&o), "C6\ttrain\nC5\ttrain\nC3\ttest\nC2\ttest\nC1\ttest\n");
    let o = rsst(&["split", "char", "--m", "4", "--n-last", "3", "--lexicon", &lex]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn eval_matches_golden_report() {
    let lex = fixtures().join("synth_500_seed42.tsv");
    let golden = std::fs::read_to_string(fixtures().join("eval_standard_seed42.json")).unwrap();
    let o = rsst(&[
        "eval", "--lexicon", lex.to_str().unwrap(), "--trials", "10000", "--p-sub", "0.05", "--p-del", "0.05",
        "--p-struct", "0.05", "--seed", "42",
    ]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), golden);
    let report: EvalReport = round_trip(&golden, "eval_report.schema.json");
    assert_eq!(report.noise_model, "synthetic");
}

#[test]
fn eval_with_features_reports_translation() {
    let lex = fixtures().join("synth_500_seed42.tsv");
    let o = rsst(&["eval", "--lexicon", lex.to_str().unwrap(), "--trials", "300", "--feature-dim", "8"]);
    let r: EvalReport = round_trip(&stdout(&o), "eval_report.schema.json");
    assert_eq!(r.top1_translate, Some(1.0));
}

#[test]
fn in_process_run() {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = rsst_cli::run(["rsst", "synth", "--count", "3", "--max-depth", "0"], &mut out, &mut err);
    assert_eq!(code, 0);
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().all(|l| !l.contains('⿰')));
}
