use std::fs;
use std::path::{Path, PathBuf};

use multitree::document::Document;
use multitree::fixtures::{base_ap, fragment_a1, fragment_a1q, fragment_w};
use multitree::MultiTree;
use multitree_cli::{run, CommandOutcome, EXIT_FINDING, EXIT_INPUT, EXIT_OK};
use tempfile::TempDir;

fn cli(args: &[&str]) -> CommandOutcome {
    run(std::iter::once("multitree").chain(args.iter().copied()))
}

fn save(dir: &TempDir, name: &str, m: &MultiTree) -> String {
    let path = dir.path().join(name);
    fs::write(&path, Document::from_multitree(m).to_json()).unwrap();
    path.to_string_lossy().into_owned()
}

fn out_path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_w_with_and_without_guard() {
    let dir = TempDir::new().unwrap();
    let w = save(&dir, "w.json", &fragment_w());
    assert_eq!(cli(&["validate", &w]).code, EXIT_OK);

    let report = out_path(&dir, "report.json");
    let r = cli(&["validate", &w, "--zero-guard", "off", "--report", s(&report)]);
    assert_eq!(r.code, EXIT_FINDING);
    assert!(r.report.contains("axiom 4 at (a,p) = 0"));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["verdict"], "reject");
    assert_eq!(json["violations"][0]["tuple"], serde_json::json!(["a", "p"]));
}

#[test]
fn malformed_input_is_exit_two() {
    let dir = TempDir::new().unwrap();
    let bad = out_path(&dir, "bad.json");
    fs::write(&bad, "{ not json").unwrap();
    assert_eq!(cli(&["validate", s(&bad)]).code, EXIT_INPUT);
    assert_eq!(cli(&["validate", "/nonexistent/x.json"]).code, EXIT_INPUT);
    assert_eq!(cli(&["validate"]).code, EXIT_INPUT);
    assert_eq!(cli(&["frobnicate"]).code, EXIT_INPUT);
    assert_eq!(cli(&["--help"]).code, EXIT_OK);

    // A partial table is a structural rejection, not an input error.
    let w = fragment_w();
    let mut doc = Document::from_multitree(&w);
    doc.codistance.pop();
    let partial = out_path(&dir, "partial.json");
    fs::write(&partial, doc.to_json()).unwrap();
    let r = cli(&["validate", s(&partial)]);
    assert_eq!(r.code, EXIT_FINDING);
    assert!(r.report.contains("structure"));
}

#[test]
fn extend_then_classify() {
    let dir = TempDir::new().unwrap();
    let a1 = save(&dir, "a1.json", &fragment_a1());
    let b = out_path(&dir, "b.json");
    let r = cli(&["extend", &a1, "--type", "1", "--tree", "2", "--attach", "p", "-o", s(&b)]);
    assert_eq!(r.code, EXIT_OK, "{}", r.report);
    let c = cli(&["classify", &a1, s(&b)]);
    assert_eq!(c.code, EXIT_OK);
    let found: Vec<serde_json::Value> = serde_json::from_str(&c.report).unwrap();
    assert_eq!(found[0]["kind"], 1);

    let r = cli(&[
        "extend", &a1, "--type", "2", "--tree", "2", "--attach", "p", "--witness", "b,p", "-o", s(&b),
    ]);
    assert_eq!(r.code, EXIT_OK, "{}", r.report);
    let m: MultiTree = Document::from_json(&fs::read_to_string(&b).unwrap()).unwrap().to_multitree().unwrap();
    let br = m.tuple(&["b", "t2_v1"]).unwrap();
    assert_eq!(m.at(&br), 2);

    let bad = cli(&[
        "extend", &a1, "--type", "2", "--tree", "2", "--attach", "p", "--witness", "a,p", "-o", s(&b),
    ]);
    assert_eq!(bad.code, EXIT_INPUT);
    let w = save(&dir, "w.json", &fragment_w());
    assert_eq!(cli(&["classify", &a1, &w]).code, EXIT_INPUT);
}

#[test]
fn filtration_and_amalgamation() {
    let dir = TempDir::new().unwrap();
    let base = save(&dir, "base.json", &base_ap());
    let w = save(&dir, "w.json", &fragment_w());
    let r = cli(&["filtration", &base, &w]);
    assert_eq!(r.code, EXIT_OK);
    let steps: Vec<serde_json::Value> = serde_json::from_str(&r.report).unwrap();
    assert_eq!(steps.len(), 3);

    let a1 = save(&dir, "a1.json", &fragment_a1());
    let pq = multitree::extension::replay(&base_ap(), &multitree::ExtensionDescriptor::fold(2, "p", "q")).unwrap();
    let pq = save(&dir, "pq.json", &pq);
    let d = out_path(&dir, "d.json");
    let r = cli(&["amalgamate", &base, &a1, &pq, "-o", s(&d)]);
    assert_eq!(r.code, EXIT_OK, "{}", r.report);
    let m: MultiTree = Document::from_json(&fs::read_to_string(&d).unwrap()).unwrap().to_multitree().unwrap();
    assert!(m.same_structure(&fragment_a1q()));

    // B is not over A.
    assert_ne!(cli(&["amalgamate", &w, &a1, &pq, "-o", s(&d)]).code, EXIT_OK);
}

#[test]
fn generate_base_and_determinism() {
    let dir = TempDir::new().unwrap();
    let out = out_path(&dir, "out.json");
    let r = cli(&["generate", "--n", "2", "--steps", "0", "--seed", "7", "-o", s(&out)]);
    assert_eq!(r.code, EXIT_OK);
    let base: MultiTree = multitree::base_structure(2).unwrap();
    assert_eq!(fs::read_to_string(&out).unwrap(), Document::from_multitree(&base).to_json());

    let (x, y, log) = (out_path(&dir, "x.json"), out_path(&dir, "y.json"), out_path(&dir, "log.json"));
    for p in [&x, &y] {
        let r = cli(&[
            "generate", "--n", "2", "--steps", "3", "--seed", "17", "-o", s(p), "--log", s(&log),
        ]);
        assert_eq!(r.code, EXIT_OK);
    }
    assert_eq!(fs::read(&x).unwrap(), fs::read(&y).unwrap());
    let entries: Vec<serde_json::Value> = serde_json::from_str(&fs::read_to_string(&log).unwrap()).unwrap();
    assert_eq!(entries.len(), 3);
    assert_eq!(cli(&["generate", "--n", "0", "--steps", "3", "--seed", "1", "-o", s(&x)]).code, EXIT_INPUT);
}

#[test]
fn audit_exit_codes() {
    let dir = TempDir::new().unwrap();
    let base = save(&dir, "base.json", &base_ap());
    assert_eq!(cli(&["audit", &base, "--size-bound", "0"]).code, EXIT_OK);
    let r = cli(&["audit", &base, "--size-bound", "2"]);
    assert_eq!(r.code, EXIT_FINDING);
    assert!(r.report.contains("missing over"));
}

#[test]
fn apartments_of_w() {
    let dir = TempDir::new().unwrap();
    let w = save(&dir, "w.json", &fragment_w());
    let r = cli(&["apartments", &w, "--base", "a,p", "--tree", "2", "--y", "q", "--z", "r"]);
    assert_eq!(r.code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&r.report).unwrap();
    assert_eq!(v["members"], serde_json::json!([["a", "b"], ["q", "r"]]));

    let r = cli(&["apartments", &w, "--base", "a,p", "--tree", "1"]);
    let v: serde_json::Value = serde_json::from_str(&r.report).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 1);
    assert_eq!(v[0]["members"], serde_json::json!([["b"], ["p", "r"]]));

    assert_eq!(cli(&["apartments", &w, "--base", "a,q", "--tree", "1"]).code, EXIT_INPUT);
    assert_eq!(
        cli(&["apartments", &w, "--base", "a,p", "--tree", "2", "--y", "q", "--z", "q"]).code,
        EXIT_INPUT
    );
}

#[test]
fn search_reports_w() {
    let dir = TempDir::new().unwrap();
    let report = out_path(&dir, "search.json");
    let r = cli(&[
        "search-counterexample", "--lemma", "geodesic-onlyif", "--max-size", "5", "--report", s(&report),
    ]);
    assert_eq!(r.code, EXIT_FINDING);
    let key = multitree::search::canonical_form(&fragment_w()).to_string();
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert!(json["counterexamples"].as_array().unwrap().iter().any(|c| c["canonical"] == key.as_str()));

    let r = cli(&["search-counterexample", "--lemma", "type1-closure", "--max-size", "4"]);
    assert_eq!(r.code, EXIT_OK);
    assert_eq!(cli(&["search-counterexample", "--lemma", "nope", "--max-size", "4"]).code, EXIT_INPUT);
}

#[test]
fn export_formats() {
    let dir = TempDir::new().unwrap();
    let w = save(&dir, "w.json", &fragment_w());
    let r = cli(&["export", &w, "--format", "dot", "--profile-base", "a,p"]);
    assert_eq!(r.code, EXIT_OK);
    for label in ["a:0", "b:1", "p:0", "q:1", "r:1"] {
        assert!(r.report.contains(label));
    }
    assert_eq!(cli(&["export", &w, "--format", "dot", "--profile-base", "a,zz"]).code, EXIT_INPUT);
    assert_eq!(cli(&["export", &w, "--format", "json", "--profile-base", "a,p"]).code, EXIT_INPUT);

    let once = out_path(&dir, "once.json");
    let twice = out_path(&dir, "twice.json");
    assert_eq!(cli(&["export", &w, "--format", "json", "-o", s(&once)]).code, EXIT_OK);
    assert_eq!(cli(&["export", s(&once), "--format", "json", "-o", s(&twice)]).code, EXIT_OK);
    assert_eq!(fs::read(&once).unwrap(), fs::read(&twice).unwrap());
}
