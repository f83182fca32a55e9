use cubulate_cli::{run, RunManifest, EXIT_FAIL, EXIT_PASS, EXIT_USAGE};
use std::path::PathBuf;

fn presentation(name: &str) -> String {
    format!("{}/../../presentations/{name}.sgc", env!("CARGO_MANIFEST_DIR"))
}

fn exec(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("cubulate").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn manifest(args: &[&str]) -> (i32, RunManifest) {
    let (code, out, err) = exec(args);
    let m = serde_json::from_str(&out).unwrap_or_else(|e| panic!("{e}: {out}\n{err}"));
    (code, m)
}

#[test]
fn validate_reports_the_exponent() {
    let p1 = presentation("p1");
    let (code, m) = manifest(&["validate", &p1]);
    assert_eq!(code, EXIT_PASS);
    assert_eq!(m.stats["min_exponent"], 4);
    assert_eq!(m.presentation.as_deref(), Some("p1.sgc"));
    assert_eq!(m.presentation_sha256.as_ref().map(|h| h.len()), Some(64));
    // the flag form is equivalent
    let (_, flagged) = manifest(&["validate", "-p", &p1]);
    assert_eq!(flagged, m);
}

#[test]
fn reduce_examples() {
    let p1 = presentation("p1");
    let (code, m) = manifest(&["reduce", &p1, "--word", "(a b)^4", "--oracle-radius", "12"]);
    assert_eq!(code, EXIT_PASS);
    assert_eq!(m.stats["trivial"], true);
    assert_eq!(m.stats["area"], 1);
    let (code, m) = manifest(&["reduce", &p1, "--word", "a b"]);
    assert_eq!(code, EXIT_PASS);
    assert_eq!(m.stats["trivial"], false);
    assert!(m.stats["area"].is_null());
}

#[test]
fn usage_errors_exit_one() {
    let p1 = presentation("p1");
    assert_eq!(exec(&["frobnicate"]).0, EXIT_USAGE);
    assert_eq!(exec(&["validate"]).0, EXIT_USAGE);
    assert_eq!(exec(&["validate", "/nonexistent.sgc"]).0, EXIT_USAGE);
    assert_eq!(exec(&["reduce", &p1, "--word", "q q"]).0, EXIT_USAGE);
    assert_eq!(exec(&["validate", &p1, "--format", "dot"]).0, EXIT_USAGE);
    let (code, out, _) = exec(&["--help"]);
    assert_eq!(code, EXIT_PASS);
    assert!(out.contains("check-all"));
}

#[test]
fn failed_assertions_exit_two() {
    let dir = std::env::temp_dir().join(format!("cubulate-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    // exponent three is below the hypothesis
    let file = dir.join("cube.sgc");
    std::fs::write(&file, "factor A free a\nfactor B free b\nedge t A B\nrelator (a t b t^-1)^3\n").unwrap();
    let (code, m) = manifest(&["validate", file.to_str().unwrap()]);
    assert_eq!(code, EXIT_FAIL);
    assert!(m.assertions.iter().any(|a| a.name == "min-exponent" && !a.passed));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn manifests_are_deterministic() {
    let p1 = presentation("p1");
    let args = ["dual", p1.as_str(), "--radius", "3", "--seed", "11"];
    let (c1, a, _) = exec(&args);
    let (c2, b, _) = exec(&args);
    assert_eq!((c1, c2), (EXIT_PASS, EXIT_PASS));
    assert_eq!(a, b);
    // parallelism never changes artifacts
    let mut seq = args.to_vec();
    seq.push("--sequential");
    let (_, s, _) = exec(&seq);
    let strip = |t: &str| t.replace("\"sequential\": true", "\"sequential\": false");
    assert_eq!(strip(&s), a);
}

#[test]
fn dot_and_out_dir() {
    let p2 = presentation("p2");
    let dir: PathBuf = std::env::temp_dir().join(format!("cubulate-out-{}", std::process::id()));
    let (code, out, _) = exec(&["diagram", &p2, "--format", "dot", "--out-dir", dir.to_str().unwrap()]);
    assert_eq!(code, EXIT_PASS);
    assert!(out.starts_with("digraph diagram"));
    assert_eq!(std::fs::read_to_string(dir.join("diagram.dot")).unwrap(), out);
    let m: RunManifest = serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m.subcommand, "diagram");
    assert_eq!(m.stats["area"], 9);
    std::fs::remove_dir_all(&dir).unwrap();

    let (code, out, _) = exec(&["walls", &p2, "--radius", "2", "--format", "dot"]);
    assert_eq!(code, EXIT_PASS);
    assert!(out.starts_with("graph") || out.starts_with("digraph"), "{}", &out[..out.len().min(40)]);
}

#[test]
fn subcommands_pass_on_small_balls() {
    let p1 = presentation("p1");
    for args in [
        vec!["ball", p1.as_str(), "--radius", "4"],
        vec!["horoball", "--base-len", "32", "--depth", "5"],
        vec!["diagram", p1.as_str(), "--word", "(a b)^4 a (a b)^4 a^-1"],
    ] {
        let (code, out, err) = exec(&args);
        assert_eq!(code, EXIT_PASS, "{args:?}\n{out}\n{err}");
    }
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_cubulate");
    let status = std::process::Command::new(bin).args(["validate", &presentation("p1")]).output().unwrap();
    assert_eq!(status.status.code(), Some(EXIT_PASS));
    let status = std::process::Command::new(bin).arg("bogus").output().unwrap();
    assert_eq!(status.status.code(), Some(EXIT_USAGE));
}

#[test]
fn manifest_keys_match_the_schema() {
    let path = format!("{}/../../docs/schema/manifest.v1.json", env!("CARGO_MANIFEST_DIR"));
    let schema: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(schema["properties"]["schema_version"]["const"], cubulate_cli::SCHEMA_VERSION);
    let mut required: Vec<&str> = schema["required"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    let (_, out, _) = exec(&["validate", &presentation("p0")]);
    let json: serde_json::Value = serde_json::from_str(&out).unwrap();
    let mut keys: Vec<&str> = json.as_object().unwrap().keys().map(|k| k.as_str()).collect();
    required.sort_unstable();
    keys.sort_unstable();
    assert_eq!(keys, required);
}
