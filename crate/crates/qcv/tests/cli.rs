use std::path::PathBuf;
use std::process::{Command, Output};

fn qcv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcv")).args(args).output().expect("qcv runs")
}

fn scratch(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qcv-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

const HEADER: &str = "[scenario]\nwindow = -3:3\n[ring]\nvars = x, y\n";

#[test]
fn list_names_every_builtin() {
    let out = qcv(&["list"]);
    assert!(out.status.success());
    let names: Vec<String> = String::from_utf8(out.stdout).unwrap().lines().map(String::from).collect();
    assert_eq!(
        names,
        ["double-origin-flat", "sections-star", "h1-punctured", "matlis-bidual", "lemma21-free", "affine-control"]
    );
}

#[test]
fn builtin_json_report() {
    let out = qcv(&["builtin", "h1-punctured", "--window", "-4:2"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["scenario"], "h1-punctured");
    assert_eq!(v["window"], serde_json::json!([-4, 2]));
    let h1 = &v["checks"][0]["tables"]["H1"];
    assert_eq!((h1["-2"].clone(), h1["-3"].clone(), h1["-4"].clone()), (1.into(), 2.into(), 3.into()));
    assert_eq!(v["checks"][0]["verdict"], "h1-nonzero");
}

#[test]
fn table_format_and_out_file() {
    let path = std::env::temp_dir().join(format!("qcv-cli-out-{}.txt", std::process::id()));
    let out = qcv(&["builtin", "sections-star", "--window", "-2:2", "--format", "table", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("check: star-over-W"));
    assert!(text.contains("verdict: left-exact-not-right-exact"));
    let _ = std::fs::remove_file(path);
}

#[test]
fn prime_field_override() {
    let out = qcv(&["builtin", "matlis-bidual", "--window", "-3:3", "--field", "Fp:101"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn mismatch_exits_1() {
    let text = format!("{HEADER}[scheme]\ncover = x; y\n[check h: h1]\n[expect]\nh = h1-zero-in-window\n");
    let out = qcv(&["run", scratch("mismatch.qcs", &text).to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mismatch"));
}

#[test]
fn cap_exhaustion_exits_2() {
    // sections of O over the affine D(x) are infinite-dimensional in each degree
    let text = format!("{HEADER}[scheme]\ncover = x\n[check s: sections]\nmodule = R\nopen = W\n");
    let out = qcv(&["run", scratch("exhaust.qcs", &text).to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["checks"][0]["verdict"], "inconclusive");
}

#[test]
fn input_errors_exit_3() {
    assert_eq!(qcv(&["run", "/nonexistent/scenario.qcs"]).status.code(), Some(3));
    assert_eq!(qcv(&["builtin", "no-such-scenario"]).status.code(), Some(3));
    let bad = format!("{HEADER}[scheme]\ncover = x\n[module M]\ngens = 0\nrel = x + y^2\n");
    let out = qcv(&["run", scratch("bad.qcs", &bad).to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 9"));
    let empty = qcv(&["run", scratch("empty.qcs", "").to_str().unwrap()]);
    assert_eq!(empty.status.code(), Some(3));
}

#[test]
fn reports_are_deterministic() {
    let a = qcv(&["builtin", "double-origin-flat", "--window", "-2:3"]);
    let b = qcv(&["builtin", "double-origin-flat", "--window", "-2:3"]);
    assert_eq!(a.stdout, b.stdout);
}
