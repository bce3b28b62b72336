use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output};

use dlint_core::report::{parse_json, Report};

fn corpus(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(rel)
}

fn dlint(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dlint"))
        .args(args)
        .env_remove("DLINT_CONFIG")
        .output()
        .unwrap()
}

fn script(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::Builder::new().suffix(".py").tempfile().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

const AVG_ONLY: &str = "from keras.models import Sequential\nfrom keras.layers import *\nmodel = Sequential()\n\
model.add(InputLayer(input_shape=(32, 32, 3)))\nmodel.add(AveragePooling2D((2, 2)))\nmodel.add(Flatten())\n\
model.add(Dense(10, activation='softmax'))\nmodel.compile(loss='categorical_crossentropy', optimizer='adam')\nmodel.fit(x, y)\n";

#[test]
fn exit_codes() {
    let clean = corpus("base/lenet_tf.py");
    assert_eq!(dlint(&["check", clean.to_str().unwrap()]).status.code(), Some(0));

    let fig1 = dlint(&["check", corpus("base/fig1.py").to_str().unwrap()]);
    assert_eq!(fig1.status.code(), Some(2));
    let out = String::from_utf8(fig1.stdout).unwrap();
    assert!(out.contains("fig1.py:16: [APIM-10] error:"), "{out}");

    let warn = script(AVG_ONLY);
    let p = warn.path().to_str().unwrap();
    assert_eq!(dlint(&["check", p]).status.code(), Some(1));
    assert_eq!(dlint(&["check", "--disable", "SI-19", p]).status.code(), Some(0));

    let broken = script("model = (\n");
    let out = dlint(&["check", broken.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stdout).contains("TOOL-ERR"));

    assert_eq!(dlint(&["check", "/no/such/file.py"]).status.code(), Some(3));
    assert_eq!(dlint(&["check", "--only", "BOGUS", p]).status.code(), Some(3));
    assert_eq!(dlint(&["frobnicate"]).status.code(), Some(3));
    assert_eq!(dlint(&["--help"]).status.code(), Some(0));
}

#[test]
fn worst_file_decides_exit_code() {
    let warn = script(AVG_ONLY);
    let out = dlint(&["check", warn.path().to_str().unwrap(), corpus("base/fig1.py").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn list_rules() {
    let all = dlint(&["list-rules"]);
    assert_eq!(all.status.code(), Some(0));
    assert_eq!(String::from_utf8(all.stdout).unwrap().lines().count(), 23);
    let si = String::from_utf8(dlint(&["list-rules", "--only", "SI"]).stdout).unwrap();
    assert_eq!(si.lines().count(), 9);
    assert!(si.lines().all(|l| l.contains("SI-")));
    let json: serde_json::Value = serde_json::from_slice(&dlint(&["list-rules", "--format", "json"]).stdout).unwrap();
    assert_eq!(json.as_array().unwrap().len(), 23);
}

#[test]
fn json_round_trip() {
    let out = dlint(&["check", "--format", "json", corpus("base/fig1.py").to_str().unwrap()]);
    let text = String::from_utf8(out.stdout).unwrap();
    let report = parse_json(&text).unwrap();
    assert_eq!(report.summary.errors, 1);
    assert_eq!(report.summary.warnings, 2);
    let codes: Vec<_> = report.diagnostics.iter().map(|d| d.code.as_str()).collect();
    assert_eq!(codes, ["SI-20", "SI-21", "APIM-10"]);
    assert_eq!(dlint_core::report::render_json(&report), text);

    let many = dlint(&[
        "check",
        "--format",
        "json",
        corpus("base/fig1.py").to_str().unwrap(),
        corpus("base/vgg16_keras.py").to_str().unwrap(),
    ]);
    let reports: Vec<Report> = serde_json::from_slice(&many.stdout).unwrap();
    assert_eq!(reports.len(), 2);
    assert!(reports[1].diagnostics.is_empty());
}

#[test]
fn config_file_from_environment() {
    let warn = script(AVG_ONLY);
    let mut cfg = tempfile::NamedTempFile::new().unwrap();
    writeln!(cfg, "# quiet pooling\ndisable = SI-19\nformat = json").unwrap();
    let run = |extra: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_dlint"))
            .arg("check")
            .args(extra)
            .arg(warn.path())
            .env("DLINT_CONFIG", cfg.path())
            .output()
            .unwrap()
    };
    let out = run(&[]);
    assert_eq!(out.status.code(), Some(0));
    assert!(parse_json(&String::from_utf8(out.stdout).unwrap()).is_ok());
    // flags win over the file
    assert_eq!(run(&["--disable", "IPS-01"]).status.code(), Some(1));

    let mut bad = tempfile::NamedTempFile::new().unwrap();
    writeln!(bad, "colour = red").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_dlint"))
        .args(["check"])
        .arg(warn.path())
        .env("DLINT_CONFIG", bad.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn eval_manifest() {
    let out = dlint(&["eval", corpus("manifest.tsv").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}
