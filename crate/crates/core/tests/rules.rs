use dlint_core::frontend::ScriptSource;
use dlint_core::rules::{catalog, doc_by_code, is_valid_code, CatalogOptions, RuleFilter, Severity};
use dlint_core::{analyze, AnalysisOptions};

fn keras(layers: &[&str], loss: &str) -> String {
    let mut s = String::from("from keras.models import Sequential\nfrom keras.layers import *\nmodel = Sequential()\n");
    for l in layers {
        s.push_str(&format!("model.add({l})\n"));
    }
    s.push_str(&format!("model.compile(loss='{loss}', optimizer='adam')\nmodel.fit(x, y)\n"));
    s
}

fn codes_with(src: &str, opts: &AnalysisOptions) -> Vec<String> {
    let a = analyze(&ScriptSource::new("t.py", src), opts);
    assert!(!a.failed, "{:?}", a.report);
    let mut c: Vec<_> = a.report.diagnostics.iter().map(|d| d.code.clone()).collect();
    c.sort();
    c.dedup();
    c
}

fn codes(src: &str) -> Vec<String> {
    codes_with(src, &AnalysisOptions::default())
}

const HEAD: &str = "InputLayer(input_shape=(32, 32, 3))";

#[test]
fn catalog_shape() {
    let rules = catalog();
    assert_eq!(rules.len(), 23);
    let cats: Vec<_> = rules.iter().map(|r| r.meta.category.as_str()).collect();
    assert_eq!(cats.iter().filter(|c| **c == "IPS").count(), 5);
    assert_eq!(cats.iter().filter(|c| **c == "UT").count(), 4);
    assert_eq!(cats.iter().filter(|c| **c == "APIM").count(), 5);
    assert_eq!(cats.iter().filter(|c| **c == "SI").count(), 9);
    assert!(rules.iter().all(|r| !r.patterns.is_empty()));
    assert_eq!(doc_by_code("si-19").unwrap().meta.severity, Severity::Warning);
    assert_eq!(doc_by_code("APIM-10").unwrap().meta.severity, Severity::Error);
    assert!(is_valid_code("UT-09") && !is_valid_code("UT-10"));
}

#[test]
fn filter_selection() {
    let only_si = RuleFilter { only: vec!["SI".into()], ..Default::default() };
    assert_eq!(only_si.apply(catalog()).len(), 9);
    let dis = RuleFilter { disable: vec!["SI-19".into(), "APIM-10".into()], ..Default::default() };
    assert_eq!(dis.apply(catalog()).len(), 21);
    assert!(RuleFilter { only: vec!["XYZ".into()], ..Default::default() }.validate().is_err());
}

#[test]
fn bias_before_batch_norm_follows_activations_only() {
    let direct = keras(&[HEAD, "Flatten()", "Dense(64)", "BatchNormalization()", "Activation('relu')", "Dense(10, activation='softmax')"], "categorical_crossentropy");
    assert_eq!(codes(&direct), ["SI-16"]);
    let through_dropout = keras(
        &[HEAD, "Flatten()", "Dense(64, activation='relu')", "Dropout(0.5)", "BatchNormalization()", "Dense(10, activation='softmax')"],
        "categorical_crossentropy",
    );
    assert_eq!(codes(&through_dropout), ["SI-17"]);
    let no_bias = keras(&[HEAD, "Flatten()", "Dense(64, use_bias=False)", "BatchNormalization()", "Activation('relu')", "Dense(10, activation='softmax')"], "categorical_crossentropy");
    assert!(codes(&no_bias).is_empty());
}

#[test]
fn loss_and_output_mismatches() {
    let out = |act: &str, units: u32, loss: &str| keras(&[HEAD, "Flatten()", &format!("Dense({units}, activation='{act}')")], loss);
    assert!(codes(&out("sigmoid", 1, "binary_crossentropy")).is_empty());
    assert_eq!(codes(&out("softmax", 2, "binary_crossentropy")), ["APIM-10"]);
    assert_eq!(codes(&out("sigmoid", 10, "categorical_crossentropy")), ["APIM-10"]);
    assert_eq!(codes(&out("softmax", 1, "binary_crossentropy")), ["IPS-05"]);
    assert!(codes(&out("linear", 1, "mse")).is_empty());
}

#[test]
fn output_exemption_is_configurable() {
    let src = keras(&[HEAD, "Flatten()", "Dense(1)"], "mse");
    assert!(codes(&src).is_empty());
    let strict = AnalysisOptions { catalog: CatalogOptions { output_exemption: false }, ..Default::default() };
    assert_eq!(codes_with(&src, &strict), ["IPS-03"]);
}

#[test]
fn disabled_rules_do_not_fire() {
    let src = keras(&[HEAD, "AveragePooling2D((2, 2))", "Flatten()", "Dense(10, activation='softmax')"], "categorical_crossentropy");
    assert_eq!(codes(&src), ["SI-19"]);
    let opts = AnalysisOptions { filter: RuleFilter { disable: vec!["SI-19".into()], ..Default::default() }, ..Default::default() };
    assert!(codes_with(&src, &opts).is_empty());
}

fn conv_pool_stack(c: usize, p: usize) -> String {
    let mut layers = vec![HEAD.to_string()];
    // pairs of identical convs keep the homogeneity rule quiet
    for i in 0..c.max(p) {
        if i < c {
            layers.push("Conv2D(8, (1, 1), activation='relu', padding='same')".into());
        }
        if i < p {
            layers.push("MaxPooling2D((1, 1))".into());
        }
    }
    layers.push("Flatten()".into());
    layers.push("Dense(10, activation='softmax')".into());
    let refs: Vec<&str> = layers.iter().map(String::as_str).collect();
    keras(&refs, "categorical_crossentropy")
}

#[test]
fn excess_pooling_boundary() {
    assert!(!codes(&conv_pool_stack(7, 3)).contains(&"SI-22".to_string()));
    assert!(codes(&conv_pool_stack(6, 4)).contains(&"SI-22".to_string()));
    assert!(!codes(&conv_pool_stack(4, 5)).contains(&"SI-22".to_string()));
}

#[test]
fn report_positions_and_order() {
    let src = keras(&[HEAD, "AveragePooling2D((2, 2))", "Flatten()", "Dense(2, activation='softmax')"], "binary_crossentropy");
    let a = analyze(&ScriptSource::new("t.py", &src), &AnalysisOptions::default());
    let d: Vec<_> = a.report.diagnostics.iter().map(|d| (d.line, d.code.as_str())).collect();
    assert_eq!(d, [(Some(5), "SI-19"), (Some(7), "APIM-10")]);
    assert_eq!(a.report.summary.errors, 1);
    assert_eq!(a.report.summary.warnings, 1);
}
