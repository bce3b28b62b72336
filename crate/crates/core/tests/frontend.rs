mod common;

use dlint_core::frontend::{extract_graph, Dialect, FrontendError, Options, ScriptSource};
use dlint_core::graph::{Attr, EdgeLabel, NodeKind};
use dlint_core::tensor::TensorShape;
use dlint_core::{analyze, AnalysisOptions};

use common::chain;

fn corpus(rel: &str) -> String {
    std::fs::read_to_string(format!("{}/../../corpus/{rel}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

fn extract(src: &str) -> Result<dlint_core::frontend::Extraction, FrontendError> {
    extract_graph(&ScriptSource::new("t.py", src), Options::default())
}

fn codes(src: &str) -> Vec<String> {
    let a = analyze(&ScriptSource::new("t.py", src), &AnalysisOptions::default());
    let mut c: Vec<_> = a.report.diagnostics.iter().map(|d| d.code.clone()).collect();
    c.dedup();
    c
}

#[test]
fn single_dense_model() {
    let src = "from keras.models import Sequential\nfrom keras.layers import Dense\n\
               model = Sequential()\nmodel.add(Dense(10, input_shape=(4,)))\n";
    let ex = extract(src).unwrap();
    assert_eq!(ex.dialect, Dialect::Keras);
    let g = dlint_core::shape::propagate_shapes(ex.graph);
    let input = g.first_of(NodeKind::InputLayer).unwrap();
    assert_eq!(input.shape(Attr::OutShape), Some(&TensorShape::batched(&[4])));
    let layers = chain(&g);
    assert_eq!(layers.len(), 1);
    assert_eq!(layers[0].text(Attr::LayerType), Some("dense"));
    assert_eq!(layers[0].int(Attr::Units), Some(10));
    assert_eq!(layers[0].shape(Attr::OutShape), Some(&TensorShape::batched(&[10])));
    assert_eq!(layers[0].source_line, Some(4));
}

#[test]
fn fig1_layers_in_source_order() {
    let ex = extract(&corpus("base/fig1.py")).unwrap();
    let g = dlint_core::shape::propagate_shapes(ex.graph);
    let layers = chain(&g);
    let types: Vec<_> = layers.iter().map(|n| n.text(Attr::LayerType).unwrap()).collect();
    assert_eq!(
        types,
        ["conv2d", "maxpool2d", "conv2d", "maxpool2d", "conv2d", "maxpool2d", "flatten", "dense", "dense"]
    );
    let lines: Vec<_> = layers.iter().map(|n| n.source_line.unwrap()).collect();
    assert_eq!(lines, [8, 9, 10, 11, 12, 13, 14, 15, 16]);
    assert_eq!(layers[0].shape(Attr::OutShape), Some(&TensorShape::batched(&[217, 217, 224])));
    assert_eq!(layers[6].shape(Attr::OutShape), Some(&TensorShape::batched(&[25 * 25 * 13])));
    let arch = g.first_of(NodeKind::Architecture).unwrap().id;
    let last = g.successors(arch, EdgeLabel::EndsWith).next();
    assert!(last.is_some());
}

#[test]
fn tf_script_without_initializer() {
    let src = corpus("base/lenet_tf.py").replace("    sess.run(tf.global_variables_initializer())\n", "");
    let ex = extract(&src).unwrap();
    assert_eq!(ex.dialect, Dialect::TensorflowV1);
    let learner = ex.graph.first_of(NodeKind::Learner).unwrap();
    assert_eq!(learner.flag(Attr::OptimizerLinked), Some(true));
    assert_eq!(learner.flag(Attr::HasTrainingLoop), Some(true));
    assert_eq!(learner.flag(Attr::HasInitializer), Some(false));
    assert_eq!(codes(&src), ["APIM-12"]);
}

#[test]
fn dump_is_deterministic() {
    let src = corpus("base/vgg16_keras.py");
    let a = extract(&src).unwrap().graph.dump();
    let b = extract(&src).unwrap().graph.dump();
    assert_eq!(a, b);
    assert!(!a.is_empty());
}

#[test]
fn builder_loops_unroll() {
    let g = extract(&corpus("base/vgg16_keras.py")).unwrap().graph;
    assert_eq!(chain(&g).len(), 24);
}

#[test]
fn functional_chain_is_accepted() {
    let src = "from keras.layers import Input, Dense\nfrom keras.models import Model\n\
               inp = Input(shape=(8,))\nh = Dense(16, activation='relu')(inp)\n\
               out = Dense(1, activation='sigmoid')(h)\nmodel = Model(inp, out)\n\
               model.compile(loss='binary_crossentropy', optimizer='adam')\nmodel.fit(x, y)\n";
    let g = extract(src).unwrap().graph;
    assert_eq!(chain(&g).len(), 2);
    assert!(codes(src).is_empty());
}

#[test]
fn frontend_errors() {
    assert!(matches!(extract("model = (\n"), Err(FrontendError::Syntax { .. })));
    assert!(matches!(extract("import numpy as np\nx = np.zeros(3)\n"), Err(FrontendError::NoModelFound)));
    let merge = "from keras.layers import Input, Dense, concatenate\nfrom keras.models import Model\n\
                 a = Input(shape=(4,))\nb = Dense(4)(a)\nc = Dense(4)(a)\nm = concatenate([b, c])\n\
                 model = Model(a, Dense(1)(m))\n";
    let r = extract(merge);
    assert!(matches!(r, Err(FrontendError::UnsupportedTopology { .. })), "{:?}", r.map(|e| e.graph.dump()));
}

#[test]
fn tool_errors_carry_lines() {
    let a = analyze(&ScriptSource::new("t.py", "x = 1\ny = (\n"), &AnalysisOptions::default());
    assert!(a.failed);
    assert_eq!(a.report.diagnostics.len(), 1);
    assert_eq!(a.report.diagnostics[0].code, "TOOL-ERR");
}
