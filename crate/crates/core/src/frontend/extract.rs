//! Graph construction from a recorded call trace.

use std::collections::BTreeSet;

use super::defaults;
use super::interp::{ApiCall, Value};
use super::names::{is_merge, layer_kind};
use super::recognize::{recognize_layer, tensor_input, LayerSpec};
use super::{Dialect, Extraction, FrontendError};
use crate::graph::{Attr, AttrValue, AttributedGraph, EdgeLabel, NodeId, NodeKind};
use crate::tensor::{Dim, TensorShape};

pub fn build(calls: &[ApiCall], dialect: Dialect) -> Result<Extraction, FrontendError> {
    match dialect {
        Dialect::TensorflowV1 => tf1(calls),
        _ => keras(calls),
    }
}

struct Builder {
    g: AttributedGraph,
    learner: NodeId,
    warnings: Vec<String>,
}

struct Chain {
    input_shape: Option<TensorShape>,
    input_line: Option<u32>,
    layers: Vec<(LayerSpec, u32)>,
    labels_line: Option<u32>,
}

impl Builder {
    fn new(dialect: Dialect, chain: Chain) -> Builder {
        let mut g = AttributedGraph::new();
        let program = g.add_node_with(NodeKind::Program, [(Attr::Dialect, AttrValue::text(dialect.as_str()))], None);
        let arch = g.add_node(NodeKind::Architecture);
        let learner = g.add_node(NodeKind::Learner);
        let data = g.add_node_with(NodeKind::Data, [], chain.input_line);
        let labels = g.add_node_with(NodeKind::Labels, [], chain.labels_line);
        let input_attrs = chain.input_shape.map(|s| (Attr::OutShape, AttrValue::Shape(s)));
        let input = g.add_node_with(NodeKind::InputLayer, input_attrs, chain.input_line);
        let edges = [
            (program, EdgeLabel::HasArchitecture, arch),
            (program, EdgeLabel::HasLearner, learner),
            (program, EdgeLabel::HasData, data),
            (data, EdgeLabel::HasLabels, labels),
            (arch, EdgeLabel::EndsWith, labels),
            (arch, EdgeLabel::StartsWith, input),
        ];
        for (s, l, d) in edges {
            g.add_edge(s, l, d).expect("skeleton nodes exist");
        }
        let mut prev = input;
        for (spec, line) in chain.layers {
            let id = g.add_node_with(NodeKind::Layer, spec.attrs, Some(line));
            g.add_edge(prev, EdgeLabel::Next, id).expect("chain nodes exist");
            prev = id;
        }
        Builder {
            g,
            learner,
            warnings: Vec::new(),
        }
    }

    fn attach(&mut self, label: EdgeLabel, kind: NodeKind, attrs: Vec<(Attr, AttrValue)>, line: Option<u32>) -> NodeId {
        let id = self.g.add_node_with(kind, attrs, line);
        self.g.add_edge(self.learner, label, id).expect("learner exists");
        id
    }

    fn learner_flags(&mut self, flags: [(Attr, bool); 4], line: Option<u32>) {
        for (a, v) in flags {
            self.g.set_attr(self.learner, a, AttrValue::Bool(v)).expect("learner exists");
        }
        self.g.set_source_line(self.learner, line).expect("learner exists");
    }

    fn finish(self, dialect: Dialect) -> Extraction {
        Extraction {
            graph: self.g,
            dialect,
            warnings: self.warnings,
        }
    }
}

fn last_component(path: &str) -> &str {
    path.rsplit('.').next().unwrap_or(path)
}

fn is_call_to(v: Option<&Value>, idx: usize) -> bool {
    matches!(v, Some(Value::Call(i)) if *i == idx)
}

fn shape_of(v: &Value, has_batch: bool) -> Option<TensorShape> {
    let Value::List(items) = v else { return None };
    let items = if has_batch { items.get(1..)? } else { &items[..] };
    let mut dims = vec![Dim::Batch];
    for d in items {
        dims.push(match d.as_int() {
            Some(k) if k >= 1 => Dim::Known(k as u64),
            _ => Dim::Unknown,
        });
    }
    Some(TensorShape::new(dims))
}

fn topology(line: u32, message: impl Into<String>) -> FrontendError {
    FrontendError::UnsupportedTopology {
        line: Some(line),
        message: message.into(),
    }
}

// ---------------------------------------------------------------- keras

fn keras(calls: &[ApiCall]) -> Result<Extraction, FrontendError> {
    let models: Vec<usize> = calls
        .iter()
        .enumerate()
        .filter(|(_, c)| matches!(c.callee.as_str(), "keras.models.Sequential" | "keras.models.Model"))
        .map(|(i, _)| i)
        .collect();
    let Some(&model) = models.first() else {
        return Err(FrontendError::NoModelFound);
    };
    let chain = if calls[model].callee == "keras.models.Sequential" {
        sequential_chain(calls, model)?
    } else {
        functional_chain(calls, model)?
    };
    if chain.layers.is_empty() && !calls.iter().any(|c| c.method() == Some("compile")) {
        return Err(FrontendError::NoModelFound);
    }
    let mut b = Builder::new(Dialect::Keras, chain);
    for &other in &models[1..] {
        b.warnings.push(format!(
            "line {}: only the first model is checked; model built here is ignored",
            calls[other].line
        ));
    }

    let on_model = |c: &&ApiCall| is_call_to(c.receiver.as_ref(), model);
    let compile = calls.iter().filter(on_model).find(|c| c.method() == Some("compile"));
    let fit = calls
        .iter()
        .filter(on_model)
        .find(|c| matches!(c.method(), Some("fit" | "fit_generator" | "train_on_batch")));

    if let Some(c) = compile {
        keras_compile(&mut b, c, calls);
    }
    b.learner_flags(
        [
            (Attr::HasInitializer, true),
            (Attr::OptimizerLinked, compile.is_some()),
            (Attr::GradsReset, true),
            (Attr::HasTrainingLoop, fit.is_some()),
        ],
        compile.map(|c| c.line),
    );
    if let Some(f) = fit {
        let mut attrs = Vec::new();
        let epochs = f.kwarg("epochs").or_else(|| f.kwarg("nb_epoch"));
        let epochs = if f.method() == Some("fit") { epochs.or_else(|| f.args.get(3)) } else { epochs };
        if let Some(e) = epochs.and_then(Value::as_int) {
            attrs.push((Attr::Epochs, AttrValue::Int(e)));
        }
        let batch = if f.method() == Some("fit") {
            f.arg("batch_size", 2)
        } else {
            f.kwarg("batch_size")
        };
        if let Some(bs) = batch.and_then(Value::as_int) {
            attrs.push((Attr::BatchSize, AttrValue::Int(bs)));
        }
        b.attach(EdgeLabel::HasHyperparams, NodeKind::Hyperparameters, attrs, Some(f.line));
    }
    Ok(b.finish(Dialect::Keras))
}

fn keras_input_call(c: &ApiCall) -> Option<Option<TensorShape>> {
    match c.callee.as_str() {
        "keras.layers.InputLayer" | "keras.layers.Input" => Some(
            c.kwarg("input_shape")
                .or_else(|| c.kwarg("shape"))
                .or_else(|| c.args.first())
                .and_then(|v| shape_of(v, false))
                .or_else(|| {
                    c.kwarg("batch_input_shape")
                        .or_else(|| c.kwarg("batch_shape"))
                        .and_then(|v| shape_of(v, true))
                }),
        ),
        _ => None,
    }
}

fn sequential_chain(calls: &[ApiCall], model: usize) -> Result<Chain, FrontendError> {
    let mut members: Vec<&Value> = Vec::new();
    if let Some(Value::List(items)) = calls[model].arg("layers", 0) {
        members.extend(items.iter());
    }
    for c in calls {
        if c.method() == Some("add") && is_call_to(c.receiver.as_ref(), model) {
            if let Some(v) = c.arg("layer", 0) {
                members.push(v);
            }
        }
    }
    let mut chain = Chain {
        input_shape: None,
        input_line: None,
        layers: Vec::new(),
        labels_line: None,
    };
    for v in members {
        let Value::Call(i) = v else { continue };
        let c = &calls[*i];
        if is_merge(&c.callee) {
            return Err(topology(c.line, format!("{} joins several tensors", c.callee)));
        }
        if let Some(shape) = keras_input_call(c) {
            if chain.layers.is_empty() && chain.input_shape.is_none() {
                chain.input_shape = shape;
                chain.input_line = Some(c.line);
            }
            continue;
        }
        if let Some(spec) = recognize_layer(c, calls) {
            if chain.layers.is_empty() && chain.input_shape.is_none() {
                chain.input_shape = spec.input_shape.clone();
                chain.input_line = Some(c.line);
            }
            chain.layers.push((spec, c.line));
        }
    }
    Ok(chain)
}

/// A functional model is accepted when it is a single linear chain from one
/// `Input` to one output.
fn functional_chain(calls: &[ApiCall], model: usize) -> Result<Chain, FrontendError> {
    let m = &calls[model];
    let mut cur = m
        .kwarg("outputs")
        .or_else(|| m.kwarg("output"))
        .or_else(|| m.args.get(1))
        .cloned();
    let mut layers = Vec::new();
    let mut chain = Chain {
        input_shape: None,
        input_line: None,
        layers: Vec::new(),
        labels_line: None,
    };
    let mut guard = calls.len() + 1;
    while let Some(v) = cur.take() {
        guard -= 1;
        if guard == 0 {
            break;
        }
        let idx = match v {
            Value::Call(i) => i,
            Value::List(items) if items.len() == 1 => {
                cur = items.into_iter().next();
                continue;
            }
            Value::List(_) => return Err(topology(m.line, "model has several outputs")),
            _ => break,
        };
        let c = &calls[idx];
        if let Some(shape) = keras_input_call(c) {
            chain.input_shape = shape;
            chain.input_line = Some(c.line);
            break;
        }
        if is_merge(&c.callee) {
            return Err(topology(c.line, format!("{} joins several tensors", c.callee)));
        }
        if c.callee != "()" {
            break;
        }
        let Some(Value::Call(layer_idx)) = &c.receiver else { break };
        let layer = &calls[*layer_idx];
        if is_merge(&layer.callee) {
            return Err(topology(c.line, format!("{} joins several tensors", layer.callee)));
        }
        if let Some(spec) = recognize_layer(layer, calls) {
            if spec.input_shape.is_some() {
                chain.input_shape = spec.input_shape.clone();
            }
            layers.push((spec, c.line));
        }
        cur = c.args.first().cloned();
    }
    layers.reverse();
    chain.layers = layers;
    Ok(chain)
}

fn keras_compile(b: &mut Builder, c: &ApiCall, calls: &[ApiCall]) {
    if let Some(loss) = c.arg("loss", 1) {
        let (name, logits) = match loss {
            Value::Str(s) => (Some(defaults::loss_name(s)), Some(false)),
            Value::Path(p) => (Some(defaults::loss_name(last_component(p))), Some(false)),
            Value::Call(i) if calls[*i].callee.starts_with("keras.losses.") => {
                let lc = &calls[*i];
                let logits = match lc.kwarg("from_logits") {
                    None => Some(false),
                    Some(v) => v.as_bool(),
                };
                (Some(defaults::loss_name(last_component(&lc.callee))), logits)
            }
            _ => (None, None),
        };
        let mut attrs = Vec::new();
        if let Some(n) = name {
            attrs.push((Attr::Name, AttrValue::Text(n)));
        }
        if let Some(l) = logits {
            attrs.push((Attr::FromLogits, AttrValue::Bool(l)));
        }
        b.attach(EdgeLabel::HasLoss, NodeKind::Loss, attrs, Some(c.line));
    }

    let mut attrs = Vec::new();
    let mut line = c.line;
    match c.arg("optimizer", 0) {
        // compile(optimizer=None) leaves the model without an optimizer
        Some(Value::None) => return attach_metrics(b, c),
        None => attrs.push((Attr::Name, AttrValue::text(defaults::OPTIMIZER))),
        Some(Value::Str(s)) => attrs.push((Attr::Name, AttrValue::Text(defaults::optimizer_name(s)))),
        Some(Value::Path(p)) => attrs.push((Attr::Name, AttrValue::Text(defaults::optimizer_name(last_component(p))))),
        Some(Value::Call(i)) if calls[*i].callee.starts_with("keras.optimizers.") => {
            let oc = &calls[*i];
            line = oc.line;
            attrs.push((Attr::Name, AttrValue::Text(defaults::optimizer_name(last_component(&oc.callee)))));
            let lr = oc.kwarg("learning_rate").or_else(|| oc.kwarg("lr")).or_else(|| oc.args.first());
            if let Some(lr) = lr.and_then(Value::as_f64) {
                attrs.push((Attr::LearningRate, AttrValue::Float(lr)));
            }
        }
        Some(_) => {}
    }
    b.attach(EdgeLabel::HasOptimizer, NodeKind::Optimizer, attrs, Some(line));
    attach_metrics(b, c);
}

fn attach_metrics(b: &mut Builder, c: &ApiCall) {
    if let Some(Value::List(metrics)) = c.arg("metrics", 2) {
        for m in metrics {
            let name = match m {
                Value::Str(s) => Some(s.to_ascii_lowercase()),
                Value::Path(p) => Some(last_component(p).to_ascii_lowercase()),
                _ => None,
            };
            let attrs: Vec<_> = name.map(|n| (Attr::Name, AttrValue::Text(n))).into_iter().collect();
            b.attach(EdgeLabel::HasMetric, NodeKind::Metric, attrs, Some(c.line));
        }
    }
}

// ---------------------------------------------------------------- tensorflow v1

struct LossOp {
    name: &'static str,
    from_logits: bool,
    logits_kw: &'static str,
    logits_pos: usize,
}

const fn op(name: &'static str, from_logits: bool, logits_kw: &'static str, logits_pos: usize) -> LossOp {
    LossOp {
        name,
        from_logits,
        logits_kw,
        logits_pos,
    }
}

fn loss_op(callee: &str) -> Option<LossOp> {
    Some(match callee {
        "tf.losses.softmax_cross_entropy" => op("categorical_crossentropy", true, "logits", 1),
        "tf.losses.sparse_softmax_cross_entropy" => op("sparse_categorical_crossentropy", true, "logits", 1),
        "tf.losses.sigmoid_cross_entropy" => op("binary_crossentropy", true, "logits", 1),
        "tf.losses.log_loss" => op("binary_crossentropy", false, "predictions", 1),
        "tf.losses.mean_squared_error" => op("mse", false, "predictions", 1),
        "tf.losses.absolute_difference" => op("mae", false, "predictions", 1),
        "tf.losses.huber_loss" => op("huber", false, "predictions", 1),
        "tf.losses.hinge_loss" => op("hinge", false, "logits", 1),
        "tf.nn.softmax_cross_entropy_with_logits" | "tf.nn.softmax_cross_entropy_with_logits_v2" => {
            op("categorical_crossentropy", true, "logits", 2)
        }
        "tf.nn.sparse_softmax_cross_entropy_with_logits" => op("sparse_categorical_crossentropy", true, "logits", 2),
        "tf.nn.sigmoid_cross_entropy_with_logits" => op("binary_crossentropy", true, "logits", 2),
        // hand-written cross-entropy and squared error
        "tf.log" | "tf.math.log" => op("categorical_crossentropy", false, "x", 0),
        "tf.square" | "tf.math.square" => op("mse", false, "x", 0),
        "tf.squared_difference" | "tf.math.squared_difference" => op("mse", false, "y", 1),
        _ => return None,
    })
}

/// Transitive dependency sets are never materialized: every call only depends
/// on earlier calls, so per-call reachability flags are filled in index order.
fn reaches(calls: &[ApiCall], hit: impl Fn(usize) -> bool) -> Vec<bool> {
    let mut out = vec![false; calls.len()];
    for (i, c) in calls.iter().enumerate() {
        out[i] = hit(i) || c.direct_deps().iter().any(|&d| d < i && out[d]);
    }
    out
}

fn value_reaches(v: &Value, flags: &[bool]) -> bool {
    let mut deps = BTreeSet::new();
    v.direct_deps(&mut deps);
    deps.iter().any(|&d| flags.get(d).copied().unwrap_or(false))
}

fn logits_of<'a>(c: &'a ApiCall, op: &LossOp) -> Option<&'a Value> {
    c.kwarg(op.logits_kw)
        .or_else(|| c.args.get(op.logits_pos))
        .or_else(|| c.args.last())
}

struct Walk {
    layers: Vec<(LayerSpec, u32)>,
    /// First layer met walking backwards, i.e. the network output.
    head: Option<usize>,
    placeholder: Option<usize>,
}

/// Follows the tensor chain backwards from `start` to a placeholder.
fn walk_back(calls: &[ApiCall], start: &Value, builds: &[bool]) -> Result<Walk, FrontendError> {
    let mut w = Walk {
        layers: Vec::new(),
        head: None,
        placeholder: None,
    };
    let mut cur: BTreeSet<usize> = BTreeSet::new();
    start.direct_deps(&mut cur);
    loop {
        let live: Vec<usize> = cur.iter().copied().filter(|&d| builds[d]).collect();
        let next = match live.as_slice() {
            [one] => *one,
            [] => {
                w.placeholder = cur.iter().rev().copied().find(|&d| calls[d].callee == "tf.placeholder");
                break;
            }
            many => {
                let line = calls[*many.iter().max().expect("non-empty")].line;
                return Err(topology(line, "a tensor is computed from several layer chains"));
            }
        };
        let c = &calls[next];
        if is_merge(&c.callee) {
            return Err(topology(c.line, format!("{} joins several tensors", c.callee)));
        }
        cur.clear();
        match recognize_layer(c, calls) {
            Some(spec) => {
                w.head.get_or_insert(next);
                w.layers.push((spec, c.line));
                if let Some(t) = tensor_input(c) {
                    t.direct_deps(&mut cur);
                }
            }
            None => cur = c.direct_deps(),
        }
        cur.retain(|&d| d < next);
    }
    w.layers.reverse();
    Ok(w)
}

fn tf1(calls: &[ApiCall]) -> Result<Extraction, FrontendError> {
    let is_layer = |i: usize| layer_kind(&calls[i].callee).is_some();
    let is_placeholder = |i: usize| calls[i].callee == "tf.placeholder";
    // calls whose value flows from a layer or from a placeholder through a layer
    let builds = reaches(calls, is_layer);

    let optimizers: Vec<usize> = (0..calls.len())
        .filter(|&i| calls[i].callee.starts_with("tf.train.") && calls[i].callee.ends_with("Optimizer"))
        .collect();
    let minimizes: Vec<usize> = (0..calls.len())
        .filter(|&i| matches!(calls[i].method(), Some("minimize" | "compute_gradients")))
        .filter(|&i| calls[i].receiver.as_ref().is_some_and(|r| optimizers.iter().any(|&o| is_call_to(Some(r), o))))
        .collect();

    let candidates: Vec<(usize, LossOp)> = calls
        .iter()
        .enumerate()
        .filter_map(|(i, c)| loss_op(&c.callee).map(|op| (i, op)))
        .filter(|(i, op)| logits_of(&calls[*i], op).is_some_and(|v| value_reaches(v, &builds)))
        .collect();
    // prefer the loss the optimizer minimizes
    let minimized = |i: usize| {
        let flags = reaches(calls, |k| k == i);
        minimizes.iter().any(|&m| calls[m].arg("loss", 0).is_some_and(|v| value_reaches(v, &flags)))
    };
    let chosen = candidates
        .iter()
        .rev()
        .find(|(i, _)| minimized(*i))
        .or_else(|| candidates.last());

    let walk = match chosen {
        Some((i, op)) => {
            let v = logits_of(&calls[*i], op).expect("candidate has logits");
            walk_back(calls, v, &builds)?
        }
        None => match (0..calls.len()).rev().find(|&i| is_layer(i)) {
            Some(last) => walk_back(calls, &Value::Call(last), &builds)?,
            None => return Err(FrontendError::NoModelFound),
        },
    };
    if walk.layers.is_empty() {
        return Err(FrontendError::NoModelFound);
    }

    let labels = chosen.and_then(|(i, op)| {
        let c = &calls[*i];
        let mut deps = c.direct_deps();
        if let Some(l) = logits_of(c, op) {
            let mut ld = BTreeSet::new();
            l.direct_deps(&mut ld);
            deps.retain(|d| !ld.contains(d));
        }
        deps.into_iter().find(|&d| is_placeholder(d))
    });
    let input_shape = walk
        .placeholder
        .and_then(|p| calls[p].arg("shape", 1))
        .and_then(|v| shape_of(v, true));
    let chain = Chain {
        input_shape,
        input_line: walk.placeholder.map(|p| calls[p].line),
        layers: walk.layers,
        labels_line: labels.map(|l| calls[l].line),
    };
    let mut b = Builder::new(Dialect::TensorflowV1, chain);

    let mut linked_minimize = None;
    if let Some((loss_idx, op)) = chosen {
        let c = &calls[*loss_idx];
        let mut name = op.name;
        if matches!(c.callee.as_str(), "tf.log" | "tf.math.log") {
            // y*log(p) + (1-y)*log(1-p) takes the log of the output twice
            let logs = candidates
                .iter()
                .filter(|(i, o)| o.name == op.name && calls[*i].callee == c.callee)
                .filter(|(i, o)| {
                    logits_of(&calls[*i], o)
                        .and_then(|v| walk_back(calls, v, &builds).ok())
                        .is_some_and(|w2| w2.head == walk.head)
                })
                .count();
            if logs >= 2 {
                name = "binary_crossentropy";
            }
        }
        b.attach(
            EdgeLabel::HasLoss,
            NodeKind::Loss,
            vec![
                (Attr::Name, AttrValue::text(name)),
                (Attr::FromLogits, AttrValue::Bool(op.from_logits)),
            ],
            Some(c.line),
        );
        let flags = reaches(calls, |k| k == *loss_idx);
        linked_minimize = minimizes
            .iter()
            .copied()
            .find(|&m| calls[m].arg("loss", 0).is_some_and(|v| value_reaches(v, &flags)));
    }

    let opt = linked_minimize
        .and_then(|m| match &calls[m].receiver {
            Some(Value::Call(o)) => Some(*o),
            _ => None,
        })
        .or_else(|| optimizers.first().copied());
    if let Some(o) = opt {
        let oc = &calls[o];
        let mut attrs = vec![(Attr::Name, AttrValue::Text(defaults::optimizer_name(last_component(&oc.callee))))];
        if let Some(lr) = oc.arg("learning_rate", 0).and_then(Value::as_f64) {
            attrs.push((Attr::LearningRate, AttrValue::Float(lr)));
        }
        b.attach(EdgeLabel::HasOptimizer, NodeKind::Optimizer, attrs, Some(oc.line));
    }

    // update ops: minimize, or apply_gradients (fed by compute_gradients)
    let updates: Vec<usize> = (0..calls.len())
        .filter(|&i| matches!(calls[i].method(), Some("minimize" | "apply_gradients")))
        .collect();
    let runs_update = reaches(calls, |k| updates.contains(&k));
    let training_loop = calls
        .iter()
        .enumerate()
        .any(|(i, c)| c.in_loop && matches!(c.method(), Some("run" | "eval")) && runs_update[i]);
    let has_init = calls.iter().any(|c| {
        matches!(
            c.callee.as_str(),
            "tf.global_variables_initializer"
                | "tf.initialize_all_variables"
                | "tf.train.MonitoredTrainingSession"
                | "tf.train.Supervisor"
        )
    });
    let learner_line = chosen.map(|(i, _)| calls[*i].line);
    b.learner_flags(
        [
            (Attr::HasInitializer, has_init),
            (Attr::OptimizerLinked, linked_minimize.is_some()),
            (Attr::GradsReset, true),
            (Attr::HasTrainingLoop, training_loop),
        ],
        learner_line,
    );
    Ok(b.finish(Dialect::TensorflowV1))
}
