//! Random Keras stacks, their source text, and a shape oracle that works
//! from the layer parameters alone.
#![allow(dead_code)]

use rand::Rng;

use dlint_core::frontend::{extract_graph, Options, ScriptSource};
use dlint_core::graph::{Attr, AttributedGraph, Node, NodeKind};
use dlint_core::shape::propagate_shapes;
use dlint_core::tensor::Dim;

#[derive(Debug, Clone)]
pub enum Spec {
    Conv { filters: u64, k: u64, s: u64, same: bool },
    Pool { k: u64, s: Option<u64>, same: bool, avg: bool },
    Dropout,
    BatchNorm,
    Relu,
    Flatten,
    Dense { units: u64, act: Option<&'static str> },
}

#[derive(Debug, Clone)]
pub struct Stack {
    pub input: [u64; 3],
    pub layers: Vec<Spec>,
}

pub fn random_stack<R: Rng>(rng: &mut R, max_layers: usize) -> Stack {
    let input = [rng.gen_range(1..=64), rng.gen_range(1..=64), rng.gen_range(1..=8)];
    let total = rng.gen_range(1..=max_layers.max(1));
    let spatial = if total > 1 { rng.gen_range(0..total) } else { 0 };
    let mut layers = Vec::with_capacity(total);
    for _ in 0..spatial {
        layers.push(match rng.gen_range(0..10) {
            0..=3 => Spec::Conv {
                filters: rng.gen_range(1..=128),
                k: rng.gen_range(1..=5),
                s: if rng.gen_bool(0.8) { 1 } else { rng.gen_range(2..=3) },
                same: rng.gen_bool(0.5),
            },
            4..=5 => Spec::Pool {
                k: rng.gen_range(1..=3),
                s: rng.gen_bool(0.5).then(|| rng.gen_range(1..=3)),
                same: rng.gen_bool(0.3),
                avg: rng.gen_bool(0.2),
            },
            6 => Spec::Dropout,
            7 => Spec::BatchNorm,
            _ => Spec::Relu,
        });
    }
    let dense = total - spatial;
    if dense > 0 && rng.gen_bool(0.9) {
        layers.push(Spec::Flatten);
    }
    for i in 0..dense {
        let last = i + 1 == dense;
        layers.push(Spec::Dense {
            units: rng.gen_range(1..=256),
            act: if last { Some("softmax") } else if rng.gen_bool(0.8) { Some("relu") } else { None },
        });
    }
    Stack { input, layers }
}

pub fn keras_source(stack: &Stack) -> String {
    let [h, w, c] = stack.input;
    let mut s = String::from(
        "from keras.models import Sequential\n\
         from keras.layers import *\n\n\
         model = Sequential()\n",
    );
    s.push_str(&format!("model.add(InputLayer(input_shape=({h}, {w}, {c})))\n"));
    for l in &stack.layers {
        let line = match l {
            Spec::Conv { filters, k, s, same } => format!(
                "Conv2D({filters}, ({k}, {k}), strides=({s}, {s}), padding='{}', activation='relu')",
                if *same { "same" } else { "valid" }
            ),
            Spec::Pool { k, s, same, avg } => {
                let strides = s.map(|s| format!(", strides=({s}, {s})")).unwrap_or_default();
                format!(
                    "{}(pool_size=({k}, {k}){strides}, padding='{}')",
                    if *avg { "AveragePooling2D" } else { "MaxPooling2D" },
                    if *same { "same" } else { "valid" }
                )
            }
            Spec::Dropout => "Dropout(0.25)".into(),
            Spec::BatchNorm => "BatchNormalization()".into(),
            Spec::Relu => "Activation('relu')".into(),
            Spec::Flatten => "Flatten()".into(),
            Spec::Dense { units, act: Some(a) } => format!("Dense({units}, activation='{a}')"),
            Spec::Dense { units, act: None } => format!("Dense({units})"),
        };
        s.push_str(&format!("model.add({line})\n"));
    }
    s.push_str("model.compile(loss='categorical_crossentropy', optimizer='adam')\n");
    s.push_str("model.fit(x, y, epochs=5)\n");
    s
}

/// Expected output of one layer: non-batch dims, `None` where unknown, plus
/// the shape error code the layer should carry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expected {
    pub dims: Vec<Option<u64>>,
    pub error: Option<&'static str>,
}

fn extent(n: u64, k: u64, s: u64, same: bool) -> Option<u64> {
    if same {
        Some(n.div_ceil(s))
    } else if k <= n {
        Some((n - k) / s + 1)
    } else {
        None
    }
}

pub fn oracle(stack: &Stack) -> Vec<Expected> {
    let mut cur: Vec<Option<u64>> = stack.input.iter().map(|&d| Some(d)).collect();
    let mut out = Vec::new();
    for l in &stack.layers {
        let mut error = None;
        let next = match *l {
            Spec::Conv { filters, k, s, same } => window(&cur, k, s, same, Some(filters), &mut error),
            Spec::Pool { k, s, same, .. } => window(&cur, k, s.unwrap_or(k), same, None, &mut error),
            Spec::Dropout | Spec::BatchNorm | Spec::Relu => cur.clone(),
            Spec::Flatten => vec![cur.iter().copied().try_fold(1u64, |acc, d| d.map(|d| acc * d))],
            Spec::Dense { units, .. } => {
                if cur.len() != 1 {
                    error = Some("rank_mismatch");
                }
                vec![Some(units)]
            }
        };
        out.push(Expected { dims: next.clone(), error });
        cur = next;
    }
    out
}

fn window(
    cur: &[Option<u64>],
    k: u64,
    s: u64,
    same: bool,
    filters: Option<u64>,
    error: &mut Option<&'static str>,
) -> Vec<Option<u64>> {
    if cur.len() != 3 {
        *error = Some("rank_mismatch");
        return vec![None, None, filters];
    }
    let mut dims = Vec::new();
    for d in &cur[..2] {
        dims.push(match d {
            Some(n) => {
                let e = extent(*n, k, s, same);
                if e.is_none() {
                    error.get_or_insert("spatial_underflow");
                }
                e
            }
            None => None,
        });
    }
    dims.push(filters.or(cur[2]));
    dims
}

pub fn shaped_graph(src: &str) -> AttributedGraph {
    let ex = extract_graph(&ScriptSource::new("gen.py", src), Options::default()).expect("generated source extracts");
    propagate_shapes(ex.graph)
}

/// Layers in chain order, starting after the input layer.
pub fn chain(g: &AttributedGraph) -> Vec<&Node> {
    let input = g.first_of(NodeKind::InputLayer).expect("input layer");
    let mut out = Vec::new();
    let mut cur = input.id;
    while let Some(n) = g.next_of(cur) {
        out.push(g.node(n).unwrap());
        cur = n;
    }
    out
}

pub fn observed(n: &Node) -> Expected {
    let dims = n
        .shape(Attr::OutShape)
        .map(|s| s.dims[1..].iter().map(|d| d.known()).collect())
        .unwrap_or_default();
    assert!(n.shape(Attr::OutShape).is_none_or(|s| s.dims[0] == Dim::Batch));
    let error = n.text(Attr::ShapeError).map(|e| match e {
        "rank_mismatch" => "rank_mismatch",
        "spatial_underflow" => "spatial_underflow",
        "data_loss" => "data_loss",
        _ => "batch_altered",
    });
    Expected { dims, error }
}
