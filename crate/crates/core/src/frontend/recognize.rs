//! Maps recorded layer calls to layer node attributes, filling library
//! defaults for omitted arguments.

use super::defaults;
use super::interp::{ApiCall, Value};
use super::names::{layer_kind, tf_activation};
use crate::graph::{Attr, AttrValue};
use crate::layer::{is_linear_activation, LayerType};
use crate::shape::TargetBatch;
use crate::tensor::{Dim, TensorShape};

#[derive(Debug, Clone, PartialEq)]
pub struct LayerSpec {
    pub layer_type: LayerType,
    pub attrs: Vec<(Attr, AttrValue)>,
    /// Input shape declared on the layer (`input_shape`, `input_dim`, ...).
    pub input_shape: Option<TensorShape>,
}

impl LayerSpec {
    fn new(layer_type: LayerType) -> Self {
        LayerSpec {
            layer_type,
            attrs: vec![(Attr::LayerType, AttrValue::text(layer_type.as_str()))],
            input_shape: None,
        }
    }

    fn set(&mut self, a: Attr, v: AttrValue) {
        self.attrs.retain(|(k, _)| *k != a);
        self.attrs.push((a, v));
    }

    fn set_opt(&mut self, a: Attr, v: Option<AttrValue>) {
        if let Some(v) = v {
            self.set(a, v);
        }
    }

    pub fn get(&self, a: Attr) -> Option<&AttrValue> {
        self.attrs.iter().find(|(k, _)| *k == a).map(|(_, v)| v)
    }

    fn activation(&mut self, name: Option<String>) {
        if let Some(name) = name {
            self.set(Attr::Nonlinear, AttrValue::Bool(!is_linear_activation(&name)));
            self.set(Attr::Activation, AttrValue::Text(name));
        }
    }
}

/// Resolves argument values that refer to other recorded calls.
pub struct Resolver<'a> {
    pub calls: &'a [ApiCall],
}

impl Resolver<'_> {
    fn call(&self, v: &Value) -> Option<&ApiCall> {
        match v {
            Value::Call(i) => self.calls.get(*i),
            _ => None,
        }
    }

    fn last_component(path: &str) -> &str {
        path.rsplit('.').next().unwrap_or(path)
    }

    pub fn activation(&self, v: &Value) -> Option<String> {
        match v {
            Value::Str(s) => Some(defaults::activation_name(s)),
            Value::None => Some("none".into()),
            Value::Path(p) => Some(
                tf_activation(&super::names::canonical(p))
                    .map(str::to_string)
                    .unwrap_or_else(|| defaults::activation_name(Self::last_component(p))),
            ),
            Value::Call(_) => {
                let c = self.call(v)?;
                if c.callee.starts_with("keras.layers.") || c.callee.starts_with("keras.activations.") {
                    Some(defaults::activation_name(Self::last_component(&c.callee)))
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    pub fn initializer(&self, v: &Value) -> Option<String> {
        match v {
            Value::Str(s) => Some(defaults::initializer_name(s)),
            Value::Path(p) => Some(defaults::initializer_name(Self::last_component(p))),
            Value::Call(_) => {
                let c = self.call(v)?;
                if c.method().is_some() || c.callee == "()" {
                    return None;
                }
                let name = defaults::initializer_name(Self::last_component(&c.callee));
                if name == "constant" {
                    return match c.arg("value", 0).and_then(Value::as_f64) {
                        Some(x) if x == 0.0 => Some("zeros".into()),
                        Some(x) if x == 1.0 => Some("ones".into()),
                        _ => Some(name),
                    };
                }
                Some(name)
            }
            _ => None,
        }
    }

    /// Shape and initializer of a TensorFlow variable such as
    /// `tf.Variable(tf.truncated_normal([5, 5, 1, 32]))`.
    pub fn variable(&self, v: &Value) -> Option<(Vec<i64>, Option<String>)> {
        let c = self.call(v)?;
        match c.callee.as_str() {
            "tf.Variable" => {
                let init = c.arg("initial_value", 0)?;
                let ic = self.call(init)?;
                let shape = ic.arg("shape", 0).and_then(|s| s.as_int_list(None));
                let shape = match (shape, ic.callee.as_str()) {
                    (Some(s), _) => s,
                    (None, "tf.constant") => ic.kwarg("shape")?.as_int_list(None)?,
                    _ => return None,
                };
                Some((shape, self.initializer(init)))
            }
            "tf.get_variable" => {
                let shape = c.arg("shape", 1)?.as_int_list(None)?;
                let init = match c.arg("initializer", 3) {
                    Some(Value::None) | None => Some(defaults::KERNEL_INITIALIZER.to_string()),
                    Some(i) => self.initializer(i),
                };
                Some((shape, init))
            }
            _ => None,
        }
    }
}

fn int_tuple(v: &Value, n: usize) -> Option<Vec<i64>> {
    match v {
        Value::Int(k) if *k >= 1 => Some(vec![*k; n]),
        Value::List(_) => {
            let l = v.as_int_list(None)?;
            match l.len() {
                len if len == n => Some(l),
                1 => Some(vec![l[0]; n]),
                _ => None,
            }
        }
        _ => None,
    }
}

fn ints(v: Vec<i64>) -> AttrValue {
    AttrValue::IntList(v)
}

fn text(v: &Value) -> Option<AttrValue> {
    v.as_str().map(|s| AttrValue::text(s.to_ascii_lowercase()))
}

fn int(v: &Value) -> Option<AttrValue> {
    v.as_int().filter(|&k| k >= 1).map(AttrValue::Int)
}

fn shape_from(v: &Value, leading_batch: bool) -> Option<TensorShape> {
    let Value::List(items) = v else {
        return match v {
            Value::Int(n) if !leading_batch && *n >= 1 => Some(TensorShape::batched(&[*n as u64])),
            _ => None,
        };
    };
    let items = if leading_batch { items.get(1..)? } else { &items[..] };
    let mut dims = vec![Dim::Batch];
    for d in items {
        dims.push(match d.as_int() {
            Some(k) if k >= 1 => Dim::Known(k as u64),
            _ => Dim::Unknown,
        });
    }
    Some(TensorShape::new(dims))
}

fn keras_data_format(c: &ApiCall, pos: usize) -> Option<AttrValue> {
    if let Some(v) = c.kwarg("dim_ordering") {
        return match v.as_str() {
            Some("th") => Some(AttrValue::text("channels_first")),
            Some("tf") => Some(AttrValue::text("channels_last")),
            _ => None,
        };
    }
    match c.arg("data_format", pos) {
        Some(Value::None) | None => Some(AttrValue::text(defaults::DATA_FORMAT)),
        Some(v) => text(v),
    }
}

fn learning_defaults(spec: &mut LayerSpec, r: &Resolver<'_>, c: &ApiCall, positions: [Option<usize>; 3]) {
    let [bias_pos, kinit_pos, binit_pos] = positions;
    let lookup = |name: &str, pos: Option<usize>| match pos {
        Some(p) => c.arg(name, p),
        None => c.kwarg(name),
    };
    let use_bias = match lookup("use_bias", bias_pos) {
        None => Some(defaults::USE_BIAS),
        Some(v) => v.as_bool().filter(|_| !matches!(v, Value::None)),
    };
    spec.set_opt(Attr::UseBias, use_bias.map(AttrValue::Bool));
    let kinit = lookup("kernel_initializer", kinit_pos)
        .or_else(|| c.kwarg("init"))
        .or_else(|| c.kwarg("weights_initializer"));
    let kinit = match kinit {
        None | Some(Value::None) => Some(defaults::KERNEL_INITIALIZER.to_string()),
        Some(v) => r.initializer(v),
    };
    spec.set_opt(Attr::KernelInitializer, kinit.map(AttrValue::Text));
    let binit = lookup("bias_initializer", binit_pos).or_else(|| c.kwarg("biases_initializer"));
    let binit = match binit {
        None | Some(Value::None) => Some(defaults::BIAS_INITIALIZER.to_string()),
        Some(v) => r.initializer(v),
    };
    spec.set_opt(Attr::BiasInitializer, binit.map(AttrValue::Text));
}

fn input_shape_kwargs(c: &ApiCall) -> Option<TensorShape> {
    if let Some(v) = c.kwarg("input_shape") {
        return shape_from(v, false);
    }
    if let Some(v) = c.kwarg("batch_input_shape").or_else(|| c.kwarg("batch_shape")) {
        return shape_from(v, true);
    }
    if let Some(v) = c.kwarg("input_dim") {
        return v.as_int().filter(|&n| n >= 1).map(|n| TensorShape::batched(&[n as u64]));
    }
    None
}

/// Layer spec for a recorded call, or `None` when the call builds no layer.
pub fn recognize_layer(c: &ApiCall, calls: &[ApiCall]) -> Option<LayerSpec> {
    let kind = layer_kind(&c.callee)?;
    let r = Resolver { calls };
    let mut spec = if c.callee.starts_with("keras.") {
        keras_layer(c, kind, &r)
    } else {
        tf_layer(c, kind, &r)
    };
    spec.set(Attr::Callee, AttrValue::text(c.callee.as_str()));
    Some(spec)
}

fn keras_layer(c: &ApiCall, kind: LayerType, r: &Resolver<'_>) -> LayerSpec {
    let mut s = LayerSpec::new(kind);
    s.input_shape = input_shape_kwargs(c);
    let name = c.callee.rsplit('.').next().unwrap_or("");
    match kind {
        LayerType::Dense => {
            s.set_opt(Attr::Units, c.arg("units", 0).or_else(|| c.kwarg("output_dim")).and_then(int));
            let act = c.arg("activation", 1).map_or(Some(defaults::ACTIVATION.to_string()), |v| r.activation(v));
            s.activation(act);
            learning_defaults(&mut s, r, c, [Some(2), Some(3), Some(4)]);
        }
        LayerType::Conv1d | LayerType::Conv2d | LayerType::Conv3d => {
            let n = kind.spatial_rank().unwrap_or(2);
            s.set_opt(Attr::Filters, c.arg("filters", 0).or_else(|| c.kwarg("nb_filter")).and_then(int));
            // positional kernel extents as in Convolution2D(32, 3, 3)
            let legacy: Option<Vec<i64>> = (n >= 2 && c.args.len() > n)
                .then(|| c.args[1..=n].iter().map(Value::as_int).collect::<Option<Vec<_>>>())
                .flatten();
            let legacy_kw = match (c.kwarg("nb_row").and_then(Value::as_int), c.kwarg("nb_col").and_then(Value::as_int)) {
                (Some(a), Some(b)) => Some(vec![a, b]),
                _ => None,
            };
            let kernel = match (&legacy, c.kwarg("kernel_size").or_else(|| c.args.get(1))) {
                (Some(k), None) | (Some(k), Some(Value::Int(_))) if c.kwarg("kernel_size").is_none() => Some(k.clone()),
                (_, Some(v)) => int_tuple(v, n),
                _ => None,
            }
            .or(legacy_kw);
            s.set_opt(Attr::Kernel, kernel.map(ints));
            let shift = if legacy.is_some() { n - 1 } else { 0 };
            let strides = c
                .kwarg("strides")
                .or_else(|| c.kwarg("subsample"))
                .or_else(|| c.args.get(2 + shift))
                .map_or(Some(vec![defaults::STRIDE; n]), |v| int_tuple(v, n));
            s.set_opt(Attr::Strides, strides.map(ints));
            let padding = c
                .kwarg("padding")
                .or_else(|| c.kwarg("border_mode"))
                .or_else(|| c.args.get(3 + shift))
                .map_or(Some(AttrValue::text(defaults::PADDING)), text);
            s.set_opt(Attr::Padding, padding);
            s.set_opt(Attr::DataFormat, keras_data_format(c, 4 + shift));
            let act = c.kwarg("activation").map_or(Some(defaults::ACTIVATION.to_string()), |v| r.activation(v));
            s.activation(act);
            learning_defaults(&mut s, r, c, [None, None, None]);
        }
        LayerType::MaxPool2d | LayerType::AvgPool2d => {
            let pool = c
                .arg("pool_size", 0)
                .map_or(Some(vec![defaults::POOL_SIZE; 2]), |v| int_tuple(v, 2));
            let strides = match c.arg("strides", 1) {
                None | Some(Value::None) => pool.clone(),
                Some(v) => int_tuple(v, 2),
            };
            s.set_opt(Attr::PoolSize, pool.map(ints));
            s.set_opt(Attr::Strides, strides.map(ints));
            let padding = c
                .kwarg("border_mode")
                .or_else(|| c.arg("padding", 2))
                .map_or(Some(AttrValue::text(defaults::PADDING)), text);
            s.set_opt(Attr::Padding, padding);
            s.set_opt(Attr::DataFormat, keras_data_format(c, 3));
        }
        LayerType::Flatten | LayerType::BatchNorm => {}
        LayerType::Reshape => {
            let target = c.arg("target_shape", 0).and_then(|v| v.as_int_list(Some(-1)));
            s.set_opt(Attr::TargetShape, target.map(ints));
            s.set(Attr::TargetBatch, AttrValue::text(TargetBatch::Keep.as_str()));
        }
        LayerType::Dropout => {
            let rate = c.arg("rate", 0).or_else(|| c.kwarg("p")).and_then(Value::as_f64);
            s.set_opt(Attr::Rate, rate.map(AttrValue::Float));
        }
        LayerType::Activation => {
            let act = match name {
                "Activation" => c.arg("activation", 0).and_then(|v| r.activation(v)),
                other => Some(defaults::activation_name(other)),
            };
            s.activation(act);
        }
        LayerType::Unknown => {}
    }
    s
}

/// The tensor a TensorFlow op consumes.
pub fn tensor_input(c: &ApiCall) -> Option<&Value> {
    for k in ["inputs", "input", "x", "value", "tensor", "features", "logits", "a"] {
        if let Some(v) = c.kwarg(k) {
            return Some(v);
        }
    }
    c.args.first()
}

fn nhwc_window(v: &Value, channels_first: bool) -> Option<Vec<i64>> {
    let l = v.as_int_list(None)?;
    match (l.len(), channels_first) {
        (4, false) => Some(l[1..3].to_vec()),
        (4, true) => Some(l[2..4].to_vec()),
        (2, _) => Some(l),
        (1, _) => Some(vec![l[0]; 2]),
        _ => v.as_int().map(|k| vec![k; 2]),
    }
}

fn tf_layer(c: &ApiCall, kind: LayerType, r: &Resolver<'_>) -> LayerSpec {
    let mut s = LayerSpec::new(kind);
    let callee = c.callee.as_str();
    if let Some(act) = tf_activation(callee) {
        s.activation(Some(act.to_string()));
        return s;
    }
    let tf_act = |pos: usize| {
        c.arg("activation", pos)
            .map_or(Some(defaults::ACTIVATION.to_string()), |v| r.activation(v))
    };
    match callee {
        "tf.layers.dense" => {
            s.set_opt(Attr::Units, c.arg("units", 1).and_then(int));
            s.activation(tf_act(2));
            learning_defaults(&mut s, r, c, [Some(3), Some(4), Some(5)]);
        }
        "tf.contrib.layers.fully_connected" => {
            s.set_opt(Attr::Units, c.arg("num_outputs", 1).and_then(int));
            let act = c.arg("activation_fn", 2).map_or(Some("relu".to_string()), |v| r.activation(v));
            s.activation(act);
            learning_defaults(&mut s, r, c, [None, None, None]);
        }
        "tf.layers.conv1d" | "tf.layers.conv2d" | "tf.layers.conv3d" => {
            let n = kind.spatial_rank().unwrap_or(2);
            s.set_opt(Attr::Filters, c.arg("filters", 1).and_then(int));
            s.set_opt(Attr::Kernel, c.arg("kernel_size", 2).and_then(|v| int_tuple(v, n)).map(ints));
            let strides = c.arg("strides", 3).map_or(Some(vec![defaults::STRIDE; n]), |v| int_tuple(v, n));
            s.set_opt(Attr::Strides, strides.map(ints));
            s.set_opt(
                Attr::Padding,
                c.arg("padding", 4).map_or(Some(AttrValue::text(defaults::PADDING)), text),
            );
            s.set_opt(Attr::DataFormat, keras_data_format(c, 5));
            s.activation(tf_act(7));
            learning_defaults(&mut s, r, c, [Some(8), Some(9), Some(10)]);
        }
        "tf.layers.max_pooling2d" | "tf.layers.average_pooling2d" => {
            let pool = c.arg("pool_size", 1).and_then(|v| int_tuple(v, 2));
            let strides = c.arg("strides", 2).and_then(|v| int_tuple(v, 2));
            s.set_opt(Attr::PoolSize, pool.map(ints));
            s.set_opt(Attr::Strides, strides.map(ints));
            s.set_opt(
                Attr::Padding,
                c.arg("padding", 3).map_or(Some(AttrValue::text(defaults::PADDING)), text),
            );
            s.set_opt(Attr::DataFormat, keras_data_format(c, 4));
        }
        "tf.nn.conv2d" | "tf.nn.conv1d" => {
            let n = kind.spatial_rank().unwrap_or(2);
            let cf = matches!(c.arg("data_format", 4).and_then(Value::as_str), Some("NCHW" | "NCW"));
            if cf {
                s.set(Attr::DataFormat, AttrValue::text("channels_first"));
            } else {
                s.set(Attr::DataFormat, AttrValue::text(defaults::DATA_FORMAT));
            }
            if let Some((shape, init)) = c.arg("filters", 1).or_else(|| c.kwarg("filter")).and_then(|v| r.variable(v)) {
                if shape.len() == n + 2 {
                    s.set(Attr::Kernel, ints(shape[..n].to_vec()));
                    s.set_opt(Attr::Filters, int(&Value::Int(shape[n + 1])));
                }
                s.set_opt(Attr::KernelInitializer, init.map(AttrValue::Text));
            }
            let strides = c.arg("strides", 2).and_then(|v| {
                if n == 1 {
                    v.as_int().map(|k| vec![k]).or_else(|| v.as_int_list(None).filter(|l| l.len() == 1))
                } else {
                    nhwc_window(v, cf)
                }
            });
            s.set_opt(Attr::Strides, strides.map(ints));
            s.set_opt(Attr::Padding, c.arg("padding", 3).and_then(text));
            s.set(Attr::UseBias, AttrValue::Bool(false));
            s.activation(Some("none".into()));
        }
        "tf.matmul" => {
            if let Some((shape, init)) = c.arg("b", 1).and_then(|v| r.variable(v)) {
                if shape.len() == 2 {
                    s.set_opt(Attr::Units, int(&Value::Int(shape[1])));
                }
                s.set_opt(Attr::KernelInitializer, init.map(AttrValue::Text));
            }
            s.set(Attr::UseBias, AttrValue::Bool(false));
            s.activation(Some("none".into()));
        }
        "tf.nn.max_pool" | "tf.nn.max_pool2d" | "tf.nn.avg_pool" | "tf.nn.avg_pool2d" => {
            let cf = matches!(c.arg("data_format", 4).and_then(Value::as_str), Some("NCHW"));
            if cf {
                s.set(Attr::DataFormat, AttrValue::text("channels_first"));
            }
            let ksize = c.arg("ksize", 1).and_then(|v| nhwc_window(v, cf));
            let strides = c.arg("strides", 2).and_then(|v| nhwc_window(v, cf));
            s.set_opt(Attr::PoolSize, ksize.map(ints));
            s.set_opt(Attr::Strides, strides.map(ints));
            s.set_opt(Attr::Padding, c.arg("padding", 3).and_then(text));
        }
        "tf.layers.dropout" => {
            let rate = c.arg("rate", 1).map_or(Some(defaults::DROPOUT_RATE), Value::as_f64);
            s.set_opt(Attr::Rate, rate.map(AttrValue::Float));
        }
        "tf.nn.dropout" => {
            let rate = match (c.kwarg("rate"), c.arg("keep_prob", 1)) {
                (Some(r), _) => r.as_f64(),
                (None, Some(k)) => k.as_f64().map(|k| 1.0 - k),
                _ => None,
            };
            s.set_opt(Attr::Rate, rate.map(AttrValue::Float));
        }
        "tf.reshape" => {
            if let Some(target) = c.arg("shape", 1).and_then(|v| v.as_int_list(Some(-1))) {
                let (batch, dims) = match target.split_first() {
                    Some((-1, rest)) if !rest.is_empty() => (TargetBatch::Keep, rest.to_vec()),
                    Some((_, rest)) => (TargetBatch::Rewrite, rest.to_vec()),
                    None => (TargetBatch::Rewrite, Vec::new()),
                };
                s.set(Attr::TargetShape, ints(dims));
                s.set(Attr::TargetBatch, AttrValue::text(batch.as_str()));
            }
        }
        _ => {}
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::interp::{interpret, Options};
    use crate::frontend::parser::parse;

    fn specs(src: &str) -> Vec<LayerSpec> {
        let t = interpret(&parse(src).unwrap(), Options::default()).unwrap();
        t.calls.iter().filter_map(|c| recognize_layer(c, &t.calls)).collect()
    }

    fn attr(s: &LayerSpec, a: Attr) -> Option<&AttrValue> {
        s.get(a)
    }

    #[test]
    fn conv2d_defaults() {
        let s = &specs("Conv2D(32, (3,3))\n")[0];
        assert_eq!(s.layer_type, LayerType::Conv2d);
        assert_eq!(attr(s, Attr::Filters), Some(&AttrValue::Int(32)));
        assert_eq!(attr(s, Attr::Kernel), Some(&AttrValue::IntList(vec![3, 3])));
        assert_eq!(attr(s, Attr::Strides), Some(&AttrValue::IntList(vec![1, 1])));
        assert_eq!(attr(s, Attr::Padding), Some(&AttrValue::text("valid")));
        assert_eq!(attr(s, Attr::Activation), Some(&AttrValue::text("none")));
        assert_eq!(attr(s, Attr::Nonlinear), Some(&AttrValue::Bool(false)));
        assert_eq!(attr(s, Attr::UseBias), Some(&AttrValue::Bool(true)));
        assert_eq!(attr(s, Attr::KernelInitializer), Some(&AttrValue::text("glorot_uniform")));
        assert_eq!(attr(s, Attr::BiasInitializer), Some(&AttrValue::text("zeros")));
    }

    #[test]
    fn dense_sigmoid() {
        let s = &specs("Dense(1, activation='sigmoid')\n")[0];
        assert_eq!(s.layer_type, LayerType::Dense);
        assert_eq!(attr(s, Attr::Units), Some(&AttrValue::Int(1)));
        assert_eq!(attr(s, Attr::Activation), Some(&AttrValue::text("sigmoid")));
        assert_eq!(attr(s, Attr::Nonlinear), Some(&AttrValue::Bool(true)));
    }

    #[test]
    fn activation_layer() {
        let s = &specs("Activation('relu')\n")[0];
        assert_eq!(s.layer_type, LayerType::Activation);
        assert_eq!(attr(s, Attr::Activation), Some(&AttrValue::text("relu")));
        assert_eq!(attr(s, Attr::Nonlinear), Some(&AttrValue::Bool(true)));
    }

    #[test]
    fn legacy_keras_conv_arguments() {
        let s = &specs("Convolution2D(64, 3, 3, border_mode='same', subsample=(2, 2))\n")[0];
        assert_eq!(attr(s, Attr::Kernel), Some(&AttrValue::IntList(vec![3, 3])));
        assert_eq!(attr(s, Attr::Padding), Some(&AttrValue::text("same")));
        assert_eq!(attr(s, Attr::Strides), Some(&AttrValue::IntList(vec![2, 2])));
    }

    #[test]
    fn input_shape_and_pool_strides() {
        let v = specs("Conv2D(8, 3, input_shape=(28, 28, 1))\nMaxPooling2D(pool_size=(3, 3))\n");
        assert_eq!(v[0].input_shape, Some(TensorShape::batched(&[28, 28, 1])));
        assert_eq!(attr(&v[1], Attr::Strides), Some(&AttrValue::IntList(vec![3, 3])));
    }

    #[test]
    fn initializers() {
        let v = specs("from keras import initializers\nDense(4, kernel_initializer='zeros', bias_initializer=initializers.Constant(0.1))\nDense(4, bias_initializer=initializers.Constant(value=0))\n");
        assert_eq!(attr(&v[0], Attr::KernelInitializer), Some(&AttrValue::text("zeros")));
        assert_eq!(attr(&v[0], Attr::BiasInitializer), Some(&AttrValue::text("constant")));
        assert_eq!(attr(&v[1], Attr::BiasInitializer), Some(&AttrValue::text("zeros")));
    }

    #[test]
    fn tf_ops() {
        let src = "import tensorflow as tf\nW = tf.Variable(tf.truncated_normal([5, 5, 1, 32], stddev=0.1))\nh = tf.nn.conv2d(x, W, strides=[1, 1, 1, 1], padding='SAME')\np = tf.nn.max_pool(h, ksize=[1, 2, 2, 1], strides=[1, 2, 2, 1], padding='SAME')\nr = tf.reshape(p, [-1, 7 * 7 * 64])\nq = tf.reshape(p, [10, 49])\n";
        let v = specs(src);
        assert_eq!(v.len(), 4);
        assert_eq!(attr(&v[0], Attr::Kernel), Some(&AttrValue::IntList(vec![5, 5])));
        assert_eq!(attr(&v[0], Attr::Filters), Some(&AttrValue::Int(32)));
        assert_eq!(attr(&v[0], Attr::KernelInitializer), Some(&AttrValue::text("truncated_normal")));
        assert_eq!(attr(&v[0], Attr::Padding), Some(&AttrValue::text("same")));
        assert_eq!(attr(&v[1], Attr::PoolSize), Some(&AttrValue::IntList(vec![2, 2])));
        assert_eq!(attr(&v[2], Attr::TargetShape), Some(&AttrValue::IntList(vec![3136])));
        assert_eq!(attr(&v[2], Attr::TargetBatch), Some(&AttrValue::text("keep")));
        assert_eq!(attr(&v[3], Attr::TargetBatch), Some(&AttrValue::text("rewrite")));
    }

    #[test]
    fn unknown_keras_layer() {
        let s = &specs("from keras.layers import LSTM\nLSTM(32)\n")[0];
        assert_eq!(s.layer_type, LayerType::Unknown);
    }
}
