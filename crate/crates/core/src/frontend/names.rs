//! Callee canonicalization and the closed tables of recognized callees.
//!
//! Keras is reached as `keras.*` whether imported standalone or through
//! `tensorflow.keras`; TensorFlow v1 as `tf.*` whether through `tensorflow`
//! or `tensorflow.compat.v1`.

use crate::layer::LayerType;

const PREFIXES: [(&str, &str); 7] = [
    ("tensorflow.compat.v1", "tf"),
    ("tensorflow.python.keras", "keras"),
    ("tensorflow.keras", "keras"),
    ("tensorflow", "tf"),
    ("tf.compat.v1", "tf"),
    ("tf.keras", "keras"),
    ("tf.contrib.keras", "keras"),
];

const KERAS_SUBMODULES: [&str; 10] = [
    "core",
    "convolutional",
    "pooling",
    "normalization",
    "normalization_v2",
    "advanced_activations",
    "reshaping",
    "activation",
    "regularization",
    "merge",
];

const KERAS_ALIASES: [(&str, &str); 6] = [
    ("Convolution1D", "Conv1D"),
    ("Convolution2D", "Conv2D"),
    ("Convolution3D", "Conv3D"),
    ("MaxPool2D", "MaxPooling2D"),
    ("AvgPool2D", "AveragePooling2D"),
    ("BatchNorm", "BatchNormalization"),
];

fn replace_prefix(path: &str, from: &str, to: &str) -> Option<String> {
    if path == from {
        return Some(to.to_string());
    }
    path.strip_prefix(from)
        .and_then(|rest| rest.strip_prefix('.'))
        .map(|rest| format!("{to}.{rest}"))
}

pub fn canonical(path: &str) -> String {
    let mut p = path.to_string();
    'outer: loop {
        for (from, to) in PREFIXES {
            if let Some(next) = replace_prefix(&p, from, to) {
                p = next;
                continue 'outer;
            }
        }
        break;
    }
    for sub in KERAS_SUBMODULES {
        if let Some(rest) = p.strip_prefix(&format!("keras.layers.{sub}.")) {
            p = format!("keras.layers.{rest}");
            break;
        }
    }
    if let Some(rest) = p.strip_prefix("keras.models.") {
        p = format!("keras.{rest}");
    }
    if let Some(rest) = p.strip_prefix("keras.layers.") {
        if let Some((_, to)) = KERAS_ALIASES.iter().find(|(from, _)| *from == rest) {
            p = format!("keras.layers.{to}");
        }
    }
    if p == "keras.Sequential" {
        return "keras.models.Sequential".into();
    }
    if p == "keras.Model" {
        return "keras.models.Model".into();
    }
    p
}

pub fn is_dl_path(callee: &str) -> bool {
    callee.starts_with("keras.") || callee.starts_with("tf.")
}

const KERAS_LAYERS: [(&str, LayerType); 16] = [
    ("Dense", LayerType::Dense),
    ("Conv1D", LayerType::Conv1d),
    ("Conv2D", LayerType::Conv2d),
    ("Conv3D", LayerType::Conv3d),
    ("MaxPooling2D", LayerType::MaxPool2d),
    ("AveragePooling2D", LayerType::AvgPool2d),
    ("Flatten", LayerType::Flatten),
    ("Reshape", LayerType::Reshape),
    ("Dropout", LayerType::Dropout),
    ("BatchNormalization", LayerType::BatchNorm),
    ("Activation", LayerType::Activation),
    ("ReLU", LayerType::Activation),
    ("Softmax", LayerType::Activation),
    ("LeakyReLU", LayerType::Activation),
    ("ELU", LayerType::Activation),
    ("PReLU", LayerType::Activation),
];

const KERAS_MERGE: [&str; 14] = [
    "Concatenate",
    "Add",
    "Subtract",
    "Multiply",
    "Average",
    "Maximum",
    "Minimum",
    "Dot",
    "concatenate",
    "add",
    "subtract",
    "multiply",
    "average",
    "maximum",
];

const TF_LAYERS: [(&str, LayerType); 22] = [
    ("tf.layers.dense", LayerType::Dense),
    ("tf.layers.conv1d", LayerType::Conv1d),
    ("tf.layers.conv2d", LayerType::Conv2d),
    ("tf.layers.conv3d", LayerType::Conv3d),
    ("tf.layers.max_pooling2d", LayerType::MaxPool2d),
    ("tf.layers.average_pooling2d", LayerType::AvgPool2d),
    ("tf.layers.flatten", LayerType::Flatten),
    ("tf.layers.dropout", LayerType::Dropout),
    ("tf.layers.batch_normalization", LayerType::BatchNorm),
    ("tf.contrib.layers.flatten", LayerType::Flatten),
    ("tf.contrib.layers.fully_connected", LayerType::Dense),
    ("tf.contrib.layers.batch_norm", LayerType::BatchNorm),
    ("tf.nn.batch_normalization", LayerType::BatchNorm),
    ("tf.nn.conv1d", LayerType::Conv1d),
    ("tf.nn.conv2d", LayerType::Conv2d),
    ("tf.matmul", LayerType::Dense),
    ("tf.nn.max_pool", LayerType::MaxPool2d),
    ("tf.nn.max_pool2d", LayerType::MaxPool2d),
    ("tf.nn.avg_pool", LayerType::AvgPool2d),
    ("tf.nn.avg_pool2d", LayerType::AvgPool2d),
    ("tf.nn.dropout", LayerType::Dropout),
    ("tf.reshape", LayerType::Reshape),
];

const TF_ACTIVATIONS: [(&str, &str); 15] = [
    ("tf.nn.relu", "relu"),
    ("tf.nn.relu6", "relu6"),
    ("tf.nn.sigmoid", "sigmoid"),
    ("tf.sigmoid", "sigmoid"),
    ("tf.nn.softmax", "softmax"),
    ("tf.nn.log_softmax", "log_softmax"),
    ("tf.nn.tanh", "tanh"),
    ("tf.tanh", "tanh"),
    ("tf.nn.elu", "elu"),
    ("tf.nn.selu", "selu"),
    ("tf.nn.leaky_relu", "leaky_relu"),
    ("tf.nn.softplus", "softplus"),
    ("tf.nn.softsign", "softsign"),
    ("tf.nn.swish", "swish"),
    ("tf.nn.gelu", "gelu"),
];

const TF_MERGE: [&str; 3] = ["tf.concat", "tf.stack", "tf.add_n"];

/// Layer type built by a canonical callee, if it builds one. Unrecognized
/// Keras layer classes map to [`LayerType::Unknown`].
pub fn layer_kind(callee: &str) -> Option<LayerType> {
    if let Some(name) = callee.strip_prefix("keras.layers.") {
        if let Some((_, t)) = KERAS_LAYERS.iter().find(|(n, _)| *n == name) {
            return Some(*t);
        }
        let is_class = name.chars().next().is_some_and(|c| c.is_ascii_uppercase()) && !name.contains('.');
        if is_class && !matches!(name, "Input" | "InputLayer") && !KERAS_MERGE.contains(&name) {
            return Some(LayerType::Unknown);
        }
        return None;
    }
    if let Some((_, t)) = TF_LAYERS.iter().find(|(n, _)| *n == callee) {
        return Some(*t);
    }
    if tf_activation(callee).is_some() {
        return Some(LayerType::Activation);
    }
    None
}

pub fn tf_activation(callee: &str) -> Option<&'static str> {
    TF_ACTIVATIONS.iter().find(|(n, _)| *n == callee).map(|(_, a)| *a)
}

/// Calls that join several tensors, which a layer chain cannot represent.
pub fn is_merge(callee: &str) -> bool {
    if let Some(name) = callee.strip_prefix("keras.layers.") {
        return KERAS_MERGE.contains(&name);
    }
    TF_MERGE.contains(&callee)
}

/// Fully qualified path for a Keras name used without an import.
pub fn keras_bare_name(name: &str) -> Option<String> {
    if name == "Sequential" {
        return Some("keras.models.Sequential".into());
    }
    let known = KERAS_LAYERS.iter().any(|(n, _)| *n == name)
        || KERAS_ALIASES.iter().any(|(n, _)| *n == name)
        || matches!(name, "InputLayer");
    known.then(|| canonical(&format!("keras.layers.{name}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_paths() {
        assert_eq!(canonical("tensorflow.keras.layers.Dense"), "keras.layers.Dense");
        assert_eq!(canonical("tf.keras.layers.Conv2D"), "keras.layers.Conv2D");
        assert_eq!(canonical("tensorflow.compat.v1.placeholder"), "tf.placeholder");
        assert_eq!(canonical("tf.compat.v1.layers.dense"), "tf.layers.dense");
        assert_eq!(canonical("tensorflow.train.AdamOptimizer"), "tf.train.AdamOptimizer");
        assert_eq!(canonical("keras.layers.convolutional.Convolution2D"), "keras.layers.Conv2D");
        assert_eq!(canonical("keras.layers.MaxPool2D"), "keras.layers.MaxPooling2D");
        assert_eq!(canonical("keras.Sequential"), "keras.models.Sequential");
        assert_eq!(canonical("tf.keras.models.Sequential"), "keras.models.Sequential");
        assert_eq!(canonical("numpy.zeros"), "numpy.zeros");
    }

    #[test]
    fn layer_tables() {
        assert_eq!(layer_kind("keras.layers.Dense"), Some(LayerType::Dense));
        assert_eq!(layer_kind("keras.layers.LSTM"), Some(LayerType::Unknown));
        assert_eq!(layer_kind("keras.layers.Concatenate"), None);
        assert!(is_merge("keras.layers.Concatenate"));
        assert_eq!(layer_kind("tf.nn.relu"), Some(LayerType::Activation));
        assert_eq!(layer_kind("tf.layers.conv2d"), Some(LayerType::Conv2d));
        assert_eq!(layer_kind("tf.placeholder"), None);
        assert_eq!(keras_bare_name("Conv2D").as_deref(), Some("keras.layers.Conv2D"));
        assert_eq!(keras_bare_name("MaxPool2D").as_deref(), Some("keras.layers.MaxPooling2D"));
        assert_eq!(keras_bare_name("foo"), None);
    }
}
